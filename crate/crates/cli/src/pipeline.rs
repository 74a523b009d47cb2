//! Detect -> crop -> recognize orchestration for one image.

use crate::persian::persian_of_tokens;
use crate::CliError;
use lpr_core::ctc::{beam_decode, greedy_decode};
use lpr_core::data::{decode_label, resize_bilinear, MAX_LABEL_LEN, PLATE_IMAGE_HEIGHT, PLATE_IMAGE_WIDTH};
use lpr_core::detect::{BoundingBox, DetectionRequest, Detector};
use lpr_core::model::Crnn;
use lpr_core::tensor::Tensor;

/// Standard plate length; readings are padded to it.
pub const READING_LEN: usize = MAX_LABEL_LEN;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReadingStatus {
    Ok,
    NotKnown,
}

impl ReadingStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            ReadingStatus::Ok => "ok",
            ReadingStatus::NotKnown => "not_known",
        }
    }
}

/// One recognized plate: the source box, the raw decoded tokens, the
/// eight-character padded form, and its Persian rendering.
#[derive(Debug, Clone, PartialEq)]
pub struct PlateReading {
    pub bbox: BoundingBox,
    pub tokens: String,
    pub padded: String,
    pub persian: String,
    pub status: ReadingStatus,
}

/// Decoder selection for the recognition step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RecognizeOptions {
    /// Beam width; `None` selects greedy decoding.
    pub beam: Option<usize>,
    /// Extra pixels added around each detection box before cropping.
    pub margin: f64,
}

/// Crops a box (expanded by `margin`, clamped to the image) out of a
/// grayscale `[H, W, 1]` tensor.
pub fn crop_image(image: &Tensor, bbox: &BoundingBox, margin: f64) -> Result<Tensor, CliError> {
    let (h, w) = (image.shape()[0], image.shape()[1]);
    let left = ((bbox.left - margin).floor().max(0.0)) as usize;
    let top = ((bbox.top - margin).floor().max(0.0)) as usize;
    let right = ((bbox.right + margin).ceil().min(w as f64)) as usize;
    let bottom = ((bbox.bottom + margin).ceil().min(h as f64)) as usize;
    if right <= left || bottom <= top {
        return Err(CliError::Data(format!(
            "detection box ({}, {}, {}, {}) lies outside the {w}x{h} image",
            bbox.left, bbox.top, bbox.right, bbox.bottom
        )));
    }
    let (ch, cw) = (bottom - top, right - left);
    let mut out = Tensor::zeros(vec![ch, cw, 1]);
    for y in 0..ch {
        let src = (top + y) * w + left;
        out.data_mut()[y * cw..(y + 1) * cw].copy_from_slice(&image.data()[src..src + cw]);
    }
    Ok(out)
}

/// Pads raw tokens to the standard length; more than eight decoded
/// tokens are truncated.
pub fn pad_reading(tokens: &str) -> (String, ReadingStatus) {
    let status = if tokens.chars().count() < READING_LEN {
        ReadingStatus::NotKnown
    } else {
        ReadingStatus::Ok
    };
    let mut padded: String = tokens.chars().take(READING_LEN).collect();
    while padded.chars().count() < READING_LEN {
        padded.push(lpr_core::data::PAD_TOKEN);
    }
    (padded, status)
}

/// Runs one plate crop through the recognizer.
pub fn recognize_crop(
    model: &Crnn,
    crop: &Tensor,
    options: &RecognizeOptions,
) -> Result<(String, String, ReadingStatus), CliError> {
    let input = resize_bilinear(crop, PLATE_IMAGE_HEIGHT, PLATE_IMAGE_WIDTH);
    let probs = model
        .infer(&input)
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    let alphabet = model.alphabet();
    let label = match options.beam {
        Some(width) => beam_decode(&probs, &alphabet, width),
        None => greedy_decode(&probs, &alphabet),
    };
    let tokens = decode_label(&label);
    let (padded, status) = pad_reading(&tokens);
    let truncated: String = tokens.chars().take(READING_LEN).collect();
    Ok((truncated, padded, status))
}

/// Full per-image pipeline: every detected box is cropped and read.
/// A failing box yields its own error entry without aborting the rest.
pub fn recognize_image(
    model: &Crnn,
    detector: &dyn Detector,
    source_id: &str,
    image: &Tensor,
    truth_boxes: Option<&[BoundingBox]>,
    options: &RecognizeOptions,
) -> Result<Vec<Result<PlateReading, CliError>>, CliError> {
    let request = DetectionRequest { source_id, image, truth_boxes };
    let detections = detector
        .detect(&request)
        .map_err(|e| CliError::Data(e.to_string()))?;
    let mut readings = Vec::with_capacity(detections.len());
    for det in detections {
        let reading = crop_image(image, &det.bbox, options.margin).and_then(|crop| {
            let (tokens, padded, status) = recognize_crop(model, &crop, options)?;
            Ok(PlateReading {
                bbox: det.bbox,
                persian: persian_of_tokens(&padded),
                tokens,
                padded,
                status,
            })
        });
        readings.push(reading);
    }
    Ok(readings)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pad_fills_right_and_flags_short_readings() {
        let (padded, status) = pad_reading("123456");
        assert_eq!(padded, "123456XX");
        assert_eq!(status, ReadingStatus::NotKnown);

        let (padded, status) = pad_reading("12B45678");
        assert_eq!(padded, "12B45678");
        assert_eq!(status, ReadingStatus::Ok);

        let (padded, status) = pad_reading("");
        assert_eq!(padded, "XXXXXXXX");
        assert_eq!(status, ReadingStatus::NotKnown);

        // overly long decodes are truncated, not errors
        let (padded, status) = pad_reading("123456789");
        assert_eq!(padded, "12345678");
        assert_eq!(status, ReadingStatus::Ok);
    }

    #[test]
    fn padded_reading_is_always_eight_chars_with_pad_only_as_suffix() {
        for tokens in ["", "1", "1234", "12B4567", "12B45678"] {
            let (padded, _) = pad_reading(tokens);
            assert_eq!(padded.chars().count(), 8);
            let trimmed = padded.trim_end_matches('X');
            assert!(!trimmed.contains('X'), "pad appears mid-string in {padded:?}");
        }
    }

    #[test]
    fn crop_extracts_the_box() {
        let mut image = Tensor::zeros(vec![10, 20, 1]);
        for y in 3..7 {
            for x in 5..11 {
                image.data_mut()[y * 20 + x] = 1.0;
            }
        }
        let bbox = BoundingBox::new(5.0, 3.0, 11.0, 7.0).unwrap();
        let crop = crop_image(&image, &bbox, 0.0).unwrap();
        assert_eq!(crop.shape(), &[4, 6, 1]);
        assert!(crop.data().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn crop_clamps_to_image_bounds() {
        let image = Tensor::filled(vec![10, 20, 1], 0.5);
        let bbox = BoundingBox::new(15.0, 5.0, 30.0, 14.0).unwrap();
        let crop = crop_image(&image, &bbox, 2.0).unwrap();
        assert_eq!(crop.shape(), &[7, 7, 1]); // y 3..10, x 13..20
    }

    #[test]
    fn fully_outside_box_is_an_error() {
        let image = Tensor::filled(vec![10, 20, 1], 0.5);
        let bbox = BoundingBox::new(25.0, 2.0, 30.0, 8.0).unwrap();
        assert!(crop_image(&image, &bbox, 0.0).is_err());
    }

    #[test]
    fn zero_detections_give_empty_readings() {
        use lpr_core::detect::OracleDetector;
        use lpr_core::model::{Crnn, CrnnConfig};
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let model = Crnn::build(CrnnConfig::default(), &mut rng).unwrap();
        let image = Tensor::filled(vec![50, 200, 1], 0.5);
        let readings = recognize_image(
            &model,
            &OracleDetector::exact(),
            "empty",
            &image,
            Some(&[]),
            &RecognizeOptions::default(),
        )
        .unwrap();
        assert!(readings.is_empty());
    }

    #[test]
    fn failing_box_does_not_abort_others() {
        use lpr_core::detect::{BoundingBox as BB, DetectError, Detection, DetectionRequest, Detector};
        use lpr_core::model::{Crnn, CrnnConfig};
        use rand::SeedableRng;

        struct TwoBoxes;
        impl Detector for TwoBoxes {
            fn detect(&self, r: &DetectionRequest) -> Result<Vec<Detection>, DetectError> {
                let w = r.image_width() as f64;
                let h = r.image_height() as f64;
                Ok(vec![
                    // entirely off the image: cropping fails
                    Detection::new(BB::new(w + 5.0, 0.0, w + 10.0, h).unwrap(), 0.9).unwrap(),
                    Detection::new(BB::new(0.0, 0.0, w, h).unwrap(), 0.8).unwrap(),
                ])
            }
        }

        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let model = Crnn::build(CrnnConfig::default(), &mut rng).unwrap();
        let image = Tensor::filled(vec![50, 200, 1], 0.5);
        let readings = recognize_image(
            &model,
            &TwoBoxes,
            "mixed",
            &image,
            None,
            &RecognizeOptions::default(),
        )
        .unwrap();
        assert_eq!(readings.len(), 2);
        assert!(readings[0].is_err());
        let ok = readings[1].as_ref().unwrap();
        assert_eq!(ok.padded.chars().count(), 8);
    }

    #[test]
    fn margin_expands_the_crop() {
        let image = Tensor::filled(vec![50, 100, 1], 0.1);
        let bbox = BoundingBox::new(40.0, 20.0, 60.0, 30.0).unwrap();
        let plain = crop_image(&image, &bbox, 0.0).unwrap();
        let wide = crop_image(&image, &bbox, 5.0).unwrap();
        assert_eq!(plain.shape(), &[10, 20, 1]);
        assert_eq!(wide.shape(), &[20, 30, 1]);
    }
}
