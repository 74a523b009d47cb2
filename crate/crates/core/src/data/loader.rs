//! Labeled-directory and manifest loading.
//!
//! Labels ride in the file name: `<LABEL>[_<n>].<ext>`, with the
//! optional `_n` suffix only disambiguating duplicates. Images are
//! converted to grayscale in [0, 1] and resized to the recognition
//! input size.

use super::{encode_label, DataError, PlateSample};
use crate::detect::read_annotation_file;
use crate::tensor::Tensor;
use std::path::Path;

/// Recognition input width in pixels.
pub const PLATE_IMAGE_WIDTH: usize = 200;
/// Recognition input height in pixels.
pub const PLATE_IMAGE_HEIGHT: usize = 50;

const IMAGE_EXTENSIONS: [&str; 4] = ["png", "jpg", "jpeg", "bmp"];

/// Bilinear resample of a grayscale `[H, W, 1]` tensor.
pub fn resize_bilinear(src: &Tensor, out_h: usize, out_w: usize) -> Tensor {
    let (h, w) = (src.shape()[0], src.shape()[1]);
    if h == out_h && w == out_w {
        return src.clone();
    }
    let mut out = Tensor::zeros(vec![out_h, out_w, 1]);
    let sy = h as f64 / out_h as f64;
    let sx = w as f64 / out_w as f64;
    for y in 0..out_h {
        let fy = ((y as f64 + 0.5) * sy - 0.5).clamp(0.0, (h - 1) as f64);
        let y0 = fy.floor() as usize;
        let y1 = (y0 + 1).min(h - 1);
        let wy = fy - y0 as f64;
        for x in 0..out_w {
            let fx = ((x as f64 + 0.5) * sx - 0.5).clamp(0.0, (w - 1) as f64);
            let x0 = fx.floor() as usize;
            let x1 = (x0 + 1).min(w - 1);
            let wx = fx - x0 as f64;
            let p00 = src.data()[y0 * w + x0];
            let p01 = src.data()[y0 * w + x1];
            let p10 = src.data()[y1 * w + x0];
            let p11 = src.data()[y1 * w + x1];
            let top = p00 + (p01 - p00) * wx;
            let bot = p10 + (p11 - p10) * wx;
            out.data_mut()[y * out_w + x] = top + (bot - top) * wy;
        }
    }
    out
}

/// Decodes any supported raster file to grayscale in [0, 1] at its
/// native size.
pub fn load_grayscale_image(path: &Path) -> Result<Tensor, DataError> {
    decode_grayscale(path)
}

fn decode_grayscale(path: &Path) -> Result<Tensor, DataError> {
    let img = image::open(path)
        .map_err(|e| DataError::UnreadableImage(format!("{}: {e}", path.display())))?
        .to_luma8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    if w == 0 || h == 0 {
        return Err(DataError::UnreadableImage(format!("{}: empty image", path.display())));
    }
    let data: Vec<f64> = img.as_raw().iter().map(|&v| v as f64 / 255.0).collect();
    Ok(Tensor::new(vec![h, w, 1], data).expect("image buffer size"))
}

/// File stem up to the optional `_n` duplicate suffix.
fn label_part(stem: &str) -> &str {
    match stem.find('_') {
        Some(pos) => &stem[..pos],
        None => stem,
    }
}

fn load_one(path: &Path, stem: &str) -> Result<PlateSample, DataError> {
    let file_name = path.file_name().unwrap_or_default().to_string_lossy().to_string();
    let label = encode_label(label_part(stem), &file_name)?;
    let raw = decode_grayscale(path)?;
    let image = resize_bilinear(&raw, PLATE_IMAGE_HEIGHT, PLATE_IMAGE_WIDTH);

    // sibling annotation file, if any; normalized coordinates apply
    // unchanged to the resized pixel space
    let annot = path.with_extension("txt");
    let truth_boxes = if annot.exists() {
        let boxes = read_annotation_file(&annot, PLATE_IMAGE_WIDTH as u32, PLATE_IMAGE_HEIGHT as u32)
            .map_err(|e| DataError::Io(e.to_string()))?;
        Some(boxes)
    } else {
        None
    };
    PlateSample::new(image, label, stem.to_string(), truth_boxes)
}

/// Loads every image in a directory, in sorted file-name order.
pub fn load_labeled_dir(dir: &Path) -> Result<Vec<PlateSample>, DataError> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| DataError::Io(format!("{}: {e}", dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .map(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
                .unwrap_or(false)
        })
        .collect();
    paths.sort();

    let mut samples = Vec::with_capacity(paths.len());
    for path in &paths {
        let stem = path
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| DataError::UnreadableImage(format!("{}: bad file name", path.display())))?;
        samples.push(load_one(path, stem)?);
    }
    Ok(samples)
}

/// Loads a manifest of `relative_path<TAB>label_tokens` lines, for
/// sources whose file names cannot carry labels.
pub fn load_manifest(manifest: &Path) -> Result<Vec<PlateSample>, DataError> {
    let text = std::fs::read_to_string(manifest)
        .map_err(|e| DataError::Io(format!("{}: {e}", manifest.display())))?;
    let base = manifest.parent().unwrap_or(Path::new("."));
    let mut samples = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (rel, label_text) = line.split_once('\t').ok_or_else(|| {
            DataError::Io(format!("{}:{}: missing tab separator", manifest.display(), lineno + 1))
        })?;
        let path = base.join(rel);
        let label = encode_label(label_text, &format!("{}:{}", manifest.display(), lineno + 1))?;
        let raw = decode_grayscale(&path)?;
        let image = resize_bilinear(&raw, PLATE_IMAGE_HEIGHT, PLATE_IMAGE_WIDTH);
        samples.push(PlateSample::new(image, label, rel.to_string(), None)?);
    }
    Ok(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::decode_label;
    use image::{GrayImage, Luma};

    fn write_gray(path: &Path, w: u32, h: u32, shade: u8) {
        let img = GrayImage::from_pixel(w, h, Luma([shade]));
        img.save(path).unwrap();
    }

    #[test]
    fn filename_labels_parse_and_resize() {
        let dir = tempfile::tempdir().unwrap();
        write_gray(&dir.path().join("12B45678.png"), 80, 30, 128);
        let samples = load_labeled_dir(dir.path()).unwrap();
        assert_eq!(samples.len(), 1);
        assert_eq!(decode_label(&samples[0].label), "12B45678");
        assert_eq!(samples[0].image.shape(), &[50, 200, 1]);
        // flat image stays flat under bilinear resampling
        for &v in samples[0].image.data() {
            assert!((v - 128.0 / 255.0).abs() < 1e-12);
        }
    }

    #[test]
    fn duplicate_suffix_is_ignored() {
        let dir = tempfile::tempdir().unwrap();
        write_gray(&dir.path().join("12B45678_2.png"), 40, 20, 10);
        let samples = load_labeled_dir(dir.path()).unwrap();
        assert_eq!(decode_label(&samples[0].label), "12B45678");
    }

    #[test]
    fn unknown_symbol_reports_char_and_file() {
        let dir = tempfile::tempdir().unwrap();
        write_gray(&dir.path().join("12&45678.png"), 40, 20, 10);
        let err = load_labeled_dir(dir.path()).unwrap_err();
        match err {
            DataError::UnknownSymbol { symbol, context } => {
                assert_eq!(symbol, '&');
                assert!(context.contains("12&45678.png"));
            }
            other => panic!("wrong error {other:?}"),
        }
    }

    #[test]
    fn corrupt_file_is_unreadable() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("123.png"), b"not a png").unwrap();
        assert!(matches!(
            load_labeled_dir(dir.path()),
            Err(DataError::UnreadableImage(_))
        ));
    }

    #[test]
    fn loading_order_is_sorted_by_name() {
        let dir = tempfile::tempdir().unwrap();
        for name in ["93_1.png", "11.png", "52.png"] {
            write_gray(&dir.path().join(name), 20, 10, 200);
        }
        let samples = load_labeled_dir(dir.path()).unwrap();
        let ids: Vec<&str> = samples.iter().map(|s| s.source_id.as_str()).collect();
        assert_eq!(ids, ["11", "52", "93_1"]);
    }

    #[test]
    fn sibling_annotations_become_truth_boxes() {
        let dir = tempfile::tempdir().unwrap();
        write_gray(&dir.path().join("77.png"), 100, 50, 60);
        std::fs::write(dir.path().join("77.txt"), "0 0.5 0.5 1.0 1.0\n").unwrap();
        let samples = load_labeled_dir(dir.path()).unwrap();
        let boxes = samples[0].truth_boxes.as_ref().unwrap();
        assert_eq!(boxes.len(), 1);
        assert_eq!(boxes[0].right, 200.0);
        assert_eq!(boxes[0].bottom, 50.0);
    }

    #[test]
    fn manifest_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        write_gray(&dir.path().join("img0.png"), 30, 10, 90);
        std::fs::write(dir.path().join("list.tsv"), "img0.png\t12B4\n").unwrap();
        let samples = load_manifest(&dir.path().join("list.tsv")).unwrap();
        assert_eq!(samples.len(), 1);
        assert_eq!(decode_label(&samples[0].label), "12B4");
    }

    #[test]
    fn resize_identity_when_sizes_match() {
        let t = Tensor::new(vec![2, 3, 1], vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6]).unwrap();
        assert_eq!(resize_bilinear(&t, 2, 3), t);
    }

    #[test]
    fn resize_preserves_value_range() {
        let t = Tensor::new(vec![2, 2, 1], vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let r = resize_bilinear(&t, 5, 7);
        for &v in r.data() {
            assert!((0.0..=1.0).contains(&v));
        }
    }
}
