//! Synthetic dataset generation to a labeled directory.

use crate::config::SynthAlphabet;
use crate::CliError;
use lpr_core::data::{decode_label, id_to_token, synth_dataset, LengthDist};
use std::collections::HashMap;
use std::path::Path;

pub struct SynthOutcome {
    pub written: usize,
    /// (token, count) for every symbol that appeared.
    pub histogram: Vec<(char, usize)>,
}

/// Writes `n` samples as PNG files named by their labels (duplicates
/// get `_k` suffixes) with a sibling whole-canvas annotation file.
pub fn cmd_synth(
    n: usize,
    seed: u64,
    out_dir: &Path,
    alphabet: SynthAlphabet,
    maxlen: usize,
) -> Result<SynthOutcome, CliError> {
    if n == 0 {
        return Err(CliError::Usage("synth needs --n >= 1".into()));
    }
    if !(1..=8).contains(&maxlen) {
        return Err(CliError::Usage(format!("--maxlen must be 1..=8, got {maxlen}")));
    }
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::Data(format!("{}: {e}", out_dir.display())))?;

    let (samples, histogram) =
        synth_dataset(n, &alphabet.symbol_ids(), LengthDist::Fixed(maxlen), seed)
            .map_err(|e| CliError::Data(e.to_string()))?;

    let mut seen: HashMap<String, usize> = HashMap::new();
    for sample in &samples {
        let label = decode_label(&sample.label);
        let count = seen.entry(label.clone()).or_insert(0);
        *count += 1;
        let stem = if *count == 1 {
            label.clone()
        } else {
            format!("{label}_{count}")
        };

        let (h, w) = (sample.image.shape()[0], sample.image.shape()[1]);
        let mut img = image::GrayImage::new(w as u32, h as u32);
        for (pixel, &v) in img.pixels_mut().zip(sample.image.data()) {
            pixel.0 = [(v * 255.0).round().clamp(0.0, 255.0) as u8];
        }
        let img_path = out_dir.join(format!("{stem}.png"));
        img.save(&img_path)
            .map_err(|e| CliError::Data(format!("{}: {e}", img_path.display())))?;
        // the plate fills its own canvas
        std::fs::write(out_dir.join(format!("{stem}.txt")), "0 0.5 0.5 1.0 1.0\n")
            .map_err(|e| CliError::Data(e.to_string()))?;
    }

    let histogram = histogram
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(id, &c)| (id_to_token(id).expect("id in table"), c))
        .collect();
    Ok(SynthOutcome {
        written: samples.len(),
        histogram,
    })
}
