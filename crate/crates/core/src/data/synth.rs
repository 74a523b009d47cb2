//! Deterministic synthetic plate generator.
//!
//! Glyphs are procedural 5x7 binary patterns drawn once per symbol from
//! a global seed, with a pairwise Hamming-distance floor so no two
//! symbols look alike. Rendering adds seed-controlled jitter, uniform
//! noise, and a background shade; the same (label, seed) always yields
//! a byte-identical image.

use super::{decode_label, DataError, LabelSequence, PlateSample, MAX_LABEL_LEN};
use super::{PLATE_IMAGE_HEIGHT, PLATE_IMAGE_WIDTH, PLATE_SYMBOL_COUNT};
use crate::detect::BoundingBox;
use crate::tensor::Tensor;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;

pub const GLYPH_COLS: usize = 5;
pub const GLYPH_ROWS: usize = 7;
const GLYPH_BITS: usize = GLYPH_COLS * GLYPH_ROWS;
/// Minimum pairwise Hamming distance between glyph patterns.
const GLYPH_MIN_DISTANCE: u32 = 4;
/// Starting point for the glyph seed search.
const GLYPH_SEED_BASE: u64 = 0x706c617465; // "plate"

/// Pixel scale: one glyph cell becomes a 4x4 block, so a glyph covers
/// 20x28 of the 200x50 canvas.
const CELL: usize = 4;
const SLOT_WIDTH: usize = 24;
const LEFT_MARGIN: usize = 4;
const TOP_MARGIN: usize = (PLATE_IMAGE_HEIGHT - GLYPH_ROWS * CELL) / 2;

fn hamming(a: &[bool], b: &[bool]) -> u32 {
    a.iter().zip(b).filter(|(x, y)| x != y).count() as u32
}

fn generate_patterns(seed: u64) -> Vec<[bool; GLYPH_BITS]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..PLATE_SYMBOL_COUNT)
        .map(|_| {
            let mut p = [false; GLYPH_BITS];
            for bit in p.iter_mut() {
                *bit = rng.gen::<f64>() < 0.45;
            }
            p
        })
        .collect()
}

fn patterns_are_separated(patterns: &[[bool; GLYPH_BITS]]) -> bool {
    for i in 0..patterns.len() {
        for j in i + 1..patterns.len() {
            if hamming(&patterns[i], &patterns[j]) < GLYPH_MIN_DISTANCE {
                return false;
            }
        }
    }
    true
}

/// The fixed glyph table: the first seed at or above the base whose
/// patterns satisfy the pairwise distance floor.
pub fn glyph_patterns() -> &'static [[bool; GLYPH_BITS]] {
    static PATTERNS: OnceLock<Vec<[bool; GLYPH_BITS]>> = OnceLock::new();
    PATTERNS.get_or_init(|| {
        let mut seed = GLYPH_SEED_BASE;
        loop {
            let patterns = generate_patterns(seed);
            if patterns_are_separated(&patterns) {
                return patterns;
            }
            seed += 1;
        }
    })
}

/// Rendering knobs; defaults match the generator contract (offsets up
/// to 2 px, noise amplitude 0.1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthStyle {
    pub jitter_px: i32,
    pub noise_amplitude: f64,
}

impl Default for SynthStyle {
    fn default() -> Self {
        Self { jitter_px: 2, noise_amplitude: 0.1 }
    }
}

impl SynthStyle {
    pub fn clean() -> Self {
        Self { jitter_px: 0, noise_amplitude: 0.0 }
    }
}

/// Nominal top-left corner of glyph slot `i`.
pub fn nominal_slot_origin(i: usize) -> (usize, usize) {
    (LEFT_MARGIN + i * SLOT_WIDTH, TOP_MARGIN)
}

/// Renders a plate image for `label` with the default style.
pub fn synth_plate(label: &LabelSequence, style_seed: u64) -> Result<PlateSample, DataError> {
    synth_plate_styled(label, style_seed, &SynthStyle::default())
}

pub fn synth_plate_styled(
    label: &LabelSequence,
    style_seed: u64,
    style: &SynthStyle,
) -> Result<PlateSample, DataError> {
    if label.is_empty() || label.len() > MAX_LABEL_LEN {
        return Err(DataError::LabelTooLong(format!(
            "synthetic label must have 1..={MAX_LABEL_LEN} symbols, got {}",
            label.len()
        )));
    }
    assert!(style.noise_amplitude <= 0.1 && style.noise_amplitude >= 0.0);
    assert!((0..=2).contains(&style.jitter_px));

    let mut rng = ChaCha8Rng::seed_from_u64(style_seed);
    let background = rng.gen_range(0.05..0.25);
    let mut image = Tensor::filled(vec![PLATE_IMAGE_HEIGHT, PLATE_IMAGE_WIDTH, 1], background);
    let patterns = glyph_patterns();

    for (slot, &id) in label.ids().iter().enumerate() {
        let (nx, ny) = nominal_slot_origin(slot);
        let (dx, dy) = if style.jitter_px > 0 {
            (
                rng.gen_range(-style.jitter_px..=style.jitter_px),
                rng.gen_range(-style.jitter_px..=style.jitter_px),
            )
        } else {
            (0, 0)
        };
        let x0 = (nx as i32 + dx).max(0) as usize;
        let y0 = (ny as i32 + dy).max(0) as usize;
        let pattern = &patterns[id];
        for gy in 0..GLYPH_ROWS {
            for gx in 0..GLYPH_COLS {
                if !pattern[gy * GLYPH_COLS + gx] {
                    continue;
                }
                for py in 0..CELL {
                    for px in 0..CELL {
                        let y = y0 + gy * CELL + py;
                        let x = x0 + gx * CELL + px;
                        if y < PLATE_IMAGE_HEIGHT && x < PLATE_IMAGE_WIDTH {
                            image.data_mut()[y * PLATE_IMAGE_WIDTH + x] = 1.0;
                        }
                    }
                }
            }
        }
    }

    if style.noise_amplitude > 0.0 {
        let amp = style.noise_amplitude;
        for v in image.data_mut() {
            *v = (*v + rng.gen_range(-amp..amp)).clamp(0.0, 1.0);
        }
    }

    let source_id = format!("synth-{style_seed}-{}", decode_label(label));
    let canvas = BoundingBox::new(0.0, 0.0, PLATE_IMAGE_WIDTH as f64, PLATE_IMAGE_HEIGHT as f64)
        .expect("canvas box");
    PlateSample::new(image, label.clone(), source_id, Some(vec![canvas]))
}

/// Label length model for the generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LengthDist {
    Fixed(usize),
    Uniform { min: usize, max: usize },
}

impl LengthDist {
    fn sample(&self, rng: &mut ChaCha8Rng) -> usize {
        match *self {
            LengthDist::Fixed(n) => n,
            LengthDist::Uniform { min, max } => rng.gen_range(min..=max),
        }
    }
}

/// Draws `n` samples with labels over the given symbol subset, plus a
/// per-symbol frequency histogram (indexed by symbol id).
pub fn synth_dataset(
    n: usize,
    symbol_subset: &[usize],
    length_dist: LengthDist,
    seed: u64,
) -> Result<(Vec<PlateSample>, Vec<usize>), DataError> {
    assert!(n >= 1, "need at least one sample");
    assert!(!symbol_subset.is_empty(), "empty symbol subset");
    assert!(symbol_subset.iter().all(|&s| s < PLATE_SYMBOL_COUNT));

    let alphabet = super::plate_alphabet();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut histogram = vec![0usize; PLATE_SYMBOL_COUNT];
    let mut samples = Vec::with_capacity(n);
    for _ in 0..n {
        let len = length_dist.sample(&mut rng).clamp(1, MAX_LABEL_LEN);
        let ids: Vec<usize> = (0..len)
            .map(|_| symbol_subset[rng.gen_range(0..symbol_subset.len())])
            .collect();
        for &id in &ids {
            histogram[id] += 1;
        }
        let label = LabelSequence::new(ids, &alphabet).expect("subset ids are valid");
        let style_seed = rng.gen::<u64>();
        samples.push(synth_plate(&label, style_seed)?);
    }
    Ok((samples, histogram))
}

/// Symbol ids for a digits-only generator run.
pub fn digit_ids() -> Vec<usize> {
    (0..10).collect()
}

/// All 37 symbol ids.
pub fn all_symbol_ids() -> Vec<usize> {
    (0..PLATE_SYMBOL_COUNT).collect()
}
