//! Connectionist temporal classification: the collapse map, the loss and
//! its gradient, an exhaustive-path verification oracle, and greedy /
//! beam-search decoders.

mod decode;
mod loss;

pub use decode::{beam_decode, greedy_decode};
pub use loss::{ctc_bruteforce, ctc_gradient, ctc_loss};

use crate::tensor::Tensor;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CtcError {
    #[error("infeasible label: {0}")]
    InfeasibleLabel(String),
    #[error("degenerate probability row: {0}")]
    DegenerateRow(String),
    #[error("instance too large for exhaustive enumeration: {0}")]
    TooLarge(String),
    #[error("no path collapses to the label (probability zero)")]
    NoValidPath,
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),
    #[error("invalid label: {0}")]
    InvalidLabel(String),
}

/// Ordered symbol set plus the reserved blank, which by convention here
/// occupies the last class index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolAlphabet {
    symbols: Vec<String>,
}

impl SymbolAlphabet {
    pub fn new<S: Into<String>>(symbols: Vec<S>) -> Result<Self, CtcError> {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(CtcError::InvalidAlphabet("no symbols".into()));
        }
        for (i, a) in symbols.iter().enumerate() {
            if a.is_empty() {
                return Err(CtcError::InvalidAlphabet(format!("symbol {i} is empty")));
            }
            if symbols[..i].contains(a) {
                return Err(CtcError::InvalidAlphabet(format!("duplicate symbol {a:?}")));
            }
        }
        Ok(Self { symbols })
    }

    /// Number of classes including the blank.
    pub fn size(&self) -> usize {
        self.symbols.len() + 1
    }

    pub fn blank_id(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn name(&self, id: usize) -> &str {
        if id == self.blank_id() {
            "-"
        } else {
            &self.symbols[id]
        }
    }

    pub fn id_of(&self, name: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == name)
    }

    pub fn decode_to_string(&self, label: &LabelSequence) -> String {
        label.ids().iter().map(|&id| self.name(id)).collect()
    }
}

/// Ground-truth symbol ids; never contains the blank.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct LabelSequence {
    ids: Vec<usize>,
}

impl LabelSequence {
    pub fn new(ids: Vec<usize>, alphabet: &SymbolAlphabet) -> Result<Self, CtcError> {
        if let Some(&bad) = ids.iter().find(|&&id| id >= alphabet.blank_id()) {
            return Err(CtcError::InvalidLabel(format!(
                "id {bad} is not a symbol (blank is {})",
                alphabet.blank_id()
            )));
        }
        Ok(Self { ids })
    }

    pub fn empty() -> Self {
        Self { ids: Vec::new() }
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Minimum path length that can spell this label: one frame per
    /// symbol plus a separating blank per adjacent repeat.
    pub fn min_frames(&self) -> usize {
        let repeats = self.ids.windows(2).filter(|w| w[0] == w[1]).count();
        self.ids.len() + repeats
    }
}

/// Row-stochastic T x C matrix of per-frame class probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbMatrix {
    steps: usize,
    classes: usize,
    data: Vec<f64>,
}

impl ProbMatrix {
    const ROW_SUM_TOL: f64 = 1e-9;

    /// Validating constructor: every row must sum to 1 within 1e-9 with
    /// entries in (0, 1].
    pub fn new(steps: usize, classes: usize, data: Vec<f64>) -> Result<Self, CtcError> {
        if steps == 0 || classes == 0 || data.len() != steps * classes {
            return Err(CtcError::DegenerateRow(format!(
                "need {steps}x{classes} entries, got {}",
                data.len()
            )));
        }
        let m = Self { steps, classes, data };
        for t in 0..steps {
            m.check_row(t)?;
            if m.row(t).iter().any(|&p| p <= 0.0 || p > 1.0) {
                return Err(CtcError::DegenerateRow(format!(
                    "row {t} has an entry outside (0, 1]"
                )));
            }
        }
        Ok(m)
    }

    /// Wraps raw scores without the stochastic check. Intended for
    /// decoder inputs that are not probability rows (argmax only cares
    /// about order) and for softmax output, which is stochastic by
    /// construction.
    pub fn from_rows_unchecked(rows: Vec<Vec<f64>>) -> Self {
        let steps = rows.len();
        let classes = rows.first().map(Vec::len).unwrap_or(0);
        let data = rows.concat();
        assert_eq!(data.len(), steps * classes, "ragged rows");
        Self { steps, classes, data }
    }

    /// Wraps a rank-2 tensor without the stochastic check; see
    /// [`ProbMatrix::from_rows_unchecked`].
    pub fn from_tensor_unchecked(t: &Tensor) -> Self {
        assert_eq!(t.shape().len(), 2, "probability matrix must be rank 2");
        Self {
            steps: t.shape()[0],
            classes: t.shape()[1],
            data: t.data().to_vec(),
        }
    }

    pub fn from_tensor(t: &Tensor) -> Result<Self, CtcError> {
        if t.shape().len() != 2 {
            return Err(CtcError::DegenerateRow(format!(
                "probability matrix must be rank 2, got {:?}",
                t.shape()
            )));
        }
        Self::new(t.shape()[0], t.shape()[1], t.data().to_vec())
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.data[t * self.classes..(t + 1) * self.classes]
    }

    pub(crate) fn check_row(&self, t: usize) -> Result<(), CtcError> {
        let sum: f64 = self.row(t).iter().sum();
        if (sum - 1.0).abs() > Self::ROW_SUM_TOL {
            return Err(CtcError::DegenerateRow(format!("row {t} sums to {sum}")));
        }
        Ok(())
    }

    pub(crate) fn check_stochastic(&self) -> Result<(), CtcError> {
        for t in 0..self.steps {
            self.check_row(t)?;
        }
        Ok(())
    }
}

/// The many-to-one CTC map B: merge adjacent repeats, then drop blanks.
pub fn collapse(path: &[usize], alphabet: &SymbolAlphabet) -> LabelSequence {
    let blank = alphabet.blank_id();
    debug_assert!(path.iter().all(|&c| c <= blank), "class id out of range");
    let mut ids = Vec::new();
    let mut prev = usize::MAX;
    for &c in path {
        if c != prev && c != blank {
            ids.push(c);
        }
        prev = c;
    }
    LabelSequence { ids }
}

pub(crate) fn label_from_ids_unchecked(ids: Vec<usize>) -> LabelSequence {
    LabelSequence { ids }
}

/// log(exp(a) + exp(b)) without overflow; -inf is the additive identity.
pub(crate) fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ab_alphabet() -> SymbolAlphabet {
        SymbolAlphabet::new(vec!["a", "b"]).unwrap()
    }

    #[test]
    fn collapse_blank_only_is_empty() {
        let al = ab_alphabet();
        assert!(collapse(&[al.blank_id()], &al).is_empty());
    }

    #[test]
    fn collapse_merges_then_drops() {
        let al = ab_alphabet();
        let got = collapse(&[0, 0, al.blank_id(), 1], &al);
        assert_eq!(got.ids(), &[0, 1]);
    }

    #[test]
    fn collapse_blank_separates_genuine_repeat() {
        let al = ab_alphabet();
        let got = collapse(&[0, al.blank_id(), 0], &al);
        assert_eq!(got.ids(), &[0, 0]);
    }

    #[test]
    fn alphabet_rejects_duplicates() {
        assert!(SymbolAlphabet::new(vec!["a", "a"]).is_err());
    }

    #[test]
    fn label_rejects_blank_id() {
        let al = ab_alphabet();
        assert!(LabelSequence::new(vec![al.blank_id()], &al).is_err());
    }

    #[test]
    fn prob_matrix_rejects_non_stochastic_rows() {
        assert!(ProbMatrix::new(1, 2, vec![0.7, 0.7]).is_err());
        assert!(ProbMatrix::new(1, 2, vec![1.0, 0.0]).is_err()); // zero entry
        assert!(ProbMatrix::new(1, 2, vec![0.5, 0.5]).is_ok());
    }

    #[test]
    fn log_add_handles_neg_infinity() {
        assert_eq!(log_add(f64::NEG_INFINITY, f64::NEG_INFINITY), f64::NEG_INFINITY);
        assert_eq!(log_add(f64::NEG_INFINITY, -1.5), -1.5);
        let got = log_add((0.25f64).ln(), (0.5f64).ln());
        assert!((got - 0.75f64.ln()).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn collapse_is_idempotent_on_clean_sequences(path in proptest::collection::vec(0usize..3, 0..20)) {
            let al = ab_alphabet();
            let once = collapse(&path, &al);
            let twice = collapse(once.ids(), &al);
            // a collapsed label is blank-free; a second collapse only merges
            // adjacent repeats, so it is a fixed point iff none remain
            if once.ids().windows(2).all(|w| w[0] != w[1]) {
                prop_assert_eq!(once, twice);
            }
        }

        #[test]
        fn collapsed_labels_never_contain_blank(path in proptest::collection::vec(0usize..3, 0..20)) {
            let al = ab_alphabet();
            let out = collapse(&path, &al);
            prop_assert!(out.ids().iter().all(|&id| id < al.blank_id()));
        }
    }
}
