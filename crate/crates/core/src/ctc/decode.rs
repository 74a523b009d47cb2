//! Greedy (best-path) and prefix beam-search decoding.

use super::{collapse, label_from_ids_unchecked, log_add, LabelSequence, ProbMatrix, SymbolAlphabet};

/// Best-path decoding: per-frame argmax (ties to the lowest class
/// index), then the collapse map.
pub fn greedy_decode(probs: &ProbMatrix, alphabet: &SymbolAlphabet) -> LabelSequence {
    let mut path = Vec::with_capacity(probs.steps());
    for t in 0..probs.steps() {
        let row = probs.row(t);
        let mut best = 0;
        for (c, &p) in row.iter().enumerate() {
            if p > row[best] {
                best = c;
            }
        }
        path.push(best);
    }
    collapse(&path, alphabet)
}

/// One transition out of a hypothesis: the resulting prefix, whether it
/// was reached through a blank, and its log mass.
struct Transition {
    prefix: Vec<usize>,
    via_blank: bool,
    log_mass: f64,
}

/// A collapsed prefix with its mass split by how the last frame ended.
struct Hyp {
    prefix: Vec<usize>,
    log_blank: f64,
    log_symbol: f64,
}

impl Hyp {
    fn total(&self) -> f64 {
        log_add(self.log_blank, self.log_symbol)
    }
}

/// Prefix beam search scored by total collapsed-prefix mass.
///
/// Pruning happens at transition granularity: every (hypothesis, class)
/// edge competes for one of `beam_width` slots before edges landing on
/// the same prefix are merged. With width 1 this degenerates exactly to
/// greedy decoding, and with a width no smaller than the number of
/// edges nothing is pruned, so the result is the exact argmax over all
/// labels of length <= T.
///
/// Between those extremes a wider beam usually, but not provably,
/// returns a higher-mass label: retained prefixes are not nested across
/// widths, so width w+1 can lose to width w on adversarial inputs.
pub fn beam_decode(probs: &ProbMatrix, alphabet: &SymbolAlphabet, beam_width: usize) -> LabelSequence {
    assert!(beam_width >= 1, "beam width must be at least 1");
    let blank = alphabet.blank_id();
    let classes = probs.classes();

    let mut beams = vec![Hyp {
        prefix: Vec::new(),
        log_blank: 0.0,
        log_symbol: f64::NEG_INFINITY,
    }];

    for t in 0..probs.steps() {
        let row = probs.row(t);
        let mut transitions: Vec<Transition> = Vec::with_capacity(beams.len() * (classes + 1));
        for hyp in &beams {
            let total = hyp.total();
            for (c, &p) in row.iter().enumerate() {
                let lp = p.ln();
                if c == blank {
                    transitions.push(Transition {
                        prefix: hyp.prefix.clone(),
                        via_blank: true,
                        log_mass: total + lp,
                    });
                } else if hyp.prefix.last() == Some(&c) {
                    // same frame symbol merges into the repeat...
                    transitions.push(Transition {
                        prefix: hyp.prefix.clone(),
                        via_blank: false,
                        log_mass: hyp.log_symbol + lp,
                    });
                    // ...unless a blank separated it, which emits anew
                    let mut ext = hyp.prefix.clone();
                    ext.push(c);
                    transitions.push(Transition {
                        prefix: ext,
                        via_blank: false,
                        log_mass: hyp.log_blank + lp,
                    });
                } else {
                    let mut ext = hyp.prefix.clone();
                    ext.push(c);
                    transitions.push(Transition {
                        prefix: ext,
                        via_blank: false,
                        log_mass: total + lp,
                    });
                }
            }
        }
        // stable sort keeps class order among equal masses, matching the
        // greedy tie-break
        transitions.sort_by(|a, b| b.log_mass.partial_cmp(&a.log_mass).unwrap());
        transitions.truncate(beam_width);

        let mut merged: Vec<Hyp> = Vec::with_capacity(transitions.len());
        for tr in transitions {
            match merged.iter_mut().find(|h| h.prefix == tr.prefix) {
                Some(h) => {
                    if tr.via_blank {
                        h.log_blank = log_add(h.log_blank, tr.log_mass);
                    } else {
                        h.log_symbol = log_add(h.log_symbol, tr.log_mass);
                    }
                }
                None => merged.push(Hyp {
                    log_blank: if tr.via_blank { tr.log_mass } else { f64::NEG_INFINITY },
                    log_symbol: if tr.via_blank { f64::NEG_INFINITY } else { tr.log_mass },
                    prefix: tr.prefix,
                }),
            }
        }
        beams = merged;
    }

    let best = beams
        .into_iter()
        .max_by(|a, b| {
            a.total()
                .partial_cmp(&b.total())
                .unwrap()
                // prefer shorter, then lexicographically smaller prefixes
                .then_with(|| b.prefix.len().cmp(&a.prefix.len()))
                .then_with(|| b.prefix.cmp(&a.prefix))
        })
        .expect("at least one beam survives");
    label_from_ids_unchecked(best.prefix)
}
