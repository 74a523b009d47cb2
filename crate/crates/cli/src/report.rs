//! Accuracy metrics and the line-oriented key=value report format.

use crate::CliError;
use std::collections::BTreeMap;

/// Edit distance between two strings.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for (i, &ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// 1 minus the Levenshtein distance normalized by the longer string;
/// 1.0 when both are empty.
pub fn char_accuracy(prediction: &str, truth: &str) -> f64 {
    let denom = prediction.chars().count().max(truth.chars().count());
    if denom == 0 {
        return 1.0;
    }
    1.0 - levenshtein(prediction, truth) as f64 / denom as f64
}

/// Serializes a report map as sorted `key=value` lines.
pub fn emit_kv(map: &BTreeMap<String, String>) -> String {
    let mut out = String::new();
    for (k, v) in map {
        out.push_str(k);
        out.push('=');
        out.push_str(v);
        out.push('\n');
    }
    out
}

/// Parses `key=value` lines; keys must be non-empty and space-free.
pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (idx, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Data(format!("report line {}: no '='", idx + 1)))?;
        if k.is_empty() || k.contains(' ') {
            return Err(CliError::Data(format!("report line {}: bad key {k:?}", idx + 1)));
        }
        map.insert(k.to_string(), v.to_string());
    }
    Ok(map)
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.6}")
}

/// Median of an unordered sample; the sample must be non-empty.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}
