//! Line-oriented `key = value` training configuration.

use crate::CliError;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Which samples feed the trainer: a labeled directory or the
/// synthetic generator.
#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Dir(PathBuf),
    Synth {
        n: usize,
        seed: u64,
        alphabet: SynthAlphabet,
        len: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthAlphabet {
    Digits,
    Full,
}

impl SynthAlphabet {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "digits" => Ok(Self::Digits),
            "full" => Ok(Self::Full),
            other => Err(CliError::Usage(format!(
                "alphabet must be 'digits' or 'full', got {other:?}"
            ))),
        }
    }

    pub fn symbol_ids(self) -> Vec<usize> {
        match self {
            Self::Digits => lpr_core::data::digit_ids(),
            Self::Full => lpr_core::data::all_symbol_ids(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
    pub data: DataSource,
    pub ckpt_out: PathBuf,
    pub log_out: PathBuf,
    /// Stop once validation sequence accuracy reaches this value.
    pub early_stop_val_acc: Option<f64>,
}

/// Parses `key = value` lines; `#` starts a comment, blank lines are
/// skipped.
pub fn parse_kv_file(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!("config line {}: expected 'key = value', got {raw:?}", idx + 1))
        })?;
        let key = key.trim();
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(CliError::Usage(format!(
                "config line {}: bad key {key:?}",
                idx + 1
            )));
        }
        map.insert(key.to_string(), value.trim().to_string());
    }
    Ok(map)
}

impl TrainConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        Self::from_kv(&parse_kv_file(&text)?)
    }

    pub fn from_kv(map: &BTreeMap<String, String>) -> Result<Self, CliError> {
        fn get<T: std::str::FromStr>(
            map: &BTreeMap<String, String>,
            key: &str,
            default: T,
        ) -> Result<T, CliError> {
            match map.get(key) {
                None => Ok(default),
                Some(v) => v
                    .parse()
                    .map_err(|_| CliError::Usage(format!("config: bad value for {key}: {v:?}"))),
            }
        }

        let known = [
            "epochs", "batch_size", "lr", "beta1", "beta2", "epsilon", "seed", "data_dir",
            "synth_n", "synth_seed", "synth_alphabet", "synth_len", "ckpt_out", "log_out",
            "early_stop_val_acc",
        ];
        if let Some(bad) = map.keys().find(|k| !known.contains(&k.as_str())) {
            return Err(CliError::Usage(format!("config: unknown key {bad:?}")));
        }

        let seed = get(map, "seed", 42u64)?;
        let data = match (map.get("data_dir"), map.get("synth_n")) {
            (Some(_), Some(_)) => {
                return Err(CliError::Usage(
                    "config: data_dir and synth_n are mutually exclusive".into(),
                ))
            }
            (Some(dir), None) => DataSource::Dir(PathBuf::from(dir)),
            (None, Some(_)) => DataSource::Synth {
                n: get(map, "synth_n", 0usize)?,
                seed: get(map, "synth_seed", seed)?,
                alphabet: SynthAlphabet::parse(map.get("synth_alphabet").map(String::as_str).unwrap_or("full"))?,
                len: get(map, "synth_len", 8usize)?,
            },
            (None, None) => {
                return Err(CliError::Usage(
                    "config: set data_dir or synth_n".into(),
                ))
            }
        };
        let config = Self {
            epochs: get(map, "epochs", 10usize)?,
            batch_size: get(map, "batch_size", 16usize)?,
            lr: get(map, "lr", 1e-3)?,
            beta1: get(map, "beta1", 0.9)?,
            beta2: get(map, "beta2", 0.999)?,
            epsilon: get(map, "epsilon", 1e-7)?,
            seed,
            data,
            ckpt_out: PathBuf::from(map.get("ckpt_out").map(String::as_str).unwrap_or("model.ckpt")),
            log_out: PathBuf::from(map.get("log_out").map(String::as_str).unwrap_or("train.log")),
            early_stop_val_acc: match map.get("early_stop_val_acc") {
                None => None,
                Some(v) => Some(v.parse().map_err(|_| {
                    CliError::Usage(format!("config: bad value for early_stop_val_acc: {v:?}"))
                })?),
            },
        };
        if config.batch_size == 0 {
            return Err(CliError::Usage("config: batch_size must be positive".into()));
        }
        if !(config.lr > 0.0) {
            return Err(CliError::Usage("config: lr must be positive".into()));
        }
        Ok(config)
    }
}
