//! The training loop: epochs over the train split, per-epoch validation,
//! best-validation checkpointing, and a deterministic plain-text log.

use crate::config::{DataSource, TrainConfig};
use crate::report::fmt_f64;
use crate::CliError;
use lpr_core::ctc::greedy_decode;
use lpr_core::data::{split, synth_dataset, LengthDist, PlateSample, SplitSpec};
use lpr_core::model::{save_checkpoint, Crnn, CrnnConfig, ModelError};
use lpr_core::nn::AdamState;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

#[derive(Debug)]
pub struct TrainOutcome {
    pub epochs_run: usize,
    pub best_val_acc: f64,
    pub ckpt_path: PathBuf,
    pub log_path: PathBuf,
}

/// Exact-match sequence accuracy of greedy decodes against the labels.
pub fn sequence_accuracy(model: &Crnn, samples: &[PlateSample]) -> Result<f64, CliError> {
    let alphabet = model.alphabet();
    let mut hits = 0usize;
    for s in samples {
        let probs = model.infer(&s.image).map_err(numeric)?;
        if greedy_decode(&probs, &alphabet) == s.label {
            hits += 1;
        }
    }
    Ok(hits as f64 / samples.len() as f64)
}

pub fn mean_loss(model: &Crnn, samples: &[PlateSample]) -> Result<f64, CliError> {
    let mut total = 0.0;
    for s in samples {
        total += model.evaluate_loss(&s.image, &s.label).map_err(numeric)?;
    }
    Ok(total / samples.len() as f64)
}

fn numeric(e: ModelError) -> CliError {
    match e {
        ModelError::NonFiniteLoss(_) => CliError::Numeric(e.to_string()),
        other => CliError::Numeric(other.to_string()),
    }
}

fn build_dataset(config: &TrainConfig) -> Result<Vec<PlateSample>, CliError> {
    match &config.data {
        DataSource::Dir(dir) => super::load_dataset_dir(dir),
        DataSource::Synth { n, seed, alphabet, len } => {
            if *n == 0 {
                return Err(CliError::Data("dataset empty: synth_n = 0".into()));
            }
            let (samples, _) = synth_dataset(*n, &alphabet.symbol_ids(), LengthDist::Fixed(*len), *seed)
                .map_err(|e| CliError::Data(e.to_string()))?;
            Ok(samples)
        }
    }
}

pub fn cmd_train(config: &TrainConfig) -> Result<TrainOutcome, CliError> {
    let started = Instant::now();
    let samples = build_dataset(config)?;
    let (mut train, val, _test) = split(samples, &SplitSpec::eighty_ten_ten(config.seed))
        .map_err(|e| CliError::Data(e.to_string()))?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut model =
        Crnn::build(CrnnConfig::default(), &mut rng).map_err(|e| CliError::Data(e.to_string()))?;
    let mut adam =
        AdamState::new(config.lr).with_hyper(config.beta1, config.beta2, config.epsilon);

    let mut log = String::from("# epoch train_loss val_loss val_seq_acc\n");
    let mut best_val_acc = f64::NEG_INFINITY;
    let mut epochs_run = 0;

    if config.epochs == 0 {
        save_checkpoint(&model, &config.ckpt_out).map_err(|e| CliError::Data(e.to_string()))?;
        best_val_acc = 0.0;
    }

    for epoch in 1..=config.epochs {
        train.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for chunk in train.chunks(config.batch_size) {
            let loss = model.train_step(chunk, &mut adam, &mut rng).map_err(|e| match e {
                ModelError::NonFiniteLoss(_) => CliError::Numeric(e.to_string()),
                other => CliError::Data(other.to_string()),
            })?;
            loss_sum += loss * chunk.len() as f64;
        }
        let train_loss = loss_sum / train.len() as f64;
        let val_acc = sequence_accuracy(&model, &val)?;
        let val_loss = mean_loss(&model, &val)?;
        epochs_run = epoch;

        log.push_str(&format!(
            "epoch={epoch} train_loss={} val_loss={} val_seq_acc={}\n",
            fmt_f64(train_loss),
            fmt_f64(val_loss),
            fmt_f64(val_acc)
        ));
        eprintln!(
            "epoch {epoch}/{}: train_loss {train_loss:.4} val_loss {val_loss:.4} val_seq_acc {val_acc:.4} ({:.0}s)",
            config.epochs,
            started.elapsed().as_secs_f64()
        );

        if val_acc > best_val_acc {
            best_val_acc = val_acc;
            save_checkpoint(&model, &config.ckpt_out).map_err(|e| CliError::Data(e.to_string()))?;
        }
        if let Some(target) = config.early_stop_val_acc {
            if val_acc >= target {
                break;
            }
        }
    }

    let mut file = std::fs::File::create(&config.log_out)
        .map_err(|e| CliError::Data(format!("{}: {e}", config.log_out.display())))?;
    file.write_all(log.as_bytes())
        .map_err(|e| CliError::Data(e.to_string()))?;

    Ok(TrainOutcome {
        epochs_run,
        best_val_acc: best_val_acc.max(0.0),
        ckpt_path: config.ckpt_out.clone(),
        log_path: config.log_out.clone(),
    })
}
