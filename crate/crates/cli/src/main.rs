use clap::{Parser, Subcommand};
use lpr_cli::commands::eval::{cmd_eval, EvalOptions, SplitName};
use lpr_cli::commands::{benchmark::cmd_benchmark, predict::cmd_predict, synth::cmd_synth, train::cmd_train};
use lpr_cli::config::{SynthAlphabet, TrainConfig};
use lpr_cli::pipeline::RecognizeOptions;
use lpr_cli::CliError;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "lpr", about = "License plate recognition: train, evaluate, and run the CRNN+CTC pipeline", disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a recognizer from a key = value config file
    Train {
        #[arg(long)]
        config: PathBuf,
    },
    /// Evaluate a checkpoint on one split of a labeled directory
    Eval {
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        split: String,
        /// Split shuffle seed (must match the training run)
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Oracle-detector jitter as a fraction of box size
        #[arg(long, default_value_t = 0.0)]
        jitter: f64,
        /// Drop detections below this confidence before matching
        #[arg(long, default_value_t = 0.0)]
        score_threshold: f64,
        /// Include one row.N entry per sample in the key=value output
        #[arg(long)]
        rows: bool,
    },
    /// Read plates from image files
    Predict {
        #[arg(long)]
        ckpt: PathBuf,
        /// Beam width (greedy decoding when absent)
        #[arg(long)]
        beam: Option<usize>,
        /// Extra crop margin in pixels around each detection
        #[arg(long, default_value_t = 0.0)]
        margin: f64,
        /// Also write the output lines to this file
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(required = true)]
        images: Vec<PathBuf>,
    },
    /// Time the pipeline stages over a dataset directory
    Benchmark {
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long)]
        data: PathBuf,
    },
    /// Generate a synthetic labeled dataset directory
    Synth {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "full")]
        alphabet: String,
        #[arg(long, default_value_t = 8)]
        maxlen: usize,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Train { config } => {
            let config = TrainConfig::from_file(&config)?;
            let outcome = cmd_train(&config)?;
            println!(
                "trained {} epochs, best val sequence accuracy {:.4}",
                outcome.epochs_run, outcome.best_val_acc
            );
            println!("checkpoint: {}", outcome.ckpt_path.display());
            println!("log: {}", outcome.log_path.display());
            Ok(())
        }
        Command::Eval { ckpt, data, split, seed, jitter, score_threshold, rows } => {
            let options = EvalOptions {
                split: SplitName::parse(&split)?,
                seed,
                jitter,
                score_threshold,
                rows,
            };
            let report = cmd_eval(&ckpt, &data, &options)?;
            print!("{}", report.render_human());
            print!("{}", report.render_kv(rows));
            Ok(())
        }
        Command::Predict { ckpt, beam, margin, out, images } => {
            if beam == Some(0) {
                return Err(CliError::Usage("--beam must be at least 1".into()));
            }
            let options = RecognizeOptions { beam, margin };
            let outcome = cmd_predict(&ckpt, &images, &options, out.as_deref())?;
            for line in &outcome.lines {
                println!("{line}");
            }
            for err in &outcome.errors {
                eprintln!("{err}");
            }
            if outcome.failed_files == outcome.total_files {
                return Err(CliError::Data("all input files failed".into()));
            }
            Ok(())
        }
        Command::Benchmark { ckpt, data } => {
            let report = cmd_benchmark(&ckpt, &data)?;
            print!("{}", report.render_human());
            print!("{}", report.render_kv());
            Ok(())
        }
        Command::Synth { n, seed, out, alphabet, maxlen } => {
            let alphabet = SynthAlphabet::parse(&alphabet)?;
            let outcome = cmd_synth(n, seed, &out, alphabet, maxlen)?;
            println!("written={} dir={}", outcome.written, out.display());
            for (token, count) in &outcome.histogram {
                println!("count.{token}={count}");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are not usage errors
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
