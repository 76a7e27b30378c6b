//! `segpaint` command line.
//!
//! Every subcommand builds an [`ExperimentConfig`] from defaults, then the
//! `--config` file, then `--set key=value` pairs, then dedicated flags.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use segpaint::kv::KeyValues;
use segpaint::pipeline::ExperimentConfig;
use segpaint::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "segpaint", version, about = "Learn spray-painting paths as sets of short pose segments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Experiment overrides shared by all subcommands.
#[derive(Debug, Args, Clone, Default)]
pub struct Overrides {
    /// Flat `key = value` experiment file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Extra `key=value` overrides, applied after the config file.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Poses per segment.
    #[arg(long, global = true)]
    lambda: Option<usize>,
    /// Poses shared by consecutive segments of a stroke.
    #[arg(long, global = true)]
    overlap: Option<usize>,
    /// Linking threshold in normalized units.
    #[arg(long, global = true)]
    tau: Option<f64>,
    /// Share of the training split to train on.
    #[arg(long, global = true)]
    fraction: Option<f64>,
    /// Link predicted segments into strokes.
    #[arg(long, global = true)]
    concat: bool,
}

impl Overrides {
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::default();
        if let Some(path) = &self.config {
            cfg.apply(&KeyValues::load(path)?)?;
        }
        if !self.set.is_empty() {
            let text: String = self.set.iter().map(|s| format!("{s}\n")).collect();
            cfg.apply(&KeyValues::parse(&text, "--set")?)?;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.lambda {
            cfg.lambda = v;
        }
        if let Some(v) = self.overlap {
            cfg.overlap = v;
        }
        if let Some(v) = self.tau {
            cfg.tau = v;
        }
        if let Some(v) = self.fraction {
            cfg.fraction = v;
        }
        if self.concat {
            cfg.concat = true;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic dataset with an 80/20 split.
    Generate {
        #[command(flatten)]
        o: Overrides,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a model; writes checkpoint.txt and loss.csv.
    Train {
        #[command(flatten)]
        o: Overrides,
        #[arg(long)]
        dataset: PathBuf,
        /// Checkpoint to fine-tune from.
        #[arg(long)]
        pretrained: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Predict strokes for test samples (or one `--sample`).
    Predict {
        #[command(flatten)]
        o: Overrides,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        sample: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Link a directory of equal-length segment files into strokes.
    Concat {
        #[command(flatten)]
        o: Overrides,
        /// Directory of `stroke_NNN.txt` segments, optionally with transform.txt.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Deposit paint from strokes onto a mesh.
    Simulate {
        #[command(flatten)]
        o: Overrides,
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        strokes: PathBuf,
        /// Reference strokes; adds a coverage report.
        #[arg(long)]
        reference: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a checkpoint (or the ground truth) on the test split.
    Evaluate {
        #[command(flatten)]
        o: Overrides,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, required_unless_present = "ground_truth")]
        checkpoint: Option<PathBuf>,
        /// Use the ground truth as the prediction.
        #[arg(long, conflicts_with = "checkpoint")]
        ground_truth: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train/evaluate over values of lambda, overlap or tau.
    Sweep {
        #[command(flatten)]
        o: Overrides,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        parameter: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        values: Vec<f64>,
        /// Fixed checkpoint, required for tau.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<()> {
    use commands::*;
    match cli.command {
        Command::Generate { o, out } => generate(&o.resolve()?, &out),
        Command::Train {
            o,
            dataset,
            pretrained,
            out,
        } => train(&o.resolve()?, &dataset, pretrained.as_deref(), &out),
        Command::Predict {
            o,
            dataset,
            checkpoint,
            sample,
            out,
        } => predict(&o.resolve()?, &dataset, &checkpoint, sample.as_deref(), &out),
        Command::Concat { o, input, out } => concat(&o.resolve()?, &input, &out),
        Command::Simulate {
            o,
            mesh,
            strokes,
            reference,
            out,
        } => simulate(&o.resolve()?, &mesh, &strokes, reference.as_deref(), &out),
        Command::Evaluate {
            o,
            dataset,
            checkpoint,
            ground_truth: _,
            out,
        } => evaluate(&o.resolve()?, &dataset, checkpoint.as_deref(), &out),
        Command::Sweep {
            o,
            dataset,
            parameter,
            values,
            checkpoint,
            out,
        } => sweep(&o.resolve()?, &dataset, &parameter, &values, checkpoint.as_deref(), &out),
    }
}

fn exit_code(e: &Error) -> u8 {
    if e.is_io() {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
