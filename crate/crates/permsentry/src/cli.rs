//! Command-line interface: `extract`, `train`, `eval`, `scan`,
//! `compare`. Human-readable output goes to stdout, diagnostics to
//! stderr, machine-readable results to files. Exit codes: 0 success
//! (or benign scan), 1 error, 2 malicious scan.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::dataset;
use crate::eval;
use crate::models::ModelKind;
use crate::persist;
use crate::pipeline::{self, ReducerKind, TrainOptions};

#[derive(Debug, Parser)]
#[command(
    name = "permsentry",
    version,
    about = "Static APK malware analysis and classification"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KindArg {
    Nb,
    Lr,
    Rf,
    Gbt,
    Ann,
}

impl From<KindArg> for ModelKind {
    fn from(value: KindArg) -> Self {
        match value {
            KindArg::Nb => ModelKind::NaiveBayes,
            KindArg::Lr => ModelKind::Logistic,
            KindArg::Rf => ModelKind::RandomForest,
            KindArg::Gbt => ModelKind::GradientBoosting,
            KindArg::Ann => ModelKind::AttentionMlp,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ReducerArg {
    Default,
    None,
    Pca,
    Extratrees,
}

impl From<ReducerArg> for ReducerKind {
    fn from(value: ReducerArg) -> Self {
        match value {
            ReducerArg::Default => ReducerKind::Default,
            ReducerArg::None => ReducerKind::None,
            ReducerArg::Pca => ReducerKind::Pca,
            ReducerArg::Extratrees => ReducerKind::ExtraTrees,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dump an APK's raw feature sets as a text report.
    Extract {
        /// APK file to analyze
        #[arg(long)]
        apk: PathBuf,
    },
    /// Train one model on a labeled CSV and save the archive.
    Train {
        /// labeled feature CSV
        #[arg(long)]
        data: PathBuf,
        /// where to write the model archive
        #[arg(long, default_value = "model.psm")]
        model_out: PathBuf,
        #[arg(long, value_enum, default_value = "ann")]
        kind: KindArg,
        #[arg(long, value_enum, default_value = "default")]
        reducer: ReducerArg,
        #[arg(long, env = "PERMSENTRY_SEED", default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        epochs: usize,
        #[arg(long, default_value_t = 32)]
        batch_size: usize,
        #[arg(long, default_value_t = 0.75)]
        train_fraction: f64,
        /// directory for evaluation artifacts
        #[arg(long, default_value = "permsentry-out")]
        out_dir: PathBuf,
    },
    /// Evaluate a saved model against a labeled CSV.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "permsentry-out")]
        out_dir: PathBuf,
    },
    /// Classify one APK with a saved model.
    Scan {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        apk: PathBuf,
    },
    /// Train and rank all five models on the same split.
    Compare {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum, default_value = "default")]
        reducer: ReducerArg,
        #[arg(long, env = "PERMSENTRY_SEED", default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        epochs: usize,
        #[arg(long, default_value_t = 32)]
        batch_size: usize,
        #[arg(long, default_value_t = 0.75)]
        train_fraction: f64,
        #[arg(long, default_value = "permsentry-out")]
        out_dir: PathBuf,
    },
}

fn options(
    kind: ModelKind,
    reducer: ReducerArg,
    seed: u64,
    epochs: usize,
    batch_size: usize,
    train_fraction: f64,
) -> TrainOptions {
    TrainOptions {
        kind,
        reducer: reducer.into(),
        seed,
        epochs,
        batch_size,
        train_fraction,
        ..TrainOptions::default()
    }
}

/// Run a parsed command; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    match dispatch(cli) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            1
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32, String> {
    match cli.command {
        Command::Extract { apk } => {
            let bytes = std::fs::read(&apk).map_err(|e| e.to_string())?;
            let features = crate::apk::scan_apk_bytes(&bytes, &apk.display().to_string())
                .map_err(|e| e.to_string())?;
            println!("apk: {}", features.source_path);
            println!("permissions ({}):", features.permissions.len());
            for p in &features.permissions {
                println!("  {p}");
            }
            println!("dex strings ({}):", features.api_tokens.len());
            for s in &features.api_tokens {
                println!("  {s}");
            }
            Ok(0)
        }
        Command::Train {
            data,
            model_out,
            kind,
            reducer,
            seed,
            epochs,
            batch_size,
            train_fraction,
            out_dir,
        } => {
            let ds = dataset::load_csv(&data).map_err(|e| e.to_string())?;
            let opts = options(
                kind.into(),
                reducer,
                seed,
                epochs,
                batch_size,
                train_fraction,
            );
            let outcome = pipeline::run_train(&ds, &opts).map_err(|e| e.to_string())?;
            eval::emit_artifacts(&outcome.report, &outcome.curve, &out_dir)
                .map_err(|e| e.to_string())?;
            let written =
                persist::save_model(&outcome.archive, &model_out).map_err(|e| e.to_string())?;
            print!("{}", eval::render_report(&outcome.report));
            println!("archive: {} ({} bytes)", model_out.display(), written);
            Ok(0)
        }
        Command::Eval {
            model,
            data,
            out_dir,
        } => {
            let archive = persist::load_model(&model).map_err(|e| e.to_string())?;
            let ds = dataset::load_csv(&data).map_err(|e| e.to_string())?;
            let report =
                eval::evaluate(&archive.model, &archive.reducer, &ds).map_err(|e| e.to_string())?;
            eval::emit_artifacts(&report, &eval::TrainingCurve::default(), &out_dir)
                .map_err(|e| e.to_string())?;
            print!("{}", eval::render_report(&report));
            Ok(0)
        }
        Command::Scan { model, apk } => {
            let archive = persist::load_model(&model).map_err(|e| e.to_string())?;
            let verdict = pipeline::run_scan(&archive, &apk).map_err(|e| e.to_string())?;
            println!(
                "{}: {} (p = {:.4})",
                apk.display(),
                if verdict.malicious {
                    "MALICIOUS"
                } else {
                    "benign"
                },
                verdict.probability
            );
            Ok(if verdict.malicious { 2 } else { 0 })
        }
        Command::Compare {
            data,
            reducer,
            seed,
            epochs,
            batch_size,
            train_fraction,
            out_dir,
        } => {
            let ds = dataset::load_csv(&data).map_err(|e| e.to_string())?;
            let opts = options(
                ModelKind::AttentionMlp,
                reducer,
                seed,
                epochs,
                batch_size,
                train_fraction,
            );
            let ranked = pipeline::run_compare(&ds, &opts).map_err(|e| e.to_string())?;
            std::fs::create_dir_all(&out_dir).map_err(|e| e.to_string())?;
            std::fs::write(
                out_dir.join("comparison.csv"),
                eval::comparison_csv(&ranked),
            )
            .map_err(|e| e.to_string())?;
            print!("{}", eval::render_comparison(&ranked));
            Ok(0)
        }
    }
}
