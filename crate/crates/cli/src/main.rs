//! `fieldlabel`: batch and live entry points for the annotation toolkit.
//!
//! Exit codes: 0 on success, 1 when inputs or flags are invalid, 2 when the
//! work itself fails.

mod commands;
mod common;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::{annotate, augment, compare, evaluate, prep, report};

#[derive(Debug, Parser)]
#[command(name = "fieldlabel", version, about = "Real-time YOLO annotation, dataset prep, evaluation and statistics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Collapse classes and make a stratified train/val/test split.
    Prep(prep::Args),
    /// Write flipped, rotated and color-jittered variants of a split.
    Augment(augment::Args),
    /// Score predictions against ground truth (mAP@50-95, P, R, F1).
    Evaluate(evaluate::Args),
    /// Two-sample t-tests between training configurations.
    Compare(compare::Args),
    /// Run a live annotation session.
    Annotate(annotate::Args),
    /// Latency report for one or more finished sessions.
    Report(report::Args),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Prep(args) => prep::run(args),
        Command::Augment(args) => augment::run(args),
        Command::Evaluate(args) => evaluate::run(args),
        Command::Compare(args) => compare::run(args),
        Command::Annotate(args) => annotate::run(args),
        Command::Report(args) => report::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
