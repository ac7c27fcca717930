use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use super::{emit_plot_data, run_experiment, write_outputs, ExperimentConfig, ExperimentReport, PlotKind};
use crate::corpus::{self, BuildParams};
use crate::error::{Error, Result};

/// Exit status for usage and config errors.
const USAGE: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "perdyn", version, about = "Periodic non-autonomous dynamics experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Corpus operations.
    Corpus {
        #[command(subcommand)]
        action: CorpusAction,
    },
    /// Run an experiment config and write its report.
    Run {
        config: PathBuf,
        /// Output directory; overrides the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        workers: Option<usize>,
        /// Skip the per-row summary on stdout.
        #[arg(long)]
        quiet: bool,
    },
    /// Print one series of a report as CSV.
    Plot {
        report: PathBuf,
        /// gaps, runs, separation, first-hit or members.
        #[arg(long, value_parser = parse_kind)]
        kind: PlotKind,
        /// Report row to read; defaults to the first row with the series.
        #[arg(long)]
        row: Option<usize>,
        /// Write to a file instead of stdout.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum CorpusAction {
    /// One entry per line with its expected properties.
    List,
}

fn parse_kind(s: &str) -> std::result::Result<PlotKind, String> {
    [PlotKind::Gaps, PlotKind::Runs, PlotKind::Separation, PlotKind::FirstHit, PlotKind::Members]
        .into_iter()
        .find(|k| k.name() == s)
        .ok_or_else(|| format!("unknown series kind {s:?}"))
}

fn fail(e: &Error) -> u8 {
    eprintln!("error: {e}");
    USAGE
}

/// Runs one parsed command and returns the process exit status.
pub fn run_cli(cli: Cli) -> u8 {
    match cli.command {
        Command::Corpus { action: CorpusAction::List } => match corpus::list(&BuildParams::default()) {
            Ok(lines) => {
                for l in lines {
                    println!("{l}");
                }
                0
            }
            Err(e) => fail(&e),
        },
        Command::Run { config, out, workers, quiet } => run(&config, out, workers, quiet),
        Command::Plot { report, kind, row, output } => match plot(&report, kind, row, output.as_deref()) {
            Ok(()) => 0,
            Err(e) => fail(&e),
        },
    }
}

fn run(path: &Path, out: Option<PathBuf>, workers: Option<usize>, quiet: bool) -> u8 {
    let cfg = match ExperimentConfig::load(path) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        pool = pool.num_threads(w);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => return fail(&Error::InvalidParameter(format!("workers: {e}"))),
    };
    let report = match pool.install(|| run_experiment(&cfg)) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    let dir = out
        .or_else(|| cfg.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("perdyn-out").join(&report.system.id));
    if !quiet {
        print_summary(&report);
    }
    match write_outputs(&report, &dir) {
        Ok(paths) => println!("wrote {} files to {}", paths.len(), dir.display()),
        Err(e) => return fail(&e),
    }
    report.exit_status()
}

fn print_summary(r: &ExperimentReport) {
    println!("{} (p={}, space {})", r.system.id, r.system.period, r.system.space);
    for (i, row) in r.rows.iter().enumerate() {
        let v = &row.verdict;
        println!("{i:>3} {:<5} {:<34} {:<16} {}", row.map, v.detector, v.outcome.name(), v.summary);
    }
    for m in &r.matrix {
        let status = serde_json::to_value(m.status).ok();
        let status = status.as_ref().and_then(|s| s.as_str()).unwrap_or("?");
        println!("{status:<12} {:<72} {}", m.name, m.note);
    }
}

fn plot(path: &Path, kind: PlotKind, row: Option<usize>, output: Option<&Path>) -> Result<()> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let report = ExperimentReport::from_json(&text)?;
    let csv = emit_plot_data(&report, kind, row)?;
    match output {
        Some(p) => std::fs::write(p, csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}
