//! Batch driver: one spec file and one experiment per invocation, one
//! [`record::ResultRecord`] out, plus an optional CSV table for plotting.

pub mod error;
pub mod experiments;
pub mod record;
pub mod spec;
mod suite;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, ValueEnum};

use crate::error::{CliError, ExitCode};
use crate::record::{ResultRecord, Table};
use crate::spec::ModelSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    PwEvolve,
    PwConstraint,
    DualClock,
    BauerCheck,
    Abl,
    WeakValue,
    Dhist,
    FpfMeasure,
    MtsTrace,
    EquivSuite,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Self::PwEvolve => "pw-evolve",
            Self::PwConstraint => "pw-constraint",
            Self::DualClock => "dual-clock",
            Self::BauerCheck => "bauer-check",
            Self::Abl => "abl",
            Self::WeakValue => "weak-value",
            Self::Dhist => "dhist",
            Self::FpfMeasure => "fpf-measure",
            Self::MtsTrace => "mts-trace",
            Self::EquivSuite => "equiv-suite",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "qtime", version, about = "Run one relational-time experiment from a JSON model spec")]
pub struct Args {
    /// Experiment to run.
    #[arg(value_enum)]
    pub experiment: Experiment,
    /// Model spec (JSON).
    #[arg(long)]
    pub spec: PathBuf,
    /// Output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// `json` writes the record; `csv` writes the table and puts the record
    /// next to it.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Overrides `tolerances.check`.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Overrides the model seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Runs an already-loaded spec and assembles the record.
pub fn run_spec(
    experiment: Experiment,
    spec: &ModelSpec,
    seed: u64,
) -> Result<(ResultRecord, Table), CliError> {
    if let Some(name) = &spec.experiment {
        if name != experiment.name() {
            return Err(CliError::validation(
                "experiment.name",
                format!("spec is written for {name:?}, not {:?}", experiment.name()),
            ));
        }
    }
    let start = Instant::now();
    let report = experiments::run(experiment, spec, seed)?;
    let record = ResultRecord {
        experiment: experiment.name().to_owned(),
        inputs_digest: spec.digest.clone(),
        seed,
        outputs: report.outputs,
        residuals: report.residuals,
        flags: report.flags,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    Ok((record, report.table))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::io(format!("writing {}", path.display()), e))
}

fn record_path_beside(table: &Path) -> PathBuf {
    if table.extension().is_some_and(|e| e == "json") {
        table.with_extension("record.json")
    } else {
        table.with_extension("json")
    }
}

pub fn execute(args: &Args) -> Result<ExitCode, CliError> {
    let mut spec = spec::load(&args.spec)?;
    if let Some(tol) = args.tol {
        if !(tol.is_finite() && tol >= 0.0) {
            return Err(CliError::validation("--tol", "must be finite and nonnegative"));
        }
        spec.tolerances.check = Some(tol);
    }
    let seed = args.seed.unwrap_or(spec.seed);
    let (record, table) = run_spec(args.experiment, &spec, seed)?;

    match (args.format, &args.out) {
        (Format::Json, Some(path)) => write_file(path, record.to_json().as_bytes())?,
        (Format::Json, None) => std::io::stdout()
            .write_all(record.to_json().as_bytes())
            .map_err(|e| CliError::io("writing stdout", e))?,
        (Format::Csv, Some(path)) => {
            write_file(path, table.to_csv().as_bytes())?;
            write_file(&record_path_beside(path), record.to_json().as_bytes())?;
        }
        (Format::Csv, None) => table.write(std::io::stdout())?,
    }

    if args.experiment == Experiment::EquivSuite && !record.all_flags_pass() {
        let failed: Vec<&str> = record.flags.iter().filter(|(_, &ok)| !ok).map(|(k, _)| k.as_str()).collect();
        return Err(CliError::Invariant(format!("equivalence checks failed: {}", failed.join(", "))));
    }
    Ok(ExitCode::Success)
}
