//! Command-line harness: configuration, dispatch to work units, and
//! emission of result records.
//!
//! Exit status is 0 when every record is `ok` with all certificates passing,
//! 2 when any certificate fails or any unit is refused or errors, and 1 on
//! a usage error, in which case nothing is written.

pub mod commands;
pub mod config;
pub mod record;
pub mod suite;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

pub use config::{CommandName, ExperimentConfig, Format, Suite};
pub use record::{read_json_lines, write_csv, write_json_lines, CertificateSummary, Input, Output, ResultRecord, Status};

use crate::{Error, Result};
use commands::Unit;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILURE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "spinwave-lab", version, about = "Exact diagonalization and bound certificates for the Heisenberg ferromagnet")]
pub struct Cli {
    /// JSON config with the same keys as the flags plus `command`.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues of one sector, or of all sectors with total-spin labels.
    Spectrum(CommonArgs),
    /// Partition function and free energy per site at each beta.
    FreeEnergy(CommonArgs),
    /// Spectral gap against 2S(1 - cos(pi/l)) and the minimum gap ratio.
    Gap(CommonArgs),
    /// Upper and lower free-energy bound assemblies at each beta.
    Bounds(CommonArgs),
    /// Two-particle densities of one sector and their certificates.
    Rho2(CommonArgs),
    /// Walk tables, Bessel and reflection-sum certificates.
    Kernels(CommonArgs),
    /// Constants and Green's-function properties.
    Greens(CommonArgs),
    /// Canonical-path census and its growth exponent.
    Paths(CommonArgs),
    /// Every acceptance criterion.
    VerifyAll(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    #[arg(long, default_value_t = 4)]
    pub side: usize,
    /// Twice the spin.
    #[arg(long = "two-s", default_value_t = 1)]
    pub two_s: u32,
    /// Comma-separated inverse temperatures.
    #[arg(long, value_delimiter = ',')]
    pub beta: Vec<f64>,
    /// Particle number of one sector.
    #[arg(long)]
    pub sector: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    /// Comma-separated box sides for `paths`.
    #[arg(long, value_delimiter = ',')]
    pub sides: Vec<usize>,
    #[arg(long, value_enum, default_value_t = Suite::Fast)]
    pub suite: Suite,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Record wall times (output is then no longer reproducible byte for byte).
    #[arg(long)]
    pub timing: bool,
}

impl Command {
    fn into_config(self) -> ExperimentConfig {
        let (name, a) = match self {
            Command::Spectrum(a) => (CommandName::Spectrum, a),
            Command::FreeEnergy(a) => (CommandName::FreeEnergy, a),
            Command::Gap(a) => (CommandName::Gap, a),
            Command::Bounds(a) => (CommandName::Bounds, a),
            Command::Rho2(a) => (CommandName::Rho2, a),
            Command::Kernels(a) => (CommandName::Kernels, a),
            Command::Greens(a) => (CommandName::Greens, a),
            Command::Paths(a) => (CommandName::Paths, a),
            Command::VerifyAll(a) => (CommandName::VerifyAll, a),
        };
        ExperimentConfig {
            command: name,
            dim: a.dim,
            side: a.side,
            two_s: a.two_s,
            beta: a.beta,
            sector: a.sector,
            tol: a.tol,
            steps: a.steps,
            sides: a.sides,
            suite: a.suite,
            out: a.out,
            format: a.format,
            timing: a.timing,
        }
    }
}

fn units(cfg: &ExperimentConfig) -> Result<Vec<Unit>> {
    match cfg.command {
        CommandName::Spectrum => commands::spectrum_units(cfg),
        CommandName::FreeEnergy => commands::free_energy_units(cfg),
        CommandName::Gap => commands::gap_units(cfg),
        CommandName::Bounds => commands::bounds_units(cfg),
        CommandName::Rho2 => commands::rho2_units(cfg),
        CommandName::Kernels => commands::kernels_units(cfg),
        CommandName::Greens => commands::greens_units(cfg),
        CommandName::Paths => commands::paths_units(cfg),
        CommandName::VerifyAll => Ok(suite::suite_units(cfg.suite)),
    }
}

fn execute(command: &str, unit: &Unit, timing: bool) -> Vec<ResultRecord> {
    let start = Instant::now();
    let result = (unit.job)();
    let wall_time = timing.then(|| start.elapsed().as_secs_f64());
    let base = |status, message| ResultRecord {
        command: command.to_string(),
        status,
        inputs: unit.inputs.clone(),
        outputs: Vec::new(),
        certificates: Vec::new(),
        notes: Vec::new(),
        message,
        wall_time,
    };
    match result {
        Ok(rows) => rows
            .into_iter()
            .map(|row| {
                let mut r = base(Status::Ok, None);
                r.inputs.extend(row.inputs);
                r.outputs = row.outputs;
                r.certificates = row.certificates;
                r.notes = row.notes;
                r
            })
            .collect(),
        Err(e @ Error::Budget { .. }) => vec![base(Status::Refused, Some(e.to_string()))],
        Err(e) => vec![base(Status::Error, Some(e.to_string()))],
    }
}

/// Validates the config, then runs its units on the worker pool. Records
/// come back in unit order whatever the scheduling.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    cfg.validate()?;
    let units = units(cfg)?;
    let command = cfg.command.as_str();
    let per_unit: Vec<Vec<ResultRecord>> = units.par_iter().map(|u| execute(command, u, cfg.timing)).collect();
    Ok(per_unit.into_iter().flatten().collect())
}

pub fn exit_code(records: &[ResultRecord]) -> i32 {
    if records.iter().all(ResultRecord::passed) {
        EXIT_OK
    } else {
        EXIT_FAILURE
    }
}

pub fn emit<W: Write>(records: &[ResultRecord], format: Format, w: W) -> Result<()> {
    match format {
        Format::Csv => write_csv(records, w),
        Format::Json => write_json_lines(records, w),
    }
}

/// Parses arguments and runs; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let cfg = match (cli.config, cli.command) {
        (Some(path), None) => match ExperimentConfig::from_file(&path) {
            Ok(cfg) => cfg,
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_USAGE;
            }
        },
        (None, Some(cmd)) => cmd.into_config(),
        _ => {
            eprintln!("error: give a subcommand or --config");
            return EXIT_USAGE;
        }
    };
    let records = match run_experiment(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let written = match &cfg.out {
        Some(path) => std::fs::File::create(path)
            .map_err(Error::from)
            .and_then(|f| emit(&records, cfg.format, std::io::BufWriter::new(f))),
        None => emit(&records, cfg.format, std::io::stdout().lock()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return EXIT_FAILURE;
    }
    exit_code(&records)
}
