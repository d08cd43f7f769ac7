//! `catsim` command-line front end. Every subcommand maps a config and a
//! seed to a fixed set of output files.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub mod commands;
pub mod config;
mod schema;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config error {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => EXIT_USAGE,
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl From<catsim_core::Error> for CliError {
    fn from(e: catsim_core::Error) -> Self {
        use catsim_core::Error as E;
        match e {
            // these come straight from config values
            E::InvalidParameter { .. } | E::Cutoff { .. } | E::Model(_) => {
                CliError::Config(format!("(invalid value): {e}"))
            }
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "catsim", version, about = "Mechanical cat-state simulation and analysis")]
pub struct Cli {
    /// Print the JSON schema of every config and exit.
    #[arg(long, global = true)]
    pub schema: bool,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, clap::Args)]
pub struct Common {
    /// JSON config; defaults apply when omitted.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Overrides the seed in the config.
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    /// Output directory, created if missing.
    #[arg(long, value_name = "DIR", default_value = "catsim-out")]
    pub out: PathBuf,
    /// Suppress the summary on stdout.
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Collapse and revival trajectories.
    Simulate(Common),
    /// Qubit Bloch vector against time for a ring of initial qubit phases.
    QubitPhaseScan(Common),
    /// Wigner function of a prepared cat.
    Wigner(Common),
    /// Sampled parity tomography, reconstruction and state fits.
    Tomo(Common),
    /// Wigner negativity against wait time.
    Decay(Common),
    /// Effective masses and delocalization of the acoustic mode.
    Mass(Common),
    /// Drive, parity and phonon-number calibrations.
    Calibrate(Common),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::QubitPhaseScan(_) => "qubit-phase-scan",
            Command::Wigner(_) => "wigner",
            Command::Tomo(_) => "tomo",
            Command::Decay(_) => "decay",
            Command::Mass(_) => "mass",
            Command::Calibrate(_) => "calibrate",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Simulate(c)
            | Command::QubitPhaseScan(c)
            | Command::Wigner(c)
            | Command::Tomo(c)
            | Command::Decay(c)
            | Command::Mass(c)
            | Command::Calibrate(c) => c,
        }
    }
}

/// Files produced by one subcommand, in write order.
#[derive(Debug, Default)]
pub struct Output {
    pub files: Vec<(String, String)>,
    pub summary: String,
}

impl Output {
    pub fn file(&mut self, name: &str, body: String) {
        self.files.push((name.to_string(), body));
    }

    pub fn json(&mut self, name: &str, value: &serde_json::Value) {
        let mut body = serde_json::to_string_pretty(value).expect("json values serialize");
        body.push('\n');
        self.file(name, body);
    }
}

/// Runs the subcommand and returns the output without touching the disk.
pub fn execute(command: &Command) -> Result<Output, CliError> {
    let common = command.common();
    let path = common.config.as_deref();
    let seed = common.seed;
    match command {
        Command::Simulate(_) => commands::simulate(config::load(path)?, seed),
        Command::QubitPhaseScan(_) => commands::qubit_phase_scan(config::load(path)?, seed),
        Command::Wigner(_) => commands::wigner(config::load(path)?, seed),
        Command::Tomo(_) => commands::tomo(config::load(path)?, seed),
        Command::Decay(_) => commands::decay(config::load(path)?, seed),
        Command::Mass(_) => commands::mass(config::load(path)?, seed),
        Command::Calibrate(_) => commands::calibrate(config::load(path)?, seed),
    }
}

fn write_output(dir: &Path, out: &Output) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    for (name, body) in &out.files {
        let p = dir.join(name);
        std::fs::write(&p, body).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
    }
    Ok(())
}

fn thread_pool() -> Result<(), CliError> {
    let Ok(v) = std::env::var("CATSIM_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("CATSIM_THREADS must be a positive integer, got {v:?}")))?;
    // a second initialization in the same process is harmless
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Parses `argv`, runs, writes the outputs and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if cli.schema {
        let mut body = serde_json::to_string_pretty(&schema::schema()).expect("schema serializes");
        body.push('\n');
        let _ = std::io::stdout().write_all(body.as_bytes());
        return EXIT_OK;
    }
    let Some(command) = cli.command else {
        eprintln!("catsim: no subcommand given; see --help");
        return EXIT_USAGE;
    };
    let result = thread_pool()
        .and_then(|_| execute(&command))
        .and_then(|out| write_output(&command.common().out, &out).map(|_| out));
    match result {
        Ok(out) => {
            if !command.common().quiet {
                print!("{}", out.summary);
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("catsim {}: {e}", command.name());
            e.exit_code()
        }
    }
}
