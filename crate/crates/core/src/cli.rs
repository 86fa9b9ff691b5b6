//! Command-line front end.
//!
//! ```text
//! macroent index-p --family cat --N 4,6,8,10,12
//! macroent stability --family w --N 8 --pairs all --out-dir out
//! macroent run --config spec.json
//! ```
//!
//! Exit codes: 0 on success, 2 on invalid input, 3 on numerical failure.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::experiment::{run, Command, ExperimentSpec};

#[derive(Debug, Parser)]
#[command(name = "macroent", version, about = "Macroscopic entanglement diagnostics for N-qubit pure states")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Fluctuation index p from a sweep over N.
    IndexP(ExperimentSpec),
    /// Cluster range Ω(ε) at each N.
    Cluster(ExperimentSpec),
    /// Pair strength and measurement disturbance for site pairs.
    Stability(ExperimentSpec),
    /// Iterated single-site measurements until the cluster property holds.
    Reduce(ExperimentSpec),
    /// Decoherence rates and the fragility exponent.
    Decoherence(ExperimentSpec),
    /// Shor-stage classification and noise sensitivity.
    Shor(ExperimentSpec),
    /// Run an experiment described by a JSON file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `out_dir` from the file.
        #[arg(long = "out-dir")]
        out_dir: Option<PathBuf>,
    },
}

fn spec_from(sub: Sub) -> Result<ExperimentSpec, String> {
    let (command, mut spec) = match sub {
        Sub::IndexP(s) => (Command::IndexP, s),
        Sub::Cluster(s) => (Command::Cluster, s),
        Sub::Stability(s) => (Command::Stability, s),
        Sub::Reduce(s) => (Command::Reduce, s),
        Sub::Decoherence(s) => (Command::Decoherence, s),
        Sub::Shor(s) => (Command::Shor, s),
        Sub::Run { config, out_dir } => {
            let text = std::fs::read_to_string(&config).map_err(|e| format!("reading {}: {e}", config.display()))?;
            let mut spec = ExperimentSpec::from_json(&text).map_err(|e| e.to_string())?;
            if out_dir.is_some() {
                spec.out_dir = out_dir;
            }
            return Ok(spec);
        }
    };
    spec.command = command;
    Ok(spec)
}

/// Parses `args` (including the program name), runs the experiment and
/// returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let spec = match spec_from(cli.command) {
        Ok(s) => s,
        Err(msg) => {
            eprintln!("error: {msg}");
            return 2;
        }
    };
    match run(&spec) {
        Ok(out) => {
            println!("{}", out.csv.display());
            println!("{}", out.summary.display());
            0
        }
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            code
        }
    }
}
