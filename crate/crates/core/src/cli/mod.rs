//! Command-line front end.
//!
//! Errors are written to stderr as one JSON object per line. Exit codes:
//! 0 on success, 2 for invalid input or configuration, 3 when a numerical
//! routine fails to converge or leaves its supported domain.

pub mod commands;
pub mod config;
pub mod input;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::Error;
use commands::CommandOutput;
use config::{AnalysisConfig, OutputFormat};
use input::read_records;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "pprep",
    version,
    about = "Power-prior analysis of an original study and its replication",
    after_help = "The strong-evidence threshold for `design` defaults to gamma = 1/10 \
                  (BF_dc <= 1/10 for Hc, >= 10 for Hd). It is a conventional choice; set \
                  `gamma` in the config file to change it."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Joint and marginal posteriors of the effect and the power parameter.
    Estimate(CommonArgs),
    /// Bayes factors for effect absence and for compatibility with the original.
    Test(CommonArgs),
    /// Probability of replication success across replication sample sizes.
    Design(CommonArgs),
    /// Correspondence between the power prior and the hierarchical model.
    Bridge(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Study records as CSV (id,role,effect_type,estimate,se,n) or JSON.
    #[arg(long)]
    pub input: PathBuf,
    /// Analysis settings as JSON; all fields optional.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Directory for density grid CSV files.
    #[arg(long)]
    pub grid_out: Option<PathBuf>,
    /// Report format on stdout [default: json].
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Serialize)]
struct ErrorObject<'a> {
    error: ErrorBody<'a>,
}

#[derive(Debug, Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    message: String,
    exit_code: i32,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Convergence { .. } | Error::UnsupportedDomain(_) => EXIT_NUMERICAL,
        _ => EXIT_VALIDATION,
    }
}

fn kind(e: &Error) -> &'static str {
    match e {
        Error::Domain(_) => "domain",
        Error::UnsupportedDomain(_) => "unsupported_domain",
        Error::Convergence { .. } => "convergence",
        Error::State(_) => "state",
        Error::Validation(_) => "validation",
        Error::Parse(_) => "parse",
        Error::Io(_) => "io",
    }
}

fn report_error(err: &mut dyn Write, kind: &str, message: String, code: i32) -> i32 {
    let obj = ErrorObject {
        error: ErrorBody {
            kind,
            message,
            exit_code: code,
        },
    };
    let line = serde_json::to_string(&obj).unwrap_or_else(|_| "{\"error\":{}}".into());
    let _ = writeln!(err, "{line}");
    code
}

fn write_grids(dir: &Path, out: &CommandOutput) -> crate::Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("cannot create {}: {e}", dir.display())))?;
    for g in &out.grids {
        let path = dir.join(g.name);
        std::fs::write(&path, &g.contents)
            .map_err(|e| Error::Io(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn execute(command: &Command, out: &mut dyn Write) -> crate::Result<()> {
    let (args, f): (&CommonArgs, fn(&[input::StudyRecord], &AnalysisConfig) -> crate::Result<CommandOutput>) =
        match command {
            Command::Estimate(a) => (a, commands::cmd_estimate),
            Command::Test(a) => (a, commands::cmd_test),
            Command::Design(a) => (a, commands::cmd_design),
            Command::Bridge(a) => (a, commands::cmd_bridge),
        };
    let cfg = match &args.config {
        Some(p) => AnalysisConfig::load(p)?,
        None => AnalysisConfig::default(),
    };
    let records = read_records(&args.input)?;
    let result = f(&records, &cfg)?;
    if let Some(dir) = &args.grid_out {
        write_grids(dir, &result)?;
    }
    let format = args.format.or(cfg.format).unwrap_or(OutputFormat::Json);
    let text = match format {
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(&result.report)
                .map_err(|e| Error::State(format!("cannot serialize report: {e}")))?;
            s.push('\n');
            s
        }
        OutputFormat::Csv => result.table,
    };
    out.write_all(text.as_bytes())
        .map_err(|e| Error::Io(format!("cannot write output: {e}")))
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => report_error(err, "usage", e.to_string().trim_end().to_string(), EXIT_VALIDATION),
            };
        }
    };
    match execute(&cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let code = exit_code(&e);
            report_error(err, kind(&e), e.to_string(), code)
        }
    }
}
