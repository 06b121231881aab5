//! `discenv`: evaluate extremal-function envelopes on grids, compare them
//! with closed-form oracles, and summarize runs.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod report;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("no grid point has a feasible estimate")]
    AllInfeasible,
    #[error(
        "the domain is disconnected: the J-envelope over discs with boundary in X can exceed V_X \
         there (take two disjoint balls); pass --allow-disconnected to evaluate it anyway"
    )]
    Disconnected,
    #[error("{0}")]
    Core(#[from] discenv::Error),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Parse(_) | CliError::Io { .. } => 2,
            CliError::AllInfeasible => 3,
            CliError::Disconnected | CliError::Core(discenv::Error::Disconnected) => 4,
            CliError::Core(_) => 2,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "discenv", version, about = "Evaluate extremal-function estimates from analytic disc functionals")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate a method on a grid; write CSV and a JSON sidecar.
    Eval(RunArgs),
    /// Evaluate a method and compare it with the closed-form oracle.
    Compare(CompareArgs),
    /// Summarize several eval sidecars.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Ebj,
    Lempert,
    Lempert1pole,
    Theorem1,
    Theorem2,
    Hr,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Domain JSON file.
    #[arg(long)]
    pub domain: PathBuf,
    #[arg(long, value_enum)]
    pub method: Method,
    /// "x0,y0,x1,y1,nx,ny": box corners and resolution of the slice grid.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: String,
    /// "i,j": real coordinates (0-based, re1=0, im1=1, ...) spanned by the grid.
    #[arg(long, default_value = "0,1")]
    pub slice: String,
    /// Base point "re1,im1,...,ren,imn" for the coordinates off the slice.
    #[arg(long, allow_hyphen_values = true)]
    pub base: Option<String>,
    #[arg(long)]
    pub degree: Option<usize>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long = "max-evals")]
    pub max_evals: Option<usize>,
    #[arg(long)]
    pub poles: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// CSV output; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON sidecar; defaults to the CSV path with ".json" appended.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Run the class-restricted J envelope on a disconnected domain.
    #[arg(long)]
    pub allow_disconnected: bool,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Also print the sub-mean-value certificate of the method's field on
    /// the circle of this radius about --cert-centre.
    #[arg(long = "cert-centre", allow_hyphen_values = true)]
    cert_centre: Option<String>,
    #[arg(long = "cert-radius")]
    cert_radius: Option<f64>,
    /// Complex direction of the test line; e_1 when absent.
    #[arg(long = "cert-direction", allow_hyphen_values = true)]
    cert_direction: Option<String>,
    #[arg(long = "cert-nodes", default_value_t = 64)]
    cert_nodes: usize,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Sidecar JSON files written by `eval`.
    runs: Vec<PathBuf>,
    /// Plot-data CSV; stdout summary only when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.cmd {
        Command::Eval(args) => run::cmd_eval(&args),
        Command::Compare(c) => {
            let cert = match (c.cert_centre, c.cert_radius) {
                (Some(centre), Some(radius)) => Some(run::CertSpec {
                    centre,
                    radius,
                    direction: c.cert_direction,
                    nodes: c.cert_nodes,
                }),
                (None, None) => None,
                _ => return Err(CliError::Usage("--cert-centre and --cert-radius go together".into())),
            };
            run::cmd_compare(&c.run, cert.as_ref())
        }
        Command::Report(r) => report::cmd_report(&r.runs, r.out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("discenv: {e}");
            ExitCode::from(e.code())
        }
    }
}
