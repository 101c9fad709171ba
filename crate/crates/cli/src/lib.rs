//! The `nilmap` command line. [`run`] is the whole program minus process
//! plumbing so it can be driven from tests.
//!
//! Exit codes: 0 when a verdict was produced, 1 when a check came out
//! negative (or a computation failed), 2 on usage or input errors.

mod commands;
mod examples;
mod report;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{ArgGroup, Parser, Subcommand};

pub use report::{Format, Report};

#[derive(Debug, Parser)]
#[command(name = "nilmap", version, about = "Certify, invert and triangularize polynomial self-maps with unipotent Jacobian")]
pub struct Cli {
    /// Seed for every randomized step; printed in randomized reports.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide whether J(f) is unipotent.
    CheckUnipotent {
        map: PathBuf,
        /// Exact decision (default for polynomial maps).
        #[arg(long, conflicts_with = "sampled")]
        exact: bool,
        /// Sample this many points instead.
        #[arg(long, value_name = "N")]
        sampled: Option<usize>,
        #[arg(long, value_name = "T")]
        tol: Option<f64>,
    },
    /// Decide strong nilpotence of J(f - id).
    CheckStrongNilpotence {
        map: PathBuf,
        #[arg(long, conflicts_with = "sampled")]
        generic: bool,
        #[arg(long, value_name = "N")]
        sampled: Option<usize>,
    },
    /// Find S with S^-1 f S unit upper triangular.
    Triangularize { map: PathBuf },
    /// Build a New Class map from a recipe and verify its claims.
    BuildNewclass {
        recipe: PathBuf,
        /// Emit h instead of f = id + h.
        #[arg(long)]
        perturbation: bool,
        /// Rational points for the inverse round trip.
        #[arg(long, default_value_t = 100)]
        inverse_samples: usize,
    },
    /// Compute f^-1(y).
    #[command(group(ArgGroup::new("how").args(["power", "auto"])))]
    Invert {
        map: PathBuf,
        /// Target y as comma-separated numbers (`p/q`, integers or decimals).
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        /// Use the given composition power.
        #[arg(long)]
        power: Option<u32>,
        /// Find the power symbolically (default).
        #[arg(long)]
        auto: bool,
    },
    /// Multi-start Newton search for fixed points of f.
    FixedPoints {
        map: PathBuf,
        #[arg(long, default_value_t = 100)]
        starts: usize,
        #[arg(long = "box", value_name = "LO,HI", default_value = "-10,10", allow_hyphen_values = true)]
        bounds: String,
    },
    /// Recover (a, b, c, d, phi) from a planar map.
    PlanarExtract { map: PathBuf },
    /// Leading forms and zeros at infinity.
    InfinityCheck { map: PathBuf },
    /// Certify that f has exactly one fixed point.
    UniqueFixedPoint { map: PathBuf },
    /// Integrate dp/dt = -f(p) or iterate f; prints CSV `t,x1,...,xn,norm`.
    #[command(group(ArgGroup::new("mode").args(["flow", "iterate"]).required(true)))]
    Orbit {
        map: PathBuf,
        #[arg(long)]
        flow: bool,
        #[arg(long)]
        iterate: bool,
        #[arg(long, allow_hyphen_values = true)]
        start: String,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        t0: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        t1: f64,
        /// RK4 steps (flow) or iterations (iterate).
        #[arg(long, default_value_t = 1000)]
        steps: usize,
    },
    /// Eigenvalue statistics of J(f) at sampled points.
    Spectral {
        map: PathBuf,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long = "box", value_name = "LO,HI", default_value = "-10,10", allow_hyphen_values = true)]
        bounds: String,
        /// Report the largest distance of an eigenvalue from this value.
        #[arg(long, allow_hyphen_values = true)]
        target: Option<f64>,
    },
    /// Run the regression suite of a reference example.
    VerifyExample {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=5))]
        example: u8,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::CheckUnipotent { .. } => "check-unipotent",
            Command::CheckStrongNilpotence { .. } => "check-strong-nilpotence",
            Command::Triangularize { .. } => "triangularize",
            Command::BuildNewclass { .. } => "build-newclass",
            Command::Invert { .. } => "invert",
            Command::FixedPoints { .. } => "fixed-points",
            Command::PlanarExtract { .. } => "planar-extract",
            Command::InfinityCheck { .. } => "infinity-check",
            Command::UniqueFixedPoint { .. } => "unique-fixed-point",
            Command::Orbit { .. } => "orbit",
            Command::Spectral { .. } => "spectral",
            Command::VerifyExample { .. } => "verify-example",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Output {
    pub code: u8,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or unreadable input: exit 2.
    Usage(String),
    /// The computation itself failed: exit 1.
    Failed(String),
}

impl From<nilmap::Error> for CliError {
    fn from(e: nilmap::Error) -> Self {
        use nilmap::Error as E;
        match e {
            E::Syntax { .. }
            | E::VariableOutOfRange { .. }
            | E::DimensionMismatch { .. }
            | E::MissingPhi
            | E::ConflictingPhi => CliError::Usage(e.to_string()),
            _ => CliError::Failed(e.to_string()),
        }
    }
}

pub fn run<I, T>(args: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Output { code: 2, stdout: String::new(), stderr: text }
            } else {
                Output { code: 0, stdout: text, stderr: String::new() }
            };
        }
    };
    let name = cli.command.name();
    match commands::dispatch(&cli) {
        Ok((report, note)) => Output {
            code: report.exit_code(),
            stdout: report.render(cli.format),
            stderr: note.unwrap_or_default(),
        },
        Err(err) => {
            let (code, msg) = match err {
                CliError::Usage(m) => (2, m),
                CliError::Failed(m) => (1, m),
            };
            let text = report::error_text(name, &msg, code, cli.format);
            match cli.format {
                Format::Json => Output { code, stdout: text, stderr: String::new() },
                _ => Output { code, stdout: String::new(), stderr: text },
            }
        }
    }
}
