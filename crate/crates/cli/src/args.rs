use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(
    name = "crystalwalk",
    version,
    about = "Random walks on crystal lattices"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Period, refinement, invariant measure, realization and Albanese metric.
    Analyze(AnalyzeArgs),
    /// Embedded points and edges of a window of the lattice.
    Realize(RealizeArgs),
    /// Exact n-step transition probabilities.
    Heat(HeatArgs),
    /// Local CLT ratio and sup error along a list of step counts.
    Lclt(LcltArgs),
    /// The correction coefficient a₁, analytic and/or extrapolated.
    A1(A1Args),
    /// Monte Carlo check of the central limit theorems.
    Clt(CltArgs),
    /// Check a quotient graph and list every violation.
    Validate(ValidateArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
#[group(required = true, multiple = false, id = "source")]
pub struct Source {
    /// Builtin lattice: square, triangular or hexagonal.
    #[arg(long, group = "source")]
    pub lattice: Option<String>,
    /// Quotient-graph JSON document.
    #[arg(long, group = "source")]
    pub input: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Common {
    #[command(flatten)]
    #[serde(flatten)]
    pub source: Source,
    /// Builtin parameters `key=value,...` (values may be `a/b`); defaults to
    /// the simple walk.
    #[arg(long, requires = "lattice")]
    pub params: Option<String>,
    /// Search depth of the lifted period.
    #[arg(long)]
    pub depth: Option<usize>,
    /// Output file; standard output when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Serialize)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Serialize)]
pub struct RealizeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// Inclusive cell box `lo:hi,lo:hi,...`, one range per dimension.
    #[arg(long, default_value = "-1:1,-1:1")]
    pub window: String,
    /// Edge table for CSV output; next to `--output` as `<stem>.edges.csv`
    /// when omitted.
    #[arg(long)]
    pub edges: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Args, Debug, Serialize)]
pub struct HeatArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// Number of steps.
    #[arg(long)]
    pub n: usize,
    /// Start vertex id; the first vertex when omitted.
    #[arg(long)]
    pub start: Option<String>,
    /// Propagate on the refined quotient instead of the original one.
    #[arg(long)]
    pub refined: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Args, Debug, Serialize)]
pub struct LcltArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// Step counts, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "16,32,64,128,256")]
    pub n_list: Vec<usize>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum A1Mode {
    Analytic,
    Numeric,
    Both,
}

#[derive(Args, Debug, Serialize)]
pub struct A1Args {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value_t = A1Mode::Both)]
    pub mode: A1Mode,
    /// Step counts for the extrapolation, strictly increasing.
    #[arg(long, value_delimiter = ',', default_value = "40,80,160,320,640")]
    pub n_list: Vec<usize>,
    /// Start vertex id (original quotient); the first vertex when omitted.
    #[arg(long)]
    pub x: Option<String>,
    /// Target vertex id; the start vertex when omitted.
    #[arg(long)]
    pub y: Option<String>,
    /// Target cell offset from `x + round(nρ)`, in original lattice coordinates.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub shift: Option<Vec<i64>>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CltMode {
    First,
    Second,
}

#[derive(Args, Debug, Serialize)]
pub struct CltArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value_t = CltMode::First)]
    pub mode: CltMode,
    /// Scaling parameter.
    #[arg(long, default_value_t = 256)]
    pub n: usize,
    /// Times in [0, ∞), comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,1")]
    pub t: Vec<f64>,
    #[arg(long, default_value_t = 100_000)]
    pub paths: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Per-sample CSV `path,t,x1,...` for plotting.
    #[arg(long)]
    pub samples: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct ValidateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Analyze(_) => "analyze",
            Command::Realize(_) => "realize",
            Command::Heat(_) => "heat",
            Command::Lclt(_) => "lclt",
            Command::A1(_) => "a1",
            Command::Clt(_) => "clt",
            Command::Validate(_) => "validate",
        }
    }
}
