use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use trace_core::estimators::TeMethod;
use trace_core::inference::ResampleUnit;
use trace_core::sensitivity::AssumptionSpec;

#[derive(Debug, Parser)]
#[command(
    name = "trace",
    version,
    about = "TRACE estimation, bounds and sensitivity analysis"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sensitivity curve, bounds and assumption-implied region with bootstrap limits.
    Analyze(AnalyzeArgs),
    /// Trimming bounds, Type-3 bounds and naive comparisons.
    Bounds(BoundsArgs),
    /// Draw a dataset from a principal-strata config.
    Simulate(SimulateArgs),
    /// TRACE(0) value at which the implied TRACE hits a target.
    Threshold(ThresholdArgs),
}

/// Column names in the input CSV.
#[derive(Debug, Clone, Default, Args)]
pub struct ColumnArgs {
    #[arg(long)]
    pub y: Option<String>,
    #[arg(long)]
    pub d: Option<String>,
    #[arg(long)]
    pub m: Option<String>,
    /// Comma-separated covariate columns.
    #[arg(long, value_delimiter = ',')]
    pub covariates: Option<Vec<String>>,
    #[arg(long)]
    pub block: Option<String>,
    #[arg(long)]
    pub weight: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TeMethodArg {
    DiffInMeans,
    OlsAdjusted,
}

impl From<TeMethodArg> for TeMethod {
    fn from(m: TeMethodArg) -> Self {
        match m {
            TeMethodArg::DiffInMeans => TeMethod::DiffInMeans,
            TeMethodArg::OlsAdjusted => TeMethod::OlsAdjusted,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ResampleArg {
    Row,
    Block,
}

impl From<ResampleArg> for ResampleUnit {
    fn from(r: ResampleArg) -> Self {
        match r {
            ResampleArg::Row => ResampleUnit::Row,
            ResampleArg::Block => ResampleUnit::Block,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// TOML config; flags override its keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub columns: ColumnArgs,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub replicates: Option<usize>,
    #[arg(long)]
    pub level: Option<f64>,
    #[arg(long, value_enum)]
    pub resample_unit: Option<ResampleArg>,
    #[arg(long, value_enum)]
    pub te_method: Option<TeMethodArg>,
    /// zero, equal, same-sign-smaller, opposite-sign, point:V or interval:LO:HI.
    #[arg(long, value_parser = parse_preset, allow_hyphen_values = true)]
    pub preset: Option<AssumptionSpec>,
    /// TRACE(0) grid for the curve as LO:HI:STEP.
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    pub grid: Option<AssumptionSpec>,
    #[arg(long)]
    pub out_table: Option<PathBuf>,
    #[arg(long)]
    pub out_report: Option<PathBuf>,
    #[arg(long)]
    pub out_chart: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct BoundsArgs {
    #[arg(long, conflicts_with = "from_moments")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub columns: ColumnArgs,
    /// Report `[DIM, E[Y|D=1,M=1]]` bounds; requires M observed among controls.
    #[arg(long)]
    pub type3: bool,
    /// Type-3 bounds from `E[Y|D=1,M=1]` and `E[Y|D=0,M=1]` without data.
    #[arg(long, num_args = 2, value_names = ["A", "B"], allow_hyphen_values = true)]
    pub from_moments: Option<Vec<f64>>,
    /// Report path; standard output when absent.
    #[arg(long)]
    pub out_report: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// TOML data-generating process config.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Generated dataset CSV.
    #[arg(long)]
    pub out_table: PathBuf,
    /// Population truth JSON.
    #[arg(long)]
    pub out_report: PathBuf,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ThresholdArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub columns: ColumnArgs,
    #[arg(long, value_enum)]
    pub te_method: Option<TeMethodArg>,
    /// Total effect; with `--p`, skips estimation.
    #[arg(
        long,
        requires = "p",
        conflicts_with = "input",
        allow_hyphen_values = true
    )]
    pub te: Option<f64>,
    #[arg(long, requires = "te")]
    pub p: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub target: f64,
    #[arg(long)]
    pub out_report: Option<PathBuf>,
}

fn parse_real(s: &str) -> Result<f64, String> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| format!("`{s}` is not a number"))
}

pub fn parse_preset(s: &str) -> Result<AssumptionSpec, String> {
    let spec = match s.split_once(':') {
        None => match s {
            "zero" => AssumptionSpec::Zero,
            "equal" => AssumptionSpec::EqualEffects,
            "same-sign-smaller" => AssumptionSpec::SameSignSmaller,
            "opposite-sign" => AssumptionSpec::OppositeSign,
            _ => return Err(format!("unknown preset `{s}`")),
        },
        Some(("point", v)) => AssumptionSpec::Point {
            value: parse_real(v)?,
        },
        Some(("interval", rest)) => {
            let (lo, hi) = rest
                .split_once(':')
                .ok_or_else(|| "interval preset needs interval:LO:HI".to_string())?;
            AssumptionSpec::Interval {
                lo: parse_real(lo)?,
                hi: parse_real(hi)?,
            }
        }
        Some(_) => return Err(format!("unknown preset `{s}`")),
    };
    spec.validate().map_err(|e| e.to_string())?;
    Ok(spec)
}

pub fn parse_grid(s: &str) -> Result<AssumptionSpec, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, step] = parts[..] else {
        return Err(format!("grid `{s}` is not LO:HI:STEP"));
    };
    let spec = AssumptionSpec::Grid {
        lo: parse_real(lo)?,
        hi: parse_real(hi)?,
        step: parse_real(step)?,
    };
    spec.validate().map_err(|e| e.to_string())?;
    Ok(spec)
}
