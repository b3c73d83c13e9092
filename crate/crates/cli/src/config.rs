//! TOML configuration for `analyze`, `bounds` and `threshold`. Every key is
//! optional in the file; command-line flags take precedence.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use trace_core::data::Schema;
use trace_core::estimators::TeMethod;
use trace_core::inference::BootstrapConfig;
use trace_core::sensitivity::AssumptionSpec;

use crate::args::{AnalyzeArgs, ColumnArgs};
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Columns {
    pub y: Option<String>,
    pub d: Option<String>,
    pub m: Option<String>,
    pub covariates: Vec<String>,
    pub block: Option<String>,
    pub weight: Option<String>,
}

impl Columns {
    fn overridden(mut self, flags: &ColumnArgs) -> Self {
        let pick = |flag: &Option<String>, file: &mut Option<String>| {
            if flag.is_some() {
                file.clone_from(flag);
            }
        };
        pick(&flags.y, &mut self.y);
        pick(&flags.d, &mut self.d);
        pick(&flags.m, &mut self.m);
        pick(&flags.block, &mut self.block);
        pick(&flags.weight, &mut self.weight);
        if let Some(c) = &flags.covariates {
            self.covariates = c.clone();
        }
        self
    }

    fn into_schema(self) -> Schema {
        let default = Schema::default();
        Schema {
            y: self.y.unwrap_or(default.y),
            d: self.d.unwrap_or(default.d),
            m: self.m.unwrap_or(default.m),
            covariates: self.covariates,
            block: self.block,
            weight: self.weight,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Outputs {
    pub table: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub chart: Option<PathBuf>,
}

/// Contents of a config file.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub input: Option<PathBuf>,
    pub te_method: Option<TeMethod>,
    pub schema: Columns,
    /// Restriction on TRACE(0) used for the implied interval.
    pub assumption: Option<AssumptionSpec>,
    /// TRACE(0) grid for the curve.
    pub grid: Option<GridSection>,
    pub bootstrap: BootstrapConfig,
    pub outputs: Outputs,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl FileConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, origin: &Path) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn load_optional(path: Option<&Path>) -> CliResult<Self> {
        path.map_or_else(|| Ok(Self::default()), Self::load)
    }
}

/// Input location and column mapping after merging file and flags.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSource {
    pub input: PathBuf,
    pub schema: Schema,
}

pub fn resolve_source(
    file: &FileConfig,
    input: Option<&Path>,
    columns: &ColumnArgs,
) -> CliResult<DataSource> {
    let input = input
        .map(Path::to_path_buf)
        .or_else(|| file.input.clone())
        .filter(|p| !p.as_os_str().is_empty())
        .ok_or_else(|| {
            CliError::Usage("no input: pass --input or set `input` in the config".into())
        })?;
    Ok(DataSource {
        input,
        schema: file.schema.clone().overridden(columns).into_schema(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisOutputs {
    pub table: PathBuf,
    pub report: PathBuf,
    pub chart: Option<PathBuf>,
}

/// Fully resolved settings for `analyze`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    pub source: DataSource,
    /// `None` means the curve grid doubles as the assumption.
    pub assumption: Option<AssumptionSpec>,
    /// `None` means the grid spanning the trimming bounds.
    pub grid: Option<AssumptionSpec>,
    pub te_method: TeMethod,
    pub bootstrap: BootstrapConfig,
    pub outputs: AnalysisOutputs,
}

impl AnalysisConfig {
    pub fn resolve(args: &AnalyzeArgs) -> CliResult<Self> {
        let file = FileConfig::load_optional(args.config.as_deref())?;
        let source = resolve_source(&file, args.input.as_deref(), &args.columns)?;

        let mut bootstrap = file.bootstrap.clone();
        if let Some(seed) = args.seed {
            bootstrap.seed = seed;
        }
        if let Some(r) = args.replicates {
            bootstrap.replicates = r;
        }
        if let Some(level) = args.level {
            bootstrap.level = level;
        }
        if let Some(unit) = args.resample_unit {
            bootstrap.resample_unit = unit.into();
        }
        bootstrap.validate()?;

        let assumption = args.preset.or(file.assumption);
        if let Some(a) = &assumption {
            a.validate()?;
        }
        let grid = match (args.grid, file.grid) {
            (Some(g), _) => Some(g),
            (None, Some(g)) => Some(AssumptionSpec::Grid {
                lo: g.lo,
                hi: g.hi,
                step: g.step,
            }),
            (None, None) => assumption.filter(|a| matches!(a, AssumptionSpec::Grid { .. })),
        };
        if let Some(g) = &grid {
            g.validate()?;
        }

        let nonempty = |flag: &Option<PathBuf>, file: &Option<PathBuf>, what: &str| {
            flag.clone()
                .or_else(|| file.clone())
                .filter(|p| !p.as_os_str().is_empty())
                .ok_or_else(|| CliError::Usage(format!("no {what} path: pass --out-{what}")))
        };
        let outputs = AnalysisOutputs {
            table: nonempty(&args.out_table, &file.outputs.table, "table")?,
            report: nonempty(&args.out_report, &file.outputs.report, "report")?,
            chart: args
                .out_chart
                .clone()
                .or_else(|| file.outputs.chart.clone())
                .filter(|p| !p.as_os_str().is_empty()),
        };

        Ok(AnalysisConfig {
            source,
            assumption,
            grid,
            te_method: args
                .te_method
                .map(Into::into)
                .or(file.te_method)
                .unwrap_or(TeMethod::DiffInMeans),
            bootstrap,
            outputs,
        })
    }
}
