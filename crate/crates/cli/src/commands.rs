//! Subcommands. Each `*_outputs` function returns rendered artifacts without
//! touching the filesystem so they can be compared in tests.

use std::fs;
use std::path::Path;

use serde_json::{json, Value};
use trace_core::bounds::{
    mt_bounds, naive_estimates, no_assumption_bounds, type3_dim_bounds, Interval,
};
use trace_core::data::{load_csv, validate_for, write_csv_to, Analysis, Dataset};
use trace_core::estimators::{conditional_mean, estimate_p_m1, estimate_te, TeMethod};
use trace_core::inference::{interval_ci, BootstrapConfig};
use trace_core::oracle::{simulate, DGPConfig};
use trace_core::sensitivity::{
    build_curve, combined_region, preset_interval, threshold_trace0, trace0_from_trace,
    AssumptionSpec, CombinedRegion,
};

use crate::args::{BoundsArgs, SimulateArgs, ThresholdArgs};
use crate::chart::{self, ChartData};
use crate::config::{resolve_source, AnalysisConfig, DataSource, FileConfig};
use crate::error::{CliError, CliResult};
use crate::output::{
    combined, curve_table, emit, interval, opt_real, pretty, real, real_or_reason, skipped,
    write_atomic,
};

/// Points in the grid used when none is configured.
pub const DEFAULT_GRID_STEPS: u32 = 40;

fn load(source: &DataSource) -> CliResult<Dataset> {
    Ok(load_csv(&source.input, &source.schema)?)
}

/// The TRACE(0) range whose image under the TRACE/TRACE(0) map is the
/// trimming interval, split into [`DEFAULT_GRID_STEPS`] steps. Falls back to
/// `[-1, 1]` when that range is a point or undefined.
pub fn default_grid(te: f64, p: f64, trim: &Interval) -> AssumptionSpec {
    let ends =
        trace0_from_trace(te, p, trim.lo).and_then(|a| Ok((a, trace0_from_trace(te, p, trim.hi)?)));
    match ends {
        Ok((a, b)) if a.is_finite() && b.is_finite() && a != b => AssumptionSpec::Grid {
            lo: a.min(b),
            hi: a.max(b),
            step: (a - b).abs() / f64::from(DEFAULT_GRID_STEPS),
        },
        _ => AssumptionSpec::Grid {
            lo: -1.0,
            hi: 1.0,
            step: 2.0 / f64::from(DEFAULT_GRID_STEPS),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalyzeOutputs {
    pub table: String,
    pub report: String,
    pub chart: Option<String>,
}

fn naive_json(ds: &Dataset) -> Value {
    let n = naive_estimates(ds);
    json!({
        "note": "diagnostics only; as_treated, per_protocol and dim_m1 condition on a post-treatment variable",
        "itt": real_or_reason(&n.itt),
        "as_treated": real_or_reason(&n.as_treated),
        "per_protocol": real_or_reason(&n.per_protocol),
        "dim_m1": real_or_reason(&n.dim_m1),
        "wald_late": opt_real(n.wald_late),
    })
}

fn mt_json(mt: &trace_core::bounds::MtBounds, iv: &Interval) -> Value {
    let mut v = interval(iv);
    v["alpha"] = real(mt.alpha);
    v["pi"] = real(mt.pi);
    v["always_taker_mean"] = opt_real(mt.always_taker_mean);
    v["complier_low"] = opt_real(mt.complier_low);
    v["complier_high"] = opt_real(mt.complier_high);
    v["y0_low"] = real(mt.y0_low);
    v["y0_high"] = real(mt.y0_high);
    v
}

fn bootstrap_json(cfg: &BootstrapConfig, failures: Value) -> Value {
    json!({
        "seed": cfg.seed,
        "replicates": cfg.replicates,
        "level": real(cfg.level),
        "resample_unit": cfg.resample_unit,
        "stratify_by_arm": cfg.stratify_by_arm,
        "failures": failures,
    })
}

pub fn analyze_outputs(cfg: &AnalysisConfig) -> CliResult<AnalyzeOutputs> {
    let ds = load(&cfg.source)?;
    validate_for(&ds, Analysis::Sensitivity)?;
    let te = estimate_te(&ds, cfg.te_method)?;
    let p_hat = estimate_p_m1(&ds)?;
    let trim = no_assumption_bounds(&ds)?;

    let grid = cfg
        .grid
        .unwrap_or_else(|| default_grid(te.te_hat, p_hat, &trim));
    let curve = build_curve(&ds, &grid, cfg.te_method, &cfg.bootstrap)?;
    let (trim, trim_failures) = interval_ci(trim, &ds, &cfg.bootstrap, no_assumption_bounds)?;

    let (mt_value, mt_failures) = match mt_bounds(&ds) {
        Ok(mt) => match interval_ci(mt.interval, &ds, &cfg.bootstrap, |d| {
            mt_bounds(d).map(|b| b.interval)
        }) {
            Ok((iv, failures)) => (mt_json(&mt, &iv), json!(failures)),
            Err(e) => {
                let mut v = mt_json(&mt, &mt.interval);
                v["ci_unavailable"] = json!(e.to_string());
                (v, json!(cfg.bootstrap.replicates))
            }
        },
        Err(e) => (skipped(&e), Value::Null),
    };

    let assumption = cfg.assumption.unwrap_or(grid);
    let preset = preset_interval(te.te_hat, p_hat, &assumption);
    let region = preset.as_ref().ok().map(|iv| combined_region(iv, &trim));
    let threshold = threshold_trace0(te.te_hat, p_hat, 0.0);

    let report = json!({
        "n": ds.len(),
        "te_method": cfg.te_method,
        "te_hat": real(te.te_hat),
        "te_se": opt_real(te.se),
        "p_hat": real(p_hat),
        "no_assumption_bounds": interval(&trim),
        "mt_bounds": mt_value,
        "assumption": assumption,
        "preset_interval": preset.as_ref().map_or_else(skipped, interval),
        "combined": region.as_ref().map_or_else(
            || json!({ "skipped": "no assumption-implied interval" }),
            combined,
        ),
        "naive_estimates": naive_json(&ds),
        "threshold_trace0": real_or_reason(&threshold),
        "threshold_target": 0.0,
        "curve": {
            "grid": grid,
            "rows": curve.rows.len(),
        },
        "bootstrap": bootstrap_json(&cfg.bootstrap, json!({
            "curve": curve.bootstrap_failures,
            "no_assumption_bounds": trim_failures,
            "mt_bounds": mt_failures,
        })),
    });

    let chart = cfg.outputs.chart.as_ref().map(|_| {
        let marker = |t: f64| {
            let mid = curve.rows[curve.rows.len() / 2].trace0;
            (
                t,
                trace0_from_trace(curve.te_hat, curve.p_hat, t).unwrap_or(mid),
            )
        };
        chart::render(&ChartData {
            rows: &curve.rows,
            combined: region.as_ref().and_then(CombinedRegion::region),
            trim_markers: [marker(trim.lo), marker(trim.hi)],
        })
    });

    Ok(AnalyzeOutputs {
        table: curve_table(&curve.rows),
        report: pretty(&report),
        chart,
    })
}

pub fn analyze(cfg: &AnalysisConfig) -> CliResult<()> {
    let out = analyze_outputs(cfg)?;
    write_atomic(&cfg.outputs.table, out.table.as_bytes())?;
    write_atomic(&cfg.outputs.report, out.report.as_bytes())?;
    if let (Some(path), Some(svg)) = (&cfg.outputs.chart, &out.chart) {
        write_atomic(path, svg.as_bytes())?;
    }
    Ok(())
}

pub fn bounds_report(args: &BoundsArgs) -> CliResult<String> {
    if let Some(moments) = &args.from_moments {
        let [treated, control] = moments[..] else {
            return Err(CliError::Usage("--from-moments takes two values".into()));
        };
        let iv = type3_dim_bounds(treated, control)?;
        return Ok(pretty(&json!({
            "from_moments": {
                "mean_y_d1m1": real(treated),
                "mean_y_d0m1": real(control),
            },
            "dim_m1": real(iv.lo),
            "type3_dim_bounds": interval(&iv),
        })));
    }

    let file = FileConfig::load_optional(args.config.as_deref())?;
    let ds = load(&resolve_source(
        &file,
        args.input.as_deref(),
        &args.columns,
    )?)?;
    validate_for(&ds, Analysis::NoAssumptionBounds)?;
    let trim = no_assumption_bounds(&ds)?;
    let mt = mt_bounds(&ds)
        .map(|mt| mt_json(&mt, &mt.interval))
        .unwrap_or_else(|e| skipped(&e));

    let mut report = json!({
        "n": ds.len(),
        "p_hat": real(estimate_p_m1(&ds)?),
        "no_assumption_bounds": interval(&trim),
        "mt_bounds": mt,
    });
    if args.type3 {
        report["type3_dim_bounds"] = validate_for(&ds, Analysis::Dim)
            .and_then(|()| {
                type3_dim_bounds(
                    conditional_mean(&ds, true, true)?,
                    conditional_mean(&ds, false, true)?,
                )
            })
            .map_or_else(|e| skipped(&e), |iv| interval(&iv));
    }
    report["naive_estimates"] = naive_json(&ds);
    Ok(pretty(&report))
}

pub fn bounds(args: &BoundsArgs) -> CliResult<()> {
    emit(args.out_report.as_deref(), &bounds_report(args)?)
}

pub fn load_dgp(path: &Path) -> CliResult<DGPConfig> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    toml::from_str(&text).map_err(|e| CliError::Config {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Generated CSV and truth JSON.
pub fn simulate_outputs(cfg: &DGPConfig) -> CliResult<(Vec<u8>, String)> {
    let (ds, truth) = simulate(cfg)?;
    let mut csv = Vec::new();
    write_csv_to(&ds, &mut csv)?;
    let report = json!({
        "trace": real(truth.trace),
        "trace0": opt_real(truth.trace0),
        "te": real(truth.te),
        "p_m1": real(truth.p_m1),
        "config": cfg,
    });
    Ok((csv, pretty(&report)))
}

pub fn simulate_cmd(args: &SimulateArgs) -> CliResult<()> {
    let mut cfg = load_dgp(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(n) = args.n {
        cfg.n = n;
    }
    let (csv, truth) = simulate_outputs(&cfg)?;
    write_atomic(&args.out_table, &csv)?;
    write_atomic(&args.out_report, truth.as_bytes())
}

pub fn threshold_report(args: &ThresholdArgs) -> CliResult<String> {
    let (te, p, source) = match (args.te, args.p) {
        (Some(te), Some(p)) => (te, p, json!("given")),
        _ => {
            let file = FileConfig::load_optional(args.config.as_deref())?;
            let method = args
                .te_method
                .map(TeMethod::from)
                .or(file.te_method)
                .unwrap_or(TeMethod::DiffInMeans);
            let ds = load(&resolve_source(
                &file,
                args.input.as_deref(),
                &args.columns,
            )?)?;
            validate_for(&ds, Analysis::Sensitivity)?;
            (
                estimate_te(&ds, method)?.te_hat,
                estimate_p_m1(&ds)?,
                json!(method),
            )
        }
    };
    let t = threshold_trace0(te, p, args.target)?;
    Ok(pretty(&json!({
        "te": real(te),
        "p": real(p),
        "source": source,
        "target_trace": real(args.target),
        "threshold_trace0": real(t),
    })))
}

pub fn threshold(args: &ThresholdArgs) -> CliResult<()> {
    emit(args.out_report.as_deref(), &threshold_report(args)?)
}
