//! Mapping assumptions about TRACE(0) into statements about TRACE.
//!
//! By iterated expectations `TE = TRACE·p + TRACE(0)·(1 − p)` with
//! `p = Pr(M(1)=1)`. Both `TE` and `p` are identified by randomization, so
//! any postulated value or range of TRACE(0) pins down the matching TRACE
//! value or range. Intersecting that range with the no-assumption trimming
//! bounds keeps the result sharp.

use serde::{Deserialize, Serialize};

use crate::bounds::{no_assumption_bounds, Interval, IntervalKind};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::estimators::{estimate_p_m1, estimate_te, StrataShares, TeMethod};
use crate::inference::{bootstrap, percentile_limits, BootstrapConfig};

/// A restriction on TRACE(0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AssumptionSpec {
    Point {
        value: f64,
    },
    Interval {
        lo: f64,
        hi: f64,
    },
    Grid {
        lo: f64,
        hi: f64,
        step: f64,
    },
    Zero,
    /// `|TRACE(0)| ≤ |TRACE|` with a shared sign.
    SameSignSmaller,
    OppositeSign,
    EqualEffects,
}

impl AssumptionSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            AssumptionSpec::Point { value } if value.is_nan() => {
                Err(Error::InvalidConfig("point assumption is NaN".into()))
            }
            AssumptionSpec::Interval { lo, hi } if lo.is_nan() || hi.is_nan() || lo > hi => Err(
                Error::InvalidConfig(format!("assumption interval [{lo}, {hi}] is reversed")),
            ),
            AssumptionSpec::Grid { lo, hi, step } => {
                if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                    Err(Error::InvalidConfig(format!(
                        "grid bounds [{lo}, {hi}] are invalid"
                    )))
                } else if !(step > 0.0 && step.is_finite()) {
                    Err(Error::InvalidConfig(format!(
                        "grid step {step} must be positive"
                    )))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

/// Grid values from `lo` to `hi` inclusive; the last step is clamped to `hi`.
pub fn grid_points(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    AssumptionSpec::Grid { lo, hi, step }.validate()?;
    let eps = step * 1e-9;
    let mut out = Vec::new();
    let mut i = 0u32;
    loop {
        let v = lo + f64::from(i) * step;
        if v >= hi - eps {
            break;
        }
        out.push(v);
        i += 1;
    }
    out.push(hi);
    Ok(out)
}

fn reactive_share(p: f64) -> Result<()> {
    if p > 0.0 && p <= 1.0 {
        Ok(())
    } else {
        Err(Error::DegenerateP(p))
    }
}

fn nonreactive_share(p: f64) -> Result<()> {
    if (0.0..1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::DegenerateP(p))
    }
}

/// TRACE implied by a value of TRACE(0): `(te − trace0·(1 − p)) / p`.
pub fn trace_from_trace0(te: f64, p: f64, trace0: f64) -> Result<f64> {
    reactive_share(p)?;
    Ok((te - trace0 * (1.0 - p)) / p)
}

/// TRACE(0) implied by a value of TRACE: `(te − trace·p) / (1 − p)`.
pub fn trace0_from_trace(te: f64, p: f64, trace: f64) -> Result<f64> {
    nonreactive_share(p)?;
    Ok((te - trace * p) / (1.0 - p))
}

/// The TRACE(0) value at which the implied TRACE equals `target_trace`.
pub fn threshold_trace0(te: f64, p: f64, target_trace: f64) -> Result<f64> {
    trace0_from_trace(te, p, target_trace)
}

fn ordered(a: f64, b: f64) -> Interval {
    Interval::new(a.min(b), a.max(b), IntervalKind::PresetImplied)
}

/// Range of TRACE values implied by an assumption on TRACE(0).
pub fn preset_interval(te: f64, p: f64, spec: &AssumptionSpec) -> Result<Interval> {
    reactive_share(p)?;
    spec.validate()?;
    let map = |t0: f64| (te - t0 * (1.0 - p)) / p;
    let point = |v: f64| Interval::point(v, IntervalKind::PresetImplied);
    // With everyone reactive TRACE equals TE whatever TRACE(0) is.
    if p == 1.0 {
        if matches!(
            spec,
            AssumptionSpec::SameSignSmaller | AssumptionSpec::OppositeSign
        ) && te == 0.0
        {
            return Err(Error::SignUndefined);
        }
        return Ok(point(te));
    }
    Ok(match *spec {
        AssumptionSpec::Zero => point(map(0.0)),
        AssumptionSpec::EqualEffects => point(te),
        AssumptionSpec::Point { value } => point(map(value)),
        AssumptionSpec::Interval { lo, hi } | AssumptionSpec::Grid { lo, hi, .. } => {
            ordered(map(lo), map(hi))
        }
        AssumptionSpec::SameSignSmaller => {
            if te == 0.0 {
                return Err(Error::SignUndefined);
            }
            ordered(te, map(0.0))
        }
        AssumptionSpec::OppositeSign => {
            if te == 0.0 {
                return Err(Error::SignUndefined);
            }
            let zero_point = map(0.0);
            if te > 0.0 {
                Interval::new(zero_point, f64::INFINITY, IntervalKind::PresetImplied)
            } else {
                Interval::new(f64::NEG_INFINITY, zero_point, IntervalKind::PresetImplied)
            }
        }
    })
}

/// Intersection of an assumption-implied range with trimming bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CombinedRegion {
    Region(Interval),
    /// The assumption contradicts the data.
    Infeasible,
}

impl CombinedRegion {
    pub fn region(&self) -> Option<&Interval> {
        match self {
            CombinedRegion::Region(iv) => Some(iv),
            CombinedRegion::Infeasible => None,
        }
    }
}

pub fn combined_region(preset: &Interval, trim: &Interval) -> CombinedRegion {
    let lo = preset.lo.max(trim.lo);
    let hi = preset.hi.min(trim.hi);
    if lo <= hi {
        CombinedRegion::Region(Interval::new(lo, hi, IntervalKind::Combined))
    } else {
        CombinedRegion::Infeasible
    }
}

/// Assumption on one of the untreated-outcome means that determines TRACE(0)
/// when defiers are ruled out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AltAssumption {
    /// Postulated `E[Y(0) | complier]`.
    Y0GivenC(f64),
    /// Postulated `E[Y(0) | never-taker]`.
    Y0GivenNt(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AltTrace0 {
    pub trace0: f64,
    /// `E[Y(0) | NT]`, assumed or backed out.
    pub y0_never_taker: f64,
    /// The backed-out mean lies outside the observed outcome range.
    pub out_of_support: bool,
}

/// TRACE(0) from an assumption on `E[Y(0)|C]` or `E[Y(0)|NT]`.
///
/// `mean_y1_m0` estimates `E[Y(1) | M(1)=0]` (treated units with `m = 0`),
/// `mean_y0_d0m0` is the control mean among `m = 0`, a mixture of compliers
/// and never-takers with never-taker weight `nt / (nt + c)`.
pub fn alt_quantity_to_trace0(
    mean_y1_m0: f64,
    mean_y0_d0m0: f64,
    shares: &StrataShares,
    assumed: AltAssumption,
    y_range: Option<(f64, f64)>,
) -> Result<AltTrace0> {
    let pool = shares.nt + shares.c;
    if pool.is_nan() || pool <= 0.0 {
        return Err(Error::DegenerateShare(
            "no compliers or never-takers; the D=0, M=0 pool is empty".into(),
        ));
    }
    let w_nt = shares.nt / pool;
    let y0_never_taker = match assumed {
        AltAssumption::Y0GivenNt(v) => v,
        AltAssumption::Y0GivenC(v) => {
            if w_nt == 0.0 {
                return Err(Error::DegenerateShare(
                    "never-taker share is zero; E[Y(0)|NT] cannot be backed out".into(),
                ));
            }
            (mean_y0_d0m0 - v * (1.0 - w_nt)) / w_nt
        }
    };
    let out_of_support = y_range.is_some_and(|(lo, hi)| y0_never_taker < lo || y0_never_taker > hi);
    Ok(AltTrace0 {
        trace0: mean_y1_m0 - y0_never_taker,
        y0_never_taker,
        out_of_support,
    })
}

/// [`alt_quantity_to_trace0`] with every ingredient estimated from `ds`.
pub fn alt_quantity_from_data(ds: &Dataset, assumed: AltAssumption) -> Result<AltTrace0> {
    use crate::estimators::{conditional_mean, strata_shares_monotone};
    let shares = strata_shares_monotone(ds)?;
    alt_quantity_to_trace0(
        conditional_mean(ds, true, false)?,
        conditional_mean(ds, false, false)?,
        &shares,
        assumed,
        Some(ds.y_range()),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveRow {
    pub trace0: f64,
    pub trace_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub within_trim_bounds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityCurve {
    pub rows: Vec<CurveRow>,
    pub te_hat: f64,
    pub p_hat: f64,
    pub trim_bounds: Interval,
    /// Replicates dropped because `te` or `p` could not be estimated.
    pub bootstrap_failures: usize,
}

/// Implied TRACE with pointwise percentile-bootstrap limits at each grid value
/// of TRACE(0). Every replicate re-estimates `te` and `p`; the postulated
/// TRACE(0) stays fixed.
pub fn build_curve(
    ds: &Dataset,
    grid: &AssumptionSpec,
    te_method: TeMethod,
    boot: &BootstrapConfig,
) -> Result<SensitivityCurve> {
    let AssumptionSpec::Grid { lo, hi, step } = *grid else {
        return Err(Error::InvalidConfig(
            "sensitivity curve needs a GRID assumption".into(),
        ));
    };
    let points = grid_points(lo, hi, step)?;
    let te_hat = estimate_te(ds, te_method)?.te_hat;
    let p_hat = estimate_p_m1(ds)?;
    reactive_share(p_hat)?;
    let trim_bounds = no_assumption_bounds(ds)?;

    let reps = bootstrap(ds, boot, |d| {
        let te = estimate_te(d, te_method)?.te_hat;
        let p = estimate_p_m1(d)?;
        reactive_share(p)?;
        Ok((te, p))
    })?;
    let ok: Vec<(f64, f64)> = reps.iter().flatten().copied().collect();
    if ok.is_empty() {
        return Err(Error::AllReplicatesFailed(boot.replicates));
    }

    let mut draws = vec![0.0; ok.len()];
    let rows = points
        .into_iter()
        .map(|trace0| {
            let trace_hat = trace_from_trace0(te_hat, p_hat, trace0)?;
            for (slot, &(te, p)) in draws.iter_mut().zip(&ok) {
                *slot = (te - trace0 * (1.0 - p)) / p;
            }
            let (ci_lo, ci_hi) = percentile_limits(&draws, boot.level);
            Ok(CurveRow {
                trace0,
                trace_hat,
                ci_lo,
                ci_hi,
                within_trim_bounds: trim_bounds.contains(trace_hat),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(SensitivityCurve {
        rows,
        te_hat,
        p_hat,
        trim_bounds,
        bootstrap_failures: reps.len() - ok.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Unit;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    /// Share implied by an ITT of -0.23 and a zero-assumption TRACE of -0.59.
    const P_MOB: f64 = 0.38983;

    #[test]
    fn trace_from_trace0_examples() {
        assert_abs_diff_eq!(
            trace_from_trace0(0.7, 0.3, 0.7).unwrap(),
            0.7,
            epsilon = 1e-15
        );
        assert_eq!(trace_from_trace0(0.7, 1.0, 123.0).unwrap(), 0.7);
        // Back-solve p from (te, trace) = (-0.23, -0.59) at trace0 = 0.
        assert_abs_diff_eq!(-0.23 / -0.59, P_MOB, epsilon = 1e-5);
        assert_abs_diff_eq!(
            trace_from_trace0(-0.23, P_MOB, 0.0).unwrap(),
            -0.59,
            epsilon = 1e-4
        );
        assert!(matches!(
            trace_from_trace0(1.0, 0.0, 0.0),
            Err(Error::DegenerateP(_))
        ));
    }

    #[test]
    fn trace0_from_trace_examples() {
        assert_abs_diff_eq!(
            trace0_from_trace(0.4, 0.25, 0.4).unwrap(),
            0.4,
            epsilon = 1e-15
        );
        let t0 = trace0_from_trace(-0.23, P_MOB, 0.0).unwrap();
        assert_abs_diff_eq!(t0, -0.23 / (1.0 - P_MOB), epsilon = 1e-15);
        assert_abs_diff_eq!(t0, -0.377, epsilon = 5e-4);
        assert_abs_diff_eq!(
            trace_from_trace0(-0.23, P_MOB, t0).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        assert!(matches!(
            trace0_from_trace(1.0, 1.0, 0.0),
            Err(Error::DegenerateP(_))
        ));
    }

    #[test]
    fn threshold_examples() {
        assert_abs_diff_eq!(
            threshold_trace0(0.3, 0.6, 0.3).unwrap(),
            0.3,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            threshold_trace0(0.3, 0.6, 0.5).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            threshold_trace0(-0.23, P_MOB, 0.0).unwrap(),
            -0.377,
            epsilon = 5e-4
        );
    }

    #[test]
    fn presets() {
        let same = preset_interval(-0.23, P_MOB, &AssumptionSpec::SameSignSmaller).unwrap();
        assert_abs_diff_eq!(same.lo, -0.59, epsilon = 1e-4);
        assert_abs_diff_eq!(same.hi, -0.23, epsilon = 1e-15);
        assert_eq!(same.kind, IntervalKind::PresetImplied);

        let p = 0.27 / 0.63;
        assert_abs_diff_eq!(p, 0.43, epsilon = 0.005);
        let zero = preset_interval(0.27, p, &AssumptionSpec::Zero).unwrap();
        assert_abs_diff_eq!(zero.lo, 0.63, epsilon = 1e-12);
        assert_eq!(zero.lo, zero.hi);

        let z1 = preset_interval(0.9, 1.0, &AssumptionSpec::Zero).unwrap();
        assert_eq!((z1.lo, z1.hi), (0.9, 0.9));

        let eq = preset_interval(0.2, 0.4, &AssumptionSpec::EqualEffects).unwrap();
        assert_eq!((eq.lo, eq.hi), (0.2, 0.2));

        let opp = preset_interval(-0.23, P_MOB, &AssumptionSpec::OppositeSign).unwrap();
        assert_eq!(opp.lo, f64::NEG_INFINITY);
        assert_abs_diff_eq!(opp.hi, -0.23 / P_MOB, epsilon = 1e-15);
        let opp = preset_interval(0.27, p, &AssumptionSpec::OppositeSign).unwrap();
        assert_abs_diff_eq!(opp.lo, 0.63, epsilon = 1e-12);
        assert_eq!(opp.hi, f64::INFINITY);

        let iv =
            preset_interval(0.5, 0.5, &AssumptionSpec::Interval { lo: -1.0, hi: 1.0 }).unwrap();
        assert_eq!((iv.lo, iv.hi), (0.0, 2.0));
        let pt = preset_interval(0.5, 0.5, &AssumptionSpec::Point { value: 1.0 }).unwrap();
        assert_eq!((pt.lo, pt.hi), (0.0, 0.0));

        assert!(matches!(
            preset_interval(0.0, 0.5, &AssumptionSpec::SameSignSmaller),
            Err(Error::SignUndefined)
        ));
        assert!(matches!(
            preset_interval(0.0, 0.5, &AssumptionSpec::OppositeSign),
            Err(Error::SignUndefined)
        ));
        assert!(matches!(
            preset_interval(0.3, 0.0, &AssumptionSpec::Zero),
            Err(Error::DegenerateP(_))
        ));
    }

    #[test]
    fn combined_examples() {
        let preset = Interval::new(-0.59, -0.23, IntervalKind::PresetImplied);
        let trim = Interval::new(-0.438, 0.397, IntervalKind::NoAssumption);
        let CombinedRegion::Region(c) = combined_region(&preset, &trim) else {
            panic!("expected a region");
        };
        assert_eq!(
            (c.lo, c.hi, c.kind),
            (-0.438, -0.23, IntervalKind::Combined)
        );

        let far = Interval::new(1.0, 2.0, IntervalKind::PresetImplied);
        assert_eq!(combined_region(&far, &trim), CombinedRegion::Infeasible);

        let inner = Interval::new(-0.1, 0.1, IntervalKind::PresetImplied);
        let c = *combined_region(&inner, &trim).region().unwrap();
        assert_eq!((c.lo, c.hi), (inner.lo, inner.hi));

        let half = Interval::new(f64::NEG_INFINITY, -0.59, IntervalKind::PresetImplied);
        assert_eq!(combined_region(&half, &trim), CombinedRegion::Infeasible);
        let half = Interval::new(-0.3, f64::INFINITY, IntervalKind::PresetImplied);
        let c = *combined_region(&half, &trim).region().unwrap();
        assert_eq!((c.lo, c.hi), (-0.3, 0.397));
    }

    #[test]
    fn alt_quantity_examples() {
        let shares = StrataShares::new(0.6, 0.2, 0.2).unwrap();
        let r =
            alt_quantity_to_trace0(1.4, 1.0, &shares, AltAssumption::Y0GivenC(0.6), None).unwrap();
        assert_abs_diff_eq!(r.y0_never_taker, 1.4, epsilon = 1e-12);
        assert_abs_diff_eq!(r.trace0, 0.0, epsilon = 1e-12);

        // Ten control units with m=0: five compliers at Y(0)=0.6 and five
        // never-takers at Y(0)=1.4; their pooled mean is 1.0.
        let pool: Vec<f64> = [0.6; 5].into_iter().chain([1.4; 5]).collect();
        let pooled = pool.iter().sum::<f64>() / pool.len() as f64;
        assert_abs_diff_eq!(pooled, 1.0, epsilon = 1e-12);
        let nt_mean = pool[5..].iter().sum::<f64>() / 5.0;
        assert_abs_diff_eq!(r.y0_never_taker, nt_mean, epsilon = 1e-12);

        let r =
            alt_quantity_to_trace0(0.8, 5.0, &shares, AltAssumption::Y0GivenNt(0.8), None).unwrap();
        assert_eq!(r.trace0, 0.0);

        let no_c = StrataShares::new(0.5, 0.0, 0.5).unwrap();
        let r =
            alt_quantity_to_trace0(2.0, 0.5, &no_c, AltAssumption::Y0GivenNt(0.5), None).unwrap();
        assert_eq!(r.trace0, 1.5);
        let r =
            alt_quantity_to_trace0(2.0, 0.5, &no_c, AltAssumption::Y0GivenC(9.0), None).unwrap();
        assert_eq!(r.y0_never_taker, 0.5);

        let empty = StrataShares::new(1.0, 0.0, 0.0).unwrap();
        assert!(matches!(
            alt_quantity_to_trace0(2.0, 0.5, &empty, AltAssumption::Y0GivenC(0.0), None),
            Err(Error::DegenerateShare(_))
        ));
        let no_nt = StrataShares::new(0.5, 0.5, 0.0).unwrap();
        assert!(matches!(
            alt_quantity_to_trace0(2.0, 0.5, &no_nt, AltAssumption::Y0GivenC(0.0), None),
            Err(Error::DegenerateShare(_))
        ));

        let r = alt_quantity_to_trace0(
            1.4,
            1.0,
            &shares,
            AltAssumption::Y0GivenC(-5.0),
            Some((0.0, 2.0)),
        )
        .unwrap();
        assert!(r.out_of_support);
    }

    #[test]
    fn grid_is_inclusive_and_clamped() {
        let g = grid_points(-1.0, 1.0, 0.1).unwrap();
        assert_eq!(g.len(), 21);
        assert_eq!(g[0], -1.0);
        assert_eq!(*g.last().unwrap(), 1.0);
        let g = grid_points(0.0, 1.0, 0.3).unwrap();
        assert_eq!(g.len(), 5);
        assert_eq!(g[4], 1.0);
        assert_eq!(grid_points(2.0, 2.0, 0.5).unwrap(), vec![2.0]);
        assert!(grid_points(0.0, 1.0, 0.0).is_err());
        assert!(grid_points(1.0, 0.0, 0.1).is_err());
    }

    fn toy() -> Dataset {
        crate::data::read_csv(
            include_str!("../tests/fixtures/toy.csv").as_bytes(),
            &crate::data::Schema::default(),
        )
        .unwrap()
    }

    fn boot(replicates: usize) -> BootstrapConfig {
        BootstrapConfig {
            replicates,
            seed: 17,
            ..BootstrapConfig::default()
        }
    }

    #[test]
    fn curve_on_toy_fixture() {
        let ds = toy();
        let grid = AssumptionSpec::Grid {
            lo: -1.0,
            hi: 1.0,
            step: 0.1,
        };
        let curve = build_curve(&ds, &grid, TeMethod::DiffInMeans, &boot(200)).unwrap();
        assert_eq!(curve.rows.len(), 21);
        assert_eq!(curve.te_hat, 1.0);
        // The row at trace0 = te_hat reproduces te_hat.
        let row = curve
            .rows
            .iter()
            .find(|r| (r.trace0 - 1.0).abs() < 1e-12)
            .unwrap();
        assert_abs_diff_eq!(row.trace_hat, 1.0, epsilon = 1e-12);
        for w in curve.rows.windows(2) {
            assert!(w[0].trace0 < w[1].trace0);
            assert!(w[0].trace_hat > w[1].trace_hat);
        }
        for r in &curve.rows {
            assert_eq!(
                r.within_trim_bounds,
                curve.trim_bounds.contains(r.trace_hat)
            );
        }
    }

    #[test]
    fn constant_outcomes_pin_the_curve_at_zero_trace0() {
        let units = (0..30)
            .map(|i| Unit::new(2.0, i % 2 == 0, Some(i % 3 != 0)))
            .collect();
        let ds = Dataset::from_units(units).unwrap();
        let grid = AssumptionSpec::Grid {
            lo: -2.0,
            hi: 2.0,
            step: 0.5,
        };
        let curve = build_curve(&ds, &grid, TeMethod::DiffInMeans, &boot(100)).unwrap();
        // TE is identically zero, so only the TRACE(0) = 0 row is free of p̂ noise.
        for r in &curve.rows {
            assert!(r.trace_hat.is_finite() && r.ci_lo <= r.ci_hi);
            if r.trace0 == 0.0 {
                assert_eq!((r.trace_hat, r.ci_lo, r.ci_hi), (0.0, 0.0, 0.0));
            } else {
                assert!(r.ci_lo < r.ci_hi);
            }
        }
    }

    #[test]
    fn curve_requires_grid() {
        assert!(build_curve(
            &toy(),
            &AssumptionSpec::Zero,
            TeMethod::DiffInMeans,
            &boot(10)
        )
        .is_err());
    }

    proptest! {
        #[test]
        fn recomposition_identity(te in -10.0..10.0f64, p in 0.01..1.0f64, t0 in -10.0..10.0f64) {
            let trace = trace_from_trace0(te, p, t0).unwrap();
            prop_assert!((trace * p + t0 * (1.0 - p) - te).abs() < 1e-12);
        }

        #[test]
        fn maps_are_mutual_inverses(te in -10.0..10.0f64, p in 0.01..0.99f64, t0 in -10.0..10.0f64) {
            let back = trace0_from_trace(te, p, trace_from_trace0(te, p, t0).unwrap()).unwrap();
            prop_assert!((back - t0).abs() <= 1e-9 * (1.0 + t0.abs()));
        }

        #[test]
        fn same_sign_smaller_endpoints(te in -5.0..5.0f64, p in 0.01..1.0f64) {
            prop_assume!(te != 0.0);
            let iv = preset_interval(te, p, &AssumptionSpec::SameSignSmaller).unwrap();
            let ends = [iv.lo, iv.hi];
            prop_assert!(ends.contains(&te));
            prop_assert!(ends.iter().any(|e| (e - te / p).abs() <= 1e-12 * (1.0 + e.abs())));
        }

        #[test]
        fn combination_laws(a in -5.0..5.0f64, b in -5.0..5.0f64, c in -5.0..5.0f64, d in -5.0..5.0f64) {
            let x = Interval::new(a.min(b), a.max(b), IntervalKind::PresetImplied);
            let y = Interval::new(c.min(d), c.max(d), IntervalKind::NoAssumption);
            let xy = combined_region(&x, &y);
            let yx = combined_region(&y, &x);
            prop_assert_eq!(xy, yx);
            let xx = combined_region(&x, &x).region().copied().unwrap();
            prop_assert_eq!((xx.lo, xx.hi), (x.lo, x.hi));
            if let CombinedRegion::Region(r) = xy {
                prop_assert!(r.width() <= x.width() && r.width() <= y.width());
                prop_assert!(r.within(&x, 0.0) && r.within(&y, 0.0));
            }
        }
    }
}
