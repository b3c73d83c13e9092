//! Trimming bounds on the effect among treatment-reactive units.
//!
//! The treated mean among units with `M = 1` identifies `E[Y(1) | M(1)=1]`.
//! The matching control mean `E[Y(0) | M(1)=1]` is only partially identified:
//! without further assumptions it lies between the means of the lowest and
//! highest `Pr(M=1|D=1)` fractions of the control outcome distribution. Under
//! monotonicity (no defiers) and with `M` observed in the control arm, the
//! always-taker part is identified and only the complier part is trimmed.

use serde::Serialize;

use crate::data::{validate_for, Analysis, Dataset};
use crate::error::{Error, Result};
use crate::estimators::{
    conditional_mean, estimate_p_m1, estimate_te_dim, share_m1, strata_shares_monotone,
    weighted_mean,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum IntervalKind {
    NoAssumption,
    Mt,
    Type3Dim,
    PresetImplied,
    Combined,
}

/// Closed interval on TRACE. Endpoints may be infinite for half-line presets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub kind: IntervalKind,
    pub ci_lo: Option<f64>,
    pub ci_hi: Option<f64>,
}

impl Interval {
    pub fn new(lo: f64, hi: f64, kind: IntervalKind) -> Self {
        debug_assert!(lo <= hi, "interval [{lo}, {hi}] is reversed");
        Interval {
            lo,
            hi,
            kind,
            ci_lo: None,
            ci_hi: None,
        }
    }

    pub fn point(v: f64, kind: IntervalKind) -> Self {
        Self::new(v, v, kind)
    }

    /// Attaches confidence limits, widened if needed so they cover `[lo, hi]`.
    pub fn with_ci(mut self, ci_lo: f64, ci_hi: f64) -> Self {
        self.ci_lo = Some(ci_lo.min(self.lo));
        self.ci_hi = Some(ci_hi.max(self.hi));
        self
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// `self ⊆ other`, allowing each endpoint to stick out by `slack`.
    pub fn within(&self, other: &Interval, slack: f64) -> bool {
        self.lo >= other.lo - slack && self.hi <= other.hi + slack
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Side {
    Lowest,
    Highest,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrimSpec {
    pub fraction: f64,
    pub side: Side,
}

impl TrimSpec {
    pub fn lowest(fraction: f64) -> Self {
        TrimSpec {
            fraction,
            side: Side::Lowest,
        }
    }

    pub fn highest(fraction: f64) -> Self {
        TrimSpec {
            fraction,
            side: Side::Highest,
        }
    }
}

/// Weighted mean of the lowest or highest `fraction` of the mass.
///
/// Values are ordered stably, so ties keep their input order. Mass is taken
/// until it reaches `fraction * W`; the marginal observation contributes only
/// the part of its weight that is needed.
pub fn trimmed_mean(values: &[f64], weights: &[f64], spec: TrimSpec) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if values.len() != weights.len() {
        return Err(Error::InvariantViolation(format!(
            "{} values but {} weights",
            values.len(),
            weights.len()
        )));
    }
    if !(0.0..=1.0).contains(&spec.fraction) {
        return Err(Error::OutOfRange(format!(
            "trimming fraction {} is not in [0,1]",
            spec.fraction
        )));
    }
    if spec.fraction == 0.0 {
        return Err(Error::ZeroFraction);
    }
    let total: f64 = weights.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return Err(Error::EmptyInput);
    }

    let mut order: Vec<usize> = (0..values.len()).collect();
    let cmp = |a: &usize, b: &usize| values[*a].total_cmp(&values[*b]);
    match spec.side {
        Side::Lowest => order.sort_by(cmp),
        Side::Highest => order.sort_by(|a, b| cmp(b, a)),
    }

    let target = spec.fraction * total;
    let (mut mass, mut sum) = (0.0, 0.0);
    for i in order {
        let take = weights[i].min(target - mass);
        if take <= 0.0 {
            break;
        }
        mass += take;
        sum += take * values[i];
        if mass >= target {
            break;
        }
    }
    Ok(sum / mass)
}

fn control_outcomes<'a>(
    units: impl Iterator<Item = &'a crate::data::Unit>,
) -> (Vec<f64>, Vec<f64>) {
    units.map(|u| (u.y, u.weight)).unzip()
}

/// Lowest and highest trimmed means. At a fraction of one both sum the same
/// values in different orders, so they are ordered to absorb rounding.
fn trimmed_pair(values: &[f64], weights: &[f64], fraction: f64) -> Result<(f64, f64)> {
    let low = trimmed_mean(values, weights, TrimSpec::lowest(fraction))?;
    let high = trimmed_mean(values, weights, TrimSpec::highest(fraction))?;
    Ok((low.min(high), low.max(high)))
}

/// Sharp bounds on TRACE that use only randomization.
pub fn no_assumption_bounds(ds: &Dataset) -> Result<Interval> {
    let p = estimate_p_m1(ds)?;
    if p == 0.0 {
        return Err(Error::NoReactiveTreated);
    }
    let treated_mean = conditional_mean(ds, true, true)?;
    let (ys, ws) = control_outcomes(ds.arm(false));
    let (y0_low, y0_high) = trimmed_pair(&ys, &ws, p)?;
    Ok(Interval::new(
        treated_mean - y0_high,
        treated_mean - y0_low,
        IntervalKind::NoAssumption,
    ))
}

/// Monotonicity-based bounds together with the identified mixture ingredients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MtBounds {
    pub interval: Interval,
    /// Share of always-takers among units with `M(1) = 1`.
    pub alpha: f64,
    /// Share of compliers in the `D=0, M=0` pool.
    pub pi: f64,
    /// `E[Y | D=0, M=1]`; absent when no always-takers are estimated.
    pub always_taker_mean: Option<f64>,
    /// Trimmed complier means; absent when the complier share is zero.
    pub complier_low: Option<f64>,
    pub complier_high: Option<f64>,
    /// Bounds on `E[Y(0) | M(1)=1]`.
    pub y0_low: f64,
    pub y0_high: f64,
}

pub fn mt_bounds(ds: &Dataset) -> Result<MtBounds> {
    validate_for(ds, Analysis::MtBounds)?;
    let shares = strata_shares_monotone(ds)?;
    let p1 = share_m1(ds, true)?;
    let p0 = share_m1(ds, false)?;
    if p1 == 0.0 {
        return Err(Error::NoReactiveTreated);
    }
    let treated_mean = conditional_mean(ds, true, true)?;

    let alpha = if shares.c == 0.0 { 1.0 } else { p0 / p1 };
    let pi = if shares.c == 0.0 {
        0.0
    } else {
        shares.c / (shares.c + shares.nt)
    };

    let always_taker_mean = if alpha > 0.0 {
        Some(conditional_mean(ds, false, true)?)
    } else {
        None
    };
    let complier = if pi > 0.0 {
        let (ys, ws) = control_outcomes(ds.cell(false, false));
        if ys.is_empty() {
            return Err(Error::EmptyCell { d: 0, m: 0 });
        }
        Some(trimmed_pair(&ys, &ws, pi)?)
    } else {
        None
    };

    let mix = |complier_mean: Option<f64>| -> f64 {
        let at_part = always_taker_mean.map_or(0.0, |m| alpha * m);
        let c_part = complier_mean.map_or(0.0, |m| (1.0 - alpha) * m);
        at_part + c_part
    };
    let y0_low = mix(complier.map(|c| c.0));
    let y0_high = mix(complier.map(|c| c.1));

    Ok(MtBounds {
        interval: Interval::new(
            treated_mean - y0_high,
            treated_mean - y0_low,
            IntervalKind::Mt,
        ),
        alpha,
        pi,
        always_taker_mean,
        complier_low: complier.map(|c| c.0),
        complier_high: complier.map(|c| c.1),
        y0_low,
        y0_high,
    })
}

/// Naive difference in means among units with `M = 1`.
pub fn dim_m1(ds: &Dataset) -> Result<f64> {
    Ok(conditional_mean(ds, true, true)? - conditional_mean(ds, false, true)?)
}

/// `[DIM, E[Y|D=1,M=1]]`: bounds on TRACE when `M` is a necessary condition
/// for a non-negative outcome and no defiers exist.
pub fn type3_dim_bounds(mean_y_d1m1: f64, mean_y_d0m1: f64) -> Result<Interval> {
    if !(mean_y_d1m1.is_finite() && mean_y_d0m1.is_finite()) {
        return Err(Error::OutOfRange("conditional means must be finite".into()));
    }
    if mean_y_d0m1 < 0.0 {
        return Err(Error::NegativeControlMean(mean_y_d0m1));
    }
    Ok(Interval::new(
        mean_y_d1m1 - mean_y_d0m1,
        mean_y_d1m1,
        IntervalKind::Type3Dim,
    ))
}

/// Conventional comparisons. Only `itt` and `wald_late` are causal estimands
/// in general; the others are diagnostics.
#[derive(Debug)]
pub struct NaiveEstimates {
    pub itt: Result<f64>,
    pub as_treated: Result<f64>,
    pub per_protocol: Result<f64>,
    pub dim_m1: Result<f64>,
    pub wald_late: Option<f64>,
}

pub fn naive_estimates(ds: &Dataset) -> NaiveEstimates {
    let itt = estimate_te_dim(ds).map(|e| e.te_hat);
    let as_treated = if ds.m_observed_in_control() {
        let m1 = weighted_mean(ds.units().iter().filter(|u| u.m == Some(true)))
            .ok_or(Error::EmptyCell { d: 0, m: 1 });
        let m0 = weighted_mean(ds.units().iter().filter(|u| u.m == Some(false)))
            .ok_or(Error::EmptyCell { d: 0, m: 0 });
        m1.and_then(|a| m0.map(|b| a - b))
    } else {
        Err(Error::MissingM(0))
    };
    let per_protocol = conditional_mean(ds, true, true)
        .and_then(|a| conditional_mean(ds, false, false).map(|b| a - b));
    let wald_late = match (&itt, share_m1(ds, true), share_m1(ds, false)) {
        (Ok(itt), Ok(p1), Ok(p0)) if p1 != p0 => Some(itt / (p1 - p0)),
        _ => None,
    };
    NaiveEstimates {
        itt,
        as_treated,
        per_protocol,
        dim_m1: dim_m1(ds),
        wald_late,
    }
}
