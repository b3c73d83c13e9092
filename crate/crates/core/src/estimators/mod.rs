//! Sample analogs of the identified ingredients: total effect, cell means,
//! post-treatment shares and (under no defiers) principal-strata shares.

mod ols;

pub use ols::estimate_te_ols;

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Unit};
use crate::error::{Error, Result};

/// Slack below which a negative complier share is treated as rounding noise.
pub const MONOTONICITY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TeMethod {
    DiffInMeans,
    OlsAdjusted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TEEstimate {
    pub te_hat: f64,
    /// HC2 standard error; only the regression estimator reports one.
    pub se: Option<f64>,
    pub method: TeMethod,
}

/// Shares of always-takers, compliers and never-takers when defiers are ruled out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StrataShares {
    pub at: f64,
    pub c: f64,
    pub nt: f64,
}

impl StrataShares {
    pub fn new(at: f64, c: f64, nt: f64) -> Result<Self> {
        let ok = [at, c, nt].iter().all(|v| (0.0..=1.0).contains(v))
            && (at + c + nt - 1.0).abs() <= 1e-12;
        if ok {
            Ok(StrataShares { at, c, nt })
        } else {
            Err(Error::OutOfRange(format!(
                "strata shares ({at}, {c}, {nt}) are not on the simplex"
            )))
        }
    }
}

/// Weighted mean of `y`; `None` when the iterator is empty.
pub(crate) fn weighted_mean<'a>(units: impl IntoIterator<Item = &'a Unit>) -> Option<f64> {
    let (sw, swy) = units.into_iter().fold((0.0, 0.0), |(sw, swy), u| {
        (sw + u.weight, swy + u.weight * u.y)
    });
    (sw > 0.0).then(|| swy / sw)
}

/// Weighted share of units with `m = 1`; `None` on an empty arm.
fn weighted_share_m1<'a>(units: impl IntoIterator<Item = &'a Unit>) -> Option<f64> {
    let (sw, sw1) = units.into_iter().fold((0.0, 0.0), |(sw, sw1), u| {
        let hit = if u.m == Some(true) { u.weight } else { 0.0 };
        (sw + u.weight, sw1 + hit)
    });
    (sw > 0.0).then(|| sw1 / sw)
}

fn require_m(ds: &Dataset, treated: bool) -> Result<()> {
    if treated || ds.m_observed_in_control() {
        Ok(())
    } else {
        Err(Error::MissingM(0))
    }
}

pub fn estimate_te_dim(ds: &Dataset) -> Result<TEEstimate> {
    let y1 = weighted_mean(ds.arm(true)).ok_or(Error::EmptyArm(1))?;
    let y0 = weighted_mean(ds.arm(false)).ok_or(Error::EmptyArm(0))?;
    Ok(TEEstimate {
        te_hat: y1 - y0,
        se: None,
        method: TeMethod::DiffInMeans,
    })
}

/// Point estimate of the total effect by the requested method. Regression
/// adjustment uses every covariate and block fixed effects when blocks exist.
pub fn estimate_te(ds: &Dataset, method: TeMethod) -> Result<TEEstimate> {
    match method {
        TeMethod::DiffInMeans => estimate_te_dim(ds),
        TeMethod::OlsAdjusted => {
            let has_blocks = ds.units().iter().any(|u| u.block.is_some());
            estimate_te_ols(ds, !ds.covariate_names().is_empty(), has_blocks)
        }
    }
}

/// Estimated `Pr(M(1) = 1)`, the weighted share of treated units with `m = 1`.
pub fn estimate_p_m1(ds: &Dataset) -> Result<f64> {
    weighted_share_m1(ds.arm(true)).ok_or(Error::EmptyArm(1))
}

/// Weighted share of `m = 1` within one arm.
pub fn share_m1(ds: &Dataset, treated: bool) -> Result<f64> {
    require_m(ds, treated)?;
    weighted_share_m1(ds.arm(treated)).ok_or(Error::EmptyArm(u8::from(treated)))
}

/// Weighted mean of `y` among units with `D = d`, `M = m`.
pub fn conditional_mean(ds: &Dataset, treated: bool, m: bool) -> Result<f64> {
    require_m(ds, treated)?;
    weighted_mean(ds.cell(treated, m)).ok_or(Error::EmptyCell {
        d: u8::from(treated),
        m: u8::from(m),
    })
}

/// Strata shares identified under monotonicity:
/// `at = Pr(M=1|D=0)`, `nt = Pr(M=0|D=1)`, `c = Pr(M=1|D=1) - Pr(M=1|D=0)`.
pub fn strata_shares_monotone(ds: &Dataset) -> Result<StrataShares> {
    let p1 = share_m1(ds, true)?;
    let p0 = share_m1(ds, false)?;
    let c = p1 - p0;
    if c < -MONOTONICITY_SLACK {
        return Err(Error::MonotonicityViolatedEmpirically { complier_share: c });
    }
    if c < 0.0 {
        // p0 and p1 agree up to rounding; pin the shares to the simplex.
        return Ok(StrataShares {
            at: p1,
            c: 0.0,
            nt: 1.0 - p1,
        });
    }
    Ok(StrataShares {
        at: p0,
        c,
        nt: 1.0 - p1,
    })
}

/// Conditional outcome rates recovered from marginal moments by Bayes' rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentEffects {
    pub pr_y1_d1: f64,
    pub pr_y1_d0: f64,
    pub te: f64,
}

/// Backs `Pr(Y=1|D=1)`, `Pr(Y=1|D=0)` and their difference out of
/// `Pr(D=1)`, `Pr(Y=1)` and `Pr(D=1|Y=1)`.
pub fn moments_to_te(pr_d1: f64, pr_y1: f64, pr_d1_given_y1: f64) -> Result<MomentEffects> {
    for (name, v) in [
        ("Pr(D=1)", pr_d1),
        ("Pr(Y=1)", pr_y1),
        ("Pr(D=1|Y=1)", pr_d1_given_y1),
    ] {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::OutOfRange(format!("{name} = {v} is not in (0,1)")));
        }
    }
    let pr_y1_d1 = pr_d1_given_y1 * pr_y1 / pr_d1;
    let pr_y1_d0 = (1.0 - pr_d1_given_y1) * pr_y1 / (1.0 - pr_d1);
    for (name, v) in [("Pr(Y=1|D=1)", pr_y1_d1), ("Pr(Y=1|D=0)", pr_y1_d0)] {
        if v > 1.0 {
            return Err(Error::OutOfRange(format!("implied {name} = {v} exceeds 1")));
        }
    }
    Ok(MomentEffects {
        pr_y1_d1,
        pr_y1_d0,
        te: pr_y1_d1 - pr_y1_d0,
    })
}
