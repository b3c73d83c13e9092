//! Ground truth for validation: a principal-strata data-generating process
//! with closed-form estimands, exhaustive subset enumeration for trimming
//! extremes, and the check that TRACE(0) trimming bounds map onto the TRACE
//! trimming bounds.

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::bounds::{no_assumption_bounds, trimmed_mean, Interval, TrimSpec};
use crate::data::{Dataset, Unit};
use crate::error::{Error, Result};
use crate::estimators::{conditional_mean, estimate_p_m1, estimate_te_dim};
use crate::sensitivity::trace_from_trace0;

/// Largest input accepted by [`brute_force_trim_extremes`].
pub const ENUMERATION_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stratum {
    AlwaysTaker,
    Complier,
    NeverTaker,
    Defier,
}

impl Stratum {
    pub const ALL: [Stratum; 4] = [
        Stratum::AlwaysTaker,
        Stratum::Complier,
        Stratum::NeverTaker,
        Stratum::Defier,
    ];

    /// Potential post-treatment indicator `M(d)`.
    pub fn m(self, treated: bool) -> bool {
        match self {
            Stratum::AlwaysTaker => true,
            Stratum::Complier => treated,
            Stratum::NeverTaker => false,
            Stratum::Defier => !treated,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrataProbs {
    pub at: f64,
    pub c: f64,
    pub nt: f64,
    #[serde(default)]
    pub def: f64,
}

impl StrataProbs {
    pub fn get(&self, s: Stratum) -> f64 {
        match s {
            Stratum::AlwaysTaker => self.at,
            Stratum::Complier => self.c,
            Stratum::NeverTaker => self.nt,
            Stratum::Defier => self.def,
        }
    }
}

/// `E[Y(0)]` and `E[Y(1)]` within one stratum.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmMeans {
    pub y0: f64,
    pub y1: f64,
}

impl ArmMeans {
    pub fn get(&self, treated: bool) -> f64 {
        if treated {
            self.y1
        } else {
            self.y0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutcomeMeans {
    pub at: ArmMeans,
    pub c: ArmMeans,
    pub nt: ArmMeans,
    #[serde(default)]
    pub def: ArmMeans,
}

impl OutcomeMeans {
    pub fn get(&self, s: Stratum) -> ArmMeans {
        match s {
            Stratum::AlwaysTaker => self.at,
            Stratum::Complier => self.c,
            Stratum::NeverTaker => self.nt,
            Stratum::Defier => self.def,
        }
    }
}

/// Principal-strata data-generating process. Treatment is assigned with
/// probability one half; outcomes are the stratum-arm mean plus Gaussian noise.
/// Binary outcomes come from `noise_sd = 0` with every mean in `{0, 1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DGPConfig {
    pub n: usize,
    pub strata_probs: StrataProbs,
    pub outcome_means: OutcomeMeans,
    #[serde(default)]
    pub noise_sd: f64,
    /// Force `Y(d) = 0` whenever `M(d) = 0`.
    #[serde(default)]
    pub type3: bool,
    #[serde(default)]
    pub seed: u64,
}

impl DGPConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("n must be positive".into()));
        }
        let probs = Stratum::ALL.map(|s| self.strata_probs.get(s));
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidConfig(
                "strata probabilities must be non-negative".into(),
            ));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!(
                "strata probabilities sum to {total}, not 1"
            )));
        }
        if !(self.noise_sd.is_finite() && self.noise_sd >= 0.0) {
            return Err(Error::InvalidConfig("noise_sd must be non-negative".into()));
        }
        for s in Stratum::ALL {
            let means = self.outcome_means.get(s);
            if !(means.y0.is_finite() && means.y1.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "{s:?} outcome means must be finite"
                )));
            }
            if self.type3 {
                for treated in [false, true] {
                    if !s.m(treated) && means.get(treated) != 0.0 {
                        return Err(Error::InvalidConfig(format!(
                            "type3 requires E[Y({})] = 0 for {s:?}",
                            u8::from(treated)
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Population estimands of a [`DGPConfig`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruthRecord {
    pub trace: f64,
    /// `None` when nobody has `M(1) = 0`.
    pub trace0: Option<f64>,
    pub te: f64,
    pub p_m1: f64,
}

pub fn true_estimands(cfg: &DGPConfig) -> Result<TruthRecord> {
    cfg.validate()?;
    let probs = &cfg.strata_probs;
    let effect = |s: Stratum| {
        let m = cfg.outcome_means.get(s);
        m.y1 - m.y0
    };
    let group = |members: [Stratum; 2]| -> Option<f64> {
        let mass: f64 = members.iter().map(|&s| probs.get(s)).sum();
        (mass > 0.0).then(|| {
            members
                .iter()
                .map(|&s| probs.get(s) * effect(s))
                .sum::<f64>()
                / mass
        })
    };
    let p_m1 = probs.at + probs.c;
    let trace =
        group([Stratum::AlwaysTaker, Stratum::Complier]).ok_or(Error::EmptyReactiveStratum)?;
    let trace0 = group([Stratum::NeverTaker, Stratum::Defier]);
    let te = Stratum::ALL.iter().map(|&s| probs.get(s) * effect(s)).sum();
    Ok(TruthRecord {
        trace,
        trace0,
        te,
        p_m1,
    })
}

/// Draws a dataset of `cfg.n` units and returns it with the population truth.
pub fn simulate(cfg: &DGPConfig) -> Result<(Dataset, TruthRecord)> {
    let truth = true_estimands(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let noise = Normal::new(0.0, cfg.noise_sd)
        .map_err(|e| Error::InvalidConfig(format!("noise distribution: {e}")))?;
    let cumulative: Vec<(Stratum, f64)> = Stratum::ALL
        .iter()
        .scan(0.0, |acc, &s| {
            *acc += cfg.strata_probs.get(s);
            Some((s, *acc))
        })
        .collect();

    let mut units = Vec::with_capacity(cfg.n);
    for _ in 0..cfg.n {
        let u: f64 = rng.random();
        let stratum = cumulative
            .iter()
            .find(|(s, c)| u < *c && cfg.strata_probs.get(*s) > 0.0)
            .or_else(|| {
                cumulative
                    .iter()
                    .rev()
                    .find(|(s, _)| cfg.strata_probs.get(*s) > 0.0)
            })
            .map(|(s, _)| *s)
            .expect("validated probabilities have positive mass");
        let treated: bool = rng.random();
        let m = stratum.m(treated);
        let eps = noise.sample(&mut rng);
        let y = if cfg.type3 && !m {
            0.0
        } else {
            cfg.outcome_means.get(stratum).get(treated) + eps
        };
        units.push(Unit::new(y, treated, Some(m)));
    }
    Ok((Dataset::from_units(units)?, truth))
}

/// Minimum and maximum mean over all size-`k` subsets, by enumeration.
pub fn brute_force_trim_extremes(values: &[f64], k: usize) -> Result<(f64, f64)> {
    if values.len() > ENUMERATION_LIMIT {
        return Err(Error::TooLarge {
            n: values.len(),
            limit: ENUMERATION_LIMIT,
        });
    }
    if k == 0 || k > values.len() {
        return Err(Error::OutOfRange(format!(
            "subset size {k} not in 1..={}",
            values.len()
        )));
    }
    let mut extremes = (f64::INFINITY, f64::NEG_INFINITY);
    for subset in values.iter().combinations(k) {
        let mean = subset.into_iter().sum::<f64>() / k as f64;
        extremes = (extremes.0.min(mean), extremes.1.max(mean));
    }
    Ok(extremes)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrimEquivalenceCheck {
    pub passed: bool,
    /// Everybody is reactive, so the TRACE(0) side refers to an empty group.
    pub degenerate: bool,
    /// TRACE bounds implied by the TRACE(0) trimming bounds.
    pub implied: Option<Interval>,
    pub trim: Interval,
}

/// Computes trimming bounds on TRACE(0) directly (treated `m = 0` mean minus
/// the trimmed control means at fraction `1 − p̂`), maps them through the
/// TRACE/TRACE(0) relation and compares with [`no_assumption_bounds`].
pub fn check_trim_equivalence(ds: &Dataset, tol: f64) -> Result<TrimEquivalenceCheck> {
    let trim = no_assumption_bounds(ds)?;
    let p = estimate_p_m1(ds)?;
    if p == 1.0 {
        return Ok(TrimEquivalenceCheck {
            passed: true,
            degenerate: true,
            implied: None,
            trim,
        });
    }
    let te = estimate_te_dim(ds)?.te_hat;
    let y1_nonreactive = conditional_mean(ds, true, false)?;
    let (ys, ws): (Vec<f64>, Vec<f64>) = ds.arm(false).map(|u| (u.y, u.weight)).unzip();
    let q = 1.0 - p;
    let top = trimmed_mean(&ys, &ws, TrimSpec::highest(q))?;
    let low = trimmed_mean(&ys, &ws, TrimSpec::lowest(q))?;
    let trace0_low = y1_nonreactive - top;
    let trace0_high = y1_nonreactive - low;

    let implied_high = trace_from_trace0(te, p, trace0_low)?;
    let implied_low = trace_from_trace0(te, p, trace0_high)?;
    let passed = (implied_low - trim.lo).abs() <= tol && (implied_high - trim.hi).abs() <= tol;
    Ok(TrimEquivalenceCheck {
        passed,
        degenerate: false,
        implied: Some(Interval::new(
            implied_low.min(implied_high),
            implied_low.max(implied_high),
            trim.kind,
        )),
        trim,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::estimate_p_m1;
    use approx::assert_abs_diff_eq;

    fn cfg(probs: [f64; 4], means: [(f64, f64); 4]) -> DGPConfig {
        let am = |(y0, y1)| ArmMeans { y0, y1 };
        DGPConfig {
            n: 1000,
            strata_probs: StrataProbs {
                at: probs[0],
                c: probs[1],
                nt: probs[2],
                def: probs[3],
            },
            outcome_means: OutcomeMeans {
                at: am(means[0]),
                c: am(means[1]),
                nt: am(means[2]),
                def: am(means[3]),
            },
            noise_sd: 1.0,
            type3: false,
            seed: 1,
        }
    }

    #[test]
    fn truth_all_compliers() {
        let t = true_estimands(&cfg(
            [0.0, 1.0, 0.0, 0.0],
            [(0.0, 0.0), (2.0, 3.0), (0.0, 0.0), (0.0, 0.0)],
        ))
        .unwrap();
        assert_eq!((t.trace, t.te, t.p_m1), (1.0, 1.0, 1.0));
        assert_eq!(t.trace0, None);
    }

    #[test]
    fn truth_mixed() {
        let t = true_estimands(&cfg(
            [0.3, 0.4, 0.3, 0.0],
            [(0.0, 1.0), (1.0, 3.0), (1.0, 0.5), (0.0, 0.0)],
        ))
        .unwrap();
        assert_abs_diff_eq!(t.trace, (0.3 * 1.0 + 0.4 * 2.0) / 0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(t.trace, 1.5714285714285714, epsilon = 1e-12);
        assert_abs_diff_eq!(t.trace0.unwrap(), -0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(t.te, 0.95, epsilon = 1e-12);
        assert_abs_diff_eq!(
            t.te,
            t.trace * t.p_m1 + t.trace0.unwrap() * (1.0 - t.p_m1),
            epsilon = 1e-12
        );
    }

    #[test]
    fn type3_truth_has_zero_trace0() {
        let mut c = cfg(
            [0.2, 0.3, 0.5, 0.0],
            [(0.4, 0.9), (0.0, 0.7), (0.0, 0.0), (0.0, 0.0)],
        );
        c.type3 = true;
        let t = true_estimands(&c).unwrap();
        assert_eq!(t.trace0, Some(0.0));

        let (ds, _) = simulate(&c).unwrap();
        assert!(ds
            .units()
            .iter()
            .filter(|u| u.m == Some(false))
            .all(|u| u.y == 0.0));
    }

    #[test]
    fn type3_rejects_nonzero_means_where_m_is_zero() {
        let mut c = cfg(
            [0.2, 0.3, 0.5, 0.0],
            [(0.4, 0.9), (0.1, 0.7), (0.0, 0.0), (0.0, 0.0)],
        );
        c.type3 = true;
        assert!(matches!(c.validate(), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn config_validation() {
        let c = cfg([0.5, 0.5, 0.5, 0.0], [(0.0, 0.0); 4]);
        assert!(c.validate().is_err());
        let mut c = cfg([0.5, 0.5, 0.0, 0.0], [(0.0, 0.0); 4]);
        c.noise_sd = -1.0;
        assert!(c.validate().is_err());
        let c = cfg([0.0, 0.0, 1.0, 0.0], [(0.0, 0.0); 4]);
        assert!(matches!(
            true_estimands(&c),
            Err(Error::EmptyReactiveStratum)
        ));
    }

    #[test]
    fn noiseless_single_stratum() {
        let mut c = cfg(
            [1.0, 0.0, 0.0, 0.0],
            [(1.25, 4.5), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0)],
        );
        c.noise_sd = 0.0;
        let (ds, _) = simulate(&c).unwrap();
        assert!(ds.arm(true).all(|u| u.y == 4.5));
        assert!(ds.arm(false).all(|u| u.y == 1.25));
    }

    #[test]
    fn simulation_is_deterministic_and_matches_share() {
        let mut c = cfg(
            [0.2, 0.35, 0.45, 0.0],
            [(0.0, 1.0), (0.0, 2.0), (0.5, 0.5), (0.0, 0.0)],
        );
        c.n = 10_000;
        c.seed = 99;
        let (a, truth) = simulate(&c).unwrap();
        let (b, _) = simulate(&c).unwrap();
        assert_eq!(a, b);
        let n_treated = a.arm(true).count() as f64;
        let p_hat = estimate_p_m1(&a).unwrap();
        let se = (truth.p_m1 * (1.0 - truth.p_m1) / n_treated).sqrt();
        assert!(
            (p_hat - truth.p_m1).abs() < 3.0 * se,
            "{p_hat} vs {}",
            truth.p_m1
        );
    }

    #[test]
    fn config_round_trips_through_toml() {
        let mut c = cfg(
            [0.2, 0.3, 0.5, 0.0],
            [(0.4, 0.9), (0.0, 0.7), (0.0, 0.0), (0.0, 0.0)],
        );
        c.type3 = true;
        let text = toml::to_string(&c).unwrap();
        assert_eq!(toml::from_str::<DGPConfig>(&text).unwrap(), c);

        let minimal: DGPConfig = toml::from_str(
            "n = 10\n[strata_probs]\nat = 0.5\nc = 0.5\nnt = 0\n\
             [outcome_means]\nat = { y0 = 1, y1 = 2 }\nc = { y0 = 0, y1 = 1 }\nnt = { y0 = 0, y1 = 0 }\n",
        )
        .unwrap();
        assert_eq!(
            (minimal.noise_sd, minimal.seed, minimal.type3),
            (0.0, 0, false)
        );
        assert_eq!(minimal.strata_probs.def, 0.0);
    }

    #[test]
    fn enumeration_examples() {
        assert_eq!(
            brute_force_trim_extremes(&[0.0, 1.0, 2.0, 3.0], 2).unwrap(),
            (0.5, 2.5)
        );
        assert_eq!(
            brute_force_trim_extremes(&[1.0, 2.0, 6.0], 3).unwrap(),
            (3.0, 3.0)
        );
        assert_eq!(brute_force_trim_extremes(&[5.0], 1).unwrap(), (5.0, 5.0));
        assert!(matches!(
            brute_force_trim_extremes(&[0.0; 21], 3),
            Err(Error::TooLarge { n: 21, limit: 20 })
        ));
        assert!(brute_force_trim_extremes(&[1.0], 0).is_err());
    }

    fn toy() -> Dataset {
        crate::data::read_csv(
            include_str!("../tests/fixtures/toy.csv").as_bytes(),
            &crate::data::Schema::default(),
        )
        .unwrap()
    }

    #[test]
    fn trim_equivalence_on_toy() {
        let check = check_trim_equivalence(&toy(), 1e-10).unwrap();
        assert!(check.passed);
        assert!(!check.degenerate);
        assert_abs_diff_eq!(check.trim.lo, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(check.trim.hi, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn trim_equivalence_degenerate_when_all_reactive() {
        let ds = Dataset::from_units(vec![
            Unit::new(1.0, true, Some(true)),
            Unit::new(0.0, false, None),
            Unit::new(3.0, false, None),
        ])
        .unwrap();
        let check = check_trim_equivalence(&ds, 1e-10).unwrap();
        assert!(check.passed && check.degenerate);
    }
}
