//! Seeded percentile bootstrap.
//!
//! Replicate `r` draws from its own ChaCha8 stream, selected by `(seed, r)`,
//! so results do not depend on how replicates are scheduled across threads.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::Interval;
use crate::data::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResampleUnit {
    Row,
    Block,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BootstrapConfig {
    pub replicates: usize,
    pub seed: u64,
    pub level: f64,
    pub resample_unit: ResampleUnit,
    /// Resample treated and control rows separately, keeping arm sizes fixed.
    pub stratify_by_arm: bool,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            replicates: 2000,
            seed: 0,
            level: 0.95,
            resample_unit: ResampleUnit::Row,
            stratify_by_arm: false,
        }
    }
}

impl BootstrapConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replicates < 2 {
            return Err(Error::InvalidConfig(format!(
                "bootstrap needs at least 2 replicates, got {}",
                self.replicates
            )));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "confidence level {} is not in (0,1)",
                self.level
            )));
        }
        if self.stratify_by_arm && self.resample_unit == ResampleUnit::Block {
            return Err(Error::InvalidConfig(
                "arm stratification is only available for row resampling".into(),
            ));
        }
        Ok(())
    }
}

/// Random stream for replicate `r`.
pub fn replicate_rng(seed: u64, r: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(r as u64);
    rng
}

fn draw(rng: &mut ChaCha8Rng, n: usize) -> usize {
    rng.random_range(0..n as u64) as usize
}

/// Row indices forming replicate `r`.
pub fn resample_indices(ds: &Dataset, cfg: &BootstrapConfig, r: usize) -> Result<Vec<usize>> {
    let mut rng = replicate_rng(cfg.seed, r);
    let n = ds.len();
    match cfg.resample_unit {
        ResampleUnit::Row if cfg.stratify_by_arm => {
            let mut out = Vec::with_capacity(n);
            for treated in [true, false] {
                let pool: Vec<usize> = ds
                    .units()
                    .iter()
                    .enumerate()
                    .filter(|(_, u)| u.treated == treated)
                    .map(|(i, _)| i)
                    .collect();
                out.extend((0..pool.len()).map(|_| pool[draw(&mut rng, pool.len())]));
            }
            Ok(out)
        }
        ResampleUnit::Row => Ok((0..n).map(|_| draw(&mut rng, n)).collect()),
        ResampleUnit::Block => {
            let mut blocks: BTreeMap<_, Vec<usize>> = BTreeMap::new();
            for (i, u) in ds.units().iter().enumerate() {
                blocks
                    .entry(u.block.ok_or(Error::MissingBlockLabels)?)
                    .or_default()
                    .push(i);
            }
            let groups: Vec<Vec<usize>> = blocks.into_values().collect();
            let mut out = Vec::with_capacity(n);
            for _ in 0..groups.len() {
                out.extend_from_slice(&groups[draw(&mut rng, groups.len())]);
            }
            Ok(out)
        }
    }
}

/// Evaluates `statistic` on every replicate, in replicate order. Replicates
/// whose resample is invalid or whose statistic errors are `None`.
pub fn bootstrap<T, F>(ds: &Dataset, cfg: &BootstrapConfig, statistic: F) -> Result<Vec<Option<T>>>
where
    T: Send,
    F: Fn(&Dataset) -> Result<T> + Sync,
{
    cfg.validate()?;
    if ds.is_empty() {
        return Err(Error::EmptyInput);
    }
    if cfg.resample_unit == ResampleUnit::Block && ds.units().iter().any(|u| u.block.is_none()) {
        return Err(Error::MissingBlockLabels);
    }
    Ok((0..cfg.replicates)
        .into_par_iter()
        .map(|r| {
            let idx = resample_indices(ds, cfg, r).ok()?;
            let sample = ds.select(&idx).ok()?;
            statistic(&sample).ok()
        })
        .collect())
}

/// Empirical quantile of sorted data, linear interpolation between order
/// statistics at position `(n - 1) q`.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty sample");
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    let frac = h - lo as f64;
    if lo == hi || frac == 0.0 {
        sorted[lo]
    } else {
        sorted[lo] + (sorted[hi] - sorted[lo]) * frac
    }
}

/// `(1-level)/2` and `1-(1-level)/2` quantiles of `values`.
pub fn percentile_limits(values: &[f64], level: f64) -> (f64, f64) {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    (
        quantile_sorted(&sorted, tail),
        quantile_sorted(&sorted, 1.0 - tail),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapCi {
    pub lo: f64,
    pub hi: f64,
    /// Statistic per replicate; `None` where the replicate failed.
    pub replicate_values: Vec<Option<f64>>,
    pub failures: usize,
}

pub fn percentile_ci<F>(statistic: F, ds: &Dataset, cfg: &BootstrapConfig) -> Result<BootstrapCi>
where
    F: Fn(&Dataset) -> Result<f64> + Sync,
{
    let replicate_values = bootstrap(ds, cfg, |d| {
        statistic(d).and_then(|v| {
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::OutOfRange("statistic is not finite".into()))
            }
        })
    })?;
    let ok: Vec<f64> = replicate_values.iter().flatten().copied().collect();
    if ok.is_empty() {
        return Err(Error::AllReplicatesFailed(cfg.replicates));
    }
    let (lo, hi) = percentile_limits(&ok, cfg.level);
    Ok(BootstrapCi {
        lo,
        hi,
        failures: replicate_values.len() - ok.len(),
        replicate_values,
    })
}

/// Bootstrap confidence limits for an estimated interval: the lower tail
/// quantile of the replicated lower endpoint and the upper tail quantile of
/// the replicated upper endpoint. Returns the interval with limits attached
/// and the number of failed replicates.
pub fn interval_ci<F>(
    estimate: Interval,
    ds: &Dataset,
    cfg: &BootstrapConfig,
    bounds: F,
) -> Result<(Interval, usize)>
where
    F: Fn(&Dataset) -> Result<Interval> + Sync,
{
    let reps = bootstrap(ds, cfg, |d| bounds(d).map(|b| (b.lo, b.hi)))?;
    let ok: Vec<(f64, f64)> = reps.iter().flatten().copied().collect();
    if ok.is_empty() {
        return Err(Error::AllReplicatesFailed(cfg.replicates));
    }
    let (los, his): (Vec<f64>, Vec<f64>) = ok.iter().copied().unzip();
    let (ci_lo, _) = percentile_limits(&los, cfg.level);
    let (_, ci_hi) = percentile_limits(&his, cfg.level);
    Ok((estimate.with_ci(ci_lo, ci_hi), reps.len() - ok.len()))
}
