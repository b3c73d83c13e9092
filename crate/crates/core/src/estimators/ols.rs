//! Weighted least squares for the covariate-adjusted total effect with HC2
//! standard errors.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};

use super::{TEEstimate, TeMethod};
use crate::data::{BlockId, Dataset};
use crate::error::{Error, Result};

/// Relative size of a pivot in R below which a column is treated as collinear.
const RANK_TOL: f64 = 1e-10;

/// Design matrix with columns intercept, d, covariates, block dummies
/// (first present level dropped). Column 1 is always the treatment.
pub(crate) fn design(
    ds: &Dataset,
    use_covariates: bool,
    use_block_fe: bool,
) -> Result<DMatrix<f64>> {
    let n = ds.len();
    let n_cov = if use_covariates {
        ds.covariate_names().len()
    } else {
        0
    };
    let levels: Vec<BlockId> = if use_block_fe {
        let mut set = BTreeSet::new();
        for u in ds.units() {
            set.insert(u.block.ok_or(Error::MissingBlockLabels)?);
        }
        set.into_iter().skip(1).collect()
    } else {
        Vec::new()
    };
    let k = 2 + n_cov + levels.len();
    let mut x = DMatrix::zeros(n, k);
    for (i, u) in ds.units().iter().enumerate() {
        x[(i, 0)] = 1.0;
        x[(i, 1)] = f64::from(u.d());
        for j in 0..n_cov {
            x[(i, 2 + j)] = u.x[j];
        }
        if let Some(b) = u.block {
            if let Ok(pos) = levels.binary_search(&b) {
                x[(i, 2 + n_cov + pos)] = 1.0;
            }
        }
    }
    Ok(x)
}

/// Coefficient on `d` from weighted least squares of `y` on an intercept, `d`,
/// optional covariates and optional block dummies, with its HC2 standard error.
pub fn estimate_te_ols(
    ds: &Dataset,
    use_covariates: bool,
    use_block_fe: bool,
) -> Result<TEEstimate> {
    if ds.arm(true).next().is_none() {
        return Err(Error::EmptyArm(1));
    }
    if ds.arm(false).next().is_none() {
        return Err(Error::EmptyArm(0));
    }
    let mut x = design(ds, use_covariates, use_block_fe)?;
    let (n, k) = x.shape();
    if n <= k {
        return Err(Error::RankDeficient);
    }
    let mut y = DVector::from_iterator(n, ds.units().iter().map(|u| u.y));
    for (i, u) in ds.units().iter().enumerate() {
        let s = u.weight.sqrt();
        x.row_mut(i).scale_mut(s);
        y[i] *= s;
    }

    let qr = x.clone().qr();
    let q = qr.q();
    let r = qr.r();
    let max_pivot = r.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max_pivot == 0.0 || r.diagonal().iter().any(|v| v.abs() <= RANK_TOL * max_pivot) {
        return Err(Error::RankDeficient);
    }
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or(Error::RankDeficient)?;
    let beta = &r_inv * (q.transpose() * &y);
    let resid = &y - &x * &beta;

    // With X = QR, (X'X)^-1 X' diag(w) X (X'X)^-1 = R^-1 (Q' diag(w) Q) R^-T,
    // and the leverages are the squared row norms of Q.
    let mut meat = DMatrix::zeros(k, k);
    for i in 0..n {
        let qi = q.row(i);
        let h = qi.norm_squared();
        if h >= 1.0 - 1e-12 {
            continue;
        }
        let omega = resid[i] * resid[i] / (1.0 - h);
        meat += qi.transpose() * qi * omega;
    }
    let cov = &r_inv * meat * r_inv.transpose();
    Ok(TEEstimate {
        te_hat: beta[1],
        se: Some(cov[(1, 1)].max(0.0).sqrt()),
        method: TeMethod::OlsAdjusted,
    })
}
