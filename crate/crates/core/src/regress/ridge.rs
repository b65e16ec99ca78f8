use super::{CanonicalRows, Predictor};
use crate::error::{Error, Result};

const POWER_TOL: f64 = 1e-10;
const POWER_MAX_ITER: usize = 10_000;
const CHOLESKY_JITTER: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct RidgeModel {
    pub coef: Vec<f64>,
    pub intercept: f64,
    pub lambda: f64,
}

impl RidgeModel {
    pub(crate) fn fit(rows: &CanonicalRows, lambda_factor: f64) -> Result<Self> {
        let m = rows.len();
        let p = rows.p;
        let row_refs: Vec<&[f64]> = (0..m).map(|i| rows.row(i)).collect();
        let lambda = ridge_penalty(&row_refs, lambda_factor)?;

        let y_mean = rows.responses.iter().sum::<f64>() / m as f64;
        let mut x_mean = vec![0.0; p];
        for r in &row_refs {
            for (acc, v) in x_mean.iter_mut().zip(r.iter()) {
                *acc += v;
            }
        }
        x_mean.iter_mut().for_each(|v| *v /= m as f64);

        let mut gram = vec![0.0; p * p];
        let mut rhs = vec![0.0; p];
        let mut centered = vec![0.0; p];
        for (r, &y) in row_refs.iter().zip(&rows.responses) {
            for j in 0..p {
                centered[j] = r[j] - x_mean[j];
            }
            let yc = y - y_mean;
            for a in 0..p {
                rhs[a] += centered[a] * yc;
                for b in 0..=a {
                    gram[a * p + b] += centered[a] * centered[b];
                }
            }
        }
        for a in 0..p {
            gram[a * p + a] += lambda;
            for b in 0..a {
                gram[b * p + a] = gram[a * p + b];
            }
        }

        let coef = match cholesky_solve(&gram, &rhs, p) {
            Some(c) => c,
            None => {
                let mut jittered = gram.clone();
                for a in 0..p {
                    jittered[a * p + a] += CHOLESKY_JITTER;
                }
                cholesky_solve(&jittered, &rhs, p).ok_or_else(|| {
                    Error::NumericalFailure(
                        "ridge normal equations are not positive definite".into(),
                    )
                })?
            }
        };
        let intercept = y_mean - coef.iter().zip(&x_mean).map(|(c, x)| c * x).sum::<f64>();
        if !intercept.is_finite() || coef.iter().any(|c| !c.is_finite()) {
            return Err(Error::NumericalFailure(
                "ridge solution is not finite".into(),
            ));
        }
        Ok(Self {
            coef,
            intercept,
            lambda,
        })
    }
}

impl Predictor for RidgeModel {
    fn predict(&self, x: &[f64]) -> f64 {
        self.intercept + self.coef.iter().zip(x).map(|(c, v)| c * v).sum::<f64>()
    }
}

/// `lambda_factor * ||X||^2`, where `||X||` is the largest singular value.
pub fn ridge_penalty(rows: &[&[f64]], lambda_factor: f64) -> Result<f64> {
    Ok(lambda_factor * spectral_norm_squared(rows)?)
}

/// Largest eigenvalue of `X^T X` by power iteration.
///
/// Starts from the column of `X^T X` with the largest norm and stops once
/// the Rayleigh quotient changes by less than `1e-10` relative.
pub fn spectral_norm_squared(rows: &[&[f64]]) -> Result<f64> {
    if rows.is_empty() {
        return Err(Error::EmptyInput("feature matrix"));
    }
    let p = rows[0].len();
    if p == 0 {
        return Ok(0.0);
    }
    let mut gram = vec![0.0; p * p];
    for r in rows {
        for a in 0..p {
            for b in 0..p {
                gram[a * p + b] += r[a] * r[b];
            }
        }
    }
    let column_norm = |j: usize| (0..p).map(|a| gram[a * p + j].powi(2)).sum::<f64>();
    let start = (0..p)
        .max_by(|&a, &b| column_norm(a).total_cmp(&column_norm(b)))
        .unwrap_or(0);
    if column_norm(start) == 0.0 {
        return Ok(0.0);
    }
    let mut v: Vec<f64> = (0..p).map(|a| gram[a * p + start]).collect();
    normalize(&mut v);
    let mut estimate = 0.0;
    for _ in 0..POWER_MAX_ITER {
        let w: Vec<f64> = (0..p)
            .map(|a| (0..p).map(|b| gram[a * p + b] * v[b]).sum())
            .collect();
        let rayleigh: f64 = w.iter().zip(&v).map(|(x, y)| x * y).sum();
        let converged = (rayleigh - estimate).abs() <= POWER_TOL * rayleigh.abs();
        estimate = rayleigh;
        v = w;
        normalize(&mut v);
        if converged {
            return Ok(estimate);
        }
    }
    Err(Error::NumericalFailure(format!(
        "power iteration did not converge in {POWER_MAX_ITER} steps"
    )))
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

fn cholesky_solve(a: &[f64], b: &[f64], p: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; p * p];
    for i in 0..p {
        for j in 0..=i {
            let mut sum = a[i * p + j];
            for k in 0..j {
                sum -= l[i * p + k] * l[j * p + k];
            }
            if i == j {
                if !(sum > 0.0) {
                    return None;
                }
                l[i * p + i] = sum.sqrt();
            } else {
                l[i * p + j] = sum / l[j * p + j];
            }
        }
    }
    let mut z = vec![0.0; p];
    for i in 0..p {
        let s: f64 = (0..i).map(|k| l[i * p + k] * z[k]).sum();
        z[i] = (b[i] - s) / l[i * p + i];
    }
    let mut x = vec![0.0; p];
    for i in (0..p).rev() {
        let s: f64 = (i + 1..p).map(|k| l[k * p + i] * x[k]).sum();
        x[i] = (z[i] - s) / l[i * p + i];
    }
    Some(x)
}
