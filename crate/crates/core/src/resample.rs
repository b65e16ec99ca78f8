//! Index resamples, keep-probabilities and the Binomial ensemble count.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::config::SamplingMode;
use crate::error::{config_invalid, Result};
use crate::quantile::snapped_floor;
use crate::rng::SeededRng;

/// One resample `S_b`: `m` 0-based indices into a pool of size `n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexSample {
    pub indices: Vec<usize>,
    pub mode: SamplingMode,
}

impl IndexSample {
    pub fn new(indices: Vec<usize>, mode: SamplingMode) -> Self {
        Self { indices, mode }
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.contains(&i)
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

fn check_sizes(n: usize, m: usize, mode: SamplingMode) -> Result<()> {
    if n == 0 {
        return Err(config_invalid("pool size n must be at least 1"));
    }
    if m == 0 {
        return Err(config_invalid("resample size m must be at least 1"));
    }
    if mode == SamplingMode::WithoutReplacement && m > n {
        return Err(config_invalid(format!(
            "cannot draw m = {m} distinct indices from a pool of {n}"
        )));
    }
    Ok(())
}

/// Uniform draw of `m` indices from `0..n`.
///
/// Without replacement uses a partial Fisher-Yates shuffle, so the result is
/// an ordered uniformly random `m`-subset.
pub fn draw_sample(
    n: usize,
    m: usize,
    mode: SamplingMode,
    rng: &mut SeededRng,
) -> Result<IndexSample> {
    check_sizes(n, m, mode)?;
    let indices = match mode {
        SamplingMode::WithReplacement => (0..m).map(|_| rng.below(n)).collect(),
        SamplingMode::WithoutReplacement => {
            let mut pool: Vec<usize> = (0..n).collect();
            for j in 0..m {
                let pick = j + rng.below(n - j);
                pool.swap(j, pick);
            }
            pool.truncate(m);
            pool
        }
    };
    Ok(IndexSample { indices, mode })
}

/// Probability that one resample of the lifted pool `n + 1` misses a fixed
/// point: `(1 - 1/(n+1))^m` or `1 - m/(n+1)`.
pub fn keep_probability(n: usize, m: usize, mode: SamplingMode) -> Result<f64> {
    check_sizes(n, m, mode)?;
    Ok(exclusion_probability(n + 1, m, mode))
}

/// Probability that one resample of a pool of size `pool` misses a fixed
/// point. Used with `pool = n` for out-of-bag counts on the training set.
pub fn exclusion_probability(pool: usize, m: usize, mode: SamplingMode) -> f64 {
    let pool = pool as f64;
    match mode {
        SamplingMode::WithReplacement => (1.0 - 1.0 / pool).powi(m as i32),
        SamplingMode::WithoutReplacement => 1.0 - m as f64 / pool,
    }
}

const BERNOULLI_LIMIT: usize = 10_000;

/// One draw from `Binomial(b_tilde, theta)`.
///
/// Up to `10^4` trials the draw is a literal count of Bernoulli successes;
/// above that it inverts a CDF table built around the mode.
pub fn draw_b(b_tilde: usize, theta: f64, rng: &mut SeededRng) -> Result<usize> {
    if b_tilde == 0 {
        return Err(config_invalid("b_tilde must be at least 1"));
    }
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(config_invalid(format!(
            "theta must lie in (0, 1], got {theta}"
        )));
    }
    if theta == 1.0 {
        return Ok(b_tilde);
    }
    if b_tilde <= BERNOULLI_LIMIT {
        return Ok((0..b_tilde).filter(|_| rng.uniform() < theta).count());
    }
    Ok(binomial_inverse_cdf(b_tilde, theta, rng.uniform()))
}

fn binomial_inverse_cdf(trials: usize, theta: f64, u: f64) -> usize {
    let n = trials as f64;
    let ln_p = theta.ln();
    let ln_q = (1.0 - theta).ln();
    let ln_pmf = |k: f64| {
        ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0) + k * ln_p + (n - k) * ln_q
    };
    let mode = ((n + 1.0) * theta).floor().min(n);
    // Mass outside +-40 sd is far below double precision.
    let sd = (n * theta * (1.0 - theta)).sqrt();
    let lo = (mode - 40.0 * sd - 1.0).max(0.0) as usize;
    let hi = ((mode + 40.0 * sd + 1.0).min(n)) as usize;
    let peak = ln_pmf(mode);
    let weights: Vec<f64> = (lo..=hi).map(|k| (ln_pmf(k as f64) - peak).exp()).collect();
    let total: f64 = weights.iter().sum();
    let target = u * total;
    let mut acc = 0.0;
    for (offset, w) in weights.iter().enumerate() {
        acc += w;
        if target < acc {
            return lo + offset;
        }
    }
    hi
}

/// Which ensemble-size matching rule to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BTildeMatching {
    /// Out-of-bag count matched to a J+ ensemble of `target_b` members:
    /// `[target_b / ((1 - 1/(n+1))^m (1 - 1/n)^m)]`.
    JabVsJensemble,
    /// Total fitted count matched to a fixed-`B` run:
    /// `[target_b / (1 - 1/(n+1))^m]`.
    JabFixedTotal,
}

/// Integer part of the matching formula. Both formulas use the bootstrap
/// keep-probabilities.
pub fn matched_b_tilde(
    target_b: usize,
    n: usize,
    m: usize,
    variant: BTildeMatching,
) -> Result<usize> {
    if target_b == 0 {
        return Err(config_invalid("target B must be at least 1"));
    }
    check_sizes(n, m, SamplingMode::WithReplacement)?;
    let lifted = exclusion_probability(n + 1, m, SamplingMode::WithReplacement);
    let denom = match variant {
        BTildeMatching::JabVsJensemble => {
            if n < 2 {
                return Err(config_invalid("matching against J+ ensemble needs n >= 2"));
            }
            lifted * exclusion_probability(n, m, SamplingMode::WithReplacement)
        }
        BTildeMatching::JabFixedTotal => lifted,
    };
    Ok(snapped_floor(target_b as f64 / denom))
}
