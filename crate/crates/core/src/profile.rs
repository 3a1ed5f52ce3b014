//! The Karamata-Stirling success profile `p_k = θ/(θ + k - 1)`, the
//! zero/one-success probabilities of a block of trials, and the stopping
//! rewards `S₀`, `S₁`.
//!
//! Rewards come in two forms. The closed forms hold for a Poisson prior and
//! are expressed through Kummer's function. [`generic_reward`] works for any
//! truncated prior by mixing over the posterior of the remaining trial count,
//! and serves as the brute-force check on the closed forms.

use crate::error::{domain, invalid, Error, Result};
use crate::special::{kummer_scaled_pair, ln_gamma, SeriesControl};

/// One problem instance: mutation parameter `θ` and Poisson intensity `λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    theta: f64,
    lambda: f64,
}

impl ModelParams {
    pub fn new(theta: f64, lambda: f64) -> Result<Self> {
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(invalid("theta", format!("{theta} must be positive")));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(invalid("lambda", format!("{lambda} must be positive")));
        }
        Ok(ModelParams { theta, lambda })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// A prior on the number of trials, truncated to `π_0 ..= π_M`.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorWeights {
    weights: Vec<f64>,
    mass_tol: f64,
}

impl PriorWeights {
    /// Validates nonnegativity and that the total mass lies in
    /// `[1 - mass_tol, 1]` (up to rounding).
    pub fn new(weights: Vec<f64>, mass_tol: f64) -> Result<Self> {
        if !(mass_tol > 0.0) {
            return Err(invalid("mass_tol", format!("{mass_tol} must be positive")));
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
            return Err(invalid("weights", format!("weight {w} is not a nonnegative number")));
        }
        let total: f64 = weights.iter().sum();
        let slack = 1e-14 * weights.len().max(1) as f64;
        if total < 1.0 - mass_tol - slack || total > 1.0 + slack {
            return Err(invalid(
                "weights",
                format!("total mass {total} outside [1 - {mass_tol}, 1]"),
            ));
        }
        Ok(PriorWeights { weights, mass_tol })
    }

    /// Poisson(λ) truncated at `M = ⌈λ + 12√λ + 30⌉`, which discards a tail
    /// below `1e-12`.
    pub fn poisson(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(invalid("lambda", format!("{lambda} must be positive")));
        }
        let m = (lambda + 12.0 * lambda.sqrt() + 30.0).ceil() as usize;
        let weights = (0..=m).map(|n| crate::poisson::pmf(n, lambda)).collect();
        PriorWeights::new(weights, 1e-12)
    }

    /// A prior with all mass on `N = n`.
    pub fn point(n: usize) -> Self {
        let mut weights = vec![0.0; n + 1];
        weights[n] = 1.0;
        PriorWeights {
            weights,
            mass_tol: 1e-12,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mass_tol(&self) -> f64 {
        self.mass_tol
    }
}

/// Success probability of trial `k ≥ 1`: `θ/(θ + k - 1)`.
pub fn ks_profile(k: usize, theta: f64) -> f64 {
    debug_assert!(k >= 1);
    theta / (theta + (k - 1) as f64)
}

/// Probability of no success among trials `k..=n`. An empty range (`n < k`)
/// gives 1.
pub fn s0(k: usize, n: usize, theta: f64) -> f64 {
    (k..=n).fold(1.0, |acc, j| acc * (1.0 - ks_profile(j, theta)))
}

/// Probability of exactly one success among trials `k..=n`, as
/// `s0(k, n) Σ p_j/(1 - p_j)`. Undefined when some `p_j = 1` on the range,
/// which under this profile means `k = 1`.
pub fn s1(k: usize, n: usize, theta: f64) -> Result<f64> {
    let mut odds = 0.0;
    for j in k..=n {
        let p = ks_profile(j, theta);
        if p >= 1.0 {
            return Err(domain("s1", format!("p_{j} = 1 lies in the range {k}..={n}")));
        }
        odds += p / (1.0 - p);
    }
    Ok(s0(k, n, theta) * odds)
}

/// `(P[0 successes], P[1 success])` among trials `k..=n` by forward
/// recursion; valid when `p_k = 1`.
#[cfg(test)]
fn zero_one_probs(k: usize, n: usize, theta: f64) -> (f64, f64) {
    (k..=n).fold((1.0, 0.0), |(q0, q1), j| {
        let p = ks_profile(j, theta);
        (q0 * (1.0 - p), q1 * (1.0 - p) + q0 * p)
    })
}

fn check_x_k_theta(function: &'static str, x: f64, k: usize, theta: f64) -> Result<()> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(domain(function, format!("x = {x} must be finite and >= 0")));
    }
    if k == 0 {
        return Err(domain(function, "k must be at least 1"));
    }
    if !(theta > 0.0) {
        return Err(domain(function, format!("theta = {theta} must be positive")));
    }
    Ok(())
}

/// `S₀(1 - x/λ, k) = e^{-x} M(k, θ + k, x)` under a Poisson prior, where
/// `x` is the expected number of remaining arrivals.
pub fn reward_s0_closed(x: f64, k: usize, theta: f64) -> Result<f64> {
    check_x_k_theta("reward_s0_closed", x, k, theta)?;
    let (m, _) = kummer_scaled_pair(k as f64, k as f64 + theta, x, SeriesControl::default())?;
    Ok(m)
}

/// `S₁(1 - x/λ, k) = θ e^{-x} ∂_a M(k, θ + k, x)` under a Poisson prior.
pub fn reward_s1_closed(x: f64, k: usize, theta: f64) -> Result<f64> {
    check_x_k_theta("reward_s1_closed", x, k, theta)?;
    let (_, da) = kummer_scaled_pair(k as f64, k as f64 + theta, x, SeriesControl::default())?;
    Ok(theta * da)
}

/// Which reward [`generic_reward`] computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RewardKind {
    /// No further success after the current state.
    Zero,
    /// Exactly one further success.
    One,
}

/// Posterior weights `P(N = k + j | N_t = k)` for `j = 0..=M-k`.
pub fn posterior_weights(prior: &PriorWeights, t: f64, k: usize) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&t) {
        return Err(domain("posterior_weights", format!("t = {t} not in [0, 1]")));
    }
    let w = prior.weights();
    if k >= w.len() {
        return Err(Error::Degenerate(format!(
            "prior truncated at {} has no mass at or above k = {k}",
            w.len() - 1
        )));
    }
    let ln_rest = (1.0 - t).ln();
    let kf = k as f64;
    let ln_terms: Vec<f64> = (0..w.len() - k)
        .map(|j| {
            let pi = w[k + j];
            if pi == 0.0 {
                return f64::NEG_INFINITY;
            }
            let jf = j as f64;
            let ln_binom = ln_gamma(kf + jf + 1.0) - ln_gamma(kf + 1.0) - ln_gamma(jf + 1.0);
            let ln_time = if j == 0 { 0.0 } else { jf * ln_rest };
            ln_binom + pi.ln() + ln_time
        })
        .collect();
    let peak = ln_terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if peak == f64::NEG_INFINITY {
        return Err(Error::Degenerate(format!(
            "normalizer f_{k}({t}) has a zero denominator"
        )));
    }
    let raw: Vec<f64> = ln_terms.iter().map(|l| (l - peak).exp()).collect();
    let total: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|r| r / total).collect())
}

/// `S₀(t, k)` or `S₁(t, k)` for an arbitrary truncated prior, by mixing the
/// block probabilities of trials `k+1 ..= k+j` over the posterior of `j`.
pub fn generic_reward(
    prior: &PriorWeights,
    t: f64,
    k: usize,
    theta: f64,
    which: RewardKind,
) -> Result<f64> {
    if !(theta > 0.0) {
        return Err(domain("generic_reward", format!("theta = {theta} must be positive")));
    }
    let post = posterior_weights(prior, t, k)?;
    let (mut q0, mut q1) = (1.0_f64, 0.0_f64);
    let mut acc = 0.0;
    for (j, w) in post.iter().enumerate() {
        if j > 0 {
            let p = ks_profile(k + j, theta);
            let zero = q0 * (1.0 - p);
            q1 = q1 * (1.0 - p) + q0 * p;
            q0 = zero;
        }
        acc += w * match which {
            RewardKind::Zero => q0,
            RewardKind::One => q1,
        };
    }
    Ok(acc)
}
