//! Stopping rules built from the root table.
//!
//! In the homogeneous model with intensity `λ` the myopic rule stops on a
//! success with arrival index `k` at time `t` iff `(1 - t)λ ≤ γ_k`, i.e.
//! `t ≥ a_k = (1 - γ_k/λ)₊`. For an inhomogeneous process the same rule
//! reads `Λ(1) - Λ(t) ≤ γ_k`.

use std::fmt::{self, Write as _};

use crate::error::{invalid, Error, Result};
use crate::poisson;
use crate::roots::{fmt_num, RootTable};

/// Observation state: time `t` and number of arrivals `k` so far.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State {
    t: f64,
    k: usize,
}

impl State {
    pub fn new(t: f64, k: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(invalid("t", format!("{t} is outside [0, 1]")));
        }
        Ok(State { t, k })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Decision {
    Stop,
    Continue,
}

/// Arrival intensity on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IntensityModel {
    /// Constant intensity `λ`.
    Homogeneous { lambda: f64 },
    /// `λ(t) = (t + κ)^α`.
    PowerLaw { kappa: f64, alpha: f64 },
}

impl IntensityModel {
    pub fn homogeneous(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(invalid("lambda", format!("{lambda} must be positive")));
        }
        Ok(IntensityModel::Homogeneous { lambda })
    }

    pub fn power_law(kappa: f64, alpha: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(invalid("kappa", format!("{kappa} must be positive")));
        }
        if !alpha.is_finite() {
            return Err(invalid("alpha", "must be finite"));
        }
        Ok(IntensityModel::PowerLaw { kappa, alpha })
    }

    pub fn intensity(&self, t: f64) -> f64 {
        match *self {
            IntensityModel::Homogeneous { lambda } => lambda,
            IntensityModel::PowerLaw { kappa, alpha } => (t + kappa).powf(alpha),
        }
    }

    /// `Λ(s) = ∫₀ˢ λ(u) du`.
    pub fn cumulative(&self, s: f64) -> f64 {
        match *self {
            IntensityModel::Homogeneous { lambda } => lambda * s,
            IntensityModel::PowerLaw { kappa, alpha } => {
                let b = alpha + 1.0;
                if b == 0.0 {
                    (s / kappa).ln_1p()
                } else {
                    ((s + kappa).powf(b) - kappa.powf(b)) / b
                }
            }
        }
    }

    /// `Λ(1)`.
    pub fn total(&self) -> f64 {
        self.cumulative(1.0)
    }

    /// Solves `Λ(s) = u` for `u ∈ [0, Λ(1)]`.
    pub fn inverse_cumulative(&self, u: f64) -> f64 {
        let s = match *self {
            IntensityModel::Homogeneous { lambda } => u / lambda,
            IntensityModel::PowerLaw { kappa, alpha } => {
                let b = alpha + 1.0;
                if b == 0.0 {
                    kappa * u.exp_m1()
                } else {
                    (kappa.powf(b) + b * u).powf(1.0 / b) - kappa
                }
            }
        };
        s.clamp(0.0, 1.0)
    }
}

/// Which rule produced a [`StrategySpec`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StrategyKind {
    Myopic,
    /// Myopic cutoffs shifted by `delta` and clamped to `[0, 1]`.
    Perturbed { delta: f64 },
    /// Stop on the first success.
    Immediate,
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategyKind::Myopic => f.write_str("myopic"),
            StrategyKind::Perturbed { delta } => write!(f, "perturbed({delta})"),
            StrategyKind::Immediate => f.write_str("immediate"),
        }
    }
}

/// Cutoff times `a_1, a_2, ...` with a constant value for every later `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategySpec {
    cutoffs: Vec<f64>,
    tail: f64,
    kind: StrategyKind,
}

impl StrategySpec {
    pub fn new(cutoffs: Vec<f64>, tail: f64, kind: StrategyKind) -> Result<Self> {
        if cutoffs.iter().chain([&tail]).any(|a| !(0.0..=1.0).contains(a)) {
            return Err(invalid("cutoffs", "every cutoff must lie in [0, 1]"));
        }
        Ok(StrategySpec { cutoffs, tail, kind })
    }

    pub fn immediate() -> Self {
        StrategySpec {
            cutoffs: Vec::new(),
            tail: 0.0,
            kind: StrategyKind::Immediate,
        }
    }

    /// Cutoff for arrival index `k ≥ 1`.
    pub fn cutoff(&self, k: usize) -> f64 {
        k.checked_sub(1)
            .and_then(|i| self.cutoffs.get(i))
            .copied()
            .unwrap_or(self.tail)
    }

    pub fn cutoffs(&self) -> &[f64] {
        &self.cutoffs
    }

    pub fn tail(&self) -> f64 {
        self.tail
    }

    pub fn kind(&self) -> StrategyKind {
        self.kind
    }

    /// Stop on a success at `(t, k)` iff `t ≥ a_k`.
    pub fn decide(&self, state: State) -> Decision {
        if state.t >= self.cutoff(state.k) {
            Decision::Stop
        } else {
            Decision::Continue
        }
    }

    /// Shifts every cutoff, including the tail, by `delta`.
    pub fn perturbed(&self, delta: f64) -> Self {
        let shift = |a: f64| (a + delta).clamp(0.0, 1.0);
        StrategySpec {
            cutoffs: self.cutoffs.iter().map(|&a| shift(a)).collect(),
            tail: shift(self.tail),
            kind: StrategyKind::Perturbed { delta },
        }
    }

    /// `# kind=... tail=...` metadata, a `k,cutoff` header and one row per
    /// stored cutoff.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let kind = match self.kind {
            StrategyKind::Myopic => "kind=myopic".to_string(),
            StrategyKind::Perturbed { delta } => format!("kind=perturbed delta={}", fmt_num(delta)),
            StrategyKind::Immediate => "kind=immediate".to_string(),
        };
        let _ = writeln!(out, "# {kind} tail={}", fmt_num(self.tail));
        out.push_str("k,cutoff\n");
        for (i, a) in self.cutoffs.iter().enumerate() {
            let _ = writeln!(out, "{},{}", i + 1, fmt_num(*a));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let parse_err = |line: usize, detail: String| Error::Parse { line, detail };
        let (mut kind, mut delta, mut tail) = (None, None, None);
        let mut cutoffs = Vec::new();
        let mut saw_header = false;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                for pair in meta.split_whitespace() {
                    let (key, value) = pair
                        .split_once('=')
                        .ok_or_else(|| parse_err(line_no, format!("expected key=value, got `{pair}`")))?;
                    let num = || value.parse::<f64>().map_err(|e| parse_err(line_no, format!("{key}: {e}")));
                    match key {
                        "kind" => kind = Some(value.to_string()),
                        "delta" => delta = Some(num()?),
                        "tail" => tail = Some(num()?),
                        _ => {}
                    }
                }
                continue;
            }
            if !saw_header {
                if line != "k,cutoff" {
                    return Err(parse_err(line_no, format!("unexpected header `{line}`")));
                }
                saw_header = true;
                continue;
            }
            let (k, a) = line
                .split_once(',')
                .ok_or_else(|| parse_err(line_no, "expected two fields".into()))?;
            let k: usize = k.trim().parse().map_err(|e| parse_err(line_no, format!("k: {e}")))?;
            if k != cutoffs.len() + 1 {
                return Err(parse_err(line_no, format!("expected k = {}, found {k}", cutoffs.len() + 1)));
            }
            cutoffs.push(a.trim().parse().map_err(|e| parse_err(line_no, format!("cutoff: {e}")))?);
        }
        let kind = match kind.as_deref() {
            Some("myopic") => StrategyKind::Myopic,
            Some("immediate") => StrategyKind::Immediate,
            Some("perturbed") => StrategyKind::Perturbed {
                delta: delta.ok_or_else(|| parse_err(1, "perturbed strategy without delta".into()))?,
            },
            other => return Err(parse_err(1, format!("unknown strategy kind {other:?}"))),
        };
        StrategySpec::new(cutoffs, tail.unwrap_or(0.0), kind)
    }
}

fn table_too_short(table: &RootTable, needed: String) -> Error {
    Error::TableTooShort {
        k_max: table.k_max(),
        last_gamma: table.roots().last().unwrap_or(f64::NAN),
        needed,
    }
}

/// Checks the table reaches `γ_k ≥ total` and returns the index of the first
/// such root.
fn covering_index(table: &RootTable, total: f64) -> Result<usize> {
    table
        .roots()
        .position(|g| g >= total)
        .map(|i| i + 1)
        .ok_or_else(|| table_too_short(table, format!("a root at least {total}")))
}

/// Myopic cutoffs `a_k = (1 - γ_k/λ)₊` for homogeneous intensity `λ`.
pub fn cutoffs(lambda: f64, table: &RootTable) -> Result<StrategySpec> {
    inhom_cutoffs(&IntensityModel::homogeneous(lambda)?, table)
}

/// Cutoff times `Λ⁻¹((Λ(1) - γ_k)₊)` for a general intensity.
pub fn inhom_cutoffs(model: &IntensityModel, table: &RootTable) -> Result<StrategySpec> {
    let total = model.total();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::Degenerate(format!("Λ(1) = {total}")));
    }
    let last = covering_index(table, total)?;
    let cutoffs = table
        .roots()
        .take(last)
        .map(|g| match *model {
            IntensityModel::Homogeneous { lambda } => (1.0 - g / lambda).max(0.0),
            _ if g >= total => 0.0,
            _ => model.inverse_cumulative(total - g),
        })
        .collect();
    StrategySpec::new(cutoffs, 0.0, StrategyKind::Myopic)
}

/// Stop iff `(1 - t)λ ≤ γ_k`.
pub fn decide(state: State, lambda: f64, table: &RootTable) -> Result<Decision> {
    inhom_decide(state, &IntensityModel::homogeneous(lambda)?, table)
}

/// Stop iff `Λ(1) - Λ(t) ≤ γ_k`.
pub fn inhom_decide(state: State, model: &IntensityModel, table: &RootTable) -> Result<Decision> {
    if state.k == 0 {
        return Err(invalid("k", "a decision needs at least one arrival"));
    }
    let remaining = match *model {
        IntensityModel::Homogeneous { lambda } => (1.0 - state.t) * lambda,
        _ => model.total() - model.cumulative(state.t),
    };
    let gamma = match table.gamma(state.k) {
        Some(g) => g,
        // Roots increase, so a table that already passed Λ(1) covers every
        // larger k.
        None if table.roots().last().is_some_and(|g| g >= model.total()) => f64::INFINITY,
        None => return Err(table_too_short(table, format!("gamma_{}", state.k))),
    };
    Ok(if remaining <= gamma {
        Decision::Stop
    } else {
        Decision::Continue
    })
}

/// Success process of the continuous model: intensity `κ(t + κ)^{α-1}`,
/// the thinning of `λ(t) = (t + κ)^α` by `p(t) = κ/(κ + t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuccessProcess {
    kappa: f64,
    alpha: f64,
}

impl SuccessProcess {
    pub fn new(kappa: f64, alpha: f64) -> Result<Self> {
        IntensityModel::power_law(kappa, alpha)?;
        Ok(SuccessProcess { kappa, alpha })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn arrivals(&self) -> IntensityModel {
        IntensityModel::PowerLaw {
            kappa: self.kappa,
            alpha: self.alpha,
        }
    }

    pub fn intensity(&self, t: f64) -> f64 {
        self.kappa * (t + self.kappa).powf(self.alpha - 1.0)
    }

    /// `m(t) = ∫₀ᵗ s(u) du`.
    pub fn mean(&self, t: f64) -> f64 {
        let (k, a) = (self.kappa, self.alpha);
        if a == 0.0 {
            k * (t / k).ln_1p()
        } else {
            k / a * ((t + k).powf(a) - k.powf(a))
        }
    }

    /// `M(t₀, t₁) = m(t₁) - m(t₀)`.
    pub fn expected_between(&self, t0: f64, t1: f64) -> f64 {
        self.mean(t1) - self.mean(t0)
    }

    /// Solves `m(t) = u` for `u ∈ [0, m(1)]`.
    pub fn inverse_mean(&self, u: f64) -> f64 {
        let (k, a) = (self.kappa, self.alpha);
        let t = if a == 0.0 {
            k * (u / k).exp_m1()
        } else {
            (k.powf(a) + a * u / k).powf(1.0 / a) - k
        };
        t.clamp(0.0, 1.0)
    }

    /// `P(P₁ - P_t = ℓ)`.
    pub fn count_prob(&self, t: f64, ell: usize) -> f64 {
        poisson::pmf(ell, self.expected_between(t, 1.0))
    }
}

/// Threshold after which the first success is accepted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    pub time: f64,
    /// The closed form fell below 0 (or had no real value), meaning fewer
    /// than `ℓ` successes are expected over the whole horizon.
    pub clamped: bool,
}

/// `t★ = sup{0, sup{t : M(t, 1) ≥ ℓ}}` in closed form.
pub fn cont_threshold(ell: usize, kappa: f64, alpha: f64) -> Result<Threshold> {
    if ell == 0 {
        return Err(invalid("ell", "must be at least 1"));
    }
    IntensityModel::power_law(kappa, alpha)?;
    let l = ell as f64;
    let raw = if alpha == 0.0 {
        (kappa + 1.0) * (-l / kappa).exp() - kappa
    } else {
        let base = (1.0 + kappa).powf(alpha) - alpha * l / kappa;
        if base <= 0.0 {
            log::debug!("threshold base {base} is nonpositive for ell={ell}, kappa={kappa}, alpha={alpha}");
            return Ok(Threshold {
                time: 0.0,
                clamped: true,
            });
        }
        base.powf(1.0 / alpha) - kappa
    };
    Ok(Threshold {
        time: raw.clamp(0.0, 1.0),
        clamped: raw < 0.0,
    })
}

/// Win probability of "stop on the first success after `t★`" when the goal
/// is the `ℓ`-th last success: `P(Poisson(M(t★, 1)) = ℓ)`.
pub fn threshold_win_prob(ell: usize, kappa: f64, alpha: f64) -> Result<f64> {
    let t = cont_threshold(ell, kappa, alpha)?;
    Ok(SuccessProcess::new(kappa, alpha)?.count_prob(t.time, ell))
}

/// `e^{-ℓ} ℓ^ℓ / ℓ!`.
pub fn win_prob_formula(ell: usize) -> f64 {
    poisson::pmf(ell, ell as f64)
}

/// `P(P₁ - P_t = ℓ)` for the `α = 0` success process.
pub fn success_count_prob(t: f64, ell: usize, kappa: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(invalid("t", format!("{t} is outside [0, 1]")));
    }
    Ok(SuccessProcess::new(kappa, 0.0)?.count_prob(t, ell))
}

/// Scaling limit `p(t) = κ/(κ + t)` of the profile with `θ = κn`.
pub fn continuous_profile(t: f64, kappa: f64) -> f64 {
    kappa / (kappa + t)
}
