//! Analytic root bounds, the Edmundson-Madansky chains for `E[φ(X)]` with
//! Poisson `X`, and finite-support checks of Chebyshev's other inequality.

use std::f64::consts::E;
use std::fmt::Write as _;

use crate::error::{domain, invalid, Error, Result};
use crate::poisson;
use crate::roots::{fmt_num, solve_root};
use crate::special::varphi;

/// Which exponent correction to use for the new lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LowerVariant {
    /// `ε(k) = 1/(2(k-1))`, as in the bound's statement.
    Theorem,
    /// `ε(k) = 1/(2k-1)`, which reproduces the published table.
    Table,
}

/// Ciesielski-Zabczyk bounds `(e-1)(k-1) ≤ γ_k ≤ 4e((e-1)k + 1)` for `θ = 1`.
pub fn cz_original_bounds(k: usize) -> (f64, f64) {
    let kf = k as f64;
    ((E - 1.0) * (kf - 1.0), 4.0 * E * ((E - 1.0) * kf + 1.0))
}

/// Lower and upper bound on `γ_k`, `k ≥ 2`:
/// `(e^{1/θ + ε(k)} - 1)(k-1) ≤ γ_k ≤ (e^{1/θ + 1/((e-1)θ)} - 1)(k-1)`.
pub fn ks_bounds(k: usize, theta: f64, variant: LowerVariant) -> (f64, f64) {
    let km1 = k as f64 - 1.0;
    let eps = match variant {
        LowerVariant::Theorem => 1.0 / (2.0 * km1),
        LowerVariant::Table => 1.0 / (2.0 * k as f64 - 1.0),
    };
    let lower = (1.0 / theta + eps).exp_m1() * km1;
    let upper = (1.0 / theta + 1.0 / ((E - 1.0) * theta)).exp_m1() * km1;
    (lower, upper)
}

/// One row of the original-vs-new bounds comparison at `θ = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsRow {
    pub k: usize,
    pub lo_orig: f64,
    pub hi_orig: f64,
    pub lo_new: f64,
    pub hi_new: f64,
    /// `lo_new / lo_orig`.
    pub factor_lo: f64,
    /// `hi_orig / hi_new`.
    pub factor_hi: f64,
    /// `(hi_orig - lo_orig) / (hi_new - lo_new)`.
    pub factor_range: f64,
}

pub const TABLE1_HEADER: &str = "k,lo_orig,hi_orig,lo_new,hi_new,factor_lo,factor_hi,factor_range";

/// The `k` values of the published comparison table.
pub const TABLE1_KS: [usize; 11] = [2, 3, 4, 5, 6, 7, 8, 9, 10, 100, 1000];

/// Comparison rows at `θ = 1`, new lower bound from [`LowerVariant::Table`].
pub fn table1(ks: &[usize]) -> Result<Vec<BoundsRow>> {
    ks.iter()
        .map(|&k| {
            if k < 2 {
                return Err(invalid("k", format!("{k} is below 2")));
            }
            let (lo_orig, hi_orig) = cz_original_bounds(k);
            let (lo_new, hi_new) = ks_bounds(k, 1.0, LowerVariant::Table);
            Ok(BoundsRow {
                k,
                lo_orig,
                hi_orig,
                lo_new,
                hi_new,
                factor_lo: lo_new / lo_orig,
                factor_hi: hi_orig / hi_new,
                factor_range: (hi_orig - lo_orig) / (hi_new - lo_new),
            })
        })
        .collect()
}

/// Two-decimal CSV with [`TABLE1_HEADER`].
pub fn table1_csv(rows: &[BoundsRow]) -> String {
    let mut out = String::from(TABLE1_HEADER);
    out.push('\n');
    for r in rows {
        let cells = [
            r.lo_orig,
            r.hi_orig,
            r.lo_new,
            r.hi_new,
            r.factor_lo,
            r.factor_hi,
            r.factor_range,
        ];
        out.push_str(&r.k.to_string());
        for c in cells {
            out.push(',');
            out.push_str(&round2(c));
        }
        out.push('\n');
    }
    out
}

/// Two decimals. Exact binary ties go to the even digit, which is what the
/// standard formatter does.
pub fn round2(v: f64) -> String {
    format!("{v:.2}")
}

/// Bounds at general `θ` with the stated lower-bound exponent, as
/// `k,lower,upper` CSV at full precision.
pub fn theorem_bounds_csv(ks: &[usize], theta: f64) -> Result<String> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(invalid("theta", format!("{theta} must be positive")));
    }
    let mut out = String::from("k,lower,upper\n");
    for &k in ks {
        if k < 2 {
            return Err(invalid("k", format!("{k} is below 2")));
        }
        let (lo, hi) = ks_bounds(k, theta, LowerVariant::Theorem);
        let _ = writeln!(out, "{k},{},{}", fmt_num(lo), fmt_num(hi));
    }
    Ok(out)
}

/// Where a computed root sits relative to both lower-bound variants and the
/// upper bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Containment {
    pub k: usize,
    pub gamma: f64,
    pub lo_theorem: f64,
    pub lo_table: f64,
    pub hi: f64,
}

impl Containment {
    pub fn above_theorem(&self) -> bool {
        self.gamma >= self.lo_theorem
    }

    pub fn above_table(&self) -> bool {
        self.gamma >= self.lo_table
    }

    pub fn below_upper(&self) -> bool {
        self.gamma <= self.hi
    }

    /// Above at least one lower bound and below the upper bound.
    pub fn contained(&self) -> bool {
        (self.above_theorem() || self.above_table()) && self.below_upper()
    }
}

pub fn bracket_containment(theta: f64, ks: &[usize], tol: f64) -> Result<Vec<Containment>> {
    ks.iter()
        .map(|&k| {
            if k < 2 {
                return Err(invalid("k", format!("{k} is below 2")));
            }
            let gamma = solve_root(k, theta, tol)?;
            let (lo_theorem, hi) = ks_bounds(k, theta, LowerVariant::Theorem);
            let (lo_table, _) = ks_bounds(k, theta, LowerVariant::Table);
            Ok(Containment {
                k,
                gamma,
                lo_theorem,
                lo_table,
                hi,
            })
        })
        .collect()
}

/// `E[φ(ξ, k)]` for `ξ ~ Poisson(gamma)`.
pub fn expected_varphi(gamma: f64, k: usize) -> Result<f64> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(domain("expected_varphi", format!("gamma = {gamma} must be nonnegative")));
    }
    if k == 0 {
        return Err(domain("expected_varphi", "k must be at least 1"));
    }
    Ok(poisson::expect(gamma, |n| varphi(n as f64, k)))
}

/// Poisson(γ) with the mass beyond `m + 1` moved to the atom at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedPoisson {
    gamma: f64,
    m: usize,
    masses: Vec<f64>,
}

impl TruncatedPoisson {
    pub fn new(gamma: f64, m: usize) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(invalid("gamma", format!("{gamma} must be positive")));
        }
        if m == 0 {
            return Err(invalid("m", "must be at least 1"));
        }
        let mut masses: Vec<f64> = (0..=m + 1).map(|j| poisson::pmf(j, gamma)).collect();
        masses[0] = 1.0 - masses[1..].iter().sum::<f64>();
        Ok(TruncatedPoisson { gamma, m, masses })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn mass(&self, j: usize) -> f64 {
        self.masses.get(j).copied().unwrap_or(0.0)
    }

    pub fn mean(&self) -> f64 {
        self.masses.iter().enumerate().map(|(j, p)| j as f64 * p).sum()
    }

    /// `P(Y > j)`.
    pub fn sf(&self, j: usize) -> f64 {
        self.masses.iter().skip(j + 1).sum()
    }

    pub fn to_dist(&self) -> DiscreteDist {
        DiscreteDist {
            support: (0..self.masses.len()).map(|j| j as f64).collect(),
            probs: self.masses.clone(),
        }
    }
}

/// Outcome of [`em_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmReport {
    pub gamma: f64,
    pub k: usize,
    /// Truncation index with `γ ∈ (m, m+1]`.
    pub m: usize,
    /// `φ(γ)`.
    pub jensen: f64,
    /// `E[φ(X)]`.
    pub mean: f64,
    /// `(1 - e^{-1}) φ(γ - 1)`.
    pub coupling_lower: f64,
    /// `E[Y] / (γ + 1) · φ(γ)`.
    pub truncated_lower: f64,
    pub jensen_holds: bool,
    pub coupling_holds: bool,
    pub truncated_holds: bool,
}

impl EmReport {
    pub fn all_hold(&self) -> bool {
        self.jensen_holds && self.coupling_holds && self.truncated_holds
    }
}

/// Checks `φ(γ) ≥ E[φ(X)] ≥ (1-e^{-1}) φ(γ-1)` and
/// `E[φ(X)] ≥ E[Y]/(γ+1) φ(γ)` for `X ~ Poisson(γ)`, `γ > 1`.
pub fn em_check(gamma: f64, k: usize) -> Result<EmReport> {
    if !(gamma > 1.0 && gamma.is_finite()) {
        return Err(domain("em_check", format!("gamma = {gamma} must exceed 1")));
    }
    if k == 0 {
        return Err(domain("em_check", "k must be at least 1"));
    }
    let m = gamma.ceil() as usize - 1;
    let mean = expected_varphi(gamma, k)?;
    let jensen = varphi(gamma, k);
    let coupling_lower = (1.0 - (-1.0f64).exp()) * varphi(gamma - 1.0, k);
    let y = TruncatedPoisson::new(gamma, m)?;
    let truncated_lower = y.mean() / (gamma + 1.0) * jensen;
    let slack = 1e-13 * mean;
    Ok(EmReport {
        gamma,
        k,
        m,
        jensen,
        mean,
        coupling_lower,
        truncated_lower,
        jensen_holds: jensen + slack >= mean,
        coupling_holds: mean + slack >= coupling_lower,
        truncated_holds: mean + slack >= truncated_lower,
    })
}

/// Distribution on a finite, strictly increasing support.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDist {
    support: Vec<f64>,
    probs: Vec<f64>,
}

impl DiscreteDist {
    pub fn new(support: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if support.is_empty() || support.len() != probs.len() {
            return Err(invalid("support", "must be nonempty and match probs in length"));
        }
        if support.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("support", "must be strictly increasing"));
        }
        if probs.iter().any(|&p| !(p >= 0.0)) {
            return Err(invalid("probs", "must be nonnegative"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(invalid("probs", format!("sum to {total}, not 1")));
        }
        Ok(DiscreteDist { support, probs })
    }

    pub fn point(x: f64) -> Self {
        DiscreteDist {
            support: vec![x],
            probs: vec![1.0],
        }
    }

    /// Poisson(mean) conditioned on `{0, ..., n_max}`.
    pub fn truncated_poisson(mean: f64, n_max: usize) -> Result<Self> {
        if !(mean >= 0.0 && mean.is_finite()) {
            return Err(invalid("mean", format!("{mean} must be nonnegative")));
        }
        let raw: Vec<f64> = (0..=n_max).map(|n| poisson::pmf(n, mean)).collect();
        let total: f64 = raw.iter().sum();
        if total <= 0.0 {
            return Err(Error::Degenerate(format!("no Poisson({mean}) mass on 0..={n_max}")));
        }
        Ok(DiscreteDist {
            support: (0..=n_max).map(|n| n as f64).collect(),
            probs: raw.into_iter().map(|p| p / total).collect(),
        })
    }

    pub fn binomial(m: usize, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(invalid("p", format!("{p} is not a probability")));
        }
        let mut probs = Vec::with_capacity(m + 1);
        let mut coeff = 1.0;
        for j in 0..=m {
            if j > 0 {
                coeff *= (m - j + 1) as f64 / j as f64;
            }
            probs.push(coeff * p.powi(j as i32) * (1.0 - p).powi((m - j) as i32));
        }
        Ok(DiscreteDist {
            support: (0..=m).map(|j| j as f64).collect(),
            probs,
        })
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.support.iter().zip(&self.probs).map(|(&x, &p)| p * f(x)).sum()
    }

    /// `P(X > t)`.
    pub fn sf(&self, t: f64) -> f64 {
        self.support
            .iter()
            .zip(&self.probs)
            .filter(|(&x, _)| x > t)
            .map(|(_, &p)| p)
            .sum()
    }

    /// Fails with [`Error::OrderViolation`] unless `self ⪯ other` in the
    /// usual stochastic order (up to rounding).
    pub fn check_dominated_by(&self, other: &DiscreteDist) -> Result<()> {
        for &t in self.support.iter().chain(&other.support) {
            let (x_tail, y_tail) = (self.sf(t), other.sf(t));
            if x_tail > y_tail + 1e-14 {
                return Err(Error::OrderViolation { at: t, x_tail, y_tail });
            }
        }
        Ok(())
    }
}

/// The three covariance-type inequalities for nondecreasing `f` and
/// nonincreasing `g`, each evaluated by exact finite summation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChebyshevReport {
    /// `E[fg](X) ≤ E[f](X) E[g](X)`.
    pub same: (f64, f64),
    /// `E[fg](X) ≤ E[f](Y) E[g](X)`.
    pub upper: (f64, f64),
    /// `E[fg](Y) ≥ E[f](X) E[g](Y)`.
    pub lower: (f64, f64),
}

impl ChebyshevReport {
    const SLACK: f64 = 1e-13;

    fn le(a: f64, b: f64) -> bool {
        a <= b + Self::SLACK * (a.abs().max(b.abs()))
    }

    pub fn same_holds(&self) -> bool {
        Self::le(self.same.0, self.same.1)
    }

    pub fn upper_holds(&self) -> bool {
        Self::le(self.upper.0, self.upper.1)
    }

    pub fn lower_holds(&self) -> bool {
        Self::le(self.lower.1, self.lower.0)
    }

    pub fn all_hold(&self) -> bool {
        self.same_holds() && self.upper_holds() && self.lower_holds()
    }
}

/// Evaluates all three inequalities. Requires `x ⪯ y`, `f` nondecreasing
/// and `g` nonincreasing on the joint support.
pub fn chebyshev_other_check(
    x: &DiscreteDist,
    y: &DiscreteDist,
    f: impl Fn(f64) -> f64,
    g: impl Fn(f64) -> f64,
) -> Result<ChebyshevReport> {
    let mut pts: Vec<f64> = x.support.iter().chain(&y.support).copied().collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    for w in pts.windows(2) {
        if f(w[1]) < f(w[0]) {
            return Err(invalid("f", format!("decreases between {} and {}", w[0], w[1])));
        }
        if g(w[1]) > g(w[0]) {
            return Err(invalid("g", format!("increases between {} and {}", w[0], w[1])));
        }
    }
    x.check_dominated_by(y)?;
    let fg = |v: f64| f(v) * g(v);
    let (efx, egx, efgx) = (x.expect(&f), x.expect(&g), x.expect(fg));
    let (efy, egy, efgy) = (y.expect(&f), y.expect(&g), y.expect(fg));
    Ok(ChebyshevReport {
        same: (efgx, efx * egx),
        upper: (efgx, efy * egx),
        lower: (efgy, efx * egy),
    })
}

/// Largest `P(B ≤ j) - P(X ≤ j)` deficit for `B ~ Binomial(m, 1 - e^{-1})`,
/// `X ~ Poisson(γ)`; nonpositive means `B ⪯ X`.
pub fn binomial_poisson_gap(m: usize, gamma: f64) -> Result<f64> {
    let b = DiscreteDist::binomial(m, 1.0 - (-1.0f64).exp())?;
    let mut worst = f64::NEG_INFINITY;
    let (mut cdf_b, mut cdf_x) = (0.0, 0.0);
    for j in 0..=m {
        cdf_b += b.probs[j];
        cdf_x += poisson::pmf(j, gamma);
        worst = worst.max(cdf_x - cdf_b);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::phi_ratio;
    use proptest::prelude::*;

    /// Published table rows, `k, lo_orig, hi_orig, lo_new, hi_new, factors`.
    const PUBLISHED: [[f64; 8]; 11] = [
        [2.0, 1.72, 48.24, 2.79, 3.86, 1.63, 12.48, 43.44],
        [3.0, 3.44, 66.92, 4.64, 7.73, 1.35, 8.66, 20.55],
        [4.0, 5.15, 85.61, 6.41, 11.59, 1.24, 7.38, 15.51],
        [5.0, 6.87, 104.29, 8.15, 15.46, 1.19, 6.75, 13.33],
        [6.0, 8.59, 122.97, 9.88, 19.32, 1.15, 6.36, 12.12],
        [7.0, 10.31, 141.65, 11.61, 23.19, 1.13, 6.11, 11.35],
        [8.0, 12.03, 160.34, 13.34, 27.05, 1.11, 5.93, 10.82],
        [9.0, 13.75, 179.02, 15.06, 30.92, 1.10, 5.79, 10.43],
        [10.0, 15.46, 197.70, 16.79, 34.78, 1.09, 5.68, 10.13],
        [100.0, 170.11, 1879.18, 171.47, 382.59, 1.01, 4.91, 8.10],
        [1000.0, 1716.56, 18693.97, 1717.92, 3860.70, 1.00, 4.84, 7.92],
    ];

    #[test]
    fn cz_examples() {
        let close = |(a, b): (f64, f64), (c, d): (f64, f64)| {
            assert!((a - c).abs() < 0.005 && (b - d).abs() < 0.005, "({a}, {b})");
        };
        close(cz_original_bounds(2), (1.72, 48.24));
        close(cz_original_bounds(10), (15.46, 197.70));
        close(cz_original_bounds(1000), (1716.56, 18693.97));
    }

    #[test]
    fn ks_bounds_examples() {
        let (lo, hi) = ks_bounds(2, 1.0, LowerVariant::Table);
        assert!((lo - 2.79).abs() < 0.005 && (hi - 3.86).abs() < 0.005);
        let (lo, hi) = ks_bounds(3, 1.0, LowerVariant::Table);
        assert!((lo - 4.64).abs() < 0.005 && (hi - 7.73).abs() < 0.005);
        let (lo, _) = ks_bounds(2, 1.0, LowerVariant::Theorem);
        assert!((lo - (1.5f64.exp() - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn table_matches_published_cells() {
        let rows = table1(&TABLE1_KS).unwrap();
        let csv = table1_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(TABLE1_HEADER));
        for (line, want) in lines.zip(PUBLISHED.iter()) {
            let got: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
            for (g, w) in got.iter().zip(want) {
                assert!((g - w).abs() <= 0.01 + 1e-9, "{line} vs {want:?}");
            }
        }
        assert_eq!(table1(&[2]).unwrap().len(), 1);
        assert!(table1(&[1]).is_err());
    }

    #[test]
    fn bounds_row_invariants() {
        for r in table1(&(2..300).collect::<Vec<_>>()).unwrap() {
            assert!(r.lo_orig <= r.lo_new && r.hi_new <= r.hi_orig, "k={}", r.k);
        }
    }

    #[test]
    fn round2_is_half_even_on_exact_ties() {
        assert_eq!(round2(0.125), "0.12");
        assert_eq!(round2(0.375), "0.38");
        assert_eq!(round2(1.0), "1.00");
    }

    #[test]
    fn expected_varphi_examples() {
        assert_eq!(expected_varphi(0.0, 3).unwrap(), 0.0);
        assert!(expected_varphi(1e-9, 3).unwrap() < 1e-9);
        let v = expected_varphi(2.0, 3).unwrap();
        let lo = (1.0 - (-1.0f64).exp()) * varphi(1.0, 3);
        assert!(lo <= v && v <= varphi(2.0, 3), "{v}");
        assert!(expected_varphi(-1.0, 3).is_err());
    }

    #[test]
    fn expected_varphi_matches_direct_sum() {
        for &(gamma, k) in &[(0.7, 1usize), (3.0, 2), (12.5, 7)] {
            let mut term = (-gamma as f64).exp();
            let mut h = 0.0;
            let mut sum = 0.0;
            for n in 0..400usize {
                if n > 0 {
                    term *= gamma / n as f64;
                    h += 1.0 / (k + n - 1) as f64;
                }
                sum += term * h;
            }
            assert!((expected_varphi(gamma, k).unwrap() - sum).abs() < 1e-13);
        }
    }

    #[test]
    fn truncated_y_examples() {
        let y = TruncatedPoisson::new(3.0, 5).unwrap();
        let total: f64 = (0..10).map(|j| y.mass(j)).sum();
        assert!((total - 1.0).abs() < 1e-15);
        assert_eq!(y.mass(7), 0.0);
        let tail: f64 = (7..200).map(|j| poisson::pmf(j, 3.0)).sum();
        assert!((y.mass(0) - ((-3.0f64).exp() + tail)).abs() < 1e-15);

        // Mean by direct summation approaches γ as m grows.
        let mut prev_gap = f64::INFINITY;
        for m in [3usize, 6, 12, 24] {
            let y = TruncatedPoisson::new(3.0, m).unwrap();
            let direct: f64 = (1..=m + 1).map(|j| j as f64 * poisson::pmf(j, 3.0)).sum();
            assert!((y.mean() - direct).abs() < 1e-14);
            let gap = 3.0 - y.mean();
            assert!(gap >= 0.0 && gap < prev_gap);
            prev_gap = gap;
        }
        assert!(prev_gap < 1e-9);

        let y = TruncatedPoisson::new(2.5, 4).unwrap();
        for j in 0..20 {
            let x_tail: f64 = (j + 1..200).map(|n| poisson::pmf(n, 2.5)).sum();
            assert!(y.sf(j) <= x_tail + 1e-15, "j={j}");
        }
        assert!(TruncatedPoisson::new(2.0, 0).is_err());
    }

    #[test]
    fn em_examples() {
        assert!(em_check(2.5, 3).unwrap().all_hold());
        assert!(em_check(1.0001, 2).unwrap().all_hold());
        assert!(em_check(1.0, 2).is_err());
        for k in 2..=10 {
            let g = solve_root(k, 1.0, 1e-10).unwrap();
            assert!(em_check(g, k).unwrap().all_hold(), "k={k}");
        }
    }

    #[test]
    fn em_grid() {
        for &gamma in &[1.1, 1.5, 2.0, 3.0, 5.0, 10.0, 50.0] {
            for &k in &[1usize, 2, 5, 10, 100] {
                let r = em_check(gamma, k).unwrap();
                assert!(r.all_hold(), "{r:?}");
            }
        }
    }

    #[test]
    fn chebyshev_examples() {
        let f = |v: f64| varphi(v, 3);
        let g = |v: f64| phi_ratio(v as usize, 3, 1.0);

        let pt = DiscreteDist::point(4.0);
        let r = chebyshev_other_check(&pt, &pt, f, g).unwrap();
        assert!(r.all_hold());
        assert!((r.same.0 - r.same.1).abs() < 1e-15);
        assert!((r.upper.0 - r.upper.1).abs() < 1e-15);
        assert!((r.lower.0 - r.lower.1).abs() < 1e-15);

        let x = DiscreteDist::truncated_poisson(2.0, 20).unwrap();
        let y = DiscreteDist::truncated_poisson(3.0, 20).unwrap();
        let r = chebyshev_other_check(&x, &y, f, g).unwrap();
        assert!(r.all_hold(), "{r:?}");

        let r = chebyshev_other_check(&x, &y, |_| 2.0, g).unwrap();
        assert!((r.same.0 - r.same.1).abs() < 1e-14);

        let err = chebyshev_other_check(&y, &x, f, g).unwrap_err();
        assert!(matches!(err, Error::OrderViolation { .. }));
        assert!(chebyshev_other_check(&x, &y, g, f).is_err());
    }

    #[test]
    fn third_inequality_needs_separation() {
        // With Y = X the third inequality reverses the first, so it can only
        // hold with equality; a nondegenerate X breaks it.
        let x = DiscreteDist::new(vec![0.0, 1.0], vec![0.4, 0.6]).unwrap();
        let r = chebyshev_other_check(&x, &x, |v| v, |v| -v).unwrap();
        assert!(r.same_holds() && r.upper_holds());
        assert!(!r.lower_holds());
    }

    #[test]
    fn binomial_coupling_holds() {
        for m in 1..=30usize {
            for frac in [1e-9, 0.01, 0.5, 1.0] {
                let gamma = m as f64 + frac;
                assert!(binomial_poisson_gap(m, gamma).unwrap() <= 1e-15, "m={m} γ={gamma}");
                assert!((1.0 - (1.0 - (-1.0f64).exp())).powi(m as i32) >= (-gamma).exp());
            }
        }
    }

    #[test]
    fn containment_at_theta_one() {
        let ks: Vec<usize> = (2..=40).collect();
        for c in bracket_containment(1.0, &ks, 1e-10).unwrap() {
            assert!(c.above_theorem() && c.above_table() && c.below_upper(), "{c:?}");
        }
    }

    #[test]
    fn theorem_csv_shape() {
        let csv = theorem_bounds_csv(&[5], 2.0).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("k,lower,upper"));
        let cells: Vec<f64> = lines.next().unwrap().split(',').map(|s| s.parse().unwrap()).collect();
        let (lo, hi) = ks_bounds(5, 2.0, LowerVariant::Theorem);
        assert_eq!(cells, vec![5.0, lo, hi]);
        assert!(theorem_bounds_csv(&[5], 0.0).is_err());
    }

    proptest! {
        #[test]
        fn covariance_inequality_on_random_dists(
            weights in proptest::collection::vec(0.01f64..1.0, 2..12),
            shift in 0.0f64..3.0,
        ) {
            let total: f64 = weights.iter().sum();
            let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
            let support: Vec<f64> = (0..probs.len()).map(|i| i as f64).collect();
            let x = DiscreteDist::new(support.clone(), probs.clone()).unwrap();
            let y = DiscreteDist::new(support.iter().map(|s| s + shift).collect(), probs).unwrap();
            let r = chebyshev_other_check(&x, &y, |v| varphi(v, 2), |v| (-v).exp()).unwrap();
            prop_assert!(r.same_holds() && r.upper_holds(), "{:?}", r);
        }

        #[test]
        fn truncated_y_is_dominated(gamma in 0.2f64..40.0, m in 1usize..40) {
            let y = TruncatedPoisson::new(gamma, m).unwrap();
            let total: f64 = (0..=m + 1).map(|j| y.mass(j)).sum();
            prop_assert!((total - 1.0).abs() < 1e-14);
            let mut cdf_x = 0.0;
            for j in 0..=m + 1 {
                cdf_x += poisson::pmf(j, gamma);
                prop_assert!(y.sf(j) <= 1.0 - cdf_x + 1e-14);
            }
        }
    }
}
