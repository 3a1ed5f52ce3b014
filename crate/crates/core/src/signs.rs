//! Finite-difference sign checks for Gamma and Kummer quotients.
//!
//! Each check estimates a parameter derivative by central differences at
//! steps `h` and `h/2`, extrapolates, and declares the sign zero when the
//! estimate is within `max(1e-9, 10 · error)` of zero.

use std::fmt;

use rayon::prelude::*;

use crate::error::{domain, invalid, Result};
use crate::special::{kummer_scaled_pair, ln_gamma, SeriesControl};

/// Smallest magnitude ever certified as nonzero.
const ZERO_FLOOR: f64 = 1e-9;

/// Which identity a grid point exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Identity {
    /// `sgn D_x Γ(x)/Γ(x+c) = -sgn c`.
    GammaQuotient,
    /// `sgn D_a M(a,c₁,x)/M(a,c₂,x) = sgn(c₁ - c₂)`.
    KummerA,
    /// `sgn D_c M(a₁,c,x)/M(a₂,c,x) = sgn(a₂ - a₁)`.
    KummerC,
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Identity::GammaQuotient => "gamma-quotient",
            Identity::KummerA => "kummer-a",
            Identity::KummerC => "kummer-c",
        })
    }
}

/// A derivative estimate with its sign verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct SignCheck {
    pub identity: Identity,
    /// Named inputs, in the identity's argument order.
    pub inputs: Vec<(&'static str, f64)>,
    pub estimate: f64,
    pub fd_error: f64,
    pub observed: i8,
    pub predicted: i8,
}

impl SignCheck {
    pub fn passes(&self) -> bool {
        self.observed == self.predicted
    }
}

impl fmt::Display for SignCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.identity)?;
        for (name, v) in &self.inputs {
            write!(f, " {name}={v}")?;
        }
        write!(
            f,
            " fd={:.6e} err={:.1e} predicted={:+} observed={:+} {}",
            self.estimate,
            self.fd_error,
            self.predicted,
            self.observed,
            if self.passes() { "PASS" } else { "FAIL" }
        )
    }
}

fn sign_of(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Richardson-extrapolated central difference and its error estimate.
fn derivative(f: impl Fn(f64) -> Result<f64>, at: f64, step: f64) -> Result<(f64, f64)> {
    let central = |h: f64| -> Result<f64> { Ok((f(at + h)? - f(at - h)?) / (2.0 * h)) };
    let coarse = central(step)?;
    let fine = central(0.5 * step)?;
    let extrapolated = fine + (fine - coarse) / 3.0;
    Ok((extrapolated, (fine - coarse).abs()))
}

fn verdict(estimate: f64, fd_error: f64) -> i8 {
    if estimate.abs() < ZERO_FLOOR.max(10.0 * fd_error) {
        0
    } else {
        sign_of(estimate)
    }
}

fn check_step(step: f64) -> Result<()> {
    if !(1e-7..=1e-3).contains(&step) {
        return Err(invalid("fd_step", format!("{step} outside [1e-7, 1e-3]")));
    }
    Ok(())
}

/// Sign of `D_x Γ(x)/Γ(x+c)`; predicted `-sgn c`.
pub fn gamma_quotient_sign(x: f64, c: f64, fd_step: f64) -> Result<SignCheck> {
    check_step(fd_step)?;
    if !(x > fd_step && x + c > fd_step) {
        return Err(domain("gamma_quotient_sign", format!("need x > 0 and x + c > 0, got x={x}, c={c}")));
    }
    let q = |s: f64| Ok((ln_gamma(s) - ln_gamma(s + c)).exp());
    let (estimate, fd_error) = derivative(q, x, fd_step)?;
    Ok(SignCheck {
        identity: Identity::GammaQuotient,
        inputs: vec![("x", x), ("c", c)],
        estimate,
        fd_error,
        observed: verdict(estimate, fd_error),
        predicted: -sign_of(c),
    })
}

/// `M(a, c₁, x) / M(a, c₂, x)`, with the common `e^{-x}` cancelled.
fn kummer_quotient(a1: f64, c1: f64, a2: f64, c2: f64, x: f64) -> Result<f64> {
    let ctl = SeriesControl::default();
    let (m1, _) = kummer_scaled_pair(a1, c1, x, ctl)?;
    let (m2, _) = kummer_scaled_pair(a2, c2, x, ctl)?;
    Ok(m1 / m2)
}

/// Sign of `D_a M(a,c₁,x)/M(a,c₂,x)`; predicted `sgn(c₁ - c₂)`.
pub fn kummer_quotient_sign_a(a: f64, c1: f64, c2: f64, x: f64, fd_step: f64) -> Result<SignCheck> {
    check_step(fd_step)?;
    if !(a > fd_step && c1 > a && c2 > a && x > 0.0) {
        return Err(domain(
            "kummer_quotient_sign_a",
            format!("need c1 > a > 0, c2 > a > 0, x > 0; got a={a}, c1={c1}, c2={c2}, x={x}"),
        ));
    }
    let q = |s: f64| kummer_quotient(s, c1, s, c2, x);
    let (estimate, fd_error) = derivative(q, a, fd_step)?;
    Ok(SignCheck {
        identity: Identity::KummerA,
        inputs: vec![("a", a), ("c1", c1), ("c2", c2), ("x", x)],
        estimate,
        fd_error,
        observed: verdict(estimate, fd_error),
        predicted: sign_of(c1 - c2),
    })
}

/// Sign of `D_c M(a₁,c,x)/M(a₂,c,x)`; predicted `sgn(a₂ - a₁)`.
pub fn kummer_quotient_sign_c(a1: f64, a2: f64, c: f64, x: f64, fd_step: f64) -> Result<SignCheck> {
    check_step(fd_step)?;
    if !(a1 > 0.0 && a2 > 0.0 && c > a1 && c > a2 && c > fd_step && x > 0.0) {
        return Err(domain(
            "kummer_quotient_sign_c",
            format!("need c > a1 > 0, c > a2 > 0, x > 0; got a1={a1}, a2={a2}, c={c}, x={x}"),
        ));
    }
    let q = |s: f64| kummer_quotient(a1, s, a2, s, x);
    let (estimate, fd_error) = derivative(q, c, fd_step)?;
    Ok(SignCheck {
        identity: Identity::KummerC,
        inputs: vec![("a1", a1), ("a2", a2), ("c", c), ("x", x)],
        estimate,
        fd_error,
        observed: verdict(estimate, fd_error),
        predicted: sign_of(a2 - a1),
    })
}

/// Grid for the three sign identities.
#[derive(Debug, Clone, PartialEq)]
pub struct SignGrid {
    /// First parameters `a` (or `a₁`, `a₂`) for the Kummer identities.
    pub a_values: Vec<f64>,
    /// Offsets added to `a` to form second parameters `c`.
    pub c_offsets: Vec<f64>,
    /// Arguments `x` for the Kummer identities.
    pub x_values: Vec<f64>,
    /// Points `x` for the Gamma quotient.
    pub gamma_x: Vec<f64>,
    /// Shifts `c` for the Gamma quotient; pairs with `x + c ≤ 0` are skipped.
    pub gamma_c: Vec<f64>,
    pub fd_step: f64,
}

impl Default for SignGrid {
    fn default() -> Self {
        SignGrid {
            a_values: vec![0.5, 1.0, 2.0, 4.0],
            c_offsets: vec![0.25, 1.0, 3.0],
            x_values: vec![0.1, 0.5, 1.0, 5.0, 10.0, 40.0],
            gamma_x: (1..=20).map(|i| 0.5 * i as f64).collect(),
            gamma_c: vec![-0.45, -0.25, -0.1, 0.0, 0.1, 0.5, 1.0, 1.5, 3.0, 7.0],
            fd_step: 1e-4,
        }
    }
}

impl SignGrid {
    pub fn with_step(mut self, fd_step: f64) -> Result<Self> {
        check_step(fd_step)?;
        self.fd_step = fd_step;
        Ok(self)
    }

    pub fn gamma_checks(&self) -> Result<Vec<SignCheck>> {
        let pts: Vec<(f64, f64)> = self
            .gamma_x
            .iter()
            .flat_map(|&x| self.gamma_c.iter().map(move |&c| (x, c)))
            .filter(|&(x, c)| x + c > self.fd_step)
            .collect();
        pts.into_par_iter()
            .map(|(x, c)| gamma_quotient_sign(x, c, self.fd_step))
            .collect()
    }

    pub fn kummer_a_checks(&self) -> Result<Vec<SignCheck>> {
        let mut pts = Vec::new();
        for &a in &self.a_values {
            for &o1 in &self.c_offsets {
                for &o2 in &self.c_offsets {
                    for &x in &self.x_values {
                        pts.push((a, a + o1, a + o2, x));
                    }
                }
            }
        }
        pts.into_par_iter()
            .map(|(a, c1, c2, x)| kummer_quotient_sign_a(a, c1, c2, x, self.fd_step))
            .collect()
    }

    pub fn kummer_c_checks(&self) -> Result<Vec<SignCheck>> {
        let mut pts = Vec::new();
        for &a1 in &self.a_values {
            for &a2 in &self.a_values {
                for &o in &self.c_offsets {
                    for &x in &self.x_values {
                        pts.push((a1, a2, a1.max(a2) + o, x));
                    }
                }
            }
        }
        pts.into_par_iter()
            .map(|(a1, a2, c, x)| kummer_quotient_sign_c(a1, a2, c, x, self.fd_step))
            .collect()
    }

    /// All three identities, in order.
    pub fn all_checks(&self) -> Result<Vec<SignCheck>> {
        let mut out = self.gamma_checks()?;
        out.extend(self.kummer_a_checks()?);
        out.extend(self.kummer_c_checks()?);
        Ok(out)
    }
}

/// `D_a log M(k, θ+k, x)` against `D_a log M(k, θ+k+1, x)` at one `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotonePoint {
    pub k: usize,
    pub theta: f64,
    pub x: f64,
    pub lhs: f64,
    pub rhs: f64,
}

impl MonotonePoint {
    /// The strict inequality `lhs < rhs`.
    pub fn holds(&self) -> bool {
        self.lhs < self.rhs
    }
}

impl fmt::Display for MonotonePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "dlogM k={} theta={} x={} lhs={:.12e} rhs={:.12e} {}",
            self.k,
            self.theta,
            self.x,
            self.lhs,
            self.rhs,
            if self.holds() { "PASS" } else { "FAIL" }
        )
    }
}

/// Evaluates `D_a log M(k, θ+k, x) < D_a log M(k, θ+k+1, x)` on `x_grid`.
pub fn monotone_root_consequence(k: usize, theta: f64, x_grid: &[f64]) -> Result<Vec<MonotonePoint>> {
    if k == 0 || !(theta > 0.0) {
        return Err(domain("monotone_root_consequence", format!("need k ≥ 1, θ > 0; got k={k}, θ={theta}")));
    }
    let ctl = SeriesControl::default();
    let a = k as f64;
    x_grid
        .iter()
        .map(|&x| {
            if !(x > 0.0) {
                return Err(domain("monotone_root_consequence", format!("x = {x} must be positive")));
            }
            let (m0, d0) = kummer_scaled_pair(a, a + theta, x, ctl)?;
            let (m1, d1) = kummer_scaled_pair(a, a + theta + 1.0, x, ctl)?;
            Ok(MonotonePoint {
                k,
                theta,
                x,
                lhs: d0 / m0,
                rhs: d1 / m1,
            })
        })
        .collect()
}
