//! Poisson mass helpers shared by the series, bounds and simulation code.
//!
//! Masses are evaluated with Loader's saddle-point form, which keeps full
//! relative precision at large means where `exp(-x) x^n / n!` would
//! underflow term by term.

use std::f64::consts::PI;

use crate::special::ln_gamma;

const STIRLERR_SMALL: usize = 15;

/// `ln(n!) - [(n + 1/2) ln n - n + ln(2π)/2]`.
fn stirlerr(n: usize) -> f64 {
    let nf = n as f64;
    if n <= STIRLERR_SMALL {
        return ln_gamma(nf + 1.0) - (nf + 0.5) * nf.ln() + nf - 0.5 * (2.0 * PI).ln();
    }
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    let nn = nf * nf;
    (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / nf
}

/// Deviance term `n ln(n/m) + m - n`, computed without cancellation.
fn bd0(n: f64, m: f64) -> f64 {
    if (n - m).abs() < 0.1 * (n + m) {
        let v = (n - m) / (n + m);
        let mut s = (n - m) * v;
        let mut ej = 2.0 * n * v;
        let v2 = v * v;
        let mut j = 1.0;
        loop {
            ej *= v2;
            let s1 = s + ej / (2.0 * j + 1.0);
            if s1 == s {
                return s1;
            }
            s = s1;
            j += 1.0;
        }
    }
    n * (n / m).ln() + m - n
}

/// Natural log of the Poisson(mean) mass at `n`.
pub fn ln_pmf(n: usize, mean: f64) -> f64 {
    if mean == 0.0 {
        return if n == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if n == 0 {
        return -mean;
    }
    let nf = n as f64;
    -stirlerr(n) - bd0(nf, mean) - 0.5 * (2.0 * PI * nf).ln()
}

/// Poisson(mean) mass at `n`.
pub fn pmf(n: usize, mean: f64) -> f64 {
    ln_pmf(n, mean).exp()
}

/// Index range `[lo, hi]` outside of which the Poisson(mean) mass is
/// negligible (below ~1e-15 on each side).
pub fn window(mean: f64) -> (usize, usize) {
    let spread = 12.0 * mean.sqrt() + 40.0;
    let lo = (mean - spread).floor().max(0.0) as usize;
    let hi = (mean + spread).ceil() as usize;
    (lo, hi)
}

/// Smallest `q` with `P(N > q) < tail` for `N ~ Poisson(mean)`.
pub fn upper_quantile(mean: f64, tail: f64) -> usize {
    let (_, hi) = window(mean);
    // Accumulate from the far end so the tail sum is not lost to rounding.
    let mut acc = 0.0;
    let mut q = hi + 50;
    while q > 0 {
        let next = acc + pmf(q, mean);
        if next >= tail {
            return q;
        }
        acc = next;
        q -= 1;
    }
    0
}

/// Expectation of `f(N)` for `N ~ Poisson(mean)`, summed over [`window`].
pub fn expect(mean: f64, mut f: impl FnMut(usize) -> f64) -> f64 {
    if mean == 0.0 {
        return f(0);
    }
    let (lo, hi) = window(mean);
    (lo..=hi).map(|n| pmf(n, mean) * f(n)).sum()
}
