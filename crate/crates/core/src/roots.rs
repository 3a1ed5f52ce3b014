//! Critical roots `γ_k` of `θ ∂_a M(k, θ+k, x) = M(k, θ+k, x)`.
//!
//! The roots do not depend on `λ`; the cutoff for arrival index `k` is
//! `a_k = (1 - γ_k/λ)₊`. Everything here works with the `e^{-x}`-scaled
//! function
//!
//! ```text
//! h_k(x) = E[ϕ(ξ_x) (θ φ(ξ_x) - 1)],   ξ_x ~ Poisson(x),
//! ```
//!
//! which equals `S₁ - S₀` at `x = (1 - t)λ`. `h_k(0) = -1` and `h_k` has a
//! single sign change on `(0, ∞)`.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::bounds::{ks_bounds, LowerVariant};
use crate::error::{domain, invalid, Error, Result};
use crate::special::{kummer_scaled_pair, SeriesControl};

/// `h_k(x) = θ e^{-x} ∂_a M(k, θ+k, x) - e^{-x} M(k, θ+k, x)`.
pub fn h(k: usize, theta: f64, x: f64) -> Result<f64> {
    h_with(k, theta, x, SeriesControl::default())
}

pub fn h_with(k: usize, theta: f64, x: f64, ctl: SeriesControl) -> Result<f64> {
    if k == 0 {
        return Err(domain("h", "k must be at least 1"));
    }
    if !(theta > 0.0) {
        return Err(domain("h", format!("theta = {theta} must be positive")));
    }
    let (m, da) = kummer_scaled_pair(k as f64, k as f64 + theta, x, ctl)?;
    Ok(theta * da - m)
}

/// One solved root with its final bracket.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootRecord {
    pub k: usize,
    pub gamma: f64,
    /// `h_k(γ_k)` in the scaled units above.
    pub residual: f64,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
}

/// Largest number of doublings/halvings tried when the initial bracket
/// does not enclose the sign change.
const EXPANSION_BUDGET: usize = 60;

/// Initial bracket for `γ_k`: the bound interval for `k ≥ 2` (the lower end
/// taken as the smaller of the two lower-bound variants), and
/// `(1e-8, upper bound at k = 2)` for `k = 1`.
pub fn initial_bracket(k: usize, theta: f64) -> (f64, f64) {
    if k == 1 {
        let (_, hi) = ks_bounds(2, theta, LowerVariant::Theorem);
        return (1e-8, hi);
    }
    let (lo_thm, hi) = ks_bounds(k, theta, LowerVariant::Theorem);
    let (lo_tab, _) = ks_bounds(k, theta, LowerVariant::Table);
    (lo_thm.min(lo_tab), hi)
}

/// Solves `h_k(γ) = 0` to an absolute bracket width `tol`.
pub fn solve_root(k: usize, theta: f64, tol: f64) -> Result<f64> {
    solve_root_record(k, theta, tol).map(|r| r.gamma)
}

/// Like [`solve_root`], returning the residual and final bracket too.
pub fn solve_root_record(k: usize, theta: f64, tol: f64) -> Result<RootRecord> {
    solve_root_record_with(k, theta, tol, SeriesControl::default())
}

pub fn solve_root_record_with(k: usize, theta: f64, tol: f64, ctl: SeriesControl) -> Result<RootRecord> {
    if k == 0 {
        return Err(domain("solve_root", "k must be at least 1"));
    }
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(invalid("theta", format!("{theta} must be positive")));
    }
    if !(tol > 0.0) {
        return Err(invalid("tol", format!("{tol} must be positive")));
    }
    let f = |x: f64| h_with(k, theta, x, ctl);
    let (mut lo, mut hi) = initial_bracket(k, theta);
    let mut f_lo = f(lo)?;
    let mut f_hi = f(hi)?;

    let mut budget = EXPANSION_BUDGET;
    while f_lo > 0.0 && budget > 0 {
        hi = lo;
        f_hi = f_lo;
        lo *= 0.5;
        f_lo = f(lo)?;
        budget -= 1;
    }
    while f_hi < 0.0 && budget > 0 {
        lo = hi;
        f_lo = f_hi;
        hi *= 2.0;
        f_hi = f(hi)?;
        budget -= 1;
    }
    if f_lo > 0.0 || f_hi < 0.0 {
        return Err(Error::BracketFailure { k, theta, lo, hi });
    }
    let record = |gamma: f64, residual: f64, lo: f64, hi: f64| RootRecord {
        k,
        gamma,
        residual,
        bracket_lo: lo,
        bracket_hi: hi,
    };
    if f_lo == 0.0 {
        return Ok(record(lo, 0.0, lo, lo));
    }
    if f_hi == 0.0 {
        return Ok(record(hi, 0.0, hi, hi));
    }

    let width_floor = 4.0 * f64::EPSILON * hi;
    let tol = tol.max(width_floor);
    let mut bisect_next = false;
    while hi - lo > tol {
        let width = hi - lo;
        let mid = lo + 0.5 * width;
        let x = if bisect_next {
            mid
        } else {
            // Secant through the bracket ends, kept off the endpoints.
            let s = hi - f_hi * width / (f_hi - f_lo);
            let guard = width / 32.0;
            if s.is_finite() {
                s.clamp(lo + guard, hi - guard)
            } else {
                mid
            }
        };
        let fx = f(x)?;
        if fx == 0.0 {
            return Ok(record(x, 0.0, x, x));
        }
        if fx < 0.0 {
            lo = x;
            f_lo = fx;
        } else {
            hi = x;
            f_hi = fx;
        }
        bisect_next = hi - lo > 0.5 * width;
        if x == mid {
            bisect_next = false;
        }
    }
    let gamma = lo + 0.5 * (hi - lo);
    Ok(record(gamma, f(gamma)?, lo, hi))
}

/// Roots `γ_1 ..= γ_K` for one `θ`, strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct RootTable {
    theta: f64,
    tol: f64,
    records: Vec<RootRecord>,
}

impl RootTable {
    /// Wraps precomputed records, enforcing `k = 1, 2, ...` and strict
    /// monotonicity.
    pub fn from_records(theta: f64, tol: f64, records: Vec<RootRecord>) -> Result<Self> {
        for (i, r) in records.iter().enumerate() {
            if r.k != i + 1 {
                return Err(invalid("records", format!("entry {i} has k = {}, expected {}", r.k, i + 1)));
            }
        }
        for w in records.windows(2) {
            if !(w[1].gamma > w[0].gamma) {
                return Err(Error::MonotonicityViolation {
                    k: w[0].k,
                    prev: w[0].gamma,
                    next: w[1].gamma,
                });
            }
        }
        Ok(RootTable { theta, tol, records })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn k_max(&self) -> usize {
        self.records.len()
    }

    pub fn records(&self) -> &[RootRecord] {
        &self.records
    }

    /// `γ_k`, if the table reaches `k`.
    pub fn gamma(&self, k: usize) -> Option<f64> {
        k.checked_sub(1).and_then(|i| self.records.get(i)).map(|r| r.gamma)
    }

    pub fn roots(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.gamma)
    }

    /// Serializes as a `# theta=... tol=...` line, a header, and one CSV row
    /// per `k`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# theta={} tol={}", fmt_num(self.theta), fmt_num(self.tol));
        out.push_str("k,gamma,residual,bracket_lo,bracket_hi\n");
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.k,
                fmt_num(r.gamma),
                fmt_num(r.residual),
                fmt_num(r.bracket_lo),
                fmt_num(r.bracket_hi)
            );
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut theta = None;
        let mut tol = None;
        let mut records = Vec::new();
        let mut saw_header = false;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                for pair in meta.split_whitespace() {
                    let (key, value) = pair.split_once('=').ok_or_else(|| Error::Parse {
                        line: line_no,
                        detail: format!("expected key=value, got `{pair}`"),
                    })?;
                    let v = parse_f64(value, line_no)?;
                    match key {
                        "theta" => theta = Some(v),
                        "tol" => tol = Some(v),
                        _ => {}
                    }
                }
                continue;
            }
            if !saw_header {
                if line != "k,gamma,residual,bracket_lo,bracket_hi" {
                    return Err(Error::Parse {
                        line: line_no,
                        detail: format!("unexpected header `{line}`"),
                    });
                }
                saw_header = true;
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 5 {
                return Err(Error::Parse {
                    line: line_no,
                    detail: format!("expected 5 fields, found {}", fields.len()),
                });
            }
            let k = fields[0].parse::<usize>().map_err(|e| Error::Parse {
                line: line_no,
                detail: format!("bad k `{}`: {e}", fields[0]),
            })?;
            records.push(RootRecord {
                k,
                gamma: parse_f64(fields[1], line_no)?,
                residual: parse_f64(fields[2], line_no)?,
                bracket_lo: parse_f64(fields[3], line_no)?,
                bracket_hi: parse_f64(fields[4], line_no)?,
            });
        }
        let theta = theta.ok_or_else(|| Error::Parse {
            line: 1,
            detail: "missing `# theta=` metadata".into(),
        })?;
        let tol = tol.unwrap_or(f64::NAN);
        RootTable::from_records(theta, tol, records)
    }
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|e| Error::Parse {
        line,
        detail: format!("bad number `{s}`: {e}"),
    })
}

/// Shortest round-trip representation, switching to exponent form for very
/// small or very large magnitudes.
pub(crate) fn fmt_num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Solves `γ_1 ..= γ_{k_max}` in parallel and checks they increase.
pub fn root_table(k_max: usize, theta: f64, tol: f64) -> Result<RootTable> {
    root_table_with(k_max, theta, tol, SeriesControl::default())
}

pub fn root_table_with(k_max: usize, theta: f64, tol: f64, ctl: SeriesControl) -> Result<RootTable> {
    if k_max == 0 {
        return Err(invalid("k_max", "must be at least 1"));
    }
    let records = (1..=k_max)
        .into_par_iter()
        .map(|k| solve_root_record_with(k, theta, tol, ctl))
        .collect::<Result<Vec<_>>>()?;
    RootTable::from_records(theta, tol, records)
}

/// Extends the table until some `γ_k ≥ lambda`, so every nonzero cutoff for
/// intensity `lambda` is covered.
pub fn root_table_covering(theta: f64, tol: f64, lambda: f64) -> Result<RootTable> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(invalid("lambda", format!("{lambda} must be positive")));
    }
    // γ_k ≥ (e^{1/θ} - 1)(k - 1), so this many entries is always enough;
    // start smaller and grow.
    let mut k_max = 8usize;
    loop {
        let table = root_table(k_max, theta, tol)?;
        if table.roots().last().is_some_and(|g| g >= lambda) {
            let cut = table.records.iter().position(|r| r.gamma >= lambda).unwrap() + 1;
            let records = table.records[..cut].to_vec();
            return RootTable::from_records(theta, tol, records);
        }
        k_max *= 2;
    }
}

/// `lim γ_k / k = e^{1/θ} - 1`.
pub fn asymptotic_ratio(theta: f64) -> f64 {
    (1.0 / theta).exp_m1()
}
