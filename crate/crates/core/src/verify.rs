//! Grid verification suites behind `ks-stopping verify`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::bounds::{binomial_poisson_gap, chebyshev_other_check, em_check, DiscreteDist};
use crate::error::{invalid, Error, Result};
use crate::profile::{generic_reward, reward_s0_closed, reward_s1_closed, PriorWeights, RewardKind};
use crate::roots::root_table;
use crate::signs::{monotone_root_consequence, SignGrid};
use crate::special::{digamma, kummer_m_integral, kummer_m_series, phi_ratio, varphi, SeriesControl};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    Signs,
    Em,
    Identities,
    Monotone,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Signs, Suite::Em, Suite::Identities, Suite::Monotone];
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Signs => "signs",
            Suite::Em => "em",
            Suite::Identities => "identities",
            Suite::Monotone => "monotone",
        })
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.to_string() == s)
            .ok_or_else(|| invalid("suite", format!("unknown suite `{s}`")))
    }
}

/// One verified fact: a human-readable description and its verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub label: String,
    pub pass: bool,
}

impl CheckLine {
    fn new(pass: bool, label: impl Into<String>) -> Self {
        CheckLine {
            label: label.into(),
            pass,
        }
    }
}

impl fmt::Display for CheckLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", if self.pass { "PASS" } else { "FAIL" }, self.label)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub lines: Vec<CheckLine>,
}

impl SuiteReport {
    pub fn failures(&self) -> usize {
        self.lines.iter().filter(|l| !l.pass).count()
    }

    pub fn passed(&self) -> bool {
        self.failures() == 0
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for line in &self.lines {
            writeln!(f, "{line}")?;
        }
        write!(
            f,
            "suite={} checks={} failures={}",
            self.suite,
            self.lines.len(),
            self.failures()
        )
    }
}

pub fn run_suite(suite: Suite) -> Result<SuiteReport> {
    let lines = match suite {
        Suite::Signs => signs_lines()?,
        Suite::Em => em_lines()?,
        Suite::Identities => identity_lines()?,
        Suite::Monotone => monotone_lines()?,
    };
    Ok(SuiteReport { suite, lines })
}

fn signs_lines() -> Result<Vec<CheckLine>> {
    Ok(SignGrid::default()
        .all_checks()?
        .into_iter()
        .map(|c| CheckLine::new(c.passes(), c.to_string()))
        .collect())
}

pub const EM_GAMMAS: [f64; 7] = [1.1, 1.5, 2.0, 3.0, 5.0, 10.0, 50.0];
pub const EM_KS: [usize; 5] = [1, 2, 5, 10, 100];

fn em_lines() -> Result<Vec<CheckLine>> {
    let mut lines = Vec::new();
    for &gamma in &EM_GAMMAS {
        for &k in &EM_KS {
            let r = em_check(gamma, k)?;
            lines.push(CheckLine::new(
                r.jensen_holds && r.coupling_holds,
                format!(
                    "em-chain gamma={gamma} k={k} phi(gamma)={:.10} E[phi]={:.10} (1-1/e)phi(gamma-1)={:.10}",
                    r.jensen, r.mean, r.coupling_lower
                ),
            ));
            lines.push(CheckLine::new(
                r.truncated_holds,
                format!(
                    "em-truncated gamma={gamma} k={k} m={} E[phi]={:.10} E[Y]phi(gamma)/(gamma+1)={:.10}",
                    r.m, r.mean, r.truncated_lower
                ),
            ));
        }
    }
    for (mx, my, k, theta) in chebyshev_pairs() {
        let n_max = 20;
        let x = DiscreteDist::truncated_poisson(mx, n_max)?;
        let y = DiscreteDist::truncated_poisson(my, n_max)?;
        let r = chebyshev_other_check(&x, &y, |v| varphi(v, k), |v| phi_ratio(v as usize, k, theta))?;
        let tag = format!("X=Poisson({mx})|0..{n_max} Y=Poisson({my})|0..{n_max} k={k} theta={theta}");
        lines.push(CheckLine::new(
            r.same_holds(),
            format!("chebyshev-i {tag} E[fg]={:.12} E[f]E[g]={:.12}", r.same.0, r.same.1),
        ));
        lines.push(CheckLine::new(
            r.upper_holds(),
            format!("chebyshev-ii {tag} E[fg](X)={:.12} E[f](Y)E[g](X)={:.12}", r.upper.0, r.upper.1),
        ));
        lines.push(CheckLine::new(
            r.lower_holds(),
            format!("chebyshev-iii {tag} E[fg](Y)={:.12} E[f](X)E[g](Y)={:.12}", r.lower.0, r.lower.1),
        ));
    }
    for m in 1..=30usize {
        let gamma = m as f64 + 1e-9;
        let gap = binomial_poisson_gap(m, gamma)?;
        lines.push(CheckLine::new(
            gap <= 1e-15,
            format!("coupling Binomial({m},1-1/e) <= Poisson({gamma}) max cdf gap={gap:.3e}"),
        ));
    }
    Ok(lines)
}

/// Truncated-Poisson pairs `(mean_x, mean_y, k, θ)` with `f = φ(·, k)` and
/// `g = ϕ(·, k, θ)`.
pub fn chebyshev_pairs() -> Vec<(f64, f64, usize, f64)> {
    vec![(2.0, 3.0, 3, 1.0)]
}

fn identity_lines() -> Result<Vec<CheckLine>> {
    let ctl = SeriesControl::default();
    let mut lines = Vec::new();

    let mut kummer_pts = Vec::new();
    for &a in &[0.5, 1.0, 2.5] {
        for &off in &[0.5, 1.5, 4.0] {
            for &x in &[0.5, 3.0, 10.0, 25.0] {
                kummer_pts.push((a, a + off, x));
            }
        }
    }
    for &(a, c, x) in &kummer_pts {
        let lhs = kummer_m_series(a, c, x, ctl)?;
        let rhs = x.exp() * kummer_m_integral(c - a, c, -x)?;
        let rel = ((lhs - rhs) / lhs).abs();
        lines.push(CheckLine::new(
            rel <= 1e-9,
            format!("kummer-transform a={a} c={c} x={x} M={lhs:.15e} e^x M(c-a,c,-x)={rhs:.15e} rel={rel:.2e}"),
        ));
    }
    for &(a, c, x) in &kummer_pts {
        let series = kummer_m_series(a, c, x, ctl)?;
        let integral = kummer_m_integral(a, c, x)?;
        let rel = ((series - integral) / series).abs();
        lines.push(CheckLine::new(
            rel <= 1e-9,
            format!("series-vs-integral a={a} c={c} x={x} rel={rel:.2e}"),
        ));
    }
    for &x in &[0.01, 0.3, 1.0, 2.5, 7.0, 30.0, 1e3] {
        let gap = (digamma(x + 1.0)? - digamma(x)? - 1.0 / x).abs();
        lines.push(CheckLine::new(
            gap <= 1e-12 * (1.0 / x).max(1.0),
            format!("digamma-recurrence x={x} gap={gap:.2e}"),
        ));
    }
    lines.extend(closed_vs_mixture()?);
    Ok(lines)
}

/// Largest gap between the closed-form rewards and the generic mixture with
/// a truncated Poisson prior, one line per `(λ, θ, reward)`.
pub fn closed_vs_mixture() -> Result<Vec<CheckLine>> {
    let mut cases = Vec::new();
    for &lambda in &[0.5, 2.0, 10.0] {
        for &theta in &[0.5, 1.0, 2.0] {
            for which in [RewardKind::Zero, RewardKind::One] {
                cases.push((lambda, theta, which));
            }
        }
    }
    cases
        .into_par_iter()
        .map(|(lambda, theta, which)| {
            let prior = PriorWeights::poisson(lambda)?;
            let mut worst: f64 = 0.0;
            for k in 1..=10 {
                for i in 1..=9 {
                    let t = i as f64 / 10.0;
                    let x = (1.0 - t) * lambda;
                    let closed = match which {
                        RewardKind::Zero => reward_s0_closed(x, k, theta)?,
                        RewardKind::One => reward_s1_closed(x, k, theta)?,
                    };
                    let mixed = generic_reward(&prior, t, k, theta, which)?;
                    worst = worst.max((closed - mixed).abs());
                }
            }
            let name = match which {
                RewardKind::Zero => "S0",
                RewardKind::One => "S1",
            };
            Ok(CheckLine::new(
                worst <= 1e-8,
                format!("closed-vs-mixture {name} lambda={lambda} theta={theta} k=1..10 t=0.1..0.9 max_abs={worst:.2e}"),
            ))
        })
        .collect()
}

pub const MONOTONE_THETAS: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 5.0];

fn monotone_lines() -> Result<Vec<CheckLine>> {
    let mut lines = Vec::new();
    for &theta in &MONOTONE_THETAS {
        let line = match root_table(200, theta, 1e-10) {
            Ok(t) => CheckLine::new(
                true,
                format!(
                    "roots-increasing theta={theta} k=1..200 gamma_1={:.10} gamma_200={:.6}",
                    t.gamma(1).unwrap(),
                    t.gamma(200).unwrap()
                ),
            ),
            Err(e @ Error::MonotonicityViolation { .. }) => {
                CheckLine::new(false, format!("roots-increasing theta={theta} {e}"))
            }
            Err(e) => return Err(e),
        };
        lines.push(line);
    }
    let grids: [(usize, f64, &[f64]); 4] = [
        (1, 1.0, &[0.5, 1.0, 2.0, 5.0]),
        (10, 0.5, &[1.0, 10.0, 100.0]),
        (3, 2.0, &[0.5, 5.0, 20.0]),
        (50, 1.0, &[10.0, 86.0, 200.0]),
    ];
    for (k, theta, xs) in grids {
        for p in monotone_root_consequence(k, theta, xs)? {
            lines.push(CheckLine::new(p.holds(), p.to_string()));
        }
    }
    Ok(lines)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.to_string().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn identities_pass() {
        let r = run_suite(Suite::Identities).unwrap();
        for l in &r.lines {
            assert!(l.pass, "{l}");
        }
    }

    #[test]
    fn em_suite_passes() {
        let r = run_suite(Suite::Em).unwrap();
        assert!(r.passed(), "{r}");
        assert_eq!(r.lines.len(), 2 * 35 + 3 + 30);
    }

    #[test]
    fn signs_suite_fails_only_on_kummer_a() {
        let r = run_suite(Suite::Signs).unwrap();
        for l in r.lines.iter().filter(|l| !l.pass) {
            assert!(l.label.starts_with("kummer-a"), "{l}");
        }
        assert!(r.failures() > 0);
    }

    #[test]
    fn report_summary_line() {
        let r = SuiteReport {
            suite: Suite::Em,
            lines: vec![CheckLine::new(true, "a"), CheckLine::new(false, "b")],
        };
        assert_eq!(r.to_string(), "PASS a\nFAIL b\nsuite=em checks=2 failures=1");
    }
}
