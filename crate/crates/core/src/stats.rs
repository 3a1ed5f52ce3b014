//! Pearson χ² tests on count histograms.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{invalid, Error, Result};

/// Minimum expected count per merged cell.
const MIN_EXPECTED: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chi2Result {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Histogram of nonnegative integer samples, `hist[n] = #{samples == n}`.
pub fn histogram(samples: &[u64]) -> Vec<u64> {
    let len = samples.iter().max().map_or(0, |&m| m as usize + 1);
    let mut hist = vec![0u64; len];
    for &s in samples {
        hist[s as usize] += 1;
    }
    hist
}

fn survival(statistic: f64, dof: usize) -> Result<f64> {
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::Degenerate(format!("chi-squared: {e}")))?;
    Ok(dist.sf(statistic))
}

/// Goodness of fit of `observed` (a histogram) to the law `probs` on
/// `0, 1, ...`. Mass of `probs` beyond its length joins the last cell, and
/// adjacent cells are merged until each expects at least 5 counts.
pub fn chi2_gof(observed: &[u64], probs: &[f64]) -> Result<Chi2Result> {
    let n: u64 = observed.iter().sum();
    if n == 0 {
        return Err(invalid("observed", "no samples"));
    }
    let len = observed.len().max(probs.len());
    let obs_at = |i: usize| observed.get(i).copied().unwrap_or(0) as f64;
    let listed: f64 = probs.iter().sum();
    let p_at = |i: usize| {
        let p = probs.get(i).copied().unwrap_or(0.0);
        if i + 1 == len {
            p + (1.0 - listed).max(0.0)
        } else {
            p
        }
    };
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for i in 0..len {
        o += obs_at(i);
        e += n as f64 * p_at(i);
        if e >= MIN_EXPECTED {
            cells.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    match cells.last_mut() {
        Some(last) => {
            last.0 += o;
            last.1 += e;
        }
        None => return Err(Error::Degenerate("too few expected counts for any cell".into())),
    }
    if cells.len() < 2 {
        return Err(Error::Degenerate("χ² test needs at least two cells".into()));
    }
    let statistic = cells.iter().map(|&(o, e)| (o - e) * (o - e) / e).sum();
    let dof = cells.len() - 1;
    Ok(Chi2Result {
        statistic,
        dof,
        p_value: survival(statistic, dof)?,
    })
}

/// Test that two histograms come from the same law (2 × K contingency).
pub fn chi2_homogeneity(a: &[u64], b: &[u64]) -> Result<Chi2Result> {
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    if na == 0.0 || nb == 0.0 {
        return Err(invalid("samples", "both histograms need samples"));
    }
    let len = a.len().max(b.len());
    let at = |h: &[u64], i: usize| h.get(i).copied().unwrap_or(0) as f64;
    let total = na + nb;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut ca, mut cb) = (0.0, 0.0);
    for i in 0..len {
        ca += at(a, i);
        cb += at(b, i);
        let col = ca + cb;
        if col * na.min(nb) / total >= MIN_EXPECTED {
            cells.push((ca, cb));
            ca = 0.0;
            cb = 0.0;
        }
    }
    match cells.last_mut() {
        Some(last) => {
            last.0 += ca;
            last.1 += cb;
        }
        None => return Err(Error::Degenerate("too few counts for any cell".into())),
    }
    if cells.len() < 2 {
        return Err(Error::Degenerate("χ² test needs at least two cells".into()));
    }
    let mut statistic = 0.0;
    for &(xa, xb) in &cells {
        let col = xa + xb;
        let (ea, eb) = (col * na / total, col * nb / total);
        statistic += (xa - ea).powi(2) / ea + (xb - eb).powi(2) / eb;
    }
    let dof = cells.len() - 1;
    Ok(Chi2Result {
        statistic,
        dof,
        p_value: survival(statistic, dof)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_counts() {
        assert_eq!(histogram(&[0, 2, 2, 3]), vec![1, 0, 2, 1]);
        assert!(histogram(&[]).is_empty());
    }

    #[test]
    fn perfect_fit_has_zero_statistic() {
        let probs = [0.25, 0.5, 0.25];
        let r = chi2_gof(&[250, 500, 250], &probs).unwrap();
        assert!(r.statistic.abs() < 1e-12);
        assert_eq!(r.dof, 2);
        assert!((r.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn known_statistic() {
        // (60-50)²/50 + (40-50)²/50 = 4 on one degree of freedom.
        let r = chi2_gof(&[60, 40], &[0.5, 0.5]).unwrap();
        assert!((r.statistic - 4.0).abs() < 1e-12);
        assert!((r.p_value - 0.045_500_263_896_358_4).abs() < 1e-9);
    }

    #[test]
    fn sparse_cells_are_merged() {
        let r = chi2_gof(&[50, 45, 3, 1, 1], &[0.5, 0.45, 0.03, 0.01, 0.01]).unwrap();
        assert_eq!(r.dof, 2);
    }

    #[test]
    fn homogeneity_detects_shift() {
        let same = chi2_homogeneity(&[100, 200, 100], &[100, 200, 100]).unwrap();
        assert!(same.statistic.abs() < 1e-12);
        let shifted = chi2_homogeneity(&[300, 100, 0], &[0, 100, 300]).unwrap();
        assert!(shifted.p_value < 1e-10);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(chi2_gof(&[], &[1.0]).is_err());
        assert!(chi2_gof(&[3], &[1.0]).is_err());
        assert!(chi2_homogeneity(&[1], &[]).is_err());
    }
}
