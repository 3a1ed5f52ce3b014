//! Seeded Monte Carlo for the marked Poisson model.
//!
//! Replicate `i` draws from a ChaCha8 generator seeded with the run seed and
//! switched to stream `i`, so results do not depend on thread count or
//! scheduling and paired comparisons see identical randomness.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::policy::{cont_threshold, inhom_cutoffs, IntensityModel, StrategySpec, SuccessProcess};
use crate::poisson;
use crate::profile::{ks_profile, ModelParams};
use crate::roots::RootTable;

/// Arrival counts above the `1 - 1e-12` quantile are redrawn.
const CAP_TAIL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    n_trials: u64,
    seed: u64,
    ell: usize,
}

impl SimConfig {
    pub fn new(n_trials: u64, seed: u64, ell: usize) -> Result<Self> {
        if n_trials == 0 {
            return Err(invalid("n_trials", "must be at least 1"));
        }
        if ell == 0 {
            return Err(invalid("ell", "must be at least 1"));
        }
        Ok(SimConfig { n_trials, seed, ell })
    }

    pub fn n_trials(&self) -> u64 {
        self.n_trials
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    fn rng(&self, replicate: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(replicate);
        rng
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WinStats {
    pub trials: u64,
    pub wins: u64,
    pub p_hat: f64,
    pub std_err: f64,
}

impl WinStats {
    pub fn from_counts(wins: u64, trials: u64) -> Self {
        let p_hat = if trials == 0 { 0.0 } else { wins as f64 / trials as f64 };
        let std_err = if trials == 0 {
            0.0
        } else {
            (p_hat * (1.0 - p_hat) / trials as f64).sqrt()
        };
        WinStats {
            trials,
            wins,
            p_hat,
            std_err,
        }
    }
}

/// Draws a capped Poisson count, returning it with the number of redraws.
fn capped_count(dist: &Poisson<f64>, cap: u64, rng: &mut ChaCha8Rng) -> (usize, u64) {
    let mut redraws = 0;
    loop {
        let n = dist.sample(rng) as u64;
        if n <= cap {
            return (n as usize, redraws);
        }
        redraws += 1;
    }
}

/// Poisson sampler for `mean` and its redraw cap.
fn count_law(mean: f64) -> Result<(Poisson<f64>, u64)> {
    if !(mean > 0.0 && mean.is_finite()) {
        return Err(Error::Degenerate(format!("expected arrival count {mean} must be positive")));
    }
    let dist = Poisson::new(mean).map_err(|e| Error::Degenerate(format!("Poisson({mean}): {e}")))?;
    Ok((dist, poisson::upper_quantile(mean, CAP_TAIL) as u64))
}

fn report_redraws(what: &str, redraws: u64) {
    if redraws > 0 {
        log::warn!("{what}: {redraws} arrival counts exceeded the cap and were redrawn");
    }
}

/// One replicate of the discrete model: arrival times and success marks.
#[derive(Debug, Default)]
struct Replicate {
    times: Vec<f64>,
    success: Vec<bool>,
}

impl Replicate {
    fn draw(
        &mut self,
        model: &IntensityModel,
        theta: f64,
        law: &(Poisson<f64>, u64),
        rng: &mut ChaCha8Rng,
    ) -> u64 {
        let (n, redraws) = capped_count(&law.0, law.1, rng);
        let total = model.total();
        self.times.clear();
        self.times.extend((0..n).map(|_| rng.random::<f64>()));
        self.times.sort_by(f64::total_cmp);
        if !matches!(model, IntensityModel::Homogeneous { .. }) {
            for t in &mut self.times {
                *t = model.inverse_cumulative(*t * total);
            }
        }
        self.success.clear();
        self.success
            .extend((1..=n).map(|k| rng.random::<f64>() < ks_profile(k, theta)));
        redraws
    }

    /// Win iff the strategy stops on a success followed by exactly `ell - 1`
    /// further successes.
    fn wins(&self, strategy: &StrategySpec, ell: usize) -> bool {
        let stop = (0..self.times.len()).find(|&i| self.success[i] && self.times[i] >= strategy.cutoff(i + 1));
        match stop {
            Some(i) => self.success[i + 1..].iter().filter(|&&s| s).count() == ell - 1,
            None => false,
        }
    }
}

#[derive(Debug, Clone, Default)]
struct Tally {
    wins: Vec<u64>,
    /// Per perturbed strategy, sums of `d` and `d²` for `d = w_0 - w_j`.
    diff: Vec<(i64, u64)>,
    redraws: u64,
}

impl Tally {
    fn new(n_strategies: usize) -> Self {
        Tally {
            wins: vec![0; n_strategies],
            diff: vec![(0, 0); n_strategies],
            redraws: 0,
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        for (a, b) in self.wins.iter_mut().zip(&other.wins) {
            *a += b;
        }
        for (a, b) in self.diff.iter_mut().zip(&other.diff) {
            a.0 += b.0;
            a.1 += b.1;
        }
        self.redraws += other.redraws;
        self
    }
}

/// Runs every strategy on the same replicates.
fn run_paired(
    model: &IntensityModel,
    theta: f64,
    strategies: &[StrategySpec],
    cfg: &SimConfig,
) -> Result<Tally> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(invalid("theta", format!("{theta} must be positive")));
    }
    let law = count_law(model.total())?;
    let n = strategies.len();
    let tally = (0..cfg.n_trials)
        .into_par_iter()
        .fold(
            || (Tally::new(n), Replicate::default(), vec![false; n]),
            |(mut tally, mut rep, mut won), i| {
                let mut rng = cfg.rng(i);
                tally.redraws += rep.draw(model, theta, &law, &mut rng);
                for (j, s) in strategies.iter().enumerate() {
                    won[j] = rep.wins(s, cfg.ell);
                    tally.wins[j] += won[j] as u64;
                }
                for j in 0..n {
                    let d = won[0] as i64 - won[j] as i64;
                    tally.diff[j].0 += d;
                    tally.diff[j].1 += (d * d) as u64;
                }
                (tally, rep, won)
            },
        )
        .map(|(t, _, _)| t)
        .reduce(|| Tally::new(n), Tally::merge);
    report_redraws("simulation", tally.redraws);
    Ok(tally)
}

/// Win rate of `strategy` under homogeneous intensity `λ`.
pub fn simulate_homogeneous(params: &ModelParams, strategy: &StrategySpec, cfg: &SimConfig) -> Result<WinStats> {
    let model = IntensityModel::homogeneous(params.lambda())?;
    let tally = run_paired(&model, params.theta(), std::slice::from_ref(strategy), cfg)?;
    Ok(WinStats::from_counts(tally.wins[0], cfg.n_trials))
}

/// Win rate of the myopic rule `Λ(1) - Λ(t) ≤ γ_k` under `model`.
pub fn simulate_inhomogeneous(
    model: &IntensityModel,
    theta: f64,
    table: &RootTable,
    cfg: &SimConfig,
) -> Result<WinStats> {
    let strategy = inhom_cutoffs(model, table)?;
    let tally = run_paired(model, theta, std::slice::from_ref(&strategy), cfg)?;
    Ok(WinStats::from_counts(tally.wins[0], cfg.n_trials))
}

/// Win rate of "stop on the first success after `t★`" for the success
/// process with intensity `κ(t + κ)^{α-1}`, targeting the `ℓ`-th last
/// success.
pub fn simulate_continuous(kappa: f64, alpha: f64, cfg: &SimConfig) -> Result<WinStats> {
    let process = SuccessProcess::new(kappa, alpha)?;
    let threshold = cont_threshold(cfg.ell, kappa, alpha)?;
    if threshold.clamped {
        log::info!(
            "threshold clamped to 0: only {} successes expected for ell = {}",
            process.mean(1.0),
            cfg.ell
        );
    }
    let total = process.mean(1.0);
    let law = count_law(total)?;
    let (wins, redraws) = (0..cfg.n_trials)
        .into_par_iter()
        .fold(
            || (0u64, 0u64, Vec::new()),
            |(mut wins, mut redraws, mut times), i| {
                let mut rng = cfg.rng(i);
                let (n, r) = capped_count(&law.0, law.1, &mut rng);
                redraws += r;
                times.clear();
                times.extend((0..n).map(|_| process.inverse_mean(rng.random::<f64>() * total)));
                let after = times.iter().filter(|&&t| t >= threshold.time).count();
                // Stopping on the first arrival after t★ leaves `after - 1`
                // successes to come.
                if after == cfg.ell {
                    wins += 1;
                }
                (wins, redraws, times)
            },
        )
        .map(|(w, r, _)| (w, r))
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    report_redraws("continuous simulation", redraws);
    Ok(WinStats::from_counts(wins, cfg.n_trials))
}

/// Myopic vs one perturbed strategy on common random numbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedRow {
    pub delta: f64,
    pub stats: WinStats,
    /// `p̂(myopic) - p̂(perturbed)`.
    pub diff: f64,
    /// Standard error of the paired per-replicate difference.
    pub paired_std_err: f64,
}

impl PairedRow {
    /// `diff / paired_std_err`; infinite when every pair agrees but the
    /// difference is nonzero, 0 when both vanish.
    pub fn z(&self) -> f64 {
        if self.paired_std_err > 0.0 {
            self.diff / self.paired_std_err
        } else if self.diff == 0.0 {
            0.0
        } else {
            self.diff.signum() * f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    pub myopic: WinStats,
    pub rows: Vec<PairedRow>,
}

/// Evaluates the myopic cutoffs and each `clamp(a_k + δ, 0, 1)` variant on
/// the same replicates.
pub fn compare_strategies(
    params: &ModelParams,
    table: &RootTable,
    deltas: &[f64],
    cfg: &SimConfig,
) -> Result<CompareReport> {
    let model = IntensityModel::homogeneous(params.lambda())?;
    let myopic = inhom_cutoffs(&model, table)?;
    let mut strategies = vec![myopic.clone()];
    strategies.extend(deltas.iter().map(|&d| myopic.perturbed(d)));
    let tally = run_paired(&model, params.theta(), &strategies, cfg)?;
    let n = cfg.n_trials as f64;
    let rows = deltas
        .iter()
        .enumerate()
        .map(|(j, &delta)| {
            let (sum, sum_sq) = tally.diff[j + 1];
            let mean = sum as f64 / n;
            let var = if cfg.n_trials > 1 {
                ((sum_sq as f64 - n * mean * mean) / (n - 1.0)).max(0.0)
            } else {
                0.0
            };
            PairedRow {
                delta,
                stats: WinStats::from_counts(tally.wins[j + 1], cfg.n_trials),
                diff: mean,
                paired_std_err: (var / n).sqrt(),
            }
        })
        .collect();
    Ok(CompareReport {
        myopic: WinStats::from_counts(tally.wins[0], cfg.n_trials),
        rows,
    })
}

/// Arrival counts `N₁` per replicate under `model`.
pub fn arrival_counts(model: &IntensityModel, cfg: &SimConfig) -> Result<Vec<u64>> {
    let law = count_law(model.total())?;
    Ok((0..cfg.n_trials)
        .into_par_iter()
        .map(|i| capped_count(&law.0, law.1, &mut cfg.rng(i)).0 as u64)
        .collect())
}

/// Success counts from thinning arrivals of `λ(t) = (t + κ)^α` with
/// retention probability `κ/(κ + t)`.
pub fn thinned_success_counts(kappa: f64, alpha: f64, cfg: &SimConfig) -> Result<Vec<u64>> {
    let model = IntensityModel::power_law(kappa, alpha)?;
    let total = model.total();
    let law = count_law(total)?;
    Ok((0..cfg.n_trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = cfg.rng(i);
            let (n, _) = capped_count(&law.0, law.1, &mut rng);
            (0..n)
                .filter(|_| {
                    let t = model.inverse_cumulative(rng.random::<f64>() * total);
                    rng.random::<f64>() < kappa / (kappa + t)
                })
                .count() as u64
        })
        .collect())
}

/// Success counts drawn directly from the success process.
pub fn direct_success_counts(kappa: f64, alpha: f64, cfg: &SimConfig) -> Result<Vec<u64>> {
    let process = SuccessProcess::new(kappa, alpha)?;
    let law = count_law(process.mean(1.0))?;
    Ok((0..cfg.n_trials)
        .into_par_iter()
        .map(|i| capped_count(&law.0, law.1, &mut cfg.rng(i)).0 as u64)
        .collect())
}
