use ks_stopping::poisson;
use ks_stopping::policy::{cutoffs, IntensityModel, StrategySpec};
use ks_stopping::profile::{ks_profile, s0, ModelParams};
use ks_stopping::roots::root_table_covering;
use ks_stopping::simulator::{compare_strategies, simulate_homogeneous, simulate_inhomogeneous, SimConfig};

/// Probability that nothing after arrival `k` succeeds when the remaining
/// arrival count is Poisson(`x`).
fn no_later_success(x: f64, k: usize, theta: f64) -> f64 {
    poisson::expect(x, |n| s0(k + 1, k + n, theta))
}

/// Win probability of a cutoff rule, by RK4 on the forward equations for
/// `q_k(t) = P(k arrivals by t, not stopped)`.
fn ode_win_prob(lambda: f64, theta: f64, spec: &StrategySpec, k_max: usize, steps: usize) -> f64 {
    let stops = |t: f64, k: usize| t >= spec.cutoff(k);
    let rhs = |t: f64, q: &[f64]| -> (Vec<f64>, f64) {
        let mut dq = vec![0.0; q.len()];
        let mut dw = 0.0;
        dq[0] = -lambda * q[0];
        for k in 1..q.len() {
            let p = ks_profile(k, theta);
            let stop = if stops(t, k) { p } else { 0.0 };
            dq[k] = -lambda * q[k] + lambda * q[k - 1] * (1.0 - stop);
            if stop > 0.0 {
                dw += lambda * q[k - 1] * stop * no_later_success(lambda * (1.0 - t), k, theta);
            }
        }
        (dq, dw)
    };
    let h = 1.0 / steps as f64;
    let mut q = vec![0.0; k_max + 1];
    q[0] = 1.0;
    let mut w = 0.0;
    for i in 0..steps {
        let t = i as f64 * h;
        let add = |q: &[f64], d: &[f64], s: f64| q.iter().zip(d).map(|(a, b)| a + s * b).collect::<Vec<_>>();
        let (k1, w1) = rhs(t, &q);
        let (k2, w2) = rhs(t + h / 2.0, &add(&q, &k1, h / 2.0));
        let (k3, w3) = rhs(t + h / 2.0, &add(&q, &k2, h / 2.0));
        let (k4, w4) = rhs(t + h, &add(&q, &k3, h));
        for j in 0..q.len() {
            q[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        w += h / 6.0 * (w1 + 2.0 * w2 + 2.0 * w3 + w4);
    }
    w
}

#[test]
fn myopic_matches_forward_equations() {
    let (lambda, theta) = (5.0, 1.0);
    let table = root_table_covering(theta, 1e-10, lambda).unwrap();
    let spec = cutoffs(lambda, &table).unwrap();
    let oracle = ode_win_prob(lambda, theta, &spec, 40, 4000);
    let cfg = SimConfig::new(400_000, 11, 1).unwrap();
    let s = simulate_homogeneous(&ModelParams::new(theta, lambda).unwrap(), &spec, &cfg).unwrap();
    assert!((s.p_hat - oracle).abs() < 4.0 * s.std_err, "{} vs {oracle}", s.p_hat);
}

#[test]
fn perturbed_rule_matches_forward_equations() {
    let (lambda, theta) = (3.0, 2.0);
    let table = root_table_covering(theta, 1e-10, lambda).unwrap();
    let spec = cutoffs(lambda, &table).unwrap().perturbed(0.15);
    let oracle = ode_win_prob(lambda, theta, &spec, 30, 4000);
    let cfg = SimConfig::new(400_000, 12, 1).unwrap();
    let s = simulate_homogeneous(&ModelParams::new(theta, lambda).unwrap(), &spec, &cfg).unwrap();
    assert!((s.p_hat - oracle).abs() < 4.0 * s.std_err, "{} vs {oracle}", s.p_hat);
}

#[test]
fn immediate_rule_closed_form() {
    let (lambda, theta) = (0.2, 1.5);
    // Stop at the first arrival (always a success); win iff none of
    // arrivals 2..n succeed.
    let oracle = poisson::expect(lambda, |n| if n == 0 { 0.0 } else { s0(2, n, theta) });
    let direct: f64 = (1..40)
        .map(|n| poisson::pmf(n, lambda) * (2..=n).map(|i| (i - 1) as f64 / (theta + (i - 1) as f64)).product::<f64>())
        .sum();
    assert!((oracle - direct).abs() < 1e-14);
    let cfg = SimConfig::new(400_000, 13, 1).unwrap();
    let s = simulate_homogeneous(&ModelParams::new(theta, lambda).unwrap(), &StrategySpec::immediate(), &cfg).unwrap();
    assert!((s.p_hat - oracle).abs() < 4.0 * s.std_err);
}

#[test]
fn constant_intensity_agrees_with_homogeneous_path() {
    let (lambda, theta) = (4.0, 1.0);
    let table = root_table_covering(theta, 1e-10, lambda).unwrap();
    let spec = cutoffs(lambda, &table).unwrap();
    let cfg = SimConfig::new(200_000, 21, 1).unwrap();
    let a = simulate_homogeneous(&ModelParams::new(theta, lambda).unwrap(), &spec, &cfg).unwrap();
    let model = IntensityModel::homogeneous(lambda).unwrap();
    let b = simulate_inhomogeneous(&model, theta, &table, &cfg).unwrap();
    assert!((a.p_hat - b.p_hat).abs() < 5.0 * (a.std_err.powi(2) + b.std_err.powi(2)).sqrt());
}

#[test]
fn comparison_rows_are_consistent() {
    let (lambda, theta) = (5.0, 1.0);
    let params = ModelParams::new(theta, lambda).unwrap();
    let table = root_table_covering(theta, 1e-10, lambda).unwrap();
    let cfg = SimConfig::new(100_000, 31, 1).unwrap();
    let r = compare_strategies(&params, &table, &[-0.1, 0.0, 1.0], &cfg).unwrap();
    assert_eq!(r.rows.len(), 3);
    for row in &r.rows {
        assert!((row.diff - (r.myopic.p_hat - row.stats.p_hat)).abs() < 1e-12);
    }
    // δ = 0 replays the myopic rule on the same draws.
    assert_eq!(r.rows[1].stats.wins, r.myopic.wins);
    assert_eq!(r.rows[1].paired_std_err, 0.0);
    assert!(r.rows[2].z() > 5.0);
}
