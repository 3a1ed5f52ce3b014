//! Acceptance criteria. One PASS/FAIL line each; nonzero exit if any fails.

use std::time::{Duration, Instant};

use ks_stopping::bounds::{expected_varphi, ks_bounds, table1, table1_csv, LowerVariant, TABLE1_KS};
use ks_stopping::policy::win_prob_formula;
use ks_stopping::profile::ModelParams;
use ks_stopping::roots::{root_table, root_table_covering, solve_root_record};
use ks_stopping::simulator::{compare_strategies, simulate_continuous, SimConfig};
use ks_stopping::verify::{closed_vs_mixture, run_suite, Suite, MONOTONE_THETAS};

/// Published bounds comparison: k, lo_orig, hi_orig, lo_new, hi_new, factor_lo, factor_hi, factor_range.
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

const TRIALS: u64 = 1_000_000;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = f();
    let took = start.elapsed();
    o.detail = format!("{} [{:.2?}]", o.detail, took);
    if let Some(limit) = limit {
        if took > limit {
            o.pass = false;
            o.detail = format!("{} exceeds {:?}", o.detail, limit);
        }
    }
    o
}

fn table1_reproduction() -> Outcome {
    let csv = match table1(&TABLE1_KS) {
        Ok(rows) => table1_csv(&rows),
        Err(e) => return outcome(false, e.to_string()),
    };
    let mut worst: f64 = 0.0;
    let mut rows = 0;
    for (line, want) in csv.lines().skip(1).zip(PUBLISHED.iter()) {
        rows += 1;
        for (cell, w) in line.split(',').zip(want) {
            let g: f64 = cell.parse().unwrap_or(f64::NAN);
            worst = worst.max((g - w).abs());
        }
    }
    let pass = rows == PUBLISHED.len() && worst <= 0.01 + 1e-9;
    outcome(pass, format!("rows={rows} max_cell_diff={worst:.3}"))
}

fn root_correctness() -> Outcome {
    let ks = [2, 3, 4, 5, 6, 7, 8, 9, 10, 50, 100, 500, 1000];
    let mut bad = Vec::new();
    let mut worst_res: f64 = 0.0;
    for &k in &ks {
        let rec = match solve_root_record(k, 1.0, 1e-10) {
            Ok(r) => r,
            Err(e) => return outcome(false, format!("k={k}: {e}")),
        };
        // Published interval where one exists, else the same formula.
        let (lo, hi) = PUBLISHED
            .iter()
            .find(|r| r[0] as usize == k)
            .map_or_else(|| ks_bounds(k, 1.0, LowerVariant::Table), |r| (r[3], r[4]));
        if rec.gamma < lo - 0.01 || rec.gamma > hi + 0.01 {
            bad.push(k);
        }
        worst_res = worst_res.max(rec.residual.abs());
    }
    let pass = bad.is_empty() && worst_res <= 1e-9;
    outcome(pass, format!("outside={bad:?} max_residual={worst_res:.2e}"))
}

fn monotonicity() -> Outcome {
    let mut violations = 0;
    for &theta in &MONOTONE_THETAS {
        match root_table(200, theta, 1e-10) {
            Ok(t) => {
                let g: Vec<f64> = t.roots().collect();
                violations += g.windows(2).filter(|w| w[1] <= w[0]).count();
            }
            Err(e) => return outcome(false, format!("theta={theta}: {e}")),
        }
    }
    outcome(violations == 0, format!("violations={violations}"))
}

fn asymptotics() -> Outcome {
    let mut worst: f64 = 0.0;
    for theta in [0.5, 1.0, 2.0] {
        let g = match solve_root_record(1000, theta, 1e-10) {
            Ok(r) => r.gamma,
            Err(e) => return outcome(false, e.to_string()),
        };
        worst = worst.max((g / 1000.0 - ((1.0 / theta).exp() - 1.0)).abs());
    }
    outcome(worst <= 0.02, format!("max_gap={worst:.5}"))
}

fn root_identity() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut at = (0, 0.0);
    for theta in [0.5, 1.0, 2.0] {
        let table = match root_table(10, theta, 1e-12) {
            Ok(t) => t,
            Err(e) => return outcome(false, e.to_string()),
        };
        for rec in table.records() {
            let e = expected_varphi(rec.gamma, rec.k).unwrap_or(f64::NAN);
            let gap = (e - 1.0 / theta).abs();
            if !(gap <= worst) {
                worst = gap;
                at = (rec.k, theta);
            }
        }
    }
    outcome(
        worst <= 1e-8,
        format!("max |E[phi]-1/theta|={worst:.4} at k={} theta={}", at.0, at.1),
    )
}

fn suite(s: Suite) -> Outcome {
    match run_suite(s) {
        Ok(r) => outcome(r.passed(), format!("checks={} failures={}", r.lines.len(), r.failures())),
        Err(e) => outcome(false, e.to_string()),
    }
}

fn closed_forms() -> Outcome {
    match closed_vs_mixture() {
        Ok(lines) => {
            let failed = lines.iter().filter(|l| !l.pass).count();
            outcome(failed == 0, format!("cells={} failures={failed}", lines.len()))
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

fn winning_probability() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for ell in 1..=3 {
        let cfg = SimConfig::new(TRIALS, 20_240 + ell as u64, ell).expect("valid config");
        let s = match simulate_continuous(2.0, 1.0, &cfg) {
            Ok(s) => s,
            Err(e) => return outcome(false, e.to_string()),
        };
        let target = win_prob_formula(ell);
        let z = (s.p_hat - target) / s.std_err;
        pass &= z.abs() <= 4.0;
        parts.push(format!("ell={ell} p_hat={:.5} target={target:.5} z={z:.1}", s.p_hat));
    }
    outcome(pass, parts.join("; "))
}

fn empirical_optimality() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for (i, lambda) in [5.0, 10.0].into_iter().enumerate() {
        let params = ModelParams::new(1.0, lambda).expect("valid params");
        let table = match root_table_covering(1.0, 1e-10, lambda) {
            Ok(t) => t,
            Err(e) => return outcome(false, e.to_string()),
        };
        let cfg = SimConfig::new(TRIALS, 77 + i as u64, 1).expect("valid config");
        let report = match compare_strategies(&params, &table, &[-0.1, 0.1, 1.0], &cfg) {
            Ok(r) => r,
            Err(e) => return outcome(false, e.to_string()),
        };
        for row in &report.rows {
            let ok = if row.delta == 1.0 {
                row.z() >= 5.0
            } else {
                row.diff >= -2.0 * row.paired_std_err
            };
            pass &= ok;
            parts.push(format!("lambda={lambda} delta={} z={:.1}", row.delta, row.z()));
        }
    }
    outcome(pass, parts.join("; "))
}

fn main() {
    let criteria: Vec<(&str, Box<dyn FnOnce() -> Outcome>)> = vec![
        ("bounds-table-reproduction", Box::new(|| timed(Some(Duration::from_secs(1)), table1_reproduction))),
        ("root-correctness", Box::new(|| timed(Some(Duration::from_secs(10)), root_correctness))),
        ("monotonicity", Box::new(|| timed(None, monotonicity))),
        ("asymptotics", Box::new(|| timed(None, asymptotics))),
        ("root-identity", Box::new(|| timed(None, root_identity))),
        ("sign-identities", Box::new(|| timed(None, || suite(Suite::Signs)))),
        ("em-inequalities", Box::new(|| timed(None, || suite(Suite::Em)))),
        ("closed-vs-mixture", Box::new(|| timed(None, closed_forms))),
        ("winning-probability", Box::new(|| timed(Some(Duration::from_secs(60)), winning_probability))),
        ("empirical-optimality", Box::new(|| timed(None, empirical_optimality))),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {failed} failing");
    if failed > 0 {
        std::process::exit(1);
    }
}
