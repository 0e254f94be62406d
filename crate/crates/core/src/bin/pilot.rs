//! Small-scale coverage pilot: prints per-cell coverage, CI width, bias, the
//! SE-calibration ratio, and wall time so feature-count and ridge defaults can
//! be sanity-checked before running the full grid.

use std::time::Instant;

use ridgeboost_core::sim::{frozen_truth, run_monte_carlo, McSettings, Method};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let reps: usize = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(100);
    let d_rff: usize = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(200);
    let n_grid: Vec<usize> = args
        .get(3)
        .map(|s| s.split(',').map(|t| t.parse().unwrap()).collect())
        .unwrap_or_else(|| vec![100, 500]);
    // boost lambda = c * n^(-p); defaults to the library rule when not given
    let boost_rule: Option<(f64, f64)> = match (args.get(4), args.get(5)) {
        (Some(c), Some(p)) => Some((c.parse().unwrap(), p.parse().unwrap())),
        _ => None,
    };
    let bandwidth_factor: f64 = args.get(6).map(|s| s.parse().unwrap()).unwrap_or(1.0);
    let step_factor: f64 = args.get(7).map(|s| s.parse().unwrap()).unwrap_or(0.1);
    let init_exponent: Option<f64> = args.get(8).map(|s| s.parse().unwrap());

    let mu_grid = [-1.0, 0.0, 1.0];
    let truths: Vec<(f64, f64)> = mu_grid
        .iter()
        .map(|&mu| (mu, frozen_truth(mu).unwrap()))
        .collect();

    let start = Instant::now();
    println!(
        "{:>5} {:>5} {:>8} {:>9} {:>9} {:>9} {:>7} {:>5}",
        "n", "mu", "method", "coverage", "ci_width", "bias", "se_cal", "done"
    );
    for &n in &n_grid {
        let lambda_boost = boost_rule.map(|(c, p)| c * (n as f64).powf(-p));
        let settings = McSettings {
            d_rff,
            lambda_init: init_exponent.map(|p| (n as f64).powf(-p)),
            lambda_boost,
            bandwidth_factor,
            step_factor,
            ..Default::default()
        };
        let base: u64 = std::env::var("PILOT_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(7000);
        let out = run_monte_carlo(&[n], &mu_grid, reps, base, &settings, &truths).unwrap();
        for row in &out.rows {
            // SE calibration: mean(se^2) / empirical variance of theta_hat
            let cell: Vec<_> = out
                .details
                .iter()
                .filter(|d| d.mu_target == row.mu_target && d.method == row.method)
                .collect();
            let k = cell.len() as f64;
            let mean_se2 = cell.iter().map(|d| d.std_error * d.std_error).sum::<f64>() / k;
            let mean_theta = cell.iter().map(|d| d.theta_hat).sum::<f64>() / k;
            let var_theta = cell
                .iter()
                .map(|d| (d.theta_hat - mean_theta).powi(2))
                .sum::<f64>()
                / (k - 1.0);
            let cal = mean_se2 / var_theta;
            let tag = if row.method == Method::Boosted { "*" } else { " " };
            println!(
                "{:>5} {:>5} {:>8} {:>9.3} {:>9.4} {:>+9.4} {:>7.2}{tag} {:>4}",
                row.n,
                row.mu_target,
                row.method.as_str(),
                row.coverage,
                row.mean_ci_width,
                row.mean_bias,
                cal,
                row.replications
            );
        }
        if !out.failures.is_empty() {
            println!("failures at n={n}: {}", out.failures.len());
        }
        for &mu in &mu_grid {
            let truth = frozen_truth(mu).unwrap();
            let mut z: Vec<f64> = out
                .details
                .iter()
                .filter(|d| d.mu_target == mu && d.method == Method::Boosted)
                .map(|d| (d.theta_hat - truth) / d.std_error)
                .collect();
            z.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let q = |p: f64| z[((z.len() - 1) as f64 * p).round() as usize];
            println!(
                "  z(mu={mu}): p05 {:+.2} p25 {:+.2} p50 {:+.2} p75 {:+.2} p95 {:+.2}",
                q(0.05),
                q(0.25),
                q(0.50),
                q(0.75),
                q(0.95)
            );
        }
    }
    println!("wall = {:.1}s", start.elapsed().as_secs_f64());
}
