//! Prints the brute-force truth estimates for the standard simulation
//! environments, alongside a quadrature cross-check of the closed form
//! E[∂f/∂x₁] = 0.2 + e^(−1/2)·μ·cos(μ) + E[σ(N(μ,1))].

use ridgeboost_core::sim::{sigmoid, true_average_derivative, ORACLE_DRAWS, ORACLE_SEED};

/// E[σ(Z)] for Z ~ N(mu, 1) by Simpson's rule on [mu − 12, mu + 12].
fn expected_sigmoid(mu: f64) -> f64 {
    let steps = 200_000usize;
    let lo = mu - 12.0;
    let hi = mu + 12.0;
    let h = (hi - lo) / steps as f64;
    let density = |t: f64| (-0.5 * (t - mu) * (t - mu)).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let f = |t: f64| sigmoid(t) * density(t);
    let mut total = f(lo) + f(hi);
    for i in 1..steps {
        let t = lo + i as f64 * h;
        total += if i % 2 == 1 { 4.0 } else { 2.0 } * f(t);
    }
    total * h / 3.0
}

fn main() {
    for mu in [-1.0f64, 0.0, 1.0] {
        let est = true_average_derivative(mu, ORACLE_DRAWS, ORACLE_SEED).unwrap();
        let closed = 0.2 + (-0.5f64).exp() * mu * mu.cos() + expected_sigmoid(mu);
        println!(
            "mu = {mu:+.1}: oracle = {:.17e} (se {:.3e}), quadrature = {:.17e}, diff = {:+.3e}",
            est.value,
            est.std_error,
            closed,
            est.value - closed
        );
    }
}
