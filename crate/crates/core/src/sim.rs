//! Coverage-study machinery: the shifted-covariate data-generating process,
//! the brute-force Monte Carlo oracle for the average-derivative estimand,
//! and the replication harness comparing the naive plug-in against the
//! boosted estimator.

use crate::boost::{estimate, fit_boost, plugin_estimate, Z_95};
use crate::data::{Dataset, Provenance};
use crate::error::{Error, Result};
use crate::features::{median_heuristic_bandwidth, sample_rff, Kernel};
use crate::functionals::{average_derivative_functional, DiffSpec};
use crate::linalg::DenseMatrix;
use crate::regress::{default_lambda, fit_krr_centered};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

/// Parameters of the synthetic data-generating process: X₁, X₂ ~ N(μ, 1),
/// X₃ = 4·σ(X₁ − X₂) + ε − 2 with ε ~ N(0, 2²), and (when labeled)
/// Y = f(X) + η with η ~ N(0, 2²).
#[derive(Debug, Clone, Copy)]
pub struct DgpConfig {
    /// Location of X₁ and X₂ (0 for the source, shifted for targets).
    pub mu: f64,
    pub n: usize,
    pub seed: u64,
}

/// Logistic sigmoid 1/(1 + e^(−t)).
pub fn sigmoid(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

/// Regression function f(x) = x₁·(0.2 + sin x₁ + σ(x₂) − 0.2·x₃).
pub fn regression_fn(x: &[f64]) -> f64 {
    x[0] * (0.2 + x[0].sin() + sigmoid(x[1]) - 0.2 * x[2])
}

/// ∂f/∂x₁ with all coordinates free:
/// 0.2 + sin x₁ + x₁·cos x₁ + σ(x₂) − 0.2·x₃.
pub fn partial_derivative_x1(x: &[f64]) -> f64 {
    0.2 + x[0].sin() + x[0] * x[0].cos() + sigmoid(x[1]) - 0.2 * x[2]
}

fn draw_row<R: Rng>(rng: &mut R, mu: f64) -> [f64; 3] {
    let z1: f64 = rng.sample(StandardNormal);
    let z2: f64 = rng.sample(StandardNormal);
    let eps: f64 = rng.sample(StandardNormal);
    let x1 = mu + z1;
    let x2 = mu + z2;
    let x3 = 4.0 * sigmoid(x1 - x2) + 2.0 * eps - 2.0;
    [x1, x2, x3]
}

/// Draws a dataset from the process, reproducibly from the seed. Labeled
/// datasets carry outcomes; unlabeled ones only covariates.
pub fn draw_dataset(cfg: &DgpConfig, labeled: bool) -> Result<Dataset> {
    if cfg.n < 2 {
        return Err(Error::InvalidParameter(
            "dataset size must be at least 2".into(),
        ));
    }
    if !cfg.mu.is_finite() {
        return Err(Error::InvalidParameter("mu must be finite".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut x = DenseMatrix::zeros(cfg.n, 3);
    let mut y = if labeled {
        Vec::with_capacity(cfg.n)
    } else {
        Vec::new()
    };
    for i in 0..cfg.n {
        let row = draw_row(&mut rng, cfg.mu);
        x.row_mut(i).copy_from_slice(&row);
        if labeled {
            let eta: f64 = rng.sample(StandardNormal);
            y.push(regression_fn(&row) + 2.0 * eta);
        }
    }
    if labeled {
        Dataset::labeled(x, y, Provenance::Source)
    } else {
        Ok(Dataset::unlabeled(x, Provenance::Target))
    }
}

/// A Monte Carlo estimate of the true estimand with its own uncertainty.
#[derive(Debug, Clone, Copy)]
pub struct OracleEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_draws: usize,
}

/// Brute-force truth: the mean of ∂f/∂x₁ over draws from the μ-shifted
/// covariate distribution, streamed so memory stays constant.
pub fn true_average_derivative(mu: f64, n_oracle: usize, seed: u64) -> Result<OracleEstimate> {
    if n_oracle < 1_000_000 {
        return Err(Error::InvalidParameter(
            "oracle needs at least 1e6 draws".into(),
        ));
    }
    if !mu.is_finite() {
        return Err(Error::InvalidParameter("mu must be finite".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mean = 0.0f64;
    let mut m2 = 0.0f64;
    for i in 0..n_oracle {
        let row = draw_row(&mut rng, mu);
        let v = partial_derivative_x1(&row);
        let delta = v - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (v - mean);
    }
    let var_of_mean = m2 / (n_oracle as f64 - 1.0) / n_oracle as f64;
    Ok(OracleEstimate {
        value: mean,
        std_error: var_of_mean.sqrt(),
        n_draws: n_oracle,
    })
}

/// Seed used for the frozen oracle constants below.
pub const ORACLE_SEED: u64 = 9001;
/// Draw count behind the frozen oracle constants.
pub const ORACLE_DRAWS: usize = 10_000_000;

/// Frozen 10⁷-draw oracle truths for the standard environments, computed
/// with [`ORACLE_SEED`] (see the `oracle` binary). Each value carries a
/// Monte Carlo standard error of about 4e-4 and matches the quadrature
/// closed form 0.2 + e^(−1/2)·μ·cos(μ) + E[σ(N(μ,1))] within one SE; the
/// μ = 0 truth is exactly 0.7 analytically.
pub fn frozen_truth(mu: f64) -> Option<f64> {
    if mu == -1.0 {
        Some(1.754_489_970_218_708_3e-1)
    } else if mu == 0.0 {
        Some(6.996_737_107_973_734e-1)
    } else if mu == 1.0 {
        Some(1.224_220_781_377_231_2)
    } else {
        None
    }
}

/// Estimator under comparison in the coverage study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Plug-in with the initial kernel ridge fit only; no bias correction,
    /// target-sample-only standard error.
    Naive,
    /// The once-boosted estimator with the full two-sample variance.
    Boosted,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Naive => "naive",
            Method::Boosted => "boosted",
        }
    }
}

/// One aggregated cell of the coverage study.
#[derive(Debug, Clone)]
pub struct CoverageRow {
    pub n: usize,
    pub mu_target: f64,
    pub method: Method,
    /// Fraction of completed replications whose 95% CI contains the truth.
    pub coverage: f64,
    pub mean_ci_width: f64,
    /// Mean of θ̂ − truth over completed replications.
    pub mean_bias: f64,
    /// Completed replications behind this row.
    pub replications: usize,
}

/// Per-replication record kept alongside the aggregate rows (feeds the
/// variance-calibration checks).
#[derive(Debug, Clone)]
pub struct RepDetail {
    pub n: usize,
    pub mu_target: f64,
    pub method: Method,
    pub replication: usize,
    pub theta_hat: f64,
    pub std_error: f64,
    pub covered: bool,
}

/// A replication that errored, with its grid position.
#[derive(Debug, Clone)]
pub struct FailureRecord {
    pub n: usize,
    pub mu_target: f64,
    pub replication: usize,
    pub message: String,
}

/// Estimator settings for the harness.
#[derive(Debug, Clone)]
pub struct McSettings {
    /// Random Fourier feature count for the boosting class.
    pub d_rff: usize,
    /// Ridge strength for the initial kernel fit; None resolves to n^(-1/2)
    /// per sample size.
    pub lambda_init: Option<f64>,
    /// Ridge strength for the boosting step; None resolves to
    /// [`default_boost_lambda`] per sample size.
    pub lambda_boost: Option<f64>,
    /// Multiplier on the median-heuristic bandwidth; the initial kernel fit
    /// and the boosting feature class share the resulting bandwidth.
    pub bandwidth_factor: f64,
    /// Symmetric-difference step as a multiple of the target-sample standard
    /// deviation of the differenced coordinate.
    pub step_factor: f64,
    /// Target sample size per replication; None resolves to n.
    pub n_target: Option<usize>,
}

impl Default for McSettings {
    fn default() -> Self {
        Self {
            d_rff: DEFAULT_RFF_FEATURES,
            lambda_init: None,
            lambda_boost: None,
            bandwidth_factor: DEFAULT_BANDWIDTH_FACTOR,
            step_factor: 0.1,
            n_target: None,
        }
    }
}

/// Default Fourier feature count for the coverage study. Calibrated on pilot
/// seeds 7000/7400/7800, disjoint from the certification seeds: beyond ~400
/// features the extra Monte Carlo spread from the feature draw stops mattering.
pub const DEFAULT_RFF_FEATURES: usize = 400;

/// Default bandwidth multiplier for the coverage study, calibrated on the
/// same pilot seeds. Widening the shared kernel past the raw median heuristic
/// smooths the initial fit's error field enough for the ridge correction to
/// transfer across the ±1 mean shifts.
pub const DEFAULT_BANDWIDTH_FACTOR: f64 = 1.7;

/// Default ridge strength for the boosting step of the coverage study. The
/// boosting objective normalizes the squared loss by n, so the theory's
/// unnormalized penalty scale sits well below n^(-1/2) here; the exponent is
/// calibrated on the pilot seeds to balance shift bias (pushing λ down)
/// against standard-error calibration (pushing λ up).
pub fn default_boost_lambda(n: usize) -> f64 {
    (n as f64).powf(-1.25)
}

/// Full output of a coverage run.
#[derive(Debug, Clone)]
pub struct McOutput {
    pub rows: Vec<CoverageRow>,
    pub details: Vec<RepDetail>,
    pub failures: Vec<FailureRecord>,
}

/// Differencing spec with step = factor·(sample sd of the coordinate).
fn diff_spec_scaled(x: &DenseMatrix, coordinate: usize, factor: f64) -> Result<DiffSpec> {
    let base = DiffSpec::with_default_step(x, coordinate)?;
    DiffSpec::new(coordinate, factor / 0.1 * base.step)
}

struct MethodEstimate {
    theta_hat: f64,
    std_error: f64,
}

type MuOutcome = std::result::Result<(MethodEstimate, MethodEstimate), String>;

/// Runs one (n, replication) work item: fits once on the source draw, then
/// evaluates every target environment.
fn run_item(
    n: usize,
    replication: usize,
    mus: &[f64],
    base_seed: u64,
    settings: &McSettings,
) -> Vec<MuOutcome> {
    let r = replication as u64;
    let source_seed = base_seed.wrapping_add(r);
    let target_seed = base_seed.wrapping_add(r).wrapping_add(1 << 31);
    let rff_seed = base_seed.wrapping_add(r).wrapping_add(1 << 32);

    let shared: std::result::Result<_, String> = (|| {
        let lambda_init = settings.lambda_init.unwrap_or_else(|| default_lambda(n));
        let lambda_boost = settings
            .lambda_boost
            .unwrap_or_else(|| default_boost_lambda(n));
        let source = draw_dataset(
            &DgpConfig {
                mu: 0.0,
                n,
                seed: source_seed,
            },
            true,
        )
        .map_err(|e| e.to_string())?;
        let y = source.y().map_err(|e| e.to_string())?.to_vec();
        let bw = settings.bandwidth_factor
            * median_heuristic_bandwidth(source.x()).map_err(|e| e.to_string())?;
        let init = fit_krr_centered(source.x(), &y, Kernel::Rbf { bandwidth: bw }, lambda_init)
            .map_err(|e| e.to_string())?;
        let naive_init = init.clone();
        let map = sample_rff(bw, 3, settings.d_rff, rff_seed).map_err(|e| e.to_string())?;
        let model = fit_boost(source.x(), &y, Box::new(init), map, lambda_boost)
            .map_err(|e| e.to_string())?;
        Ok((model, naive_init))
    })();

    let (model, naive_init) = match shared {
        Ok(pair) => pair,
        Err(msg) => return mus.iter().map(|_| Err(msg.clone())).collect(),
    };

    mus.iter()
        .map(|&mu| -> MuOutcome {
            let n_q = settings.n_target.unwrap_or(n);
            let target = draw_dataset(
                &DgpConfig {
                    mu,
                    n: n_q,
                    seed: target_seed,
                },
                false,
            )
            .map_err(|e| e.to_string())?;
            let spec = diff_spec_scaled(target.x(), 0, settings.step_factor)
                .map_err(|e| e.to_string())?;
            let theta =
                average_derivative_functional(target.x(), spec).map_err(|e| e.to_string())?;
            let boosted = estimate(&model, &theta).map_err(|e| e.to_string())?;
            let (naive_theta, naive_se) =
                plugin_estimate(&naive_init, &theta).map_err(|e| e.to_string())?;
            Ok((
                MethodEstimate {
                    theta_hat: naive_theta,
                    std_error: naive_se,
                },
                MethodEstimate {
                    theta_hat: boosted.theta_hat,
                    std_error: boosted.std_error,
                },
            ))
        })
        .collect()
}

/// Runs the full coverage grid. Replication r derives its generators from
/// base_seed + r (source), + 2³¹ (target), and + 2³² (feature map), so
/// streams never overlap and the output is bit-identical regardless of the
/// parallelism degree: work items are reduced in index order.
pub fn run_monte_carlo(
    n_grid: &[usize],
    mu_grid: &[f64],
    replications: usize,
    base_seed: u64,
    settings: &McSettings,
    truths: &[(f64, f64)],
) -> Result<McOutput> {
    if replications == 0 {
        return Err(Error::InvalidParameter(
            "replications must be at least 1".into(),
        ));
    }
    if n_grid.is_empty() || mu_grid.is_empty() {
        return Err(Error::EmptyData("empty simulation grid"));
    }
    let truth_for = |mu: f64| -> Result<f64> {
        truths
            .iter()
            .find(|(m, _)| *m == mu)
            .map(|(_, t)| *t)
            .ok_or_else(|| Error::InvalidParameter(format!("no truth supplied for mu = {mu}")))
    };
    for &mu in mu_grid {
        truth_for(mu)?;
    }

    let items: Vec<(usize, usize)> = n_grid
        .iter()
        .flat_map(|&n| (0..replications).map(move |r| (n, r)))
        .collect();
    let outcomes: Vec<Vec<MuOutcome>> = items
        .par_iter()
        .map(|&(n, r)| run_item(n, r, mu_grid, base_seed, settings))
        .collect();

    let mut details = Vec::new();
    let mut failures = Vec::new();
    for (&(n, r), per_mu) in items.iter().zip(&outcomes) {
        for (&mu, outcome) in mu_grid.iter().zip(per_mu) {
            let truth = truth_for(mu)?;
            match outcome {
                Err(msg) => failures.push(FailureRecord {
                    n,
                    mu_target: mu,
                    replication: r,
                    message: msg.clone(),
                }),
                Ok((naive, boosted)) => {
                    for (method, est) in
                        [(Method::Naive, naive), (Method::Boosted, boosted)]
                    {
                        let half = Z_95 * est.std_error;
                        details.push(RepDetail {
                            n,
                            mu_target: mu,
                            method,
                            replication: r,
                            theta_hat: est.theta_hat,
                            std_error: est.std_error,
                            covered: (est.theta_hat - half..=est.theta_hat + half)
                                .contains(&truth),
                        });
                    }
                }
            }
        }
    }

    let mut rows = Vec::new();
    for &n in n_grid {
        for &mu in mu_grid {
            let truth = truth_for(mu)?;
            for method in [Method::Naive, Method::Boosted] {
                let cell: Vec<&RepDetail> = details
                    .iter()
                    .filter(|d| d.n == n && d.mu_target == mu && d.method == method)
                    .collect();
                let completed = cell.len();
                let covered = cell.iter().filter(|d| d.covered).count();
                let mean_width = if completed > 0 {
                    cell.iter()
                        .map(|d| 2.0 * Z_95 * d.std_error)
                        .sum::<f64>()
                        / completed as f64
                } else {
                    0.0
                };
                let mean_bias = if completed > 0 {
                    cell.iter().map(|d| d.theta_hat - truth).sum::<f64>() / completed as f64
                } else {
                    0.0
                };
                rows.push(CoverageRow {
                    n,
                    mu_target: mu,
                    method,
                    coverage: if completed > 0 {
                        covered as f64 / completed as f64
                    } else {
                        0.0
                    },
                    mean_ci_width: mean_width,
                    mean_bias,
                    replications: completed,
                });
            }
        }
    }

    Ok(McOutput {
        rows,
        details,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boost::Z_95;
    use crate::functionals::missing_mean_functional;
    use crate::regress::FnPredictor;

    #[test]
    fn integrand_hand_value_at_origin() {
        assert!((partial_derivative_x1(&[0.0, 0.0, 0.0]) - 0.7).abs() < 1e-15);
    }

    #[test]
    fn x3_mean_near_zero() {
        let d = draw_dataset(
            &DgpConfig {
                mu: 0.7,
                n: 1_000_000,
                seed: 11,
            },
            false,
        )
        .unwrap();
        let mean: f64 = (0..d.n()).map(|i| d.x().get(i, 2)).sum::<f64>() / d.n() as f64;
        assert!(mean.abs() <= 0.01, "mean X3 = {mean}");
    }

    #[test]
    fn x1_mean_matches_mu() {
        let d = draw_dataset(
            &DgpConfig {
                mu: 1.0,
                n: 1_000_000,
                seed: 12,
            },
            false,
        )
        .unwrap();
        let mean: f64 = (0..d.n()).map(|i| d.x().get(i, 0)).sum::<f64>() / d.n() as f64;
        assert!((mean - 1.0).abs() <= 0.01, "mean X1 = {mean}");
    }

    #[test]
    fn same_seed_bit_identical() {
        let cfg = DgpConfig {
            mu: -0.5,
            n: 50,
            seed: 99,
        };
        let a = draw_dataset(&cfg, true).unwrap();
        let b = draw_dataset(&cfg, true).unwrap();
        assert_eq!(a.x(), b.x());
        assert_eq!(a.y().unwrap(), b.y().unwrap());
        let c = draw_dataset(&cfg, false).unwrap();
        let d = draw_dataset(&cfg, false).unwrap();
        assert_eq!(c.x(), d.x());
        assert!(!c.has_outcomes());
    }

    #[test]
    fn oracle_disjoint_seeds_agree() {
        let a = true_average_derivative(0.0, 1_000_000, 2001).unwrap();
        let b = true_average_derivative(0.0, 1_000_000, 2002).unwrap();
        let combined = (a.std_error * a.std_error + b.std_error * b.std_error).sqrt();
        assert!(
            (a.value - b.value).abs() <= 3.0 * combined,
            "{} vs {} (3se = {})",
            a.value,
            b.value,
            3.0 * combined
        );
    }

    #[test]
    fn oracle_matches_closed_form_at_zero() {
        // E[∂f/∂x₁] at μ = 0 is exactly 0.7: the sin and x·cos terms have
        // mean e^(-1/2)·μ·cos(μ) = 0, E[σ(X₂)] = 1/2 by symmetry, E[X₃] = 0
        let est = true_average_derivative(0.0, 2_000_000, 77).unwrap();
        assert!(
            (est.value - 0.7).abs() <= 4.0 * est.std_error,
            "{} vs 0.7 (4se = {})",
            est.value,
            4.0 * est.std_error
        );
    }

    #[test]
    fn oracle_symmetry_sum() {
        // truth(1) + truth(−1) = 1.4 exactly (sigmoid antisymmetry)
        let a = true_average_derivative(1.0, 2_000_000, 78).unwrap();
        let b = true_average_derivative(-1.0, 2_000_000, 79).unwrap();
        let combined = (a.std_error * a.std_error + b.std_error * b.std_error).sqrt();
        assert!(
            (a.value + b.value - 1.4).abs() <= 4.0 * combined,
            "{} + {} vs 1.4",
            a.value,
            b.value
        );
    }

    #[test]
    fn frozen_truths_within_oracle_noise() {
        for (mu, seed) in [(-1.0, 501u64), (0.0, 502), (1.0, 503)] {
            let frozen = frozen_truth(mu).unwrap();
            let fresh = true_average_derivative(mu, 1_000_000, seed).unwrap();
            assert!(
                (fresh.value - frozen).abs() <= 4.0 * fresh.std_error,
                "mu {mu}: frozen {frozen} vs fresh {} (4se {})",
                fresh.value,
                4.0 * fresh.std_error
            );
        }
    }

    #[test]
    fn oracle_rejects_small_draws() {
        assert!(true_average_derivative(0.0, 1000, 1).is_err());
    }

    #[test]
    fn single_replication_coverage_is_binary() {
        let settings = McSettings {
            d_rff: 40,
            ..Default::default()
        };
        let out = run_monte_carlo(
            &[50],
            &[0.0],
            1,
            424242,
            &settings,
            &[(0.0, frozen_truth(0.0).unwrap())],
        )
        .unwrap();
        assert_eq!(out.rows.len(), 2);
        for row in &out.rows {
            assert!(row.coverage == 0.0 || row.coverage == 1.0);
            assert_eq!(row.replications, 1);
        }
        assert!(out.failures.is_empty());
    }

    #[test]
    fn monte_carlo_deterministic_across_thread_counts() {
        let settings = McSettings {
            d_rff: 30,
            ..Default::default()
        };
        let truths = [(0.0, frozen_truth(0.0).unwrap())];
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| {
                run_monte_carlo(&[50, 80], &[0.0], 3, 777, &settings, &truths).unwrap()
            })
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a.rows.len(), b.rows.len());
        for (ra, rb) in a.rows.iter().zip(&b.rows) {
            assert_eq!(ra.coverage, rb.coverage);
            assert_eq!(ra.mean_ci_width, rb.mean_ci_width);
            assert_eq!(ra.mean_bias, rb.mean_bias);
        }
        for (da, db) in a.details.iter().zip(&b.details) {
            assert_eq!(da.theta_hat, db.theta_hat);
            assert_eq!(da.std_error, db.std_error);
        }
    }

    #[test]
    fn missing_truth_rejected() {
        let settings = McSettings::default();
        let err = run_monte_carlo(&[50], &[0.25], 1, 1, &settings, &[(0.0, 0.7)]);
        assert!(err.is_err());
    }

    #[test]
    fn noiseless_linear_case_always_covers() {
        // zero outcome noise with the truth in the feature span: degenerate
        // CIs still contain the estimand
        use crate::boost::{estimate, fit_boost};
        use rand::rngs::StdRng;
        for seed in 0..20u64 {
            let mut rng = StdRng::seed_from_u64(seed);
            let n = 40;
            let mut rows = Vec::with_capacity(n);
            let mut y = Vec::with_capacity(n);
            for _ in 0..n {
                let a: f64 = rng.gen_range(-2.0..2.0);
                let b: f64 = rng.gen_range(-2.0..2.0);
                rows.push(vec![a, b]);
                y.push(1.5 * a - 0.5 * b);
            }
            let x = DenseMatrix::from_rows(&rows).unwrap();
            let model = fit_boost(
                &x,
                &y,
                Box::new(FnPredictor(|_: &[f64]| 0.0)),
                crate::features::FeatureMap::identity(2),
                1e-10,
            )
            .unwrap();
            let theta = missing_mean_functional(&x).unwrap();
            let est = estimate(&model, &theta).unwrap();
            let truth: f64 = y.iter().sum::<f64>() / n as f64;
            assert!(
                est.ci_low - 1e-7 <= truth && truth <= est.ci_high + 1e-7,
                "seed {seed}: [{}, {}] vs {truth}",
                est.ci_low,
                est.ci_high
            );
        }
    }

    #[test]
    fn z_constant_matches_95_percent() {
        assert!((Z_95 - 1.959964).abs() < 1e-9);
    }
}
