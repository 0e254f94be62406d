//! Once-boosting with ridge regression: a single ridge step on the initial
//! predictor's residuals, plug-in estimation of linear functionals, the
//! influence-function variance, and 95% confidence intervals.

use crate::audit::sample_mae;
use crate::error::{Error, Result};
use crate::features::{apply_feature_map, FeatureMap};
use crate::functionals::{eval_functional, functional_on_features, unit_contributions,
    LinearFunctional};
use crate::linalg::{DenseMatrix, SpdFactorization};
use crate::regress::{ridge_normal_factor, Predictor};
use crate::riesz::equivalence_report_perturbed;

/// Two-sided 95% normal critical value.
pub const Z_95: f64 = 1.959964;

/// Which residuals enter the source-side variance term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarianceResiduals {
    /// y − γ̂_ma(x): the default.
    Boosted,
    /// y − γ̂_init(x): higher-order-equivalent alternative for sensitivity
    /// analysis.
    Initial,
}

/// Boosted model: γ̂_ma(x) = γ̂_init(x) + φ(x)ᵀβ̂_boost, with the regularized
/// factorization cached so every functional needs only one extra solve.
pub struct BoostModel {
    x_p: DenseMatrix,
    y_p: Vec<f64>,
    init: Box<dyn Predictor + Send + Sync>,
    map: FeatureMap,
    phi_p: DenseMatrix,
    resid_init: Vec<f64>,
    beta: Vec<f64>,
    factor: SpdFactorization,
    lambda: f64,
}

impl BoostModel {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn map(&self) -> &FeatureMap {
        &self.map
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn x_train(&self) -> &DenseMatrix {
        &self.x_p
    }

    pub fn y_train(&self) -> &[f64] {
        &self.y_p
    }

    pub fn training_features(&self) -> &DenseMatrix {
        &self.phi_p
    }

    /// Residuals y − γ̂_init(x) the boost step was fit on.
    pub fn init_residuals(&self) -> &[f64] {
        &self.resid_init
    }

    /// Residuals y − γ̂_ma(x) after the boost step.
    pub fn boosted_residuals(&self) -> Result<Vec<f64>> {
        let boost = self.phi_p.matvec(&self.beta)?;
        Ok(self
            .resid_init
            .iter()
            .zip(&boost)
            .map(|(r, b)| r - b)
            .collect())
    }

    /// γ̂_init evaluated on new rows.
    pub fn predict_init(&self, x: &DenseMatrix) -> Result<Vec<f64>> {
        self.init.predict(x)
    }

    /// Sample MAE of the boosted fit on held-out data.
    pub fn holdout_mae(&self, x_holdout: &DenseMatrix, y_holdout: &[f64]) -> Result<f64> {
        crate::audit::holdout_mae(self, &self.map, x_holdout, y_holdout)
    }
}

impl Predictor for BoostModel {
    fn predict(&self, x: &DenseMatrix) -> Result<Vec<f64>> {
        let mut out = self.init.predict(x)?;
        if out.len() != x.rows() {
            return Err(Error::EvaluationFailure(format!(
                "initial predictor returned {} values for {} rows",
                out.len(),
                x.rows()
            )));
        }
        let phi = apply_feature_map(&self.map, x)?;
        let boost = phi.matvec(&self.beta)?;
        for (o, b) in out.iter_mut().zip(&boost) {
            *o += b;
        }
        Ok(out)
    }
}

/// Point estimate with its uncertainty and audit diagnostics.
#[derive(Debug, Clone)]
pub struct PointEstimate {
    pub theta_hat: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_source: usize,
    pub n_target: usize,
    pub mae_before: f64,
    pub mae_after: f64,
    /// |θ(Φ)ᵀβ̂ − (1/n)α̂ᵀz| recomputed through independent factorizations.
    pub equivalence_residual: f64,
    /// Diagnostic: SE from the target-sample variance term alone (no
    /// source-side residual term).
    pub std_error_target_only: f64,
}

/// Fits the boost step: ridge regression of y − γ̂_init(x) on φ(x) under the
/// canonical objective, caching the factorization of (M + λI).
pub fn fit_boost(
    x_p: &DenseMatrix,
    y_p: &[f64],
    init: Box<dyn Predictor + Send + Sync>,
    map: FeatureMap,
    lambda: f64,
) -> Result<BoostModel> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(
            "lambda must be finite and > 0".into(),
        ));
    }
    let n = x_p.rows();
    if n == 0 {
        return Err(Error::EmptyData("boosting needs training rows"));
    }
    if y_p.len() != n {
        return Err(Error::DimensionMismatch {
            context: "outcome length vs covariate rows",
            expected: n,
            got: y_p.len(),
        });
    }
    let init_preds = init.predict(x_p)?;
    if init_preds.len() != n {
        return Err(Error::EvaluationFailure(format!(
            "initial predictor returned {} values for {} rows",
            init_preds.len(),
            n
        )));
    }
    if init_preds.iter().any(|v| !v.is_finite()) {
        return Err(Error::EvaluationFailure(
            "initial predictor returned non-finite values".into(),
        ));
    }
    let resid_init: Vec<f64> = y_p.iter().zip(&init_preds).map(|(y, p)| y - p).collect();
    let phi_p = apply_feature_map(&map, x_p)?;
    let factor = ridge_normal_factor(&phi_p, lambda)?;
    let mut rhs = phi_p.tr_matvec(&resid_init)?;
    for v in rhs.iter_mut() {
        *v /= n as f64;
    }
    let beta = factor.solve_vec(&rhs)?;
    Ok(BoostModel {
        x_p: x_p.clone(),
        y_p: y_p.to_vec(),
        init,
        map,
        phi_p,
        resid_init,
        beta,
        factor,
        lambda,
    })
}

fn population_variance(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    if values.is_empty() {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n
}

/// Plug-in θ̂(f) with the target-sample-only standard error — the naive
/// estimator that performs no bias correction.
pub fn plugin_estimate<P: Predictor + ?Sized>(
    predictor: &P,
    theta: &LinearFunctional,
) -> Result<(f64, f64)> {
    let theta_hat = eval_functional(theta, predictor)?;
    let contribs = unit_contributions(theta, predictor)?;
    let se = (population_variance(&contribs) / contribs.len() as f64).sqrt();
    Ok((theta_hat, se))
}

/// Estimates θ(γ₀) by θ̂(γ̂_ma) with the two-sample influence-function
/// standard error SE² = S_q²/n_q + S_p²/n_p: S_q² is the variance of the
/// per-unit functional contributions over the target units, S_p² the
/// variance of α̂(xᵢ)·(yᵢ − γ̂(xᵢ)) over the source rows.
pub fn estimate_with(
    model: &BoostModel,
    theta: &LinearFunctional,
    variance_residuals: VarianceResiduals,
) -> Result<PointEstimate> {
    if theta.input_dim() != model.x_p.cols() {
        return Err(Error::DimensionMismatch {
            context: "functional anchors vs training covariates",
            expected: model.x_p.cols(),
            got: theta.input_dim(),
        });
    }
    let n_p = model.x_p.rows();
    let theta_hat = eval_functional(theta, model)?;

    // Riesz representer from the shared factorization: one extra solve
    let theta_phi = functional_on_features(theta, &model.map)?;
    let eta = model.factor.solve_vec(&theta_phi)?;
    let alpha = model.phi_p.matvec(&eta)?;

    let boosted_resid = model.boosted_residuals()?;
    let var_resid: &[f64] = match variance_residuals {
        VarianceResiduals::Boosted => &boosted_resid,
        VarianceResiduals::Initial => &model.resid_init,
    };
    let source_scores: Vec<f64> = alpha
        .iter()
        .zip(var_resid)
        .map(|(a, r)| a * r)
        .collect();
    let s_p2 = population_variance(&source_scores);

    let contribs = unit_contributions(theta, model)?;
    let n_q = contribs.len();
    let s_q2 = population_variance(&contribs);

    let var = s_q2 / n_q as f64 + s_p2 / n_p as f64;
    let std_error = var.sqrt();
    let std_error_target_only = (s_q2 / n_q as f64).sqrt();

    let equivalence_residual = equivalence_report_perturbed(
        &model.phi_p,
        &model.resid_init,
        &theta_phi,
        model.lambda,
        0.0,
    )?
    .discrepancy;

    let mae_before = sample_mae(&model.phi_p, &model.resid_init)?;
    let mae_after = sample_mae(&model.phi_p, &boosted_resid)?;

    Ok(PointEstimate {
        theta_hat,
        std_error,
        ci_low: theta_hat - Z_95 * std_error,
        ci_high: theta_hat + Z_95 * std_error,
        n_source: n_p,
        n_target: n_q,
        mae_before,
        mae_after,
        equivalence_residual,
        std_error_target_only,
    })
}

/// [`estimate_with`] using boosted residuals in the variance (the default).
pub fn estimate(model: &BoostModel, theta: &LinearFunctional) -> Result<PointEstimate> {
    estimate_with(model, theta, VarianceResiduals::Boosted)
}

/// One functional's slot in a profile run.
pub struct ProfileEntry {
    pub label: String,
    pub outcome: Result<PointEstimate>,
}

/// Estimates a whole family of functionals from one fitted model, reusing
/// the cached factorization. Failures are reported per entry.
pub fn profile(model: &BoostModel, family: &[LinearFunctional]) -> Result<Vec<ProfileEntry>> {
    if family.is_empty() {
        return Err(Error::EmptyData("profile needs at least one functional"));
    }
    Ok(family
        .iter()
        .map(|theta| ProfileEntry {
            label: theta.label().to_string(),
            outcome: estimate(model, theta),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{sample_rff, Kernel};
    use crate::functionals::{
        average_derivative_functional, counterfactual_mean_functional, missing_mean_functional,
        DiffSpec,
    };
    use crate::regress::{
        default_lambda, fit_krr_centered, fit_ridge_primal, FnPredictor,
    };
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use rand_distr::{Distribution, StandardNormal};

    fn random_matrix(seed: u64, rows: usize, cols: usize) -> DenseMatrix {
        let mut rng = StdRng::seed_from_u64(seed);
        let data: Vec<f64> = (0..rows * cols).map(|_| rng.gen_range(-2.0..2.0)).collect();
        DenseMatrix::new(rows, cols, data).unwrap()
    }

    fn random_vec(seed: u64, n: usize) -> Vec<f64> {
        let mut rng = StdRng::seed_from_u64(seed);
        (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect()
    }

    #[test]
    fn interpolating_init_means_zero_boost() {
        let x = random_matrix(1, 12, 2);
        let f = FnPredictor(|r: &[f64]| r[0] * 2.0 - r[1]);
        let y = f.predict(&x).unwrap();
        let model = fit_boost(&x, &y, Box::new(f), FeatureMap::identity(2), 0.3).unwrap();
        assert!(model.beta().iter().all(|&b| b == 0.0));
        let probe = random_matrix(2, 5, 2);
        let ma = model.predict(&probe).unwrap();
        let init = model.predict_init(&probe).unwrap();
        assert_eq!(ma, init);
    }

    #[test]
    fn zero_init_reduces_to_plain_ridge() {
        let x = random_matrix(3, 20, 3);
        let y = random_vec(4, 20);
        let lambda = 0.4;
        let model = fit_boost(
            &x,
            &y,
            Box::new(FnPredictor(|_: &[f64]| 0.0)),
            FeatureMap::identity(3),
            lambda,
        )
        .unwrap();
        let plain = fit_ridge_primal(&x, &y, lambda, FeatureMap::identity(3)).unwrap();
        let probe = random_matrix(5, 7, 3);
        let a = model.predict(&probe).unwrap();
        let b = plain.predict(&probe).unwrap();
        for (x1, x2) in a.iter().zip(&b) {
            assert!((x1 - x2).abs() <= 1e-12);
        }
    }

    #[test]
    fn boosting_does_not_increase_training_mse() {
        for seed in 0..10u64 {
            let x = random_matrix(seed + 10, 25, 3);
            let y = random_vec(seed + 50, 25);
            // deliberately bad init: a fixed affine function
            let init = FnPredictor(|r: &[f64]| 0.5 * r[0] + 1.0);
            let model =
                fit_boost(&x, &y, Box::new(init), FeatureMap::identity(3), 0.1).unwrap();
            let mse_init: f64 = model
                .init_residuals()
                .iter()
                .map(|r| r * r)
                .sum::<f64>()
                / 25.0;
            let post = model.boosted_residuals().unwrap();
            let mse_post: f64 = post.iter().map(|r| r * r).sum::<f64>() / 25.0;
            assert!(mse_post <= mse_init + 1e-12, "seed {seed}");
        }
    }

    #[test]
    fn noiseless_exact_init_gives_mean_and_zero_source_variance() {
        let x = random_matrix(20, 15, 2);
        let truth = FnPredictor(|r: &[f64]| 3.0 * r[0] - r[1]);
        let y = truth.predict(&x).unwrap();
        let model =
            fit_boost(&x, &y, Box::new(truth), FeatureMap::identity(2), 0.5).unwrap();
        let theta = missing_mean_functional(&x).unwrap();
        let est = estimate(&model, &theta).unwrap();
        let mean_y: f64 = y.iter().sum::<f64>() / 15.0;
        assert!((est.theta_hat - mean_y).abs() <= 1e-10);
        // residuals are exactly zero, so the source-side term vanishes
        assert!(est.std_error_target_only <= est.std_error + 1e-15);
        let source_term = est.std_error * est.std_error
            - est.std_error_target_only * est.std_error_target_only;
        assert!(source_term.abs() <= 1e-20, "source term {source_term}");
    }

    #[test]
    fn zero_weight_functional_zero_estimate() {
        let x = random_matrix(21, 10, 2);
        let y = random_vec(22, 10);
        let model = fit_boost(
            &x,
            &y,
            Box::new(FnPredictor(|_: &[f64]| 0.0)),
            FeatureMap::identity(2),
            0.3,
        )
        .unwrap();
        let theta = LinearFunctional::new(
            random_matrix(23, 4, 2),
            vec![0.0; 4],
            (0..4).collect(),
            "zero",
        )
        .unwrap();
        let est = estimate(&model, &theta).unwrap();
        assert_eq!(est.theta_hat, 0.0);
        assert_eq!(est.std_error, 0.0);
        assert_eq!(est.ci_low, 0.0);
        assert_eq!(est.ci_high, 0.0);
    }

    #[test]
    fn ci_geometry() {
        let x = random_matrix(24, 30, 2);
        let y = random_vec(25, 30);
        let model = fit_boost(
            &x,
            &y,
            Box::new(FnPredictor(|r: &[f64]| r[0])),
            FeatureMap::identity(2),
            0.2,
        )
        .unwrap();
        let theta = missing_mean_functional(&random_matrix(26, 12, 2)).unwrap();
        let est = estimate(&model, &theta).unwrap();
        assert!(est.ci_low <= est.theta_hat && est.theta_hat <= est.ci_high);
        let half = 0.5 * (est.ci_high - est.ci_low);
        assert!((half - Z_95 * est.std_error).abs() <= 1e-12);
        assert!(est.std_error >= 0.0);
    }

    #[test]
    fn double_robust_decomposition_identity() {
        // θ̂(γ̂_ma) − θ̂(γ̂_init) = (1/n)·α̂ᵀ(y − γ̂_init(x))
        let x = random_matrix(27, 40, 3);
        let y = random_vec(28, 40);
        let init = FnPredictor(|r: &[f64]| 0.3 * r[1]);
        let lambda = 0.15;
        let map = FeatureMap::polynomial(3, 2, true).unwrap();
        let model = fit_boost(&x, &y, Box::new(init), map.clone(), lambda).unwrap();
        for theta in [
            missing_mean_functional(&random_matrix(29, 9, 3)).unwrap(),
            average_derivative_functional(
                &random_matrix(30, 9, 3),
                DiffSpec::new(0, 0.2).unwrap(),
            )
            .unwrap(),
            counterfactual_mean_functional(&random_matrix(31, 9, 3), 1, 0.5).unwrap(),
        ] {
            let est = estimate(&model, &theta).unwrap();
            let init_value =
                eval_functional(&theta, &FnPredictor(|r: &[f64]| 0.3 * r[1])).unwrap();
            let theta_phi = functional_on_features(&theta, &map).unwrap();
            let eta = model.factor.solve_vec(&theta_phi).unwrap();
            let alpha = model.phi_p.matvec(&eta).unwrap();
            let correction: f64 = alpha
                .iter()
                .zip(model.init_residuals())
                .map(|(a, r)| a * r)
                .sum::<f64>()
                / 40.0;
            assert!(
                (est.theta_hat - init_value - correction).abs()
                    <= 1e-8 * (1.0 + est.theta_hat.abs()),
                "{}: {} vs {}",
                theta.label(),
                est.theta_hat - init_value,
                correction
            );
            assert!(
                est.equivalence_residual <= 1e-8 * (1.0 + est.theta_hat.abs()),
                "{}: equivalence residual {}",
                theta.label(),
                est.equivalence_residual
            );
        }
    }

    #[test]
    fn shift_equivariance_mean_functionals() {
        let x = random_matrix(33, 40, 3);
        let y = random_vec(34, 40);
        let shifted: Vec<f64> = y.iter().map(|v| v + 5.0).collect();
        let x_q = random_matrix(35, 15, 3);
        let lambda = default_lambda(40);
        let bw = 1.2;
        let kernel = Kernel::Rbf { bandwidth: bw };
        let map = sample_rff(bw, 3, 30, 9).unwrap();
        let build = |targets: &[f64]| {
            let init = fit_krr_centered(&x, targets, kernel, lambda).unwrap();
            fit_boost(&x, targets, Box::new(init), map.clone(), lambda).unwrap()
        };
        let m0 = build(&y);
        let m1 = build(&shifted);
        for theta in [
            missing_mean_functional(&x_q).unwrap(),
            counterfactual_mean_functional(&x_q, 2, 0.25).unwrap(),
        ] {
            let e0 = estimate(&m0, &theta).unwrap();
            let e1 = estimate(&m1, &theta).unwrap();
            assert!(
                (e0.theta_hat + 5.0 - e1.theta_hat).abs() <= 1e-8,
                "{}: {} vs {}",
                theta.label(),
                e0.theta_hat + 5.0,
                e1.theta_hat
            );
        }
        let deriv =
            average_derivative_functional(&x_q, DiffSpec::new(0, 0.3).unwrap()).unwrap();
        let e0 = estimate(&m0, &deriv).unwrap();
        let e1 = estimate(&m1, &deriv).unwrap();
        assert!((e0.theta_hat - e1.theta_hat).abs() <= 1e-8);
    }

    #[test]
    fn profile_matches_estimate_and_permutes() {
        let x = random_matrix(36, 30, 2);
        let y = random_vec(37, 30);
        let model = fit_boost(
            &x,
            &y,
            Box::new(FnPredictor(|r: &[f64]| r[0])),
            FeatureMap::identity(2),
            0.25,
        )
        .unwrap();
        let f1 = missing_mean_functional(&random_matrix(38, 8, 2)).unwrap();
        let f2 = counterfactual_mean_functional(&random_matrix(39, 8, 2), 0, 1.0).unwrap();
        let single = profile(&model, std::slice::from_ref(&f1)).unwrap();
        let direct = estimate(&model, &f1).unwrap();
        let entry = single[0].outcome.as_ref().unwrap();
        assert_eq!(entry.theta_hat, direct.theta_hat);
        assert_eq!(entry.std_error, direct.std_error);

        let fwd = profile(&model, &[f1.clone(), f2.clone()]).unwrap();
        let rev = profile(&model, &[f2, f1]).unwrap();
        assert_eq!(
            fwd[0].outcome.as_ref().unwrap().theta_hat,
            rev[1].outcome.as_ref().unwrap().theta_hat
        );
        assert_eq!(
            fwd[1].outcome.as_ref().unwrap().theta_hat,
            rev[0].outcome.as_ref().unwrap().theta_hat
        );
    }

    #[test]
    fn counterfactual_grid_tracks_synthetic_truth() {
        // y = 100 − age + small noise, so the counterfactual mean at age a is
        // 100 − a. Ages are standardized before fitting (monomial features on
        // the raw 60–95 scale are nearly collinear) and the grid is expressed
        // in the same standardized units.
        let mut rng = StdRng::seed_from_u64(40);
        let n = 150;
        let mut ages = Vec::with_capacity(n);
        let mut others = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        for _ in 0..n {
            let age: f64 = rng.gen_range(60.0..95.0);
            let other: f64 = rng.gen_range(-1.0..1.0);
            let noise: f64 = StandardNormal.sample(&mut rng);
            ages.push(age);
            others.push(other);
            y.push(100.0 - age + 0.5 * noise);
        }
        let mean = ages.iter().sum::<f64>() / n as f64;
        let sd = (ages.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
        let rows: Vec<Vec<f64>> = ages
            .iter()
            .zip(&others)
            .map(|(a, o)| vec![(a - mean) / sd, *o])
            .collect();
        let x = DenseMatrix::from_rows(&rows).unwrap();
        let lambda = default_lambda(n);
        let init = fit_krr_centered(&x, &y, Kernel::Linear, lambda).unwrap();
        let map = FeatureMap::polynomial(2, 2, true).unwrap();
        let model = fit_boost(&x, &y, Box::new(init), map, lambda).unwrap();
        let family: Vec<LinearFunctional> = (65..90)
            .map(|a| counterfactual_mean_functional(&x, 0, (a as f64 - mean) / sd).unwrap())
            .collect();
        let entries = profile(&model, &family).unwrap();
        assert_eq!(entries.len(), 25);
        for (a, entry) in (65..90).zip(&entries) {
            let est = entry.outcome.as_ref().unwrap();
            let truth = 100.0 - a as f64;
            assert!(
                (est.theta_hat - truth).abs() <= 2.0 * est.std_error + 0.25,
                "a = {a}: {} vs {truth} (se {})",
                est.theta_hat,
                est.std_error
            );
        }
    }

    #[test]
    fn ci_width_shrinks_with_sample_size() {
        // same synthetic DGP at n and 2n: mean CI width ratio in [0.6, 0.82]
        let widths = |n: usize, base: u64| -> f64 {
            let mut total = 0.0;
            for rep in 0..100u64 {
                let mut rng = StdRng::seed_from_u64(base + rep);
                let mut rows = Vec::with_capacity(n);
                let mut y = Vec::with_capacity(n);
                for _ in 0..n {
                    let a: f64 = StandardNormal.sample(&mut rng);
                    let b: f64 = StandardNormal.sample(&mut rng);
                    let noise: f64 = StandardNormal.sample(&mut rng);
                    rows.push(vec![a, b]);
                    y.push(a.sin() + 0.5 * b + noise);
                }
                let x = DenseMatrix::from_rows(&rows).unwrap();
                let lambda = default_lambda(n);
                let model = fit_boost(
                    &x,
                    &y,
                    Box::new(FnPredictor(|_: &[f64]| 0.0)),
                    FeatureMap::polynomial(2, 2, true).unwrap(),
                    lambda,
                )
                .unwrap();
                let theta = missing_mean_functional(&x).unwrap();
                let est = estimate(&model, &theta).unwrap();
                total += est.ci_high - est.ci_low;
            }
            total / 100.0
        };
        let w1 = widths(100, 1000);
        let w2 = widths(200, 5000);
        let ratio = w2 / w1;
        assert!(
            (0.6..=0.82).contains(&ratio),
            "width ratio {ratio} ({w2} / {w1})"
        );
    }

    #[test]
    fn variance_residual_flag_changes_only_source_term() {
        let x = random_matrix(41, 35, 2);
        let y = random_vec(42, 35);
        let model = fit_boost(
            &x,
            &y,
            Box::new(FnPredictor(|r: &[f64]| 0.4 * r[0])),
            FeatureMap::identity(2),
            0.2,
        )
        .unwrap();
        let theta = missing_mean_functional(&random_matrix(43, 10, 2)).unwrap();
        let a = estimate_with(&model, &theta, VarianceResiduals::Boosted).unwrap();
        let b = estimate_with(&model, &theta, VarianceResiduals::Initial).unwrap();
        assert_eq!(a.theta_hat, b.theta_hat);
        assert_eq!(a.std_error_target_only, b.std_error_target_only);
        assert_ne!(a.std_error, b.std_error);
    }

    #[test]
    fn empty_family_rejected() {
        let x = random_matrix(44, 10, 2);
        let y = random_vec(45, 10);
        let model = fit_boost(
            &x,
            &y,
            Box::new(FnPredictor(|_: &[f64]| 0.0)),
            FeatureMap::identity(2),
            0.1,
        )
        .unwrap();
        assert!(profile(&model, &[]).is_err());
    }
}
