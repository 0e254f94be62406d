//! Ridge regression under the canonical objective
//! J(h) = (1/n)·Σᵢ(zᵢ − h(xᵢ))² + λ‖h‖², in primal (explicit feature) and
//! dual (Gram) form. The two normalizations are matched so both paths solve
//! the same problem: β̂ = (M + λI)⁻¹(1/n)Φᵀz with M = (1/n)ΦᵀΦ, and
//! c = (K + nλI)⁻¹z.

use crate::error::{Error, Result};
use crate::features::{apply_feature_map, gram, FeatureMap, Kernel};
use crate::linalg::{DenseMatrix, SpdFactorization};

/// Anything that maps raw covariate rows to predictions.
pub trait Predictor: Send + Sync {
    fn predict(&self, x: &DenseMatrix) -> Result<Vec<f64>>;
}

impl<P: Predictor + ?Sized> Predictor for &P {
    fn predict(&self, x: &DenseMatrix) -> Result<Vec<f64>> {
        (**self).predict(x)
    }
}

impl Predictor for Box<dyn Predictor + Send + Sync> {
    fn predict(&self, x: &DenseMatrix) -> Result<Vec<f64>> {
        (**self).predict(x)
    }
}

/// Wraps a plain function as a predictor (handy for known regression
/// functions and the zero initializer).
pub struct FnPredictor<F: Fn(&[f64]) -> f64 + Send + Sync>(pub F);

impl<F: Fn(&[f64]) -> f64 + Send + Sync> Predictor for FnPredictor<F> {
    fn predict(&self, x: &DenseMatrix) -> Result<Vec<f64>> {
        Ok((0..x.rows()).map(|i| (self.0)(x.row(i))).collect())
    }
}

/// Default regularization strength λ = n^(-1/2).
pub fn default_lambda(n: usize) -> f64 {
    1.0 / (n as f64).sqrt()
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(
            "lambda must be finite and > 0".into(),
        ));
    }
    Ok(())
}

fn check_finite(z: &[f64], what: &'static str) -> Result<()> {
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("{what} must be finite")));
    }
    Ok(())
}

/// Factors the ridge normal matrix M + λI with M = (1/n)ΦᵀΦ.
pub fn ridge_normal_factor(phi: &DenseMatrix, lambda: f64) -> Result<SpdFactorization> {
    check_lambda(lambda)?;
    if phi.rows() == 0 {
        return Err(Error::EmptyData("ridge fit needs at least one row"));
    }
    let mut m = phi.t_times_self_scaled(1.0 / phi.rows() as f64);
    for i in 0..m.rows() {
        m.set(i, i, m.get(i, i) + lambda);
    }
    crate::linalg::factor_spd(&m, 0.0)
}

/// Ridge fit in explicit feature space.
#[derive(Debug, Clone)]
pub struct RidgeFitPrimal {
    beta: Vec<f64>,
    lambda: f64,
    n_train: usize,
    map: FeatureMap,
}

impl RidgeFitPrimal {
    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn n_train(&self) -> usize {
        self.n_train
    }

    pub fn map(&self) -> &FeatureMap {
        &self.map
    }

    /// Predictions from already-featurized rows.
    pub fn predict_features(&self, phi: &DenseMatrix) -> Result<Vec<f64>> {
        phi.matvec(&self.beta)
    }
}

impl Predictor for RidgeFitPrimal {
    fn predict(&self, x: &DenseMatrix) -> Result<Vec<f64>> {
        let phi = apply_feature_map(&self.map, x)?;
        phi.matvec(&self.beta)
    }
}

/// Fits β̂ = (M + λI)⁻¹(1/n)Φᵀz. The map is carried along so the fit can
/// predict from raw covariates.
pub fn fit_ridge_primal(
    phi: &DenseMatrix,
    z: &[f64],
    lambda: f64,
    map: FeatureMap,
) -> Result<RidgeFitPrimal> {
    check_lambda(lambda)?;
    check_finite(z, "targets")?;
    let n = phi.rows();
    if z.len() != n {
        return Err(Error::DimensionMismatch {
            context: "target length vs feature rows",
            expected: n,
            got: z.len(),
        });
    }
    if map.output_dim() != phi.cols() {
        return Err(Error::DimensionMismatch {
            context: "feature map output dim vs feature columns",
            expected: phi.cols(),
            got: map.output_dim(),
        });
    }
    let factor = ridge_normal_factor(phi, lambda)?;
    let mut rhs = phi.tr_matvec(z)?;
    for v in rhs.iter_mut() {
        *v /= n as f64;
    }
    let beta = factor.solve_vec(&rhs)?;
    Ok(RidgeFitPrimal {
        beta,
        lambda,
        n_train: n,
        map,
    })
}

/// Ridge fit in dual (kernel) form.
#[derive(Debug, Clone)]
pub struct RidgeFitDual {
    coeffs: Vec<f64>,
    lambda: f64,
    anchors: DenseMatrix,
    kernel: Kernel,
}

impl RidgeFitDual {
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn anchors(&self) -> &DenseMatrix {
        &self.anchors
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }
}

impl Predictor for RidgeFitDual {
    fn predict(&self, x: &DenseMatrix) -> Result<Vec<f64>> {
        let k = gram(&self.kernel, x, &self.anchors)?;
        k.matvec(&self.coeffs)
    }
}

/// Fits c = (K + nλI)⁻¹z. The anchors are the training rows K was built
/// from; they are carried along for prediction.
pub fn fit_ridge_dual(
    k: &DenseMatrix,
    z: &[f64],
    lambda: f64,
    anchors: DenseMatrix,
    kernel: Kernel,
) -> Result<RidgeFitDual> {
    check_lambda(lambda)?;
    check_finite(z, "targets")?;
    let n = k.rows();
    if k.cols() != n {
        return Err(Error::DimensionMismatch {
            context: "gram matrix must be square",
            expected: n,
            got: k.cols(),
        });
    }
    if z.len() != n || anchors.rows() != n {
        return Err(Error::DimensionMismatch {
            context: "targets/anchors vs gram size",
            expected: n,
            got: if z.len() != n { z.len() } else { anchors.rows() },
        });
    }
    let mut system = k.clone();
    let ridge = n as f64 * lambda;
    for i in 0..n {
        system.set(i, i, system.get(i, i) + ridge);
    }
    let factor = crate::linalg::factor_spd(&system, 0.0)?;
    let coeffs = factor.solve_vec(z)?;
    Ok(RidgeFitDual {
        coeffs,
        lambda,
        anchors,
        kernel,
    })
}

/// Predictions from a fitted model on new raw covariate rows.
pub fn predict<P: Predictor>(fit: &P, x_new: &DenseMatrix) -> Result<Vec<f64>> {
    fit.predict(x_new)
}

/// Kernel ridge regression with an intercept: the outcome mean is removed
/// before the dual fit and added back at prediction, so fits are exactly
/// equivariant under constant shifts of the outcomes.
#[derive(Debug, Clone)]
pub struct CenteredKrr {
    intercept: f64,
    dual: RidgeFitDual,
}

impl CenteredKrr {
    pub fn intercept(&self) -> f64 {
        self.intercept
    }

    pub fn dual(&self) -> &RidgeFitDual {
        &self.dual
    }
}

impl Predictor for CenteredKrr {
    fn predict(&self, x: &DenseMatrix) -> Result<Vec<f64>> {
        let mut out = self.dual.predict(x)?;
        for v in out.iter_mut() {
            *v += self.intercept;
        }
        Ok(out)
    }
}

/// Fits centered kernel ridge regression of y on x (the default initial
/// predictor for boosting).
pub fn fit_krr_centered(
    x: &DenseMatrix,
    y: &[f64],
    kernel: Kernel,
    lambda: f64,
) -> Result<CenteredKrr> {
    if x.rows() == 0 {
        return Err(Error::EmptyData("kernel ridge needs at least one row"));
    }
    check_finite(y, "outcomes")?;
    if y.len() != x.rows() {
        return Err(Error::DimensionMismatch {
            context: "outcome length vs covariate rows",
            expected: x.rows(),
            got: y.len(),
        });
    }
    let intercept = y.iter().sum::<f64>() / y.len() as f64;
    let centered: Vec<f64> = y.iter().map(|v| v - intercept).collect();
    let k = gram(&kernel, x, x)?;
    let dual = fit_ridge_dual(&k, &centered, lambda, x.clone(), kernel)?;
    Ok(CenteredKrr { intercept, dual })
}

/// Canonical training objective (1/n)‖z − Φβ‖² + λ‖β‖².
pub fn ridge_objective(phi: &DenseMatrix, z: &[f64], lambda: f64, beta: &[f64]) -> Result<f64> {
    let pred = phi.matvec(beta)?;
    let n = phi.rows() as f64;
    let rss: f64 = pred
        .iter()
        .zip(z)
        .map(|(p, t)| (t - p) * (t - p))
        .sum::<f64>();
    let penalty: f64 = beta.iter().map(|b| b * b).sum();
    Ok(rss / n + lambda * penalty)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_matrix(seed: u64, rows: usize, cols: usize) -> DenseMatrix {
        let mut rng = StdRng::seed_from_u64(seed);
        let data: Vec<f64> = (0..rows * cols).map(|_| rng.gen_range(-2.0..2.0)).collect();
        DenseMatrix::new(rows, cols, data).unwrap()
    }

    fn random_vec(seed: u64, n: usize) -> Vec<f64> {
        let mut rng = StdRng::seed_from_u64(seed);
        (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect()
    }

    fn norm(v: &[f64]) -> f64 {
        v.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    #[test]
    fn primal_two_point_hand_solve() {
        // M = 1, (1/n)Φᵀz = 1, so (1+1)β = 1
        let phi = DenseMatrix::new(2, 1, vec![1.0, 1.0]).unwrap();
        let fit = fit_ridge_primal(&phi, &[2.0, 0.0], 1.0, FeatureMap::identity(1)).unwrap();
        assert!((fit.beta()[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_targets_zero_beta() {
        let phi = random_matrix(1, 10, 3);
        let fit = fit_ridge_primal(&phi, &[0.0; 10], 0.7, FeatureMap::identity(3)).unwrap();
        assert!(norm(fit.beta()) == 0.0);
        let preds = fit.predict(&random_matrix(2, 5, 3)).unwrap();
        assert!(preds.iter().all(|&p| p == 0.0));
    }

    #[test]
    fn heavy_shrinkage_kills_beta() {
        let phi = random_matrix(3, 20, 4);
        let z = random_vec(4, 20);
        let mut rhs = phi.tr_matvec(&z).unwrap();
        for v in rhs.iter_mut() {
            *v /= 20.0;
        }
        let fit = fit_ridge_primal(&phi, &z, 1e9, FeatureMap::identity(4)).unwrap();
        assert!(norm(fit.beta()) <= 1e-6 * norm(&rhs));
    }

    #[test]
    fn dual_scalar_case() {
        let k = DenseMatrix::identity(1);
        let anchors = DenseMatrix::new(1, 1, vec![0.0]).unwrap();
        let fit = fit_ridge_dual(&k, &[2.0], 1.0, anchors, Kernel::Linear).unwrap();
        assert!((fit.coeffs()[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dual_zero_targets() {
        let x = random_matrix(5, 8, 2);
        let k = gram(&Kernel::Rbf { bandwidth: 1.0 }, &x, &x).unwrap();
        let fit =
            fit_ridge_dual(&k, &[0.0; 8], 0.3, x.clone(), Kernel::Rbf { bandwidth: 1.0 }).unwrap();
        assert!(fit.coeffs().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn linear_kernel_dual_matches_identity_primal() {
        let x = random_matrix(7, 30, 3);
        let z = random_vec(8, 30);
        let lambda = 0.2;
        let primal = fit_ridge_primal(
            &apply_feature_map(&FeatureMap::identity(3), &x).unwrap(),
            &z,
            lambda,
            FeatureMap::identity(3),
        )
        .unwrap();
        let k = gram(&Kernel::Linear, &x, &x).unwrap();
        let dual = fit_ridge_dual(&k, &z, lambda, x.clone(), Kernel::Linear).unwrap();
        let x_new = random_matrix(9, 12, 3);
        let p1 = primal.predict(&x_new).unwrap();
        let p2 = dual.predict(&x_new).unwrap();
        for (a, b) in p1.iter().zip(&p2) {
            assert!((a - b).abs() <= 1e-8 * (1.0 + a.abs()), "{a} vs {b}");
        }
    }

    #[test]
    fn interpolation_in_low_lambda_limit() {
        let phi = random_matrix(11, 8, 8);
        let z = random_vec(12, 8);
        let fit = fit_ridge_primal(&phi, &z, 1e-10, FeatureMap::identity(8)).unwrap();
        let preds = fit.predict_features(&phi).unwrap();
        for (p, t) in preds.iter().zip(&z) {
            assert!((p - t).abs() <= 1e-4, "{p} vs {t}");
        }
    }

    #[test]
    fn polynomial_primal_dual_agreement() {
        for degree in 1..=3u32 {
            let x = random_matrix(20 + degree as u64, 40, 3);
            let z = random_vec(30 + degree as u64, 40);
            let lambda = 0.05;
            let map = FeatureMap::scaled_monomial(3, degree, 1.0).unwrap();
            let phi = apply_feature_map(&map, &x).unwrap();
            let primal = fit_ridge_primal(&phi, &z, lambda, map).unwrap();
            let kernel = Kernel::Polynomial {
                degree,
                offset: 1.0,
            };
            let k = gram(&kernel, &x, &x).unwrap();
            let dual = fit_ridge_dual(&k, &z, lambda, x.clone(), kernel).unwrap();
            let x_new = random_matrix(40 + degree as u64, 15, 3);
            let p1 = primal.predict(&x_new).unwrap();
            let p2 = dual.predict(&x_new).unwrap();
            let max_diff = p1
                .iter()
                .zip(&p2)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            assert!(max_diff <= 1e-6, "degree {degree}: max diff {max_diff}");
        }
    }

    #[test]
    fn centered_krr_shift_equivariant() {
        let x = random_matrix(50, 25, 3);
        let y = random_vec(51, 25);
        let shifted: Vec<f64> = y.iter().map(|v| v + 7.5).collect();
        let kernel = Kernel::Rbf { bandwidth: 1.0 };
        let lambda = default_lambda(25);
        let f0 = fit_krr_centered(&x, &y, kernel, lambda).unwrap();
        let f1 = fit_krr_centered(&x, &shifted, kernel, lambda).unwrap();
        let x_new = random_matrix(52, 10, 3);
        let p0 = f0.predict(&x_new).unwrap();
        let p1 = f1.predict(&x_new).unwrap();
        for (a, b) in p0.iter().zip(&p1) {
            assert!((a + 7.5 - b).abs() <= 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn invalid_lambda_rejected() {
        let phi = random_matrix(60, 5, 2);
        let z = random_vec(61, 5);
        for bad in [0.0, -1.0, f64::NAN] {
            assert!(fit_ridge_primal(&phi, &z, bad, FeatureMap::identity(2)).is_err());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn monotone_shrinkage(seed in 0u64..500, l1 in 0.01f64..1.0, ratio in 1.0f64..100.0) {
            let phi = random_matrix(seed, 15, 4);
            let z = random_vec(seed + 1000, 15);
            let l2 = l1 * ratio;
            let f1 = fit_ridge_primal(&phi, &z, l1, FeatureMap::identity(4)).unwrap();
            let f2 = fit_ridge_primal(&phi, &z, l2, FeatureMap::identity(4)).unwrap();
            prop_assert!(norm(f2.beta()) <= norm(f1.beta()) * (1.0 + 1e-12));
        }

        #[test]
        fn objective_optimality(seed in 0u64..200) {
            let phi = random_matrix(seed, 12, 3);
            let z = random_vec(seed + 2000, 12);
            let lambda = 0.3;
            let fit = fit_ridge_primal(&phi, &z, lambda, FeatureMap::identity(3)).unwrap();
            let at_fit = ridge_objective(&phi, &z, lambda, fit.beta()).unwrap();
            let at_zero = ridge_objective(&phi, &z, lambda, &[0.0; 3]).unwrap();
            prop_assert!(at_fit <= at_zero + 1e-12);
            let mut rng = StdRng::seed_from_u64(seed + 4000);
            for _ in 0..100 {
                let mut delta: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let dn = norm(&delta);
                let perturbed: Vec<f64> = fit
                    .beta()
                    .iter()
                    .zip(delta.iter_mut())
                    .map(|(b, d)| b + *d * 1e-3 / dn)
                    .collect();
                let at_perturbed = ridge_objective(&phi, &z, lambda, &perturbed).unwrap();
                prop_assert!(at_fit <= at_perturbed + 1e-15);
            }
        }

        #[test]
        fn primal_dual_equivalence_linear(seed in 0u64..200, n in 5usize..60, d in 1usize..5) {
            let x = random_matrix(seed, n, d);
            let z = random_vec(seed + 3000, n);
            let lambda = 0.1;
            let primal = fit_ridge_primal(
                &x.clone(),
                &z,
                lambda,
                FeatureMap::identity(d),
            ).unwrap();
            let k = gram(&Kernel::Linear, &x, &x).unwrap();
            let dual = fit_ridge_dual(&k, &z, lambda, x.clone(), Kernel::Linear).unwrap();
            let probe = random_matrix(seed + 5000, 6, d);
            let p1 = primal.predict(&probe).unwrap();
            let p2 = dual.predict(&probe).unwrap();
            for (a, b) in p1.iter().zip(&p2) {
                prop_assert!((a - b).abs() <= 1e-6 * (1.0 + a.abs()));
            }
        }
    }
}
