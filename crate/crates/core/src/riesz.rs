//! Riesz regression in primal and dual form, implied balancing weights, and
//! the numerical-equivalence checker tying the plug-in view
//! θ(Φ)ᵀβ̂ to the weighting view (1/n)·α̂ᵀz.

use crate::error::{Error, Result};
use crate::features::{apply_feature_map, gram, FeatureMap, Kernel};
use crate::functionals::LinearFunctional;
use crate::linalg::{factor_spd, DenseMatrix};
use crate::regress::Predictor;

/// Feature-space Riesz fit: η̂ = (M + λI)⁻¹θ(Φ), representer α̂(x) = φ(x)ᵀη̂.
#[derive(Debug, Clone)]
pub struct RieszFitPrimal {
    eta: Vec<f64>,
    lambda: f64,
    map: FeatureMap,
}

impl RieszFitPrimal {
    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn map(&self) -> &FeatureMap {
        &self.map
    }

    /// Representer values from already-featurized rows.
    pub fn weights_from_features(&self, phi: &DenseMatrix) -> Result<Vec<f64>> {
        phi.matvec(&self.eta)
    }
}

impl Predictor for RieszFitPrimal {
    fn predict(&self, x: &DenseMatrix) -> Result<Vec<f64>> {
        let phi = apply_feature_map(&self.map, x)?;
        phi.matvec(&self.eta)
    }
}

/// Fits the feature-space Riesz regression
/// min_η (1/n)·ηᵀΦᵀΦη − 2·θ(Φ)ᵀη + λ‖η‖².
pub fn fit_riesz_primal(
    phi_p: &DenseMatrix,
    theta_phi: &[f64],
    lambda: f64,
    map: FeatureMap,
) -> Result<RieszFitPrimal> {
    if theta_phi.len() != phi_p.cols() {
        return Err(Error::DimensionMismatch {
            context: "functional target vs feature columns",
            expected: phi_p.cols(),
            got: theta_phi.len(),
        });
    }
    if map.output_dim() != phi_p.cols() {
        return Err(Error::DimensionMismatch {
            context: "feature map output dim vs feature columns",
            expected: phi_p.cols(),
            got: map.output_dim(),
        });
    }
    let factor = crate::regress::ridge_normal_factor(phi_p, lambda)?;
    let eta = factor.solve_vec(theta_phi)?;
    Ok(RieszFitPrimal { eta, lambda, map })
}

/// Kernel-space Riesz fit over the representer span of the training rows
/// plus the functional's anchors.
#[derive(Debug, Clone)]
pub struct RieszFitDual {
    coeffs: Vec<f64>,
    /// Augmented anchor set: training rows stacked above functional anchors.
    anchors: DenseMatrix,
    lambda: f64,
    kernel: Kernel,
}

impl RieszFitDual {
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn anchors(&self) -> &DenseMatrix {
        &self.anchors
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

impl Predictor for RieszFitDual {
    fn predict(&self, x: &DenseMatrix) -> Result<Vec<f64>> {
        let k = gram(&self.kernel, x, &self.anchors)?;
        k.matvec(&self.coeffs)
    }
}

fn vstack(top: &DenseMatrix, bottom: &DenseMatrix) -> Result<DenseMatrix> {
    if top.cols() != bottom.cols() {
        return Err(Error::DimensionMismatch {
            context: "stacked matrices must share column count",
            expected: top.cols(),
            got: bottom.cols(),
        });
    }
    let mut out = DenseMatrix::zeros(top.rows() + bottom.rows(), top.cols());
    for i in 0..top.rows() {
        out.row_mut(i).copy_from_slice(top.row(i));
    }
    for i in 0..bottom.rows() {
        out.row_mut(top.rows() + i).copy_from_slice(bottom.row(i));
    }
    Ok(out)
}

/// Fits the kernel-space Riesz regression. Expanding α = Σ_a c_a·k(·, a)
/// over anchors A = training rows ∪ functional anchors, the restricted
/// objective (1/n)·Σᵢα(xᵢ)² − 2·θ̂(α) + λ‖α‖² is minimized by
/// ((1/n)·K_Ap·K_pA + λ·K_AA)·c = K_AU·w, solved with escalating jitter
/// since duplicate anchors make the system rank-deficient.
pub fn fit_riesz_dual(
    x_p: &DenseMatrix,
    theta: &LinearFunctional,
    kernel: &Kernel,
    lambda: f64,
) -> Result<RieszFitDual> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(
            "lambda must be finite and > 0".into(),
        ));
    }
    if x_p.rows() == 0 {
        return Err(Error::EmptyData("riesz fit needs training rows"));
    }
    let n = x_p.rows() as f64;
    let aug = vstack(x_p, theta.anchors())?;
    let k_pa = gram(kernel, x_p, &aug)?;
    let k_aa = gram(kernel, &aug, &aug)?;
    let mut system = k_pa.t_times_self_scaled(1.0 / n);
    for i in 0..system.rows() {
        for j in 0..system.cols() {
            system.set(i, j, system.get(i, j) + lambda * k_aa.get(i, j));
        }
    }
    let k_au = gram(kernel, &aug, theta.anchors())?;
    let rhs = k_au.matvec(theta.weights())?;
    let factor = factor_spd(&system, 0.0)?;
    let coeffs = factor.solve_vec(&rhs)?;
    Ok(RieszFitDual {
        coeffs,
        anchors: aug,
        lambda,
        kernel: *kernel,
    })
}

/// Representer values α̂(xᵢ) on the source rows — the implied balancing
/// weights through which the plug-in estimate becomes a weighted sum.
pub fn implied_weights<P: Predictor + ?Sized>(fit: &P, x_p: &DenseMatrix) -> Result<Vec<f64>> {
    fit.predict(x_p)
}

/// Both sides of the implied-weights identity for one instance.
#[derive(Debug, Clone, Copy)]
pub struct EquivalenceReport {
    /// θ(Φ)ᵀβ̂: the functional applied to the ridge fit.
    pub plugin_side: f64,
    /// (1/n)·α̂ᵀz: the Riesz-weighted average of the targets.
    pub weighted_side: f64,
    /// |plugin_side − weighted_side|.
    pub discrepancy: f64,
}

/// Riesz objective (1/n)‖Φη‖² − 2·θ(Φ)ᵀη + λ‖η‖² (for optimality checks).
pub fn riesz_objective(
    phi: &DenseMatrix,
    theta_phi: &[f64],
    lambda: f64,
    eta: &[f64],
) -> Result<f64> {
    let fitted = phi.matvec(eta)?;
    let n = phi.rows() as f64;
    let quad: f64 = fitted.iter().map(|v| v * v).sum::<f64>() / n;
    let lin: f64 = theta_phi.iter().zip(eta).map(|(t, e)| t * e).sum();
    let pen: f64 = eta.iter().map(|e| e * e).sum();
    Ok(quad - 2.0 * lin + lambda * pen)
}

/// Builds M = (1/n)ΦᵀΦ by an explicit loop in reverse row order — a second,
/// independent accumulation path for the equivalence checker so the two
/// sides of the identity never share a factorization or even a Gram matrix.
fn normal_matrix_reversed(phi: &DenseMatrix, lambda: f64) -> DenseMatrix {
    let n = phi.rows();
    let d = phi.cols();
    let mut m = DenseMatrix::zeros(d, d);
    for i in (0..n).rev() {
        let row = phi.row(i);
        for j in 0..d {
            for k in 0..d {
                m.set(j, k, m.get(j, k) + row[j] * row[k]);
            }
        }
    }
    let scale = 1.0 / n as f64;
    for j in 0..d {
        for k in 0..d {
            m.set(j, k, m.get(j, k) * scale);
        }
        m.set(j, j, m.get(j, j) + lambda);
    }
    m
}

/// Computes both sides of the identity θ(Φ)ᵀβ̂ = (1/n)·α̂ᵀz from scratch via
/// two independent factorizations. `beta_perturbation` is a test hook added
/// to the first ridge coefficient to force a detectable mismatch.
pub fn equivalence_report_perturbed(
    phi_p: &DenseMatrix,
    z: &[f64],
    theta_phi: &[f64],
    lambda: f64,
    beta_perturbation: f64,
) -> Result<EquivalenceReport> {
    let n = phi_p.rows();
    if z.len() != n {
        return Err(Error::DimensionMismatch {
            context: "target length vs feature rows",
            expected: n,
            got: z.len(),
        });
    }

    // plug-in side: ridge fit of z on features, then apply the functional
    let ridge = crate::regress::fit_ridge_primal(
        phi_p,
        z,
        lambda,
        FeatureMap::identity(phi_p.cols()),
    )?;
    let mut beta = ridge.beta().to_vec();
    if !beta.is_empty() {
        beta[0] += beta_perturbation;
    }
    let plugin_side: f64 = theta_phi.iter().zip(&beta).map(|(t, b)| t * b).sum();

    // weighting side: Riesz representer from its own factorization
    let system = normal_matrix_reversed(phi_p, lambda);
    let factor = factor_spd(&system, 0.0)?;
    let eta = factor.solve_vec(theta_phi)?;
    let alpha = phi_p.matvec(&eta)?;
    let weighted_side: f64 =
        alpha.iter().zip(z).map(|(a, zi)| a * zi).sum::<f64>() / n as f64;

    Ok(EquivalenceReport {
        plugin_side,
        weighted_side,
        discrepancy: (plugin_side - weighted_side).abs(),
    })
}

/// Absolute discrepancy |θ(Φ)ᵀβ̂ − (1/n)·α̂ᵀz|, both sides computed by
/// independent code paths.
pub fn check_equivalence(
    phi_p: &DenseMatrix,
    z: &[f64],
    theta_phi: &[f64],
    lambda: f64,
) -> Result<f64> {
    Ok(equivalence_report_perturbed(phi_p, z, theta_phi, lambda, 0.0)?.discrepancy)
}
