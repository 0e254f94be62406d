//! Multiaccuracy auditing: the sample multiaccuracy error in its dual-norm
//! closed form, the one-step contraction certificate, and holdout MAE.

use crate::error::{Error, Result};
use crate::features::{apply_feature_map, FeatureMap};
use crate::linalg::{sym_eigenvalues, DenseMatrix};
use crate::regress::Predictor;

/// Audit summary for a boosted fit.
#[derive(Debug, Clone)]
pub struct MaeReport {
    pub mae_init: f64,
    pub mae_boosted: f64,
    /// max_j λ/(λ + σ²_j): guaranteed one-step shrinkage of the sample MAE.
    pub contraction_factor: f64,
    /// Eigenvalues σ²_j of (1/n)ΦᵀΦ, descending.
    pub eigenvalues: Vec<f64>,
    pub holdout_mae: Option<f64>,
    /// Whether mae_boosted ≤ contraction_factor·mae_init·(1 + 1e-10).
    pub contraction_ok: bool,
}

/// Sample multiaccuracy error over the unit RKHS ball of the feature span:
/// the dual-norm identity gives (1/n)·‖Φᵀr‖₂.
pub fn sample_mae(phi: &DenseMatrix, residuals: &[f64]) -> Result<f64> {
    if residuals.len() != phi.rows() {
        return Err(Error::DimensionMismatch {
            context: "residual length vs feature rows",
            expected: phi.rows(),
            got: residuals.len(),
        });
    }
    if phi.rows() == 0 {
        return Err(Error::EmptyData("sample MAE needs rows"));
    }
    let corr = phi.tr_matvec(residuals)?;
    let norm: f64 = corr.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(norm / phi.rows() as f64)
}

/// Eigenvalues σ²_j of (1/n)ΦᵀΦ, descending, clamped at zero (the matrix is
/// PSD; tiny negatives are rounding).
pub fn feature_eigenvalues(phi: &DenseMatrix) -> Result<Vec<f64>> {
    if phi.rows() == 0 {
        return Err(Error::EmptyData("eigenvalue computation needs rows"));
    }
    let m = phi.t_times_self_scaled(1.0 / phi.rows() as f64);
    let eigs = sym_eigenvalues(&m)?;
    Ok(eigs.into_iter().map(|e| e.max(0.0)).collect())
}

/// One-step MAE contraction factor max_j λ/(λ + σ²_j) ∈ (0, 1].
pub fn contraction_factor(phi: &DenseMatrix, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(
            "lambda must be finite and > 0".into(),
        ));
    }
    let eigs = feature_eigenvalues(phi)?;
    // the max is attained at the smallest eigenvalue
    let sigma_min = eigs.last().copied().unwrap_or(0.0);
    Ok(lambda / (lambda + sigma_min))
}

/// Sample MAE of a fitted predictor on held-out data.
pub fn holdout_mae<P: Predictor + ?Sized>(
    model: &P,
    map: &FeatureMap,
    x_holdout: &DenseMatrix,
    y_holdout: &[f64],
) -> Result<f64> {
    if x_holdout.rows() == 0 {
        return Err(Error::EmptyData("holdout MAE needs rows"));
    }
    if y_holdout.len() != x_holdout.rows() {
        return Err(Error::DimensionMismatch {
            context: "holdout outcomes vs rows",
            expected: x_holdout.rows(),
            got: y_holdout.len(),
        });
    }
    let preds = model.predict(x_holdout)?;
    let residuals: Vec<f64> = y_holdout.iter().zip(&preds).map(|(y, p)| y - p).collect();
    let phi = apply_feature_map(map, x_holdout)?;
    sample_mae(&phi, &residuals)
}

/// Assembles the audit report from pre- and post-boost training residuals.
pub fn build_mae_report(
    phi: &DenseMatrix,
    lambda: f64,
    resid_init: &[f64],
    resid_boosted: &[f64],
    holdout_mae: Option<f64>,
) -> Result<MaeReport> {
    let mae_init = sample_mae(phi, resid_init)?;
    let mae_boosted = sample_mae(phi, resid_boosted)?;
    let eigenvalues = feature_eigenvalues(phi)?;
    let sigma_min = eigenvalues.last().copied().unwrap_or(0.0);
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(
            "lambda must be finite and > 0".into(),
        ));
    }
    let contraction_factor = lambda / (lambda + sigma_min);
    let contraction_ok = mae_boosted <= contraction_factor * mae_init * (1.0 + 1e-10);
    Ok(MaeReport {
        mae_init,
        mae_boosted,
        contraction_factor,
        eigenvalues,
        holdout_mae,
        contraction_ok,
    })
}
