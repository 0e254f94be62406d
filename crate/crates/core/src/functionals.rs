//! Empirical linear functionals represented as weighted anchor sets:
//! θ̂(f) = Σ_s w_s·f(u_s). One representation serves plug-in evaluation,
//! feature-space Riesz targets, and dual Riesz anchor systems.

use crate::error::{Error, Result};
use crate::features::{apply_feature_map, FeatureMap};
use crate::linalg::DenseMatrix;
use crate::regress::Predictor;

/// A linear functional over predictors, as a finite weighted anchor set.
/// Anchors are grouped into evaluation units (e.g. the two symmetric-
/// difference points of one evaluation row form one unit) so per-unit
/// contributions can feed the variance estimator.
#[derive(Debug, Clone)]
pub struct LinearFunctional {
    anchors: DenseMatrix,
    weights: Vec<f64>,
    /// unit_ids[s] is the evaluation unit anchor s belongs to; units are
    /// numbered 0..n_units contiguously.
    unit_ids: Vec<usize>,
    label: String,
}

impl LinearFunctional {
    /// Builds a functional from raw parts. Weights must be finite and unit
    /// ids contiguous from zero.
    pub fn new(
        anchors: DenseMatrix,
        weights: Vec<f64>,
        unit_ids: Vec<usize>,
        label: impl Into<String>,
    ) -> Result<Self> {
        let m = anchors.rows();
        if m == 0 {
            return Err(Error::EmptyData("functional needs at least one anchor"));
        }
        if weights.len() != m || unit_ids.len() != m {
            return Err(Error::DimensionMismatch {
                context: "weights/unit ids vs anchor rows",
                expected: m,
                got: if weights.len() != m {
                    weights.len()
                } else {
                    unit_ids.len()
                },
            });
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidParameter("weights must be finite".into()));
        }
        let n_units = unit_ids.iter().max().map_or(0, |&u| u + 1);
        let mut seen = vec![false; n_units];
        for &u in &unit_ids {
            seen[u] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidParameter(
                "unit ids must be contiguous from zero".into(),
            ));
        }
        Ok(Self {
            anchors,
            weights,
            unit_ids,
            label: label.into(),
        })
    }

    pub fn anchors(&self) -> &DenseMatrix {
        &self.anchors
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn n_units(&self) -> usize {
        self.unit_ids.iter().max().map_or(0, |&u| u + 1)
    }

    pub fn input_dim(&self) -> usize {
        self.anchors.cols()
    }
}

/// Symmetric-differencing specification for derivative functionals.
#[derive(Debug, Clone, Copy)]
pub struct DiffSpec {
    pub coordinate: usize,
    pub step: f64,
}

impl DiffSpec {
    pub fn new(coordinate: usize, step: f64) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::InvalidParameter(
                "differencing step must be finite and > 0".into(),
            ));
        }
        Ok(Self { coordinate, step })
    }

    /// Default step h = 0.1·(sample standard deviation of the coordinate on
    /// the evaluation set).
    pub fn with_default_step(x_eval: &DenseMatrix, coordinate: usize) -> Result<Self> {
        if coordinate >= x_eval.cols() {
            return Err(Error::InvalidParameter(format!(
                "coordinate {coordinate} out of range for {} columns",
                x_eval.cols()
            )));
        }
        let n = x_eval.rows();
        if n < 2 {
            return Err(Error::EmptyData(
                "default differencing step needs at least two rows",
            ));
        }
        let col: Vec<f64> = (0..n).map(|i| x_eval.get(i, coordinate)).collect();
        let mean = col.iter().sum::<f64>() / n as f64;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0);
        let step = 0.1 * var.sqrt();
        if !(step > 0.0) {
            return Err(Error::DegenerateData(
                "coordinate is constant on the evaluation set; supply an explicit step",
            ));
        }
        Self::new(coordinate, step)
    }
}

/// Mean of f over the target rows: θ̂(f) = (1/n_q)·Σⱼ f(xⱼ).
pub fn missing_mean_functional(x_target: &DenseMatrix) -> Result<LinearFunctional> {
    let n = x_target.rows();
    if n == 0 {
        return Err(Error::EmptyData("missing-mean functional needs rows"));
    }
    LinearFunctional::new(
        x_target.clone(),
        vec![1.0 / n as f64; n],
        (0..n).collect(),
        "missing_mean",
    )
}

/// Average symmetric-difference derivative along one coordinate:
/// θ̂(f) = (1/n)·Σᵢ [f(xᵢ + h·eⱼ) − f(xᵢ − h·eⱼ)]/(2h).
pub fn average_derivative_functional(
    x_eval: &DenseMatrix,
    spec: DiffSpec,
) -> Result<LinearFunctional> {
    let n = x_eval.rows();
    let d = x_eval.cols();
    if n == 0 {
        return Err(Error::EmptyData("average-derivative functional needs rows"));
    }
    if spec.coordinate >= d {
        return Err(Error::InvalidParameter(format!(
            "coordinate {} out of range for {} columns",
            spec.coordinate, d
        )));
    }
    if !(spec.step > 0.0) || !spec.step.is_finite() {
        return Err(Error::InvalidParameter(
            "differencing step must be finite and > 0".into(),
        ));
    }
    let mut anchors = DenseMatrix::zeros(2 * n, d);
    let mut weights = Vec::with_capacity(2 * n);
    let mut unit_ids = Vec::with_capacity(2 * n);
    let w = 1.0 / (2.0 * spec.step * n as f64);
    for i in 0..n {
        let row = x_eval.row(i);
        anchors.row_mut(2 * i).copy_from_slice(row);
        anchors.set(2 * i, spec.coordinate, row[spec.coordinate] + spec.step);
        anchors.row_mut(2 * i + 1).copy_from_slice(row);
        anchors.set(2 * i + 1, spec.coordinate, row[spec.coordinate] - spec.step);
        weights.push(w);
        weights.push(-w);
        unit_ids.push(i);
        unit_ids.push(i);
    }
    LinearFunctional::new(
        anchors,
        weights,
        unit_ids,
        format!("avg_derivative(j={}, h={})", spec.coordinate, spec.step),
    )
}

/// Mean of f after overwriting one coordinate with a fixed value:
/// θ̂(f) = (1/n)·Σᵢ f(xᵢ with xᵢⱼ := a).
pub fn counterfactual_mean_functional(
    x: &DenseMatrix,
    coordinate: usize,
    value: f64,
) -> Result<LinearFunctional> {
    let n = x.rows();
    if n == 0 {
        return Err(Error::EmptyData("counterfactual functional needs rows"));
    }
    if coordinate >= x.cols() {
        return Err(Error::InvalidParameter(format!(
            "coordinate {} out of range for {} columns",
            coordinate,
            x.cols()
        )));
    }
    if !value.is_finite() {
        return Err(Error::InvalidParameter(
            "counterfactual value must be finite".into(),
        ));
    }
    let mut anchors = x.clone();
    for i in 0..n {
        anchors.set(i, coordinate, value);
    }
    LinearFunctional::new(
        anchors,
        vec![1.0 / n as f64; n],
        (0..n).collect(),
        format!("counterfactual(j={coordinate}, a={value})"),
    )
}

/// Evaluates θ̂(f) = Σ_s w_s·f(u_s).
pub fn eval_functional<P: Predictor + ?Sized>(theta: &LinearFunctional, f: &P) -> Result<f64> {
    let values = f
        .predict(&theta.anchors)
        .map_err(|e| Error::EvaluationFailure(format!("predictor failed on anchors: {e}")))?;
    Ok(values
        .iter()
        .zip(&theta.weights)
        .map(|(v, w)| w * v)
        .sum())
}

/// θ applied coordinatewise to the feature functions: Σ_s w_s·φ(u_s).
/// This is the right-hand side of the feature-space Riesz system.
pub fn functional_on_features(theta: &LinearFunctional, map: &FeatureMap) -> Result<Vec<f64>> {
    let phi = apply_feature_map(map, &theta.anchors)?;
    phi.tr_matvec(&theta.weights)
}

/// Per-unit contributions m_g(f) = n_units·Σ_{s ∈ unit g} w_s·f(u_s), so that
/// θ̂(f) is their mean. These feed the target-side variance term.
pub fn unit_contributions<P: Predictor + ?Sized>(
    theta: &LinearFunctional,
    f: &P,
) -> Result<Vec<f64>> {
    let values = f
        .predict(&theta.anchors)
        .map_err(|e| Error::EvaluationFailure(format!("predictor failed on anchors: {e}")))?;
    let n_units = theta.n_units();
    let mut out = vec![0.0; n_units];
    for ((v, w), &u) in values.iter().zip(&theta.weights).zip(&theta.unit_ids) {
        out[u] += w * v;
    }
    for v in out.iter_mut() {
        *v *= n_units as f64;
    }
    Ok(out)
}
