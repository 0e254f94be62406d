//! Raw dataset container: covariate matrix plus optional outcomes, tagged by
//! which side of the covariate shift it came from.

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// Which distribution a sample was drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Labeled training sample (outcomes observed).
    Source,
    /// Evaluation sample the estimand lives on (outcomes typically missing).
    Target,
}

/// Covariate matrix with an optional outcome vector.
#[derive(Debug, Clone)]
pub struct Dataset {
    x: DenseMatrix,
    y: Option<Vec<f64>>,
    provenance: Provenance,
}

impl Dataset {
    pub fn labeled(x: DenseMatrix, y: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if y.len() != x.rows() {
            return Err(Error::DimensionMismatch {
                context: "outcome length vs covariate rows",
                expected: x.rows(),
                got: y.len(),
            });
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("outcomes must be finite".into()));
        }
        Ok(Self {
            x,
            y: Some(y),
            provenance,
        })
    }

    pub fn unlabeled(x: DenseMatrix, provenance: Provenance) -> Self {
        Self {
            x,
            y: None,
            provenance,
        }
    }

    pub fn x(&self) -> &DenseMatrix {
        &self.x
    }

    /// Outcomes, or an error for unlabeled data.
    pub fn y(&self) -> Result<&[f64]> {
        self.y
            .as_deref()
            .ok_or(Error::EmptyData("dataset carries no outcomes"))
    }

    pub fn has_outcomes(&self) -> bool {
        self.y.is_some()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn n(&self) -> usize {
        self.x.rows()
    }

    pub fn dim(&self) -> usize {
        self.x.cols()
    }
}
