//! Feature maps φ and kernels k defining the auditing class: identity,
//! monomial expansions, kernel-exact scaled monomials, and random Fourier
//! features approximating the RBF kernel.

use crate::error::{Error, Result};
use crate::linalg::{dot, DenseMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Deterministic map from raw covariates to a D-dimensional feature vector.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureMap {
    /// φ(x) = x.
    Identity { input_dim: usize },
    /// Plain monomial basis up to `degree` (graded lexicographic order),
    /// optionally prefixed with a constant-1 bias feature.
    Polynomial {
        input_dim: usize,
        degree: u32,
        include_bias: bool,
    },
    /// √(multinomial)-scaled monomials of total degree ≤ `degree`, chosen so
    /// that φ(x)ᵀφ(y) = (xᵀy + offset)^degree exactly.
    ScaledMonomial {
        input_dim: usize,
        degree: u32,
        offset: f64,
    },
    /// Random Fourier features x ↦ √(2/D)·cos(ωᵀx + b) with frequencies and
    /// phases sampled once at construction.
    Rff {
        input_dim: usize,
        bandwidth: f64,
        seed: u64,
        /// D×input_dim frequency matrix, one ω per output feature.
        frequencies: DenseMatrix,
        phases: Vec<f64>,
    },
}

impl FeatureMap {
    pub fn identity(input_dim: usize) -> Self {
        FeatureMap::Identity { input_dim }
    }

    pub fn polynomial(input_dim: usize, degree: u32, include_bias: bool) -> Result<Self> {
        if input_dim == 0 || degree == 0 {
            return Err(Error::InvalidParameter(
                "polynomial map needs input_dim >= 1 and degree >= 1".into(),
            ));
        }
        Ok(FeatureMap::Polynomial {
            input_dim,
            degree,
            include_bias,
        })
    }

    pub fn scaled_monomial(input_dim: usize, degree: u32, offset: f64) -> Result<Self> {
        if input_dim == 0 || degree == 0 {
            return Err(Error::InvalidParameter(
                "scaled-monomial map needs input_dim >= 1 and degree >= 1".into(),
            ));
        }
        if !(offset >= 0.0) || !offset.is_finite() {
            return Err(Error::InvalidParameter(
                "scaled-monomial offset must be finite and >= 0".into(),
            ));
        }
        Ok(FeatureMap::ScaledMonomial {
            input_dim,
            degree,
            offset,
        })
    }

    pub fn input_dim(&self) -> usize {
        match self {
            FeatureMap::Identity { input_dim }
            | FeatureMap::Polynomial { input_dim, .. }
            | FeatureMap::ScaledMonomial { input_dim, .. }
            | FeatureMap::Rff { input_dim, .. } => *input_dim,
        }
    }

    pub fn output_dim(&self) -> usize {
        match self {
            FeatureMap::Identity { input_dim } => *input_dim,
            FeatureMap::Polynomial {
                input_dim,
                degree,
                include_bias,
            } => {
                let all = count_multi_indices(*input_dim, *degree);
                // drop the degree-0 index unless a bias feature is requested
                if *include_bias {
                    all
                } else {
                    all - 1
                }
            }
            FeatureMap::ScaledMonomial {
                input_dim, degree, ..
            } => count_multi_indices(*input_dim, *degree),
            FeatureMap::Rff { phases, .. } => phases.len(),
        }
    }

    /// Feature vector for one raw covariate row.
    pub fn apply_row(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                context: "feature map input dimension",
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        Ok(match self {
            FeatureMap::Identity { .. } => x.to_vec(),
            FeatureMap::Polynomial {
                input_dim,
                degree,
                include_bias,
            } => {
                let mut out = Vec::with_capacity(self.output_dim());
                for alpha in multi_indices(*input_dim, *degree) {
                    let total: u32 = alpha.iter().sum();
                    if total == 0 && !include_bias {
                        continue;
                    }
                    out.push(monomial(x, &alpha));
                }
                out
            }
            FeatureMap::ScaledMonomial {
                input_dim,
                degree,
                offset,
            } => {
                let q = *degree;
                let mut out = Vec::with_capacity(self.output_dim());
                for alpha in multi_indices(*input_dim, q) {
                    let total: u32 = alpha.iter().sum();
                    // (xᵀy + c)^q = Σ_α [q!/(α!·(q−|α|)!)]·c^{q−|α|}·x^α y^α
                    let mut coef = factorial(q) / factorial(q - total);
                    for &aj in &alpha {
                        coef /= factorial(aj);
                    }
                    coef *= offset.powi((q - total) as i32);
                    out.push(coef.sqrt() * monomial(x, &alpha));
                }
                out
            }
            FeatureMap::Rff {
                frequencies,
                phases,
                ..
            } => {
                let d_out = phases.len();
                let scale = (2.0 / d_out as f64).sqrt();
                (0..d_out)
                    .map(|j| scale * (dot(frequencies.row(j), x) + phases[j]).cos())
                    .collect()
            }
        })
    }
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(|v| v as f64).product()
}

fn monomial(x: &[f64], alpha: &[u32]) -> f64 {
    let mut v = 1.0;
    for (xi, &ai) in x.iter().zip(alpha) {
        if ai > 0 {
            v *= xi.powi(ai as i32);
        }
    }
    v
}

/// All exponent vectors α ∈ ℕ^d with |α| ≤ max_degree, in graded
/// lexicographic order (total degree ascending, lexicographic within).
fn multi_indices(d: usize, max_degree: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::with_capacity(count_multi_indices(d, max_degree));
    let mut current = vec![0u32; d];
    for total in 0..=max_degree {
        fill_indices(d, 0, total, &mut current, &mut out);
    }
    out
}

fn fill_indices(d: usize, pos: usize, remaining: u32, current: &mut [u32], out: &mut Vec<Vec<u32>>) {
    if pos == d - 1 {
        current[pos] = remaining;
        out.push(current.to_vec());
        return;
    }
    for v in (0..=remaining).rev() {
        current[pos] = v;
        fill_indices(d, pos + 1, remaining - v, current, out);
    }
    current[pos] = 0;
}

/// C(d + q, q): number of exponent vectors with |α| ≤ q.
fn count_multi_indices(d: usize, q: u32) -> usize {
    let mut c = 1usize;
    for i in 1..=q as usize {
        c = c * (d + i) / i;
    }
    c
}

/// Kernel function over raw covariates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    Linear,
    Polynomial { degree: u32, offset: f64 },
    Rbf { bandwidth: f64 },
}

impl Kernel {
    pub fn validate(&self) -> Result<()> {
        match self {
            Kernel::Linear => Ok(()),
            Kernel::Polynomial { degree, offset } => {
                if *degree == 0 {
                    return Err(Error::InvalidParameter(
                        "polynomial kernel degree must be >= 1".into(),
                    ));
                }
                if !(*offset >= 0.0) || !offset.is_finite() {
                    return Err(Error::InvalidParameter(
                        "polynomial kernel offset must be finite and >= 0".into(),
                    ));
                }
                Ok(())
            }
            Kernel::Rbf { bandwidth } => {
                if !(*bandwidth > 0.0) || !bandwidth.is_finite() {
                    return Err(Error::InvalidParameter(
                        "rbf bandwidth must be finite and > 0".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), y.len());
        match self {
            Kernel::Linear => dot(x, y),
            Kernel::Polynomial { degree, offset } => (dot(x, y) + offset).powi(*degree as i32),
            Kernel::Rbf { bandwidth } => {
                let mut sq = 0.0;
                for (a, b) in x.iter().zip(y) {
                    let diff = a - b;
                    sq += diff * diff;
                }
                (-sq / (2.0 * bandwidth * bandwidth)).exp()
            }
        }
    }
}

/// Applies the map row-wise: output row i is φ(x_i).
pub fn apply_feature_map(map: &FeatureMap, x: &DenseMatrix) -> Result<DenseMatrix> {
    if x.cols() != map.input_dim() {
        return Err(Error::DimensionMismatch {
            context: "feature map input dimension",
            expected: map.input_dim(),
            got: x.cols(),
        });
    }
    let d_out = map.output_dim();
    let mut out = DenseMatrix::zeros(x.rows(), d_out);
    for i in 0..x.rows() {
        let row = map.apply_row(x.row(i))?;
        out.row_mut(i).copy_from_slice(&row);
    }
    Ok(out)
}

/// Cross-Gram matrix: entry (i, j) = k(a_i, b_j).
pub fn gram(kernel: &Kernel, a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    kernel.validate()?;
    if a.cols() != b.cols() {
        return Err(Error::DimensionMismatch {
            context: "gram operand dimensions",
            expected: a.cols(),
            got: b.cols(),
        });
    }
    let mut out = DenseMatrix::zeros(a.rows(), b.rows());
    for i in 0..a.rows() {
        let ai = a.row(i);
        let row = out.row_mut(i);
        for j in 0..b.rows() {
            row[j] = kernel.eval(ai, b.row(j));
        }
    }
    Ok(out)
}

/// Median of pairwise Euclidean distances over at most 500 rows (fixed
/// subsample seed 0). Falls back to the median of strictly positive
/// distances when duplicates drag the overall median to zero.
pub fn median_heuristic_bandwidth(x: &DenseMatrix) -> Result<f64> {
    let n = x.rows();
    if n < 2 {
        return Err(Error::InvalidParameter(
            "median heuristic needs at least two rows".into(),
        ));
    }
    let cap = 500usize;
    let idx: Vec<usize> = if n <= cap {
        (0..n).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut picked = rand::seq::index::sample(&mut rng, n, cap).into_vec();
        picked.sort_unstable();
        picked
    };
    let mut dists = Vec::with_capacity(idx.len() * (idx.len() - 1) / 2);
    for (a, &i) in idx.iter().enumerate() {
        for &j in idx.iter().skip(a + 1) {
            let mut sq = 0.0;
            for (u, v) in x.row(i).iter().zip(x.row(j)) {
                let diff = u - v;
                sq += diff * diff;
            }
            dists.push(sq.sqrt());
        }
    }
    let med = median(&mut dists);
    if med > 0.0 {
        return Ok(med);
    }
    let mut positive: Vec<f64> = dists.into_iter().filter(|&v| v > 0.0).collect();
    if positive.is_empty() {
        return Err(Error::DegenerateData("all pairwise distances are zero"));
    }
    Ok(median(&mut positive))
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Samples a random Fourier feature map approximating the RBF kernel with
/// the given bandwidth: frequencies Normal(0, 1/bandwidth²) per coordinate,
/// phases Uniform[0, 2π).
pub fn sample_rff(bandwidth: f64, input_dim: usize, d_out: usize, seed: u64) -> Result<FeatureMap> {
    if !(bandwidth > 0.0) || !bandwidth.is_finite() {
        return Err(Error::InvalidParameter(
            "rff bandwidth must be finite and > 0".into(),
        ));
    }
    if d_out == 0 || input_dim == 0 {
        return Err(Error::InvalidParameter(
            "rff needs input_dim >= 1 and D >= 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0 / bandwidth).expect("finite std");
    let mut frequencies = DenseMatrix::zeros(d_out, input_dim);
    let mut phases = Vec::with_capacity(d_out);
    for j in 0..d_out {
        for k in 0..input_dim {
            frequencies.set(j, k, normal.sample(&mut rng));
        }
        phases.push(rng.gen_range(0.0..std::f64::consts::TAU));
    }
    Ok(FeatureMap::Rff {
        input_dim,
        bandwidth,
        seed,
        frequencies,
        phases,
    })
}
