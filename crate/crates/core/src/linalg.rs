//! Dense symmetric linear algebra: SPD factorization/solves and symmetric
//! eigenvalues. Everything downstream (ridge, Riesz, audits) funnels through
//! these two primitives.

use crate::error::{Error, Result};

/// Row-major dense matrix of 64-bit floats.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Builds a matrix from row-major entries, validating shape and finiteness.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                context: "entry count vs rows*cols",
                expected: rows * cols,
                got: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "matrix entries must be finite".into(),
            ));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Ok(Self::zeros(0, 0));
        }
        let cols = rows[0].len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    context: "ragged row",
                    expected: cols,
                    got: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// A·v.
    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                context: "matvec operand length",
                expected: self.cols,
                got: v.len(),
            });
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), v)).collect())
    }

    /// Aᵀ·v.
    pub fn tr_matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.rows {
            return Err(Error::DimensionMismatch {
                context: "tr_matvec operand length",
                expected: self.rows,
                got: v.len(),
            });
        }
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let vi = v[i];
            if vi == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += vi * a;
            }
        }
        Ok(out)
    }

    /// scale·AᵀA via symmetric rank-k accumulation.
    pub fn t_times_self_scaled(&self, scale: f64) -> DenseMatrix {
        let d = self.cols;
        let mut m = DenseMatrix::zeros(d, d);
        for i in 0..self.rows {
            let r = self.row(i);
            for j in 0..d {
                let rj = r[j];
                if rj == 0.0 {
                    continue;
                }
                let row_out = &mut m.data[j * d..(j + 1) * d];
                for (k, out) in row_out.iter_mut().enumerate().skip(j) {
                    *out += rj * r[k];
                }
            }
        }
        for j in 0..d {
            for k in (j + 1)..d {
                let v = m.get(j, k) * scale;
                m.set(j, k, v);
                m.set(k, j, v);
            }
            let v = m.get(j, j) * scale;
            m.set(j, j, v);
        }
        m
    }

    /// A·B.
    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                context: "matmul inner dimension",
                expected: self.cols,
                got: other.rows,
            });
        }
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let a_row = self.row(i);
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &aik) in a_row.iter().enumerate() {
                if aik == 0.0 {
                    continue;
                }
                let b_row = other.row(k);
                for (o, b) in out_row.iter_mut().zip(b_row) {
                    *o += aik * b;
                }
            }
        }
        Ok(out)
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest |a_ij − a_ji| over all pairs, and the largest |entry|.
    fn asymmetry(&self) -> (f64, f64) {
        let mut max_asym = 0.0f64;
        let mut max_abs = 0.0f64;
        for i in 0..self.rows {
            for j in 0..self.cols {
                max_abs = max_abs.max(self.get(i, j).abs());
                if j > i && j < self.rows && i < self.cols {
                    max_asym = max_asym.max((self.get(i, j) - self.get(j, i)).abs());
                }
            }
        }
        (max_asym, max_abs)
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut s = 0.0;
    for i in 0..a.len() {
        s += a[i] * b[i];
    }
    s
}

fn check_square_symmetric(a: &DenseMatrix) -> Result<()> {
    if a.rows() != a.cols() {
        return Err(Error::DimensionMismatch {
            context: "square matrix required",
            expected: a.rows(),
            got: a.cols(),
        });
    }
    let (max_asym, max_abs) = a.asymmetry();
    if max_asym > 1e-10 * max_abs.max(1e-300) {
        return Err(Error::NotSymmetric { max_asym });
    }
    Ok(())
}

/// Cholesky factorization of A + jitter·I with geometric jitter escalation.
///
/// Holds the lower-triangular factor; solves never mutate it.
#[derive(Debug, Clone)]
pub struct SpdFactorization {
    size: usize,
    /// Lower triangle of L, row-major (upper triangle zero).
    factor: DenseMatrix,
    jitter_used: f64,
}

impl SpdFactorization {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn jitter_used(&self) -> f64 {
        self.jitter_used
    }

    pub fn factor(&self) -> &DenseMatrix {
        &self.factor
    }
}

/// Attempts an in-place lower Cholesky of A + jitter·I. Returns None if a
/// pivot goes non-positive or non-finite.
fn try_cholesky(a: &DenseMatrix, jitter: f64) -> Option<DenseMatrix> {
    let n = a.rows();
    let mut l = a.clone();
    for i in 0..n {
        l.set(i, i, l.get(i, i) + jitter);
    }
    for j in 0..n {
        let mut diag = l.get(j, j);
        {
            let row_j = l.row(j);
            diag -= dot(&row_j[..j], &row_j[..j]);
        }
        if !(diag > 0.0) || !diag.is_finite() {
            return None;
        }
        let ljj = diag.sqrt();
        l.set(j, j, ljj);
        let inv = 1.0 / ljj;
        for i in (j + 1)..n {
            // l[i][j] = (a[i][j] - Σ_{k<j} l[i][k] l[j][k]) / l[j][j]
            let s = {
                let (head, tail) = l.data.split_at(i * n);
                let row_j = &head[j * n..j * n + j];
                let row_i = &tail[..j];
                dot(row_i, row_j)
            };
            let v = (l.get(i, j) - s) * inv;
            l.set(i, j, v);
        }
    }
    // zero the upper triangle so factor() is exactly L
    for i in 0..n {
        for j in (i + 1)..n {
            l.set(i, j, 0.0);
        }
    }
    Some(l)
}

/// Factors a symmetric positive (semi-)definite matrix, escalating jitter
/// ×10 per retry from `jitter_floor` up to 1e-6·trace(A)/n.
pub fn factor_spd(a: &DenseMatrix, jitter_floor: f64) -> Result<SpdFactorization> {
    check_square_symmetric(a)?;
    if jitter_floor < 0.0 || !jitter_floor.is_finite() {
        return Err(Error::InvalidParameter("jitter_floor must be >= 0".into()));
    }
    let n = a.rows();
    let scale = if n > 0 { a.trace() / n as f64 } else { 0.0 };
    let cap = 1e-6 * scale.abs();

    let mut jitter = jitter_floor;
    let mut retries = 0usize;
    loop {
        if let Some(l) = try_cholesky(a, jitter) {
            return Ok(SpdFactorization {
                size: n,
                factor: l,
                jitter_used: jitter,
            });
        }
        if retries >= 6 {
            return Err(Error::NotFactorizable {
                jitter_tried: jitter,
            });
        }
        let next = if jitter == 0.0 {
            (1e-11 * scale.abs()).max(f64::MIN_POSITIVE)
        } else {
            jitter * 10.0
        };
        if next > cap && next > jitter_floor {
            return Err(Error::NotFactorizable { jitter_tried: next });
        }
        jitter = next;
        retries += 1;
    }
}

impl SpdFactorization {
    /// Solves (A + jitter·I)x = b for a single right-hand side.
    pub fn solve_vec(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.size {
            return Err(Error::DimensionMismatch {
                context: "solve right-hand side length",
                expected: self.size,
                got: b.len(),
            });
        }
        let n = self.size;
        let l = &self.factor;
        let mut x = b.to_vec();
        // forward: L y = b
        for i in 0..n {
            let row = l.row(i);
            let s = dot(&row[..i], &x[..i]);
            x[i] = (x[i] - s) / row[i];
        }
        // backward: Lᵀ x = y
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in (i + 1)..n {
                s -= l.get(k, i) * x[k];
            }
            x[i] = s / l.get(i, i);
        }
        Ok(x)
    }

    /// Solves (A + jitter·I)X = B column by column.
    pub fn solve_mat(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        if b.rows() != self.size {
            return Err(Error::DimensionMismatch {
                context: "solve right-hand side rows",
                expected: self.size,
                got: b.rows(),
            });
        }
        let mut out = DenseMatrix::zeros(b.rows(), b.cols());
        let mut col = vec![0.0; b.rows()];
        for j in 0..b.cols() {
            for i in 0..b.rows() {
                col[i] = b.get(i, j);
            }
            let x = self.solve_vec(&col)?;
            for i in 0..b.rows() {
                out.set(i, j, x[i]);
            }
        }
        Ok(out)
    }
}

/// Convenience: factor then solve a single right-hand side.
pub fn solve_spd(f: &SpdFactorization, b: &DenseMatrix) -> Result<DenseMatrix> {
    f.solve_mat(b)
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi, sorted descending.
pub fn sym_eigenvalues(a: &DenseMatrix) -> Result<Vec<f64>> {
    check_square_symmetric(a)?;
    let n = a.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut m = a.clone();
    // symmetrize exactly so rotations stay consistent
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m.get(i, j) + m.get(j, i));
            m.set(i, j, v);
            m.set(j, i, v);
        }
    }
    let frob = m.frobenius_norm();
    let tol = 1e-14 * frob.max(f64::MIN_POSITIVE);
    let max_sweeps = 100;
    for sweep in 0..=max_sweeps {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m.get(i, j) * m.get(i, j);
            }
        }
        if (2.0 * off).sqrt() <= tol {
            let mut eigs: Vec<f64> = (0..n).map(|i| m.get(i, i)).collect();
            eigs.sort_by(|x, y| y.partial_cmp(x).unwrap());
            return Ok(eigs);
        }
        if sweep == max_sweeps {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m.get(p, q);
                if apq.abs() <= tol / (n as f64) {
                    continue;
                }
                let app = m.get(p, p);
                let aqq = m.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // rotate rows/columns p and q
                for k in 0..n {
                    let akp = m.get(k, p);
                    let akq = m.get(k, q);
                    m.set(k, p, c * akp - s * akq);
                    m.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = m.get(p, k);
                    let aqk = m.get(q, k);
                    m.set(p, k, c * apk - s * aqk);
                    m.set(q, k, s * apk + c * aqk);
                }
            }
        }
    }
    Err(Error::NoConvergence { sweeps: max_sweeps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_matrix(rng: &mut StdRng, rows: usize, cols: usize) -> DenseMatrix {
        let data: Vec<f64> = (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect();
        DenseMatrix::new(rows, cols, data).unwrap()
    }

    fn random_spd(rng: &mut StdRng, n: usize) -> DenseMatrix {
        let b = random_matrix(rng, n + 5, n);
        let mut m = b.t_times_self_scaled(1.0);
        for i in 0..n {
            m.set(i, i, m.get(i, i) + 0.1);
        }
        m
    }

    #[test]
    fn identity_factors_without_jitter() {
        let a = DenseMatrix::identity(3);
        let f = factor_spd(&a, 0.0).unwrap();
        assert_eq!(f.jitter_used(), 0.0);
        let b = vec![1.0, -2.0, 0.5];
        let x = f.solve_vec(&b).unwrap();
        for (xi, bi) in x.iter().zip(&b) {
            assert!((xi - bi).abs() < 1e-14);
        }
    }

    #[test]
    fn diagonal_solve() {
        let a = DenseMatrix::new(2, 2, vec![4.0, 0.0, 0.0, 9.0]).unwrap();
        let f = factor_spd(&a, 0.0).unwrap();
        let x = f.solve_vec(&[4.0, 9.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14);
        assert!((x[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn random_spd_solve_residual() {
        let mut rng = StdRng::seed_from_u64(7);
        let b = random_matrix(&mut rng, 10, 4);
        let mut a = b.t_times_self_scaled(1.0);
        for i in 0..4 {
            a.set(i, i, a.get(i, i) + 0.1);
        }
        let f = factor_spd(&a, 0.0).unwrap();
        let rhs: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = f.solve_vec(&rhs).unwrap();
        let ax = a.matvec(&x).unwrap();
        let rnorm: f64 = ax
            .iter()
            .zip(&rhs)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let bnorm: f64 = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(rnorm / bnorm <= 1e-10, "residual {}", rnorm / bnorm);
    }

    #[test]
    fn multi_rhs_residual() {
        let mut rng = StdRng::seed_from_u64(11);
        let a = random_spd(&mut rng, 20);
        let f = factor_spd(&a, 0.0).unwrap();
        let b = random_matrix(&mut rng, 20, 3);
        let x = solve_spd(&f, &b).unwrap();
        let ax = a.matmul(&x).unwrap();
        let mut worst: f64 = 0.0;
        for j in 0..3 {
            let mut rn = 0.0;
            let mut bn = 0.0;
            for i in 0..20 {
                let r = ax.get(i, j) - b.get(i, j);
                rn += r * r;
                bn += b.get(i, j) * b.get(i, j);
            }
            worst = worst.max((rn / bn).sqrt());
        }
        assert!(worst <= 1e-10, "residual {worst}");
    }

    #[test]
    fn reconstruction_matches_input_plus_jitter() {
        let mut rng = StdRng::seed_from_u64(3);
        let a = random_spd(&mut rng, 12);
        let f = factor_spd(&a, 0.0).unwrap();
        let l = f.factor();
        let mut diff = 0.0f64;
        for i in 0..12 {
            for j in 0..12 {
                let mut v = 0.0;
                for k in 0..12 {
                    v += l.get(i, k) * l.get(j, k);
                }
                let target = a.get(i, j) + if i == j { f.jitter_used() } else { 0.0 };
                diff += (v - target) * (v - target);
            }
        }
        assert!(diff.sqrt() / a.frobenius_norm() <= 1e-8);
    }

    #[test]
    fn jitter_escalates_for_rank_deficient() {
        // rank-1 Gram: needs jitter but stays factorizable
        let b = DenseMatrix::new(3, 2, vec![1.0, 2.0, 1.0, 2.0, 1.0, 2.0]).unwrap();
        let a = b.t_times_self_scaled(1.0);
        let f = factor_spd(&a, 0.0).unwrap();
        assert!(f.jitter_used() > 0.0);
        assert!(f.jitter_used() <= 1e-6 * a.trace() / 2.0);
    }

    #[test]
    fn asymmetric_rejected() {
        let a = DenseMatrix::new(2, 2, vec![1.0, 0.5, 0.2, 1.0]).unwrap();
        assert!(matches!(
            factor_spd(&a, 0.0),
            Err(Error::NotSymmetric { .. })
        ));
        assert!(matches!(
            sym_eigenvalues(&a),
            Err(Error::NotSymmetric { .. })
        ));
    }

    #[test]
    fn negative_definite_not_factorizable() {
        let mut a = DenseMatrix::identity(3);
        for i in 0..3 {
            a.set(i, i, -1.0);
        }
        assert!(matches!(
            factor_spd(&a, 0.0),
            Err(Error::NotFactorizable { .. })
        ));
    }

    #[test]
    fn eigenvalues_diagonal() {
        let a = DenseMatrix::new(3, 3, vec![3.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0]).unwrap();
        let e = sym_eigenvalues(&a).unwrap();
        assert_eq!(e, vec![3.0, 2.0, 1.0]);
    }

    #[test]
    fn eigenvalues_two_by_two() {
        // [[2,1],[1,2]] has characteristic roots 3 and 1
        let a = DenseMatrix::new(2, 2, vec![2.0, 1.0, 1.0, 2.0]).unwrap();
        let e = sym_eigenvalues(&a).unwrap();
        assert!((e[0] - 3.0).abs() < 1e-12);
        assert!((e[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigenvalues_zero_matrix() {
        let a = DenseMatrix::zeros(4, 4);
        let e = sym_eigenvalues(&a).unwrap();
        assert!(e.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn eigenvalue_sum_matches_trace() {
        let mut rng = StdRng::seed_from_u64(5);
        let a = random_spd(&mut rng, 30);
        let e = sym_eigenvalues(&a).unwrap();
        let sum: f64 = e.iter().sum();
        assert!((sum - a.trace()).abs() <= 1e-8 * a.trace().abs());
    }

    #[test]
    fn eigenvalues_invariant_under_orthogonal_conjugation() {
        let mut rng = StdRng::seed_from_u64(17);
        let n = 15;
        let a = random_spd(&mut rng, n);
        // random orthogonal Q from Gram-Schmidt of a random matrix
        let g = random_matrix(&mut rng, n, n);
        let mut q: Vec<Vec<f64>> = Vec::new();
        for i in 0..n {
            let mut v: Vec<f64> = g.row(i).to_vec();
            for u in &q {
                let p = dot(&v, u);
                for (vk, uk) in v.iter_mut().zip(u) {
                    *vk -= p * uk;
                }
            }
            let norm = dot(&v, &v).sqrt();
            for vk in v.iter_mut() {
                *vk /= norm;
            }
            q.push(v);
        }
        let qm = DenseMatrix::from_rows(&q).unwrap();
        // B = Q A Qᵀ ... rows of qm are orthonormal
        let aq = a
            .matmul(&{
                let mut qt = DenseMatrix::zeros(n, n);
                for i in 0..n {
                    for j in 0..n {
                        qt.set(i, j, qm.get(j, i));
                    }
                }
                qt
            })
            .unwrap();
        let b = qm.matmul(&aq).unwrap();
        let ea = sym_eigenvalues(&a).unwrap();
        let eb = sym_eigenvalues(&b).unwrap();
        for (x, y) in ea.iter().zip(&eb) {
            assert!((x - y).abs() <= 1e-8 * (1.0 + x.abs()), "{x} vs {y}");
        }
    }
}
