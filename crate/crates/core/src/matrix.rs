//! Small dense matrix utilities shared by the solver and the simulator.
//!
//! Everything here is sized for desk-scale problems (dimension capped at
//! [`MAX_DIM`]): symmetric matrices get a cyclic Jacobi eigensolver, general
//! square matrices get LU with partial pivoting, and covariance matrices get
//! a square-root factor suitable for Gaussian sampling.

use crate::error::{Error, Result};

/// Hard cap on matrix dimension; the model dimension is the number of
/// resource types, which stays in the single digits in practice.
pub const MAX_DIM: usize = 64;

/// Relative eigenvalue threshold below which a symmetric matrix is treated
/// as not positive definite.
pub const TOL_PD: f64 = 1e-10;

/// Absolute eigenvalue slack for positive semi-definiteness acceptance.
pub const TOL_PSD: f64 = 1e-9;

/// Pivot-ratio ceiling beyond which a linear solve is rejected as singular.
const COND_LIMIT: f64 = 1e12;

const MAX_JACOBI_SWEEPS: usize = 128;

pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Dense symmetric matrix with exact mirror symmetry enforced at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>, // row-major, n*n
}

impl SymMatrix {
    /// Builds from row-major entries; rejects non-square data, out-of-range
    /// dimensions, non-finite values, and any asymmetry.
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&n) {
            return Err(Error::InvalidInstance(format!(
                "matrix dimension {n} outside [1, {MAX_DIM}]"
            )));
        }
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInstance("matrix entry is not finite".into()));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if data[i * n + j] != data[j * n + i] {
                    return Err(Error::InvalidInstance(format!(
                        "matrix not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(Self { n, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(n, data)
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self { n, data }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut data = vec![0.0; n * n];
        for (i, v) in diag.iter().enumerate() {
            data[i * n + i] = *v;
        }
        Self { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Copy with entry (i, j) and its mirror (j, i) replaced.
    pub fn with_entry(&self, i: usize, j: usize, value: f64) -> Result<Self> {
        if i >= self.n || j >= self.n {
            return Err(Error::BadDimension {
                dim: i.max(j),
                n: self.n,
            });
        }
        if !value.is_finite() {
            return Err(Error::InvalidInstance("matrix entry is not finite".into()));
        }
        let mut out = self.clone();
        out.data[i * self.n + j] = value;
        out.data[j * self.n + i] = value;
        Ok(out)
    }

    /// Copy with every off-diagonal entry zeroed.
    pub fn diagonal_part(&self) -> Self {
        let diag: Vec<f64> = (0..self.n).map(|i| self.get(i, i)).collect();
        Self::from_diagonal(&diag)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn is_diagonal(&self) -> bool {
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j && self.data[i * self.n + j] != 0.0 {
                    return false;
                }
            }
        }
        true
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|v| v * k).collect(),
        }
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n, "vector length must match dimension");
        (0..self.n)
            .map(|i| dot(&self.data[i * self.n..(i + 1) * self.n], v))
            .collect()
    }

    /// vᵀ M v.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        dot(&self.mul_vec(v), v)
    }

    pub fn to_general(&self) -> Matrix {
        Matrix {
            n: self.n,
            data: self.data.clone(),
        }
    }

    /// Eigendecomposition by cyclic Jacobi rotations. Returns eigenvalues in
    /// ascending order and the matching orthonormal eigenvectors as columns,
    /// so that `self == V · diag(vals) · Vᵀ`.
    pub fn eigen(&self) -> (Vec<f64>, Matrix) {
        let n = self.n;
        let mut a = self.data.clone();
        let mut v = Matrix::identity(n).data;
        let frob: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let stop = frob * f64::EPSILON;

        if n > 1 && frob > 0.0 {
            for _ in 0..MAX_JACOBI_SWEEPS {
                let mut off = 0.0;
                for p in 0..n {
                    for q in (p + 1)..n {
                        off += a[p * n + q] * a[p * n + q];
                    }
                }
                if off.sqrt() <= stop {
                    break;
                }
                for p in 0..n - 1 {
                    for q in (p + 1)..n {
                        let apq = a[p * n + q];
                        if apq == 0.0 {
                            continue;
                        }
                        let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                        let t = if theta.abs() > 1e150 {
                            // asymptotic form; theta^2 would overflow
                            1.0 / (2.0 * theta)
                        } else {
                            theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                        };
                        let c = 1.0 / (t * t + 1.0).sqrt();
                        let s = t * c;
                        // A <- Jᵀ A J with J the (p,q) Givens rotation
                        for k in 0..n {
                            let akp = a[k * n + p];
                            let akq = a[k * n + q];
                            a[k * n + p] = c * akp - s * akq;
                            a[k * n + q] = s * akp + c * akq;
                        }
                        for k in 0..n {
                            let apk = a[p * n + k];
                            let aqk = a[q * n + k];
                            a[p * n + k] = c * apk - s * aqk;
                            a[q * n + k] = s * apk + c * aqk;
                        }
                        for k in 0..n {
                            let vkp = v[k * n + p];
                            let vkq = v[k * n + q];
                            v[k * n + p] = c * vkp - s * vkq;
                            v[k * n + q] = s * vkp + c * vkq;
                        }
                    }
                }
            }
        }

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| {
            a[i * n + i]
                .partial_cmp(&a[j * n + j])
                .expect("eigenvalues are finite")
        });
        let vals: Vec<f64> = order.iter().map(|&i| a[i * n + i]).collect();
        let mut vecs = vec![0.0; n * n];
        for (col, &src) in order.iter().enumerate() {
            for row in 0..n {
                vecs[row * n + col] = v[row * n + src];
            }
        }
        (vals, Matrix { n, data: vecs })
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigen().0[0]
    }

    /// True iff the minimum eigenvalue is at least `-tol`.
    pub fn is_psd(&self, tol: f64) -> bool {
        debug_assert!(tol >= 0.0);
        self.min_eigenvalue() >= -tol
    }

    /// True iff the minimum eigenvalue clears the relative positive-definite
    /// threshold [`TOL_PD`].
    pub fn is_pd(&self) -> bool {
        let vals = self.eigen().0;
        let max_abs = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        max_abs > 0.0 && vals[0] > TOL_PD * max_abs
    }

    /// Inverse via the eigendecomposition. Errors with [`Error::SingularMatrix`]
    /// unless the matrix is positive definite at the [`TOL_PD`] threshold.
    pub fn invert(&self) -> Result<SymMatrix> {
        let n = self.n;
        let (vals, vecs) = self.eigen();
        let max_abs = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if max_abs == 0.0 || vals[0] <= TOL_PD * max_abs {
            return Err(Error::SingularMatrix);
        }
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let sum: f64 = vals
                    .iter()
                    .enumerate()
                    .map(|(k, &l)| vecs.data[i * n + k] * vecs.data[j * n + k] / l)
                    .sum();
                data[i * n + j] = sum;
                data[j * n + i] = sum;
            }
        }
        Ok(SymMatrix { n, data })
    }

    /// Square-root factor L with L·Lᵀ equal to the matrix, built from the
    /// eigendecomposition with negative eigenvalues clipped to zero. Errors
    /// with [`Error::NotPsd`] when the matrix fails the [`TOL_PSD`] check.
    pub fn sampling_factor(&self) -> Result<Matrix> {
        let n = self.n;
        let (vals, vecs) = self.eigen();
        if vals[0] < -TOL_PSD {
            return Err(Error::NotPsd);
        }
        let roots: Vec<f64> = vals.iter().map(|&l| l.max(0.0).sqrt()).collect();
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for (k, root) in roots.iter().enumerate() {
                data[i * n + k] = vecs.data[i * n + k] * root;
            }
        }
        Ok(Matrix { n, data })
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Dense square matrix without symmetry assumptions.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>, // row-major, n*n
}

impl Matrix {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self { n, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|v| v * k).collect(),
        }
    }

    pub fn add(&self, other: &Matrix) -> Self {
        assert_eq!(self.n, other.n, "matrix dimensions must match");
        Self {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn mul(&self, other: &Matrix) -> Self {
        assert_eq!(self.n, other.n, "matrix dimensions must match");
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let aik = self.data[i * n + k];
                if aik == 0.0 {
                    continue;
                }
                for j in 0..n {
                    data[i * n + j] += aik * other.data[k * n + j];
                }
            }
        }
        Self { n, data }
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n, "vector length must match dimension");
        (0..self.n)
            .map(|i| dot(&self.data[i * self.n..(i + 1) * self.n], v))
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                data[j * n + i] = self.data[i * n + j];
            }
        }
        Self { n, data }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Solves `self · x = rhs` by LU with partial pivoting plus one step of
    /// iterative refinement. Rejects rank-deficient or badly conditioned
    /// systems (pivot ratio above 1e12) with [`Error::SingularMatrix`].
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if rhs.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: rhs.len(),
            });
        }
        let n = self.n;
        if n == 1 {
            let pivot = self.data[0];
            if pivot == 0.0 {
                return Err(Error::SingularMatrix);
            }
            return Ok(vec![rhs[0] / pivot]);
        }

        let factors = self.lu_factor()?;
        let mut x = factors.solve(rhs);
        // one refinement pass keeps residuals near machine precision even
        // when the pivot ratio approaches the acceptance limit
        let residual: Vec<f64> = self
            .mul_vec(&x)
            .iter()
            .zip(rhs)
            .map(|(ax, b)| b - ax)
            .collect();
        let correction = factors.solve(&residual);
        for (xi, ci) in x.iter_mut().zip(&correction) {
            *xi += ci;
        }
        Ok(x)
    }

    fn lu_factor(&self) -> Result<LuFactors> {
        let n = self.n;
        let mut lu = self.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut min_pivot = f64::INFINITY;
        let mut max_pivot = 0.0f64;
        for k in 0..n {
            let mut pivot_row = k;
            let mut best = lu[k * n + k].abs();
            for r in (k + 1)..n {
                let cand = lu[r * n + k].abs();
                if cand > best {
                    best = cand;
                    pivot_row = r;
                }
            }
            if best == 0.0 {
                return Err(Error::SingularMatrix);
            }
            if pivot_row != k {
                for j in 0..n {
                    lu.swap(k * n + j, pivot_row * n + j);
                }
                perm.swap(k, pivot_row);
            }
            let pivot = lu[k * n + k];
            min_pivot = min_pivot.min(pivot.abs());
            max_pivot = max_pivot.max(pivot.abs());
            for r in (k + 1)..n {
                let factor = lu[r * n + k] / pivot;
                lu[r * n + k] = factor;
                for j in (k + 1)..n {
                    lu[r * n + j] -= factor * lu[k * n + j];
                }
            }
        }
        if max_pivot / min_pivot > COND_LIMIT {
            return Err(Error::SingularMatrix);
        }
        Ok(LuFactors { n, lu, perm })
    }
}

struct LuFactors {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl LuFactors {
    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| rhs[p]).collect();
        for i in 1..n {
            for j in 0..i {
                x[i] -= self.lu[i * n + j] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                x[i] -= self.lu[i * n + j] * x[j];
            }
            x[i] /= self.lu[i * n + i];
        }
        x
    }
}
