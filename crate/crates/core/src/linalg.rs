//! Small dense linear algebra: just enough for the joint least-squares fit
//! and Gaussian simulation (Householder QR and Cholesky).

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: Real> Matrix<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![F::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = F::one();
        }
        m
    }

    /// Build from row slices; all rows must share a length.
    pub fn from_rows(rows: &[Vec<F>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::domain("ragged rows in matrix construction"));
        }
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            data.extend_from_slice(row);
        }
        Ok(Matrix { rows: r, cols: c, data })
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [F] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// `x^T A x` for a square matrix.
    pub fn quadratic_form(&self, x: &[F]) -> F {
        debug_assert_eq!(self.rows, self.cols);
        debug_assert_eq!(x.len(), self.cols);
        let mut acc = F::zero();
        for i in 0..self.rows {
            let row = self.row(i);
            let mut dot = F::zero();
            for j in 0..self.cols {
                dot += row[j] * x[j];
            }
            acc += x[i] * dot;
        }
        acc
    }

    /// Lower-triangular Cholesky factor `L` with `L L^T = A`. Fails when the
    /// matrix is not symmetric positive-definite.
    pub fn cholesky(&self) -> Result<Matrix<F>> {
        if self.rows != self.cols {
            return Err(Error::NotSpd);
        }
        let n = self.rows;
        let sym_tol = F::of(1e-8);
        for i in 0..n {
            for j in (i + 1)..n {
                let scale = F::one().max(self[(i, j)].abs()).max(self[(j, i)].abs());
                if (self[(i, j)] - self[(j, i)]).abs() > sym_tol * scale {
                    return Err(Error::NotSpd);
                }
            }
        }
        let mut l = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let mut sum = self[(i, j)];
                for k in 0..j {
                    sum -= l[(i, k)] * l[(j, k)];
                }
                if i == j {
                    if sum <= F::zero() {
                        return Err(Error::NotSpd);
                    }
                    l[(i, i)] = sum.sqrt();
                } else {
                    l[(i, j)] = sum / l[(j, j)];
                }
            }
        }
        Ok(l)
    }

    /// `L z` for a lower-triangular factor, used to color standard normals.
    pub fn lower_mul(&self, z: &[F]) -> Vec<F> {
        let n = self.rows;
        let mut out = vec![F::zero(); n];
        for i in 0..n {
            let mut acc = F::zero();
            for j in 0..=i {
                acc += self[(i, j)] * z[j];
            }
            out[i] = acc;
        }
        out
    }
}

impl<F: Real> std::ops::Index<(usize, usize)> for Matrix<F> {
    type Output = F;
    fn index(&self, (i, j): (usize, usize)) -> &F {
        &self.data[i * self.cols + j]
    }
}

impl<F: Real> std::ops::IndexMut<(usize, usize)> for Matrix<F> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut F {
        &mut self.data[i * self.cols + j]
    }
}

/// Minimum-norm residual solution of `A x = b` via Householder QR.
///
/// Returns `Err` with the offending column when a diagonal of `R` collapses,
/// i.e. the design is (numerically) rank deficient.
pub fn least_squares<F: Real>(a: &Matrix<F>, b: &[F]) -> std::result::Result<Vec<F>, usize> {
    let (m, n) = (a.nrows(), a.ncols());
    debug_assert_eq!(b.len(), m);
    debug_assert!(m >= n, "least squares needs at least as many rows as columns");
    let mut r = a.clone();
    let mut rhs = b.to_vec();

    // Column scale for the rank tolerance.
    let mut max_norm = F::zero();
    for j in 0..n {
        let mut s = F::zero();
        for i in 0..m {
            s += r[(i, j)] * r[(i, j)];
        }
        max_norm = max_norm.max(s.sqrt());
    }
    let tol = F::epsilon() * F::of_usize(m.max(n)) * max_norm.max(F::one());

    for k in 0..n {
        // Householder vector for column k.
        let mut norm = F::zero();
        for i in k..m {
            norm += r[(i, k)] * r[(i, k)];
        }
        norm = norm.sqrt();
        if norm <= tol {
            return Err(k);
        }
        let alpha = if r[(k, k)] >= F::zero() { -norm } else { norm };
        let mut v = vec![F::zero(); m - k];
        v[0] = r[(k, k)] - alpha;
        for i in (k + 1)..m {
            v[i - k] = r[(i, k)];
        }
        let vtv: F = v.iter().map(|&x| x * x).sum();
        if vtv > F::zero() {
            // Apply the reflector to the remaining columns and the rhs.
            for j in k..n {
                let mut dot = F::zero();
                for i in k..m {
                    dot += v[i - k] * r[(i, j)];
                }
                let scale = (F::one() + F::one()) * dot / vtv;
                for i in k..m {
                    r[(i, j)] -= scale * v[i - k];
                }
            }
            let mut dot = F::zero();
            for i in k..m {
                dot += v[i - k] * rhs[i];
            }
            let scale = (F::one() + F::one()) * dot / vtv;
            for i in k..m {
                rhs[i] -= scale * v[i - k];
            }
        }
        r[(k, k)] = alpha;
    }

    // Back substitution on the triangular system.
    let mut x = vec![F::zero(); n];
    for k in (0..n).rev() {
        let mut acc = rhs[k];
        for j in (k + 1)..n {
            acc -= r[(k, j)] * x[j];
        }
        if r[(k, k)].abs() <= tol {
            return Err(k);
        }
        x[k] = acc / r[(k, k)];
    }
    Ok(x)
}
