//! Small dense matrices and LU factorization with partial pivoting.
//!
//! Every system in this library lives on a chart with n ≤ 3, so the two-form
//! matrices are at most 6×6; a plain row-major matrix with O(n³) kernels is
//! the right tool.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Condition-estimate threshold beyond which a matrix is treated as singular.
pub const SINGULARITY_COND: f64 = 1e12;

#[derive(Clone, PartialEq)]
pub struct Matrix<S = f64> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    pub fn from_rows(rows: &[&[S]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Matrix {
            rows: r,
            cols: c,
            data,
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn diagonal(entries: &[S]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = e;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: S) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] * s)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] + other[(i, j)])
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] - other[(i, j)])
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                for j in 0..other.cols {
                    out[(i, j)] = out[(i, j)] + a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[S]) -> Vec<S> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| self[(i, j)] * v[j])
                    .fold(S::zero(), |a, b| a + b)
            })
            .collect()
    }

    /// v^T M w (evaluation of a bilinear form).
    pub fn bilinear(&self, v: &[S], w: &[S]) -> S {
        let mw = self.matvec(w);
        v.iter()
            .zip(mw.iter())
            .map(|(&a, &b)| a * b)
            .fold(S::zero(), |a, b| a + b)
    }

    /// Max row sum of absolute values.
    pub fn norm_inf(&self) -> S {
        let mut best = S::zero();
        for i in 0..self.rows {
            let mut sum = S::zero();
            for j in 0..self.cols {
                sum = sum + self[(i, j)].abs();
            }
            if sum > best {
                best = sum;
            }
        }
        best
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> S {
        self.data
            .iter()
            .map(|x| x.abs())
            .fold(S::zero(), |a, b| if b > a { b } else { a })
    }

    /// Antisymmetric part `M - Mᵀ`.
    pub fn antisymmetrize(&self) -> Self {
        assert!(self.is_square());
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] - self[(j, i)])
    }

    /// ‖M + Mᵀ‖_max, zero for an antisymmetric matrix.
    pub fn antisymmetry_defect(&self) -> S {
        self.add(&self.transpose()).max_abs()
    }

    /// Copies `block` into `self` with top-left corner at (`r0`, `c0`).
    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Matrix<S>) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(r0 + i, c0 + j)] = block[(i, j)];
            }
        }
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Matrix<S> {
        Matrix::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }

    /// Maps the value parts through `f` (used to cast between scalar types).
    pub fn map<T: Scalar>(&self, f: impl Fn(S) -> T) -> Matrix<T> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }
}

impl<S: Scalar> std::ops::Index<(usize, usize)> for Matrix<S> {
    type Output = S;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &S {
        &self.data[i * self.cols + j]
    }
}

impl<S: Scalar> std::ops::IndexMut<(usize, usize)> for Matrix<S> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        &mut self.data[i * self.cols + j]
    }
}

impl<S: Scalar> std::fmt::Debug for Matrix<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{:?} ", self[(i, j)])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// LU factorization with partial pivoting.
pub struct Lu<S = f64> {
    lu: Matrix<S>,
    perm: Vec<usize>,
    sign: S,
}

impl<S: Scalar> Lu<S> {
    /// Factors `a`; fails with `SingularJacobian` on an exactly unusable pivot.
    pub fn factor(a: &Matrix<S>) -> Result<Self> {
        assert!(a.is_square(), "LU requires a square matrix");
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = S::one();
        for k in 0..n {
            let mut p = k;
            let mut best = lu[(k, k)].abs();
            for i in k + 1..n {
                let v = lu[(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == S::zero() || !best.is_finite() {
                return Err(Error::SingularJacobian {
                    cond: f64::INFINITY,
                });
            }
            if p != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
                perm.swap(k, p);
                sign = -sign;
            }
            for i in k + 1..n {
                let factor = lu[(i, k)] / lu[(k, k)];
                lu[(i, k)] = factor;
                for j in k + 1..n {
                    let sub = factor * lu[(k, j)];
                    lu[(i, j)] = lu[(i, j)] - sub;
                }
            }
        }
        Ok(Lu { lu, perm, sign })
    }

    pub fn solve(&self, b: &[S]) -> Vec<S> {
        let n = self.lu.rows();
        assert_eq!(b.len(), n);
        let mut x: Vec<S> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            for j in 0..i {
                let sub = self.lu[(i, j)] * x[j];
                x[i] = x[i] - sub;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let sub = self.lu[(i, j)] * x[j];
                x[i] = x[i] - sub;
            }
            x[i] = x[i] / self.lu[(i, i)];
        }
        x
    }

    pub fn determinant(&self) -> S {
        let mut det = self.sign;
        for i in 0..self.lu.rows() {
            det = det * self.lu[(i, i)];
        }
        det
    }

    pub fn inverse(&self) -> Matrix<S> {
        let n = self.lu.rows();
        let mut inv = Matrix::zeros(n, n);
        let mut e = vec![S::zero(); n];
        for j in 0..n {
            e[j] = S::one();
            let col = self.solve(&e);
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
            e[j] = S::zero();
        }
        inv
    }
}

impl Lu<f64> {
    /// ∞-norm condition estimate through the explicit inverse.
    pub fn cond_inf(&self, a: &Matrix<f64>) -> f64 {
        a.norm_inf() * self.inverse().norm_inf()
    }
}

/// Condition estimate of `a`; infinite when factorization fails.
pub fn cond_inf(a: &Matrix<f64>) -> f64 {
    match Lu::factor(a) {
        Ok(lu) => lu.cond_inf(a),
        Err(_) => f64::INFINITY,
    }
}

/// Whether `a` is invertible under the library's condition threshold.
pub fn is_invertible(a: &Matrix<f64>) -> bool {
    cond_inf(a) < SINGULARITY_COND
}

/// Solves `a x = b`, reporting `SingularJacobian` with the condition estimate.
pub fn solve_checked(a: &Matrix<f64>, b: &[f64]) -> Result<Vec<f64>> {
    let lu = Lu::factor(a)?;
    let cond = lu.cond_inf(a);
    if cond > SINGULARITY_COND {
        return Err(Error::SingularJacobian { cond });
    }
    Ok(lu.solve(b))
}

pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, &b| a.max(b.abs()))
}

pub fn sub_vec<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| x * y)
        .fold(S::zero(), |acc, t| acc + t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_solves_known_system() {
        let a = Matrix::from_rows(&[&[2.0f64, 1.0, 1.0], &[4.0, -6.0, 0.0], &[-2.0, 7.0, 2.0]]);
        let lu = Lu::factor(&a).unwrap();
        let x = lu.solve(&[5.0f64, -2.0, 9.0]);
        let b = a.matvec(&x);
        for (bi, want) in b.iter().zip([5.0, -2.0, 9.0]) {
            assert!((bi - want).abs() < 1e-12);
        }
        assert!((lu.determinant() - (-16.0)).abs() < 1e-10);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let a = Matrix::from_rows(&[&[1.0f64, 2.0], &[2.0, 4.0]]);
        assert!(!is_invertible(&a));
        let zero = Matrix::<f64>::zeros(2, 2);
        assert!(matches!(
            Lu::factor(&zero),
            Err(Error::SingularJacobian { .. })
        ));
    }

    #[test]
    fn inverse_and_condition() {
        let a = Matrix::diagonal(&[2.0f64, 0.5]);
        let lu = Lu::factor(&a).unwrap();
        let inv = lu.inverse();
        assert!((inv[(0, 0)] - 0.5).abs() < 1e-15);
        assert!((inv[(1, 1)] - 2.0).abs() < 1e-15);
        assert!((lu.cond_inf(&a) - 4.0).abs() < 1e-12);
        assert!(is_invertible(&a));
    }

    #[test]
    fn generic_scalar_lu() {
        use crate::dual::Dual;
        // solve with dual entries: derivative of the solution of (a x = b) wrt a11
        let a = Matrix::from_rows(&[
            &[Dual::variable(2.0f64), Dual::constant(0.0)],
            &[Dual::constant(0.0), Dual::constant(1.0)],
        ]);
        let lu = Lu::factor(&a).unwrap();
        let x = lu.solve(&[Dual::constant(1.0), Dual::constant(1.0)]);
        // x0 = 1/a11 -> dx0/da11 = -1/a11² = -0.25
        assert!((x[0].re - 0.5).abs() < 1e-15);
        assert!((x[0].eps + 0.25).abs() < 1e-15);
    }
}
