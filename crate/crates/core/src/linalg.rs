//! Small dense matrices: row-major storage, complex LU with partial pivoting
//! and a real Cholesky solve. System sizes here stay in the low hundreds.

use std::ops::{Add, Index, IndexMut, Mul};

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

pub type CMatrix<T> = Matrix<Complex<T>>;

impl<S: Copy + Zero> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![S::zero(); rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<S>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape { expected: rows * cols, got: data.len() });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[S] {
        &self.data
    }

    /// Copies the `rows x cols` block starting at `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Self) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(r0 + i, c0 + j)] = block[(i, j)];
            }
        }
    }

    pub fn map<U: Copy + Zero>(&self, f: impl Fn(S) -> U) -> Matrix<U> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&v| f(v)).collect() }
    }
}

impl<S> Matrix<S>
where
    S: Copy + Zero + Add<Output = S> + Mul<Output = S>,
{
    pub fn mul_vec(&self, x: &[S]) -> Vec<S> {
        assert_eq!(x.len(), self.cols, "matrix-vector shape mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).fold(S::zero(), |acc, (&a, &b)| acc + a * b))
            .collect()
    }
}

impl<S> Index<(usize, usize)> for Matrix<S> {
    type Output = S;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &S {
        &self.data[i * self.cols + j]
    }
}

impl<S> IndexMut<(usize, usize)> for Matrix<S> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        &mut self.data[i * self.cols + j]
    }
}

/// Maximum absolute column sum.
pub fn one_norm<T: Real>(a: &CMatrix<T>) -> T {
    (0..a.cols())
        .map(|j| (0..a.rows()).fold(T::zero(), |s, i| s + a[(i, j)].norm()))
        .fold(T::zero(), T::max)
}

/// `PA = LU` with row pivoting, unit lower triangle stored below the diagonal.
#[derive(Debug, Clone)]
pub struct ComplexLu<T> {
    lu: CMatrix<T>,
    perm: Vec<usize>,
}

impl<T: Real> ComplexLu<T> {
    pub fn factor(a: &CMatrix<T>) -> Result<Self> {
        let n = a.rows();
        if a.cols() != n {
            return Err(Error::Shape { expected: n, got: a.cols() });
        }
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pivot_abs) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, -T::one()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(pivot_abs > T::zero()) {
                return Err(Error::Singular(k));
            }
            if p != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
                perm.swap(k, p);
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let factor = lu[(i, k)] / pivot;
                lu[(i, k)] = factor;
                if factor.is_zero() {
                    continue;
                }
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] = lu[(i, j)] - factor * u;
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.lu.rows()
    }

    pub fn solve(&self, b: &[Complex<T>]) -> Vec<Complex<T>> {
        let n = self.dim();
        assert_eq!(b.len(), n, "rhs length mismatch");
        let mut x: Vec<Complex<T>> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s = s - self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s = s - self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        x
    }

    pub fn inverse(&self) -> CMatrix<T> {
        let n = self.dim();
        let mut inv = CMatrix::zeros(n, n);
        let mut e = vec![Complex::zero(); n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = Complex::zero());
            e[j] = Complex::new(T::one(), T::zero());
            let col = self.solve(&e);
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        inv
    }

    /// Exact 1-norm condition number of the factored matrix `a`.
    pub fn condition_number(&self, a: &CMatrix<T>) -> T {
        one_norm(a) * one_norm(&self.inverse())
    }
}

/// Solves the symmetric positive definite system `a x = b` by Cholesky.
/// Fails with [`Error::Singular`] when a pivot is not positive.
pub fn cholesky_solve<T: Real>(a: &Matrix<T>, b: &[T]) -> Result<Vec<T>> {
    let n = a.rows();
    if a.cols() != n || b.len() != n {
        return Err(Error::Shape { expected: n, got: b.len().min(a.cols()) });
    }
    let mut l = Matrix::<T>::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > T::zero()) {
            return Err(Error::Singular(j));
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            let v = l[(i, k)] * y[k];
            y[i] -= v;
        }
        y[i] /= l[(i, i)];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            let v = l[(k, i)] * y[k];
            y[i] -= v;
        }
        y[i] /= l[(i, i)];
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn lu_solves_small_complex_system() {
        let a = CMatrix::from_row_major(
            3,
            3,
            vec![c(0.0, 1.0), c(2.0, 0.0), c(1.0, -1.0), c(4.0, 0.5), c(1.0, 1.0), c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 2.0), c(3.0, 0.0)],
        )
        .unwrap();
        let x = vec![c(1.0, -2.0), c(0.5, 0.5), c(-3.0, 1.0)];
        let b = a.mul_vec(&x);
        let lu = ComplexLu::factor(&a).unwrap();
        let got = lu.solve(&b);
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).norm() < 1e-14);
        }
        let inv = lu.inverse();
        let id: CMatrix<f64> = Matrix::from_fn(3, 3, |i, j| {
            (0..3).fold(Complex::zero(), |s, k| s + a[(i, k)] * inv[(k, j)])
        });
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((id[(i, j)] - c(e, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn singular_matrix_reported() {
        let a = CMatrix::<f64>::from_fn(2, 2, |_, _| c(1.0, 0.0));
        assert!(matches!(ComplexLu::factor(&a), Err(Error::Singular(1))));
    }

    #[test]
    fn identity_has_unit_condition() {
        let a = CMatrix::<f64>::from_fn(4, 4, |i, j| if i == j { c(2.0, 0.0) } else { c(0.0, 0.0) });
        let lu = ComplexLu::factor(&a).unwrap();
        assert!((lu.condition_number(&a) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cholesky_matches_hand_solution() {
        // [[4, 2], [2, 3]] x = [2, 1]  =>  x = [0.5, 0]
        let a = Matrix::<f64>::from_row_major(2, 2, vec![4.0, 2.0, 2.0, 3.0]).unwrap();
        let x = cholesky_solve(&a, &[2.0, 1.0]).unwrap();
        assert!((x[0] - 0.5).abs() < 1e-15 && x[1].abs() < 1e-15);
        let indefinite = Matrix::from_row_major(2, 2, vec![1.0, 2.0, 2.0, 1.0]).unwrap();
        assert!(cholesky_solve(&indefinite, &[1.0, 1.0]).is_err());
    }
}
