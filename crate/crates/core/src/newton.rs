//! The regularized linearized phaseless equation and the damped boundary
//! update.
//!
//! Writing `A = (pi/n) sum_j (M1 + M2)(., j)` for the model far field and
//! `A'[q]` for its derivative along the boundary perturbation `q`, the
//! linearized intensity is `|A|^2 + 2 Re(conj(A) A'[q])`. Each column of the
//! design matrix is that real functional applied to one basis perturbation.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::farfield::FrechetKernels;
use crate::geometry::{ParamGrid, Point, StarCurve};
use crate::linalg::{cholesky_solve, Matrix};
use crate::scalar::Real;

/// `xi = (dc1, dc2, dalpha_0..dalpha_M, dbeta_1..dbeta_M)`.
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateVector<T> {
    values: Vec<T>,
}

impl<T: Real> UpdateVector<T> {
    pub fn from_vec(values: Vec<T>) -> Result<Self> {
        if values.len() < 5 || values.len() % 2 == 0 {
            return Err(Error::invalid(format!("update vector must have length 2M+3 with M >= 1, got {}", values.len())));
        }
        Ok(Self { values })
    }

    pub fn zeros(m: usize) -> Self {
        Self { values: vec![T::zero(); 2 * m + 3] }
    }

    pub fn truncation(&self) -> usize {
        (self.values.len() - 3) / 2
    }

    pub fn as_slice(&self) -> &[T] {
        &self.values
    }

    pub fn dc(&self) -> Point<T> {
        Point::new(self.values[0], self.values[1])
    }

    /// Radial increments `(dalpha_0..dalpha_M, dbeta_1..dbeta_M)`.
    pub fn radial(&self) -> &[T] {
        &self.values[2..]
    }

    pub fn norm(&self) -> T {
        self.values.iter().fold(T::zero(), |s, v| s + *v * *v).sqrt()
    }

    pub fn scaled(&self, s: T) -> Self {
        Self { values: self.values.iter().map(|v| *v * s).collect() }
    }
}

/// `diag{1, 1, 2 pi, pi(1+m^2)^2 (m = 1..M), pi(1+m^2)^2 (m = 1..M)}`.
pub fn penalty_weights<T: Real>(m: usize) -> Vec<T> {
    let mode = |k: usize| {
        let kk = T::from_index(k * k);
        T::PI() * (T::one() + kk) * (T::one() + kk)
    };
    let mut w = vec![T::one(), T::one(), T::two_pi()];
    w.extend((1..=m).map(mode));
    w.extend((1..=m).map(mode));
    w
}

/// Column indices of `alpha_1` and `beta_1` in the update layout.
pub fn first_mode_columns(m: usize) -> [usize; 2] {
    [3, 3 + m]
}

#[derive(Debug, Clone)]
pub struct DesignMatrix<T> {
    /// `2n x (2M+3)`
    pub b: Matrix<T>,
    /// Intensity misfit on the grid.
    pub f: Vec<T>,
    pub penalty: Vec<T>,
}

/// Builds `B[s, col] = 2 (pi/n)^2 Re{ conj(sum_j (M1+M2)(s,j)) sum_j L_i(s,j) chi(tau_j) }`
/// over the basis `(1 with L1, 1 with L2, cos m tau with L3, sin m tau with L3)`.
pub fn assemble_design<T: Real>(
    kernels: &FrechetKernels<T>,
    residual: &[T],
    grid: &ParamGrid,
    m: usize,
) -> Result<DesignMatrix<T>> {
    let np = grid.len();
    if residual.len() != np {
        return Err(Error::Shape { expected: np, got: residual.len() });
    }
    if kernels.m1.rows() != np {
        return Err(Error::Shape { expected: np, got: kernels.m1.rows() });
    }
    if m < 1 {
        return Err(Error::invalid("truncation M must be at least 1"));
    }
    let knots = grid.knots::<T>();
    let cols = 2 * m + 3;
    // basis[c][j] = chi_c(tau_j) for the radial columns
    let mut basis: Vec<Vec<T>> = Vec::with_capacity(2 * m + 1);
    for k in 0..=m {
        basis.push(knots.iter().map(|&t| (T::from_index(k) * t).cos()).collect());
    }
    for k in 1..=m {
        basis.push(knots.iter().map(|&t| (T::from_index(k) * t).sin()).collect());
    }
    let a_model = kernels.farfield();
    let h = grid.step::<T>();
    let two = T::lit(2.0);
    let mut b = Matrix::zeros(np, cols);
    for s in 0..np {
        // a_model already carries one factor pi/n
        let conj_a = a_model[s].conj();
        let row_sum = |mat: &crate::linalg::CMatrix<T>, chi: Option<&[T]>| -> Complex<T> {
            let row = mat.row(s);
            match chi {
                None => row.iter().sum(),
                Some(c) => row.iter().zip(c).map(|(v, w)| *v * *w).sum(),
            }
        };
        b[(s, 0)] = two * h * (conj_a * row_sum(&kernels.l1, None)).re;
        b[(s, 1)] = two * h * (conj_a * row_sum(&kernels.l2, None)).re;
        for (c, chi) in basis.iter().enumerate() {
            b[(s, 2 + c)] = two * h * (conj_a * row_sum(&kernels.l3, Some(chi))).re;
        }
    }
    Ok(DesignMatrix { b, f: residual.to_vec(), penalty: penalty_weights(m) })
}

/// `lambda = sqrt(sum_s f_s^2)`, the Euclidean norm of the intensity misfit.
pub fn regularization_parameter<T: Real>(residual: &[T]) -> T {
    residual.iter().fold(T::zero(), |s, v| s + *v * *v).sqrt()
}

#[derive(Debug, Clone)]
pub struct UpdateSolution<T> {
    /// The damped step `rho xi`.
    pub xi: UpdateVector<T>,
    /// Regularization actually used after the floor.
    pub lambda: T,
    /// 1-norm condition number of the reduced normal matrix.
    pub condition: T,
}

/// Solves `(lambda I~ + B^T B) xi = B^T f` over the columns not listed in
/// `frozen` and returns `rho xi`; frozen entries are zero.
pub fn solve_update<T: Real>(
    design: &DesignMatrix<T>,
    lambda: T,
    rho: T,
    frozen: &[usize],
) -> Result<UpdateSolution<T>> {
    let cols = design.b.cols();
    if design.penalty.len() != cols {
        return Err(Error::Shape { expected: cols, got: design.penalty.len() });
    }
    if !(lambda >= T::zero()) {
        return Err(Error::invalid(format!("regularization must be nonnegative, got {lambda}")));
    }
    let free: Vec<usize> = (0..cols).filter(|c| !frozen.contains(c)).collect();
    let k = free.len();
    let mut normal = Matrix::<T>::zeros(k, k);
    let mut rhs = vec![T::zero(); k];
    for s in 0..design.b.rows() {
        let row = design.b.row(s);
        for (a, &ca) in free.iter().enumerate() {
            rhs[a] += row[ca] * design.f[s];
            for (bb, &cb) in free.iter().enumerate().skip(a) {
                normal[(a, bb)] += row[ca] * row[cb];
            }
        }
    }
    for a in 0..k {
        for bb in 0..a {
            normal[(a, bb)] = normal[(bb, a)];
        }
    }
    let trace = (0..k).fold(T::zero(), |s, a| s + normal[(a, a)]);
    let floor = T::lit(1e-12) * trace / T::from_index(cols);
    let mut lam = lambda.max(floor);
    let system = |lam: T| {
        let mut m = normal.clone();
        for (a, &c) in free.iter().enumerate() {
            m[(a, a)] += lam * design.penalty[c];
        }
        m
    };
    let mut mat = system(lam);
    let sol = match cholesky_solve(&mat, &rhs) {
        Ok(x) => x,
        Err(_) => {
            let bumped = floor.max(T::min_positive_value()) * T::lit(1e6);
            log::warn!("normal matrix not positive definite at lambda = {lam}; raising to {bumped}");
            lam = lam.max(bumped);
            mat = system(lam);
            cholesky_solve(&mat, &rhs)?
        }
    };
    let condition = spd_condition(&mat)?;
    let mut values = vec![T::zero(); cols];
    for (a, &c) in free.iter().enumerate() {
        values[c] = rho * sol[a];
    }
    Ok(UpdateSolution { xi: UpdateVector::from_vec(values)?, lambda: lam, condition })
}

fn spd_condition<T: Real>(a: &Matrix<T>) -> Result<T> {
    let n = a.rows();
    let one_norm = |m: &dyn Fn(usize, usize) -> T| {
        (0..n).map(|j| (0..n).fold(T::zero(), |s, i| s + m(i, j).abs())).fold(T::zero(), T::max)
    };
    let mut inv = Matrix::<T>::zeros(n, n);
    for j in 0..n {
        let mut e = vec![T::zero(); n];
        e[j] = T::one();
        let col = cholesky_solve(a, &e)?;
        for i in 0..n {
            inv[(i, j)] = col[i];
        }
    }
    Ok(one_norm(&|i, j| a[(i, j)]) * one_norm(&|i, j| inv[(i, j)]))
}

/// Outcome of [`apply_update`].
#[derive(Debug, Clone)]
pub struct AppliedUpdate<T> {
    pub curve: StarCurve<T>,
    /// Step actually taken after halving.
    pub xi: UpdateVector<T>,
    pub halvings: usize,
}

pub const MAX_HALVINGS: usize = 10;

/// `c += dc`, radial coefficients `+= d(alpha, beta)`. With `pinned`, the
/// first modes are set to the given `(alpha_1, beta_1)` before the
/// positivity guard, which halves the step until `r > 0` on the grid.
pub fn apply_update<T: Real>(
    curve: &StarCurve<T>,
    xi: &UpdateVector<T>,
    pinned: Option<(T, T)>,
    grid: &ParamGrid,
) -> Result<AppliedUpdate<T>> {
    let m = curve.truncation();
    if xi.truncation() != m {
        return Err(Error::Shape { expected: 2 * m + 3, got: xi.as_slice().len() });
    }
    let mut step = xi.clone();
    let mut last_err = None;
    for halvings in 0..=MAX_HALVINGS {
        let coeffs: Vec<T> = curve.coeffs().iter().zip(step.radial()).map(|(a, d)| *a + *d).collect();
        let mut next = StarCurve::new(curve.center() + step.dc(), coeffs)?;
        if let Some((a1, b1)) = pinned {
            next.set_alpha(1, a1);
            next.set_beta(1, b1);
        }
        match next.check_star_like(grid) {
            Ok(()) => return Ok(AppliedUpdate { curve: next, xi: step, halvings }),
            Err(e) => last_err = Some(e),
        }
        step = step.scaled(T::lit(0.5));
    }
    Err(last_err.expect("at least one attempt"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn design(rows: Vec<[f64; 5]>, f: Vec<f64>) -> DesignMatrix<f64> {
        let n = rows.len();
        DesignMatrix {
            b: Matrix::from_row_major(n, 5, rows.concat()).unwrap(),
            f,
            penalty: penalty_weights(1),
        }
    }

    #[test]
    fn penalty_layout() {
        let w = penalty_weights::<f64>(5);
        assert_eq!(w.len(), 13);
        assert_eq!(&w[..2], &[1.0, 1.0]);
        assert_eq!(w[2], 2.0 * std::f64::consts::PI);
        assert_eq!(w[3], std::f64::consts::PI * 4.0);
        assert_eq!(w[7], std::f64::consts::PI * 676.0);
        assert_eq!(w[8], w[3]);
        assert_eq!(w[9], w[4]);
    }

    #[test]
    fn zero_residual_zero_step() {
        let d = design(vec![[1.0, 0.5, 0.2, 0.0, 1.0], [0.3, -1.0, 0.0, 2.0, 0.1]], vec![0.0, 0.0]);
        let s = solve_update(&d, 0.1, 0.6, &[]).unwrap();
        assert!(s.xi.as_slice().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn frozen_columns_are_zero() {
        let d = design(vec![[1.0, 0.5, 0.2, 0.7, 1.0], [0.3, -1.0, 0.4, 2.0, 0.1], [0.2, 0.1, 0.9, -0.5, 0.3]], vec![1.0, -0.5, 0.25]);
        let s = solve_update(&d, 0.01, 1.0, &first_mode_columns(1)).unwrap();
        assert_eq!(s.xi.as_slice()[3], 0.0);
        assert_eq!(s.xi.as_slice()[4], 0.0);
        assert!(s.xi.norm() > 0.0);
    }

    #[test]
    fn apply_zero_update_is_identity() {
        let g = ParamGrid::new(8).unwrap();
        let c = StarCurve::new(Point::new(0.1, 0.2), vec![0.5, 0.1, 0.0, -0.05, 0.02]).unwrap();
        let out = apply_update(&c, &UpdateVector::zeros(2), None, &g).unwrap();
        assert_eq!(out.curve, c);
        assert_eq!(out.halvings, 0);
    }

    #[test]
    fn pinning_is_exact() {
        let g = ParamGrid::new(8).unwrap();
        let c = StarCurve::circle(Point::new(0.0, 0.0), 0.5, 2).unwrap();
        let xi = UpdateVector::from_vec(vec![0.1, 0.0, 0.01, 0.3, 0.0, -0.2, 0.0]).unwrap();
        let out = apply_update(&c, &xi, Some((0.125, -0.0625)), &g).unwrap();
        assert_eq!(out.curve.alpha(1), 0.125);
        assert_eq!(out.curve.beta(1), -0.0625);
    }

    #[test]
    fn guard_halves_then_gives_up() {
        let g = ParamGrid::new(8).unwrap();
        let c = StarCurve::circle(Point::new(0.0, 0.0), 0.1, 1).unwrap();
        // alpha_1 += 0.3 makes r(pi) = -0.2; one halving gives r(pi) = -0.05,
        // two give r(pi) = 0.025
        let xi = UpdateVector::from_vec(vec![0.0, 0.0, 0.0, 0.3, 0.0]).unwrap();
        let out = apply_update(&c, &xi, None, &g).unwrap();
        assert_eq!(out.halvings, 2);
        let bad = UpdateVector::from_vec(vec![0.0, 0.0, -1.0, 0.0, 0.0]).unwrap();
        let c2 = StarCurve::circle(Point::new(0.0, 0.0), 1e-6, 1).unwrap();
        assert!(matches!(apply_update(&c2, &bad, None, &g), Err(Error::DegenerateCurve { .. })));
    }
}
