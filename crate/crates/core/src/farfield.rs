//! Far-field operators of the single-layer model, their derivatives with
//! respect to the obstacle boundary, and the phaseless misfit.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::field_system::DensityPair;
use crate::forward::{FarFieldSamples, PhaselessSamples};
use crate::geometry::{Boundary, Disk, ParamGrid, Point};
use crate::linalg::CMatrix;
use crate::scalar::Real;

pub use crate::forward::farfield_constant as gamma;

/// `E(s, j) = exp(-i kappa x_hat(t_s) . p(tau_j))`.
fn exponential_table<T: Real>(curve: &dyn Boundary<T>, kappa: T, knots: &[T]) -> CMatrix<T> {
    let pts: Vec<Point<T>> = knots.iter().map(|&t| curve.point(t)).collect();
    CMatrix::from_fn(knots.len(), knots.len(), |s, j| {
        Complex::from_polar(T::one(), -kappa * Point::unit(knots[s]).dot(pts[j]))
    })
}

fn check_len<T>(v: &[T], expected: usize) -> Result<()> {
    if v.len() != expected {
        return Err(Error::Shape { expected, got: v.len() });
    }
    Ok(())
}

/// `A_1 psi_1 + A_2 psi_2` at the grid angles, with
/// `A_j psi(t) = -gamma (pi/n) sum_j exp(-i kappa x_hat(t).p(tau_j)) psi(tau_j)`.
pub fn farfield_from_densities<T: Real>(
    obstacle: &dyn Boundary<T>,
    ball: Option<&Disk<T>>,
    densities: &DensityPair<T>,
    grid: &ParamGrid,
    kappa: T,
) -> Result<FarFieldSamples<T>> {
    let knots = grid.knots::<T>();
    let pre = -gamma(kappa) * grid.step::<T>();
    check_len(&densities.psi1, grid.len())?;
    let mut values = exponential_table(obstacle, kappa, &knots).mul_vec(&densities.psi1);
    match (ball, &densities.psi2) {
        (Some(b), Some(psi2)) => {
            check_len(psi2, grid.len())?;
            let v2 = exponential_table(b, kappa, &knots).mul_vec(psi2);
            values.iter_mut().zip(v2).for_each(|(a, b)| *a += b);
        }
        (None, None) => {}
        _ => return Err(Error::invalid("ball and psi2 must be given together")),
    }
    values.iter_mut().for_each(|v| *v *= pre);
    FarFieldSamples::new(knots, values)
}

/// Kernels sampled at `(t_s, tau_j)`:
/// `M1 = -gamma E1 psi1`, `M2 = -gamma E2 psi2`, and
/// `L_i = i kappa gamma E1 psi1` times `cos t`, `sin t`, `cos(t - tau)`.
#[derive(Debug, Clone)]
pub struct FrechetKernels<T> {
    pub m1: CMatrix<T>,
    pub m2: Option<CMatrix<T>>,
    pub l1: CMatrix<T>,
    pub l2: CMatrix<T>,
    pub l3: CMatrix<T>,
    step: T,
}

impl<T: Real> FrechetKernels<T> {
    /// `(pi/n) sum_j (M1 + M2)(s, j)`, the model far field.
    pub fn farfield(&self) -> Vec<Complex<T>> {
        let n = self.m1.rows();
        (0..n)
            .map(|s| {
                let mut acc: Complex<T> = self.m1.row(s).iter().sum();
                if let Some(m2) = &self.m2 {
                    acc += m2.row(s).iter().sum::<Complex<T>>();
                }
                acc * self.step
            })
            .collect()
    }

    /// Derivative of `A_1` (densities held fixed) in the direction
    /// `q(tau) = (dc1, dc2) + dr(tau) (cos tau, sin tau)`, `dr` given on the grid.
    pub fn derivative(&self, dc: Point<T>, dr: &[T]) -> Vec<Complex<T>> {
        let n = self.l1.rows();
        (0..n)
            .map(|s| {
                let mut acc = Complex::new(T::zero(), T::zero());
                for j in 0..n {
                    acc += self.l1[(s, j)] * dc.x + self.l2[(s, j)] * dc.y + self.l3[(s, j)] * dr[j];
                }
                acc * self.step
            })
            .collect()
    }

    pub fn step(&self) -> T {
        self.step
    }
}

pub fn frechet_kernels<T: Real>(
    obstacle: &dyn Boundary<T>,
    ball: Option<&Disk<T>>,
    densities: &DensityPair<T>,
    grid: &ParamGrid,
    kappa: T,
) -> Result<FrechetKernels<T>> {
    let knots = grid.knots::<T>();
    let np = grid.len();
    check_len(&densities.psi1, np)?;
    let g = gamma(kappa);
    let e1 = exponential_table(obstacle, kappa, &knots);
    let m1 = CMatrix::from_fn(np, np, |s, j| -g * e1[(s, j)] * densities.psi1[j]);
    let m2 = match (ball, &densities.psi2) {
        (Some(b), Some(psi2)) => {
            check_len(psi2, np)?;
            let e2 = exponential_table(b, kappa, &knots);
            Some(CMatrix::from_fn(np, np, |s, j| -g * e2[(s, j)] * psi2[j]))
        }
        (None, None) => None,
        _ => return Err(Error::invalid("ball and psi2 must be given together")),
    };
    let base = CMatrix::from_fn(np, np, |s, j| Complex::new(T::zero(), kappa) * g * e1[(s, j)] * densities.psi1[j]);
    let l1 = CMatrix::from_fn(np, np, |s, j| base[(s, j)] * knots[s].cos());
    let l2 = CMatrix::from_fn(np, np, |s, j| base[(s, j)] * knots[s].sin());
    let l3 = CMatrix::from_fn(np, np, |s, j| base[(s, j)] * (knots[s] - knots[j]).cos());
    Ok(FrechetKernels { m1, m2, l1, l2, l3, step: grid.step() })
}

/// `f = |w_inf|^2 - |A_inf|^2` entrywise.
pub fn phaseless_residual<T: Real>(model: &FarFieldSamples<T>, data: &PhaselessSamples<T>) -> Result<Vec<T>> {
    check_len(&data.intensities, model.len())?;
    Ok(data.intensities.iter().zip(&model.values).map(|(d, m)| *d - m.norm_sqr()).collect())
}

/// `sqrt((2 pi / len) sum v^2)`: the trapezoid L2 norm on a periodic grid.
pub fn weighted_l2_norm<T: Real>(values: &[T]) -> T {
    if values.is_empty() {
        return T::zero();
    }
    let w = T::two_pi() / T::from_index(values.len());
    (w * values.iter().fold(T::zero(), |s, v| s + *v * *v)).sqrt()
}

/// `E = ||f|| / ||data||`.
pub fn stopping_error<T: Real>(model: &FarFieldSamples<T>, data: &PhaselessSamples<T>) -> Result<T> {
    let f = phaseless_residual(model, data)?;
    relative_misfit(&f, &data.intensities)
}

pub(crate) fn relative_misfit<T: Real>(f: &[T], data: &[T]) -> Result<T> {
    let d = weighted_l2_norm(data);
    if !(d > T::zero()) {
        return Err(Error::invalid("data has zero norm; relative error undefined"));
    }
    Ok(weighted_l2_norm(f) / d)
}
