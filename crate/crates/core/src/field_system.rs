//! Single-layer field equations for the densities `psi_j = G_j g_j` on the
//! obstacle iterate and the reference ball:
//!
//! `sum_j int Phi(p_l(t), p_j(tau)) psi_j(tau) dtau = u^i(p_l(t))`, `l = 1, 2`,
//!
//! discretized with the logarithmic product quadrature on self blocks and the
//! trapezoid rule on cross blocks.

use std::io::{self, Read, Write};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::forward::{check_disjoint, IncidentWave, CONDITION_LIMIT};
use crate::geometry::{Boundary, Disk, ParamGrid, Point};
use crate::linalg::{one_norm, CMatrix, ComplexLu};
use crate::scalar::Real;
use crate::specfun::cylinder_functions;

/// `R_j = -(2 pi/n) sum_{m=1}^{n-1} cos(m j pi/n)/m - (-1)^j pi/n^2`,
/// `j = 0..2n-1`.
pub fn log_quadrature_weights<T: Real>(n: usize) -> Vec<T> {
    assert!(n >= 1, "quadrature needs n >= 1");
    let nf = T::from_index(n);
    let step = T::PI() / nf;
    (0..2 * n)
        .map(|j| {
            let mut s = T::zero();
            for m in 1..n {
                // reduce m j mod 2n so the cosine argument stays small
                let arg = T::from_index((m * j) % (2 * n)) * step;
                s += arg.cos() / T::from_index(m);
            }
            let sign = if j % 2 == 0 { T::one() } else { -T::one() };
            -(T::two_pi() / nf) * s - sign * T::PI() / (nf * nf)
        })
        .collect()
}

/// Smooth factors of the single-layer kernel on one curve:
/// `K(t, tau) = K1 ln(4 sin^2((t - tau)/2)) + K2` with
/// `K1 = -J0(kappa |p(t) - p(tau)|)/(4 pi)`.
///
/// On the diagonal (`t == tau`) the limit
/// `K2 = i/4 - E_c/(2 pi) - ln(kappa G(tau)/2)/(2 pi)` is used.
pub fn kernel_split<T: Real>(curve: &dyn Boundary<T>, kappa: T, t: T, tau: T) -> Result<(T, Complex<T>)> {
    let four_pi = T::lit(4.0) * T::PI();
    if t == tau {
        let g = curve.jacobian(tau);
        let k2 = Complex::new(
            -T::euler_gamma() / T::two_pi() - (kappa * g * T::lit(0.5)).ln() / T::two_pi(),
            T::lit(0.25),
        );
        return Ok((-four_pi.recip(), k2));
    }
    let r = (curve.point(t) - curve.point(tau)).norm();
    if !(r > T::zero()) {
        return Err(Error::Geometry(format!("curve self-intersects at parameters {t} and {tau}")));
    }
    let cyl = cylinder_functions(kappa * r)?;
    let k1 = -cyl.j0 / four_pi;
    let lg = (T::lit(4.0) * ((t - tau) * T::lit(0.5)).sin().powi(2)).ln();
    let k = cyl.hankel0() * Complex::new(T::zero(), T::lit(0.25));
    Ok((k1, k - lg * k1))
}

/// The assembled `2n m x 2n m` system, `m` being the number of components
/// (obstacle first, then the ball if present).
#[derive(Debug, Clone)]
pub struct FieldSystemMatrix<T> {
    n: usize,
    components: usize,
    matrix: CMatrix<T>,
    rhs: Vec<Complex<T>>,
}

impl<T: Real> FieldSystemMatrix<T> {
    pub fn components(&self) -> usize {
        self.components
    }

    pub fn grid_n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn rhs(&self) -> &[Complex<T>] {
        &self.rhs
    }

    /// Block `A_{lj}` (zero-based component indices).
    pub fn block(&self, l: usize, j: usize) -> CMatrix<T> {
        let np = 2 * self.n;
        self.matrix.block(l * np, j * np, np, np)
    }
}

pub fn assemble_field_system<T: Real>(
    obstacle: &dyn Boundary<T>,
    ball: Option<&Disk<T>>,
    wave: &IncidentWave<T>,
    grid: &ParamGrid,
) -> Result<FieldSystemMatrix<T>> {
    let mut comps: Vec<&dyn Boundary<T>> = vec![obstacle];
    if let Some(b) = ball {
        comps.push(b);
    }
    let knots = grid.knots::<T>();
    check_disjoint(&comps, &knots)?;
    let np = grid.len();
    let dim = np * comps.len();
    let kappa = wave.wavenumber();
    let h = grid.step::<T>();
    let weights = log_quadrature_weights::<T>(grid.n());
    let quarter_i = Complex::new(T::zero(), T::lit(0.25));

    let pts: Vec<Vec<Point<T>>> = comps.iter().map(|c| knots.iter().map(|&t| c.point(t)).collect()).collect();
    let mut matrix = CMatrix::zeros(dim, dim);
    let mut rhs = Vec::with_capacity(dim);
    for (l, cl) in comps.iter().enumerate() {
        rhs.extend(pts[l].iter().map(|&p| wave.value_at(p)));
        for (j, _) in comps.iter().enumerate() {
            for s in 0..np {
                for q in 0..np {
                    let v = if l == j {
                        let (k1, k2) = kernel_split(*cl, kappa, knots[s], knots[q])?;
                        k2 * h + Complex::new(k1 * weights[s.abs_diff(q)], T::zero())
                    } else {
                        let r = (pts[l][s] - pts[j][q]).norm();
                        cylinder_functions(kappa * r)?.hankel0() * quarter_i * h
                    };
                    matrix[(l * np + s, j * np + q)] = v;
                }
            }
        }
    }
    Ok(FieldSystemMatrix { n: grid.n(), components: comps.len(), matrix, rhs })
}

/// Grid samples of `psi_1` (obstacle) and `psi_2` (ball).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityPair<T> {
    pub psi1: Vec<Complex<T>>,
    pub psi2: Option<Vec<Complex<T>>>,
}

impl<T: Real> DensityPair<T> {
    pub fn zeros(grid: &ParamGrid, with_ball: bool) -> Self {
        let z = vec![Complex::new(T::zero(), T::zero()); grid.len()];
        Self { psi1: z.clone(), psi2: with_ball.then_some(z) }
    }
}

/// Diagnostics of a density solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport<T> {
    /// Exact 1-norm condition number of the system matrix.
    pub condition: T,
    /// `||A psi - w||_inf / ||w||_inf`.
    pub residual: T,
}

pub fn solve_densities<T: Real>(system: &FieldSystemMatrix<T>) -> Result<(DensityPair<T>, SolveReport<T>)> {
    let lu = ComplexLu::factor(&system.matrix)?;
    let inv_norm = one_norm(&lu.inverse());
    let condition = one_norm(&system.matrix) * inv_norm;
    if !(condition < T::lit(CONDITION_LIMIT)) {
        return Err(Error::Conditioning {
            condition: condition.to_f64().unwrap_or(f64::INFINITY),
            limit: CONDITION_LIMIT,
        });
    }
    let psi = lu.solve(&system.rhs);
    let ax = system.matrix.mul_vec(&psi);
    let sup = |v: &mut dyn Iterator<Item = T>| v.fold(T::zero(), T::max);
    let residual = sup(&mut ax.iter().zip(&system.rhs).map(|(a, w)| (a - w).norm()))
        / sup(&mut system.rhs.iter().map(|w| w.norm()));
    let np = 2 * system.n;
    let psi2 = (system.components > 1).then(|| psi[np..2 * np].to_vec());
    let mut psi1 = psi;
    psi1.truncate(np);
    Ok((DensityPair { psi1, psi2 }, SolveReport { condition, residual }))
}

const DUMP_MAGIC: &[u8; 8] = b"PLMXC64\0";

/// Writes `matrix` as: 8-byte magic, rows and cols as little-endian `u64`,
/// then row-major `(re, im)` pairs of little-endian `f64`.
pub fn write_matrix_dump<T: Real>(mut out: impl Write, matrix: &CMatrix<T>) -> io::Result<()> {
    out.write_all(DUMP_MAGIC)?;
    out.write_all(&(matrix.rows() as u64).to_le_bytes())?;
    out.write_all(&(matrix.cols() as u64).to_le_bytes())?;
    for z in matrix.as_slice() {
        out.write_all(&z.re.to_f64().unwrap_or(f64::NAN).to_le_bytes())?;
        out.write_all(&z.im.to_f64().unwrap_or(f64::NAN).to_le_bytes())?;
    }
    Ok(())
}

pub fn read_matrix_dump(mut input: impl Read) -> io::Result<CMatrix<f64>> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != DUMP_MAGIC {
        return Err(io::Error::new(io::ErrorKind::InvalidData, "not a matrix dump"));
    }
    let mut word = [0u8; 8];
    input.read_exact(&mut word)?;
    let rows = u64::from_le_bytes(word) as usize;
    input.read_exact(&mut word)?;
    let cols = u64::from_le_bytes(word) as usize;
    let mut data = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        input.read_exact(&mut word)?;
        let re = f64::from_le_bytes(word);
        input.read_exact(&mut word)?;
        data.push(Complex::new(re, f64::from_le_bytes(word)));
    }
    CMatrix::from_row_major(rows, cols, data).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::farfield::farfield_from_densities;
    use crate::forward::mie_farfield;
    use std::f64::consts::PI;

    #[test]
    fn weights_small_n() {
        let w = log_quadrature_weights::<f64>(1);
        assert!((w[0] + PI).abs() < 1e-15 && (w[1] - PI).abs() < 1e-15);
        for n in [2, 5, 16, 33] {
            let s: f64 = log_quadrature_weights::<f64>(n).iter().sum();
            assert!(s.abs() < 1e-13);
        }
    }

    #[test]
    fn weights_integrate_log_against_cosine() {
        let n = 32;
        let w = log_quadrature_weights::<f64>(n);
        for k in 0..2 * n {
            let t = k as f64 * PI / n as f64;
            let q: f64 = (0..2 * n).map(|j| w[k.abs_diff(j)] * (j as f64 * PI / n as f64).cos()).sum();
            assert!((q + 2.0 * PI * t.cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn ball_diagonal_and_coincident_k1() {
        let ball = Disk::new(Point::new(4.0, 0.0), 0.4).unwrap();
        let (k1, k2): (f64, Complex<f64>) = kernel_split(&ball, 2.0, 1.0, 1.0).unwrap();
        assert!((k2.re - 0.05396).abs() < 1e-4 && (k2.im - 0.25).abs() < 1e-15);
        assert!((k1 + 0.0795775).abs() < 1e-7);
    }

    #[test]
    fn split_reassembles_kernel() {
        let ball = Disk::new(Point::new(0.5, 0.0), 0.9).unwrap();
        for (t, tau) in [(0.1, 2.0), (3.0, 5.5), (6.0, 0.2)] {
            let (k1, k2) = kernel_split(&ball, 2.0, t, tau).unwrap();
            let lg = (4.0 * ((t - tau) / 2.0f64).sin().powi(2)).ln();
            let r = (ball.point(t) - ball.point(tau)).norm();
            let h = crate::specfun::hankel1_0(2.0 * r).unwrap() * Complex::new(0.0, 0.25);
            assert!((k2 + k1 * lg - h).norm() < 1e-12);
            assert!((k1 + crate::specfun::bessel_j0(2.0 * r) / (4.0 * PI)).abs() < 1e-15);
        }
    }

    #[test]
    fn shapes_and_unit_rhs() {
        let grid = ParamGrid::new(8).unwrap();
        let wave = IncidentWave::from_angle(2.0, 0.4).unwrap();
        let obstacle = crate::geometry::StarCurve::circle(Point::new(0.0, 0.0), 0.5, 2).unwrap();
        let ball = Disk::new(Point::new(4.0, 0.0), 0.4).unwrap();
        let sys: FieldSystemMatrix<f64> = assemble_field_system(&obstacle, Some(&ball), &wave, &grid).unwrap();
        assert_eq!(sys.matrix().rows(), 32);
        assert_eq!(sys.block(1, 0).rows(), 16);
        assert_eq!(sys.rhs().len(), 32);
        assert!(sys.rhs().iter().all(|w| (w.norm() - 1.0).abs() < 1e-15));
        let (dens, rep) = solve_densities(&sys).unwrap();
        assert!(rep.residual < 1e-10);
        assert_eq!(dens.psi2.unwrap().len(), 16);
    }

    #[test]
    fn overlap_is_a_geometry_error() {
        let grid = ParamGrid::new(8).unwrap();
        let wave = IncidentWave::from_angle(2.0, 0.0).unwrap();
        let obstacle = crate::geometry::StarCurve::circle(Point::new(3.8, 0.0), 0.5, 2).unwrap();
        let ball = Disk::new(Point::new(4.0, 0.0), 0.4).unwrap();
        assert!(matches!(assemble_field_system(&obstacle, Some(&ball), &wave, &grid), Err(Error::Geometry(_))));
    }

    #[test]
    fn unit_disk_density_reproduces_mie() {
        let grid = ParamGrid::new(32).unwrap();
        let wave = IncidentWave::from_angle(2.0, 0.0).unwrap();
        let disk = Disk::new(Point::new(0.0, 0.0), 1.0).unwrap();
        let sys = assemble_field_system(&disk, None, &wave, &grid).unwrap();
        let (dens, _) = solve_densities(&sys).unwrap();
        let u = farfield_from_densities(&disk, None, &dens, &grid, 2.0).unwrap();
        let mie = mie_farfield(&disk, &wave, &u.angles).unwrap();
        assert!(u.sup_distance(&mie) < 1e-6);
    }

    #[test]
    fn dump_round_trip() {
        let m = CMatrix::from_fn(3, 2, |i, j| Complex::new(i as f64 + 0.25, -(j as f64) / 3.0));
        let mut buf = Vec::new();
        write_matrix_dump(&mut buf, &m).unwrap();
        assert_eq!(buf.len(), 8 + 16 + 6 * 16);
        assert_eq!(read_matrix_dump(buf.as_slice()).unwrap(), m);
    }
}
