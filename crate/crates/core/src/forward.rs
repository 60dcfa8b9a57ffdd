//! Synthetic far-field data for the sound-soft scatterer `D` (plus the
//! optional reference ball), computed with a combined double- and
//! single-layer potential so that the inversion never sees its own
//! discretization. Also the separation-of-variables oracle for disks and
//! the multiplicative noise model.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::field_system::log_quadrature_weights;
use crate::geometry::{Boundary, Disk, ParamGrid, Point};
use crate::linalg::{CMatrix, ComplexLu};
use crate::scalar::Real;
use crate::specfun::{bessel_j_sequence, bessel_y_sequence, cylinder_functions};

/// Systems whose 1-norm condition exceeds this are refused.
pub const CONDITION_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncidentWave<T> {
    wavenumber: T,
    direction: Point<T>,
}

impl<T: Real> IncidentWave<T> {
    pub fn new(wavenumber: T, direction: Point<T>) -> Result<Self> {
        if !(wavenumber > T::zero()) || !wavenumber.is_finite() {
            return Err(Error::invalid(format!("wavenumber must be positive, got {wavenumber}")));
        }
        if (direction.norm() - T::one()).abs() > T::lit(1e-10) {
            return Err(Error::invalid("incident direction must be a unit vector"));
        }
        Ok(Self { wavenumber, direction })
    }

    /// Plane wave travelling along `(cos theta, sin theta)`.
    pub fn from_angle(wavenumber: T, theta: T) -> Result<Self> {
        Self::new(wavenumber, Point::unit(theta))
    }

    pub fn wavenumber(&self) -> T {
        self.wavenumber
    }

    pub fn direction(&self) -> Point<T> {
        self.direction
    }

    pub fn angle(&self) -> T {
        self.direction.angle()
    }

    /// `u^i(p) = exp(i kappa p.d)`.
    pub fn value_at(&self, p: Point<T>) -> Complex<T> {
        Complex::from_polar(T::one(), self.wavenumber * p.dot(self.direction))
    }
}

/// `gamma = exp(i pi/4) / sqrt(8 pi kappa)`, the far-field normalization.
pub fn farfield_constant<T: Real>(kappa: T) -> Complex<T> {
    Complex::from_polar((T::lit(8.0) * T::PI() * kappa).sqrt().recip(), T::FRAC_PI_4())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldSamples<T> {
    pub angles: Vec<T>,
    pub values: Vec<Complex<T>>,
}

impl<T: Real> FarFieldSamples<T> {
    pub fn new(angles: Vec<T>, values: Vec<Complex<T>>) -> Result<Self> {
        if angles.len() != values.len() {
            return Err(Error::Shape { expected: angles.len(), got: values.len() });
        }
        Ok(Self { angles, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn intensities(&self) -> PhaselessSamples<T> {
        PhaselessSamples {
            angles: self.angles.clone(),
            intensities: self.values.iter().map(|v| v.norm_sqr()).collect(),
        }
    }

    /// `max_s |u_s - v_s|`.
    pub fn sup_distance(&self, other: &Self) -> T {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(T::zero(), T::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaselessSamples<T> {
    pub angles: Vec<T>,
    pub intensities: Vec<T>,
}

impl<T: Real> PhaselessSamples<T> {
    pub fn new(angles: Vec<T>, intensities: Vec<T>) -> Result<Self> {
        if angles.len() != intensities.len() {
            return Err(Error::Shape { expected: angles.len(), got: intensities.len() });
        }
        if intensities.iter().any(|v| !(*v >= T::zero()) || !v.is_finite()) {
            return Err(Error::invalid("intensities must be finite and nonnegative"));
        }
        Ok(Self { angles, intensities })
    }

    pub fn len(&self) -> usize {
        self.intensities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intensities.is_empty()
    }
}

/// Boundary traces sampled on the grid.
#[derive(Debug, Clone)]
struct Trace<T> {
    x: Vec<Point<T>>,
    dx: Vec<Point<T>>,
    ddx: Vec<Point<T>>,
}

impl<T: Real> Trace<T> {
    fn sample(curve: &dyn Boundary<T>, knots: &[T]) -> Self {
        Self {
            x: knots.iter().map(|&t| curve.point(t)).collect(),
            dx: knots.iter().map(|&t| curve.velocity(t)).collect(),
            ddx: knots.iter().map(|&t| curve.acceleration(t)).collect(),
        }
    }
}

/// Solved combined-potential density for a set of disjoint components.
#[derive(Debug, Clone)]
pub struct CombinedSolution<T> {
    kappa: T,
    n: usize,
    nodes: Vec<Point<T>>,
    normals: Vec<Point<T>>,
    speeds: Vec<T>,
    density: Vec<Complex<T>>,
    condition: T,
}

impl<T: Real> CombinedSolution<T> {
    /// Far field `u_inf(x_hat(t))` for arbitrary observation angles.
    pub fn farfield(&self, angles: &[T]) -> Vec<Complex<T>> {
        let kappa = self.kappa;
        let eta = kappa;
        let pre = farfield_constant(kappa) * (T::PI() / T::from_index(self.n));
        angles
            .iter()
            .map(|&t| {
                let xh = Point::unit(t);
                let sum = self.nodes.iter().enumerate().fold(Complex::new(T::zero(), T::zero()), |acc, (j, &y)| {
                    let weight = Complex::new(T::zero(), -(kappa * xh.dot(self.normals[j]) + eta * self.speeds[j]));
                    acc + weight * Complex::from_polar(T::one(), -kappa * xh.dot(y)) * self.density[j]
                });
                pre * sum
            })
            .collect()
    }

    pub fn condition(&self) -> T {
        self.condition
    }
}

/// Fails if any sampled point of one component lies inside another.
pub(crate) fn check_disjoint<T: Real>(components: &[&dyn Boundary<T>], knots: &[T]) -> Result<()> {
    for (a, ca) in components.iter().enumerate() {
        for (b, cb) in components.iter().enumerate() {
            if a != b && knots.iter().any(|&t| cb.contains(ca.point(t))) {
                return Err(Error::Geometry(format!("scatterer components {a} and {b} overlap")));
            }
        }
    }
    Ok(())
}

/// Solves the combined-potential boundary equation
/// `(I + K - i eta S) phi = -2 u^i` on all components, with `eta = kappa`.
pub fn solve_combined<T: Real>(
    components: &[&dyn Boundary<T>],
    wave: &IncidentWave<T>,
    grid: &ParamGrid,
) -> Result<CombinedSolution<T>> {
    if components.is_empty() {
        return Err(Error::invalid("no scatterer components"));
    }
    let knots = grid.knots::<T>();
    check_disjoint(components, &knots)?;
    let traces: Vec<Trace<T>> = components.iter().map(|c| Trace::sample(*c, &knots)).collect();
    let np = grid.len();
    let dim = np * components.len();
    let kappa = wave.wavenumber();
    let eta = kappa;
    let h = grid.step::<T>();
    let weights = log_quadrature_weights::<T>(grid.n());
    let two_pi = T::two_pi();
    let half = T::lit(0.5);
    let i = Complex::<T>::i();

    let mut a = CMatrix::<T>::zeros(dim, dim);
    let mut rhs = vec![Complex::new(T::zero(), T::zero()); dim];
    for (l, tl) in traces.iter().enumerate() {
        for s in 0..np {
            rhs[l * np + s] = wave.value_at(tl.x[s]) * (-T::lit(2.0));
        }
        for (jc, tj) in traces.iter().enumerate() {
            for s in 0..np {
                for j in 0..np {
                    let nrm = tj.dx[j].rot_cw();
                    let sp = tj.dx[j].norm();
                    let diff = tj.x[j] - tl.x[s];
                    let entry = if l != jc || s != j {
                        let r = diff.norm();
                        let cyl = cylinder_functions(kappa * r)?;
                        let nd = nrm.dot(diff) / r;
                        let dl = cyl.hankel1() * (-(i * kappa * half)) * nd;
                        let sl = cyl.hankel0() * (i * half) * sp;
                        if l != jc {
                            (dl - i * sl * eta) * h
                        } else {
                            let lg = (T::lit(4.0) * ((knots[s] - knots[j]) * half).sin().powi(2)).ln();
                            let dl1 = kappa / two_pi * cyl.j1 * nd;
                            let sl1 = -cyl.j0 * sp / two_pi;
                            let dl2 = dl - lg * dl1;
                            let sl2 = sl - lg * sl1;
                            let rw = weights[s.abs_diff(j)];
                            Complex::new(dl1, -eta * sl1) * rw + (dl2 - i * sl2 * eta) * h
                        }
                    } else {
                        let (d1, d2) = (tj.dx[j], tj.ddx[j]);
                        let dl2 = (d1.y * d2.x - d1.x * d2.y) / (two_pi * d1.norm_sqr());
                        let sl1 = -sp / two_pi;
                        let sl2 = Complex::new(
                            -T::euler_gamma() / T::PI() - (kappa * sp * half).ln() / T::PI(),
                            half,
                        ) * sp;
                        let rw = weights[0];
                        Complex::new(T::one(), T::zero())
                            + Complex::new(T::zero(), -eta * sl1) * rw
                            + (Complex::new(dl2, T::zero()) - i * sl2 * eta) * h
                    };
                    a[(l * np + s, jc * np + j)] = entry;
                }
            }
        }
    }
    let lu = ComplexLu::factor(&a)?;
    let condition = lu.condition_number(&a);
    if !(condition < T::lit(CONDITION_LIMIT)) {
        return Err(Error::Conditioning {
            condition: condition.to_f64().unwrap_or(f64::INFINITY),
            limit: CONDITION_LIMIT,
        });
    }
    let density = lu.solve(&rhs);
    let mut nodes = Vec::with_capacity(dim);
    let mut normals = Vec::with_capacity(dim);
    let mut speeds = Vec::with_capacity(dim);
    for tr in &traces {
        nodes.extend_from_slice(&tr.x);
        normals.extend(tr.dx.iter().map(|d| d.rot_cw()));
        speeds.extend(tr.dx.iter().map(|d| d.norm()));
    }
    Ok(CombinedSolution { kappa, n: grid.n(), nodes, normals, speeds, density, condition })
}

/// Far field of `obstacle` (and the ball, if given) at the `2n` grid angles.
pub fn synthesize_farfield<T: Real>(
    obstacle: &dyn Boundary<T>,
    ball: Option<&Disk<T>>,
    wave: &IncidentWave<T>,
    grid: &ParamGrid,
) -> Result<FarFieldSamples<T>> {
    let mut comps: Vec<&dyn Boundary<T>> = vec![obstacle];
    if let Some(b) = ball {
        comps.push(b);
    }
    synthesize_farfield_multi(&comps, wave, grid)
}

pub fn synthesize_farfield_multi<T: Real>(
    components: &[&dyn Boundary<T>],
    wave: &IncidentWave<T>,
    grid: &ParamGrid,
) -> Result<FarFieldSamples<T>> {
    let sol = solve_combined(components, wave, grid)?;
    let angles = grid.knots::<T>();
    let values = sol.farfield(&angles);
    FarFieldSamples::new(angles, values)
}

/// Separation-of-variables far field of a sound-soft disk:
/// `u_inf(theta) = -sqrt(2/(pi kappa)) e^{-i pi/4} sum_m J_m(kR)/H_m(kR) e^{im(theta - theta_d)}`,
/// translated to the disk center with `e^{i kappa b.(d - x_hat)}`.
///
/// The series is summed in f64 whatever `T` is: it is a reference value, and
/// the Neumann sequence overflows single precision long before the tail is
/// small.
pub fn mie_farfield<T: Real>(disk: &Disk<T>, wave: &IncidentWave<T>, angles: &[T]) -> Result<FarFieldSamples<T>> {
    const MAX_ORDER: usize = 400;
    let f = |v: T| v.to_f64().unwrap_or(f64::NAN);
    let kappa = f(wave.wavenumber());
    let x = kappa * f(disk.radius());
    let nmax = (x + 12.0 * x.cbrt() + 25.0).ceil() as usize;
    if !(nmax <= MAX_ORDER) {
        return Err(Error::Truncation(format!("kappa R = {x} needs more than {MAX_ORDER} terms")));
    }
    let jn = bessel_j_sequence(x, nmax);
    let yn = bessel_y_sequence(x, nmax)?;
    let ratio = |m: usize| Complex::new(jn[m], 0.0) / Complex::new(jn[m], yn[m]);
    let tail = ratio(nmax).norm();
    if !(tail < 1e-12) {
        return Err(Error::Truncation(format!("series tail {tail} above 1e-12")));
    }
    let pre = -Complex::from_polar((2.0 / (std::f64::consts::PI * kappa)).sqrt(), -std::f64::consts::FRAC_PI_4);
    let d = wave.direction();
    let d = Point::new(f(d.x), f(d.y));
    let theta_d = f(wave.angle());
    let b = Point::new(f(disk.center().x), f(disk.center().y));
    let values = angles
        .iter()
        .map(|&t| {
            let t = f(t);
            let mut s = ratio(0);
            for m in 1..=nmax {
                s += ratio(m) * (2.0 * (m as f64 * (t - theta_d)).cos());
            }
            let v = pre * s * Complex::from_polar(1.0, kappa * b.dot(d - Point::unit(t)));
            Complex::new(T::lit(v.re), T::lit(v.im))
        })
        .collect();
    FarFieldSamples::new(angles.to_vec(), values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseKind {
    /// `eta ~ U[-1, 1]`
    #[default]
    Uniform,
    /// `eta ~ N(0, 1/9)` conditioned on `|eta| <= 1`.
    TruncatedNormal,
}

impl std::str::FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(NoiseKind::Uniform),
            "truncated-normal" | "normal" => Ok(NoiseKind::TruncatedNormal),
            other => Err(Error::invalid(format!("unknown noise kind '{other}'"))),
        }
    }
}

/// `|u|^2 (1 + delta eta_s)` with `eta_s` drawn from a ChaCha8 stream seeded
/// by `seed`.
pub fn add_noise<T: Real>(
    data: &PhaselessSamples<T>,
    delta: T,
    seed: u64,
    kind: NoiseKind,
) -> Result<PhaselessSamples<T>> {
    if !(delta >= T::zero() && delta < T::one()) {
        return Err(Error::invalid(format!("noise level must lie in [0, 1), got {delta}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0 / 3.0).expect("valid normal parameters");
    let mut draw = || -> f64 {
        match kind {
            NoiseKind::Uniform => rng.random_range(-1.0..=1.0),
            NoiseKind::TruncatedNormal => loop {
                let v: f64 = normal.sample(&mut rng);
                if v.abs() <= 1.0 {
                    break v;
                }
            },
        }
    };
    let intensities = data
        .intensities
        .iter()
        .map(|&v| {
            let eta = T::lit(draw());
            v * (T::one() + delta * eta)
        })
        .collect();
    Ok(PhaselessSamples { angles: data.angles.clone(), intensities })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ExactCurve, TestShape};
    use std::f64::consts::PI;

    fn origin_disk(r: f64) -> Disk<f64> {
        Disk::new(Point::new(0.0, 0.0), r).unwrap()
    }

    #[test]
    fn unit_disk_matches_mie() {
        let grid = ParamGrid::new(32).unwrap();
        let wave = IncidentWave::from_angle(2.0, 0.0).unwrap();
        let disk = origin_disk(1.0);
        let u = synthesize_farfield(&disk, None, &wave, &grid).unwrap();
        let mie = mie_farfield(&disk, &wave, &u.angles).unwrap();
        assert!(u.sup_distance(&mie) < 1e-8, "{}", u.sup_distance(&mie));
    }

    #[test]
    fn mie_high_resolution_cross_check() {
        let grid = ParamGrid::new(128).unwrap();
        let wave = IncidentWave::from_angle(2.0, 0.0).unwrap();
        let disk = origin_disk(1.0);
        let sol = solve_combined(&[&disk], &wave, &grid).unwrap();
        let u = sol.farfield(&[0.0])[0];
        let m = mie_farfield(&disk, &wave, &[0.0]).unwrap().values[0];
        assert!((u - m).norm() < 1e-10, "{}", (u - m).norm());
    }

    #[test]
    fn mie_monopole_limit() {
        let wave = IncidentWave::from_angle(2.0, 0.3).unwrap();
        let angles = ParamGrid::new(16).unwrap().knots::<f64>();
        let u = mie_farfield(&origin_disk(0.01), &wave, &angles).unwrap();
        let mods: Vec<f64> = u.values.iter().map(|v| v.norm()).collect();
        let (lo, hi) = mods.iter().fold((f64::MAX, 0.0f64), |(a, b), &m| (a.min(m), b.max(m)));
        assert!((hi - lo) / hi < 0.05);
    }

    #[test]
    fn mie_reciprocity() {
        let disk = Disk::new(Point::new(0.3, -0.2), 0.7).unwrap();
        for k in 0..8 {
            let a = 0.37 + 0.81 * k as f64;
            let b = 2.1 - 0.53 * k as f64;
            let u = mie_farfield(&disk, &IncidentWave::from_angle(2.0, a).unwrap(), &[b]).unwrap().values[0];
            let v = mie_farfield(&disk, &IncidentWave::from_angle(2.0, b + PI).unwrap(), &[a + PI]).unwrap().values[0];
            assert!((u - v).norm() < 1e-12);
        }
    }

    #[test]
    fn farfield_constant_value() {
        let g = farfield_constant(2.0f64);
        assert!((g.re - 0.09974).abs() < 1e-5 && (g.im - 0.09974).abs() < 1e-5);
    }

    #[test]
    fn overlapping_components_rejected() {
        let grid = ParamGrid::new(8).unwrap();
        let wave = IncidentWave::from_angle(2.0, 0.0).unwrap();
        let a = origin_disk(1.0);
        let b = Disk::new(Point::new(0.5, 0.0), 1.0).unwrap();
        assert!(matches!(
            synthesize_farfield(&a, Some(&b), &wave, &grid),
            Err(Error::Geometry(_))
        ));
    }

    #[test]
    fn noise_contract() {
        let data = PhaselessSamples::new(vec![0.0; 64], (0..64).map(|i| 1.0 + i as f64).collect()).unwrap();
        assert_eq!(add_noise(&data, 0.0, 3, NoiseKind::Uniform).unwrap(), data);
        for kind in [NoiseKind::Uniform, NoiseKind::TruncatedNormal] {
            let a = add_noise(&data, 0.01, 7, kind).unwrap();
            let b = add_noise(&data, 0.01, 7, kind).unwrap();
            assert_eq!(a, b);
            for (x, y) in a.intensities.iter().zip(&data.intensities) {
                assert!(((x - y) / y).abs() <= 0.01 + 1e-15);
            }
        }
        assert!(add_noise(&data, 1.0, 0, NoiseKind::Uniform).is_err());
        assert!(add_noise(&data, -0.1, 0, NoiseKind::Uniform).is_err());
    }

    #[test]
    fn apple_self_convergence() {
        let wave = IncidentWave::from_angle(2.0, 0.0).unwrap();
        let apple = ExactCurve::new(TestShape::Apple);
        let coarse = synthesize_farfield(&apple, None, &wave, &ParamGrid::new(32).unwrap()).unwrap();
        let fine = synthesize_farfield(&apple, None, &wave, &ParamGrid::new(64).unwrap()).unwrap();
        let diff = coarse
            .values
            .iter()
            .zip(fine.values.iter().step_by(2))
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-8, "{diff}");
    }
}
