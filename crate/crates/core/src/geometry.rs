//! Boundary curves: star-like trigonometric curves, the reference disk and
//! the closed-form test obstacles, all sampled on the equidistant grid
//! `tau_j = pi j / n`, `j = 0..2n-1`.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::linalg::{cholesky_solve, Matrix};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> Point<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    /// Unit vector `(cos t, sin t)`.
    pub fn unit(t: T) -> Self {
        let (s, c) = t.sin_cos();
        Self { x: c, y: s }
    }

    pub fn dot(self, other: Self) -> T {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }

    pub fn norm_sqr(self) -> T {
        self.dot(self)
    }

    pub fn angle(self) -> T {
        self.y.atan2(self.x)
    }

    /// Rotation by -90 degrees: the outward normal direction of a
    /// counter-clockwise tangent.
    pub fn rot_cw(self) -> Self {
        Self { x: self.y, y: -self.x }
    }
}

impl<T: Real> Add for Point<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { x: self.x + o.x, y: self.y + o.y }
    }
}

impl<T: Real> Sub for Point<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self { x: self.x - o.x, y: self.y - o.y }
    }
}

impl<T: Real> Neg for Point<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self { x: -self.x, y: -self.y }
    }
}

impl<T: Real> Mul<T> for Point<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Self { x: self.x * s, y: self.y * s }
    }
}

/// Equidistant periodic grid with `2n` knots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamGrid {
    n: usize,
}

impl ParamGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 4 {
            return Err(Error::invalid(format!("grid needs n >= 4, got {n}")));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of knots, `2n`.
    pub fn len(&self) -> usize {
        2 * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Knot spacing and trapezoid weight `pi / n`.
    pub fn step<T: Real>(&self) -> T {
        T::PI() / T::from_index(self.n)
    }

    pub fn knot<T: Real>(&self, j: usize) -> T {
        T::from_index(j) * self.step::<T>()
    }

    pub fn knots<T: Real>(&self) -> Vec<T> {
        (0..self.len()).map(|j| self.knot(j)).collect()
    }
}

/// A closed, counter-clockwise parameterized curve over `[0, 2 pi)`.
pub trait Boundary<T: Real>: Send + Sync {
    fn point(&self, t: T) -> Point<T>;
    /// First derivative `dp/dt`.
    fn velocity(&self, t: T) -> Point<T>;
    /// Second derivative `d^2p/dt^2`.
    fn acceleration(&self, t: T) -> Point<T>;

    /// Arc-length factor `|p'(t)|`.
    fn jacobian(&self, t: T) -> T {
        self.velocity(t).norm()
    }

    /// Whether `p` lies strictly inside the curve.
    fn contains(&self, p: Point<T>) -> bool;
}

/// Point, velocity and acceleration of `c + r(t) (cos t, sin t)` given
/// `r, r', r''`.
fn radial_frame<T: Real>(center: Point<T>, t: T, r: [T; 3]) -> [Point<T>; 3] {
    let e = Point::unit(t);
    let e_perp = Point::new(-e.y, e.x);
    let two = T::lit(2.0);
    [
        center + e * r[0],
        e * r[1] + e_perp * r[0],
        e * (r[2] - r[0]) + e_perp * (two * r[1]),
    ]
}

/// Star-like curve `p(t) = c + r(t) (cos t, sin t)` with
/// `r(t) = sum_{m=0}^M alpha_m cos mt + sum_{m=1}^M beta_m sin mt`.
///
/// Coefficients are stored as `(alpha_0, .., alpha_M, beta_1, .., beta_M)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StarCurve<T> {
    center: Point<T>,
    coeffs: Vec<T>,
}

impl<T: Real> StarCurve<T> {
    pub fn new(center: Point<T>, coeffs: Vec<T>) -> Result<Self> {
        if coeffs.len() < 3 || coeffs.len() % 2 == 0 {
            return Err(Error::invalid(format!(
                "radial coefficient vector must have length 2M+1 with M >= 1, got {}",
                coeffs.len()
            )));
        }
        Ok(Self { center, coeffs })
    }

    /// Circle of radius `radius` about `center` with truncation `m`.
    pub fn circle(center: Point<T>, radius: T, m: usize) -> Result<Self> {
        let mut coeffs = vec![T::zero(); 2 * m + 1];
        coeffs[0] = radius;
        Self::new(center, coeffs)
    }

    pub fn truncation(&self) -> usize {
        (self.coeffs.len() - 1) / 2
    }

    pub fn center(&self) -> Point<T> {
        self.center
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn alpha(&self, m: usize) -> T {
        self.coeffs[m]
    }

    /// `beta_m` for `m >= 1`.
    pub fn beta(&self, m: usize) -> T {
        assert!(m >= 1, "beta_0 does not exist");
        self.coeffs[self.truncation() + m]
    }

    pub fn set_center(&mut self, c: Point<T>) {
        self.center = c;
    }

    pub fn set_alpha(&mut self, m: usize, v: T) {
        self.coeffs[m] = v;
    }

    pub fn set_beta(&mut self, m: usize, v: T) {
        assert!(m >= 1, "beta_0 does not exist");
        let idx = self.truncation() + m;
        self.coeffs[idx] = v;
    }

    pub fn translated(&self, h: Point<T>) -> Self {
        Self { center: self.center + h, coeffs: self.coeffs.clone() }
    }

    /// `r, r', r''` at `t`.
    pub fn radial(&self, t: T) -> [T; 3] {
        let m_max = self.truncation();
        let mut r = [self.coeffs[0], T::zero(), T::zero()];
        for m in 1..=m_max {
            let mf = T::from_index(m);
            let (s, c) = (mf * t).sin_cos();
            let a = self.coeffs[m];
            let b = self.coeffs[m_max + m];
            r[0] += a * c + b * s;
            r[1] += mf * (b * c - a * s);
            r[2] -= mf * mf * (a * c + b * s);
        }
        r
    }

    pub fn radius(&self, t: T) -> T {
        self.radial(t)[0]
    }

    /// Term-by-term derivative of the trigonometric radius.
    pub fn radial_derivative(&self, t: T) -> T {
        self.radial(t)[1]
    }

    pub fn eval_point(&self, t: T) -> Result<Point<T>> {
        let r = self.radius(t);
        if !(r > T::zero()) {
            return Err(degenerate(t, r));
        }
        Ok(self.center + Point::unit(t) * r)
    }

    /// `G(t) = sqrt(r^2 + r'^2)`.
    pub fn jacobian(&self, t: T) -> Result<T> {
        let [r, dr, _] = self.radial(t);
        if !(r > T::zero()) {
            return Err(degenerate(t, r));
        }
        Ok(r.hypot(dr))
    }

    pub fn min_radius_on(&self, grid: &ParamGrid) -> T {
        grid.knots::<T>().into_iter().map(|t| self.radius(t)).fold(T::infinity(), T::min)
    }

    /// Fails with the first grid knot whose radius is not positive.
    pub fn check_star_like(&self, grid: &ParamGrid) -> Result<()> {
        for t in grid.knots::<T>() {
            let r = self.radius(t);
            if !(r > T::zero()) {
                return Err(degenerate(t, r));
            }
        }
        Ok(())
    }

    /// Samples `(tau_j, p(tau_j))` on the grid.
    pub fn sample(&self, grid: &ParamGrid) -> Vec<(T, Point<T>)> {
        grid.knots::<T>().into_iter().map(|t| (t, Boundary::point(self, t))).collect()
    }
}

fn degenerate<T: Real>(t: T, r: T) -> Error {
    Error::DegenerateCurve {
        parameter: t.to_f64().unwrap_or(f64::NAN),
        radius: r.to_f64().unwrap_or(f64::NAN),
    }
}

impl<T: Real> Boundary<T> for StarCurve<T> {
    fn point(&self, t: T) -> Point<T> {
        self.center + Point::unit(t) * self.radius(t)
    }

    fn velocity(&self, t: T) -> Point<T> {
        radial_frame(self.center, t, self.radial(t))[1]
    }

    fn acceleration(&self, t: T) -> Point<T> {
        radial_frame(self.center, t, self.radial(t))[2]
    }

    fn jacobian(&self, t: T) -> T {
        let [r, dr, _] = self.radial(t);
        r.hypot(dr)
    }

    fn contains(&self, p: Point<T>) -> bool {
        let d = p - self.center;
        d.norm() < self.radius(d.angle())
    }
}

/// The reference ball: `p(t) = b + R (cos t, sin t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disk<T> {
    center: Point<T>,
    radius: T,
}

impl<T: Real> Disk<T> {
    pub fn new(center: Point<T>, radius: T) -> Result<Self> {
        if !(radius > T::zero()) || !radius.is_finite() {
            return Err(Error::invalid(format!("disk radius must be positive, got {radius}")));
        }
        Ok(Self { center, radius })
    }

    pub fn center(&self) -> Point<T> {
        self.center
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    pub fn translated(&self, h: Point<T>) -> Self {
        Self { center: self.center + h, radius: self.radius }
    }
}

impl<T: Real> Boundary<T> for Disk<T> {
    fn point(&self, t: T) -> Point<T> {
        self.center + Point::unit(t) * self.radius
    }

    fn velocity(&self, t: T) -> Point<T> {
        let e = Point::unit(t);
        Point::new(-e.y, e.x) * self.radius
    }

    fn acceleration(&self, t: T) -> Point<T> {
        -(Point::unit(t) * self.radius)
    }

    fn jacobian(&self, _t: T) -> T {
        self.radius
    }

    fn contains(&self, p: Point<T>) -> bool {
        (p - self.center).norm() < self.radius
    }
}

/// Closed-form test obstacles, star-like about the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestShape {
    /// `r = 0.55 (1 + 0.9 cos t + 0.1 sin 2t) / (1 + 0.75 cos t)`
    Apple,
    /// `r = 0.275 sqrt(3 cos^2 t + 1)`
    Peanut,
    /// `r = (9/20) (cos^10 t + (2/3) sin^10 t)^(-1/10)`
    RoundedRectangle,
}

impl TestShape {
    pub fn name(&self) -> &'static str {
        match self {
            TestShape::Apple => "apple",
            TestShape::Peanut => "peanut",
            TestShape::RoundedRectangle => "rectangle",
        }
    }

    /// `r, r', r''` of the closed form at `t`.
    pub fn radial<T: Real>(&self, t: T) -> [T; 3] {
        let l = T::lit;
        let (s, c) = t.sin_cos();
        match self {
            TestShape::Apple => {
                let (s2, c2) = (l(2.0) * t).sin_cos();
                let num = l(1.0) + l(0.9) * c + l(0.1) * s2;
                let dnum = -l(0.9) * s + l(0.2) * c2;
                let ddnum = -l(0.9) * c - l(0.4) * s2;
                let den = l(1.0) + l(0.75) * c;
                let dden = -l(0.75) * s;
                let ddden = -l(0.75) * c;
                let q1 = (dnum * den - num * dden) / (den * den);
                let q2 = (ddnum * den - num * ddden) / (den * den) - l(2.0) * dden * q1 / den;
                [l(0.55) * num / den, l(0.55) * q1, l(0.55) * q2]
            }
            TestShape::Peanut => {
                let h = l(3.0) * c * c + l(1.0);
                let dh = -l(3.0) * (l(2.0) * t).sin();
                let ddh = -l(6.0) * (l(2.0) * t).cos();
                let sq = h.sqrt();
                [
                    l(0.275) * sq,
                    l(0.275) * dh / (l(2.0) * sq),
                    l(0.275) * (ddh / (l(2.0) * sq) - dh * dh / (l(4.0) * h * sq)),
                ]
            }
            TestShape::RoundedRectangle => {
                let c8 = c.powi(8);
                let s8 = s.powi(8);
                let g = c8 * c * c + l(2.0 / 3.0) * s8 * s * s;
                let dg = -l(10.0) * c8 * c * s + l(20.0 / 3.0) * s8 * s * c;
                let ddg = l(90.0) * c8 * s * s - l(10.0) * c8 * c * c + l(60.0) * s8 * c * c
                    - l(20.0 / 3.0) * s8 * s * s;
                let a = l(0.45);
                [
                    a * g.powf(-l(0.1)),
                    -a * l(0.1) * g.powf(-l(1.1)) * dg,
                    a * (l(0.11) * g.powf(-l(2.1)) * dg * dg - l(0.1) * g.powf(-l(1.1)) * ddg),
                ]
            }
        }
    }
}

impl std::str::FromStr for TestShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "apple" => Ok(TestShape::Apple),
            "peanut" => Ok(TestShape::Peanut),
            "rectangle" | "rounded-rectangle" => Ok(TestShape::RoundedRectangle),
            other => Err(Error::invalid(format!("unknown shape '{other}'"))),
        }
    }
}

/// A closed-form test obstacle, optionally translated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactCurve<T> {
    pub shape: TestShape,
    pub center: Point<T>,
}

impl<T: Real> ExactCurve<T> {
    pub fn new(shape: TestShape) -> Self {
        Self { shape, center: Point::default() }
    }

    pub fn translated(&self, h: Point<T>) -> Self {
        Self { shape: self.shape, center: self.center + h }
    }

    pub fn radius(&self, t: T) -> T {
        self.shape.radial(t)[0]
    }
}

impl<T: Real> Boundary<T> for ExactCurve<T> {
    fn point(&self, t: T) -> Point<T> {
        self.center + Point::unit(t) * self.radius(t)
    }

    fn velocity(&self, t: T) -> Point<T> {
        radial_frame(self.center, t, self.shape.radial(t))[1]
    }

    fn acceleration(&self, t: T) -> Point<T> {
        radial_frame(self.center, t, self.shape.radial(t))[2]
    }

    fn contains(&self, p: Point<T>) -> bool {
        let d = p - self.center;
        d.norm() < self.radius(d.angle())
    }
}

/// Result of a least-squares star-like fit.
#[derive(Debug, Clone)]
pub struct StarFit<T> {
    pub curve: StarCurve<T>,
    /// Largest absolute radial misfit over the samples.
    pub residual: T,
}

/// Least-squares trigonometric fit of the radius about the samples'
/// centroid.
pub fn fit_star_curve<T: Real>(samples: &[Point<T>], m: usize) -> Result<StarFit<T>> {
    if samples.is_empty() {
        return Err(Error::Fit("no samples".into()));
    }
    let inv = T::from_index(samples.len()).recip();
    let centroid = samples.iter().fold(Point::default(), |acc, &p| acc + p) * inv;
    fit_star_curve_about(samples, centroid, m)
}

/// Least-squares trigonometric fit of the radius about a given center.
/// Samples must be ordered counter-clockwise along the curve.
pub fn fit_star_curve_about<T: Real>(
    samples: &[Point<T>],
    center: Point<T>,
    m: usize,
) -> Result<StarFit<T>> {
    let unknowns = 2 * m + 1;
    if m < 1 || samples.len() < unknowns {
        return Err(Error::Fit(format!(
            "need M >= 1 and at least {unknowns} samples, got M = {m} and {}",
            samples.len()
        )));
    }
    let polar: Vec<(T, T)> = samples
        .iter()
        .map(|&p| {
            let d = p - center;
            (d.angle(), d.norm())
        })
        .collect();
    if polar.iter().any(|&(_, r)| !(r > T::zero())) {
        return Err(Error::Fit("a sample coincides with the fit center".into()));
    }
    // Star-likeness: the polar angle must advance monotonically and wind once.
    let mut winding = T::zero();
    for i in 0..polar.len() {
        let next = polar[(i + 1) % polar.len()].0;
        let mut step = next - polar[i].0;
        if step > T::PI() {
            step -= T::two_pi();
        } else if step <= -T::PI() {
            step += T::two_pi();
        }
        if !(step > T::zero()) {
            return Err(Error::Fit(format!("radius is multivalued near sample {i}")));
        }
        winding += step;
    }
    if (winding - T::two_pi()).abs() > T::lit(1e-6) {
        return Err(Error::Fit("samples do not wind once around the center".into()));
    }

    let basis = |theta: T| -> Vec<T> {
        let mut row = Vec::with_capacity(unknowns);
        row.push(T::one());
        for k in 1..=m {
            row.push((T::from_index(k) * theta).cos());
        }
        for k in 1..=m {
            row.push((T::from_index(k) * theta).sin());
        }
        row
    };
    let mut normal = Matrix::<T>::zeros(unknowns, unknowns);
    let mut rhs = vec![T::zero(); unknowns];
    for &(theta, r) in &polar {
        let row = basis(theta);
        for i in 0..unknowns {
            rhs[i] += row[i] * r;
            for j in 0..unknowns {
                normal[(i, j)] += row[i] * row[j];
            }
        }
    }
    let coeffs = cholesky_solve(&normal, &rhs).map_err(|e| Error::Fit(e.to_string()))?;
    let curve = StarCurve::new(center, coeffs)?;
    let residual = polar
        .iter()
        .map(|&(theta, r)| (curve.radius(theta) - r).abs())
        .fold(T::zero(), T::max);
    Ok(StarFit { curve, residual })
}

/// Relative discrete L2 distance between two curves compared at matched
/// parameter values:
/// `sqrt(sum |p_rec(tau_j) - p_exact(tau_j)|^2) / sqrt(sum |p_exact(tau_j)|^2)`.
pub fn boundary_error<T: Real>(
    reconstructed: &dyn Boundary<T>,
    exact: &dyn Boundary<T>,
    grid: &ParamGrid,
) -> T {
    let (num, den) = grid.knots::<T>().into_iter().fold((T::zero(), T::zero()), |(n, d), t| {
        let pe = exact.point(t);
        (n + (reconstructed.point(t) - pe).norm_sqr(), d + pe.norm_sqr())
    });
    (num / den).sqrt()
}
