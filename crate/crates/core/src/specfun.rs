//! Cylinder functions of orders zero and one.
//!
//! Three evaluation regimes:
//!
//! * `x < 2`: ascending power series (no cancellation to speak of),
//! * `2 <= x < 25`: Miller backward recurrence for `J_n`, normalized with
//!   `J_0 + 2 sum J_2k = 1`, and the Neumann series for `Y_0`, `Y_1`,
//! * `x >= 25`: Hankel asymptotic expansion, whose smallest term is below
//!   `e^{-2x}`.
//!
//! All four functions come out of one pass; [`cylinder_functions`] exposes
//! them together since the kernels need `J` and `H` at the same argument.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

const SERIES_LIMIT: f64 = 2.0;
const ASYMPTOTIC_LIMIT: f64 = 25.0;
const RESCALE_THRESHOLD: f64 = 1e10;

/// `J0, J1, Y0, Y1` at a common positive argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cylinder01<T> {
    pub j0: T,
    pub j1: T,
    pub y0: T,
    pub y1: T,
}

impl<T: Real> Cylinder01<T> {
    pub fn hankel0(&self) -> Complex<T> {
        Complex::new(self.j0, self.y0)
    }

    pub fn hankel1(&self) -> Complex<T> {
        Complex::new(self.j1, self.y1)
    }
}

/// Evaluates `J0, J1, Y0, Y1` at `x > 0`.
pub fn cylinder_functions<T: Real>(x: T) -> Result<Cylinder01<T>> {
    if !(x > T::zero()) || !x.is_finite() {
        return Err(Error::Domain(format!(
            "Neumann functions need a finite positive argument, got {x}"
        )));
    }
    Ok(if x < T::lit(SERIES_LIMIT) {
        ascending(x)
    } else if x < T::lit(ASYMPTOTIC_LIMIT) {
        miller(x)
    } else {
        let (j0, y0) = hankel_asymptotic(0, x);
        let (j1, y1) = hankel_asymptotic(1, x);
        Cylinder01 { j0, j1, y0, y1 }
    })
}

/// Bessel function of the first kind, order zero. Even in `x`.
pub fn bessel_j0<T: Real>(x: T) -> T {
    let x = x.abs();
    if x == T::zero() {
        return T::one();
    }
    if x < T::lit(SERIES_LIMIT) {
        series_j(x).0
    } else if x < T::lit(ASYMPTOTIC_LIMIT) {
        let seq = miller_sequence(x, 1);
        seq[0]
    } else {
        hankel_asymptotic(0, x).0
    }
}

/// Bessel function of the first kind, order one. Odd in `x`.
pub fn bessel_j1<T: Real>(x: T) -> T {
    let sign = x.signum();
    let x = x.abs();
    if x == T::zero() {
        return T::zero();
    }
    let v = if x < T::lit(SERIES_LIMIT) {
        series_j(x).1
    } else if x < T::lit(ASYMPTOTIC_LIMIT) {
        miller_sequence(x, 1)[1]
    } else {
        hankel_asymptotic(1, x).0
    };
    sign * v
}

pub fn bessel_y0<T: Real>(x: T) -> Result<T> {
    cylinder_functions(x).map(|c| c.y0)
}

pub fn bessel_y1<T: Real>(x: T) -> Result<T> {
    cylinder_functions(x).map(|c| c.y1)
}

/// `H0^(1)(x) = J0(x) + i Y0(x)`.
pub fn hankel1_0<T: Real>(x: T) -> Result<Complex<T>> {
    cylinder_functions(x).map(|c| c.hankel0())
}

/// `H1^(1)(x) = J1(x) + i Y1(x)`.
pub fn hankel1_1<T: Real>(x: T) -> Result<Complex<T>> {
    cylinder_functions(x).map(|c| c.hankel1())
}

/// `J_0(x) .. J_nmax(x)` by normalized backward recurrence. Used by the
/// separation-of-variables oracle, which needs integer orders beyond one.
pub(crate) fn bessel_j_sequence<T: Real>(x: T, nmax: usize) -> Vec<T> {
    if x == T::zero() {
        let mut v = vec![T::zero(); nmax + 1];
        v[0] = T::one();
        return v;
    }
    let mut seq = miller_sequence(x.abs(), nmax);
    if x < T::zero() {
        for (m, v) in seq.iter_mut().enumerate() {
            if m % 2 == 1 {
                *v = -*v;
            }
        }
    }
    seq
}

/// `Y_0(x) .. Y_nmax(x)` by forward recurrence, which is stable for `Y`.
pub(crate) fn bessel_y_sequence<T: Real>(x: T, nmax: usize) -> Result<Vec<T>> {
    let c = cylinder_functions(x)?;
    let mut out = Vec::with_capacity(nmax + 1);
    out.push(c.y0);
    if nmax >= 1 {
        out.push(c.y1);
    }
    for n in 1..nmax {
        let next = T::lit(2.0) * T::from_index(n) / x * out[n] - out[n - 1];
        out.push(next);
    }
    Ok(out)
}

/// Power series for `J0` and `J1`.
fn series_j<T: Real>(x: T) -> (T, T) {
    let q = x * x / T::lit(4.0);
    let mut t0 = T::one();
    let mut t1 = T::one();
    let mut j0 = T::one();
    let mut j1 = T::one();
    for k in 1..60 {
        let kf = T::from_index(k);
        t0 = -t0 * q / (kf * kf);
        t1 = -t1 * q / (kf * (kf + T::one()));
        j0 += t0;
        j1 += t1;
        if t0.abs() <= T::epsilon() * j0.abs() && t1.abs() <= T::epsilon() * j1.abs() {
            break;
        }
    }
    (j0, x / T::lit(2.0) * j1)
}

fn ascending<T: Real>(x: T) -> Cylinder01<T> {
    let (j0, j1) = series_j(x);
    let two = T::lit(2.0);
    let pi = T::PI();
    let gamma = T::euler_gamma();
    let q = x * x / T::lit(4.0);
    let log_half = (x / two).ln();

    // Y0 = (2/pi) [ (ln(x/2) + gamma) J0 + sum_{k>=1} (-1)^{k+1} H_k q^k / (k!)^2 ]
    let mut y0_sum = T::zero();
    // Y1 tail: sum_{k>=0} (psi(k+1) + psi(k+2)) (-q)^k / (k! (k+1)!)
    let mut y1_sum = T::lit(1.0) - two * gamma;
    let mut term0 = T::one();
    let mut term1 = T::one();
    let mut harmonic = T::zero();
    for k in 1..60 {
        let kf = T::from_index(k);
        harmonic += T::one() / kf;
        term0 = -term0 * q / (kf * kf);
        term1 = -term1 * q / (kf * (kf + T::one()));
        let h_next = harmonic + T::one() / (kf + T::one());
        let a = -term0 * harmonic;
        let b = term1 * (harmonic + h_next - two * gamma);
        y0_sum += a;
        y1_sum += b;
        if a.abs() <= T::epsilon() * y0_sum.abs().max(T::epsilon())
            && b.abs() <= T::epsilon() * y1_sum.abs()
        {
            break;
        }
    }
    let y0 = two / pi * ((log_half + gamma) * j0 + y0_sum);
    let y1 = -two / (pi * x) + two / pi * log_half * j1 - x / (two * pi) * y1_sum;
    Cylinder01 { j0, j1, y0, y1 }
}

/// Starting order for the backward recurrence; `J_n(x)` is negligible there.
fn miller_start<T: Real>(x: T, nmax: usize) -> usize {
    let base = (T::lit(1.6) * x).to_usize().unwrap_or(0) + 40;
    let n = base.max(nmax + 40);
    n + n % 2
}

/// Normalized `J_0 .. J_start` by backward recurrence.
fn miller_raw<T: Real>(x: T, nmax: usize) -> Vec<T> {
    let start = miller_start(x, nmax);
    let mut vals = vec![T::zero(); start + 2];
    vals[start] = T::one();
    let two = T::lit(2.0);
    let threshold = T::lit(RESCALE_THRESHOLD);
    for k in (1..=start).rev() {
        let next = two * T::from_index(k) / x * vals[k] - vals[k + 1];
        vals[k - 1] = next;
        if next.abs() > threshold {
            let s = threshold.recip();
            for v in vals[k - 1..].iter_mut() {
                *v = *v * s;
            }
        }
    }
    let mut norm = vals[0];
    let mut k = 2;
    while k <= start {
        norm += two * vals[k];
        k += 2;
    }
    for v in vals.iter_mut() {
        *v = *v / norm;
    }
    vals
}

fn miller_sequence<T: Real>(x: T, nmax: usize) -> Vec<T> {
    let mut vals = miller_raw(x, nmax);
    vals.truncate(nmax + 1);
    vals
}

fn miller<T: Real>(x: T) -> Cylinder01<T> {
    let vals = miller_raw(x, 1);
    let start = vals.len() - 2;
    let two = T::lit(2.0);
    let pi = T::PI();
    // Neumann series: Y0 = (2/pi)(ln(x/2)+gamma) J0 - (4/pi) sum (-1)^k J_2k / k
    // and its derivative for Y1 = -Y0'.
    let mut s0 = T::zero();
    let mut s1 = T::zero();
    let mut k = 1;
    while 2 * k < start {
        let kf = T::from_index(k);
        let sign = if k % 2 == 0 { T::one() } else { -T::one() };
        s0 += sign * vals[2 * k] / kf;
        s1 += sign * (vals[2 * k - 1] - vals[2 * k + 1]) / kf;
        k += 1;
    }
    let j0 = vals[0];
    let j1 = vals[1];
    let log_term = (x / two).ln() + T::euler_gamma();
    let y0 = two / pi * log_term * j0 - T::lit(4.0) / pi * s0;
    let y1 = -two / (pi * x) * j0 + two / pi * log_term * j1 + two / pi * s1;
    Cylinder01 { j0, j1, y0, y1 }
}

/// Large-argument expansion; returns `(J_nu, Y_nu)` for `nu` in {0, 1}.
fn hankel_asymptotic<T: Real>(order: u32, x: T) -> (T, T) {
    let mu = T::lit(4.0 * f64::from(order * order));
    let eight_x = T::lit(8.0) * x;
    let mut p = T::one();
    let mut q = T::zero();
    let mut term = T::one();
    let mut last = T::infinity();
    for k in 1..200usize {
        let odd = T::from_index(2 * k - 1);
        term = term * (mu - odd * odd) / (T::from_index(k) * eight_x);
        if term.abs() > last {
            break;
        }
        last = term.abs();
        // a_k / x^k enters P (k even) or Q (k odd) with alternating signs.
        let sign = if (k / 2) % 2 == 0 { T::one() } else { -T::one() };
        if k % 2 == 0 {
            p += sign * term;
        } else {
            q += sign * term;
        }
        if term.abs() < T::epsilon() * T::lit(1e-2) {
            break;
        }
    }
    let phase = x - (T::lit(f64::from(order)) / T::lit(2.0) + T::lit(0.25)) * T::PI();
    let amp = (T::lit(2.0) / (T::PI() * x)).sqrt();
    let (s, c) = phase.sin_cos();
    (amp * (p * c - q * s), amp * (p * s + q * c))
}
