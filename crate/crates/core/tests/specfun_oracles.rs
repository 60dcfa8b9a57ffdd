//! Bessel and Hankel functions against independently coded references:
//! ascending series for small arguments, Hankel's expansion for large ones.

use std::f64::consts::PI;

use phaseless::specfun::{self, cylinder_functions};
use phaseless::{Complex, Result};
use proptest::prelude::*;

mod common;
use common::{series, EULER};

fn bessel_j0(x: f64) -> f64 {
    specfun::bessel_j0(x)
}

fn bessel_j1(x: f64) -> f64 {
    specfun::bessel_j1(x)
}

fn bessel_y0(x: f64) -> Result<f64> {
    specfun::bessel_y0(x)
}

fn bessel_y1(x: f64) -> Result<f64> {
    specfun::bessel_y1(x)
}

fn hankel1_0(x: f64) -> Result<Complex<f64>> {
    specfun::hankel1_0(x)
}

fn hankel1_1(x: f64) -> Result<Complex<f64>> {
    specfun::hankel1_1(x)
}

/// `H^(1)_nu(x) ~ sqrt(2/(pi x)) e^{i(x - nu pi/2 - pi/4)} sum_k i^k a_k(nu) / x^k`.
fn asymptotic(nu: f64, x: f64) -> (f64, f64) {
    let mu = 4.0 * nu * nu;
    let (mut re, mut im) = (0.0, 0.0);
    let mut a = 1.0;
    for k in 0..12 {
        // i^k rotates the term
        match k % 4 {
            0 => re += a,
            1 => im += a,
            2 => re -= a,
            _ => im -= a,
        }
        let odd = (2 * k + 1) as f64;
        a *= (mu - odd * odd) / ((k as f64 + 1.0) * 8.0 * x);
    }
    let amp = (2.0 / (PI * x)).sqrt();
    let phase = x - nu * PI / 2.0 - PI / 4.0;
    let (s, c) = phase.sin_cos();
    (amp * (re * c - im * s), amp * (re * s + im * c))
}

#[test]
fn series_oracle_agrees_below_twelve() {
    let mut x = 0.05;
    while x <= 12.0 {
        let [j0, j1, y0, y1] = series(x);
        assert!((bessel_j0(x) - j0).abs() < 1e-10, "J0({x})");
        assert!((bessel_j1(x) - j1).abs() < 1e-10, "J1({x})");
        assert!((bessel_y0(x).unwrap() - y0).abs() < 1e-10, "Y0({x})");
        assert!((bessel_y1(x).unwrap() - y1).abs() < 1e-10, "Y1({x})");
        x += 0.173;
    }
}

#[test]
fn asymptotic_oracle_agrees_above_fifty() {
    for &x in &[50.0, 63.7, 80.0, 120.5, 400.0] {
        let h0 = hankel1_0(x).unwrap();
        let h1 = hankel1_1(x).unwrap();
        let (a0, b0) = asymptotic(0.0, x);
        let (a1, b1) = asymptotic(1.0, x);
        assert!((h0.re - a0).abs() < 1e-8 && (h0.im - b0).abs() < 1e-8, "H0({x})");
        assert!((h1.re - a1).abs() < 1e-8 && (h1.im - b1).abs() < 1e-8, "H1({x})");
    }
}

#[test]
fn reference_values() {
    assert!((bessel_j0(1.0) - 0.765_197_686_6).abs() < 1e-10);
    assert!(bessel_j0(2.404_825_557_7_f64).abs() < 1e-10);
    assert!((bessel_y0(1.0).unwrap() - 0.088_256_964_2).abs() < 1e-10);
    assert!(bessel_y0(3.957_678_419_3_f64).unwrap().abs() < 1e-10);
    let h = hankel1_0(1.0).unwrap();
    assert!((h.re - 0.765_197_686_6).abs() < 1e-10 && (h.im - 0.088_256_964_2).abs() < 1e-10);
    let w = bessel_j1(2.0) * bessel_y0(2.0).unwrap() - bessel_j0(2.0) * bessel_y1(2.0).unwrap();
    // 2 / (2 pi)
    assert!((w - std::f64::consts::FRAC_1_PI).abs() < 1e-10);
    let m = hankel1_0(100.0).unwrap().norm() * 10.0;
    assert!((m - 0.797_884_560_8).abs() < 1e-2);
}

#[test]
fn small_argument_logarithm() {
    // Y0(x) - (2/pi)(ln(x/2) + E_c) -> 0 as x -> 0
    for &x in &[1e-3f64, 1e-5, 1e-8] {
        let y = bessel_y0(x).unwrap();
        assert!((y - 2.0 / PI * ((x / 2.0).ln() + EULER)).abs() < 1e-5);
    }
    assert!(bessel_y0(0.0).is_err());
}

#[test]
fn wronskian() {
    for &x in &[0.1f64, 1.0, 10.0, 50.0] {
        let c = cylinder_functions(x).unwrap();
        let w = c.j1 * c.y0 - c.j0 * c.y1;
        let exact = 2.0 / (PI * x);
        assert!(((w - exact) / exact).abs() < 1e-10, "x = {x}");
    }
}

proptest! {
    #[test]
    fn j0_derivative_is_minus_j1(x in 0.5f64..20.0) {
        let h = 1e-5;
        let fd = (bessel_j0(x + h) - bessel_j0(x - h)) / (2.0 * h);
        prop_assert!((fd + bessel_j1(x)).abs() < 1e-8);
    }

    #[test]
    fn y0_derivative_is_minus_y1(x in 0.5f64..20.0) {
        let h = 1e-5;
        let fd = (bessel_y0(x + h).unwrap() - bessel_y0(x - h).unwrap()) / (2.0 * h);
        prop_assert!((fd + bessel_y1(x).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn finite_for_positive_arguments(x in 1e-6f64..1e4) {
        let c = cylinder_functions(x).unwrap();
        prop_assert!(c.j0.is_finite() && c.j1.is_finite() && c.y0.is_finite() && c.y1.is_finite());
    }
}
