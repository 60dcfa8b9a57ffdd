//! Plain-text tables for runs. Every real is written with 17 significant
//! digits so that parsing the file gives back the same `f64`.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::forward::{FarFieldSamples, PhaselessSamples};
use crate::geometry::{Boundary, ParamGrid, StarCurve};
use crate::inversion::RunHistory;
use crate::scalar::Real;

/// Round-trippable scientific notation.
pub fn fmt_real<T: Real>(x: T) -> String {
    format!("{:.16e}", x.to_f64().unwrap_or(f64::NAN))
}

fn opt(x: Option<impl Real>) -> String {
    x.map(fmt_real).unwrap_or_default()
}

/// Rows `t,re,im,abs2`.
pub fn farfield_csv<T: Real>(u: &FarFieldSamples<T>) -> String {
    let mut s = String::from("t,re,im,abs2\n");
    for (t, v) in u.angles.iter().zip(&u.values) {
        let _ = writeln!(s, "{},{},{},{}", fmt_real(*t), fmt_real(v.re), fmt_real(v.im), fmt_real(v.norm_sqr()));
    }
    s
}

/// Rows `t,intensity`.
pub fn intensity_csv<T: Real>(d: &PhaselessSamples<T>) -> String {
    let mut s = String::from("t,intensity\n");
    for (t, v) in d.angles.iter().zip(&d.intensities) {
        let _ = writeln!(s, "{},{}", fmt_real(*t), fmt_real(*v));
    }
    s
}

/// Reads intensities from either [`farfield_csv`] (last column) or
/// [`intensity_csv`] output.
pub fn parse_intensities(text: &str) -> Result<PhaselessSamples<f64>> {
    let mut angles = Vec::new();
    let mut values = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(|c: char| c.is_ascii_alphabetic()) {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 2 && fields.len() != 4 {
            return Err(Error::invalid(format!("line {}: expected 2 or 4 columns, got {}", lineno + 1, fields.len())));
        }
        let parse = |f: &str| {
            f.parse::<f64>().map_err(|e| Error::invalid(format!("line {}: {e}", lineno + 1)))
        };
        angles.push(parse(fields[0])?);
        values.push(parse(fields[fields.len() - 1])?);
    }
    PhaselessSamples::new(angles, values)
}

/// Rows `tau,x,y` on the grid.
pub fn curve_csv<T: Real>(curve: &dyn Boundary<T>, grid: &ParamGrid) -> String {
    let mut s = String::from("tau,x,y\n");
    for t in grid.knots::<T>() {
        let p = curve.point(t);
        let _ = writeln!(s, "{},{},{}", fmt_real(t), fmt_real(p.x), fmt_real(p.y));
    }
    s
}

/// Rows `k,E,Er,lambda`; `Er` is empty when no exact curve was supplied.
pub fn errors_csv<T: Real>(h: &RunHistory<T>) -> String {
    let mut s = String::from("k,E,Er,lambda\n");
    for r in &h.records {
        let _ = writeln!(s, "{},{},{},{}", r.k, fmt_real(r.error), opt(r.boundary_error), fmt_real(r.lambda));
    }
    s
}

/// Rows `k,lambda,condition,xi_0..xi_{2M+2}` for every step taken.
pub fn updates_csv<T: Real>(h: &RunHistory<T>) -> String {
    let mut s = String::from("k,lambda,condition");
    if let Some(u) = h.records.iter().find_map(|r| r.update.as_ref()) {
        for i in 0..u.as_slice().len() {
            let _ = write!(s, ",xi_{i}");
        }
    }
    s.push('\n');
    for r in &h.records {
        if let Some(u) = &r.update {
            let _ = write!(s, "{},{},{}", r.k, fmt_real(r.lambda), opt(r.update_condition));
            for v in u.as_slice() {
                let _ = write!(s, ",{}", fmt_real(*v));
            }
            s.push('\n');
        }
    }
    s
}

/// Flat description `(center, coefficients, M)` for a star curve.
pub fn curve_summary<T: Real>(c: &StarCurve<T>) -> (f64, f64, Vec<f64>, usize) {
    let f = |x: T| x.to_f64().unwrap_or(f64::NAN);
    (f(c.center().x), f(c.center().y), c.coeffs().iter().map(|&v| f(v)).collect(), c.truncation())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, std::f64::consts::PI] {
            let s = fmt_real(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17);
        }
    }

    #[test]
    fn farfield_round_trip() {
        let u = FarFieldSamples::new(vec![0.0, 0.5], vec![Complex::new(0.3, -0.1), Complex::new(1.0 / 7.0, 2.0)]).unwrap();
        let csv = farfield_csv(&u);
        assert_eq!(csv.lines().count(), 3);
        let back = parse_intensities(&csv).unwrap();
        assert_eq!(back, u.intensities());
    }
}
