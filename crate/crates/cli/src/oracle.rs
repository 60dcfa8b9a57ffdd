//! Quick self-checks of the numerical layers, runnable from the command line.

use phaseless::farfield::frechet_kernels;
use phaseless::field_system::{assemble_field_system, log_quadrature_weights, solve_densities};
use phaseless::forward::{mie_farfield, synthesize_farfield, IncidentWave};
use phaseless::geometry::{Disk, ExactCurve, ParamGrid, Point, StarCurve, TestShape};
use phaseless::Complex;

use crate::CliError;

struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    /// `true` when the value must stay below the bound.
    pub below: bool,
}

impl Check {
    pub fn below(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, bound, below: true }
    }

    pub fn above(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, bound, below: false }
    }

    pub fn passed(&self) -> bool {
        if self.below {
            self.value < self.bound
        } else {
            self.value > self.bound
        }
    }
}

type Suite = fn() -> Result<Vec<Check>, phaseless::Error>;

const SUITES: [(&str, Suite); 4] = [("mie", mie), ("weights", weights), ("gradient", gradient), ("translation", translation)];

fn mie() -> Result<Vec<Check>, phaseless::Error> {
    let grid = ParamGrid::new(32)?;
    let wave = IncidentWave::from_angle(2.0, 0.0)?;
    let disk = Disk::new(Point::new(0.0, 0.0), 1.0)?;
    let u = synthesize_farfield(&disk, None, &wave, &grid)?;
    let m = mie_farfield(&disk, &wave, &u.angles)?;
    Ok(vec![Check::below("unit disk, kappa = 2, n = 32: sup |u - u_mie|", u.sup_distance(&m), 1e-6)])
}

fn weights() -> Result<Vec<Check>, phaseless::Error> {
    Ok([4, 8, 16, 32, 64]
        .iter()
        .map(|&n| {
            let s: f64 = log_quadrature_weights::<f64>(n).iter().sum();
            Check::below(format!("n = {n}: |sum R_j|"), s.abs(), 1e-13)
        })
        .collect())
}

/// Central differences of the obstacle far-field operator (densities held
/// fixed) against the assembled derivative.
pub fn gradient_errors(hs: &[f64]) -> Result<Vec<f64>, phaseless::Error> {
    let grid = ParamGrid::new(16)?;
    let kappa = 2.0;
    let wave = IncidentWave::from_angle(kappa, -0.4)?;
    let ball = Disk::new(Point::new(4.0, 0.0), 0.4)?;
    let curve = StarCurve::new(Point::new(0.2, -0.1), vec![0.5, 0.03, -0.04, 0.02, 0.05, 0.01, -0.03])?;
    let (dens, _) = solve_densities(&assemble_field_system(&curve, Some(&ball), &wave, &grid)?)?;
    let kernels = frechet_kernels(&curve, Some(&ball), &dens, &grid, kappa)?;
    let dc = Point::new(0.3, -0.2);
    let dcoef = [0.1, -0.2, 0.15, 0.05, 0.3, -0.1, 0.2];
    let knots = grid.knots::<f64>();
    let dr: Vec<f64> = knots
        .iter()
        .map(|&t| {
            let mut r = dcoef[0];
            for m in 1..=3 {
                r += dcoef[m] * (m as f64 * t).cos() + dcoef[3 + m] * (m as f64 * t).sin();
            }
            r
        })
        .collect();
    let deriv = kernels.derivative(dc, &dr);
    let gamma = phaseless::farfield::gamma(kappa);
    let step = grid.step::<f64>();
    let a1 = |h: f64| -> Vec<Complex<f64>> {
        knots
            .iter()
            .map(|&t| {
                let xh = Point::unit(t);
                let sum: Complex<f64> = knots
                    .iter()
                    .zip(&dens.psi1)
                    .zip(&dr)
                    .map(|((&tau, psi), r)| {
                        let p = phaseless::geometry::Boundary::point(&curve, tau) + (dc + Point::unit(tau) * *r) * h;
                        Complex::from_polar(1.0, -kappa * xh.dot(p)) * psi
                    })
                    .sum();
                -gamma * step * sum
            })
            .collect()
    };
    Ok(hs
        .iter()
        .map(|&h| {
            let (plus, minus) = (a1(h), a1(-h));
            (0..knots.len())
                .map(|s| ((plus[s] - minus[s]) / (2.0 * h) - deriv[s]).norm())
                .fold(0.0, f64::max)
        })
        .collect())
}

fn gradient() -> Result<Vec<Check>, phaseless::Error> {
    let hs = [1e-2, 1e-3, 1e-4];
    let e = gradient_errors(&hs)?;
    let mut checks: Vec<Check> = hs.iter().zip(&e).map(|(h, e)| Check::below(format!("h = {h:e}: sup FD error"), *e, 1e-2)).collect();
    for w in 0..2 {
        checks.push(Check::above(
            format!("order between h = {:e} and {:e}", hs[w], hs[w + 1]),
            (e[w] / e[w + 1]).log10() / (hs[w] / hs[w + 1]).log10(),
            1.9,
        ));
    }
    Ok(checks)
}

fn translation() -> Result<Vec<Check>, phaseless::Error> {
    let grid = ParamGrid::new(32)?;
    let wave = IncidentWave::from_angle(2.0, 0.0)?;
    let h = Point::new(0.5, -0.3);
    let apple = ExactCurve::new(TestShape::Apple);
    let moved = apple.translated(h);
    let ball = Disk::new(Point::new(4.0, 0.0), 0.4)?;
    let modulus_gap = |a: &[Complex<f64>], b: &[Complex<f64>]| {
        a.iter().zip(b).map(|(x, y)| (x.norm() - y.norm()).abs()).fold(0.0, f64::max)
    };
    let u0 = synthesize_farfield(&apple, None, &wave, &grid)?;
    let u1 = synthesize_farfield(&moved, None, &wave, &grid)?;
    let w0 = synthesize_farfield(&apple, Some(&ball), &wave, &grid)?;
    let w1 = synthesize_farfield(&moved, Some(&ball), &wave, &grid)?;
    Ok(vec![
        Check::below("obstacle alone: sup ||u_h| - |u||", modulus_gap(&u1.values, &u0.values), 1e-8),
        Check::above("with reference ball: sup ||u_h| - |u||", modulus_gap(&w1.values, &w0.values), 1e-3),
    ])
}

pub fn run(suite: &str) -> Result<(), CliError> {
    let selected: Vec<(&str, Suite)> = if suite == "all" {
        SUITES.to_vec()
    } else {
        let found = SUITES.iter().find(|(n, _)| *n == suite).ok_or_else(|| {
            CliError::Config(format!("unknown oracle suite '{suite}' (expected mie, weights, gradient, translation or all)"))
        })?;
        vec![*found]
    };
    let mut failures = 0;
    for (name, f) in selected {
        for c in f()? {
            let status = if c.passed() { "PASS" } else { "FAIL" };
            failures += usize::from(!c.passed());
            let rel = if c.below { "<" } else { ">" };
            println!("{status} [{name}] {}: {:.3e} (required {rel} {:.1e})", c.name, c.value, c.bound);
        }
    }
    if failures > 0 {
        return Err(CliError::OracleFailed(failures));
    }
    Ok(())
}
