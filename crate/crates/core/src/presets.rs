//! The three worked examples (apple, peanut, rounded rectangle) and a
//! one-call runner that synthesizes noisy data and reconstructs.

use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::forward::{add_noise, synthesize_farfield, FarFieldSamples, IncidentWave, NoiseKind, PhaselessSamples};
use crate::geometry::{Disk, ExactCurve, Point, TestShape};
use crate::inversion::{reconstruct, RunHistory, SolverConfig};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseConfig<T> {
    pub delta: T,
    pub seed: u64,
    pub kind: NoiseKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Apple,
    Peanut,
    Rectangle,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Apple, Preset::Peanut, Preset::Rectangle];

    pub fn name(&self) -> &'static str {
        self.shape().name()
    }

    pub fn shape(&self) -> TestShape {
        match self {
            Preset::Apple => TestShape::Apple,
            Preset::Peanut => TestShape::Peanut,
            Preset::Rectangle => TestShape::RoundedRectangle,
        }
    }
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "apple" => Ok(Preset::Apple),
            "peanut" => Ok(Preset::Peanut),
            "rectangle" => Ok(Preset::Rectangle),
            other => Err(Error::invalid(format!("unknown preset '{other}' (expected apple, peanut or rectangle)"))),
        }
    }
}

/// Everything needed to reproduce one synthetic reconstruction.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment<T> {
    pub name: String,
    pub obstacle: ExactCurve<T>,
    pub solver: SolverConfig<T>,
    pub noise: NoiseConfig<T>,
}

impl<T: Real> Experiment<T> {
    pub fn preset(preset: Preset) -> Self {
        let l = T::lit;
        let (theta, ball_r, init, delta, eps) = match preset {
            Preset::Apple => (-T::PI() / l(6.0), l(0.4), (l(-0.7), l(0.45)), l(0.01), l(0.015)),
            Preset::Peanut => (l(2.0) * T::PI() / l(3.0), l(0.4), (l(0.3), l(-0.6)), l(0.05), l(0.035)),
            Preset::Rectangle => (T::PI() / l(6.0), l(0.5), (l(0.4), l(-0.8)), l(0.01), l(0.015)),
        };
        let wave = IncidentWave::from_angle(l(2.0), theta).expect("preset wave is valid");
        let ball = Disk::new(Point::new(l(4.0), T::zero()), ball_r).expect("preset ball is valid");
        Self {
            name: preset.name().to_string(),
            obstacle: ExactCurve::new(preset.shape()),
            solver: SolverConfig::new(wave, ball, Point::new(init.0, init.1), l(0.1), eps),
            noise: NoiseConfig { delta, seed: 1, kind: NoiseKind::Uniform },
        }
    }

    /// Exact far field of obstacle plus ball, clean and noisy intensities.
    pub fn synthesize(&self) -> Result<(FarFieldSamples<T>, PhaselessSamples<T>)> {
        let grid = self.solver.grid()?;
        let u = synthesize_farfield(&self.obstacle, Some(&self.solver.ball), &self.solver.wave, &grid)?;
        let noisy = add_noise(&u.intensities(), self.noise.delta, self.noise.seed, self.noise.kind)?;
        Ok((u, noisy))
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome<T> {
    pub farfield: FarFieldSamples<T>,
    pub data: PhaselessSamples<T>,
    pub history: RunHistory<T>,
    pub synthesis_time: Duration,
    pub reconstruction_time: Duration,
}

pub fn run_experiment<T: Real>(exp: &Experiment<T>) -> Result<ExperimentOutcome<T>> {
    let t0 = Instant::now();
    let (farfield, data) = exp.synthesize()?;
    let synthesis_time = t0.elapsed();
    let t1 = Instant::now();
    let history = reconstruct(&exp.solver, &data, Some(&exp.obstacle))?;
    Ok(ExperimentOutcome { farfield, data, history, synthesis_time, reconstruction_time: t1.elapsed() })
}
