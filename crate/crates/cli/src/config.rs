//! TOML run configuration. Every section is optional; missing values fall
//! back to the apple example.

use std::path::Path;

use phaseless::forward::NoiseKind;
use phaseless::geometry::{Boundary, Disk, ExactCurve, Point, TestShape};
use phaseless::inversion::SolverConfig;
use phaseless::presets::{Experiment, NoiseConfig, Preset};
use phaseless::IncidentWaveF64;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Scatterer {
    /// apple, peanut, rectangle or circle
    pub shape: String,
    pub center: [f64; 2],
    /// Only used by `circle`.
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Ball {
    pub center: [f64; 2],
    pub radius: f64,
    /// Synthesis only: leave the ball out of the scene.
    pub enabled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Wave {
    pub wavenumber: f64,
    /// Incident direction as an angle in radians.
    pub direction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Solver {
    pub n: usize,
    pub m: usize,
    pub rho: f64,
    pub epsilon: f64,
    pub max_iterations: usize,
    pub init_center: [f64; 2],
    pub init_radius: f64,
    pub freeze_modes: bool,
    /// Values `(alpha_1, beta_1)` held fixed when freezing.
    pub frozen_values: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Noise {
    pub delta: f64,
    pub seed: u64,
    /// uniform or truncated-normal
    pub kind: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub scatterer: Scatterer,
    pub ball: Ball,
    pub wave: Wave,
    pub solver: Solver,
    pub noise: Noise,
}

impl Default for Scatterer {
    fn default() -> Self {
        Self { shape: "apple".into(), center: [0.0, 0.0], radius: 1.0 }
    }
}

impl Default for Ball {
    fn default() -> Self {
        Self { center: [4.0, 0.0], radius: 0.4, enabled: true }
    }
}

impl Default for Wave {
    fn default() -> Self {
        Self { wavenumber: 2.0, direction: -std::f64::consts::PI / 6.0 }
    }
}

impl Default for Solver {
    fn default() -> Self {
        Self {
            n: 32,
            m: 5,
            rho: 0.6,
            epsilon: 0.015,
            max_iterations: 200,
            init_center: [-0.7, 0.45],
            init_radius: 0.1,
            freeze_modes: true,
            frozen_values: [0.0, 0.0],
        }
    }
}

impl Default for Noise {
    fn default() -> Self {
        Self { delta: 0.01, seed: 1, kind: "uniform".into() }
    }
}

fn bad(msg: impl std::fmt::Display) -> CliError {
    CliError::Config(msg.to_string())
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| bad(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn from_preset(preset: Preset) -> Self {
        let e = Experiment::<f64>::preset(preset);
        let s = &e.solver;
        Self {
            scatterer: Scatterer { shape: preset.name().into(), ..Scatterer::default() },
            ball: Ball { center: [s.ball.center().x, s.ball.center().y], radius: s.ball.radius(), enabled: true },
            wave: Wave { wavenumber: s.wave.wavenumber(), direction: s.wave.angle() },
            solver: Solver {
                n: s.n,
                m: s.m,
                rho: s.rho,
                epsilon: s.epsilon,
                max_iterations: s.max_iterations,
                init_center: [s.init_center.x, s.init_center.y],
                init_radius: s.init_radius,
                freeze_modes: s.frozen_modes.is_some(),
                frozen_values: s.frozen_modes.map(|(a, b)| [a, b]).unwrap_or([0.0, 0.0]),
            },
            noise: Noise { delta: e.noise.delta, seed: e.noise.seed, kind: "uniform".into() },
        }
    }

    pub fn wave(&self) -> Result<IncidentWaveF64, CliError> {
        IncidentWaveF64::from_angle(self.wave.wavenumber, self.wave.direction).map_err(bad)
    }

    pub fn ball(&self) -> Result<Disk<f64>, CliError> {
        Disk::new(Point::new(self.ball.center[0], self.ball.center[1]), self.ball.radius).map_err(bad)
    }

    pub fn obstacle(&self) -> Result<Box<dyn Boundary<f64>>, CliError> {
        let c = Point::new(self.scatterer.center[0], self.scatterer.center[1]);
        if self.scatterer.shape == "circle" {
            return Ok(Box::new(Disk::new(c, self.scatterer.radius).map_err(bad)?));
        }
        let shape: TestShape = self.scatterer.shape.parse().map_err(bad)?;
        Ok(Box::new(ExactCurve::new(shape).translated(c)))
    }

    pub fn noise(&self) -> Result<NoiseConfig<f64>, CliError> {
        let kind: NoiseKind = self.noise.kind.parse().map_err(bad)?;
        Ok(NoiseConfig { delta: self.noise.delta, seed: self.noise.seed, kind })
    }

    pub fn solver(&self) -> Result<SolverConfig<f64>, CliError> {
        let s = &self.solver;
        let mut cfg = SolverConfig::new(
            self.wave()?,
            self.ball()?,
            Point::new(s.init_center[0], s.init_center[1]),
            s.init_radius,
            s.epsilon,
        );
        cfg.n = s.n;
        cfg.m = s.m;
        cfg.rho = s.rho;
        cfg.max_iterations = s.max_iterations;
        cfg.frozen_modes = s.freeze_modes.then_some((s.frozen_values[0], s.frozen_values[1]));
        cfg.validate().map_err(bad)?;
        Ok(cfg)
    }
}
