//! The iteration: solve for the densities on the current iterate, linearize,
//! take a damped regularized step, repeat until the relative intensity
//! misfit drops below `epsilon`.

use crate::error::{Error, Result};
use crate::farfield::{frechet_kernels, relative_misfit};
use crate::field_system::{assemble_field_system, solve_densities};
use crate::forward::{IncidentWave, PhaselessSamples};
use crate::geometry::{boundary_error, Boundary, Disk, ParamGrid, Point, StarCurve};
use crate::newton::{apply_update, assemble_design, first_mode_columns, regularization_parameter, solve_update, UpdateVector};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig<T> {
    pub wave: IncidentWave<T>,
    pub n: usize,
    /// Radial truncation `M`.
    pub m: usize,
    /// Step scaling.
    pub rho: T,
    pub epsilon: T,
    pub max_iterations: usize,
    pub init_center: Point<T>,
    pub init_radius: T,
    pub ball: Disk<T>,
    /// `Some((alpha_1, beta_1))` holds the first radial modes at these values.
    pub frozen_modes: Option<(T, T)>,
}

impl<T: Real> SolverConfig<T> {
    /// Defaults used throughout the examples: `n = 32`, `M = 5`,
    /// `rho = 0.6`, budget 200, first modes held at zero.
    pub fn new(wave: IncidentWave<T>, ball: Disk<T>, init_center: Point<T>, init_radius: T, epsilon: T) -> Self {
        Self {
            wave,
            n: 32,
            m: 5,
            rho: T::lit(0.6),
            epsilon,
            max_iterations: 200,
            init_center,
            init_radius,
            ball,
            frozen_modes: Some((T::zero(), T::zero())),
        }
    }

    pub fn grid(&self) -> Result<ParamGrid> {
        ParamGrid::new(self.n)
    }

    pub fn initial_curve(&self) -> Result<StarCurve<T>> {
        let mut c = StarCurve::circle(self.init_center, self.init_radius, self.m)?;
        if let Some((a1, b1)) = self.frozen_modes {
            c.set_alpha(1, a1);
            c.set_beta(1, b1);
        }
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let grid = self.grid()?;
        if self.m < 1 {
            return Err(Error::invalid("truncation M must be at least 1"));
        }
        if 2 * self.m + 1 >= grid.len() {
            return Err(Error::invalid(format!("M = {} too large for n = {}", self.m, self.n)));
        }
        if !(self.epsilon > T::zero()) {
            return Err(Error::invalid("epsilon must be positive"));
        }
        if self.max_iterations < 1 {
            return Err(Error::invalid("max_iterations must be at least 1"));
        }
        if !(self.rho > T::zero()) || !self.rho.is_finite() {
            return Err(Error::invalid("rho must be positive"));
        }
        if !(self.init_radius > T::zero()) {
            return Err(Error::invalid("initial radius must be positive"));
        }
        let init = self.initial_curve()?;
        init.check_star_like(&grid)?;
        let knots = grid.knots::<T>();
        if knots.iter().any(|&t| self.ball.contains(init.point(t)) || init.contains(self.ball.point(t))) {
            return Err(Error::Geometry("initial curve overlaps the reference ball".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord<T> {
    pub k: usize,
    pub curve: StarCurve<T>,
    /// Relative intensity misfit `E_k`.
    pub error: T,
    /// Boundary error against the exact curve, when known.
    pub boundary_error: Option<T>,
    pub lambda: T,
    /// Field-system condition number at this iterate.
    pub condition: T,
    /// Step taken from this iterate, absent on the last record.
    pub update: Option<UpdateVector<T>>,
    /// Condition of the regularized normal matrix for that step.
    pub update_condition: Option<T>,
}

impl<T: Real> IterationRecord<T> {
    pub fn update_norm(&self) -> Option<T> {
        self.update.as_ref().map(|u| u.norm())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    Budget,
    Degenerate,
    Conditioning,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::Converged => "converged",
            Termination::Budget => "budget",
            Termination::Degenerate => "degenerate",
            Termination::Conditioning => "conditioning",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunHistory<T> {
    pub records: Vec<IterationRecord<T>>,
    pub termination: Termination,
    /// Diagnostic for abnormal terminations.
    pub message: Option<String>,
}

impl<T: Real> RunHistory<T> {
    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }

    pub fn last(&self) -> &IterationRecord<T> {
        self.records.last().expect("history is never empty")
    }

    /// Number of updates taken.
    pub fn iterations(&self) -> usize {
        self.last().k
    }

    pub fn final_curve(&self) -> &StarCurve<T> {
        &self.last().curve
    }
}

/// Runs the iteration on `data` (intensities on the `2n` grid). Solver
/// failures end the run with the matching [`Termination`]; only invalid
/// input is an `Err`.
pub fn reconstruct<T: Real>(
    config: &SolverConfig<T>,
    data: &PhaselessSamples<T>,
    exact: Option<&dyn Boundary<T>>,
) -> Result<RunHistory<T>> {
    config.validate()?;
    let grid = config.grid()?;
    if data.len() != grid.len() {
        return Err(Error::Shape { expected: grid.len(), got: data.len() });
    }
    let kappa = config.wave.wavenumber();
    let frozen: Vec<usize> = if config.frozen_modes.is_some() { first_mode_columns(config.m).to_vec() } else { Vec::new() };
    let mut curve = config.initial_curve()?;
    let mut records: Vec<IterationRecord<T>> = Vec::new();

    let finish = |records: Vec<IterationRecord<T>>, termination, message: Option<String>| {
        if let Some(m) = &message {
            log::info!("reconstruction stopped ({}): {m}", Termination::as_str(&termination));
        }
        Ok(RunHistory { records, termination, message })
    };

    for k in 0.. {
        let solved = assemble_field_system(&curve, Some(&config.ball), &config.wave, &grid).and_then(|sys| solve_densities(&sys));
        let (densities, report) = match solved {
            Ok(v) => v,
            Err(e) => {
                if records.is_empty() {
                    return Err(e);
                }
                let term = match e {
                    Error::Geometry(_) | Error::DegenerateCurve { .. } => Termination::Degenerate,
                    _ => Termination::Conditioning,
                };
                return finish(records, term, Some(e.to_string()));
            }
        };
        let kernels = frechet_kernels(&curve, Some(&config.ball), &densities, &grid, kappa)?;
        let model = kernels.farfield();
        let f: Vec<T> = data.intensities.iter().zip(&model).map(|(d, a)| *d - a.norm_sqr()).collect();
        let error = relative_misfit(&f, &data.intensities)?;
        let lambda = regularization_parameter(&f);
        let er = exact.map(|e| boundary_error(&curve, e, &grid));
        log::debug!("k = {k}: E = {error}, lambda = {lambda}, cond = {}", report.condition);
        let mut record = IterationRecord {
            k,
            curve: curve.clone(),
            error,
            boundary_error: er,
            lambda,
            condition: report.condition,
            update: None,
            update_condition: None,
        };
        if error < config.epsilon {
            records.push(record);
            return finish(records, Termination::Converged, None);
        }
        if k >= config.max_iterations {
            records.push(record);
            return finish(records, Termination::Budget, None);
        }
        let design = assemble_design(&kernels, &f, &grid, config.m)?;
        let step = match solve_update(&design, lambda, config.rho, &frozen) {
            Ok(s) => s,
            Err(e) => {
                records.push(record);
                return finish(records, Termination::Conditioning, Some(e.to_string()));
            }
        };
        record.lambda = step.lambda;
        record.update_condition = Some(step.condition);
        match apply_update(&curve, &step.xi, config.frozen_modes, &grid) {
            Ok(applied) => {
                if applied.halvings > 0 {
                    log::debug!("step halved {} times at k = {k}", applied.halvings);
                }
                record.update = Some(applied.xi);
                curve = applied.curve;
                records.push(record);
            }
            Err(e) => {
                records.push(record);
                return finish(records, Termination::Degenerate, Some(e.to_string()));
            }
        }
    }
    unreachable!("the iteration loop only exits by returning")
}
