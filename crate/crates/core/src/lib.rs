//! Reconstruction of a two-dimensional sound-soft obstacle from phaseless
//! far-field data of a single incident plane wave.
//!
//! A known sound-soft disk (the reference ball) is added to the scene. Its
//! interaction with the unknown obstacle breaks the translation invariance of
//! the far-field modulus, so both the location and the shape of the obstacle
//! can be recovered by a regularized Newton iteration on a star-like boundary
//! parameterization.
//!
//! The pipeline:
//!
//! * [`forward`] synthesizes far-field data with a combined double- and
//!   single-layer potential Nyström solver, independent of the inversion's
//!   single-layer model, and checks it against the separation-of-variables
//!   series for disks.
//! * [`field_system`] solves the coupled single-layer field equations for the
//!   densities on the current boundary iterate and the reference ball.
//! * [`farfield`] evaluates far-field operators, the boundary derivative
//!   kernels and the intensity misfit.
//! * [`newton`] assembles and solves the Tikhonov-regularized linearized
//!   intensity equation for the boundary update.
//! * [`inversion`] alternates the two until the relative misfit drops below
//!   the tolerance.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`); the `*F64`
//! aliases below fix the usual double-precision instantiation.

// `!(x > 0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod artifacts;
pub mod error;
pub mod farfield;
pub mod field_system;
pub mod forward;
pub mod geometry;
pub mod inversion;
pub mod linalg;
pub mod newton;
pub mod presets;
pub mod scalar;
pub mod specfun;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Complex<T> = num_complex::Complex<T>;

pub type PointF64 = geometry::Point<f64>;
pub type StarCurveF64 = geometry::StarCurve<f64>;
pub type DiskF64 = geometry::Disk<f64>;
pub type ExactCurveF64 = geometry::ExactCurve<f64>;
pub type ParamGridF64 = geometry::ParamGrid;
pub type IncidentWaveF64 = forward::IncidentWave<f64>;
pub type FarFieldSamplesF64 = forward::FarFieldSamples<f64>;
pub type PhaselessSamplesF64 = forward::PhaselessSamples<f64>;
pub type DensityPairF64 = field_system::DensityPair<f64>;
pub type FieldSystemMatrixF64 = field_system::FieldSystemMatrix<f64>;
pub type FrechetKernelsF64 = farfield::FrechetKernels<f64>;
pub type UpdateVectorF64 = newton::UpdateVector<f64>;
pub type DesignMatrixF64 = newton::DesignMatrix<f64>;
pub type SolverConfigF64 = inversion::SolverConfig<f64>;
pub type IterationRecordF64 = inversion::IterationRecord<f64>;
pub type RunHistoryF64 = inversion::RunHistory<f64>;
pub type ExperimentF64 = presets::Experiment<f64>;
