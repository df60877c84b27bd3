//! Meshfree Lagrangian particle solver for the one-dimensional
//! Landau-Lifshitz Navier-Stokes (fluctuating hydrodynamics) equations.
//!
//! The crate is organised bottom-up:
//!
//! - [`gas_model`]: hard-sphere gas constants, equation of state and transport
//!   coefficients.
//! - [`particle_field`]: sorted particle set, neighbor search, boundaries and
//!   particle insertion/merging.
//! - [`wls_derivative`]: weighted least-squares first and second derivatives.
//! - [`stochastic_flux`]: seeded Gaussian streams and stochastic stress/heat
//!   flux sampling.
//! - [`maccormack`]: the predictor-corrector time integrator.
//! - [`statistics`]: variance accumulators, density-mode covariance, shock
//!   position and normal-shock relations.
//! - [`experiments`]: configuration, scenario runners and report output used
//!   by the `llns` binary.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod gas_model;
pub mod maccormack;
pub mod particle_field;
pub mod statistics;
pub mod stochastic_flux;
pub mod wls_derivative;

pub use error::{Error, Result};
pub use gas_model::{ConservedState, GasModel, PrimitiveState};
pub use maccormack::{Integrator, SchemeConfig, StepDiagnostics};
pub use particle_field::{Boundary, ManagementRule, Particle, ParticleField};
pub use stochastic_flux::{FluxNoise, NoiseStream};
