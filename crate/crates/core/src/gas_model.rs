//! Dilute monatomic hard-sphere gas: equation of state, transport
//! coefficients and primitive/conserved conversions. CGS units throughout.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Boltzmann constant in erg/K.
pub const BOLTZMANN_CGS: f64 = 1.380649e-16;

/// Argon molecular diameter [cm].
pub const ARGON_DIAMETER: f64 = 3.66e-8;

/// Argon molecular mass [g].
pub const ARGON_MASS: f64 = 6.63e-23;

/// Immutable description of the gas. Derived constants are computed once at
/// construction so they always agree with the base constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasModel {
    diameter: f64,
    mass: f64,
    kb: f64,
    gamma: f64,
    r: f64,
    cv: f64,
}

/// Mass density, velocity and temperature of a fluid element.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PrimitiveState {
    pub rho: f64,
    pub u: f64,
    pub t: f64,
}

/// Mass, momentum and total energy densities.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ConservedState {
    pub rho: f64,
    pub momentum: f64,
    pub energy: f64,
}

impl PrimitiveState {
    pub const fn new(rho: f64, u: f64, t: f64) -> Self {
        Self { rho, u, t }
    }

    pub fn is_physical(&self) -> bool {
        self.rho > 0.0 && self.t > 0.0 && self.u.is_finite() && self.rho.is_finite() && self.t.is_finite()
    }

    /// Componentwise arithmetic mean.
    pub fn midpoint(&self, other: &Self) -> Self {
        Self {
            rho: 0.5 * (self.rho + other.rho),
            u: 0.5 * (self.u + other.u),
            t: 0.5 * (self.t + other.t),
        }
    }
}

impl GasModel {
    pub fn new(diameter: f64, mass: f64, kb: f64, gamma: f64) -> Result<Self> {
        let mut bad = Vec::new();
        if !(diameter > 0.0) {
            bad.push(format!("diameter must be positive, got {diameter}"));
        }
        if !(mass > 0.0) {
            bad.push(format!("mass must be positive, got {mass}"));
        }
        if !(kb > 0.0) {
            bad.push(format!("kb must be positive, got {kb}"));
        }
        if !(gamma > 1.0) {
            bad.push(format!("gamma must exceed 1, got {gamma}"));
        }
        if !bad.is_empty() {
            return Err(Error::Validation(bad));
        }
        let r = kb / mass;
        Ok(Self {
            diameter,
            mass,
            kb,
            gamma,
            r,
            cv: r / (gamma - 1.0),
        })
    }

    /// Monatomic argon with gamma = 5/3.
    pub fn argon() -> Self {
        Self::new(ARGON_DIAMETER, ARGON_MASS, BOLTZMANN_CGS, 5.0 / 3.0).expect("argon constants are valid")
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }
    pub fn mass(&self) -> f64 {
        self.mass
    }
    pub fn kb(&self) -> f64 {
        self.kb
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    /// Specific gas constant kB/M.
    pub fn r(&self) -> f64 {
        self.r
    }
    /// Specific heat at constant volume R/(gamma - 1).
    pub fn cv(&self) -> f64 {
        self.cv
    }

    /// P = rho R T
    #[inline]
    pub fn pressure(&self, state: &PrimitiveState) -> f64 {
        state.rho * self.r * state.t
    }

    /// Hard-sphere viscosity, eta = 5/(16 d^2) sqrt(M kB T / pi).
    #[inline]
    pub fn viscosity(&self, t: f64) -> f64 {
        5.0 / (16.0 * self.diameter * self.diameter) * (self.mass * self.kb * t / PI).sqrt()
    }

    /// kappa = 15 kB eta / (4 M)
    #[inline]
    pub fn thermal_conductivity(&self, eta: f64) -> f64 {
        15.0 * self.kb * eta / (4.0 * self.mass)
    }

    #[inline]
    pub fn sound_speed(&self, t: f64) -> f64 {
        (self.gamma * self.r * t).sqrt()
    }

    pub fn conserved_from_primitive(&self, state: &PrimitiveState) -> ConservedState {
        ConservedState {
            rho: state.rho,
            momentum: state.rho * state.u,
            energy: self.cv * state.rho * state.t + 0.5 * state.rho * state.u * state.u,
        }
    }

    pub fn primitive_from_conserved(&self, c: &ConservedState) -> PrimitiveState {
        let u = c.momentum / c.rho;
        PrimitiveState {
            rho: c.rho,
            u,
            t: (c.energy - 0.5 * c.momentum * u) / (self.cv * c.rho),
        }
    }
}
