//! Stochastic stress and heat flux with fluctuation-dissipation amplitudes.
//!
//! Per particle and sub-step the fluxes are
//!
//! ```text
//! s = c * sqrt(8 kB eta T / (3 dt V_c)) * R1
//! h = c * sqrt(2 kB kappa T^2 / (dt V_c)) * R2
//! ```
//!
//! with `R1`, `R2` independent standard normals and `c` the multi-step
//! correction (sqrt 2 for the two-stage predictor-corrector, whose final
//! averaging halves the variance of independent stage noises).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::gas_model::GasModel;
use crate::particle_field::{Boundary, ParticleField};

/// Deterministic Gaussian source keyed by `(seed, stream_id)`.
///
/// Two streams with the same key produce the same variates in the same
/// order; different stream ids select non-overlapping ChaCha streams.
#[derive(Debug, Clone)]
pub struct NoiseStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl NoiseStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self { seed, stream_id, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    #[inline]
    pub fn gaussian(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }
}

/// Stochastic stress and heat flux at every particle for one sub-step.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FluxNoise {
    pub stress: Vec<f64>,
    pub heat: Vec<f64>,
}

impl FluxNoise {
    pub fn zeros(n: usize) -> Self {
        Self {
            stress: vec![0.0; n],
            heat: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.stress.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stress.is_empty()
    }
}

/// Control volume of particle `i`: cross-section times the centred spacing
/// `(x_{i+1} - x_{i-1}) / 2`. End particles of a fixed-state domain use
/// their single adjacent gap.
pub fn local_cell_volume(field: &ParticleField, i: usize, sigma: f64) -> Result<f64> {
    let n = field.len();
    if n < 2 {
        return Err(Error::DegenerateField("control volume needs two particles".into()));
    }
    let ps = field.particles();
    let spacing = match field.boundary() {
        Boundary::Periodic => {
            let right = field.gap_after(i);
            let left = field.gap_after(if i == 0 { n - 1 } else { i - 1 });
            0.5 * (left + right)
        }
        Boundary::FixedState { .. } => {
            if i == 0 {
                ps[1].x - ps[0].x
            } else if i == n - 1 {
                ps[n - 1].x - ps[n - 2].x
            } else {
                0.5 * (ps[i + 1].x - ps[i - 1].x)
            }
        }
    };
    if !(spacing > 0.0) {
        return Err(Error::DegenerateField(format!(
            "non-positive spacing {spacing:e} around particle {i}"
        )));
    }
    Ok(sigma * spacing)
}

/// Standard deviation of the stochastic stress before correction.
#[inline]
pub fn stress_amplitude(kb: f64, eta: f64, t: f64, dt: f64, volume: f64) -> f64 {
    (8.0 * kb * eta * t / (3.0 * dt * volume)).sqrt()
}

/// Standard deviation of the stochastic heat flux before correction.
#[inline]
pub fn heat_flux_amplitude(kb: f64, kappa: f64, t: f64, dt: f64, volume: f64) -> f64 {
    (2.0 * kb * kappa * t * t / (dt * volume)).sqrt()
}

pub fn sample_stress(
    gas: &GasModel,
    eta: f64,
    t: f64,
    dt: f64,
    volume: f64,
    correction: f64,
    stream: &mut NoiseStream,
) -> f64 {
    correction * stress_amplitude(gas.kb(), eta, t, dt, volume) * stream.gaussian()
}

pub fn sample_heat_flux(
    gas: &GasModel,
    kappa: f64,
    t: f64,
    dt: f64,
    volume: f64,
    correction: f64,
    stream: &mut NoiseStream,
) -> f64 {
    correction * heat_flux_amplitude(gas.kb(), kappa, t, dt, volume) * stream.gaussian()
}

/// `Var((s_m + s_star) / 2) / Var(s_m)`; one half for independent,
/// equal-variance inputs.
pub fn two_step_variance_check(samples_m: &[f64], samples_star: &[f64]) -> f64 {
    let n = samples_m.len().min(samples_star.len());
    let avg: Vec<f64> = samples_m[..n]
        .iter()
        .zip(&samples_star[..n])
        .map(|(a, b)| 0.5 * a + 0.5 * b)
        .collect();
    sample_variance(&avg) / sample_variance(&samples_m[..n])
}

fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n
}

/// Draws stress and heat flux for every particle of `field` at its current
/// state, two variates per particle in index order.
pub fn sample_field_noise(
    field: &ParticleField,
    gas: &GasModel,
    dt: f64,
    sigma: f64,
    correction: f64,
    stream: &mut NoiseStream,
    out: &mut FluxNoise,
) -> Result<()> {
    let n = field.len();
    out.stress.resize(n, 0.0);
    out.heat.resize(n, 0.0);
    for (i, p) in field.particles().iter().enumerate() {
        let volume = local_cell_volume(field, i, sigma)?;
        let t = p.state.t;
        let eta = gas.viscosity(t);
        let kappa = gas.thermal_conductivity(eta);
        out.stress[i] = sample_stress(gas, eta, t, dt, volume, correction, stream);
        out.heat[i] = sample_heat_flux(gas, kappa, t, dt, volume, correction, stream);
    }
    Ok(())
}
