//! Two-stage MacCormack integrator for the Lagrangian 1D fluctuating
//! Navier-Stokes system in primitive variables.
//!
//! Each stage is a forward-Euler update of position, density, velocity and
//! temperature using least-squares derivatives at the stage state:
//!
//! ```text
//! x' = x + dt u
//! rho' = rho - dt rho u_x
//! u' = u + dt/rho (-P_x + 4/3 eta u_xx + 4/3 eta_x u_x + s_x)
//! T' = T + dt/(cv rho) (-P u_x + 4/3 eta u_x^2 + kappa T_xx + kappa_x T_x + s u_x + h_x)
//! ```
//!
//! The predictor maps `q^m` to `q*`, the corrector maps `q*` to `q**`, and
//! the new state is `(q^m + q**) / 2`. Boundary handling and particle
//! management run once per full step, after averaging.

use crate::error::{Error, Result};
use crate::gas_model::GasModel;
use crate::particle_field::{ManagementRule, NeighborTable, ParticleField};
use crate::stochastic_flux::{sample_field_noise, FluxNoise, NoiseStream};
use crate::wls_derivative::{stencil_coefficients, WlsConfig, DEFAULT_ALPHA};

/// Advective stability bound.
pub const ADVECTIVE_LIMIT: f64 = 1.0;
/// Diffusive stability bound.
pub const DIFFUSIVE_LIMIT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    /// Time step [s].
    pub dt: f64,
    pub noise_enabled: bool,
    /// Multiplier on the stochastic flux amplitudes.
    pub correction: f64,
    pub stability_enforce: bool,
    /// Cross-section of the 1D system [cm^2].
    pub sigma: f64,
    /// Least-squares weight sharpness.
    pub alpha: f64,
    pub management: ManagementRule,
}

impl SchemeConfig {
    pub fn new(dt: f64, sigma: f64) -> Self {
        Self {
            dt,
            noise_enabled: true,
            correction: std::f64::consts::SQRT_2,
            stability_enforce: false,
            sigma,
            alpha: DEFAULT_ALPHA,
            management: ManagementRule::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if !(self.dt > 0.0) {
            bad.push(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.sigma > 0.0) {
            bad.push(format!("sigma must be positive, got {}", self.sigma));
        }
        if !(self.alpha > 0.0) {
            bad.push(format!("alpha must be positive, got {}", self.alpha));
        }
        if !(self.correction >= 0.0) {
            bad.push(format!("correction must be non-negative, got {}", self.correction));
        }
        if !(self.management.gap_min > 0.0 && self.management.gap_max > 2.0 * self.management.gap_min) {
            bad.push("management thresholds need 0 < 2 gap_min < gap_max".into());
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(bad))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepDiagnostics {
    pub cfl_advective: f64,
    pub cfl_diffusive: f64,
    pub particles_added: usize,
    pub particles_removed: usize,
}

/// Scratch buffers reused across stages.
#[derive(Debug, Default)]
pub struct Workspace {
    table: NeighborTable,
    c1: Vec<f64>,
    c2: Vec<f64>,
    u: Vec<f64>,
    t: Vec<f64>,
    p: Vec<f64>,
    eta: Vec<f64>,
    kappa: Vec<f64>,
    s: Vec<f64>,
    h: Vec<f64>,
}

/// One forward-Euler stage with the given stochastic fluxes.
pub fn substep(field: &ParticleField, gas: &GasModel, cfg: &SchemeConfig, noise: &FluxNoise) -> Result<ParticleField> {
    let mut ws = Workspace::default();
    let mut out = field.clone();
    substep_into(field, gas, cfg, noise, &mut ws, &mut out)?;
    Ok(out)
}

/// Stage update writing into `out`, which must have the same particle count
/// as `field`.
pub fn substep_into(
    field: &ParticleField,
    gas: &GasModel,
    cfg: &SchemeConfig,
    noise: &FluxNoise,
    ws: &mut Workspace,
    out: &mut ParticleField,
) -> Result<()> {
    ws.table = field.neighbor_table()?;
    stage(field, gas, cfg, noise, ws, out)
}

/// Stage update using the neighbor table already in `ws`.
fn stage(
    field: &ParticleField,
    gas: &GasModel,
    cfg: &SchemeConfig,
    noise: &FluxNoise,
    ws: &mut Workspace,
    out: &mut ParticleField,
) -> Result<()> {
    let n = field.len();
    if noise.len() != n || out.len() != n {
        return Err(Error::MismatchedFields {
            left: n,
            right: if noise.len() != n { noise.len() } else { out.len() },
        });
    }
    let wls = WlsConfig::new(cfg.alpha, field.h())?;
    let m = ws.table.index.len();
    ws.c1.resize(m, 0.0);
    ws.c2.resize(m, 0.0);
    for i in 0..n {
        let r = ws.table.range(i);
        stencil_coefficients(&ws.table.offset[r.clone()], &wls, &mut ws.c1[r.clone()], &mut ws.c2[r]).map_err(|e| {
            match e {
                Error::InsufficientNeighborhood { found, .. } => Error::InsufficientNeighborhood {
                    x: field.particles()[i].x,
                    found,
                },
                other => other,
            }
        })?;
    }

    // per-particle values followed by ghost values
    let ghosts = field.ghosts();
    let total = n + ghosts.len();
    for v in [
        &mut ws.u,
        &mut ws.t,
        &mut ws.p,
        &mut ws.eta,
        &mut ws.kappa,
        &mut ws.s,
        &mut ws.h,
    ] {
        v.clear();
        v.reserve(total);
    }
    for (k, part) in field.particles().iter().chain(ghosts.iter()).enumerate() {
        let st = &part.state;
        let eta = gas.viscosity(st.t);
        ws.u.push(st.u);
        ws.t.push(st.t);
        ws.p.push(gas.pressure(st));
        ws.eta.push(eta);
        ws.kappa.push(gas.thermal_conductivity(eta));
        let (s, h) = if k < n {
            (noise.stress[k], noise.heat[k])
        } else {
            (0.0, 0.0)
        };
        ws.s.push(s);
        ws.h.push(h);
    }

    let dt = cfg.dt;
    let cv = gas.cv();
    const FOUR_THIRDS: f64 = 4.0 / 3.0;
    let src = field.particles();
    let dst = out.particles_mut();
    for i in 0..n {
        let (mut ux, mut uxx, mut px, mut etax) = (0.0, 0.0, 0.0, 0.0);
        let (mut tx, mut txx, mut kx, mut sx, mut hx) = (0.0, 0.0, 0.0, 0.0, 0.0);
        let (ui, ti, pi, etai, ki, si, hi) = (ws.u[i], ws.t[i], ws.p[i], ws.eta[i], ws.kappa[i], ws.s[i], ws.h[i]);
        for k in ws.table.range(i) {
            let j = ws.table.index[k];
            let (a, b) = (ws.c1[k], ws.c2[k]);
            let du = ws.u[j] - ui;
            let dtemp = ws.t[j] - ti;
            ux += a * du;
            uxx += b * du;
            tx += a * dtemp;
            txx += b * dtemp;
            px += a * (ws.p[j] - pi);
            etax += a * (ws.eta[j] - etai);
            kx += a * (ws.kappa[j] - ki);
            sx += a * (ws.s[j] - si);
            hx += a * (ws.h[j] - hi);
        }
        let rho = src[i].state.rho;
        let new_x = src[i].x + dt * ui;
        let new_rho = rho - dt * rho * ux;
        let new_u = ui + dt / rho * (-px + FOUR_THIRDS * etai * uxx + FOUR_THIRDS * etax * ux + sx);
        let new_t =
            ti + dt / (cv * rho) * (-pi * ux + FOUR_THIRDS * etai * ux * ux + ki * txx + kx * tx + si * ux + hx);
        if !(new_rho > 0.0)
            || !(new_t > 0.0)
            || !new_u.is_finite()
            || !new_x.is_finite()
            || !new_rho.is_finite()
            || !new_t.is_finite()
        {
            return Err(Error::StateBlowup {
                step: 0,
                particle: i,
                detail: format!("rho = {new_rho:e}, u = {new_u:e}, T = {new_t:e}"),
            });
        }
        let d = &mut dst[i];
        d.x = new_x;
        d.state.rho = new_rho;
        d.state.u = new_u;
        d.state.t = new_t;
    }
    Ok(())
}

/// Componentwise mean of the start-of-step and twice-advanced fields.
pub fn average_final(field_m: &ParticleField, field_ss: &ParticleField) -> Result<ParticleField> {
    let mut out = field_m.clone();
    average_into(field_m, field_ss, &mut out)?;
    Ok(out)
}

fn average_into(field_m: &ParticleField, field_ss: &ParticleField, out: &mut ParticleField) -> Result<()> {
    if field_m.len() != field_ss.len() || out.len() != field_m.len() {
        return Err(Error::MismatchedFields {
            left: field_m.len(),
            right: field_ss.len(),
        });
    }
    for ((o, a), b) in out
        .particles_mut()
        .iter_mut()
        .zip(field_m.particles())
        .zip(field_ss.particles())
    {
        o.x = 0.5 * (a.x + b.x);
        o.state = a.state.midpoint(&b.state);
    }
    Ok(())
}

/// Advective and diffusive stability ratios, using the largest local
/// values over particles and the smallest particle spacing.
pub fn check_stability(field: &ParticleField, gas: &GasModel, cfg: &SchemeConfig) -> (f64, f64) {
    let dx = field.min_spacing();
    let (mut speed, mut diffusivity) = (0.0f64, 0.0f64);
    for p in field.particles() {
        let st = &p.state;
        speed = speed.max(st.u.abs() + gas.sound_speed(st.t));
        let eta = gas.viscosity(st.t);
        let kappa = gas.thermal_conductivity(eta);
        let dv = 4.0 / 3.0 * eta / st.rho;
        let dtherm = kappa / (st.rho * gas.cv());
        diffusivity = diffusivity.max(dv.max(dtherm));
    }
    (speed * cfg.dt / dx, diffusivity * cfg.dt / (dx * dx))
}

/// Stateful driver owning the noise stream and scratch buffers.
#[derive(Debug)]
pub struct Integrator {
    gas: GasModel,
    cfg: SchemeConfig,
    stream: NoiseStream,
    steps: u64,
    ws: Workspace,
    noise: FluxNoise,
    star: Option<ParticleField>,
    star2: Option<ParticleField>,
}

impl Integrator {
    pub fn new(gas: GasModel, cfg: SchemeConfig, stream: NoiseStream) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            gas,
            cfg,
            stream,
            steps: 0,
            ws: Workspace::default(),
            noise: FluxNoise::default(),
            star: None,
            star2: None,
        })
    }

    pub fn gas(&self) -> &GasModel {
        &self.gas
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.cfg
    }

    pub fn steps_taken(&self) -> u64 {
        self.steps
    }

    /// Builds the neighbor table of `field` and draws the stage noise.
    fn prepare_stage(&mut self, field: &ParticleField) -> Result<()> {
        self.ws.table = field.neighbor_table()?;
        if self.cfg.noise_enabled {
            sample_field_noise(
                field,
                &self.gas,
                self.cfg.dt,
                self.cfg.sigma,
                self.cfg.correction,
                &mut self.stream,
                &mut self.noise,
            )
        } else {
            self.noise.stress.clear();
            self.noise.stress.resize(field.len(), 0.0);
            self.noise.heat.clear();
            self.noise.heat.resize(field.len(), 0.0);
            Ok(())
        }
    }

    fn run_stage(&mut self, field: &ParticleField, out: &mut ParticleField) -> Result<()> {
        let mut ws = std::mem::take(&mut self.ws);
        let r = stage(field, &self.gas, &self.cfg, &self.noise, &mut ws, out);
        self.ws = ws;
        r
    }

    /// Advances `field` by one full predictor-corrector step in place.
    pub fn step(&mut self, field: &mut ParticleField) -> Result<StepDiagnostics> {
        let step_index = self.steps;
        let tag = |e: Error| match e {
            Error::StateBlowup { particle, detail, .. } => Error::StateBlowup {
                step: step_index,
                particle,
                detail,
            },
            other => other,
        };

        let mut star = self
            .star
            .take()
            .filter(|s| s.len() == field.len())
            .unwrap_or_else(|| field.clone());
        let mut star2 = self
            .star2
            .take()
            .filter(|s| s.len() == field.len())
            .unwrap_or_else(|| field.clone());

        self.prepare_stage(field)?;
        self.run_stage(field, &mut star).map_err(tag)?;
        self.prepare_stage(&star)?;
        self.run_stage(&star, &mut star2).map_err(tag)?;
        average_into(field, &star2, &mut star)?;
        std::mem::swap(field, &mut star);

        let (added_b, removed_b) = field.apply_boundary();
        let (added_m, removed_m) = field.manage_particles(&self.cfg.management)?;
        let (adv, diff) = check_stability(field, &self.gas, &self.cfg);
        self.steps += 1;
        self.star = Some(star);
        self.star2 = Some(star2);
        if self.cfg.stability_enforce && (adv > ADVECTIVE_LIMIT || diff > DIFFUSIVE_LIMIT) {
            return Err(Error::StabilityViolation {
                advective: adv,
                diffusive: diff,
            });
        }
        Ok(StepDiagnostics {
            cfl_advective: adv,
            cfl_diffusive: diff,
            particles_added: added_b + added_m,
            particles_removed: removed_b + removed_m,
        })
    }
}

/// Single full step with a caller-supplied stream.
pub fn step(
    field: &ParticleField,
    gas: &GasModel,
    cfg: &SchemeConfig,
    stream: NoiseStream,
) -> Result<(ParticleField, StepDiagnostics)> {
    let mut integ = Integrator::new(*gas, *cfg, stream)?;
    let mut next = field.clone();
    let diag = integ.step(&mut next)?;
    Ok((next, diag))
}
