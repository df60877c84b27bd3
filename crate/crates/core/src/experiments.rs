//! Scenario configuration, runners and report output.
//!
//! A configuration is a flat `key = value` text file; `#` starts a comment.
//! Keys not given take the defaults of the scenario's built-in preset.
//!
//! ```text
//! scenario = equilibrium_zero_flow
//! particles = 40
//! dt = 1e-13          # s
//! steps = 1000000     # sampled steps after the warm-up
//! ```

use std::fmt::{self, Write as _};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gas_model::{GasModel, PrimitiveState, ARGON_DIAMETER, ARGON_MASS, BOLTZMANN_CGS};
use crate::maccormack::{Integrator, SchemeConfig, StepDiagnostics};
use crate::particle_field::{Boundary, ParticleField};
use crate::statistics::{
    analytical_time_covariance, density_mode, linear_fit, moving_average, rankine_hugoniot, shock_location,
    time_covariance_with_error, upstream_state, HydroParams, ModeSeries, StatsAccumulator,
};
use crate::stochastic_flux::NoiseStream;

/// Reference variances (density, momentum, energy) of the zero-flow
/// equilibrium at 273 K and 1.78e-3 g/cm^3 with 40 cells.
pub const REFERENCE_ZERO_FLOW: [f64; 3] = [2.35e-8, 13.34, 2.84e10];
/// Same state drifting at half the sound speed.
pub const REFERENCE_NET_FLOW: [f64; 3] = [2.35e-8, 18.91, 3.67e10];

const ARGON_SOUND_SPEED_273: f64 = 30781.0;

pub const PRESET_NAMES: [&str; 5] = [
    "table1-equilibrium",
    "table1-net-flow",
    "table1-covariance",
    "table4-shock-mach2",
    "shock-mach1.4",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    EquilibriumZeroFlow,
    EquilibriumNetFlow,
    TimeCovariance,
    StandingShock,
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::EquilibriumZeroFlow => "equilibrium_zero_flow",
            Scenario::EquilibriumNetFlow => "equilibrium_net_flow",
            Scenario::TimeCovariance => "time_covariance",
            Scenario::StandingShock => "standing_shock",
        }
    }

    fn default_preset(&self) -> &'static str {
        match self {
            Scenario::EquilibriumZeroFlow => "table1-equilibrium",
            Scenario::EquilibriumNetFlow => "table1-net-flow",
            Scenario::TimeCovariance => "table1-covariance",
            Scenario::StandingShock => "table4-shock-mach2",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "equilibrium_zero_flow" => Ok(Scenario::EquilibriumZeroFlow),
            "equilibrium_net_flow" => Ok(Scenario::EquilibriumNetFlow),
            "time_covariance" => Ok(Scenario::TimeCovariance),
            "standing_shock" => Ok(Scenario::StandingShock),
            other => Err(format!("unknown scenario '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    /// Molecular diameter [cm].
    pub diameter: f64,
    /// Molecular mass [g].
    pub mass: f64,
    /// Boltzmann constant [erg/K].
    pub boltzmann: f64,
    pub gamma: f64,
    /// Domain length [cm].
    pub length: f64,
    /// Initial particle count.
    pub particles: usize,
    /// Time step [s].
    pub dt: f64,
    /// Sampled steps (per realization for shocks).
    pub steps: u64,
    /// Warm-up steps before sampling.
    pub skip: u64,
    pub seed: u64,
    /// Cross-section [cm^2].
    pub cross_section: f64,
    /// Reference (upstream for shocks) density [g/cm^3].
    pub density: f64,
    /// Reference (upstream for shocks) temperature [K].
    pub temperature: f64,
    /// Uniform drift of the equilibrium [cm/s].
    pub net_flow_velocity: f64,
    pub mach: Option<f64>,
    pub noise: bool,
    /// Stochastic flux amplitude multiplier.
    pub correction: f64,
    /// Steps between recorded samples of the density mode or shock position.
    pub sample_interval: u64,
    /// Density Fourier mode index.
    pub mode: u32,
    pub lag_points: usize,
    /// Largest covariance lag [s].
    pub lag_max: f64,
    /// Blocks for batch-means standard errors.
    pub batches: usize,
    /// Shock realizations.
    pub ensemble: usize,
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    fn equilibrium_defaults(scenario: Scenario) -> Self {
        let length = 1.25e-4;
        Self {
            scenario,
            diameter: ARGON_DIAMETER,
            mass: ARGON_MASS,
            boltzmann: BOLTZMANN_CGS,
            gamma: 5.0 / 3.0,
            length,
            particles: 40,
            dt: 1e-13,
            steps: 1_000_000,
            skip: 10_000,
            seed: 1,
            cross_section: 1.96e-16 / length,
            density: 1.78e-3,
            temperature: 273.0,
            net_flow_velocity: 0.0,
            mach: None,
            noise: true,
            correction: std::f64::consts::SQRT_2,
            sample_interval: 10,
            mode: 1,
            lag_points: 100,
            lag_max: 2e-9,
            batches: 20,
            ensemble: 100,
            output: None,
        }
    }

    fn shock_defaults(mach: Option<f64>) -> Self {
        let length = 5.0e-4;
        Self {
            length,
            particles: 160,
            steps: 20_000,
            skip: 0,
            cross_section: 7.84e-16 / length,
            mach,
            sample_interval: 200,
            ..Self::equilibrium_defaults(Scenario::StandingShock)
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "table1-equilibrium" => Ok(Self::equilibrium_defaults(Scenario::EquilibriumZeroFlow)),
            "table1-net-flow" => Ok(Self {
                net_flow_velocity: 0.5 * ARGON_SOUND_SPEED_273,
                ..Self::equilibrium_defaults(Scenario::EquilibriumNetFlow)
            }),
            "table1-covariance" => Ok(Self::equilibrium_defaults(Scenario::TimeCovariance)),
            "table4-shock-mach2" => Ok(Self::shock_defaults(Some(2.0))),
            "shock-mach1.4" => Ok(Self::shock_defaults(Some(1.4))),
            other => Err(Error::InvalidConfig(format!(
                "unknown preset '{other}' (known: {})",
                PRESET_NAMES.join(", ")
            ))),
        }
    }

    /// Defaults used for keys missing from a configuration file.
    pub fn defaults_for(scenario: Scenario) -> Self {
        match scenario {
            Scenario::StandingShock => Self::shock_defaults(None),
            s => Self::preset(s.default_preset()).expect("built-in preset"),
        }
    }

    pub fn gas(&self) -> Result<GasModel> {
        GasModel::new(self.diameter, self.mass, self.boltzmann, self.gamma)
    }

    pub fn scheme(&self) -> SchemeConfig {
        SchemeConfig {
            noise_enabled: self.noise,
            correction: self.correction,
            ..SchemeConfig::new(self.dt, self.cross_section)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        let positive = [
            ("diameter", self.diameter),
            ("mass", self.mass),
            ("boltzmann", self.boltzmann),
            ("length", self.length),
            ("dt", self.dt),
            ("cross_section", self.cross_section),
            ("density", self.density),
            ("temperature", self.temperature),
        ];
        for (key, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                bad.push(format!("{key} must be positive, got {v}"));
            }
        }
        if !(self.gamma > 1.0 && self.gamma.is_finite()) {
            bad.push(format!("gamma must exceed 1, got {}", self.gamma));
        }
        if self.particles < 4 {
            bad.push(format!("particles must be at least 4, got {}", self.particles));
        }
        if self.steps == 0 {
            bad.push("steps must be positive".into());
        }
        if self.sample_interval == 0 {
            bad.push("sample_interval must be positive".into());
        }
        if !(self.correction >= 0.0 && self.correction.is_finite()) {
            bad.push(format!("correction must be non-negative, got {}", self.correction));
        }
        if !self.net_flow_velocity.is_finite() {
            bad.push("net_flow_velocity must be finite".into());
        }
        match self.scenario {
            Scenario::EquilibriumZeroFlow => {
                if self.net_flow_velocity != 0.0 {
                    bad.push("equilibrium_zero_flow needs net_flow_velocity = 0".into());
                }
            }
            Scenario::EquilibriumNetFlow => {
                if self.net_flow_velocity == 0.0 {
                    bad.push("equilibrium_net_flow needs a non-zero net_flow_velocity".into());
                }
            }
            Scenario::TimeCovariance => {
                if self.mode == 0 {
                    bad.push("mode must be at least 1".into());
                }
                if self.lag_points < 2 {
                    bad.push("lag_points must be at least 2".into());
                }
                if !(self.lag_max > 0.0) {
                    bad.push("lag_max must be positive".into());
                }
                if self.batches < 2 {
                    bad.push("batches must be at least 2".into());
                }
                let span = (self.steps / self.sample_interval) as f64 * self.sample_interval as f64 * self.dt;
                if self.lag_max > 0.0 && span < 2.0 * self.lag_max * self.batches as f64 {
                    bad.push(format!(
                        "sampled span {span:e} s is too short for lag_max {:e} s over {} batches",
                        self.lag_max, self.batches
                    ));
                }
            }
            Scenario::StandingShock => {
                match self.mach {
                    None => bad.push("standing_shock needs mach".into()),
                    Some(m) if !(m > 1.0 && m.is_finite()) => bad.push(format!("mach must exceed 1, got {m}")),
                    Some(_) => {}
                }
                if self.ensemble < 2 {
                    bad.push("ensemble must be at least 2".into());
                }
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(bad))
        }
    }

    /// Parses configuration text. Unknown or repeated keys and malformed
    /// values are parse errors; the result is validated.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: Vec<(usize, String, String)> = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
                line,
                message: format!("expected 'key = value', got '{content}'"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(Error::Parse {
                    line,
                    message: "missing key".into(),
                });
            }
            if let Some((first, _, _)) = entries.iter().find(|(_, k, _)| k == key) {
                return Err(Error::Parse {
                    line,
                    message: format!("duplicate key '{key}' (first set on line {first})"),
                });
            }
            entries.push((line, key.to_string(), value.to_string()));
        }

        let scenario = match entries.iter().find(|(_, k, _)| k == "scenario") {
            Some((line, _, v)) => v
                .parse::<Scenario>()
                .map_err(|message| Error::Parse { line: *line, message })?,
            None => Scenario::EquilibriumZeroFlow,
        };
        let mut cfg = Self::defaults_for(scenario);
        for (line, key, value) in &entries {
            cfg.set(key, value)
                .map_err(|message| Error::Parse { line: *line, message })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn num<T: FromStr>(key: &str, v: &str) -> std::result::Result<T, String> {
            v.parse::<T>().map_err(|_| format!("invalid value '{v}' for '{key}'"))
        }
        match key {
            "scenario" => {}
            "diameter" => self.diameter = num(key, value)?,
            "mass" => self.mass = num(key, value)?,
            "boltzmann" => self.boltzmann = num(key, value)?,
            "gamma" => self.gamma = num(key, value)?,
            "length" => self.length = num(key, value)?,
            "particles" => self.particles = num(key, value)?,
            "dt" => self.dt = num(key, value)?,
            "steps" => self.steps = num(key, value)?,
            "skip" => self.skip = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "cross_section" => self.cross_section = num(key, value)?,
            "density" => self.density = num(key, value)?,
            "temperature" => self.temperature = num(key, value)?,
            "net_flow_velocity" => self.net_flow_velocity = num(key, value)?,
            "mach" => self.mach = Some(num(key, value)?),
            "noise" => self.noise = num(key, value)?,
            "correction" => self.correction = num(key, value)?,
            "sample_interval" => self.sample_interval = num(key, value)?,
            "mode" => self.mode = num(key, value)?,
            "lag_points" => self.lag_points = num(key, value)?,
            "lag_max" => self.lag_max = num(key, value)?,
            "batches" => self.batches = num(key, value)?,
            "ensemble" => self.ensemble = num(key, value)?,
            "output" => self.output = Some(PathBuf::from(value)),
            other => return Err(format!("unknown key '{other}'")),
        }
        Ok(())
    }
}

impl fmt::Display for ExperimentConfig {
    /// Writes every field in the configuration-file format.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "scenario = {}", self.scenario)?;
        writeln!(f, "diameter = {:?}  # cm", self.diameter)?;
        writeln!(f, "mass = {:?}  # g", self.mass)?;
        writeln!(f, "boltzmann = {:?}  # erg/K", self.boltzmann)?;
        writeln!(f, "gamma = {:?}", self.gamma)?;
        writeln!(f, "length = {:?}  # cm", self.length)?;
        writeln!(f, "particles = {}", self.particles)?;
        writeln!(f, "dt = {:?}  # s", self.dt)?;
        writeln!(f, "steps = {}", self.steps)?;
        writeln!(f, "skip = {}", self.skip)?;
        writeln!(f, "seed = {}", self.seed)?;
        writeln!(f, "cross_section = {:?}  # cm^2", self.cross_section)?;
        writeln!(f, "density = {:?}  # g/cm^3", self.density)?;
        writeln!(f, "temperature = {:?}  # K", self.temperature)?;
        writeln!(f, "net_flow_velocity = {:?}  # cm/s", self.net_flow_velocity)?;
        if let Some(m) = self.mach {
            writeln!(f, "mach = {m:?}")?;
        }
        writeln!(f, "noise = {}", self.noise)?;
        writeln!(f, "correction = {:?}", self.correction)?;
        writeln!(f, "sample_interval = {}  # steps", self.sample_interval)?;
        writeln!(f, "mode = {}", self.mode)?;
        writeln!(f, "lag_points = {}", self.lag_points)?;
        writeln!(f, "lag_max = {:?}  # s", self.lag_max)?;
        writeln!(f, "batches = {}", self.batches)?;
        writeln!(f, "ensemble = {}", self.ensemble)?;
        if let Some(p) = &self.output {
            writeln!(f, "output = {}", p.display())?;
        }
        Ok(())
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    ExperimentConfig::parse(&text)
}

/// Measured value next to its reference.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub quantity: String,
    pub exact: f64,
    pub measured: f64,
}

impl Comparison {
    /// `100 (measured - exact) / exact`.
    pub fn percent_error(&self) -> f64 {
        100.0 * (self.measured - self.exact) / self.exact
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunDiagnostics {
    pub steps: u64,
    pub min_particles: usize,
    pub max_particles: usize,
    pub particles_added: u64,
    pub particles_removed: u64,
    pub max_cfl_advective: f64,
    pub max_cfl_diffusive: f64,
}

impl RunDiagnostics {
    fn new(particles: usize) -> Self {
        Self {
            steps: 0,
            min_particles: particles,
            max_particles: particles,
            particles_added: 0,
            particles_removed: 0,
            max_cfl_advective: 0.0,
            max_cfl_diffusive: 0.0,
        }
    }

    fn record(&mut self, d: &StepDiagnostics, particles: usize) {
        self.steps += 1;
        self.min_particles = self.min_particles.min(particles);
        self.max_particles = self.max_particles.max(particles);
        self.particles_added += d.particles_added as u64;
        self.particles_removed += d.particles_removed as u64;
        self.max_cfl_advective = self.max_cfl_advective.max(d.cfl_advective);
        self.max_cfl_diffusive = self.max_cfl_diffusive.max(d.cfl_diffusive);
    }

    fn merge(&mut self, o: &Self) {
        self.steps += o.steps;
        self.min_particles = self.min_particles.min(o.min_particles);
        self.max_particles = self.max_particles.max(o.max_particles);
        self.particles_added += o.particles_added;
        self.particles_removed += o.particles_removed;
        self.max_cfl_advective = self.max_cfl_advective.max(o.max_cfl_advective);
        self.max_cfl_diffusive = self.max_cfl_diffusive.max(o.max_cfl_diffusive);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub scenario: Scenario,
    pub seed: u64,
    pub comparisons: Vec<Comparison>,
    /// Named scalar results without a reference value.
    pub metrics: Vec<(String, f64)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub diagnostics: RunDiagnostics,
    pub wall_clock_seconds: f64,
}

impl RunReport {
    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }

    pub fn comparison(&self, quantity: &str) -> Option<&Comparison> {
        self.comparisons.iter().find(|c| c.quantity == quantity)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    /// Human-readable summary with a quantity / exact / measured / percent
    /// error table.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "scenario: {}  seed: {}", self.scenario, self.seed);
        if !self.comparisons.is_empty() {
            let _ = writeln!(
                s,
                "{:<14} {:>14} {:>14} {:>10}",
                "quantity", "exact", "measured", "error"
            );
            for c in &self.comparisons {
                let _ = writeln!(
                    s,
                    "{:<14} {:>14.4e} {:>14.4e} {:>9.2}%",
                    c.quantity,
                    c.exact,
                    c.measured,
                    c.percent_error()
                );
            }
        }
        for (k, v) in &self.metrics {
            let _ = writeln!(s, "{k}: {v:.6e}");
        }
        let d = &self.diagnostics;
        let _ = writeln!(
            s,
            "steps: {}  particles: {}..{}  added: {}  removed: {}",
            d.steps, d.min_particles, d.max_particles, d.particles_added, d.particles_removed
        );
        let _ = writeln!(
            s,
            "max stability ratios: advective {:.3e}  diffusive {:.3e}",
            d.max_cfl_advective, d.max_cfl_diffusive
        );
        let _ = writeln!(s, "wall clock: {:.2} s", self.wall_clock_seconds);
        s
    }
}

/// Writes the series as CSV to `path` and the summary next to it with the
/// extension `summary.txt`. Returns the summary path.
pub fn emit_report(report: &RunReport, path: &Path) -> Result<PathBuf> {
    let mut csv = Vec::new();
    report.write_csv(&mut csv)?;
    std::fs::write(path, csv)?;
    let summary_path = path.with_extension("summary.txt");
    std::fs::write(&summary_path, report.summary())?;
    Ok(summary_path)
}

/// Batch means of a scalar series: `(mean, standard error)`.
fn batch_mean(values: &[f64], batches: usize) -> (f64, f64) {
    let per = values.len() / batches;
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    if per == 0 {
        return (mean, f64::NAN);
    }
    let bm: Vec<f64> = values
        .chunks_exact(per)
        .take(batches)
        .map(|c| c.iter().sum::<f64>() / per as f64)
        .collect();
    let m = bm.iter().sum::<f64>() / batches as f64;
    let var = bm.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (batches - 1) as f64;
    (mean, (var / batches as f64).sqrt())
}

fn particle_average(field: &ParticleField, f: impl Fn(&PrimitiveState) -> f64) -> f64 {
    field.particles().iter().map(|p| f(&p.state)).sum::<f64>() / field.len() as f64
}

/// Periodic equilibrium: warm-up, then global variances of density, momentum
/// and energy density over all particles of all sampled steps.
pub fn run_equilibrium(cfg: &ExperimentConfig) -> Result<RunReport> {
    let reference = match cfg.scenario {
        Scenario::EquilibriumZeroFlow => REFERENCE_ZERO_FLOW,
        Scenario::EquilibriumNetFlow => REFERENCE_NET_FLOW,
        other => {
            return Err(Error::InvalidConfig(format!(
                "run_equilibrium cannot run scenario {other}"
            )))
        }
    };
    cfg.validate()?;
    let clock = Instant::now();
    let gas = cfg.gas()?;
    let state = PrimitiveState::new(cfg.density, cfg.net_flow_velocity, cfg.temperature);
    let mut field = ParticleField::init_uniform(0.0, cfg.length, cfg.particles, state, Boundary::Periodic)?;
    let mut integ = Integrator::new(gas, cfg.scheme(), NoiseStream::new(cfg.seed, 0))?;
    let mut diag = RunDiagnostics::new(field.len());
    for _ in 0..cfg.skip {
        let d = integ.step(&mut field)?;
        diag.record(&d, field.len());
    }

    let checkpoints = 10.min(cfg.steps);
    let every = cfg.steps / checkpoints;
    let mut acc = StatsAccumulator::new();
    let mut rows = Vec::new();
    let (mut means_rho, mut means_u, mut means_t) = (Vec::new(), Vec::new(), Vec::new());
    for s in 1..=cfg.steps {
        let d = integ.step(&mut field)?;
        diag.record(&d, field.len());
        acc.accumulate(&field, &gas);
        means_rho.push(particle_average(&field, |p| p.rho));
        means_u.push(particle_average(&field, |p| p.u));
        means_t.push(particle_average(&field, |p| p.t));
        if s % every == 0 || s == cfg.steps {
            if let Ok(v) = acc.variance() {
                rows.push(vec![s as f64, v.rho, v.momentum, v.energy]);
            }
        }
    }
    rows.dedup_by(|a, b| a[0] == b[0]);

    let var = acc.variance()?;
    let comparisons = vec![
        Comparison {
            quantity: "Var(rho)".into(),
            exact: reference[0],
            measured: var.rho,
        },
        Comparison {
            quantity: "Var(J)".into(),
            exact: reference[1],
            measured: var.momentum,
        },
        Comparison {
            quantity: "Var(E)".into(),
            exact: reference[2],
            measured: var.energy,
        },
    ];
    let batches = 20.min(means_rho.len().max(2));
    let mut metrics = Vec::new();
    for (name, series) in [("rho", &means_rho), ("u", &means_u), ("T", &means_t)] {
        let (m, se) = batch_mean(series, batches);
        metrics.push((format!("mean_{name}"), m));
        metrics.push((format!("se_mean_{name}"), se));
    }
    Ok(RunReport {
        scenario: cfg.scenario,
        seed: cfg.seed,
        comparisons,
        metrics,
        columns: ["step", "var_rho", "var_j", "var_e"].map(String::from).to_vec(),
        rows,
        diagnostics: diag,
        wall_clock_seconds: clock.elapsed().as_secs_f64(),
    })
}

/// Lag grid `tau_j = j lag_max / lag_points` rounded to whole sampling
/// intervals, as sample counts.
pub fn lag_grid(cfg: &ExperimentConfig) -> Vec<usize> {
    let interval = cfg.sample_interval as f64 * cfg.dt;
    (0..cfg.lag_points)
        .map(|j| (j as f64 * cfg.lag_max / cfg.lag_points as f64 / interval).round() as usize)
        .collect()
}

/// Density-mode time covariance from one long periodic run next to the
/// hydrodynamic prediction scaled by the measured equal-time variance.
pub fn run_time_covariance(cfg: &ExperimentConfig) -> Result<RunReport> {
    if cfg.scenario != Scenario::TimeCovariance {
        return Err(Error::InvalidConfig(format!(
            "run_time_covariance cannot run scenario {}",
            cfg.scenario
        )));
    }
    cfg.validate()?;
    let clock = Instant::now();
    let gas = cfg.gas()?;
    let state = PrimitiveState::new(cfg.density, cfg.net_flow_velocity, cfg.temperature);
    let mut field = ParticleField::init_uniform(0.0, cfg.length, cfg.particles, state, Boundary::Periodic)?;
    let mut integ = Integrator::new(gas, cfg.scheme(), NoiseStream::new(cfg.seed, 0))?;
    let mut diag = RunDiagnostics::new(field.len());
    for _ in 0..cfg.skip {
        let d = integ.step(&mut field)?;
        diag.record(&d, field.len());
    }
    let interval = cfg.sample_interval as f64 * cfg.dt;
    let mut series = ModeSeries::new(cfg.mode, interval);
    for s in 1..=cfg.steps {
        let d = integ.step(&mut field)?;
        diag.record(&d, field.len());
        if s % cfg.sample_interval == 0 {
            series.push(density_mode(&field, cfg.mode, cfg.length));
        }
    }

    let hydro = HydroParams::from_reference(&gas, cfg.density, cfg.temperature, cfg.length)?;
    let omega = hydro.wavenumber(cfg.mode);
    let (var_r, _) = time_covariance_with_error(&series, 0, cfg.batches)?;
    let mut rows = Vec::with_capacity(cfg.lag_points);
    let mut within = 0;
    for lag in lag_grid(cfg) {
        let (c, se) = time_covariance_with_error(&series, lag, cfg.batches)?;
        let tau = lag as f64 * interval;
        let exact = analytical_time_covariance(&hydro, omega, tau, var_r);
        if (c - exact).abs() <= 4.0 * se {
            within += 1;
        }
        rows.push(vec![tau, c, se, exact]);
    }
    let metrics = vec![
        ("var_r".to_string(), var_r),
        ("fraction_within_4se".to_string(), within as f64 / rows.len() as f64),
    ];
    Ok(RunReport {
        scenario: cfg.scenario,
        seed: cfg.seed,
        comparisons: Vec::new(),
        metrics,
        columns: ["tau", "covariance", "std_error", "analytical"]
            .map(String::from)
            .to_vec(),
        rows,
        diagnostics: diag,
        wall_clock_seconds: clock.elapsed().as_secs_f64(),
    })
}

/// Left and right states of the standing shock.
pub fn shock_states(cfg: &ExperimentConfig) -> Result<(PrimitiveState, PrimitiveState)> {
    let gas = cfg.gas()?;
    let mach = cfg
        .mach
        .ok_or_else(|| Error::Validation(vec!["standing_shock needs mach".into()]))?;
    let right = upstream_state(mach, cfg.density, cfg.temperature, &gas);
    let left = rankine_hugoniot(mach, &right, &gas)?;
    Ok((left, right))
}

/// Field on `(-L/2, L/2)` with the shock at `x = 0`.
pub fn shock_field(cfg: &ExperimentConfig) -> Result<ParticleField> {
    let (left, right) = shock_states(cfg)?;
    let mut field = ParticleField::init_uniform(
        -0.5 * cfg.length,
        cfg.length,
        cfg.particles,
        right,
        Boundary::FixedState { left, right },
    )?;
    for p in field.particles_mut() {
        if p.x < 0.0 {
            p.state = left;
        }
    }
    Ok(field)
}

fn shock_realization(cfg: &ExperimentConfig, index: usize) -> Result<(Vec<f64>, RunDiagnostics)> {
    let (left, right) = shock_states(cfg)?;
    let mut field = shock_field(cfg)?;
    let mut integ = Integrator::new(cfg.gas()?, cfg.scheme(), NoiseStream::new(cfg.seed, index as u64))?;
    let mut diag = RunDiagnostics::new(field.len());
    for _ in 0..cfg.skip {
        let d = integ.step(&mut field)?;
        diag.record(&d, field.len());
    }
    let mut positions = vec![shock_location(&field, left.rho, right.rho)?];
    for s in 1..=cfg.steps {
        let d = integ.step(&mut field)?;
        diag.record(&d, field.len());
        if s % cfg.sample_interval == 0 {
            positions.push(shock_location(&field, left.rho, right.rho)?);
        }
    }
    Ok((positions, diag))
}

/// Ensemble of independent standing-shock realizations; variance of the
/// shock position across the ensemble at every sampled time. Realizations
/// run on the rayon pool and are merged in index order.
pub fn run_shock(cfg: &ExperimentConfig) -> Result<RunReport> {
    if cfg.scenario != Scenario::StandingShock {
        return Err(Error::InvalidConfig(format!(
            "run_shock cannot run scenario {}",
            cfg.scenario
        )));
    }
    cfg.validate()?;
    let clock = Instant::now();
    let runs: Vec<(Vec<f64>, RunDiagnostics)> = (0..cfg.ensemble)
        .into_par_iter()
        .map(|r| shock_realization(cfg, r))
        .collect::<Result<_>>()?;

    let mut diag = RunDiagnostics::new(cfg.particles);
    for (_, d) in &runs {
        diag.merge(d);
    }
    let samples = runs[0].0.len();
    let n = runs.len() as f64;
    let interval = cfg.sample_interval as f64 * cfg.dt;
    let mut times = Vec::with_capacity(samples);
    let mut means = Vec::with_capacity(samples);
    let mut vars = Vec::with_capacity(samples);
    for k in 0..samples {
        // deviations from the first realization keep identical runs at exactly zero
        let base = runs[0].0[k];
        let shift = runs.iter().map(|(p, _)| p[k] - base).sum::<f64>() / n;
        let mean = base + shift;
        let var = runs.iter().map(|(p, _)| (p[k] - base - shift).powi(2)).sum::<f64>() / n;
        times.push(k as f64 * interval);
        means.push(mean);
        vars.push(var);
    }
    let smoothed = moving_average(&vars, 5);
    let monotone = smoothed.windows(2).all(|w| w[1] >= w[0]);
    let fit = linear_fit(&times, &vars)?;
    let (left, right) = shock_states(cfg)?;
    let rows = (0..samples)
        .map(|k| vec![times[k], means[k], vars[k], smoothed[k]])
        .collect();
    let metrics = vec![
        ("slope".to_string(), fit.slope),
        ("intercept".to_string(), fit.intercept),
        ("r_squared".to_string(), fit.r_squared),
        ("monotone_after_smoothing".to_string(), if monotone { 1.0 } else { 0.0 }),
        ("left_rho".to_string(), left.rho),
        ("left_u".to_string(), left.u),
        ("left_t".to_string(), left.t),
        ("right_u".to_string(), right.u),
    ];
    Ok(RunReport {
        scenario: cfg.scenario,
        seed: cfg.seed,
        comparisons: Vec::new(),
        metrics,
        columns: ["time", "mean_sigma", "var_sigma", "smoothed_var_sigma"]
            .map(String::from)
            .to_vec(),
        rows,
        diagnostics: diag,
        wall_clock_seconds: clock.elapsed().as_secs_f64(),
    })
}

/// Dispatches on the configured scenario.
pub fn run(cfg: &ExperimentConfig) -> Result<RunReport> {
    match cfg.scenario {
        Scenario::EquilibriumZeroFlow | Scenario::EquilibriumNetFlow => run_equilibrium(cfg),
        Scenario::TimeCovariance => run_time_covariance(cfg),
        Scenario::StandingShock => run_shock(cfg),
    }
}
