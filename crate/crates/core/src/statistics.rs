//! Equilibrium and shock statistics: global variances of the conserved
//! densities, the density Fourier mode and its time covariance (measured
//! and hydrodynamic prediction), shock position and normal-shock states.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::gas_model::{GasModel, PrimitiveState};
use crate::particle_field::{Boundary, ParticleField};

/// Neumaier compensated sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }

    pub fn merge(&mut self, other: &Self) {
        self.add(other.sum);
        self.add(other.comp);
    }
}

/// Per-quantity triple for density, momentum and energy.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Conserved3 {
    pub rho: f64,
    pub momentum: f64,
    pub energy: f64,
}

/// Streaming sums over all particles of all samples. Values are summed
/// relative to the first value seen, so constant input has exactly zero
/// variance.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StatsAccumulator {
    count: u64,
    n_samples: u64,
    shift: [f64; 3],
    sum: [CompensatedSum; 3],
    sum_sq: [CompensatedSum; 3],
}

impl StatsAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of particle values seen.
    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn n_samples(&self) -> u64 {
        self.n_samples
    }

    #[inline]
    pub fn push(&mut self, values: [f64; 3]) {
        if self.count == 0 {
            self.shift = values;
        }
        for (k, v) in values.into_iter().enumerate() {
            let d = v - self.shift[k];
            self.sum[k].add(d);
            self.sum_sq[k].add(d * d);
        }
        self.count += 1;
    }

    /// Adds every particle's density, momentum and energy density.
    pub fn accumulate(&mut self, field: &ParticleField, gas: &GasModel) {
        if field.is_empty() {
            return;
        }
        for p in field.particles() {
            let c = gas.conserved_from_primitive(&p.state);
            self.push([c.rho, c.momentum, c.energy]);
        }
        self.n_samples += 1;
    }

    pub fn merge(&mut self, other: &Self) {
        if other.count == 0 {
            self.n_samples += other.n_samples;
            return;
        }
        if self.count == 0 {
            let n_samples = self.n_samples + other.n_samples;
            *self = other.clone();
            self.n_samples = n_samples;
            return;
        }
        let n = other.count as f64;
        for k in 0..3 {
            // re-centre the other sums on this accumulator's shift
            let delta = other.shift[k] - self.shift[k];
            let s1 = other.sum[k].value();
            self.sum[k].add(s1);
            self.sum[k].add(n * delta);
            self.sum_sq[k].merge(&other.sum_sq[k]);
            self.sum_sq[k].add(2.0 * delta * s1);
            self.sum_sq[k].add(n * delta * delta);
        }
        self.count += other.count;
        self.n_samples += other.n_samples;
    }

    pub fn mean(&self) -> Result<Conserved3> {
        if self.count == 0 {
            return Err(Error::InsufficientData("no samples accumulated".into()));
        }
        let n = self.count as f64;
        let m = |k: usize| self.shift[k] + self.sum[k].value() / n;
        Ok(Conserved3 {
            rho: m(0),
            momentum: m(1),
            energy: m(2),
        })
    }

    /// Population variance `E(q^2) - E(q)^2` of each quantity.
    pub fn variance(&self) -> Result<Conserved3> {
        if self.count < 2 {
            return Err(Error::InsufficientData(format!(
                "variance needs at least 2 values, have {}",
                self.count
            )));
        }
        let n = self.count as f64;
        let var = |k: usize| {
            let m = self.sum[k].value() / n;
            (self.sum_sq[k].value() / n - m * m).max(0.0)
        };
        Ok(Conserved3 {
            rho: var(0),
            momentum: var(1),
            energy: var(2),
        })
    }
}

/// `R = (1/M) sum rho_i sin(2 pi n (x_i - x_min) / L)` over the current
/// particles.
pub fn density_mode(field: &ParticleField, n: u32, length: f64) -> f64 {
    if field.is_empty() {
        return 0.0;
    }
    let k = 2.0 * PI * n as f64 / length;
    let x0 = field.x_min();
    let s: f64 = field
        .particles()
        .iter()
        .map(|p| p.state.rho * (k * (p.x - x0)).sin())
        .sum();
    s / field.len() as f64
}

/// Density-mode values recorded at a fixed sampling interval.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSeries {
    pub n: u32,
    pub interval: f64,
    pub values: Vec<f64>,
}

impl ModeSeries {
    pub fn new(n: u32, interval: f64) -> Self {
        Self {
            n,
            interval,
            values: Vec::new(),
        }
    }

    pub fn push(&mut self, r: f64) {
        self.values.push(r);
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.values.len()).map(|k| k as f64 * self.interval).collect()
    }
}

/// Mean of lagged products `R(t) R(t + lag)` over all admissible origins.
pub fn time_covariance(series: &ModeSeries, lag: usize) -> Result<f64> {
    let v = &series.values;
    if v.len() <= lag {
        return Err(Error::InsufficientData(format!(
            "series of length {} too short for lag {lag}",
            v.len()
        )));
    }
    let m = v.len() - lag;
    Ok(v[..m].iter().zip(&v[lag..]).map(|(a, b)| a * b).sum::<f64>() / m as f64)
}

/// Time covariance with a batch-means standard error. The origins are
/// split into `batches` contiguous blocks; the error is the standard
/// deviation of the block estimates over `sqrt(batches)`.
pub fn time_covariance_with_error(series: &ModeSeries, lag: usize, batches: usize) -> Result<(f64, f64)> {
    let v = &series.values;
    if batches < 2 || v.len() <= lag + batches {
        return Err(Error::InsufficientData(format!(
            "series of length {} too short for lag {lag} with {batches} batches",
            v.len()
        )));
    }
    let m = v.len() - lag;
    let est = time_covariance(series, lag)?;
    let per = m / batches;
    let means: Vec<f64> = (0..batches)
        .map(|b| {
            let lo = b * per;
            let hi = lo + per;
            v[lo..hi]
                .iter()
                .zip(&v[lo + lag..hi + lag])
                .map(|(a, c)| a * c)
                .sum::<f64>()
                / per as f64
        })
        .collect();
    let mb = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|x| (x - mb) * (x - mb)).sum::<f64>() / (batches - 1) as f64;
    Ok((est, (var / batches as f64).sqrt()))
}

/// Linearised hydrodynamic coefficients about a reference state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HydroParams {
    pub gamma: f64,
    pub sound_speed: f64,
    /// Thermal diffusivity kappa / (rho cv).
    pub d_thermal: f64,
    /// Longitudinal kinematic viscosity (4/3) eta / rho.
    pub d_viscous: f64,
    /// Sound attenuation (D_v + (gamma - 1) D_T) / 2.
    pub attenuation: f64,
    pub length: f64,
}

impl HydroParams {
    pub fn from_reference(gas: &GasModel, rho: f64, t: f64, length: f64) -> Result<Self> {
        if !(rho > 0.0 && t > 0.0 && length > 0.0) {
            return Err(Error::InvalidConfig(
                "reference density, temperature and length must be positive".into(),
            ));
        }
        let eta = gas.viscosity(t);
        let kappa = gas.thermal_conductivity(eta);
        let d_thermal = kappa / (rho * gas.cv());
        let d_viscous = 4.0 / 3.0 * eta / rho;
        Ok(Self {
            gamma: gas.gamma(),
            sound_speed: gas.sound_speed(t),
            d_thermal,
            d_viscous,
            attenuation: 0.5 * (d_viscous + (gas.gamma() - 1.0) * d_thermal),
            length,
        })
    }

    /// Wavenumber `2 pi n / L`.
    pub fn wavenumber(&self, n: u32) -> f64 {
        2.0 * PI * n as f64 / self.length
    }
}

/// Predicted density-mode time covariance at lag `tau`, scaled by the
/// equal-time variance `var_r`.
pub fn analytical_time_covariance(p: &HydroParams, omega: f64, tau: f64, var_r: f64) -> f64 {
    let g = p.gamma;
    let w2 = omega * omega;
    let sound = p.sound_speed * omega * tau;
    let damp = (-w2 * p.attenuation * tau).exp();
    let thermal = (1.0 - 1.0 / g) * (-w2 * p.d_thermal * tau).exp();
    let acoustic = damp * sound.cos() / g;
    let skew = (3.0 * p.attenuation - p.d_viscous) / (g * g * p.sound_speed) * omega * damp * sound.sin();
    (thermal + acoustic + skew) * var_r
}

/// Arithmetic mean of particle densities.
pub fn mean_density(field: &ParticleField) -> f64 {
    field.particles().iter().map(|p| p.state.rho).sum::<f64>() / field.len() as f64
}

/// Domain average of the density, `(1/L) sum rho_i w_i`, where `w_i` is the
/// width of the interval closer to particle `i` than to any other. On a
/// fixed-state domain the end intervals extend to the walls.
pub fn integrated_mean_density(field: &ParticleField) -> f64 {
    let n = field.len();
    if n == 0 {
        return 0.0;
    }
    if n == 1 {
        return field.particles()[0].state.rho;
    }
    let ps = field.particles();
    let total: f64 = (0..n)
        .map(|i| {
            let width = match field.boundary() {
                Boundary::Periodic => {
                    let left = field.gap_after(if i == 0 { n - 1 } else { i - 1 });
                    0.5 * (left + field.gap_after(i))
                }
                Boundary::FixedState { .. } => {
                    let lo = if i == 0 {
                        field.x_min()
                    } else {
                        0.5 * (ps[i - 1].x + ps[i].x)
                    };
                    let hi = if i == n - 1 {
                        field.x_max()
                    } else {
                        0.5 * (ps[i].x + ps[i + 1].x)
                    };
                    hi - lo
                }
            };
            ps[i].state.rho * width
        })
        .sum();
    total / field.length()
}

/// Shock position relative to the domain centre, from the domain-averaged
/// density.
pub fn shock_location(field: &ParticleField, rho_l: f64, rho_r: f64) -> Result<f64> {
    shock_location_from_mean(integrated_mean_density(field), rho_l, rho_r, field.length())
}

pub fn shock_location_from_mean(rho_bar: f64, rho_l: f64, rho_r: f64, length: f64) -> Result<f64> {
    if rho_l == rho_r {
        return Err(Error::DegenerateShock);
    }
    Ok(length * (rho_bar - 0.5 * (rho_l + rho_r)) / (rho_l - rho_r))
}

/// Upstream state of a standing shock moving into the negative direction:
/// `u = -mach * c_s(T)`.
pub fn upstream_state(mach: f64, rho: f64, t: f64, gas: &GasModel) -> PrimitiveState {
    PrimitiveState::new(rho, -mach * gas.sound_speed(t), t)
}

/// Downstream (left) state of a standing normal shock whose upstream (right)
/// state has density `right.rho` and temperature `right.t`. The upstream
/// velocity is taken as `-mach * c_s(T_R)`; `right.u` is not used.
pub fn rankine_hugoniot(mach: f64, right: &PrimitiveState, gas: &GasModel) -> Result<PrimitiveState> {
    if !(mach > 1.0) {
        return Err(Error::InvalidMach(mach));
    }
    let g = gas.gamma();
    let m2 = mach * mach;
    let density_ratio = (g + 1.0) * m2 / ((g - 1.0) * m2 + 2.0);
    let temperature_ratio = (2.0 * g * m2 - (g - 1.0)) * ((g - 1.0) * m2 + 2.0) / ((g + 1.0) * (g + 1.0) * m2);
    let u_r = -mach * gas.sound_speed(right.t);
    Ok(PrimitiveState::new(
        right.rho * density_ratio,
        u_r / density_ratio,
        right.t * temperature_ratio,
    ))
}

/// Least-squares line `y = slope x + intercept` with coefficient of
/// determination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return Err(Error::InsufficientData("linear fit needs two points".into()));
    }
    let nf = n as f64;
    let mx = xs[..n].iter().sum::<f64>() / nf;
    let my = ys[..n].iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs[..n].iter().zip(&ys[..n]) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 {
        return Err(Error::InsufficientData("linear fit needs distinct abscissae".into()));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(LinearFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}

/// Centred moving average; the window shrinks at the ends.
pub fn moving_average(ys: &[f64], window: usize) -> Vec<f64> {
    let half = window / 2;
    (0..ys.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(ys.len());
            ys[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::particle_field::{Boundary, Particle};
    use crate::stochastic_flux::NoiseStream;
    use approx::assert_relative_eq;

    fn gas() -> GasModel {
        GasModel::argon()
    }

    #[test]
    fn empty_and_constant_accumulation() {
        let g = gas();
        let mut acc = StatsAccumulator::new();
        assert!(acc.variance().is_err());
        let f = ParticleField::init_uniform(
            0.0,
            1.0,
            8,
            PrimitiveState::new(1.78e-3, 100.0, 273.0),
            Boundary::Periodic,
        )
        .unwrap();
        acc.accumulate(&f, &g);
        acc.accumulate(&f, &g);
        assert_eq!(acc.count(), 16);
        assert_eq!(acc.n_samples(), 2);
        let v = acc.variance().unwrap();
        let m = acc.mean().unwrap();
        assert_eq!(v, Conserved3::default());
        assert_eq!(m.rho, 1.78e-3);
        assert_relative_eq!(m.momentum, 0.178, max_relative = 1e-15);
    }

    #[test]
    fn iid_variance_within_sampling_error() {
        let mut st = NoiseStream::new(3, 0);
        let mut acc = StatsAccumulator::new();
        let sigma = 2.5;
        for _ in 0..200_000 {
            let v = 10.0 + sigma * st.gaussian();
            acc.push([v, -v, 3.0 * v]);
        }
        let var = acc.variance().unwrap();
        let s2 = sigma * sigma;
        let band = 4.0 * s2 * (2.0 / acc.count() as f64).sqrt();
        assert!((var.rho - s2).abs() < band, "{}", var.rho);
        assert!((var.momentum - s2).abs() < band);
        assert!((var.energy - 9.0 * s2).abs() < 9.0 * band);
    }

    #[test]
    fn matches_two_pass_variance() {
        let mut st = NoiseStream::new(4, 0);
        let xs: Vec<f64> = (0..10_000).map(|_| 1.78e-3 * (1.0 + 0.08 * st.gaussian())).collect();
        let es: Vec<f64> = (0..10_000).map(|_| 1.5e6 + 1.7e5 * st.gaussian()).collect();
        let mut acc = StatsAccumulator::new();
        for (x, e) in xs.iter().zip(&es) {
            acc.push([*x, 0.0, *e]);
        }
        let two_pass = |v: &[f64]| {
            let m = v.iter().sum::<f64>() / v.len() as f64;
            v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64
        };
        let var = acc.variance().unwrap();
        assert_relative_eq!(var.rho, two_pass(&xs), max_relative = 1e-10);
        assert_relative_eq!(var.energy, two_pass(&es), max_relative = 1e-10);
    }

    #[test]
    fn merge_equals_sequential() {
        let mut st = NoiseStream::new(8, 0);
        let vals: Vec<[f64; 3]> = (0..1000)
            .map(|_| [st.gaussian(), st.gaussian(), st.gaussian()])
            .collect();
        let mut all = StatsAccumulator::new();
        let mut a = StatsAccumulator::new();
        let mut b = StatsAccumulator::new();
        for (k, v) in vals.iter().enumerate() {
            all.push(*v);
            if k % 2 == 0 {
                a.push(*v)
            } else {
                b.push(*v)
            }
        }
        let mut ab = a.clone();
        ab.merge(&b);
        let mut ba = b.clone();
        ba.merge(&a);
        let (v1, v2, v3) = (all.variance().unwrap(), ab.variance().unwrap(), ba.variance().unwrap());
        assert_relative_eq!(v1.rho, v2.rho, max_relative = 1e-13);
        assert_relative_eq!(v2.energy, v3.energy, max_relative = 1e-13);
    }

    #[test]
    fn density_mode_cases() {
        let s = PrimitiveState::new(1.78e-3, 0.0, 273.0);
        let f = ParticleField::init_uniform(0.0, 1.25e-4, 40, s, Boundary::Periodic).unwrap();
        assert!(density_mode(&f, 1, 1.25e-4).abs() < 1e-12 * 1.78e-3);

        let n = 400;
        let l = 2.0;
        let mut f = ParticleField::init_uniform(0.0, l, n, s, Boundary::Periodic).unwrap();
        for p in f.particles_mut() {
            p.state.rho = 0.3 * (2.0 * PI * p.x / l).sin();
        }
        // sum of sin^2 over a full period is M / 2
        assert_relative_eq!(density_mode(&f, 1, l), 0.15, max_relative = 1e-12);
        let r = density_mode(&f, 1, l);
        for p in f.particles_mut() {
            p.state.rho *= 2.0;
        }
        assert_relative_eq!(density_mode(&f, 1, l), 2.0 * r, max_relative = 1e-14);
    }

    #[test]
    fn covariance_definitions() {
        let mut st = NoiseStream::new(12, 0);
        let mut s = ModeSeries::new(1, 1.0);
        for _ in 0..100_000 {
            s.push(st.gaussian());
        }
        let c0 = time_covariance(&s, 0).unwrap();
        let ms = s.values.iter().map(|v| v * v).sum::<f64>() / s.len() as f64;
        assert_relative_eq!(c0, ms, max_relative = 1e-12);
        for lag in [1, 5, 50] {
            let (c, se) = time_covariance_with_error(&s, lag, 20).unwrap();
            assert!(
                c.abs() < 4.0 * se.max(1.0 / (s.len() as f64).sqrt()),
                "lag {lag}: {c} +- {se}"
            );
        }
        assert!(time_covariance(&s, 100_000).is_err());
    }

    #[test]
    fn covariance_of_cosine() {
        // R = sqrt(2) cos(w t) over many whole periods: mean of lagged
        // products tends to cos(w tau)
        let w = 2.0 * PI / 200.0;
        let mut s = ModeSeries::new(1, 1.0);
        for k in 0..200_000 {
            s.push(2f64.sqrt() * (w * k as f64).cos());
        }
        for lag in [0usize, 10, 50, 100, 137] {
            let c = time_covariance(&s, lag).unwrap();
            assert!((c - (w * lag as f64).cos()).abs() < 2e-3, "lag {lag}: {c}");
        }
    }

    #[test]
    fn analytical_covariance_limits() {
        let g = gas();
        let p = HydroParams::from_reference(&g, 1.78e-3, 273.0, 1.25e-4).unwrap();
        let w = p.wavenumber(1);
        assert_eq!(analytical_time_covariance(&p, w, 0.0, 3.7), 3.7);
        assert!(analytical_time_covariance(&p, w, 1e-6, 1.0).abs() < 1e-12);
        for (rho, t, l) in [(1e-3, 100.0, 1e-4), (5e-3, 600.0, 3e-4)] {
            let q = HydroParams::from_reference(&g, rho, t, l).unwrap();
            assert_relative_eq!(
                analytical_time_covariance(&q, q.wavenumber(2), 0.0, 0.42),
                0.42,
                max_relative = 1e-15
            );
        }
    }

    #[test]
    fn analytical_covariance_regression() {
        // frozen from a 50-digit evaluation of the same closed form with
        // the argon constants at 273 K, 1.78e-3 g/cm^3, L = 1.25e-4 cm
        let p = HydroParams::from_reference(&gas(), 1.78e-3, 273.0, 1.25e-4).unwrap();
        let v = analytical_time_covariance(&p, p.wavenumber(1), 1e-9, 1.0);
        assert_relative_eq!(v, ANALYTIC_TAU_1NS, max_relative = 1e-12);
    }

    const ANALYTIC_TAU_1NS: f64 = 0.339_917_881_614_841_1;

    #[test]
    fn shock_location_cases() {
        let (rl, rr, l) = (4.07e-3, 1.78e-3, 5e-4);
        assert_eq!(shock_location_from_mean(0.5 * (rl + rr), rl, rr, l).unwrap(), 0.0);
        assert_relative_eq!(
            shock_location_from_mean(rl, rl, rr, l).unwrap(),
            0.5 * l,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            shock_location_from_mean(rr, rl, rr, l).unwrap(),
            -0.5 * l,
            max_relative = 1e-14
        );
        assert!(matches!(
            shock_location_from_mean(rl, rl, rl, l),
            Err(Error::DegenerateShock)
        ));
    }

    #[test]
    fn integrated_density_weights_by_cell_width() {
        let s = |rho| PrimitiveState::new(rho, 0.0, 300.0);
        let mk = |xs: &[f64], rhos: &[f64], b: Boundary| {
            let ps = xs
                .iter()
                .zip(rhos)
                .map(|(&x, &r)| Particle { x, state: s(r) })
                .collect();
            ParticleField::from_particles(ps, 0.0, 8.0, b, 1.0, 3.0).unwrap()
        };
        // uniform cells reduce to the arithmetic mean
        let xs = [1.0, 3.0, 5.0, 7.0];
        let f = mk(&xs, &[1.0, 2.0, 3.0, 6.0], Boundary::Periodic);
        assert_relative_eq!(integrated_mean_density(&f), 3.0, max_relative = 1e-15);
        assert_relative_eq!(integrated_mean_density(&f), mean_density(&f), max_relative = 1e-15);
        // walls: cells [0,1.5], [1.5,2.5], [2.5,8]
        let fixed = Boundary::FixedState {
            left: s(4.0),
            right: s(1.0),
        };
        let f = mk(&[1.0, 2.0, 3.0], &[4.0, 2.0, 1.0], fixed);
        assert_relative_eq!(
            integrated_mean_density(&f),
            (4.0 * 1.5 + 2.0 + 5.5) / 8.0,
            max_relative = 1e-15
        );
        // periodic wrap: gaps 1, 1, 6 -> widths 3.5, 1, 3.5
        let f = mk(&[1.0, 2.0, 3.0], &[4.0, 2.0, 1.0], Boundary::Periodic);
        assert_relative_eq!(
            integrated_mean_density(&f),
            (4.0 * 3.5 + 2.0 + 3.5) / 8.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn sharp_shock_on_uniform_particles_sits_at_the_step() {
        let (rl, rr) = (4.07e-3, 1.78e-3);
        let left = PrimitiveState::new(rl, 0.0, 567.0);
        let right = PrimitiveState::new(rr, 0.0, 273.0);
        let mut f =
            ParticleField::init_uniform(-2.5e-4, 5e-4, 160, right, Boundary::FixedState { left, right }).unwrap();
        for p in f.particles_mut() {
            if p.x < 0.0 {
                p.state = left;
            }
        }
        assert!(shock_location(&f, rl, rr).unwrap().abs() < 1e-12 * 5e-4);
        // shifting the step right by 8 particles moves the shock by 8 dx
        for p in f.particles_mut() {
            if p.x < 8.0 * 3.125e-6 {
                p.state = left;
            }
        }
        assert_relative_eq!(shock_location(&f, rl, rr).unwrap(), 2.5e-5, max_relative = 1e-9);
    }

    #[test]
    fn rankine_hugoniot_mach2_states() {
        let g = gas();
        let right = PrimitiveState::new(1.78e-3, -61562.0, 273.0);
        let left = rankine_hugoniot(2.0, &right, &g).unwrap();
        assert_relative_eq!(left.rho, 4.07e-3, max_relative = 5e-3);
        assert_relative_eq!(left.t, 567.0, max_relative = 5e-3);
        assert_relative_eq!(left.u, -26933.0, max_relative = 5e-3);
        assert!(matches!(rankine_hugoniot(1.0, &right, &g), Err(Error::InvalidMach(_))));
        assert!(matches!(rankine_hugoniot(0.5, &right, &g), Err(Error::InvalidMach(_))));
    }

    #[test]
    fn rankine_hugoniot_weak_limit_and_mass_flux() {
        let g = gas();
        let right = PrimitiveState::new(1.78e-3, 0.0, 273.0);
        let weak = rankine_hugoniot(1.0 + 1e-9, &right, &g).unwrap();
        assert_relative_eq!(weak.rho, right.rho, max_relative = 1e-8);
        assert_relative_eq!(weak.t, right.t, max_relative = 1e-8);
        for m in [1.1, 1.4, 2.0, 5.0] {
            let l = rankine_hugoniot(m, &right, &g).unwrap();
            let up = upstream_state(m, right.rho, right.t, &g);
            assert_relative_eq!(l.rho * l.u, up.rho * up.u, max_relative = 1e-12);
        }
    }

    #[test]
    fn fit_and_smoothing() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        let f = linear_fit(&xs, &ys).unwrap();
        assert_relative_eq!(f.slope, 2.0, max_relative = 1e-14);
        assert_relative_eq!(f.intercept, 1.0, max_relative = 1e-13);
        assert_relative_eq!(f.r_squared, 1.0, max_relative = 1e-14);
        assert_eq!(
            moving_average(&[1.0, 2.0, 3.0, 4.0, 5.0], 3),
            vec![1.5, 2.0, 3.0, 4.0, 4.5]
        );
    }
}
