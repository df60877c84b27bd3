//! Weighted least-squares estimates of first and second derivatives from
//! scattered 1D neighbors (finite pointset method).
//!
//! For a point `x` with neighbors `x_i`, the second-order Taylor residuals
//! `e_i = f_x r_i + f_xx r_i^2 / 2 - (f_i - f)` with `r_i = x_i - x` are
//! minimised under the Gaussian weights returned by [`weight`]. The 2x2
//! normal equations are solved in closed form after scaling offsets by `h`,
//! so the conditioning check does not depend on the physical length unit.

use crate::error::{Error, Result};

/// Normal matrices with a larger condition number are rejected.
pub const COND_MAX: f64 = 1e12;

/// Default weight sharpness.
pub const DEFAULT_ALPHA: f64 = 6.25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WlsConfig {
    pub alpha: f64,
    pub h: f64,
}

impl WlsConfig {
    pub fn new(alpha: f64, h: f64) -> Result<Self> {
        if !(alpha > 0.0) || !(h > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "WLS alpha and h must be positive (alpha = {alpha}, h = {h})"
            )));
        }
        Ok(Self { alpha, h })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DerivativePair {
    pub fx: f64,
    pub fxx: f64,
}

/// Gaussian weight with compact support of radius `h`.
#[inline]
pub fn weight(xi: f64, x: f64, cfg: &WlsConfig) -> f64 {
    let q = (xi - x).abs() / cfg.h;
    if q <= 1.0 {
        (-cfg.alpha * q * q).exp()
    } else {
        0.0
    }
}

/// Fills `c1` and `c2` so that `f_x = sum c1[j] (f_j - f)` and
/// `f_xx = sum c2[j] (f_j - f)` for neighbors at signed `offsets`.
pub fn stencil_coefficients(offsets: &[f64], cfg: &WlsConfig, c1: &mut [f64], c2: &mut [f64]) -> Result<()> {
    debug_assert!(c1.len() >= offsets.len() && c2.len() >= offsets.len());
    if offsets.len() < 2 {
        return Err(Error::InsufficientNeighborhood {
            x: f64::NAN,
            found: offsets.len(),
        });
    }
    let inv_h = 1.0 / cfg.h;
    let (mut a11, mut a12, mut a22) = (0.0, 0.0, 0.0);
    for (k, &r) in offsets.iter().enumerate() {
        let q = r * inv_h;
        let aq = q.abs();
        let w = if aq <= 1.0 { (-cfg.alpha * q * q).exp() } else { 0.0 };
        let q2 = 0.5 * q * q;
        a11 += w * q * q;
        a12 += w * q * q2;
        a22 += w * q2 * q2;
        // stash weighted rows, inverted below
        c1[k] = w * q;
        c2[k] = w * q2;
    }
    let det = a11 * a22 - a12 * a12;
    let half_tr = 0.5 * (a11 + a22);
    let disc = (half_tr * half_tr - det).max(0.0).sqrt();
    let lo = half_tr - disc;
    let hi = half_tr + disc;
    if !(det > 0.0) || !(lo > 0.0) || hi / lo > COND_MAX {
        let cond = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        return Err(Error::IllConditioned { cond });
    }
    let inv_det = 1.0 / det;
    let s1 = inv_det * inv_h;
    let s2 = inv_det * inv_h * inv_h;
    for k in 0..offsets.len() {
        let (wq, wq2) = (c1[k], c2[k]);
        c1[k] = (a22 * wq - a12 * wq2) * s1;
        c2[k] = (a11 * wq2 - a12 * wq) * s2;
    }
    Ok(())
}

/// Derivative estimate at `at` (where the function equals `f_at`) from
/// neighbor samples `(x_i, f_i)`. All supplied samples participate, weighted
/// by [`weight`].
pub fn derivatives(values: &[(f64, f64)], at: f64, f_at: f64, cfg: &WlsConfig) -> Result<DerivativePair> {
    if values.len() < 2 {
        return Err(Error::InsufficientNeighborhood {
            x: at,
            found: values.len(),
        });
    }
    let offsets: Vec<f64> = values.iter().map(|&(x, _)| x - at).collect();
    let mut c1 = vec![0.0; values.len()];
    let mut c2 = vec![0.0; values.len()];
    stencil_coefficients(&offsets, cfg, &mut c1, &mut c2).map_err(|e| match e {
        Error::InsufficientNeighborhood { found, .. } => Error::InsufficientNeighborhood { x: at, found },
        other => other,
    })?;
    let mut out = DerivativePair::default();
    for (k, &(_, f)) in values.iter().enumerate() {
        let b = f - f_at;
        out.fx += c1[k] * b;
        out.fxx += c2[k] * b;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Weighted least squares via modified Gram-Schmidt on sqrt(W) M, in the
    /// raw (unscaled) coordinates.
    fn brute_force(values: &[(f64, f64)], at: f64, f_at: f64, cfg: &WlsConfig) -> (f64, f64) {
        let n = values.len();
        let mut q1 = vec![0.0; n];
        let mut q2 = vec![0.0; n];
        let mut b = vec![0.0; n];
        for (i, &(x, f)) in values.iter().enumerate() {
            let sw = weight(x, at, cfg).sqrt();
            let r = x - at;
            q1[i] = sw * r;
            q2[i] = sw * 0.5 * r * r;
            b[i] = sw * (f - f_at);
        }
        let dot = |a: &[f64], c: &[f64]| a.iter().zip(c).map(|(p, q)| p * q).sum::<f64>();
        let r11 = dot(&q1, &q1).sqrt();
        q1.iter_mut().for_each(|v| *v /= r11);
        let r12 = dot(&q1, &q2);
        for i in 0..n {
            q2[i] -= r12 * q1[i];
        }
        let r22 = dot(&q2, &q2).sqrt();
        q2.iter_mut().for_each(|v| *v /= r22);
        let y1 = dot(&q1, &b);
        let y2 = dot(&q2, &b);
        let fxx = y2 / r22;
        let fx = (y1 - r12 * fxx) / r11;
        (fx, fxx)
    }

    fn cfg(dx: f64) -> WlsConfig {
        WlsConfig::new(DEFAULT_ALPHA, 3.0 * dx).unwrap()
    }

    #[test]
    fn weight_values() {
        let c = WlsConfig::new(6.25, 2.0).unwrap();
        assert_eq!(weight(1.0, 1.0, &c), 1.0);
        assert_eq!(weight(1.0 + 1.01 * 2.0, 1.0, &c), 0.0);
        assert_relative_eq!(weight(2.0, 1.0, &c), (-1.5625f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(weight(2.0, 1.0, &c), 0.209_611_387, max_relative = 1e-8);
        // boundary of support is inclusive
        assert!(weight(3.0, 1.0, &c) > 0.0);
    }

    #[test]
    fn constant_has_zero_derivatives() {
        let dx = 0.1;
        let vals: Vec<_> = [-3.0, -2.0, -1.0, 1.0, 2.0, 3.0]
            .iter()
            .map(|k| (k * dx, 7.5))
            .collect();
        let d = derivatives(&vals, 0.0, 7.5, &cfg(dx)).unwrap();
        assert_eq!(d.fx, 0.0);
        assert_eq!(d.fxx, 0.0);
    }

    #[test]
    fn linear_is_reproduced_on_one_sided_stencil() {
        let dx = 3.125e-6;
        let x0 = 1.0e-4;
        let f = |x: f64| 3.0 * x + 1.0;
        let vals: Vec<_> = [0.7, 1.3, 2.0, 2.9]
            .iter()
            .map(|k| (x0 + k * dx, f(x0 + k * dx)))
            .collect();
        let d = derivatives(&vals, x0, f(x0), &cfg(dx)).unwrap();
        assert_relative_eq!(d.fx, 3.0, max_relative = 1e-9);
        // rounding in f_j - f is amplified by 1/dx^2
        assert!(d.fxx.abs() < 1e-12 * f(x0) / (dx * dx));
    }

    #[test]
    fn quadratic_against_dense_solver() {
        let dx = 0.01;
        let x0 = 0.37;
        let f = |x: f64| x * x;
        let vals: Vec<_> = [-3.0, -2.0, -1.0, 1.0, 2.0, 3.0]
            .iter()
            .map(|k| (x0 + k * dx, f(x0 + k * dx)))
            .collect();
        let c = cfg(dx);
        let d = derivatives(&vals, x0, f(x0), &c).unwrap();
        let (bx, bxx) = brute_force(&vals, x0, f(x0), &c);
        assert_relative_eq!(d.fx, 2.0 * x0, max_relative = 1e-12);
        assert_relative_eq!(d.fxx, 2.0, max_relative = 1e-12);
        assert_relative_eq!(bx, 2.0 * x0, max_relative = 1e-12);
        assert_relative_eq!(bxx, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn too_few_neighbors() {
        let c = cfg(1.0);
        match derivatives(&[(1.0, 1.0)], 0.0, 0.0, &c) {
            Err(Error::InsufficientNeighborhood { found: 1, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn coincident_neighbors_are_ill_conditioned() {
        let c = cfg(1.0);
        let r = derivatives(&[(1.0, 1.0), (1.0, 2.0), (1.0, 3.0)], 0.0, 0.0, &c);
        assert!(matches!(r, Err(Error::IllConditioned { .. })), "{r:?}");
        // outside the support every weight vanishes
        let r = derivatives(&[(5.0, 1.0), (-5.0, 2.0)], 0.0, 0.0, &c);
        assert!(matches!(r, Err(Error::IllConditioned { .. })), "{r:?}");
    }

    #[test]
    fn sine_first_derivative_converges_quadratically() {
        let max_err = |n: usize| {
            let l = 2.0 * std::f64::consts::PI;
            let dx = l / n as f64;
            let c = cfg(dx);
            let mut err: f64 = 0.0;
            for i in 3..n - 3 {
                let x = i as f64 * dx;
                let vals: Vec<_> = (-3i32..=3)
                    .filter(|&k| k != 0)
                    .map(|k| {
                        let xj = x + k as f64 * dx;
                        (xj, xj.sin())
                    })
                    .collect();
                let d = derivatives(&vals, x, x.sin(), &c).unwrap();
                err = err.max((d.fx - x.cos()).abs());
            }
            err
        };
        let ratio = max_err(64) / max_err(128);
        assert!((ratio - 4.0).abs() < 0.8, "ratio {ratio}");
    }

    #[test]
    fn random_instances_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let h = rng.random_range(0.1..10.0);
            let c = WlsConfig::new(DEFAULT_ALPHA, h).unwrap();
            let x0 = rng.random_range(-5.0..5.0);
            let n = rng.random_range(3..9);
            let vals: Vec<_> = (0..n)
                .map(|_| {
                    let x = x0 + rng.random_range(-0.95..0.95) * h;
                    (x, rng.random_range(-1.0..1.0))
                })
                .collect();
            let f0 = rng.random_range(-1.0..1.0);
            let d = derivatives(&vals, x0, f0, &c).unwrap();
            let (bx, bxx) = brute_force(&vals, x0, f0, &c);
            let sx = bx.abs().max(1.0 / h);
            let sxx = bxx.abs().max(1.0 / (h * h));
            assert!((d.fx - bx).abs() <= 1e-10 * sx, "{} vs {bx}", d.fx);
            assert!((d.fxx - bxx).abs() <= 1e-10 * sxx, "{} vs {bxx}", d.fxx);
        }
    }

    proptest::proptest! {
        #[test]
        fn quadratic_reproduction(
            a in -10.0f64..10.0, b in -10.0f64..10.0, c2 in -10.0f64..10.0,
            x0 in -1.0f64..1.0,
            offs in proptest::collection::vec(-0.95f64..0.95, 2..8),
        ) {
            let h = 0.3;
            let cfg = WlsConfig::new(DEFAULT_ALPHA, h).unwrap();
            // guarantee two well separated points
            let mut offs = offs;
            offs.push(-0.5);
            offs.push(0.6);
            let f = |x: f64| a + b * x + c2 * x * x;
            let vals: Vec<_> = offs.iter().map(|o| (x0 + o * h, f(x0 + o * h))).collect();
            let d = derivatives(&vals, x0, f(x0), &cfg).unwrap();
            let fx = b + 2.0 * c2 * x0;
            let scale = a.abs() + b.abs() + c2.abs() + 1.0;
            proptest::prop_assert!((d.fx - fx).abs() <= 1e-12 * scale / h * 10.0);
            proptest::prop_assert!((d.fxx - 2.0 * c2).abs() <= 1e-12 * scale / (h * h) * 10.0);
        }

        #[test]
        fn translation_invariance(shift in -100i32..100, offs in proptest::collection::vec(-900i32..900, 3..8)) {
            let cfg = WlsConfig::new(DEFAULT_ALPHA, 1.0).unwrap();
            // dyadic offsets keep the shifted coordinates exactly representable
            let vals: Vec<_> = offs.iter().enumerate().map(|(i, &o)| (o as f64 / 1024.0, (i as f64).sin())).collect();
            let shift = shift as f64;
            let moved: Vec<_> = vals.iter().map(|&(x, f)| (x + shift, f)).collect();
            if let (Ok(d0), Ok(d1)) = (derivatives(&vals, 0.0, 0.3, &cfg), derivatives(&moved, shift, 0.3, &cfg)) {
                proptest::prop_assert!((d0.fx - d1.fx).abs() <= 1e-12 * d0.fx.abs().max(1.0));
                proptest::prop_assert!((d0.fxx - d1.fxx).abs() <= 1e-12 * d0.fxx.abs().max(1.0));
            }
        }
    }
}
