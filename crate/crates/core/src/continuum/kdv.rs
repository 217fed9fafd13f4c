//! Pseudospectral KdV / mKdV on the unit torus:
//!
//! ```text
//! U_t = c U_x + a U_xxx + ∂_x(b U²/2 + g U³/3)
//! ```
//!
//! Strang splitting: the linear part is integrated exactly per Fourier mode,
//! the nonlinear flux by one RK4 step with 2/3-rule dealiasing.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::{wavenumber, GridField};
use crate::error::{Error, Result};

/// Coefficients of `U_t = c U_x + a U_xxx + b U U_x + g U² U_x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KdvParams {
    /// `c`, linear transport speed.
    pub transport: f64,
    /// `a`, dispersion coefficient.
    pub dispersion: f64,
    /// `b`, quadratic advection coefficient.
    pub advection: f64,
    /// `g`, cubic (mKdV) advection coefficient.
    #[serde(default)]
    pub cubic: f64,
}

/// Dispersion conventions found in the continuum reductions of the chain.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DispersionConvention {
    /// Normal form of the Riemann invariants, `a = −h²/8`.
    #[default]
    NormalForm,
    /// Direct reduction of the Boussinesq system, `a = +h²/24`.
    Boussinesq,
}

impl KdvParams {
    /// Left-moving KdV with `b = α√ε/√2`, `c = 1` and the chosen dispersion.
    pub fn left_moving(epsilon: f64, alpha: f64, h: f64, convention: DispersionConvention) -> Self {
        let dispersion = match convention {
            DispersionConvention::NormalForm => -h * h / 8.0,
            DispersionConvention::Boussinesq => h * h / 24.0,
        };
        KdvParams {
            transport: 1.0,
            dispersion,
            advection: alpha * epsilon.sqrt() / SQRT_2,
            cubic: 0.0,
        }
    }

    /// Left-moving mKdV of the quartic chain, given `⟨ρ²⟩` of the
    /// counter-propagating field.
    pub fn beta_model(epsilon: f64, beta: f64, h: f64, rho_mean_square: f64) -> Self {
        let g = 0.75 * beta * epsilon;
        KdvParams {
            transport: 1.0 + g * rho_mean_square,
            dispersion: h * h / 24.0,
            advection: 0.0,
            cubic: g,
        }
    }

    /// Largest nonlinear speed `max |bU + gU²|`.
    pub fn nonlinear_speed(&self, u: &GridField) -> f64 {
        u.samples()
            .iter()
            .map(|v| (self.advection * v + self.cubic * v * v).abs())
            .fold(0.0, f64::max)
    }

    /// Largest `dt` with `u_max · dt · m ≤ 0.5`.
    pub fn stable_dt(&self, u: &GridField) -> f64 {
        let speed = self.nonlinear_speed(u);
        if speed == 0.0 {
            f64::INFINITY
        } else {
            0.5 / (speed * u.m() as f64)
        }
    }
}

/// Retained wavenumbers `|k| ≤ m/3`.
fn retained(k: i64, m: usize) -> bool {
    3 * k.unsigned_abs() as usize <= m
}

struct Solver {
    m: usize,
    params: KdvParams,
    half_linear: Vec<Complex64>,
    kappa: Vec<f64>,
    mask: Vec<bool>,
}

impl Solver {
    fn new(m: usize, params: KdvParams, dt: f64) -> Self {
        let kappa: Vec<f64> = (0..m).map(|i| 2.0 * PI * wavenumber(i, m) as f64).collect();
        let mask: Vec<bool> = (0..m)
            .map(|i| i != m / 2 && retained(wavenumber(i, m), m))
            .collect();
        let half_linear = kappa
            .iter()
            .map(|&k| {
                let omega = params.transport * k - params.dispersion * k * k * k;
                Complex64::from_polar(1.0, 0.5 * omega * dt)
            })
            .collect();
        Solver {
            m,
            params,
            half_linear,
            kappa,
            mask,
        }
    }

    fn nonlinear(&self, c: &[Complex64]) -> Vec<Complex64> {
        let u = GridField::from_coefficients(c).expect("grid size");
        let (b, g) = (self.params.advection, self.params.cubic);
        let flux = u.map(|v| v * v * (0.5 * b + g * v / 3.0));
        let mut f = flux.coefficients();
        for ((fi, &keep), &kappa) in f.iter_mut().zip(&self.mask).zip(&self.kappa) {
            *fi = if keep {
                *fi * Complex64::new(0.0, kappa)
            } else {
                Complex64::new(0.0, 0.0)
            };
        }
        f
    }

    fn step(&self, c: &mut [Complex64], dt: f64) {
        c.iter_mut().zip(&self.half_linear).for_each(|(z, l)| *z *= l);
        if self.params.advection != 0.0 || self.params.cubic != 0.0 {
            let axpy = |a: &[Complex64], s: f64, b: &[Complex64]| -> Vec<Complex64> {
                a.iter().zip(b).map(|(x, y)| x + y * s).collect()
            };
            let k1 = self.nonlinear(c);
            let k2 = self.nonlinear(&axpy(c, 0.5 * dt, &k1));
            let k3 = self.nonlinear(&axpy(c, 0.5 * dt, &k2));
            let k4 = self.nonlinear(&axpy(c, dt, &k3));
            for i in 0..self.m {
                c[i] += (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (dt / 6.0);
            }
        }
        c.iter_mut().zip(&self.half_linear).for_each(|(z, l)| *z *= l);
    }

    /// Largest amplitude in the top third of the retained band against the
    /// overall peak.
    fn tail_ratio(&self, c: &[Complex64]) -> (f64, f64) {
        let kmax = (self.m / 3) as i64;
        let mut tail = 0.0f64;
        let mut peak = 0.0f64;
        for (i, z) in c.iter().enumerate() {
            let k = wavenumber(i, self.m).abs();
            if k == 0 || !self.mask[i] {
                continue;
            }
            peak = peak.max(z.norm());
            if 3 * k > 2 * kmax {
                tail = tail.max(z.norm());
            }
        }
        (tail, peak)
    }
}

/// Evolves `u0` to time `t_end` with steps no larger than `dt`, calling
/// `on_step(t, U)` after every `stride` steps.
pub fn kdv_evolve_with(
    u0: &GridField,
    params: &KdvParams,
    dt: f64,
    t_end: f64,
    stride: usize,
    mut on_step: impl FnMut(f64, &GridField) -> Result<()>,
) -> Result<GridField> {
    if !(dt > 0.0) || !(t_end >= 0.0) {
        return Err(Error::invalid("dt", "need dt > 0 and t_end >= 0"));
    }
    let limit = params.stable_dt(u0);
    if dt > limit {
        return Err(Error::invalid(
            "dt",
            format!("dt = {dt} violates the nonlinear CFL bound {limit}"),
        ));
    }
    let steps = (t_end / dt).ceil().max(0.0) as usize;
    if steps == 0 {
        return Ok(u0.clone());
    }
    let h = t_end / steps as f64;
    let solver = Solver::new(u0.m(), *params, h);
    let mut c = u0.coefficients();
    // The initial datum is projected onto the retained band, keeping k = 0.
    for (ci, &keep) in c.iter_mut().zip(&solver.mask).skip(1) {
        if !keep {
            *ci = Complex64::new(0.0, 0.0);
        }
    }
    let nonlinear = params.advection != 0.0 || params.cubic != 0.0;
    for s in 1..=steps {
        solver.step(&mut c, h);
        let t = s as f64 * h;
        if nonlinear {
            let (tail, peak) = solver.tail_ratio(&c);
            if tail > 1e-3 * peak || !peak.is_finite() {
                return Err(Error::Aliasing { tail, peak, time: t });
            }
        }
        if stride > 0 && (s % stride == 0 || s == steps) {
            on_step(t, &GridField::from_coefficients(&c)?)?;
        }
    }
    GridField::from_coefficients(&c)
}

pub fn kdv_evolve(u0: &GridField, params: &KdvParams, dt: f64, t_end: f64) -> Result<GridField> {
    kdv_evolve_with(u0, params, dt, t_end, 0, |_, _| Ok(()))
}

/// `14α³ − 27αβ + 12γ`; zero exactly when the second-order normal form of
/// the chain is formally integrable.
pub fn kodama_residual(alpha: f64, beta: f64, gamma: f64) -> f64 {
    14.0 * alpha.powi(3) - 27.0 * alpha * beta + 12.0 * gamma
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuum::burgers::{burgers_evolve, BurgersFlux, Direction};
    use approx::assert_relative_eq;

    #[test]
    fn airy_flow_preserves_amplitudes() {
        let m = 128;
        let u0 = GridField::from_fn(m, |x| (2.0 * PI * x).cos() + 0.3 * (6.0 * PI * x).sin()).unwrap();
        let params = KdvParams {
            transport: 0.0,
            dispersion: 1e-3,
            advection: 0.0,
            cubic: 0.0,
        };
        let t = 2.0;
        let u = kdv_evolve(&u0, &params, 0.01, t).unwrap();
        let (a, b) = (u0.coefficients(), u.coefficients());
        for k in [1usize, 3] {
            assert!((a[k].norm() - b[k].norm()).abs() < 1e-12);
            let kappa = 2.0 * PI * k as f64;
            let expected = a[k] * Complex64::from_polar(1.0, -1e-3 * kappa.powi(3) * t);
            assert!((b[k] - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn small_dispersion_approaches_burgers() {
        let m = 256;
        let u0 = GridField::from_fn(m, |x| (2.0 * PI * x).cos()).unwrap();
        let flux = BurgersFlux::with_slope(0.5, 0.3, Direction::Left);
        let exact = burgers_evolve(&u0, &flux, 0.2).unwrap();
        let err = |a: f64| {
            let params = KdvParams {
                transport: 0.5,
                dispersion: a,
                advection: 0.3,
                cubic: 0.0,
            };
            kdv_evolve(&u0, &params, 1e-3, 0.2).unwrap().max_abs_diff(&exact)
        };
        assert!(err(0.0) < 1e-10);
        let (e1, e2) = (err(1e-5), err(5e-6));
        assert!((e1 / e2 - 2.0).abs() < 0.2, "O(a) scaling: {e1} vs {e2}");
    }

    #[test]
    fn conserves_mean_and_square() {
        let m = 256;
        let u0 = GridField::from_fn(m, |x| 0.5 * (-40.0 * (x - 0.5).powi(2)).exp()).unwrap();
        let params = KdvParams {
            transport: 0.0,
            dispersion: 1e-3,
            advection: 1.0,
            cubic: 0.0,
        };
        let u = kdv_evolve(&u0, &params, 1e-3, 10.0).unwrap();
        assert!((u.mean() - u0.mean()).abs() < 1e-14);
        let drift = (u.mean_square() / u0.mean_square() - 1.0).abs();
        assert!(drift < 1e-6, "⟨U²⟩ drift {drift}");
    }

    #[test]
    fn cfl_violation_is_rejected() {
        let u0 = GridField::from_fn(64, |x| (2.0 * PI * x).cos()).unwrap();
        let params = KdvParams {
            transport: 0.0,
            dispersion: 1e-3,
            advection: 1.0,
            cubic: 0.0,
        };
        assert!(kdv_evolve(&u0, &params, 0.1, 1.0).is_err());
    }

    #[test]
    fn steepening_without_dispersion_trips_the_alias_detector() {
        let u0 = GridField::from_fn(64, |x| (2.0 * PI * x).cos()).unwrap();
        let params = KdvParams {
            transport: 0.0,
            dispersion: 0.0,
            advection: 1.0,
            cubic: 0.0,
        };
        assert!(matches!(
            kdv_evolve(&u0, &params, 1e-3, 1.0),
            Err(Error::Aliasing { .. })
        ));
    }

    #[test]
    fn conventions() {
        let h = 1.0 / 32.0;
        let nf = KdvParams::left_moving(1e-3, 1.0, h, DispersionConvention::NormalForm);
        let bq = KdvParams::left_moving(1e-3, 1.0, h, DispersionConvention::Boussinesq);
        assert_relative_eq!(nf.dispersion, -3.0 * bq.dispersion, max_relative = 1e-15);
        let mk = KdvParams::beta_model(1e-2, 1.0, h, 2.0);
        assert_relative_eq!(mk.cubic, 0.0075, max_relative = 1e-15);
        assert_relative_eq!(mk.transport, 1.015, max_relative = 1e-15);
    }

    #[test]
    fn kodama_examples() {
        for a in [1.0f64, 0.25] {
            assert!(kodama_residual(a, 2.0 * a * a / 3.0, a.powi(3) / 3.0).abs() < 1e-14);
        }
        assert_eq!(kodama_residual(1.0, 0.0, 0.0), 14.0);
        assert_eq!(kodama_residual(0.0, 3.7, 0.0), 0.0);
    }
}
