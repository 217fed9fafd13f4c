//! Inviscid Burgers equations `U_τ = f(U) U_x` with linear flux.
//!
//! Left-moving fields use `f = Φ = c₀ + sU` with `s = α√ε/√2`; right-moving
//! fields use `f = −Φ`. Before the shock time the solution is given
//! implicitly by `U = U₀(x + f(U)τ)`.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use super::grid::{GridField, TrigSeries};
use crate::error::{Error, Result};
use crate::model::golden_max;
use crate::spectral::{log_log_fit, LogLogFit};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    #[default]
    Left,
    Right,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Left => 1.0,
            Direction::Right => -1.0,
        }
    }
}

/// Linear flux `f(U) = ±(c₀ + slope · U)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BurgersFlux {
    pub c0: f64,
    pub slope: f64,
    pub direction: Direction,
}

impl BurgersFlux {
    /// The normal-form flux with `slope = α√ε/√2`.
    pub fn normal_form(epsilon: f64, alpha: f64, c0: f64, direction: Direction) -> Self {
        BurgersFlux {
            c0,
            slope: alpha * epsilon.sqrt() / SQRT_2,
            direction,
        }
    }

    pub fn with_slope(c0: f64, slope: f64, direction: Direction) -> Self {
        BurgersFlux {
            c0,
            slope,
            direction,
        }
    }

    /// Characteristic speed `Φ(u) = c₀ + slope · u`, before the direction sign.
    pub fn speed(&self, u: f64) -> f64 {
        self.c0 + self.slope * u
    }

    pub fn f(&self, u: f64) -> f64 {
        self.direction.sign() * self.speed(u)
    }

    /// `f'(u)`, constant for a linear flux.
    pub fn f_prime(&self) -> f64 {
        self.direction.sign() * self.slope
    }
}

/// `d/dx f(U₀(x))` for a band-limited datum.
fn flux_gradient(u0: &TrigSeries, flux: &BurgersFlux, x: f64) -> f64 {
    flux.f_prime() * u0.eval(x, 1)
}

/// `1/τ_s = max_x d/dx f(U₀(x))` and the location of the maximum.
pub fn burgers_shock_time(u0: &GridField, flux: &BurgersFlux) -> Result<(f64, f64)> {
    let series = u0.trig_series();
    let (rate, x) = max_flux_gradient(&series, flux, u0.m().max(256))?;
    Ok((1.0 / rate, x))
}

fn max_flux_gradient(series: &TrigSeries, flux: &BurgersFlux, m: usize) -> Result<(f64, f64)> {
    let h = 1.0 / m as f64;
    let (best_i, best) = (0..m)
        .map(|i| (i, flux_gradient(series, flux, i as f64 * h)))
        .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
    if !(best > 0.0) {
        return Err(Error::NoShock);
    }
    let x0 = best_i as f64 * h;
    let x = golden_max(|x| flux_gradient(series, flux, x), x0 - h, x0 + h);
    Ok((flux_gradient(series, flux, x).max(best), x.rem_euclid(1.0)))
}

/// Shock times of the left and right fields and the resulting lattice time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShockPrediction {
    pub tau_s_l: f64,
    pub tau_s_r: f64,
    pub tau_s: f64,
    pub t_s: f64,
    pub x_hat: f64,
    pub gamma3: f64,
    /// Stationary-phase coefficient `C` of `|Û_k(τ_s)|² ~ C k^{−8/3}`.
    pub c: f64,
}

/// Shock prediction for general `(λ₀, ρ₀)` under the normal-form fluxes.
pub fn shock_prediction(
    lambda0: &GridField,
    rho0: &GridField,
    epsilon: f64,
    alpha: f64,
    n: usize,
) -> Result<ShockPrediction> {
    let left = BurgersFlux::normal_form(epsilon, alpha, 1.0, Direction::Left);
    let right = BurgersFlux::normal_form(epsilon, alpha, 1.0, Direction::Right);
    let tau = |u: &GridField, f: &BurgersFlux| match burgers_shock_time(u, f) {
        Ok((t, _)) => Ok(t),
        Err(Error::NoShock) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    };
    let tau_s_l = tau(lambda0, &left)?;
    let tau_s_r = tau(rho0, &right)?;
    let (field, flux) = if tau_s_l <= tau_s_r {
        (lambda0, left)
    } else {
        (rho0, right)
    };
    if !tau_s_l.is_finite() && !tau_s_r.is_finite() {
        return Err(Error::NoShock);
    }
    let asym = shock_asymptotics(field, &flux)?;
    let first = asym.maximizers[0];
    Ok(ShockPrediction {
        tau_s_l,
        tau_s_r,
        tau_s: asym.tau_s,
        t_s: n as f64 * asym.tau_s,
        x_hat: first.x,
        gamma3: first.gamma,
        c: asym.coefficient_at(1),
    })
}

/// Closed-form prediction for the normal-form sine datum, neglecting the
/// `O(√ε)` second harmonic.
pub fn shock_times_closed_form(theta: f64, epsilon: f64, alpha: f64, n: usize) -> Result<ShockPrediction> {
    if !(epsilon > 0.0) || alpha == 0.0 {
        return Err(Error::invalid("epsilon", "closed form needs epsilon > 0 and alpha != 0"));
    }
    let rate = 2.0 * PI * (2.0 * epsilon).sqrt() * alpha.abs();
    let (c, s) = (theta.cos(), theta.sin());
    let tau_s_l = 1.0 / (rate * c.abs());
    let tau_s_r = 1.0 / (rate * s.abs());
    let slope = alpha * epsilon.sqrt() / SQRT_2;
    // Left field 2cosθ cos2πx with f = Φ; right field −2sinθ cos2πx with
    // f = −Φ. Either way the active amplitude is 2|a| with a = cosθ or sinθ,
    // the maximum of f' U₀' sits where sin 2πx = −sign, and the third
    // derivative there is −16π³|slope · a|.
    let (amp, sign) = if tau_s_l <= tau_s_r {
        (c.abs(), (alpha * c).signum())
    } else {
        (s.abs(), (alpha * s).signum())
    };
    let x_hat = if sign > 0.0 { 0.75 } else { 0.25 };
    let gamma3 = -16.0 * PI.powi(3) * (slope * amp).abs();
    let tau_s = tau_s_l.min(tau_s_r);
    let c_coef = 16.0 * amp * amp / (36f64.powf(2.0 / 3.0) * gamma(2.0 / 3.0).powi(2));
    Ok(ShockPrediction {
        tau_s_l,
        tau_s_r,
        tau_s,
        t_s: n as f64 * tau_s,
        x_hat,
        gamma3,
        c: c_coef,
    })
}

/// Solves `U = U₀(x + f(U)τ)` at every grid point, `0 ≤ τ < τ_s`.
///
/// With `ξ = x + f(U)τ` the equation becomes `G(ξ) = ξ − τ f(U₀(ξ)) − x = 0`,
/// and `G' = 1 − τ d/dξ f(U₀) > 0` before the shock, so the root is unique
/// and bracketed by `x + τ [min f, max f]`. Newton steps that leave the
/// bracket fall back to bisection.
pub fn burgers_evolve(u0: &GridField, flux: &BurgersFlux, tau: f64) -> Result<GridField> {
    if !(tau >= 0.0) {
        return Err(Error::invalid("tau", "must be >= 0"));
    }
    if tau == 0.0 {
        return Ok(u0.clone());
    }
    let tau_s = match burgers_shock_time(u0, flux) {
        Ok((t, _)) => t,
        Err(Error::NoShock) => f64::INFINITY,
        Err(e) => return Err(e),
    };
    if tau >= tau_s {
        return Err(Error::PostShock { tau, tau_s });
    }
    let series = u0.trig_series();
    let (umin, umax) = (u0.min(), u0.max());
    // Band-limited data can overshoot the samples slightly between nodes.
    let pad = 1e-3 * (umax - umin).max(1e-300);
    let (fa, fb) = (flux.f(umin - pad), flux.f(umax + pad));
    let (fmin, fmax) = (fa.min(fb), fa.max(fb));
    let m = u0.m();
    let samples = (0..m)
        .into_par_iter()
        .map(|i| {
            let x = i as f64 / m as f64;
            solve_characteristic(&series, flux, tau, x, x + tau * fmin, x + tau * fmax)
                .map(|xi| series.eval(xi, 0))
                .ok_or(Error::NewtonFailed { index: i })
        })
        .collect::<Result<Vec<f64>>>()?;
    GridField::new(samples)
}

fn solve_characteristic(
    series: &TrigSeries,
    flux: &BurgersFlux,
    tau: f64,
    x: f64,
    mut lo: f64,
    mut hi: f64,
) -> Option<f64> {
    let g = |xi: f64| xi - tau * flux.f(series.eval(xi, 0)) - x;
    let dg = |xi: f64| 1.0 - tau * flux_gradient(series, flux, xi);
    let (mut glo, ghi) = (g(lo), g(hi));
    if glo > 0.0 || ghi < 0.0 {
        // Widen once in case the bracket estimate missed by round-off.
        lo -= 1e-9;
        hi += 1e-9;
        glo = g(lo);
        if glo > 0.0 || g(hi) < 0.0 {
            return None;
        }
    }
    let mut xi = 0.5 * (lo + hi);
    for _ in 0..200 {
        let gx = g(xi);
        if gx.abs() <= 1e-15 * (1.0 + x.abs()) {
            return Some(xi);
        }
        if (gx < 0.0) == (glo < 0.0) {
            lo = xi;
            glo = gx;
        } else {
            hi = xi;
        }
        let slope = dg(xi);
        let newton = xi - gx / slope;
        xi = if slope > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= 4.0 * f64::EPSILON * (1.0 + x.abs()) {
            return Some(xi);
        }
    }
    None
}

/// `max_i |U_i − U₀(x_i + f(U_i)τ)|` for a candidate solution.
pub fn implicit_residual(u0: &GridField, flux: &BurgersFlux, tau: f64, u: &GridField) -> f64 {
    let series = u0.trig_series();
    u.samples()
        .iter()
        .enumerate()
        .map(|(i, &ui)| (ui - series.eval(u.x(i) + flux.f(ui) * tau, 0)).abs())
        .fold(0.0, f64::max)
}

/// `|Û_k(τ)|²` for `k = 1..=k_max` from
/// `Û_k = (1/2πik) ∮ U₀'(x) e^{−2πik[x − τ f(U₀(x))]} dx`.
///
/// The integrand is smooth and periodic, so the trapezoid rule converges
/// spectrally; the grid is doubled until the value at `k_max` changes by
/// less than `1e-9` relative, or by less than `1e-14` of the largest
/// coefficient.
pub fn burgers_spectrum(u0: &GridField, flux: &BurgersFlux, tau: f64, k_max: usize) -> Result<Vec<f64>> {
    Ok(burgers_coefficients(u0, flux, tau, k_max)?
        .iter()
        .map(|c| c.norm_sqr())
        .collect())
}

/// Complex coefficients `Û_k(τ)`, `k = 1..=k_max`.
pub fn burgers_coefficients(
    u0: &GridField,
    flux: &BurgersFlux,
    tau: f64,
    k_max: usize,
) -> Result<Vec<Complex64>> {
    if k_max == 0 {
        return Err(Error::invalid("k_max", "must be >= 1"));
    }
    let series = u0.trig_series();
    let mut points = (8 * k_max).max(u0.m()).next_power_of_two();
    let mut prev = quadrature(&series, flux, tau, k_max, points);
    let mut achieved = f64::INFINITY;
    while points < (1 << 22) {
        points *= 2;
        let next = quadrature(&series, flux, tau, k_max, points);
        let (a, b) = (prev[k_max - 1], next[k_max - 1]);
        let scale = next.iter().map(|c| c.norm()).fold(0.0, f64::max);
        achieved = (a - b).norm() / b.norm().max(1e-300);
        prev = next;
        if achieved < 1e-9 || (a - b).norm() <= 1e-14 * scale {
            return Ok(prev);
        }
    }
    Err(Error::QuadratureNotConverged { achieved })
}

fn quadrature(series: &TrigSeries, flux: &BurgersFlux, tau: f64, k_max: usize, points: usize) -> Vec<Complex64> {
    let h = 1.0 / points as f64;
    let nodes: Vec<(f64, f64)> = (0..points)
        .map(|j| {
            let x = j as f64 * h;
            (series.eval(x, 1), x - tau * flux.f(series.eval(x, 0)))
        })
        .collect();
    (1..=k_max)
        .into_par_iter()
        .map(|k| {
            let kf = k as f64;
            let sum: Complex64 = nodes
                .iter()
                .map(|&(du, phase)| du * Complex64::from_polar(1.0, -2.0 * PI * kf * (phase.rem_euclid(1.0))))
                .sum();
            sum * h / Complex64::new(0.0, 2.0 * PI * kf)
        })
        .collect()
}

/// One absolute maximum point of `d/dx f(U₀)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Maximizer {
    pub x: f64,
    /// `U₀'(x)`.
    pub u0_prime: f64,
    /// `d³ f(U₀(x)) / dx³`, evaluated spectrally.
    pub gamma: f64,
    /// The same quantity from a Richardson-extrapolated 5-point stencil.
    pub gamma_fd: f64,
    /// `x − τ_s f(U₀(x))`.
    pub phase: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShockAsymptotics {
    pub tau_s: f64,
    pub exponent: f64,
    pub maximizers: Vec<Maximizer>,
    /// Set when spectral and finite-difference `γ_j` disagree by more than
    /// `1e-6` relative.
    pub under_resolved: bool,
    /// `1/ζ(8/3)`, the prefactor of the normalized spectrum when the
    /// power law is assumed for all `k ≥ 1`.
    pub normalized_prefactor: f64,
}

impl ShockAsymptotics {
    /// `C_k = |Σ_j U₀'(x_j) e^{−2πik φ_j} / ((9πτ_s|γ_j|)^{1/3} Γ(2/3))|²`;
    /// independent of `k` for a single maximizer.
    pub fn coefficient_at(&self, k: u64) -> f64 {
        let g = gamma(2.0 / 3.0);
        self.maximizers
            .iter()
            .map(|m| {
                let amp = m.u0_prime / ((9.0 * PI * self.tau_s * m.gamma.abs()).cbrt() * g);
                Complex64::from_polar(amp, -2.0 * PI * k as f64 * m.phase)
            })
            .sum::<Complex64>()
            .norm_sqr()
    }
}

/// Stationary-phase data for `|Û_k(τ_s)|² ~ C k^{−8/3}`.
pub fn shock_asymptotics(u0: &GridField, flux: &BurgersFlux) -> Result<ShockAsymptotics> {
    let series = u0.trig_series();
    let scan = u0.m().max(1024);
    let (rate, _) = max_flux_gradient(&series, flux, scan)?;
    let tau_s = 1.0 / rate;
    let h = 1.0 / scan as f64;
    let g = |x: f64| flux_gradient(&series, flux, x);
    // Every local maximum of the scan within a tight band of the global one.
    let mut xs: Vec<f64> = Vec::new();
    for i in 0..scan {
        let x = i as f64 * h;
        let (a, b, c) = (g(x - h), g(x), g(x + h));
        if b >= a && b > c && b > rate * (1.0 - 1e-3) {
            let refined = golden_max(g, x - h, x + h).rem_euclid(1.0);
            if g(refined) >= rate * (1.0 - 1e-9) && !xs.iter().any(|y| periodic_gap(*y, refined) < 2.0 * h) {
                xs.push(refined);
            }
        }
    }
    if xs.is_empty() {
        return Err(Error::NoShock);
    }
    xs.sort_by(f64::total_cmp);
    let mut under_resolved = false;
    let maximizers = xs
        .into_iter()
        .map(|x| {
            let gamma = flux.f_prime() * series.eval(x, 3);
            let gamma_fd = richardson_second_derivative(g, x, 1e-3);
            if (gamma - gamma_fd).abs() > 1e-6 * gamma.abs().max(1e-300) {
                under_resolved = true;
            }
            if gamma.abs() <= 1e-9 * rate * (2.0 * PI).powi(2) {
                return Err(Error::DegenerateMaximizer { x });
            }
            Ok(Maximizer {
                x,
                u0_prime: series.eval(x, 1),
                gamma,
                gamma_fd,
                phase: x - tau_s * flux.f(series.eval(x, 0)),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ShockAsymptotics {
        tau_s,
        exponent: 8.0 / 3.0,
        maximizers,
        under_resolved,
        normalized_prefactor: 1.0 / zeta(8.0 / 3.0),
    })
}

fn periodic_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Second derivative by the 5-point stencil, Richardson-extrapolated over
/// steps `h` and `h/2`.
fn richardson_second_derivative(g: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    let d = |h: f64| {
        (-g(x + 2.0 * h) + 16.0 * g(x + h) - 30.0 * g(x) + 16.0 * g(x - h) - g(x - 2.0 * h))
            / (12.0 * h * h)
    };
    let (coarse, fine) = (d(h), d(0.5 * h));
    fine + (fine - coarse) / 15.0
}

/// Riemann zeta function for real `s > 1`, by Euler–Maclaurin summation.
pub fn zeta(s: f64) -> f64 {
    assert!(s > 1.0, "zeta is evaluated only for s > 1");
    const N: usize = 16;
    // B_{2j} / (2j)! for j = 1..=6.
    const B: [f64; 6] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30240.0,
        -1.0 / 1209600.0,
        1.0 / 47900160.0,
        -691.0 / 1307674368000.0,
    ];
    let nf = N as f64;
    let mut sum: f64 = (1..N).map(|k| (k as f64).powf(-s)).sum();
    sum += nf.powf(1.0 - s) / (s - 1.0) + 0.5 * nf.powf(-s);
    // Rising factorial s(s+1)…(s+2j−2) times N^{−s−2j+1}.
    let mut rising = s;
    let mut power = nf.powf(-s - 1.0);
    for (j, b) in B.iter().enumerate() {
        sum += b * rising * power;
        let m = 2.0 * j as f64;
        rising *= (s + m + 1.0) * (s + m + 2.0);
        power /= nf * nf;
    }
    sum
}

/// Least-squares slopes of `ln E_k` against `ln t` over `t_lo ≤ t ≤ t_hi`.
pub fn early_growth_slopes(
    times: &[f64],
    series: &[(usize, Vec<f64>)],
    t_lo: f64,
    t_hi: f64,
) -> Result<Vec<(usize, LogLogFit)>> {
    let window: Vec<usize> = (0..times.len())
        .filter(|&i| times[i] > 0.0 && times[i] >= t_lo && times[i] <= t_hi)
        .collect();
    if window.len() < 3 {
        return Err(Error::invalid(
            "window",
            format!("only {} samples in [{t_lo}, {t_hi}]", window.len()),
        ));
    }
    let t: Vec<f64> = window.iter().map(|&i| times[i]).collect();
    series
        .iter()
        .map(|(k, e)| {
            if e.len() != times.len() {
                return Err(Error::invalid("series", "length differs from times"));
            }
            let y: Vec<f64> = window.iter().map(|&i| e[i]).collect();
            Ok((*k, log_log_fit(&t, &y, 3)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuum::grid::normal_form_initial_data;
    use approx::assert_relative_eq;

    fn cosine(m: usize) -> GridField {
        GridField::from_fn(m, |x| (2.0 * PI * x).cos()).unwrap()
    }

    #[test]
    fn zeta_values() {
        assert_relative_eq!(zeta(2.0), PI * PI / 6.0, max_relative = 1e-14);
        assert_relative_eq!(zeta(4.0), PI.powi(4) / 90.0, max_relative = 1e-14);
        assert_relative_eq!(zeta(8.0 / 3.0), 1.28419054023974, max_relative = 1e-12);
        assert_relative_eq!(1.0 / zeta(8.0 / 3.0), 0.77870, max_relative = 1e-5);
    }

    #[test]
    fn closed_form_examples() {
        let p = shock_times_closed_form(0.0, 0.05, 1.0, 256).unwrap();
        assert_relative_eq!(p.t_s, 256.0 / (2.0 * PI * 0.1f64.sqrt()), max_relative = 1e-15);
        assert_relative_eq!(p.t_s, 128.84, max_relative = 1e-4);
        assert!(p.tau_s_r.is_infinite());
        let q = shock_times_closed_form(PI / 4.0, 0.05, 1.0, 256).unwrap();
        assert_relative_eq!(q.tau_s_l, q.tau_s_r, max_relative = 1e-14);
        let r = shock_times_closed_form(0.3, 0.2, 1.0, 64).unwrap();
        let s = shock_times_closed_form(0.3, 0.05, 1.0, 64).unwrap();
        assert_relative_eq!(r.t_s, s.t_s / 2.0, max_relative = 1e-14);
    }

    #[test]
    fn general_shock_time_matches_closed_form() {
        for theta in [0.0, 0.3, -0.5] {
            let eps = 1e-4;
            let d = normal_form_initial_data(theta, eps, 1.0, 256).unwrap();
            let general = shock_prediction(&d.lambda, &d.rho, eps, 1.0, 128).unwrap();
            let closed = shock_times_closed_form(theta, eps, 1.0, 128).unwrap();
            assert!((general.t_s / closed.t_s - 1.0).abs() < 0.01, "θ = {theta}");
        }
    }

    #[test]
    fn rarefaction_only_datum_has_no_shock() {
        let zero = GridField::zeros(64).unwrap();
        let flux = BurgersFlux::with_slope(0.0, 1.0, Direction::Left);
        assert!(matches!(burgers_shock_time(&zero, &flux), Err(Error::NoShock)));
    }

    #[test]
    fn evolve_at_zero_is_identity() {
        let u0 = cosine(64);
        let flux = BurgersFlux::with_slope(0.0, 1.0, Direction::Left);
        assert_eq!(burgers_evolve(&u0, &flux, 0.0).unwrap(), u0);
    }

    #[test]
    fn pure_transport() {
        let u0 = cosine(64);
        let flux = BurgersFlux::with_slope(0.7, 0.0, Direction::Left);
        let u = burgers_evolve(&u0, &flux, 0.3).unwrap();
        assert!(u.max_abs_diff(&u0.translate(0.7 * 0.3)) < 1e-12);
    }

    #[test]
    fn refuses_post_shock_times() {
        let u0 = cosine(64);
        let flux = BurgersFlux::with_slope(0.0, 1.0, Direction::Left);
        let (tau_s, _) = burgers_shock_time(&u0, &flux).unwrap();
        assert_relative_eq!(tau_s, 1.0 / (2.0 * PI), max_relative = 1e-12);
        assert!(matches!(
            burgers_evolve(&u0, &flux, tau_s),
            Err(Error::PostShock { .. })
        ));
    }

    #[test]
    fn evolve_residual_and_invariants() {
        let u0 = cosine(256);
        let flux = BurgersFlux::with_slope(0.2, 1.0, Direction::Left);
        let u = burgers_evolve(&u0, &flux, 0.1).unwrap();
        assert!(implicit_residual(&u0, &flux, 0.1, &u) < 1e-12);
        assert!((u.mean() - u0.mean()).abs() < 1e-8);
        assert!((u.mean_square() - u0.mean_square()).abs() < 1e-8);
    }

    #[test]
    fn right_moving_flux_is_mirror_image() {
        let u0 = cosine(128);
        let left = BurgersFlux::with_slope(0.0, 1.0, Direction::Left);
        let right = BurgersFlux::with_slope(0.0, 1.0, Direction::Right);
        let a = burgers_evolve(&u0, &left, 0.1).unwrap();
        let b = burgers_evolve(&u0.map(|v| -v), &right, 0.1).unwrap();
        assert!(a.max_abs_diff(&b.map(|v| -v)) < 1e-12);
    }

    #[test]
    fn semigroup_property() {
        let u0 = cosine(128);
        let flux = BurgersFlux::with_slope(0.0, 1.0, Direction::Left);
        let once = burgers_evolve(&u0, &flux, 0.1).unwrap();
        let twice = burgers_evolve(&burgers_evolve(&u0, &flux, 0.04).unwrap(), &flux, 0.06).unwrap();
        assert!(once.max_abs_diff(&twice) < 1e-10, "{}", once.max_abs_diff(&twice));
    }

    #[test]
    fn spectrum_at_zero_matches_coefficients() {
        let d = normal_form_initial_data(0.2, 0.05, 1.0, 64).unwrap();
        let flux = BurgersFlux::normal_form(0.05, 1.0, 1.0, Direction::Left);
        let spec = burgers_spectrum(&d.lambda, &flux, 0.0, 8).unwrap();
        let c = d.lambda.coefficients();
        for k in 1..=8 {
            assert!((spec[k - 1] - c[k].norm_sqr()).abs() < 1e-15);
        }
    }

    #[test]
    fn two_maximizer_interference() {
        // U₀ = cos 4πx has two equivalent maxima; odd k cancel exactly.
        let u0 = GridField::from_fn(256, |x| (4.0 * PI * x).cos()).unwrap();
        let flux = BurgersFlux::with_slope(0.0, 1.0, Direction::Left);
        let asym = shock_asymptotics(&u0, &flux).unwrap();
        assert_eq!(asym.maximizers.len(), 2);
        assert!(asym.coefficient_at(33) < 1e-20);
        let single = asym.maximizers[0].u0_prime
            / ((9.0 * PI * asym.tau_s * asym.maximizers[0].gamma.abs()).cbrt() * gamma(2.0 / 3.0));
        assert_relative_eq!(asym.coefficient_at(64), 4.0 * single * single, max_relative = 1e-9);
        let spec = burgers_spectrum(&u0, &flux, asym.tau_s, 128).unwrap();
        let measured = spec[127] * 128f64.powf(8.0 / 3.0);
        assert!((measured / asym.coefficient_at(128) - 1.0).abs() < 0.1);
    }

    #[test]
    fn sine_family_coefficient() {
        let d = normal_form_initial_data(0.0, 1e-4, 1.0, 512).unwrap();
        let flux = BurgersFlux::normal_form(1e-4, 1.0, 1.0, Direction::Left);
        let asym = shock_asymptotics(&d.lambda, &flux).unwrap();
        assert_eq!(asym.maximizers.len(), 1);
        assert!(!asym.under_resolved);
        let closed = shock_times_closed_form(0.0, 1e-4, 1.0, 1).unwrap();
        assert!((asym.coefficient_at(1) / closed.c - 1.0).abs() < 0.01);
        assert_relative_eq!(closed.c, 0.80034, max_relative = 1e-4);
    }

    #[test]
    fn growth_slopes_on_synthetic_power() {
        let t: Vec<f64> = (1..50).map(|i| i as f64 * 0.1).collect();
        let e: Vec<f64> = t.iter().map(|s| s.powi(6)).collect();
        let fits = early_growth_slopes(&t, &[(4, e)], 0.0, 10.0).unwrap();
        assert_relative_eq!(fits[0].1.slope, 6.0, max_relative = 1e-12);
    }
}
