//! Periodic fields on the unit torus and the linear operators acting on them.
//!
//! Fourier coefficients follow `U(x) = Σ_k c_k e^{2πikx}`, i.e.
//! `c_k = (1/m) Σ_j U(x_j) e^{−2πikx_j}` with `x_j = j/m`. Wavenumbers are
//! stored in FFT order; the Nyquist mode is dropped by odd operators.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Boundary, LatticeState};
use crate::spectral;

/// Signed wavenumber of FFT index `i` on a grid of `m` points.
pub fn wavenumber(i: usize, m: usize) -> i64 {
    if i <= m / 2 {
        i as i64
    } else {
        i as i64 - m as i64
    }
}

/// Samples of a periodic function at `x_i = i/m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridField {
    samples: Vec<f64>,
}

impl GridField {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        let m = samples.len();
        if m < 4 || !m.is_multiple_of(2) {
            return Err(Error::invalid(
                "m",
                format!("grid size must be even and >= 4, got {m}"),
            ));
        }
        Ok(GridField { samples })
    }

    pub fn from_fn(m: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new((0..m).map(|i| f(i as f64 / m as f64)).collect())
    }

    pub fn zeros(m: usize) -> Result<Self> {
        Self::new(vec![0.0; m])
    }

    pub fn m(&self) -> usize {
        self.samples.len()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 / self.m() as f64
    }

    /// `⟨U⟩`.
    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.m() as f64
    }

    /// `⟨U²⟩`.
    pub fn mean_square(&self) -> f64 {
        self.samples.iter().map(|u| u * u).sum::<f64>() / self.m() as f64
    }

    pub fn is_zero_mean(&self) -> bool {
        self.mean().abs() <= 1e-12 * (1.0 + self.sup_norm())
    }

    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().fold(0.0, |a, u| a.max(u.abs()))
    }

    pub fn max(&self) -> f64 {
        self.samples.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.samples.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridField {
        GridField {
            samples: self.samples.iter().map(|&u| f(u)).collect(),
        }
    }

    /// Pointwise `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &GridField, b: f64) -> GridField {
        assert_eq!(self.m(), other.m(), "grid sizes differ");
        GridField {
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(u, v)| a * u + b * v)
                .collect(),
        }
    }

    pub fn scale(&self, a: f64) -> GridField {
        self.map(|u| a * u)
    }

    pub fn max_abs_diff(&self, other: &GridField) -> f64 {
        self.samples
            .iter()
            .zip(&other.samples)
            .fold(0.0, |a, (u, v)| a.max((u - v).abs()))
    }

    /// Fourier coefficients `c_k` in FFT order.
    pub fn coefficients(&self) -> Vec<Complex64> {
        let m = self.m();
        let norm = 1.0 / (m as f64).sqrt();
        let mut data: Vec<Complex64> = self.samples.iter().map(|&u| Complex64::new(u, 0.0)).collect();
        spectral::plan(m).inverse_in_place(&mut data);
        data.iter_mut().for_each(|c| *c *= norm);
        data
    }

    /// Real part of the synthesis `Σ_k c_k e^{2πikx_j}`.
    pub fn from_coefficients(coeffs: &[Complex64]) -> Result<GridField> {
        let m = coeffs.len();
        let mut data = coeffs.to_vec();
        spectral::plan(m).forward_in_place(&mut data);
        let norm = (m as f64).sqrt();
        GridField::new(data.iter().map(|c| c.re * norm).collect())
    }

    /// Applies the Fourier multiplier `mult(k)`. For odd multipliers the
    /// Nyquist coefficient is zeroed so the result stays real.
    pub fn apply_multiplier(&self, mult: impl Fn(i64) -> Complex64, zero_nyquist: bool) -> GridField {
        let m = self.m();
        let mut c = self.coefficients();
        for (i, ci) in c.iter_mut().enumerate() {
            *ci *= if zero_nyquist && i == m / 2 {
                Complex64::new(0.0, 0.0)
            } else {
                mult(wavenumber(i, m))
            };
        }
        GridField::from_coefficients(&c).expect("same grid size")
    }

    /// `x ↦ U(x + a)`, exact for band-limited fields.
    pub fn translate(&self, a: f64) -> GridField {
        self.apply_multiplier(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 * a), true)
    }

    pub fn trig_series(&self) -> TrigSeries {
        TrigSeries::from_coefficients(&self.coefficients())
    }
}

/// A real trigonometric polynomial that can be evaluated off the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigSeries {
    mean: f64,
    /// `(2πk, weight · c_k)` with weight 2, or 1 for the Nyquist mode.
    terms: Vec<(f64, Complex64)>,
}

impl TrigSeries {
    /// Builds the series from FFT-ordered coefficients, dropping terms below
    /// `1e-16` of the largest.
    pub fn from_coefficients(c: &[Complex64]) -> Self {
        let m = c.len();
        let biggest = c.iter().skip(1).fold(0.0f64, |a, z| a.max(z.norm()));
        let terms = (1..=m / 2)
            .filter(|&k| c[k].norm() > 1e-16 * biggest)
            .map(|k| {
                let weight = if 2 * k == m { 1.0 } else { 2.0 };
                (2.0 * PI * k as f64, c[k] * weight)
            })
            .collect();
        TrigSeries {
            mean: c[0].re,
            terms,
        }
    }

    /// Series with `U(x) = Σ_k a_k cos(2πkx)`, `k ≥ 1`.
    pub fn cosines(amplitudes: &[(u32, f64)]) -> Self {
        TrigSeries {
            mean: 0.0,
            terms: amplitudes
                .iter()
                .map(|&(k, a)| (2.0 * PI * k as f64, Complex64::new(a, 0.0)))
                .collect(),
        }
    }

    /// `d^order U / dx^order` at `x`.
    pub fn eval(&self, x: f64, order: u32) -> f64 {
        let mut sum = if order == 0 { self.mean } else { 0.0 };
        for &(kappa, a) in &self.terms {
            let phase = Complex64::from_polar(1.0, kappa * x);
            let factor = Complex64::new(0.0, kappa).powu(order);
            sum += (a * factor * phase).re;
        }
        sum
    }

    pub fn sample(&self, m: usize, order: u32) -> Result<GridField> {
        GridField::from_fn(m, |x| self.eval(x, order))
    }
}

/// `D_h U(x) = (U(x + h/2) − U(x − h/2))/h`, multiplier `2i sin(πkh)/h`;
/// `h = 0` gives `∂_x`.
pub fn dh_apply(u: &GridField, h: f64) -> GridField {
    u.apply_multiplier(|k| dh_symbol(k, h), true)
}

fn dh_symbol(k: i64, h: f64) -> Complex64 {
    let kf = k as f64;
    if h == 0.0 {
        Complex64::new(0.0, 2.0 * PI * kf)
    } else {
        Complex64::new(0.0, 2.0 * (PI * kf * h).sin() / h)
    }
}

/// Spectral derivative of the given order.
pub fn derivative(u: &GridField, order: u32) -> GridField {
    u.apply_multiplier(
        |k| Complex64::new(0.0, 2.0 * PI * k as f64).powu(order),
        order % 2 == 1,
    )
}

/// Zero-mean primitive, multiplier `1/(2πik)` with `k = 0` dropped.
pub fn antiderivative(u: &GridField) -> GridField {
    u.apply_multiplier(
        |k| {
            if k == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, -1.0 / (2.0 * PI * k as f64))
            }
        },
        true,
    )
}

/// Zero-mean solution `Q` of `D_h Q = V`.
pub fn dh_inverse(v: &GridField, h: f64) -> Result<GridField> {
    let m = v.m();
    for i in 1..m / 2 {
        if dh_symbol(wavenumber(i, m), h).norm() < 1e-12 {
            return Err(Error::invalid(
                "h",
                format!("D_h is singular at wavenumber {i} on a grid of {m}"),
            ));
        }
    }
    Ok(v.apply_multiplier(
        |k| {
            if k == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                dh_symbol(k, h).inv()
            }
        },
        true,
    ))
}

/// `λ = (D_hQ + P)/√2`, `ρ = (D_hQ − P)/√2`.
pub fn riemann_invariants(q: &GridField, p: &GridField, h: f64) -> Result<(GridField, GridField)> {
    if q.m() != p.m() {
        return Err(Error::invalid("p", "Q and P live on different grids"));
    }
    let dq = dh_apply(q, h);
    Ok((
        dq.combine(1.0 / SQRT_2, p, 1.0 / SQRT_2),
        dq.combine(1.0 / SQRT_2, p, -1.0 / SQRT_2),
    ))
}

/// Inverse of [`riemann_invariants`], with the convention `⟨Q⟩ = 0`.
pub fn inverse_riemann(
    lambda: &GridField,
    rho: &GridField,
    h: f64,
) -> Result<(GridField, GridField)> {
    if lambda.m() != rho.m() {
        return Err(Error::invalid("rho", "λ and ρ live on different grids"));
    }
    let dq = lambda.combine(1.0 / SQRT_2, rho, 1.0 / SQRT_2);
    let p = lambda.combine(1.0 / SQRT_2, rho, -1.0 / SQRT_2);
    Ok((dh_inverse(&dq, h)?, p))
}

/// Initial Riemann invariants of the sine datum after the first-order
/// normal-form transformation.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalFormData {
    pub lambda: GridField,
    pub rho: GridField,
    /// Whether `|θ| ≤ π/4`, where the left shock comes first.
    pub left_shock_first: bool,
    pub lambda_series: TrigSeries,
    pub rho_series: TrigSeries,
}

/// `(cos 2πx, cos 4πx)` amplitudes of `λ₀` and `ρ₀`.
pub fn normal_form_amplitudes(theta: f64, epsilon: f64, alpha: f64) -> [(f64, f64); 2] {
    let g = alpha * epsilon.sqrt() / (2.0 * SQRT_2);
    let s2 = (2.0 * theta).sin();
    [
        (2.0 * theta.cos(), g * (theta.sin().powi(2) - 2.0 * s2)),
        (-2.0 * theta.sin(), g * (theta.cos().powi(2) - 2.0 * s2)),
    ]
}

pub fn normal_form_initial_data(theta: f64, epsilon: f64, alpha: f64, m: usize) -> Result<NormalFormData> {
    let [(l1, l2), (r1, r2)] = normal_form_amplitudes(theta, epsilon, alpha);
    let lambda_series = TrigSeries::cosines(&[(1, l1), (2, l2)]);
    let rho_series = TrigSeries::cosines(&[(1, r1), (2, r2)]);
    Ok(NormalFormData {
        lambda: lambda_series.sample(m, 0)?,
        rho: rho_series.sample(m, 0)?,
        left_shock_first: theta.abs() <= PI / 4.0 + 1e-15,
        lambda_series,
        rho_series,
    })
}

/// `(α√ε/(4√2)) (⟨λ²⟩ − λ²)`, the right-moving field slaved to `λ`.
pub fn slaving_manifold(lambda: &GridField, epsilon: f64, alpha: f64) -> GridField {
    let c = alpha * epsilon.sqrt() / (4.0 * SQRT_2);
    let mean = lambda.mean_square();
    lambda.map(|l| c * (mean - l * l))
}

/// `sup |ρ − (α√ε/(4√2))(⟨λ²⟩ − λ²)|`.
pub fn slaving_defect(lambda: &GridField, rho: &GridField, epsilon: f64, alpha: f64) -> f64 {
    rho.max_abs_diff(&slaving_manifold(lambda, epsilon, alpha))
}

/// Continuum fields of a periodic lattice state, `P(hj) = p_j/√ε` and
/// `Q(hj) = h q_j/√ε` with `h = 1/N`.
pub fn lattice_fields(state: &LatticeState, epsilon: f64) -> Result<(GridField, GridField)> {
    if state.boundary != Boundary::Periodic {
        return Err(Error::invalid("boundary", "continuum fields need a periodic chain"));
    }
    if !(epsilon > 0.0) {
        return Err(Error::invalid("epsilon", "must be > 0"));
    }
    let h = 1.0 / state.n() as f64;
    let s = epsilon.sqrt();
    Ok((
        GridField::new(state.q.iter().map(|q| h * q / s).collect())?,
        GridField::new(state.p.iter().map(|p| p / s).collect())?,
    ))
}

/// Inverse of [`lattice_fields`].
pub fn fields_to_lattice(q: &GridField, p: &GridField, epsilon: f64) -> Result<LatticeState> {
    let n = q.m();
    let s = epsilon.sqrt();
    LatticeState::new(
        q.samples().iter().map(|v| v * s * n as f64).collect(),
        p.samples().iter().map(|v| v * s).collect(),
        Boundary::Periodic,
    )
}
