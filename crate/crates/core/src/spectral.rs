//! Normal-mode analysis of lattice states.
//!
//! The transform is unitary with kernel `e^{+2πikj/n}`:
//!
//! ```text
//! x̂_k = n^{−1/2} Σ_j x_j e^{2πikj/n},    x_j = n^{−1/2} Σ_k x̂_k e^{−2πikj/n}
//! ```
//!
//! Mode `k` of the periodic chain has frequency `ω_k = 2|sin(πk/n)|` and
//! harmonic energy `E_k = (|p̂_k|² + ω_k²|q̂_k|²)/2`. Indicators run over the
//! `n/2` physical modes obtained by pairing `k` with `n − k`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::Observer;
use crate::model::{Boundary, LatticeState, Potential};

/// `ω_k = 2|sin(πk/n)|`, symmetric in `k ↔ n − k` bit for bit.
pub fn omega(k: usize, n: usize) -> f64 {
    let k = k % n;
    let k = k.min(n - k);
    2.0 * (PI * k as f64 / n as f64).sin()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DftMethod {
    /// `O(n log n)`, backed by rustfft.
    Fast,
    /// Direct `O(n²)` summation with exact twiddle indexing.
    Direct,
}

/// A transform plan for one length. Immutable once built.
#[derive(Clone)]
pub struct DftPlan {
    n: usize,
    method: DftMethod,
    // rustfft's inverse direction carries the e^{+2πikj/n} kernel.
    plus: Option<Arc<dyn Fft<f64>>>,
    minus: Option<Arc<dyn Fft<f64>>>,
    twiddle: Vec<Complex64>,
}

impl std::fmt::Debug for DftPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DftPlan")
            .field("n", &self.n)
            .field("method", &self.method)
            .finish()
    }
}

impl DftPlan {
    /// Fast path for powers of two, direct summation otherwise.
    pub fn new(n: usize) -> Self {
        let method = if n.is_power_of_two() {
            DftMethod::Fast
        } else {
            DftMethod::Direct
        };
        Self::with_method(n, method)
    }

    pub fn with_method(n: usize, method: DftMethod) -> Self {
        assert!(n >= 1, "transform length must be positive");
        match method {
            DftMethod::Fast => {
                let mut planner = FftPlanner::new();
                DftPlan {
                    n,
                    method,
                    plus: Some(planner.plan_fft(n, FftDirection::Inverse)),
                    minus: Some(planner.plan_fft(n, FftDirection::Forward)),
                    twiddle: Vec::new(),
                }
            }
            DftMethod::Direct => DftPlan {
                n,
                method,
                plus: None,
                minus: None,
                twiddle: (0..n)
                    .map(|m| Complex64::from_polar(1.0, 2.0 * PI * m as f64 / n as f64))
                    .collect(),
            },
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn method(&self) -> DftMethod {
        self.method
    }

    fn apply(&self, data: &mut [Complex64], sign_plus: bool) {
        assert_eq!(data.len(), self.n, "transform length mismatch");
        let scale = 1.0 / (self.n as f64).sqrt();
        match self.method {
            DftMethod::Fast => {
                let plan = if sign_plus { &self.plus } else { &self.minus };
                plan.as_ref().expect("fast plan").process(data);
            }
            DftMethod::Direct => {
                let n = self.n;
                let input = data.to_vec();
                for (k, out) in data.iter_mut().enumerate() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (j, x) in input.iter().enumerate() {
                        let m = (k * j) % n;
                        let w = if sign_plus {
                            self.twiddle[m]
                        } else {
                            self.twiddle[m].conj()
                        };
                        acc += x * w;
                    }
                    *out = acc;
                }
            }
        }
        data.iter_mut().for_each(|x| *x *= scale);
    }

    /// Forward transform (kernel `e^{+2πikj/n}`) in place.
    pub fn forward_in_place(&self, data: &mut [Complex64]) {
        self.apply(data, true);
    }

    /// Inverse transform (kernel `e^{−2πikj/n}`) in place.
    pub fn inverse_in_place(&self, data: &mut [Complex64]) {
        self.apply(data, false);
    }

    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.forward_in_place(&mut data);
        data
    }

    pub fn inverse(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let mut data = coeffs.to_vec();
        self.inverse_in_place(&mut data);
        data
    }
}

thread_local! {
    static PLANS: RefCell<HashMap<usize, Arc<DftPlan>>> = RefCell::new(HashMap::new());
}

/// Cached plan for length `n` on the current thread.
pub fn plan(n: usize) -> Arc<DftPlan> {
    PLANS.with(|cache| {
        cache
            .borrow_mut()
            .entry(n)
            .or_insert_with(|| Arc::new(DftPlan::new(n)))
            .clone()
    })
}

/// Unitary forward transform of a real sequence.
pub fn dft(values: &[f64]) -> Vec<Complex64> {
    plan(values.len()).forward(values)
}

/// Unitary inverse transform.
pub fn idft(coeffs: &[Complex64]) -> Vec<Complex64> {
    plan(coeffs.len()).inverse(coeffs)
}

/// Frequencies and harmonic energies of every Fourier mode at one instant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeSpectrum {
    pub n: usize,
    pub omega: Vec<f64>,
    pub energy: Vec<f64>,
    pub t: f64,
}

impl ModeSpectrum {
    /// Number of physical modes, `n/2`.
    pub fn mode_count(&self) -> usize {
        self.n / 2
    }

    /// `E_k + E_{n−k}` for `k = 1..n/2` (the Nyquist mode alone), index `k − 1`.
    pub fn pair_energies(&self) -> Vec<f64> {
        pair_sum(&self.energy)
    }

    /// `Σ_{k≥1} E_k`, the harmonic energy outside the zero mode.
    pub fn harmonic_total(&self) -> f64 {
        self.energy[1..].iter().sum()
    }
}

fn pair_sum(energy: &[f64]) -> Vec<f64> {
    let n = energy.len();
    (1..=n / 2)
        .map(|k| {
            if 2 * k == n {
                energy[k]
            } else {
                energy[k] + energy[n - k]
            }
        })
        .collect()
}

/// Mode energies of a state. Fixed chains are analysed through their odd
/// periodic extension of length `2(n − 1)`, with energies halved so that
/// they sum to the fixed chain's harmonic energy.
pub fn mode_energies(state: &LatticeState) -> ModeSpectrum {
    match state.boundary {
        Boundary::Periodic => periodic_mode_energies(&state.q, &state.p, state.t, 1.0),
        Boundary::Fixed => {
            let ext = state.odd_extension();
            periodic_mode_energies(&ext.q, &ext.p, state.t, 0.5)
        }
    }
}

fn periodic_mode_energies(q: &[f64], p: &[f64], t: f64, scale: f64) -> ModeSpectrum {
    let n = q.len();
    let plan = plan(n);
    let q_hat = plan.forward(q);
    let p_hat = plan.forward(p);
    let omega: Vec<f64> = (0..n).map(|k| omega(k, n)).collect();
    let raw = |k: usize| 0.5 * (p_hat[k].norm_sqr() + omega[k] * omega[k] * q_hat[k].norm_sqr());
    let mut energy = vec![0.0; n];
    energy[0] = scale * raw(0);
    for k in 1..=n / 2 {
        // Average the conjugate pair so that E_k = E_{n−k} holds exactly.
        let e = scale * 0.5 * (raw(k) + raw(n - k));
        energy[k] = e;
        energy[n - k] = e;
    }
    ModeSpectrum { n, omega, energy, t }
}

/// Running trapezoidal average `Ē(t) = (1/(t − t₀)) ∫_{t₀}^{t} E`; the first
/// row is the initial value itself.
pub fn time_average(times: &[f64], rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    if times.is_empty() || rows.is_empty() {
        return Err(Error::EmptyInput("time series"));
    }
    if times.len() != rows.len() {
        return Err(Error::invalid("rows", "one row per time required"));
    }
    let width = rows[0].len();
    let mut integral = vec![0.0; width];
    let mut out = Vec::with_capacity(rows.len());
    out.push(rows[0].clone());
    for i in 1..rows.len() {
        let h = times[i] - times[i - 1];
        let span = times[i] - times[0];
        for (acc, (a, b)) in integral.iter_mut().zip(rows[i - 1].iter().zip(&rows[i])) {
            *acc += 0.5 * h * (a + b);
        }
        out.push(integral.iter().map(|s| s / span).collect());
    }
    Ok(out)
}

/// Spectral entropy `η`, effective mode count `e^η` and width `e^η / M`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Entropy {
    pub eta: f64,
    pub n_excited: f64,
    pub width: f64,
}

/// Entropy of a distribution over the `M` physical modes. `pairs` holds
/// energies indexed by `k − 1`, `k = 1..M`.
pub fn spectral_entropy(pairs: &[f64]) -> Result<Entropy> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput("mode energies"));
    }
    if let Some((index, &value)) = pairs.iter().enumerate().find(|(_, e)| !(**e >= 0.0)) {
        return Err(Error::NonPositive {
            what: "mode energies",
            index,
            value,
        });
    }
    let total: f64 = pairs.iter().sum();
    if total <= 0.0 {
        return Err(Error::invalid("mode energies", "all-zero spectrum"));
    }
    let eta = -pairs
        .iter()
        .map(|e| e / total)
        .filter(|nu| *nu > 0.0)
        .map(|nu| nu * nu.ln())
        .sum::<f64>();
    let eta = eta.clamp(0.0, (pairs.len() as f64).ln());
    let n_excited = eta.exp();
    Ok(Entropy {
        eta,
        n_excited,
        width: n_excited / pairs.len() as f64,
    })
}

/// Which energy distribution the entropy is computed from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyVariant {
    /// `ν_k = E_k(t) / E`.
    Instantaneous,
    /// `ν_k = Ē_k(t) / E`.
    #[default]
    TimeAveraged,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IndicatorSeries {
    pub variant: EntropyVariant,
    pub times: Vec<f64>,
    pub eta: Vec<f64>,
    pub n_excited: Vec<f64>,
    pub width: Vec<f64>,
    /// Time-averaged pair energies, one row per snapshot.
    pub ebar: Vec<Vec<f64>>,
}

impl IndicatorSeries {
    pub fn max_eta(&self) -> f64 {
        self.eta.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Entropy indicators along a series of pair-energy snapshots.
pub fn indicator_series(
    times: &[f64],
    pair_rows: &[Vec<f64>],
    variant: EntropyVariant,
) -> Result<IndicatorSeries> {
    let ebar = time_average(times, pair_rows)?;
    let source = match variant {
        EntropyVariant::Instantaneous => pair_rows,
        EntropyVariant::TimeAveraged => &ebar[..],
    };
    let mut eta = Vec::with_capacity(times.len());
    let mut n_excited = Vec::with_capacity(times.len());
    let mut width = Vec::with_capacity(times.len());
    for row in source {
        let e = spectral_entropy(row)?;
        eta.push(e.eta);
        n_excited.push(e.n_excited);
        width.push(e.width);
    }
    Ok(IndicatorSeries {
        variant,
        times: times.to_vec(),
        eta,
        n_excited,
        width,
        ebar,
    })
}

/// A local maximum of the normalized series above the detection threshold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Recurrence {
    pub time: f64,
    pub recovery: f64,
}

/// Peaks of `series / series[0]` that come back above `threshold` after
/// having dropped below it. Each excursion above the threshold yields its
/// maximum, refined by a parabola through the neighbouring samples.
pub fn detect_recurrence(times: &[f64], series: &[f64], threshold: f64) -> Vec<Recurrence> {
    let Some(&first) = series.first() else {
        return Vec::new();
    };
    if first <= 0.0 || times.len() != series.len() {
        return Vec::new();
    }
    let y: Vec<f64> = series.iter().map(|e| e / first).collect();
    let mut found = Vec::new();
    let mut armed = false;
    let mut best: Option<usize> = None;
    for i in 0..y.len() {
        if y[i] < threshold {
            if let Some(b) = best.take() {
                found.push(refine_peak(times, &y, b));
            }
            armed = true;
        } else if armed && best.is_none_or(|b| y[i] > y[b]) {
            best = Some(i);
        }
    }
    // An excursion still open at the end counts only if its peak is interior.
    if let Some(b) = best {
        if b + 1 < y.len() {
            found.push(refine_peak(times, &y, b));
        }
    }
    found
}

fn refine_peak(times: &[f64], y: &[f64], i: usize) -> Recurrence {
    if i == 0 || i + 1 >= y.len() {
        return Recurrence {
            time: times[i],
            recovery: y[i],
        };
    }
    let (a, b, c) = (y[i - 1], y[i], y[i + 1]);
    let curvature = a - 2.0 * b + c;
    if curvature >= 0.0 {
        return Recurrence {
            time: times[i],
            recovery: b,
        };
    }
    let delta = (0.5 * (a - c) / curvature).clamp(-0.5, 0.5);
    let h = 0.5 * (times[i + 1] - times[i - 1]);
    Recurrence {
        time: times[i] + delta * h,
        recovery: b - 0.25 * (a - c) * delta,
    }
}

/// Least-squares line through `(ln x, ln y)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    /// RMS of the residuals in `ln y`.
    pub residual: f64,
}

pub fn log_log_fit(x: &[f64], y: &[f64], min_points: usize) -> Result<LogLogFit> {
    if x.len() != y.len() {
        return Err(Error::invalid("fit", "x and y lengths differ"));
    }
    if x.len() < min_points.max(2) {
        return Err(Error::invalid(
            "fit",
            format!("need at least {} points, got {}", min_points.max(2), x.len()),
        ));
    }
    for (what, v) in [("abscissae", x), ("values", y)] {
        if let Some((index, &value)) = v.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
            return Err(Error::NonPositive { what, index, value });
        }
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let m = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / m;
    let my = ly.iter().sum::<f64>() / m;
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("fit", "abscissae are all equal"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    Ok(LogLogFit {
        slope,
        intercept,
        residual: (ss / m).sqrt(),
    })
}

/// `E_k ≈ prefactor · k^{−exponent}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub prefactor: f64,
    pub residual: f64,
}

/// Fits a decaying power law to `values` at wavenumbers `ks`.
pub fn fit_power_law(ks: &[f64], values: &[f64]) -> Result<PowerLawFit> {
    let fit = log_log_fit(ks, values, 5)?;
    Ok(PowerLawFit {
        exponent: -fit.slope,
        prefactor: fit.intercept.exp(),
        residual: fit.residual,
    })
}

/// Exponent of `w ∝ ε^s` from a sweep of `(ε, w)` pairs spanning at least a
/// decade in `ε`.
pub fn packet_width_scaling(sweep: &[(f64, f64)]) -> Result<LogLogFit> {
    if sweep.len() < 3 {
        return Err(Error::invalid(
            "sweep",
            format!("need at least 3 points, got {}", sweep.len()),
        ));
    }
    let (eps, w): (Vec<f64>, Vec<f64>) = sweep.iter().copied().unzip();
    let lo = eps.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = eps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi / lo >= 10.0 * (1.0 - 1e-12)) {
        return Err(Error::invalid("sweep", "epsilon values must span a decade"));
    }
    log_log_fit(&eps, &w, 3)
}

/// Records the pair energies `E_1 … E_{n/2}` at each snapshot. For fixed
/// chains the columns run over the `n − 1` modes of the odd extension.
#[derive(Clone, Debug)]
pub struct ModeEnergyObserver {
    modes: usize,
}

impl ModeEnergyObserver {
    pub fn new(state: &LatticeState) -> Self {
        let modes = match state.boundary {
            Boundary::Periodic => state.n() / 2,
            Boundary::Fixed => state.n() - 1,
        };
        ModeEnergyObserver { modes }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn column_names(modes: usize) -> Vec<String> {
        (1..=modes).map(|k| format!("E_{k}")).collect()
    }
}

impl Observer for ModeEnergyObserver {
    fn columns(&self) -> Vec<String> {
        Self::column_names(self.modes)
    }

    fn observe(&mut self, state: &LatticeState, _pot: &Potential) -> Vec<f64> {
        mode_energies(state).pair_energies()
    }
}
