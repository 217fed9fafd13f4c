//! Chain Hamiltonians, forces, energies and initial-condition constructors.
//!
//! A chain of `n` particles with nearest-neighbour interaction
//!
//! ```text
//! H = Σ_j [ p_j²/2 + Φ(q_{j+1} − q_j) ]
//! ```
//!
//! where `Φ` is one of the potentials in [`Potential`]. Periodic chains use
//! all `n` bonds; fixed chains pin `q_0 = q_{n−1} = 0` and use the `n − 1`
//! interior bonds.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral;

/// Interparticle potential `Φ(z)` as a function of the bond stretch
/// `z = q_{j+1} − q_j`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Potential {
    /// `z²/2`.
    Harmonic,
    /// `z²/2 + αz³/3 + βz⁴/4 + γz⁵/5`.
    Fput {
        alpha: f64,
        beta: f64,
        #[serde(default)]
        gamma: f64,
    },
    /// `A (e^{−Bz} + Bz − 1)`.
    Toda { a: f64, b: f64 },
}

impl Potential {
    pub fn fput(alpha: f64, beta: f64) -> Self {
        Potential::Fput {
            alpha,
            beta,
            gamma: 0.0,
        }
    }

    pub fn fput_quintic(alpha: f64, beta: f64, gamma: f64) -> Self {
        Potential::Fput { alpha, beta, gamma }
    }

    pub fn toda(a: f64, b: f64) -> Result<Self> {
        let pot = Potential::Toda { a, b };
        pot.validate()?;
        Ok(pot)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Potential::Harmonic => Ok(()),
            Potential::Fput { alpha, beta, gamma } => {
                if !(alpha.is_finite() && beta.is_finite() && gamma.is_finite()) {
                    return Err(Error::invalid("potential", "non-finite FPUT coefficient"));
                }
                Ok(())
            }
            Potential::Toda { a, b } => {
                if !(a > 0.0 && a.is_finite()) {
                    return Err(Error::invalid("potential.a", "Toda requires A > 0"));
                }
                if b == 0.0 || !b.is_finite() {
                    return Err(Error::invalid("potential.b", "Toda requires B != 0"));
                }
                Ok(())
            }
        }
    }

    /// Cubic, quartic and quintic Taylor coefficients in the FPUT
    /// normalization `αz³/3 + βz⁴/4 + γz⁵/5`.
    pub fn fput_coefficients(&self) -> (f64, f64, f64) {
        match *self {
            Potential::Harmonic => (0.0, 0.0, 0.0),
            Potential::Fput { alpha, beta, gamma } => (alpha, beta, gamma),
            Potential::Toda { a, b } => {
                // A (e^{-Bz} + Bz - 1) = A Σ_{m≥2} (-B)^m z^m / m!
                let c3 = -a * b.powi(3) / 6.0;
                let c4 = a * b.powi(4) / 24.0;
                let c5 = -a * b.powi(5) / 120.0;
                (3.0 * c3, 4.0 * c4, 5.0 * c5)
            }
        }
    }

    /// `Φ(z)`.
    pub fn phi(&self, z: f64) -> f64 {
        match *self {
            Potential::Harmonic => 0.5 * z * z,
            Potential::Fput { alpha, beta, gamma } => {
                z * z * (0.5 + z * (alpha / 3.0 + z * (beta / 4.0 + z * gamma / 5.0)))
            }
            Potential::Toda { a, b } => a * exp_minus_one_plus_x(-b * z),
        }
    }

    /// `Φ'(z)`, the bond tension.
    pub fn phi_prime(&self, z: f64) -> f64 {
        match *self {
            Potential::Harmonic => z,
            Potential::Fput { alpha, beta, gamma } => {
                z * (1.0 + z * (alpha + z * (beta + z * gamma)))
            }
            Potential::Toda { a, b } => -a * b * (-b * z).exp_m1(),
        }
    }

    /// Whether `e^{−bΦ}` is normalizable on the real line.
    pub fn is_confining(&self) -> bool {
        match *self {
            Potential::Harmonic | Potential::Toda { .. } => true,
            Potential::Fput { alpha, beta, gamma } => {
                gamma == 0.0 && (beta > 0.0 || (beta == 0.0 && alpha == 0.0))
            }
        }
    }
}

/// `e^x − 1 − x`, accurate for small `|x|`.
fn exp_minus_one_plus_x(x: f64) -> f64 {
    if x.abs() > 0.1 {
        return x.exp_m1() - x;
    }
    let mut term = x * x / 2.0;
    let mut sum = term;
    let mut m = 2.0;
    while term.abs() > 1e-18 * sum.abs() {
        m += 1.0;
        term *= x / m;
        sum += term;
    }
    sum
}

/// Parameters of the Toda chain tangent to the FPUT chain with cubic
/// coefficient `α`, together with the FPUT coefficients `β_T`, `γ_T` that
/// match its quartic and quintic Taylor terms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TodaTangent {
    pub a: f64,
    pub b: f64,
    pub beta_t: f64,
    pub gamma_t: f64,
}

impl TodaTangent {
    pub fn potential(&self) -> Potential {
        Potential::Toda {
            a: self.a,
            b: self.b,
        }
    }
}

/// Toda parameters tangent to `Φ_F` through cubic order.
///
/// With `Φ_T(z) = A(e^{−Bz} + Bz − 1)` and `z = q_{j+1} − q_j` the cubic term
/// is `−AB³z³/6`, so matching `+αz³/3` with `AB² = 1` requires `B = −2α`.
pub fn toda_tangent_params(alpha: f64) -> Result<TodaTangent> {
    if alpha == 0.0 {
        return Err(Error::TodaTangencyUndefined);
    }
    Ok(TodaTangent {
        a: 1.0 / (4.0 * alpha * alpha),
        b: -2.0 * alpha,
        beta_t: 2.0 * alpha * alpha / 3.0,
        gamma_t: alpha.powi(3) / 3.0,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    #[default]
    Periodic,
    Fixed,
}

/// Positions and momenta of the chain at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeState {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub t: f64,
    pub boundary: Boundary,
}

impl LatticeState {
    pub fn new(q: Vec<f64>, p: Vec<f64>, boundary: Boundary) -> Result<Self> {
        let n = q.len();
        check_size(n)?;
        if p.len() != n {
            return Err(Error::invalid("p", format!("length {} != {}", p.len(), n)));
        }
        let mut state = LatticeState {
            q,
            p,
            t: 0.0,
            boundary,
        };
        if boundary == Boundary::Fixed {
            state.pin_ends();
        }
        Ok(state)
    }

    pub fn at_rest(n: usize, boundary: Boundary) -> Result<Self> {
        Self::new(vec![0.0; n], vec![0.0; n], boundary)
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }

    pub fn total_momentum(&self) -> f64 {
        self.p.iter().sum()
    }

    pub(crate) fn pin_ends(&mut self) {
        let n = self.n();
        self.q[0] = 0.0;
        self.q[n - 1] = 0.0;
        self.p[0] = 0.0;
        self.p[n - 1] = 0.0;
    }

    /// Number of bonds carrying potential energy.
    pub fn bond_count(&self) -> usize {
        match self.boundary {
            Boundary::Periodic => self.n(),
            Boundary::Fixed => self.n() - 1,
        }
    }

    /// Stretch of bond `j`, `q_{j+1} − q_j` (indices modulo `n` when periodic).
    pub fn bond(&self, j: usize) -> f64 {
        let n = self.n();
        self.q[(j + 1) % n] - self.q[j]
    }

    /// Odd extension of a fixed chain of `n` sites to a periodic chain of
    /// `2(n − 1)` sites. The periodic flow of the extension restricted to the
    /// first `n` sites reproduces the fixed-end flow.
    pub fn odd_extension(&self) -> LatticeState {
        let n = self.n();
        let m = 2 * (n - 1);
        let mut q = vec![0.0; m];
        let mut p = vec![0.0; m];
        q[..n].copy_from_slice(&self.q);
        p[..n].copy_from_slice(&self.p);
        for j in 1..n - 1 {
            q[m - j] = -self.q[j];
            p[m - j] = -self.p[j];
        }
        LatticeState {
            q,
            p,
            t: self.t,
            boundary: Boundary::Periodic,
        }
    }

    /// Inverse of [`odd_extension`](Self::odd_extension): keeps sites `0..=m/2`.
    pub fn restrict_odd_extension(&self) -> Result<LatticeState> {
        let m = self.n();
        let n = m / 2 + 1;
        let mut state = LatticeState::new(
            self.q[..n].to_vec(),
            self.p[..n].to_vec(),
            Boundary::Fixed,
        )?;
        state.t = self.t;
        Ok(state)
    }
}

fn check_size(n: usize) -> Result<()> {
    if n < 4 || !n.is_multiple_of(2) {
        return Err(Error::invalid(
            "n",
            format!("particle count must be even and >= 4, got {n}"),
        ));
    }
    Ok(())
}

/// Writes the force on every site into `out`.
pub fn forces_into(state: &LatticeState, pot: &Potential, out: &mut [f64]) {
    forces_of(&state.q, state.boundary, pot, out);
}

pub(crate) fn forces_of(q: &[f64], boundary: Boundary, pot: &Potential, out: &mut [f64]) {
    let n = q.len();
    match boundary {
        Boundary::Periodic => {
            // out_j = Φ'(r_j) − Φ'(r_{j−1}); carry the previous bond tension.
            let mut prev = pot.phi_prime(q[0] - q[n - 1]);
            for j in 0..n {
                let next = if j + 1 < n { q[j + 1] } else { q[0] };
                let tension = pot.phi_prime(next - q[j]);
                out[j] = tension - prev;
                prev = tension;
            }
        }
        Boundary::Fixed => {
            out[0] = 0.0;
            out[n - 1] = 0.0;
            let mut prev = pot.phi_prime(q[1] - q[0]);
            for j in 1..n - 1 {
                let tension = pot.phi_prime(q[j + 1] - q[j]);
                out[j] = tension - prev;
                prev = tension;
            }
        }
    }
}

/// Acceleration `q̈_j = Φ'(q_{j+1} − q_j) − Φ'(q_j − q_{j−1})` on every site.
pub fn forces(state: &LatticeState, pot: &Potential) -> Vec<f64> {
    let mut out = vec![0.0; state.n()];
    forces_into(state, pot, &mut out);
    out
}

pub fn kinetic_energy(state: &LatticeState) -> f64 {
    0.5 * state.p.iter().map(|p| p * p).sum::<f64>()
}

pub fn potential_energy(state: &LatticeState, pot: &Potential) -> f64 {
    (0..state.bond_count()).map(|j| pot.phi(state.bond(j))).sum()
}

/// `H = Σ p²/2 + Σ Φ(q_{j+1} − q_j)`.
pub fn total_energy(state: &LatticeState, pot: &Potential) -> f64 {
    kinetic_energy(state) + potential_energy(state, pot)
}

/// `H / N`.
pub fn specific_energy(state: &LatticeState, pot: &Potential) -> f64 {
    total_energy(state, pot) / state.n() as f64
}

/// The quadratic part of `H`, i.e. the energy of the harmonic chain.
pub fn harmonic_energy(state: &LatticeState) -> f64 {
    total_energy(state, &Potential::Harmonic)
}

/// How the phases of a mode packet are chosen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseRule {
    Random,
    Coherent(f64),
}

/// Recipe for an initial state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum InitialData {
    /// Lowest mode with harmonic specific energy `epsilon`; `phase = π/4` is
    /// a purely left-travelling wave, `phase = 0` a standing wave.
    SineWave {
        epsilon: f64,
        #[serde(default)]
        phase: f64,
    },
    /// The lowest `⌊fraction · n/2⌋` modes (at least one) each carry
    /// harmonic energy `mode_energy`.
    ModePacket {
        fraction: f64,
        mode_energy: f64,
        phases: PhaseRule,
        #[serde(default)]
        seed: u64,
    },
    /// A draw from the canonical measure `e^{−bH}` restricted to zero total
    /// momentum and zero total stretch.
    Gibbs {
        inverse_temperature: f64,
        #[serde(default)]
        seed: u64,
    },
}

impl InitialData {
    pub fn validate(&self) -> Result<()> {
        match *self {
            InitialData::SineWave { epsilon, phase } => {
                if !(epsilon >= 0.0 && epsilon.is_finite()) {
                    return Err(Error::invalid("epsilon", "must be finite and >= 0"));
                }
                if !phase.is_finite() {
                    return Err(Error::invalid("phase", "must be finite"));
                }
            }
            InitialData::ModePacket {
                fraction,
                mode_energy,
                phases,
                ..
            } => {
                if !(fraction > 0.0 && fraction <= 1.0) {
                    return Err(Error::invalid(
                        "fraction",
                        format!("packet fraction must lie in (0, 1], got {fraction}"),
                    ));
                }
                if !(mode_energy >= 0.0 && mode_energy.is_finite()) {
                    return Err(Error::invalid("mode_energy", "must be finite and >= 0"));
                }
                if let PhaseRule::Coherent(v) = phases {
                    if !v.is_finite() {
                        return Err(Error::invalid("phases", "coherent phase must be finite"));
                    }
                }
            }
            InitialData::Gibbs {
                inverse_temperature,
                ..
            } => {
                if !(inverse_temperature > 0.0 && inverse_temperature.is_finite()) {
                    return Err(Error::invalid(
                        "inverse_temperature",
                        format!("must be > 0, got {inverse_temperature}"),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Number of modes excited by a packet of the given fraction.
pub fn packet_mode_count(fraction: f64, n: usize) -> usize {
    (((fraction * (n / 2) as f64) + 1e-9).floor() as usize).clamp(1, n / 2)
}

/// Builds the initial state described by `spec`. Deterministic in the seed.
pub fn build_initial(
    spec: &InitialData,
    n: usize,
    boundary: Boundary,
    pot: &Potential,
) -> Result<LatticeState> {
    check_size(n)?;
    spec.validate()?;
    pot.validate()?;
    match (*spec, boundary) {
        (InitialData::SineWave { epsilon, phase }, Boundary::Periodic) => {
            Ok(sine_wave_periodic(n, epsilon, phase))
        }
        (InitialData::SineWave { epsilon, phase }, Boundary::Fixed) => {
            Ok(sine_wave_fixed(n, epsilon, phase))
        }
        (
            InitialData::ModePacket {
                fraction,
                mode_energy,
                phases,
                seed,
            },
            _,
        ) => {
            let count = packet_mode_count(fraction, n);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let angles: Vec<f64> = (0..count)
                .map(|_| match phases {
                    PhaseRule::Random => rng.random_range(0.0..2.0 * PI),
                    PhaseRule::Coherent(v) => v,
                })
                .collect();
            match boundary {
                Boundary::Periodic => Ok(mode_packet_periodic(n, mode_energy, &angles)),
                Boundary::Fixed => Ok(mode_packet_fixed(n, mode_energy, &angles)),
            }
        }
        (InitialData::Gibbs { .. }, Boundary::Fixed) => Err(Error::invalid(
            "boundary",
            "Gibbs initial data is defined for periodic chains only",
        )),
        (
            InitialData::Gibbs {
                inverse_temperature,
                seed,
            },
            Boundary::Periodic,
        ) => {
            let sampler = GibbsSampler::new(*pot, inverse_temperature)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            sampler.sample_state(n, &mut rng)
        }
    }
}

impl InitialData {
    /// The same recipe with its energy scale (`epsilon` or `mode_energy`)
    /// replaced. Gibbs data have no such scale.
    pub fn with_energy_scale(&self, scale: f64) -> Result<InitialData> {
        match *self {
            InitialData::SineWave { phase, .. } => Ok(InitialData::SineWave {
                epsilon: scale,
                phase,
            }),
            InitialData::ModePacket {
                fraction,
                phases,
                seed,
                ..
            } => Ok(InitialData::ModePacket {
                fraction,
                mode_energy: scale,
                phases,
                seed,
            }),
            InitialData::Gibbs { .. } => Err(Error::invalid(
                "initial",
                "Gibbs data are set by their inverse temperature",
            )),
        }
    }

    fn energy_scale(&self) -> Option<f64> {
        match *self {
            InitialData::SineWave { epsilon, .. } => Some(epsilon),
            InitialData::ModePacket { mode_energy, .. } => Some(mode_energy),
            InitialData::Gibbs { .. } => None,
        }
    }
}

/// Rescales a deterministic datum so that its full specific energy `H/N`
/// under `pot` equals `target`, by bisection on the harmonic energy scale.
/// Fails if `H/N` is not increasing across the bracket.
pub fn calibrate_specific_energy(
    spec: &InitialData,
    n: usize,
    boundary: Boundary,
    pot: &Potential,
    target: f64,
) -> Result<(InitialData, LatticeState)> {
    if !(target > 0.0) || !target.is_finite() {
        return Err(Error::invalid("target_specific_energy", "must be positive and finite"));
    }
    let start = spec
        .energy_scale()
        .ok_or_else(|| Error::invalid("initial", "Gibbs data cannot be calibrated"))?;
    let energy = |s: f64| -> Result<f64> {
        let d = spec.with_energy_scale(s)?;
        Ok(specific_energy(&build_initial(&d, n, boundary, pot)?, pot))
    };
    let (mut lo, mut hi) = (0.0f64, start.max(f64::MIN_POSITIVE));
    let mut doublings = 0;
    while energy(hi)? < target {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 200 {
            return Err(Error::invalid("target_specific_energy", "not reachable"));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if energy(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let scale = 0.5 * (lo + hi);
    let got = energy(scale)?;
    if (got - target).abs() > 1e-9 * target {
        return Err(Error::invalid(
            "target_specific_energy",
            format!("H/N is not monotone in the energy scale (reached {got})"),
        ));
    }
    let datum = spec.with_energy_scale(scale)?;
    let state = build_initial(&datum, n, boundary, pot)?;
    Ok((datum, state))
}

/// Frequency of mode 1 of the periodic chain, `2 sin(π/n)`.
fn omega1(n: usize) -> f64 {
    spectral::omega(1, n)
}

fn sine_wave_periodic(n: usize, epsilon: f64, phase: f64) -> LatticeState {
    let nf = n as f64;
    let amp = nf * epsilon.sqrt() / PI;
    let w1 = omega1(n);
    let q = (0..n)
        .map(|j| amp * phase.cos() * (2.0 * PI * j as f64 / nf).sin())
        .collect();
    let p = (0..n)
        .map(|j| w1 * amp * phase.sin() * (2.0 * PI * j as f64 / nf).cos())
        .collect();
    LatticeState {
        q,
        p,
        t: 0.0,
        boundary: Boundary::Periodic,
    }
}

/// Fixed chain: the same datum read on the odd extension of length
/// `2(n − 1)`, with the momentum profile taken as a sine so that the ends
/// stay pinned.
fn sine_wave_fixed(n: usize, epsilon: f64, phase: f64) -> LatticeState {
    let m = 2 * (n - 1);
    let mf = m as f64;
    let amp = mf * epsilon.sqrt() / PI;
    let w1 = spectral::omega(1, m);
    let profile = |j: usize| (2.0 * PI * j as f64 / mf).sin();
    let q = (0..n).map(|j| amp * phase.cos() * profile(j)).collect();
    let p = (0..n).map(|j| w1 * amp * phase.sin() * profile(j)).collect();
    let mut state = LatticeState {
        q,
        p,
        t: 0.0,
        boundary: Boundary::Fixed,
    };
    state.pin_ends();
    state
}

fn mode_packet_periodic(n: usize, mode_energy: f64, angles: &[f64]) -> LatticeState {
    let mut q_hat = vec![Complex64::new(0.0, 0.0); n];
    let mut p_hat = vec![Complex64::new(0.0, 0.0); n];
    for (i, &phi) in angles.iter().enumerate() {
        let k = i + 1;
        let w = spectral::omega(k, n);
        // A self-conjugate pair carries E_k + E_{n−k} = p̂² + ω²q̂²; the
        // Nyquist mode stands alone and carries half of that.
        let e = if 2 * k == n { 2.0 * mode_energy } else { mode_energy };
        let qk = Complex64::new(e.sqrt() * phi.sin() / w, 0.0);
        let pk = Complex64::new(e.sqrt() * phi.cos(), 0.0);
        q_hat[k] = qk;
        p_hat[k] = pk;
        q_hat[n - k] = qk;
        p_hat[n - k] = pk;
    }
    let q = spectral::idft(&q_hat).iter().map(|c| c.re).collect();
    let p = spectral::idft(&p_hat).iter().map(|c| c.re).collect();
    LatticeState {
        q,
        p,
        t: 0.0,
        boundary: Boundary::Periodic,
    }
}

fn mode_packet_fixed(n: usize, mode_energy: f64, angles: &[f64]) -> LatticeState {
    // Sine mode k of a fixed chain with L = n − 1 bonds carries
    // L (b² + ω_k² a²)/4 with ω_k = 2 sin(πk/2L).
    let bonds = n - 1;
    let lf = bonds as f64;
    let mut q = vec![0.0; n];
    let mut p = vec![0.0; n];
    for (i, &phi) in angles.iter().enumerate().take(bonds - 1) {
        let k = i + 1;
        let w = spectral::omega(k, 2 * bonds);
        let b = (4.0 * mode_energy / lf).sqrt() * phi.cos();
        let a = (4.0 * mode_energy / lf).sqrt() * phi.sin() / w;
        for j in 0..n {
            let s = (PI * (k * j) as f64 / lf).sin();
            q[j] += a * s;
            p[j] += b * s;
        }
    }
    let mut state = LatticeState {
        q,
        p,
        t: 0.0,
        boundary: Boundary::Fixed,
    };
    state.pin_ends();
    state
}

/// Rejection sampler for the bond-stretch marginal `∝ e^{−bΦ(r)}`.
///
/// The proposal is a Cauchy law of scale `2/√b` centred at zero, which
/// dominates every confining potential supported here (including the Toda
/// potential, whose growth is only linear on one side). The envelope constant
/// is found by scanning the log-ratio on a grid and polishing the best point.
#[derive(Clone, Debug)]
pub struct GibbsSampler {
    pot: Potential,
    beta: f64,
    scale: f64,
    log_bound: f64,
}

impl GibbsSampler {
    pub fn new(pot: Potential, inverse_temperature: f64) -> Result<Self> {
        if !(inverse_temperature > 0.0 && inverse_temperature.is_finite()) {
            return Err(Error::invalid(
                "inverse_temperature",
                format!("must be > 0, got {inverse_temperature}"),
            ));
        }
        pot.validate()?;
        if !pot.is_confining() {
            return Err(Error::invalid(
                "potential",
                "Gibbs measure is not normalizable for this potential",
            ));
        }
        let scale = 2.0 / inverse_temperature.sqrt();
        let mut sampler = GibbsSampler {
            pot,
            beta: inverse_temperature,
            scale,
            log_bound: 0.0,
        };
        sampler.log_bound = sampler.envelope()?;
        Ok(sampler)
    }

    pub fn inverse_temperature(&self) -> f64 {
        self.beta
    }

    pub fn potential(&self) -> &Potential {
        &self.pot
    }

    fn log_ratio(&self, r: f64) -> f64 {
        let u = r / self.scale;
        -self.beta * self.pot.phi(r) + u.mul_add(u, 1.0).ln()
    }

    fn envelope(&self) -> Result<f64> {
        const POINTS: usize = 8001;
        let mut half_width = 20.0 * self.scale;
        for _ in 0..24 {
            let h = 2.0 * half_width / (POINTS - 1) as f64;
            let (mut best_i, mut best) = (0, f64::NEG_INFINITY);
            for i in 0..POINTS {
                let g = self.log_ratio(-half_width + i as f64 * h);
                if g > best {
                    best = g;
                    best_i = i;
                }
            }
            let edge = self
                .log_ratio(-half_width)
                .max(self.log_ratio(half_width));
            if edge < best - 40.0 && best_i > 0 && best_i < POINTS - 1 {
                let x0 = -half_width + best_i as f64 * h;
                let polished = golden_max(|r| self.log_ratio(r), x0 - h, x0 + h);
                return Ok(best.max(self.log_ratio(polished)) + 0.05);
            }
            half_width *= 2.0;
        }
        Err(Error::invalid(
            "potential",
            "could not bound the Gibbs density; measure looks non-normalizable",
        ))
    }

    /// One bond stretch drawn from `∝ e^{−bΦ(r)}`.
    pub fn sample_bond<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        loop {
            let u: f64 = rng.random_range(-0.5..0.5);
            let r = self.scale * (PI * u).tan();
            let accept = self.log_ratio(r) - self.log_bound;
            debug_assert!(accept <= 0.0, "envelope violated at r = {r}");
            let v: f64 = rng.random();
            if v.ln() < accept {
                return r;
            }
        }
    }

    /// A periodic state with i.i.d. Gaussian momenta of variance `1/b` and
    /// i.i.d. bond stretches, both projected onto zero sum. The projection
    /// leaves each `p_j` and `r_j` with variance `(1 − 1/n)/b`; the Fourier
    /// modes `k ≥ 1` are untouched and keep mean energy `1/b`.
    pub fn sample_state<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<LatticeState> {
        check_size(n)?;
        let normal = Normal::new(0.0, 1.0 / self.beta.sqrt())
            .map_err(|e| Error::invalid("inverse_temperature", e.to_string()))?;
        let mut p: Vec<f64> = (0..n).map(|_| normal.sample(rng)).collect();
        let mut r: Vec<f64> = (0..n).map(|_| self.sample_bond(rng)).collect();
        subtract_mean(&mut p);
        subtract_mean(&mut r);
        let mut q = vec![0.0; n];
        for j in 1..n {
            q[j] = q[j - 1] + r[j - 1];
        }
        subtract_mean(&mut q);
        LatticeState::new(q, p, Boundary::Periodic)
    }
}

/// Convenience: a standard-normal draw, used by tests and examples that
/// perturb states.
pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

fn subtract_mean(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= mean);
}

/// Golden-section search for a maximum of a unimodal `f` on `[lo, hi]`.
pub(crate) fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if (hi - lo).abs() <= 1e-15 * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn phi_prime_vanishes_at_equilibrium() {
        for pot in [
            Potential::Harmonic,
            Potential::fput(0.25, 0.001),
            Potential::fput_quintic(1.0, 0.5, 0.3),
            Potential::Toda { a: 0.25, b: 2.0 },
        ] {
            assert_eq!(pot.phi_prime(0.0), 0.0);
            assert_eq!(pot.phi(0.0), 0.0);
        }
    }

    #[test]
    fn harmonic_tension_is_linear() {
        for z in [-1.0, 0.5, 2.0] {
            assert_eq!(Potential::Harmonic.phi_prime(z), z);
            assert_eq!(Potential::fput(0.0, 0.0).phi_prime(z), z);
        }
    }

    #[test]
    fn toda_tension_value() {
        // 0.25 · 2 · (1 − e^{−0.2}) to 30 digits.
        let expected = 0.090_634_623_461_009_07;
        let got = Potential::Toda { a: 0.25, b: 2.0 }.phi_prime(0.1);
        assert_relative_eq!(got, expected, max_relative = 1e-15);
    }

    #[test]
    fn toda_requires_positive_a_and_nonzero_b() {
        assert!(Potential::toda(0.0, 1.0).is_err());
        assert!(Potential::toda(1.0, 0.0).is_err());
        assert!(Potential::toda(1.0, -1.0).is_ok());
    }

    #[test]
    fn tangent_params_alpha_one() {
        let t = toda_tangent_params(1.0).unwrap();
        assert_eq!(t.a, 0.25);
        assert_eq!(t.b.abs(), 2.0);
        assert_relative_eq!(t.beta_t, 2.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(t.gamma_t, 1.0 / 3.0, max_relative = 1e-15);
    }

    #[test]
    fn tangent_params_alpha_quarter() {
        let t = toda_tangent_params(0.25).unwrap();
        assert_eq!(t.a, 4.0);
        assert_eq!(t.b.abs(), 0.5);
        assert_relative_eq!(t.beta_t, 1.0 / 24.0, max_relative = 1e-15);
        assert_relative_eq!(t.gamma_t, 1.0 / 192.0, max_relative = 1e-15);
    }

    #[test]
    fn tangent_params_reject_beta_model() {
        assert!(matches!(
            toda_tangent_params(0.0),
            Err(Error::TodaTangencyUndefined)
        ));
    }

    #[test]
    fn tangent_toda_matches_fput_through_cubic_order() {
        for alpha in [1.0, 0.25, -0.7] {
            let t = toda_tangent_params(alpha).unwrap();
            let z = 1e-3;
            let residual = t.potential().phi(z) - z * z / 2.0 - alpha * z.powi(3) / 3.0;
            // Remaining term is β_T z⁴/4 = α² z⁴/6.
            assert!(residual.abs() < 1e-12, "alpha {alpha}: residual {residual}");
            assert_relative_eq!(residual, alpha * alpha * z.powi(4) / 6.0, max_relative = 1e-2);
        }
    }

    #[test]
    fn tangent_coefficients_match_beta_t_gamma_t() {
        let t = toda_tangent_params(0.6).unwrap();
        let (a3, b4, g5) = t.potential().fput_coefficients();
        assert_relative_eq!(a3, 0.6, max_relative = 1e-14);
        assert_relative_eq!(b4, t.beta_t, max_relative = 1e-14);
        assert_relative_eq!(g5, t.gamma_t, max_relative = 1e-14);
    }

    #[test]
    fn translation_gives_zero_forces() {
        let state = LatticeState::new(vec![0.7; 8], vec![0.0; 8], Boundary::Periodic).unwrap();
        for pot in [Potential::fput(0.25, 0.1), Potential::Toda { a: 0.25, b: 2.0 }] {
            assert!(forces(&state, &pot).iter().all(|f| *f == 0.0));
        }
    }

    #[test]
    fn four_site_harmonic_forces() {
        // F_j = q_{j+1} + q_{j−1} − 2q_j by hand for q = (0, a, 0, −a).
        let a = 0.3;
        let state =
            LatticeState::new(vec![0.0, a, 0.0, -a], vec![0.0; 4], Boundary::Periodic).unwrap();
        let f = forces(&state, &Potential::Harmonic);
        let expected = [0.0, -2.0 * a, 0.0, 2.0 * a];
        for (got, want) in f.iter().zip(expected) {
            assert_relative_eq!(*got, want, epsilon = 1e-15);
        }
    }

    #[test]
    fn fixed_forces_vanish_at_ends() {
        let mut state =
            LatticeState::new(vec![0.0, 0.2, -0.1, 0.3, 0.0, 0.0], vec![0.0; 6], Boundary::Fixed)
                .unwrap();
        state.q[4] = 0.4;
        let f = forces(&state, &Potential::fput(1.0, 1.0));
        assert_eq!(f[0], 0.0);
        assert_eq!(f[5], 0.0);
    }

    #[test]
    fn energy_of_simple_states() {
        let rest = LatticeState::at_rest(16, Boundary::Periodic).unwrap();
        assert_eq!(total_energy(&rest, &Potential::fput(0.25, 0.1)), 0.0);
        assert_eq!(total_energy(&rest, &Potential::Toda { a: 0.25, b: 2.0 }), 0.0);
        let mut kicked = rest.clone();
        kicked.p[0] = 1.0;
        assert_eq!(total_energy(&kicked, &Potential::fput(0.25, 0.1)), 0.5);
    }

    #[test]
    fn sine_wave_specific_energy_close_to_label() {
        let pot = Potential::fput(0.25, 0.001);
        let spec = InitialData::SineWave {
            epsilon: 0.0022,
            phase: 0.0,
        };
        let state = build_initial(&spec, 64, Boundary::Periodic, &pot).unwrap();
        assert!(state.p.iter().all(|p| *p == 0.0));
        let eps = specific_energy(&state, &pot);
        assert!((eps / 0.0022 - 1.0).abs() < 0.05, "measured ε = {eps}");
    }

    #[test]
    fn sine_wave_matches_closed_form() {
        let (n, eps, phi) = (32, 0.01, 0.3);
        let spec = InitialData::SineWave {
            epsilon: eps,
            phase: phi,
        };
        let state = build_initial(&spec, n, Boundary::Periodic, &Potential::Harmonic).unwrap();
        let nf = n as f64;
        let w1 = 2.0 * (PI / nf).sin();
        for j in 0..n {
            let x = 2.0 * PI * j as f64 / nf;
            let q = nf * eps.sqrt() / PI * phi.cos() * x.sin();
            let p = w1 * nf * eps.sqrt() / PI * phi.sin() * x.cos();
            assert_eq!(state.q[j], q);
            assert_eq!(state.p[j], p);
        }
    }

    #[test]
    fn rejects_bad_initial_specs() {
        let pot = Potential::Harmonic;
        let gibbs = InitialData::Gibbs {
            inverse_temperature: 0.0,
            seed: 1,
        };
        assert!(build_initial(&gibbs, 16, Boundary::Periodic, &pot).is_err());
        for fraction in [0.0, 1.5, -0.1] {
            let packet = InitialData::ModePacket {
                fraction,
                mode_energy: 1.0,
                phases: PhaseRule::Random,
                seed: 0,
            };
            assert!(build_initial(&packet, 16, Boundary::Periodic, &pot).is_err());
        }
        assert!(LatticeState::at_rest(7, Boundary::Periodic).is_err());
        assert!(LatticeState::at_rest(2, Boundary::Periodic).is_err());
    }

    #[test]
    fn gibbs_rejects_open_potentials() {
        assert!(GibbsSampler::new(Potential::fput(0.25, 0.0), 10.0).is_err());
        assert!(GibbsSampler::new(Potential::fput_quintic(0.0, 1.0, 0.1), 10.0).is_err());
        assert!(GibbsSampler::new(Potential::fput(1.0, 0.4), 10.0).is_ok());
        assert!(GibbsSampler::new(Potential::Toda { a: 0.25, b: -2.0 }, 10.0).is_ok());
    }

    #[test]
    fn gibbs_state_obeys_constraints() {
        let spec = InitialData::Gibbs {
            inverse_temperature: 10.0,
            seed: 7,
        };
        let pot = Potential::fput(1.0, 0.4);
        let state = build_initial(&spec, 32, Boundary::Periodic, &pot).unwrap();
        assert!(state.total_momentum().abs() < 1e-13);
        let stretch: f64 = (0..32).map(|j| state.bond(j)).sum();
        assert!(stretch.abs() < 1e-13);
        let again = build_initial(&spec, 32, Boundary::Periodic, &pot).unwrap();
        assert_eq!(state, again);
    }

    #[test]
    fn odd_extension_round_trip() {
        let state = LatticeState::new(
            vec![0.0, 0.1, -0.2, 0.05, 0.3, 0.0],
            vec![0.0, 0.4, 0.1, -0.3, 0.2, 0.0],
            Boundary::Fixed,
        )
        .unwrap();
        let ext = state.odd_extension();
        assert_eq!(ext.n(), 10);
        assert_eq!(ext.restrict_odd_extension().unwrap(), state);
    }

    #[test]
    fn series_branch_of_toda_potential_is_continuous() {
        let x = 0.1f64;
        let direct = x.exp_m1() - x;
        let below = exp_minus_one_plus_x(x * (1.0 - 1e-12));
        assert_relative_eq!(direct, below, max_relative = 1e-10);
    }

    #[test]
    fn calibration_hits_target_specific_energy() {
        let pot = Potential::fput(1.0, 0.1);
        let datum = InitialData::SineWave {
            epsilon: 1.0,
            phase: 0.0,
        };
        let (scaled, state) =
            calibrate_specific_energy(&datum, 32, Boundary::Periodic, &pot, 22.0).unwrap();
        assert_relative_eq!(specific_energy(&state, &pot), 22.0, max_relative = 1e-9);
        let rebuilt = build_initial(&scaled, 32, Boundary::Periodic, &pot).unwrap();
        assert_eq!(rebuilt, state);
        assert!(matches!(scaled, InitialData::SineWave { epsilon, .. } if epsilon < 22.0));
    }

    #[test]
    fn calibration_rejects_gibbs_data() {
        let datum = InitialData::Gibbs {
            inverse_temperature: 1.0,
            seed: 0,
        };
        let pot = Potential::fput(0.0, 1.0);
        assert!(calibrate_specific_energy(&datum, 16, Boundary::Periodic, &pot, 1.0).is_err());
    }
}
