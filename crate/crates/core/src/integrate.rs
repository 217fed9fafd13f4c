//! Symplectic time stepping with snapshot observers.
//!
//! Both schemes are kick-drift-kick splittings of `H = T(p) + V(q)`; the
//! fourth-order scheme is the Yoshida triple composition of the second-order
//! one. Forces at the end of a step are cached and reused by the next.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{forces_of, total_energy, LatticeState, Potential};

/// Any coordinate or momentum beyond this magnitude counts as blow-up.
pub const BLOW_UP_LIMIT: f64 = 1e8;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    Verlet2,
    Yoshida4,
}

impl Scheme {
    /// Substep weights of one step, in units of `dt`.
    pub fn weights(&self) -> &'static [f64] {
        const VERLET: [f64; 1] = [1.0];
        // w1 = 1/(2 − 2^{1/3}), w0 = 1 − 2 w1
        const W1: f64 = 1.351_207_191_959_657_8;
        const W0: f64 = -1.702_414_383_919_315_5;
        const YOSHIDA: [f64; 3] = [W1, W0, W1];
        match self {
            Scheme::Verlet2 => &VERLET,
            Scheme::Yoshida4 => &YOSHIDA,
        }
    }

    pub fn order(&self) -> u32 {
        match self {
            Scheme::Verlet2 => 2,
            Scheme::Yoshida4 => 4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSpec {
    #[serde(default)]
    pub scheme: Scheme,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "default_stride")]
    pub record_stride: u64,
}

fn default_stride() -> u64 {
    1
}

impl IntegratorSpec {
    pub fn new(scheme: Scheme, dt: f64, t_end: f64, record_stride: u64) -> Self {
        IntegratorSpec {
            scheme,
            dt,
            t_end,
            record_stride,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid("dt", format!("must be > 0, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::invalid(
                "t_end",
                format!("must be finite and >= 0, got {}", self.t_end),
            ));
        }
        if self.record_stride == 0 {
            return Err(Error::invalid("record_stride", "must be >= 1"));
        }
        Ok(())
    }

    /// Number of steps, `round(t_end / dt)`.
    pub fn steps(&self) -> u64 {
        (self.t_end / self.dt).round() as u64
    }
}

/// Advances a state in place, keeping the force at the current positions.
#[derive(Clone, Debug)]
pub struct Stepper {
    pot: Potential,
    scheme: Scheme,
    force: Vec<f64>,
    fresh: bool,
}

impl Stepper {
    pub fn new(pot: Potential, scheme: Scheme) -> Self {
        Stepper {
            pot,
            scheme,
            force: Vec::new(),
            fresh: false,
        }
    }

    /// Forget cached forces, e.g. after the caller edits the state.
    pub fn invalidate(&mut self) {
        self.fresh = false;
    }

    /// One step of size `dt` (negative `dt` runs the flow backwards).
    pub fn advance(&mut self, state: &mut LatticeState, dt: f64) {
        let n = state.n();
        if !self.fresh || self.force.len() != n {
            self.force.resize(n, 0.0);
            forces_of(&state.q, state.boundary, &self.pot, &mut self.force);
            self.fresh = true;
        }
        for &w in self.scheme.weights() {
            let h = w * dt;
            for (p, f) in state.p.iter_mut().zip(&self.force) {
                *p += 0.5 * h * f;
            }
            for (q, p) in state.q.iter_mut().zip(&state.p) {
                *q += h * p;
            }
            forces_of(&state.q, state.boundary, &self.pot, &mut self.force);
            for (p, f) in state.p.iter_mut().zip(&self.force) {
                *p += 0.5 * h * f;
            }
        }
        state.t += dt;
    }
}

fn blown_up(state: &LatticeState) -> bool {
    state
        .q
        .iter()
        .chain(&state.p)
        .any(|x| !(x.abs() <= BLOW_UP_LIMIT))
}

/// One step of `scheme` from `state`; pure.
pub fn step(state: &LatticeState, pot: &Potential, dt: f64, scheme: Scheme) -> Result<LatticeState> {
    let mut next = state.clone();
    Stepper::new(*pot, scheme).advance(&mut next, dt);
    if blown_up(&next) {
        return Err(Error::BlowUp {
            step: 1,
            time: next.t,
        });
    }
    Ok(next)
}

/// Quantities computed at every snapshot.
pub trait Observer {
    fn columns(&self) -> Vec<String>;
    fn observe(&mut self, state: &LatticeState, pot: &Potential) -> Vec<f64>;
}

/// Snapshots of a run: times, energy and observer columns.
#[derive(Clone, Debug)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub final_state: LatticeState,
}

impl TrajectoryRecord {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let i = self.column_index(name)?;
        Ok(self.rows.iter().map(|r| r[i]).collect())
    }
}

/// Integrates `state` per `spec`, calling `on_snapshot` at step 0, every
/// `record_stride` steps, and at the final step.
pub fn drive(
    mut state: LatticeState,
    pot: &Potential,
    spec: &IntegratorSpec,
    mut on_snapshot: impl FnMut(&LatticeState) -> Result<()>,
) -> Result<LatticeState> {
    spec.validate()?;
    pot.validate()?;
    let steps = spec.steps();
    let t0 = state.t;
    let mut stepper = Stepper::new(*pot, spec.scheme);
    on_snapshot(&state)?;
    for s in 1..=steps {
        stepper.advance(&mut state, spec.dt);
        // Keep times on the exact grid t0 + s·dt rather than accumulating.
        state.t = t0 + s as f64 * spec.dt;
        if blown_up(&state) {
            return Err(Error::BlowUp {
                step: s,
                time: state.t,
            });
        }
        if s % spec.record_stride == 0 || s == steps {
            on_snapshot(&state)?;
        }
    }
    Ok(state)
}

fn observer_columns(observers: &[&mut dyn Observer]) -> Vec<String> {
    observers.iter().flat_map(|o| o.columns()).collect()
}

/// Integrates and keeps every snapshot in memory.
pub fn run(
    state: LatticeState,
    pot: &Potential,
    spec: &IntegratorSpec,
    observers: &mut [&mut dyn Observer],
) -> Result<TrajectoryRecord> {
    let columns = observer_columns(observers);
    let mut times = Vec::new();
    let mut energy = Vec::new();
    let mut rows = Vec::new();
    let final_state = drive(state, pot, spec, |s| {
        times.push(s.t);
        energy.push(total_energy(s, pot));
        let mut row = Vec::with_capacity(columns.len());
        for o in observers.iter_mut() {
            row.extend(o.observe(s, pot));
        }
        rows.push(row);
        Ok(())
    })?;
    Ok(TrajectoryRecord {
        times,
        energy,
        columns,
        rows,
        final_state,
    })
}

/// Shortest decimal string that parses back to exactly `v`, switching to
/// exponent notation for very large or small magnitudes.
pub fn format_value(v: f64) -> String {
    format!("{v:?}")
}

/// Integrates and streams one CSV row per snapshot (`t,H,<observer
/// columns>`) to `out`. Returns the final state.
pub fn run_streaming<W: Write>(
    state: LatticeState,
    pot: &Potential,
    spec: &IntegratorSpec,
    observers: &mut [&mut dyn Observer],
    out: W,
) -> Result<LatticeState> {
    let mut header = vec!["t".to_string(), "H".to_string()];
    header.extend(observer_columns(observers));
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(&header)?;
    let final_state = drive(state, pot, spec, |s| {
        let mut row = vec![format_value(s.t), format_value(total_energy(s, pot))];
        for o in observers.iter_mut() {
            row.extend(o.observe(s, pot).into_iter().map(format_value));
        }
        writer.write_record(&row)?;
        Ok(())
    })?;
    writer
        .flush()
        .map_err(|e| Error::io("<stream>", e))?;
    Ok(final_state)
}

/// `max_t |H(t) − H(0)| / |H(0)|`.
pub fn energy_drift(record: &TrajectoryRecord) -> Result<f64> {
    relative_drift(&record.energy)
}

/// `max_i |x_i − x_0| / |x_0|` for any series.
pub fn relative_drift(series: &[f64]) -> Result<f64> {
    let first = *series.first().ok_or(Error::EmptyInput("energy series"))?;
    if first == 0.0 {
        return Err(Error::UndefinedDrift);
    }
    Ok(series
        .iter()
        .map(|h| ((h - first) / first).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_initial, Boundary, InitialData};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fixed_chain_follows_its_odd_periodic_extension() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 18;
        let mut q: Vec<f64> = (0..n).map(|_| rng.random_range(-0.3..0.3)).collect();
        let mut p: Vec<f64> = (0..n).map(|_| rng.random_range(-0.3..0.3)).collect();
        for v in [&mut q, &mut p] {
            v[0] = 0.0;
            v[n - 1] = 0.0;
        }
        let fixed = LatticeState::new(q, p, Boundary::Fixed).unwrap();
        let pot = Potential::fput_quintic(0.7, 0.4, 0.1);
        for scheme in [Scheme::Verlet2, Scheme::Yoshida4] {
            let spec = IntegratorSpec::new(scheme, 0.05, 50.0, 1000);
            let direct = drive(fixed.clone(), &pot, &spec, |_| Ok(())).unwrap();
            let periodic = drive(fixed.odd_extension(), &pot, &spec, |_| Ok(())).unwrap();
            let back = periodic.restrict_odd_extension().unwrap();
            for (a, b) in direct.q.iter().chain(&direct.p).zip(back.q.iter().chain(&back.p)) {
                assert!((a - b).abs() < 1e-12, "{scheme:?}: {a} vs {b}");
            }
        }
    }

    fn random_state(n: usize, amp: f64, seed: u64) -> LatticeState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = (0..n).map(|_| amp * rng.random_range(-1.0..1.0)).collect();
        let p = (0..n).map(|_| amp * rng.random_range(-1.0..1.0)).collect();
        LatticeState::new(q, p, Boundary::Periodic).unwrap()
    }

    #[test]
    fn yoshida_weights() {
        let w1 = 1.0 / (2.0 - 2f64.powf(1.0 / 3.0));
        let w = Scheme::Yoshida4.weights();
        assert_relative_eq!(w[0], w1, max_relative = 1e-15);
        assert_relative_eq!(w[1], 1.0 - 2.0 * w1, max_relative = 1e-15);
        assert_relative_eq!(w.iter().sum::<f64>(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn equilibrium_is_fixed() {
        let rest = LatticeState::at_rest(8, Boundary::Periodic).unwrap();
        for scheme in [Scheme::Verlet2, Scheme::Yoshida4] {
            let next = step(&rest, &Potential::fput(0.25, 0.1), 0.1, scheme).unwrap();
            assert_eq!(next.q, rest.q);
            assert_eq!(next.p, rest.p);
        }
    }

    #[test]
    fn verlet_is_reversible() {
        let pot = Potential::fput(0.25, 0.1);
        let start = random_state(16, 0.3, 3);
        let mut state = start.clone();
        let mut stepper = Stepper::new(pot, Scheme::Verlet2);
        for _ in 0..1000 {
            stepper.advance(&mut state, 0.05);
        }
        stepper.invalidate();
        for _ in 0..1000 {
            stepper.advance(&mut state, -0.05);
        }
        let dq = state
            .q
            .iter()
            .zip(&start.q)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(dq <= 1e-10, "max |Δq| = {dq}");
    }

    #[test]
    fn harmonic_mode_returns_after_one_period() {
        // A standing wave in mode k of the periodic harmonic chain has
        // period 2π/ω_k.
        let n = 16;
        let k = 3;
        let w = 2.0 * (std::f64::consts::PI * k as f64 / n as f64).sin();
        let period = 2.0 * std::f64::consts::PI / w;
        let q: Vec<f64> = (0..n)
            .map(|j| 0.1 * (2.0 * std::f64::consts::PI * (k * j) as f64 / n as f64).cos())
            .collect();
        let start = LatticeState::new(q, vec![0.0; n], Boundary::Periodic).unwrap();
        let spec = IntegratorSpec::new(Scheme::Verlet2, period / 1000.0, period, 1000);
        let rec = run(start.clone(), &Potential::Harmonic, &spec, &mut []).unwrap();
        let end = &rec.final_state;
        let err = end
            .q
            .iter()
            .zip(&start.q)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err / 0.1 <= 1e-5, "relative error {}", err / 0.1);
    }

    #[test]
    fn zero_length_run_is_single_snapshot() {
        let start = random_state(8, 0.1, 1);
        let spec = IntegratorSpec::new(Scheme::Verlet2, 0.1, 0.0, 1);
        let rec = run(start.clone(), &Potential::Harmonic, &spec, &mut []).unwrap();
        assert_eq!(rec.times, vec![0.0]);
        assert_eq!(rec.final_state, start);
    }

    #[test]
    fn snapshot_times_are_strictly_increasing_and_include_end() {
        let start = random_state(8, 0.1, 2);
        let spec = IntegratorSpec::new(Scheme::Verlet2, 0.1, 1.05, 4);
        let rec = run(start, &Potential::Harmonic, &spec, &mut []).unwrap();
        assert!(rec.times.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(rec.times.len(), rec.energy.len());
        // round(10.5) = 11 steps: snapshots at 0, 4, 8, 11.
        assert_eq!(rec.times.len(), 4);
        assert_relative_eq!(*rec.times.last().unwrap(), 1.1, epsilon = 1e-12);
    }

    #[test]
    fn rejects_invalid_specs() {
        let start = random_state(8, 0.1, 2);
        for spec in [
            IntegratorSpec::new(Scheme::Verlet2, 0.0, 1.0, 1),
            IntegratorSpec::new(Scheme::Verlet2, -0.1, 1.0, 1),
            IntegratorSpec::new(Scheme::Verlet2, 0.1, 1.0, 0),
        ] {
            assert!(run(start.clone(), &Potential::Harmonic, &spec, &mut []).is_err());
        }
    }

    #[test]
    fn blow_up_reports_step() {
        // A strongly stretched cubic chain escapes over the barrier.
        let mut start = LatticeState::at_rest(8, Boundary::Periodic).unwrap();
        start.q[0] = -3.0;
        let spec = IntegratorSpec::new(Scheme::Verlet2, 0.1, 1e4, 100);
        let err = run(start, &Potential::fput(1.0, 0.0), &spec, &mut []).unwrap_err();
        assert!(matches!(err, Error::BlowUp { .. }), "{err}");
    }

    #[test]
    fn drift_arithmetic() {
        assert_eq!(relative_drift(&[2.0, 2.0, 2.0]).unwrap(), 0.0);
        assert_relative_eq!(relative_drift(&[1.0, 1.001]).unwrap(), 1e-3, max_relative = 1e-12);
        assert!(matches!(relative_drift(&[0.0, 1.0]), Err(Error::UndefinedDrift)));
    }

    #[test]
    fn verlet_drift_is_second_order() {
        let pot = Potential::fput(0.25, 0.0);
        let spec_data = InitialData::SineWave {
            epsilon: 0.002,
            phase: 0.0,
        };
        let start = build_initial(&spec_data, 32, Boundary::Periodic, &pot).unwrap();
        let drift = |dt: f64| {
            let spec = IntegratorSpec::new(Scheme::Verlet2, dt, 200.0, 1);
            energy_drift(&run(start.clone(), &pot, &spec, &mut []).unwrap()).unwrap()
        };
        let ratio = drift(0.1) / drift(0.05);
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn harmonic_verlet_drift_matches_modified_energy() {
        // Verlet conserves p²/2 + (1 − ω²dt²/4) ω²q²/2, so H of a single
        // mode swings by (ω dt)²/4 relative.
        let pot = Potential::Harmonic;
        let datum = InitialData::SineWave {
            epsilon: 0.002,
            phase: 0.0,
        };
        let start = build_initial(&datum, 32, Boundary::Periodic, &pot).unwrap();
        let dt = 0.02;
        let spec = IntegratorSpec::new(Scheme::Verlet2, dt, 1e4, 10);
        let drift = energy_drift(&run(start.clone(), &pot, &spec, &mut []).unwrap()).unwrap();
        let oracle = (crate::spectral::omega(1, 32) * dt).powi(2) / 4.0;
        assert_relative_eq!(drift, oracle, max_relative = 1e-3);
        let spec = IntegratorSpec::new(Scheme::Yoshida4, dt, 1e4, 10);
        let drift = energy_drift(&run(start, &pot, &spec, &mut []).unwrap()).unwrap();
        assert!(drift < 1e-10, "yoshida drift {drift}");
    }

    #[test]
    fn fput_yoshida_drift_budget() {
        let pot = Potential::fput(0.25, 0.0);
        let datum = InitialData::SineWave {
            epsilon: 0.002,
            phase: 0.0,
        };
        let start = build_initial(&datum, 32, Boundary::Periodic, &pot).unwrap();
        let spec = IntegratorSpec::new(Scheme::Yoshida4, 0.02, 1e4, 10);
        let drift = energy_drift(&run(start, &pot, &spec, &mut []).unwrap()).unwrap();
        assert!(drift <= 1e-9, "drift {drift}");
    }

    #[test]
    fn streaming_matches_in_memory_energy() {
        let pot = Potential::fput(0.25, 0.1);
        let start = random_state(8, 0.2, 5);
        let spec = IntegratorSpec::new(Scheme::Yoshida4, 0.05, 2.0, 5);
        let rec = run(start.clone(), &pot, &spec, &mut []).unwrap();
        let mut buf = Vec::new();
        run_streaming(start, &pot, &spec, &mut [], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,H"));
        let energies: Vec<f64> = lines
            .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
            .collect();
        assert_eq!(energies, rec.energy);
    }
}
