//! Hénon integrals of the Toda chain and their drift along FPUT flows.
//!
//! The explicit formulas refer to the unit Toda chain `e^{−z} + z − 1`:
//!
//! ```text
//! J2 = Σ (p_j²/2 + e^{−r_j}),   J3 = −Σ (p_j³/3 + (p_j + p_{j+1}) e^{−r_j})
//! ```
//!
//! with `r_j = q_{j+1} − q_j`. A chain `A(e^{−Bz} + Bz − 1)` is mapped onto
//! the unit chain by `q' = Bq`, `p' = Bp/√(AB²)`; see [`HenonScaling`].

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{run, IntegratorSpec, Observer};
use crate::model::{
    build_initial, specific_energy, toda_tangent_params, Boundary, InitialData, LatticeState,
    Potential,
};

fn require_periodic(state: &LatticeState) -> Result<()> {
    if state.boundary != Boundary::Periodic {
        return Err(Error::invalid("boundary", "Hénon integrals need a periodic chain"));
    }
    Ok(())
}

fn bond_weights(state: &LatticeState) -> Result<Vec<f64>> {
    let w: Vec<f64> = (0..state.n()).map(|j| (-state.bond(j)).exp()).collect();
    if let Some(j) = w.iter().position(|v| !v.is_finite()) {
        return Err(Error::invalid(
            "state",
            format!("e^(-r) overflows at bond {j}"),
        ));
    }
    Ok(w)
}

/// `J2` of the unit Toda chain.
pub fn henon_j2(state: &LatticeState) -> Result<f64> {
    require_periodic(state)?;
    let w = bond_weights(state)?;
    Ok(state
        .p
        .iter()
        .zip(&w)
        .map(|(p, e)| 0.5 * p * p + e)
        .sum())
}

/// `J3` of the unit Toda chain.
pub fn henon_j3(state: &LatticeState) -> Result<f64> {
    require_periodic(state)?;
    let w = bond_weights(state)?;
    let n = state.n();
    let p = &state.p;
    Ok(-(0..n)
        .map(|j| p[j].powi(3) / 3.0 + (p[j] + p[(j + 1) % n]) * w[j])
        .sum::<f64>())
}

/// Maps the variables of a Toda chain `A(e^{−Bz} + Bz − 1)` onto those of
/// the unit chain, where the explicit integrals apply.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HenonScaling {
    pub position: f64,
    pub momentum: f64,
}

impl HenonScaling {
    pub fn identity() -> Self {
        HenonScaling {
            position: 1.0,
            momentum: 1.0,
        }
    }

    pub fn for_toda(a: f64, b: f64) -> Result<Self> {
        Potential::toda(a, b)?;
        Ok(HenonScaling {
            position: b,
            momentum: b / (a * b * b).sqrt(),
        })
    }

    /// Scaling for the Toda chain tangent to FPUT with cubic coefficient `α`.
    pub fn tangent_to(alpha: f64) -> Result<Self> {
        let t = toda_tangent_params(alpha)?;
        Self::for_toda(t.a, t.b)
    }

    pub fn apply(&self, state: &LatticeState) -> LatticeState {
        LatticeState {
            q: state.q.iter().map(|q| q * self.position).collect(),
            p: state.p.iter().map(|p| p * self.momentum).collect(),
            t: state.t,
            boundary: state.boundary,
        }
    }
}

/// Raw traces `tr L^m` of the periodic Lax matrix in Flaschka variables
/// `b_j = p_j/2`, `a_j = e^{−r_j/2}/2`, together with `J2 = 2 tr L²` and
/// `J3 = −(8/3) tr L³`. Higher traces are returned unnormalized.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaxTraces {
    /// `(m, tr L^m)` for `m = 2..=m_max`.
    pub raw: Vec<(u32, f64)>,
    pub j2: f64,
    pub j3: f64,
    /// `(m, scale, offset)` with `J^(m) = scale · tr L^m + offset`.
    pub calibration: Vec<(u32, f64, f64)>,
}

pub const J2_TRACE_SCALE: f64 = 2.0;
pub const J3_TRACE_SCALE: f64 = -8.0 / 3.0;

pub fn lax_matrix(state: &LatticeState) -> Result<DMatrix<f64>> {
    require_periodic(state)?;
    let n = state.n();
    let w = bond_weights(state)?;
    let mut l = DMatrix::zeros(n, n);
    for j in 0..n {
        l[(j, j)] = 0.5 * state.p[j];
        let a = 0.5 * w[j].sqrt();
        let k = (j + 1) % n;
        l[(j, k)] = a;
        l[(k, j)] = a;
    }
    Ok(l)
}

pub fn lax_traces(state: &LatticeState, m_max: u32) -> Result<LaxTraces> {
    if !(2..=8).contains(&m_max) {
        return Err(Error::invalid("m_max", format!("must lie in 2..=8, got {m_max}")));
    }
    let l = lax_matrix(state)?;
    let mut power = &l * &l;
    let mut raw = vec![(2, power.trace())];
    for m in 3..=m_max {
        power = &power * &l;
        raw.push((m, power.trace()));
    }
    let tr3 = match raw.get(1) {
        Some(&(_, t)) => t,
        None => (&power * &l).trace(),
    };
    Ok(LaxTraces {
        j2: J2_TRACE_SCALE * raw[0].1,
        j3: J3_TRACE_SCALE * tr3,
        raw,
        calibration: vec![(2, J2_TRACE_SCALE, 0.0), (3, J3_TRACE_SCALE, 0.0)],
    })
}

/// Records `J2` and `J3` of the scaled state at each snapshot. Overflow of
/// `e^{−r}` is recorded as NaN.
#[derive(Clone, Copy, Debug)]
pub struct HenonObserver {
    pub scaling: HenonScaling,
}

impl HenonObserver {
    pub fn new(scaling: HenonScaling) -> Self {
        HenonObserver { scaling }
    }
}

impl Observer for HenonObserver {
    fn columns(&self) -> Vec<String> {
        vec!["J2".into(), "J3".into()]
    }

    fn observe(&mut self, state: &LatticeState, _pot: &Potential) -> Vec<f64> {
        let s = self.scaling.apply(state);
        vec![
            henon_j2(&s).unwrap_or(f64::NAN),
            henon_j3(&s).unwrap_or(f64::NAN),
        ]
    }
}

/// `d(t) = |J(t) − J(0)| / √N`.
pub fn drift_series(values: &[f64], n: usize) -> Vec<f64> {
    let Some(&first) = values.first() else {
        return Vec::new();
    };
    let norm = (n as f64).sqrt();
    values.iter().map(|v| (v - first).abs() / norm).collect()
}

/// Maximum of [`drift_series`] over the snapshots.
pub fn max_drift(values: &[f64], n: usize) -> f64 {
    drift_series(values, n).into_iter().fold(0.0, f64::max)
}

/// A sweep of the quartic coefficient at fixed cubic coefficient.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaSweepSpec {
    pub alpha: f64,
    pub betas: Vec<f64>,
    pub n: usize,
    /// Initial datum; for stochastic data the seed is replaced per run.
    pub datum: InitialData,
    pub seeds: Vec<u64>,
    pub integrator: IntegratorSpec,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub beta: f64,
    pub max_drift_j2: f64,
    pub max_drift_j3: f64,
    pub t_end: f64,
    /// Measured specific energy of the initial state.
    pub epsilon: f64,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepMedian {
    pub beta: f64,
    pub median_drift_j2: f64,
    pub median_drift_j3: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaSweep {
    pub rows: Vec<SweepRow>,
    pub medians: Vec<SweepMedian>,
    /// β with the smallest median `J3` drift.
    pub argmin_beta: f64,
    pub beta_t: f64,
}

fn with_seed(datum: &InitialData, seed: u64) -> InitialData {
    match *datum {
        InitialData::Gibbs {
            inverse_temperature,
            ..
        } => InitialData::Gibbs {
            inverse_temperature,
            seed,
        },
        InitialData::ModePacket {
            fraction,
            mode_energy,
            phases,
            ..
        } => InitialData::ModePacket {
            fraction,
            mode_energy,
            phases,
            seed,
        },
        other => other,
    }
}

/// Drift of one FPUT(α, β) run measured with the tangent Toda integrals.
pub fn drift_run(
    alpha: f64,
    beta: f64,
    n: usize,
    datum: &InitialData,
    integrator: &IntegratorSpec,
) -> Result<(f64, f64, f64)> {
    let pot = Potential::fput(alpha, beta);
    let state = build_initial(datum, n, Boundary::Periodic, &pot)?;
    let eps = specific_energy(&state, &pot);
    let mut obs = HenonObserver::new(HenonScaling::tangent_to(alpha)?);
    let rec = run(state, &pot, integrator, &mut [&mut obs])?;
    let j2 = rec.column("J2")?;
    let j3 = rec.column("J3")?;
    Ok((max_drift(&j2, n), max_drift(&j3, n), eps))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

/// Runs every `(β, seed)` pair in parallel and tabulates the drifts.
pub fn beta_sweep(spec: &BetaSweepSpec) -> Result<BetaSweep> {
    if spec.betas.is_empty() {
        return Err(Error::EmptyInput("betas"));
    }
    if spec.seeds.is_empty() {
        return Err(Error::EmptyInput("seeds"));
    }
    let tangent = toda_tangent_params(spec.alpha)?;
    let mut betas = spec.betas.clone();
    betas.sort_by(f64::total_cmp);
    let jobs: Vec<(f64, u64)> = betas
        .iter()
        .flat_map(|&b| spec.seeds.iter().map(move |&s| (b, s)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(beta, seed)| {
            let datum = with_seed(&spec.datum, seed);
            let (d2, d3, eps) = drift_run(spec.alpha, beta, spec.n, &datum, &spec.integrator)?;
            Ok(SweepRow {
                beta,
                max_drift_j2: d2,
                max_drift_j3: d3,
                t_end: spec.integrator.t_end,
                epsilon: eps,
                seed,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let medians: Vec<SweepMedian> = betas
        .iter()
        .map(|&beta| {
            let of = |f: fn(&SweepRow) -> f64| {
                median(rows.iter().filter(|r| r.beta == beta).map(f).collect())
            };
            SweepMedian {
                beta,
                median_drift_j2: of(|r| r.max_drift_j2),
                median_drift_j3: of(|r| r.max_drift_j3),
            }
        })
        .collect();
    let argmin_beta = medians
        .iter()
        .min_by(|a, b| a.median_drift_j3.total_cmp(&b.median_drift_j3))
        .map(|m| m.beta)
        .expect("non-empty sweep");
    Ok(BetaSweep {
        rows,
        medians,
        argmin_beta,
        beta_t: tangent.beta_t,
    })
}
