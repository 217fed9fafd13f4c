//! Experiment pipelines. Each experiment computes its tables in memory and
//! only then writes them, so a failed run leaves nothing behind.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{stream_seed, ExperimentConfig, ExperimentKind};
use crate::continuum::{
    burgers_evolve, burgers_spectrum, lattice_fields, normal_form_initial_data, riemann_invariants,
    early_growth_slopes, shock_asymptotics, shock_prediction, shock_times_closed_form, zeta,
    BurgersFlux, Direction,
};
use crate::error::{Error, Result};
use crate::integrate::{energy_drift, format_value, relative_drift, run, IntegratorSpec, TrajectoryRecord};
use crate::model::{
    build_initial, calibrate_specific_energy, specific_energy, toda_tangent_params, Boundary,
    InitialData, LatticeState, Potential,
};
use crate::spectral::{
    detect_recurrence, fit_power_law, indicator_series, omega, packet_width_scaling,
    IndicatorSeries, ModeEnergyObserver,
};
use crate::toda::{beta_sweep, max_drift, BetaSweepSpec, HenonObserver, HenonScaling};

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub code_version: String,
    pub seed: u64,
}

/// Scalar results of a run plus the files it wrote.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub experiment: ExperimentKind,
    pub quantities: BTreeMap<String, f64>,
    #[serde(default)]
    pub labels: BTreeMap<String, String>,
    pub files: Vec<String>,
    pub provenance: Provenance,
}

impl Summary {
    pub fn get(&self, key: &str) -> Option<f64> {
        self.quantities.get(key).copied()
    }

    pub fn read(path: &Path) -> Result<Summary> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// One CSV file: a fixed header and rows of already formatted cells.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: impl Into<String>, header: Vec<String>) -> Self {
        Table {
            name: name.into(),
            header,
            rows: Vec::new(),
        }
    }

    fn push(&mut self, values: &[f64]) {
        self.rows.push(values.iter().copied().map(format_value).collect());
    }

    fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Everything a run produces before it touches the file system.
#[derive(Clone, Debug, PartialEq)]
pub struct Output {
    pub tables: Vec<Table>,
    pub quantities: BTreeMap<String, f64>,
    pub labels: BTreeMap<String, String>,
}

impl Output {
    fn new() -> Self {
        Output {
            tables: Vec::new(),
            quantities: BTreeMap::new(),
            labels: BTreeMap::new(),
        }
    }

    /// Non-finite values have no JSON form and are left out.
    fn set(&mut self, key: impl Into<String>, v: f64) {
        if v.is_finite() {
            self.quantities.insert(key.into(), v);
        }
    }

    fn label(&mut self, key: &str, v: impl Into<String>) {
        self.labels.insert(key.to_string(), v.into());
    }
}

const SWEEP_HEADER: &[&str] = &["beta", "max_drift_J2", "max_drift_J3", "t_end", "epsilon", "seed"];
const BURGERS_HEADER: &[&str] = &["k", "absUk2", "compensated", "normalized"];

fn strings(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn lattice_modes(n: usize, boundary: Boundary) -> usize {
    match boundary {
        Boundary::Periodic => n / 2,
        Boundary::Fixed => n - 1,
    }
}

fn modes_header(modes: usize) -> Vec<String> {
    let mut h = strings(&["t", "H"]);
    h.extend(ModeEnergyObserver::column_names(modes));
    h
}

fn indicators_header() -> Vec<String> {
    strings(&["t", "eta", "n_excited", "width"])
}

fn spectrum_header() -> Vec<String> {
    strings(&["k", "omega_k", "E_k", "Ebar_k"])
}

/// File names and headers a config will produce, in order.
pub fn schema(config: &ExperimentConfig) -> Vec<(String, Vec<String>)> {
    let modes = lattice_modes(config.n, config.boundary);
    let lattice = || {
        vec![
            ("modes.csv".to_string(), modes_header(modes)),
            ("indicators.csv".to_string(), indicators_header()),
            ("spectrum.csv".to_string(), spectrum_header()),
        ]
    };
    match config.experiment {
        ExperimentKind::Recurrence => {
            let mut s = lattice();
            s.push(("recurrences.csv".into(), strings(&["time", "recovery"])));
            s
        }
        ExperimentKind::EquipartitionHighEnergy | ExperimentKind::MetastablePacket => lattice(),
        ExperimentKind::TodaDrift => vec![("integrals.csv".into(), strings(&["t", "H", "J2", "J3"]))],
        ExperimentKind::BetaSweep => vec![
            (
                "sweep.csv".into(),
                strings(SWEEP_HEADER),
            ),
            (
                "medians.csv".into(),
                strings(&["beta", "median_drift_j2", "median_drift_j3"]),
            ),
        ],
        ExperimentKind::BurgersShock => vec![
            (
                "burgers_spectrum.csv".into(),
                strings(BURGERS_HEADER),
            ),
            ("profile.csv".into(), strings(&["x", "u0", "u_half", "u_late"])),
        ],
        ExperimentKind::GrowthLaw => {
            let mut s: Vec<(String, Vec<String>)> = growth_sizes(config)
                .into_iter()
                .map(|n| (format!("growth_N{n}.csv"), modes_header(n / 2)))
                .collect();
            s.push((
                "slopes.csv".into(),
                strings(&["n", "k", "slope", "intercept", "residual"]),
            ));
            s
        }
        ExperimentKind::WidthScaling => vec![
            ("widths.csv".into(), strings(&["epsilon", "seed", "width"])),
            (
                "width_series.csv".into(),
                strings(&["epsilon", "t", "scaled_time", "width"]),
            ),
        ],
    }
}

fn growth_sizes(config: &ExperimentConfig) -> Vec<usize> {
    let mut sizes = vec![config.n];
    if let Some(m) = config.analysis.check_n {
        if m != config.n {
            sizes.push(m);
        }
    }
    sizes
}

/// Runs the pipeline of `config` without writing anything.
pub fn compute(config: &ExperimentConfig) -> Result<Output> {
    config.validate()?;
    let mut out = Output::new();
    match config.experiment {
        ExperimentKind::Recurrence => recurrence(config, &mut out)?,
        ExperimentKind::MetastablePacket => metastable_packet(config, &mut out)?,
        ExperimentKind::EquipartitionHighEnergy => equipartition(config, &mut out)?,
        ExperimentKind::TodaDrift => toda_drift(config, &mut out)?,
        ExperimentKind::BetaSweep => sweep(config, &mut out)?,
        ExperimentKind::BurgersShock => burgers_shock(config, &mut out)?,
        ExperimentKind::GrowthLaw => growth_law(config, &mut out)?,
        ExperimentKind::WidthScaling => width_scaling(config, &mut out)?,
    }
    Ok(out)
}

/// Validates `config` and builds its initial states; returns the files a
/// real run would write.
pub fn dry_run(config: &ExperimentConfig) -> Result<Vec<String>> {
    config.validate()?;
    match config.experiment {
        ExperimentKind::BurgersShock => {
            let a = &config.analysis;
            normal_form_initial_data(a.theta, a.epsilon, config.alpha, a.grid)?;
        }
        ExperimentKind::TodaDrift => {
            let pot = toda_tangent_params(config.alpha)?.potential();
            initial_state(config, config.n, &config.initial, &pot)?;
        }
        ExperimentKind::BetaSweep => {
            for &beta in &config.analysis.betas {
                let pot = Potential::fput_quintic(config.alpha, beta, config.gamma);
                build_initial(&config.initial, config.n, config.boundary, &pot)?;
            }
        }
        _ => {
            initial_state(config, config.n, &config.initial, &config.potential())?;
        }
    }
    let mut files: Vec<String> = schema(config).into_iter().map(|(n, _)| n).collect();
    files.push("config.json".into());
    files.push("summary.json".into());
    Ok(files)
}

/// Runs `config` and writes its CSV files, `config.json` and
/// `summary.json` under `dir`. On failure every file written so far is
/// removed again, as is `dir` itself if the run created it.
pub fn run_experiment(config: &ExperimentConfig, dir: &Path) -> Result<Summary> {
    let output = compute(config)?;
    let existed = dir.exists();
    let mut written: Vec<PathBuf> = Vec::new();
    let result = write_all(config, &output, dir, &mut written);
    if result.is_err() {
        for path in &written {
            let _ = fs::remove_file(path);
        }
        if !existed {
            let _ = fs::remove_dir(dir);
        }
    }
    result
}

fn write_all(
    config: &ExperimentConfig,
    output: &Output,
    dir: &Path,
    written: &mut Vec<PathBuf>,
) -> Result<Summary> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    for table in &output.tables {
        let path = dir.join(&table.name);
        written.push(path.clone());
        table.write(&path)?;
        files.push(table.name.clone());
    }
    let summary = Summary {
        experiment: config.experiment,
        quantities: output.quantities.clone(),
        labels: output.labels.clone(),
        files,
        provenance: Provenance {
            config_hash: config.hash(),
            code_version: CODE_VERSION.to_string(),
            seed: config.seed,
        },
    };
    for (name, text) in [
        ("config.json", config.to_json_pretty()),
        ("summary.json", serde_json::to_string_pretty(&summary)?),
    ] {
        let path = dir.join(name);
        written.push(path.clone());
        fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
    }
    Ok(summary)
}

fn initial_state(
    config: &ExperimentConfig,
    n: usize,
    datum: &InitialData,
    pot: &Potential,
) -> Result<LatticeState> {
    match config.target_specific_energy {
        Some(target) => Ok(calibrate_specific_energy(datum, n, config.boundary, pot, target)?.1),
        None => build_initial(datum, n, config.boundary, pot),
    }
}

fn reseeded(datum: &InitialData, seed: u64) -> InitialData {
    match *datum {
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
        InitialData::Gibbs {
            inverse_temperature,
            ..
        } => InitialData::Gibbs {
            inverse_temperature,
            seed,
        },
        other => other,
    }
}

fn pair_omega(k: usize, n: usize, boundary: Boundary) -> f64 {
    match boundary {
        Boundary::Periodic => omega(k, n),
        Boundary::Fixed => omega(k, 2 * (n - 1)),
    }
}

/// Mode energies, indicators and final spectrum of one trajectory (or an
/// ensemble mean of trajectories sharing their snapshot times).
fn lattice_tables(
    config: &ExperimentConfig,
    times: &[f64],
    energy: &[f64],
    rows: &[Vec<f64>],
    out: &mut Output,
) -> Result<IndicatorSeries> {
    let modes = rows.first().map_or(0, Vec::len);
    let ind = indicator_series(times, rows, config.analysis.entropy_variant)?;
    let mut t_modes = Table::new("modes.csv", modes_header(modes));
    let mut t_ind = Table::new("indicators.csv", indicators_header());
    for i in 0..times.len() {
        let mut row = vec![times[i], energy[i]];
        row.extend(&rows[i]);
        t_modes.push(&row);
        t_ind.push(&[times[i], ind.eta[i], ind.n_excited[i], ind.width[i]]);
    }
    let mut t_spec = Table::new("spectrum.csv", spectrum_header());
    let (last, ebar) = (rows.last().expect("rows"), ind.ebar.last().expect("rows"));
    for k in 1..=modes {
        t_spec.push(&[k as f64, pair_omega(k, config.n, config.boundary), last[k - 1], ebar[k - 1]]);
    }
    out.tables.extend([t_modes, t_ind, t_spec]);
    let ln_m = (modes as f64).ln();
    out.set("max_eta", ind.max_eta());
    out.set("eta_ratio", ind.max_eta() / ln_m);
    out.set("final_eta", *ind.eta.last().expect("rows"));
    out.set("final_width", *ind.width.last().expect("rows"));
    out.label(
        "entropy_variant",
        serde_json::to_value(config.analysis.entropy_variant)?
            .as_str()
            .unwrap_or_default(),
    );
    Ok(ind)
}

/// Largest initial displacement `max_j |q_j|`.
fn amplitude(state: &LatticeState) -> f64 {
    state.q.iter().fold(0.0, |m, q| m.max(q.abs()))
}

fn single_run(config: &ExperimentConfig, out: &mut Output) -> Result<(TrajectoryRecord, IndicatorSeries)> {
    let pot = config.potential();
    let state = initial_state(config, config.n, &config.initial, &pot)?;
    out.set("specific_energy", specific_energy(&state, &pot));
    out.set("initial_amplitude", amplitude(&state));
    let mut obs = ModeEnergyObserver::new(&state);
    let rec = run(state, &pot, &config.integrator, &mut [&mut obs])?;
    out.set("energy_drift", energy_drift(&rec)?);
    let ind = lattice_tables(config, &rec.times, &rec.energy, &rec.rows, out)?;
    Ok((rec, ind))
}

fn recurrence(config: &ExperimentConfig, out: &mut Output) -> Result<()> {
    let (rec, _) = single_run(config, out)?;
    let e1 = rec.column("E_1")?;
    let found = detect_recurrence(&rec.times, &e1, config.analysis.recurrence_threshold);
    let mut table = Table::new("recurrences.csv", strings(&["time", "recovery"]));
    for r in &found {
        table.push(&[r.time, r.recovery]);
    }
    out.tables.push(table);
    out.set("recurrence_count", found.len() as f64);
    if let Some(first) = found.first() {
        out.set("first_recurrence_time", first.time);
        out.set("first_recovery", first.recovery);
    }
    Ok(())
}

fn equipartition(config: &ExperimentConfig, out: &mut Output) -> Result<()> {
    let (rec, ind) = single_run(config, out)?;
    let level = config.analysis.equipartition_fraction * (rec.columns.len() as f64).ln();
    if let Some(i) = ind.eta.iter().position(|&e| e >= level) {
        out.set("equipartition_time", rec.times[i]);
    }
    Ok(())
}

fn metastable_packet(config: &ExperimentConfig, out: &mut Output) -> Result<()> {
    let pot = config.potential();
    let seeds = config.analysis.seeds;
    let mut times = Vec::new();
    let mut energy: Vec<f64> = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let (mut eps, mut drift) = (0.0, 0.0f64);
    for i in 0..seeds {
        let datum = reseeded(&config.initial, stream_seed(config.seed, config.experiment, i as u64));
        let state = initial_state(config, config.n, &datum, &pot)?;
        eps += specific_energy(&state, &pot) / seeds as f64;
        let mut obs = ModeEnergyObserver::new(&state);
        let rec = run(state, &pot, &config.integrator, &mut [&mut obs])?;
        drift = drift.max(energy_drift(&rec)?);
        if i == 0 {
            times = rec.times;
            energy = vec![0.0; times.len()];
            rows = vec![vec![0.0; rec.columns.len()]; times.len()];
        }
        for (s, row) in rec.rows.iter().enumerate() {
            energy[s] += rec.energy[s] / seeds as f64;
            for (acc, e) in rows[s].iter_mut().zip(row) {
                *acc += e / seeds as f64;
            }
        }
    }
    out.set("specific_energy", eps);
    out.set("energy_drift", drift);
    let ind = lattice_tables(config, &times, &energy, &rows, out)?;
    out.set("initial_width", ind.width[0]);
    // Exponential tail Ē_k ∝ e^{−σk} of the final averaged spectrum.
    let [lo, hi] = config.analysis.fit_k;
    let ebar = ind.ebar.last().expect("rows");
    let pts: Vec<(f64, f64)> = (lo..=hi)
        .filter(|&k| ebar[k - 1] > 0.0)
        .map(|k| (k as f64, ebar[k - 1].ln()))
        .collect();
    if let Some(slope) = line_slope(&pts) {
        out.set("tail_decay_rate", -slope);
    }
    Ok(())
}

fn line_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

fn toda_drift(config: &ExperimentConfig, out: &mut Output) -> Result<()> {
    let tangent = toda_tangent_params(config.alpha)?;
    let pot = tangent.potential();
    let state = initial_state(config, config.n, &config.initial, &pot)?;
    out.set("specific_energy", specific_energy(&state, &pot));
    out.set("initial_amplitude", amplitude(&state));
    let mut obs = HenonObserver::new(HenonScaling::for_toda(tangent.a, tangent.b)?);
    let rec = run(state, &pot, &config.integrator, &mut [&mut obs])?;
    let (j2, j3) = (rec.column("J2")?, rec.column("J3")?);
    let mut table = Table::new("integrals.csv", strings(&["t", "H", "J2", "J3"]));
    for i in 0..rec.len() {
        table.push(&[rec.times[i], rec.energy[i], j2[i], j3[i]]);
    }
    out.tables.push(table);
    out.set("toda_a", tangent.a);
    out.set("toda_b", tangent.b);
    out.set("energy_drift", energy_drift(&rec)?);
    out.set("relative_drift_j2", relative_drift(&j2)?);
    out.set("relative_drift_j3", relative_drift(&j3)?);
    out.set("max_drift_j2", max_drift(&j2, config.n));
    out.set("max_drift_j3", max_drift(&j3, config.n));
    Ok(())
}

fn sweep(config: &ExperimentConfig, out: &mut Output) -> Result<()> {
    let seeds: Vec<u64> = (0..config.analysis.seeds as u64)
        .map(|i| stream_seed(config.seed, config.experiment, i))
        .collect();
    let spec = BetaSweepSpec {
        alpha: config.alpha,
        betas: config.analysis.betas.clone(),
        n: config.n,
        datum: config.initial,
        seeds,
        integrator: config.integrator,
    };
    let result = beta_sweep(&spec)?;
    let mut rows = Table::new(
        "sweep.csv",
        strings(SWEEP_HEADER),
    );
    for r in &result.rows {
        rows.rows.push(vec![
            format_value(r.beta),
            format_value(r.max_drift_j2),
            format_value(r.max_drift_j3),
            format_value(r.t_end),
            format_value(r.epsilon),
            r.seed.to_string(),
        ]);
    }
    let mut medians = Table::new(
        "medians.csv",
        strings(&["beta", "median_drift_j2", "median_drift_j3"]),
    );
    for m in &result.medians {
        medians.push(&[m.beta, m.median_drift_j2, m.median_drift_j3]);
        out.set(format!("median_drift_j3@{}", format_value(m.beta)), m.median_drift_j3);
    }
    out.tables.extend([rows, medians]);
    out.set("argmin_beta", result.argmin_beta);
    out.set("beta_t", result.beta_t);
    Ok(())
}

fn burgers_shock(config: &ExperimentConfig, out: &mut Output) -> Result<()> {
    let a = &config.analysis;
    let data = normal_form_initial_data(a.theta, a.epsilon, config.alpha, a.grid)?;
    let pred = shock_prediction(&data.lambda, &data.rho, a.epsilon, config.alpha, config.n)?;
    let closed = shock_times_closed_form(a.theta, a.epsilon, config.alpha, config.n)?;
    let (field, direction) = if pred.tau_s_l <= pred.tau_s_r {
        (&data.lambda, Direction::Left)
    } else {
        (&data.rho, Direction::Right)
    };
    let flux = BurgersFlux::normal_form(a.epsilon, config.alpha, 1.0, direction);
    let asym = shock_asymptotics(field, &flux)?;
    let [k_lo, k_hi] = a.fit_k;
    let spectrum = burgers_spectrum(field, &flux, asym.tau_s, k_hi)?;
    // Σ_{k≥1} |Û_k|² is conserved before the shock.
    let total = 0.5 * (field.mean_square() - field.mean().powi(2));
    let ks: Vec<f64> = (k_lo..=k_hi).map(|k| k as f64).collect();
    let fit = fit_power_law(&ks, &spectrum[k_lo - 1..k_hi])?;
    let mut table = Table::new(
        "burgers_spectrum.csv",
        strings(BURGERS_HEADER),
    );
    for (i, e) in spectrum.iter().enumerate() {
        let k = (i + 1) as f64;
        table.push(&[k, *e, e * k.powf(8.0 / 3.0), e / total]);
    }
    let mut profile = Table::new("profile.csv", strings(&["x", "u0", "u_half", "u_late"]));
    let half = burgers_evolve(field, &flux, 0.5 * asym.tau_s)?;
    let late = burgers_evolve(field, &flux, 0.95 * asym.tau_s)?;
    for i in 0..field.m() {
        profile.push(&[field.x(i), field.samples()[i], half.samples()[i], late.samples()[i]]);
    }
    out.tables.extend([table, profile]);
    out.set("exponent", fit.exponent);
    out.set("prefactor", fit.prefactor);
    out.set("fit_residual", fit.residual);
    out.set("normalized_prefactor", fit.prefactor / total);
    out.set("expected_normalized_prefactor", 1.0 / zeta(8.0 / 3.0));
    out.set("stationary_phase_c", asym.coefficient_at(k_hi as u64));
    out.set("normalized_stationary_phase_c", asym.coefficient_at(k_hi as u64) / total);
    out.set("tau_s", asym.tau_s);
    out.set("t_s", pred.t_s);
    out.set("t_s_closed_form", closed.t_s);
    out.set("t_s_relative_difference", (pred.t_s / closed.t_s - 1.0).abs());
    out.set("tau_s_l", pred.tau_s_l);
    out.set("tau_s_r", pred.tau_s_r);
    out.set("x_hat", pred.x_hat);
    out.set("gamma3", pred.gamma3);
    out.set("maximizers", asym.maximizers.len() as f64);
    out.set("under_resolved", if asym.under_resolved { 1.0 } else { 0.0 });
    Ok(())
}

fn growth_law(config: &ExperimentConfig, out: &mut Output) -> Result<()> {
    let pot = config.potential();
    let [lo, hi] = config.analysis.growth_window;
    let mut slopes = Table::new(
        "slopes.csv",
        strings(&["n", "k", "slope", "intercept", "residual"]),
    );
    let mut by_size: Vec<Vec<f64>> = Vec::new();
    for n in growth_sizes(config) {
        let state = initial_state(config, n, &config.initial, &pot)?;
        let eps = specific_energy(&state, &pot);
        let (q, p) = lattice_fields(&state, eps)?;
        let (lambda, rho) = riemann_invariants(&q, &p, 1.0 / n as f64)?;
        let t_s = shock_prediction(&lambda, &rho, eps, config.alpha, n)?.t_s;
        let spec = IntegratorSpec {
            t_end: if config.integrator.t_end > 0.0 {
                config.integrator.t_end
            } else {
                hi * t_s
            },
            ..config.integrator
        };
        let mut obs = ModeEnergyObserver::new(&state);
        let rec = run(state, &pot, &spec, &mut [&mut obs])?;
        let mut table = Table::new(format!("growth_N{n}.csv"), modes_header(n / 2));
        for i in 0..rec.len() {
            let mut row = vec![rec.times[i], rec.energy[i]];
            row.extend(&rec.rows[i]);
            table.push(&row);
        }
        out.tables.push(table);
        let series = config
            .analysis
            .growth_modes
            .iter()
            .map(|&k| Ok((k, rec.column(&format!("E_{k}"))?)))
            .collect::<Result<Vec<_>>>()?;
        let fits = early_growth_slopes(&rec.times, &series, lo * t_s, hi * t_s)?;
        out.set(format!("t_s_N{n}"), t_s);
        let mut row_slopes = Vec::new();
        for (k, fit) in fits {
            slopes.push(&[n as f64, k as f64, fit.slope, fit.intercept, fit.residual]);
            out.set(format!("slope_k{k}_N{n}"), fit.slope);
            row_slopes.push(fit.slope);
        }
        by_size.push(row_slopes);
    }
    if by_size.len() == 2 {
        let shift = by_size[0]
            .iter()
            .zip(&by_size[1])
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        out.set("max_slope_shift", shift);
    }
    out.tables.push(slopes);
    Ok(())
}

fn width_scaling(config: &ExperimentConfig, out: &mut Output) -> Result<()> {
    let pot = config.potential();
    let InitialData::ModePacket { fraction, .. } = config.initial else {
        return Err(Error::config("initial", "needs a mode packet"));
    };
    let a = &config.analysis;
    let mut widths = Table::new("widths.csv", strings(&["epsilon", "seed", "width"]));
    let mut series = Table::new(
        "width_series.csv",
        strings(&["epsilon", "t", "scaled_time", "width"]),
    );
    let mut sweep = Vec::new();
    for &eps in &a.epsilons {
        let unit = eps.powf(-0.375) * fraction.powf(-1.5);
        let spec = IntegratorSpec {
            t_end: if config.integrator.t_end > 0.0 {
                config.integrator.t_end
            } else {
                a.scaled_time * unit
            },
            ..config.integrator
        };
        let mut mean: Vec<f64> = Vec::new();
        let mut times: Vec<f64> = Vec::new();
        for i in 0..a.seeds {
            let seed = stream_seed(config.seed, config.experiment, i as u64);
            let datum = reseeded(&config.initial, seed);
            let state = calibrate_specific_energy(&datum, config.n, config.boundary, &pot, eps)?.1;
            let mut obs = ModeEnergyObserver::new(&state);
            let rec = run(state, &pot, &spec, &mut [&mut obs])?;
            let ind = indicator_series(&rec.times, &rec.rows, a.entropy_variant)?;
            widths.rows.push(vec![
                format_value(eps),
                seed.to_string(),
                format_value(*ind.width.last().expect("rows")),
            ]);
            if i == 0 {
                times = rec.times.clone();
                mean = vec![0.0; times.len()];
            }
            for (m, w) in mean.iter_mut().zip(&ind.width) {
                *m += w / a.seeds as f64;
            }
        }
        for (t, w) in times.iter().zip(&mean) {
            series.push(&[eps, *t, t / unit, *w]);
        }
        let w = *mean.last().expect("rows");
        out.set(format!("width@{}", format_value(eps)), w);
        sweep.push((eps, w));
    }
    let fit = packet_width_scaling(&sweep)?;
    out.set("slope", fit.slope);
    out.set("intercept", fit.intercept);
    out.set("fit_residual", fit.residual);
    out.tables.extend([widths, series]);
    out.label(
        "entropy_variant",
        serde_json::to_value(a.entropy_variant)?.as_str().unwrap_or_default(),
    );
    Ok(())
}
