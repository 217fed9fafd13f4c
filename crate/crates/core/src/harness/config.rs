//! Experiment configuration: one JSON document per run.
//!
//! A document names its `experiment` and may override any subset of the
//! fields; everything else comes from that experiment's defaults.

use std::f64::consts::FRAC_PI_4;
use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::integrate::{IntegratorSpec, Scheme};
use crate::model::{Boundary, InitialData, PhaseRule, Potential};
use crate::spectral::EntropyVariant;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Recurrence,
    MetastablePacket,
    EquipartitionHighEnergy,
    TodaDrift,
    BetaSweep,
    BurgersShock,
    GrowthLaw,
    WidthScaling,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 8] = [
        ExperimentKind::Recurrence,
        ExperimentKind::MetastablePacket,
        ExperimentKind::EquipartitionHighEnergy,
        ExperimentKind::TodaDrift,
        ExperimentKind::BetaSweep,
        ExperimentKind::BurgersShock,
        ExperimentKind::GrowthLaw,
        ExperimentKind::WidthScaling,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Recurrence => "recurrence",
            ExperimentKind::MetastablePacket => "metastable_packet",
            ExperimentKind::EquipartitionHighEnergy => "equipartition_high_energy",
            ExperimentKind::TodaDrift => "toda_drift",
            ExperimentKind::BetaSweep => "beta_sweep",
            ExperimentKind::BurgersShock => "burgers_shock",
            ExperimentKind::GrowthLaw => "growth_law",
            ExperimentKind::WidthScaling => "width_scaling",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Analysis options. Each experiment reads only the fields relevant to it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisOptions {
    /// Entropy computed from instantaneous or time-averaged energies.
    pub entropy_variant: EntropyVariant,
    /// Detection level for recurrences of `E_1(t)/E_1(0)`.
    pub recurrence_threshold: f64,
    /// Fraction of `ln(n/2)` that counts as equipartition.
    pub equipartition_fraction: f64,
    /// Ensemble size for stochastic initial data.
    pub seeds: usize,
    /// Quartic coefficients of a β sweep.
    pub betas: Vec<f64>,
    /// Mixing angle of the normal-form Burgers datum.
    pub theta: f64,
    /// Specific energy of the normal-form Burgers datum.
    pub epsilon: f64,
    /// Grid size for continuum fields.
    pub grid: usize,
    /// Inclusive wavenumber range of spectral fits.
    pub fit_k: [usize; 2],
    /// Modes whose early growth is fitted.
    pub growth_modes: Vec<usize>,
    /// Growth-fit window as fractions of the predicted shock time.
    pub growth_window: [f64; 2],
    /// Second chain size for the size-stability check of growth slopes.
    pub check_n: Option<usize>,
    /// Specific energies of a width sweep.
    pub epsilons: Vec<f64>,
    /// Run length of a width sweep in units of `ε^{−3/8} w₀^{−3/2}`.
    pub scaled_time: f64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            entropy_variant: EntropyVariant::TimeAveraged,
            recurrence_threshold: 0.5,
            equipartition_fraction: 0.9,
            seeds: 1,
            betas: Vec::new(),
            theta: 0.0,
            epsilon: 0.05,
            grid: 1024,
            fit_k: [8, 64],
            growth_modes: vec![2, 3, 4],
            growth_window: [0.05, 0.1],
            check_n: None,
            epsilons: Vec::new(),
            scaled_time: 30.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    /// Number of particles.
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub boundary: Boundary,
    pub initial: InitialData,
    /// When set, the initial datum is rescaled so that `H/N` equals it.
    pub target_specific_energy: Option<f64>,
    /// `t_end = 0` lets the experiment choose its own horizon.
    pub integrator: IntegratorSpec,
    pub analysis: AnalysisOptions,
    /// Master seed; every stochastic stream is derived from it.
    pub seed: u64,
    /// Output directory; the command line `--out` takes precedence.
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    /// The desk-scale defaults of an experiment.
    pub fn defaults(kind: ExperimentKind) -> Self {
        let base = ExperimentConfig {
            experiment: kind,
            n: 32,
            alpha: 1.0,
            beta: 0.0,
            gamma: 0.0,
            boundary: Boundary::Periodic,
            initial: InitialData::SineWave {
                epsilon: 1e-3,
                phase: 0.0,
            },
            target_specific_energy: None,
            integrator: IntegratorSpec::new(Scheme::Verlet2, 0.05, 1000.0, 10),
            analysis: AnalysisOptions::default(),
            seed: 0,
            out: None,
        };
        match kind {
            ExperimentKind::Recurrence => ExperimentConfig {
                alpha: 0.25,
                initial: InitialData::SineWave {
                    epsilon: 0.002,
                    phase: 0.0,
                },
                integrator: IntegratorSpec::new(Scheme::Verlet2, 0.05, 10_000.0, 10),
                ..base
            },
            ExperimentKind::MetastablePacket => ExperimentConfig {
                n: 128,
                initial: packet(0.1),
                target_specific_energy: Some(1e-3),
                integrator: IntegratorSpec::new(Scheme::Verlet2, 0.1, 20_000.0, 20),
                analysis: AnalysisOptions {
                    seeds: 4,
                    fit_k: [8, 40],
                    ..AnalysisOptions::default()
                },
                ..base
            },
            ExperimentKind::EquipartitionHighEnergy => ExperimentConfig {
                beta: 0.1,
                initial: InitialData::SineWave {
                    epsilon: 1.0,
                    phase: 0.0,
                },
                target_specific_energy: Some(22.0),
                integrator: IntegratorSpec::new(Scheme::Yoshida4, 0.01, 2000.0, 10),
                ..base
            },
            ExperimentKind::TodaDrift => ExperimentConfig {
                initial: InitialData::SineWave {
                    epsilon: 0.01,
                    phase: FRAC_PI_4,
                },
                integrator: IntegratorSpec::new(Scheme::Yoshida4, 0.02, 1000.0, 50),
                ..base
            },
            ExperimentKind::BetaSweep => ExperimentConfig {
                initial: InitialData::Gibbs {
                    inverse_temperature: 50.0,
                    seed: 0,
                },
                integrator: IntegratorSpec::new(Scheme::Yoshida4, 0.05, 1000.0, 10),
                analysis: AnalysisOptions {
                    seeds: 8,
                    betas: vec![0.4, 2.0 / 3.0, 1.0],
                    ..AnalysisOptions::default()
                },
                ..base
            },
            ExperimentKind::BurgersShock => ExperimentConfig { n: 256, ..base },
            ExperimentKind::GrowthLaw => ExperimentConfig {
                n: 128,
                beta: 0.5,
                initial: InitialData::SineWave {
                    epsilon: 5e-4,
                    phase: FRAC_PI_4,
                },
                integrator: IntegratorSpec::new(Scheme::Verlet2, 0.05, 0.0, 4),
                analysis: AnalysisOptions {
                    check_n: Some(256),
                    ..AnalysisOptions::default()
                },
                ..base
            },
            ExperimentKind::WidthScaling => ExperimentConfig {
                n: 128,
                initial: packet(0.1),
                integrator: IntegratorSpec::new(Scheme::Verlet2, 0.1, 0.0, 20),
                analysis: AnalysisOptions {
                    seeds: 8,
                    epsilons: vec![1e-4, 3e-4, 1e-3],
                    ..AnalysisOptions::default()
                },
                ..base
            },
        }
    }

    /// Parses a JSON document, filling absent fields from the defaults of
    /// the named experiment. `initial` is replaced as a whole; `integrator`
    /// and `analysis` are merged field by field.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text)
            .map_err(|e| Error::config("<document>", e.to_string()))?;
        Self::from_value(value)
    }

    pub fn from_value(value: Value) -> Result<Self> {
        let Value::Object(user) = value else {
            return Err(Error::config("<document>", "expected a JSON object"));
        };
        let kind = match user.get("experiment") {
            Some(Value::String(s)) => ExperimentKind::from_name(s).ok_or_else(|| {
                let names: Vec<&str> = ExperimentKind::ALL.iter().map(|k| k.name()).collect();
                Error::config("experiment", format!("unknown kind `{s}`; expected one of {names:?}"))
            })?,
            Some(_) => return Err(Error::config("experiment", "expected a string")),
            None => return Err(Error::config("experiment", "missing")),
        };
        let mut merged = serde_json::to_value(Self::defaults(kind))?;
        let target = merged.as_object_mut().expect("defaults serialize to an object");
        for (key, v) in user {
            match (key.as_str(), target.get_mut(&key), v) {
                ("integrator" | "analysis", Some(Value::Object(base)), Value::Object(over)) => {
                    for (k, x) in over {
                        base.insert(k, x);
                    }
                }
                (_, _, v) => {
                    target.insert(key, v);
                }
            }
        }
        let config: ExperimentConfig = serde_path_to_error::deserialize(merged).map_err(|e| {
            let field = e.path().to_string();
            Error::config(field, e.into_inner().to_string())
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the compact JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// FPUT potential of the model parameters.
    pub fn potential(&self) -> Potential {
        Potential::fput_quintic(self.alpha, self.beta, self.gamma)
    }

    /// Checks every field the experiment reads; errors name the field.
    pub fn validate(&self) -> Result<()> {
        let a = &self.analysis;
        let field = |name: &str, ok: bool, reason: &str| -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::config(name, reason))
            }
        };
        field("n", self.n >= 4 && self.n.is_multiple_of(2), "must be even and at least 4")?;
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma)] {
            field(name, v.is_finite(), "must be finite")?;
        }
        self.initial
            .validate()
            .map_err(|e| Error::config("initial", e.to_string()))?;
        if let Some(t) = self.target_specific_energy {
            field("target_specific_energy", t > 0.0 && t.is_finite(), "must be positive")?;
            field(
                "target_specific_energy",
                !matches!(self.initial, InitialData::Gibbs { .. }),
                "Gibbs data are set by their inverse temperature",
            )?;
        }
        let dt_ok = self.integrator.dt > 0.0 && self.integrator.dt.is_finite();
        field("integrator.dt", dt_ok, "must be positive")?;
        field(
            "integrator.t_end",
            self.integrator.t_end >= 0.0 && self.integrator.t_end.is_finite(),
            "must be non-negative",
        )?;
        field("integrator.record_stride", self.integrator.record_stride >= 1, "must be >= 1")?;
        let periodic = self.boundary == Boundary::Periodic;
        let lattice_run = !matches!(self.experiment, ExperimentKind::BurgersShock);
        if lattice_run && !matches!(self.experiment, ExperimentKind::GrowthLaw | ExperimentKind::WidthScaling) {
            field("integrator.t_end", self.integrator.t_end > 0.0, "must be positive")?;
        }
        match self.experiment {
            ExperimentKind::Recurrence => {
                let t = a.recurrence_threshold;
                field("analysis.recurrence_threshold", t > 0.0 && t < 1.0, "must lie in (0, 1)")?;
                field("initial", matches!(self.initial, InitialData::SineWave { .. }), "needs a sine wave")?;
            }
            ExperimentKind::EquipartitionHighEnergy => {
                let f = a.equipartition_fraction;
                field("analysis.equipartition_fraction", f > 0.0 && f <= 1.0, "must lie in (0, 1]")?;
            }
            ExperimentKind::MetastablePacket => {
                field("analysis.seeds", a.seeds >= 1, "must be >= 1")?;
                field("analysis.fit_k", a.fit_k[0] >= 1 && a.fit_k[1] > a.fit_k[0], "need 1 <= lo < hi")?;
                field("analysis.fit_k", a.fit_k[1] <= self.n / 2, "upper end exceeds n/2")?;
            }
            ExperimentKind::TodaDrift => {
                field("alpha", self.alpha != 0.0, "the tangent Toda chain needs alpha != 0")?;
                field("boundary", periodic, "Hénon integrals need a periodic chain")?;
            }
            ExperimentKind::BetaSweep => {
                field("alpha", self.alpha != 0.0, "the tangent Toda chain needs alpha != 0")?;
                field("boundary", periodic, "Hénon integrals need a periodic chain")?;
                field("analysis.betas", !a.betas.is_empty(), "must not be empty")?;
                field("analysis.betas", a.betas.iter().all(|b| *b > 0.0), "must be positive")?;
                field("analysis.seeds", a.seeds >= 1, "must be >= 1")?;
            }
            ExperimentKind::BurgersShock => {
                field("alpha", self.alpha != 0.0, "no shock for alpha = 0")?;
                field("analysis.epsilon", a.epsilon > 0.0, "must be positive")?;
                field("analysis.grid", a.grid >= 16 && a.grid.is_multiple_of(2), "must be even and >= 16")?;
                field("analysis.fit_k", a.fit_k[0] >= 1 && a.fit_k[1] >= a.fit_k[0] + 4, "need at least 5 wavenumbers")?;
            }
            ExperimentKind::GrowthLaw => {
                field("alpha", self.alpha != 0.0, "no shock for alpha = 0")?;
                field("boundary", periodic, "continuum fields need a periodic chain")?;
                field("analysis.growth_modes", !a.growth_modes.is_empty(), "must not be empty")?;
                let top = a.growth_modes.iter().copied().max().unwrap_or(0);
                let smallest = a.check_n.map_or(self.n, |m| m.min(self.n));
                field("analysis.growth_modes", a.growth_modes.iter().all(|&k| k >= 1) && top <= smallest / 2, "modes must lie in 1..=n/2")?;
                let [lo, hi] = a.growth_window;
                field("analysis.growth_window", lo > 0.0 && hi > lo && hi < 1.0, "need 0 < lo < hi < 1")?;
                if let Some(m) = a.check_n {
                    field("analysis.check_n", m >= 4 && m % 2 == 0, "must be even and at least 4")?;
                }
            }
            ExperimentKind::WidthScaling => {
                field("initial", matches!(self.initial, InitialData::ModePacket { .. }), "needs a mode packet")?;
                field("analysis.epsilons", a.epsilons.len() >= 3, "need at least three energies")?;
                field("analysis.epsilons", a.epsilons.iter().all(|e| *e > 0.0), "must be positive")?;
                field("analysis.seeds", a.seeds >= 1, "must be >= 1")?;
                field("analysis.scaled_time", a.scaled_time > 0.0, "must be positive")?;
            }
        }
        Ok(())
    }
}

fn packet(fraction: f64) -> InitialData {
    InitialData::ModePacket {
        fraction,
        mode_energy: 1e-3,
        phases: PhaseRule::Random,
        seed: 0,
    }
}

/// Seed of stream `index` of an experiment, derived from the master seed by
/// hashing so that streams are independent of scheduling order.
pub fn stream_seed(master: u64, kind: ExperimentKind, index: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(kind.name().as_bytes());
    h.update(master.to_le_bytes());
    h.update(index.to_le_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("digest is 32 bytes"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_round_trip() {
        for kind in ExperimentKind::ALL {
            let c = ExperimentConfig::defaults(kind);
            c.validate().unwrap();
            let back = ExperimentConfig::from_json(&c.to_json_pretty()).unwrap();
            assert_eq!(back, c);
            assert_eq!(back.hash(), c.hash());
        }
    }

    #[test]
    fn partial_documents_merge_with_defaults() {
        let c = ExperimentConfig::from_json(r#"{"experiment": "recurrence", "n": 64, "integrator": {"dt": 0.02}}"#)
            .unwrap();
        assert_eq!(c.n, 64);
        assert_eq!(c.integrator.dt, 0.02);
        assert_eq!(c.integrator.t_end, 10_000.0);
        assert_eq!(c.alpha, 0.25);
    }

    #[test]
    fn errors_name_the_field() {
        let cases = [
            (r#"{"n": 32}"#, "experiment"),
            (r#"{"experiment": "nope"}"#, "experiment"),
            (r#"{"experiment": "recurrence", "n": 31}"#, "n"),
            (r#"{"experiment": "recurrence", "alpah": 1}"#, "alpah"),
            (r#"{"experiment": "recurrence", "analysis": {"recurrence_threshold": 2}}"#, "analysis.recurrence_threshold"),
            (r#"{"experiment": "beta_sweep", "analysis": {"betas": []}}"#, "analysis.betas"),
            (r#"{"experiment": "recurrence", "integrator": {"dt": "x"}}"#, "integrator.dt"),
        ];
        for (doc, name) in cases {
            let err = ExperimentConfig::from_json(doc).unwrap_err().to_string();
            assert!(err.contains(name), "{doc}: {err}");
        }
    }

    #[test]
    fn stream_seeds_differ() {
        let a = stream_seed(1, ExperimentKind::BetaSweep, 0);
        assert_ne!(a, stream_seed(1, ExperimentKind::BetaSweep, 1));
        assert_ne!(a, stream_seed(2, ExperimentKind::BetaSweep, 0));
        assert_ne!(a, stream_seed(1, ExperimentKind::WidthScaling, 0));
        assert_eq!(a, stream_seed(1, ExperimentKind::BetaSweep, 0));
    }
}
