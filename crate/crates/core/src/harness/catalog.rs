//! Static catalog of the experiments.

use serde::Serialize;

use super::config::ExperimentKind;

/// Scale note shared by the catalog listing.
pub const DESK_SCALE_NOTE: &str = "Desk scale: chains of N = 32/64/128 particles (256 for the \
size check) stand in for the N = 1023, t up to 1e9 runs of the long-time studies; those runs \
are not reproduced.";

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CatalogEntry {
    pub kind: ExperimentKind,
    pub description: &'static str,
    /// The known phenomenon the experiment reproduces in kind.
    pub mirrors: &'static str,
    pub modules: &'static [&'static str],
    /// What the defaults run instead of the published setting.
    pub desk_scale: &'static str,
    /// Runs longer than ten minutes on one core.
    pub extended: bool,
}

pub fn list_experiments() -> Vec<CatalogEntry> {
    use ExperimentKind::*;
    vec![
        CatalogEntry {
            kind: Recurrence,
            description: "Sine-wave datum of the α-chain; E_k(t), entropy and recurrences of E_1.",
            mirrors: "mode energies of the original FPUT run returning almost to the initial state",
            modules: &["model", "integrate", "spectral"],
            desk_scale: "N = 32, t = 1e4 (the original run used N = 32 as well)",
            extended: false,
        },
        CatalogEntry {
            kind: MetastablePacket,
            description: "10% of the modes excited with random phases; ensemble-averaged Ē_k, width and exponential tail.",
            mirrors: "formation of the metastable packet with an exponential tail",
            modules: &["model", "integrate", "spectral"],
            desk_scale: "N = 128 and t = 2e4 instead of N = 1023 and t up to 1e9",
            extended: false,
        },
        CatalogEntry {
            kind: EquipartitionHighEnergy,
            description: "High-energy sine wave of the α+β chain; time to reach 90% of the maximal entropy.",
            mirrors: "quick tendency to equipartition at specific energy 22",
            modules: &["model", "integrate", "spectral"],
            desk_scale: "N = 32 instead of N = 64",
            extended: false,
        },
        CatalogEntry {
            kind: TodaDrift,
            description: "Hénon integrals J2, J3 along the Toda chain tangent to the α-chain.",
            mirrors: "conservation of the Toda integrals",
            modules: &["model", "integrate", "toda"],
            desk_scale: "N = 32, t = 1e3",
            extended: false,
        },
        CatalogEntry {
            kind: BetaSweep,
            description: "Median drift of the tangent Toda integrals over β at fixed α with Gibbs data.",
            mirrors: "minimal drift at the Toda-tangent quartic coefficient",
            modules: &["model", "integrate", "toda"],
            desk_scale: "N = 32, 8 seeds, t = 1e3",
            extended: false,
        },
        CatalogEntry {
            kind: BurgersShock,
            description: "Normal-form Burgers datum; shock time and |Û_k(τ_s)|² with its k^{-8/3} law.",
            mirrors: "0.779 k^{-8/3} spectrum at the shock time",
            modules: &["continuum", "spectral"],
            desk_scale: "continuum computation, no lattice run",
            extended: false,
        },
        CatalogEntry {
            kind: GrowthLaw,
            description: "Traveling-wave datum; log-log slopes of E_2, E_3, E_4 before the shock time.",
            mirrors: "early growth E_k ∝ t^{2(k-1)} and persistence of the slopes",
            modules: &["model", "integrate", "spectral", "continuum"],
            desk_scale: "N = 128 with a check at N = 256",
            extended: false,
        },
        CatalogEntry {
            kind: WidthScaling,
            description: "Prethermal packet width against ε for random-phase packets.",
            mirrors: "width of the packet of order ε^{1/4}",
            modules: &["model", "integrate", "spectral"],
            desk_scale: "N = 128 and three energies instead of N = 1023 sweeps",
            extended: true,
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covers_every_kind_once() {
        let kinds: Vec<ExperimentKind> = list_experiments().iter().map(|e| e.kind).collect();
        assert_eq!(kinds, ExperimentKind::ALL);
    }

    #[test]
    fn entries_name_modules_and_scale() {
        for e in list_experiments() {
            assert!(!e.modules.is_empty());
            assert!(!e.desk_scale.is_empty());
        }
        assert!(DESK_SCALE_NOTE.contains("N = 32/64/128"));
        assert!(DESK_SCALE_NOTE.contains("1023"));
    }
}
