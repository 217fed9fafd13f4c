//! JSON-configured experiments that write CSV data and a JSON summary.

pub mod catalog;
pub mod compare;
pub mod config;
pub mod run;

pub use catalog::{list_experiments, CatalogEntry, DESK_SCALE_NOTE};
pub use compare::{compare, Comparison, Difference, Status, Tolerances};
pub use config::{stream_seed, AnalysisOptions, ExperimentConfig, ExperimentKind};
pub use run::{compute, dry_run, run_experiment, schema, Output, Provenance, Summary, Table, CODE_VERSION};
