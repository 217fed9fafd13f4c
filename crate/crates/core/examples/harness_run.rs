//! Runs a configured experiment to disk and compares it with a rerun.

use fputlab::harness::{compare, run_experiment, ExperimentConfig, Tolerances};

fn main() -> fputlab::Result<()> {
    let config = ExperimentConfig::from_json(
        r#"{"experiment": "toda_drift", "integrator": {"t_end": 100.0}}"#,
    )?;
    let root = std::env::temp_dir().join(format!("fputlab-harness-{}", std::process::id()));
    let a = run_experiment(&config, &root.join("a"))?;
    let b = run_experiment(&config, &root.join("b"))?;
    println!("wrote {:?} under {}", a.files, root.display());
    for (k, v) in &a.quantities {
        println!("{k:>20} = {v:.6e}");
    }
    let diff = compare(&a, &b, &Tolerances::default())?;
    println!("rerun identical: {}", diff.passed() && diff.differences.is_empty());
    std::fs::remove_dir_all(&root).map_err(|e| fputlab::Error::Io { path: root, source: e })?;
    Ok(())
}
