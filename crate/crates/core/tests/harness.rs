use std::fs;
use std::path::Path;
use std::process::Command;

use fputlab::harness::{
    compare, dry_run, list_experiments, run_experiment, schema, ExperimentConfig, ExperimentKind,
    Summary, Tolerances,
};
use fputlab::Error;
use serde_json::json;

/// Small, fast variants of every experiment.
fn small(kind: ExperimentKind) -> ExperimentConfig {
    let patch = match kind {
        ExperimentKind::Recurrence => json!({"integrator": {"t_end": 200.0, "record_stride": 20}}),
        ExperimentKind::MetastablePacket => json!({
            "n": 32,
            "integrator": {"t_end": 50.0, "record_stride": 10},
            "analysis": {"seeds": 2, "fit_k": [3, 10]}
        }),
        ExperimentKind::EquipartitionHighEnergy => {
            json!({"integrator": {"t_end": 20.0, "record_stride": 20}})
        }
        ExperimentKind::TodaDrift => json!({"integrator": {"t_end": 20.0, "record_stride": 50}}),
        ExperimentKind::BetaSweep => json!({
            "n": 16,
            "integrator": {"t_end": 10.0},
            "analysis": {"seeds": 2, "betas": [0.5, 0.6666666666666666]}
        }),
        ExperimentKind::BurgersShock => json!({"analysis": {"grid": 256}}),
        ExperimentKind::GrowthLaw => json!({"n": 64, "analysis": {"check_n": 128}}),
        ExperimentKind::WidthScaling => json!({
            "n": 32,
            "analysis": {"seeds": 1, "epsilons": [1e-3, 3e-3, 1e-2], "scaled_time": 0.5, "fit_k": [1, 8]}
        }),
    };
    let mut value = json!({"experiment": kind.name()});
    for (k, v) in patch.as_object().unwrap() {
        value[k] = v.clone();
    }
    ExperimentConfig::from_value(value).unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn every_experiment_writes_its_schema() {
    for kind in ExperimentKind::ALL {
        let cfg = small(kind);
        let dir = tempfile::tempdir().unwrap();
        let summary = run_experiment(&cfg, dir.path()).unwrap_or_else(|e| panic!("{kind}: {e}"));
        let expected = schema(&cfg);
        let names: Vec<&str> = expected.iter().map(|(n, _)| n.as_str()).collect();
        assert_eq!(summary.files, names, "{kind}");
        for (name, header) in &expected {
            let (h, rows) = read_csv(&dir.path().join(name));
            assert_eq!(&h, header, "{kind}/{name}");
            if name != "recurrences.csv" {
                assert!(!rows.is_empty(), "{kind}/{name} is empty");
            }
            for row in &rows {
                assert_eq!(row.len(), header.len());
                for cell in row {
                    cell.parse::<f64>().unwrap_or_else(|_| panic!("{kind}/{name}: `{cell}`"));
                }
            }
        }
        let back = Summary::read(&dir.path().join("summary.json")).unwrap();
        assert_eq!(back, summary);
        assert_eq!(back.provenance.config_hash, cfg.hash());
        let stored = fs::read_to_string(dir.path().join("config.json")).unwrap();
        assert_eq!(ExperimentConfig::from_json(&stored).unwrap(), cfg);
    }
}

#[test]
fn repeated_runs_are_bit_identical() {
    for kind in [
        ExperimentKind::MetastablePacket,
        ExperimentKind::BetaSweep,
        ExperimentKind::WidthScaling,
    ] {
        let cfg = small(kind);
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let sa = run_experiment(&cfg, a.path()).unwrap();
        run_experiment(&cfg, b.path()).unwrap();
        for name in sa.files.iter().chain([&"summary.json".to_string()]) {
            let x = fs::read(a.path().join(name)).unwrap();
            let y = fs::read(b.path().join(name)).unwrap();
            assert!(x == y, "{kind}/{name} differs between runs");
        }
    }
}

#[test]
fn seeds_change_stochastic_output() {
    let mut cfg = small(ExperimentKind::BetaSweep);
    let a = fputlab::harness::compute(&cfg).unwrap();
    cfg.seed += 1;
    let b = fputlab::harness::compute(&cfg).unwrap();
    assert_ne!(a.tables, b.tables);
}

#[test]
fn dry_run_writes_nothing() {
    let root = tempfile::tempdir().unwrap();
    let dir = root.path().join("out");
    for kind in ExperimentKind::ALL {
        let cfg = ExperimentConfig::defaults(kind);
        let files = dry_run(&cfg).unwrap();
        assert!(files.ends_with(&["config.json".to_string(), "summary.json".to_string()]));
    }
    assert!(!dir.exists());
    assert_eq!(fs::read_dir(root.path()).unwrap().count(), 0);
}

#[test]
fn failed_write_removes_partial_outputs() {
    let dir = tempfile::tempdir().unwrap();
    fs::create_dir(dir.path().join("summary.json")).unwrap();
    let cfg = small(ExperimentKind::TodaDrift);
    assert!(run_experiment(&cfg, dir.path()).is_err());
    let left: Vec<String> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert_eq!(left, ["summary.json"]);
}

#[test]
fn failed_run_creates_no_directory() {
    let root = tempfile::tempdir().unwrap();
    let dir = root.path().join("out");
    let cfg = ExperimentConfig::from_value(json!({
        "experiment": "recurrence",
        "alpha": 1.0,
        "initial": {"variant": "sine_wave", "epsilon": 1e6},
        "integrator": {"t_end": 100.0}
    }))
    .unwrap();
    assert!(matches!(run_experiment(&cfg, &dir), Err(Error::BlowUp { .. })));
    assert!(!dir.exists());
}

#[test]
fn summaries_compare_against_themselves() {
    let cfg = small(ExperimentKind::BurgersShock);
    let dir = tempfile::tempdir().unwrap();
    let s = run_experiment(&cfg, dir.path()).unwrap();
    assert!(compare(&s, &s, &Tolerances::default()).unwrap().passed());
    let mut shifted = s.clone();
    *shifted.quantities.get_mut("exponent").unwrap() += 0.1;
    let c = compare(&s, &shifted, &Tolerances::uniform(0.05)).unwrap();
    assert_eq!(c.failures().map(|d| d.key.as_str()).collect::<Vec<_>>(), ["exponent"]);
}

#[test]
fn catalog_lists_every_kind() {
    let kinds: Vec<ExperimentKind> = list_experiments().iter().map(|e| e.kind).collect();
    assert_eq!(kinds, ExperimentKind::ALL);
}

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fputlab"))
}

#[test]
fn cli_run_list_compare() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("burgers.json");
    fs::write(&config, small(ExperimentKind::BurgersShock).to_json_pretty()).unwrap();

    let list = cli().arg("list").output().unwrap();
    assert!(list.status.success());
    let text = String::from_utf8(list.stdout).unwrap();
    for kind in ExperimentKind::ALL {
        assert!(text.contains(kind.name()));
    }

    let dry = cli()
        .args(["run", "--dry-run", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(dir.path().join("dry"))
        .output()
        .unwrap();
    assert!(dry.status.success());
    assert!(!dir.path().join("dry").exists());

    for name in ["a", "b"] {
        let out = cli()
            .args(["run", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(dir.path().join(name))
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let same = cli()
        .arg("compare")
        .arg(dir.path().join("a/summary.json"))
        .arg(dir.path().join("b/summary.json"))
        .status()
        .unwrap();
    assert!(same.success());

    let mut shifted = Summary::read(&dir.path().join("b/summary.json")).unwrap();
    *shifted.quantities.get_mut("exponent").unwrap() += 0.1;
    let shifted_path = dir.path().join("shifted.json");
    fs::write(&shifted_path, serde_json::to_string(&shifted).unwrap()).unwrap();
    let differ = |tol: &str| {
        cli()
            .arg("compare")
            .arg(dir.path().join("a/summary.json"))
            .arg(&shifted_path)
            .args(["--tol", tol])
            .status()
            .unwrap()
            .code()
    };
    assert_eq!(differ("0.05"), Some(1));
    assert_eq!(differ("0.2"), Some(0));

    let recurrence = dir.path().join("recurrence.json");
    fs::write(&recurrence, small(ExperimentKind::Recurrence).to_json_pretty()).unwrap();
    cli()
        .args(["run", "--config"])
        .arg(&recurrence)
        .arg("--out")
        .arg(dir.path().join("r"))
        .output()
        .unwrap();
    let mismatched = cli()
        .arg("compare")
        .arg(dir.path().join("a/summary.json"))
        .arg(dir.path().join("r/summary.json"))
        .output()
        .unwrap();
    assert_eq!(mismatched.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&mismatched.stderr).contains("different experiments"));

    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"experiment": "recurrence", "integrator": {"dt": -1.0}}"#).unwrap();
    let out = cli().args(["run", "--config"]).arg(&bad).arg("--out").arg(dir.path().join("x")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dt"));
}
