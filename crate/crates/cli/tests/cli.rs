//! Sweeps, emission and the `starnet` binary.

use std::process::Command;
use std::time::{Duration, Instant};

use starnet_cli::config::NumberList;
use starnet_cli::presets::PRESETS;
use starnet_cli::{emit, reproduce, run_sweep, Cell, Dataset, OutputFormat, Scenario, Settings, SweepConfig};
use starnet_core::{DetectorModel, GaussianScenario, LossChannel, SqueezingSpec};

fn sweep(json: &str) -> Dataset {
    run_sweep(&SweepConfig::from_settings(Settings::from_json_str(json).unwrap()).unwrap()).unwrap()
}

fn starnet(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_starnet")).args(args).output().unwrap()
}

#[test]
fn fixed_fidelity_curve_has_unit_arm_slope() {
    let d = sweep(r#"{"scenario":"fixed_fidelity_curve","n":3,"fidelity":0.95,"dmin_km":0,"dmax_km":300,"step_km":5}"#);
    assert_eq!(d.len(), 61);
    let dist = d.float_column("distance_km");
    let rate = d.float_column("rate");
    for i in 1..rate.len() {
        let slope = (rate[i].log10() - rate[i - 1].log10()) / (dist[i] - dist[i - 1]);
        assert!((slope + 0.02).abs() < 1e-12, "slope {slope}");
    }
    let expected_first = 3.0 * (1.0 - 0.95f64.sqrt());
    assert!((rate[0] - expected_first).abs() < 1e-15);
}

#[test]
fn direct_benchmark_is_fourth_power() {
    let d = sweep(r#"{"scenario":"benchmark_direct","n":4,"dmax_km":100,"step_km":25}"#);
    let eta = d.float_column("arm_transmittance");
    let rate = d.float_column("rate");
    assert_eq!(rate.len(), 5);
    for (e, r) in eta.iter().zip(&rate) {
        assert_eq!(*r, e.powi(4));
    }
    assert!(d.float_column("fidelity").iter().all(|&f| f == 1.0));
}

#[test]
fn gaussian_row_matches_library() {
    let d = sweep(r#"{"scenario":"gaussian_w","n":2,"squeezing_db":0.87,"dmin_km":0,"dmax_km":0,"step_km":1}"#);
    assert_eq!(d.len(), 1);
    let point = GaussianScenario {
        n_parties: 2,
        squeezing: SqueezingSpec::from_db(0.87).unwrap(),
        channel: LossChannel::new(1.0).unwrap(),
        detector: DetectorModel::default(),
    }
    .evaluate()
    .unwrap();
    assert_eq!(d.float_column("rate"), vec![point.click_probability]);
    assert_eq!(d.float_column("fidelity"), vec![point.fidelity]);
    assert_eq!(d.float_column("no_click_probability"), vec![point.no_click_probability]);
}

#[test]
fn gaussian_cutoff_adds_reference_columns() {
    let d = sweep(r#"{"scenario":"gaussian_w","n":2,"squeezing_db":1.3,"dmax_km":50,"step_km":50,"cutoff":8}"#);
    let (p, f) = (d.float_column("rate"), d.float_column("fidelity"));
    let (fp, ff) = (d.float_column("fock_rate"), d.float_column("fock_fidelity"));
    assert_eq!(fp.len(), 2);
    for i in 0..2 {
        assert!((p[i] - fp[i]).abs() < 1e-6 && (f[i] - ff[i]).abs() < 1e-6);
    }
}

#[test]
fn unreachable_gaussian_targets_are_omitted() {
    let d = sweep(r#"{"scenario":"gaussian_w","n":2,"fidelity":0.97,"dmin_km":0,"dmax_km":400,"step_km":50}"#);
    assert!(!d.is_empty() && d.len() < 9);
    for f in d.float_column("fidelity") {
        assert!((f - 0.97).abs() < 1e-6);
    }
}

#[test]
fn ideal_sweeps_order_values_then_distances() {
    let d = sweep(r#"{"scenario":"ideal_w","n":2,"b":[0.1,0.2],"dmax_km":20,"step_km":10}"#);
    assert_eq!(d.float_column("b"), vec![0.1, 0.1, 0.1, 0.2, 0.2, 0.2]);
    assert_eq!(d.float_column("distance_km"), vec![0.0, 10.0, 20.0, 0.0, 10.0, 20.0]);
    let dicke = sweep(r#"{"scenario":"ideal_dicke","n":4,"m":2,"fidelity":0.95,"dmax_km":0,"step_km":1}"#);
    let b = dicke.float_column("b")[0];
    assert!(((1.0 - b * b).powi(2) - 0.95).abs() < 1e-12);
}

#[test]
fn squashed_rows_have_empty_fidelity() {
    let d = sweep(r#"{"scenario":"benchmark_squashed","dmax_km":10,"step_km":10}"#);
    let i = d.column_index("fidelity").unwrap();
    assert!(d.rows().iter().all(|r| r[i] == Cell::Empty));
    assert_eq!(d.float_column("rate")[0], 1.0);
}

#[test]
fn csv_and_json_round_trip_through_files() {
    let d = sweep(r#"{"scenario":"gaussian_w","n":3,"squeezing_db":[0.87,3.47],"dmax_km":400,"step_km":100}"#);
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("out.csv");
    emit(&d, OutputFormat::Csv, Some(&csv_path)).unwrap();
    let mut reader = csv::Reader::from_path(&csv_path).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, d.columns());
    for (record, row) in reader.records().zip(d.rows()) {
        for (field, cell) in record.unwrap().iter().zip(row) {
            match cell {
                Cell::Float(x) => assert_eq!(field.parse::<f64>().unwrap(), *x),
                Cell::Empty => assert_eq!(field, ""),
                other => assert_eq!(field, format!("{}", other.as_f64().unwrap())),
            }
        }
    }

    let json_path = dir.path().join("out.json");
    emit(&d, OutputFormat::Json, Some(&json_path)).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    let rows = parsed.as_array().unwrap();
    assert_eq!(rows.len(), d.len());
    for (obj, row) in rows.iter().zip(d.rows()) {
        let keys: Vec<&String> = obj.as_object().unwrap().keys().collect();
        assert_eq!(keys, d.columns().iter().collect::<Vec<_>>());
        for (key, cell) in d.columns().iter().zip(row) {
            if let Cell::Float(x) = cell {
                assert_eq!(obj[key].as_f64().unwrap(), *x);
            }
        }
    }
}

#[test]
fn small_values_use_scientific_notation() {
    let d = sweep(r#"{"scenario":"benchmark_direct","n":4,"dmin_km":200,"dmax_km":200,"step_km":1}"#);
    let csv = d.to_csv_string().unwrap();
    let fields: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(fields[..2], ["200", "0.0001"]);
    assert!(fields[2].contains("e-16"), "{}", fields[2]);
    assert_eq!(fields[2].parse::<f64>().unwrap(), d.float_column("rate")[0]);
}

#[test]
fn io_failure_names_the_path() {
    let d = Dataset::new(["a"]);
    let err = emit(&d, OutputFormat::Csv, Some(std::path::Path::new("/nonexistent/dir/x.csv"))).unwrap_err();
    assert!(err.to_string().contains("/nonexistent/dir/x.csv"));
    assert_eq!(err.exit_code(), 1);
}

#[test]
fn binary_matches_library_and_config_file() {
    let out = starnet(&["--scenario", "ideal_w", "--n", "3", "--b", "0.1,0.2", "--dmax-km", "50", "--step-km", "25"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let expected = sweep(r#"{"scenario":"ideal_w","n":3,"b":[0.1,0.2],"dmax_km":50,"step_km":25}"#);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), expected.to_csv_string().unwrap());

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"scenario":"ideal_w","n":4,"b":[0.1,0.2],"dmax-km":50,"step-km":25,"format":"json"}"#).unwrap();
    let out = starnet(&["--config", cfg.to_str().unwrap(), "--n", "3", "--format", "csv"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), expected.to_csv_string().unwrap());

    let target = dir.path().join("sweep.json");
    let out = starnet(&["--config", cfg.to_str().unwrap(), "--out", target.to_str().unwrap()]);
    assert!(out.status.success() && out.stdout.is_empty());
    let parsed: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&target).unwrap()).unwrap();
    assert_eq!(parsed.as_array().unwrap().len(), 6);
    assert_eq!(parsed[0]["n_parties"], 4);
}

#[test]
fn exit_codes() {
    assert_eq!(starnet(&["--scenario", "benchmark_direct", "--n", "2", "--dmax-km", "10"]).status.code(), Some(0));
    assert_eq!(starnet(&["--bogus"]).status.code(), Some(2));
    assert_eq!(starnet(&["--scenario", "warp_drive"]).status.code(), Some(2));
    let missing = starnet(&["--scenario", "ideal_w", "--b", "0.1"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("n is required"));
    let conflict = starnet(&["--scenario", "ideal_w", "--n", "2", "--b", "0.1", "--fidelity", "0.9"]);
    assert_eq!(conflict.status.code(), Some(2));
    assert_eq!(starnet(&["reproduce", "fig4"]).status.code(), Some(2));
    assert_eq!(starnet(&["reproduce", "fig3", "--n", "2"]).status.code(), Some(2));
    assert_eq!(starnet(&["--config", "/nonexistent/cfg.json"]).status.code(), Some(1));
    let io = starnet(&["--scenario", "benchmark_direct", "--n", "2", "--out", "/nonexistent/dir/out.csv"]);
    assert_eq!(io.status.code(), Some(1));
    assert_eq!(starnet(&["--help"]).status.code(), Some(0));
}

#[test]
fn settings_from_flags_and_file_agree() {
    let file = Settings::from_json_str(r#"{"scenario":"gaussian_w","n":2,"squeezing_db":[1.3]}"#).unwrap();
    let flags = Settings {
        scenario: Some(Scenario::GaussianW),
        n: Some(2),
        squeezing_db: Some(NumberList::Many(vec![1.3])),
        ..Default::default()
    };
    assert_eq!(SweepConfig::from_settings(file).unwrap(), SweepConfig::from_settings(flags).unwrap());
}

#[test]
fn every_preset_runs_quickly_and_deterministically() {
    for name in PRESETS {
        let start = Instant::now();
        let first = reproduce(name).unwrap();
        let elapsed = start.elapsed();
        assert!(elapsed < Duration::from_secs(300), "{name} took {elapsed:?}");
        assert!(!first.is_empty(), "{name} is empty");
        assert_eq!(first.columns()[0], "series");
        let second = reproduce(name).unwrap();
        assert_eq!(first.to_csv_string().unwrap(), second.to_csv_string().unwrap(), "{name}");
    }
}
