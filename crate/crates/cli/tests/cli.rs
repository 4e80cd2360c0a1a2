use std::path::Path;
use std::process::Command;

use grouprep_cli::config::{DataSource, ExperimentConfig, GroupSample};
use grouprep_cli::report::{from_json, to_csv, to_json, write_output, CSV_COLUMNS, GROUP_OPTIMAL};
use grouprep_cli::{load_csv, run_experiment, subsample, CliError};
use grouprep_core::generate::{gen_synthetic, SyntheticSpec};
use grouprep_core::Method;

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn features(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

#[test]
fn three_row_file_loads_with_group_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "a.csv", "f1,f2,g\n0,1,a\n2.5,3,a\n-1,0,b\n");
    let d = load_csv(&p, "g", &features(&["f1", "f2"])).unwrap();
    assert_eq!(d.len(), 3);
    assert_eq!(d.num_groups(), 2);
    let a = d.group_id("a").unwrap();
    let b = d.group_id("b").unwrap();
    assert_eq!(d.group(a).len(), 2);
    assert_eq!(d.group(b).len(), 1);
    assert_eq!(d.point(1), &[2.5, 3.0]);
}

#[test]
fn missing_column_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "a.csv", "f1,g\n0,a\n");
    let err = load_csv(&p, "g", &features(&["f1", "f9"])).unwrap_err();
    assert!(err.to_string().contains("\"f9\""), "{err}");
    assert_eq!(err.exit_code(), 1);
}

#[test]
fn non_numeric_cell_cites_its_row() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "a.csv", "f1,g\nabc,a\n1,b\n");
    let err = load_csv(&p, "g", &features(&["f1"])).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("row 2") && msg.contains("abc"), "{msg}");
}

#[test]
fn empty_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "a.csv", "");
    assert!(matches!(load_csv(&p, "g", &features(&["f1"])), Err(CliError::Validation(_))));
}

#[test]
fn subsample_draws_the_requested_sizes() {
    let d = gen_synthetic(1, &SyntheticSpec::default()).unwrap();
    let sizes = [
        GroupSample { group: "majority".into(), size: 30 },
        GroupSample { group: "minority".into(), size: 10 },
    ];
    let s = subsample(&d, &sizes, 4).unwrap();
    assert_eq!(s.len(), 40);
    assert_eq!(s.group(s.group_id("minority").unwrap()).len(), 10);
    assert_eq!(s, subsample(&d, &sizes, 4).unwrap());
    let too_many = [GroupSample { group: "minority".into(), size: 51 }];
    assert!(subsample(&d, &too_many, 4).unwrap_err().to_string().contains("size 50"));
}

fn small_config() -> ExperimentConfig {
    ExperimentConfig::from_json(
        r#"{
            "source": {"kind": "synthetic", "spec": {"majority_size": 40, "minority_size": 10}},
            "k": 2,
            "methods": ["ls-fair", "lp-fair-dependent"],
            "draws": 2,
            "repetitions": 2,
            "seed": 5
        }"#,
    )
    .unwrap()
}

#[test]
fn config_rejects_unknown_fields_and_bad_values() {
    assert!(ExperimentConfig::from_json(r#"{"source": {"kind": "synthetic"}, "kk": 3}"#).is_err());
    let err = ExperimentConfig::from_json(r#"{"source": {"kind": "synthetic"}, "repetitions": 0}"#).unwrap_err();
    assert_eq!(err.exit_code(), 1);
    let c = ExperimentConfig::from_json(r#"{"source": {"kind": "synthetic"}}"#).unwrap();
    assert_eq!(c.k, 3);
    assert_eq!(c.methods, vec![Method::Standard, Method::LsFair, Method::LpFairDependent]);
    assert!(matches!(c.source, DataSource::Synthetic { .. }));
}

#[test]
fn experiment_report_layout_and_percentages() {
    let config = small_config();
    let report = run_experiment(&config).unwrap();
    let methods: Vec<&str> = report.rows.iter().map(|r| r.method.as_str()).collect();
    assert_eq!(
        methods,
        [GROUP_OPTIMAL, GROUP_OPTIMAL, "standard", "standard", "ls-fair", "ls-fair", "lp-fair-dependent", "lp-fair-dependent"]
    );
    for g in &report.groups {
        let std = report.row("standard", g).unwrap().avg_cost;
        let opt = report.row(GROUP_OPTIMAL, g).unwrap().avg_cost;
        for r in report.rows.iter().filter(|r| &r.group == g) {
            assert_eq!(r.seed_count, 2);
            if let Some(p) = r.pct_vs_standard {
                assert!((p - 100.0 * r.avg_cost / std).abs() < 1e-9);
            }
            if let Some(p) = r.pct_vs_group_opt {
                assert!((p - 100.0 * r.avg_cost / opt).abs() < 1e-9);
            }
        }
    }
    // One group-optimal cell plus one per method and repetition.
    assert_eq!(report.cells.len(), 2 * 4);
    assert_eq!(report, run_experiment(&config).unwrap());
}

#[test]
fn report_round_trips_and_csv_has_the_fixed_header() {
    let report = run_experiment(&small_config()).unwrap();
    let json = to_json(&report).unwrap();
    assert_eq!(from_json(&json).unwrap(), report);
    let csv = to_csv(&report).unwrap();
    assert_eq!(csv.lines().next().unwrap(), CSV_COLUMNS.join(","));
    assert_eq!(csv.lines().count(), 1 + report.rows.len());
}

#[test]
fn existing_output_needs_force() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "out.json", "old");
    let err = write_output("new", Some(&p), false).unwrap_err();
    assert!(err.to_string().contains("--force"));
    assert_eq!(std::fs::read_to_string(&p).unwrap(), "old");
    write_output("new", Some(&p), true).unwrap();
    assert_eq!(std::fs::read_to_string(&p).unwrap(), "new");
}

fn grouprep(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_grouprep")).args(args).output().unwrap()
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "d.csv", "x,y,g\n0,0,a\n1,0,a\n5,5,b\n6,5,b\n");
    let data = data.to_str().unwrap();

    let ok = grouprep(&["kmedian", "--input", data, "--features", "x,y", "--group-column", "g", "--k", "2"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    let v: serde_json::Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert!(v.is_object());

    let missing = grouprep(&["kmedian", "--input", data, "--features", "x,z", "--group-column", "g"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("\"z\""));

    let bad_flag = grouprep(&["kmedian", "--no-such-flag"]);
    assert_eq!(bad_flag.status.code(), Some(1));

    let help = grouprep(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
}

#[test]
fn gen_synthetic_is_reproducible_from_the_seed() {
    let a = grouprep(&["gen-synthetic", "--seed", "3", "--format", "csv"]);
    let b = grouprep(&["gen-synthetic", "--seed", "3", "--format", "csv"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(String::from_utf8_lossy(&a.stdout).lines().count(), 301);
}
