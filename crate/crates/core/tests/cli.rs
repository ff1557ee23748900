//! End-to-end runs of the `spinwave-lab` binary.

use std::path::Path;
use std::process::{Command, Output};

use spinwave_lab::cli::suite::two_site_oracle;
use spinwave_lab::cli::{read_json_lines, Status};
use spinwave_lab::model::SpinValue;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinwave-lab")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8")
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

#[test]
fn free_energy_matches_two_site_oracle() {
    let o = run(&["free-energy", "--dim", "1", "--side", "2", "--two-s", "2", "--beta", "0.5,1,3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = csv_rows(&stdout(&o));
    assert_eq!(header, ["command", "status", "dim", "side", "two_s", "beta", "Z", "f"]);
    assert_eq!(rows.len(), 3);
    let levels = two_site_oracle(SpinValue::new(2).unwrap());
    for row in rows {
        assert_eq!(row[0], "free-energy");
        assert_eq!(row[1], "ok");
        let beta: f64 = row[5].parse().unwrap();
        let z: f64 = levels.iter().map(|e| (-beta * e).exp()).sum();
        let f = -z.ln() / (2.0 * beta);
        let got_z: f64 = row[6].parse().unwrap();
        let got_f: f64 = row[7].parse().unwrap();
        assert!((got_z - z).abs() <= 1e-12 * z, "Z {got_z} vs {z}");
        assert!((got_f - f).abs() <= 1e-12, "f {got_f} vs {f}");
    }
}

#[test]
fn invalid_input_is_a_usage_error_with_no_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.csv");
    let o = run(&["gap", "--side", "0", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(o.stdout.is_empty());
    assert!(!out.exists());

    let o = run(&["free-energy", "--beta", "-1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(o.stdout.is_empty());

    let o = run(&["no-such-command"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn output_is_byte_identical_across_runs() {
    let args = ["rho2", "--dim", "1", "--side", "4", "--two-s", "1", "--sector", "2", "--steps", "5"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn json_lines_round_trip_through_the_reader() {
    let o = run(&["bounds", "--two-s", "2", "--beta", "100,1000", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let records = read_json_lines(&stdout(&o)).unwrap();
    assert_eq!(records.len(), 2);
    for r in &records {
        assert!(r.passed());
        let upper = r.output("upper_total").unwrap();
        let lower = r.output("lower_total").unwrap();
        assert!(upper >= lower && upper < 0.0);
        let line = serde_json::to_string(r).unwrap();
        assert_eq!(read_json_lines(&line).unwrap()[0], *r);
    }
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

#[test]
fn config_file_drives_a_run_and_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let out = dir.path().join("out.csv");
    write(
        &cfg,
        &format!(r#"{{"command": "free-energy", "dim": 1, "side": 2, "two_s": 2, "beta": [0.5, 1, 3], "out": {:?}}}"#, out),
    );
    let o = run(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let flags = run(&["free-energy", "--dim", "1", "--side", "2", "--two-s", "2", "--beta", "0.5,1,3"]);
    assert_eq!(std::fs::read(&out).unwrap(), flags.stdout);

    write(&cfg, r#"{"command": "gap", "sidez": 3}"#);
    let o = run(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(o.stdout.is_empty());

    let o = run(&["--config", cfg.to_str().unwrap(), "gap"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn oversized_work_is_refused_not_attempted() {
    let o = run(&["free-energy", "--dim", "2", "--side", "5", "--format", "json"]);
    assert_eq!(o.status.code(), Some(2));
    let records = read_json_lines(&stdout(&o)).unwrap();
    assert_eq!(records.len(), 1);
    assert_eq!(records[0].status, Status::Refused);
    assert!(records[0].message.as_deref().unwrap_or("").contains("budget"), "{:?}", records[0].message);
}

#[test]
fn every_subcommand_runs_on_a_small_system() {
    for args in [
        &["spectrum", "--side", "3", "--two-s", "2"][..],
        &["spectrum", "--dim", "2", "--side", "2", "--sector", "2"],
        &["gap", "--dim", "2", "--side", "2"],
        &["kernels", "--dim", "1", "--side", "4", "--steps", "8"],
        &["greens"],
        &["paths", "--sides", "4,6"],
    ] {
        let o = run(args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}{}", stdout(&o), String::from_utf8_lossy(&o.stderr));
        let (header, rows) = csv_rows(&stdout(&o));
        assert_eq!(&header[..2], ["command", "status"]);
        assert!(!rows.is_empty(), "{args:?}");
        assert!(rows.iter().all(|r| r[1] == "ok"));
    }
}

#[test]
fn timing_adds_a_wall_time_column() {
    let o = run(&["gap", "--dim", "1", "--side", "3", "--timing"]);
    assert_eq!(o.status.code(), Some(0));
    let (header, _) = csv_rows(&stdout(&o));
    assert_eq!(header.last().map(String::as_str), Some("wall_time"));
}

#[test]
fn fast_verify_all_passes() {
    let o = run(&["verify-all", "--suite", "fast", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let records = read_json_lines(&stdout(&o)).unwrap();
    for k in 1..=10 {
        assert!(records.iter().any(|r| r.input("criterion") == Some(&k.to_string())), "criterion {k} missing");
    }
    assert!(records.iter().all(|r| r.passed()));
}
