//! End-to-end checks against the built binary: exit codes, emitted files,
//! and the promises the manifest makes about them.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_reuse-sim"));
    cmd.env_remove("RUST_LOG");
    cmd
}

fn write_scenario(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn listed_files(out_dir: &Path) -> Vec<String> {
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    manifest["files"]
        .as_array()
        .unwrap()
        .iter()
        .map(|entry| entry["path"].as_str().unwrap().to_string())
        .collect()
}

const SMALL_EDGE_ONLY: &str =
    r#"{"strategies": ["EDGE_ONLY"], "workload_config": {"num_tasks": 25}, "trials": 2}"#;
const SMALL_EDGE_REUSE: &str =
    r#"{"strategies": ["EDGE_REUSE"], "workload_config": {"num_tasks": 25}, "trials": 2}"#;

#[test]
fn minimal_scenario_runs_and_writes_three_files() {
    let dir = TempDir::new().unwrap();
    let scenario = write_scenario(dir.path(), "s.json", r#"{"strategies": ["EDGE_ONLY"]}"#);
    let out = dir.path().join("out");

    let output = bin()
        .args(["run", scenario.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));

    let text = stdout(&output);
    assert!(text.contains("EDGE_ONLY"), "{text}");
    assert!(text.contains("wrote 3 files"), "{text}");
    let mut names: Vec<String> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(
        names,
        ["manifest.json", "records_EDGE_ONLY.csv", "report_EDGE_ONLY.json"]
    );
    assert_eq!(
        listed_files(&out),
        ["records_EDGE_ONLY.csv", "report_EDGE_ONLY.json"]
    );
}

#[test]
fn invalid_zipf_exponent_exits_two_and_names_the_field() {
    let dir = TempDir::new().unwrap();
    let scenario = write_scenario(
        dir.path(),
        "s.json",
        r#"{"workload_config": {"zipf_exponent": -1}}"#,
    );
    let output = bin()
        .args([
            "run",
            scenario.to_str().unwrap(),
            "--out",
            dir.path().join("out").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr(&output).contains("zipf_exponent"), "{}", stderr(&output));
}

#[test]
fn missing_scenario_file_exits_three() {
    let dir = TempDir::new().unwrap();
    let output = bin()
        .args([
            "run",
            dir.path().join("absent.json").to_str().unwrap(),
            "--out",
            dir.path().join("out").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3), "{}", stderr(&output));
}

#[test]
fn reruns_produce_identical_checksums() {
    let dir = TempDir::new().unwrap();
    let scenario = write_scenario(dir.path(), "s.json", SMALL_EDGE_REUSE);
    let mut manifests = Vec::new();
    for sub in ["a", "b"] {
        let out = dir.path().join(sub);
        let output = bin()
            .args(["run", scenario.to_str().unwrap(), "--out", out.to_str().unwrap()])
            .output()
            .unwrap();
        assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
        let manifest: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
        manifests.push(manifest["files"].clone());
    }
    assert_eq!(manifests[0], manifests[1]);
}

#[test]
fn audit_flag_dumps_per_trial_inputs() {
    let dir = TempDir::new().unwrap();
    let scenario = write_scenario(dir.path(), "s.json", SMALL_EDGE_REUSE);
    let out = dir.path().join("out");
    let output = bin()
        .args([
            "run",
            scenario.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--audit",
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    for trial in 0..2 {
        for name in ["catalog", "workload"] {
            assert!(out.join(format!("audit/{name}_t{trial}.jsonl")).is_file());
        }
        for name in ["hyperplanes", "table"] {
            assert!(out.join(format!("audit/{name}_t{trial}.json")).is_file());
        }
    }
    assert!(listed_files(&out).contains(&"audit/table_t1.json".to_string()));
}

#[test]
fn unknown_sweep_axis_exits_two() {
    let dir = TempDir::new().unwrap();
    let scenario = write_scenario(dir.path(), "s.json", SMALL_EDGE_ONLY);
    let output = bin()
        .args([
            "sweep",
            scenario.to_str().unwrap(),
            "--axis",
            "bogus",
            "--values",
            "1,2",
            "--out",
            dir.path().join("out").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr(&output).contains("unknown sweep axis"), "{}", stderr(&output));
}

#[test]
fn single_value_sweep_matches_a_plain_run() {
    let dir = TempDir::new().unwrap();
    let scenario = write_scenario(dir.path(), "s.json", SMALL_EDGE_ONLY);
    let run_out = dir.path().join("run");
    let sweep_out = dir.path().join("sweep");

    let run = bin()
        .args(["run", scenario.to_str().unwrap(), "--out", run_out.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(run.status.code(), Some(0), "{}", stderr(&run));
    let sweep = bin()
        .args([
            "sweep",
            scenario.to_str().unwrap(),
            "--axis",
            "num_tasks",
            "--values",
            "25",
            "--out",
            sweep_out.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(sweep.status.code(), Some(0), "{}", stderr(&sweep));

    for name in ["report_EDGE_ONLY.json", "records_EDGE_ONLY.csv"] {
        let plain = fs::read(run_out.join(name)).unwrap();
        let swept = fs::read(sweep_out.join(format!("num_tasks_25/{name}"))).unwrap();
        assert_eq!(plain, swept, "{name} differs between run and sweep");
    }
}

#[test]
fn sweep_csv_rows_match_the_per_run_reports() {
    let dir = TempDir::new().unwrap();
    let scenario = write_scenario(dir.path(), "s.json", SMALL_EDGE_REUSE);
    let out = dir.path().join("out");
    let output = bin()
        .args([
            "sweep",
            scenario.to_str().unwrap(),
            "--axis",
            "table_capacity",
            "--values",
            "5,10",
            "--out",
            out.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));

    let tidy = fs::read_to_string(out.join("sweep.csv")).unwrap();
    let mut lines = tidy.lines();
    assert_eq!(lines.next(), Some("axis,value,strategy,metric,result"));
    let mut rows = 0;
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        let [axis, value, strategy, metric, result] = fields[..] else {
            panic!("malformed row {line:?}");
        };
        assert_eq!(axis, "table_capacity");
        let report: serde_json::Value = serde_json::from_str(
            &fs::read_to_string(
                out.join(format!("table_capacity_{value}/report_{strategy}.json")),
            )
            .unwrap(),
        )
        .unwrap();
        let key = match metric {
            "completion_time" => "mean_completion_time",
            "computation_time" => "mean_computation_time",
            other => other,
        };
        assert_eq!(
            result.parse::<f64>().unwrap(),
            report[key].as_f64().unwrap(),
            "{metric} at capacity {value}"
        );
        rows += 1;
    }
    assert_eq!(rows, 12);

    let series = fs::read_to_string(out.join("series_reuse_hit_rate.csv")).unwrap();
    let lines: Vec<&str> = series.lines().collect();
    assert_eq!(lines[0], "value,EDGE_REUSE");
    assert_eq!(lines.len(), 3);
}

#[test]
fn compare_against_itself_reports_zero_gain() {
    let dir = TempDir::new().unwrap();
    let scenario = write_scenario(dir.path(), "s.json", SMALL_EDGE_ONLY);
    let out = dir.path().join("out");
    bin()
        .args(["run", scenario.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .output()
        .unwrap();

    let report = out.join("report_EDGE_ONLY.json");
    let output = bin()
        .args([
            "compare",
            report.to_str().unwrap(),
            report.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    let text = stdout(&output);
    let gain_line = text
        .lines()
        .find(|l| l.starts_with("completion_gain"))
        .unwrap();
    assert!(gain_line.trim_end().ends_with("0.000000"), "{gain_line}");
}

#[test]
fn compare_rejects_reports_from_different_workloads() {
    let dir = TempDir::new().unwrap();
    let mut reports = Vec::new();
    for (name, seed) in [("a", 1), ("b", 2)] {
        let scenario = write_scenario(
            dir.path(),
            &format!("{name}.json"),
            &format!(
                r#"{{"strategies": ["EDGE_ONLY"], "workload_config": {{"num_tasks": 25}},
                     "trials": 2, "master_seed": {seed}}}"#
            ),
        );
        let out = dir.path().join(name);
        bin()
            .args(["run", scenario.to_str().unwrap(), "--out", out.to_str().unwrap()])
            .output()
            .unwrap();
        reports.push(out.join("report_EDGE_ONLY.json"));
    }
    let output = bin()
        .args([
            "compare",
            reports[0].to_str().unwrap(),
            reports[1].to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr(&output).contains("fingerprint"), "{}", stderr(&output));
}

#[test]
fn log_verbosity_follows_the_environment() {
    let dir = TempDir::new().unwrap();
    let scenario = write_scenario(dir.path(), "s.json", SMALL_EDGE_ONLY);

    let quiet = bin()
        .args([
            "run",
            scenario.to_str().unwrap(),
            "--out",
            dir.path().join("quiet").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(quiet.status.code(), Some(0));
    assert!(stderr(&quiet).is_empty(), "{}", stderr(&quiet));

    let chatty = bin()
        .env("RUST_LOG", "info")
        .args([
            "run",
            scenario.to_str().unwrap(),
            "--out",
            dir.path().join("chatty").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(chatty.status.code(), Some(0));
    assert!(
        stderr(&chatty).contains("running EDGE_ONLY"),
        "{}",
        stderr(&chatty)
    );
}
