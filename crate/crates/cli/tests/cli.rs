use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn qglass(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qglass"));
    cmd.args(args).env_remove("QGLASS_THREADS");
    if let Some(t) = threads {
        cmd.env("QGLASS_THREADS", t);
    }
    cmd.output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn ea_output_is_independent_of_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let mut data = Vec::new();
    let mut digests = Vec::new();
    for threads in ["1", "4"] {
        let path = dir.path().join(format!("ea_{threads}.csv"));
        let o = qglass(
            &[
                "ea", "--geometry", "square", "--j-mean", "0", "--j-var", "1", "--t-min", "0", "--t-max", "5",
                "--steps", "11", "--samples", "700", "--seed", "7", "--out", path.to_str().unwrap(),
            ],
            Some(threads),
        );
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        data.push(fs::read(&path).unwrap());
        let manifest: Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join(format!("ea_{threads}.csv.manifest.json"))).unwrap())
                .unwrap();
        assert_eq!(manifest["threads"], threads.parse::<u64>().unwrap());
        assert_eq!(manifest["rows"], 11);
        assert!(manifest["rng_transform"].as_str().unwrap().contains("chacha8"));
        digests.push(manifest["config_digest"].as_str().unwrap().to_string());
    }
    assert_eq!(data[0], data[1]);
    assert_eq!(digests[0], digests[1]);
    assert_eq!(digests[0].len(), 64);
}

#[test]
fn ea_csv_has_header_and_one_row_per_step() {
    let o = qglass(&["ea", "--t-max", "3", "--steps", "4", "--samples", "50"], Some("1"));
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,mean_ln,std_ln,sem_ln");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("0,0,0,0"));
}

#[test]
fn ball_row_matches_estimate() {
    let o = qglass(&["ball", "--d", "6", "--radius", "0"], None);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let row = text.lines().nth(1).unwrap();
    assert!(row.starts_with("6,0,"));
    let e: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
    assert!((e - 0.017_858).abs() < 1e-5);
}

#[test]
fn oracle_check_passes() {
    let o = qglass(&["oracle-check"], None);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true")));
}

#[test]
fn json_output_parses() {
    let o = qglass(&["lro", "--n", "10", "--steps", "5", "--format", "json"], None);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[0]["t"], 0.0);
    assert_eq!(rows[0]["ln"], 0.0);
}

#[test]
fn gate_reports_fidelity_above_classical() {
    let o = qglass(&["gate", "--j-mean", "5", "--j-var", "0", "--hold-time", "0.6283185307179586", "--samples", "10"], None);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let row: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert!((row[3] - 1.0).abs() < 1e-12);
    assert!((row[6] - 2.0 / 3.0).abs() < 1e-15);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&qglass(&["ea", "--bogus"], None)), 1);
    assert_eq!(code(&qglass(&["ea", "--t-min", "3", "--t-max", "1"], None)), 1);
    assert_eq!(code(&qglass(&["ea", "--steps", "0"], None)), 1);
    assert_eq!(code(&qglass(&["ea", "--samples", "0"], None)), 1);
    assert_eq!(code(&qglass(&["ea", "--j-var", "-1"], None)), 1);
    assert_eq!(code(&qglass(&["ball", "--d", "6", "--radius", "0.9"], None)), 1);
    assert_eq!(code(&qglass(&[], None)), 1);
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&qglass(&["--help"], None)), 0);
    assert_eq!(code(&qglass(&["--version"], None)), 0);
}

#[test]
fn unwritable_output_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("out.csv");
    let o = qglass(&["ball", "--d", "4", "--out", path.to_str().unwrap()], None);
    assert_eq!(code(&o), 2);
}
