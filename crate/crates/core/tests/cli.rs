use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn depthkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_depthkit"))
        .args(args)
        .env_remove("DEPTHKIT_SEED")
        .output()
        .expect("spawn depthkit")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

fn cloud(dir: &Path) -> String {
    let mut body = String::from("y1,y2\n");
    for i in 0..30 {
        let t = i as f64 * 0.7;
        body.push_str(&format!("{},{}\n", t.sin() * (1.0 + 0.1 * i as f64), (1.3 * t).cos()));
    }
    write(dir, "cloud.csv", &body)
}

fn csv_map(text: &str) -> Vec<(String, String)> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let h = rdr.headers().unwrap().clone();
    let rec = rdr.records().next().unwrap().unwrap();
    h.iter().map(String::from).zip(rec.iter().map(String::from)).collect()
}

#[test]
fn exit_codes() {
    assert_eq!(depthkit(&["--help"]).status.code(), Some(0));
    assert_eq!(depthkit(&["depth", "location", "--bogus"]).status.code(), Some(2));
    assert_eq!(depthkit(&["depth", "location", "--data", "/nonexistent.csv", "--point", "0"]).status.code(), Some(3));

    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.csv", "y1,y2\n1,2\n3,oops\n");
    let o = depthkit(&["depth", "location", "--data", &bad, "--point", "0,0"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("row"));

    let data = cloud(dir.path());
    let o = depthkit(&["depth", "location", "--data", &data, "--point", "0,0,0"]);
    assert_eq!(o.status.code(), Some(3));
    let o = depthkit(&["depth", "location", "--data", &data, "--point", "0,0", "--zeta-max", "-1"]);
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn json_and_csv_agree() {
    let dir = tempfile::tempdir().unwrap();
    let data = cloud(dir.path());
    let base = ["depth", "location", "--data", &data, "--point", "0.1,0.2", "--seed", "5", "--starts", "3"];
    let json: Value = serde_json::from_str(&stdout(&depthkit(&base))).unwrap();
    let mut args = base.to_vec();
    args.extend(["--format", "csv"]);
    let row = csv_map(&stdout(&depthkit(&args)));
    let get = |k: &str| -> f64 { row.iter().find(|(h, _)| h == k).unwrap().1.parse().unwrap() };

    assert!((json["depth_count"].as_f64().unwrap() - get("depth_count")).abs() <= 1e-15);
    assert!((json["depth_fraction"].as_f64().unwrap() - get("depth_fraction")).abs() <= 1e-15);
    let dir_json: Vec<f64> = json["direction"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert_eq!(dir_json.len(), 2);
    for (k, v) in dir_json.iter().enumerate() {
        assert!((v - get(&format!("v{}", k + 1))).abs() <= 1e-15);
    }
    assert!(json["wall_time_s"].is_null());
    assert_eq!(json["config_echo"]["seed"].as_u64(), Some(5));
}

#[test]
fn oracle_on_symmetric_axes() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "axes.csv", "y1,y2\n1,0\n-1,0\n0,1\n0,-1\n");
    let o: Value = serde_json::from_str(&stdout(&depthkit(&["oracle", "--data", &data, "--point", "0,0"]))).unwrap();
    assert_eq!(o["depth_count"].as_f64(), Some(2.0));
    assert_eq!(o["dim"].as_u64(), Some(2));
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let data = cloud(dir.path());
    let args = ["depth", "location", "--data", &data, "--point", "0,0", "--seed", "11", "--starts", "2"];
    assert_eq!(stdout(&depthkit(&args)), stdout(&depthkit(&args)));
}

#[test]
fn curve_counts_points() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "z.csv", "y\n-2\n-1\n0.5\n1.5\n3\n");
    let text = stdout(&depthkit(&["curve", "--data", &data, "--grid", "0:1:1", "--contrast"]));
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let pts: Vec<(f64, f64)> = rdr
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].parse().unwrap(), r[1].parse().unwrap())
        })
        .collect();
    assert_eq!(pts, vec![(0.0, 0.4), (1.0, 0.4)]);
}

#[test]
fn out_file_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let data = cloud(dir.path());
    let out = dir.path().join("res.json");
    let trace = dir.path().join("trace.jsonl");
    let o = depthkit(&[
        "depth",
        "location",
        "--data",
        &data,
        "--point",
        "0,0",
        "--starts",
        "1",
        "--out",
        out.to_str().unwrap(),
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(v["depth_count"].is_number());
    let lines = std::fs::read_to_string(&trace).unwrap();
    assert!(lines.lines().count() > 0);
    for l in lines.lines() {
        serde_json::from_str::<Value>(l).unwrap();
    }
}
