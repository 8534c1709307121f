use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const TRIANGLE: &str = r#"{"type":"vpolytope","dim":2,"vertices":[[0,0],[1,0],[0,1]]}"#;
const RECTANGLE: &str = r#"{"type":"vpolytope","dim":2,"vertices":[[0,0],[2,0],[2,1],[0,1]]}"#;
const CUBE_MEASURE: &str = r#"{"dim":3,"atoms":[
  {"normal":[1,0,0],"mass":1},{"normal":[-1,0,0],"mass":1},
  {"normal":[0,1,0],"mass":1},{"normal":[0,-1,0],"mass":1},
  {"normal":[0,0,1],"mass":1},{"normal":[0,0,-1],"mass":1}]}"#;

fn run(args: &[&str]) -> Output {
    run_with(args, &[])
}

fn run_with(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_shadowcover"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn verify_counterexample_passes() {
    let out = run(&["verify-counterexample", "--n", "3", "--frames", "50", "--samples", "1000"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["verdict"], true);
    assert_eq!(v["cover"]["verdict"], true);
    assert_eq!(v["frame_slacks"].as_array().unwrap().len(), 50);
    let gap = &v["gaps"][0];
    assert_eq!(gap["m"], 3);
    assert!((gap["K"].as_f64().unwrap() - 0.121902385702756).abs() < 1e-12);
}

#[test]
fn epsilon_one_fails_the_volume_test() {
    let out = run(&["verify-counterexample", "--n", "3", "--epsilon", "1.0", "--frames", "20", "--samples", "1000"]);
    assert_eq!(code(&out), 1);
    assert_eq!(json(&out)["volumes_ok"], false);
}

#[test]
fn bad_configuration_exits_two() {
    assert_eq!(code(&run(&["verify-counterexample", "--frames", "0"])), 2);
    assert_eq!(code(&run(&["verify-counterexample", "--n", "3", "--k", "3", "--frames", "5"])), 2);
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope.json");
    let bad = write(dir.path(), "bad.json", "{\"type\":\"vpolytope\"");
    assert_eq!(code(&run(&["check-cover", missing.to_str().unwrap(), bad.to_str().unwrap(), "--k", "1"])), 2);
    assert_eq!(code(&run(&["check-cover", bad.to_str().unwrap(), bad.to_str().unwrap(), "--k", "1"])), 2);
}

#[test]
fn check_cover_directions() {
    let dir = TempDir::new().unwrap();
    let t = write(dir.path(), "t.json", TRIANGLE);
    let r = write(dir.path(), "r.json", RECTANGLE);
    let (t, r) = (t.to_str().unwrap(), r.to_str().unwrap());

    let ok = run(&["check-cover", t, r, "--k", "1", "--frames", "40"]);
    assert_eq!(code(&ok), 0);
    let v = json(&ok);
    assert_eq!(v["verdict"], true);
    assert!(v["min_slack"].as_f64().unwrap() > 0.0);

    let reversed = run(&["check-cover", r, t, "--k", "1", "--frames", "40"]);
    assert_eq!(code(&reversed), 1);
    let v = json(&reversed);
    assert_eq!(v["verdict"], false);
    assert!(v["witness_frame"].is_u64());

    let same = run(&["check-cover", t, t, "--k", "1", "--frames", "40"]);
    assert_eq!(code(&same), 0);
    assert!(json(&same)["min_slack"].as_f64().unwrap().abs() < 1e-9);
}

#[test]
fn check_cover_writes_prefix_files() {
    let dir = TempDir::new().unwrap();
    let t = write(dir.path(), "t.json", TRIANGLE);
    let r = write(dir.path(), "r.json", RECTANGLE);
    let prefix = dir.path().join("cover");
    let out = run(&["check-cover", t.to_str().unwrap(), r.to_str().unwrap(), "--k", "1", "--frames", "25", "--out", prefix.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let csv = fs::read_to_string(dir.path().join("cover.csv")).unwrap();
    assert_eq!(csv.lines().count(), 26);
    let summary: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("cover.json")).unwrap()).unwrap();
    assert_eq!(summary["frames"], 25);
}

#[test]
fn inequality_report_rows() {
    let out = run(&["inequality-report", "--generator", "simplex", "--which", "steinhagen,cylinder", "--i", "2", "--format", "csv"]);
    assert_eq!(code(&out), 1);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "name,lhs,rhs,slack,verdict,tol,seed");
    assert!(lines[1].starts_with("steinhagen,") && lines[1].contains(",true,"));
    assert!(lines[2].starts_with("cylinder_inequality_i2,") && lines[2].contains(",false,"));

    let cube = run(&["inequality-report", "--generator", "cube", "--which", "cylinder", "--i", "1", "--format", "csv"]);
    assert_eq!(code(&cube), 0);

    let batch = run(&["inequality-report", "--generator", "cylinder-batch", "--count", "4", "--samples", "20000", "--format", "csv"]);
    assert_eq!(code(&batch), 0, "{}", String::from_utf8_lossy(&batch.stderr));
    let text = String::from_utf8(batch.stdout).unwrap();
    assert!(text.lines().count() > 4);
    assert!(text.lines().skip(1).all(|l| l.contains(",true,")));
}

#[test]
fn blaschke_and_minkowski_solve() {
    let dir = TempDir::new().unwrap();
    let t = write(dir.path(), "t.json", TRIANGLE);
    let r = write(dir.path(), "r.json", RECTANGLE);
    let out = run(&["blaschke", t.to_str().unwrap(), r.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["body"]["vertices"].as_array().unwrap().len(), 5);

    let m = write(dir.path(), "m.json", CUBE_MEASURE);
    let out = run(&["minkowski-solve", m.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let verts = json(&out)["body"]["vertices"].as_array().unwrap().clone();
    assert_eq!(verts.len(), 8);
    for v in verts {
        for c in v.as_array().unwrap() {
            assert!((c.as_f64().unwrap().abs() - 0.5).abs() < 1e-7);
        }
    }
}

#[test]
fn plot_data_sweep_has_every_step() {
    let out = run(&["plot-data", "--experiment", "epsilon-sweep", "--samples", "1000"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# critical_epsilon "));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 101);
}

#[test]
fn output_does_not_depend_on_thread_count() {
    let args = ["verify-counterexample", "--n", "4", "--k", "2", "--frames", "40", "--samples", "200000", "--seed", "7"];
    let one = run_with(&args, &[("SHADOWCOVER_THREADS", "1")]);
    let four = run_with(&args, &[("SHADOWCOVER_THREADS", "4")]);
    assert!(one.status.code().is_some());
    assert_eq!(one.stdout, four.stdout);
    assert!(!one.stdout.is_empty());
}
