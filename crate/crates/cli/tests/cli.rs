use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use graph_eikonal::fixtures::{G1_JSON, G3_JSON};
use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_graph-eikonal"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn g3_file(dir: &TempDir) -> String {
    write(dir.path(), "g3.json", G3_JSON).to_str().unwrap().to_string()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn validate_exit_codes() {
    let dir = TempDir::new().unwrap();
    let g3 = g3_file(&dir);
    let ok = run(&["validate", "--graph", &g3]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(stdout_json(&ok)["edges"], 3);

    let bad = write(
        dir.path(),
        "bad.json",
        r#"{"vertices":[{"id":"a","boundary":true},{"id":"m","boundary":false},{"id":"b","boundary":true}],
            "edges":[{"id":"e1","from":"a","to":"m","length":"1"},{"id":"e2","from":"m","to":"b","length":"1"}]}"#,
    );
    let out = run(&["validate", "--graph", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("graph:"));

    let missing = dir.path().join("missing.json");
    assert_eq!(run(&["validate", "--graph", missing.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn validate_echoes_canonical_document() {
    let dir = TempDir::new().unwrap();
    let g1 = write(dir.path(), "g1.json", G1_JSON);
    let out_dir = dir.path().join("out");
    let out = run(&["validate", "--graph", g1.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success());
    let echoed = fs::read_to_string(out_dir.join("graph.json")).unwrap();
    let again = write(dir.path(), "again.json", &echoed);
    let out2 = dir.path().join("out2");
    run(&["validate", "--graph", again.to_str().unwrap(), "--out", out2.to_str().unwrap()]);
    assert_eq!(fs::read_to_string(out2.join("graph.json")).unwrap(), echoed);
}

#[test]
fn hydra_dot_on_star() {
    let dir = TempDir::new().unwrap();
    let g3 = g3_file(&dir);
    let out = run(&["hydra", "--graph", &g3, "--gamma", "g1", "--time", "3/2"]);
    assert!(out.status.success());
    let dot = String::from_utf8(out.stdout).unwrap();
    assert!(dot.starts_with("graph hydra"));
    assert_eq!(dot.lines().filter(|l| l.contains(" -- ")).count(), 4);
    for amp in ["\"1\"", "\"-1/3\"", "\"2/3\""] {
        assert!(dot.contains(amp), "missing amplitude {amp}");
    }
}

#[test]
fn algebra_blocks_on_star() {
    let dir = TempDir::new().unwrap();
    let g3 = g3_file(&dir);
    let out = run(&["algebra", "--graph", &g3, "--sigma", "g1", "--time", "3/2"]);
    assert!(out.status.success());
    let doc = stdout_json(&out);
    let families = doc["data"]["families"].as_array().unwrap();
    let blocks: usize = families.iter().map(|f| f["blocks"].as_array().unwrap().len()).sum();
    assert_eq!(blocks, 2);
    let big = families.iter().find(|f| f["M"] == 3).unwrap();
    let b = &big["blocks"][0];
    assert_eq!(b["alpha"][1], serde_json::json!(["-1/3", "2/3", "2/3"]));
    assert_eq!(
        b["delta_p"][1],
        serde_json::json!([["0", "0", "0"], ["0", "1/2", "1/2"], ["0", "1/2", "1/2"]])
    );
    assert_eq!(doc["metadata"]["tool"], "graph-eikonal");
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let g3 = g3_file(&dir);
    let mut dumps = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("run{k}"));
        for cmd in ["hydra", "partition", "algebra"] {
            let o = run(&[cmd, "--graph", &g3, "--sigma", "g1", "--sigma", "g2", "--time", "3/2", "--out", out.to_str().unwrap()]);
            assert!(o.status.success(), "{cmd} failed");
        }
        let mut names: Vec<_> = fs::read_dir(&out).unwrap().map(|e| e.unwrap().path()).collect();
        names.sort();
        dumps.push(names.iter().map(|p| (p.file_name().unwrap().to_owned(), fs::read(p).unwrap())).collect::<Vec<_>>());
    }
    assert_eq!(dumps[0], dumps[1]);
    assert_eq!(dumps[0].len(), 5);
}

#[test]
fn simulate_both_methods_agree() {
    let dir = TempDir::new().unwrap();
    let g3 = g3_file(&dir);
    let controls = write(
        dir.path(),
        "f.json",
        r#"{"g1": [{"t": "0", "value": "0"}, {"t": "1/4", "value": "1"}, {"t": "1/2", "value": "0"}]}"#,
    );
    let out = dir.path().join("sim");
    let o = run(&[
        "simulate", "--graph", &g3, "--sigma", "g1", "--time", "3/2", "--grid", "1/16",
        "--controls", controls.to_str().unwrap(), "--method", "both", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_str(&fs::read_to_string(out.join("simulate.json")).unwrap()).unwrap();
    let diff: f64 = report["data"]["max_node_discrepancy"].as_str().unwrap().parse().unwrap();
    assert!(diff <= 1e-9);
    let csv = fs::read_to_string(out.join("snapshot_hydra.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3 * 17);
}

#[test]
fn bad_arguments_are_diagnosed() {
    let dir = TempDir::new().unwrap();
    let g3 = g3_file(&dir);
    let o = run(&["hydra", "--graph", &g3, "--sigma", "g1", "--time", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["hydra", "--graph", &g3, "--sigma", "v", "--time", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("hydra:"));
    let o = run(&["hydra", "--graph", &g3, "--sigma", "g1", "--time", "5", "--max-events", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cap"));
}

#[test]
fn verify_default_suite_passes() {
    let o = run(&["verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let doc = stdout_json(&o);
    assert_eq!(doc["data"]["passed"], true);
    assert!(doc["data"]["checks"].as_array().unwrap().len() >= 20);
}

#[test]
fn verify_on_a_user_graph() {
    let dir = TempDir::new().unwrap();
    let g1 = write(dir.path(), "g1.json", G1_JSON);
    let o = run(&["verify", "--graph", g1.to_str().unwrap(), "--sigma", "g", "--sigma", "gp", "--time", "3/4", "--grid", "1/16", "--xi-steps", "8"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let o = run(&["verify", "--graph", g1.to_str().unwrap(), "--sigma", "g"]);
    assert_eq!(o.status.code(), Some(2));
}
