use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn gu3(args: &[&str]) -> Output {
    gu3_with(args, None, None)
}

fn gu3_with(args: &[&str], stdin: Option<&str>, cache: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_gu3"));
    cmd.args(args).stdin(Stdio::piped()).stdout(Stdio::piped()).stderr(Stdio::piped());
    match cache {
        Some(dir) => cmd.env("GU3_CACHE_DIR", dir),
        None => cmd.env_remove("GU3_CACHE_DIR"),
    };
    let mut child = cmd.spawn().expect("binary runs");
    child.stdin.take().unwrap().write_all(stdin.unwrap_or("").as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

const IDENTITY: &str = r#"{"p":5,"denom_exp":0,"rows":[["1","0","0"],["0","1","0"],["0","0","1"]]}"#;

#[test]
fn gen_manifest() {
    let out = gu3(&["gen", "--p", "5"]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["manifest"]["count"], 62);
    assert_eq!(doc["manifest"]["p_prime"], 5);
    assert_eq!(doc["matrices"].as_array().unwrap().len(), 62);
    assert_eq!(doc["config"]["variant"], "full");
    let split = json(&gu3(&["gen", "--p", "5", "--variant", "split"]));
    assert_eq!(split["manifest"]["count"], 31);
    assert_eq!(split["manifest"]["symmetric"], false);
    let inert = json(&gu3(&["gen", "--p", "3"]));
    assert_eq!(inert["manifest"]["p_prime"], 9);
}

#[test]
fn outputs_round_trip_through_the_library_types() {
    let doc = json(&gu3(&["gen", "--p", "13", "--variant", "split"]));
    for m in doc["matrices"].as_array().unwrap() {
        let parsed: gu3::similitude::SimilitudeMatrix<i64> = serde_json::from_value(m.clone()).unwrap();
        assert_eq!(serde_json::to_value(&parsed).unwrap(), *m);
        assert_eq!(parsed.pi_height().unwrap(), 1);
    }
}

#[test]
fn outputs_are_deterministic() {
    let a = gu3(&["gen", "--p", "7"]);
    let b = gu3(&["gen", "--p", "7", "--threads", "2"]);
    assert_eq!(a.stdout, b.stdout);
    let c = gu3(&["cover", "--p", "3", "--lmax", "1", "--samples", "40", "--seed", "3"]);
    let d = gu3(&["cover", "--p", "3", "--lmax", "1", "--samples", "40", "--seed", "3", "--threads", "1"]);
    assert_eq!(code(&c), 0);
    assert_eq!(c.stdout, d.stdout);
}

#[test]
fn identify_table_entry() {
    let doc = json(&gu3(&["identify", "--p", "5", "--q", "3"]));
    assert_eq!(doc["label"], "PSU3(F_3)");
    assert_eq!(doc["tripartite"], false);
    assert_eq!(doc["bfs_order"], 6048);
    assert_eq!(doc["det_class_agrees"], true);
    let big = gu3(&["identify", "--p", "3", "--q", "13", "--cap", "10"]);
    assert_eq!(code(&big), 0);
    assert_eq!(json(&big)["bfs_order"], Value::Null);
}

#[test]
fn navigate_identity_and_products() {
    let out = gu3_with(&["navigate", "--p", "5"], Some(IDENTITY), None);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    assert_eq!(doc["word"], serde_json::json!([]));
    assert_eq!(doc["verified"], true);

    let gens = json(&gu3(&["gen", "--p", "5", "--variant", "split"]));
    let pick = |k: usize| -> gu3::similitude::SimilitudeMatrix<i64> { serde_json::from_value(gens["matrices"][k].clone()).unwrap() };
    let g = pick(4).mul(&pick(17)).mul(&pick(30));
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("g.json");
    let output = dir.path().join("w.json");
    std::fs::write(&input, serde_json::to_string(&g).unwrap()).unwrap();
    let out = gu3(&["navigate", "--p", "5", "--in", input.to_str().unwrap(), "--out", output.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&output).unwrap()).unwrap();
    assert_eq!(doc["length"].as_u64().unwrap() as u32, g.pi_height().unwrap());
    assert_eq!(doc["verified"], true);
    for letter in doc["word"].as_array().unwrap() {
        assert_eq!(letter["inverse"], false);
        assert!(letter["index"].as_u64().unwrap() < 31);
    }
}

#[test]
fn validation_errors_exit_2() {
    assert_eq!(code(&gu3(&["gen", "--p", "9"])), 2);
    assert_eq!(code(&gu3(&["gen", "--p", "3", "--variant", "split"])), 2);
    assert_eq!(code(&gu3(&["frobnicate"])), 2);
    assert_eq!(code(&gu3_with(&["navigate", "--p", "5"], Some("not json"), None)), 2);
    // diag(1, 1, i) is unitary but outside the lattice
    let off = r#"{"p":5,"denom_exp":0,"rows":[["1","0","0"],["0","1","0"],["0","0","i"]]}"#;
    let out = gu3_with(&["navigate", "--p", "5"], Some(off), None);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("not in the lattice"));
    assert_eq!(code(&gu3(&["spectrum", "--p", "5", "--q", "3", "--variant", "split", "--mode", "extremal"])), 2);
    assert_eq!(code(&gu3(&["identify", "--p", "5", "--q", "5"])), 2);
}

#[test]
fn resource_caps_exit_3() {
    assert_eq!(code(&gu3(&["sizes", "--p", "3", "--lmax", "3", "--bfs", "--cap", "1000"])), 3);
    assert_eq!(code(&gu3(&["spectrum", "--p", "5", "--q", "3", "--cap", "100"])), 3);
    assert_eq!(code(&gu3(&["cover", "--p", "3", "--lmax", "3", "--samples", "5", "--cap", "500"])), 3);
}

#[test]
fn sizes_with_bfs() {
    let out = gu3(&["sizes", "--p", "5", "--variant", "split", "--lmax", "2", "--bfs"]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    assert_eq!(doc["consistent"], true);
    assert_eq!(doc["rows"][1]["lambda_triv"], "806");
    assert_eq!(doc["rows"][1]["bfs_count"], 806);
    let table = gu3(&["sizes", "--p", "3", "--lmax", "2", "--format", "table"]);
    let text = String::from_utf8(table.stdout).unwrap();
    assert!(text.lines().nth(1).unwrap().split_whitespace().eq(["1", "84", "20", "-"]));
}

#[test]
fn spectrum_with_exports() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("edges.txt");
    let verts = dir.path().join("vertices.json");
    let report = dir.path().join("report.json");
    let out = gu3(&[
        "spectrum", "--p", "5", "--q", "3", "--variant", "split", "--tol", "1e-8",
        "--edges", edges.to_str().unwrap(), "--vertices", verts.to_str().unwrap(), "--out", report.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(doc["report"]["pass"], true);
    assert_eq!(doc["report"]["vertices"], 6048);
    assert_eq!(doc["report"]["eigenvalues"].as_array().unwrap().len(), 6048);
    let text = std::fs::read_to_string(&edges).unwrap();
    assert_eq!(text.lines().count(), 6048 * 31);
    let first: Vec<u64> = text.lines().next().unwrap().split(' ').map(|t| t.parse().unwrap()).collect();
    assert_eq!(first.len(), 3);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&verts).unwrap()).unwrap();
    assert_eq!(v["vertices"].as_array().unwrap().len(), 6048);
}

#[test]
fn cache_dir_is_used_and_transparent() {
    let dir = tempfile::tempdir().unwrap();
    let cold = gu3_with(&["identify", "--p", "5", "--q", "3"], None, Some(dir.path()));
    let names: Vec<String> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    assert!(names.iter().any(|n| n.starts_with("gates-")), "{names:?}");
    assert!(names.iter().any(|n| n.starts_with("closure-")), "{names:?}");
    let warm = gu3_with(&["identify", "--p", "5", "--q", "3"], None, Some(dir.path()));
    let plain = gu3(&["identify", "--p", "5", "--q", "3"]);
    assert_eq!(cold.stdout, warm.stdout);
    assert_eq!(cold.stdout, plain.stdout);
}

#[test]
fn supergates_and_cover() {
    let doc = json(&gu3(&["supergates", "--syllables", "6"]));
    assert_eq!(doc["sigma_cubed_scalar"], true);
    assert_eq!(doc["tau_cubed_scalar"], true);
    assert_eq!(doc["all_distinct"], true);
    let out = gu3(&["cover", "--p", "3", "--lmax", "2", "--samples", "50"]);
    assert_eq!(code(&out), 0);
    let levels = json(&out)["report"]["levels"].as_array().unwrap().clone();
    assert_eq!(levels.len(), 3);
    assert_eq!(levels[2]["ball_size"], 85 + 6804);
    assert_eq!(levels[1]["distances"].as_array().unwrap().len(), 50);
}
