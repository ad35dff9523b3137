use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use subspace_cohom::arrangement::{arrangement_from_json, orbit_config_arrangement};

fn subcohom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subcohom"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn gen(dir: &Path, name: &str, args: &[&str]) -> PathBuf {
    let path = dir.join(name);
    let mut full = vec!["gen"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--output", path.to_str().unwrap()]);
    let out = subcohom(&full);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    path
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn worked_example_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let file = gen(dir.path(), "w.json", &["orbit-config", "--m", "2", "--n", "2"]);
    let out = subcohom(&["verify", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["status"], "ok");
    assert_eq!(r["betti_dga"], serde_json::json!([1, 9, 0, 0, 0]));
    assert_eq!(r["betti_oracle"], r["betti_dga"]);
    assert_eq!(r["positive_products"], 0);
    assert!(r["chambers"].is_null());
    assert_eq!(r["digest"].as_str().unwrap().len(), 64);
    for key in ["euler", "classes", "products", "audits"] {
        assert!(r.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn text_format_is_a_summary() {
    let dir = tempfile::tempdir().unwrap();
    let file = gen(dir.path(), "w.json", &["orbit-config", "--m", "2", "--n", "2"]);
    let out = subcohom(&["verify", file.to_str().unwrap(), "--format", "text"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("status: ok"));
    assert!(text.contains("b0=1 b1=9 b2=0"));
}

#[test]
fn generator_output_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let file = gen(dir.path(), "a.json", &["orbit-config", "--m", "2", "--n", "3"]);
    let loaded = arrangement_from_json(&std::fs::read_to_string(&file).unwrap()).unwrap();
    let direct = orbit_config_arrangement(2, 3, 24).unwrap();
    assert_eq!(loaded.digest(), direct.digest());
    assert_eq!(loaded.len(), 12);
}

#[test]
fn digest_is_shared_across_commands() {
    let dir = tempfile::tempdir().unwrap();
    let file = gen(dir.path(), "d.json", &["diagonal", "--k", "2", "--n", "3"]);
    let f = file.to_str().unwrap();
    let digests: Vec<Value> = ["poset", "betti", "ring", "oracle", "verify"]
        .iter()
        .map(|cmd| json(&subcohom(&[cmd, f]))["digest"].clone())
        .collect();
    assert!(digests.windows(2).all(|w| w[0] == w[1]), "{digests:?}");
}

#[test]
fn subcommand_reports() {
    let dir = tempfile::tempdir().unwrap();
    let file = gen(dir.path(), "w.json", &["orbit-config", "--m", "2", "--n", "2"]);
    let f = file.to_str().unwrap();

    let poset = json(&subcohom(&["poset", f]));
    assert_eq!(poset["nodes"].as_array().unwrap().len(), 10);
    assert_eq!(poset["covers"].as_array().unwrap().len(), 16);

    let betti = json(&subcohom(&["betti", f]));
    assert_eq!(betti["betti_dga"], serde_json::json!([1, 9, 0, 0, 0]));
    assert_eq!(betti["basis_size"], 16);

    let ring = json(&subcohom(&["ring", f]));
    let classes: usize = ring["classes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|d| d["classes"].as_array().unwrap().len())
        .sum();
    assert_eq!(classes, 10);

    let hyper = gen(dir.path(), "h.json", &["orbit-config", "--m", "1", "--n", "3"]);
    let oracle = json(&subcohom(&["oracle", hyper.to_str().unwrap()]));
    assert_eq!(oracle["chambers"], 24);
    assert_eq!(oracle["betti_oracle"], serde_json::json!([24, 0, 0, 0]));
}

#[test]
fn empty_arrangement_has_betti_one() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("empty.json");
    std::fs::write(&file, r#"{"ambient_dim": 0, "atoms": []}"#).unwrap();
    let out = subcohom(&["betti", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["betti_dga"], serde_json::json!([1]));
}

#[test]
fn enumeration_cap_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let file = gen(dir.path(), "big.json", &["orbit-config", "--m", "2", "--n", "4"]);
    let out = subcohom(&["verify", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("|A_u| = 24"), "{err}");
}

#[test]
fn atom_cap_exits_two() {
    let out = subcohom(&["gen", "orbit-config", "--m", "2", "--n", "2", "--max-atoms", "3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn input_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"ambient_dim": 2, "atoms": [{"name": "x"}]}"#).unwrap();
    assert_eq!(subcohom(&["betti", bad.to_str().unwrap()]).status.code(), Some(1));
    let missing = dir.path().join("missing.json");
    assert_eq!(subcohom(&["betti", missing.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(subcohom(&["gen", "diagonal", "--k", "0", "--n", "2"]).status.code(), Some(1));
    assert_eq!(subcohom(&["gen", "diagonal", "--k", "1", "--n", "2", "--max-atoms", "65"]).status.code(), Some(1));
    assert_eq!(subcohom(&["frobnicate"]).status.code(), Some(1));
}
