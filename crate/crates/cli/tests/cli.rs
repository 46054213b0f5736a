use std::process::Command;

use serde_json::Value;

fn run(args: &[&str]) -> (String, String, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_zipstrat")).args(args).output().unwrap();
    (
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
        out.status.code().unwrap(),
    )
}

#[test]
fn roots_json() {
    let (out, _, code) = run(&["roots", "--cartan", "A2", "--format", "json"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v, serde_json::json!({"order": 6, "positive_roots": 3}));
}

#[test]
fn zip_poset_schema() {
    let (out, _, code) = run(&["zip-poset", "--cartan", "A3", "--J", "0,1", "--format", "json"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    for key in ["datum", "strata", "covers", "checks"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["strata"].as_array().unwrap().len(), 4);
    for s in v["strata"].as_array().unwrap() {
        assert!(s["word"].is_string() && s["length"].is_u64() && s["dim"].is_u64());
    }
    assert_eq!(v["checks"]["purity"], "PASS");
    assert_eq!(v["checks"]["monotone"], "PASS");
    assert_eq!(v["datum"]["psi"], serde_json::json!([[0, 1], [1, 2]]));
}

#[test]
fn siegel_text_is_a_chain() {
    let (out, _, code) = run(&["zip-poset", "--cartan", "C2", "--J", "0", "--sigma", "id", "--format", "text"]);
    assert_eq!(code, 0);
    assert!(out.contains("strata: 4-node chain"));
    assert!(out.contains("purity: PASS"));
}

#[test]
fn dot_edges_go_up() {
    let (out, _, code) = run(&["zip-poset", "--cartan", "A2", "--J", "0", "--format", "dot"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("// "));
    assert!(out.contains("n0 [label=\"e (0)\"]"));
    assert!(out.contains("n0 -> n1;") && out.contains("n1 -> n2;"));
    assert!(out.ends_with("}\n"));
}

#[test]
fn matrix_file_and_explicit_psi() {
    let dir = std::env::temp_dir().join(format!("zipstrat-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("b2.txt");
    std::fs::write(&path, "2 -1\n-2 2\n").unwrap();
    let p = path.to_str().unwrap();
    let (out, _, code) = run(&["cosets", "--cartan", p, "--J", "0", "--K", "1", "--format", "json"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["count"], 4);
    assert_eq!(v["double_cosets"].as_array().unwrap().len(), 2);
    let (_, _, code) = run(&["purity-report", "--cartan", p, "--J", "0", "--K", "1", "--psi", "0:1"]);
    assert_eq!(code, 0);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn oracle_text() {
    let (out, _, code) = run(&["oracle", "--n", "2", "--d", "1", "--p", "2", "--mmax", "4"]);
    assert_eq!(code, 0);
    assert!(out.contains("geometric orbits: 2 (matches |^J W| = 2)"));
}

#[test]
fn oracle_reports_a_short_tower() {
    let (out, _, code) = run(&["oracle", "--n", "3", "--d", "1", "--p", "2", "--mmax", "2"]);
    assert_eq!(code, 2);
    assert!(out.contains("not stabilized"));
}

#[test]
fn usage_errors_exit_1() {
    for args in [
        &["zip-poset", "--cartan", "C2", "--J", "7"][..],
        &["zip-poset", "--cartan", "X9"],
        &["zip-poset", "--cartan", "A2", "--K", "0"],
        &["roots", "--cartan", "A2", "--format", "dot"],
        &["oracle", "--n", "2", "--d", "1", "--p", "4"],
        &["frobnicate"],
    ] {
        let (_, err, code) = run(args);
        assert_eq!(code, 1, "{args:?}");
        assert!(!err.is_empty());
    }
}
