use std::process::{Command, Output};

use serde_json::Value;

fn knotops(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_knotops"))
        .args(args)
        .arg("--no-cache")
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn e2_table_contains_alpha() {
    let out = knotops(&["e2", "hochschild", "--n", "5", "--max-level", "6", "--max-degree", "16", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let alpha = v["entries"].as_array().unwrap().iter().find(|e| e["p"] == 2 && e["q"] == 4).unwrap();
    assert_eq!(alpha["dim"], 1);
    assert_eq!(alpha["basis"][0], "{1,2}");
    assert_eq!(v["key"]["sign_version"], "koszul-prefix-v1");
    assert_eq!(v["key"]["max_degree"], 16);
    // the cutoff row is flagged and explained
    let top = v["entries"].as_array().unwrap().iter().find(|e| e["p"] == 6).unwrap();
    assert_eq!(top["partial"], true);
    assert!(top["note"].is_string());
    assert!(String::from_utf8_lossy(&out.stderr).contains("computed in"));
}

#[test]
fn e2_csv_has_one_row_per_bidegree() {
    let out = knotops(&["e2", "hochschild", "--n", "5", "--max-level", "3", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "kind,n,max_level,max_degree,sign_version,p,q,dim,partial,basis");
    assert!(lines.any(|l| l == "hochschild,5,3,12,koszul-prefix-v1,2,4,1,false,\"{1,2}\""));
    assert_eq!(text.lines().count(), 1 + 4 * 4);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(knotops(&["e2", "hochschild", "--n", "5", "--max-level", "0"]).status.code(), Some(2));
    assert_eq!(knotops(&["e2", "hochschild", "--n", "1"]).status.code(), Some(2));
    assert_eq!(knotops(&["obstruction", "--n", "4"]).status.code(), Some(2));
    assert_eq!(knotops(&["obstruction", "--n", "3"]).status.code(), Some(2));
    assert_eq!(knotops(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(knotops(&["bracket", "--n", "5", "{1,3}", "{1,2}"]).status.code(), Some(2));
}

#[test]
fn obstruction_verdicts() {
    for n in ["5", "7"] {
        let out = knotops(&["obstruction", "--n", n]);
        assert_eq!(out.status.code(), Some(0));
        assert_eq!(json(&out)["kernel_not_bracket_ideal"], true);
    }
    let out = knotops(&["obstruction", "--n", "5", "--map", "identity"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["kernel_not_bracket_ideal"], false);
}

#[test]
fn bracket_and_star() {
    let out = knotops(&["bracket", "--n", "5", "{1,2}", "{1,2}", "--op", "star"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!((v["p"].as_u64(), v["q"].as_u64()), (Some(4), Some(8)));
    assert_eq!(v["zero"], false);
    let out = knotops(&["bracket", "--n", "5", "{1,2}", "{1,3}·{2,4}"]);
    let v = json(&out);
    assert_eq!((v["p"].as_u64(), v["q"].as_u64()), (Some(5), Some(12)));
    assert_eq!(v["zero"], false);
}

#[test]
fn verify_targets() {
    let out = knotops(&["verify", "geo", "--samples", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["checks"].as_array().unwrap().len(), 0);
    let out = knotops(&["verify", "geo", "--n", "4", "--samples", "1000", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let out = knotops(&["verify", "algebra", "--n", "5", "--samples", "50"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn dims_are_factorials() {
    let out = knotops(&["dims", "--n", "4", "--max-arity", "6"]);
    let v = json(&out);
    let totals: Vec<u64> = v["arities"].as_array().unwrap().iter().map(|a| a["total"].as_u64().unwrap()).collect();
    assert_eq!(totals, vec![1, 1, 2, 6, 24, 120, 720]);
}
