use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn tilewalsh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tilewalsh")).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write(path: &Path, v: &Value) -> String {
    std::fs::write(path, serde_json::to_string(v).unwrap()).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn transform_of_constant_has_one_coefficient() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(&dir.path().join("f.json"), &json!({"levels": 3, "values": vec!["3/4"; 8]}));
    let out = tilewalsh(&["transform", "--in", &f]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["domain"], "walsh");
    let values: Vec<&str> = v["values"].as_array().unwrap().iter().map(|x| x.as_str().unwrap()).collect();
    assert_eq!(values[0], "3/4");
    assert!(values[1..].iter().all(|x| *x == "0"));
}

#[test]
fn transform_two_samples_by_hand() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(&dir.path().join("f.json"), &json!({"levels": 1, "values": ["5", "-1/2"]}));
    let v = stdout_json(&tilewalsh(&["transform", "--in", &f]));
    // ((a + b) / 2, (a - b) / 2)
    assert_eq!(v["values"], json!(["9/4", "11/4"]));
}

#[test]
fn transform_round_trip_is_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let d = |n: &str| dir.path().join(n).to_string_lossy().into_owned();
    assert!(tilewalsh(&["gen", "--seed", "3", "--levels", "4", "--dim", "2", "--kind", "matrix", "--out", &d("inst")])
        .status
        .success());
    let f = format!("{}/f.json", d("inst"));
    assert!(tilewalsh(&["transform", "--in", &f, "--out", &d("c.json")]).status.success());
    assert!(tilewalsh(&["transform", "--inverse", "--in", &d("c.json"), "--out", &d("back.json")]).status.success());
    assert_eq!(std::fs::read(&f).unwrap(), std::fs::read(d("back.json")).unwrap());
}

#[test]
fn transform_rejects_wrong_domain_and_malformed_files() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(&dir.path().join("f.json"), &json!({"levels": 1, "values": ["1", "2"]}));
    assert_eq!(tilewalsh(&["transform", "--inverse", "--in", &f]).status.code(), Some(2));
    let bad = write(&dir.path().join("bad.json"), &json!({"levels": 2, "values": ["1", "2"]}));
    let out = tilewalsh(&["transform", "--in", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
    std::fs::write(dir.path().join("junk.json"), "{not json").unwrap();
    let junk = dir.path().join("junk.json").to_string_lossy().into_owned();
    assert_eq!(tilewalsh(&["transform", "--in", &junk]).status.code(), Some(2));
}

#[test]
fn carleson_full_cutoff_is_identity() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(&dir.path().join("f.json"), &json!({"levels": 2, "values": ["1", "-3/8", "0", "7"]}));
    let n = write(&dir.path().join("n.json"), &json!({"levels": 2, "N": [4, 4, 4, 4]}));
    let out = tilewalsh(&["carleson", "--in", &f, "--nfun", &n]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["result"]["identical"], true);
    assert_eq!(v["result"]["direct"]["values"], json!(["1", "-3/8", "0", "7"]));
    assert_eq!(v["result"]["bitile"]["values"], json!(["1", "-3/8", "0", "7"]));
}

#[test]
fn carleson_seeded_instance_agrees() {
    let out = tilewalsh(&["carleson", "--seed", "9", "--levels", "6", "--dim", "3"]);
    assert!(out.status.success());
    assert_eq!(stdout_json(&out)["result"]["identical"], true);
}

#[test]
fn carleson_float_input_uses_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(&dir.path().join("f.json"), &json!({"levels": 2, "values": [0.1, "1/3", -2, 0.7]}));
    let out = tilewalsh(&["carleson", "--in", &f]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["result"]["mode"], "float");
    assert_eq!(v["result"]["identical"], true);
}

#[test]
fn carleson_resolution_mismatch_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let n = write(&dir.path().join("n.json"), &json!({"levels": 3, "N": [0, 1, 2, 3, 4, 5, 6, 7]}));
    let out = tilewalsh(&["carleson", "--levels", "4", "--nfun", &n]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("resolution mismatch"));
}

#[test]
fn decompose_empty_set_is_sparse_only() {
    let out = tilewalsh(&["decompose", "--seed", "1", "--levels", "4", "--measure", "0"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["result"]["sparse_only"], true);
    assert_eq!(v["result"]["trees"], json!([]));
    assert_eq!(v["result"]["sparse"].as_array().unwrap().len(), 4 * 8 + 16);
    assert_eq!(v["all_theorems_pass"], true);
}

#[test]
fn reports_carry_config_and_split_certificates() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json").to_string_lossy().into_owned();
    let run = tilewalsh(&["decompose", "--seed", "4", "--levels", "4", "--q", "3", "--norm", "lp:3", "--dim", "2", "--out", &out]);
    assert!(run.status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["config"]["seed"], 4);
    assert_eq!(v["config"]["norm"], "lp:3");
    assert_eq!(v["config"]["q"], 3.0);
    assert!(v["theorem_certificates"].as_array().unwrap().iter().all(|c| c["backing"] == "theorem"));
    assert!(v["empirical_certificates"].as_array().unwrap().iter().all(|c| c["backing"] == "empirical"));
    let csv = std::fs::read_to_string(dir.path().join("r.csv")).unwrap();
    assert!(csv.starts_with("L,q,norm,ratio_name,value\n"));
    assert!(csv.lines().count() > 1);
}

#[test]
fn seeded_reports_repeat_byte_for_byte() {
    for cmd in ["decompose", "certify", "tiletype", "rwt"] {
        let a = tilewalsh(&[cmd, "--seed", "21", "--levels", "4"]);
        let b = tilewalsh(&[cmd, "--seed", "21", "--levels", "4"]);
        assert!(a.status.success(), "{cmd}");
        assert_eq!(a.stdout, b.stdout, "{cmd}");
    }
}

#[test]
fn tiletype_euclidean_ratio_at_most_one() {
    for seed in ["1", "2", "3"] {
        let out = tilewalsh(&["tiletype", "--seed", seed, "--levels", "5", "--dim", "2", "--trials", "4"]);
        assert!(out.status.success());
        let v = stdout_json(&out);
        assert!(v["result"]["ratio"].as_f64().unwrap() <= 1.0);
        assert_eq!(v["config"]["trials"], 4);
    }
}

#[test]
fn tiletype_rejects_overlapping_family() {
    let dir = tempfile::tempdir().unwrap();
    let t = json!({"k": 0, "pos": 0, "m": 0});
    let fam = json!([{"top": t, "members": [t]}, {"top": t, "members": [t]}]);
    let path = write(&dir.path().join("fam.json"), &fam);
    let out = tilewalsh(&["tiletype", "--levels", "3", "--family", &path]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("disjointness"));
}

#[test]
fn certify_and_rwt_pass_their_theorems() {
    for args in [
        vec!["certify", "--seed", "6", "--levels", "5"],
        vec!["certify", "--seed", "6", "--levels", "4", "--norm", "schatten:3", "--kind", "matrix", "--dim", "2"],
        vec!["rwt", "--seed", "6", "--levels", "6", "--measure", "0.75", "--measure-f", "0.125"],
        vec!["rwt", "--seed", "6", "--levels", "6", "--measure", "0.125", "--measure-f", "0.5"],
    ] {
        let out = tilewalsh(&args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(stdout_json(&out)["all_theorems_pass"], true);
    }
}

#[test]
fn gen_is_reproducible_and_normalised() {
    let dir = tempfile::tempdir().unwrap();
    let d = |n: &str| dir.path().join(n).to_string_lossy().into_owned();
    for out in ["a", "b"] {
        let args = ["gen", "--seed", "77", "--levels", "5", "--dim", "3", "--norm", "lp:4", "--measure", "0.3", "--measure-f", "0.6", "--out"];
        assert!(tilewalsh(&[&args[..], &[d(out).as_str()]].concat()).status.success());
    }
    for n in ["f.json", "g.json", "E.json", "F.json", "N.json"] {
        assert_eq!(std::fs::read(format!("{}/{n}", d("a"))).unwrap(), std::fs::read(format!("{}/{n}", d("b"))).unwrap());
    }
    let read = |n: &str| -> Value { serde_json::from_str(&std::fs::read_to_string(format!("{}/{n}", d("a"))).unwrap()).unwrap() };
    // ⌊μ 2^L⌋ cells
    assert_eq!(read("E.json")["cells"].as_array().unwrap().len(), 9);
    assert_eq!(read("F.json")["cells"].as_array().unwrap().len(), 19);
    // dual of ℓ^4 is ℓ^{4/3}
    for cell in read("g.json")["values"].as_array().unwrap() {
        let norm: f64 = cell
            .as_array()
            .unwrap()
            .iter()
            .map(|x| {
                let (n, d) = x.as_str().unwrap().split_once('/').unwrap_or((x.as_str().unwrap(), "1"));
                (n.parse::<f64>().unwrap() / d.parse::<f64>().unwrap()).abs().powf(4.0 / 3.0)
            })
            .sum::<f64>()
            .powf(0.75);
        assert!(norm <= 1.0 + 1e-12);
    }
}

#[test]
fn bad_flags_exit_with_two() {
    assert_eq!(tilewalsh(&["certify", "--norm", "sup"]).status.code(), Some(2));
    assert_eq!(tilewalsh(&["rwt", "--p", "1"]).status.code(), Some(2));
    assert_eq!(tilewalsh(&["decompose", "--levels", "0"]).status.code(), Some(2));
    assert_eq!(tilewalsh(&["frobnicate"]).status.code(), Some(2));
}
