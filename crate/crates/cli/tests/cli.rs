use std::process::{Command, Output};

use serde_json::Value;

fn jlres(args: &[&str]) -> (i32, Value) {
    let out: Output = Command::new(env!("CARGO_BIN_EXE_jlres"))
        .args(args)
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).expect("stdout is one JSON document");
    (out.status.code().unwrap(), v)
}

fn ok(args: &[&str]) -> Value {
    let (code, v) = jlres(args);
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["status"], "ok");
    assert!(v.get("error_kind").is_none());
    v["payload"].clone()
}

const QUATERNION: [&str; 12] = [
    "--p", "3", "--q", "3", "--eEF", "2", "--fEF", "1", "--m", "1", "--d", "4",
];

#[test]
fn rectifier_example() {
    let mut args = vec!["rectifier"];
    args.extend(QUATERNION);
    let v = ok(&args);
    assert_eq!(v["y"], 5);
    assert_eq!(v["mu_exp"], "4");
    assert_eq!(v["nontrivial"], true);
}

#[test]
fn orbit_example() {
    let v = ok(&["orbit", "--Q", "2", "--nprime", "3", "--a", "1"]);
    assert_eq!(v["rep"], "1");
    assert_eq!(v["size"], 3);
    assert_eq!(v["members"], serde_json::json!(["1", "2", "4"]));
}

#[test]
fn zsigmondy_exception_is_a_domain_error() {
    let (code, v) = jlres(&["zsigmondy", "--b", "2", "--r", "6"]);
    assert_eq!(code, 2);
    assert_eq!(v["status"], "error");
    assert_eq!(v["error_kind"], "ZsigmondyException");
    assert!(v.get("payload").is_none());
    let v = ok(&["zsigmondy", "--b", "2", "--r", "14"]);
    assert_eq!(v["ell"], "43");
}

#[test]
fn usage_errors_list_flags() {
    let (code, v) = jlres(&["orbit", "--Q", "2", "--nope", "1"]);
    assert_eq!(code, 1);
    assert_eq!(v["error_kind"], "UsageError");
    assert!(v["message"].as_str().unwrap().contains("--nprime"));
    let (code, v) = jlres(&["orbit", "--Q", "2"]);
    assert_eq!(code, 1);
    assert!(v["message"].as_str().unwrap().contains("nprime"));
    let (code, _) = jlres(&["no-such-command"]);
    assert_eq!(code, 1);
}

#[test]
fn config_file_with_flag_override() {
    let dir = std::env::temp_dir().join(format!("jlres-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("shape.cfg");
    std::fs::write(
        &path,
        "# quaternion shape\np = 3\nq = 3\neEF = 2\nfEF = 1\nm = 1\nd = 4\n",
    )
    .unwrap();
    let cfg = path.to_str().unwrap();
    assert_eq!(ok(&["rectifier", "--config", cfg])["y"], 5);
    // d = 2, e = 1 overrides give the unramified shape with y = 2
    let v = ok(&["rectifier", "--config", cfg, "--d", "2", "--eEF", "1"]);
    assert_eq!(v["y"], 2);
    assert_eq!(v["nontrivial"], false);
    let (code, _) = jlres(&["rectifier", "--config", "/nonexistent/jlres.cfg"]);
    assert_eq!(code, 1);
}

#[test]
fn transfers() {
    let mut args = vec!["transfer", "--alpha", "1"];
    args.extend(QUATERNION);
    let v = ok(&args);
    assert_eq!(v["image"]["members"], serde_json::json!(["5", "7"]));

    let v = ok(&["transfer-descent", "--shape", "3,3,2,1,1,4", "--alpha", "0"]);
    assert_eq!(v["lift"]["ell"], "547");
    assert_eq!(v["descent"]["orbit"]["rep"], "4");

    let v = ok(&["table", "--shape", "3,3,2,1,1,4"]);
    assert_eq!(v.as_array().unwrap().len(), 5);
}

#[test]
fn pairs_and_regularize() {
    let v = ok(&["pair", "--shape", "3,3,2,1,1,4", "--f", "1", "--beta", "1"]);
    assert_eq!(v["orbit"]["members"], serde_json::json!(["4"]));
    let v = ok(&["pair", "--shape", "3,3,2,1,1,4", "--alpha", "3"]);
    assert_eq!(v["pair"]["f"], 2);
    let v = ok(&[
        "pair-transfer",
        "--shape",
        "3,3,2,1,1,4",
        "--f",
        "2",
        "--beta",
        "1",
    ]);
    assert_eq!(v["mu_l"]["a"], "4");
    let (code, v) = jlres(&["pair", "--shape", "2,2,1,1,1,3", "--f", "3", "--beta", "0"]);
    assert_eq!((code, v["error_kind"].as_str()), (2, Some("NotAdmissible")));

    let v = ok(&["regularize", "--shape", "2,2,1,1,1,2", "--alpha", "0"]);
    assert_eq!(v["ell"], "43");
    assert_eq!(v["a"], 7);
    let (code, v) = jlres(&[
        "regularize",
        "--shape",
        "2,2,1,1,1,2",
        "--alpha",
        "0",
        "--blow-up",
        "8",
    ]);
    assert_eq!((code, v["error_kind"].as_str()), (2, Some("InvalidBlowUp")));
}

#[test]
fn characters_and_linking() {
    let v = ok(&["order", "--Q", "5", "--nprime", "2", "--a", "8"]);
    assert_eq!(v["order"], "3");
    let v = ok(&[
        "regular-part",
        "--Q",
        "5",
        "--nprime",
        "2",
        "--a",
        "1",
        "--ell",
        "2",
    ]);
    assert_eq!(v["regular"]["a"], "16");
    let v = ok(&["chain", "--M", "24", "--from", "1", "--to", "0"]);
    assert_eq!(v["verified"], true);
    assert_eq!(v["from"]["Q"], 5);
    let v = ok(&["partition", "--Q", "4", "--nprime", "3"]);
    assert_eq!(v["block_count"], 1);
    let v = ok(&["chain", "--M", "63", "--from", "5", "--to", "1"]);
    assert_eq!(
        (v["from"]["Q"].as_u64(), v["from"]["level_deg"].as_u64()),
        (Some(2), Some(6))
    );
    let v = ok(&[
        "chain", "--M", "63", "--Q", "4", "--nprime", "3", "--from", "5", "--to", "1",
    ]);
    assert_eq!(v["from"]["Q"], 4);
    let (code, v) = jlres(&["chain", "--M", "14", "--from", "1", "--to", "0"]);
    assert_eq!((code, v["error_kind"].as_str()), (2, Some("OutOfRange")));
    let (code, v) = jlres(&["orbit", "--Q", "2", "--nprime", "3", "--a", "7"]);
    assert_eq!((code, v["error_kind"].as_str()), (2, Some("OutOfRange")));
}

#[test]
fn green_example() {
    let v = ok(&["green", "--d", "2", "--u", "2", "--alpha0", "1", "--g", "1"]);
    assert_eq!(v["terms"], serde_json::json!([["1", -1], ["2", -1]]));
    let re = v["numeric"][0].as_f64().unwrap();
    assert!((re - 1.0).abs() < 1e-12);
    let (code, v) = jlres(&["green", "--d", "3", "--u", "2", "--alpha0", "1", "--g", "4"]);
    assert_eq!(
        (code, v["error_kind"].as_str()),
        (2, Some("NotRegularElement"))
    );
}

#[test]
fn level_guard_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_jlres"))
        .args(["orbit", "--Q", "2", "--nprime", "10", "--a", "1"])
        .env("JLRES_MAX_LEVEL", "8")
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(v["error_kind"], "LevelTooLarge");
}

#[test]
fn output_is_deterministic() {
    let args = ["table", "--shape", "3,3,1,1,1,4"];
    let a = Command::new(env!("CARGO_BIN_EXE_jlres"))
        .args(args)
        .output()
        .unwrap();
    let b = Command::new(env!("CARGO_BIN_EXE_jlres"))
        .args(args)
        .arg("--sequential")
        .output()
        .unwrap();
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn selftest_with_mutation() {
    let (code, v) = jlres(&[
        "selftest",
        "--scale",
        "small",
        "--mutate",
        "rectifier-sign-bug",
        "--sequential",
    ]);
    assert_eq!(code, 0);
    let criteria = v["payload"]["criteria"].as_array().unwrap();
    assert_eq!(criteria.len(), 9);
    let names: Vec<&str> = criteria
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
    let failed: Vec<&str> = criteria
        .iter()
        .filter(|c| c["passed"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(failed, ["6-transfer-via-descent"]);
    assert_eq!(v["payload"]["passed"], false);
}
