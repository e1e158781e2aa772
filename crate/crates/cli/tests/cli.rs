use std::process::{Command, Output};

use serde_json::Value;

fn qpi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qpi")).args(args).output().expect("binary runs")
}

fn result(args: &[&str]) -> Value {
    let out = qpi(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(doc["header"]["config"].is_object());
    doc["result"].clone()
}

fn code(args: &[&str]) -> i32 {
    qpi(args).status.code().unwrap()
}

#[test]
fn enumerate_counts() {
    assert_eq!(result(&["enumerate", "--N", "3", "--x", "1"])["count"], 34);
    assert_eq!(result(&["enumerate", "--N", "2", "--x", "2", "--k", "1"])["count"], 8);
    assert_eq!(result(&["enumerate", "--N", "2", "--x", "2"])["count"], 17);
}

#[test]
fn enumerate_csv_has_one_row_per_record() {
    let out = qpi(&["enumerate", "--N", "2", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert!(lines[0].starts_with("# {"));
    assert_eq!(lines[1], "rank,map,signs");
    assert_eq!(lines.len(), 2 + 7);
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["enumerate", "--N", "3", "--x", "inf"]), 3);
    assert_eq!(code(&["enumerate", "--N", "12", "--x", "3"]), 3);
    assert_eq!(code(&["law", "--N", "3", "--k", "4", "--l", "1"]), 2);
    assert_eq!(code(&["weingarten", "--n", "2", "--N", "1", "--cat", "P"]), 4);
    assert_eq!(code(&["bp", "--pair", "poisson", "--st", "1", "--free-st", "2"]), 5);
    assert_eq!(code(&["weingarten", "--n", "2", "--N", "3", "--cat", "Q"]), 2);
    assert_eq!(code(&["model-check", "--format", "csv"]), 2);
    assert_eq!(code(&["law", "--N", "2", "--mode", "nonsense"]), 2);
}

#[test]
fn law_compare_and_tv() {
    assert_eq!(result(&["law", "--N", "4", "--k", "2", "--l", "3", "--mode", "compare"])["equal"], true);
    assert_eq!(result(&["law", "--N", "3", "--k", "2", "--l", "2", "--x", "2", "--mode", "compare"])["equal"], true);
    let tv = result(&["law", "--N", "20", "--s", "1/2", "--t", "1/2", "--mode", "tv"]);
    assert_eq!(tv["st"], "1/4");
    assert!(tv["tv"].as_f64().unwrap() < 0.05);
}

#[test]
fn weingarten_modes() {
    let r = result(&["weingarten", "--n", "3", "--N", "5", "--k", "5", "--l", "2", "--cat", "NC", "--mode", "haar-check"]);
    assert_eq!(r["equal"], true);
    let t = result(&["weingarten", "--n", "2", "--N", "4", "--cat", "NC"]);
    assert_eq!(t["exact_inverse"], true);
    assert_eq!(t["basis"].as_array().unwrap().len(), 2);
    let one = result(&["weingarten", "--n", "1", "--N", "6", "--k", "2", "--l", "3", "--cat", "P", "--mode", "triple"]);
    assert_eq!(one["value"]["exact"], "1/6");
    let lim = result(&["weingarten", "--n", "3", "--N", "4", "--cat", "NC", "--mode", "limit", "--st", "1"]);
    assert_eq!(lim["value"]["exact"], "5");
}

#[test]
fn bp_pairs_pass() {
    for pair in ["poisson", "gaussian", "bessel"] {
        assert_eq!(result(&["bp", "--pair", pair, "--st", "1/4", "--nmax", "6"])["report"]["pass"], true);
    }
}

#[test]
fn sample_and_models() {
    let s = result(&["sample", "--class", "H", "--N", "4", "--k", "2", "--samples", "3", "--seed", "9"]);
    let samples = s["samples"].as_array().unwrap();
    assert_eq!(samples.len(), 3);
    assert!(samples.iter().all(|m| m["membership"]["member"] == true));
    let law = result(&["sample", "--class", "O", "--N", "4", "--k", "2", "--mode", "law", "--samples", "500"]);
    assert_eq!(law["moments"].as_array().unwrap().len(), 4);
    for mode in ["crossed", "double-compose", "equivalence", "witness"] {
        result(&["model-check", "--mode", mode, "--N", "4", "--samples", "5"]);
    }
    result(&["model-check", "--mode", "restricted", "--target", "O2N_from_U", "--samples", "5"]);
    result(&["model-check", "--mode", "restricted", "--target", "H2N_from_K", "--samples", "5"]);
}

#[test]
fn output_is_deterministic_across_threads() {
    let args = ["sample", "--class", "U", "--N", "5", "--k", "3", "--mode", "law", "--samples", "3000", "--seed", "4"];
    let a = qpi(&[&args[..], &["--threads", "1"]].concat()).stdout;
    let b = qpi(&args).stdout;
    assert_eq!(a, b);
    assert_eq!(qpi(&args).stdout, b);
}

#[test]
fn config_file_and_out_path() {
    let dir = std::env::temp_dir().join(format!("qpi-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("law.json");
    std::fs::write(&cfg, r#"{"command": "law", "N": 4, "k": 2, "l": 3, "mode": "compare"}"#).unwrap();
    let out = dir.join("out.json");
    let status = qpi(&["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]).status;
    assert!(status.success());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["result"]["equal"], true);
    assert_eq!(doc["header"]["config"]["N"], 4);
    // command-line flags override the file
    let r = result(&["--config", cfg.to_str().unwrap(), "law", "--l", "1"]);
    assert_eq!(r["l"], 1);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn verify_single_criterion() {
    let r = result(&["verify", "--criterion", "11"]);
    assert_eq!(r["pass"], true);
    assert_eq!(code(&["verify", "--criterion", "14"]), 2);
}
