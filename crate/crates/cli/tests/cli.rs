use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn feigen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_feigen")).args(args).output().expect("spawn feigen")
}

fn json(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.push("--json");
    let out = feigen(&all);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON object")
}

#[test]
fn smallest_model_alpha_only() {
    let v = json(&["--n", "2", "--constant", "alpha"]);
    assert_eq!(v["format"], 1);
    assert!(v["sign_convention"].as_str().unwrap().contains("|alpha|"));
    assert!(v["alpha"].as_str().unwrap().starts_with("2.5"));
    assert!(v["delta"].is_null());
    assert!(v["arnoldi_iterations"].is_null());
}

#[test]
fn digits_picks_n() {
    let v = json(&["--digits", "100", "--constant", "alpha"]);
    assert_eq!(v["n"], 72);
}

#[test]
fn text_report_names_both_constants() {
    let out = feigen(&["--n", "16"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("alpha"), "{text}");
    assert!(text.contains("4.66920160910"), "{text}");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(feigen(&["--n", "16", "--digits", "30"]).status.code(), Some(2));
    assert_eq!(feigen(&[]).status.code(), Some(2));
    assert_eq!(feigen(&["--n", "1"]).status.code(), Some(2));
}

#[test]
fn bad_checkpoint_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("rung-16.ckpt"), "feigen-checkpoint 1\nn 16\n").unwrap();
    let out = feigen(&["--n", "16", "--checkpoint-dir", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn checkpoint_dir_is_reused() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let first = json(&["--n", "24", "--checkpoint-dir", d]);
    let second = json(&["--n", "24", "--checkpoint-dir", d]);
    assert_eq!(first["alpha"], second["alpha"]);
    assert_eq!(first["delta"], second["delta"]);
    assert_eq!(second["rungs"][0]["reused"], true);
    assert_eq!(second["icum_iterations"], 0);
}

#[test]
fn iteration_cap_exits_3() {
    let out = feigen(&["--n", "16", "--max-icum-iters", "2"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn verify_agreement_grows_with_n() {
    let mut last = (0, 0);
    for n in ["32", "48", "64"] {
        let v = json(&["--n", n, "--verify"]);
        assert_eq!(v["verify"]["reference"].as_u64().unwrap(), n.parse::<u64>().unwrap() + 16);
        let da = v["achieved_digits_alpha"].as_u64().unwrap();
        let dd = v["achieved_digits_delta"].as_u64().unwrap();
        assert!(da >= last.0 && dd >= last.1, "n={n}: {da} {dd} after {last:?}");
        last = (da, dd);
    }
}

#[test]
fn progress_goes_to_stderr() {
    let out = feigen(&["--n", "8", "--json", "--progress"]);
    assert!(out.status.success());
    serde_json::from_slice::<Value>(&out.stdout).unwrap();
    assert!(String::from_utf8_lossy(&out.stderr).contains("g solve n=8"));
}
