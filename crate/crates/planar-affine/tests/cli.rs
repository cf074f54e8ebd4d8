use std::io::Write;
use std::process::{Command, Stdio};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_planar-affine"))
}

fn json(args: &[&str], stdin: Option<&str>) -> (Value, i32) {
    let mut cmd = bin();
    cmd.arg("--json").args(args).stdout(Stdio::piped()).stdin(Stdio::piped());
    let mut child = cmd.spawn().expect("spawn");
    if let Some(s) = stdin {
        child.stdin.take().unwrap().write_all(s.as_bytes()).unwrap();
    } else {
        drop(child.stdin.take());
    }
    let out = child.wait_with_output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    (serde_json::from_str(&text).unwrap_or_else(|e| panic!("{e}: {text}")), out.status.code().unwrap())
}

#[test]
fn classify_a_resonant_saddle() {
    let (v, code) = json(&["classify", "--", "-x*dx + 2*y*dy"], None);
    assert_eq!(code, 0);
    assert_eq!(v["subtype"], "resonant");
    assert_eq!(v["ratio"], "-1/2");
    assert_eq!((v["p"].as_u64(), v["q"].as_u64()), (Some(1), Some(2)));
}

#[test]
fn field_from_stdin_and_file() {
    let src = "(x^2*y - x)*dx + y*dy";
    let (a, code) = json(&["invariants", "-"], Some(src));
    assert_eq!(code, 0, "{a}");
    // λ = −1, one resonant term at x^2 y, μ = 0, Q = 1
    assert_eq!(a["k"], 1);
    assert_eq!(a["mu"], "0");
    assert_eq!(a["Q"], serde_json::json!(["1", "0"]));

    let path = std::env::temp_dir().join(format!("planar-affine-cli-{}.txt", std::process::id()));
    std::fs::write(&path, src).unwrap();
    let arg = format!("@{}", path.display());
    let (b, _) = json(&["invariants", &arg], None);
    std::fs::remove_file(&path).ok();
    assert_eq!(a, b);
}

#[test]
fn lattice_coordinates_of_a_gaussian_ratio() {
    let (v, code) = json(&["lattice", "i*x*dx + y*dy", "--linearizable", "yes", "--delta", "2+3i"], None);
    assert_eq!(code, 0);
    assert_eq!(v["lattice"], "rank2");
    assert_eq!(v["contains"], true);
    // 2 + 3i = 3·i + 2·1
    assert_eq!(v["coords"], serde_json::json!([3, 2]));
}

#[test]
fn exit_codes_by_failure_kind() {
    let (v, code) = json(&["classify", "x*dx +"], None);
    assert_eq!((code, v["error"]["kind"].as_str()), (2, Some("syntax")));
    assert_eq!(v["error"]["column"], 7);

    let (v, code) = json(&["verify", "nope"], None);
    assert_eq!((code, v["error"]["kind"].as_str()), (2, Some("usage")));

    let (v, code) = json(&["normalize", "x*dx + y*dy"], None);
    assert_eq!((code, v["error"]["kind"].as_str()), (1, Some("precondition")));

    let (v, code) = json(&["verify", "parser", "--trials", "3"], None);
    assert_eq!((code, v["pass"].as_bool()), (0, Some(true)));

    let out = bin().arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn text_output_is_the_default() {
    let out = bin().args(["classify", "y*dy"]).output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l == "kind: nonisolated"), "{text}");
}
