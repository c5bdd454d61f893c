use std::io::Write;
use std::process::{Command, Stdio};

use serde_json::Value;

const WS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/ray.json");

fn coarse(args: &[&str]) -> (i32, Vec<Value>) {
    let out = Command::new(env!("CARGO_BIN_EXE_coarse")).args(["--workspace", WS]).args(args).output().expect("binary runs");
    (out.status.code().expect("exit code"), reports(&out.stdout))
}

fn reports(stdout: &[u8]) -> Vec<Value> {
    serde_json::Deserializer::from_slice(stdout).into_iter::<Value>().map(|v| v.expect("json report")).collect()
}

fn verdict(r: &Value) -> &str {
    r["verdict"].as_str().expect("verdict")
}

#[test]
fn close_maps_into_the_terminal_ray() {
    let (code, r) = coarse(&["check-close", "id", "shift1", "TerminalRay", "TerminalRay"]);
    assert_eq!(code, 0);
    assert_eq!(verdict(&r[0]), "In");
    assert!(r[0]["timings"]["total_ms"].is_number());
}

#[test]
fn band_membership_reports_its_bound() {
    let (code, r) = coarse(&["contains", "MetricRay", "Band(all,5)"]);
    assert_eq!(code, 0);
    assert_eq!(r[0]["audited"], Value::Bool(true));
    let text = r[0]["certificate"].to_string();
    assert!(text.contains("\"b\":5"), "{text}");
}

#[test]
fn quotient_then_compare() {
    let (code, r) = coarse(&["run", "quotient MetricRay evens", "structure-eq result TerminalRay"]);
    assert_eq!(code, 0);
    assert_eq!(r.len(), 2);
    assert!(r.iter().all(|x| verdict(x) == "In"));
}

#[test]
fn exit_codes_follow_verdicts() {
    assert_eq!(coarse(&["check-coarse", "collapse", "MetricRay", "Point"]).0, 1);
    assert_eq!(coarse(&["structure-eq", "TerminalRay", "MetricRay"]).0, 1);
    assert_eq!(coarse(&["check-coarse", "collapse", "Ideal0", "Point"]).0, 0);
    let (code, r) = coarse(&["coequalizer", "id", "double", "MetricRay", "MetricRay"]);
    assert_eq!(code, 3);
    assert_eq!(r[0]["error"]["kind"], "UnsupportedShear");
    let (code, r) = coarse(&["contains", "Nowhere", "Unit"]);
    assert_eq!(code, 4);
    assert_eq!(r[0]["error"]["kind"], "ResolveError");
}

#[test]
fn constructions_and_classification() {
    let (_, r) = coarse(&["equalizer", "id", "shift1", "TerminalRay", "TerminalRay"]);
    assert_eq!(r[0]["carrier"]["rays"]["r0"]["residues"], serde_json::json!([0]));
    let (_, r) = coarse(&["classify", "id", "MetricRay", "TerminalRay"]);
    assert_eq!(r[0]["epi"]["verdict"], "In");
    assert_eq!(r[0]["monic"]["verdict"], "Out");
    assert_eq!(coarse(&["witness-equivalence", "Ideal0", "Point", "collapse", "include0"]).0, 0);
    let (_, r) = coarse(&["sigma-filtration", "Ideal0", "3"]);
    assert_eq!(r[0]["result"].as_array().map(Vec::len), Some(3));
    assert_eq!(coarse(&["fin-oracle", "parallel"]).0, 0);
}

#[test]
fn stdin_workspace_and_parse_errors() {
    let text = std::fs::read_to_string(WS).unwrap();
    let mut child = Command::new(env!("CARGO_BIN_EXE_coarse"))
        .args(["--workspace", "-", "--format", "text", "terminate", "MetricRay"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(text.as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains(": In"));

    let mut child = Command::new(env!("CARGO_BIN_EXE_coarse")).args(["--workspace", "-", "terminate", "X"]).stdin(Stdio::piped()).stderr(Stdio::piped()).spawn().unwrap();
    child.stdin.take().unwrap().write_all(b"{\"spaces\": {").unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
}

#[test]
fn output_is_deterministic() {
    let strip = |mut v: Vec<Value>| {
        for r in &mut v {
            r.as_object_mut().unwrap().remove("timings");
        }
        v
    };
    let args = ["--seed", "7", "run", "quotient MetricRay evens", "classify id MetricRay TerminalRay", "fin-oracle pair"];
    assert_eq!(strip(coarse(&args).1), strip(coarse(&args).1));
}

#[test]
fn results_reload_as_workspace_entries() {
    let (_, r) = coarse(&["quotient", "MetricRay", "evens"]);
    let ws = serde_json::json!({ "structures": { "Q": r[0]["result"]["structure"], "T": { "kind": "terminal", "space": { "components": [{ "kind": "ray", "id": "r0" }] } } } });
    let mut child = Command::new(env!("CARGO_BIN_EXE_coarse")).args(["--workspace", "-", "structure-eq", "Q", "T"]).stdin(Stdio::piped()).stdout(Stdio::piped()).spawn().unwrap();
    child.stdin.take().unwrap().write_all(ws.to_string().as_bytes()).unwrap();
    assert_eq!(child.wait_with_output().unwrap().status.code(), Some(0));
}
