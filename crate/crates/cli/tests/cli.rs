use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_slot-market"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_matches_golden_report() {
    let instance = fixture("market.json");
    let out = run(&["solve", "--instance", path_str(&instance)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let golden = fs::read_to_string(fixture("market.report.json")).unwrap();
    assert_eq!(stdout(&out), golden);
}

#[test]
fn summary_format_omits_per_flight_detail() {
    let out = run(&["solve", "--instance", path_str(&fixture("market.json")), "--format", "summary"]);
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(report.get("schedule").is_none_or(Value::is_null));
    assert_eq!(report["totals"]["schedule_cost_cents"], 300);
    assert_eq!(report["airlines"]["DAL"]["total_delay_cost_cents"], 300);
}

#[test]
fn infeasible_instance_exits_2_with_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let cert_path = dir.path().join("cert.json");
    let out = run(&["solve", "--instance", path_str(&fixture("hall.json")), "--out", path_str(&cert_path)]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("short by 1"), "{stderr}");
    let cert: Value = serde_json::from_str(&fs::read_to_string(cert_path).unwrap()).unwrap();
    assert_eq!(cert["deficient_flights"], serde_json::json!(["A", "B", "C"]));
    assert_eq!(cert["reachable_slots"], serde_json::json!([0, 1]));
    assert_eq!(cert["shortfall"], 1);
}

#[test]
fn stretching_repairs_the_hall_violation() {
    let out = run(&["solve", "--instance", path_str(&fixture("hall.json")), "--stretch", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["equilibrium"]["ok"], true);
}

#[test]
fn zero_slide_is_the_identity() {
    let instance = fixture("market.json");
    let plain = run(&["solve", "--instance", path_str(&instance)]);
    let slid = run(&["solve", "--instance", path_str(&instance), "--slide", "0"]);
    assert_eq!(plain.stdout, slid.stdout);
}

#[test]
fn slide_moves_every_window() {
    let out = run(&["solve", "--instance", path_str(&fixture("market.json")), "--slide", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_str(&stdout(&out)).unwrap();
    for (_, flight) in report["schedule"].as_object().unwrap() {
        assert!(flight["slot"].as_u64().unwrap() >= 1);
    }
}

fn write_report(dir: &Path, edit: impl FnOnce(&mut Value)) -> PathBuf {
    let mut report: Value = serde_json::from_str(&fs::read_to_string(fixture("market.report.json")).unwrap()).unwrap();
    edit(&mut report);
    let path = dir.join("report.json");
    fs::write(&path, serde_json::to_string_pretty(&report).unwrap()).unwrap();
    path
}

fn verify_with(edit: impl FnOnce(&mut Value)) -> Output {
    let dir = tempfile::tempdir().unwrap();
    let report = write_report(dir.path(), edit);
    run(&["verify", "--instance", path_str(&fixture("market.json")), "--report", path_str(&report)])
}

#[test]
fn verify_accepts_the_solver_report() {
    let out = verify_with(|_| {});
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("duality gap 0"));
}

#[test]
fn verify_rejects_a_raised_price() {
    let out = verify_with(|r| r["prices"]["0"] = Value::from(301));
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("[C1]"), "{stderr}");
}

#[test]
fn verify_rejects_a_priced_free_slot() {
    // Slot 3 is empty, so any price on it is unjustified.
    let out = verify_with(|r| r["prices"]["3"] = Value::from(25));
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("[C2]"), "{stderr}");
}

#[test]
fn verify_rejects_wrong_totals() {
    let out = verify_with(|r| r["totals"]["schedule_cost_cents"] = Value::from(299));
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn bad_input_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    fs::write(&path, "{\"slot_minutes\": 5}").unwrap();
    assert_eq!(run(&["solve", "--instance", path_str(&path)]).status.code(), Some(1));
    assert_eq!(run(&["solve", "--instance", "/nonexistent/x.json"]).status.code(), Some(1));
}

#[test]
fn gen_is_deterministic() {
    let args = ["gen", "--seed", "11", "--flights", "60", "--slots", "48", "--capacity-profile", "peaked"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["gen", "--seed", "12", "--flights", "60", "--slots", "48", "--capacity-profile", "peaked"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn generated_piecewise_instances_solve_and_verify() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst.json");
    let report = dir.path().join("report.json");
    let gen = run(&[
        "gen",
        "--seed",
        "4",
        "--flights",
        "80",
        "--slots",
        "48",
        "--pct-piecewise",
        "100",
        "--out",
        path_str(&inst),
    ]);
    assert_eq!(gen.status.code(), Some(0));
    let parsed: Value = serde_json::from_str(&fs::read_to_string(&inst).unwrap()).unwrap();
    assert!(parsed["flights"].as_array().unwrap().iter().all(|f| f["profile"].get("breakpoints").is_some()));
    let solve = run(&["solve", "--instance", path_str(&inst), "--out", path_str(&report)]);
    assert_eq!(solve.status.code(), Some(0));
    let verify = run(&["verify", "--instance", path_str(&inst), "--report", path_str(&report)]);
    assert_eq!(verify.status.code(), Some(0), "{}", String::from_utf8_lossy(&verify.stderr));
}

#[test]
fn gen_rejects_bad_flags() {
    assert_ne!(run(&["gen", "--alpha-range", "9..3"]).status.code(), Some(0));
    assert_ne!(run(&["gen", "--pct-piecewise", "101"]).status.code(), Some(0));
}
