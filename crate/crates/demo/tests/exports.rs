use serde_json::Value;
use slot_market_web::{delay_curve_json, generate_json, solve_json};

const TWO_FLIGHTS: &str = r#"{
  "slot_minutes": 5,
  "slots": [{ "index": 0, "capacity": 1 }, { "index": 1, "capacity": 1 }, { "index": 2, "capacity": 1 }],
  "flights": [
    { "id": "f1", "airline": "AAL", "scheduled_slot": 0, "alpha_cents_per_slot": 200, "window": [0, 1] },
    { "id": "f2", "airline": "DAL", "scheduled_slot": 0, "alpha_cents_per_slot": 100, "window": [0, 1] }
  ]
}"#;

#[test]
fn solve_reports_prices_and_occupancy() {
    let out: Value = serde_json::from_str(&solve_json(TWO_FLIGHTS, 0, 0).unwrap()).unwrap();
    assert_eq!(out["status"], "cleared");
    assert_eq!(out["occupancy"], serde_json::json!([1, 1, 0]));
    assert_eq!(out["capacity"], serde_json::json!([1, 1, 1]));
    assert_eq!(out["report"]["prices"]["0"], 100);
    assert_eq!(out["report"]["totals"]["schedule_cost_cents"], 100);
}

#[test]
fn slide_and_stretch_reach_the_solver() {
    let slid: Value = serde_json::from_str(&solve_json(TWO_FLIGHTS, 1, 0).unwrap()).unwrap();
    assert_eq!(slid["occupancy"], serde_json::json!([0, 1, 1]));
    let stretched: Value = serde_json::from_str(&solve_json(TWO_FLIGHTS, 0, 1).unwrap()).unwrap();
    assert_eq!(stretched["report"]["totals"]["schedule_cost_cents"], 100);
}

#[test]
fn infeasible_markets_return_a_certificate() {
    let squeezed = TWO_FLIGHTS.replace("[0, 1] }", "[0] }");
    let out: Value = serde_json::from_str(&solve_json(&squeezed, 0, 0).unwrap()).unwrap();
    assert_eq!(out["status"], "infeasible");
    assert_eq!(out["certificate"]["shortfall"], 1);
    assert!(out["message"].as_str().unwrap().contains("short by 1"));
}

#[test]
fn malformed_input_is_an_error() {
    assert!(solve_json("{", 0, 0).is_err());
    assert!(generate_json(1, 10, 10, false, 0, 0).is_err());
    assert!(delay_curve_json(r#"{"breakpoints": [[0, 5]]}"#, 1, 3).is_err());
}

#[test]
fn generated_instances_solve() {
    let inst = generate_json(9, 40, 24, true, 50, 6).unwrap();
    assert_eq!(generate_json(9, 40, 24, true, 50, 6).unwrap(), inst);
    let out: Value = serde_json::from_str(&solve_json(&inst, 0, 0).unwrap()).unwrap();
    assert_eq!(out["status"], "cleared");
    assert_eq!(out["report"]["equilibrium"]["ok"], true);
}

#[test]
fn delay_curves() {
    assert_eq!(delay_curve_json(r#""linear""#, 10, 3).unwrap(), "[0,10,20,30]");
    let kinked = r#"{"breakpoints": [[0, 0], [2, 2], [3, 7]]}"#;
    assert_eq!(delay_curve_json(kinked, 100, 4).unwrap(), "[0,100,200,700,1200]");
}
