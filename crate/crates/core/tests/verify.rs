use std::time::Instant;

use serde_json::{json, Value};

use density_lab::verify::{claim_ids, default_params, run_check, run_suite, Status, VerifyError};

#[test]
fn smoke_suite_passes_quickly() {
    let t0 = Instant::now();
    let r = run_suite("smoke").unwrap();
    assert!(t0.elapsed().as_secs_f64() < 10.0, "smoke took {:?}", t0.elapsed());
    assert!(r.checks.len() >= 12);
    assert_eq!(r.horizon_limited, vec!["P1-cap".to_string()]);
    for c in &r.checks {
        let expected = if c.claim_id == "P1-cap" { Status::Inconclusive } else { Status::Pass };
        assert_eq!(c.status, expected, "{}: {:?}", c.claim_id, c.evidence);
    }
    let ids: Vec<_> = r.checks.iter().map(|c| c.claim_id.as_str()).collect();
    assert_eq!(ids, claim_ids());
}

#[test]
fn checks_are_reproducible() {
    for id in ["TD1", "PD1", "LO1-equiv", "EEU4"] {
        let mut a = run_check(id, &Value::Null).unwrap();
        let mut b = run_check(id, &Value::Null).unwrap();
        a.runtime = None;
        b.runtime = None;
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap(), "{id}");
    }
}

#[test]
fn failures_carry_values() {
    // the identity modulus does not separate Z from Z(f) on Example E
    let c = run_check("ExE", &json!({"f": "identity"})).unwrap();
    assert_eq!(c.status, Status::Fail);
    let v: Vec<_> = c.violations().collect();
    assert!(!v.is_empty());
    assert!(v.iter().all(|e| !e.values.is_empty()));

    let c = run_check("P1-cap", &Value::Null).unwrap();
    assert_eq!(c.status, Status::Inconclusive);
    assert!(c.evidence.iter().any(|e| e.description.starts_with("undecided") && e.values.len() == 2));
}

#[test]
fn parameters_are_merged_and_checked() {
    let c = run_check("ES1", &json!({"m_max": 8})).unwrap();
    assert_eq!(c.parameters["m_max"], 8);
    assert_eq!(c.parameters["m_min"], default_params("ES1").unwrap()["m_min"]);
    assert!(matches!(run_check("ES1", &json!([1, 2])), Err(VerifyError::InvalidParams(_))));
    assert!(matches!(run_check("ES1", &json!({"m_max": "many"})), Err(VerifyError::InvalidParams(_))));
    assert!(matches!(run_check("LZ", &json!({"sets": ["no such set"]})), Err(VerifyError::Spec(_))));
}

#[test]
fn status_serializes_in_capitals() {
    let c = run_check("EEU3", &Value::Null).unwrap();
    let v = serde_json::to_value(&c).unwrap();
    assert_eq!(v["status"], "PASS");
    assert_eq!(v["claim_id"], "EEU3");
}
