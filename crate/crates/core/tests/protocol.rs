use std::collections::BTreeMap;

use groupaug::harness::{ExternalObjective, Objective, ObjectiveRequest, ObjectiveResponse};
use groupaug::space::{Configuration, Value};

fn sh(script: &str) -> ExternalObjective {
    ExternalObjective::new(vec!["sh".into(), "-c".into(), script.into()]).with_timeout(5.0)
}

fn request(id: u64) -> ObjectiveRequest {
    let values: Configuration = [("magnitude".to_owned(), Value::Int(12))].into_iter().collect();
    ObjectiveRequest::new(id, "randaugment", values, 99)
}

#[test]
fn request_wire_shape() {
    let v = serde_json::to_value(request(4)).unwrap();
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys, ["protocol_version", "seed", "space_name", "split", "trial_id", "values"]);
    assert_eq!(v["protocol_version"], 1);
    assert_eq!(v["values"]["magnitude"], 12);
    assert_eq!(v["split"], "validation");
}

#[test]
fn fixed_replies_round_trip() {
    let obj = sh(r#"while read -r line; do
        case "$line" in *shutdown*) exit 0;; esac
        id=$(printf '%s' "$line" | sed 's/.*"trial_id":\([0-9]*\).*/\1/')
        printf '{"trial_id":%s,"score":0.05,"metrics":{"embedding_std":0.0}}\n' "$id"
    done"#);
    let mut ev = obj.spawn().unwrap();
    for id in [0, 1, 7] {
        let r = ev.evaluate(&request(id));
        assert_eq!(r.trial_id, id);
        assert_eq!(r.score, Some(0.05));
        // Below chance with no explicit flag.
        assert!(r.collapsed);
        assert_eq!(r.metrics, BTreeMap::from([("embedding_std".to_owned(), 0.0)]));
    }
}

#[test]
fn mismatched_id_is_a_failure() {
    let obj = sh(r#"read -r line; printf '{"trial_id":42,"score":0.5}\n'; sleep 5"#);
    let r = obj.spawn().unwrap().evaluate(&request(0));
    assert!(r.is_failure());
    assert!(r.error.unwrap().contains("42"));
}

#[test]
fn explicit_error_is_reported() {
    let obj = sh(r#"read -r line; printf '{"trial_id":0,"error":"out of memory"}\n'; sleep 5"#);
    let r = obj.spawn().unwrap().evaluate(&request(0));
    assert_eq!(r.error.as_deref(), Some("out of memory"));
}

#[test]
fn evaluator_restarts_after_a_failure() {
    let obj = sh(r#"read -r line; case "$line" in *'"trial_id":0'*) exit 3;; esac
        printf '{"trial_id":1,"score":0.9,"collapsed":false}\n'"#);
    let mut ev = obj.spawn().unwrap();
    assert!(ev.evaluate(&request(0)).is_failure());
    let r = ev.evaluate(&request(1));
    assert_eq!(r.score, Some(0.9));
}

#[test]
fn response_validation() {
    let chance = 0.1;
    let bad = [
        r#"{"trial_id":0}"#,
        r#"{"trial_id":0,"score":1.5}"#,
        r#"{"trial_id":0,"score":0.5,"error":"x"}"#,
        r#"{"trial_id":0,"score":0.5,"extra":1}"#,
        r#"{"trial_id":0,"score":0.5,"protocol_version":2}"#,
        r#"not json"#,
    ];
    for line in bad {
        assert!(ObjectiveResponse::parse_line(line, 0, chance).is_err(), "{line}");
    }
    let r = ObjectiveResponse::parse_line(r#"{"trial_id":0,"score":0.05,"collapsed":false}"#, 0, chance).unwrap();
    assert!(!r.collapsed);
    let r = ObjectiveResponse::parse_line(r#"{"trial_id":0,"score":0.1}"#, 0, chance).unwrap();
    assert!(r.collapsed);
}
