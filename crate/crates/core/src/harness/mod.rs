//! Objective evaluation: the line protocol spoken with external
//! evaluators, built-in synthetic surfaces, repeated evaluation of the best
//! configurations and train/validation splits.
//!
//! Requests and responses are single-line JSON objects:
//!
//! ```text
//! -> {"protocol_version":1,"trial_id":3,"space_name":"group_augment","values":{...},"seed":17,"split":"validation"}
//! <- {"protocol_version":1,"trial_id":3,"score":0.41,"collapsed":false,"metrics":{"embedding_std":0.02}}
//! <- {"protocol_version":1,"trial_id":4,"error":"CUDA out of memory"}
//! -> {"shutdown":true}
//! ```

mod external;
mod reeval;
mod split;
mod synthetic;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::Configuration;

pub use external::{ExternalEvaluator, ExternalObjective};
pub use reeval::{reevaluate_best, ReevalEntry, ReevalReport};
pub use split::{make_split, SplitPartition, SplitSpec};
pub use synthetic::{Surface, SyntheticObjective, COLLAPSE_BAND};

pub const PROTOCOL_VERSION: u32 = 1;

/// Score at or below which a response without a collapse flag counts as
/// collapsed (ten-class chance accuracy).
pub const DEFAULT_CHANCE_LEVEL: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    #[default]
    Validation,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveRequest {
    pub protocol_version: u32,
    pub trial_id: u64,
    pub space_name: String,
    pub values: Configuration,
    pub seed: u64,
    pub split: Split,
}

impl ObjectiveRequest {
    pub fn new(trial_id: u64, space_name: &str, values: Configuration, seed: u64) -> Self {
        Self {
            protocol_version: PROTOCOL_VERSION,
            trial_id,
            space_name: space_name.to_string(),
            values,
            seed,
            split: Split::Validation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObjectiveResponse {
    pub protocol_version: u32,
    pub trial_id: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
    pub collapsed: bool,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub metrics: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Response as read off the wire, before validation.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireResponse {
    protocol_version: Option<u32>,
    trial_id: u64,
    score: Option<f64>,
    collapsed: Option<bool>,
    #[serde(default)]
    metrics: BTreeMap<String, f64>,
    error: Option<String>,
}

impl ObjectiveResponse {
    pub fn success(trial_id: u64, score: f64, collapsed: bool) -> Self {
        Self {
            protocol_version: PROTOCOL_VERSION,
            trial_id,
            score: Some(score),
            collapsed,
            metrics: BTreeMap::new(),
            error: None,
        }
    }

    pub fn failure(trial_id: u64, message: impl Into<String>) -> Self {
        Self {
            protocol_version: PROTOCOL_VERSION,
            trial_id,
            score: None,
            collapsed: false,
            metrics: BTreeMap::new(),
            error: Some(message.into()),
        }
    }

    pub fn is_failure(&self) -> bool {
        self.error.is_some()
    }

    /// Parses and validates one response line against the request it
    /// answers. A missing collapse flag is derived from `chance_level`.
    pub fn parse_line(line: &str, expected_id: u64, chance_level: f64) -> Result<Self> {
        let w: WireResponse =
            serde_json::from_str(line.trim()).map_err(|e| Error::Protocol(format!("malformed response: {e}")))?;
        if let Some(v) = w.protocol_version {
            if v != PROTOCOL_VERSION {
                return Err(Error::Protocol(format!("unsupported protocol_version {v}")));
            }
        }
        if w.trial_id != expected_id {
            return Err(Error::Protocol(format!(
                "response for trial {} while waiting for trial {expected_id}",
                w.trial_id
            )));
        }
        match (w.score, w.error) {
            (Some(_), Some(_)) => Err(Error::Protocol("response has both score and error".into())),
            (None, None) => Err(Error::Protocol("response has neither score nor error".into())),
            (None, Some(e)) => Ok(Self::failure(w.trial_id, e)),
            (Some(s), None) => {
                if !(s.is_finite() && (0.0..=1.0).contains(&s)) {
                    return Err(Error::Protocol(format!("score {s} outside [0, 1]")));
                }
                if let Some((k, v)) = w.metrics.iter().find(|(_, v)| !v.is_finite()) {
                    return Err(Error::Protocol(format!("metric `{k}` = {v} is not finite")));
                }
                Ok(Self {
                    protocol_version: PROTOCOL_VERSION,
                    trial_id: w.trial_id,
                    score: Some(s),
                    collapsed: w.collapsed.unwrap_or(s <= chance_level),
                    metrics: w.metrics,
                    error: None,
                })
            }
        }
    }
}

/// A stateful connection that answers requests one at a time.
pub trait Evaluator: Send {
    /// Never fails: problems come back as failure responses.
    fn evaluate(&mut self, request: &ObjectiveRequest) -> ObjectiveResponse;
}

/// Something that can hand out independent evaluators, one per worker.
pub trait Objective: Sync {
    fn spawn(&self) -> Result<Box<dyn Evaluator + '_>>;

    fn describe(&self) -> String;
}

/// Shutdown message understood by external evaluators.
pub fn shutdown_line() -> String {
    serde_json::json!({ "shutdown": true }).to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_success_and_fallback() {
        let r = ObjectiveResponse::parse_line(r#"{"trial_id":2,"score":0.5}"#, 2, 0.1).unwrap();
        assert_eq!(r.score, Some(0.5));
        assert!(!r.collapsed);
        let r = ObjectiveResponse::parse_line(r#"{"trial_id":2,"score":0.08}"#, 2, 0.1).unwrap();
        assert!(r.collapsed);
        let r = ObjectiveResponse::parse_line(r#"{"trial_id":2,"score":0.08,"collapsed":false}"#, 2, 0.1).unwrap();
        assert!(!r.collapsed);
    }

    #[test]
    fn parse_rejections() {
        for line in [
            "not json",
            r#"{"trial_id":1,"score":0.5}"#,
            r#"{"trial_id":2,"score":91.6}"#,
            r#"{"trial_id":2}"#,
            r#"{"trial_id":2,"score":0.5,"error":"x"}"#,
            r#"{"trial_id":2,"score":0.5,"protocol_version":2}"#,
            r#"{"trial_id":2,"score":0.5,"extra":1}"#,
        ] {
            assert!(
                matches!(ObjectiveResponse::parse_line(line, 2, 0.1), Err(Error::Protocol(_))),
                "{line}"
            );
        }
    }

    #[test]
    fn error_response_has_no_score() {
        let r = ObjectiveResponse::parse_line(r#"{"trial_id":2,"error":"boom"}"#, 2, 0.1).unwrap();
        assert!(r.is_failure());
        assert_eq!(r.score, None);
    }

    #[test]
    fn request_wire_form() {
        let req = ObjectiveRequest::new(3, "randaugment", Configuration::default(), 9);
        let v: serde_json::Value = serde_json::to_value(&req).unwrap();
        assert_eq!(v["protocol_version"], 1);
        assert_eq!(v["split"], "validation");
        assert_eq!(shutdown_line(), r#"{"shutdown":true}"#);
    }
}
