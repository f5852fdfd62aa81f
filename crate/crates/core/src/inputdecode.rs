//! Click events from the drawing front end to input structures.
//!
//! The wire format mirrors the output format: an array of frames, each
//! with the clicked elements, e.g.
//! `[{"time":1,"elements":[{"key":"button","type":"click"}]}]`.

use std::collections::BTreeSet;

use serde_json::Value as Json;
use thiserror::Error;

use crate::lang::prelude;
use crate::model::{Interp, Structure, Value};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ClickEvent {
    pub time: i64,
    pub key: String,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecodeError {
    #[error("malformed click input: {0}")]
    MalformedInput(String),
    #[error("unknown event type `{0}`; only \"click\" is supported")]
    UnknownEventType(String),
}

/// Parses the click wire format into deduplicated events, in order.
pub fn parse_clicks(text: &str) -> Result<Vec<ClickEvent>, DecodeError> {
    let bad = |m: &str| DecodeError::MalformedInput(m.to_string());
    let doc: Json = serde_json::from_str(text).map_err(|e| DecodeError::MalformedInput(e.to_string()))?;
    let frames = doc.as_array().ok_or_else(|| bad("expected an array of frames"))?;
    let mut out = BTreeSet::new();
    for f in frames {
        let time = f
            .get("time")
            .and_then(Json::as_i64)
            .ok_or_else(|| bad("frame without integer `time`"))?;
        let elements = f
            .get("elements")
            .and_then(Json::as_array)
            .ok_or_else(|| bad("frame without `elements` array"))?;
        for e in elements {
            let ty = e
                .get("type")
                .and_then(Json::as_str)
                .ok_or_else(|| bad("event without `type`"))?;
            if ty != "click" {
                return Err(DecodeError::UnknownEventType(ty.to_string()));
            }
            let key = e
                .get("key")
                .and_then(Json::as_str)
                .ok_or_else(|| bad("event without string `key`"))?;
            if key.is_empty() {
                return Err(bad("empty `key`"));
            }
            out.insert(ClickEvent {
                time,
                key: key.to_string(),
            });
        }
    }
    Ok(out.into_iter().collect())
}

/// The wire form of a list of clicks, grouped by time.
pub fn clicks_json(events: &[ClickEvent]) -> String {
    let mut times: Vec<i64> = events.iter().map(|e| e.time).collect();
    times.sort_unstable();
    times.dedup();
    let frames: Vec<Json> = times
        .into_iter()
        .map(|t| {
            let elements: Vec<Json> = events
                .iter()
                .filter(|e| e.time == t)
                .map(|e| serde_json::json!({"key": e.key, "type": "click"}))
                .collect();
            serde_json::json!({"time": t, "elements": elements})
        })
        .collect();
    Json::Array(frames).to_string()
}

/// A structure over the input vocabulary: `time` and `key` hold the
/// mentioned values and `d3_click` the clicked pairs.
pub fn clicks_structure(events: &[ClickEvent]) -> Structure {
    let mut s = Structure::new("clicks", prelude::v_in());
    let times: BTreeSet<Value> = events.iter().map(|e| Value::Int(e.time)).collect();
    let keys: BTreeSet<Value> = events.iter().map(|e| Value::Str(e.key.clone())).collect();
    let pairs = events
        .iter()
        .map(|e| vec![Value::Int(e.time), Value::Str(e.key.clone())])
        .collect();
    s.set("time", Interp::Sort(times.into_iter().collect()));
    s.set("key", Interp::Sort(keys.into_iter().collect()));
    s.set("d3_click", Interp::Relation(pairs));
    s
}

pub fn decode_clicks(text: &str) -> Result<Structure, DecodeError> {
    Ok(clicks_structure(&parse_clicks(text)?))
}
