//! Drawing structures to the JSON animation format and back.
//!
//! Every `(time, key)` pair with a `d3_type` value becomes an element that
//! carries exactly the attributes defined at that pair. Attribute names on
//! the wire are the vocabulary names without the `d3_` prefix.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde_json::Value as Json;
use thiserror::Error;

use crate::model::{Interp, Structure, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Shape {
    Circ,
    Rect,
    Text,
    Link,
    Img,
}

impl Shape {
    pub fn name(self) -> &'static str {
        match self {
            Shape::Circ => "circ",
            Shape::Rect => "rect",
            Shape::Text => "text",
            Shape::Link => "link",
            Shape::Img => "img",
        }
    }

    pub fn from_name(s: &str) -> Option<Shape> {
        Some(match s {
            "circ" => Shape::Circ,
            "rect" => Shape::Rect,
            "text" => Shape::Text,
            "link" => Shape::Link,
            "img" => Shape::Img,
            _ => return None,
        })
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AttrValue {
    Int(i64),
    Str(String),
    /// `node` and `isFixed`; only present when true.
    Flag,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Element {
    pub key: String,
    pub shape: Shape,
    /// Wire attribute name to value, in name order.
    pub attrs: BTreeMap<String, AttrValue>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub time: i64,
    /// Canvas size; 0 when the structure leaves it undefined.
    pub width: i64,
    pub height: i64,
    /// Ordered by key.
    pub elements: Vec<Element>,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct DrawingSpec {
    /// Ordered by time.
    pub animation: Vec<Frame>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VizError {
    #[error("`{symbol}` is not interpreted")]
    NotTwoValued { symbol: String },
    #[error("frame {time}: `{attr}` of `{key}` refers to `{target}`, which is not drawn in that frame")]
    DanglingLink {
        time: i64,
        key: String,
        attr: String,
        target: String,
    },
    #[error("frame {time}: `{attr}` does not apply to the {shape} `{key}`")]
    UnknownShapeAttribute {
        time: i64,
        key: String,
        shape: Shape,
        attr: String,
    },
    #[error("malformed drawing specification: {0}")]
    Malformed(String),
}

/// One problem found by [`validate_out`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub time: i64,
    pub key: Option<String>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.key {
            Some(k) => write!(f, "frame {}, `{}`: {}", self.time, k, self.message),
            None => write!(f, "frame {}: {}", self.time, self.message),
        }
    }
}

/// Shapes an attribute applies to; `None` for every shape.
fn applies_to(attr: &str) -> Option<&'static [Shape]> {
    match attr {
        "circ_r" => Some(&[Shape::Circ]),
        "rect_width" | "rect_height" => Some(&[Shape::Rect]),
        "text_label" | "text_size" => Some(&[Shape::Text]),
        "img_path" => Some(&[Shape::Img]),
        "link_width" | "link_from" | "link_to" => Some(&[Shape::Link]),
        _ => None,
    }
}

const VALUED: [&str; 14] = [
    "x",
    "y",
    "color",
    "order",
    "circ_r",
    "rect_width",
    "rect_height",
    "text_label",
    "text_size",
    "img_path",
    "link_width",
    "link_from",
    "link_to",
    "type",
];
const FLAGS: [&str; 2] = ["node", "isFixed"];
const NUMERIC: [&str; 8] = [
    "x",
    "y",
    "order",
    "circ_r",
    "rect_width",
    "rect_height",
    "text_size",
    "link_width",
];

fn is_numeric(attr: &str) -> bool {
    NUMERIC.contains(&attr)
}

type Pairs = BTreeMap<(i64, String), BTreeMap<String, AttrValue>>;
type Canvas = BTreeMap<i64, (Option<i64>, Option<i64>)>;

/// The attributes defined at each `(time, key)`, including `type`.
fn collect(s: &Structure) -> Result<(Pairs, Canvas), VizError> {
    if !s.is_specified("d3_type") && s.vocabulary.contains("d3_type") {
        return Err(VizError::NotTwoValued {
            symbol: "d3_type".into(),
        });
    }
    let as_time = |v: &Value| v.as_int();
    let mut pairs: Pairs = BTreeMap::new();
    for attr in VALUED {
        let Some(Interp::Function(map)) = s.get(&format!("d3_{attr}")) else {
            continue;
        };
        for (args, v) in map {
            let (Some(t), Some(k)) = (args.first().and_then(as_time), args.get(1)) else {
                continue;
            };
            let value = match v {
                Value::Int(n) => AttrValue::Int(*n),
                Value::Str(x) | Value::Cons(x) => AttrValue::Str(x.clone()),
            };
            pairs
                .entry((t, key_string(k)))
                .or_default()
                .insert(attr.to_string(), value);
        }
    }
    for attr in FLAGS {
        let Some(Interp::Relation(set)) = s.get(&format!("d3_{attr}")) else {
            continue;
        };
        for args in set {
            let (Some(t), Some(k)) = (args.first().and_then(as_time), args.get(1)) else {
                continue;
            };
            pairs
                .entry((t, key_string(k)))
                .or_default()
                .insert(attr.to_string(), AttrValue::Flag);
        }
    }
    let mut canvas: BTreeMap<i64, (Option<i64>, Option<i64>)> = BTreeMap::new();
    for (i, sym) in ["d3_width", "d3_height"].into_iter().enumerate() {
        let Some(Interp::Function(map)) = s.get(sym) else {
            continue;
        };
        for (args, v) in map {
            if let (Some(t), Some(n)) = (args.first().and_then(as_time), v.as_int()) {
                let e = canvas.entry(t).or_default();
                if i == 0 {
                    e.0 = Some(n);
                } else {
                    e.1 = Some(n);
                }
            }
        }
    }
    Ok((pairs, canvas))
}

fn key_string(v: &Value) -> String {
    match v {
        Value::Int(n) => n.to_string(),
        Value::Str(s) | Value::Cons(s) => s.clone(),
    }
}

/// Encodes a drawing structure. Symbols of the output vocabulary that the
/// structure leaves unspecified contribute nothing.
pub fn encode(s: &Structure) -> Result<DrawingSpec, VizError> {
    let (pairs, canvas) = collect(s)?;
    let mut frames: BTreeMap<i64, Frame> = BTreeMap::new();
    for (&t, &(w, h)) in &canvas {
        frames.insert(
            t,
            Frame {
                time: t,
                width: w.unwrap_or(0),
                height: h.unwrap_or(0),
                elements: Vec::new(),
            },
        );
    }
    for ((t, key), attrs) in pairs {
        let Some(AttrValue::Str(ty)) = attrs.get("type") else {
            continue;
        };
        let shape = Shape::from_name(ty).ok_or_else(|| VizError::Malformed(format!("unknown shape `{ty}`")))?;
        let mut attrs = attrs.clone();
        attrs.remove("type");
        for attr in attrs.keys() {
            if applies_to(attr).is_some_and(|ok| !ok.contains(&shape)) {
                return Err(VizError::UnknownShapeAttribute {
                    time: t,
                    key,
                    shape,
                    attr: attr.clone(),
                });
            }
        }
        let frame = frames.entry(t).or_insert_with(|| Frame {
            time: t,
            width: 0,
            height: 0,
            elements: Vec::new(),
        });
        frame.elements.push(Element { key, shape, attrs });
    }
    for f in frames.values() {
        let keys: BTreeSet<&str> = f.elements.iter().map(|e| e.key.as_str()).collect();
        for e in &f.elements {
            for attr in ["link_from", "link_to"] {
                if let Some(AttrValue::Str(target)) = e.attrs.get(attr) {
                    if !keys.contains(target.as_str()) {
                        return Err(VizError::DanglingLink {
                            time: f.time,
                            key: e.key.clone(),
                            attr: attr.to_string(),
                            target: target.clone(),
                        });
                    }
                }
            }
        }
    }
    Ok(DrawingSpec {
        animation: frames.into_values().collect(),
    })
}

/// Pre-flight checks on a drawing structure. An empty list means it is clean.
pub fn validate_out(s: &Structure) -> Vec<Diagnostic> {
    let (pairs, canvas) = match collect(s) {
        Ok(x) => x,
        Err(e) => {
            return vec![Diagnostic {
                time: 0,
                key: None,
                message: e.to_string(),
            }]
        }
    };
    let mut out = Vec::new();
    let mut drawn: BTreeMap<i64, BTreeSet<&str>> = BTreeMap::new();
    for ((t, key), attrs) in &pairs {
        if attrs.contains_key("type") {
            drawn.entry(*t).or_default().insert(key);
        }
    }
    for ((t, key), attrs) in &pairs {
        let diag = |message: String| Diagnostic {
            time: *t,
            key: Some(key.clone()),
            message,
        };
        let shape = match attrs.get("type") {
            Some(AttrValue::Str(ty)) => match Shape::from_name(ty) {
                Some(s) => s,
                None => {
                    out.push(diag(format!("unknown shape `{ty}`")));
                    continue;
                }
            },
            _ => {
                for attr in attrs.keys() {
                    out.push(diag(format!("attribute `{attr}` without d3_type")));
                }
                continue;
            }
        };
        for attr in attrs.keys() {
            if applies_to(attr).is_some_and(|ok| !ok.contains(&shape)) {
                out.push(diag(format!("`{attr}` does not apply to a {shape}")));
            }
        }
        for attr in ["link_from", "link_to"] {
            if let Some(AttrValue::Str(target)) = attrs.get(attr) {
                if !drawn.get(t).is_some_and(|d| d.contains(target.as_str())) {
                    out.push(diag(format!("`{attr}` refers to `{target}`, which is not drawn")));
                }
            }
        }
    }
    for t in drawn.keys() {
        match canvas.get(t) {
            Some((Some(_), Some(_))) => {}
            _ => out.push(Diagnostic {
                time: *t,
                key: None,
                message: "canvas size (d3_width, d3_height) undefined".into(),
            }),
        }
    }
    out
}

fn string(out: &mut String, s: &str) {
    out.push_str(&serde_json::to_string(s).expect("strings serialize"));
}

/// Canonical JSON without insignificant whitespace.
pub fn serialize(d: &DrawingSpec) -> String {
    let mut out = String::from("{\"animation\":[");
    for (i, f) in d.animation.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&format!(
            "{{\"time\":{},\"width\":{},\"height\":{},\"elements\":[",
            f.time, f.width, f.height
        ));
        for (j, e) in f.elements.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            out.push_str("{\"key\":");
            string(&mut out, &e.key);
            out.push_str(",\"type\":");
            string(&mut out, e.shape.name());
            for (name, v) in &e.attrs {
                out.push(',');
                string(&mut out, name);
                out.push(':');
                match v {
                    AttrValue::Int(n) => out.push_str(&n.to_string()),
                    AttrValue::Str(s) => string(&mut out, s),
                    AttrValue::Flag => out.push_str("true"),
                }
            }
            out.push('}');
        }
        out.push_str("]}");
    }
    out.push_str("]}");
    out
}

/// Reads a drawing specification. Numeric attributes may be quoted.
pub fn deserialize(text: &str) -> Result<DrawingSpec, VizError> {
    let bad = |m: &str| VizError::Malformed(m.to_string());
    let doc: Json = serde_json::from_str(text).map_err(|e| VizError::Malformed(e.to_string()))?;
    let frames = doc
        .get("animation")
        .and_then(Json::as_array)
        .ok_or_else(|| bad("missing `animation` array"))?;
    let int = |v: &Json| -> Option<i64> {
        match v {
            Json::Number(n) => n.as_i64(),
            Json::String(s) => s.trim().parse().ok(),
            _ => None,
        }
    };
    let mut animation = Vec::with_capacity(frames.len());
    for f in frames {
        let time = f
            .get("time")
            .and_then(int)
            .ok_or_else(|| bad("frame without integer `time`"))?;
        let width = f
            .get("width")
            .map(|v| int(v).ok_or_else(|| bad("non-integer `width`")))
            .transpose()?;
        let height = f
            .get("height")
            .map(|v| int(v).ok_or_else(|| bad("non-integer `height`")))
            .transpose()?;
        let mut elements = Vec::new();
        for e in f
            .get("elements")
            .and_then(Json::as_array)
            .map(Vec::as_slice)
            .unwrap_or_default()
        {
            let obj = e.as_object().ok_or_else(|| bad("element is not an object"))?;
            let key = obj
                .get("key")
                .and_then(Json::as_str)
                .ok_or_else(|| bad("element without `key`"))?;
            let ty = obj
                .get("type")
                .and_then(Json::as_str)
                .ok_or_else(|| bad("element without `type`"))?;
            let shape = Shape::from_name(ty).ok_or_else(|| VizError::Malformed(format!("unknown shape `{ty}`")))?;
            let mut attrs = BTreeMap::new();
            for (name, v) in obj {
                if name == "key" || name == "type" {
                    continue;
                }
                let value = if FLAGS.contains(&name.as_str()) {
                    match v {
                        Json::Bool(true) => AttrValue::Flag,
                        Json::Bool(false) => continue,
                        _ => return Err(VizError::Malformed(format!("`{name}` must be a boolean"))),
                    }
                } else if is_numeric(name) {
                    AttrValue::Int(int(v).ok_or_else(|| VizError::Malformed(format!("`{name}` must be an integer")))?)
                } else {
                    match v {
                        Json::String(s) => AttrValue::Str(s.clone()),
                        _ => return Err(VizError::Malformed(format!("`{name}` must be a string"))),
                    }
                };
                attrs.insert(name.clone(), value);
            }
            elements.push(Element {
                key: key.to_string(),
                shape,
                attrs,
            });
        }
        elements.sort_by(|a, b| a.key.cmp(&b.key));
        animation.push(Frame {
            time,
            width: width.unwrap_or(0),
            height: height.unwrap_or(0),
            elements,
        });
    }
    animation.sort_by_key(|f| f.time);
    Ok(DrawingSpec { animation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_program;

    fn rect() -> Structure {
        let p = parse_program(include_str!("../fixtures/rect.fodot")).unwrap();
        p.structures["S"].clone()
    }

    #[test]
    fn single_rect_golden() {
        let spec = encode(&rect()).unwrap();
        assert_eq!(
            serialize(&spec),
            r#"{"animation":[{"time":1,"width":10,"height":10,"elements":[{"key":"key","type":"rect","rect_height":5,"rect_width":4,"x":2,"y":3}]}]}"#
        );
        assert!(validate_out(&rect()).is_empty());
    }

    #[test]
    fn empty_type_gives_empty_animation() {
        let mut s = rect();
        s.set("d3_type", Interp::Function(BTreeMap::new()));
        s.unset("d3_width");
        s.unset("d3_height");
        assert_eq!(serialize(&encode(&s).unwrap()), r#"{"animation":[]}"#);
    }

    #[test]
    fn attribute_without_type() {
        let mut s = rect();
        s.set("d3_type", Interp::Function(BTreeMap::new()));
        s.set(
            "d3_x",
            Interp::Function([(vec![Value::Int(1), Value::Str("key".into())], Value::Int(2))].into()),
        );
        for sym in ["d3_rect_width", "d3_rect_height", "d3_y"] {
            s.unset(sym);
        }
        let d = validate_out(&s);
        assert_eq!(d.len(), 1, "{d:?}");
        assert!(d[0].message.contains("without d3_type"));
    }

    #[test]
    fn circle_radius_on_a_rect_is_rejected() {
        let mut s = rect();
        s.set(
            "d3_circ_r",
            Interp::Function([(vec![Value::Int(1), Value::Str("key".into())], Value::Int(2))].into()),
        );
        assert!(matches!(encode(&s), Err(VizError::UnknownShapeAttribute { .. })));
        assert_eq!(validate_out(&s).len(), 1);
    }

    #[test]
    fn dangling_links_are_rejected() {
        let mut s = rect();
        let k = |x: &str| vec![Value::Int(1), Value::Str(x.into())];
        s.set(
            "d3_type",
            Interp::Function(
                [
                    (k("key"), Value::Cons("rect".into())),
                    (k("l"), Value::Cons("link".into())),
                ]
                .into(),
            ),
        );
        s.set(
            "d3_link_from",
            Interp::Function([(k("l"), Value::Str("key".into()))].into()),
        );
        s.set(
            "d3_link_to",
            Interp::Function([(k("l"), Value::Str("gone".into()))].into()),
        );
        assert!(matches!(encode(&s), Err(VizError::DanglingLink { ref target, .. }) if target == "gone"));
    }

    #[test]
    fn round_trip_and_quoted_numbers() {
        let spec = encode(&rect()).unwrap();
        assert_eq!(deserialize(&serialize(&spec)).unwrap(), spec);
        let quoted = r#"{"animation": [{"time":1, "width":10, "height":10, "elements": [{"key":"key", "type":"rect",
            "y":3, "x":2, "rect_height":"5", "rect_width":"4"}]}]}"#;
        assert_eq!(deserialize(quoted).unwrap(), spec);
    }

    #[test]
    fn flags_only_when_true() {
        let mut s = rect();
        let k = vec![Value::Int(1), Value::Str("key".into())];
        s.set("d3_node", Interp::Relation([k].into()));
        s.set("d3_isFixed", Interp::Relation(BTreeSet::new()));
        let json = serialize(&encode(&s).unwrap());
        assert!(json.contains(r#""node":true"#) && !json.contains("isFixed"), "{json}");
    }
}
