//! The predeclared `idpd3` vocabularies.

use std::sync::{Arc, OnceLock};

use indexmap::IndexMap;

use crate::model::Vocabulary;

pub const SOURCE: &str = r#"
vocabulary idpd3::V_types {
  type shape constructed from {circ, rect, text, link, img}
  type time isa int
  type key isa string
  type color isa string
  type label isa string
  type width isa int
  type height isa int
  type order isa int
  type image isa string
}
vocabulary idpd3::V_out {
  extern vocabulary idpd3::V_types

  d3_width(time) : width
  d3_height(time) : height
  partial d3_type(time, key) : shape
  partial d3_x(time, key) : width
  partial d3_y(time, key) : height
  partial d3_color(time, key) : color
  partial d3_order(time, key) : order
  partial d3_circ_r(time, key) : width
  partial d3_rect_width(time, key) : width
  partial d3_rect_height(time, key) : height
  partial d3_text_label(time, key) : label
  partial d3_text_size(time, key) : width
  partial d3_img_path(time, key) : image
  partial d3_link_width(time, key) : width
  partial d3_link_from(time, key) : key
  partial d3_link_to(time, key) : key
  d3_node(time, key)
  d3_isFixed(time, key)
}
vocabulary idpd3::V_in {
  extern vocabulary idpd3::V_types

  d3_click(time, key)
}
"#;

pub const V_TYPES: &str = "idpd3::V_types";
pub const V_OUT: &str = "idpd3::V_out";
pub const V_IN: &str = "idpd3::V_in";

fn all() -> &'static IndexMap<String, Arc<Vocabulary>> {
    static PRELUDE: OnceLock<IndexMap<String, Arc<Vocabulary>>> = OnceLock::new();
    PRELUDE.get_or_init(|| {
        let toks = super::lexer::tokenize(SOURCE).expect("prelude lexes");
        let blocks = super::parser::parse_blocks(toks).expect("prelude parses");
        super::check::check_program(blocks, false)
            .expect("prelude checks")
            .vocabularies
    })
}

/// A predeclared vocabulary by qualified name.
pub fn get(name: &str) -> Option<Arc<Vocabulary>> {
    all().get(name).cloned()
}

pub fn v_out() -> Arc<Vocabulary> {
    get(V_OUT).expect("predeclared")
}

pub fn v_in() -> Arc<Vocabulary> {
    get(V_IN).expect("predeclared")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn output_vocabulary_has_every_drawing_symbol() {
        let v = v_out();
        assert!(v.sort("shape").is_some());
        assert_eq!(v.decls().filter(|d| d.name().starts_with("d3_")).count(), 18);
        assert!(v.function("d3_type").unwrap().partial);
        assert!(!v.function("d3_width").unwrap().partial);
        assert_eq!(v.predicate("d3_node").unwrap().args, ["time", "key"]);
    }

    #[test]
    fn input_vocabulary_has_click() {
        let v = v_in();
        assert_eq!(v.predicate("d3_click").unwrap().args, ["time", "key"]);
        assert!(v.function("d3_type").is_none());
    }
}
