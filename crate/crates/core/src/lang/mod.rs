//! The textual input language: vocabulary, theory and structure blocks.
//!
//! [`parse_program`] runs the whole front end (lexing, parsing, name
//! resolution and sort checking) and [`print`] writes programs and
//! structures back out in a form that reparses to an equal program.

pub mod ast;
mod check;
pub mod lexer;
mod parser;
pub mod prelude;
pub mod print;

use thiserror::Error;

pub use ast::*;
pub use lexer::Pos;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LangError {
    #[error("{pos}: lexical error: {msg}")]
    Lex { pos: Pos, msg: String },
    #[error("{pos}: parse error: {msg}")]
    Parse { pos: Pos, msg: String },
    #[error("{pos}: unknown symbol `{name}`{context}")]
    UnknownSymbol { pos: Pos, name: String, context: String },
    #[error("{pos}: sort mismatch: {msg}")]
    SortMismatch { pos: Pos, msg: String },
    #[error("{pos}: duplicate name `{name}`: {msg}")]
    DuplicateName { pos: Pos, name: String, msg: String },
    #[error("{pos}: not supported: {msg}")]
    Unsupported { pos: Pos, msg: String },
    #[error("{pos}: {msg}")]
    Invalid { pos: Pos, msg: String },
}

impl LangError {
    pub fn pos(&self) -> Pos {
        match self {
            LangError::Lex { pos, .. }
            | LangError::Parse { pos, .. }
            | LangError::UnknownSymbol { pos, .. }
            | LangError::SortMismatch { pos, .. }
            | LangError::DuplicateName { pos, .. }
            | LangError::Unsupported { pos, .. }
            | LangError::Invalid { pos, .. } => *pos,
        }
    }

    /// Short machine-readable kind, e.g. `"ParseError"`.
    pub fn kind(&self) -> &'static str {
        match self {
            LangError::Lex { .. } => "LexError",
            LangError::Parse { .. } => "ParseError",
            LangError::UnknownSymbol { .. } => "UnknownSymbol",
            LangError::SortMismatch { .. } => "SortMismatch",
            LangError::DuplicateName { .. } => "DuplicateName",
            LangError::Unsupported { .. } => "Unsupported",
            LangError::Invalid { .. } => "InvalidProgram",
        }
    }
}

/// Parses and checks a whole program.
pub fn parse_program(src: &str) -> Result<Program, LangError> {
    let toks = lexer::tokenize(src)?;
    let blocks = parser::parse_blocks(toks)?;
    check::check_program(blocks, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIXTURES: [&str; 4] = [
        include_str!("../../fixtures/sum.fodot"),
        include_str!("../../fixtures/chessboard.fodot"),
        include_str!("../../fixtures/rect.fodot"),
        include_str!("../../fixtures/counter.fodot"),
    ];

    #[test]
    fn sum_program_parses() {
        let p = parse_program(FIXTURES[0]).unwrap();
        let v = &p.vocabularies["V"];
        assert!(v.sort("Num").is_some());
        assert!(v.function("A").is_some() && v.function("B").is_some());
        assert_eq!(p.theories["T"].sentences.len(), 1);
        assert_eq!(
            p.structures["S"].sort_values("Num").unwrap(),
            (1..=5).map(crate::model::Value::Int).collect::<Vec<_>>()
        );
        assert!(p.procedures.contains_key("main"));
    }

    #[test]
    fn empty_input_is_an_empty_program() {
        assert!(parse_program("").unwrap().is_empty());
        assert_eq!(print::program(&Program::default()), "");
    }

    #[test]
    fn undeclared_vocabulary_is_reported_at_the_header() {
        let err = parse_program("theory T : V { A + B > 8. }").unwrap_err();
        assert!(
            matches!(&err, LangError::UnknownSymbol { name, .. } if name == "V"),
            "{err}"
        );
        assert_eq!(err.pos(), Pos { line: 1, col: 12 });
    }

    #[test]
    fn fixtures_round_trip() {
        for src in FIXTURES {
            let p = parse_program(src).unwrap();
            let printed = print::program(&p);
            let q = parse_program(&printed).unwrap_or_else(|e| panic!("{e}\n{printed}"));
            assert_eq!(p, q, "{printed}");
            assert_eq!(printed, print::program(&q));
        }
    }

    #[test]
    fn implicit_rule_variables_get_sorts() {
        let p = parse_program(FIXTURES[3]).unwrap();
        let rule = &p.theories["T"].definitions[0].rules[1];
        let sorts: Vec<_> = rule.vars.iter().map(|v| (v.name.as_str(), v.sort.as_str())).collect();
        assert_eq!(sorts, [("t", "Time"), ("v", "Count")]);
    }

    #[test]
    fn aggregates_are_rejected() {
        let src = "vocabulary V { type N isa int\n p(N) }\ntheory T : V { sum{x : p(x) : x} > 2. }";
        assert!(matches!(parse_program(src), Err(LangError::Unsupported { .. })));
    }

    #[test]
    fn procedure_interpretations_are_rejected() {
        let src = "vocabulary V { type N isa int\n f(N) : N }\nstructure S : V { N = {1..2}\n f = procedure g }";
        assert!(matches!(parse_program(src), Err(LangError::Unsupported { .. })));
    }

    #[test]
    fn strings_do_not_coerce_to_integers() {
        let src = "vocabulary V { type N isa int\n A : N }\ntheory T : V { A = \"one\". }";
        assert!(matches!(parse_program(src), Err(LangError::SortMismatch { .. })));
    }

    #[test]
    fn free_variables_in_sentences_are_unknown() {
        let src = "vocabulary V { type N isa int\n p(N) }\ntheory T : V { p(x). }";
        assert!(matches!(parse_program(src), Err(LangError::UnknownSymbol { name, .. }) if name == "x"));
    }

    #[test]
    fn duplicate_blocks_are_rejected() {
        let src = "vocabulary V { }\nvocabulary V { }";
        assert!(matches!(parse_program(src), Err(LangError::DuplicateName { .. })));
    }

    #[test]
    fn unicode_and_latex_operators() {
        let ascii = "vocabulary V { type N isa int\n p(N)\n q(N) }\ntheory T : V { !x[N]: p(x) => ~q(x). }";
        let uni = "vocabulary V { type N isa int\n p(N)\n q(N) }\ntheory T : V { ∀x[N]: p(x) ⇒ ¬q(x). }";
        assert_eq!(parse_program(ascii).unwrap(), parse_program(uni).unwrap());
    }
}
