//! Vocabularies, structures and the structural operations every other
//! module builds on: merging, projection and totality checks.
//!
//! Values are immutable once a [`Structure`] is built; all operations here
//! return fresh values.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use indexmap::IndexMap;
use thiserror::Error;

/// A domain element.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Int(i64),
    Str(String),
    /// Constructor of a constructed sort, e.g. `rect`.
    Cons(String),
}

impl Value {
    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Str(s) | Value::Cons(s) => Some(s),
            Value::Int(_) => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Str(s) => write!(f, "{}", quote(s)),
            Value::Cons(c) => f.write_str(c),
        }
    }
}

/// Double-quotes a string, escaping `"` and `\`.
pub fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// How the values of a sort are drawn.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SortKind {
    Int,
    Str,
    /// Constructors in declaration order.
    Constructed(Vec<String>),
    /// `type Time` without a base; values come from the structure.
    Abstract,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SortDecl {
    pub name: String,
    pub kind: SortKind,
    /// The `isa` parent as written, kept for printing.
    pub isa: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredicateDecl {
    pub name: String,
    pub args: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionDecl {
    pub name: String,
    pub args: Vec<String>,
    pub out: String,
    pub partial: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decl {
    Sort(SortDecl),
    Predicate(PredicateDecl),
    Function(FunctionDecl),
}

impl Decl {
    pub fn name(&self) -> &str {
        match self {
            Decl::Sort(s) => &s.name,
            Decl::Predicate(p) => &p.name,
            Decl::Function(f) => &f.name,
        }
    }

    /// Argument sorts of a predicate or function; empty for sorts.
    pub fn arg_sorts(&self) -> &[String] {
        match self {
            Decl::Sort(_) => &[],
            Decl::Predicate(p) => &p.args,
            Decl::Function(f) => &f.args,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("symbol `{symbol}` is interpreted differently in the merged structures")]
    ConflictingInterpretation { symbol: String },
    #[error("symbol `{symbol}` is declared with two different signatures")]
    SignatureClash { symbol: String },
    #[error("vocabulary `{vocabulary}` has no symbol `{symbol}`")]
    MissingSymbol { symbol: String, vocabulary: String },
    #[error("value {value} of `{symbol}` is not in sort `{sort}`")]
    OutOfDomain {
        symbol: String,
        value: String,
        sort: String,
    },
    #[error("`{symbol}` expects {expected} values per tuple, got {found}")]
    ArityMismatch {
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("interpretation of `{symbol}` does not match its declaration: {reason}")]
    BadInterpretation { symbol: String, reason: String },
}

/// A named signature of sorts, predicates and functions.
///
/// Extern vocabularies are flattened on inclusion; `externs` and `own`
/// remember how the vocabulary was written so it can be printed back.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    pub name: String,
    /// Declared with `LTCvocabulary`.
    pub ltc: bool,
    pub externs: Vec<String>,
    own: Vec<String>,
    decls: IndexMap<String, Decl>,
}

impl Vocabulary {
    pub fn new(name: impl Into<String>) -> Self {
        Vocabulary {
            name: name.into(),
            ltc: false,
            externs: Vec::new(),
            own: Vec::new(),
            decls: IndexMap::new(),
        }
    }

    /// Adds a declaration written directly in this vocabulary.
    pub fn declare(&mut self, decl: Decl) -> Result<(), ModelError> {
        let name = decl.name().to_string();
        self.insert(decl)?;
        if !self.own.contains(&name) {
            self.own.push(name);
        }
        Ok(())
    }

    fn insert(&mut self, decl: Decl) -> Result<(), ModelError> {
        match self.decls.get(decl.name()) {
            Some(existing) if *existing != decl => Err(ModelError::SignatureClash {
                symbol: decl.name().to_string(),
            }),
            Some(_) => Ok(()),
            None => {
                self.decls.insert(decl.name().to_string(), decl);
                Ok(())
            }
        }
    }

    /// Flattens `other` into this vocabulary as an extern.
    pub fn include(&mut self, other: &Vocabulary) -> Result<(), ModelError> {
        for decl in other.decls.values() {
            self.insert(decl.clone())?;
        }
        if !self.externs.contains(&other.name) {
            self.externs.push(other.name.clone());
        }
        Ok(())
    }

    /// Flattened union of two vocabularies.
    pub fn union(name: impl Into<String>, a: &Vocabulary, b: &Vocabulary) -> Result<Self, ModelError> {
        let mut v = Vocabulary::new(name);
        v.ltc = a.ltc || b.ltc;
        for decl in a.decls.values().chain(b.decls.values()) {
            v.declare(decl.clone())?;
        }
        Ok(v)
    }

    /// A flat vocabulary holding the given declarations.
    pub fn from_decls(name: impl Into<String>, decls: impl IntoIterator<Item = Decl>) -> Result<Self, ModelError> {
        let mut v = Vocabulary::new(name);
        for d in decls {
            v.declare(d)?;
        }
        Ok(v)
    }

    pub fn get(&self, name: &str) -> Option<&Decl> {
        self.decls.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.decls.contains_key(name)
    }

    pub fn sort(&self, name: &str) -> Option<&SortDecl> {
        match self.decls.get(name) {
            Some(Decl::Sort(s)) => Some(s),
            _ => None,
        }
    }

    pub fn predicate(&self, name: &str) -> Option<&PredicateDecl> {
        match self.decls.get(name) {
            Some(Decl::Predicate(p)) => Some(p),
            _ => None,
        }
    }

    pub fn function(&self, name: &str) -> Option<&FunctionDecl> {
        match self.decls.get(name) {
            Some(Decl::Function(f)) => Some(f),
            _ => None,
        }
    }

    /// All declarations in canonical (declaration) order.
    pub fn decls(&self) -> impl Iterator<Item = &Decl> {
        self.decls.values()
    }

    /// Declarations written directly in this vocabulary (not via extern).
    pub fn own_decls(&self) -> impl Iterator<Item = &Decl> {
        self.own.iter().filter_map(|n| self.decls.get(n))
    }

    pub fn sorts(&self) -> impl Iterator<Item = &SortDecl> {
        self.decls.values().filter_map(|d| match d {
            Decl::Sort(s) => Some(s),
            _ => None,
        })
    }

    /// The sort a constructor belongs to.
    pub fn constructor_sort(&self, cons: &str) -> Option<&SortDecl> {
        self.sorts().find(|s| match &s.kind {
            SortKind::Constructed(cs) => cs.iter().any(|c| c == cons),
            _ => false,
        })
    }

    /// Same symbols, regardless of name or how they were written.
    pub fn same_symbols(&self, other: &Vocabulary) -> bool {
        self.decls == other.decls
    }

    /// Restricts to the named symbols, keeping the sorts they use.
    pub fn restrict<'a>(&self, name: impl Into<String>, keep: impl IntoIterator<Item = &'a str>) -> Vocabulary {
        let keep: BTreeSet<&str> = keep.into_iter().collect();
        let mut needed: BTreeSet<String> = BTreeSet::new();
        for n in &keep {
            if let Some(d) = self.decls.get(*n) {
                needed.insert(d.name().to_string());
                for s in d.arg_sorts() {
                    needed.insert(s.clone());
                }
                if let Decl::Function(f) = d {
                    needed.insert(f.out.clone());
                }
            }
        }
        let mut v = Vocabulary::new(name);
        v.ltc = self.ltc;
        for d in self.decls.values() {
            if needed.contains(d.name()) {
                v.declare(d.clone()).expect("subset of a consistent vocabulary");
            }
        }
        v
    }
}

/// The interpretation of one symbol.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Interp {
    /// Values of a sort in canonical order.
    Sort(Vec<Value>),
    /// Closed-world set of true tuples.
    Relation(BTreeSet<Vec<Value>>),
    /// Graph of a function; may leave points of partial functions undefined.
    Function(BTreeMap<Vec<Value>, Value>),
}

/// A (possibly partial) interpretation of a vocabulary.
///
/// Symbols without an entry are unspecified.
#[derive(Clone, Debug, PartialEq)]
pub struct Structure {
    pub name: String,
    pub vocabulary: Arc<Vocabulary>,
    interps: IndexMap<String, Interp>,
}

impl Structure {
    pub fn new(name: impl Into<String>, vocabulary: Arc<Vocabulary>) -> Self {
        Structure {
            name: name.into(),
            vocabulary,
            interps: IndexMap::new(),
        }
    }

    /// An empty structure over an empty vocabulary.
    pub fn empty() -> Self {
        Structure::new("empty", Arc::new(Vocabulary::new("empty")))
    }

    pub fn get(&self, symbol: &str) -> Option<&Interp> {
        self.interps.get(symbol)
    }

    pub fn is_specified(&self, symbol: &str) -> bool {
        self.interps.contains_key(symbol)
    }

    pub fn interps(&self) -> impl Iterator<Item = (&str, &Interp)> {
        self.interps.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Sets an interpretation without validation; see [`Structure::validate`].
    pub fn set(&mut self, symbol: impl Into<String>, interp: Interp) {
        let symbol = symbol.into();
        let interp = match interp {
            Interp::Sort(values) => Interp::Sort(self.canonical_sort_values(&symbol, values)),
            other => other,
        };
        self.interps.insert(symbol, interp);
    }

    pub fn unset(&mut self, symbol: &str) -> Option<Interp> {
        self.interps.shift_remove(symbol)
    }

    /// Values of an interpreted sort.
    pub fn sort_values(&self, sort: &str) -> Option<&[Value]> {
        match self.interps.get(sort) {
            Some(Interp::Sort(v)) => Some(v),
            _ => None,
        }
    }

    /// Value of a constant (0-ary function).
    pub fn constant(&self, name: &str) -> Option<&Value> {
        match self.interps.get(name) {
            Some(Interp::Function(m)) => m.get(&Vec::new()),
            _ => None,
        }
    }

    /// Truth of a relation tuple; `None` if the symbol is unspecified.
    pub fn holds(&self, pred: &str, args: &[Value]) -> Option<bool> {
        match self.interps.get(pred) {
            Some(Interp::Relation(r)) => Some(r.contains(args)),
            _ => None,
        }
    }

    pub fn apply(&self, func: &str, args: &[Value]) -> Option<&Value> {
        match self.interps.get(func) {
            Some(Interp::Function(m)) => m.get(args),
            _ => None,
        }
    }

    /// Same interpretations and symbols, ignoring names.
    pub fn same_content(&self, other: &Structure) -> bool {
        self.interps == other.interps && self.vocabulary.same_symbols(&other.vocabulary)
    }

    /// Replaces the vocabulary, keeping interpretations of symbols it declares.
    pub fn with_vocabulary(&self, vocabulary: Arc<Vocabulary>) -> Structure {
        let interps = self
            .interps
            .iter()
            .filter(|(k, _)| vocabulary.contains(k))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        Structure {
            name: self.name.clone(),
            vocabulary,
            interps,
        }
    }

    fn canonical_sort_values(&self, sort: &str, mut values: Vec<Value>) -> Vec<Value> {
        if let Some(SortDecl {
            kind: SortKind::Constructed(cons),
            ..
        }) = self.vocabulary.sort(sort)
        {
            let pos = |v: &Value| match v {
                Value::Cons(c) => cons.iter().position(|x| x == c).unwrap_or(usize::MAX),
                _ => usize::MAX,
            };
            values.sort_by_key(|v| pos(v));
        } else {
            values.sort();
        }
        values.dedup();
        values
    }

    /// Checks every interpretation against the declarations: kinds, arities
    /// and membership of tuple elements in interpreted sorts.
    pub fn validate(&self) -> Result<(), ModelError> {
        let voc = &self.vocabulary;
        for (sym, interp) in &self.interps {
            let decl = voc.get(sym).ok_or_else(|| ModelError::MissingSymbol {
                symbol: sym.clone(),
                vocabulary: voc.name.clone(),
            })?;
            match (decl, interp) {
                (Decl::Sort(s), Interp::Sort(values)) => {
                    for v in values {
                        check_kind(s, v)?;
                    }
                }
                (Decl::Predicate(p), Interp::Relation(tuples)) => {
                    for t in tuples {
                        self.check_tuple(sym, &p.args, t)?;
                    }
                }
                (Decl::Function(f), Interp::Function(map)) => {
                    for (args, value) in map {
                        self.check_tuple(sym, &f.args, args)?;
                        self.check_member(sym, &f.out, value)?;
                    }
                }
                _ => {
                    return Err(ModelError::BadInterpretation {
                        symbol: sym.clone(),
                        reason: "wrong kind of interpretation".into(),
                    })
                }
            }
        }
        Ok(())
    }

    fn check_tuple(&self, sym: &str, sorts: &[String], tuple: &[Value]) -> Result<(), ModelError> {
        if sorts.len() != tuple.len() {
            return Err(ModelError::ArityMismatch {
                symbol: sym.to_string(),
                expected: sorts.len(),
                found: tuple.len(),
            });
        }
        for (sort, v) in sorts.iter().zip(tuple) {
            self.check_member(sym, sort, v)?;
        }
        Ok(())
    }

    fn check_member(&self, sym: &str, sort: &str, v: &Value) -> Result<(), ModelError> {
        let out_of_domain = || ModelError::OutOfDomain {
            symbol: sym.to_string(),
            value: v.to_string(),
            sort: sort.to_string(),
        };
        if let Some(decl) = self.vocabulary.sort(sort) {
            check_kind(decl, v).map_err(|_| out_of_domain())?;
        }
        match self.sort_values(sort) {
            Some(values) if values.binary_search(v).is_err() && !values.contains(v) => Err(out_of_domain()),
            _ => Ok(()),
        }
    }

    /// Enumerates the argument space of a symbol; `None` if a sort is
    /// uninterpreted.
    pub fn arg_space(&self, sorts: &[String]) -> Option<Vec<Vec<Value>>> {
        let mut space = vec![Vec::new()];
        for s in sorts {
            let values = self.sort_values(s)?;
            let mut next = Vec::with_capacity(space.len() * values.len());
            for prefix in &space {
                for v in values {
                    let mut t = prefix.clone();
                    t.push(v.clone());
                    next.push(t);
                }
            }
            space = next;
        }
        Some(space)
    }
}

fn check_kind(sort: &SortDecl, v: &Value) -> Result<(), ModelError> {
    let ok = match (&sort.kind, v) {
        (SortKind::Int, Value::Int(_)) => true,
        (SortKind::Str, Value::Str(_)) => true,
        (SortKind::Constructed(cs), Value::Cons(c)) => cs.contains(c),
        (SortKind::Abstract, _) => true,
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(ModelError::OutOfDomain {
            symbol: sort.name.clone(),
            value: v.to_string(),
            sort: sort.name.clone(),
        })
    }
}

/// Orders structures by their interpretations, symbol by symbol in
/// vocabulary declaration order; tuples compare lexicographically.
pub fn canonical_cmp(a: &Structure, b: &Structure) -> std::cmp::Ordering {
    canonical_key(a).cmp(&canonical_key(b))
}

fn canonical_key(s: &Structure) -> Vec<Option<Vec<Vec<Value>>>> {
    s.vocabulary
        .decls()
        .map(|d| {
            s.get(d.name()).map(|i| match i {
                Interp::Sort(v) => v.iter().map(|x| vec![x.clone()]).collect(),
                Interp::Relation(r) => r.iter().cloned().collect(),
                Interp::Function(f) => f
                    .iter()
                    .map(|(k, v)| {
                        let mut t = k.clone();
                        t.push(v.clone());
                        t
                    })
                    .collect(),
            })
        })
        .collect()
}

/// Combines two structures: each symbol takes the interpretation of
/// whichever side enumerates it.
pub fn merge(a: &Structure, b: &Structure) -> Result<Structure, ModelError> {
    let name = format!("{}+{}", a.name, b.name);
    let vocabulary = Arc::new(Vocabulary::union(name.clone(), &a.vocabulary, &b.vocabulary)?);
    let mut out = Structure::new(name, vocabulary);
    for (sym, interp) in a.interps.iter().chain(b.interps.iter()) {
        match out.interps.get(sym) {
            Some(existing) if existing != interp => {
                return Err(ModelError::ConflictingInterpretation { symbol: sym.clone() })
            }
            Some(_) => {}
            None => {
                out.interps.insert(sym.clone(), interp.clone());
            }
        }
    }
    Ok(out)
}

/// Restricts a structure to the symbols of `v`.
pub fn project(s: &Structure, v: &Arc<Vocabulary>) -> Result<Structure, ModelError> {
    for decl in v.decls() {
        match s.vocabulary.get(decl.name()) {
            None => {
                return Err(ModelError::MissingSymbol {
                    symbol: decl.name().to_string(),
                    vocabulary: s.vocabulary.name.clone(),
                })
            }
            Some(d) if d != decl => {
                return Err(ModelError::SignatureClash {
                    symbol: decl.name().to_string(),
                })
            }
            Some(_) => {}
        }
    }
    let mut out = s.with_vocabulary(v.clone());
    out.name = s.name.clone();
    Ok(out)
}

/// True iff every symbol is interpreted and every non-partial function is
/// total over its argument space. Partial functions may have gaps.
pub fn is_two_valued(s: &Structure) -> bool {
    s.vocabulary.decls().all(|decl| match (decl, s.get(decl.name())) {
        (_, None) => false,
        (Decl::Function(f), Some(Interp::Function(map))) if !f.partial => match s.arg_space(&f.args) {
            Some(space) => space.iter().all(|t| map.contains_key(t)),
            None => false,
        },
        (Decl::Function(f), Some(Interp::Function(_))) => f.args.iter().all(|a| s.sort_values(a).is_some()),
        _ => true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn num_voc() -> Arc<Vocabulary> {
        let mut v = Vocabulary::new("V");
        v.declare(Decl::Sort(SortDecl {
            name: "Num".into(),
            kind: SortKind::Int,
            isa: Some("int".into()),
        }))
        .unwrap();
        for c in ["A", "B"] {
            v.declare(Decl::Function(FunctionDecl {
                name: c.into(),
                args: vec![],
                out: "Num".into(),
                partial: false,
            }))
            .unwrap();
        }
        Arc::new(v)
    }

    fn sum_structure() -> Structure {
        let mut s = Structure::new("S", num_voc());
        s.set("Num", Interp::Sort((1..=5).map(Value::Int).collect()));
        s
    }

    fn constant(v: i64) -> Interp {
        Interp::Function(BTreeMap::from([(vec![], Value::Int(v))]))
    }

    #[test]
    fn two_valued_requires_every_symbol() {
        let s = sum_structure();
        assert!(!is_two_valued(&s));
        let mut m = s.clone();
        m.set("A", constant(4));
        m.set("B", constant(5));
        assert!(is_two_valued(&m));
    }

    #[test]
    fn partial_functions_may_have_gaps() {
        let mut v = Vocabulary::new("W");
        v.declare(Decl::Sort(SortDecl {
            name: "key".into(),
            kind: SortKind::Str,
            isa: Some("string".into()),
        }))
        .unwrap();
        v.declare(Decl::Function(FunctionDecl {
            name: "f".into(),
            args: vec!["key".into()],
            out: "key".into(),
            partial: true,
        }))
        .unwrap();
        let mut s = Structure::new("S", Arc::new(v));
        s.set(
            "key",
            Interp::Sort(vec![Value::Str("a".into()), Value::Str("b".into())]),
        );
        s.set(
            "f",
            Interp::Function(BTreeMap::from([(vec![Value::Str("a".into())], Value::Str("b".into()))])),
        );
        assert!(is_two_valued(&s));
    }

    #[test]
    fn merge_with_empty_is_identity() {
        let s = sum_structure();
        let m = merge(&s, &Structure::empty()).unwrap();
        assert!(m.same_content(&s));
    }

    #[test]
    fn merge_rejects_conflicts() {
        let mut a = sum_structure();
        a.set("A", constant(1));
        let mut b = sum_structure();
        b.set("A", constant(2));
        assert!(matches!(
            merge(&a, &b),
            Err(ModelError::ConflictingInterpretation { symbol }) if symbol == "A"
        ));
        b.set("A", constant(1));
        assert!(merge(&a, &b).unwrap().same_content(&a));
    }

    #[test]
    fn merge_rejects_signature_clash() {
        let mut v = Vocabulary::new("W");
        v.declare(Decl::Predicate(PredicateDecl {
            name: "A".into(),
            args: vec![],
        }))
        .unwrap();
        let b = Structure::new("B", Arc::new(v));
        assert!(matches!(
            merge(&sum_structure(), &b),
            Err(ModelError::SignatureClash { .. })
        ));
    }

    #[test]
    fn project_keeps_only_target_symbols() {
        let mut m = sum_structure();
        m.set("A", constant(4));
        m.set("B", constant(5));
        let only_a = Arc::new(m.vocabulary.restrict("VA", ["A"]));
        let p = project(&m, &only_a).unwrap();
        assert_eq!(p.constant("A"), Some(&Value::Int(4)));
        assert!(p.get("B").is_none());
        assert!(p.vocabulary.contains("Num"));
        assert!(project(&m, &m.vocabulary).unwrap().same_content(&m));
    }

    #[test]
    fn project_reports_missing_symbols() {
        let mut v = Vocabulary::new("Other");
        v.declare(Decl::Predicate(PredicateDecl {
            name: "Q".into(),
            args: vec![],
        }))
        .unwrap();
        assert!(matches!(
            project(&sum_structure(), &Arc::new(v)),
            Err(ModelError::MissingSymbol { symbol, .. }) if symbol == "Q"
        ));
    }

    #[test]
    fn validation_rejects_out_of_domain_values() {
        let mut s = sum_structure();
        s.set("A", constant(9));
        assert!(matches!(s.validate(), Err(ModelError::OutOfDomain { .. })));
        s.set("A", constant(3));
        assert!(s.validate().is_ok());
    }

    #[test]
    fn constructed_sorts_keep_declaration_order() {
        let mut v = Vocabulary::new("V");
        v.declare(Decl::Sort(SortDecl {
            name: "shape".into(),
            kind: SortKind::Constructed(vec!["circ".into(), "rect".into(), "text".into()]),
            isa: None,
        }))
        .unwrap();
        let mut s = Structure::new("S", Arc::new(v));
        s.set(
            "shape",
            Interp::Sort(vec![
                Value::Cons("text".into()),
                Value::Cons("circ".into()),
                Value::Cons("rect".into()),
            ]),
        );
        let names: Vec<_> = s.sort_values("shape").unwrap().iter().map(|v| v.to_string()).collect();
        assert_eq!(names, ["circ", "rect", "text"]);
    }
}
