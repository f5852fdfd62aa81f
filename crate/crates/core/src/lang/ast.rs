//! Typed syntax trees produced by the checker.
//!
//! Every node carries a [`Span`]; spans never take part in equality so a
//! reparsed program compares equal to the original.

use std::fmt;
use std::sync::Arc;

use indexmap::IndexMap;

use super::lexer::Pos;
use crate::model::{Structure, Value, Vocabulary};

#[derive(Clone, Copy, Debug, Default)]
pub struct Span {
    pub pos: Pos,
}

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

impl Eq for Span {}

impl From<Pos> for Span {
    fn from(pos: Pos) -> Span {
        Span { pos }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
        }
    }

    pub fn apply(self, a: i64, b: i64) -> Option<i64> {
        match self {
            ArithOp::Add => a.checked_add(b),
            ArithOp::Sub => a.checked_sub(b),
            ArithOp::Mul => a.checked_mul(b),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Gt,
    Le,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "~=",
            CmpOp::Lt => "<",
            CmpOp::Gt => ">",
            CmpOp::Le => "=<",
            CmpOp::Ge => ">=",
        }
    }

    /// Compares two values. Ordering comparisons are only meaningful on
    /// integers; on other values they fall back to the canonical order.
    pub fn holds(self, a: &Value, b: &Value) -> bool {
        match self {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            CmpOp::Lt => a < b,
            CmpOp::Gt => a > b,
            CmpOp::Le => a <= b,
            CmpOp::Ge => a >= b,
        }
    }
}

/// Built-in total functions available in every vocabulary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Builtin {
    /// `concat(s1, ..., sn)`; integer arguments are rendered in decimal.
    Concat,
    /// `str(n)`: decimal rendering of an integer.
    Str,
}

impl Builtin {
    pub fn name(self) -> &'static str {
        match self {
            Builtin::Concat => "concat",
            Builtin::Str => "str",
        }
    }

    pub fn from_name(name: &str) -> Option<Builtin> {
        match name {
            "concat" => Some(Builtin::Concat),
            "str" => Some(Builtin::Str),
            _ => None,
        }
    }

    pub fn apply(self, args: &[Value]) -> Option<Value> {
        let render = |v: &Value| match v {
            Value::Int(n) => n.to_string(),
            Value::Str(s) | Value::Cons(s) => s.clone(),
        };
        match self {
            Builtin::Concat => Some(Value::Str(args.iter().map(render).collect())),
            Builtin::Str => match args {
                [v] => Some(Value::Str(render(v))),
                _ => None,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Var {
    pub name: String,
    pub sort: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TermKind {
    Var(Var),
    /// Integer, string or constructor literal.
    Const(Value),
    /// Application of a vocabulary function; constants have no arguments.
    App(String, Vec<Term>),
    Arith(ArithOp, Box<Term>, Box<Term>),
    Neg(Box<Term>),
    Builtin(Builtin, Vec<Term>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub kind: TermKind,
    pub span: Span,
}

impl Term {
    pub fn new(kind: TermKind, span: impl Into<Span>) -> Term {
        Term {
            kind,
            span: span.into(),
        }
    }

    /// Visits every function symbol applied inside the term.
    pub fn for_each_symbol(&self, f: &mut dyn FnMut(&str)) {
        match &self.kind {
            TermKind::Var(_) | TermKind::Const(_) => {}
            TermKind::App(name, args) => {
                f(name);
                args.iter().for_each(|a| a.for_each_symbol(f));
            }
            TermKind::Arith(_, a, b) => {
                a.for_each_symbol(f);
                b.for_each_symbol(f);
            }
            TermKind::Neg(a) => a.for_each_symbol(f),
            TermKind::Builtin(_, args) => args.iter().for_each(|a| a.for_each_symbol(f)),
        }
    }

    pub fn for_each_var(&self, f: &mut dyn FnMut(&Var)) {
        match &self.kind {
            TermKind::Var(v) => f(v),
            TermKind::Const(_) => {}
            TermKind::App(_, args) | TermKind::Builtin(_, args) => args.iter().for_each(|a| a.for_each_var(f)),
            TermKind::Arith(_, a, b) => {
                a.for_each_var(f);
                b.for_each_var(f);
            }
            TermKind::Neg(a) => a.for_each_var(f),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FormulaKind {
    Bool(bool),
    Atom(String, Vec<Term>),
    Cmp(CmpOp, Term, Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    ImpliedBy(Box<Formula>, Box<Formula>),
    Equiv(Box<Formula>, Box<Formula>),
    Forall(Vec<Var>, Box<Formula>),
    Exists(Vec<Var>, Box<Formula>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Formula {
    pub kind: FormulaKind,
    pub span: Span,
}

impl Formula {
    pub fn new(kind: FormulaKind, span: impl Into<Span>) -> Formula {
        Formula {
            kind,
            span: span.into(),
        }
    }

    pub fn truth(b: bool) -> Formula {
        Formula::new(FormulaKind::Bool(b), Span::default())
    }

    /// Visits every predicate and function symbol in the formula.
    pub fn for_each_symbol(&self, f: &mut dyn FnMut(&str)) {
        match &self.kind {
            FormulaKind::Bool(_) => {}
            FormulaKind::Atom(name, args) => {
                f(name);
                args.iter().for_each(|a| a.for_each_symbol(f));
            }
            FormulaKind::Cmp(_, a, b) => {
                a.for_each_symbol(f);
                b.for_each_symbol(f);
            }
            FormulaKind::Not(a) | FormulaKind::Forall(_, a) | FormulaKind::Exists(_, a) => a.for_each_symbol(f),
            FormulaKind::And(a, b)
            | FormulaKind::Or(a, b)
            | FormulaKind::Implies(a, b)
            | FormulaKind::ImpliedBy(a, b)
            | FormulaKind::Equiv(a, b) => {
                a.for_each_symbol(f);
                b.for_each_symbol(f);
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Head {
    /// `p(t1, ..., tn)`
    Pred(String, Vec<Term>),
    /// `f(t1, ..., tn) = v`
    Func(String, Vec<Term>, Term),
}

impl Head {
    pub fn symbol(&self) -> &str {
        match self {
            Head::Pred(s, _) | Head::Func(s, _, _) => s,
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Head::Pred(_, a) | Head::Func(_, a, _) => a,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    /// Universally quantified rule variables, explicit or implicit.
    pub vars: Vec<Var>,
    pub head: Head,
    pub body: Formula,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Definition {
    pub rules: Vec<Rule>,
}

impl Definition {
    /// Defined symbols in first-occurrence order.
    pub fn defined(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.rules {
            let s = r.head.symbol();
            if !out.iter().any(|o| o == s) {
                out.push(s.to_string());
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Theory {
    pub name: String,
    pub vocabulary: Arc<Vocabulary>,
    pub sentences: Vec<Formula>,
    pub definitions: Vec<Definition>,
    pub span: Span,
}

impl Theory {
    pub fn empty(name: impl Into<String>, vocabulary: Arc<Vocabulary>) -> Theory {
        Theory {
            name: name.into(),
            vocabulary,
            sentences: Vec::new(),
            definitions: Vec::new(),
            span: Span::default(),
        }
    }

    /// All symbols defined by some definition.
    pub fn defined_symbols(&self) -> Vec<String> {
        self.definitions.iter().flat_map(|d| d.defined()).collect()
    }

    /// Every vocabulary symbol mentioned in sentences or rules.
    pub fn mentioned_symbols(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        let mut add = |s: &str| {
            if !out.iter().any(|o| o == s) {
                out.push(s.to_string());
            }
        };
        for f in &self.sentences {
            f.for_each_symbol(&mut add);
        }
        for d in &self.definitions {
            for r in &d.rules {
                add(r.head.symbol());
                for a in r.head.args() {
                    a.for_each_symbol(&mut add);
                }
                if let Head::Func(_, _, v) = &r.head {
                    v.for_each_symbol(&mut add);
                }
                r.body.for_each_symbol(&mut add);
            }
        }
        out
    }
}

/// Maps the nine roles of an interactive simulation to program objects.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Simulation {
    pub name: String,
    pub entries: Vec<(String, String)>,
}

impl Simulation {
    pub fn get(&self, role: &str) -> Option<&str> {
        self.entries.iter().find(|(r, _)| r == role).map(|(_, t)| t.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockKind {
    Vocabulary,
    Theory,
    Structure,
    Procedure,
    Simulation,
}

impl fmt::Display for BlockKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BlockKind::Vocabulary => "vocabulary",
            BlockKind::Theory => "theory",
            BlockKind::Structure => "structure",
            BlockKind::Procedure => "procedure",
            BlockKind::Simulation => "simulation",
        })
    }
}

/// A checked program. Blocks are also kept in source order for printing.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Program {
    pub vocabularies: IndexMap<String, Arc<Vocabulary>>,
    pub theories: IndexMap<String, Theory>,
    pub structures: IndexMap<String, Structure>,
    /// Opaque procedure blocks: name to raw text.
    pub procedures: IndexMap<String, String>,
    pub simulations: IndexMap<String, Simulation>,
    /// Vocabularies derived on demand (`X_ss`), not printed.
    pub derived: IndexMap<String, Arc<Vocabulary>>,
    pub order: Vec<(BlockKind, String)>,
}

impl Program {
    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Looks a vocabulary up among declared, derived and predeclared ones.
    pub fn vocabulary(&self, name: &str) -> Option<Arc<Vocabulary>> {
        self.vocabularies
            .get(name)
            .or_else(|| self.derived.get(name))
            .cloned()
            .or_else(|| super::prelude::get(name))
    }

    pub fn theory(&self, name: &str) -> Option<&Theory> {
        self.theories.get(name)
    }

    pub fn structure(&self, name: &str) -> Option<&Structure> {
        self.structures.get(name)
    }
}
