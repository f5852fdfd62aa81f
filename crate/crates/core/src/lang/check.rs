//! Name resolution and sort checking from the untyped syntax tree to the
//! typed [`Program`].

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::ast::*;
use super::lexer::Pos;
use super::parser::{SBlock, SElem, SExpr, SForm, SInterp, SInterpItem, SRule, SValue, SVar, SVocItem};
use super::{prelude, LangError};
use crate::model::{
    Decl, FunctionDecl, Interp, ModelError, PredicateDecl, SortDecl, SortKind, Structure, Value, Vocabulary,
};

/// Roles a `simulation` block may assign.
pub const SIM_ROLES: [&str; 10] = [
    "T", "S", "V_state", "T_out", "S_out", "V_out", "T_in", "S_in", "V_in", "V_action",
];

const MAX_RANGE: i64 = 1_000_000;
const SLOT_MARK: char = '\u{0}';

pub(super) fn check_program(blocks: Vec<SBlock>, with_prelude: bool) -> Result<Program, LangError> {
    let mut c = Checker {
        prog: Program::default(),
        with_prelude,
    };
    for block in blocks {
        c.block(block)?;
    }
    Ok(c.prog)
}

struct Checker {
    prog: Program,
    with_prelude: bool,
}

fn dup(pos: Pos, kind: BlockKind, name: &str) -> LangError {
    LangError::DuplicateName {
        pos,
        name: name.to_string(),
        msg: format!("a {kind} with this name is already declared"),
    }
}

impl Checker {
    fn lookup_vocabulary(&mut self, name: &str, pos: Pos) -> Result<Arc<Vocabulary>, LangError> {
        if let Some(v) = self.prog.vocabularies.get(name).or_else(|| self.prog.derived.get(name)) {
            return Ok(v.clone());
        }
        if self.with_prelude {
            if let Some(v) = prelude::get(name) {
                return Ok(v);
            }
        }
        if let Some(base) = name.strip_suffix("_ss") {
            if let Ok(b) = self.lookup_vocabulary(base, pos) {
                let ss = crate::ltc::single_state_vocabulary(&b).map_err(|e| LangError::Invalid {
                    pos,
                    msg: format!("cannot derive `{name}`: {e}"),
                })?;
                let ss = Arc::new(ss);
                self.prog.derived.insert(name.to_string(), ss.clone());
                return Ok(ss);
            }
        }
        Err(LangError::UnknownSymbol {
            pos,
            name: name.to_string(),
            context: " (no such vocabulary)".into(),
        })
    }

    fn block(&mut self, block: SBlock) -> Result<(), LangError> {
        match block {
            SBlock::Vocabulary { name, ltc, items, pos } => {
                if self.prog.vocabularies.contains_key(&name) {
                    return Err(dup(pos, BlockKind::Vocabulary, &name));
                }
                let v = self.vocabulary(&name, ltc, items)?;
                self.prog.vocabularies.insert(name.clone(), Arc::new(v));
                self.prog.order.push((BlockKind::Vocabulary, name));
            }
            SBlock::Theory {
                name,
                vocabulary,
                vocabulary_pos,
                sentences,
                definitions,
                pos,
            } => {
                if self.prog.theories.contains_key(&name) {
                    return Err(dup(pos, BlockKind::Theory, &name));
                }
                let voc = self.lookup_vocabulary(&vocabulary, vocabulary_pos)?;
                let t = theory(&name, voc, sentences, definitions, pos)?;
                self.prog.theories.insert(name.clone(), t);
                self.prog.order.push((BlockKind::Theory, name));
            }
            SBlock::Structure {
                name,
                vocabulary,
                vocabulary_pos,
                items,
                pos,
            } => {
                if self.prog.structures.contains_key(&name) {
                    return Err(dup(pos, BlockKind::Structure, &name));
                }
                let voc = self.lookup_vocabulary(&vocabulary, vocabulary_pos)?;
                let s = structure(&name, voc, items, pos)?;
                self.prog.structures.insert(name.clone(), s);
                self.prog.order.push((BlockKind::Structure, name));
            }
            SBlock::Procedure { name, text, pos } => {
                if self.prog.procedures.contains_key(&name) {
                    return Err(dup(pos, BlockKind::Procedure, &name));
                }
                self.prog.procedures.insert(name.clone(), text);
                self.prog.order.push((BlockKind::Procedure, name));
            }
            SBlock::Simulation { name, entries, pos } => {
                if self.prog.simulations.contains_key(&name) {
                    return Err(dup(pos, BlockKind::Simulation, &name));
                }
                let mut sim = Simulation {
                    name: name.clone(),
                    entries: Vec::new(),
                };
                for (role, target, rpos) in entries {
                    if !SIM_ROLES.contains(&role.as_str()) {
                        return Err(LangError::UnknownSymbol {
                            pos: rpos,
                            name: role,
                            context: format!(" (simulation roles are {})", SIM_ROLES.join(", ")),
                        });
                    }
                    if sim.get(&role).is_some() {
                        return Err(LangError::DuplicateName {
                            pos: rpos,
                            name: role,
                            msg: "role assigned twice".into(),
                        });
                    }
                    let found = match role.as_bytes()[0] {
                        b'T' => self.prog.theories.contains_key(&target),
                        b'S' => self.prog.structures.contains_key(&target),
                        _ => self.lookup_vocabulary(&target, rpos).is_ok(),
                    };
                    if !found {
                        return Err(LangError::UnknownSymbol {
                            pos: rpos,
                            name: target,
                            context: format!(" (assigned to role {role})"),
                        });
                    }
                    sim.entries.push((role, target));
                }
                self.prog.simulations.insert(name.clone(), sim);
                self.prog.order.push((BlockKind::Simulation, name));
            }
        }
        Ok(())
    }

    fn vocabulary(&mut self, name: &str, ltc: bool, items: Vec<SVocItem>) -> Result<Vocabulary, LangError> {
        let mut v = Vocabulary::new(name);
        v.ltc = ltc;
        let mut own: BTreeSet<String> = BTreeSet::new();
        let clash = |pos: Pos, n: &str| LangError::DuplicateName {
            pos,
            name: n.to_string(),
            msg: "declared twice with different signatures".into(),
        };
        let mut symbols = Vec::new();
        for item in items {
            match item {
                SVocItem::Extern { name: ext, pos } => {
                    let e = self.lookup_vocabulary(&ext, pos)?;
                    v.include(&e).map_err(|err| match err {
                        ModelError::SignatureClash { symbol } => clash(pos, &symbol),
                        other => LangError::Invalid {
                            pos,
                            msg: other.to_string(),
                        },
                    })?;
                }
                SVocItem::Type {
                    name: sort,
                    isa,
                    constructors,
                    pos,
                } => {
                    if !own.insert(sort.clone()) {
                        return Err(LangError::DuplicateName {
                            pos,
                            name: sort,
                            msg: "declared twice in this vocabulary".into(),
                        });
                    }
                    let kind = match (isa.as_deref(), constructors) {
                        (Some(_), Some(_)) => {
                            return Err(LangError::Parse {
                                pos,
                                msg: "a sort is either `isa` another sort or `constructed from` constructors".into(),
                            })
                        }
                        (Some("int"), None) => SortKind::Int,
                        (Some("string"), None) => SortKind::Str,
                        (Some(parent), None) => match v.sort(parent) {
                            Some(p) => p.kind.clone(),
                            None => {
                                return Err(LangError::UnknownSymbol {
                                    pos,
                                    name: parent.to_string(),
                                    context: " (not a sort)".into(),
                                })
                            }
                        },
                        (None, Some(cs)) => {
                            let mut seen = BTreeSet::new();
                            for c in &cs {
                                if !seen.insert(c) || v.constructor_sort(c).is_some() || v.contains(c) {
                                    return Err(LangError::DuplicateName {
                                        pos,
                                        name: c.clone(),
                                        msg: "constructor names must be unique".into(),
                                    });
                                }
                            }
                            SortKind::Constructed(cs)
                        }
                        (None, None) => SortKind::Abstract,
                    };
                    v.declare(Decl::Sort(SortDecl {
                        name: sort.clone(),
                        kind,
                        isa,
                    }))
                    .map_err(|_| clash(pos, &sort))?;
                }
                sym @ SVocItem::Symbol { .. } => symbols.push(sym),
            }
        }
        for item in symbols {
            let SVocItem::Symbol {
                name: sym,
                partial,
                args,
                out,
                pos,
            } = item
            else {
                unreachable!()
            };
            if !own.insert(sym.clone()) {
                return Err(LangError::DuplicateName {
                    pos,
                    name: sym,
                    msg: "declared twice in this vocabulary".into(),
                });
            }
            for s in args.iter().chain(out.iter()) {
                if v.sort(s).is_none() {
                    return Err(LangError::UnknownSymbol {
                        pos,
                        name: s.clone(),
                        context: format!(" (not a sort, in the declaration of `{sym}`)"),
                    });
                }
            }
            if v.constructor_sort(&sym).is_some() {
                return Err(clash(pos, &sym));
            }
            let decl = match out {
                Some(out) => Decl::Function(FunctionDecl {
                    name: sym.clone(),
                    args,
                    out,
                    partial,
                }),
                None => Decl::Predicate(PredicateDecl {
                    name: sym.clone(),
                    args,
                }),
            };
            v.declare(decl).map_err(|_| clash(pos, &sym))?;
        }
        Ok(v)
    }
}

/// How values of a sort are compared for sort checking.
#[derive(Clone, Debug, PartialEq, Eq)]
enum Kind {
    Int,
    Str,
    /// Constructed sort, by the root sort declaring the constructors.
    Named(String),
    Abstract(String),
    IntLit,
    StrLit,
}

impl Kind {
    fn describe(&self) -> String {
        match self {
            Kind::Int | Kind::IntLit => "an integer".into(),
            Kind::Str | Kind::StrLit => "a string".into(),
            Kind::Named(s) | Kind::Abstract(s) => format!("a value of sort `{s}`"),
        }
    }

    fn is_intlike(&self) -> bool {
        matches!(self, Kind::Int | Kind::IntLit | Kind::Abstract(_))
    }
}

fn sort_kind(voc: &Vocabulary, sort: &str) -> Kind {
    match voc.sort(sort).map(|s| &s.kind) {
        Some(SortKind::Int) => Kind::Int,
        Some(SortKind::Str) => Kind::Str,
        Some(SortKind::Constructed(cs)) => match cs.first().and_then(|c| voc.constructor_sort(c)) {
            Some(root) => Kind::Named(root.name.clone()),
            None => Kind::Named(sort.to_string()),
        },
        _ => Kind::Abstract(sort.to_string()),
    }
}

/// Whether a value of kind `actual` may stand where `expected` is required.
fn fits(expected: &Kind, actual: &Kind) -> bool {
    match (expected, actual) {
        (a, b) if a == b => true,
        (Kind::Int, Kind::IntLit) | (Kind::IntLit, Kind::Int) => true,
        (Kind::Str, Kind::StrLit) | (Kind::StrLit, Kind::Str) => true,
        (Kind::Abstract(_), Kind::IntLit | Kind::StrLit) | (Kind::IntLit | Kind::StrLit, Kind::Abstract(_)) => true,
        _ => false,
    }
}

struct Slot {
    name: String,
    sort: Option<String>,
    pos: Pos,
}

/// Converts one sentence or rule, deriving the sorts of its variables.
struct Scope<'a> {
    voc: &'a Vocabulary,
    bound: Vec<usize>,
    slots: Vec<Slot>,
    /// Slots of implicitly quantified rule variables, when converting a rule.
    implicit: Option<Vec<usize>>,
}

fn marker(id: usize) -> String {
    format!("{SLOT_MARK}{id}")
}

fn slot_of(v: &Var) -> Option<usize> {
    v.sort.strip_prefix(SLOT_MARK).and_then(|s| s.parse().ok())
}

impl<'a> Scope<'a> {
    fn new(voc: &'a Vocabulary, rule: bool) -> Self {
        Scope {
            voc,
            bound: Vec::new(),
            slots: Vec::new(),
            implicit: rule.then(Vec::new),
        }
    }

    fn new_slot(&mut self, name: &str, sort: Option<String>, pos: Pos) -> usize {
        self.slots.push(Slot {
            name: name.to_string(),
            sort,
            pos,
        });
        self.slots.len() - 1
    }

    fn bind(&mut self, vars: &[SVar]) -> Result<Vec<usize>, LangError> {
        let mut ids = Vec::new();
        for v in vars {
            if let Some(s) = &v.sort {
                if self.voc.sort(s).is_none() {
                    return Err(LangError::UnknownSymbol {
                        pos: v.pos,
                        name: s.clone(),
                        context: " (not a sort)".into(),
                    });
                }
            }
            ids.push(self.new_slot(&v.name, v.sort.clone(), v.pos));
        }
        self.bound.extend(&ids);
        Ok(ids)
    }

    fn var_term(&self, id: usize, pos: Pos) -> Term {
        Term::new(
            TermKind::Var(Var {
                name: self.slots[id].name.clone(),
                sort: marker(id),
            }),
            pos,
        )
    }

    fn lookup_bound(&self, name: &str) -> Option<usize> {
        self.bound.iter().rev().copied().find(|&id| self.slots[id].name == name)
    }

    fn arity_error(&self, name: &str, expected: usize, found: usize, pos: Pos) -> LangError {
        LangError::SortMismatch {
            pos,
            msg: format!("`{name}` expects {expected} argument(s), got {found}"),
        }
    }

    fn term(&mut self, e: &SExpr) -> Result<Term, LangError> {
        Ok(match e {
            SExpr::Int(n, p) => Term::new(TermKind::Const(Value::Int(*n)), *p),
            SExpr::Str(s, p) => Term::new(TermKind::Const(Value::Str(s.clone())), *p),
            SExpr::Neg(a, p) => Term::new(TermKind::Neg(Box::new(self.term(a)?)), *p),
            SExpr::Arith(op, a, b, p) => Term::new(
                TermKind::Arith(*op, Box::new(self.term(a)?), Box::new(self.term(b)?)),
                *p,
            ),
            SExpr::Ident(name, p) => {
                if let Some(id) = self.lookup_bound(name) {
                    return Ok(self.var_term(id, *p));
                }
                if let Some(f) = self.voc.function(name) {
                    if !f.args.is_empty() {
                        return Err(self.arity_error(name, f.args.len(), 0, *p));
                    }
                    return Ok(Term::new(TermKind::App(name.clone(), Vec::new()), *p));
                }
                if self.voc.predicate(name).is_some() {
                    return Err(LangError::SortMismatch {
                        pos: *p,
                        msg: format!("predicate `{name}` used as a term"),
                    });
                }
                if self.voc.constructor_sort(name).is_some() {
                    return Ok(Term::new(TermKind::Const(Value::Cons(name.clone())), *p));
                }
                if let Some(implicit) = &self.implicit {
                    if let Some(&id) = implicit.iter().find(|&&id| self.slots[id].name == *name) {
                        return Ok(self.var_term(id, *p));
                    }
                    let id = self.new_slot(name, None, *p);
                    self.implicit.as_mut().unwrap().push(id);
                    return Ok(self.var_term(id, *p));
                }
                return Err(LangError::UnknownSymbol {
                    pos: *p,
                    name: name.clone(),
                    context: " (not a symbol, constructor or bound variable)".into(),
                });
            }
            SExpr::App(name, args, p) => {
                if let Some(f) = self.voc.function(name) {
                    if f.args.len() != args.len() {
                        return Err(self.arity_error(name, f.args.len(), args.len(), *p));
                    }
                    let args = args.iter().map(|a| self.term(a)).collect::<Result<_, _>>()?;
                    return Ok(Term::new(TermKind::App(name.clone(), args), *p));
                }
                if self.voc.predicate(name).is_some() {
                    return Err(LangError::SortMismatch {
                        pos: *p,
                        msg: format!("predicate `{name}` used as a term"),
                    });
                }
                if args.is_empty() && self.voc.constructor_sort(name).is_some() {
                    return Ok(Term::new(TermKind::Const(Value::Cons(name.clone())), *p));
                }
                if let Some(b) = Builtin::from_name(name) {
                    if b == Builtin::Str && args.len() != 1 {
                        return Err(self.arity_error(name, 1, args.len(), *p));
                    }
                    let args = args.iter().map(|a| self.term(a)).collect::<Result<_, _>>()?;
                    return Ok(Term::new(TermKind::Builtin(b, args), *p));
                }
                return Err(LangError::UnknownSymbol {
                    pos: *p,
                    name: name.clone(),
                    context: " (not a function)".into(),
                });
            }
        })
    }

    fn formula(&mut self, f: &SForm) -> Result<Formula, LangError> {
        let bin = |s: &mut Self, a: &SForm, b: &SForm| -> Result<(Box<Formula>, Box<Formula>), LangError> {
            Ok((Box::new(s.formula(a)?), Box::new(s.formula(b)?)))
        };
        Ok(match f {
            SForm::Bool(b, p) => Formula::new(FormulaKind::Bool(*b), *p),
            SForm::Atom(name, args, p) => {
                if let Some(pr) = self.voc.predicate(name) {
                    if pr.args.len() != args.len() {
                        return Err(self.arity_error(name, pr.args.len(), args.len(), *p));
                    }
                    let args = args.iter().map(|a| self.term(a)).collect::<Result<_, _>>()?;
                    return Ok(Formula::new(FormulaKind::Atom(name.clone(), args), *p));
                }
                if self.voc.function(name).is_some() {
                    return Err(LangError::SortMismatch {
                        pos: *p,
                        msg: format!("function `{name}` used as a formula"),
                    });
                }
                return Err(LangError::UnknownSymbol {
                    pos: *p,
                    name: name.clone(),
                    context: " (not a predicate)".into(),
                });
            }
            SForm::Cmp(op, a, b, p) => Formula::new(FormulaKind::Cmp(*op, self.term(a)?, self.term(b)?), *p),
            SForm::Not(a, p) => Formula::new(FormulaKind::Not(Box::new(self.formula(a)?)), *p),
            SForm::And(a, b, p) => {
                let (a, b) = bin(self, a, b)?;
                Formula::new(FormulaKind::And(a, b), *p)
            }
            SForm::Or(a, b, p) => {
                let (a, b) = bin(self, a, b)?;
                Formula::new(FormulaKind::Or(a, b), *p)
            }
            SForm::Implies(a, b, p) => {
                let (a, b) = bin(self, a, b)?;
                Formula::new(FormulaKind::Implies(a, b), *p)
            }
            SForm::ImpliedBy(a, b, p) => {
                let (a, b) = bin(self, a, b)?;
                Formula::new(FormulaKind::ImpliedBy(a, b), *p)
            }
            SForm::Equiv(a, b, p) => {
                let (a, b) = bin(self, a, b)?;
                Formula::new(FormulaKind::Equiv(a, b), *p)
            }
            SForm::Quant {
                forall,
                vars,
                body,
                pos,
            } => {
                let ids = self.bind(vars)?;
                let body = self.formula(body);
                self.bound.truncate(self.bound.len() - ids.len());
                let body = Box::new(body?);
                let vars = ids
                    .iter()
                    .map(|&id| Var {
                        name: self.slots[id].name.clone(),
                        sort: marker(id),
                    })
                    .collect();
                let kind = if *forall {
                    FormulaKind::Forall(vars, body)
                } else {
                    FormulaKind::Exists(vars, body)
                };
                Formula::new(kind, *pos)
            }
        })
    }

    fn head(&mut self, f: &SForm) -> Result<Head, LangError> {
        match f {
            SForm::Atom(name, _, p) if self.voc.predicate(name).is_none() => Err(LangError::Invalid {
                pos: *p,
                msg: format!("rule head `{name}` is not a predicate of the vocabulary"),
            }),
            SForm::Atom(..) => match self.formula(f)?.kind {
                FormulaKind::Atom(name, args) => Ok(Head::Pred(name, args)),
                _ => unreachable!(),
            },
            SForm::Cmp(CmpOp::Eq, lhs, rhs, p) => {
                let (name, args) = match lhs {
                    SExpr::Ident(n, _) => (n, &[][..]),
                    SExpr::App(n, a, _) => (n, &a[..]),
                    _ => {
                        return Err(LangError::Invalid {
                            pos: *p,
                            msg: "rule head must be an atom or `f(...) = value`".into(),
                        })
                    }
                };
                let Some(decl) = self.voc.function(name) else {
                    return Err(LangError::Invalid {
                        pos: lhs.pos(),
                        msg: format!("rule head `{name}` is not a function of the vocabulary"),
                    });
                };
                if decl.args.len() != args.len() {
                    return Err(self.arity_error(name, decl.args.len(), args.len(), lhs.pos()));
                }
                let args = args.iter().map(|a| self.term(a)).collect::<Result<_, _>>()?;
                let value = self.term(rhs)?;
                Ok(Head::Func(name.clone(), args, value))
            }
            other => Err(LangError::Invalid {
                pos: other.pos(),
                msg: "rule head must be an atom or `f(...) = value`".into(),
            }),
        }
    }

    // ---- sort derivation ----

    fn term_sort(&self, t: &Term) -> Option<String> {
        match &t.kind {
            TermKind::Var(v) => match slot_of(v) {
                Some(id) => self.slots[id].sort.clone(),
                None => Some(v.sort.clone()),
            },
            TermKind::App(f, _) => self.voc.function(f).map(|d| d.out.clone()),
            TermKind::Const(Value::Cons(c)) => self.voc.constructor_sort(c).map(|s| s.name.clone()),
            _ => None,
        }
    }

    fn assign(&mut self, t: &Term, sort: &str) -> bool {
        if let TermKind::Var(v) = &t.kind {
            if let Some(id) = slot_of(v) {
                if self.slots[id].sort.is_none() {
                    self.slots[id].sort = Some(sort.to_string());
                    return true;
                }
            }
        }
        false
    }

    fn derive_args(&mut self, args: &[Term], sorts: &[String]) -> bool {
        let mut changed = false;
        for (a, s) in args.iter().zip(sorts) {
            changed |= self.assign(a, s);
            changed |= self.derive_term(a);
        }
        changed
    }

    fn derive_term(&mut self, t: &Term) -> bool {
        match &t.kind {
            TermKind::Var(_) | TermKind::Const(_) => false,
            TermKind::App(f, args) => {
                let sorts = self.voc.function(f).map(|d| d.args.clone()).unwrap_or_default();
                self.derive_args(args, &sorts)
            }
            TermKind::Arith(_, a, b) => self.derive_term(a) | self.derive_term(b),
            TermKind::Neg(a) => self.derive_term(a),
            TermKind::Builtin(_, args) => args.iter().fold(false, |c, a| self.derive_term(a) | c),
        }
    }

    fn derive_eq(&mut self, a: &Term, b: &Term) -> bool {
        let mut changed = false;
        if let Some(s) = self.term_sort(b) {
            changed |= self.assign(a, &s);
        }
        if let Some(s) = self.term_sort(a) {
            changed |= self.assign(b, &s);
        }
        changed
    }

    fn derive_formula(&mut self, f: &Formula) -> bool {
        match &f.kind {
            FormulaKind::Bool(_) => false,
            FormulaKind::Atom(p, args) => {
                let sorts = self.voc.predicate(p).map(|d| d.args.clone()).unwrap_or_default();
                self.derive_args(args, &sorts)
            }
            FormulaKind::Cmp(_, a, b) => self.derive_eq(a, b) | self.derive_term(a) | self.derive_term(b),
            FormulaKind::Not(a) | FormulaKind::Forall(_, a) | FormulaKind::Exists(_, a) => self.derive_formula(a),
            FormulaKind::And(a, b)
            | FormulaKind::Or(a, b)
            | FormulaKind::Implies(a, b)
            | FormulaKind::ImpliedBy(a, b)
            | FormulaKind::Equiv(a, b) => self.derive_formula(a) | self.derive_formula(b),
        }
    }

    fn derive_head(&mut self, h: &Head) -> bool {
        match h {
            Head::Pred(p, args) => {
                let sorts = self.voc.predicate(p).map(|d| d.args.clone()).unwrap_or_default();
                self.derive_args(args, &sorts)
            }
            Head::Func(f, args, v) => {
                let d = self.voc.function(f).cloned().expect("checked head");
                let mut changed = self.derive_args(args, &d.args);
                changed |= self.assign(v, &d.out);
                changed | self.derive_term(v)
            }
        }
    }

    fn finish_slots(&self) -> Result<(), LangError> {
        for s in &self.slots {
            if s.sort.is_none() {
                return Err(LangError::SortMismatch {
                    pos: s.pos,
                    msg: format!("cannot derive the sort of variable `{}`", s.name),
                });
            }
        }
        Ok(())
    }

    fn resolve_var(&self, v: &mut Var) {
        if let Some(id) = slot_of(v) {
            v.sort = self.slots[id].sort.clone().expect("finished");
        }
    }

    fn resolve_term(&self, t: &mut Term) {
        match &mut t.kind {
            TermKind::Var(v) => self.resolve_var(v),
            TermKind::Const(_) => {}
            TermKind::App(_, args) | TermKind::Builtin(_, args) => args.iter_mut().for_each(|a| self.resolve_term(a)),
            TermKind::Arith(_, a, b) => {
                self.resolve_term(a);
                self.resolve_term(b);
            }
            TermKind::Neg(a) => self.resolve_term(a),
        }
    }

    fn resolve_formula(&self, f: &mut Formula) {
        match &mut f.kind {
            FormulaKind::Bool(_) => {}
            FormulaKind::Atom(_, args) => args.iter_mut().for_each(|a| self.resolve_term(a)),
            FormulaKind::Cmp(_, a, b) => {
                self.resolve_term(a);
                self.resolve_term(b);
            }
            FormulaKind::Not(a) => self.resolve_formula(a),
            FormulaKind::Forall(vs, a) | FormulaKind::Exists(vs, a) => {
                vs.iter_mut().for_each(|v| self.resolve_var(v));
                self.resolve_formula(a);
            }
            FormulaKind::And(a, b)
            | FormulaKind::Or(a, b)
            | FormulaKind::Implies(a, b)
            | FormulaKind::ImpliedBy(a, b)
            | FormulaKind::Equiv(a, b) => {
                self.resolve_formula(a);
                self.resolve_formula(b);
            }
        }
    }

    // ---- sort checking (after resolution) ----

    fn kind_of(&self, t: &Term) -> Result<Kind, LangError> {
        Ok(match &t.kind {
            TermKind::Var(v) => sort_kind(self.voc, &v.sort),
            TermKind::Const(Value::Int(_)) => Kind::IntLit,
            TermKind::Const(Value::Str(_)) => Kind::StrLit,
            TermKind::Const(Value::Cons(c)) => {
                let s = self.voc.constructor_sort(c).expect("resolved constructor");
                sort_kind(self.voc, &s.name)
            }
            TermKind::App(f, args) => {
                let d = self.voc.function(f).expect("resolved function");
                self.check_args(f, args, &d.args)?;
                sort_kind(self.voc, &d.out)
            }
            TermKind::Arith(op, a, b) => {
                for x in [a, b] {
                    let k = self.kind_of(x)?;
                    if !matches!(k, Kind::Int | Kind::IntLit) {
                        return Err(LangError::SortMismatch {
                            pos: x.span.pos,
                            msg: format!(
                                "operand of `{}` must be an integer, found {}",
                                op.symbol(),
                                k.describe()
                            ),
                        });
                    }
                }
                Kind::Int
            }
            TermKind::Neg(a) => {
                let k = self.kind_of(a)?;
                if !matches!(k, Kind::Int | Kind::IntLit) {
                    return Err(LangError::SortMismatch {
                        pos: a.span.pos,
                        msg: format!("operand of `-` must be an integer, found {}", k.describe()),
                    });
                }
                Kind::Int
            }
            TermKind::Builtin(b, args) => {
                for a in args {
                    let k = self.kind_of(a)?;
                    if *b == Builtin::Str && !k.is_intlike() {
                        return Err(LangError::SortMismatch {
                            pos: a.span.pos,
                            msg: format!("`str` expects an integer, found {}", k.describe()),
                        });
                    }
                }
                Kind::Str
            }
        })
    }

    fn check_position(&self, what: &str, t: &Term, sort: &str) -> Result<(), LangError> {
        let k = self.kind_of(t)?;
        let expected = sort_kind(self.voc, sort);
        if !fits(&expected, &k) {
            return Err(LangError::SortMismatch {
                pos: t.span.pos,
                msg: format!("{what} expects sort `{sort}`, found {}", k.describe()),
            });
        }
        if let TermKind::Const(Value::Cons(c)) = &t.kind {
            let ok = match self.voc.sort(sort).map(|s| &s.kind) {
                Some(SortKind::Constructed(cs)) => cs.contains(c),
                _ => false,
            };
            if !ok {
                return Err(LangError::SortMismatch {
                    pos: t.span.pos,
                    msg: format!("constructor `{c}` is not in sort `{sort}`"),
                });
            }
        }
        Ok(())
    }

    fn check_args(&self, sym: &str, args: &[Term], sorts: &[String]) -> Result<(), LangError> {
        for (i, (a, s)) in args.iter().zip(sorts).enumerate() {
            self.check_position(&format!("argument {} of `{sym}`", i + 1), a, s)?;
        }
        Ok(())
    }

    fn check_formula(&self, f: &Formula) -> Result<(), LangError> {
        match &f.kind {
            FormulaKind::Bool(_) => Ok(()),
            FormulaKind::Atom(p, args) => {
                let d = self.voc.predicate(p).expect("resolved predicate");
                self.check_args(p, args, &d.args)
            }
            FormulaKind::Cmp(op, a, b) => {
                let ka = self.kind_of(a)?;
                let kb = self.kind_of(b)?;
                if !fits(&ka, &kb) {
                    return Err(LangError::SortMismatch {
                        pos: f.span.pos,
                        msg: format!("cannot compare {} with {}", ka.describe(), kb.describe()),
                    });
                }
                if !matches!(op, CmpOp::Eq | CmpOp::Ne) && !(ka.is_intlike() && kb.is_intlike()) {
                    return Err(LangError::SortMismatch {
                        pos: f.span.pos,
                        msg: format!("`{}` needs integer operands", op.symbol()),
                    });
                }
                Ok(())
            }
            FormulaKind::Not(a) | FormulaKind::Forall(_, a) | FormulaKind::Exists(_, a) => self.check_formula(a),
            FormulaKind::And(a, b)
            | FormulaKind::Or(a, b)
            | FormulaKind::Implies(a, b)
            | FormulaKind::ImpliedBy(a, b)
            | FormulaKind::Equiv(a, b) => {
                self.check_formula(a)?;
                self.check_formula(b)
            }
        }
    }
}

fn sentence(voc: &Vocabulary, f: &SForm) -> Result<Formula, LangError> {
    let mut scope = Scope::new(voc, false);
    let mut out = scope.formula(f)?;
    while scope.derive_formula(&out) {}
    scope.finish_slots()?;
    scope.resolve_formula(&mut out);
    scope.check_formula(&out)?;
    Ok(out)
}

fn rule(voc: &Vocabulary, r: &SRule) -> Result<Rule, LangError> {
    let mut scope = Scope::new(voc, true);
    let explicit = scope.bind(&r.vars)?;
    let mut head = scope.head(&r.head)?;
    let mut body = match &r.body {
        Some(b) => scope.formula(b)?,
        None => Formula::new(FormulaKind::Bool(true), r.pos),
    };
    while scope.derive_head(&head) | scope.derive_formula(&body) {}
    scope.finish_slots()?;
    let ids: Vec<usize> = explicit
        .into_iter()
        .chain(scope.implicit.clone().unwrap_or_default())
        .collect();
    let vars = ids
        .iter()
        .map(|&id| Var {
            name: scope.slots[id].name.clone(),
            sort: scope.slots[id].sort.clone().expect("finished"),
        })
        .collect();
    match &mut head {
        Head::Pred(_, args) => args.iter_mut().for_each(|a| scope.resolve_term(a)),
        Head::Func(_, args, v) => {
            args.iter_mut().for_each(|a| scope.resolve_term(a));
            scope.resolve_term(v);
        }
    }
    scope.resolve_formula(&mut body);
    match &head {
        Head::Pred(p, args) => scope.check_args(p, args, &voc.predicate(p).expect("head").args)?,
        Head::Func(f, args, v) => {
            let d = voc.function(f).expect("head");
            scope.check_args(f, args, &d.args)?;
            scope.check_position(&format!("the value of `{f}`"), v, &d.out)?;
        }
    }
    scope.check_formula(&body)?;
    Ok(Rule {
        vars,
        head,
        body,
        span: r.pos.into(),
    })
}

fn theory(
    name: &str,
    voc: Arc<Vocabulary>,
    sentences: Vec<SForm>,
    definitions: Vec<Vec<SRule>>,
    pos: Pos,
) -> Result<Theory, LangError> {
    let mut t = Theory::empty(name, voc.clone());
    t.span = pos.into();
    for s in &sentences {
        t.sentences.push(sentence(&voc, s)?);
    }
    let mut defined_in: BTreeMap<String, usize> = BTreeMap::new();
    for (i, rules) in definitions.iter().enumerate() {
        let mut d = Definition::default();
        for r in rules {
            let checked = rule(&voc, r)?;
            let sym = checked.head.symbol().to_string();
            match defined_in.get(&sym) {
                Some(&j) if j != i => {
                    return Err(LangError::DuplicateName {
                        pos: r.pos,
                        name: sym,
                        msg: "symbol is defined in two different definitions".into(),
                    })
                }
                _ => {
                    defined_in.insert(sym, i);
                }
            }
            d.rules.push(checked);
        }
        t.definitions.push(d);
    }
    Ok(t)
}

fn value_for(voc: &Vocabulary, sort: &str, v: &SValue) -> Result<Value, LangError> {
    let mismatch = |what: &str| LangError::SortMismatch {
        pos: v.pos(),
        msg: format!("{what} is not a value of sort `{sort}`"),
    };
    let kind = voc.sort(sort).map(|s| s.kind.clone()).unwrap_or(SortKind::Abstract);
    match (v, kind) {
        (SValue::Int(n, _), SortKind::Int | SortKind::Abstract) => Ok(Value::Int(*n)),
        (SValue::Str(s, _), SortKind::Str | SortKind::Abstract) => Ok(Value::Str(s.clone())),
        (SValue::Ident(c, _), SortKind::Constructed(cs)) if cs.contains(c) => Ok(Value::Cons(c.clone())),
        (SValue::Int(n, _), _) => Err(mismatch(&format!("integer {n}"))),
        (SValue::Str(s, _), _) => Err(mismatch(&format!("string {s:?}"))),
        (SValue::Ident(c, _), _) => Err(mismatch(&format!("`{c}`"))),
    }
}

fn range(lo: i64, hi: i64, pos: Pos) -> Result<impl Iterator<Item = i64>, LangError> {
    if hi.saturating_sub(lo) >= MAX_RANGE {
        return Err(LangError::Invalid {
            pos,
            msg: format!("range {lo}..{hi} is too large"),
        });
    }
    Ok(lo..=hi)
}

fn tuple_values(voc: &Vocabulary, sorts: &[String], vals: &[SValue]) -> Result<Vec<Value>, LangError> {
    sorts.iter().zip(vals).map(|(s, v)| value_for(voc, s, v)).collect()
}

fn interp(voc: &Vocabulary, decl: &Decl, item: &SInterpItem) -> Result<Interp, LangError> {
    let pos = item.pos;
    let sym = &item.symbol;
    let arity = |expected: usize, found: usize, p: Pos| LangError::SortMismatch {
        pos: p,
        msg: format!("`{sym}` expects tuples of {expected} value(s), got {found}"),
    };
    match (decl, &item.value) {
        (_, SInterp::Procedure(p)) => Err(LangError::Unsupported {
            pos,
            msg: format!(
                "procedure-valued interpretation `{sym} = procedure {p}`; define `{sym}` in a theory with the built-in `concat` and `str` functions instead"
            ),
        }),
        (Decl::Sort(s), SInterp::Set(elems)) => {
            let mut values = Vec::new();
            for e in elems {
                match e {
                    SElem::Range(lo, hi, p) => {
                        if !matches!(s.kind, SortKind::Int | SortKind::Abstract) {
                            return Err(LangError::SortMismatch {
                                pos: *p,
                                msg: format!("integer range in non-integer sort `{sym}`"),
                            });
                        }
                        values.extend(range(*lo, *hi, *p)?.map(Value::Int));
                    }
                    SElem::Tuple(vals, None, p) if vals.len() == 1 => values.push(value_for(voc, sym, &vals[0]).map_err(|e| match e {
                        LangError::SortMismatch { msg, .. } => LangError::SortMismatch { pos: *p, msg },
                        other => other,
                    })?),
                    SElem::Tuple(vals, _, p) => return Err(arity(1, vals.len(), *p)),
                }
            }
            Ok(Interp::Sort(values))
        }
        (Decl::Predicate(p), SInterp::Scalar(SValue::Ident(b, _))) if p.args.is_empty() && (b == "true" || b == "false") => {
            let mut set = BTreeSet::new();
            if b == "true" {
                set.insert(Vec::new());
            }
            Ok(Interp::Relation(set))
        }
        (Decl::Predicate(p), SInterp::Set(elems)) => {
            let mut set = BTreeSet::new();
            for e in elems {
                match e {
                    SElem::Range(lo, hi, rp) if p.args.len() == 1 => {
                        for n in range(*lo, *hi, *rp)? {
                            set.insert(tuple_values(voc, &p.args, &[SValue::Int(n, *rp)])?);
                        }
                    }
                    SElem::Range(_, _, rp) => return Err(arity(p.args.len(), 1, *rp)),
                    SElem::Tuple(vals, None, tp) => {
                        if vals.len() != p.args.len() {
                            return Err(arity(p.args.len(), vals.len(), *tp));
                        }
                        set.insert(tuple_values(voc, &p.args, vals)?);
                    }
                    SElem::Tuple(_, Some(_), tp) => {
                        return Err(LangError::SortMismatch {
                            pos: *tp,
                            msg: format!("`->` used in the interpretation of predicate `{sym}`"),
                        })
                    }
                }
            }
            Ok(Interp::Relation(set))
        }
        (Decl::Function(f), SInterp::Scalar(v)) if f.args.is_empty() => {
            Ok(Interp::Function(BTreeMap::from([(Vec::new(), value_for(voc, &f.out, v)?)])))
        }
        (Decl::Function(f), SInterp::Set(elems)) => {
            let mut map = BTreeMap::new();
            for e in elems {
                let (args, image, tp) = match e {
                    SElem::Tuple(vals, Some(img), tp) => (&vals[..], img, *tp),
                    SElem::Tuple(vals, None, tp) if !vals.is_empty() => (&vals[..vals.len() - 1], vals.last().unwrap(), *tp),
                    SElem::Tuple(_, None, tp) | SElem::Range(_, _, tp) => return Err(arity(f.args.len() + 1, 0, *tp)),
                };
                if args.len() != f.args.len() {
                    return Err(arity(f.args.len() + 1, args.len() + 1, tp));
                }
                let key = tuple_values(voc, &f.args, args)?;
                let val = value_for(voc, &f.out, image)?;
                if let Some(old) = map.insert(key.clone(), val.clone()) {
                    if old != val {
                        return Err(LangError::Invalid {
                            pos: tp,
                            msg: format!("function `{sym}` maps the same arguments to {old} and {val}"),
                        });
                    }
                }
            }
            Ok(Interp::Function(map))
        }
        (Decl::Sort(_), _) => Err(LangError::Invalid {
            pos,
            msg: format!("sort `{sym}` must be interpreted by a set of values"),
        }),
        (Decl::Predicate(_), _) => Err(LangError::Invalid {
            pos,
            msg: format!("predicate `{sym}` must be interpreted by a set of tuples, or `true`/`false` if it has no arguments"),
        }),
        (Decl::Function(_), _) => Err(LangError::Invalid {
            pos,
            msg: format!("function `{sym}` has arguments, so it must be interpreted by a set of tuples"),
        }),
    }
}

fn structure(name: &str, voc: Arc<Vocabulary>, items: Vec<SInterpItem>, pos: Pos) -> Result<Structure, LangError> {
    let mut s = Structure::new(name, voc.clone());
    let mut positions: BTreeMap<String, Pos> = BTreeMap::new();
    for item in &items {
        if positions.contains_key(&item.symbol) {
            return Err(LangError::DuplicateName {
                pos: item.pos,
                name: item.symbol.clone(),
                msg: "interpreted twice in this structure".into(),
            });
        }
        let Some(decl) = voc.get(&item.symbol) else {
            return Err(LangError::UnknownSymbol {
                pos: item.pos,
                name: item.symbol.clone(),
                context: format!(" (not in vocabulary `{}`)", voc.name),
            });
        };
        s.set(item.symbol.clone(), interp(&voc, decl, item)?);
        positions.insert(item.symbol.clone(), item.pos);
    }
    s.validate().map_err(|e| {
        let symbol = match &e {
            ModelError::OutOfDomain { symbol, .. }
            | ModelError::ArityMismatch { symbol, .. }
            | ModelError::BadInterpretation { symbol, .. }
            | ModelError::ConflictingInterpretation { symbol }
            | ModelError::SignatureClash { symbol }
            | ModelError::MissingSymbol { symbol, .. } => symbol.clone(),
        };
        LangError::SortMismatch {
            pos: positions.get(&symbol).copied().unwrap_or(pos),
            msg: e.to_string(),
        }
    })?;
    Ok(s)
}
