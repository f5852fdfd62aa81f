//! Domains of the sorts a structure leaves uninterpreted.
//!
//! Such sorts get the values the structure uses at positions of that sort,
//! plus every value the theory can produce there: literals, and the images
//! of arithmetic and built-in terms over the other domains.

use std::collections::{BTreeMap, BTreeSet};

use indexmap::IndexMap;

use super::SolveError;
use crate::lang::{Formula, FormulaKind, Head, Term, TermKind, Theory};
use crate::model::{Decl, Interp, SortKind, Structure, Value, Vocabulary};

const MAX_INFERRED: usize = 100_000;

/// Values of every sort of the structure's vocabulary.
pub(super) fn infer(t: &Theory, s: &Structure) -> Result<IndexMap<String, Vec<Value>>, SolveError> {
    let voc = &s.vocabulary;
    let mut dom: BTreeMap<String, BTreeSet<Value>> = BTreeMap::new();
    let mut open: BTreeSet<String> = BTreeSet::new();
    for sort in voc.sorts() {
        if let Some(vs) = s.sort_values(&sort.name) {
            dom.insert(sort.name.clone(), vs.iter().cloned().collect());
        } else if let SortKind::Constructed(cs) = &sort.kind {
            dom.insert(sort.name.clone(), cs.iter().map(|c| Value::Cons(c.clone())).collect());
        } else {
            open.insert(sort.name.clone());
            dom.insert(sort.name.clone(), BTreeSet::new());
        }
    }

    for (sym, interp) in s.interps() {
        let Some(decl) = voc.get(sym) else { continue };
        let (args, out) = match decl {
            Decl::Sort(_) => continue,
            Decl::Predicate(p) => (&p.args, None),
            Decl::Function(f) => (&f.args, Some(&f.out)),
        };
        let mut add = |sort: &String, v: &Value| {
            if open.contains(sort) {
                dom.get_mut(sort).unwrap().insert(v.clone());
            }
        };
        match interp {
            Interp::Relation(set) => {
                for tuple in set {
                    args.iter().zip(tuple).for_each(|(a, v)| add(a, v));
                }
            }
            Interp::Function(map) => {
                for (tuple, v) in map {
                    args.iter().zip(tuple).for_each(|(a, x)| add(a, x));
                    add(out.unwrap(), v);
                }
            }
            Interp::Sort(_) => {}
        }
    }

    let mut obs: Vec<(String, &Term)> = Vec::new();
    let mut collector = Collector { voc, obs: &mut obs };
    for f in &t.sentences {
        collector.formula(f);
    }
    for d in &t.definitions {
        for r in &d.rules {
            collector.head(&r.head);
            collector.formula(&r.body);
        }
    }
    obs.retain(|(sort, _)| open.contains(sort));

    loop {
        let mut changed = false;
        for (sort, term) in &obs {
            let Some(values) = value_set(voc, &dom, term) else {
                return Err(SolveError::UnboundedSort { sort: sort.clone() });
            };
            let kind = &voc.sort(sort).expect("declared sort").kind;
            let target = dom.get_mut(sort).unwrap();
            for v in values {
                let fits = matches!(
                    (kind, &v),
                    (SortKind::Int, Value::Int(_)) | (SortKind::Str, Value::Str(_)) | (SortKind::Abstract, _)
                );
                if fits && target.insert(v) {
                    changed = true;
                }
            }
            if target.len() > MAX_INFERRED {
                return Err(SolveError::UnboundedSort { sort: sort.clone() });
            }
        }
        if !changed {
            break;
        }
    }

    let used = used_sorts(t);
    for sort in &open {
        if dom[sort].is_empty() && used.contains(sort) {
            return Err(SolveError::EmptySortDomain { sort: sort.clone() });
        }
    }

    Ok(voc
        .sorts()
        .map(|sd| {
            let values = dom.remove(&sd.name).unwrap_or_default();
            let values = match &sd.kind {
                SortKind::Constructed(cs) => cs
                    .iter()
                    .map(|c| Value::Cons(c.clone()))
                    .filter(|v| values.contains(v))
                    .collect(),
                _ => values.into_iter().collect(),
            };
            (sd.name.clone(), values)
        })
        .collect())
}

/// Sorts of variables and of the symbols a theory mentions.
fn used_sorts(t: &Theory) -> BTreeSet<String> {
    let voc = &t.vocabulary;
    let mut used = BTreeSet::new();
    for sym in t.mentioned_symbols() {
        if let Some(d) = voc.get(&sym) {
            used.extend(d.arg_sorts().iter().cloned());
            if let Decl::Function(f) = d {
                used.insert(f.out.clone());
            }
        }
    }
    let mut vars = |f: &Formula| {
        walk_vars(f, &mut |s| {
            used.insert(s.to_string());
        })
    };
    for f in &t.sentences {
        vars(f);
    }
    for d in &t.definitions {
        for r in &d.rules {
            for v in &r.vars {
                used.insert(v.sort.clone());
            }
            walk_vars(&r.body, &mut |s| {
                used.insert(s.to_string());
            });
        }
    }
    used
}

fn walk_vars(f: &Formula, add: &mut dyn FnMut(&str)) {
    match &f.kind {
        FormulaKind::Forall(vs, b) | FormulaKind::Exists(vs, b) => {
            vs.iter().for_each(|v| add(&v.sort));
            walk_vars(b, add);
        }
        FormulaKind::Not(a) => walk_vars(a, add),
        FormulaKind::And(a, b)
        | FormulaKind::Or(a, b)
        | FormulaKind::Implies(a, b)
        | FormulaKind::ImpliedBy(a, b)
        | FormulaKind::Equiv(a, b) => {
            walk_vars(a, add);
            walk_vars(b, add);
        }
        _ => {}
    }
}

/// The sort a term's value belongs to, when it has one.
pub(super) fn term_sort(voc: &Vocabulary, t: &Term) -> Option<String> {
    match &t.kind {
        TermKind::Var(v) => Some(v.sort.clone()),
        TermKind::App(f, _) => voc.function(f).map(|d| d.out.clone()),
        TermKind::Const(Value::Cons(c)) => voc.constructor_sort(c).map(|s| s.name.clone()),
        _ => None,
    }
}

struct Collector<'a, 'b> {
    voc: &'a Vocabulary,
    obs: &'b mut Vec<(String, &'a Term)>,
}

impl<'a> Collector<'a, '_> {
    fn args(&mut self, sorts: &[String], args: &'a [Term]) {
        for (s, a) in sorts.iter().zip(args) {
            self.obs.push((s.clone(), a));
            self.term(a);
        }
    }

    fn term(&mut self, t: &'a Term) {
        match &t.kind {
            TermKind::App(f, args) => {
                let sorts = self.voc.function(f).map(|d| d.args.clone()).unwrap_or_default();
                self.args(&sorts, args);
            }
            TermKind::Arith(_, a, b) => {
                self.term(a);
                self.term(b);
            }
            TermKind::Neg(a) => self.term(a),
            TermKind::Builtin(_, args) => args.iter().for_each(|a| self.term(a)),
            TermKind::Var(_) | TermKind::Const(_) => {}
        }
    }

    fn formula(&mut self, f: &'a Formula) {
        match &f.kind {
            FormulaKind::Bool(_) => {}
            FormulaKind::Atom(p, args) => {
                let sorts = self.voc.predicate(p).map(|d| d.args.clone()).unwrap_or_default();
                self.args(&sorts, args);
            }
            FormulaKind::Cmp(_, a, b) => {
                if let Some(s) = term_sort(self.voc, a) {
                    self.obs.push((s, b));
                }
                if let Some(s) = term_sort(self.voc, b) {
                    self.obs.push((s, a));
                }
                self.term(a);
                self.term(b);
            }
            FormulaKind::Not(a) | FormulaKind::Forall(_, a) | FormulaKind::Exists(_, a) => self.formula(a),
            FormulaKind::And(a, b)
            | FormulaKind::Or(a, b)
            | FormulaKind::Implies(a, b)
            | FormulaKind::ImpliedBy(a, b)
            | FormulaKind::Equiv(a, b) => {
                self.formula(a);
                self.formula(b);
            }
        }
    }

    fn head(&mut self, h: &'a Head) {
        match h {
            Head::Pred(p, args) => {
                let sorts = self.voc.predicate(p).map(|d| d.args.clone()).unwrap_or_default();
                self.args(&sorts, args);
            }
            Head::Func(f, args, v) => {
                let d = self.voc.function(f).cloned();
                if let Some(d) = d {
                    self.args(&d.args, args);
                    self.obs.push((d.out.clone(), v));
                }
                self.term(v);
            }
        }
    }
}

/// Over-approximates the values a term can take; `None` past the cap.
fn value_set(voc: &Vocabulary, dom: &BTreeMap<String, BTreeSet<Value>>, t: &Term) -> Option<BTreeSet<Value>> {
    let out = match &t.kind {
        TermKind::Const(v) => BTreeSet::from([v.clone()]),
        TermKind::Var(v) => dom.get(&v.sort).cloned().unwrap_or_default(),
        TermKind::App(f, _) => voc
            .function(f)
            .and_then(|d| dom.get(&d.out))
            .cloned()
            .unwrap_or_default(),
        TermKind::Neg(a) => value_set(voc, dom, a)?
            .into_iter()
            .filter_map(|v| v.as_int().and_then(i64::checked_neg).map(Value::Int))
            .collect(),
        TermKind::Arith(op, a, b) => {
            let a = value_set(voc, dom, a)?;
            let b = value_set(voc, dom, b)?;
            if a.len().saturating_mul(b.len()) > MAX_INFERRED * 10 {
                return None;
            }
            let mut out = BTreeSet::new();
            for x in a.iter().filter_map(Value::as_int) {
                for y in b.iter().filter_map(Value::as_int) {
                    if let Some(z) = op.apply(x, y) {
                        out.insert(Value::Int(z));
                    }
                }
            }
            out
        }
        TermKind::Builtin(bi, args) => {
            let mut combos: Vec<Vec<Value>> = vec![Vec::new()];
            for a in args {
                let vs = value_set(voc, dom, a)?;
                if combos.len().saturating_mul(vs.len()) > MAX_INFERRED * 10 {
                    return None;
                }
                combos = combos
                    .iter()
                    .flat_map(|c| {
                        vs.iter().map(move |v| {
                            let mut c = c.clone();
                            c.push(v.clone());
                            c
                        })
                    })
                    .collect();
            }
            combos.iter().filter_map(|c| bi.apply(c)).collect()
        }
    };
    (out.len() <= MAX_INFERRED).then_some(out)
}
