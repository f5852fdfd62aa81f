//! Direct evaluation of a theory on a two-valued structure.
//!
//! This does not share code with grounding or search, so it can serve as
//! an oracle for them.

use std::collections::{BTreeMap, BTreeSet};

use super::SolveError;
use crate::lang::{Definition, Formula, FormulaKind, Head, Term, TermKind, Theory};
use crate::model::{Interp, SortKind, Structure, Value};

/// True iff `m` satisfies every sentence of `t` and interprets each
/// defined symbol as its definition's well-founded value.
pub fn satisfies(t: &Theory, m: &Structure) -> Result<bool, SolveError> {
    for sym in t.mentioned_symbols() {
        if !m.is_specified(&sym) {
            return Err(SolveError::NotTwoValued { symbol: sym });
        }
    }
    let ev = Evaluator {
        t,
        m,
        defined: BTreeSet::new(),
        iterate: BTreeMap::new(),
    };
    for f in &t.sentences {
        if !ev.formula(f, &mut Vec::new(), true)? {
            return Ok(false);
        }
    }
    for d in &t.definitions {
        if !definition_holds(t, m, d)? {
            return Ok(false);
        }
    }
    Ok(true)
}

type Env = Vec<(String, Value)>;

struct Evaluator<'a> {
    t: &'a Theory,
    m: &'a Structure,
    /// Defined predicates whose positive occurrences read `iterate`.
    defined: BTreeSet<String>,
    iterate: BTreeMap<String, BTreeSet<Vec<Value>>>,
}

impl Evaluator<'_> {
    fn domain(&self, sort: &str) -> Result<Vec<Value>, SolveError> {
        if let Some(v) = self.m.sort_values(sort) {
            return Ok(v.to_vec());
        }
        match self.t.vocabulary.sort(sort).map(|s| &s.kind) {
            Some(SortKind::Constructed(cs)) => Ok(cs.iter().map(|c| Value::Cons(c.clone())).collect()),
            _ => Err(SolveError::NotTwoValued {
                symbol: sort.to_string(),
            }),
        }
    }

    /// `None` when the term is undefined.
    fn term(&self, t: &Term, env: &Env) -> Result<Option<Value>, SolveError> {
        Ok(match &t.kind {
            TermKind::Var(v) => env.iter().rev().find(|(n, _)| *n == v.name).map(|(_, x)| x.clone()),
            TermKind::Const(v) => Some(v.clone()),
            TermKind::App(f, args) => {
                let Some(vals) = self.terms(args, env)? else {
                    return Ok(None);
                };
                self.m.apply(f, &vals).cloned()
            }
            TermKind::Arith(op, a, b) => match (self.term(a, env)?, self.term(b, env)?) {
                (Some(Value::Int(x)), Some(Value::Int(y))) => {
                    Some(Value::Int(op.apply(x, y).ok_or_else(|| SolveError::Overflow {
                        expr: format!("{x} {} {y}", op.symbol()),
                    })?))
                }
                _ => None,
            },
            TermKind::Neg(a) => match self.term(a, env)? {
                Some(Value::Int(x)) => Some(Value::Int(x.checked_neg().ok_or_else(|| SolveError::Overflow {
                    expr: format!("-({x})"),
                })?)),
                _ => None,
            },
            TermKind::Builtin(b, args) => match self.terms(args, env)? {
                Some(vals) => b.apply(&vals),
                None => None,
            },
        })
    }

    fn terms(&self, ts: &[Term], env: &Env) -> Result<Option<Vec<Value>>, SolveError> {
        let mut out = Vec::with_capacity(ts.len());
        for t in ts {
            match self.term(t, env)? {
                Some(v) => out.push(v),
                None => return Ok(None),
            }
        }
        Ok(Some(out))
    }

    fn formula(&self, f: &Formula, env: &mut Env, positive: bool) -> Result<bool, SolveError> {
        Ok(match &f.kind {
            FormulaKind::Bool(b) => *b,
            FormulaKind::Atom(p, args) => {
                let Some(vals) = self.terms(args, env)? else {
                    return Ok(false);
                };
                if positive && self.defined.contains(p) {
                    self.iterate.get(p).is_some_and(|s| s.contains(&vals))
                } else {
                    self.m.holds(p, &vals).unwrap_or(false)
                }
            }
            FormulaKind::Cmp(op, a, b) => match (self.term(a, env)?, self.term(b, env)?) {
                (Some(x), Some(y)) => op.holds(&x, &y),
                _ => false,
            },
            FormulaKind::Not(a) => !self.formula(a, env, !positive)?,
            FormulaKind::And(a, b) => self.formula(a, env, positive)? && self.formula(b, env, positive)?,
            FormulaKind::Or(a, b) => self.formula(a, env, positive)? || self.formula(b, env, positive)?,
            FormulaKind::Implies(a, b) => !self.formula(a, env, !positive)? || self.formula(b, env, positive)?,
            FormulaKind::ImpliedBy(a, b) => self.formula(a, env, positive)? || !self.formula(b, env, !positive)?,
            FormulaKind::Equiv(a, b) => {
                // Both polarities: read the structure itself.
                let plain = Evaluator {
                    t: self.t,
                    m: self.m,
                    defined: BTreeSet::new(),
                    iterate: BTreeMap::new(),
                };
                plain.formula(a, env, true)? == plain.formula(b, env, true)?
            }
            FormulaKind::Forall(vs, body) => self.quantified(vs, body, env, positive, true)?,
            FormulaKind::Exists(vs, body) => self.quantified(vs, body, env, positive, false)?,
        })
    }

    fn quantified(
        &self,
        vs: &[crate::lang::Var],
        body: &Formula,
        env: &mut Env,
        positive: bool,
        forall: bool,
    ) -> Result<bool, SolveError> {
        let Some((v, rest)) = vs.split_first() else {
            return self.formula(body, env, positive);
        };
        for x in self.domain(&v.sort)? {
            env.push((v.name.clone(), x));
            let r = self.quantified(rest, body, env, positive, forall);
            env.pop();
            if r? != forall {
                return Ok(!forall);
            }
        }
        Ok(forall)
    }

    /// Calls `f` for every instance of a rule whose body is true.
    fn instances(
        &self,
        vars: &[crate::lang::Var],
        body: &Formula,
        env: &mut Env,
        f: &mut dyn FnMut(&Env) -> Result<(), SolveError>,
    ) -> Result<(), SolveError> {
        let Some((v, rest)) = vars.split_first() else {
            if self.formula(body, env, true)? {
                f(env)?;
            }
            return Ok(());
        };
        for x in self.domain(&v.sort)? {
            env.push((v.name.clone(), x));
            let r = self.instances(rest, body, env, f);
            env.pop();
            r?;
        }
        Ok(())
    }
}

fn definition_holds(t: &Theory, m: &Structure, d: &Definition) -> Result<bool, SolveError> {
    let preds: BTreeSet<String> = d
        .defined()
        .into_iter()
        .filter(|s| t.vocabulary.predicate(s).is_some())
        .collect();
    let mut ev = Evaluator {
        t,
        m,
        defined: preds.clone(),
        iterate: preds.iter().map(|p| (p.clone(), BTreeSet::new())).collect(),
    };

    // Least fixpoint of the predicate rules.
    loop {
        let mut next = ev.iterate.clone();
        for r in &d.rules {
            let Head::Pred(p, args) = &r.head else { continue };
            ev.instances(&r.vars, &r.body, &mut Vec::new(), &mut |env| {
                if let Some(vals) = ev.terms(args, env)? {
                    next.get_mut(p).unwrap().insert(vals);
                }
                Ok(())
            })?;
        }
        if next == ev.iterate {
            break;
        }
        ev.iterate = next;
    }
    for p in &preds {
        let actual: BTreeSet<Vec<Value>> = match m.get(p) {
            Some(Interp::Relation(r)) => r.clone(),
            _ => return Ok(false),
        };
        if actual != ev.iterate[p] {
            return Ok(false);
        }
    }

    // Function rules, read against the structure itself.
    let plain = Evaluator {
        t,
        m,
        defined: BTreeSet::new(),
        iterate: BTreeMap::new(),
    };
    let mut derived: BTreeMap<String, BTreeMap<Vec<Value>, BTreeSet<Value>>> = BTreeMap::new();
    for f in d.defined() {
        if t.vocabulary.function(&f).is_some() {
            derived.insert(f, BTreeMap::new());
        }
    }
    for r in &d.rules {
        let Head::Func(f, args, value) = &r.head else { continue };
        plain.instances(&r.vars, &r.body, &mut Vec::new(), &mut |env| {
            if let (Some(a), Some(v)) = (plain.terms(args, env)?, plain.term(value, env)?) {
                derived.get_mut(f).unwrap().entry(a).or_default().insert(v);
            }
            Ok(())
        })?;
    }
    for (f, graph) in &derived {
        let decl = t.vocabulary.function(f).expect("function");
        let Some(Interp::Function(actual)) = m.get(f) else {
            return Ok(false);
        };
        if graph.values().any(|vs| vs.len() > 1) {
            return Ok(false);
        }
        let expected: BTreeMap<Vec<Value>, Value> = graph
            .iter()
            .map(|(a, vs)| (a.clone(), vs.iter().next().unwrap().clone()))
            .collect();
        if *actual != expected {
            return Ok(false);
        }
        if !decl.partial {
            let space = m
                .arg_space(&decl.args)
                .ok_or_else(|| SolveError::NotTwoValued { symbol: f.clone() })?;
            if space.iter().any(|a| !expected.contains_key(a)) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
