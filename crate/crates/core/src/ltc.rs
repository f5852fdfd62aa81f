//! Linear-time theories: single-state vocabularies, splitting into an
//! initial and a transition theory, and the initialise/progress inferences.
//!
//! A step is computed by model expansion of a two-state theory: current
//! state symbols keep their single-state names and next-state symbols are
//! renamed `name@next`.

use std::collections::BTreeSet;
use std::sync::Arc;

use thiserror::Error;

use crate::lang::{Formula, FormulaKind, Head, Pos, Rule, Term, TermKind, Theory, Var};
use crate::model::{canonical_cmp, Decl, Interp, ModelError, Structure, Value, Vocabulary};
use crate::solver::{self, SolveError, SolveOptions};

/// Suffix of next-state copies in the step theory.
pub const NEXT_SUFFIX: &str = "@next";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LtcError {
    #[error("symbol `{symbol}` has more than one argument of the time sort `{time}`")]
    MultipleTimeArguments { symbol: String, time: String },
    #[error("symbol `{symbol}` takes values in the time sort `{time}`")]
    TimeValued { symbol: String, time: String },
    #[error("vocabulary `{vocabulary}` has no time sort with `Start : T` and `Next(T) : T`")]
    NoTimeSort { vocabulary: String },
    #[error("{pos}: rule for `{symbol}` is not a linear-time rule: {reason}")]
    NonLtcRule { pos: Pos, symbol: String, reason: String },
    #[error("{pos}: sentence refers to more than one time point")]
    NonLtcSentence { pos: Pos },
    #[error("state symbol `{symbol}` has no rule at `Start`")]
    MissingInitialDefinition { symbol: String },
    #[error("state symbol `{symbol}` has no rule at `Next(t)`")]
    MissingTransitionDefinition { symbol: String },
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// The time sort and its `Start` and `Next` symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TimeSignature {
    pub time: String,
    pub start: String,
    pub next: String,
}

/// Finds `Start : T` and `Next(T) : T` in a vocabulary.
pub fn time_signature(v: &Vocabulary) -> Option<TimeSignature> {
    let start = v.function("Start").filter(|f| f.args.is_empty())?;
    let next = v.function("Next")?;
    if next.args != [start.out.clone()] || next.out != start.out {
        return None;
    }
    Some(TimeSignature {
        time: start.out.clone(),
        start: start.name.clone(),
        next: next.name.clone(),
    })
}

/// The vocabulary `<name>_ss` with the time argument removed from every
/// symbol and the time sort, `Start` and `Next` dropped.
pub fn single_state_vocabulary(v: &Vocabulary) -> Result<Vocabulary, LtcError> {
    let name = format!("{}_ss", v.name);
    match time_signature(v) {
        Some(sig) => project_time(v, &sig, name),
        None => Ok(Vocabulary::from_decls(name, v.decls().cloned()).expect("consistent")),
    }
}

/// Removes the time argument of every symbol of `v`.
pub fn project_time(v: &Vocabulary, sig: &TimeSignature, name: impl Into<String>) -> Result<Vocabulary, LtcError> {
    let mut out = Vec::new();
    for d in v.decls() {
        let n = d.name();
        if n == sig.time || n == sig.start || n == sig.next {
            continue;
        }
        let timed = d.arg_sorts().iter().filter(|s| **s == sig.time).count();
        if timed > 1 {
            return Err(LtcError::MultipleTimeArguments {
                symbol: n.to_string(),
                time: sig.time.clone(),
            });
        }
        let strip = |args: &[String]| args.iter().filter(|s| **s != sig.time).cloned().collect::<Vec<_>>();
        out.push(match d {
            Decl::Sort(_) => d.clone(),
            Decl::Predicate(p) => {
                let mut p = p.clone();
                p.args = strip(&p.args);
                Decl::Predicate(p)
            }
            Decl::Function(f) => {
                if f.out == sig.time {
                    return Err(LtcError::TimeValued {
                        symbol: n.to_string(),
                        time: sig.time.clone(),
                    });
                }
                let mut f = f.clone();
                f.args = strip(&f.args);
                Decl::Function(f)
            }
        });
    }
    Ok(Vocabulary::from_decls(name, out).expect("projection of a consistent vocabulary"))
}

/// A theory split into its initial and transition parts.
#[derive(Clone, Debug, PartialEq)]
pub struct LtcTheory {
    pub base: Theory,
    pub time: TimeSignature,
    /// The base vocabulary with time projected away.
    pub single_state: Arc<Vocabulary>,
    /// Timed symbols defined by the rules, in vocabulary order.
    pub state_symbols: Vec<String>,
    /// Timed symbols no rule defines.
    pub action_symbols: Vec<String>,
    pub initial_rules: Vec<Rule>,
    pub transition_rules: Vec<Rule>,
    /// Indices into `transition_rules` of rules that carry a state symbol forward.
    pub frame_rules: Vec<usize>,
    /// Rules that define time-free symbols.
    pub static_rules: Vec<Rule>,
    init: Theory,
    step: Theory,
    state_vocabulary: Arc<Vocabulary>,
}

/// One simulation state: a structure over the single-state vocabulary.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub structure: Structure,
    pub step_index: usize,
}

/// A successor together with the actions that lead to it.
#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub actions: Structure,
    pub next: Snapshot,
}

#[derive(Clone, Copy)]
enum At<'a> {
    /// No time term may occur.
    Timeless,
    Start,
    Var(&'a str),
}

struct Rewriter<'a> {
    voc: &'a Vocabulary,
    sig: &'a TimeSignature,
    pos: Pos,
    symbol: String,
}

impl Rewriter<'_> {
    fn fail(&self, reason: impl Into<String>) -> LtcError {
        LtcError::NonLtcRule {
            pos: self.pos,
            symbol: self.symbol.clone(),
            reason: reason.into(),
        }
    }

    fn time_index(&self, sym: &str) -> Option<usize> {
        self.voc.get(sym)?.arg_sorts().iter().position(|s| *s == self.sig.time)
    }

    fn is_time_term(&self, t: &Term, at: At<'_>) -> bool {
        match (&t.kind, at) {
            (TermKind::Var(v), At::Var(n)) => v.name == n,
            (TermKind::App(f, args), At::Start) => *f == self.sig.start && args.is_empty(),
            _ => false,
        }
    }

    /// Drops the time argument of a timed symbol application.
    fn strip(&self, sym: &str, args: &[Term], at: At<'_>) -> Result<Vec<Term>, LtcError> {
        let mut out = Vec::with_capacity(args.len());
        let idx = self.time_index(sym);
        for (i, a) in args.iter().enumerate() {
            if Some(i) == idx {
                if !self.is_time_term(a, at) {
                    let want = match at {
                        At::Timeless => "a time-free expression".to_string(),
                        At::Start => format!("`{}`", self.sig.start),
                        At::Var(v) => format!("the time variable `{v}`"),
                    };
                    return Err(self.fail(format!("`{sym}` must be applied at {want}")));
                }
            } else {
                out.push(self.term(a, at)?);
            }
        }
        Ok(out)
    }

    fn term(&self, t: &Term, at: At<'_>) -> Result<Term, LtcError> {
        let kind = match &t.kind {
            TermKind::Var(v) if v.sort == self.sig.time => return Err(self.fail("time used outside a time argument")),
            TermKind::Var(_) | TermKind::Const(_) => t.kind.clone(),
            TermKind::App(f, _) if *f == self.sig.start || *f == self.sig.next => {
                return Err(self.fail("time used outside a time argument"))
            }
            TermKind::App(f, args) => TermKind::App(f.clone(), self.strip(f, args, at)?),
            TermKind::Arith(op, a, b) => TermKind::Arith(*op, Box::new(self.term(a, at)?), Box::new(self.term(b, at)?)),
            TermKind::Neg(a) => TermKind::Neg(Box::new(self.term(a, at)?)),
            TermKind::Builtin(b, args) => {
                TermKind::Builtin(*b, args.iter().map(|a| self.term(a, at)).collect::<Result<_, _>>()?)
            }
        };
        Ok(Term::new(kind, t.span))
    }

    fn formula(&self, f: &Formula, at: At<'_>) -> Result<Formula, LtcError> {
        let bin = |a: &Formula, b: &Formula| -> Result<(Box<Formula>, Box<Formula>), LtcError> {
            Ok((Box::new(self.formula(a, at)?), Box::new(self.formula(b, at)?)))
        };
        let kind = match &f.kind {
            FormulaKind::Bool(b) => FormulaKind::Bool(*b),
            FormulaKind::Atom(p, args) => FormulaKind::Atom(p.clone(), self.strip(p, args, at)?),
            FormulaKind::Cmp(op, a, b) => FormulaKind::Cmp(*op, self.term(a, at)?, self.term(b, at)?),
            FormulaKind::Not(a) => FormulaKind::Not(Box::new(self.formula(a, at)?)),
            FormulaKind::And(a, b) => {
                let (a, b) = bin(a, b)?;
                FormulaKind::And(a, b)
            }
            FormulaKind::Or(a, b) => {
                let (a, b) = bin(a, b)?;
                FormulaKind::Or(a, b)
            }
            FormulaKind::Implies(a, b) => {
                let (a, b) = bin(a, b)?;
                FormulaKind::Implies(a, b)
            }
            FormulaKind::ImpliedBy(a, b) => {
                let (a, b) = bin(a, b)?;
                FormulaKind::ImpliedBy(a, b)
            }
            FormulaKind::Equiv(a, b) => {
                let (a, b) = bin(a, b)?;
                FormulaKind::Equiv(a, b)
            }
            FormulaKind::Forall(vs, body) | FormulaKind::Exists(vs, body) => {
                if vs.iter().any(|v| v.sort == self.sig.time) {
                    return Err(self.fail("quantification over time inside a rule or sentence"));
                }
                let body = Box::new(self.formula(body, at)?);
                match &f.kind {
                    FormulaKind::Forall(..) => FormulaKind::Forall(vs.clone(), body),
                    _ => FormulaKind::Exists(vs.clone(), body),
                }
            }
        };
        Ok(Formula::new(kind, f.span))
    }
}

/// Renames the given symbols everywhere in a formula.
fn rename_formula(f: &Formula, names: &BTreeSet<String>) -> Formula {
    let kind = match &f.kind {
        FormulaKind::Bool(b) => FormulaKind::Bool(*b),
        FormulaKind::Atom(p, args) => FormulaKind::Atom(
            next_name(p, names),
            args.iter().map(|a| rename_term(a, names)).collect(),
        ),
        FormulaKind::Cmp(op, a, b) => FormulaKind::Cmp(*op, rename_term(a, names), rename_term(b, names)),
        FormulaKind::Not(a) => FormulaKind::Not(Box::new(rename_formula(a, names))),
        FormulaKind::And(a, b) => {
            FormulaKind::And(Box::new(rename_formula(a, names)), Box::new(rename_formula(b, names)))
        }
        FormulaKind::Or(a, b) => {
            FormulaKind::Or(Box::new(rename_formula(a, names)), Box::new(rename_formula(b, names)))
        }
        FormulaKind::Implies(a, b) => {
            FormulaKind::Implies(Box::new(rename_formula(a, names)), Box::new(rename_formula(b, names)))
        }
        FormulaKind::ImpliedBy(a, b) => {
            FormulaKind::ImpliedBy(Box::new(rename_formula(a, names)), Box::new(rename_formula(b, names)))
        }
        FormulaKind::Equiv(a, b) => {
            FormulaKind::Equiv(Box::new(rename_formula(a, names)), Box::new(rename_formula(b, names)))
        }
        FormulaKind::Forall(vs, b) => FormulaKind::Forall(vs.clone(), Box::new(rename_formula(b, names))),
        FormulaKind::Exists(vs, b) => FormulaKind::Exists(vs.clone(), Box::new(rename_formula(b, names))),
    };
    Formula::new(kind, f.span)
}

fn rename_term(t: &Term, names: &BTreeSet<String>) -> Term {
    let kind = match &t.kind {
        TermKind::App(f, args) => TermKind::App(
            next_name(f, names),
            args.iter().map(|a| rename_term(a, names)).collect(),
        ),
        TermKind::Arith(op, a, b) => {
            TermKind::Arith(*op, Box::new(rename_term(a, names)), Box::new(rename_term(b, names)))
        }
        TermKind::Neg(a) => TermKind::Neg(Box::new(rename_term(a, names))),
        TermKind::Builtin(b, args) => TermKind::Builtin(*b, args.iter().map(|a| rename_term(a, names)).collect()),
        other => other.clone(),
    };
    Term::new(kind, t.span)
}

fn next_name(name: &str, names: &BTreeSet<String>) -> String {
    if names.contains(name) {
        format!("{name}{NEXT_SUFFIX}")
    } else {
        name.to_string()
    }
}

fn mentions_any(f: &Formula, names: &[String]) -> bool {
    let mut hit = false;
    f.for_each_symbol(&mut |s| hit |= names.iter().any(|n| n == s));
    hit
}

/// Splits the rules of an LTC theory into initial, transition and static
/// rules and builds the theories used by [`initialise`] and [`progress`].
pub fn split_ltc(t: &Theory) -> Result<LtcTheory, LtcError> {
    let voc = &t.vocabulary;
    let sig = time_signature(voc).ok_or_else(|| LtcError::NoTimeSort {
        vocabulary: voc.name.clone(),
    })?;
    let single_state = Arc::new(single_state_vocabulary(voc)?);
    let timed = |s: &str| voc.get(s).is_some_and(|d| d.arg_sorts().contains(&sig.time));

    let mut initial_rules = Vec::new();
    let mut transition_rules = Vec::new();
    let mut static_rules = Vec::new();
    let mut frame_rules = Vec::new();
    let mut init_rules = Vec::new();
    let mut step_rules = Vec::new();
    let mut defined: BTreeSet<String> = BTreeSet::new();

    for d in &t.definitions {
        for r in &d.rules {
            let sym = r.head.symbol().to_string();
            let rw = Rewriter {
                voc,
                sig: &sig,
                pos: r.span.pos,
                symbol: sym.clone(),
            };
            if !timed(&sym) {
                if r.vars.iter().any(|v| v.sort == sig.time) {
                    return Err(rw.fail("time variable in a rule for a time-free symbol"));
                }
                let head = rewrite_head(&rw, &r.head, At::Timeless, None)?;
                let body = rw.formula(&r.body, At::Timeless)?;
                let rule = Rule {
                    vars: r.vars.clone(),
                    head,
                    body,
                    span: r.span,
                };
                init_rules.push(rule.clone());
                step_rules.push(rule);
                static_rules.push(r.clone());
                continue;
            }
            defined.insert(sym.clone());
            let idx = rw.time_index(&sym).unwrap();
            let time_arg = &r.head.args()[idx];
            let time_vars: Vec<&Var> = r.vars.iter().filter(|v| v.sort == sig.time).collect();
            match &time_arg.kind {
                TermKind::App(f, a) if *f == sig.start && a.is_empty() => {
                    if !time_vars.is_empty() {
                        return Err(rw.fail("time variable in an initial rule"));
                    }
                    let head = rewrite_head(&rw, &r.head, At::Start, None)?;
                    let body = rw.formula(&r.body, At::Start)?;
                    init_rules.push(Rule {
                        vars: r.vars.clone(),
                        head,
                        body,
                        span: r.span,
                    });
                    initial_rules.push(r.clone());
                }
                TermKind::App(f, a) if *f == sig.next && a.len() == 1 => {
                    let TermKind::Var(tv) = &a[0].kind else {
                        return Err(rw.fail(format!("the head time must be `{}` or `{}(t)`", sig.start, sig.next)));
                    };
                    if time_vars.len() != 1 || time_vars[0].name != tv.name {
                        return Err(rw.fail("a transition rule needs exactly one time variable"));
                    }
                    let at = At::Var(&tv.name);
                    let head = rewrite_head(&rw, &r.head, at, Some(NEXT_SUFFIX))?;
                    let body = rw.formula(&r.body, at)?;
                    let vars = r.vars.iter().filter(|v| v.sort != sig.time).cloned().collect();
                    if is_frame_rule(r, &sym, &tv.name) {
                        frame_rules.push(transition_rules.len());
                    }
                    step_rules.push(Rule {
                        vars,
                        head,
                        body,
                        span: r.span,
                    });
                    transition_rules.push(r.clone());
                }
                _ => return Err(rw.fail(format!("the head time must be `{}` or `{}(t)`", sig.start, sig.next))),
            }
        }
    }

    let order: Vec<String> = voc.decls().map(|d| d.name().to_string()).collect();
    let state_symbols: Vec<String> = order.iter().filter(|s| defined.contains(*s)).cloned().collect();
    let action_symbols: Vec<String> = order
        .iter()
        .filter(|s| timed(s) && !defined.contains(*s) && **s != sig.next && **s != sig.start)
        .cloned()
        .collect();

    // Sentences: time-free, or local to one universally quantified time point.
    let mut init_sentences = Vec::new();
    let mut step_sentences = Vec::new();
    let next_names: BTreeSet<String> = state_symbols.iter().cloned().collect();
    for f in &t.sentences {
        let rw = Rewriter {
            voc,
            sig: &sig,
            pos: f.span.pos,
            symbol: String::new(),
        };
        let local = match &f.kind {
            FormulaKind::Forall(vs, body) if vs.iter().filter(|v| v.sort == sig.time).count() == 1 => {
                let tv = vs.iter().find(|v| v.sort == sig.time).unwrap();
                let rest: Vec<Var> = vs.iter().filter(|v| v.sort != sig.time).cloned().collect();
                let body = rw
                    .formula(body, At::Var(&tv.name))
                    .map_err(|_| LtcError::NonLtcSentence { pos: f.span.pos })?;
                if rest.is_empty() {
                    body
                } else {
                    Formula::new(FormulaKind::Forall(rest, Box::new(body)), f.span)
                }
            }
            _ => rw
                .formula(f, At::Timeless)
                .map_err(|_| LtcError::NonLtcSentence { pos: f.span.pos })?,
        };
        if mentions_any(&local, &action_symbols) {
            step_sentences.push(local);
        } else {
            init_sentences.push(local.clone());
            step_sentences.push(rename_formula(&local, &next_names));
        }
    }

    let state_vocabulary = Arc::new(
        single_state.restrict(
            format!("{}_state", single_state.name),
            single_state
                .decls()
                .map(Decl::name)
                .filter(|n| !action_symbols.iter().any(|a| a == n)),
        ),
    );
    let mut step_voc = Vocabulary::from_decls(format!("{}_step", single_state.name), single_state.decls().cloned())?;
    for s in &state_symbols {
        let mut d = single_state.get(s).unwrap().clone();
        match &mut d {
            Decl::Predicate(p) => p.name = format!("{s}{NEXT_SUFFIX}"),
            Decl::Function(f) => f.name = format!("{s}{NEXT_SUFFIX}"),
            Decl::Sort(_) => unreachable!(),
        }
        step_voc.declare(d)?;
    }
    let step_voc = Arc::new(step_voc);

    let theory = |name: &str, voc: Arc<Vocabulary>, rules: Vec<Rule>, sentences: Vec<Formula>| Theory {
        name: name.to_string(),
        vocabulary: voc,
        sentences,
        definitions: if rules.is_empty() {
            Vec::new()
        } else {
            vec![crate::lang::Definition { rules }]
        },
        span: t.span,
    };
    let init = theory(
        &format!("{}_init", t.name),
        state_vocabulary.clone(),
        init_rules,
        init_sentences,
    );
    let step = theory(&format!("{}_step", t.name), step_voc, step_rules, step_sentences);

    Ok(LtcTheory {
        base: t.clone(),
        time: sig,
        single_state,
        state_symbols,
        action_symbols,
        initial_rules,
        transition_rules,
        frame_rules,
        static_rules,
        init,
        step,
        state_vocabulary,
    })
}

fn rewrite_head(rw: &Rewriter<'_>, h: &Head, at: At<'_>, suffix: Option<&str>) -> Result<Head, LtcError> {
    let name = |s: &str| match suffix {
        Some(x) => format!("{s}{x}"),
        None => s.to_string(),
    };
    let args = |sym: &str, args: &[Term]| -> Result<Vec<Term>, LtcError> {
        let idx = rw.time_index(sym);
        args.iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != idx)
            .map(|(_, a)| rw.term(a, at))
            .collect()
    };
    Ok(match h {
        Head::Pred(p, a) => Head::Pred(name(p), args(p, a)?),
        Head::Func(f, a, v) => Head::Func(name(f), args(f, a)?, rw.term(v, at)?),
    })
}

/// `f(Next(t)) = f(t)` or `p(Next(t)) <- ... p(t) ...`.
fn is_frame_rule(r: &Rule, sym: &str, tv: &str) -> bool {
    let at_t = |args: &[Term]| args.iter().any(|a| matches!(&a.kind, TermKind::Var(v) if v.name == tv));
    match &r.head {
        Head::Func(_, _, v) => matches!(&v.kind, TermKind::App(f, args) if f == sym && at_t(args)),
        Head::Pred(..) => {
            let mut found = false;
            r.body.for_each_symbol(&mut |s| found |= s == sym);
            found
        }
    }
}

impl LtcTheory {
    /// The two-state theory of one transition.
    pub fn step_theory(&self) -> &Theory {
        &self.step
    }

    pub fn initial_theory(&self) -> &Theory {
        &self.init
    }

    /// The single-state vocabulary without the action symbols.
    pub fn state_vocabulary(&self) -> &Arc<Vocabulary> {
        &self.state_vocabulary
    }

    fn check_defined(&self, rules: &[Rule], missing: fn(String) -> LtcError) -> Result<(), LtcError> {
        for s in &self.state_symbols {
            if !rules.iter().any(|r| r.head.symbol() == s) {
                return Err(missing(s.clone()));
            }
        }
        Ok(())
    }
}

/// Copies into a structure over `voc` every interpretation of `from` whose
/// symbol `voc` declares identically.
fn restrict_to(from: &Structure, voc: &Arc<Vocabulary>, name: &str) -> Structure {
    let mut out = Structure::new(name, voc.clone());
    for d in voc.decls() {
        if from.vocabulary.get(d.name()) == Some(d) {
            if let Some(i) = from.get(d.name()) {
                out.set(d.name().to_string(), i.clone());
            }
        }
    }
    out
}

/// Initial snapshots: models of the initial rules and time-free sentences
/// over the sorts and static symbols of `s`, in canonical structure order.
pub fn initialise(lt: &LtcTheory, s: &Structure, opts: SolveOptions) -> Result<Vec<Snapshot>, LtcError> {
    lt.check_defined(&lt.initial_rules, |symbol| LtcError::MissingInitialDefinition {
        symbol,
    })?;
    let ctx = restrict_to(s, &lt.state_vocabulary, "initial");
    let models = solver::modelexpand(&lt.init, &ctx, opts)?.models;
    let mut out: Vec<Snapshot> = models
        .into_iter()
        .map(|m| Snapshot {
            structure: restrict_to(&m, &lt.single_state, "snapshot0"),
            step_index: 0,
        })
        .collect();
    out.sort_by(|a, b| canonical_cmp(&a.structure, &b.structure));
    Ok(out)
}

/// Every successor of a snapshot, with the actions that lead to it. Action
/// symbols the snapshot leaves unspecified are enumerated.
pub fn transitions(lt: &LtcTheory, snap: &Snapshot, opts: SolveOptions) -> Result<Vec<Transition>, LtcError> {
    lt.check_defined(&lt.transition_rules, |symbol| LtcError::MissingTransitionDefinition {
        symbol,
    })?;
    let ctx = restrict_to(&snap.structure, &lt.step.vocabulary, "step");
    let found = solver::modelexpand(&lt.step, &ctx, opts)?;
    if found.models.is_empty() {
        if let Some(e @ SolveError::FunctionConflict { .. }) = solver::definition_conflict(&lt.step, &ctx)? {
            return Err(e.into());
        }
    }
    let step_index = snap.step_index + 1;
    let action_voc = Arc::new(lt.single_state.restrict(
        format!("{}_action", lt.single_state.name),
        lt.action_symbols.iter().map(String::as_str),
    ));
    let mut out = Vec::with_capacity(found.models.len());
    for m in found.models {
        let mut next = Structure::new(format!("snapshot{step_index}"), lt.single_state.clone());
        for d in lt.single_state.decls() {
            let n = d.name();
            if lt.action_symbols.iter().any(|a| a == n) {
                continue;
            }
            let source = if lt.state_symbols.iter().any(|s| s == n) {
                m.get(&format!("{n}{NEXT_SUFFIX}"))
            } else {
                snap.structure.get(n).or_else(|| m.get(n))
            };
            if let Some(i) = source {
                next.set(n.to_string(), i.clone());
            }
        }
        out.push(Transition {
            actions: restrict_to(&m, &action_voc, "actions"),
            next: Snapshot {
                structure: next,
                step_index,
            },
        });
    }
    out.sort_by(|a, b| {
        canonical_cmp(&a.next.structure, &b.next.structure).then_with(|| canonical_cmp(&a.actions, &b.actions))
    });
    Ok(out)
}

/// The distinct successor snapshots, in canonical structure order.
pub fn progress(lt: &LtcTheory, snap: &Snapshot, opts: SolveOptions) -> Result<Vec<Snapshot>, LtcError> {
    let mut out: Vec<Snapshot> = Vec::new();
    for t in transitions(lt, snap, opts)? {
        if !out.iter().any(|s| s.structure.same_content(&t.next.structure)) {
            out.push(t.next);
        }
    }
    Ok(out)
}

/// The single-state structure of `m` at time point `at`.
pub fn state_at(lt: &LtcTheory, m: &Structure, at: &Value, step_index: usize) -> Snapshot {
    let voc = &lt.base.vocabulary;
    let mut out = Structure::new(format!("snapshot{step_index}"), lt.single_state.clone());
    for d in lt.single_state.decls() {
        let n = d.name();
        let Some(interp) = m.get(n) else { continue };
        let idx = voc
            .get(n)
            .and_then(|d| d.arg_sorts().iter().position(|s| *s == lt.time.time));
        let interp = match (idx, interp) {
            (None, i) => i.clone(),
            (Some(k), Interp::Relation(r)) => {
                Interp::Relation(r.iter().filter(|t| t[k] == *at).map(|t| drop_index(t, k)).collect())
            }
            (Some(k), Interp::Function(f)) => Interp::Function(
                f.iter()
                    .filter(|(t, _)| t[k] == *at)
                    .map(|(t, v)| (drop_index(t, k), v.clone()))
                    .collect(),
            ),
            (Some(_), i @ Interp::Sort(_)) => i.clone(),
        };
        out.set(n.to_string(), interp);
    }
    Snapshot {
        structure: out,
        step_index,
    }
}

/// Puts a snapshot back at time point `at` over the base vocabulary; the
/// inverse of [`state_at`] on the symbols the snapshot interprets.
pub fn unproject(lt: &LtcTheory, snap: &Snapshot, at: &Value) -> Structure {
    let voc = &lt.base.vocabulary;
    let mut out = Structure::new(format!("at{at}"), voc.clone());
    for (n, interp) in snap.structure.interps() {
        let idx = voc
            .get(n)
            .and_then(|d| d.arg_sorts().iter().position(|s| *s == lt.time.time));
        let interp = match (idx, interp) {
            (None, i) => i.clone(),
            (Some(k), Interp::Relation(r)) => Interp::Relation(r.iter().map(|t| insert_index(t, k, at)).collect()),
            (Some(k), Interp::Function(f)) => {
                Interp::Function(f.iter().map(|(t, v)| (insert_index(t, k, at), v.clone())).collect())
            }
            (Some(_), i @ Interp::Sort(_)) => i.clone(),
        };
        out.set(n.to_string(), interp);
    }
    out
}

fn drop_index(t: &[Value], k: usize) -> Vec<Value> {
    let mut t = t.to_vec();
    t.remove(k);
    t
}

fn insert_index(t: &[Value], k: usize, v: &Value) -> Vec<Value> {
    let mut t = t.to_vec();
    t.insert(k, v.clone());
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_program;

    const COUNTER: &str = include_str!("../fixtures/counter.fodot");

    fn counter() -> (crate::lang::Program, LtcTheory) {
        let p = parse_program(COUNTER).unwrap();
        let lt = split_ltc(&p.theories["T"]).unwrap();
        (p, lt)
    }

    fn count(s: &Snapshot) -> i64 {
        s.structure.constant("count").unwrap().as_int().unwrap()
    }

    fn with_actions(lt: &LtcTheory, snap: &Snapshot, up: bool, down: bool, set: &[i64]) -> Snapshot {
        let mut s = snap.structure.clone();
        let flag = |b: bool| Interp::Relation(if b { [vec![]].into() } else { Default::default() });
        s.set("countUp", flag(up));
        s.set("countDown", flag(down));
        s.set(
            "setValue",
            Interp::Relation(set.iter().map(|v| vec![Value::Int(*v)]).collect()),
        );
        assert!(lt.action_symbols.len() == 3);
        Snapshot {
            structure: s,
            step_index: snap.step_index,
        }
    }

    #[test]
    fn counter_splits_into_one_initial_and_four_transition_rules() {
        let (_, lt) = counter();
        assert_eq!(lt.initial_rules.len(), 1);
        assert_eq!(lt.transition_rules.len(), 4);
        assert_eq!(lt.frame_rules, [3]);
        assert_eq!(lt.state_symbols, ["count"]);
        assert_eq!(lt.action_symbols, ["countUp", "countDown", "setValue"]);
    }

    #[test]
    fn single_state_vocabulary_drops_time() {
        let (p, lt) = counter();
        assert_eq!(lt.single_state.name, "V_ss");
        assert!(lt.single_state.function("count").unwrap().args.is_empty());
        assert_eq!(lt.single_state.predicate("setValue").unwrap().args, ["Count"]);
        assert!(lt.single_state.get("Time").is_none() && lt.single_state.get("Next").is_none());
        let plain = Vocabulary::from_decls(
            "P",
            p.vocabularies["V_types"]
                .decls()
                .filter(|d| d.name() == "Count")
                .cloned(),
        )
        .unwrap();
        assert_eq!(single_state_vocabulary(&plain).unwrap().decls().count(), 1);
    }

    #[test]
    fn bare_time_head_is_rejected() {
        let src = format!("{COUNTER}\ntheory Bad : V {{ {{ count(t) = 0. }} }}");
        let p = parse_program(&src).unwrap();
        assert!(matches!(
            split_ltc(&p.theories["Bad"]),
            Err(LtcError::NonLtcRule { .. })
        ));
    }

    #[test]
    fn counter_progression() {
        let (p, lt) = counter();
        let init = initialise(&lt, &p.structures["S"], SolveOptions::all()).unwrap();
        assert_eq!(init.len(), 1);
        assert_eq!(count(&init[0]), 0);
        let mut s = init[0].clone();
        s.structure
            .set("count", Interp::Function([(vec![], Value::Int(3))].into()));

        let up = progress(&lt, &with_actions(&lt, &s, true, false, &[]), SolveOptions::all()).unwrap();
        assert_eq!(up.iter().map(count).collect::<Vec<_>>(), [4]);
        assert_eq!(up[0].step_index, 1);
        let idle = progress(&lt, &with_actions(&lt, &s, false, false, &[]), SolveOptions::all()).unwrap();
        assert_eq!(idle.iter().map(count).collect::<Vec<_>>(), [3]);
        let set = progress(&lt, &with_actions(&lt, &s, false, false, &[7]), SolveOptions::all()).unwrap();
        assert_eq!(set.iter().map(count).collect::<Vec<_>>(), [7]);

        let err = progress(&lt, &with_actions(&lt, &s, true, false, &[7]), SolveOptions::all()).unwrap_err();
        assert!(
            matches!(err, LtcError::Solve(SolveError::FunctionConflict { .. })),
            "{err}"
        );
    }

    #[test]
    fn missing_start_rule_is_rejected() {
        let src = "LTCvocabulary W { type Time\n Start : Time\n Next(Time) : Time\n p(Time)\n q(Time) }\n\
            theory T : W { { p(Next(t)) <- q(t). } }\nstructure S : W { }";
        let p = parse_program(src).unwrap();
        let lt = split_ltc(&p.theories["T"]).unwrap();
        let err = initialise(&lt, &p.structures["S"], SolveOptions::all()).unwrap_err();
        assert!(matches!(err, LtcError::MissingInitialDefinition { ref symbol } if symbol == "p"));
    }

    #[test]
    fn seeded_initial_states() {
        let src = "LTCvocabulary W { type Time\n Start : Time\n Next(Time) : Time\n type C isa int\n seed(C)\n c(Time) : C }\n\
            theory T : W { { c(Start) = v <- seed(v). c(Next(t)) = c(t). } }\n\
            structure S : W { C = {0..1} }";
        let p = parse_program(src).unwrap();
        let lt = split_ltc(&p.theories["T"]).unwrap();
        let init = initialise(&lt, &p.structures["S"], SolveOptions::all()).unwrap();
        let counts: Vec<_> = init
            .iter()
            .map(|s| s.structure.constant("c").unwrap().clone())
            .collect();
        assert_eq!(counts, [Value::Int(0), Value::Int(1)]);
    }

    #[test]
    fn projection_round_trip() {
        let (p, lt) = counter();
        let init = initialise(&lt, &p.structures["S"], SolveOptions::all()).unwrap();
        let at = Value::Int(2);
        let full = unproject(&lt, &init[0], &at);
        let back = state_at(&lt, &full, &at, 0);
        assert!(back.structure.same_content(&init[0].structure));
    }
}
