#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use logiviz::lang::{parse_program, print, Program};
use logiviz::ltc::{self, LtcTheory, Snapshot};
use logiviz::model::{Interp, Structure, Value, Vocabulary};
use logiviz::solver::{modelexpand, satisfies, SolveOptions};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Kind {
    Prop,
    Pred1,
    Pred2,
    Const,
    Func1,
    Partial1,
}

#[derive(Clone, Debug)]
pub struct Sym {
    pub name: String,
    pub kind: Kind,
}

/// A generated program: vocabulary `V`, theory `T`, structure `S`.
#[derive(Clone, Debug)]
pub struct Case {
    pub src: String,
    pub lo: i64,
    pub size: usize,
    pub syms: Vec<Sym>,
}

fn assignments(kind: Kind, d: usize) -> u64 {
    let d = d as u64;
    match kind {
        Kind::Prop => 2,
        Kind::Pred1 => 1 << d,
        Kind::Pred2 => 1u64.checked_shl((d * d) as u32).unwrap_or(u64::MAX),
        Kind::Const => d,
        Kind::Func1 => d.saturating_pow(d as u32),
        Kind::Partial1 => (d + 1).saturating_pow(d as u32),
    }
}

pub fn candidate_count(case: &Case) -> u64 {
    case.syms
        .iter()
        .fold(1u64, |acc, s| acc.saturating_mul(assignments(s.kind, case.size)))
}

struct Gen<'a> {
    rng: &'a mut StdRng,
    syms: &'a [Sym],
    lo: i64,
    size: usize,
    defined: Option<&'a str>,
    fresh: usize,
}

impl Gen<'_> {
    fn var(&mut self) -> String {
        self.fresh += 1;
        format!("v{}", self.fresh)
    }

    fn term(&mut self, depth: u32, vars: &[String]) -> String {
        let funcs: Vec<&Sym> = self
            .syms
            .iter()
            .filter(|s| {
                matches!(s.kind, Kind::Func1 | Kind::Partial1 | Kind::Const) && Some(s.name.as_str()) != self.defined
            })
            .collect();
        let pick = self.rng.random_range(0..10);
        if depth > 0 && pick < 2 {
            let op = if self.rng.random_bool(0.5) { "+" } else { "-" };
            return format!("({} {op} {})", self.term(depth - 1, vars), self.term(depth - 1, vars));
        }
        if depth > 0 && pick < 5 && !funcs.is_empty() {
            let f = funcs[self.rng.random_range(0..funcs.len())];
            return match f.kind {
                Kind::Const => f.name.clone(),
                _ => format!("{}({})", f.name, self.term(depth - 1, vars)),
            };
        }
        if !vars.is_empty() && pick < 8 {
            return vars[self.rng.random_range(0..vars.len())].clone();
        }
        // Literals may fall just outside the domain.
        self.rng
            .random_range(self.lo - 1..=self.lo + self.size as i64)
            .to_string()
    }

    fn atom(&mut self, vars: &[String], allow_defined: bool) -> String {
        let preds: Vec<Sym> = self
            .syms
            .iter()
            .filter(|s| matches!(s.kind, Kind::Prop | Kind::Pred1 | Kind::Pred2))
            .filter(|s| allow_defined || Some(s.name.as_str()) != self.defined)
            .cloned()
            .collect();
        if !preds.is_empty() && self.rng.random_bool(0.6) {
            let p = &preds[self.rng.random_range(0..preds.len())];
            return match p.kind {
                Kind::Prop => p.name.clone(),
                Kind::Pred1 => format!("{}({})", p.name, self.term(1, vars)),
                _ => format!("{}({}, {})", p.name, self.term(1, vars), self.term(1, vars)),
            };
        }
        let ops = ["=", "~=", "<", ">", "=<", ">="];
        let op = ops[self.rng.random_range(0..ops.len())];
        format!("{} {op} {}", self.term(2, vars), self.term(2, vars))
    }

    /// `allow_defined` admits the defined symbol, which is only sound in
    /// sentences.
    fn formula(&mut self, depth: u32, vars: &mut Vec<String>, allow_defined: bool) -> String {
        if depth == 0 {
            return self.atom(vars, allow_defined);
        }
        match self.rng.random_range(0..9) {
            0 => format!("~({})", self.formula(depth - 1, vars, allow_defined)),
            1 | 2 => {
                let op = ["&", "|", "=>", "<=>"][self.rng.random_range(0..4)];
                let a = self.formula(depth - 1, vars, allow_defined);
                let b = self.formula(depth - 1, vars, allow_defined);
                format!("({a} {op} {b})")
            }
            3 | 4 => {
                let q = if self.rng.random_bool(0.5) { "!" } else { "?" };
                let v = self.var();
                vars.push(v.clone());
                let body = self.formula(depth - 1, vars, allow_defined);
                vars.pop();
                format!("({q}{v}[N]: {body})")
            }
            _ => self.atom(vars, allow_defined),
        }
    }
}

/// Draws a random small theory: one to three symbols over one integer
/// sort, at most 512 candidate interpretations.
pub fn random_case(rng: &mut StdRng) -> Case {
    let kinds = [
        Kind::Prop,
        Kind::Pred1,
        Kind::Pred2,
        Kind::Const,
        Kind::Func1,
        Kind::Partial1,
    ];
    loop {
        let size = rng.random_range(1..=8usize);
        let lo = rng.random_range(0..=1i64);
        let n = rng.random_range(1..=3usize);
        let syms: Vec<Sym> = (0..n)
            .map(|i| Sym {
                name: format!("s{i}"),
                kind: kinds[rng.random_range(0..kinds.len())],
            })
            .collect();
        let mut case = Case {
            src: String::new(),
            lo,
            size,
            syms,
        };
        if candidate_count(&case) > 512 {
            continue;
        }
        case.src = program_text(rng, &case);
        return case;
    }
}

fn program_text(rng: &mut StdRng, case: &Case) -> String {
    let mut voc = String::from("vocabulary V {\n  type N isa int\n");
    for s in &case.syms {
        let decl = match s.kind {
            Kind::Prop => s.name.clone(),
            Kind::Pred1 => format!("{}(N)", s.name),
            Kind::Pred2 => format!("{}(N, N)", s.name),
            Kind::Const => format!("{} : N", s.name),
            Kind::Func1 => format!("{}(N) : N", s.name),
            Kind::Partial1 => format!("partial {}(N) : N", s.name),
        };
        voc.push_str(&format!("  {decl}\n"));
    }
    voc.push_str("}\n");

    // Sometimes the last predicate is defined instead of open.
    let defined = case
        .syms
        .iter()
        .rev()
        .find(|s| matches!(s.kind, Kind::Prop | Kind::Pred1 | Kind::Pred2))
        .filter(|_| rng.random_bool(0.4))
        .cloned();
    let mut g = Gen {
        rng,
        syms: &case.syms,
        lo: case.lo,
        size: case.size,
        defined: defined.as_ref().map(|s| s.name.as_str()),
        fresh: 0,
    };
    let mut body = String::new();
    let sentences = g.rng.random_range(1..=3);
    for _ in 0..sentences {
        let f = g.formula(3, &mut Vec::new(), true);
        body.push_str(&format!("  {f}.\n"));
    }
    if let Some(d) = &defined {
        body.push_str("  {\n");
        let rules = g.rng.random_range(1..=2);
        for _ in 0..rules {
            let (head, vars): (String, Vec<String>) = match d.kind {
                Kind::Prop => (d.name.clone(), vec![]),
                Kind::Pred1 => ("x".to_string(), vec!["x".to_string()]),
                _ => ("x, y".to_string(), vec!["x".to_string(), "y".to_string()]),
            };
            let head = if d.kind == Kind::Prop {
                head
            } else {
                format!("{}({head})", d.name)
            };
            let quant = if vars.is_empty() {
                String::new()
            } else {
                format!(
                    "!{}: ",
                    vars.iter().map(|v| format!("{v}[N]")).collect::<Vec<_>>().join(" ")
                )
            };
            let mut scope = vars.clone();
            let f = g.formula(2, &mut scope, false);
            body.push_str(&format!("    {quant}{head} <- {f}.\n"));
        }
        // A positive recursive rule.
        if d.kind == Kind::Pred2 && g.rng.random_bool(0.5) {
            body.push_str(&format!(
                "    !x[N] y[N] z[N]: {0}(x, z) <- {0}(x, y) & {0}(y, z).\n",
                d.name
            ));
        }
        body.push_str("  }\n");
    }
    let hi = case.lo + case.size as i64 - 1;
    format!(
        "{voc}theory T : V {{\n{body}}}\nstructure S : V {{\n  N = {{{}..{hi}}}\n}}\n",
        case.lo
    )
}

fn subsets<T: Clone + Ord>(items: &[T]) -> Vec<BTreeSet<T>> {
    let mut out = vec![BTreeSet::new()];
    for x in items {
        let with: Vec<BTreeSet<T>> = out
            .iter()
            .map(|s| {
                let mut s = s.clone();
                s.insert(x.clone());
                s
            })
            .collect();
        out.extend(with);
    }
    out
}

fn maps(args: &[Vec<Value>], values: &[Option<Value>]) -> Vec<BTreeMap<Vec<Value>, Value>> {
    let mut out = vec![BTreeMap::new()];
    for a in args {
        let mut next = Vec::new();
        for m in &out {
            for v in values {
                let mut m = m.clone();
                if let Some(v) = v {
                    m.insert(a.clone(), v.clone());
                }
                next.push(m);
            }
        }
        out = next;
    }
    out
}

fn interpretations(kind: Kind, dom: &[Value]) -> Vec<Interp> {
    let unary: Vec<Vec<Value>> = dom.iter().map(|v| vec![v.clone()]).collect();
    let total: Vec<Option<Value>> = dom.iter().cloned().map(Some).collect();
    match kind {
        Kind::Prop => subsets(&[Vec::<Value>::new()])
            .into_iter()
            .map(Interp::Relation)
            .collect(),
        Kind::Pred1 => subsets(&unary).into_iter().map(Interp::Relation).collect(),
        Kind::Pred2 => {
            let pairs: Vec<Vec<Value>> = dom
                .iter()
                .flat_map(|a| dom.iter().map(move |b| vec![a.clone(), b.clone()]))
                .collect();
            subsets(&pairs).into_iter().map(Interp::Relation).collect()
        }
        Kind::Const => maps(&[vec![]], &total).into_iter().map(Interp::Function).collect(),
        Kind::Func1 => maps(&unary, &total).into_iter().map(Interp::Function).collect(),
        Kind::Partial1 => {
            let mut with_gap = vec![None];
            with_gap.extend(total);
            maps(&unary, &with_gap).into_iter().map(Interp::Function).collect()
        }
    }
}

/// Every total structure over the case's symbols that `satisfies` accepts.
pub fn brute_force(case: &Case, p: &Program) -> Vec<Structure> {
    let voc: Arc<Vocabulary> = p.vocabularies["V"].clone();
    let dom: Vec<Value> = (0..case.size).map(|i| Value::Int(case.lo + i as i64)).collect();
    let mut partial = vec![{
        let mut s = Structure::new("S", voc.clone());
        s.set("N", Interp::Sort(dom.clone()));
        s
    }];
    for sym in &case.syms {
        let options = interpretations(sym.kind, &dom);
        let mut next = Vec::with_capacity(partial.len() * options.len());
        for s in &partial {
            for i in &options {
                let mut s = s.clone();
                s.set(sym.name.clone(), i.clone());
                next.push(s);
            }
        }
        partial = next;
    }
    let t = &p.theories["T"];
    partial.into_iter().filter(|m| satisfies(t, m).unwrap()).collect()
}

/// Order-free fingerprint of a set of structures.
pub fn fingerprint(models: &[Structure]) -> BTreeSet<BTreeMap<String, String>> {
    models
        .iter()
        .map(|m| m.interps().map(|(n, i)| (n.to_string(), print::interp(n, i))).collect())
        .collect()
}

/// Compares full model expansion with the brute force; `Err` describes
/// the first difference.
pub fn check_case(case: &Case) -> Result<usize, String> {
    let p = parse_program(&case.src).map_err(|e| format!("{e}\n{}", case.src))?;
    let solved = modelexpand(&p.theories["T"], &p.structures["S"], SolveOptions::all())
        .map_err(|e| format!("{e}\n{}", case.src))?;
    let want = fingerprint(&brute_force(case, &p));
    let got = fingerprint(&solved.models);
    if got.len() != solved.models.len() {
        return Err(format!("duplicate models\n{}", case.src));
    }
    if want != got {
        let missing = want.difference(&got).next();
        let extra = got.difference(&want).next();
        return Err(format!("missing {missing:?}, extra {extra:?}\n{}", case.src));
    }
    Ok(want.len())
}

pub fn seeded(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub const COUNTER: &str = include_str!("../../fixtures/counter.fodot");

pub fn counter_window() -> Program {
    let src = format!("{COUNTER}\n{}", include_str!("../../fixtures/counter_window.fodot"));
    parse_program(&src).unwrap()
}

fn content(s: &Structure, symbols: &[String]) -> String {
    symbols.iter().map(|n| format!("{n}={:?};", s.get(n))).collect()
}

/// Every run of states and actions from whole-theory expansion.
pub fn runs_by_expansion(p: &Program, lt: &LtcTheory, steps: usize) -> BTreeSet<Vec<String>> {
    let all = modelexpand(&p.theories["T"], &p.structures["W"], SolveOptions::all()).unwrap();
    let mut out = BTreeSet::new();
    for m in &all.models {
        let mut run = Vec::new();
        for k in 0..=steps {
            let s = ltc::state_at(lt, m, &Value::Int(k as i64), k);
            run.push(content(&s.structure, &lt.state_symbols));
            if k < steps {
                run.push(content(&s.structure, &lt.action_symbols));
            }
        }
        out.insert(run);
    }
    out
}

/// Every run found by exhaustive progression.
pub fn runs_by_progression(p: &Program, lt: &LtcTheory, steps: usize) -> BTreeSet<Vec<String>> {
    let init = ltc::initialise(lt, &p.structures["W"], SolveOptions::all()).unwrap();
    let mut frontier: Vec<(Snapshot, Vec<String>)> = init
        .into_iter()
        .map(|s| {
            let key = vec![content(&s.structure, &lt.state_symbols)];
            (s, key)
        })
        .collect();
    for _ in 0..steps {
        let mut next = Vec::new();
        for (s, run) in frontier {
            for t in ltc::transitions(lt, &s, SolveOptions::all()).unwrap() {
                assert_eq!(t.next.step_index, s.step_index + 1);
                let mut run = run.clone();
                run.push(content(&t.actions, &lt.action_symbols));
                run.push(content(&t.next.structure, &lt.state_symbols));
                next.push((t.next, run));
            }
        }
        frontier = next;
    }
    frontier.into_iter().map(|(_, r)| r).collect()
}

/// Runs the command line in process.
pub fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["logiviz"];
    argv.extend_from_slice(args);
    let code = logiviz::cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

pub fn fixture(name: &str) -> String {
    format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

/// The case's program with a second theory `T2` of fresh random
/// sentences over the same vocabulary.
pub fn with_second_theory(rng: &mut StdRng, case: &Case) -> String {
    let mut g = Gen {
        rng,
        syms: &case.syms,
        lo: case.lo,
        size: case.size,
        defined: None,
        fresh: 0,
    };
    let n = g.rng.random_range(1..=2);
    let body: String = (0..n)
        .map(|_| format!("  {}.\n", g.formula(3, &mut Vec::new(), true)))
        .collect();
    format!("{}theory T2 : V {{\n{body}}}\n", case.src)
}
