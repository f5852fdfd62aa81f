//! Pretty printer. Output reparses to an equal program.

use std::fmt::Write;

use super::ast::*;
use crate::model::{quote, Decl, Interp, SortKind, Structure, Value, Vocabulary};

pub fn program(p: &Program) -> String {
    let mut out = String::new();
    for (kind, name) in &p.order {
        if !out.is_empty() {
            out.push('\n');
        }
        match kind {
            BlockKind::Vocabulary => out.push_str(&vocabulary(&p.vocabularies[name])),
            BlockKind::Theory => out.push_str(&theory(&p.theories[name])),
            BlockKind::Structure => out.push_str(&structure(&p.structures[name])),
            BlockKind::Procedure => {
                let _ = writeln!(out, "procedure {name}{}", p.procedures[name]);
            }
            BlockKind::Simulation => {
                let sim = &p.simulations[name];
                let _ = writeln!(out, "simulation {name} {{");
                for (role, target) in &sim.entries {
                    let _ = writeln!(out, "  {role} = {target}");
                }
                out.push_str("}\n");
            }
        }
    }
    out
}

pub fn vocabulary(v: &Vocabulary) -> String {
    let mut out = String::new();
    let kw = if v.ltc { "LTCvocabulary" } else { "vocabulary" };
    let _ = writeln!(out, "{kw} {} {{", v.name);
    for e in &v.externs {
        let _ = writeln!(out, "  extern vocabulary {e}");
    }
    for d in v.own_decls() {
        let _ = writeln!(out, "  {}", decl(d));
    }
    out.push_str("}\n");
    out
}

pub fn decl(d: &Decl) -> String {
    match d {
        Decl::Sort(s) => match (&s.kind, &s.isa) {
            (_, Some(parent)) => format!("type {} isa {parent}", s.name),
            (SortKind::Int, None) => format!("type {} isa int", s.name),
            (SortKind::Str, None) => format!("type {} isa string", s.name),
            (SortKind::Constructed(cs), None) => format!("type {} constructed from {{{}}}", s.name, cs.join(", ")),
            (SortKind::Abstract, None) => format!("type {}", s.name),
        },
        Decl::Predicate(p) if p.args.is_empty() => p.name.clone(),
        Decl::Predicate(p) => format!("{}({})", p.name, p.args.join(", ")),
        Decl::Function(f) => {
            let partial = if f.partial { "partial " } else { "" };
            if f.args.is_empty() {
                format!("{partial}{} : {}", f.name, f.out)
            } else {
                format!("{partial}{}({}) : {}", f.name, f.args.join(", "), f.out)
            }
        }
    }
}

pub fn theory(t: &Theory) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "theory {} : {} {{", t.name, t.vocabulary.name);
    for s in &t.sentences {
        let _ = writeln!(out, "  {}.", formula(s));
    }
    for d in &t.definitions {
        out.push_str("  {\n");
        for r in &d.rules {
            let _ = writeln!(out, "    {}", rule(r));
        }
        out.push_str("  }\n");
    }
    out.push_str("}\n");
    out
}

fn vars(vs: &[Var]) -> String {
    vs.iter()
        .map(|v| format!("{}[{}]", v.name, v.sort))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn rule(r: &Rule) -> String {
    let mut out = String::new();
    if !r.vars.is_empty() {
        let _ = write!(out, "!{}: ", vars(&r.vars));
    }
    match &r.head {
        Head::Pred(p, args) => out.push_str(&app(p, args)),
        Head::Func(f, args, v) => {
            let _ = write!(out, "{} = {}", app(f, args), term(v));
        }
    }
    if r.body.kind != FormulaKind::Bool(true) {
        let _ = write!(out, " <- {}", formula(&r.body));
    }
    out.push('.');
    out
}

fn app(name: &str, args: &[Term]) -> String {
    if args.is_empty() {
        name.to_string()
    } else {
        format!("{name}({})", args.iter().map(term).collect::<Vec<_>>().join(", "))
    }
}

pub fn value(v: &Value) -> String {
    match v {
        Value::Int(n) => n.to_string(),
        Value::Str(s) => quote(s),
        Value::Cons(c) => c.clone(),
    }
}

pub fn term(t: &Term) -> String {
    match &t.kind {
        TermKind::Var(v) => v.name.clone(),
        TermKind::Const(v) => value(v),
        TermKind::App(f, args) => app(f, args),
        TermKind::Builtin(b, args) => format!("{}({})", b.name(), args.iter().map(term).collect::<Vec<_>>().join(", ")),
        TermKind::Neg(a) => match &a.kind {
            TermKind::Var(_) | TermKind::App(..) | TermKind::Builtin(..) => format!("-{}", term(a)),
            _ => format!("-({})", term(a)),
        },
        TermKind::Arith(op, a, b) => {
            let is_sum = |t: &Term| matches!(t.kind, TermKind::Arith(ArithOp::Add | ArithOp::Sub, ..));
            let is_arith = |t: &Term| matches!(t.kind, TermKind::Arith(..));
            let (wrap_l, wrap_r) = match op {
                ArithOp::Add | ArithOp::Sub => (false, is_sum(b)),
                ArithOp::Mul => (is_sum(a), is_arith(b)),
            };
            let side = |t: &Term, wrap: bool| if wrap { format!("({})", term(t)) } else { term(t) };
            format!("{} {} {}", side(a, wrap_l), op.symbol(), side(b, wrap_r))
        }
    }
}

fn atomic(f: &Formula) -> bool {
    matches!(
        f.kind,
        FormulaKind::Bool(_) | FormulaKind::Atom(..) | FormulaKind::Cmp(..)
    )
}

fn sub(f: &Formula) -> String {
    if atomic(f) || matches!(f.kind, FormulaKind::Not(_)) {
        formula(f)
    } else {
        format!("({})", formula(f))
    }
}

pub fn formula(f: &Formula) -> String {
    match &f.kind {
        FormulaKind::Bool(b) => b.to_string(),
        FormulaKind::Atom(p, args) => app(p, args),
        FormulaKind::Cmp(op, a, b) => format!("{} {} {}", term(a), op.symbol(), term(b)),
        FormulaKind::Not(a) => format!("~{}", sub(a)),
        FormulaKind::And(a, b) => format!("{} & {}", sub(a), sub(b)),
        FormulaKind::Or(a, b) => format!("{} | {}", sub(a), sub(b)),
        FormulaKind::Implies(a, b) => format!("{} => {}", sub(a), sub(b)),
        FormulaKind::ImpliedBy(a, b) => format!("{} <= {}", sub(a), sub(b)),
        FormulaKind::Equiv(a, b) => format!("{} <=> {}", sub(a), sub(b)),
        FormulaKind::Forall(vs, body) => format!("!{}: {}", vars(vs), formula(body)),
        FormulaKind::Exists(vs, body) => format!("?{}: {}", vars(vs), formula(body)),
    }
}

fn values(vs: &[Value]) -> String {
    let ints: Option<Vec<i64>> = vs.iter().map(Value::as_int).collect();
    if let Some(ints) = ints {
        if ints.len() > 1 && ints.windows(2).all(|w| w[1] == w[0] + 1) {
            return format!("{{{}..{}}}", ints[0], ints[ints.len() - 1]);
        }
    }
    format!("{{{}}}", vs.iter().map(value).collect::<Vec<_>>().join("; "))
}

fn tuple(t: &[Value]) -> String {
    t.iter().map(value).collect::<Vec<_>>().join(",")
}

/// Prints one interpretation as it appears inside a structure block.
pub fn interp(symbol: &str, i: &Interp) -> String {
    match i {
        Interp::Sort(vs) => format!("{symbol} = {}", values(vs)),
        Interp::Relation(set) if set.iter().all(|t| t.is_empty()) && !set.is_empty() => format!("{symbol} = true"),
        Interp::Relation(set) => {
            format!(
                "{symbol} = {{{}}}",
                set.iter().map(|t| tuple(t)).collect::<Vec<_>>().join("; ")
            )
        }
        Interp::Function(map) => match map.get(&Vec::new()) {
            Some(v) if map.len() == 1 => format!("{symbol} = {}", value(v)),
            _ => {
                let entries: Vec<String> = map
                    .iter()
                    .map(|(args, v)| {
                        let mut key = tuple(args);
                        key.push(',');
                        key.push_str(&value(v));
                        key
                    })
                    .collect();
                format!("{symbol} = {{{}}}", entries.join("; "))
            }
        },
    }
}

pub fn structure(s: &Structure) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "structure {} : {} {{", s.name, s.vocabulary.name);
    for (sym, i) in s.interps() {
        if matches!(i, Interp::Relation(set) if set.is_empty())
            && s.vocabulary.predicate(sym).is_some_and(|p| p.args.is_empty())
        {
            let _ = writeln!(out, "  {sym} = false");
            continue;
        }
        let _ = writeln!(out, "  {}", interp(sym, i));
    }
    out.push_str("}\n");
    out
}
