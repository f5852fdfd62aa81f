//! Cell table and grounding.
//!
//! Every predicate or function point of the vocabulary owns one cell. Cells
//! hold `UNKNOWN`, `UNDEF` (a partial function without a value) or an index:
//! 0/1 for predicates, a position in the result domain for functions.

use std::collections::HashMap;

use indexmap::IndexMap;

use super::SolveError;
use crate::lang::print;
use crate::lang::{ArithOp, Builtin, CmpOp, Formula, FormulaKind, Term, TermKind};
use crate::model::{Decl, Interp, Structure, Value, Vocabulary};

pub(super) type Cell = u32;
pub(super) const UNKNOWN: Cell = u32::MAX;
pub(super) const UNDEF: Cell = u32::MAX - 1;

const MAX_CELLS: usize = 20_000_000;
const MAX_GROUND: usize = 5_000_000;

pub(super) struct Sort {
    pub name: String,
    pub values: Vec<Value>,
    index: HashMap<Value, u32>,
}

impl Sort {
    pub fn index_of(&self, v: &Value) -> Option<u32> {
        self.index.get(v).copied()
    }
}

pub(super) struct Sym {
    pub name: String,
    pub is_pred: bool,
    pub partial: bool,
    pub args: Vec<usize>,
    pub out: Option<usize>,
    pub base: usize,
    pub size: usize,
}

pub(super) struct Table {
    pub sorts: Vec<Sort>,
    pub sort_ids: HashMap<String, usize>,
    pub syms: Vec<Sym>,
    pub sym_ids: HashMap<String, usize>,
    pub ncells: usize,
}

impl Table {
    pub fn new(voc: &Vocabulary, domains: IndexMap<String, Vec<Value>>) -> Result<Table, SolveError> {
        let mut sorts = Vec::new();
        let mut sort_ids = HashMap::new();
        for (name, values) in domains {
            let index = values.iter().enumerate().map(|(i, v)| (v.clone(), i as u32)).collect();
            sort_ids.insert(name.clone(), sorts.len());
            sorts.push(Sort { name, values, index });
        }
        let mut syms = Vec::new();
        let mut sym_ids = HashMap::new();
        let mut base = 0usize;
        for d in voc.decls() {
            let (is_pred, partial, args, out) = match d {
                Decl::Sort(_) => continue,
                Decl::Predicate(p) => (true, false, &p.args, None),
                Decl::Function(f) => (false, f.partial, &f.args, Some(sort_ids[&f.out])),
            };
            let args: Vec<usize> = args.iter().map(|a| sort_ids[a]).collect();
            let size = args
                .iter()
                .try_fold(1usize, |acc, &a| acc.checked_mul(sorts[a].values.len()))
                .filter(|&n| n <= MAX_CELLS)
                .ok_or(SolveError::GroundingTooLarge { size: usize::MAX })?;
            sym_ids.insert(d.name().to_string(), syms.len());
            syms.push(Sym {
                name: d.name().to_string(),
                is_pred,
                partial,
                args,
                out,
                base,
                size,
            });
            base += size;
            if base > MAX_CELLS {
                return Err(SolveError::GroundingTooLarge { size: base });
            }
        }
        Ok(Table {
            sorts,
            sort_ids,
            syms,
            sym_ids,
            ncells: base,
        })
    }

    /// The cell of `sym` at the given argument values, if they are in its domain.
    pub fn point(&self, sym: usize, args: &[Value]) -> Option<usize> {
        let s = &self.syms[sym];
        let mut off = 0usize;
        for (&sort, v) in s.args.iter().zip(args) {
            let sort = &self.sorts[sort];
            off = off * sort.values.len() + sort.index_of(v)? as usize;
        }
        Some(s.base + off)
    }

    pub fn sym_of(&self, cell: usize) -> usize {
        self.syms.partition_point(|s| s.base + s.size <= cell)
    }

    pub fn args_of(&self, cell: usize) -> (usize, Vec<Value>) {
        let id = self.sym_of(cell);
        let s = &self.syms[id];
        let mut off = cell - s.base;
        let mut args = vec![Value::Int(0); s.args.len()];
        for (i, &sort) in s.args.iter().enumerate().rev() {
            let n = self.sorts[sort].values.len();
            args[i] = self.sorts[sort].values[off % n].clone();
            off /= n;
        }
        (id, args)
    }

    /// `name(a, b)` for diagnostics.
    pub fn describe_args(args: &[Value]) -> String {
        if args.is_empty() {
            String::new()
        } else {
            format!("({})", args.iter().map(print::value).collect::<Vec<_>>().join(", "))
        }
    }

    pub fn value_of(&self, sym: usize, cell: Cell) -> Option<Value> {
        match cell {
            UNKNOWN | UNDEF => None,
            i => Some(self.sorts[self.syms[sym].out.expect("function")].values[i as usize].clone()),
        }
    }

    /// Writes the interpretations of a structure into fixed cells. The
    /// successor function of a finite time sort may stop at the last point.
    pub fn load(&self, s: &Structure, cells: &mut [Cell], fixed: &mut [bool]) -> Result<(), SolveError> {
        let next = crate::ltc::time_signature(&s.vocabulary).map(|sig| sig.next);
        for (id, sym) in self.syms.iter().enumerate() {
            let Some(interp) = s.get(&sym.name) else { continue };
            fixed[id] = true;
            let range = sym.base..sym.base + sym.size;
            match interp {
                Interp::Relation(set) => {
                    cells[range].fill(0);
                    for t in set {
                        if let Some(p) = self.point(id, t) {
                            cells[p] = 1;
                        }
                    }
                }
                Interp::Function(map) => {
                    cells[range.clone()].fill(UNDEF);
                    let out = &self.sorts[sym.out.unwrap()];
                    for (t, v) in map {
                        if let (Some(p), Some(i)) = (self.point(id, t), out.index_of(v)) {
                            cells[p] = i;
                        }
                    }
                    if !sym.partial && next.as_deref() != Some(sym.name.as_str()) && cells[range].contains(&UNDEF) {
                        return Err(SolveError::PartialInterpretation {
                            symbol: sym.name.clone(),
                        });
                    }
                }
                Interp::Sort(_) => {}
            }
        }
        Ok(())
    }

    /// Reads the cells of one symbol back into an interpretation.
    pub fn interp(&self, sym: usize, cells: &[Cell]) -> Interp {
        let s = &self.syms[sym];
        if s.is_pred {
            let set = (s.base..s.base + s.size)
                .filter(|&c| cells[c] == 1)
                .map(|c| self.args_of(c).1)
                .collect();
            Interp::Relation(set)
        } else {
            let map = (s.base..s.base + s.size)
                .filter_map(|c| self.value_of(sym, cells[c]).map(|v| (self.args_of(c).1, v)))
                .collect();
            Interp::Function(map)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub(super) enum GTerm {
    Val(Value),
    Undef,
    /// A function cell.
    Point(usize),
    /// Function applied to arguments not known at grounding time.
    App(usize, Vec<GTerm>),
    Arith(ArithOp, Box<GTerm>, Box<GTerm>),
    Neg(Box<GTerm>),
    Builtin(Builtin, Vec<GTerm>),
}

#[derive(Clone, Debug, PartialEq)]
pub(super) enum GForm {
    Bool(bool),
    /// A predicate cell.
    Atom(usize),
    AtomApp(usize, Vec<GTerm>),
    Cmp(CmpOp, GTerm, GTerm),
    Not(Box<GForm>),
    And(Vec<GForm>),
    Or(Vec<GForm>),
    Equiv(Box<GForm>, Box<GForm>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(super) enum Tri {
    F,
    U,
    T,
}

impl Tri {
    fn not(self) -> Tri {
        match self {
            Tri::F => Tri::T,
            Tri::U => Tri::U,
            Tri::T => Tri::F,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub(super) enum TV {
    Unknown,
    Undef,
    Val(Value),
}

pub(super) fn overflow(op: &str, a: i64, b: Option<i64>) -> SolveError {
    SolveError::Overflow {
        expr: match b {
            Some(b) => format!("{a} {op} {b}"),
            None => format!("-({a})"),
        },
    }
}

fn arith(op: ArithOp, a: &Value, b: &Value) -> Result<Value, SolveError> {
    let (Some(x), Some(y)) = (a.as_int(), b.as_int()) else {
        return Err(SolveError::Overflow {
            expr: format!("{a} {} {b} (non-integer operand)", op.symbol()),
        });
    };
    op.apply(x, y)
        .map(Value::Int)
        .ok_or_else(|| overflow(op.symbol(), x, Some(y)))
}

fn neg(a: &Value) -> Result<Value, SolveError> {
    let x = a.as_int().unwrap_or(0);
    x.checked_neg().map(Value::Int).ok_or_else(|| overflow("-", x, None))
}

/// Three-valued evaluation over a cell assignment.
pub(super) struct Eval<'a> {
    pub table: &'a Table,
    pub cells: &'a [Cell],
}

impl Eval<'_> {
    pub fn term(&self, t: &GTerm) -> Result<TV, SolveError> {
        Ok(match t {
            GTerm::Val(v) => TV::Val(v.clone()),
            GTerm::Undef => TV::Undef,
            GTerm::Point(p) => {
                let sym = self.table.sym_of(*p);
                match self.cells[*p] {
                    UNKNOWN => TV::Unknown,
                    UNDEF => TV::Undef,
                    c => TV::Val(self.table.value_of(sym, c).unwrap()),
                }
            }
            GTerm::App(sym, args) => match self.args(args)? {
                Err(tv) => tv,
                Ok(vals) => match self.table.point(*sym, &vals) {
                    None => TV::Undef,
                    Some(p) => self.term(&GTerm::Point(p))?,
                },
            },
            GTerm::Arith(op, a, b) => match (self.term(a)?, self.term(b)?) {
                (TV::Undef, _) | (_, TV::Undef) => TV::Undef,
                (TV::Val(x), TV::Val(y)) => TV::Val(arith(*op, &x, &y)?),
                _ => TV::Unknown,
            },
            GTerm::Neg(a) => match self.term(a)? {
                TV::Val(x) => TV::Val(neg(&x)?),
                other => other,
            },
            GTerm::Builtin(b, args) => match self.args(args)? {
                Err(tv) => tv,
                Ok(vals) => b.apply(&vals).map(TV::Val).unwrap_or(TV::Undef),
            },
        })
    }

    /// Evaluates arguments; `Err` carries `Undef` or `Unknown`.
    fn args(&self, args: &[GTerm]) -> Result<Result<Vec<Value>, TV>, SolveError> {
        let mut vals = Vec::with_capacity(args.len());
        let mut unknown = false;
        for a in args {
            match self.term(a)? {
                TV::Undef => return Ok(Err(TV::Undef)),
                TV::Unknown => unknown = true,
                TV::Val(v) => vals.push(v),
            }
        }
        Ok(if unknown { Err(TV::Unknown) } else { Ok(vals) })
    }

    pub fn form(&self, f: &GForm) -> Result<Tri, SolveError> {
        Ok(match f {
            GForm::Bool(b) => {
                if *b {
                    Tri::T
                } else {
                    Tri::F
                }
            }
            GForm::Atom(p) => match self.cells[*p] {
                UNKNOWN => Tri::U,
                0 => Tri::F,
                _ => Tri::T,
            },
            GForm::AtomApp(sym, args) => match self.args(args)? {
                Err(TV::Undef) => Tri::F,
                Err(_) => Tri::U,
                Ok(vals) => match self.table.point(*sym, &vals) {
                    None => Tri::F,
                    Some(p) => self.form(&GForm::Atom(p))?,
                },
            },
            GForm::Cmp(op, a, b) => match (self.term(a)?, self.term(b)?) {
                (TV::Undef, _) | (_, TV::Undef) => Tri::F,
                (TV::Val(x), TV::Val(y)) => {
                    if op.holds(&x, &y) {
                        Tri::T
                    } else {
                        Tri::F
                    }
                }
                _ => Tri::U,
            },
            GForm::Not(a) => self.form(a)?.not(),
            GForm::And(fs) => {
                let mut out = Tri::T;
                for f in fs {
                    match self.form(f)? {
                        Tri::F => return Ok(Tri::F),
                        Tri::U => out = Tri::U,
                        Tri::T => {}
                    }
                }
                out
            }
            GForm::Or(fs) => {
                let mut out = Tri::F;
                for f in fs {
                    match self.form(f)? {
                        Tri::T => return Ok(Tri::T),
                        Tri::U => out = Tri::U,
                        Tri::F => {}
                    }
                }
                out
            }
            GForm::Equiv(a, b) => match (self.form(a)?, self.form(b)?) {
                (Tri::U, _) | (_, Tri::U) => Tri::U,
                (x, y) => {
                    if x == y {
                        Tri::T
                    } else {
                        Tri::F
                    }
                }
            },
        })
    }
}

/// Instantiates quantifiers and folds fixed symbols.
pub(super) struct Grounder<'a> {
    pub table: &'a Table,
    pub cells: &'a [Cell],
    /// Per symbol: its cells are final.
    pub fixed: &'a [bool],
    pub env: Vec<(String, Value)>,
    pub size: usize,
}

impl Grounder<'_> {
    fn bump(&mut self) -> Result<(), SolveError> {
        self.size += 1;
        if self.size > MAX_GROUND {
            return Err(SolveError::GroundingTooLarge { size: self.size });
        }
        Ok(())
    }

    pub fn domain(&self, sort: &str) -> &[Value] {
        &self.table.sorts[self.table.sort_ids[sort]].values
    }

    pub fn term(&mut self, t: &Term) -> Result<GTerm, SolveError> {
        self.bump()?;
        Ok(match &t.kind {
            TermKind::Var(v) => match self.env.iter().rev().find(|(n, _)| *n == v.name) {
                Some((_, val)) => GTerm::Val(val.clone()),
                None => unreachable!("unbound variable {}", v.name),
            },
            TermKind::Const(v) => GTerm::Val(v.clone()),
            TermKind::App(f, args) => {
                let sym = self.table.sym_ids[f];
                let args = args.iter().map(|a| self.term(a)).collect::<Result<Vec<_>, _>>()?;
                self.app(sym, args)
            }
            TermKind::Arith(op, a, b) => {
                let a = self.term(a)?;
                let b = self.term(b)?;
                match (&a, &b) {
                    (GTerm::Undef, _) | (_, GTerm::Undef) => GTerm::Undef,
                    (GTerm::Val(x), GTerm::Val(y)) => GTerm::Val(arith(*op, x, y)?),
                    _ => GTerm::Arith(*op, Box::new(a), Box::new(b)),
                }
            }
            TermKind::Neg(a) => match self.term(a)? {
                GTerm::Val(x) => GTerm::Val(neg(&x)?),
                GTerm::Undef => GTerm::Undef,
                other => GTerm::Neg(Box::new(other)),
            },
            TermKind::Builtin(b, args) => {
                let args = args.iter().map(|a| self.term(a)).collect::<Result<Vec<_>, _>>()?;
                if args.contains(&GTerm::Undef) {
                    GTerm::Undef
                } else if args.iter().all(|a| matches!(a, GTerm::Val(_))) {
                    let vals: Vec<Value> = args
                        .into_iter()
                        .map(|a| match a {
                            GTerm::Val(v) => v,
                            _ => unreachable!(),
                        })
                        .collect();
                    b.apply(&vals).map(GTerm::Val).unwrap_or(GTerm::Undef)
                } else {
                    GTerm::Builtin(*b, args)
                }
            }
        })
    }

    fn app(&self, sym: usize, args: Vec<GTerm>) -> GTerm {
        if args.contains(&GTerm::Undef) {
            return GTerm::Undef;
        }
        if args.iter().all(|a| matches!(a, GTerm::Val(_))) {
            let vals: Vec<Value> = args
                .into_iter()
                .map(|a| match a {
                    GTerm::Val(v) => v,
                    _ => unreachable!(),
                })
                .collect();
            return match self.table.point(sym, &vals) {
                None => GTerm::Undef,
                Some(p) if self.fixed[sym] => match self.cells[p] {
                    UNDEF | UNKNOWN => GTerm::Undef,
                    c => GTerm::Val(self.table.value_of(sym, c).unwrap()),
                },
                Some(p) => GTerm::Point(p),
            };
        }
        GTerm::App(sym, args)
    }

    fn atom(&self, sym: usize, args: Vec<GTerm>) -> GForm {
        if args.contains(&GTerm::Undef) {
            return GForm::Bool(false);
        }
        if args.iter().all(|a| matches!(a, GTerm::Val(_))) {
            let vals: Vec<Value> = args
                .into_iter()
                .map(|a| match a {
                    GTerm::Val(v) => v,
                    _ => unreachable!(),
                })
                .collect();
            return match self.table.point(sym, &vals) {
                None => GForm::Bool(false),
                Some(p) if self.fixed[sym] => GForm::Bool(self.cells[p] == 1),
                Some(p) => GForm::Atom(p),
            };
        }
        GForm::AtomApp(sym, args)
    }

    pub fn form(&mut self, f: &Formula) -> Result<GForm, SolveError> {
        self.bump()?;
        Ok(match &f.kind {
            FormulaKind::Bool(b) => GForm::Bool(*b),
            FormulaKind::Atom(p, args) => {
                let sym = self.table.sym_ids[p];
                let args = args.iter().map(|a| self.term(a)).collect::<Result<Vec<_>, _>>()?;
                self.atom(sym, args)
            }
            FormulaKind::Cmp(op, a, b) => {
                let a = self.term(a)?;
                let b = self.term(b)?;
                match (&a, &b) {
                    (GTerm::Undef, _) | (_, GTerm::Undef) => GForm::Bool(false),
                    (GTerm::Val(x), GTerm::Val(y)) => GForm::Bool(op.holds(x, y)),
                    _ => GForm::Cmp(*op, a, b),
                }
            }
            FormulaKind::Not(a) => not(self.form(a)?),
            FormulaKind::And(a, b) => and(vec![self.form(a)?, self.form(b)?]),
            FormulaKind::Or(a, b) => or(vec![self.form(a)?, self.form(b)?]),
            FormulaKind::Implies(a, b) => or(vec![not(self.form(a)?), self.form(b)?]),
            FormulaKind::ImpliedBy(a, b) => or(vec![self.form(a)?, not(self.form(b)?)]),
            FormulaKind::Equiv(a, b) => {
                let a = self.form(a)?;
                let b = self.form(b)?;
                match (&a, &b) {
                    (GForm::Bool(x), GForm::Bool(y)) => GForm::Bool(x == y),
                    (GForm::Bool(true), _) => b,
                    (_, GForm::Bool(true)) => a,
                    (GForm::Bool(false), _) => not(b),
                    (_, GForm::Bool(false)) => not(a),
                    _ => GForm::Equiv(Box::new(a), Box::new(b)),
                }
            }
            FormulaKind::Forall(vs, body) => {
                let mut parts = Vec::new();
                self.quantify(vs, 0, body, &mut parts, false)?;
                and(parts)
            }
            FormulaKind::Exists(vs, body) => {
                let mut parts = Vec::new();
                self.quantify(vs, 0, body, &mut parts, true)?;
                or(parts)
            }
        })
    }

    fn quantify(
        &mut self,
        vs: &[crate::lang::Var],
        i: usize,
        body: &Formula,
        out: &mut Vec<GForm>,
        exists: bool,
    ) -> Result<(), SolveError> {
        if i == vs.len() {
            let g = self.form(body)?;
            out.push(g);
            return Ok(());
        }
        let values = self.domain(&vs[i].sort).to_vec();
        for v in values {
            self.env.push((vs[i].name.clone(), v));
            let r = self.quantify(vs, i + 1, body, out, exists);
            self.env.pop();
            r?;
            if out.last() == Some(&GForm::Bool(exists)) {
                return Ok(());
            }
        }
        Ok(())
    }
}

pub(super) fn not(f: GForm) -> GForm {
    match f {
        GForm::Bool(b) => GForm::Bool(!b),
        GForm::Not(a) => *a,
        other => GForm::Not(Box::new(other)),
    }
}

pub(super) fn and(parts: Vec<GForm>) -> GForm {
    let mut out = Vec::new();
    for p in parts {
        match p {
            GForm::Bool(true) => {}
            GForm::Bool(false) => return GForm::Bool(false),
            GForm::And(inner) => out.extend(inner),
            other => out.push(other),
        }
    }
    match out.len() {
        0 => GForm::Bool(true),
        1 => out.pop().unwrap(),
        _ => GForm::And(out),
    }
}

pub(super) fn or(parts: Vec<GForm>) -> GForm {
    let mut out = Vec::new();
    for p in parts {
        match p {
            GForm::Bool(false) => {}
            GForm::Bool(true) => return GForm::Bool(true),
            GForm::Or(inner) => out.extend(inner),
            other => out.push(other),
        }
    }
    match out.len() {
        0 => GForm::Bool(false),
        1 => out.pop().unwrap(),
        _ => GForm::Or(out),
    }
}

/// Cells a ground formula or term reads, with the polarity of each read:
/// `Some(true)` for a positive predicate atom, `Some(false)` for a negative
/// one and `None` for reads through function values or equivalences.
pub(super) fn reads_form(table: &Table, f: &GForm, pol: Option<bool>, out: &mut Vec<(usize, Option<bool>)>) {
    match f {
        GForm::Bool(_) => {}
        GForm::Atom(p) => out.push((*p, pol)),
        GForm::AtomApp(sym, args) => {
            let s = &table.syms[*sym];
            out.extend((s.base..s.base + s.size).map(|p| (p, pol)));
            args.iter().for_each(|a| reads_term(table, a, out));
        }
        GForm::Cmp(_, a, b) => {
            reads_term(table, a, out);
            reads_term(table, b, out);
        }
        GForm::Not(a) => reads_form(table, a, pol.map(|p| !p), out),
        GForm::And(fs) | GForm::Or(fs) => fs.iter().for_each(|f| reads_form(table, f, pol, out)),
        GForm::Equiv(a, b) => {
            reads_form(table, a, None, out);
            reads_form(table, b, None, out);
        }
    }
}

pub(super) fn reads_term(table: &Table, t: &GTerm, out: &mut Vec<(usize, Option<bool>)>) {
    match t {
        GTerm::Val(_) | GTerm::Undef => {}
        GTerm::Point(p) => out.push((*p, None)),
        GTerm::App(sym, args) => {
            let s = &table.syms[*sym];
            out.extend((s.base..s.base + s.size).map(|p| (p, None)));
            args.iter().for_each(|a| reads_term(table, a, out));
        }
        GTerm::Arith(_, a, b) => {
            reads_term(table, a, out);
            reads_term(table, b, out);
        }
        GTerm::Neg(a) => reads_term(table, a, out),
        GTerm::Builtin(_, args) => args.iter().for_each(|a| reads_term(table, a, out)),
    }
}
