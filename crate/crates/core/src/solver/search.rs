//! Problem setup and depth-first enumeration of models.

use std::collections::{HashMap, HashSet};

use super::defs::{Defs, GRule};
use super::ground::{Cell, Eval, GForm, GTerm, Grounder, Table, Tri, UNDEF, UNKNOWN};
use super::{domain, ModelSet, SolveError, SolveOptions};
use crate::lang::{Head, Rule, Theory};
use crate::model::{Interp, Structure};

pub(super) struct Problem<'a> {
    s: &'a Structure,
    table: Table,
    cells: Vec<Cell>,
    fixed: Vec<bool>,
    /// Definitions that depend on open symbols, evaluated at every node.
    deferred: Option<Defs>,
    /// Values the structure gives to defined symbols.
    expected: Vec<(usize, Cell)>,
    sentences: Vec<GForm>,
    /// Open cells in branching order.
    open: Vec<usize>,
    /// Set when the definitions or sentences fail before any search.
    inconsistent: Option<SolveError>,
}

impl<'a> Problem<'a> {
    pub fn new(t: &Theory, s: &'a Structure) -> Result<Problem<'a>, SolveError> {
        for d in t.vocabulary.decls() {
            match s.vocabulary.get(d.name()) {
                None => {
                    return Err(SolveError::VocabularyMismatch {
                        symbol: d.name().to_string(),
                        detail: format!(
                            "not declared in the vocabulary `{}` of the structure",
                            s.vocabulary.name
                        ),
                    })
                }
                Some(e) if e != d => {
                    return Err(SolveError::VocabularyMismatch {
                        symbol: d.name().to_string(),
                        detail: "declared differently in theory and structure".into(),
                    })
                }
                Some(_) => {}
            }
        }
        s.validate()?;
        let domains = domain::infer(t, s)?;
        let table = Table::new(&s.vocabulary, domains)?;
        let mut cells = vec![UNKNOWN; table.ncells];
        let mut fixed = vec![false; table.syms.len()];
        table.load(s, &mut cells, &mut fixed)?;

        let mut defined: Vec<usize> = Vec::new();
        for name in t.defined_symbols() {
            let id = table.sym_ids[&name];
            if !defined.contains(&id) {
                defined.push(id);
            }
        }
        let mut expected = Vec::new();
        for &id in &defined {
            let sym = &table.syms[id];
            if fixed[id] {
                let range = sym.base..sym.base + sym.size;
                expected.extend(range.clone().zip(cells[range].iter().copied()));
            }
            fixed[id] = false;
            cells[sym.base..sym.base + sym.size].fill(UNKNOWN);
        }

        let mut p = Problem {
            s,
            table,
            cells,
            fixed,
            deferred: None,
            expected,
            sentences: Vec::new(),
            open: Vec::new(),
            inconsistent: None,
        };
        p.prepare(t, &defined)?;
        Ok(p)
    }

    fn prepare(&mut self, t: &Theory, defined: &[usize]) -> Result<(), SolveError> {
        // Rules grouped by the symbol they define.
        let mut rules_of: HashMap<usize, Vec<&Rule>> = HashMap::new();
        for d in &t.definitions {
            for r in &d.rules {
                rules_of.entry(self.table.sym_ids[r.head.symbol()]).or_default().push(r);
            }
        }
        let deps: Vec<Vec<usize>> = defined
            .iter()
            .map(|id| {
                let mut out = Vec::new();
                for r in &rules_of[id] {
                    let mut add = |s: &str| {
                        if let Some(&d) = self.table.sym_ids.get(s) {
                            out.push(d);
                        }
                    };
                    for a in r.head.args() {
                        a.for_each_symbol(&mut add);
                    }
                    if let Head::Func(_, _, v) = &r.head {
                        v.for_each_symbol(&mut add);
                    }
                    r.body.for_each_symbol(&mut add);
                }
                out
            })
            .collect();
        let pos: HashMap<usize, usize> = defined.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let edges: Vec<Vec<(usize, Option<bool>)>> = deps
            .iter()
            .map(|ds| ds.iter().filter_map(|d| pos.get(d)).map(|&i| (i, None)).collect())
            .collect();

        let mut late: Vec<usize> = Vec::new();
        for scc in super::defs::components(&edges) {
            let syms: Vec<usize> = scc.iter().map(|&i| defined[i]).collect();
            let closed = scc
                .iter()
                .all(|&i| deps[i].iter().all(|d| self.fixed[*d] || syms.contains(d)));
            if !closed {
                late.extend(syms);
                continue;
            }
            let rules = self.ground_rules(&syms, &rules_of)?;
            let defs = Defs::new(&self.table, &syms, rules)?;
            defs.reset(&mut self.cells);
            if let Err(e) = defs.evaluate(&self.table, &mut self.cells)? {
                self.inconsistent.get_or_insert(e);
            }
            for &id in &syms {
                self.fixed[id] = true;
            }
        }
        if self.inconsistent.is_some() {
            return Ok(());
        }
        if let Some(&(c, _)) = self
            .expected
            .iter()
            .find(|&&(c, want)| self.cells[c] != UNKNOWN && self.cells[c] != want)
        {
            let (sym, args) = self.table.args_of(c);
            self.inconsistent = Some(SolveError::DefinitionMismatch {
                symbol: self.table.syms[sym].name.clone(),
                args: Table::describe_args(&args),
            });
            return Ok(());
        }

        if !late.is_empty() {
            let rules = self.ground_rules(&late, &rules_of)?;
            self.deferred = Some(Defs::new(&self.table, &late, rules)?);
        }

        let mut g = self.grounder();
        let mut sentences = Vec::new();
        for f in &t.sentences {
            match g.form(f)? {
                GForm::Bool(true) => {}
                other => sentences.push(other),
            }
        }
        self.sentences = sentences;

        let defined_late: HashSet<usize> = late.iter().copied().collect();
        for (id, sym) in self.table.syms.iter().enumerate() {
            if !self.fixed[id] && !defined_late.contains(&id) {
                self.open.extend(sym.base..sym.base + sym.size);
            }
        }
        Ok(())
    }

    fn grounder(&self) -> Grounder<'_> {
        Grounder {
            table: &self.table,
            cells: &self.cells,
            fixed: &self.fixed,
            env: Vec::new(),
            size: 0,
        }
    }

    fn ground_rules(&self, syms: &[usize], rules_of: &HashMap<usize, Vec<&Rule>>) -> Result<Vec<GRule>, SolveError> {
        let mut out = Vec::new();
        let mut g = self.grounder();
        for id in syms {
            for r in &rules_of[id] {
                ground_rule(&mut g, r, 0, &mut out)?;
            }
        }
        Ok(out)
    }

    fn check_expected(&self) -> bool {
        self.expected
            .iter()
            .all(|&(c, want)| self.cells[c] == UNKNOWN || self.cells[c] == want)
    }

    /// Runs the definitions and sentences on the current cells. False if
    /// this branch has no models.
    fn consistent(&mut self) -> Result<bool, SolveError> {
        if let Some(defs) = &self.deferred {
            defs.reset(&mut self.cells);
            if defs.evaluate(&self.table, &mut self.cells)?.is_err() {
                return Ok(false);
            }
        }
        if !self.check_expected() {
            return Ok(false);
        }
        let ev = Eval {
            table: &self.table,
            cells: &self.cells,
        };
        for f in &self.sentences {
            if ev.form(f)? == Tri::F {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn solve(mut self, opts: SolveOptions) -> Result<ModelSet, SolveError> {
        let mut found = ModelSet {
            models: Vec::new(),
            exhausted: true,
        };
        if self.inconsistent.is_some() || opts.nbmodels == Some(0) {
            found.exhausted = self.inconsistent.is_some();
            return Ok(found);
        }
        let mut nodes = 0u64;
        let done = self.dfs(0, &opts, &mut nodes, &mut found)?;
        match done {
            Stop::Budget => {
                found.exhausted = false;
                Err(SolveError::Timeout {
                    budget: opts.node_budget,
                    partial: found,
                })
            }
            Stop::Limit => {
                found.exhausted = false;
                Ok(found)
            }
            Stop::No => Ok(found),
        }
    }

    fn dfs(
        &mut self,
        i: usize,
        opts: &SolveOptions,
        nodes: &mut u64,
        found: &mut ModelSet,
    ) -> Result<Stop, SolveError> {
        *nodes += 1;
        if *nodes > opts.node_budget {
            return Ok(Stop::Budget);
        }
        if !self.consistent()? {
            return Ok(Stop::No);
        }
        if i == self.open.len() {
            let ev = Eval {
                table: &self.table,
                cells: &self.cells,
            };
            for f in &self.sentences {
                if ev.form(f)? != Tri::T {
                    return Ok(Stop::No);
                }
            }
            if self.cells.contains(&UNKNOWN) {
                return Ok(Stop::No);
            }
            let m = self.model(format!("M{}", found.models.len() + 1));
            found.models.push(m);
            if opts.nbmodels.is_some_and(|n| found.models.len() >= n) {
                return Ok(Stop::Limit);
            }
            return Ok(Stop::No);
        }
        let cell = self.open[i];
        let sym = &self.table.syms[self.table.sym_of(cell)];
        let mut choices: Vec<Cell> = Vec::new();
        if sym.is_pred {
            choices.extend([0, 1]);
        } else {
            if sym.partial {
                choices.push(UNDEF);
            }
            let n = self.table.sorts[sym.out.unwrap()].values.len() as Cell;
            choices.extend(0..n);
        }
        for c in choices {
            self.cells[cell] = c;
            let r = self.dfs(i + 1, opts, nodes, found)?;
            if r != Stop::No {
                self.cells[cell] = UNKNOWN;
                return Ok(r);
            }
        }
        self.cells[cell] = UNKNOWN;
        Ok(Stop::No)
    }

    fn model(&self, name: String) -> Structure {
        let mut m = Structure::new(name, self.s.vocabulary.clone());
        for sort in &self.table.sorts {
            m.set(sort.name.clone(), Interp::Sort(sort.values.clone()));
        }
        for id in 0..self.table.syms.len() {
            m.set(self.table.syms[id].name.clone(), self.table.interp(id, &self.cells));
        }
        reorder_like(&m, self.s)
    }

    pub fn inconsistency(self) -> Option<SolveError> {
        self.inconsistent
    }

    /// The context structure extended with the values of its defined
    /// symbols. Every symbol the definitions read must be interpreted.
    pub fn evaluate_definitions(self) -> Result<Structure, SolveError> {
        if let Some(e) = self.inconsistent {
            return Err(e);
        }
        if let Some(defs) = &self.deferred {
            let c = defs.cells[0];
            return Err(SolveError::NotTwoValued {
                symbol: self.table.syms[self.table.sym_of(c)].name.clone(),
            });
        }
        let mut out = self.s.clone();
        for (id, sym) in self.table.syms.iter().enumerate() {
            if !self.s.is_specified(&sym.name) && self.fixed[id] {
                out.set(sym.name.clone(), self.table.interp(id, &self.cells));
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Stop {
    No,
    Limit,
    Budget,
}

/// Symbols in vocabulary declaration order.
fn reorder_like(m: &Structure, s: &Structure) -> Structure {
    let mut out = Structure::new(m.name.clone(), s.vocabulary.clone());
    for d in s.vocabulary.decls() {
        if let Some(i) = m.get(d.name()) {
            out.set(d.name().to_string(), i.clone());
        }
    }
    out
}

fn ground_rule(g: &mut Grounder<'_>, r: &Rule, i: usize, out: &mut Vec<GRule>) -> Result<(), SolveError> {
    if i < r.vars.len() {
        let values = g.domain(&r.vars[i].sort).to_vec();
        for v in values {
            g.env.push((r.vars[i].name.clone(), v));
            let res = ground_rule(g, r, i + 1, out);
            g.env.pop();
            res?;
        }
        return Ok(());
    }
    let body = g.form(&r.body)?;
    if body == GForm::Bool(false) {
        return Ok(());
    }
    let sym = g.table.sym_ids[r.head.symbol()];
    let mut args = Vec::new();
    for a in r.head.args() {
        match g.term(a)? {
            GTerm::Val(v) => args.push(v),
            GTerm::Undef => return Ok(()),
            _ => {
                return Err(SolveError::OpenHeadArgument {
                    symbol: r.head.symbol().to_string(),
                })
            }
        }
    }
    let Some(cell) = g.table.point(sym, &args) else {
        return Err(SolveError::HeadOutOfDomain {
            symbol: r.head.symbol().to_string(),
            args: Table::describe_args(&args),
        });
    };
    let value = match &r.head {
        Head::Func(_, _, v) => Some(g.term(v)?),
        Head::Pred(..) => None,
    };
    out.push(GRule { cell, value, body });
    Ok(())
}
