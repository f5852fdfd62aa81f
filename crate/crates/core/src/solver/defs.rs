//! Ground definitions and their three-valued evaluation.
//!
//! Defined cells are split into strongly connected components of the
//! ground dependency graph. Components are evaluated dependencies first: a
//! non-recursive cell from its rule bodies, a recursive component of
//! predicates by a least fixpoint over possibly and certainly true atoms.

use std::collections::{BTreeSet, HashMap};

use super::ground::{self, Cell, Eval, GForm, GTerm, Table, Tri, TV, UNDEF, UNKNOWN};
use super::SolveError;
use crate::model::Value;

#[derive(Clone, Debug)]
pub(super) struct GRule {
    pub cell: usize,
    /// The head value of a function rule.
    pub value: Option<GTerm>,
    pub body: GForm,
}

struct Component {
    cells: Vec<usize>,
    recursive: bool,
}

pub(super) struct Defs {
    rules: Vec<GRule>,
    by_cell: HashMap<usize, Vec<usize>>,
    components: Vec<Component>,
    /// Every cell of every defined symbol, including cells without rules.
    pub cells: Vec<usize>,
}

impl Defs {
    /// `syms` are the defined symbols whose cells these rules compute.
    pub fn new(table: &Table, syms: &[usize], rules: Vec<GRule>) -> Result<Defs, SolveError> {
        let mut cells = Vec::new();
        for &s in syms {
            let sym = &table.syms[s];
            cells.extend(sym.base..sym.base + sym.size);
        }
        let index: HashMap<usize, usize> = cells.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let mut by_cell: HashMap<usize, Vec<usize>> = HashMap::new();
        for (i, r) in rules.iter().enumerate() {
            by_cell.entry(r.cell).or_default().push(i);
        }

        // Edges from a defined cell to the defined cells its rules read.
        let mut edges: Vec<Vec<(usize, Option<bool>)>> = vec![Vec::new(); cells.len()];
        for r in &rules {
            let mut reads = Vec::new();
            ground::reads_form(table, &r.body, Some(true), &mut reads);
            if let Some(v) = &r.value {
                ground::reads_term(table, v, &mut reads);
            }
            let from = index[&r.cell];
            for (c, pol) in reads {
                if let Some(&to) = index.get(&c) {
                    edges[from].push((to, pol));
                }
            }
        }
        for e in &mut edges {
            e.sort_unstable();
            e.dedup();
        }

        let sccs = components(&edges);
        let mut comp_of = vec![0usize; cells.len()];
        for (i, scc) in sccs.iter().enumerate() {
            for &n in scc {
                comp_of[n] = i;
            }
        }
        let mut components = Vec::with_capacity(sccs.len());
        for (i, scc) in sccs.iter().enumerate() {
            let recursive = scc.len() > 1 || edges[scc[0]].iter().any(|&(to, _)| to == scc[0]);
            if recursive {
                let bad = scc.iter().any(|&n| {
                    !table.syms[table.sym_of(cells[n])].is_pred
                        || edges[n].iter().any(|&(to, pol)| comp_of[to] == i && pol != Some(true))
                });
                if bad {
                    let symbols: BTreeSet<String> = scc
                        .iter()
                        .map(|&n| table.syms[table.sym_of(cells[n])].name.clone())
                        .collect();
                    return Err(SolveError::UnstratifiedDefinition {
                        symbols: symbols.into_iter().collect(),
                    });
                }
            }
            let mut cs: Vec<usize> = scc.iter().map(|&n| cells[n]).collect();
            cs.sort_unstable();
            components.push(Component { cells: cs, recursive });
        }
        Ok(Defs {
            rules,
            by_cell,
            components,
            cells,
        })
    }

    pub fn reset(&self, cells: &mut [Cell]) {
        for &c in &self.cells {
            cells[c] = UNKNOWN;
        }
    }

    /// Evaluates every component into `cells`. `Ok(Err(e))` is a certain
    /// inconsistency: no extension of the current cells satisfies the
    /// definitions.
    pub fn evaluate(&self, table: &Table, cells: &mut [Cell]) -> Result<Result<(), SolveError>, SolveError> {
        for comp in &self.components {
            if comp.recursive {
                self.fixpoint(table, cells, &comp.cells)?;
            } else {
                let c = comp.cells[0];
                let v = match self.single(table, cells, c)? {
                    Ok(v) => v,
                    Err(e) => return Ok(Err(e)),
                };
                cells[c] = v;
            }
        }
        Ok(Ok(()))
    }

    fn rules_of(&self, cell: usize) -> impl Iterator<Item = &GRule> {
        self.by_cell.get(&cell).into_iter().flatten().map(|&i| &self.rules[i])
    }

    fn single(&self, table: &Table, cells: &[Cell], cell: usize) -> Result<Result<Cell, SolveError>, SolveError> {
        let ev = Eval { table, cells };
        let sym = table.sym_of(cell);
        let info = &table.syms[sym];
        if info.is_pred {
            let mut out = Tri::F;
            for r in self.rules_of(cell) {
                match ev.form(&r.body)? {
                    Tri::T => {
                        out = Tri::T;
                        break;
                    }
                    Tri::U => out = Tri::U,
                    Tri::F => {}
                }
            }
            return Ok(Ok(match out {
                Tri::T => 1,
                Tri::F => 0,
                Tri::U => UNKNOWN,
            }));
        }

        let out_sort = &table.sorts[info.out.expect("function")];
        let describe = || Table::describe_args(&table.args_of(cell).1);
        let mut certain: Option<Value> = None;
        let mut possible = false;
        for r in self.rules_of(cell) {
            let b = ev.form(&r.body)?;
            if b == Tri::F {
                continue;
            }
            let v = ev.term(r.value.as_ref().expect("function rule"))?;
            match (b, v) {
                (_, TV::Undef) => {}
                (Tri::T, TV::Val(v)) => {
                    if out_sort.index_of(&v).is_none() {
                        return Ok(Err(SolveError::ValueOutOfDomain {
                            symbol: info.name.clone(),
                            args: describe(),
                            value: crate::lang::print::value(&v),
                        }));
                    }
                    match &certain {
                        Some(w) if *w != v => {
                            let (a, b) = if *w < v { (w.clone(), v) } else { (v, w.clone()) };
                            return Ok(Err(SolveError::FunctionConflict {
                                symbol: info.name.clone(),
                                args: describe(),
                                first: crate::lang::print::value(&a),
                                second: crate::lang::print::value(&b),
                            }));
                        }
                        _ => certain = Some(v),
                    }
                }
                _ => possible = true,
            }
        }
        Ok(Ok(match certain {
            Some(v) => out_sort.index_of(&v).unwrap(),
            None if possible => UNKNOWN,
            None if info.partial => UNDEF,
            None => {
                return Ok(Err(SolveError::PartialityViolation {
                    symbol: info.name.clone(),
                    args: describe(),
                }))
            }
        }))
    }

    /// Least fixpoints of certainly and possibly true atoms of a positive
    /// recursive component.
    fn fixpoint(&self, table: &Table, cells: &mut [Cell], comp: &[usize]) -> Result<(), SolveError> {
        // Certainly true: bodies true when the component holds only what is derived so far.
        let ct = self.lfp(table, cells, comp, |t| t == Tri::T)?;
        // Possibly true: bodies not false under the same reading.
        let pt = self.lfp(table, cells, comp, |t| t != Tri::F)?;
        for (i, &c) in comp.iter().enumerate() {
            cells[c] = if ct[i] {
                1
            } else if pt[i] {
                UNKNOWN
            } else {
                0
            };
        }
        Ok(())
    }

    fn lfp(
        &self,
        table: &Table,
        cells: &mut [Cell],
        comp: &[usize],
        fires: impl Fn(Tri) -> bool,
    ) -> Result<Vec<bool>, SolveError> {
        let mut state = vec![false; comp.len()];
        for &c in comp {
            cells[c] = 0;
        }
        loop {
            let mut changed = false;
            for (i, &c) in comp.iter().enumerate() {
                if state[i] {
                    continue;
                }
                let ev = Eval { table, cells };
                let mut hit = false;
                for r in self.rules_of(c) {
                    if fires(ev.form(&r.body)?) {
                        hit = true;
                        break;
                    }
                }
                if hit {
                    state[i] = true;
                    cells[c] = 1;
                    changed = true;
                }
            }
            if !changed {
                return Ok(state);
            }
        }
    }
}

/// Strongly connected components, each emitted after the components it
/// points to.
pub(super) fn components(edges: &[Vec<(usize, Option<bool>)>]) -> Vec<Vec<usize>> {
    let n = edges.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut out = Vec::new();
    let mut next = 0usize;
    // Explicit call stack of (node, next edge position).
    let mut calls: Vec<(usize, usize)> = Vec::new();
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        calls.push((root, 0));
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(top) = calls.last_mut() {
            let v = top.0;
            if top.1 < edges[v].len() {
                let w = edges[v][top.1].0;
                top.1 += 1;
                if index[w] == usize::MAX {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    calls.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            calls.pop();
            if let Some(&(parent, _)) = calls.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut scc = Vec::new();
                loop {
                    let w = stack.pop().unwrap();
                    on_stack[w] = false;
                    scc.push(w);
                    if w == v {
                        break;
                    }
                }
                out.push(scc);
            }
        }
    }
    out
}
