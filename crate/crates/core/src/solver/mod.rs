//! Finite model expansion.
//!
//! [`modelexpand`] grounds a theory over the domains of a structure,
//! evaluates its (stratified) definitions and enumerates the two-valued
//! extensions that satisfy every sentence. [`satisfies`] is an independent
//! checker that evaluates the theory directly on a structure.

mod defs;
mod domain;
mod eval;
mod ground;
mod search;

use std::sync::Arc;

use thiserror::Error;

use crate::lang::{Definition, Theory};
use crate::model::{ModelError, Structure, Vocabulary};

pub use eval::satisfies;

/// Default search budget in branch nodes.
pub const DEFAULT_NODE_BUDGET: u64 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolveOptions {
    /// Maximum number of models; `None` enumerates all of them.
    pub nbmodels: Option<usize>,
    pub node_budget: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            nbmodels: Some(1),
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }
}

impl SolveOptions {
    pub fn all() -> Self {
        SolveOptions {
            nbmodels: None,
            ..Default::default()
        }
    }

    pub fn with_nbmodels(n: usize) -> Self {
        SolveOptions {
            nbmodels: Some(n),
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelSet {
    pub models: Vec<Structure>,
    /// False if the search stopped at the model limit or the node budget.
    pub exhausted: bool,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("definition of {} is not stratified", symbols.join(", "))]
    UnstratifiedDefinition { symbols: Vec<String> },
    #[error("sort `{sort}` has no values: interpret it in the structure")]
    EmptySortDomain { sort: String },
    #[error("sort `{sort}` is not interpreted and its values cannot be bounded")]
    UnboundedSort { sort: String },
    #[error("search budget of {budget} nodes exceeded after {} model(s)", partial.models.len())]
    Timeout { budget: u64, partial: ModelSet },
    #[error("two rules give `{symbol}{args}` different values {first} and {second}")]
    FunctionConflict {
        symbol: String,
        args: String,
        first: String,
        second: String,
    },
    #[error("no rule defines `{symbol}{args}`, but `{symbol}` is not partial")]
    PartialityViolation { symbol: String, args: String },
    #[error("rule gives `{symbol}{args}` the value {value}, which is outside its sort")]
    ValueOutOfDomain {
        symbol: String,
        args: String,
        value: String,
    },
    #[error("integer overflow in {expr}")]
    Overflow { expr: String },
    #[error("`{symbol}` is not fully interpreted")]
    NotTwoValued { symbol: String },
    #[error("the structure interprets `{symbol}{args}` differently from its definition")]
    DefinitionMismatch { symbol: String, args: String },
    #[error("vocabulary mismatch on `{symbol}`: {detail}")]
    VocabularyMismatch { symbol: String, detail: String },
    #[error("`{symbol}` is not partial but the structure leaves some of its points undefined")]
    PartialInterpretation { symbol: String },
    #[error("the arguments of rule head `{symbol}` must be determined by the structure")]
    OpenHeadArgument { symbol: String },
    #[error("rule head `{symbol}{args}` is outside the domain of `{symbol}`")]
    HeadOutOfDomain { symbol: String, args: String },
    #[error("grounding is too large ({size} ground atoms or nodes)")]
    GroundingTooLarge { size: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Enumerates up to `opts.nbmodels` models of `t` extending `s`.
pub fn modelexpand(t: &Theory, s: &Structure, opts: SolveOptions) -> Result<ModelSet, SolveError> {
    search::Problem::new(t, s)?.solve(opts)
}

/// The inconsistency, if any, that the definitions of `t` already have on
/// the fixed part of `s`, before any search.
pub fn definition_conflict(t: &Theory, s: &Structure) -> Result<Option<SolveError>, SolveError> {
    Ok(search::Problem::new(t, s)?.inconsistency())
}

/// The first model in canonical order, if any.
pub fn onemodel(t: &Theory, s: &Structure, opts: SolveOptions) -> Result<Option<Structure>, SolveError> {
    let opts = SolveOptions {
        nbmodels: Some(1),
        ..opts
    };
    Ok(modelexpand(t, s, opts)?.models.into_iter().next())
}

/// Computes the defined symbols of `d` from a context that interprets
/// every other symbol it mentions.
pub fn evaluate_definition(
    d: &Definition,
    vocabulary: &Arc<Vocabulary>,
    context: &Structure,
) -> Result<Structure, SolveError> {
    let mut t = Theory::empty("definition", vocabulary.clone());
    t.definitions.push(d.clone());
    let mut ctx = context.clone();
    for sym in d.defined() {
        ctx.unset(&sym);
    }
    for sym in t.mentioned_symbols() {
        if !d.defined().contains(&sym) && !ctx.is_specified(&sym) && vocabulary.sort(&sym).is_none() {
            return Err(SolveError::NotTwoValued { symbol: sym });
        }
    }
    search::Problem::new(&t, &ctx)?.evaluate_definitions()
}

#[cfg(test)]
mod tests;
