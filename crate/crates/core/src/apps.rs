//! The composite applications: visualising a model, comparing two
//! theories, and the interactive simulation loop.
//!
//! The simulation is a pure state machine. Each step merges the current
//! snapshot with the input structure and the clicks, expands the input
//! theory to find the chosen actions, progresses to the next state and
//! renders it with the output theory.

use std::sync::Arc;

use log::{debug, info};
use thiserror::Error;

use crate::inputdecode::{ClickEvent, DecodeError};
use crate::lang::{LangError, Program, Theory};
use crate::ltc::{self, LtcError, LtcTheory, Snapshot};
use crate::model::{merge, Interp, ModelError, Structure, Value, Vocabulary};
use crate::solver::{self, SolveError, SolveOptions};
use crate::vizencode::{self, DrawingSpec, VizError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AppError {
    #[error(transparent)]
    Lang(#[from] LangError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Ltc(#[from] LtcError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Viz(#[from] VizError),
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error("the visualisation theory has no model over this structure")]
    NoVisualisationModel,
    #[error("the progression theory has no initial state")]
    NoInitialState,
    #[error("click at time {got} does not match the displayed frame time {expected:?}")]
    StaleClick { expected: Option<i64>, got: i64 },
    #[error("the input theory leaves action `{symbol}` undetermined")]
    AmbiguousAction { symbol: String },
    #[error("the simulation has finished")]
    Finished,
    #[error("no {kind} named {name}")]
    MissingObject { kind: &'static str, name: String },
}

fn restrict(s: &Structure, voc: &Arc<Vocabulary>) -> Structure {
    let mut out = s.with_vocabulary(voc.clone());
    out.name = s.name.clone();
    out
}

/// Expands `t_vis` over `m` merged with `s_out` and encodes the first model.
pub fn visualise_model(
    t_vis: &Theory,
    m: &Structure,
    s_out: &Structure,
    opts: SolveOptions,
) -> Result<DrawingSpec, AppError> {
    let merged = merge(m, s_out)?;
    let ctx = restrict(&merged, &t_vis.vocabulary);
    let model = solver::onemodel(t_vis, &ctx, opts)?.ok_or(AppError::NoVisualisationModel)?;
    Ok(vizencode::encode(&model)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Counterexample,
    Matching,
    EquivalentUpToBound,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompareResult {
    pub verdict: Verdict,
    pub witness: Option<Structure>,
    /// Models of the first theory examined.
    pub checked: usize,
}

/// Looks among the first `bound` models of `t_user` over `s` for one that
/// `t_corr` rejects, and draws the witness (or a matching model) with `t_vis`.
pub fn compare_theories(
    t_user: &Theory,
    t_corr: &Theory,
    t_vis: &Theory,
    s: &Structure,
    s_out: &Structure,
    bound: usize,
    opts: SolveOptions,
) -> Result<(CompareResult, DrawingSpec), AppError> {
    let models = solver::modelexpand(
        t_user,
        s,
        SolveOptions {
            nbmodels: Some(bound),
            ..opts
        },
    )?
    .models;
    let mut checked = 0;
    for m in &models {
        checked += 1;
        if !accepts(t_corr, m, opts)? {
            let spec = visualise_model(t_vis, m, s_out, opts)?;
            let result = CompareResult {
                verdict: Verdict::Counterexample,
                witness: Some(m.clone()),
                checked,
            };
            return Ok((result, spec));
        }
    }
    match models.into_iter().next() {
        Some(first) => {
            let spec = visualise_model(t_vis, &first, s_out, opts)?;
            Ok((
                CompareResult {
                    verdict: Verdict::Matching,
                    witness: Some(first),
                    checked,
                },
                spec,
            ))
        }
        None => Ok((
            CompareResult {
                verdict: Verdict::EquivalentUpToBound,
                witness: None,
                checked: 0,
            },
            DrawingSpec::default(),
        )),
    }
}

/// Whether `m` satisfies `t`. Symbols of `t` that `m` leaves open, such
/// as helper functions of a definition, may take any value.
fn accepts(t: &Theory, m: &Structure, opts: SolveOptions) -> Result<bool, AppError> {
    match solver::satisfies(t, m) {
        Ok(b) => Ok(b),
        Err(SolveError::NotTwoValued { .. }) => Ok(solver::onemodel(t, &restrict(m, &t.vocabulary), opts)?.is_some()),
        Err(e) => Err(e.into()),
    }
}

/// The nine objects of an interactive simulation.
#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub t_prog: Theory,
    pub s_init: Structure,
    /// The state symbols the output theory may see.
    pub v_state: Arc<Vocabulary>,
    pub t_out: Theory,
    pub s_out: Structure,
    pub v_out: Arc<Vocabulary>,
    pub t_in: Theory,
    pub s_in: Structure,
    pub v_in: Arc<Vocabulary>,
    pub ltc: LtcTheory,
    pub opts: SolveOptions,
    /// Caps the candidate states enumerated per step; `None` enumerates all.
    /// Under a cap the adopted state is the canonical first of the enumerated prefix.
    pub max_candidates: Option<usize>,
}

fn pick<'a, T>(
    sim: Option<&crate::lang::Simulation>,
    role: &str,
    defaults: &[&str],
    kind: &'static str,
    get: impl Fn(&str) -> Option<&'a T>,
) -> Result<&'a T, AppError> {
    let names: Vec<&str> = match sim.and_then(|s| s.get(role)) {
        Some(n) => vec![n],
        None => defaults.to_vec(),
    };
    for n in &names {
        if let Some(x) = get(n) {
            return Ok(x);
        }
    }
    Err(AppError::MissingObject {
        kind,
        name: names.first().copied().unwrap_or(role).to_string(),
    })
}

impl SimConfig {
    /// Finds the nine objects in a program: through its first `simulation`
    /// block, or by the conventional names `T`, `S`, `V_state_ss`, `T_out`,
    /// `S_out` or `S_d3`, `T_in`, `S_in` or `S_d3`.
    pub fn from_program(p: &Program, opts: SolveOptions) -> Result<SimConfig, AppError> {
        let sim = p.simulations.values().next();
        let theory = |n: &str| p.theories.get(n);
        let structure = |n: &str| p.structures.get(n);
        let t_prog = pick(sim, "T", &["T"], "theory", theory)?.clone();
        let s_init = pick(sim, "S", &["S"], "structure", structure)?.clone();
        let t_out = pick(sim, "T_out", &["T_out"], "theory", theory)?.clone();
        let s_out = pick(sim, "S_out", &["S_out", "S_d3"], "structure", structure)?.clone();
        let t_in = pick(sim, "T_in", &["T_in"], "theory", theory)?.clone();
        let s_in = pick(sim, "S_in", &["S_in", "S_d3"], "structure", structure)?.clone();
        let ltc = ltc::split_ltc(&t_prog)?;

        let vocabulary = |n: &str| -> Option<Arc<Vocabulary>> {
            p.vocabulary(n).or_else(|| {
                let base = p.vocabulary(n.strip_suffix("_ss")?)?;
                ltc::single_state_vocabulary(&base).ok().map(Arc::new)
            })
        };
        let role_voc =
            |role: &str, default: Option<&str>, fallback: Arc<Vocabulary>| -> Result<Arc<Vocabulary>, AppError> {
                match sim.and_then(|s| s.get(role)).or(default) {
                    Some(n) => match vocabulary(n) {
                        Some(v) => Ok(v),
                        None if sim.and_then(|s| s.get(role)).is_some() => Err(AppError::MissingObject {
                            kind: "vocabulary",
                            name: n.to_string(),
                        }),
                        None => Ok(fallback),
                    },
                    None => Ok(fallback),
                }
            };
        let v_state = role_voc("V_state", Some("V_state_ss"), ltc.single_state.clone())?;
        let v_out = role_voc("V_out", None, t_out.vocabulary.clone())?;
        let v_in = role_voc("V_in", None, t_in.vocabulary.clone())?;
        Ok(SimConfig {
            t_prog,
            s_init,
            v_state,
            t_out,
            s_out,
            v_out,
            t_in,
            s_in,
            v_in,
            ltc,
            opts,
            max_candidates: None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimStatus {
    AwaitingInput,
    Finished,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimState {
    pub snapshot: Snapshot,
    pub last_spec: DrawingSpec,
    pub status: SimStatus,
    /// Every candidate of the last initialise or progress call; the
    /// snapshot is the first.
    pub candidates: Vec<Snapshot>,
}

impl SimState {
    /// The time of the frame on display; clicks must carry it.
    pub fn frame_time(&self) -> Option<i64> {
        self.last_spec.animation.last().map(|f| f.time)
    }
}

/// Renders a snapshot with the output theory.
pub fn view(cfg: &SimConfig, snap: &Snapshot) -> Result<DrawingSpec, AppError> {
    let visible = restrict_symbols(&snap.structure, &cfg.v_state);
    let merged = merge(&visible, &cfg.s_out)?;
    let ctx = restrict(&merged, &cfg.v_out);
    let t = &cfg.t_out;
    let ctx = restrict(&ctx, &t.vocabulary);
    let model = solver::onemodel(t, &ctx, cfg.opts)?.ok_or(AppError::NoVisualisationModel)?;
    Ok(vizencode::encode(&model)?)
}

/// Keeps the interpretations of the symbols `voc` declares, and the vocabulary.
fn restrict_symbols(s: &Structure, voc: &Vocabulary) -> Structure {
    let mut out = Structure::new(s.name.clone(), s.vocabulary.clone());
    for (n, i) in s.interps() {
        if voc.contains(n) {
            out.set(n.to_string(), i.clone());
        }
    }
    out
}

pub fn sim_init(cfg: &SimConfig) -> Result<SimState, AppError> {
    let opts = SolveOptions {
        nbmodels: cfg.max_candidates,
        ..cfg.opts
    };
    let candidates = ltc::initialise(&cfg.ltc, &cfg.s_init, opts)?;
    let snapshot = candidates.first().cloned().ok_or(AppError::NoInitialState)?;
    info!("initial state: {} candidate(s)", candidates.len());
    let last_spec = view(cfg, &snapshot)?;
    Ok(SimState {
        snapshot,
        last_spec,
        status: SimStatus::AwaitingInput,
        candidates,
    })
}

fn finished(state: &SimState, why: &str) -> SimState {
    info!("simulation finished at step {}: {why}", state.snapshot.step_index);
    SimState {
        status: SimStatus::Finished,
        candidates: Vec::new(),
        ..state.clone()
    }
}

/// The actions the input theory derives from the clicks.
fn actions(cfg: &SimConfig, state: &SimState, clicks: &[ClickEvent]) -> Result<Option<Structure>, AppError> {
    let mut base = merge(&state.snapshot.structure, &cfg.s_in)?;
    let times = base.sort_values("time").map(<[Value]>::to_vec);
    let keys = base.sort_values("key").map(<[Value]>::to_vec);
    let mut pairs = std::collections::BTreeSet::new();
    for c in clicks {
        let (t, k) = (Value::Int(c.time), Value::Str(c.key.clone()));
        let known = |dom: &Option<Vec<Value>>, v: &Value| dom.as_ref().is_none_or(|d| d.contains(v));
        if known(&times, &t) && known(&keys, &k) {
            pairs.insert(vec![t, k]);
        } else {
            debug!("ignoring click on `{}` outside the input domains", c.key);
        }
    }
    let mut voc = Vocabulary::union("input", &base.vocabulary, &crate::lang::prelude::v_in())?;
    voc.ltc = false;
    base = base.with_vocabulary(Arc::new(voc));
    base.set("d3_click", Interp::Relation(pairs));

    // Actions the input theory never mentions are closed.
    let mentioned = cfg.t_in.mentioned_symbols();
    for a in &cfg.ltc.action_symbols {
        if !mentioned.contains(a) && !base.is_specified(a) {
            if let Some(d) = cfg.ltc.single_state.get(a) {
                let empty = match d {
                    crate::model::Decl::Predicate(_) => Interp::Relation(Default::default()),
                    _ => Interp::Function(Default::default()),
                };
                base.set(a.clone(), empty);
            }
        }
    }
    let ctx = restrict(&restrict(&base, &cfg.v_in), &cfg.t_in.vocabulary);
    let found = solver::modelexpand(
        &cfg.t_in,
        &ctx,
        SolveOptions {
            nbmodels: Some(2),
            ..cfg.opts
        },
    )?;
    let Some(first) = found.models.first() else {
        return Ok(None);
    };
    if let Some(second) = found.models.get(1) {
        for a in &cfg.ltc.action_symbols {
            if first.get(a) != second.get(a) {
                return Err(AppError::AmbiguousAction { symbol: a.clone() });
            }
        }
    }
    let mut out = Structure::new("actions", cfg.ltc.single_state.clone());
    for a in &cfg.ltc.action_symbols {
        if let Some(i) = first.get(a).or_else(|| base.get(a)) {
            out.set(a.clone(), i.clone());
        }
    }
    Ok(Some(out))
}

/// One turn of the loop. Clicks must carry the displayed frame's time.
pub fn sim_step(cfg: &SimConfig, state: &SimState, clicks: &[ClickEvent]) -> Result<SimState, AppError> {
    if state.status == SimStatus::Finished {
        return Err(AppError::Finished);
    }
    let expected = state.frame_time();
    if let Some(c) = clicks.iter().find(|c| Some(c.time) != expected) {
        return Err(AppError::StaleClick { expected, got: c.time });
    }
    let Some(acts) = actions(cfg, state, clicks)? else {
        return Ok(finished(state, "the input theory has no model"));
    };
    let mut current = state.snapshot.clone();
    for (n, i) in acts.interps() {
        current.structure.set(n.to_string(), i.clone());
    }
    let opts = SolveOptions {
        nbmodels: cfg.max_candidates,
        ..cfg.opts
    };
    let candidates = ltc::progress(&cfg.ltc, &current, opts)?;
    let Some(snapshot) = candidates.first().cloned() else {
        return Ok(finished(state, "no next state"));
    };
    info!("step {}: {} successor(s)", snapshot.step_index, candidates.len());
    let last_spec = match view(cfg, &snapshot) {
        Ok(s) => s,
        Err(AppError::NoVisualisationModel) => return Ok(finished(state, "the output theory has no model")),
        Err(e) => return Err(e),
    };
    Ok(SimState {
        snapshot,
        last_spec,
        status: SimStatus::AwaitingInput,
        candidates,
    })
}

/// Clicks on the given keys at the displayed frame's time.
pub fn clicks_on(state: &SimState, keys: &[&str]) -> Vec<ClickEvent> {
    let time = state.frame_time().unwrap_or(0);
    keys.iter()
        .map(|k| ClickEvent {
            time,
            key: k.to_string(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_program;
    use crate::vizencode::AttrValue;

    const COUNTER: &str = include_str!("../fixtures/counter.fodot");

    fn config() -> SimConfig {
        SimConfig::from_program(&parse_program(COUNTER).unwrap(), SolveOptions::default()).unwrap()
    }

    fn label(spec: &DrawingSpec) -> String {
        let e = spec.animation[0].elements.iter().find(|e| e.key == "label").unwrap();
        match &e.attrs["text_label"] {
            AttrValue::Str(s) => s.clone(),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn counter_initial_frame() {
        let cfg = config();
        let s = sim_init(&cfg).unwrap();
        assert_eq!(s.snapshot.structure.constant("count"), Some(&Value::Int(0)));
        let f = &s.last_spec.animation[0];
        assert_eq!(f.elements.len(), 2);
        let pos: Vec<_> = f
            .elements
            .iter()
            .map(|e| (e.key.as_str(), &e.attrs["x"], &e.attrs["y"]))
            .collect();
        assert_eq!(
            pos,
            [
                ("button", &AttrValue::Int(1), &AttrValue::Int(5)),
                ("label", &AttrValue::Int(1), &AttrValue::Int(1))
            ]
        );
        assert_eq!(label(&s.last_spec), "0");
    }

    #[test]
    fn counter_steps() {
        let cfg = config();
        let s0 = sim_init(&cfg).unwrap();
        let s1 = sim_step(&cfg, &s0, &clicks_on(&s0, &["button"])).unwrap();
        assert_eq!(label(&s1.last_spec), "1");
        let s2 = sim_step(&cfg, &s1, &[]).unwrap();
        assert_eq!(label(&s2.last_spec), "1");
        let s3 = sim_step(&cfg, &s2, &clicks_on(&s2, &["label"])).unwrap();
        assert_eq!(label(&s3.last_spec), "0");
        assert_eq!(s3.snapshot.step_index, 3);
    }

    #[test]
    fn stale_clicks_are_rejected() {
        let cfg = config();
        let s0 = sim_init(&cfg).unwrap();
        let stale = [ClickEvent {
            time: 7,
            key: "button".into(),
        }];
        assert!(matches!(
            sim_step(&cfg, &s0, &stale),
            Err(AppError::StaleClick { got: 7, .. })
        ));
    }

    #[test]
    fn unsatisfiable_initial_state() {
        let src = COUNTER.replace("count(Start) = 0.", "count(Start) = 0.\n  count(Start) = 1.");
        let cfg = SimConfig::from_program(&parse_program(&src).unwrap(), SolveOptions::default()).unwrap();
        assert!(matches!(sim_init(&cfg), Err(AppError::NoInitialState)));
    }

    fn sum_program(extra: &str) -> Program {
        let src = include_str!("../fixtures/sum.fodot").replace("procedure main", &format!("{extra}\nprocedure main"));
        parse_program(&src).unwrap()
    }

    fn constants(m: &Structure) -> (i64, i64) {
        (
            m.constant("A").unwrap().as_int().unwrap(),
            m.constant("B").unwrap().as_int().unwrap(),
        )
    }

    #[test]
    fn compare_identical_theories() {
        let p = sum_program("");
        let (t, s) = (&p.theories["T"], &p.structures["S"]);
        let vis = Theory::empty("E", s.vocabulary.clone());
        let (r, _) = compare_theories(t, t, &vis, s, &Structure::empty(), 10, SolveOptions::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Matching);
        assert_eq!(r.checked, 3);
    }

    #[test]
    fn compare_against_false() {
        let p = sum_program("structure M : V { Num = {1..5}\n A = 1\n B = 2 }\ntheory F : V { 1 > 2. }");
        let s = &p.structures["M"];
        let empty = Theory::empty("E", s.vocabulary.clone());
        let (r, _) = compare_theories(
            &empty,
            &p.theories["F"],
            &empty,
            s,
            &Structure::empty(),
            5,
            SolveOptions::default(),
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::Counterexample);
        assert!(r.witness.unwrap().same_content(s));
    }

    #[test]
    fn compare_weaker_theory() {
        let p = sum_program("theory W : V { A + B > 7. }");
        let s = &p.structures["S"];
        let vis = Theory::empty("E", s.vocabulary.clone());
        let (r, _) = compare_theories(
            &p.theories["W"],
            &p.theories["T"],
            &vis,
            s,
            &Structure::empty(),
            10,
            SolveOptions::default(),
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::Counterexample);
        let w = r.witness.unwrap();
        let (a, b) = constants(&w);
        assert_eq!(a + b, 8);
        assert!(solver::satisfies(&p.theories["W"], &w).unwrap());
        assert!(!solver::satisfies(&p.theories["T"], &w).unwrap());
    }

    #[test]
    fn compare_unsatisfiable_user_theory() {
        let p = sum_program("theory F : V { 1 > 2. }");
        let s = &p.structures["S"];
        let (r, spec) = compare_theories(
            &p.theories["F"],
            &p.theories["T"],
            &p.theories["F"],
            s,
            &Structure::empty(),
            10,
            SolveOptions::default(),
        )
        .unwrap();
        assert_eq!(
            (r.verdict, r.checked, spec.animation.len()),
            (Verdict::EquivalentUpToBound, 0, 0)
        );
    }

    #[test]
    fn chessboard_pipeline() {
        let p = parse_program(include_str!("../fixtures/chessboard.fodot")).unwrap();
        let spec = visualise_model(
            &p.theories["T"],
            &p.structures["S"],
            &p.structures["S_out"],
            SolveOptions::default(),
        )
        .unwrap();
        assert_eq!(spec.animation.len(), 1);
        assert_eq!(spec.animation[0].elements.len(), 9);
    }
}
