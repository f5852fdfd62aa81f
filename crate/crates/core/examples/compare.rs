//! Finds a model of a too weak theory that the intended theory rejects.
use logiviz::apps::{compare_theories, Verdict};
use logiviz::lang::{parse_program, print, Theory};
use logiviz::model::Structure;
use logiviz::solver::SolveOptions;

fn main() {
    let p = parse_program(include_str!("../fixtures/compare.fodot")).unwrap();
    let s = &p.structures["S"];
    let vis = Theory::empty("none", s.vocabulary.clone());
    let (r, _) = compare_theories(
        &p.theories["T_user"],
        &p.theories["T_correct"],
        &vis,
        s,
        &Structure::empty(),
        10,
        SolveOptions::default(),
    )
    .unwrap();
    println!("{:?} after {} model(s)", r.verdict, r.checked);
    if r.verdict == Verdict::Counterexample {
        print!("{}", print::structure(r.witness.as_ref().unwrap()));
    }
}
