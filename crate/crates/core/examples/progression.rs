//! Steps the counter forward by hand: initial state, then the successors
//! under each choice of actions.
use logiviz::lang::parse_program;
use logiviz::lang::print;
use logiviz::ltc::{initialise, split_ltc, transitions};
use logiviz::solver::SolveOptions;

fn main() {
    let src = include_str!("../fixtures/counter.fodot").replace("Count = {0..100}", "Count = {0..3}");
    let p = parse_program(&src).unwrap();
    let lt = split_ltc(&p.theories["T"]).unwrap();
    println!("state: {:?}, actions: {:?}", lt.state_symbols, lt.action_symbols);

    let init = initialise(&lt, &p.structures["S"], SolveOptions::all()).unwrap();
    let first = &init[0];
    print!("{}", print::structure(&first.structure));
    for t in transitions(&lt, first, SolveOptions::all()).unwrap() {
        let acts: Vec<String> = t
            .actions
            .interps()
            .filter(|(n, _)| lt.action_symbols.iter().any(|a| a == n))
            .map(|(n, i)| print::interp(n, i))
            .collect();
        let next = t.next.structure.constant("count").unwrap();
        println!("{} -> count = {}", acts.join(", "), print::value(next));
    }
}
