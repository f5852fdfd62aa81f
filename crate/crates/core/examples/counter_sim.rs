//! Runs the counter without a browser: count up twice, then reset.
use logiviz::apps::{clicks_on, sim_init, sim_step, SimConfig};
use logiviz::lang::parse_program;
use logiviz::solver::SolveOptions;
use logiviz::vizencode::serialize;

fn main() {
    let p = parse_program(include_str!("../fixtures/counter.fodot")).unwrap();
    let cfg = SimConfig::from_program(&p, SolveOptions::default()).unwrap();
    let mut state = sim_init(&cfg).unwrap();
    println!("{}", serialize(&state.last_spec));
    for key in ["button", "button", "label"] {
        let clicks = clicks_on(&state, &[key]);
        state = sim_step(&cfg, &state, &clicks).unwrap();
        println!("{}", serialize(&state.last_spec));
    }
}
