//! Draws a 3x3 chessboard by expanding a visualisation theory over the
//! board's structure.
use logiviz::apps::visualise_model;
use logiviz::lang::parse_program;
use logiviz::solver::SolveOptions;
use logiviz::vizencode::serialize;

fn main() {
    let p = parse_program(include_str!("../fixtures/chessboard.fodot")).unwrap();
    let spec = visualise_model(
        &p.theories["T"],
        &p.structures["S"],
        &p.structures["S_out"],
        SolveOptions::default(),
    )
    .unwrap();
    println!("{}", serialize(&spec));
}
