//! Enumerates the models of `A + B > 8` over Num = {1..5}.
use logiviz::lang::{parse_program, print};
use logiviz::solver::{modelexpand, SolveOptions};

const PROGRAM: &str = include_str!("../fixtures/sum.fodot");

fn main() {
    let p = parse_program(PROGRAM).unwrap();
    let models = modelexpand(&p.theories["T"], &p.structures["S"], SolveOptions::with_nbmodels(4)).unwrap();
    for m in &models.models {
        print!("{}", print::structure(m));
    }
    println!("complete: {}", models.exhausted);
}
