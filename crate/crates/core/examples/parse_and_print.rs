//! Parses a program, reports the first error with its position, and
//! prints the checked program back.
use logiviz::lang::{parse_program, print};

fn main() {
    let src = "vocabulary V { type N isa int\n p(N) }\ntheory T : V { !x[N]: p(x) => x > 1. }\nstructure S : V { N = {1..3} }";
    let program = parse_program(src).expect("valid program");
    print!("{}", print::program(&program));

    let broken = "theory T : V { p(1). }";
    match parse_program(broken) {
        Ok(_) => unreachable!(),
        Err(e) => println!("{}: {e}", e.kind()),
    }
}
