//! Turns a browser click message into an input structure.
use logiviz::inputdecode::decode_clicks;
use logiviz::lang::print;

fn main() {
    let wire = r#"[{"time":1,"elements":[{"key":"key","type":"click"}]}]"#;
    let s = decode_clicks(wire).unwrap();
    print!("{}", print::structure(&s));
}
