//! Encodes a drawing structure with one rectangle, checks it, and reads
//! the JSON back.
use logiviz::lang::parse_program;
use logiviz::vizencode::{deserialize, encode, serialize, validate_out};

fn main() {
    let p = parse_program(include_str!("../fixtures/rect.fodot")).unwrap();
    let s = &p.structures["S"];
    for d in validate_out(s) {
        eprintln!("warning: {}", d.message);
    }
    let spec = encode(s).unwrap();
    let json = serialize(&spec);
    println!("{json}");
    assert_eq!(deserialize(&json).unwrap(), spec);

    // Quoted numbers are accepted on input.
    let quoted = json.replace(":2,", ":\"2\",");
    assert_eq!(deserialize(&quoted).unwrap(), spec);
}
