mod common;

use std::io::Write;

use common::{cli, fixture};

fn temp_file(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

#[test]
fn check_empty_file_is_silent() {
    let f = temp_file("");
    let (code, out, err) = cli(&["check", f.path().to_str().unwrap()]);
    assert_eq!((code, out.as_str(), err.as_str()), (0, "", ""));
}

#[test]
fn check_reports_positions() {
    let f = temp_file("vocabulary V { p(N) }");
    let (code, _, err) = cli(&["check", f.path().to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains(":1:"), "{err}");
    assert!(err.contains("`N`"), "{err}");
}

#[test]
fn missing_file_is_a_user_error() {
    let (code, _, err) = cli(&["check", "/nonexistent/x.fodot"]);
    assert_eq!(code, 1);
    assert!(err.contains("/nonexistent/x.fodot"));
}

#[test]
fn bad_arguments_are_user_errors() {
    assert_eq!(cli(&["solve"]).0, 1);
    assert_eq!(cli(&["frobnicate"]).0, 1);
    assert_eq!(cli(&["--help"]).0, 0);
}

#[test]
fn solve_prints_structures() {
    let (code, out, _) = cli(&[
        "solve",
        &fixture("sum.fodot"),
        "--theory",
        "T",
        "--structure",
        "S",
        "--nbmodels",
        "0",
    ]);
    assert_eq!(code, 0);
    assert_eq!(out.matches("structure M").count(), 3);
    assert!(
        out.starts_with("structure M1 : V {\n  Num = {1..5}\n  A = 4\n  B = 5\n}\n"),
        "{out}"
    );
    let (_, one, _) = cli(&["solve", &fixture("sum.fodot"), "--theory", "T", "--structure", "S"]);
    assert_eq!(one.matches("structure M").count(), 1);
}

#[test]
fn solve_unsatisfiable_and_missing_objects() {
    let f =
        temp_file("vocabulary V { type N isa int\n A : N }\ntheory T : V { A > 5. }\nstructure S : V { N = {1..3} }");
    let path = f.path().to_str().unwrap();
    let (code, out, _) = cli(&["solve", path, "--theory", "T", "--structure", "S"]);
    assert_eq!((code, out.as_str()), (0, "Unsatisfiable\n"));
    let (code, _, err) = cli(&["solve", path, "--theory", "X", "--structure", "S"]);
    assert_eq!(code, 1);
    assert!(err.contains("no theory named X"));
    let (code, _, err) = cli(&["solve", path, "--theory", "T", "--structure", "Y"]);
    assert_eq!(code, 1);
    assert!(err.contains("no structure named Y"));
}

#[test]
fn solve_budget_exhaustion_is_reported() {
    let f = temp_file("vocabulary V { type N isa int\n p(N) }\ntheory T : V { }\nstructure S : V { N = {1..12} }");
    let (code, _, err) = cli(&[
        "--node-budget",
        "20",
        "solve",
        f.path().to_str().unwrap(),
        "--theory",
        "T",
        "--structure",
        "S",
        "--nbmodels",
        "0",
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("budget"), "{err}");
}

#[test]
fn viz_writes_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rect.json");
    let (code, stdout, _) = cli(&[
        "viz",
        &fixture("rect.fodot"),
        "--structure",
        "S",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!((code, stdout.as_str()), (0, ""));
    let text = std::fs::read_to_string(out).unwrap();
    assert!(text.contains(r#""key":"key","type":"rect""#));
}

#[test]
fn viz_with_visualisation_theory() {
    let (code, out, err) = cli(&[
        "viz",
        &fixture("chessboard.fodot"),
        "--structure",
        "S",
        "--vis-theory",
        "T",
        "--vis-structure",
        "S_out",
    ]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(out.matches(r#""type":"rect""#).count(), 9);
}

#[test]
fn viz_errors_are_user_errors() {
    let (code, _, err) = cli(&[
        "viz",
        &fixture("chessboard.fodot"),
        "--structure",
        "S_out",
        "--structure",
        "S",
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("d3_type"), "{err}");
    let (code, _, err) = cli(&[
        "viz",
        &fixture("sum.fodot"),
        "--theory",
        "T",
        "--structure",
        "S",
        "--vis-theory",
        "Nope",
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("Nope"));
}

#[test]
fn compare_reports_verdict() {
    let (code, out, err) = cli(&[
        "compare",
        &fixture("compare.fodot"),
        "--user",
        "T_user",
        "--correct",
        "T_correct",
        "--structure",
        "S",
    ]);
    assert_eq!(code, 0);
    assert!(err.starts_with("counterexample after 1 model(s)"), "{err}");
    assert!(err.contains("A = 3") && err.contains("B = 5"), "{err}");
    assert_eq!(out, "{\"animation\":[]}\n");
    let (_, _, err) = cli(&[
        "compare",
        &fixture("compare.fodot"),
        "--user",
        "T_correct",
        "--correct",
        "T_user",
        "--structure",
        "S",
    ]);
    assert!(err.starts_with("matching after 3 model(s)"), "{err}");
}

#[test]
fn sim_prints_one_spec_per_step() {
    let (code, out, _) = cli(&[
        "sim",
        &fixture("counter.fodot"),
        "--clicks",
        &fixture("counter_clicks.json"),
    ]);
    assert_eq!(code, 0);
    let labels: Vec<&str> = out
        .lines()
        .map(|l| l.split(r#""text_label":""#).nth(2).unwrap().split('"').next().unwrap())
        .collect();
    assert_eq!(labels, ["0", "1", "2", "0"]);
}

#[test]
fn sim_writes_numbered_files() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, _) = cli(&[
        "sim",
        &fixture("counter.fodot"),
        "--clicks",
        &fixture("counter_clicks.json"),
        "-o",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let mut names: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(
        names,
        [
            "step-000.viz.json",
            "step-001.viz.json",
            "step-002.viz.json",
            "step-003.viz.json"
        ]
    );
}

#[test]
fn sim_rejects_malformed_click_logs() {
    let log = temp_file(r#"["button"]"#);
    let (code, _, err) = cli(&[
        "sim",
        &fixture("counter.fodot"),
        "--clicks",
        log.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("click log"), "{err}");
}

#[test]
fn sim_stops_when_the_state_space_ends() {
    let src = std::fs::read_to_string(fixture("counter.fodot"))
        .unwrap()
        .replace("Count = {0..100}", "Count = {0..1}");
    let f = temp_file(&src);
    let log = temp_file(r#"[["button"],["button"],["button"]]"#);
    let (code, out, err) = cli(&[
        "sim",
        f.path().to_str().unwrap(),
        "--clicks",
        log.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 2);
    assert!(err.contains("finished after 1 step"), "{err}");
}

#[test]
fn serve_checks_its_program() {
    let f = temp_file("theory T : V { }");
    let (code, _, _) = cli(&["serve", f.path().to_str().unwrap(), "--listen", "127.0.0.1:0"]);
    assert_eq!(code, 1);
    let (code, _, _) = cli(&["serve", "--listen", "not-an-address"]);
    assert_eq!(code, 1);
}

struct Broken;

impl Write for Broken {
    fn write(&mut self, _: &[u8]) -> std::io::Result<usize> {
        Err(std::io::Error::other("closed"))
    }
    fn flush(&mut self) -> std::io::Result<()> {
        Ok(())
    }
}

#[test]
fn failing_output_is_an_internal_error() {
    let mut err = Vec::new();
    let args = [
        "logiviz",
        "solve",
        &fixture("sum.fodot"),
        "--theory",
        "T",
        "--structure",
        "S",
    ]
    .map(String::from);
    let code = logiviz::cli::run(args, &mut Broken, &mut err);
    assert_eq!(code, 2);
}
