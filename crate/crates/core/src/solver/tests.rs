use super::*;
use crate::lang::parse_program;
use crate::model::{merge, Value};

fn constants(m: &Structure) -> (i64, i64) {
    (
        m.constant("A").unwrap().as_int().unwrap(),
        m.constant("B").unwrap().as_int().unwrap(),
    )
}

#[test]
fn sum_theory_has_three_models_in_order() {
    let p = parse_program(include_str!("../../fixtures/sum.fodot")).unwrap();
    let ms = modelexpand(&p.theories["T"], &p.structures["S"], SolveOptions::all()).unwrap();
    let got: Vec<_> = ms.models.iter().map(constants).collect();
    assert_eq!(got, [(4, 5), (5, 4), (5, 5)]);
    assert!(ms.exhausted);
    for m in &ms.models {
        assert!(satisfies(&p.theories["T"], m).unwrap());
    }
}

#[test]
fn prefix_and_limit() {
    let p = parse_program(include_str!("../../fixtures/sum.fodot")).unwrap();
    let all = modelexpand(&p.theories["T"], &p.structures["S"], SolveOptions::all()).unwrap();
    let two = modelexpand(&p.theories["T"], &p.structures["S"], SolveOptions::with_nbmodels(2)).unwrap();
    assert_eq!(two.models, all.models[..2]);
    assert!(!two.exhausted);
    let one = onemodel(&p.theories["T"], &p.structures["S"], SolveOptions::default()).unwrap();
    assert_eq!(one.as_ref(), all.models.first());
}

#[test]
fn small_sum_constraint() {
    let src =
        "vocabulary V { type N isa int\n A : N\n B : N }\ntheory T : V { A + B > 4. }\nstructure S : V { N = {1..3} }";
    let p = parse_program(src).unwrap();
    let ms = modelexpand(&p.theories["T"], &p.structures["S"], SolveOptions::all()).unwrap();
    let got: Vec<_> = ms.models.iter().map(constants).collect();
    assert_eq!(got, [(2, 3), (3, 2), (3, 3)]);
}

#[test]
fn unsatisfiable_theory_has_no_models() {
    let src = "vocabulary V { type N isa int\n A : N }\ntheory T : V { 1 > 2. }\nstructure S : V { N = {1..3} }";
    let p = parse_program(src).unwrap();
    let ms = modelexpand(&p.theories["T"], &p.structures["S"], SolveOptions::all()).unwrap();
    assert!(ms.models.is_empty() && ms.exhausted);
}

#[test]
fn empty_theory_keeps_a_total_structure() {
    let src = "vocabulary V { type N isa int\n A : N\n p(N) }\ntheory T : V { }\nstructure S : V { N = {1..3}\n A = 2\n p = {1; 3} }";
    let p = parse_program(src).unwrap();
    let ms = modelexpand(&p.theories["T"], &p.structures["S"], SolveOptions::all()).unwrap();
    assert_eq!(ms.models.len(), 1);
    assert!(ms.models[0].same_content(&p.structures["S"]));
}

#[test]
fn transitive_closure() {
    let src = "vocabulary V { type N isa int\n e(N,N)\n r(N,N) }\n\
        theory T : V { { r(x,y) <- e(x,y). r(x,z) <- r(x,y) & e(y,z). } }\n\
        structure S : V { N = {1..4}\n e = {1,2; 2,3; 3,1} }";
    let p = parse_program(src).unwrap();
    let ms = modelexpand(&p.theories["T"], &p.structures["S"], SolveOptions::all()).unwrap();
    assert_eq!(ms.models.len(), 1);
    let r = &ms.models[0];
    for x in 1..=3 {
        for y in 1..=3 {
            assert_eq!(r.holds("r", &[Value::Int(x), Value::Int(y)]), Some(true));
        }
        assert_eq!(r.holds("r", &[Value::Int(x), Value::Int(4)]), Some(false));
    }
    assert!(satisfies(&p.theories["T"], r).unwrap());
}

#[test]
fn negative_recursion_is_rejected() {
    let src =
        "vocabulary V { type N isa int\n p(N) }\ntheory T : V { { p(x) <- ~p(x). } }\nstructure S : V { N = {1..2} }";
    let p = parse_program(src).unwrap();
    let err = modelexpand(&p.theories["T"], &p.structures["S"], SolveOptions::all()).unwrap_err();
    assert!(matches!(err, SolveError::UnstratifiedDefinition { .. }), "{err}");
}

#[test]
fn definitions_over_open_symbols() {
    let src = "vocabulary V { type N isa int\n q(N)\n p(N) }\ntheory T : V { { p(x) <- ~q(x). } ?x: p(x). }\nstructure S : V { N = {1..2} }";
    let p = parse_program(src).unwrap();
    let ms = modelexpand(&p.theories["T"], &p.structures["S"], SolveOptions::all()).unwrap();
    // q ranges over the subsets of {1, 2} missing at least one element.
    assert_eq!(ms.models.len(), 3);
    for m in &ms.models {
        assert!(satisfies(&p.theories["T"], m).unwrap());
    }
}

#[test]
fn conflicting_function_rules() {
    let src =
        "vocabulary V { type N isa int\n A : N }\ntheory T : V { { A = 1. A = 2. } }\nstructure S : V { N = {1..2} }";
    let p = parse_program(src).unwrap();
    let ms = modelexpand(&p.theories["T"], &p.structures["S"], SolveOptions::all()).unwrap();
    assert!(ms.models.is_empty());
    let d = &p.theories["T"].definitions[0];
    let err = evaluate_definition(d, &p.vocabularies["V"], &p.structures["S"]).unwrap_err();
    assert!(matches!(err, SolveError::FunctionConflict { .. }), "{err}");
}

#[test]
fn chessboard_definition() {
    let p = parse_program(include_str!("../../fixtures/chessboard.fodot")).unwrap();
    let m = merge(&p.structures["S"], &p.structures["S_out"]).unwrap();
    let t = &p.theories["T"];
    let sol = onemodel(t, &m, SolveOptions::default()).unwrap().expect("a model");
    let key = |x: i64, y: i64| Value::Str(format!("{x}-{y}"));
    let one = Value::Int(1);
    assert_eq!(sol.apply("d3_x", &[one.clone(), key(3, 1)]), Some(&Value::Int(10)));
    assert_eq!(
        sol.apply("d3_color", &[one.clone(), key(1, 2)]),
        Some(&Value::Str("black".into()))
    );
    assert_eq!(
        sol.apply("d3_color", &[one, key(2, 2)]),
        Some(&Value::Str("white".into()))
    );
    assert!(satisfies(t, &sol).unwrap());
}

#[test]
fn counter_definition_from_actions() {
    let p = parse_program(include_str!("../../fixtures/counter.fodot")).unwrap();
    let voc = &p.vocabularies["V"];
    let src = "structure C : V { Count = {0..3}\n Time = {0..2}\n Start = 0\n Next = {0->1; 1->2}\n \
        countUp = {0}\n countDown = {}\n setValue = {} }";
    let full = format!("{}\n{src}", include_str!("../../fixtures/counter.fodot"));
    let q = parse_program(&full).unwrap();
    let d = &p.theories["T"].definitions[0];
    let out = evaluate_definition(d, voc, &q.structures["C"]).unwrap();
    let count = |t: i64| out.apply("count", &[Value::Int(t)]).and_then(Value::as_int);
    assert_eq!((count(0), count(1), count(2)), (Some(0), Some(1), Some(1)));
}

#[test]
fn missing_context_is_not_two_valued() {
    let p = parse_program(include_str!("../../fixtures/counter.fodot")).unwrap();
    let d = &p.theories["T"].definitions[0];
    let err = evaluate_definition(d, &p.vocabularies["V"], &p.structures["S"]).unwrap_err();
    assert!(matches!(err, SolveError::NotTwoValued { .. }), "{err}");
}

#[test]
fn budget_reports_partial_results() {
    let src = "vocabulary V { type N isa int\n p(N) }\ntheory T : V { }\nstructure S : V { N = {1..10} }";
    let p = parse_program(src).unwrap();
    let opts = SolveOptions {
        nbmodels: None,
        node_budget: 50,
    };
    match modelexpand(&p.theories["T"], &p.structures["S"], opts) {
        Err(SolveError::Timeout { partial, .. }) => assert!(!partial.models.is_empty() && !partial.exhausted),
        other => panic!("{other:?}"),
    }
}

#[test]
fn enumeration_is_deterministic() {
    let p = parse_program(include_str!("../../fixtures/sum.fodot")).unwrap();
    let a = modelexpand(&p.theories["T"], &p.structures["S"], SolveOptions::all()).unwrap();
    let b = modelexpand(&p.theories["T"], &p.structures["S"], SolveOptions::all()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn satisfies_rejects_wrong_definitions() {
    let src = "vocabulary V { type N isa int\n e(N)\n p(N) }\ntheory T : V { { p(x) <- e(x). } }\n\
        structure S : V { N = {1..2}\n e = {1}\n p = {1; 2} }";
    let p = parse_program(src).unwrap();
    assert!(!satisfies(&p.theories["T"], &p.structures["S"]).unwrap());
}

#[test]
fn uninterpreted_sorts_take_theory_values() {
    let src =
        "vocabulary V { type L isa string\n A : L }\ntheory T : V { A = \"x\" | A = \"y\". }\nstructure S : V { }";
    let p = parse_program(src).unwrap();
    let ms = modelexpand(&p.theories["T"], &p.structures["S"], SolveOptions::all()).unwrap();
    assert_eq!(ms.models.len(), 2);
}
