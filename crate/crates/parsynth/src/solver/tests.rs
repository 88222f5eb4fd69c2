use super::model::{parse_sexps, value_of_sexp, Sexp};
use super::*;
use crate::encoder::{SmtScript, Sort, Term};

use std::io::Write as _;
use std::time::Duration;

fn fake_solver(body: &str) -> (tempfile::TempDir, SolverCmd) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("solver.sh");
    let mut f = std::fs::File::create(&path).unwrap();
    writeln!(f, "#!/bin/sh").unwrap();
    writeln!(f, "cat > /dev/null").unwrap();
    write!(f, "{body}").unwrap();
    drop(f);
    use std::os::unix::fs::PermissionsExt;
    std::fs::set_permissions(&path, std::fs::Permissions::from_mode(0o755)).unwrap();
    let cmd = SolverCmd { program: path.to_string_lossy().into_owned(), args: vec![] };
    (dir, cmd)
}

fn tiny_script() -> SmtScript {
    let mut s = SmtScript::new("QF_UFLIRA");
    s.declare("f", vec![Sort::Int], Sort::Int);
    s.declare("b", vec![Sort::Int], Sort::Bool);
    s.assert(Term::eq(Term::app("f", vec![Term::Int(0)]), Term::Int(1)));
    s.assert(Term::app("b", vec![Term::Int(0)]));
    s.queries.push(Term::app("f", vec![Term::Int(0)]));
    s.queries.push(Term::app("b", vec![Term::Int(0)]));
    s
}

#[test]
fn parses_sat_with_values() {
    let (_dir, cmd) = fake_solver("printf 'sat\\n(((f 0) 1)\\n ((b 0) true))\\n'");
    let r = run_solver(&tiny_script(), &cmd, Duration::from_secs(10)).unwrap();
    assert_eq!(r.status, SolverStatus::Sat);
    let model = r.model.unwrap();
    assert_eq!(model.int_term(&Term::app("f", vec![Term::Int(0)])).unwrap(), 1);
    assert!(model.bool_term(&Term::app("b", vec![Term::Int(0)])).unwrap());
    validate_model(&tiny_script(), &model).unwrap();
}

#[test]
fn parses_unsat_and_skips_error_echoes() {
    let (_dir, cmd) =
        fake_solver("printf 'unsat\\n(error \"no model\")\\n(error \"no model\")\\n'");
    let r = run_solver(&tiny_script(), &cmd, Duration::from_secs(10)).unwrap();
    assert_eq!(r.status, SolverStatus::Unsat);
    assert!(r.model.is_none());
}

#[test]
fn zero_timeout_reports_unknown() {
    let (_dir, cmd) = fake_solver("sleep 5\necho sat");
    let r = run_solver(&tiny_script(), &cmd, Duration::ZERO).unwrap();
    assert!(matches!(r.status, SolverStatus::Unknown(ref s) if s == "timeout"));
}

#[test]
fn malformed_output_is_an_error() {
    let (_dir, cmd) = fake_solver("echo gibberish");
    assert!(matches!(
        run_solver(&tiny_script(), &cmd, Duration::from_secs(10)),
        Err(SolverError::Malformed(_))
    ));
    let (_dir2, cmd2) = fake_solver("printf 'sat\\n((f 0) 1)\\n'");
    // Wrong pair count for the two queries.
    assert!(run_solver(&tiny_script(), &cmd2, Duration::from_secs(10)).is_err());
}

#[test]
fn spawn_failure_is_reported() {
    let cmd = SolverCmd { program: "/nonexistent/solver".into(), args: vec![] };
    assert!(matches!(
        run_solver(&tiny_script(), &cmd, Duration::from_secs(1)),
        Err(SolverError::Spawn { .. })
    ));
}

#[test]
fn value_parsing_covers_rationals() {
    let cases = vec![
        ("true", Value::Bool(true)),
        ("42", Value::Int(42)),
        ("(- 7)", Value::Int(-7)),
        ("1.0", Value::Rat(Rat::from_int(1))),
        ("(- 1.5)", Value::Rat(Rat::new(-3, 2))),
        ("(/ 1.0 2.0)", Value::Rat(Rat::new(1, 2))),
        ("(- (/ 3.0 4.0))", Value::Rat(Rat::new(-3, 4))),
    ];
    for (text, expected) in cases {
        let sexps = parse_sexps(text).unwrap();
        assert_eq!(value_of_sexp(&sexps[0]).unwrap(), expected, "{text}");
    }
    assert!(Rat::new(1, 3) < Rat::new(1, 2));
    assert!(Rat::new(-1, 2) < Rat::from_int(0));
}

#[test]
fn sexp_parser_handles_nesting_and_comments() {
    let text = "; comment\nsat\n(((f 0) (/ 1.0 2.0)))";
    let sexps = parse_sexps(text).unwrap();
    assert_eq!(sexps[0], Sexp::Atom("sat".into()));
    assert!(matches!(&sexps[1], Sexp::List(items) if items.len() == 1));
    assert!(parse_sexps("(unbalanced").is_err());
}

#[test]
fn validation_rejects_wrong_models() {
    let script = tiny_script();
    let model = SmtModel::from_pairs(vec![
        ("(f 0)".into(), Value::Int(2)),
        ("(b 0)".into(), Value::Bool(true)),
    ]);
    assert!(matches!(
        validate_model(&script, &model),
        Err(SolverError::ModelInvalid { index: 0, .. })
    ));
    let incomplete = SmtModel::from_pairs(vec![("(f 0)".into(), Value::Int(1))]);
    assert!(matches!(
        validate_model(&script, &incomplete),
        Err(SolverError::IncompleteModel(_))
    ));
}

#[test]
fn tampered_model_with_two_tokens_fails_extraction() {
    // Build a real ring symbol table, then hand extraction a model whose
    // initial state gives everyone the token.
    let f = crate::ltl::Ltl::globally(crate::ltl::Ltl::ground_atom("g", 1));
    let alphabet = crate::automaton::Alphabet::new(vec![
        crate::ltl::GroundAtom::new("g", 1),
        crate::ltl::GroundAtom::new("r", 1),
    ])
    .unwrap();
    let ucw = crate::automaton::ucw_for_formula(&f, &alphabet).unwrap();
    let iface = crate::ltl::ProcessInterface::new(vec!["r".into()], vec!["g".into()]);
    let (_script, st) = crate::encoder::encode_ring(&ucw, 2, 2, 2, &iface).unwrap();
    let mut pairs = vec![
        ("(d1 0)".to_string(), Value::Int(0)),
        ("(d2 0)".to_string(), Value::Int(0)),
        ("(o_tok 0)".to_string(), Value::Bool(true)),
        ("(o_tok 1)".to_string(), Value::Bool(false)),
        ("(o_send 0)".to_string(), Value::Bool(false)),
        ("(o_send 1)".to_string(), Value::Bool(false)),
        ("(o_g 0)".to_string(), Value::Bool(false)),
        ("(o_g 1)".to_string(), Value::Bool(false)),
    ];
    pairs.push(("(d1 1)".to_string(), Value::Int(0)));
    pairs.push(("(d2 1)".to_string(), Value::Int(0)));
    let model = SmtModel::from_pairs(pairs);
    let err = extract_process(&model, &st).unwrap_err();
    assert!(matches!(err, SolverError::Extraction(_)), "got {err:?}");
}

#[test]
fn bound_schedules() {
    let s = BoundSchedule::ring_default(4, 12);
    // The known-good arbiter point is reached within five attempts.
    assert!(s.pairs.iter().take(5).any(|&p| p == (2, 4)), "{:?}", s.pairs);
    assert_eq!(s.pairs[0], (1, 1));
    // Strictly increasing in at least one coordinate per step.
    for w in s.pairs.windows(2) {
        assert!(w[1].0 > w[0].0 || w[1].1 > w[0].1, "{:?}", s.pairs);
    }
    let parsed = BoundSchedule::parse("1,1;2,4").unwrap();
    assert_eq!(parsed.pairs, vec![(1, 1), (2, 4)]);
    assert!(BoundSchedule::parse("").is_err());
    assert!(BoundSchedule::parse("x,y").is_err());

    let local = BoundSchedule::local_only(3);
    assert_eq!(local.pairs, vec![(1, 1), (2, 2), (3, 3)]);
}
