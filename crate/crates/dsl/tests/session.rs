//! Session behaviour: errors carry positions, failures leave no trace, and
//! overrides are explicit.

use vca_core::{Error, Status};
use vca_dsl::{parse, DslError, Session, Statement};
use vca_testkit::fixtures;

fn flights_session() -> Session {
    let mut s = Session::new(".");
    s.register_table("flights", fixtures::flights());
    s
}

#[test]
fn empty_script_is_empty() {
    assert!(parse("").unwrap().is_empty());
    assert!(parse("\n  # only a comment\n;\n").unwrap().is_empty());
}

#[test]
fn statements_parse_to_their_forms() {
    let stmts = parse(
        "v1 = view(flights, filter: src = 'SFO', group: [date], agg: avg(delay), mark: bar)\nd = v1 - v2\nshow d",
    )
    .unwrap();
    assert!(matches!(&stmts[0].stmt, Statement::DefView { name, def } if name == "v1" && def.group == ["date"]));
    assert!(matches!(&stmts[1].stmt, Statement::Assign { name, .. } if name == "d"));
    assert_eq!((stmts[1].line, stmts[1].column), (2, 1));
    assert!(matches!(&stmts[2].stmt, Statement::Show { name } if name == "d"));
}

#[test]
fn parse_error_reports_position_and_expectations() {
    let err = parse("a = b\nc = (d -").unwrap_err();
    assert_eq!(err.line, 2);
    assert!(err.column >= 8, "{err}");
    assert!(!err.expected.is_empty());

    let err = parse("v = view(t, group: [a])").unwrap_err();
    assert!(err.to_string().contains("agg"), "{err}");
}

#[test]
fn unbound_name_is_a_name_error() {
    let mut s = flights_session();
    let err = s.run_script("x = nope - nope2").unwrap_err();
    assert!(
        matches!(err, DslError::Name { ref name, line: 1, .. } if name == "nope"),
        "{err}"
    );
    assert!(s.bindings().is_empty());
    assert!(s.log().is_empty());
}

#[test]
fn unknown_table_is_an_engine_error() {
    let mut s = flights_session();
    let err = s.run_script("v = view(missing, group: [a], agg: sum(b))").unwrap_err();
    assert!(
        matches!(err.engine(), Some(Error::Catalog(t)) if t == "missing"),
        "{err}"
    );
}

#[test]
fn show_prints_table_and_json() {
    let mut s = flights_session();
    let outs = s
        .run_script("sfo = view(flights, filter: src = 'SFO', group: [date], agg: avg(delay))\nshow sfo")
        .unwrap();
    let text = &outs[1].output;
    assert!(text.contains("date | y"), "{text}");
    assert!(text.contains("\"source_table\": \"flights\""), "{text}");
    assert!(text.contains("\"canonical\": true"), "{text}");
}

#[test]
fn unsafe_composition_reports_verdict_and_override_applies() {
    let mut s = flights_session();
    s.run_script(
        "a = view(flights, group: [date], agg: avg(delay))\n\
         c = view(flights, group: [date], agg: count(delay))",
    )
    .unwrap();
    let err = s.run_script("d = a - c").unwrap_err();
    match err.engine() {
        Some(Error::Safety(v)) => assert_eq!(v.status, Status::Rejected),
        other => panic!("expected a safety error, got {other:?}"),
    }
    assert!(s.get("d").is_none());
    // Rejected is final even when overridden.
    assert!(s.run_script("d = a - c override").is_err());
}

#[test]
fn override_accepts_overridable_pairs() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("sales.csv"), "region,profit\nn,10\ns,7\n").unwrap();
    std::fs::write(dir.path().join("costs.csv"), "region,loss\nn,4\ns,9\n").unwrap();
    let mut s = Session::new(dir.path());
    s.run_script(
        "load sales from \"sales.csv\" roles {profit: measure}\n\
         load costs from \"costs.csv\" roles {loss: measure}\n\
         p = view(sales, group: [region], agg: sum(profit))\n\
         l = view(costs, group: [region], agg: sum(loss))",
    )
    .unwrap();
    let err = s.run_script("d = p - l").unwrap_err();
    assert!(
        matches!(err.engine(), Some(Error::Safety(v)) if v.status == Status::Overridable),
        "{err}"
    );
    let outs = s.run_script("d = p - l override").unwrap();
    assert!(!outs[0].warnings.is_empty());
    assert!(s.get("d").is_some());
}

#[test]
fn failed_statement_does_not_consume_ids() {
    let mut s = flights_session();
    s.run_script("a = view(flights, group: [date], agg: avg(delay))")
        .unwrap();
    assert!(s.run_script("b = a - missing").is_err());
    s.run_script("b = a - 1").unwrap();
    let json = vca_dsl::render::operand_json(s.context(), s.get("b").unwrap()).unwrap();
    assert_eq!(json["view"]["id"], "v2");
}

#[test]
fn rebinding_reports_a_notice() {
    let mut s = flights_session();
    let outs = s
        .run_script("a = view(flights, group: [date], agg: avg(delay))\na = a - 1")
        .unwrap();
    assert!(outs[0].notices.is_empty());
    assert_eq!(outs[1].notices.len(), 1);
}

#[test]
fn loads_csv_relative_to_base_dir() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("cars.csv"), fixtures::CARS_CSV).unwrap();
    let mut s = Session::new(dir.path());
    s.run_script("load cars from \"cars.csv\" roles {mpg: measure}\nv = view(cars, group: [cyl], agg: avg(mpg))")
        .unwrap();
    let err = s.run_script("load other from \"absent.csv\"").unwrap_err();
    assert!(matches!(err, DslError::Io { .. }), "{err}");
}

#[test]
fn log_prints_back_as_a_script() {
    let mut s = flights_session();
    s.run_script("a = view(flights, group: [date], agg: avg(delay))\nb = union(a, a - 1)")
        .unwrap();
    let text = s.log_script();
    assert_eq!(parse(&text).unwrap().len(), 2);
    assert!(text.contains("union(a, a - const(1.0))"), "{text}");
}
