//! Hand-derived results on the flights and cars fixtures.

use vca_core::algebra::{compose_binary, explode, extract, stat_binary, union_operands, viewset_stat, viewset_union};
use vca_core::{
    check_compose, constant_operand, lift, marks_of, AggFunc, BinaryOp, ComposeKind, Context, Error, Operand,
    Predicate, Relationship, Status, ViewSet,
};
use vca_testkit::fixtures::{self, airport, carb, numeric_rows, view};

fn flights() -> Context {
    Context::new(fixtures::flights_catalog())
}

fn cars() -> Context {
    Context::new(fixtures::cars_catalog())
}

fn rows_of(ctx: &Context, op: &Operand) -> Vec<Vec<f64>> {
    match op {
        Operand::View(v) => numeric_rows(&ctx.evaluate(v).unwrap()),
        other => panic!("expected a view, got {}", other.kind_name()),
    }
}

fn assert_rows(got: &[Vec<f64>], want: &[&[f64]], tol: f64) {
    assert_eq!(got.len(), want.len(), "{got:?} vs {want:?}");
    for (g, w) in got.iter().zip(want) {
        assert_eq!(g.len(), w.len(), "{got:?} vs {want:?}");
        for (a, b) in g.iter().zip(w.iter()) {
            let ok = (a.is_nan() && b.is_nan()) || (a - b).abs() <= tol;
            assert!(ok, "{got:?} vs {want:?}");
        }
    }
}

#[test]
fn difference_of_airports() {
    let ctx = flights();
    let (sfo, oak) = (airport(&ctx, "SFO"), airport(&ctx, "OAK"));
    let d = stat_binary(&ctx, &sfo, &oak.into(), &BinaryOp::default(), false).unwrap();
    assert_rows(
        &numeric_rows(&ctx.evaluate(&d).unwrap()),
        &[&[1.0, -5.0], &[2.0, 5.0], &[3.0, 15.0]],
        0.0,
    );
    assert_eq!(d.group_attrs, vec!["date".to_string()]);
}

#[test]
fn scalar_difference() {
    let ctx = flights();
    let sfo = airport(&ctx, "SFO");
    let c = constant_operand(20.0).unwrap();
    let d = stat_binary(&ctx, &sfo, &c.into(), &BinaryOp::default(), false).unwrap();
    assert_rows(
        &numeric_rows(&ctx.evaluate(&d).unwrap()),
        &[&[1.0, -10.0], &[2.0, -5.0], &[3.0, 0.0]],
        0.0,
    );
}

#[test]
fn viewset_average_uses_raw_rows() {
    let ctx = flights();
    let vs = ViewSet::new(vec![airport(&ctx, "SFO"), airport(&ctx, "OAK")]).unwrap();
    let avg = viewset_stat(&ctx, &vs, AggFunc::Avg, false).unwrap();
    assert_rows(
        &numeric_rows(&ctx.evaluate(&avg).unwrap()),
        &[&[1.0, 12.5], &[2.0, 12.5], &[3.0, 12.5]],
        1e-9,
    );

    let ctx = Context::new(fixtures::catalog_with("flights", fixtures::flights_two_rows()));
    let (sfo, oak) = (airport(&ctx, "SFO"), airport(&ctx, "OAK"));
    // the two views look exactly like the one-row fixture
    assert_rows(
        &numeric_rows(&ctx.evaluate(&sfo).unwrap()),
        &[&[1.0, 10.0], &[2.0, 15.0], &[3.0, 20.0]],
        0.0,
    );
    let vs = ViewSet::new(vec![sfo, oak]).unwrap();
    let avg = viewset_stat(&ctx, &vs, AggFunc::Avg, false).unwrap();
    assert_rows(
        &numeric_rows(&ctx.evaluate(&avg).unwrap()),
        &[&[1.0, 35.0 / 3.0], &[2.0, 40.0 / 3.0], &[3.0, 15.0]],
        1e-9,
    );
}

#[test]
fn lift_recovers_line() {
    let ctx = flights();
    let sfo = airport(&ctx, "SFO");
    let mv = lift(&ctx, &sfo, &["date".into()], &[]).unwrap();
    assert_eq!(mv.models.len(), 1);
    let m = mv.models.values().next().unwrap();
    assert!((m.intercept() - 5.0).abs() <= 1e-8);
    assert!((m.slopes()[0] - 5.0).abs() <= 1e-8);
    let r = compose_binary(
        &ctx,
        &sfo.clone().into(),
        &Operand::Model(mv),
        &BinaryOp::default(),
        false,
    )
    .unwrap();
    let rows = rows_of(&ctx, &r);
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r[1].abs() <= 1e-8), "{rows:?}");
}

#[test]
fn safety_examples() {
    let ctx = flights();
    let avg = view(&ctx, "flights", None, &["date"], AggFunc::Avg, "delay");
    let min = view(&ctx, "flights", None, &["date"], AggFunc::Min, "delay");
    let count = view(&ctx, "flights", None, &["date"], AggFunc::Count, "delay");
    let v = check_compose(&ctx, &avg, &min.into(), ComposeKind::Stat);
    assert_eq!((v.status, v.relationship), (Status::Safe, Some(Relationship::Exact)));
    let v = check_compose(&ctx, &avg, &count.into(), ComposeKind::Stat);
    assert_eq!(v.status, Status::Rejected);
}

#[test]
fn rejected_composition_raises() {
    let ctx = flights();
    let avg = view(&ctx, "flights", None, &["date"], AggFunc::Avg, "delay");
    let count = view(&ctx, "flights", None, &["date"], AggFunc::Count, "delay");
    let err = stat_binary(&ctx, &avg, &count.into(), &BinaryOp::default(), true).unwrap_err();
    assert!(matches!(err, Error::Safety(_)));
}

#[test]
fn union_then_explode_round_trips() {
    let ctx = flights();
    let (sfo, oak) = (airport(&ctx, "SFO"), airport(&ctx, "OAK"));
    let u = viewset_union(&ctx, &ViewSet::new(vec![sfo.clone(), oak.clone()]).unwrap(), false).unwrap();
    let rel = ctx.evaluate(&u).unwrap();
    assert_eq!(rel.len(), 6);
    let parts = explode(&ctx, &u, &["qid".into()]).unwrap();
    assert_eq!(parts.len(), 2);
    let e = extract(&ctx, &u, None).unwrap();
    assert!(ctx.evaluate(&e).unwrap().same_rows(&rel));
}

#[test]
fn closure_rejects_derived_statistics() {
    let ctx = flights();
    let (sfo, oak) = (airport(&ctx, "SFO"), airport(&ctx, "OAK"));
    let d = stat_binary(&ctx, &sfo, &oak.clone().into(), &BinaryOp::default(), false).unwrap();
    let err = viewset_stat(&ctx, &ViewSet::new(vec![d, oak]).unwrap(), AggFunc::Avg, false).unwrap_err();
    assert!(matches!(err, Error::Closure { .. }), "{err}");
}

fn cars_views(ctx: &Context) -> Vec<vca_core::View> {
    vec![carb(ctx, 1), carb(ctx, 2), carb(ctx, 5)]
}

#[test]
fn average_then_subtract() {
    let ctx = cars();
    let vs = ViewSet::new(cars_views(&ctx)).unwrap();
    let m = viewset_stat(&ctx, &vs, AggFunc::Avg, false).unwrap();
    assert_rows(
        &numeric_rows(&ctx.evaluate(&m).unwrap()),
        &[&[4.0, 30.0], &[6.0, 18.0]],
        1e-9,
    );
    let r = compose_binary(&ctx, &Operand::Set(vs), &m.into(), &BinaryOp::default(), false).unwrap();
    let Operand::Set(out) = r else {
        panic!("expected a viewset")
    };
    let got: Vec<_> = out
        .views()
        .iter()
        .map(|v| numeric_rows(&ctx.evaluate(v).unwrap()))
        .collect();
    assert_rows(&got[0], &[&[4.0, 2.0], &[6.0, 2.0]], 1e-9);
    assert_rows(&got[1], &[&[4.0, -4.0], &[6.0, 0.0]], 1e-9);
    assert_rows(&got[2], &[&[4.0, f64::NAN], &[6.0, -2.0]], 1e-9);
}

#[test]
fn subtract_overall_average_of_marks() {
    let ctx = cars();
    let ops: Vec<Operand> = cars_views(&ctx).into_iter().map(Operand::View).collect();
    let u = union_operands(&ctx, &ops, false).unwrap();
    let marks = marks_of(&ctx, &u).unwrap();
    assert_eq!(marks.len(), 5);
    let a = viewset_stat(&ctx, &marks, AggFunc::Avg, false).unwrap();
    assert!(a.group_attrs.is_empty());
    assert_rows(&numeric_rows(&ctx.evaluate(&a).unwrap()), &[&[24.0]], 1e-9);
    let r = stat_binary(&ctx, &u, &a.into(), &BinaryOp::default(), false).unwrap();
    let rel = ctx.evaluate(&r).unwrap();
    let mut got: Vec<(i64, String, f64)> = rel
        .rows()
        .iter()
        .map(|row| {
            let cyl = row[rel.schema().index_of("cyl").unwrap()].as_f64().unwrap() as i64;
            let qid = row[rel.schema().index_of("qid").unwrap()].to_string();
            (cyl, qid, row[rel.schema().index_of("y").unwrap()].as_f64().unwrap())
        })
        .collect();
    got.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
    let want = [
        (4, "c1", 8.0),
        (4, "c2", 2.0),
        (6, "c1", -4.0),
        (6, "c2", -6.0),
        (6, "c5", -8.0),
    ];
    assert_eq!(got.len(), want.len(), "{got:?}");
    for (g, w) in got.iter().zip(want) {
        assert_eq!((g.0, g.1.as_str()), (w.0, w.1), "{got:?}");
        assert!((g.2 - w.2).abs() <= 1e-9, "{got:?}");
    }
}

#[test]
fn subtract_pooled_model() {
    let ctx = cars();
    let views = cars_views(&ctx);
    let ops: Vec<Operand> = views.iter().cloned().map(Operand::View).collect();
    let u = union_operands(&ctx, &ops, false).unwrap();
    let mv = lift(&ctx, &u, &["cyl".into()], &[]).unwrap();
    let m = mv.models.values().next().unwrap();
    assert!((m.intercept() - 51.0).abs() <= 1e-9);
    assert!((m.slopes()[0] + 5.5).abs() <= 1e-9);
    let r = compose_binary(
        &ctx,
        &Operand::Set(ViewSet::new(views).unwrap()),
        &Operand::Model(mv),
        &BinaryOp::default(),
        false,
    )
    .unwrap();
    let Operand::Set(out) = r else {
        panic!("expected a viewset")
    };
    let got: Vec<_> = out
        .views()
        .iter()
        .map(|v| numeric_rows(&ctx.evaluate(v).unwrap()))
        .collect();
    assert_rows(&got[0], &[&[4.0, 3.0], &[6.0, 2.0]], 1e-9);
    assert_rows(&got[1], &[&[4.0, -3.0], &[6.0, 0.0]], 1e-9);
    assert_rows(&got[2], &[&[6.0, -2.0]], 1e-9);
}

#[test]
fn extract_with_selection() {
    let ctx = cars();
    let c1 = carb(&ctx, 1);
    let p = Predicate::InRange {
        expr: vca_core::ScalarExpr::col("cyl"),
        low: 4.into(),
        high: 5.into(),
    };
    let e = extract(&ctx, &c1, Some(&p)).unwrap();
    assert_rows(&numeric_rows(&ctx.evaluate(&e).unwrap()), &[&[4.0, 32.0]], 0.0);
}

#[test]
fn profits_against_losses_needs_override() {
    use vca_core::{AttributeDef, Catalog, Relation, Role, Schema, Value, ValueKind};
    let table = |m: &str, vals: [i64; 2]| {
        let s = Schema::new(vec![
            AttributeDef::dimension("region", ValueKind::Categorical),
            AttributeDef::new(m, Role::Measure, ValueKind::Numeric),
        ])
        .unwrap();
        let rows = vec![
            vec![Value::text("east"), Value::Integer(vals[0])],
            vec![Value::text("west"), Value::Integer(vals[1])],
        ];
        Relation::new(s, rows).unwrap()
    };
    let mut cat = Catalog::new();
    cat.register("sales", table("profits", [10, 7]));
    cat.register("costs", table("losses", [4, 9]));
    let ctx = Context::new(cat);
    let p = view(&ctx, "sales", None, &["region"], AggFunc::Sum, "profits");
    let l = view(&ctx, "costs", None, &["region"], AggFunc::Sum, "losses");
    let v = check_compose(&ctx, &p, &l.clone().into(), ComposeKind::Stat);
    assert_eq!(
        (v.status, v.relationship),
        (Status::Overridable, Some(Relationship::Exact))
    );
    assert!(matches!(
        stat_binary(&ctx, &p, &l.clone().into(), &BinaryOp::default(), false),
        Err(Error::Safety(_))
    ));
    let net = stat_binary(&ctx, &p, &l.into(), &BinaryOp::default(), true).unwrap();
    assert_rows(
        &numeric_rows(&ctx.evaluate(&net).unwrap()),
        &[&[f64::NAN, 6.0], &[f64::NAN, -2.0]],
        0.0,
    );
    assert!(net
        .warnings
        .iter()
        .any(|w| w.code == vca_core::WarningCode::OverrideApplied));
}
