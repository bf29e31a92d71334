//! Lifted coefficients agree with an independent least-squares solve.

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use vca_core::{lift, AggFunc, AttributeDef, Catalog, Context, Relation, Role, Schema, Value, ValueKind};
use vca_testkit::fixtures::view;

/// Raw rows `(g, x1, x2, m)`.
fn raw_rows() -> impl Strategy<Value = Vec<(i64, i64, i64, i64)>> {
    prop::collection::vec((0i64..2, 0i64..5, -3i64..3, -50i64..50), 1..24)
}

fn context(rows: &[(i64, i64, i64, i64)]) -> Context {
    let schema = Schema::new(vec![
        AttributeDef::dimension("g", ValueKind::Numeric),
        AttributeDef::dimension("x1", ValueKind::Numeric),
        AttributeDef::dimension("x2", ValueKind::Numeric),
        AttributeDef::new("m", Role::Measure, ValueKind::Numeric),
    ])
    .unwrap();
    let rows = rows
        .iter()
        .map(|&(g, a, b, m)| {
            vec![
                Value::Integer(g),
                Value::Integer(a),
                Value::Integer(b),
                Value::Integer(m),
            ]
        })
        .collect();
    let mut c = Catalog::new();
    c.register("t", Relation::new(schema, rows).unwrap());
    Context::new(c)
}

/// Coefficients `[b0, b1, b2]`, or `None` when the design is rank deficient.
fn oracle(points: &[(f64, f64, f64)]) -> Option<Vec<f64>> {
    if points.len() < 3 {
        return None;
    }
    let x = DMatrix::from_fn(points.len(), 3, |i, j| match j {
        0 => 1.0,
        1 => points[i].0,
        _ => points[i].1,
    });
    let y = DVector::from_iterator(points.len(), points.iter().map(|p| p.2));
    let svd = x.svd(true, true);
    if svd.rank(1e-9) < 3 {
        return None;
    }
    Some(svd.solve(&y, 1e-12).unwrap().iter().copied().collect())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn coefficients_match_least_squares(rows in raw_rows()) {
        let ctx = context(&rows);
        let v = view(&ctx, "t", None, &["g", "x1", "x2"], AggFunc::Avg, "m");
        let mv = lift(&ctx, &v, &["x1".into(), "x2".into()], &["g".into()]).unwrap();
        let rel = ctx.evaluate(&v).unwrap();
        for g in 0..2i64 {
            let points: Vec<(f64, f64, f64)> = rel
                .rows()
                .iter()
                .filter(|r| r[0] == Value::Integer(g))
                .map(|r| (r[1].as_f64().unwrap(), r[2].as_f64().unwrap(), r[3].as_f64().unwrap()))
                .collect();
            let model = mv.models.get(&vec![Value::Integer(g)]);
            match oracle(&points) {
                Some(want) => {
                    let got = model.ok_or_else(|| TestCaseError::fail(format!("group {g} not fitted")))?;
                    for (a, b) in got.coefficients.iter().zip(&want) {
                        prop_assert!((a - b).abs() <= 1e-7 * (1.0 + b.abs()), "{:?} vs {:?}", got.coefficients, want);
                    }
                }
                None => prop_assert!(model.is_none(), "rank-deficient group {g} was fitted"),
            }
        }
    }
}
