//! The shipped scripts run end to end and give the hand-derived answers.

use std::path::PathBuf;

use vca_core::{Operand, Value};
use vca_dsl::Session;

fn scripts_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scripts")
}

fn run(file: &str) -> Session {
    let dir = scripts_dir();
    let src = std::fs::read_to_string(dir.join(file)).unwrap();
    let mut s = Session::new(&dir);
    s.run_script(&src).unwrap_or_else(|e| panic!("{file}: {e}"));
    s
}

/// `(chart, cyl, y)` triples; `y` is `None` for a null measure.
type Triples = Vec<(String, i64, Option<f64>)>;

fn triples(s: &Session, name: &str) -> Triples {
    let ctx = s.context();
    let mut out = Vec::new();
    match s.get(name).unwrap() {
        Operand::Set(vs) => {
            for (label, v) in ["c1", "c2", "c5"].iter().zip(vs.views()) {
                let rel = ctx.evaluate(v).unwrap();
                for r in rel.rows() {
                    let cyl = r[rel.schema().index_of("cyl").unwrap()].as_f64().unwrap() as i64;
                    let y = r[rel.schema().index_of("y").unwrap()].as_f64();
                    out.push((label.to_string(), cyl, y));
                }
            }
        }
        Operand::View(v) => {
            let rel = ctx.evaluate(v).unwrap();
            for r in rel.rows() {
                let cyl = r[rel.schema().index_of("cyl").unwrap()].as_f64().unwrap() as i64;
                let Value::Text(q) = &r[rel.schema().index_of("qid").unwrap()] else {
                    panic!("qid is text")
                };
                let y = r[rel.schema().index_of("y").unwrap()].as_f64();
                out.push((q.clone(), cyl, y));
            }
        }
        other => panic!("unexpected {}", other.kind_name()),
    }
    out.sort_by(|a, b| (&a.0, a.1).cmp(&(&b.0, b.1)));
    out
}

fn assert_triples(got: &Triples, want: &[(&str, i64, Option<f64>)]) {
    assert_eq!(got.len(), want.len(), "{got:?}");
    for (g, w) in got.iter().zip(want) {
        assert_eq!((g.0.as_str(), g.1), (w.0, w.1), "{got:?}");
        match (g.2, w.2) {
            (Some(a), Some(b)) => assert!((a - b).abs() <= 1e-9, "{got:?}"),
            (a, b) => assert_eq!(a, b, "{got:?}"),
        }
    }
}

#[test]
fn group_average_removed_from_each_chart() {
    let s = run("subtract_group_average.vca");
    assert_triples(
        &triples(&s, "r"),
        &[
            ("c1", 4, Some(2.0)),
            ("c1", 6, Some(2.0)),
            ("c2", 4, Some(-4.0)),
            ("c2", 6, Some(0.0)),
            ("c5", 4, None),
            ("c5", 6, Some(-2.0)),
        ],
    );
}

#[test]
fn overall_average_removed_from_union() {
    let s = run("subtract_overall_average.vca");
    assert_triples(
        &triples(&s, "r"),
        &[
            ("c1", 4, Some(8.0)),
            ("c1", 6, Some(-4.0)),
            ("c2", 4, Some(2.0)),
            ("c2", 6, Some(-6.0)),
            ("c5", 6, Some(-8.0)),
        ],
    );
}

#[test]
fn pooled_model_removed_from_each_chart() {
    let s = run("subtract_pooled_model.vca");
    assert_triples(
        &triples(&s, "r"),
        &[
            ("c1", 4, Some(3.0)),
            ("c1", 6, Some(2.0)),
            ("c2", 4, Some(-3.0)),
            ("c2", 6, Some(0.0)),
            ("c5", 6, Some(-2.0)),
        ],
    );
}

#[test]
fn three_analyses_differ() {
    let a = triples(&run("subtract_group_average.vca"), "r");
    let b = triples(&run("subtract_overall_average.vca"), "r");
    let c = triples(&run("subtract_pooled_model.vca"), "r");
    assert_ne!(a, b);
    assert_ne!(b, c);
    assert_ne!(a, c);
}

#[test]
fn airports_script() {
    let dir = scripts_dir();
    let src = std::fs::read_to_string(dir.join("airports.vca")).unwrap();
    let mut s = Session::new(&dir);
    let outs = s.run_script(&src).unwrap();
    let show = outs
        .iter()
        .find(|o| o.output.starts_with("-- sfo - oak"))
        .expect("show diff");
    assert!(show.output.contains("\"group_attrs\""));
    let sql = outs.last().unwrap();
    assert!(sql.output.contains("FULL OUTER JOIN"), "{}", sql.output);
    let rows = |name: &str| {
        let Operand::View(v) = s.get(name).unwrap() else {
            panic!()
        };
        let rel = s.context().evaluate(v).unwrap();
        rel.sorted_rows()
            .iter()
            .map(|r| r[1].as_f64().unwrap())
            .collect::<Vec<_>>()
    };
    assert_eq!(rows("diff"), vec![-5.0, 5.0, 15.0]);
    assert_eq!(rows("shifted"), vec![-10.0, -5.0, 0.0]);
    assert_eq!(rows("mean"), vec![12.5, 12.5, 12.5]);
    assert!(rows("residual").iter().all(|y| y.abs() <= 1e-8));
}

#[test]
fn replay_reproduces_bindings() {
    let s = run("subtract_overall_average.vca");
    let again = Session::replay(s.log(), vca_core::Context::new(Default::default()), scripts_dir()).unwrap();
    assert_eq!(
        s.bindings().keys().collect::<Vec<_>>(),
        again.bindings().keys().collect::<Vec<_>>()
    );
    for (name, op) in s.bindings() {
        let a = vca_dsl::render::operand_json(s.context(), op).unwrap();
        let b = vca_dsl::render::operand_json(again.context(), again.get(name).unwrap()).unwrap();
        assert_eq!(a, b, "{name}");
    }
}
