//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Criterion 8 drives the `vca` binary on the shipped scripts.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value as Json;
use vca_core::algebra::{compose_binary, viewset_stat};
use vca_core::sqlgen::compile;
use vca_core::{
    check_compose, constant_operand, eval_plan, lift, AggFunc, AttributeDef, BinaryOp, Catalog, ComposeKind, Context,
    Operand, Relation, Role, Schema, Status, Value, ValueKind, View, ViewSet,
};
use vca_testkit::chains::ChainOp;
use vca_testkit::fixtures::{airport, catalog_with, flights, flights_catalog, flights_two_rows, view};
use vca_testkit::gen::{random_catalog, random_plan, Bounds};
use vca_testkit::{bag_diff, laws, sqlite, Table};

type Outcome = Result<String, String>;

const TOL: f64 = 1e-9;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOL * a.abs().max(b.abs()).max(1.0)
}

/// `(key, y)` pairs of a view grouped by one attribute, sorted by key.
fn pairs(ctx: &Context, v: &View) -> Result<Vec<(f64, Option<f64>)>, String> {
    let rel = ctx.evaluate(v).map_err(|e| e.to_string())?;
    let yi = rel.schema().index_of("y").ok_or("no y column")?;
    let mut out: Vec<(f64, Option<f64>)> = rel
        .rows()
        .iter()
        .map(|r| (r[0].as_f64().unwrap_or(f64::NAN), r[yi].as_f64()))
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(out)
}

fn expect(got: &[(f64, Option<f64>)], want: &[(f64, f64)]) -> Outcome {
    let ok = got.len() == want.len()
        && got
            .iter()
            .zip(want)
            .all(|(g, w)| g.0 == w.0 && g.1.is_some_and(|y| close(y, w.1)));
    let shown: Vec<String> = got
        .iter()
        .map(|(k, y)| format!("({k}, {})", y.map_or("null".into(), |y| y.to_string())))
        .collect();
    let shown = format!("{{{}}}", shown.join(", "));
    if ok {
        Ok(shown)
    } else {
        Err(format!("got {shown}, expected {want:?}"))
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn airports(ctx: &Context) -> (View, View) {
    (airport(ctx, "SFO"), airport(ctx, "OAK"))
}

fn view_of(op: Operand) -> Result<View, String> {
    match op {
        Operand::View(v) => Ok(v),
        other => Err(format!("expected a view, got a {}", other.kind_name())),
    }
}

fn difference_of_airports() -> Outcome {
    let ctx = Context::new(flights_catalog());
    let (sfo, oak) = airports(&ctx);
    let d = view_of(compose_binary(&ctx, &sfo.into(), &oak.into(), &BinaryOp::default(), false).map_err(err)?)?;
    expect(&pairs(&ctx, &d)?, &[(1.0, -5.0), (2.0, 5.0), (3.0, 15.0)])
}

fn constant_difference() -> Outcome {
    let ctx = Context::new(flights_catalog());
    let (sfo, _) = airports(&ctx);
    let c = Operand::Constant(constant_operand(20.0).map_err(err)?);
    let d = view_of(compose_binary(&ctx, &sfo.into(), &c, &BinaryOp::default(), false).map_err(err)?)?;
    expect(&pairs(&ctx, &d)?, &[(1.0, -10.0), (2.0, -5.0), (3.0, 0.0)])
}

fn viewset_average() -> Outcome {
    let mut details = Vec::new();
    for (rel, want) in [
        (flights(), [(1.0, 12.5), (2.0, 12.5), (3.0, 12.5)]),
        (flights_two_rows(), [(1.0, 35.0 / 3.0), (2.0, 40.0 / 3.0), (3.0, 15.0)]),
    ] {
        let ctx = Context::new(catalog_with("flights", rel));
        let (sfo, oak) = airports(&ctx);
        let vs = ViewSet::new(vec![sfo, oak]).map_err(err)?;
        let m = viewset_stat(&ctx, &vs, AggFunc::Avg, false).map_err(err)?;
        details.push(expect(&pairs(&ctx, &m)?, &want)?);
    }
    Ok(details.join(" and "))
}

fn lift_recovers_line() -> Outcome {
    let ctx = Context::new(flights_catalog());
    let (sfo, _) = airports(&ctx);
    let mv = lift(&ctx, &sfo, &["date".into()], &[]).map_err(err)?;
    let [model] = mv.models.values().collect::<Vec<_>>()[..] else {
        return Err(format!("{} models fitted, expected 1", mv.models.len()));
    };
    let (b0, b1) = (model.intercept(), model.slopes()[0]);
    if !close(b0, 5.0) || !close(b1, 5.0) {
        return Err(format!("intercept {b0}, slope {b1}"));
    }
    let r = view_of(compose_binary(&ctx, &sfo.into(), &Operand::Model(mv), &BinaryOp::default(), false).map_err(err)?)?;
    let res = pairs(&ctx, &r)?;
    if res.len() != 3 || !res.iter().all(|(_, y)| y.is_some_and(|y| y.abs() <= TOL)) {
        return Err(format!("residuals {res:?}"));
    }
    Ok(format!(
        "slope {b1}, intercept {b0}, residuals {:?}",
        res.iter().map(|p| p.1.unwrap()).collect::<Vec<_>>()
    ))
}

fn one_measure_table(dim: &str, measure: &str, rows: &[(&str, i64)]) -> Relation {
    let schema = Schema::new(vec![
        AttributeDef::dimension(dim, ValueKind::Categorical),
        AttributeDef::new(measure, Role::Measure, ValueKind::Numeric),
    ])
    .expect("schema");
    let rows = rows
        .iter()
        .map(|(d, m)| vec![Value::text(*d), Value::Integer(*m)])
        .collect();
    Relation::new(schema, rows).expect("rows")
}

fn safety_verdicts() -> Outcome {
    let ctx = Context::new(flights_catalog());
    let avg = view(&ctx, "flights", None, &["date"], AggFunc::Avg, "delay");
    let min = view(&ctx, "flights", None, &["date"], AggFunc::Min, "delay");
    let count = view(&ctx, "flights", None, &["date"], AggFunc::Count, "delay");
    let mut cat = Catalog::new();
    cat.register("sales", one_measure_table("region", "profits", &[("n", 10), ("s", 7)]));
    cat.register("costs", one_measure_table("region", "losses", &[("n", 4), ("s", 9)]));
    let money = Context::new(cat);
    let profits = view(&money, "sales", None, &["region"], AggFunc::Sum, "profits");
    let losses = view(&money, "costs", None, &["region"], AggFunc::Sum, "losses");
    let got = [
        check_compose(&ctx, &avg, &min.into(), ComposeKind::Stat).status,
        check_compose(&ctx, &avg, &count.into(), ComposeKind::Stat).status,
        check_compose(&money, &profits, &losses.into(), ComposeKind::Stat).status,
    ];
    let want = [Status::Safe, Status::Rejected, Status::Overridable];
    let shown = format!(
        "avg~min {:?}, avg~count {:?}, profits~losses {:?}",
        got[0], got[1], got[2]
    );
    if got == want {
        Ok(shown)
    } else {
        Err(shown)
    }
}

fn closure_chains() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let kinds = [ChainOp::Union, ChainOp::Extract, ChainOp::Explode, ChainOp::Stat];
    let (mut accepted, mut refused, mut attempts) = (0, 0, 0);
    while accepted + refused < 20 {
        attempts += 1;
        if attempts > 1000 {
            return Err(format!("only {} chains could be built", accepted + refused));
        }
        let last = *kinds.choose(&mut rng).expect("nonempty");
        match laws::closure(&mut rng, last)? {
            Some(_) if last == ChainOp::Stat => refused += 1,
            Some(_) => accepted += 1,
            None => {}
        }
    }
    if accepted == 0 || refused == 0 {
        return Err(format!("{accepted} accepted, {refused} refused; both kinds needed"));
    }
    Ok(format!(
        "20 chains: {accepted} composable, {refused} refused with a closure error"
    ))
}

fn sql_equivalence() -> Outcome {
    let start = Instant::now();
    let mut nonempty = 0;
    for seed in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cat = random_catalog(&mut rng, Bounds::default());
        let plan = random_plan(&mut rng, &cat, Bounds::default());
        let ours = Table::from(&eval_plan(&plan, &cat).map_err(|e| format!("seed {seed}: {e}"))?);
        let sql = compile(&plan, &cat).map_err(|e| format!("seed {seed}: {e}"))?;
        let theirs = sqlite::run(&cat, &sql.text).map_err(|e| format!("seed {seed}: {e}\n{}", sql.text))?;
        if let Some(d) = bag_diff(&ours, &theirs, TOL) {
            return Err(format!("seed {seed}: {d}\n{}", sql.text));
        }
        nonempty += usize::from(!ours.rows.is_empty());
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(60) {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!(
        "200 plans ({nonempty} nonempty) agree in {:.2}s",
        elapsed.as_secs_f64()
    ))
}

type Triples = Vec<(String, i64, Option<f64>)>;

/// Runs a shipped script through the binary and reads back binding `r`.
fn script_result(name: &str) -> Result<Triples, String> {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..");
    let out = tempfile::tempdir().map_err(err)?;
    let status = Command::new(env!("CARGO_BIN_EXE_vca"))
        .arg("run")
        .arg(root.join("scripts").join(name))
        .arg("--json-out")
        .arg(out.path())
        .output()
        .map_err(err)?;
    if !status.status.success() {
        return Err(format!("{name}: {}", String::from_utf8_lossy(&status.stderr)));
    }
    let text = std::fs::read_to_string(out.path().join("r.json")).map_err(err)?;
    let json: Json = serde_json::from_str(&text).map_err(err)?;
    let mut triples = Vec::new();
    let row = |label: String, r: &Json| (label, r["cyl"].as_f64().unwrap_or(f64::NAN) as i64, r["y"].as_f64());
    match json["kind"].as_str() {
        Some("viewset") => {
            for (label, v) in ["c1", "c2", "c5"]
                .iter()
                .zip(json["views"].as_array().ok_or("no views")?)
            {
                for r in v["rows"].as_array().ok_or("no rows")? {
                    triples.push(row(label.to_string(), r));
                }
            }
        }
        Some("view") => {
            for r in json["rows"].as_array().ok_or("no rows")? {
                triples.push(row(r["qid"].as_str().unwrap_or("?").to_string(), r));
            }
        }
        other => return Err(format!("{name}: unexpected result kind {other:?}")),
    }
    triples.sort_by(|a, b| (&a.0, a.1).cmp(&(&b.0, b.1)));
    Ok(triples)
}

fn matches(got: &Triples, want: &[(&str, i64, Option<f64>)]) -> bool {
    got.len() == want.len()
        && got.iter().zip(want).all(|(g, w)| {
            g.0 == w.0
                && g.1 == w.1
                && match (g.2, w.2) {
                    (Some(a), Some(b)) => close(a, b),
                    (a, b) => a == b,
                }
        })
}

fn three_analyses() -> Outcome {
    let cases: [(&str, Vec<(&str, i64, Option<f64>)>); 3] = [
        (
            "subtract_group_average.vca",
            vec![
                ("c1", 4, Some(2.0)),
                ("c1", 6, Some(2.0)),
                ("c2", 4, Some(-4.0)),
                ("c2", 6, Some(0.0)),
                ("c5", 4, None),
                ("c5", 6, Some(-2.0)),
            ],
        ),
        (
            "subtract_overall_average.vca",
            vec![
                ("c1", 4, Some(8.0)),
                ("c1", 6, Some(-4.0)),
                ("c2", 4, Some(2.0)),
                ("c2", 6, Some(-6.0)),
                ("c5", 6, Some(-8.0)),
            ],
        ),
        (
            "subtract_pooled_model.vca",
            vec![
                ("c1", 4, Some(3.0)),
                ("c1", 6, Some(2.0)),
                ("c2", 4, Some(-3.0)),
                ("c2", 6, Some(0.0)),
                ("c5", 6, Some(-2.0)),
            ],
        ),
    ];
    let mut results = Vec::new();
    for (script, want) in &cases {
        let got = script_result(script)?;
        if !matches(&got, want) {
            return Err(format!("{script}: got {got:?}"));
        }
        results.push(got);
    }
    for i in 0..3 {
        for j in i + 1..3 {
            if results[i] == results[j] {
                return Err(format!("{} and {} agree", cases[i].0, cases[j].0));
            }
        }
    }
    Ok("three scripts match their hand-derived values and differ pairwise".into())
}

fn property_suite() -> Outcome {
    const N: usize = 100;
    let mut report = Vec::new();
    // symmetric laws: count only cases where the full result comparison ran
    for (name, law) in [
        ("antisymmetry of -", laws::antisymmetry as fn(u64) -> laws::Check<bool>),
        ("symmetry of +", laws::symmetry),
    ] {
        let mut full = 0;
        let mut seed = 0u64;
        while full < N {
            if seed > 5000 {
                return Err(format!("{name}: only {full} full comparisons"));
            }
            full += usize::from(law(seed).map_err(|e| format!("{name}, seed {seed}: {e}"))?);
            seed += 1;
        }
        report.push(format!("{name} {N} full comparisons over {seed} seeds"));
    }
    for (name, law) in [
        ("self-difference", laws::self_difference as fn(u64) -> laws::Check),
        ("extract(true)", laws::extract_identity),
        ("sampling cap", laws::sampling_cap),
    ] {
        for seed in 0..N as u64 {
            law(seed).map_err(|e| format!("{name}, seed {seed}: {e}"))?;
        }
        report.push(format!("{name} {N}"));
    }
    let (mut ran, mut seed) = (0, 0u64);
    while ran < N {
        if seed > 5000 {
            return Err(format!("explode round trip: only {ran} nonempty cases"));
        }
        ran +=
            usize::from(laws::explode_round_trip(seed).map_err(|e| format!("explode round trip, seed {seed}: {e}"))?);
        seed += 1;
    }
    report.push(format!("explode round trip {N}"));
    Ok(format!("cases per law: {}", report.join(", ")))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("SFO - OAK difference", difference_of_airports),
        ("SFO - constant 20", constant_difference),
        ("viewset average on raw rows", viewset_average),
        ("lift fits slope 5, intercept 5, zero residuals", lift_recovers_line),
        ("safety verdicts", safety_verdicts),
        ("closure over random chains", closure_chains),
        ("random plans: SQLite matches the executor", sql_equivalence),
        ("three cars analyses via the CLI", three_analyses),
        ("property suite", property_suite),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into());
            Err(msg)
        });
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
