//! Seeded checks of the algebra's laws. Each takes a seed, builds its own
//! random data, and returns `Err` with a description on violation.

use std::collections::BTreeMap;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vca_core::algebra::{explode, extract, stat_binary, viewset_stat};
use vca_core::expr::ArithOp;
use vca_core::lift::{sample_grid, samples_per_feature};
use vca_core::{
    check_compose, AggExpr, AggFunc, BinaryOp, ComposeKind, Context, Error, Predicate, Relation, Relationship, Value,
    View, ViewSet,
};

use crate::chains::{random_chain, random_context, random_group, random_view, view_pair, ChainOp};
use crate::oracle::{bag_diff, reference_eval, Table};

pub const FUNCS: [AggFunc; 5] = [AggFunc::Avg, AggFunc::Sum, AggFunc::Min, AggFunc::Max, AggFunc::Count];

pub type Check<T = ()> = Result<T, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn setup(seed: u64) -> (ChaCha8Rng, Context) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ctx = random_context(&mut rng, 8);
    (rng, ctx)
}

fn fail(e: Error) -> String {
    e.to_string()
}

fn negate(v: &Value) -> Value {
    match v {
        Value::Null => Value::Null,
        v => Value::Number(-v.as_f64().expect("numeric measure")),
    }
}

fn negate_y(t: &Table) -> Table {
    let yi = t.names.iter().position(|n| n == "y").expect("y column");
    let rows = t
        .rows
        .iter()
        .map(|r| {
            let mut r = r.clone();
            r[yi] = negate(&r[yi]);
            r
        })
        .collect();
    Table {
        names: t.names.clone(),
        rows,
    }
}

/// `y` indexed by group key.
fn by_key(rel: &Relation, group: &[String]) -> BTreeMap<Vec<Value>, Value> {
    let gi: Vec<usize> = group
        .iter()
        .map(|g| rel.schema().index_of(g).expect("group attr"))
        .collect();
    let yi = rel.schema().index_of("y").expect("y column");
    rel.rows()
        .iter()
        .map(|r| (gi.iter().map(|&i| r[i].clone()).collect(), r[yi].clone()))
        .collect()
}

fn same_measure(x: &Value, y: &Value) -> bool {
    match (x.as_f64(), y.as_f64()) {
        (Some(a), Some(b)) => (a - b).abs() <= 1e-9,
        _ => x.is_null() && y.is_null(),
    }
}

fn negated(x: &Value, y: &Value) -> bool {
    same_measure(x, &negate(y))
}

/// Composes a random pair both ways and checks `check(y_ab, y_ba)` on every
/// key present in both inputs. When both directions are exact matches
/// (no single-value drop), the results must also agree row for row after
/// `align`. Returns whether that row-for-row branch ran.
fn law(seed: u64, op: BinaryOp, check: fn(&Value, &Value) -> bool, align: fn(&Table) -> Table) -> Check<bool> {
    let (mut rng, ctx) = setup(seed);
    let (a, b) = view_pair(&mut rng, &ctx, &FUNCS);
    let ab = stat_binary(&ctx, &a, &b.clone().into(), &op, false).map_err(fail)?;
    let ba = stat_binary(&ctx, &b, &a.clone().into(), &op, false).map_err(fail)?;
    let (ea, eb) = (ctx.evaluate(&a).map_err(fail)?, ctx.evaluate(&b).map_err(fail)?);
    let (rab, rba) = (ctx.evaluate(&ab).map_err(fail)?, ctx.evaluate(&ba).map_err(fail)?);
    let g = &a.group_attrs;
    let (ka, kb) = (by_key(&ea, g), by_key(&eb, g));
    let (yab, yba) = (by_key(&rab, g), by_key(&rba, g));
    for k in ka.keys().filter(|k| kb.contains_key(*k)) {
        let (x, y) = (yab.get(k), yba.get(k));
        ensure!(
            matches!((x, y), (Some(x), Some(y)) if check(x, y)),
            "key {k:?}: {x:?} vs {y:?}"
        );
    }
    let exact = |l: &View, r: &View| {
        check_compose(&ctx, l, &r.clone().into(), ComposeKind::Stat).relationship == Some(Relationship::Exact)
    };
    let both_exact = exact(&a, &b) && exact(&b, &a);
    if both_exact {
        if let Some(d) = bag_diff(&Table::from(&rab), &align(&Table::from(&rba)), 1e-9) {
            return Err(d);
        }
    }
    Ok(both_exact)
}

/// `A - B` is the negation of `B - A`.
pub fn antisymmetry(seed: u64) -> Check<bool> {
    law(seed, BinaryOp::default(), negated, negate_y)
}

/// `A + B` equals `B + A`.
pub fn symmetry(seed: u64) -> Check<bool> {
    law(seed, BinaryOp::Arith(ArithOp::Add), same_measure, Table::clone)
}

fn any_view(seed: u64) -> (ChaCha8Rng, Context, View) {
    let (mut rng, ctx) = setup(seed);
    let group = random_group(&mut rng, &ctx);
    let func = *FUNCS.choose(&mut rng).expect("nonempty");
    let v = random_view(&mut rng, &ctx, &group, func);
    (rng, ctx, v)
}

/// `V - V` keeps V's keys and has zero (or null) measure.
pub fn self_difference(seed: u64) -> Check {
    let (_, ctx, v) = any_view(seed);
    let d = stat_binary(&ctx, &v, &v.clone().into(), &BinaryOp::default(), false).map_err(fail)?;
    let orig = ctx.evaluate(&v).map_err(fail)?;
    let out = ctx.evaluate(&d).map_err(fail)?;
    ensure!(out.len() == orig.len(), "{} rows, expected {}", out.len(), orig.len());
    let yi = out.schema().index_of("y").expect("y");
    let oi = orig.schema().index_of("y").expect("y");
    for (r, o) in out.sorted_rows().iter().zip(orig.sorted_rows()) {
        ensure!(r[..yi] == o[..oi], "keys differ: {r:?} vs {o:?}");
        let ok = match &o[oi] {
            Value::Null => r[yi].is_null(),
            _ => r[yi].as_f64() == Some(0.0),
        };
        ensure!(ok, "row {r:?} from {o:?}");
    }
    Ok(())
}

/// `extract(V, true)` is V.
pub fn extract_identity(seed: u64) -> Check {
    let (_, ctx, v) = any_view(seed);
    let e = extract(&ctx, &v, Some(&Predicate::Const(true))).map_err(fail)?;
    let (re, rv) = (ctx.evaluate(&e).map_err(fail)?, ctx.evaluate(&v).map_err(fail)?);
    ensure!(re.same_rows(&rv), "rows differ");
    ensure!(e.group_attrs == v.group_attrs, "grouping changed");
    ensure!(e.canonical, "not canonical");
    Ok(())
}

/// `viewset_stat(explode(V, A_e), f)` regroups V's raw rows without the
/// exploded attributes and without attributes constant inside every part.
/// Returns `false` when V is empty and the case was skipped.
pub fn explode_round_trip(seed: u64) -> Check<bool> {
    let (mut rng, ctx) = setup(seed);
    let group = random_group(&mut rng, &ctx);
    let func = *FUNCS.choose(&mut rng).expect("nonempty");
    let v = random_view(&mut rng, &ctx, &group, func);
    let rel = ctx.evaluate(&v).map_err(fail)?;
    if rel.is_empty() {
        return Ok(false);
    }
    let attrs: Vec<String> = group.iter().filter(|_| rng.random_bool(0.5)).cloned().collect();
    let parts = explode(&ctx, &v, &attrs).map_err(fail)?;
    let back = viewset_stat(&ctx, &parts, func, false).map_err(fail)?;

    let idx = |a: &String| rel.schema().index_of(a).expect("attr");
    let key_of = |r: &[Value]| -> Vec<Value> { attrs.iter().map(|a| r[idx(a)].clone()).collect() };
    let mut tuples: Vec<Vec<Value>> = Vec::new();
    for r in rel.rows() {
        let k = key_of(r);
        if !tuples.contains(&k) {
            tuples.push(k);
        }
    }
    let constant_everywhere = |g: &String| {
        tuples.iter().all(|t| {
            let mut seen: Vec<&Value> = Vec::new();
            for r in rel.rows().iter().filter(|r| &key_of(r) == t) {
                if !seen.contains(&&r[idx(g)]) {
                    seen.push(&r[idx(g)]);
                }
            }
            seen.len() == 1
        })
    };
    let kept: Vec<String> = group
        .iter()
        .filter(|g| !attrs.contains(g) && !constant_everywhere(g))
        .cloned()
        .collect();
    let canon = v.canonical_parts().ok_or("random view is not canonical")?;
    let plan = canon.q.clone().group_agg(
        kept.clone(),
        AggExpr {
            func,
            attr: "m".into(),
            alias: "y".into(),
        },
    );
    let want = reference_eval(&plan, &ctx.catalog)?;
    ensure!(
        back.group_attrs == kept,
        "grouped by {:?}, expected {kept:?}",
        back.group_attrs
    );
    let got = ctx.evaluate(&back).map_err(fail)?;
    if let Some(d) = bag_diff(&want, &Table::from(&got), 1e-9) {
        return Err(d);
    }
    if attrs.is_empty() && kept == group {
        ensure!(got.same_rows(&rel), "round trip over no attributes changed V");
    }
    Ok(true)
}

/// The model-view sampling grid stays within 1000 points per model and
/// inside the feature domains.
pub fn sampling_cap(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.random_range(1..=6);
    let domains: Vec<(f64, f64)> = (0..k)
        .map(|_| {
            let lo = rng.random_range(-1e6..1e6);
            (lo, lo + rng.random_range(0.0..1e6))
        })
        .collect();
    let grid = sample_grid(&domains);
    ensure!(grid.len() <= 1000, "{} samples for {k} features", grid.len());
    ensure!(
        samples_per_feature(k).pow(k as u32) <= 1000,
        "per-feature count too high for {k}"
    );
    for p in &grid {
        ensure!(p.len() == k, "point of arity {}", p.len());
        for (x, (lo, hi)) in p.iter().zip(&domains) {
            ensure!(*x >= *lo && *x <= *hi, "{x} outside [{lo}, {hi}]");
        }
    }
    Ok(())
}

/// Builds a random operator chain ending in `last` and feeds its result to
/// n-ary statistical composition: accepted after union, extract and explode,
/// refused with a closure error after statistical composition. Returns
/// `None` when the random data could not support such a chain.
pub fn closure(rng: &mut ChaCha8Rng, last: ChainOp) -> Check<Option<Vec<ChainOp>>> {
    let ctx = random_context(rng, 8);
    let Ok(chain) = random_chain(rng, &ctx, last) else {
        return Ok(None);
    };
    let vs = ViewSet::new(vec![chain.result.clone(), chain.result.clone()]).map_err(fail)?;
    let out = viewset_stat(&ctx, &vs, AggFunc::Avg, false);
    if last == ChainOp::Stat {
        ensure!(!chain.result.canonical, "{:?}: result still canonical", chain.steps);
        ensure!(matches!(out, Err(Error::Closure { .. })), "{:?}: {out:?}", chain.steps);
    } else {
        ensure!(chain.result.canonical, "{:?}: result not canonical", chain.steps);
        let v = out.map_err(|e| format!("{:?}: {e}", chain.steps))?;
        ensure!(v.canonical, "{:?}: composed result not canonical", chain.steps);
        ctx.evaluate(&v).map_err(fail)?;
    }
    Ok(Some(chain.steps))
}
