//! Random views and operator chains over a random fact table.

use rand::seq::IndexedRandom;
use rand::Rng;
use vca_core::algebra::{explode, extract, stat_binary, viewset_union};
use vca_core::{AggFunc, BinaryOp, Catalog, Context, Predicate, View, ViewSet};

use crate::fixtures::view;
use crate::gen::{random_predicate, random_table, Bounds};

/// A context holding one random table `t` without null dimensions.
pub fn random_context<R: Rng>(rng: &mut R, max_rows: usize) -> Context {
    let b = Bounds {
        max_rows,
        max_dims: 3,
        depth: 0,
        nulls: false,
    };
    let mut c = Catalog::new();
    c.register("t", random_table(rng, b));
    Context::new(c)
}

fn dims(ctx: &Context) -> Vec<String> {
    let t = ctx.catalog.get("t").unwrap();
    t.schema().dimensions().map(|a| a.name.clone()).collect()
}

fn dim_filter<R: Rng>(rng: &mut R, ctx: &Context) -> Option<Predicate> {
    if rng.random_bool(0.2) {
        return None;
    }
    let t = ctx.catalog.get("t").unwrap();
    let dim_schema = vca_core::Schema::new(t.schema().dimensions().cloned().collect()).unwrap();
    Some(random_predicate(rng, &dim_schema, 1))
}

/// A random nonempty subset of the dimensions of `t`, in schema order.
pub fn random_group<R: Rng>(rng: &mut R, ctx: &Context) -> Vec<String> {
    let all = dims(ctx);
    let mut g: Vec<String> = all.iter().filter(|_| rng.random_bool(0.6)).cloned().collect();
    if g.is_empty() {
        g.push(all.choose(rng).unwrap().clone());
    }
    g
}

/// A view over `t` grouped by `group` with a random dimension filter.
pub fn random_view<R: Rng>(rng: &mut R, ctx: &Context, group: &[String], func: AggFunc) -> View {
    let g: Vec<&str> = group.iter().map(String::as_str).collect();
    view(ctx, "t", dim_filter(rng, ctx), &g, func, "m")
}

/// Two views with identical grouping and aggregate but independent filters.
pub fn view_pair<R: Rng>(rng: &mut R, ctx: &Context, funcs: &[AggFunc]) -> (View, View) {
    let group = random_group(rng, ctx);
    let func = *funcs.choose(rng).unwrap();
    (random_view(rng, ctx, &group, func), random_view(rng, ctx, &group, func))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainOp {
    Union,
    Extract,
    Explode,
    Stat,
}

/// The steps applied, and the final view.
pub struct Chain {
    pub steps: Vec<ChainOp>,
    pub result: View,
}

fn apply<R: Rng>(rng: &mut R, ctx: &Context, v: &View, op: ChainOp) -> vca_core::Result<View> {
    match op {
        ChainOp::Union => {
            let other = extract(ctx, v, None)?;
            viewset_union(ctx, &ViewSet::new(vec![v.clone(), other])?, false)
        }
        ChainOp::Extract => {
            let schema = ctx.evaluate(v)?.schema().clone();
            let p = if rng.random_bool(0.5) {
                Some(random_predicate(rng, &schema, 1))
            } else {
                None
            };
            extract(ctx, v, p.as_ref())
        }
        ChainOp::Explode => {
            let attrs: Vec<String> = v.group_attrs.iter().filter(|_| rng.random_bool(0.5)).cloned().collect();
            let parts = explode(ctx, v, &attrs)?;
            Ok(parts.views().choose(rng).unwrap().clone())
        }
        ChainOp::Stat => {
            let other = extract(ctx, v, None)?;
            stat_binary(ctx, v, &other.into(), &BinaryOp::default(), false)
        }
    }
}

/// A chain of one to three structural operators followed by `last`.
pub fn random_chain<R: Rng>(rng: &mut R, ctx: &Context, last: ChainOp) -> vca_core::Result<Chain> {
    let group = random_group(rng, ctx);
    let mut v = random_view(rng, ctx, &group, AggFunc::Avg);
    let mut steps = Vec::new();
    let n = rng.random_range(0..3);
    for _ in 0..n {
        let op = *[ChainOp::Union, ChainOp::Extract, ChainOp::Explode]
            .choose(rng)
            .unwrap();
        v = apply(rng, ctx, &v, op)?;
        steps.push(op);
    }
    v = apply(rng, ctx, &v, last)?;
    steps.push(last);
    Ok(Chain { steps, result: v })
}
