//! Seeded generators for random relations and well-typed plans.

use rand::seq::IndexedRandom;
use rand::Rng;
use vca_core::expr::{ArithOp, CompareOp, Predicate, ScalarExpr};
use vca_core::{
    AggExpr, AggFunc, AttributeDef, Catalog, JoinKind, Plan, ProjectItem, Relation, Role, Schema, Value, ValueKind,
};

pub const LABELS: [&str; 3] = ["a", "b", "c"];

/// Bounds for generated data.
#[derive(Debug, Clone, Copy)]
pub struct Bounds {
    pub max_rows: usize,
    pub max_dims: usize,
    pub depth: usize,
    /// Allow null dimension values.
    pub nulls: bool,
}

impl Default for Bounds {
    fn default() -> Self {
        Self {
            max_rows: 8,
            max_dims: 3,
            depth: 3,
            nulls: true,
        }
    }
}

fn random_measure<R: Rng>(rng: &mut R, integral: bool) -> Value {
    if rng.random_bool(0.08) {
        Value::Null
    } else if integral {
        Value::Integer(rng.random_range(-5..=20))
    } else {
        Value::Number(rng.random_range(-20..=40) as f64 / 4.0)
    }
}

fn random_dim<R: Rng>(rng: &mut R, kind: ValueKind, nulls: bool) -> Value {
    if nulls && rng.random_bool(0.05) {
        return Value::Null;
    }
    match kind {
        ValueKind::Categorical => Value::text(*LABELS.choose(rng).unwrap()),
        _ => Value::Integer(rng.random_range(0..3)),
    }
}

/// A table of `d0..dk` dimensions (integer or text) and one numeric measure `m`.
pub fn random_table<R: Rng>(rng: &mut R, b: Bounds) -> Relation {
    let k = rng.random_range(1..=b.max_dims.max(1));
    let kinds: Vec<ValueKind> = (0..k)
        .map(|_| {
            if rng.random_bool(0.5) {
                ValueKind::Numeric
            } else {
                ValueKind::Categorical
            }
        })
        .collect();
    let mut attrs: Vec<AttributeDef> = kinds
        .iter()
        .enumerate()
        .map(|(i, &kd)| AttributeDef::dimension(format!("d{i}"), kd))
        .collect();
    attrs.push(AttributeDef::new("m", Role::Measure, ValueKind::Numeric));
    let integral = rng.random_bool(0.5);
    let n = rng.random_range(0..=b.max_rows);
    let rows = (0..n)
        .map(|_| {
            let mut r: Vec<Value> = kinds.iter().map(|&kd| random_dim(rng, kd, b.nulls)).collect();
            r.push(random_measure(rng, integral));
            r
        })
        .collect();
    Relation::new(Schema::new(attrs).unwrap(), rows).unwrap()
}

/// Two random tables named `r0` and `r1`.
pub fn random_catalog<R: Rng>(rng: &mut R, b: Bounds) -> Catalog {
    let mut c = Catalog::new();
    for name in ["r0", "r1"] {
        c.register(name, random_table(rng, b));
    }
    c
}

fn literal_for<R: Rng>(rng: &mut R, kind: ValueKind) -> Value {
    match kind {
        ValueKind::Categorical => Value::text(*["a", "b", "c", "z"].choose(rng).unwrap()),
        _ => {
            if rng.random_bool(0.7) {
                Value::Integer(rng.random_range(-2..8))
            } else {
                Value::Number(rng.random_range(-8..32) as f64 / 4.0)
            }
        }
    }
}

/// A random predicate over the columns of `schema`.
pub fn random_predicate<R: Rng>(rng: &mut R, schema: &Schema, depth: usize) -> Predicate {
    let attrs = schema.attrs();
    let a = attrs.choose(rng).unwrap();
    let x = ScalarExpr::col(a.name.clone());
    let choice = if depth == 0 {
        rng.random_range(0..5)
    } else {
        rng.random_range(0..9)
    };
    match choice {
        0 | 1 => {
            let op = *[
                CompareOp::Eq,
                CompareOp::Ne,
                CompareOp::Lt,
                CompareOp::Le,
                CompareOp::Gt,
                CompareOp::Ge,
            ]
            .choose(rng)
            .unwrap();
            let peers: Vec<&AttributeDef> = attrs.iter().filter(|b| b.kind == a.kind && b.name != a.name).collect();
            let right = match peers.choose(rng) {
                Some(b) if rng.random_bool(0.3) => ScalarExpr::col(b.name.clone()),
                _ => ScalarExpr::lit(literal_for(rng, a.kind)),
            };
            Predicate::Compare { left: x, op, right }
        }
        2 => {
            let n = rng.random_range(0..4);
            Predicate::InSet {
                expr: x,
                values: (0..n).map(|_| literal_for(rng, a.kind)).collect(),
            }
        }
        3 => Predicate::InRange {
            expr: x,
            low: literal_for(rng, a.kind),
            high: literal_for(rng, a.kind),
        },
        4 => Predicate::IsNull(x),
        5 => Predicate::Not(Box::new(random_predicate(rng, schema, depth - 1))),
        6 => Predicate::And(
            Box::new(random_predicate(rng, schema, depth - 1)),
            Box::new(random_predicate(rng, schema, depth - 1)),
        ),
        7 => Predicate::Or(
            Box::new(random_predicate(rng, schema, depth - 1)),
            Box::new(random_predicate(rng, schema, depth - 1)),
        ),
        _ => Predicate::Const(rng.random_bool(0.5)),
    }
}

struct PlanGen<'a, R> {
    rng: &'a mut R,
    catalog: &'a Catalog,
    bounds: Bounds,
    fresh: usize,
}

impl<R: Rng> PlanGen<'_, R> {
    fn fresh(&mut self, base: &str) -> String {
        self.fresh += 1;
        format!("{base}_{}", self.fresh)
    }

    fn schema(&self, p: &Plan) -> Schema {
        p.schema(self.catalog).expect("generator keeps plans well typed")
    }

    fn leaf(&mut self) -> Plan {
        if self.rng.random_bool(0.1) {
            let b = Bounds {
                max_rows: 3,
                ..self.bounds
            };
            Plan::values(random_table(self.rng, b))
        } else {
            Plan::scan(*["r0", "r1"].choose(self.rng).unwrap())
        }
    }

    fn node(&mut self, depth: usize) -> Plan {
        if depth == 0 {
            return self.leaf();
        }
        match self.rng.random_range(0..8) {
            0 => self.leaf(),
            1 => {
                let child = self.node(depth - 1);
                let p = random_predicate(self.rng, &self.schema(&child), 2);
                child.filter(p)
            }
            2 => self.project(depth),
            3 | 4 => self.group(depth),
            5 | 6 => self.join(depth),
            _ => self.union(depth),
        }
    }

    fn project(&mut self, depth: usize) -> Plan {
        let child = self.node(depth - 1);
        let schema = self.schema(&child);
        let mut items: Vec<ProjectItem> = schema
            .names()
            .filter(|_| self.rng.random_bool(0.7))
            .map(ProjectItem::keep)
            .collect();
        if items.is_empty() {
            items.push(ProjectItem::keep(schema.attrs()[0].name.clone()));
        }
        let numeric: Vec<String> = schema
            .attrs()
            .iter()
            .filter(|a| a.kind == ValueKind::Numeric)
            .map(|a| a.name.clone())
            .collect();
        if !numeric.is_empty() && self.rng.random_bool(0.6) {
            let op = *[ArithOp::Add, ArithOp::Sub, ArithOp::Mul, ArithOp::Div]
                .choose(self.rng)
                .unwrap();
            let l = ScalarExpr::col(numeric.choose(self.rng).unwrap().clone());
            let r = if self.rng.random_bool(0.5) {
                ScalarExpr::col(numeric.choose(self.rng).unwrap().clone())
            } else {
                ScalarExpr::lit(literal_for(self.rng, ValueKind::Numeric))
            };
            let alias = self.fresh("e");
            items.push(ProjectItem::new(ScalarExpr::arith(op, l, r), alias));
        }
        if self.rng.random_bool(0.2) {
            let alias = self.fresh("k");
            items.push(ProjectItem::new(
                ScalarExpr::lit(literal_for(self.rng, ValueKind::Categorical)),
                alias,
            ));
        }
        child.project(items)
    }

    fn group(&mut self, depth: usize) -> Plan {
        let child = self.node(depth - 1);
        let schema = self.schema(&child);
        let measures: Vec<&AttributeDef> = schema.measures().filter(|a| a.kind == ValueKind::Numeric).collect();
        let Some(m) = measures.choose(self.rng) else {
            return child;
        };
        let attr = m.name.clone();
        let group: Vec<String> = schema
            .dimensions()
            .filter(|_| self.rng.random_bool(0.5))
            .map(|a| a.name.clone())
            .collect();
        let func = *AggFunc::ALL.choose(self.rng).unwrap();
        let alias = self.fresh("y");
        child.group_agg(group, AggExpr { func, attr, alias })
    }

    fn join(&mut self, depth: usize) -> Plan {
        let left = self.node(depth - 1);
        let right = self.node(depth - 1);
        let ls = self.schema(&left);
        let rs = self.schema(&right);
        let keys: Vec<String> = rs
            .dimensions()
            .filter(|a| {
                ls.get(&a.name)
                    .is_some_and(|l| l.kind == a.kind && l.role == Role::Dimension)
            })
            .filter(|_| self.rng.random_bool(0.7))
            .map(|a| a.name.clone())
            .collect();
        let items: Vec<ProjectItem> = rs
            .names()
            .map(str::to_string)
            .collect::<Vec<_>>()
            .into_iter()
            .map(|n| {
                if keys.contains(&n) {
                    ProjectItem::keep(n)
                } else {
                    let to = self.fresh(&n);
                    ProjectItem::rename(n, to)
                }
            })
            .collect();
        let kind = *[JoinKind::Inner, JoinKind::LeftOuter, JoinKind::FullOuter]
            .choose(self.rng)
            .unwrap();
        Plan::join(kind, left, right.project(items), keys)
    }

    fn union(&mut self, depth: usize) -> Plan {
        let child = self.node(depth - 1);
        let schema = self.schema(&child);
        let n = self.rng.random_range(2..=3);
        let inputs = (0..n)
            .map(|_| {
                let p = random_predicate(self.rng, &schema, 1);
                let branch = child.clone().filter(p);
                if self.rng.random_bool(0.3) {
                    let mut names: Vec<String> = schema.names().map(str::to_string).collect();
                    names.reverse();
                    branch.project(names.into_iter().map(ProjectItem::keep).collect())
                } else {
                    branch
                }
            })
            .collect();
        Plan::Union { inputs }
    }
}

/// A random well-typed plan over tables `r0` and `r1` of `catalog`.
pub fn random_plan<R: Rng>(rng: &mut R, catalog: &Catalog, bounds: Bounds) -> Plan {
    let mut g = PlanGen {
        rng,
        catalog,
        bounds,
        fresh: 0,
    };
    g.node(bounds.depth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn plans_type_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..300 {
            let cat = random_catalog(&mut rng, Bounds::default());
            let p = random_plan(&mut rng, &cat, Bounds::default());
            p.schema(&cat).unwrap();
        }
    }
}
