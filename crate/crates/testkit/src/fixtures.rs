//! Small hand-checkable datasets.

use vca_core::{
    make_view, AggFunc, AttributeDef, Catalog, Context, MarkType, Predicate, Relation, Role, Schema, Value, ValueKind,
    View, ViewSpec,
};

fn flights_schema() -> Schema {
    Schema::new(vec![
        AttributeDef::dimension("date", ValueKind::Numeric),
        AttributeDef::dimension("src", ValueKind::Categorical),
        AttributeDef::new("delay", Role::Measure, ValueKind::Numeric),
    ])
    .expect("static schema")
}

fn rows(data: &[(i64, &str, i64)]) -> Vec<Vec<Value>> {
    data.iter()
        .map(|&(d, s, y)| vec![Value::Integer(d), Value::text(s), Value::Integer(y)])
        .collect()
}

/// Daily delays out of SFO and OAK, one row per (date, src).
pub fn flights() -> Relation {
    let data = [
        (1, "SFO", 10),
        (2, "SFO", 15),
        (3, "SFO", 20),
        (1, "OAK", 15),
        (2, "OAK", 10),
        (3, "OAK", 5),
    ];
    Relation::new(flights_schema(), rows(&data)).expect("static rows")
}

/// Same per-view averages as [`flights`] but SFO has two rows per date, so an
/// average of the two views' averages differs from an average over raw rows.
///
/// avg over rows: date 1 -> 35/3, date 2 -> 40/3, date 3 -> 15.
pub fn flights_two_rows() -> Relation {
    let data = [
        (1, "SFO", 5),
        (1, "SFO", 15),
        (2, "SFO", 10),
        (2, "SFO", 20),
        (3, "SFO", 15),
        (3, "SFO", 25),
        (1, "OAK", 15),
        (2, "OAK", 10),
        (3, "OAK", 5),
    ];
    Relation::new(flights_schema(), rows(&data)).expect("static rows")
}

/// Six cars over carb ∈ {1, 2, 5} and cyl ∈ {4, 6}.
pub fn cars() -> Relation {
    let schema = Schema::new(vec![
        AttributeDef::dimension("carb", ValueKind::Numeric),
        AttributeDef::dimension("cyl", ValueKind::Numeric),
        AttributeDef::new("mpg", Role::Measure, ValueKind::Numeric),
    ])
    .expect("static schema");
    let data: [(i64, i64, i64); 6] = [(1, 4, 30), (1, 4, 34), (1, 6, 20), (2, 4, 26), (2, 6, 18), (5, 6, 16)];
    let rows = data
        .iter()
        .map(|&(c, y, m)| vec![Value::Integer(c), Value::Integer(y), Value::Integer(m)])
        .collect();
    Relation::new(schema, rows).expect("static rows")
}

pub const CARS_CSV: &str = "carb,cyl,mpg\n1,4,30\n1,4,34\n1,6,20\n2,4,26\n2,6,18\n5,6,16\n";
pub const FLIGHTS_CSV: &str = "date,src,delay\n1,SFO,10\n2,SFO,15\n3,SFO,20\n1,OAK,15\n2,OAK,10\n3,OAK,5\n";

pub fn catalog_with(name: &str, rel: Relation) -> Catalog {
    let mut c = Catalog::new();
    c.register(name, rel);
    c
}

pub fn flights_catalog() -> Catalog {
    catalog_with("flights", flights())
}

pub fn cars_catalog() -> Catalog {
    catalog_with("cars", cars())
}

/// A bar-chart view spec with automatic channels.
pub fn spec(table: &str, filter: Option<Predicate>, group: &[&str], func: AggFunc, attr: &str) -> ViewSpec {
    ViewSpec {
        table: table.into(),
        filter,
        group_attrs: group.iter().map(|g| g.to_string()).collect(),
        func,
        attr: attr.into(),
        mark: MarkType::Bar,
        channels: None,
        title: None,
    }
}

pub fn view(ctx: &Context, table: &str, filter: Option<Predicate>, group: &[&str], func: AggFunc, attr: &str) -> View {
    make_view(ctx, &spec(table, filter, group, func, attr)).expect("fixture view")
}

/// `avg(delay)` by date for one airport.
pub fn airport(ctx: &Context, src: &str) -> View {
    let mut s = spec(
        "flights",
        Some(Predicate::eq("src", src)),
        &["date"],
        AggFunc::Avg,
        "delay",
    );
    s.title = Some(src.to_string());
    make_view(ctx, &s).expect("fixture view")
}

/// `avg(mpg)` by cyl for one carb value.
pub fn carb(ctx: &Context, carb: i64) -> View {
    let mut s = spec("cars", Some(Predicate::eq("carb", carb)), &["cyl"], AggFunc::Avg, "mpg");
    s.title = Some(format!("c{carb}"));
    make_view(ctx, &s).expect("fixture view")
}

/// Sorted `(key..., y)` rows with every value rendered as f64 (NaN for null
/// or text).
pub fn numeric_rows(rel: &Relation) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = rel
        .sorted_rows()
        .iter()
        .map(|r| r.iter().map(|v| v.as_f64().unwrap_or(f64::NAN)).collect())
        .collect();
    rows.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    rows
}
