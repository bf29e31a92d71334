//! JSON and text renderings of bound values.

use serde_json::{json, Value as Json};
use vca_core::lift::ModelJson;
use vca_core::sqlgen::compile;
use vca_core::{Context, Operand, Result, View, ViewJson};

pub fn view_json(ctx: &Context, v: &View) -> Result<Json> {
    let rel = ctx.evaluate(v)?;
    Ok(json!({
        "kind": "view",
        "view": ViewJson::from(v),
        "rows": rel.rows_json(),
    }))
}

/// `{kind, ...}` JSON for any operand, with evaluated rows for views.
pub fn operand_json(ctx: &Context, op: &Operand) -> Result<Json> {
    Ok(match op {
        Operand::View(v) => view_json(ctx, v)?,
        Operand::Set(s) => json!({
            "kind": "viewset",
            "views": s.views().iter().map(|v| view_json(ctx, v)).collect::<Result<Vec<_>>>()?,
        }),
        Operand::Model(m) => json!({ "kind": "model", "model": ModelJson::from(m) }),
        Operand::Constant(c) => json!({ "kind": "constant", "value": c.value, "label": c.label }),
    })
}

fn show_view(ctx: &Context, v: &View, out: &mut String) -> Result<()> {
    let rel = ctx.evaluate(v)?;
    out.push_str(&format!("-- {} ({})\n", v.label(), v.id.0));
    out.push_str(&rel.to_table_string());
    if !out.ends_with('\n') {
        out.push('\n');
    }
    out.push_str(&serde_json::to_string_pretty(&ViewJson::from(v)).expect("serializable"));
    out.push('\n');
    Ok(())
}

/// Table plus JSON spec, as printed by `show`.
pub fn show(ctx: &Context, op: &Operand) -> Result<String> {
    let mut out = String::new();
    match op {
        Operand::View(v) => show_view(ctx, v, &mut out)?,
        Operand::Set(s) => {
            for v in s.views() {
                show_view(ctx, v, &mut out)?;
            }
        }
        Operand::Model(m) => {
            let rendered = m.to_view(ctx)?;
            out.push_str(&format!("-- {} ({})\n", m.title, m.id.0));
            out.push_str(&ctx.evaluate(&rendered)?.to_table_string());
            if !out.ends_with('\n') {
                out.push('\n');
            }
            out.push_str(&serde_json::to_string_pretty(&ModelJson::from(m)).expect("serializable"));
            out.push('\n');
        }
        Operand::Constant(c) => out.push_str(&format!("{} = {}\n", c.label, c.value)),
    }
    Ok(out)
}

/// SQL for every view in the operand, labelled.
pub fn sql(ctx: &Context, op: &Operand) -> Result<Vec<(String, String)>> {
    let views: Vec<View> = match op {
        Operand::View(v) => vec![v.clone()],
        Operand::Set(s) => s.views().to_vec(),
        Operand::Model(m) => vec![m.to_view(ctx)?],
        Operand::Constant(c) => vec![c.to_view(ctx)?],
    };
    views
        .iter()
        .map(|v| Ok((v.label().to_string(), compile(&v.plan, &ctx.catalog)?.text)))
        .collect()
}
