//! Stable JSON form of a view.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::diag::Warning;
use crate::plan::Plan;
use crate::view::{Channel, LayoutHint, MarkType, MeasureType, View};

#[derive(Debug, Clone, Serialize)]
pub struct MeasureJson {
    pub func: Option<String>,
    pub attr: Option<String>,
    pub expr: String,
    #[serde(rename = "type")]
    pub ty: MeasureType,
}

#[derive(Debug, Clone, Serialize)]
pub struct ViewJson {
    pub id: String,
    pub title: String,
    pub source_table: Option<String>,
    pub filter: Option<String>,
    pub group_attrs: Vec<String>,
    pub measure: MeasureJson,
    pub mark: MarkType,
    pub channels: BTreeMap<String, Channel>,
    pub canonical: bool,
    pub layout: Option<LayoutHint>,
    pub plan: String,
    pub warnings: Vec<Warning>,
}

fn source(q: &Plan) -> Option<(String, Option<String>)> {
    match q {
        Plan::Scan { table } => Some((table.clone(), None)),
        Plan::Filter { input, predicate } => match input.as_ref() {
            Plan::Scan { table } => Some((table.clone(), Some(predicate.to_string()))),
            _ => None,
        },
        _ => None,
    }
}

impl From<&View> for ViewJson {
    fn from(v: &View) -> Self {
        let src = v.canonical_parts().and_then(|c| source(c.q));
        let agg = v.measure.expr.agg();
        ViewJson {
            id: v.id.0.clone(),
            title: v.title.clone(),
            source_table: src.as_ref().map(|s| s.0.clone()),
            filter: src.and_then(|s| s.1),
            group_attrs: v.group_attrs.clone(),
            measure: MeasureJson {
                func: agg.map(|(f, _)| f.to_string()),
                attr: agg.map(|(_, a)| a.to_string()),
                expr: v.measure.expr.to_string(),
                ty: v.measure.ty.clone(),
            },
            mark: v.mapping.mark,
            channels: v.mapping.channels.clone(),
            canonical: v.canonical,
            layout: v.layout,
            plan: v.plan.to_string(),
            warnings: v.warnings.clone(),
        }
    }
}
