use std::collections::HashMap;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde_json::{json, Value as JsonValue};
use vca_core::expr::ident;
use vca_core::lift::ModelJson;
use vca_core::{check_compose, ingest_csv, sample_model_view, Operand, Relation, ViewJson};
use vca_dsl::{render, Expr, Session};

use crate::api::{self, parse_body};
use crate::error::{ApiError, ApiResult};
use crate::openapi;
use crate::state::{ApiSession, AppState};

type Reply = ApiResult<(StatusCode, Json<JsonValue>)>;

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{sid}", get(get_session).delete(delete_session))
        .route("/sessions/{sid}/tables", post(upload_table))
        .route("/sessions/{sid}/views", get(list_views).post(create_view))
        .route("/sessions/{sid}/views/{vid}", get(get_view))
        .route("/sessions/{sid}/views/{vid}/data", get(view_data))
        .route("/sessions/{sid}/compose", post(compose))
        .route("/sessions/{sid}/decompose", post(decompose))
        .route("/sessions/{sid}/lift", post(lift))
        .route("/sessions/{sid}/safety", post(safety))
        .route("/sessions/{sid}/script", get(script))
        .route("/docs/api.json", get(|| async { Json(openapi::document()) }))
        .fallback(|| async {
            ApiError::NotFound {
                what: "route",
                name: "requested path".into(),
            }
        })
        .with_state(state)
}

fn ok(body: JsonValue) -> Reply {
    Ok((StatusCode::OK, Json(body)))
}

fn created(body: JsonValue) -> Reply {
    Ok((StatusCode::CREATED, Json(body)))
}

/// Numeric order for ids like `v2` < `v10`.
fn id_key(id: &str) -> (u64, String) {
    (id.trim_start_matches('v').parse().unwrap_or(u64::MAX), id.to_string())
}

fn lookup<'a>(s: &'a Session, id: &str) -> ApiResult<&'a Operand> {
    s.get(id).ok_or_else(|| ApiError::NotFound {
        what: "view",
        name: id.to_string(),
    })
}

/// Full JSON of a stored view or model, rows included.
fn object_json(s: &Session, op: &Operand) -> ApiResult<JsonValue> {
    let ctx = s.context();
    Ok(match op {
        Operand::View(v) => render::view_json(ctx, v)?,
        Operand::Model(m) => json!({
            "kind": "model",
            "model": ModelJson::from(m),
            "rows": sample_model_view(ctx, m)?.rows_json(),
        }),
        other => return Err(ApiError::Validation(format!("a {} is not stored", other.kind_name()))),
    })
}

fn spec_json(op: &Operand) -> Option<JsonValue> {
    match op {
        Operand::View(v) => {
            let mut j = json!(ViewJson::from(v));
            j["kind"] = json!("view");
            Some(j)
        }
        Operand::Model(m) => {
            let mut j = json!(ModelJson::from(m));
            j["kind"] = json!("model");
            Some(j)
        }
        _ => None,
    }
}

fn table_json(name: &str, rel: &Relation) -> JsonValue {
    json!({ "name": name, "rows": rel.len(), "attributes": rel.schema().attrs() })
}

/// Evaluates `expr`, stores every resulting view or model under its id and
/// bumps the revision. Nothing changes if any step fails.
fn apply(s: &mut ApiSession, expr: Expr, revision: Option<u64>) -> Reply {
    s.check_revision(revision)?;
    let checkpoint = s.session.context().id_checkpoint();
    let result = (|| {
        let value = s.session.evaluate(&expr)?;
        let members: Vec<Operand> = match value {
            Operand::Set(vs) => vs.into_views().into_iter().map(Operand::View).collect(),
            Operand::Constant(_) => return Err(ApiError::Validation("the result is a constant, not a view".into())),
            single => vec![single],
        };
        let rendered = members
            .iter()
            .map(|m| object_json(&s.session, m))
            .collect::<ApiResult<Vec<_>>>()?;
        Ok((members, rendered))
    })();
    let (members, rendered) = match result {
        Ok(r) => r,
        Err(e) => {
            s.session.context().restore_ids(checkpoint);
            return Err(e);
        }
    };
    let ids: Vec<String> = members.iter().map(|m| operand_id(m).to_string()).collect();
    let statement = match ids.as_slice() {
        [one] => format!("{} = {expr}", ident(one)),
        _ => expr.to_string(),
    };
    let single = members.len() == 1;
    for (id, m) in ids.iter().zip(members) {
        let logged = single.then(|| expr.clone());
        s.session.define(id, m, logged);
    }
    s.revision += 1;
    let mut body = json!({ "revision": s.revision, "dsl": statement, "ids": ids, "views": rendered });
    if single {
        body["view"] = body["views"][0].clone();
    }
    created(body)
}

fn operand_id(op: &Operand) -> &str {
    match op {
        Operand::View(v) => &v.id.0,
        Operand::Model(m) => &m.id.0,
        _ => "",
    }
}

async fn create_session(State(st): State<AppState>) -> Reply {
    let id = st.create();
    created(json!({ "id": id, "revision": 0 }))
}

async fn delete_session(State(st): State<AppState>, Path(sid): Path<String>) -> ApiResult<StatusCode> {
    st.remove(&sid)?;
    Ok(StatusCode::NO_CONTENT)
}

async fn get_session(State(st): State<AppState>, Path(sid): Path<String>) -> Reply {
    st.with(&sid, |s| {
        let catalog = &s.session.context().catalog;
        let tables = catalog
            .names()
            .map(|n| Ok(table_json(n, catalog.get(n)?)))
            .collect::<Result<Vec<_>, vca_core::Error>>()?;
        let mut ids: Vec<&String> = s.session.bindings().keys().collect();
        ids.sort_by_key(|id| id_key(id));
        ok(json!({ "id": sid, "revision": s.revision, "tables": tables, "views": ids }))
    })
}

async fn upload_table(
    State(st): State<AppState>,
    Path(sid): Path<String>,
    Query(query): Query<HashMap<String, String>>,
    headers: HeaderMap,
    body: Bytes,
) -> Reply {
    let is_csv = headers
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.starts_with("text/csv"));
    let req = if is_csv {
        let name = query
            .get("name")
            .cloned()
            .ok_or_else(|| ApiError::Validation("CSV uploads need a `name` query parameter".into()))?;
        let mut roles = std::collections::BTreeMap::new();
        for pair in query
            .get("roles")
            .map(String::as_str)
            .unwrap_or("")
            .split(',')
            .filter(|p| !p.is_empty())
        {
            let (c, r) = pair
                .split_once(':')
                .ok_or_else(|| ApiError::Validation(format!("role `{pair}` is not column:role")))?;
            roles.insert(c.trim().to_string(), r.trim().to_string());
        }
        let csv = String::from_utf8(body.to_vec()).map_err(|_| ApiError::Validation("CSV is not UTF-8".into()))?;
        let revision = query
            .get("revision")
            .map(|r| {
                r.parse()
                    .map_err(|_| ApiError::Validation(format!("revision `{r}` is not a number")))
            })
            .transpose()?;
        api::CreateTable {
            name,
            csv,
            roles,
            revision,
        }
    } else {
        parse_body(&body)?
    };
    st.with(&sid, |s| {
        s.check_revision(req.revision)?;
        let rel = ingest_csv(req.csv.as_bytes(), &req.roles)?;
        let table = table_json(&req.name, &rel);
        s.session.register_table(req.name.clone(), rel);
        s.revision += 1;
        created(json!({ "revision": s.revision, "table": table }))
    })
}

async fn create_view(State(st): State<AppState>, Path(sid): Path<String>, body: Bytes) -> Reply {
    let req: api::CreateView = parse_body(&body)?;
    let def = req.to_def()?;
    st.with(&sid, |s| apply(s, Expr::View(def), req.revision))
}

async fn list_views(State(st): State<AppState>, Path(sid): Path<String>) -> Reply {
    st.with(&sid, |s| {
        let mut items: Vec<(&String, &Operand)> = s.session.bindings().iter().collect();
        items.sort_by_key(|(id, _)| id_key(id));
        let views: Vec<JsonValue> = items.into_iter().filter_map(|(_, op)| spec_json(op)).collect();
        ok(json!({ "revision": s.revision, "views": views }))
    })
}

async fn get_view(State(st): State<AppState>, Path((sid, vid)): Path<(String, String)>) -> Reply {
    st.with(&sid, |s| {
        let op = lookup(&s.session, &vid)?;
        let mut body = object_json(&s.session, op)?;
        body["revision"] = json!(s.revision);
        ok(body)
    })
}

async fn view_data(State(st): State<AppState>, Path((sid, vid)): Path<(String, String)>) -> Reply {
    st.with(&sid, |s| {
        let ctx = s.session.context();
        let body = match lookup(&s.session, &vid)? {
            Operand::View(v) => {
                let rel = ctx.evaluate(v)?;
                let spec = ViewJson::from(v);
                json!({
                    "id": spec.id,
                    "kind": "view",
                    "title": spec.title,
                    "columns": rel.schema().names().collect::<Vec<_>>(),
                    "rows": rel.rows_json(),
                    "mark": spec.mark,
                    "channels": spec.channels,
                    "layout": spec.layout,
                    "warnings": spec.warnings,
                })
            }
            Operand::Model(m) => {
                let rel = sample_model_view(ctx, m)?;
                json!({
                    "id": m.id.0,
                    "kind": "model",
                    "title": m.title,
                    "columns": rel.schema().names().collect::<Vec<_>>(),
                    "rows": rel.rows_json(),
                    "mark": m.mapping.mark,
                    "channels": m.mapping.channels,
                    "layout": null,
                    "warnings": m.warnings,
                })
            }
            other => return Err(ApiError::Validation(format!("a {} has no data", other.kind_name()))),
        };
        let mut body = body;
        body["revision"] = json!(s.revision);
        ok(body)
    })
}

async fn compose(State(st): State<AppState>, Path(sid): Path<String>, body: Bytes) -> Reply {
    let req: api::Compose = parse_body(&body)?;
    let expr = req.to_expr()?;
    st.with(&sid, |s| apply(s, expr, req.revision))
}

async fn decompose(State(st): State<AppState>, Path(sid): Path<String>, body: Bytes) -> Reply {
    let req: api::Decompose = parse_body(&body)?;
    let expr = req.to_expr()?;
    st.with(&sid, |s| apply(s, expr, req.revision))
}

async fn lift(State(st): State<AppState>, Path(sid): Path<String>, body: Bytes) -> Reply {
    let req: api::Lift = parse_body(&body)?;
    st.with(&sid, |s| apply(s, req.to_expr(), req.revision))
}

/// Checks a candidate composition without performing it. Operands such as
/// legend entries are built only for the check and their ids are released.
async fn safety(State(st): State<AppState>, Path(sid): Path<String>, body: Bytes) -> Reply {
    let req: api::Safety = parse_body(&body)?;
    let kind = api::compose_kind(&req.kind)?;
    let (left, right) = (api::operand(&req.left)?, api::operand(&req.right)?);
    st.with(&sid, |s| {
        let ctx = s.session.context();
        let checkpoint = ctx.id_checkpoint();
        let verdict = (|| {
            let left = match s.session.evaluate(&left)? {
                Operand::View(v) => v,
                Operand::Model(m) => m.to_view(ctx)?,
                other => {
                    return Err(ApiError::Validation(format!(
                        "the left operand of a safety check must be a single view, not a {}",
                        other.kind_name()
                    )))
                }
            };
            let right = s.session.evaluate(&right)?;
            Ok(check_compose(ctx, &left, &right, kind))
        })();
        ctx.restore_ids(checkpoint);
        ok(json!(verdict?))
    })
}

async fn script(State(st): State<AppState>, Path(sid): Path<String>) -> Reply {
    st.with(&sid, |s| {
        ok(json!({ "revision": s.revision, "script": s.session.log_script() }))
    })
}
