use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde_json::{json, Value as JsonValue};
use thiserror::Error;
use vca_core::SafetyVerdict;
use vca_dsl::DslError;

#[derive(Debug, Error)]
pub enum ApiError {
    #[error("{0}")]
    Validation(String),
    #[error("{what} `{name}` not found")]
    NotFound { what: &'static str, name: String },
    #[error("revision conflict: request was based on revision {sent}, session is at {current}")]
    Conflict { sent: u64, current: u64 },
    #[error("{message}")]
    Unsafe {
        message: String,
        /// One verdict, or one per rejected pair of a viewset composition.
        verdicts: Vec<(Option<(String, String)>, SafetyVerdict)>,
    },
    /// Engine errors that are about the request's content rather than its shape.
    #[error("{0}")]
    Unprocessable(String),
}

impl ApiError {
    pub fn status(&self) -> StatusCode {
        match self {
            ApiError::Validation(_) => StatusCode::BAD_REQUEST,
            ApiError::NotFound { .. } => StatusCode::NOT_FOUND,
            ApiError::Conflict { .. } => StatusCode::CONFLICT,
            ApiError::Unsafe { .. } | ApiError::Unprocessable(_) => StatusCode::UNPROCESSABLE_ENTITY,
        }
    }

    fn code(&self) -> &'static str {
        match self {
            ApiError::Validation(_) => "validation",
            ApiError::NotFound { .. } => "not_found",
            ApiError::Conflict { .. } => "revision_conflict",
            ApiError::Unsafe { .. } => "unsafe_composition",
            ApiError::Unprocessable(_) => "unprocessable",
        }
    }

    pub fn body(&self) -> JsonValue {
        let mut err = json!({ "code": self.code(), "message": self.to_string() });
        match self {
            ApiError::Unsafe { verdicts, .. } => {
                if let [(None, v)] = verdicts.as_slice() {
                    err["verdict"] = json!(v);
                    err["warnings"] = json!(v.warnings);
                } else {
                    err["pairs"] = verdicts
                        .iter()
                        .map(|(pair, v)| {
                            let (l, r) = pair.clone().unwrap_or_default();
                            json!({ "left": l, "right": r, "verdict": v })
                        })
                        .collect();
                    err["warnings"] = verdicts
                        .iter()
                        .flat_map(|(_, v)| v.warnings.iter())
                        .map(|w| json!(w))
                        .collect();
                }
            }
            ApiError::Conflict { current, .. } => err["revision"] = json!(current),
            _ => {}
        }
        json!({ "error": err })
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status(), Json(self.body())).into_response()
    }
}

impl From<vca_core::Error> for ApiError {
    fn from(e: vca_core::Error) -> Self {
        use vca_core::Error as E;
        match e {
            E::Safety(v) => ApiError::Unsafe {
                message: e_message(&v),
                verdicts: vec![(None, *v)],
            },
            E::SafetyPairs(pairs) => ApiError::Unsafe {
                message: format!("{} pair(s) of the viewset composition are unsafe", pairs.len()),
                verdicts: pairs
                    .into_iter()
                    .map(|p| (Some((p.left, p.right)), p.verdict))
                    .collect(),
            },
            E::Catalog(t) => ApiError::NotFound { what: "table", name: t },
            E::EmptyJoin(_) | E::EmptyModel | E::Closure { .. } => ApiError::Unprocessable(e.to_string()),
            other => ApiError::Validation(other.to_string()),
        }
    }
}

fn e_message(v: &SafetyVerdict) -> String {
    vca_core::Error::Safety(Box::new(v.clone())).to_string()
}

impl From<DslError> for ApiError {
    fn from(e: DslError) -> Self {
        match e {
            DslError::Name { name, .. } => ApiError::NotFound { what: "view", name },
            DslError::Engine { source, .. } => source.into(),
            other => ApiError::Validation(other.to_string()),
        }
    }
}

pub type ApiResult<T> = Result<T, ApiError>;
