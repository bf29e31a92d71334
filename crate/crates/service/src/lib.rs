//! HTTP facade over composition sessions.
//!
//! All routes except session creation live under `/sessions/{sid}`. Each
//! mutating request is translated into one expression of the session
//! language and evaluated by a [`vca_dsl::Session`], so a session's history
//! can be read back as a script (`GET /sessions/{sid}/script`).
//!
//! Status codes: unsafe compositions answer 422 with the verdict, unknown
//! names 404, malformed requests 400, and a stale `revision` 409.

pub mod api;
pub mod error;
pub mod openapi;
mod routes;
pub mod state;

use std::net::SocketAddr;

pub use error::{ApiError, ApiResult};
pub use routes::router;
pub use state::AppState;

pub const DEFAULT_PORT: u16 = 8787;

/// A router with a fresh, empty session registry.
pub fn app() -> axum::Router {
    router(AppState::default())
}

/// Serves until ctrl-c.
pub async fn serve(addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, app())
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
