//! Session registry. Each session sits behind its own lock so requests to
//! different sessions run concurrently while writes to one are serialized.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, MutexGuard};

use vca_dsl::Session;

use crate::error::{ApiError, ApiResult};

pub struct ApiSession {
    pub session: Session,
    /// Bumped by every successful mutating request.
    pub revision: u64,
}

impl ApiSession {
    /// A request that names a revision must be based on the current one.
    pub fn check_revision(&self, sent: Option<u64>) -> ApiResult<()> {
        match sent {
            Some(sent) if sent != self.revision => Err(ApiError::Conflict {
                sent,
                current: self.revision,
            }),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Default)]
pub struct AppState {
    sessions: Arc<Mutex<HashMap<String, Arc<Mutex<ApiSession>>>>>,
    next: Arc<AtomicU64>,
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
}

impl AppState {
    pub fn create(&self) -> String {
        let id = format!("s{}", self.next.fetch_add(1, Ordering::Relaxed) + 1);
        let s = ApiSession {
            session: Session::new("."),
            revision: 0,
        };
        lock(&self.sessions).insert(id.clone(), Arc::new(Mutex::new(s)));
        id
    }

    pub fn remove(&self, id: &str) -> ApiResult<()> {
        lock(&self.sessions).remove(id).map(|_| ()).ok_or_else(|| not_found(id))
    }

    /// Runs `f` while holding the session's lock.
    pub fn with<R>(&self, id: &str, f: impl FnOnce(&mut ApiSession) -> ApiResult<R>) -> ApiResult<R> {
        let s = lock(&self.sessions).get(id).cloned().ok_or_else(|| not_found(id))?;
        let mut guard = lock(&s);
        f(&mut guard)
    }
}

fn not_found(id: &str) -> ApiError {
    ApiError::NotFound {
        what: "session",
        name: id.to_string(),
    }
}
