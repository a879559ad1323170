// Copyright 2026 The AWAIRE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! HTTP JSON routes over a [`SessionStore`].

use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde_json::json;

use super::{CreateRequest, SessionStore, SubmitRequest};
use crate::error::Error;

pub enum ApiError {
    Audit(Error),
    /// The request body could not be decoded.
    Body(String),
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError::Audit(e)
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::Body(e.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let e = match self {
            ApiError::Body(msg) => {
                return (StatusCode::BAD_REQUEST, Json(json!({"error": msg}))).into_response()
            }
            ApiError::Audit(e) => e,
        };
        let status = match &e {
            Error::UnknownSession(_) => StatusCode::NOT_FOUND,
            Error::SessionClosed | Error::AuditClosed | Error::PopulationExhausted(_) => {
                StatusCode::CONFLICT
            }
            Error::Io(_) | Error::CorruptLog(_) => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::BAD_REQUEST,
        };
        (status, Json(json!({"error": e.to_string()}))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

async fn blocking<T, F>(store: Arc<SessionStore>, f: F) -> ApiResult<T>
where
    T: Send + 'static,
    F: FnOnce(&SessionStore) -> crate::Result<T> + Send + 'static,
{
    tokio::task::spawn_blocking(move || f(&store))
        .await
        .map_err(|e| ApiError::Audit(Error::Io(e.to_string())))?
        .map_err(ApiError::Audit)
}

async fn create(
    State(store): State<Arc<SessionStore>>,
    body: Result<Json<CreateRequest>, JsonRejection>,
) -> ApiResult<impl IntoResponse> {
    let Json(request) = body?;
    let status = blocking(store, move |s| s.create(request)).await?;
    Ok((StatusCode::CREATED, Json(status)))
}

async fn status(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
) -> ApiResult<impl IntoResponse> {
    Ok(Json(blocking(store, move |s| s.status(&id)).await?))
}

async fn submit(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
    body: Result<Json<SubmitRequest>, JsonRejection>,
) -> ApiResult<impl IntoResponse> {
    let Json(request) = body?;
    Ok(Json(
        blocking(store, move |s| s.submit(&id, &request.ranking)).await?,
    ))
}

/// The event log as JSON Lines.
async fn events(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
) -> ApiResult<impl IntoResponse> {
    let events = blocking(store, move |s| s.events(&id)).await?;
    let mut body = String::new();
    for event in &events {
        body.push_str(&serde_json::to_string(event).expect("events serialise"));
        body.push('\n');
    }
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], body))
}

pub fn router(store: Arc<SessionStore>) -> Router {
    Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}", get(status))
        .route("/sessions/{id}/ballots", post(submit))
        .route("/sessions/{id}/log", get(events))
        .with_state(store)
}

/// Serves until ctrl-c.
pub async fn serve(store: Arc<SessionStore>, addr: std::net::SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(store))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
