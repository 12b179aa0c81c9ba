//! HTTP/JSON front end for a [`Repository`].

use std::net::{SocketAddr, TcpListener};
use std::sync::Arc;
use std::thread::JoinHandle;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use casefs_core::repo::{ContentStream, NewObject, ObjectId, RepoError, Repository, TypeDefinition};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tokio::sync::oneshot;

use crate::dto::{
    status_of, AclRequest, CheckinRequest, CreateRequest, PatchRequest, TypeCreated, WireError, CHECKIN_HEADER,
    DEFAULT_PRINCIPAL, OBJECT_HEADER, PRINCIPAL_HEADER,
};

const DEFAULT_MIME: &str = "application/octet-stream";

struct ApiError(RepoError);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(status_of(self.0.kind())).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(WireError::of(&self.0))).into_response()
    }
}

impl From<RepoError> for ApiError {
    fn from(e: RepoError) -> Self {
        ApiError(e)
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn principal(headers: &HeaderMap) -> String {
    headers
        .get(PRINCIPAL_HEADER)
        .and_then(|v| v.to_str().ok())
        .filter(|s| !s.is_empty())
        .unwrap_or(DEFAULT_PRINCIPAL)
        .to_string()
}

fn content_type(headers: &HeaderMap) -> String {
    headers
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .unwrap_or(DEFAULT_MIME)
        .to_string()
}

fn parse_json<T: DeserializeOwned>(what: &str, bytes: &[u8]) -> ApiResult<T> {
    serde_json::from_slice(bytes).map_err(|e| ApiError(RepoError::InvalidArgument(format!("{what}: {e}"))))
}

fn header_json<T: DeserializeOwned>(headers: &HeaderMap, name: &str) -> ApiResult<Option<T>> {
    match headers.get(name) {
        None => Ok(None),
        Some(v) => {
            let text = v
                .to_str()
                .map_err(|_| ApiError(RepoError::InvalidArgument(format!("{name} header is not ASCII"))))?;
            parse_json(name, text.as_bytes()).map(Some)
        }
    }
}

/// Runs a repository call off the async workers.
async fn blocking<T, F>(f: F) -> ApiResult<T>
where
    T: Send + 'static,
    F: FnOnce() -> Result<T, RepoError> + Send + 'static,
{
    match tokio::task::spawn_blocking(f).await {
        Ok(r) => r.map_err(ApiError),
        Err(e) => Err(ApiError(RepoError::InvalidArgument(format!(
            "request task failed: {e}"
        )))),
    }
}

/// Reads see writes appended to the journal by other handles.
async fn read<T, F>(repo: Arc<Repository>, f: F) -> ApiResult<Json<T>>
where
    T: Serialize + Send + 'static,
    F: FnOnce(&Repository) -> Result<T, RepoError> + Send + 'static,
{
    blocking(move || {
        repo.refresh()?;
        f(&repo)
    })
    .await
    .map(Json)
}

#[derive(Deserialize)]
struct ObjectQuery {
    #[serde(default)]
    latest: bool,
}

#[derive(Deserialize)]
struct ChangesQuery {
    #[serde(default)]
    token: u64,
    #[serde(default = "default_max")]
    max: usize,
}

fn default_max() -> usize {
    100
}

async fn repo_info(State(repo): State<Arc<Repository>>) -> ApiResult<Json<impl Serialize>> {
    read(repo, |r| Ok(r.info())).await
}

async fn get_object(
    State(repo): State<Arc<Repository>>,
    Path(id): Path<String>,
    Query(q): Query<ObjectQuery>,
) -> ApiResult<Json<impl Serialize>> {
    let id = ObjectId::new(id);
    read(
        repo,
        move |r| if q.latest { r.get_latest(&id) } else { r.get_object(&id) },
    )
    .await
}

async fn patch_object(
    State(repo): State<Arc<Repository>>,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: Bytes,
) -> ApiResult<Json<impl Serialize>> {
    let req: PatchRequest = parse_json("patch body", &body)?;
    let ops = usize::from(!req.properties.is_empty())
        + usize::from(req.add_parent_id.is_some())
        + usize::from(req.remove_parent_id.is_some());
    if ops != 1 {
        return Err(ApiError(RepoError::InvalidArgument(
            "patch needs exactly one of properties, addParentId, removeParentId".into(),
        )));
    }
    let who = principal(&headers);
    let id = ObjectId::new(id);
    blocking(move || {
        if let Some(folder) = req.add_parent_id {
            repo.file_in(&who, &id, &folder)
        } else if let Some(folder) = req.remove_parent_id {
            repo.unfile(&who, &id, &folder)
        } else {
            repo.update_properties(&who, &id, req.properties)
        }
    })
    .await
    .map(Json)
}

async fn delete_object(
    State(repo): State<Arc<Repository>>,
    Path(id): Path<String>,
    headers: HeaderMap,
) -> ApiResult<StatusCode> {
    let who = principal(&headers);
    let id = ObjectId::new(id);
    blocking(move || repo.delete_object(&who, &id)).await?;
    Ok(StatusCode::NO_CONTENT)
}

async fn children(State(repo): State<Arc<Repository>>, Path(id): Path<String>) -> ApiResult<Json<impl Serialize>> {
    let id = ObjectId::new(id);
    read(repo, move |r| r.get_children(&id)).await
}

async fn relationships(State(repo): State<Arc<Repository>>, Path(id): Path<String>) -> ApiResult<Json<impl Serialize>> {
    let id = ObjectId::new(id);
    read(repo, move |r| r.get_relationships(&id)).await
}

async fn get_content(State(repo): State<Arc<Repository>>, Path(id): Path<String>) -> ApiResult<Response> {
    let id = ObjectId::new(id);
    let content = blocking(move || {
        repo.refresh()?;
        repo.get_content(&id)
    })
    .await?;
    Ok(match content {
        None => StatusCode::NO_CONTENT.into_response(),
        Some(c) => ([(header::CONTENT_TYPE, c.mime_type)], c.bytes).into_response(),
    })
}

async fn put_content(
    State(repo): State<Arc<Repository>>,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: Bytes,
) -> ApiResult<Json<impl Serialize>> {
    let who = principal(&headers);
    let content = ContentStream::new(content_type(&headers), body.to_vec());
    let id = ObjectId::new(id);
    blocking(move || repo.set_content(&who, &id, content)).await.map(Json)
}

async fn create_object(
    State(repo): State<Arc<Repository>>,
    headers: HeaderMap,
    body: Bytes,
) -> ApiResult<(StatusCode, Json<impl Serialize>)> {
    let who = principal(&headers);
    let (req, content) = match header_json::<CreateRequest>(&headers, OBJECT_HEADER)? {
        Some(req) => (req, Some(ContentStream::new(content_type(&headers), body.to_vec()))),
        None => (parse_json::<CreateRequest>("object body", &body)?, None),
    };
    let new = NewObject {
        type_id: req.type_id,
        name: req.name,
        properties: req.properties,
        parent_id: req.parent_id,
        content,
        source_id: req.source_id,
        target_id: req.target_id,
    };
    let created = blocking(move || repo.create_object(&who, new)).await?;
    Ok((StatusCode::CREATED, Json(created)))
}

async fn checkin(
    State(repo): State<Arc<Repository>>,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: Bytes,
) -> ApiResult<(StatusCode, Json<impl Serialize>)> {
    let who = principal(&headers);
    let (req, content) = match header_json::<CheckinRequest>(&headers, CHECKIN_HEADER)? {
        Some(req) => (req, Some(ContentStream::new(content_type(&headers), body.to_vec()))),
        None if body.is_empty() => (CheckinRequest::default(), None),
        None => (parse_json::<CheckinRequest>("checkin body", &body)?, None),
    };
    let id = ObjectId::new(id);
    let created = blocking(move || repo.checkin(&who, &id, content, req.properties)).await?;
    Ok((StatusCode::CREATED, Json(created)))
}

async fn apply_acl(
    State(repo): State<Arc<Repository>>,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: Bytes,
) -> ApiResult<Json<impl Serialize>> {
    let req: AclRequest = parse_json("acl body", &body)?;
    let who = principal(&headers);
    let id = ObjectId::new(id);
    blocking(move || repo.apply_acl(&who, &id, req.acl)).await.map(Json)
}

async fn changes(
    State(repo): State<Arc<Repository>>,
    Query(q): Query<ChangesQuery>,
) -> ApiResult<Json<impl Serialize>> {
    read(repo, move |r| r.get_content_changes(q.token, q.max)).await
}

async fn cases(State(repo): State<Arc<Repository>>) -> ApiResult<Json<impl Serialize>> {
    read(repo, |r| Ok(r.case_roots())).await
}

async fn create_type(
    State(repo): State<Arc<Repository>>,
    body: Bytes,
) -> ApiResult<(StatusCode, Json<impl Serialize>)> {
    let def: TypeDefinition = parse_json("type body", &body)?;
    let type_id = blocking(move || repo.create_type(def)).await?;
    Ok((StatusCode::CREATED, Json(TypeCreated { type_id })))
}

async fn get_type(State(repo): State<Arc<Repository>>, Path(id): Path<String>) -> ApiResult<Json<impl Serialize>> {
    read(repo, move |r| r.get_type(&id)).await
}

async fn descendants(State(repo): State<Arc<Repository>>, Path(id): Path<String>) -> ApiResult<Json<impl Serialize>> {
    let id = ObjectId::new(id);
    read(repo, move |r| r.descendants(&id)).await
}

/// All routes, bound to `repo`.
pub fn router(repo: Arc<Repository>) -> Router {
    Router::new()
        .route("/repo", get(repo_info))
        .route("/object", post(create_object))
        .route(
            "/object/{id}",
            get(get_object).patch(patch_object).delete(delete_object),
        )
        .route("/object/{id}/children", get(children))
        .route("/object/{id}/descendants", get(descendants))
        .route("/object/{id}/relationships", get(relationships))
        .route("/object/{id}/content", get(get_content).put(put_content))
        .route("/object/{id}/checkin", post(checkin))
        .route("/object/{id}/acl", post(apply_acl))
        .route("/changes", get(changes))
        .route("/cases", get(cases))
        .route("/types", post(create_type))
        .route("/types/{id}", get(get_type))
        .with_state(repo)
}

/// A server running on its own thread and runtime.
pub struct Server {
    addr: SocketAddr,
    stop: Option<oneshot::Sender<()>>,
    thread: Option<JoinHandle<std::io::Result<()>>>,
}

impl Server {
    /// Binds `addr` (port 0 picks a free port) and starts serving.
    pub fn start(repo: Arc<Repository>, addr: &str) -> std::io::Result<Server> {
        let listener = TcpListener::bind(addr)?;
        listener.set_nonblocking(true)?;
        let addr = listener.local_addr()?;
        let (tx, rx) = oneshot::channel::<()>();
        let runtime = tokio::runtime::Builder::new_multi_thread()
            .worker_threads(2)
            .enable_all()
            .build()?;
        let thread = std::thread::Builder::new()
            .name(format!("casefs-http-{}", addr.port()))
            .spawn(move || {
                runtime.block_on(async move {
                    let listener = tokio::net::TcpListener::from_std(listener)?;
                    log::info!("serving on http://{addr}");
                    axum::serve(listener, router(repo))
                        .with_graceful_shutdown(async {
                            let _ = rx.await;
                        })
                        .await
                })
            })?;
        Ok(Server {
            addr,
            stop: Some(tx),
            thread: Some(thread),
        })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    /// Stops accepting connections and waits for the server thread.
    pub fn shutdown(mut self) -> std::io::Result<()> {
        if let Some(tx) = self.stop.take() {
            let _ = tx.send(());
        }
        self.join()
    }

    /// Blocks until the server stops.
    pub fn wait(mut self) -> std::io::Result<()> {
        self.join()
    }

    fn join(&mut self) -> std::io::Result<()> {
        match self.thread.take() {
            Some(t) => t
                .join()
                .unwrap_or_else(|_| Err(std::io::Error::other("server thread panicked"))),
            None => Ok(()),
        }
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        if let Some(tx) = self.stop.take() {
            let _ = tx.send(());
            let _ = self.join();
        }
    }
}
