//! HTTP facade for the interactive workbench.
//!
//! ```text
//! GET  /api/v1/health
//! POST /api/v1/images                      body: PNG or PGM bytes
//! GET  /api/v1/images/{id}?format=png|pgm
//! GET  /api/v1/images/{id}/spectrum?log=1  X-Spectrum-Width / X-Spectrum-Height
//! POST /api/v1/images/{id}/ops             {"op", "params", "inputs": {slot: id}}
//! POST /api/v1/images/{id}/fourier-filter  multipart field `mask` (PNG)
//! GET  /api/v1/images/{id}/pipeline
//! GET  /api/v1/blobs/{sha256}
//! ```
//!
//! Every op goes through the same registry as the pipeline runner, so a
//! session image and a CLI replay of its exported pipeline are bit-equal.

mod store;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Multipart, Path, Query, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::codec::{self, ImageFormat};
use crate::pipeline::{schema, Op};
use crate::raster::Raster;
use crate::spectral;

pub use store::{Blob, Provenance, SessionImage, SessionStore, StoreError};

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub listen: SocketAddr,
    /// Largest accepted width or height.
    pub max_dim: usize,
    pub max_images: usize,
    pub max_body_bytes: usize,
    pub spill_dir: Option<PathBuf>,
    pub ui_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            listen: SocketAddr::from(([127, 0, 0, 1], 8080)),
            max_dim: 8192,
            max_images: 4096,
            max_body_bytes: 512 << 20,
            spill_dir: None,
            ui_dir: None,
        }
    }
}

#[derive(Clone)]
pub struct AppState {
    pub store: Arc<SessionStore>,
    pub config: Arc<ServiceConfig>,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Self {
        Self {
            store: Arc::new(SessionStore::new(config.max_images, config.spill_dir.clone())),
            config: Arc::new(config),
        }
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: Value,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self {
            status,
            body: json!({ "error": message.into() }),
        }
    }

    fn not_found(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, format!("no image `{id}`"))
    }

    fn unprocessable(message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::Full(_) => Self::new(StatusCode::INSUFFICIENT_STORAGE, e.to_string()),
            StoreError::Spill(_) => Self::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
        }
    }
}

type ApiResult<T> = Result<T, ApiError>;

pub fn router(state: AppState) -> Router {
    let api = Router::new()
        .route("/api/v1/health", get(health))
        .route("/api/v1/images", post(upload))
        .route("/api/v1/images/{id}", get(fetch))
        .route("/api/v1/images/{id}/spectrum", get(spectrum))
        .route("/api/v1/images/{id}/ops", post(apply_op))
        .route("/api/v1/images/{id}/fourier-filter", post(fourier_filter))
        .route("/api/v1/images/{id}/pipeline", get(pipeline))
        .route("/api/v1/blobs/{digest}", get(blob))
        .layer(DefaultBodyLimit::max(state.config.max_body_bytes));
    let api = match &state.config.ui_dir {
        Some(dir) => api.fallback_service(tower_http::services::ServeDir::new(dir)),
        None => api,
    };
    api.with_state(state)
}

pub async fn serve(config: ServiceConfig) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(config.listen).await?;
    axum::serve(listener, router(AppState::new(config))).await
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))
}

fn image_response(raster: &Raster, format: ImageFormat) -> ApiResult<Response> {
    let bytes = codec::encode_image(raster, format)
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
    let mime = match format {
        ImageFormat::Png => "image/png",
        ImageFormat::Pgm => "image/x-portable-graymap",
    };
    Ok(([(header::CONTENT_TYPE, mime)], bytes).into_response())
}

fn created(img: &SessionImage) -> Json<Value> {
    Json(json!({
        "id": img.id,
        "width": img.raster.width(),
        "height": img.raster.height(),
    }))
}

async fn health() -> Json<Value> {
    Json(json!({ "status": "ok" }))
}

async fn upload(State(state): State<AppState>, body: Bytes) -> ApiResult<Json<Value>> {
    let format = ImageFormat::detect(&body)
        .ok_or_else(|| ApiError::new(StatusCode::BAD_REQUEST, "body is not a PNG or P5 PGM image"))?;
    let (w, h) = codec::probe_dimensions(&body).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.to_string()))?;
    let cap = state.config.max_dim;
    if w > cap || h > cap {
        return Err(ApiError::new(
            StatusCode::PAYLOAD_TOO_LARGE,
            format!("{w}x{h} exceeds the {cap} pixel limit"),
        ));
    }
    let img = blocking(move || {
        let raster = codec::decode_image(&body, format).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.to_string()))?;
        Ok::<_, ApiError>(state.store.insert_upload(raster, body.to_vec(), format)?)
    })
    .await??;
    Ok(created(&img))
}

#[derive(Deserialize)]
struct FetchQuery {
    format: Option<String>,
}

async fn fetch(State(state): State<AppState>, Path(id): Path<String>, Query(q): Query<FetchQuery>) -> ApiResult<Response> {
    let img = state.store.get(&id).ok_or_else(|| ApiError::not_found(&id))?;
    let format = match q.format.as_deref() {
        None | Some("png") => ImageFormat::Png,
        Some("pgm") => ImageFormat::Pgm,
        Some(other) => return Err(ApiError::new(StatusCode::BAD_REQUEST, format!("unknown format `{other}`"))),
    };
    blocking(move || image_response(&img.raster, format)).await?
}

#[derive(Deserialize)]
struct SpectrumQuery {
    log: Option<String>,
}

async fn spectrum(State(state): State<AppState>, Path(id): Path<String>, Query(q): Query<SpectrumQuery>) -> ApiResult<Response> {
    let img = state.store.get(&id).ok_or_else(|| ApiError::not_found(&id))?;
    let log = matches!(q.log.as_deref(), Some("1" | "true" | "yes"));
    blocking(move || {
        let view = spectral::spectrum_magnitude_view(&spectral::forward_spectrum(&img.raster), log);
        let mut resp = image_response(&view, ImageFormat::Png)?;
        let headers = resp.headers_mut();
        headers.insert("x-spectrum-width", HeaderValue::from(view.width()));
        headers.insert("x-spectrum-height", HeaderValue::from(view.height()));
        Ok(resp)
    })
    .await?
}

#[derive(Deserialize)]
struct OpRequest {
    op: String,
    #[serde(default)]
    params: Map<String, Value>,
    /// Extra input slots (everything after the first) mapped to image ids.
    #[serde(default)]
    inputs: Map<String, Value>,
}

async fn apply_op(State(state): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<Value>> {
    let source = state.store.get(&id).ok_or_else(|| ApiError::not_found(&id))?;
    let req: OpRequest =
        serde_json::from_slice(&body).map_err(|e| ApiError::unprocessable(format!("malformed op request: {e}")))?;
    let schema = schema(&req.op).ok_or_else(|| ApiError::unprocessable(format!("unknown op `{}`", req.op)))?;
    let (op, params) = Op::parse(&req.op, &req.params).map_err(|errs| ApiError::unprocessable(errs.join("; ")))?;

    for slot in req.inputs.keys() {
        if !schema.inputs[1..].contains(&slot.as_str()) {
            return Err(ApiError::unprocessable(format!(
                "op `{}` has no extra input `{slot}` (inputs: {:?})",
                req.op, schema.inputs
            )));
        }
    }
    let mut sources = vec![source];
    for slot in &schema.inputs[1..] {
        let other = req
            .inputs
            .get(*slot)
            .ok_or_else(|| ApiError::unprocessable(format!("op `{}` requires input `{slot}`", req.op)))?
            .as_str()
            .ok_or_else(|| ApiError::unprocessable(format!("input `{slot}` must be an image id")))?;
        sources.push(state.store.get(other).ok_or_else(|| ApiError::not_found(other))?);
    }

    let img = blocking(move || {
        let rasters: Vec<&Raster> = sources.iter().map(|s| s.raster.as_ref()).collect();
        let out = op.apply(&rasters).map_err(|e| ApiError::unprocessable(e.to_string()))?;
        let ids = sources.iter().map(|s| s.id.clone()).collect();
        Ok::<_, ApiError>(state.store.insert_step(out, &req.op, params, ids)?)
    })
    .await??;
    Ok(created(&img))
}

async fn fourier_filter(State(state): State<AppState>, Path(id): Path<String>, mut form: Multipart) -> ApiResult<Json<Value>> {
    let source = state.store.get(&id).ok_or_else(|| ApiError::not_found(&id))?;
    let bad = |e: axum::extract::multipart::MultipartError| ApiError::new(StatusCode::BAD_REQUEST, e.to_string());
    let mut mask_bytes = None;
    let mut params = Map::new();
    while let Some(field) = form.next_field().await.map_err(bad)? {
        match field.name() {
            Some("mask") => mask_bytes = Some(field.bytes().await.map_err(bad)?),
            Some("renormalize") => {
                let text = field.text().await.map_err(bad)?;
                let flag = match text.trim() {
                    "1" | "true" => true,
                    "0" | "false" => false,
                    other => return Err(ApiError::unprocessable(format!("renormalize must be true/false, got `{other}`"))),
                };
                params.insert("renormalize".into(), Value::from(flag));
            }
            _ => {}
        }
    }
    let mask_bytes = mask_bytes.ok_or_else(|| ApiError::unprocessable("missing multipart field `mask`"))?;
    let format = ImageFormat::detect(&mask_bytes)
        .ok_or_else(|| ApiError::new(StatusCode::BAD_REQUEST, "mask is not a PNG or P5 PGM image"))?;
    let (op, params) = Op::parse("mask_filter", &params).map_err(|errs| ApiError::unprocessable(errs.join("; ")))?;

    let img = blocking(move || {
        let mask = codec::decode_image(&mask_bytes, format).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.to_string()))?;
        let (ew, eh) = spectral::padded_dims(source.raster.width(), source.raster.height());
        if mask.dims() != (ew, eh) {
            return Err(ApiError {
                status: StatusCode::UNPROCESSABLE_ENTITY,
                body: json!({
                    "error": format!(
                        "mask is {}x{}, expected the spectrum size {ew}x{eh}",
                        mask.width(),
                        mask.height()
                    ),
                    "expected_width": ew,
                    "expected_height": eh,
                }),
            });
        }
        let out = op
            .apply(&[&source.raster, &mask])
            .map_err(|e| ApiError::unprocessable(e.to_string()))?;
        let mask_img = state.store.insert_upload(mask, mask_bytes.to_vec(), format)?;
        let ids = vec![source.id.clone(), mask_img.id.clone()];
        Ok(state.store.insert_step(out, "mask_filter", params, ids)?)
    })
    .await??;
    Ok(created(&img))
}

async fn pipeline(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let spec = state.store.export_pipeline(&id).ok_or_else(|| ApiError::not_found(&id))?;
    Ok(Json(spec.to_value()))
}

async fn blob(State(state): State<AppState>, Path(digest): Path<String>) -> ApiResult<Response> {
    let blob = state
        .store
        .blob(&digest)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("no blob `{digest}`")))?;
    let mime = match blob.format {
        ImageFormat::Png => "image/png",
        ImageFormat::Pgm => "image/x-portable-graymap",
    };
    Ok(([(header::CONTENT_TYPE, mime)], blob.bytes.as_ref().clone()).into_response())
}
