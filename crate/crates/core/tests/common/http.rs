//! In-process client for the workbench router.

use axum::body::{Body, Bytes};
use axum::http::{header, HeaderMap, Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

use restore_core::service::{router, AppState, ServiceConfig};

pub struct Reply {
    pub status: StatusCode,
    pub headers: HeaderMap,
    pub body: Bytes,
}

impl Reply {
    pub fn json(&self) -> Value {
        serde_json::from_slice(&self.body).unwrap_or_else(|e| panic!("non-JSON body ({e}): {:?}", self.body))
    }
}

#[derive(Clone)]
pub struct Client {
    app: Router,
}

impl Client {
    pub fn new(config: ServiceConfig) -> Self {
        Self {
            app: router(AppState::new(config)),
        }
    }

    pub async fn send(&self, req: Request<Body>) -> Reply {
        let resp = self.app.clone().oneshot(req).await.expect("router is infallible");
        let status = resp.status();
        let headers = resp.headers().clone();
        let body = resp.into_body().collect().await.expect("body collects").to_bytes();
        Reply { status, headers, body }
    }

    pub async fn get(&self, uri: &str) -> Reply {
        self.send(Request::get(uri).body(Body::empty()).unwrap()).await
    }

    pub async fn post(&self, uri: &str, content_type: &str, body: impl Into<Body>) -> Reply {
        let req = Request::builder()
            .method(Method::POST)
            .uri(uri)
            .header(header::CONTENT_TYPE, content_type)
            .body(body.into())
            .unwrap();
        self.send(req).await
    }

    pub async fn post_json(&self, uri: &str, body: &Value) -> Reply {
        self.post(uri, "application/json", body.to_string()).await
    }

    /// Uploads and returns the new image id.
    pub async fn upload(&self, bytes: Vec<u8>) -> String {
        let reply = self.post("/api/v1/images", "application/octet-stream", bytes).await;
        assert_eq!(reply.status, StatusCode::OK, "upload failed: {:?}", reply.body);
        reply.json()["id"].as_str().unwrap().to_owned()
    }

    /// Applies an op and returns the derived image id.
    pub async fn op(&self, id: &str, body: &Value) -> String {
        let reply = self.post_json(&format!("/api/v1/images/{id}/ops"), body).await;
        assert_eq!(reply.status, StatusCode::OK, "op failed: {}", String::from_utf8_lossy(&reply.body));
        reply.json()["id"].as_str().unwrap().to_owned()
    }

    pub async fn png(&self, id: &str) -> Bytes {
        let reply = self.get(&format!("/api/v1/images/{id}")).await;
        assert_eq!(reply.status, StatusCode::OK);
        reply.body
    }
}

pub fn multipart(boundary: &str, parts: &[(&str, &[u8])]) -> Vec<u8> {
    let mut body = Vec::new();
    for (name, data) in parts {
        body.extend_from_slice(format!("--{boundary}\r\n").as_bytes());
        body.extend_from_slice(
            format!("Content-Disposition: form-data; name=\"{name}\"; filename=\"{name}\"\r\n\r\n").as_bytes(),
        );
        body.extend_from_slice(data);
        body.extend_from_slice(b"\r\n");
    }
    body.extend_from_slice(format!("--{boundary}--\r\n").as_bytes());
    body
}

pub fn runtime() -> tokio::runtime::Runtime {
    tokio::runtime::Builder::new_multi_thread().enable_all().build().unwrap()
}
