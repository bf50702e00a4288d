#![allow(dead_code)]

use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

use pkg_api::registry::Registry;
use pkg_api::{http, Pkg};
use pkg_core::linking::{ExternalLinker, LinkCandidate, LinkError, LinkSource, Resolver};
use pkg_core::nl2pkg::RuleAnnotator;
use pkg_core::store::QuadStore;
use pkg_core::vocab::{Iri, Owner};

pub const ADMIN: &str = "admin-token-for-tests";
pub const OPPENHEIMER: &str = "http://dbpedia.org/resource/Oppenheimer_(film)";

pub struct Harness {
    pub pkg: Arc<Pkg>,
    pub router: Router,
    pub owner: Owner,
    pub token: String,
}

/// An external linker that knows one entity.
pub fn oppenheimer_linker(confidence: f64) -> Arc<dyn ExternalLinker> {
    Arc::new(move |text: &str| -> Result<Vec<LinkCandidate>, LinkError> {
        Ok(if text.trim().eq_ignore_ascii_case("oppenheimer") {
            vec![LinkCandidate {
                surface: text.trim().to_string(),
                iri: Iri::new(OPPENHEIMER).unwrap(),
                confidence,
                source: LinkSource::External,
            }]
        } else {
            Vec::new()
        })
    })
}

pub fn empty_linker() -> Arc<dyn ExternalLinker> {
    Arc::new(|_: &str| -> Result<Vec<LinkCandidate>, LinkError> { Ok(Vec::new()) })
}

/// A service with owner "alice" registered and the rule annotator.
pub fn harness(linker: Arc<dyn ExternalLinker>, threshold: f64) -> Harness {
    let pkg = Pkg::new(
        QuadStore::new(),
        Registry::new("http://example.org/pkg/"),
        Arc::new(RuleAnnotator::default()),
        Resolver::new(Some(linker), threshold),
    )
    .with_admin_token(ADMIN);
    let (owner, token) = pkg.register_owner("alice").unwrap();
    let pkg = Arc::new(pkg);
    Harness { router: http::router(pkg.clone()), pkg, owner, token }
}

impl Harness {
    pub fn service(&self, id: &str) -> (Iri, String) {
        let iri = Iri::new(id).unwrap();
        let token = self.pkg.register_service(iri.clone(), ["alice".to_string()].into()).unwrap();
        (iri, token)
    }

    pub async fn call(&self, method: &str, uri: &str, token: Option<&str>, body: Option<Value>) -> (StatusCode, Value) {
        let (status, text) = self.call_text(method, uri, token, body).await;
        let value = serde_json::from_str(&text).unwrap_or(Value::String(text));
        (status, value)
    }

    pub async fn call_text(&self, method: &str, uri: &str, token: Option<&str>, body: Option<Value>) -> (StatusCode, String) {
        let mut req = Request::builder().method(method).uri(uri);
        if let Some(t) = token {
            req = req.header("authorization", format!("Bearer {t}"));
        }
        let req = match body {
            Some(v) => req.header("content-type", "application/json").body(Body::from(v.to_string())),
            None => req.body(Body::empty()),
        }
        .unwrap();
        let resp = self.router.clone().oneshot(req).await.unwrap();
        let status = resp.status();
        let bytes = resp.into_body().collect().await.unwrap().to_bytes();
        (status, String::from_utf8(bytes.to_vec()).unwrap())
    }

    pub async fn nl(&self, text: &str) -> (StatusCode, Value) {
        self.call("POST", "/pkg/alice/nl", Some(&self.token), Some(serde_json::json!({ "statement": text }))).await
    }
}
