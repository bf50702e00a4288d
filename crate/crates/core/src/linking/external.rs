use std::str::FromStr;
use std::time::Duration;

use serde::Deserialize;
use serde_json::Value;
use thiserror::Error;

use crate::limit::Limiter;
use crate::vocab::Iri;

use super::{LinkCandidate, LinkSource};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("entity linker: {0}")]
pub struct LinkError(pub String);

/// An entity-linking service over free text.
pub trait ExternalLinker: Send + Sync {
    fn link(&self, text: &str) -> Result<Vec<LinkCandidate>, LinkError>;
}

impl<F> ExternalLinker for F
where
    F: Fn(&str) -> Result<Vec<LinkCandidate>, LinkError> + Send + Sync,
{
    fn link(&self, text: &str) -> Result<Vec<LinkCandidate>, LinkError> {
        self(text)
    }
}

/// Wire format of the linker endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LinkerFormat {
    /// `{text}` → `{annotations: [{surface, iri, confidence}]}`
    #[default]
    Generic,
    /// REL: `{text, spans: []}` → `[[start, length, mention, entity, score, ...]]`
    Rel,
    /// DBpedia Spotlight: form `text=` → `{Resources: [{@URI, @surfaceForm, @similarityScore}]}`
    Spotlight,
}

impl FromStr for LinkerFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "generic" => Ok(LinkerFormat::Generic),
            "rel" => Ok(LinkerFormat::Rel),
            "spotlight" => Ok(LinkerFormat::Spotlight),
            other => Err(format!("unknown linker format {other:?} (expected generic, rel or spotlight)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LinkerConfig {
    pub endpoint: String,
    pub format: LinkerFormat,
    pub timeout: Duration,
    pub max_in_flight: usize,
}

pub struct HttpLinker {
    agent: ureq::Agent,
    endpoint: String,
    format: LinkerFormat,
    limiter: Limiter,
}

impl HttpLinker {
    pub fn new(config: &LinkerConfig) -> Self {
        HttpLinker {
            agent: ureq::AgentBuilder::new().timeout(config.timeout).build(),
            endpoint: config.endpoint.clone(),
            format: config.format,
            limiter: Limiter::new(config.max_in_flight),
        }
    }
}

impl ExternalLinker for HttpLinker {
    fn link(&self, text: &str) -> Result<Vec<LinkCandidate>, LinkError> {
        let _permit = self.limiter.acquire();
        let req = self.agent.post(&self.endpoint).set("Accept", "application/json");
        let resp = match self.format {
            LinkerFormat::Generic => req.send_json(serde_json::json!({ "text": text })),
            LinkerFormat::Rel => req.send_json(serde_json::json!({ "text": text, "spans": [] })),
            LinkerFormat::Spotlight => req.send_form(&[("text", text)]),
        }
        .map_err(|e| LinkError(e.to_string()))?;
        let body: Value = resp.into_json().map_err(|e| LinkError(format!("malformed response: {e}")))?;
        parse_response(self.format, text, &body)
    }
}

#[derive(Deserialize)]
struct GenericResponse {
    annotations: Vec<GenericAnnotation>,
}

#[derive(Deserialize)]
struct GenericAnnotation {
    #[serde(default)]
    surface: Option<String>,
    iri: String,
    confidence: f64,
}

fn candidate(surface: &str, iri: &str, confidence: f64) -> Result<LinkCandidate, LinkError> {
    if !confidence.is_finite() {
        return Err(LinkError(format!("confidence {confidence} for {iri}")));
    }
    Ok(LinkCandidate {
        surface: surface.to_string(),
        iri: Iri::new(iri).map_err(|e| LinkError(e.to_string()))?,
        confidence: confidence.clamp(0.0, 1.0),
        source: LinkSource::External,
    })
}

/// Normalize one response body to candidates. `text` stands in for a
/// missing surface form.
pub fn parse_response(format: LinkerFormat, text: &str, body: &Value) -> Result<Vec<LinkCandidate>, LinkError> {
    let bad = |what: &str| LinkError(format!("unexpected {what} in linker response"));
    match format {
        LinkerFormat::Generic => {
            let resp = GenericResponse::deserialize(body).map_err(|e| LinkError(e.to_string()))?;
            resp.annotations
                .iter()
                .map(|a| candidate(a.surface.as_deref().unwrap_or(text), &a.iri, a.confidence))
                .collect()
        }
        LinkerFormat::Rel => {
            let rows = body.as_array().ok_or_else(|| bad("body"))?;
            rows.iter()
                .map(|row| {
                    let row = row.as_array().ok_or_else(|| bad("row"))?;
                    let mention = row.get(2).and_then(Value::as_str).ok_or_else(|| bad("mention"))?;
                    let entity = row.get(3).and_then(Value::as_str).ok_or_else(|| bad("entity"))?;
                    let score = row.get(4).and_then(Value::as_f64).ok_or_else(|| bad("score"))?;
                    let iri = format!("https://en.wikipedia.org/wiki/{}", entity.replace(' ', "_"));
                    candidate(mention, &iri, score)
                })
                .collect()
        }
        LinkerFormat::Spotlight => {
            let Some(resources) = body.get("Resources") else {
                return Ok(Vec::new());
            };
            resources
                .as_array()
                .ok_or_else(|| bad("Resources"))?
                .iter()
                .map(|r| {
                    let iri = r.get("@URI").and_then(Value::as_str).ok_or_else(|| bad("@URI"))?;
                    let surface = r.get("@surfaceForm").and_then(Value::as_str).unwrap_or(text);
                    let score = match r.get("@similarityScore") {
                        Some(Value::String(s)) => s.parse().map_err(|_| bad("@similarityScore"))?,
                        Some(v) => v.as_f64().ok_or_else(|| bad("@similarityScore"))?,
                        None => return Err(bad("@similarityScore")),
                    };
                    candidate(surface, iri, score)
                })
                .collect()
        }
    }
}
