//! Chat-model annotator: three prompt exchanges (intent, SPO, preference)
//! against a JSON-over-HTTP completion endpoint.

use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use serde::Deserialize;
use thiserror::Error;

use super::answer::{parse_intent, parse_preference, parse_spo};
use super::{AnnotatedUtterance, Annotator};
use crate::limit::Limiter;
use crate::Intent;

const INTENT_PROMPT: &str = include_str!("../../data/prompts/intent.txt");
const SPO_PROMPT: &str = include_str!("../../data/prompts/spo.txt");
const PREFERENCE_PROMPT: &str = include_str!("../../data/prompts/preference.txt");

pub const MODEL_ANNOTATOR_ID: &str = "model";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("chat transport: {0}")]
pub struct TransportError(pub String);

/// One prompt in, one completion out.
pub trait ChatTransport: Send + Sync {
    fn complete(&self, prompt: &str) -> Result<String, TransportError>;
}

impl<F> ChatTransport for F
where
    F: Fn(&str) -> Result<String, TransportError> + Send + Sync,
{
    fn complete(&self, prompt: &str) -> Result<String, TransportError> {
        self(prompt)
    }
}

#[derive(Debug, Clone)]
pub struct ModelConfig {
    pub endpoint: String,
    pub model: String,
    pub timeout: Duration,
    pub max_in_flight: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            endpoint: "http://127.0.0.1:11434/api/generate".into(),
            model: "llama3".into(),
            timeout: Duration::from_secs(30),
            max_in_flight: 4,
        }
    }
}

/// `POST {model, prompt}` → `{response}`. A streamed body of one JSON object
/// per line is concatenated.
pub struct HttpChat {
    agent: ureq::Agent,
    endpoint: String,
    model: String,
}

impl HttpChat {
    pub fn new(config: &ModelConfig) -> Self {
        HttpChat {
            agent: ureq::AgentBuilder::new().timeout(config.timeout).build(),
            endpoint: config.endpoint.clone(),
            model: config.model.clone(),
        }
    }
}

#[derive(Deserialize)]
struct ChatResponse {
    response: String,
}

pub(crate) fn parse_chat_body(body: &str) -> Result<String, TransportError> {
    if let Ok(r) = serde_json::from_str::<ChatResponse>(body) {
        return Ok(r.response);
    }
    let mut out = String::new();
    for line in body.lines().filter(|l| !l.trim().is_empty()) {
        let chunk: ChatResponse =
            serde_json::from_str(line).map_err(|e| TransportError(format!("malformed response body: {e}")))?;
        out.push_str(&chunk.response);
    }
    if body.trim().is_empty() {
        return Err(TransportError("empty response body".into()));
    }
    Ok(out)
}

impl ChatTransport for HttpChat {
    fn complete(&self, prompt: &str) -> Result<String, TransportError> {
        let resp = self
            .agent
            .post(&self.endpoint)
            .send_json(serde_json::json!({ "model": self.model, "prompt": prompt }))
            .map_err(|e| TransportError(e.to_string()))?;
        let body = resp.into_string().map_err(|e| TransportError(e.to_string()))?;
        parse_chat_body(&body)
    }
}

/// Few-shot templates with an `{{utterance}}` placeholder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptSet {
    pub intent: String,
    pub spo: String,
    pub preference: String,
}

impl Default for PromptSet {
    fn default() -> Self {
        PromptSet { intent: INTENT_PROMPT.into(), spo: SPO_PROMPT.into(), preference: PREFERENCE_PROMPT.into() }
    }
}

impl PromptSet {
    /// Read `intent.txt`, `spo.txt` and `preference.txt` from `dir`.
    pub fn load_dir(dir: &Path) -> std::io::Result<Self> {
        let read = |name: &str| {
            let text = std::fs::read_to_string(dir.join(name))?;
            if !text.contains("{{utterance}}") {
                return Err(std::io::Error::new(
                    std::io::ErrorKind::InvalidData,
                    format!("{name} lacks the {{{{utterance}}}} placeholder"),
                ));
            }
            Ok(text)
        };
        Ok(PromptSet { intent: read("intent.txt")?, spo: read("spo.txt")?, preference: read("preference.txt")? })
    }

    pub fn render(template: &str, utterance: &str) -> String {
        template.replace("{{utterance}}", utterance.trim())
    }
}

pub struct ModelAnnotator {
    transport: Arc<dyn ChatTransport>,
    prompts: PromptSet,
    limiter: Limiter,
}

impl ModelAnnotator {
    pub fn new(transport: Arc<dyn ChatTransport>, prompts: PromptSet, max_in_flight: usize) -> Self {
        ModelAnnotator {
            transport,
            prompts,
            limiter: Limiter::new(max_in_flight),
        }
    }

    pub fn http(config: &ModelConfig, prompts: PromptSet) -> Self {
        ModelAnnotator::new(Arc::new(HttpChat::new(config)), prompts, config.max_in_flight)
    }

    fn ask(&self, template: &str, raw: &str) -> Result<String, TransportError> {
        let _permit = self.limiter.acquire();
        self.transport.complete(&PromptSet::render(template, raw))
    }
}

impl Annotator for ModelAnnotator {
    fn id(&self) -> &str {
        MODEL_ANNOTATOR_ID
    }

    fn annotate(&self, raw: &str) -> AnnotatedUtterance {
        let fail = |reason: &str| AnnotatedUtterance::failed(raw, MODEL_ANNOTATOR_ID, reason);
        if raw.trim().is_empty() {
            return AnnotatedUtterance::unknown(raw, MODEL_ANNOTATOR_ID);
        }
        let intent = match self.ask(&self.prompts.intent, raw).map(|r| parse_intent(&r)) {
            Err(_) => return fail("transport"),
            Ok(Err(_)) => return fail("intent-parse"),
            Ok(Ok(intent)) => intent,
        };
        if intent == Intent::Unknown {
            return AnnotatedUtterance::unknown(raw, MODEL_ANNOTATOR_ID);
        }
        let spo = match self.ask(&self.prompts.spo, raw).map(|r| parse_spo(&r)) {
            Err(_) => return fail("transport"),
            Ok(Err(_)) => return fail("spo-parse"),
            Ok(Ok(spo)) => spo,
        };
        if intent == Intent::Add && (spo.subject.is_none() || spo.predicate.is_none() || spo.object.is_none()) {
            return fail("spo-parse");
        }
        let polarity = match self.ask(&self.prompts.preference, raw).map(|r| parse_preference(&r)) {
            Err(_) => return fail("transport"),
            Ok(Err(_)) => return fail("pref-parse"),
            Ok(Ok(p)) => p,
        };
        AnnotatedUtterance {
            intent,
            subject_text: spo.subject,
            predicate_text: spo.predicate,
            object_text: spo.object,
            preference_polarity: polarity,
            ..AnnotatedUtterance::unknown(raw, MODEL_ANNOTATOR_ID)
        }
        .sanitized()
    }
}
