//! Stage-1 understanding: intent, surface-form SPO triple and preference
//! polarity for a single utterance.

mod answer;
mod lexicon;
mod model;
mod rules;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::vocab::Violation;
use crate::Intent;

pub use answer::{parse_intent, parse_preference, parse_spo, AnswerError, SpoAnswer};
pub use lexicon::{CueKind, Lexicon, LexiconError};
pub use model::{ChatTransport, HttpChat, ModelAnnotator, ModelConfig, PromptSet, TransportError};
pub use rules::{rule_annotate, RuleAnnotator};

/// Sign of an expressed preference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    pub fn from_sign(sign: i8) -> Option<Self> {
        match sign {
            1 => Some(Polarity::Positive),
            -1 => Some(Polarity::Negative),
            _ => None,
        }
    }

    pub fn value(self) -> i8 {
        match self {
            Polarity::Positive => 1,
            Polarity::Negative => -1,
        }
    }

    pub fn weight(self) -> f64 {
        f64::from(self.value())
    }
}

impl TryFrom<i8> for Polarity {
    type Error = String;

    fn try_from(v: i8) -> Result<Self, String> {
        Polarity::from_sign(v).ok_or_else(|| format!("polarity must be +1 or -1, got {v}"))
    }
}

impl From<Polarity> for i8 {
    fn from(p: Polarity) -> i8 {
        p.value()
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarity::Positive => "+1",
            Polarity::Negative => "-1",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedUtterance {
    pub raw: String,
    pub intent: Intent,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subject_text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicate_text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub object_text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preference_polarity: Option<Polarity>,
    pub annotator_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure_reason: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl AnnotatedUtterance {
    pub fn unknown(raw: &str, annotator_id: &str) -> Self {
        AnnotatedUtterance {
            raw: raw.to_string(),
            intent: Intent::Unknown,
            subject_text: None,
            predicate_text: None,
            object_text: None,
            preference_polarity: None,
            annotator_id: annotator_id.to_string(),
            failure_reason: None,
            warnings: Vec::new(),
        }
    }

    pub fn failed(raw: &str, annotator_id: &str, reason: &str) -> Self {
        AnnotatedUtterance {
            failure_reason: Some(reason.to_string()),
            ..AnnotatedUtterance::unknown(raw, annotator_id)
        }
    }

    pub fn spo(&self) -> [Option<&str>; 3] {
        [self.subject_text.as_deref(), self.predicate_text.as_deref(), self.object_text.as_deref()]
    }

    /// Restore the invariants: a polarity outside ADD is dropped with a
    /// warning, and UNKNOWN carries no SPO texts.
    pub fn sanitized(mut self) -> Self {
        if self.intent != Intent::Add {
            if let Some(p) = self.preference_polarity.take() {
                self.warnings.push(format!("preference {p} dropped: only ADD statements carry preferences"));
            }
        }
        if self.intent == Intent::Unknown && self.spo().iter().any(Option::is_some) {
            self.subject_text = None;
            self.predicate_text = None;
            self.object_text = None;
            self.warnings.push("SPO texts dropped for UNKNOWN intent".into());
        }
        for text in [&mut self.subject_text, &mut self.predicate_text, &mut self.object_text] {
            if text.as_deref().is_some_and(|t| t.trim().is_empty()) {
                *text = None;
            }
        }
        self
    }
}

/// A Stage-1 backend. Implementations are total: failures come back as
/// UNKNOWN with a `failure_reason`.
pub trait Annotator: Send + Sync {
    fn id(&self) -> &str;
    fn annotate(&self, raw: &str) -> AnnotatedUtterance;
}

pub fn validate_annotation(a: &AnnotatedUtterance) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |path: &str, message: String| out.push(Violation { path: path.into(), message });
    if a.intent == Intent::Unknown {
        for (name, text) in ["subject_text", "predicate_text", "object_text"].into_iter().zip(a.spo()) {
            if text.is_some() {
                push(name, "must be absent for UNKNOWN intent".into());
            }
        }
    }
    if let Some(p) = a.preference_polarity {
        if a.intent != Intent::Add {
            push("preference_polarity", format!("polarity {p} is only allowed for ADD, intent is {}", a.intent));
        }
    }
    if a.intent == Intent::Add {
        for (name, text) in ["subject_text", "predicate_text", "object_text"].into_iter().zip(a.spo()) {
            if text.is_none_or(|t| t.trim().is_empty()) {
                push(name, "ADD needs all three SPO elements".into());
            }
        }
    }
    for (name, text) in ["subject_text", "predicate_text", "object_text"].into_iter().zip(a.spo()) {
        if a.intent != Intent::Add && text.is_some_and(|t| t.trim().is_empty()) {
            push(name, "must not be blank".into());
        }
    }
    if a.annotator_id.is_empty() {
        push("annotator_id", "must not be empty".into());
    }
    out
}
