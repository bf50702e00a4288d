//! The PKG data model: reified statements, concepts, preferences.

use std::collections::BTreeSet;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::term::{Iri, GENID_MARKER};
use crate::ids::IdGenerator;

/// An owner agent and the named graph holding their PKG.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Owner {
    pub agent: Iri,
    pub graph: Iri,
}

impl Owner {
    pub fn new(agent: Iri) -> Self {
        let graph = Iri::new(format!("{}/graph", agent.as_str().trim_end_matches('/')))
            .expect("suffixing a valid IRI keeps it valid");
        Owner { agent, graph }
    }

    /// Mint `<agent>/.well-known/genid/<kind>/<uuid>`.
    pub fn mint(&self, kind: &str, ids: &dyn IdGenerator) -> Iri {
        self.skolem(kind, &ids.next_uuid().to_string())
    }

    pub fn skolem(&self, kind: &str, key: &str) -> Iri {
        let base = self.agent.as_str().trim_end_matches('/');
        Iri::new(format!("{base}{GENID_MARKER}{kind}/{key}")).expect("skolem IRIs are valid")
    }
}

/// Placeholder for an SPO element that could not be linked to an IRI.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Concept {
    pub id: Iri,
    pub text: String,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub related: BTreeSet<Iri>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub broader: BTreeSet<Iri>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub narrower: BTreeSet<Iri>,
}

impl Concept {
    pub fn new(id: Iri, text: impl Into<String>) -> Self {
        Concept {
            id,
            text: text.into(),
            related: BTreeSet::new(),
            broader: BTreeSet::new(),
            narrower: BTreeSet::new(),
        }
    }

    pub fn link_count(&self) -> usize {
        self.related.len() + self.broader.len() + self.narrower.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpoElement {
    #[serde(rename = "iri")]
    Resolved(Iri),
    #[serde(rename = "concept")]
    Concept(Concept),
}

impl SpoElement {
    /// The IRI that stands for this element in the graph.
    pub fn node(&self) -> &Iri {
        match self {
            SpoElement::Resolved(iri) => iri,
            SpoElement::Concept(c) => &c.id,
        }
    }

    pub fn as_concept(&self) -> Option<&Concept> {
        match self {
            SpoElement::Concept(c) => Some(c),
            SpoElement::Resolved(_) => None,
        }
    }

    /// Human-readable text: the concept label or the IRI itself.
    pub fn text(&self) -> &str {
        match self {
            SpoElement::Resolved(iri) => iri.as_str(),
            SpoElement::Concept(c) => &c.text,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Provenance {
    pub created_by: Iri,
    #[serde(serialize_with = "ser_datetime")]
    pub created_on: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derived_from: Option<Iri>,
}

fn ser_datetime<S: Serializer>(value: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_datetime(value))
}

pub fn format_datetime(value: &DateTime<Utc>) -> String {
    value.to_rfc3339_opts(SecondsFormat::Secs, true)
}

/// Services allowed to read or modify a statement. The owner is implicit.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessPolicy {
    #[serde(default)]
    pub read: BTreeSet<Iri>,
    #[serde(default)]
    pub write: BTreeSet<Iri>,
}

impl AccessPolicy {
    pub fn can_read(&self, service: &Iri) -> bool {
        self.read.contains(service)
    }

    pub fn can_write(&self, service: &Iri) -> bool {
        self.write.contains(service)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Preference {
    pub id: Iri,
    pub holder: Iri,
    pub topic: SpoElement,
    #[serde(deserialize_with = "de_weight")]
    pub weight: f64,
    pub derived_from: Iri,
}

fn de_weight<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    let w = f64::deserialize(d)?;
    if w.is_finite() {
        Ok(w)
    } else {
        Err(serde::de::Error::custom("weight must be finite"))
    }
}

/// `xsd:decimal` lexical form with an explicit sign: `+1.0`, `-0.25`.
pub fn format_weight(weight: f64) -> String {
    let mut digits = format!("{}", weight.abs());
    if !digits.contains('.') {
        digits.push_str(".0");
    }
    let sign = if weight.is_sign_negative() && weight != 0.0 { '-' } else { '+' };
    format!("{sign}{digits}")
}

pub fn parse_weight(lexical: &str) -> Option<f64> {
    let body = lexical.strip_prefix(['+', '-']).unwrap_or(lexical);
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    let digits_ok = |s: &str| s.chars().all(|c| c.is_ascii_digit());
    if int.is_empty() && frac.is_empty() || !digits_ok(int) || !digits_ok(frac) {
        return None;
    }
    let w: f64 = lexical.parse().ok()?;
    Some(if w == 0.0 { 0.0 } else { w })
}

/// A reified natural-language statement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PkgStatement {
    pub id: Iri,
    pub annotation: String,
    pub subject: SpoElement,
    pub predicate: SpoElement,
    pub object: SpoElement,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preference: Option<Preference>,
    pub provenance: Provenance,
    #[serde(default)]
    pub access: AccessPolicy,
}

impl PkgStatement {
    pub fn elements(&self) -> [&SpoElement; 3] {
        [&self.subject, &self.predicate, &self.object]
    }

    /// Distinct concepts used by this statement, in S, P, O, topic order.
    pub fn concepts(&self) -> Vec<&Concept> {
        let mut out: Vec<&Concept> = Vec::new();
        let topic = self.preference.as_ref().map(|p| &p.topic);
        for element in self.elements().into_iter().chain(topic) {
            if let SpoElement::Concept(c) = element {
                if !out.iter().any(|seen| seen.id == c.id) {
                    out.push(c);
                }
            }
        }
        out
    }
}
