//! Programmatic enforcement of the statement shapes.

use std::collections::HashMap;
use std::fmt;

use chrono::{DateTime, Utc};
use serde::Serialize;

use super::model::{Concept, PkgStatement, SpoElement};
use super::term::Iri;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// Dotted field path, e.g. `preference.weight`.
    pub path: String,
    pub message: String,
}

impl Violation {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Violation {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

/// Check every context-free statement invariant. Empty iff valid.
pub fn validate_statement(stmt: &PkgStatement) -> Vec<Violation> {
    let mut out = Vec::new();

    if stmt.annotation.trim().is_empty() {
        out.push(Violation::new("annotation", "statement text must not be empty"));
    }

    let mut concepts: HashMap<&Iri, (&Concept, String)> = HashMap::new();
    let topic = stmt.preference.as_ref().map(|p| ("preference.topic", &p.topic));
    let elements = [
        ("subject", &stmt.subject),
        ("predicate", &stmt.predicate),
        ("object", &stmt.object),
    ];
    for (path, element) in elements.into_iter().chain(topic) {
        let SpoElement::Concept(concept) = element else { continue };
        check_concept(path, concept, &mut out);
        match concepts.get(&concept.id) {
            Some((seen, seen_path)) if *seen != concept => out.push(Violation::new(
                format!("{path}.id"),
                format!("concept id already used with different content at {seen_path}"),
            )),
            Some(_) => {}
            None => {
                concepts.insert(&concept.id, (concept, path.to_string()));
            }
        }
    }

    for (path, element) in elements {
        if let SpoElement::Resolved(iri) = element {
            if concepts.contains_key(iri) {
                out.push(Violation::new(path, "resolved IRI collides with a concept id"));
            }
        }
    }

    if stmt.provenance.created_on.timestamp_subsec_nanos() != 0 {
        out.push(Violation::new("provenance.createdOn", "timestamp must have second precision"));
    }

    let mut minted: Vec<(&str, &Iri)> = vec![("id", &stmt.id)];
    if let Some(pref) = &stmt.preference {
        minted.push(("preference.id", &pref.id));
        if !pref.weight.is_finite() || !(-1.0..=1.0).contains(&pref.weight) {
            out.push(Violation::new("preference.weight", "weight must lie in [-1, 1]"));
        }
        if pref.derived_from != stmt.id {
            out.push(Violation::new(
                "preference.derivedFrom",
                "preference must derive from the statement carrying it",
            ));
        }
        if &pref.holder != stmt.subject.node() {
            out.push(Violation::new("preference.holder", "holder must be the statement's subject"));
        }
        if pref.topic != stmt.object {
            out.push(Violation::new("preference.topic", "topic must be the statement's object"));
        }
    }
    for (path, iri) in &minted {
        if concepts.contains_key(iri) || minted.iter().filter(|(_, other)| other == iri).count() > 1 {
            out.push(Violation::new(*path, "identifier is not unique within the statement"));
        }
    }
    out
}

fn check_concept(path: &str, concept: &Concept, out: &mut Vec<Violation>) {
    if concept.text.trim().is_empty() {
        out.push(Violation::new(format!("{path}.text"), "concept text must not be empty"));
    }
    let links = [
        ("related", &concept.related),
        ("broader", &concept.broader),
        ("narrower", &concept.narrower),
    ];
    for (name, set) in links {
        if set.contains(&concept.id) {
            out.push(Violation::new(format!("{path}.{name}"), "concept links to itself"));
        }
    }
}

/// Invariants that need the owner and the ingestion clock.
pub fn validate_in_context(stmt: &PkgStatement, owner: &Iri, now: DateTime<Utc>) -> Vec<Violation> {
    let mut out = validate_statement(stmt);
    if stmt.provenance.created_on > now {
        out.push(Violation::new("provenance.createdOn", "timestamp lies in the future"));
    }
    if stmt.access.read.contains(owner) {
        out.push(Violation::new("access.read", "owner is implicitly authorized and must not be listed"));
    }
    if stmt.access.write.contains(owner) {
        out.push(Violation::new("access.write", "owner is implicitly authorized and must not be listed"));
    }
    out
}
