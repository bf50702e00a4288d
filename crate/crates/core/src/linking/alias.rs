use std::collections::BTreeMap;

use crate::vocab::{ns, Iri, Literal, Quad, Term};

use super::{LinkCandidate, LinkSource};

const FIRST_PERSON: [&str; 4] = ["i", "me", "my", "myself"];

/// Case-folded, whitespace-collapsed, without surrounding punctuation.
pub fn normalize_alias(surface: &str) -> String {
    surface
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .trim_matches(|c: char| !c.is_alphanumeric())
        .to_lowercase()
}

/// The owner's personal circle: alias text to IRI. First-person aliases
/// always point at the owner.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PersonalAliasTable {
    owner: Iri,
    entries: BTreeMap<String, Iri>,
}

impl PersonalAliasTable {
    pub fn new(owner: Iri) -> Self {
        let entries = FIRST_PERSON.iter().map(|a| (a.to_string(), owner.clone())).collect();
        PersonalAliasTable { owner, entries }
    }

    pub fn owner(&self) -> &Iri {
        &self.owner
    }

    /// Add or replace an alias. First-person aliases and aliases that
    /// normalize to nothing are refused.
    pub fn insert(&mut self, alias: &str, iri: Iri) -> bool {
        let key = normalize_alias(alias);
        if key.is_empty() || FIRST_PERSON.contains(&key.as_str()) {
            return false;
        }
        self.entries.insert(key, iri);
        true
    }

    pub fn get(&self, surface: &str) -> Option<&Iri> {
        self.entries.get(&normalize_alias(surface))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &Iri)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Table from `<iri> pkg:alias "text"` quads.
    pub fn from_quads<'q>(owner: Iri, quads: impl IntoIterator<Item = &'q Quad>) -> Self {
        let mut table = PersonalAliasTable::new(owner);
        for q in quads {
            if q.predicate.as_str() != ns::pkg::ALIAS {
                continue;
            }
            if let (Some(iri), Some(lit)) = (q.subject.as_iri(), q.object.as_literal()) {
                table.insert(lit.lexical(), iri.clone());
            }
        }
        table
    }

    /// The quad recording one alias in `graph`.
    pub fn alias_quad(graph: &Iri, alias: &str, iri: &Iri) -> Quad {
        Quad {
            graph: graph.clone(),
            subject: Term::iri(iri.clone()),
            predicate: Iri::new(ns::pkg::ALIAS).expect("vocabulary IRI"),
            object: Term::literal(Literal::string(alias.trim())),
        }
    }
}

/// Exact lookup in the personal table; a hit has confidence 1.
pub fn link_local(surface: &str, table: &PersonalAliasTable) -> Option<LinkCandidate> {
    table.get(surface).map(|iri| LinkCandidate {
        surface: surface.to_string(),
        iri: iri.clone(),
        confidence: 1.0,
        source: LinkSource::Local,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alice() -> Iri {
        Iri::new("http://example.org/pkg/alice").unwrap()
    }

    #[test]
    fn first_person_is_owner() {
        let table = PersonalAliasTable::new(alice());
        for s in ["I", "me", " My ", "MYSELF"] {
            let c = link_local(s, &table).unwrap();
            assert_eq!(c.iri, alice());
            assert_eq!(c.confidence, 1.0);
            assert_eq!(c.source, LinkSource::Local);
        }
        assert!(link_local("Zanzibar", &table).is_none());
    }

    #[test]
    fn personal_circle() {
        let mom = Iri::new("http://example.org/pkg/alice/mom").unwrap();
        let mut table = PersonalAliasTable::new(alice());
        assert!(table.insert("my  Mom", mom.clone()));
        assert!(!table.insert("me", mom.clone()));
        assert!(!table.insert("  ", mom.clone()));
        assert_eq!(link_local("My mom", &table).unwrap().iri, mom);
        assert_eq!(link_local("I", &table).unwrap().iri, alice());
    }

    #[test]
    fn quads_round_trip() {
        let graph = Iri::new("http://example.org/pkg/alice/graph").unwrap();
        let mom = Iri::new("http://example.org/pkg/alice/mom").unwrap();
        let quads = vec![
            PersonalAliasTable::alias_quad(&graph, "my mom", &mom),
            PersonalAliasTable::alias_quad(&graph, "I", &mom),
        ];
        let table = PersonalAliasTable::from_quads(alice(), &quads);
        assert_eq!(table.get("MY MOM"), Some(&mom));
        assert_eq!(table.get("i"), Some(&alice()));
    }
}
