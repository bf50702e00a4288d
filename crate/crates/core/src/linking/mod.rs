//! Stage-2 linking: surface forms to IRIs, with the owner's personal circle
//! first, an external entity linker second, and a concept fallback.

mod alias;
mod external;

use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::connector::{ElementMatch, StatementPattern};
use crate::ids::{Clock, IdGenerator};
use crate::nl2pkg::AnnotatedUtterance;
use crate::vocab::{AccessPolicy, Concept, Iri, Owner, PkgStatement, Preference, Provenance, SpoElement};
use crate::Intent;

pub use alias::{link_local, normalize_alias, PersonalAliasTable};
pub use external::{parse_response, ExternalLinker, HttpLinker, LinkError, LinkerConfig, LinkerFormat};

pub const DEFAULT_THRESHOLD: f64 = 0.5;

const RELATION_IRIS: &str = include_str!("../../data/relation_iris.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkSource {
    Local,
    External,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkCandidate {
    pub surface: String,
    pub iri: Iri,
    pub confidence: f64,
    pub source: LinkSource,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExternalLinks {
    pub candidates: Vec<LinkCandidate>,
    pub warning: Option<String>,
}

/// Query the external linker; failures become a warning and no candidates.
pub fn link_external(surface: &str, linker: &dyn ExternalLinker) -> ExternalLinks {
    match linker.link(surface) {
        Ok(mut candidates) => {
            candidates.retain(|c| (0.0..=1.0).contains(&c.confidence));
            candidates.sort_by(|a, b| b.confidence.total_cmp(&a.confidence).then_with(|| a.iri.cmp(&b.iri)));
            ExternalLinks { candidates, warning: None }
        }
        Err(e) => ExternalLinks { candidates: Vec::new(), warning: Some(format!("linking {surface:?} failed: {e}")) },
    }
}

/// Predicate lemmas with a fixed IRI.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RelationIris(HashMap<String, Iri>);

impl RelationIris {
    pub fn builtin() -> &'static RelationIris {
        static BUILTIN: OnceLock<RelationIris> = OnceLock::new();
        BUILTIN.get_or_init(|| RelationIris::parse(RELATION_IRIS).expect("built-in relation table is well-formed"))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut map = HashMap::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (lemma, iri) = line
                .split_once('\t')
                .ok_or_else(|| format!("line {}: expected `lemma<TAB>iri`", n + 1))?;
            let iri = Iri::new(iri.trim()).map_err(|e| format!("line {}: {e}", n + 1))?;
            map.insert(normalize_alias(lemma), iri);
        }
        Ok(RelationIris(map))
    }

    pub fn get(&self, predicate: &str) -> Option<&Iri> {
        self.0.get(&normalize_alias(predicate))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ResolveError {
    #[error("only ADD annotations resolve to statements, got {0}")]
    NotAdd(Intent),
    #[error("ADD annotation lacks its {0} text")]
    MissingElement(&'static str),
}

/// Who is adding, and where ids and timestamps come from.
pub struct StatementContext<'a> {
    pub owner: &'a Owner,
    pub agent: &'a Iri,
    pub clock: &'a dyn Clock,
    pub ids: &'a dyn IdGenerator,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Resolution {
    pub statement: PkgStatement,
    /// The link chosen for subject, predicate and object; `None` means the
    /// element fell back to a concept.
    pub links: [Option<LinkCandidate>; 3],
    pub warnings: Vec<String>,
}

enum ElementLink {
    Linked(LinkCandidate),
    Unlinked { related: Vec<Iri> },
}

fn required<'t>(text: Option<&'t str>, name: &'static str) -> Result<&'t str, ResolveError> {
    text.map(str::trim).filter(|t| !t.is_empty()).ok_or(ResolveError::MissingElement(name))
}

pub struct Resolver {
    linker: Option<Arc<dyn ExternalLinker>>,
    threshold: f64,
    relations: RelationIris,
}

impl Default for Resolver {
    fn default() -> Self {
        Resolver { linker: None, threshold: DEFAULT_THRESHOLD, relations: RelationIris::builtin().clone() }
    }
}

impl Resolver {
    pub fn new(linker: Option<Arc<dyn ExternalLinker>>, threshold: f64) -> Self {
        Resolver { linker, threshold: threshold.clamp(0.0, 1.0), ..Resolver::default() }
    }

    pub fn with_relations(mut self, relations: RelationIris) -> Self {
        self.relations = relations;
        self
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    fn link_entity(&self, surface: &str, table: &PersonalAliasTable, warnings: &mut Vec<String>) -> ElementLink {
        if let Some(local) = link_local(surface, table) {
            return ElementLink::Linked(local);
        }
        let Some(linker) = &self.linker else {
            return ElementLink::Unlinked { related: Vec::new() };
        };
        let links = link_external(surface, linker.as_ref());
        warnings.extend(links.warning);
        let key = normalize_alias(surface);
        let mut related = Vec::new();
        for c in links.candidates.into_iter().filter(|c| c.confidence >= self.threshold) {
            if normalize_alias(&c.surface) == key {
                return ElementLink::Linked(c);
            }
            if !related.contains(&c.iri) {
                related.push(c.iri);
            }
        }
        ElementLink::Unlinked { related }
    }

    fn link_predicate(&self, surface: &str) -> ElementLink {
        match self.relations.get(surface) {
            Some(iri) => ElementLink::Linked(LinkCandidate {
                surface: surface.to_string(),
                iri: iri.clone(),
                confidence: 1.0,
                source: LinkSource::Local,
            }),
            None => ElementLink::Unlinked { related: Vec::new() },
        }
    }

    /// Turn an ADD annotation into a statement. Elements that do not link
    /// become fresh concepts.
    pub fn resolve(
        &self,
        a: &AnnotatedUtterance,
        table: &PersonalAliasTable,
        cx: &StatementContext<'_>,
    ) -> Result<Resolution, ResolveError> {
        if a.intent != Intent::Add {
            return Err(ResolveError::NotAdd(a.intent));
        }
        let [s, p, o] = a.spo();
        let (s, p, o) = (required(s, "subject")?, required(p, "predicate")?, required(o, "object")?);
        let mut warnings = Vec::new();
        let links = [
            self.link_entity(s, table, &mut warnings),
            self.link_predicate(p),
            self.link_entity(o, table, &mut warnings),
        ];
        let id = cx.owner.mint("stmt", cx.ids);
        let mut chosen: [Option<LinkCandidate>; 3] = [None, None, None];
        let mut elements = Vec::with_capacity(3);
        for ((link, surface), slot) in links.into_iter().zip([s, p, o]).zip(chosen.iter_mut()) {
            elements.push(match link {
                ElementLink::Linked(c) => {
                    let iri = c.iri.clone();
                    *slot = Some(c);
                    SpoElement::Resolved(iri)
                }
                ElementLink::Unlinked { related } => {
                    let mut concept = Concept::new(cx.owner.mint("concept", cx.ids), surface);
                    concept.related.extend(related);
                    SpoElement::Concept(concept)
                }
            });
        }
        let [subject, predicate, object]: [SpoElement; 3] = elements.try_into().expect("three elements");
        let preference = a.preference_polarity.map(|p| Preference {
            id: cx.owner.mint("pref", cx.ids),
            holder: subject.node().clone(),
            topic: object.clone(),
            weight: p.weight(),
            derived_from: id.clone(),
        });
        let statement = PkgStatement {
            id,
            annotation: a.raw.trim().to_string(),
            subject,
            predicate,
            object,
            preference,
            provenance: Provenance { created_by: cx.agent.clone(), created_on: cx.clock.now(), derived_from: None },
            access: AccessPolicy::default(),
        };
        Ok(Resolution { statement, links: chosen, warnings })
    }

    /// Turn a GET/DELETE annotation into a match pattern: linked elements
    /// match by IRI, the rest by text, absent ones match anything.
    pub fn resolve_pattern(&self, a: &AnnotatedUtterance, table: &PersonalAliasTable) -> (StatementPattern, Vec<String>) {
        let mut warnings = Vec::new();
        let mut element = |text: Option<&str>, predicate: bool| {
            let Some(surface) = text.map(str::trim).filter(|t| !t.is_empty()) else {
                return ElementMatch::Any;
            };
            let link = if predicate { self.link_predicate(surface) } else { self.link_entity(surface, table, &mut warnings) };
            match link {
                ElementLink::Linked(c) => ElementMatch::Iri(c.iri),
                ElementLink::Unlinked { .. } => ElementMatch::Text(surface.to_string()),
            }
        };
        let [s, p, o] = a.spo();
        let pattern = StatementPattern { subject: element(s, false), predicate: element(p, true), object: element(o, false) };
        (pattern, warnings)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ids::{FixedClock, SeededIds};
    use crate::nl2pkg::rule_annotate;
    use crate::vocab::{fixtures, validate_statement};

    fn stub(iri: &'static str, confidence: f64) -> Arc<dyn ExternalLinker> {
        Arc::new(move |text: &str| {
            Ok(if text == "Oppenheimer" {
                vec![LinkCandidate {
                    surface: text.into(),
                    iri: Iri::new(iri).unwrap(),
                    confidence,
                    source: LinkSource::External,
                }]
            } else {
                vec![]
            })
        })
    }

    fn resolve_with(resolver: &Resolver, raw: &str) -> Resolution {
        let owner = fixtures::owner();
        let table = PersonalAliasTable::new(owner.agent.clone());
        let clock = FixedClock(chrono::Utc::now());
        let ids = SeededIds::new(7);
        let cx = StatementContext { owner: &owner, agent: &owner.agent, clock: &clock, ids: &ids };
        resolver.resolve(&rule_annotate(raw), &table, &cx).unwrap()
    }

    #[test]
    fn tom_cruise_without_external_hits() {
        let r = resolve_with(&Resolver::new(Some(Arc::new(|_: &str| Ok(vec![]))), 0.5), "I dislike all movies with the actor Tom Cruise");
        let st = &r.statement;
        assert_eq!(st.subject, SpoElement::Resolved(fixtures::owner().agent));
        assert_eq!(st.predicate.as_concept().unwrap().text, "dislike");
        assert_eq!(st.object.as_concept().unwrap().text, "all movies with the actor Tom Cruise");
        assert_eq!(st.preference.as_ref().unwrap().weight, -1.0);
        assert_eq!(validate_statement(st), vec![]);
        assert_eq!(r.links[0].as_ref().unwrap().source, LinkSource::Local);
    }

    #[test]
    fn threshold_decides() {
        let iri = "http://dbpedia.org/resource/Oppenheimer_(film)";
        let low = resolve_with(&Resolver::new(Some(stub(iri, 0.9)), 0.5), "Bob likes Oppenheimer");
        assert_eq!(low.statement.object, SpoElement::Resolved(Iri::new(iri).unwrap()));
        assert_eq!(low.statement.predicate.node().as_str(), crate::vocab::ns::pkg::LIKE);
        let high = resolve_with(&Resolver::new(Some(stub(iri, 0.9)), 0.95), "Bob likes Oppenheimer");
        assert_eq!(high.statement.object.as_concept().unwrap().text, "Oppenheimer");
        assert_eq!(high.statement.preference.unwrap().weight, 1.0);
    }

    #[test]
    fn linker_failure_is_a_warning() {
        let failing: Arc<dyn ExternalLinker> = Arc::new(|_: &str| Err(LinkError("timed out".into())));
        let r = resolve_with(&Resolver::new(Some(failing), 0.5), "Bob likes Oppenheimer");
        assert_eq!(r.warnings.len(), 2);
        assert!(r.statement.object.as_concept().is_some());
    }

    #[test]
    fn partial_spans_become_related() {
        let linker: Arc<dyn ExternalLinker> = Arc::new(|_: &str| {
            Ok(vec![LinkCandidate {
                surface: "Tom Cruise".into(),
                iri: Iri::new("http://dbpedia.org/resource/Tom_Cruise").unwrap(),
                confidence: 0.8,
                source: LinkSource::External,
            }])
        });
        let r = resolve_with(&Resolver::new(Some(linker), 0.5), "I dislike all movies with the actor Tom Cruise");
        let concept = r.statement.object.as_concept().unwrap();
        assert!(concept.related.contains(&Iri::new("http://dbpedia.org/resource/Tom_Cruise").unwrap()));
    }

    #[test]
    fn external_results_sorted() {
        let linker = |_: &str| {
            Ok(vec![
                LinkCandidate { surface: "a".into(), iri: Iri::new("http://x/1").unwrap(), confidence: 0.2, source: LinkSource::External },
                LinkCandidate { surface: "a".into(), iri: Iri::new("http://x/2").unwrap(), confidence: 0.7, source: LinkSource::External },
            ])
        };
        let links = link_external("a", &linker);
        assert_eq!(links.candidates[0].confidence, 0.7);
        assert!(links.warning.is_none());
    }

    #[test]
    fn patterns() {
        let resolver = Resolver::default();
        let table = PersonalAliasTable::new(fixtures::owner().agent);
        let (p, _) = resolver.resolve_pattern(&rule_annotate("What do I dislike?"), &table);
        assert_eq!(p.subject, ElementMatch::Iri(fixtures::owner().agent));
        assert_eq!(p.predicate, ElementMatch::Text("dislike".into()));
        assert_eq!(p.object, ElementMatch::Any);
        let (p, _) = resolver.resolve_pattern(&rule_annotate("Who likes Oppenheimer?"), &table);
        assert_eq!(p.predicate, ElementMatch::Iri(Iri::new(crate::vocab::ns::pkg::LIKE).unwrap()));
    }
}
