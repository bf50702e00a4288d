//! Mapping between [`PkgStatement`] values and reified RDF quads.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Utc};
use thiserror::Error;

use super::model::{
    format_datetime, format_weight, parse_weight, AccessPolicy, Concept, PkgStatement, Preference, Provenance,
    SpoElement,
};
use super::ns;
use super::term::{Iri, Literal, Quad, Term};
use super::validate::{validate_statement, Violation};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MappingError {
    #[error("invalid statement: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("incomplete statement {id}: missing {}", .missing.join(", "))]
    Missing { id: Iri, missing: Vec<String> },
    #[error("malformed statement {id}: {message}")]
    Malformed { id: Iri, message: String },
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

fn iri(value: &'static str) -> Iri {
    Iri::from_static(value)
}

struct Emitter<'a> {
    graph: &'a Iri,
    quads: Vec<Quad>,
}

impl Emitter<'_> {
    fn push(&mut self, subject: &Iri, predicate: &'static str, object: Term) {
        self.quads.push(Quad {
            graph: self.graph.clone(),
            subject: Term::iri(subject.clone()),
            predicate: iri(predicate),
            object,
        });
    }

    fn node(&mut self, subject: &Iri, predicate: &'static str, object: &Iri) {
        self.push(subject, predicate, Term::iri(object.clone()));
    }

    fn concept(&mut self, concept: &Concept) {
        self.node(&concept.id, ns::rdf::TYPE, &iri(ns::skos::CONCEPT));
        self.push(&concept.id, ns::skos::PREF_LABEL, Term::literal(Literal::string(&concept.text)));
        self.node(&concept.id, ns::skos::IN_SCHEME, &self.graph.clone());
        for target in &concept.related {
            self.node(&concept.id, ns::skos::RELATED, target);
        }
        for target in &concept.broader {
            self.node(&concept.id, ns::skos::BROADER, target);
        }
        for target in &concept.narrower {
            self.node(&concept.id, ns::skos::NARROWER, target);
        }
    }

    fn preference(&mut self, pref: &Preference) {
        self.node(&pref.holder, ns::pkg::PREFERENCE, &pref.id);
        self.node(&pref.id, ns::rdf::TYPE, &iri(ns::pkg::PREFERENCE_CLASS));
        self.node(&pref.id, ns::pkg::TOPIC, pref.topic.node());
        let weight = Literal::typed(format_weight(pref.weight), iri(ns::xsd::DECIMAL));
        self.push(&pref.id, ns::pkg::WEIGHT, Term::literal(weight));
        self.node(&pref.id, ns::pav::DERIVED_FROM, &pref.derived_from);
    }
}

/// Emit the reified form of `stmt` into `owner_graph`.
///
/// Quad count: 8 for the statement core, 3 per distinct concept plus one per
/// concept link, one per access entry, one for `pav:derivedFrom` when set and
/// 5 for a preference.
pub fn statement_to_quads(stmt: &PkgStatement, owner_graph: &Iri) -> Result<Vec<Quad>, MappingError> {
    let violations = validate_statement(stmt);
    if !violations.is_empty() {
        return Err(MappingError::Invalid(violations));
    }
    let mut out = Emitter {
        graph: owner_graph,
        quads: Vec::new(),
    };
    let id = &stmt.id;
    out.node(id, ns::rdf::TYPE, &iri(ns::rdf::STATEMENT));
    out.push(id, ns::dcterms::DESCRIPTION, Term::literal(Literal::string(&stmt.annotation)));
    out.node(id, ns::dcterms::IS_PART_OF, owner_graph);
    out.node(id, ns::rdf::SUBJECT, stmt.subject.node());
    out.node(id, ns::rdf::PREDICATE, stmt.predicate.node());
    out.node(id, ns::rdf::OBJECT, stmt.object.node());

    let prov = &stmt.provenance;
    out.node(id, ns::pav::CREATED_BY, &prov.created_by);
    let created = Literal::typed(format_datetime(&prov.created_on), iri(ns::xsd::DATE_TIME));
    out.push(id, ns::pav::CREATED_ON, Term::literal(created));
    if let Some(source) = &prov.derived_from {
        out.node(id, ns::pav::DERIVED_FROM, source);
    }
    for service in &stmt.access.read {
        out.node(id, ns::pkg::READ_ACCESS_RIGHTS, service);
    }
    for service in &stmt.access.write {
        out.node(id, ns::pkg::WRITE_ACCESS_RIGHTS, service);
    }
    for concept in stmt.concepts() {
        out.concept(concept);
    }
    if let Some(pref) = &stmt.preference {
        out.preference(pref);
    }
    Ok(out.quads)
}

/// The preference shape alone, or nothing if the statement carries none.
pub fn preference_quads(stmt: &PkgStatement, owner_graph: &Iri) -> Vec<Quad> {
    let mut out = Emitter {
        graph: owner_graph,
        quads: Vec::new(),
    };
    if let Some(pref) = &stmt.preference {
        out.preference(pref);
    }
    out.quads
}

/// Outgoing edges per subject, as seen from a quad set.
struct QuadIndex<'a> {
    by_subject: BTreeMap<&'a Iri, BTreeMap<&'a str, Vec<&'a Term>>>,
    by_object: BTreeMap<&'a Term, Vec<(&'a Term, &'a str)>>,
}

impl<'a> QuadIndex<'a> {
    fn new(quads: &'a [Quad]) -> Self {
        let mut by_subject: BTreeMap<&Iri, BTreeMap<&str, Vec<&Term>>> = BTreeMap::new();
        let mut by_object: BTreeMap<&Term, Vec<(&Term, &str)>> = BTreeMap::new();
        for q in quads {
            if let Some(s) = q.subject.as_iri() {
                let values = by_subject.entry(s).or_default().entry(q.predicate.as_str()).or_default();
                if !values.contains(&&q.object) {
                    values.push(&q.object);
                }
            }
            by_object.entry(&q.object).or_default().push((&q.subject, q.predicate.as_str()));
        }
        QuadIndex { by_subject, by_object }
    }

    fn values(&self, subject: &Iri, predicate: &str) -> &[&'a Term] {
        self.by_subject
            .get(subject)
            .and_then(|props| props.get(predicate))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    fn has_type(&self, subject: &Iri, class: &str) -> bool {
        self.values(subject, ns::rdf::TYPE)
            .iter()
            .any(|t| t.as_iri().is_some_and(|i| i.as_str() == class))
    }

    fn iri_set(&self, subject: &Iri, predicate: &str) -> Result<BTreeSet<Iri>, String> {
        self.values(subject, predicate)
            .iter()
            .map(|t| t.as_iri().cloned().ok_or_else(|| format!("{predicate} of {subject} is a literal")))
            .collect()
    }
}

struct Reader<'a> {
    id: &'a Iri,
    index: QuadIndex<'a>,
    missing: Vec<String>,
}

impl<'a> Reader<'a> {
    fn malformed(&self, message: impl Into<String>) -> MappingError {
        MappingError::Malformed {
            id: self.id.clone(),
            message: message.into(),
        }
    }

    /// Exactly one value, or record the property as missing.
    fn single(&mut self, subject: &Iri, predicate: &str, label: &str) -> Result<Option<&'a Term>, MappingError> {
        match self.index.values(subject, predicate) {
            [] => {
                self.missing.push(label.to_string());
                Ok(None)
            }
            [one] => Ok(Some(*one)),
            _ => Err(self.malformed(format!("{label} of {subject} has several values"))),
        }
    }

    fn single_iri(&mut self, subject: &Iri, predicate: &str, label: &str) -> Result<Option<Iri>, MappingError> {
        match self.single(subject, predicate, label)? {
            None => Ok(None),
            Some(t) => t
                .as_iri()
                .cloned()
                .map(Some)
                .ok_or_else(|| self.malformed(format!("{label} must be an IRI"))),
        }
    }

    fn single_literal(&mut self, subject: &Iri, predicate: &str, label: &str) -> Result<Option<&'a Literal>, MappingError> {
        match self.single(subject, predicate, label)? {
            None => Ok(None),
            Some(t) => t
                .as_literal()
                .map(Some)
                .ok_or_else(|| self.malformed(format!("{label} must be a literal"))),
        }
    }

    fn element(&mut self, node: Iri, label: &str) -> Result<SpoElement, MappingError> {
        if !self.index.has_type(&node, ns::skos::CONCEPT) {
            return Ok(SpoElement::Resolved(node));
        }
        let text = self
            .single_literal(&node, ns::skos::PREF_LABEL, &format!("{label} skos:prefLabel"))?
            .map(|l| l.lexical().to_string())
            .unwrap_or_default();
        let links = |r: &Self, p| r.index.iri_set(&node, p).map_err(|m| r.malformed(m));
        Ok(SpoElement::Concept(Concept {
            related: links(self, ns::skos::RELATED)?,
            broader: links(self, ns::skos::BROADER)?,
            narrower: links(self, ns::skos::NARROWER)?,
            text,
            id: node,
        }))
    }

    fn preference(&mut self, object: &SpoElement) -> Result<Option<Preference>, MappingError> {
        let stmt_term = Term::iri(self.id.clone());
        let derived: Vec<Iri> = self
            .index
            .by_object
            .get(&stmt_term)
            .into_iter()
            .flatten()
            .filter(|(_, p)| *p == ns::pav::DERIVED_FROM)
            .filter_map(|(s, _)| s.as_iri())
            .filter(|s| self.index.has_type(s, ns::pkg::PREFERENCE_CLASS))
            .cloned()
            .collect();
        let pref_id = match derived.as_slice() {
            [] => return Ok(None),
            [one] => one.clone(),
            _ => return Err(self.malformed("several preferences derive from the statement")),
        };
        let pref_term = Term::iri(pref_id.clone());
        let holders: Vec<Iri> = self
            .index
            .by_object
            .get(&pref_term)
            .into_iter()
            .flatten()
            .filter(|(_, p)| *p == ns::pkg::PREFERENCE)
            .filter_map(|(s, _)| s.as_iri().cloned())
            .collect();
        let holder = match holders.as_slice() {
            [one] => Some(one.clone()),
            [] => {
                self.missing.push("pkg:preference".into());
                None
            }
            _ => return Err(self.malformed("preference has several holders")),
        };
        let topic = self.single_iri(&pref_id, ns::pkg::TOPIC, "pkg:topic")?;
        let weight = match self.single_literal(&pref_id, ns::pkg::WEIGHT, "pkg:weight")? {
            None => None,
            Some(lit) => Some(parse_weight(lit.lexical()).ok_or_else(|| self.malformed("pkg:weight is not a decimal"))?),
        };
        let (Some(holder), Some(topic), Some(weight)) = (holder, topic, weight) else {
            return Ok(None);
        };
        let topic = if &topic == object.node() {
            object.clone()
        } else {
            self.element(topic, "pkg:topic")?
        };
        Ok(Some(Preference {
            id: pref_id,
            holder,
            topic,
            weight,
            derived_from: self.id.clone(),
        }))
    }
}

/// Rebuild the statement rooted at `statement_id` from a quad set.
pub fn quads_to_statement(quads: &[Quad], statement_id: &Iri) -> Result<PkgStatement, MappingError> {
    let mut r = Reader {
        id: statement_id,
        index: QuadIndex::new(quads),
        missing: Vec::new(),
    };
    let id = statement_id;
    if !r.index.has_type(id, ns::rdf::STATEMENT) {
        r.missing.push("rdf:type rdf:Statement".into());
    }
    let annotation = r
        .single_literal(id, ns::dcterms::DESCRIPTION, "dcterms:description")?
        .map(|l| l.lexical().to_string());
    let subject = r.single_iri(id, ns::rdf::SUBJECT, "rdf:subject")?;
    let predicate = r.single_iri(id, ns::rdf::PREDICATE, "rdf:predicate")?;
    let object = r.single_iri(id, ns::rdf::OBJECT, "rdf:object")?;
    let created_by = r.single_iri(id, ns::pav::CREATED_BY, "pav:createdBy")?;
    let created_on = match r.single_literal(id, ns::pav::CREATED_ON, "pav:createdOn")? {
        None => None,
        Some(lit) => Some(
            DateTime::parse_from_rfc3339(lit.lexical())
                .map_err(|e| r.malformed(format!("pav:createdOn: {e}")))?
                .with_timezone(&Utc),
        ),
    };
    let derived_from = match r.index.values(id, ns::pav::DERIVED_FROM) {
        [] => None,
        [one] => Some(one.as_iri().cloned().ok_or_else(|| r.malformed("pav:derivedFrom must be an IRI"))?),
        _ => return Err(r.malformed("pav:derivedFrom has several values")),
    };

    let (Some(annotation), Some(s), Some(p), Some(o), Some(created_by), Some(created_on)) =
        (annotation, subject, predicate, object, created_by, created_on)
    else {
        return Err(MappingError::Missing {
            id: id.clone(),
            missing: r.missing,
        });
    };
    let subject = r.element(s, "rdf:subject")?;
    let predicate = r.element(p, "rdf:predicate")?;
    let object = r.element(o, "rdf:object")?;
    let access = AccessPolicy {
        read: r.index.iri_set(id, ns::pkg::READ_ACCESS_RIGHTS).map_err(|m| r.malformed(m))?,
        write: r.index.iri_set(id, ns::pkg::WRITE_ACCESS_RIGHTS).map_err(|m| r.malformed(m))?,
    };
    let preference = r.preference(&object)?;
    if !r.missing.is_empty() {
        return Err(MappingError::Missing {
            id: id.clone(),
            missing: r.missing,
        });
    }
    Ok(PkgStatement {
        id: id.clone(),
        annotation,
        subject,
        predicate,
        object,
        preference,
        provenance: Provenance {
            created_by,
            created_on,
            derived_from,
        },
        access,
    })
}
