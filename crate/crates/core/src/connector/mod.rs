//! The PKG connector: turns actions into SPARQL-subset queries and runs them
//! against the store.

mod exec;
mod view;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::store::{sparql, PatternTerm, SelectQuery, StoreError, TriplePattern, UpdateQuery, Variable};
use crate::vocab::{ns, preference_quads, statement_to_quads, Iri, MappingError, PkgStatement, Quad, Violation};
use crate::Intent;

pub use exec::{ActionResult, Caller, Connector, Outcome};
pub use view::{GraphEdge, GraphNode, GraphView, NodeKind};

#[derive(Debug, Error)]
pub enum ConnectorError {
    #[error("{0} actions cannot be executed")]
    Unsupported(Intent),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Mapping(#[from] MappingError),
    #[error("statement {0} not found")]
    NotFound(Iri),
    #[error("forbidden: {0}")]
    Forbidden(String),
    #[error("invalid: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
}

/// How one statement position is matched. `Text` matches a node whose IRI
/// is exactly the text or a concept whose label equals it, ignoring case.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementMatch {
    #[default]
    Any,
    Iri(Iri),
    Text(String),
}

impl ElementMatch {
    /// From an optional request parameter: absent or blank is a wildcard.
    pub fn from_param(value: Option<&str>) -> Self {
        match value.map(str::trim) {
            None | Some("") | Some("*") => ElementMatch::Any,
            Some(text) => ElementMatch::Text(text.to_string()),
        }
    }

    pub fn is_any(&self) -> bool {
        matches!(self, ElementMatch::Any)
    }
}

impl fmt::Display for ElementMatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ElementMatch::Any => f.write_str("*"),
            ElementMatch::Iri(iri) => write!(f, "<{iri}>"),
            ElementMatch::Text(text) => write!(f, "{text:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StatementPattern {
    #[serde(default)]
    pub subject: ElementMatch,
    #[serde(default)]
    pub predicate: ElementMatch,
    #[serde(default)]
    pub object: ElementMatch,
}

impl StatementPattern {
    pub fn any() -> Self {
        StatementPattern::default()
    }

    pub fn elements(&self) -> [&ElementMatch; 3] {
        [&self.subject, &self.predicate, &self.object]
    }
}

#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum PkgAction {
    Add(PkgStatement),
    Get(StatementPattern),
    Delete(StatementPattern),
    Unknown,
}

impl PkgAction {
    pub fn intent(&self) -> Intent {
        match self {
            PkgAction::Add(_) => Intent::Add,
            PkgAction::Get(_) => Intent::Get,
            PkgAction::Delete(_) => Intent::Delete,
            PkgAction::Unknown => Intent::Unknown,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PkgQuery {
    Select(SelectQuery),
    Update(UpdateQuery),
}

impl PkgQuery {
    pub fn to_text(&self) -> String {
        match self {
            PkgQuery::Select(q) => sparql::select_to_string(q),
            PkgQuery::Update(u) => sparql::update_to_string(u),
        }
    }
}

pub(crate) const STATEMENT_VAR: &str = "st";
pub(crate) const ELEMENT_VARS: [&str; 3] = ["s", "p", "o"];

fn iri(value: &'static str) -> Iri {
    Iri::new(value).expect("vocabulary IRI")
}

/// SELECT locating the reified statements whose elements fit `pattern`.
/// IRI elements are bound in the query; text elements come back as
/// variables for the caller to filter by label.
pub fn select_statements(pattern: &StatementPattern, graph: &Iri) -> SelectQuery {
    let st = PatternTerm::var(STATEMENT_VAR);
    let mut projection = vec![Variable::new(STATEMENT_VAR).expect("valid")];
    let mut patterns = vec![TriplePattern::new(st.clone(), iri(ns::rdf::TYPE), iri(ns::rdf::STATEMENT))];
    let props = [ns::rdf::SUBJECT, ns::rdf::PREDICATE, ns::rdf::OBJECT];
    for ((element, prop), var) in pattern.elements().into_iter().zip(props).zip(ELEMENT_VARS) {
        let target = match element {
            ElementMatch::Iri(node) => PatternTerm::from(node.clone()),
            ElementMatch::Any | ElementMatch::Text(_) => {
                let v = Variable::new(var).expect("valid");
                if matches!(element, ElementMatch::Text(_)) {
                    projection.push(v.clone());
                }
                PatternTerm::Var(v)
            }
        };
        patterns.push(TriplePattern::new(st.clone(), iri(prop), target));
    }
    SelectQuery { projection, graph: graph.clone(), patterns, filters: Vec::new() }
}

/// Patterns removing one statement: its own quads, and its preference with
/// the holder's link to it.
pub fn delete_statement_patterns(statement: &Iri, preference: Option<&Iri>) -> Vec<Vec<TriplePattern>> {
    let mut out = vec![vec![TriplePattern::new(statement.clone(), PatternTerm::var("p"), PatternTerm::var("o"))]];
    if let Some(pref) = preference {
        out.push(vec![TriplePattern::new(pref.clone(), PatternTerm::var("p"), PatternTerm::var("o"))]);
        out.push(vec![TriplePattern::new(PatternTerm::var("h"), iri(ns::pkg::PREFERENCE), pref.clone())]);
    }
    out
}

/// The query an action compiles to. DELETE compiles to its locating SELECT;
/// the per-statement deletions depend on what it finds.
pub fn build_query(action: &PkgAction, graph: &Iri) -> Result<PkgQuery, ConnectorError> {
    match action {
        PkgAction::Add(stmt) => Ok(PkgQuery::Update(UpdateQuery::InsertData(statement_to_quads(stmt, graph)?))),
        PkgAction::Get(pattern) | PkgAction::Delete(pattern) => Ok(PkgQuery::Select(select_statements(pattern, graph))),
        PkgAction::Unknown => Err(ConnectorError::Unsupported(Intent::Unknown)),
    }
}

/// The preference shape of `stmt`, empty when it carries none.
pub fn derive_preference_quads(stmt: &PkgStatement, graph: &Iri) -> Vec<Quad> {
    preference_quads(stmt, graph)
}
