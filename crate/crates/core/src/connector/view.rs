//! Node-link view of an owner's graph for the client.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::vocab::{ns, Iri, Owner, Quad, Term};

use super::exec::{Caller, Connector};
use super::ConnectorError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Statement,
    Concept,
    Preference,
    Owner,
    Graph,
    Agent,
    Entity,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphNode {
    pub id: Iri,
    pub kind: NodeKind,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub source: Iri,
    pub target: Iri,
    pub property: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GraphView {
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<GraphEdge>,
}

fn compact(iri: &Iri) -> String {
    match ns::compact(iri.as_str()) {
        Some((prefix, local)) => format!("{prefix}:{local}"),
        None => iri.to_string(),
    }
}

impl GraphView {
    /// Every IRI used as subject or object (classes excepted) becomes a
    /// node; IRI-valued properties become edges, literals become labels.
    pub fn from_quads(quads: &[Quad], owner: &Owner) -> Self {
        let mut kinds: BTreeMap<Iri, NodeKind> = BTreeMap::new();
        let mut labels: BTreeMap<Iri, String> = BTreeMap::new();
        let mut edges = Vec::new();
        for q in quads {
            let Some(s) = q.subject.as_iri() else { continue };
            kinds.entry(s.clone()).or_insert(NodeKind::Entity);
            let p = q.predicate.as_str();
            if p == ns::rdf::TYPE {
                let kind = match q.object.as_iri().map(Iri::as_str) {
                    Some(ns::rdf::STATEMENT) => NodeKind::Statement,
                    Some(ns::skos::CONCEPT) => NodeKind::Concept,
                    Some(ns::pkg::PREFERENCE_CLASS) => NodeKind::Preference,
                    _ => continue,
                };
                kinds.insert(s.clone(), kind);
                continue;
            }
            match &q.object {
                Term::Literal(lit) => {
                    if matches!(p, ns::dcterms::DESCRIPTION | ns::skos::PREF_LABEL | ns::pkg::WEIGHT) {
                        labels.insert(s.clone(), lit.lexical().to_string());
                    }
                }
                Term::Iri(o) | Term::Skolem(o) => {
                    let kind = if matches!(p, ns::pav::CREATED_BY | ns::pkg::READ_ACCESS_RIGHTS | ns::pkg::WRITE_ACCESS_RIGHTS) {
                        NodeKind::Agent
                    } else {
                        NodeKind::Entity
                    };
                    kinds.entry(o.clone()).or_insert(kind);
                    edges.push(GraphEdge { source: s.clone(), target: o.clone(), property: compact(&q.predicate) });
                }
            }
        }
        let nodes = kinds
            .into_iter()
            .map(|(id, kind)| {
                let kind = if id == owner.agent {
                    NodeKind::Owner
                } else if id == owner.graph {
                    NodeKind::Graph
                } else {
                    kind
                };
                let label = labels.remove(&id).unwrap_or_else(|| compact(&id));
                GraphNode { id, kind, label }
            })
            .collect();
        edges.sort_by(|a, b| (&a.source, &a.property, &a.target).cmp(&(&b.source, &b.property, &b.target)));
        edges.dedup();
        GraphView { nodes, edges }
    }
}

impl Connector<'_> {
    pub fn graph_view(&self, owner: &Owner, caller: &Caller) -> Result<GraphView, ConnectorError> {
        Ok(GraphView::from_quads(&self.visible_quads(owner, caller)?, owner))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vocab::{fixtures, statement_to_quads};

    #[test]
    fn tom_cruise_view() {
        let owner = fixtures::owner();
        let quads = statement_to_quads(&fixtures::tom_cruise(), &owner.graph).unwrap();
        let view = GraphView::from_quads(&quads, &owner);
        let mut kinds: Vec<NodeKind> = view.nodes.iter().map(|n| n.kind).collect();
        kinds.sort();
        assert_eq!(
            kinds,
            [NodeKind::Statement, NodeKind::Concept, NodeKind::Concept, NodeKind::Preference, NodeKind::Owner, NodeKind::Graph]
        );
        let pref = view.nodes.iter().find(|n| n.kind == NodeKind::Preference).unwrap();
        assert_eq!(pref.label, "-1.0");
        assert!(view.edges.iter().any(|e| e.property == "pkg:topic"));
    }
}
