use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::ids::{Clock, SystemClock};
use crate::linking::PersonalAliasTable;
use crate::store::{sparql, ExecMode, Graph, GraphTxn, PatternTerm, QuadStore, TriplePattern, UpdateQuery, Variable};
use crate::vocab::{
    ns, quads_to_statement, validate_in_context, AccessPolicy, Iri, Owner, PkgStatement, Preference, Quad,
    SpoElement, Term, Violation,
};
use crate::Intent;

use super::{
    build_query, delete_statement_patterns, select_statements, ConnectorError, ElementMatch, PkgAction, PkgQuery,
    StatementPattern, ELEMENT_VARS, STATEMENT_VAR,
};

/// Who is asking. The owner sees and may change everything in their graph;
/// a service only statements whose access sets name it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Caller {
    Owner,
    Service(Iri),
}

impl Caller {
    pub fn can_read(&self, stmt: &PkgStatement) -> bool {
        match self {
            Caller::Owner => true,
            Caller::Service(s) => stmt.access.can_read(s),
        }
    }

    pub fn can_write(&self, stmt: &PkgStatement) -> bool {
        match self {
            Caller::Owner => true,
            Caller::Service(s) => stmt.access.can_write(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Outcome {
    Added { id: Iri, statement: Box<PkgStatement> },
    Found { statements: Vec<PkgStatement> },
    Deleted { deleted: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionResult {
    pub intent: Intent,
    pub query: String,
    pub result: Outcome,
}

fn iri(value: &'static str) -> Iri {
    Iri::new(value).expect("vocabulary IRI")
}

fn var(name: &str) -> Variable {
    Variable::new(name).expect("valid variable name")
}

/// Quads with subject `node`.
fn outgoing(g: &Graph, graph: &Iri, node: &Iri) -> Vec<Quad> {
    let pattern = TriplePattern::new(node.clone(), PatternTerm::var("p"), PatternTerm::var("o"));
    g.match_pattern(&pattern).iter().filter_map(|b| pattern.instantiate(graph, b)).collect()
}

fn objects(g: &Graph, subject: &Iri, predicate: &'static str) -> Vec<Term> {
    let pattern = TriplePattern::new(subject.clone(), iri(predicate), PatternTerm::var("o"));
    g.match_pattern(&pattern).into_iter().filter_map(|mut b| b.remove(&var("o"))).collect()
}

fn subjects(g: &Graph, predicate: &'static str, object: &Iri) -> Vec<Iri> {
    let pattern = TriplePattern::new(PatternTerm::var("s"), iri(predicate), object.clone());
    g.match_pattern(&pattern)
        .into_iter()
        .filter_map(|mut b| b.remove(&var("s")).and_then(|t| t.as_iri().cloned()))
        .collect()
}

fn has_type(g: &Graph, node: &Iri, class: &'static str) -> bool {
    let pattern = TriplePattern::new(node.clone(), iri(ns::rdf::TYPE), iri(class));
    !g.match_pattern(&pattern).is_empty()
}

fn is_referenced(g: &Graph, node: &Iri) -> bool {
    let pattern = TriplePattern::new(PatternTerm::var("s"), PatternTerm::var("p"), node.clone());
    !g.match_pattern(&pattern).is_empty()
}

/// Preference nodes derived from `statement`.
fn preferences_of(g: &Graph, statement: &Iri) -> Vec<Iri> {
    subjects(g, ns::pav::DERIVED_FROM, statement)
        .into_iter()
        .filter(|p| has_type(g, p, ns::pkg::PREFERENCE_CLASS))
        .collect()
}

/// The quads describing one statement: its own, its concept elements', and
/// its preference.
pub(super) fn statement_quads(g: &Graph, graph: &Iri, statement: &Iri) -> Vec<Quad> {
    let mut out = outgoing(g, graph, statement);
    let mut nodes: BTreeSet<Iri> = BTreeSet::new();
    for prop in [ns::rdf::SUBJECT, ns::rdf::PREDICATE, ns::rdf::OBJECT] {
        nodes.extend(objects(g, statement, prop).into_iter().filter_map(|t| t.as_iri().cloned()));
    }
    for pref in preferences_of(g, statement) {
        out.extend(outgoing(g, graph, &pref));
        for holder in subjects(g, ns::pkg::PREFERENCE, &pref) {
            out.push(Quad {
                graph: graph.clone(),
                subject: Term::iri(holder),
                predicate: iri(ns::pkg::PREFERENCE),
                object: Term::iri(pref.clone()),
            });
        }
        nodes.extend(objects(g, &pref, ns::pkg::TOPIC).into_iter().filter_map(|t| t.as_iri().cloned()));
    }
    for node in nodes.iter().filter(|n| has_type(g, n, ns::skos::CONCEPT)) {
        out.extend(outgoing(g, graph, node));
    }
    out.sort();
    out.dedup();
    out
}

pub(super) fn load_statement(g: &Graph, graph: &Iri, statement: &Iri) -> Result<Option<PkgStatement>, ConnectorError> {
    if !has_type(g, statement, ns::rdf::STATEMENT) {
        return Ok(None);
    }
    Ok(Some(quads_to_statement(&statement_quads(g, graph, statement), statement)?))
}

/// Case-insensitive label equality for concepts, exact IRI equality otherwise.
fn text_matches(g: &Graph, node: &Term, text: &str) -> bool {
    let text = text.trim();
    let bare = text.strip_prefix('<').and_then(|t| t.strip_suffix('>')).unwrap_or(text);
    let Some(node) = node.as_iri() else { return false };
    if node.as_str() == bare {
        return true;
    }
    let wanted = text.to_lowercase();
    objects(g, node, ns::skos::PREF_LABEL)
        .iter()
        .filter_map(Term::as_literal)
        .any(|l| l.lexical().to_lowercase() == wanted)
}

fn text_match(element: &ElementMatch) -> Option<&str> {
    match element {
        ElementMatch::Text(t) => Some(t),
        _ => None,
    }
}

/// Statements of `graph` fitting `pattern` and readable by `caller`.
fn find(
    g: &Graph,
    graph: &Iri,
    pattern: &StatementPattern,
    caller: &Caller,
    mode: ExecMode,
) -> Result<Vec<PkgStatement>, ConnectorError> {
    let query = select_statements(pattern, graph);
    let results = g.select(&query, mode);
    let mut out = Vec::new();
    for row in &results.rows {
        let ok = results.variables.iter().zip(row).all(|(v, term)| {
            let Some(k) = ELEMENT_VARS.iter().position(|e| *e == v.name()) else { return true };
            text_match(pattern.elements()[k]).is_none_or(|t| text_matches(g, term, t))
        });
        if !ok {
            continue;
        }
        let Some(id) = row[0].as_iri() else { continue };
        debug_assert_eq!(results.variables[0].name(), STATEMENT_VAR);
        if let Some(stmt) = load_statement(g, graph, id)? {
            if caller.can_read(&stmt) {
                out.push(stmt);
            }
        }
    }
    Ok(out)
}

/// Existing concepts by lower-cased label.
fn concept_by_label(g: &Graph, label: &str) -> Option<(Iri, String)> {
    let wanted = label.to_lowercase();
    let pattern = TriplePattern::new(PatternTerm::var("c"), iri(ns::skos::PREF_LABEL), PatternTerm::var("l"));
    g.match_pattern(&pattern)
        .into_iter()
        .filter_map(|b| {
            let c = b.get(&var("c"))?.as_iri()?.clone();
            let l = b.get(&var("l"))?.as_literal()?.lexical().to_string();
            (l.to_lowercase() == wanted && has_type(g, &c, ns::skos::CONCEPT)).then_some((c, l))
        })
        .min()
}

/// Reuse existing concepts with the same label so statements share them.
fn canonicalize(g: &Graph, stmt: &mut PkgStatement) {
    for element in [&mut stmt.subject, &mut stmt.predicate, &mut stmt.object] {
        if let SpoElement::Concept(c) = element {
            if let Some((id, label)) = concept_by_label(g, &c.text) {
                c.id = id;
                c.text = label;
            }
        }
    }
    let (holder, topic) = (stmt.subject.node().clone(), stmt.object.clone());
    if let Some(pref) = &mut stmt.preference {
        pref.holder = holder;
        pref.topic = topic;
    }
}

fn rows_of(g: &Graph, graph: &Iri, ids: impl IntoIterator<Item = Iri>) -> Result<Vec<PkgStatement>, ConnectorError> {
    let mut out = Vec::new();
    for id in ids {
        if let Some(stmt) = load_statement(g, graph, &id)? {
            out.push(stmt);
        }
    }
    Ok(out)
}

/// Remove one statement, its preference and any concept left unreferenced.
/// Returns the DELETE WHERE texts that ran.
fn cascade(txn: &mut GraphTxn<'_>, stmt: &PkgStatement) -> Result<Vec<String>, ConnectorError> {
    let graph = txn.graph_iri().clone();
    let prefs = preferences_of(txn.graph(), &stmt.id);
    let mut texts = Vec::new();
    let mut groups = delete_statement_patterns(&stmt.id, None);
    for pref in &prefs {
        groups.extend(delete_statement_patterns(&stmt.id, Some(pref)).into_iter().skip(1));
    }
    for patterns in groups {
        txn.delete_where(&patterns)?;
        texts.push(sparql::update_to_string(&UpdateQuery::DeleteWhere { graph: graph.clone(), patterns }));
    }
    let mut concepts: BTreeSet<&Iri> = stmt.concepts().into_iter().map(|c| &c.id).collect();
    if let Some(c) = stmt.preference.as_ref().and_then(|p| p.topic.as_concept()) {
        concepts.insert(&c.id);
    }
    for concept in concepts {
        if !is_referenced(txn.graph(), concept) {
            let patterns = vec![TriplePattern::new(concept.clone(), PatternTerm::var("p"), PatternTerm::var("o"))];
            txn.delete_where(&patterns)?;
            texts.push(sparql::update_to_string(&UpdateQuery::DeleteWhere { graph: graph.clone(), patterns }));
        }
    }
    Ok(texts)
}

/// Runs actions for owners against a shared store.
pub struct Connector<'s> {
    store: &'s QuadStore,
    mode: ExecMode,
    clock: Arc<dyn Clock>,
}

impl<'s> Connector<'s> {
    pub fn new(store: &'s QuadStore) -> Self {
        Connector { store, mode: ExecMode::default(), clock: Arc::new(SystemClock) }
    }

    pub fn with_clock(mut self, clock: Arc<dyn Clock>) -> Self {
        self.clock = clock;
        self
    }

    pub fn with_mode(mut self, mode: ExecMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn store(&self) -> &QuadStore {
        self.store
    }

    pub fn execute_action(&self, action: PkgAction, owner: &Owner, caller: &Caller) -> Result<ActionResult, ConnectorError> {
        let graph = &owner.graph;
        match action {
            PkgAction::Unknown => Err(ConnectorError::Unsupported(Intent::Unknown)),
            PkgAction::Add(mut stmt) => {
                if let Caller::Service(service) = caller {
                    stmt.access.read.insert(service.clone());
                    stmt.access.write.insert(service.clone());
                }
                let violations = validate_in_context(&stmt, &owner.agent, self.clock.now());
                if !violations.is_empty() {
                    return Err(ConnectorError::Invalid(violations));
                }
                self.store.transaction(graph, |txn| {
                    canonicalize(txn.graph(), &mut stmt);
                    let query = build_query(&PkgAction::Add(stmt.clone()), graph)?;
                    if let PkgQuery::Update(UpdateQuery::InsertData(quads)) = &query {
                        txn.insert(quads)?;
                    }
                    Ok(ActionResult {
                        intent: Intent::Add,
                        query: query.to_text(),
                        result: Outcome::Added { id: stmt.id.clone(), statement: Box::new(stmt) },
                    })
                })
            }
            PkgAction::Get(pattern) => {
                let query = build_query(&PkgAction::Get(pattern.clone()), graph)?;
                let statements = self.store.read(graph, |g| find(g, graph, &pattern, caller, self.mode))??;
                Ok(ActionResult { intent: Intent::Get, query: query.to_text(), result: Outcome::Found { statements } })
            }
            PkgAction::Delete(pattern) => {
                let query = build_query(&PkgAction::Delete(pattern.clone()), graph)?;
                self.store.transaction(graph, |txn| {
                    let located = find(txn.graph(), graph, &pattern, caller, self.mode)?;
                    if let Some(denied) = located.iter().find(|s| !caller.can_write(s)) {
                        return Err(ConnectorError::Forbidden(format!("no write access to statement {}", denied.id)));
                    }
                    let mut texts = vec![query.to_text()];
                    for stmt in &located {
                        texts.extend(cascade(txn, stmt)?);
                    }
                    Ok(ActionResult {
                        intent: Intent::Delete,
                        query: texts.join(" ;\n"),
                        result: Outcome::Deleted { deleted: located.len() },
                    })
                })
            }
        }
    }

    pub fn get_statement(&self, owner: &Owner, id: &Iri, caller: &Caller) -> Result<PkgStatement, ConnectorError> {
        let graph = &owner.graph;
        let stmt = self
            .store
            .read(graph, |g| load_statement(g, graph, id))??
            .ok_or_else(|| ConnectorError::NotFound(id.clone()))?;
        if !caller.can_read(&stmt) {
            return Err(ConnectorError::Forbidden(format!("no read access to statement {id}")));
        }
        Ok(stmt)
    }

    /// Delete one statement by id, with the same cascade as a DELETE action.
    pub fn delete_statement(&self, owner: &Owner, id: &Iri, caller: &Caller) -> Result<ActionResult, ConnectorError> {
        let graph = &owner.graph;
        self.store.transaction(graph, |txn| {
            let stmt = load_statement(txn.graph(), graph, id)?.ok_or_else(|| ConnectorError::NotFound(id.clone()))?;
            if !caller.can_write(&stmt) {
                return Err(ConnectorError::Forbidden(format!("no write access to statement {id}")));
            }
            let texts = cascade(txn, &stmt)?;
            Ok(ActionResult { intent: Intent::Delete, query: texts.join(" ;\n"), result: Outcome::Deleted { deleted: 1 } })
        })
    }

    /// Replace a statement's access policy. Owner only.
    pub fn set_access(&self, owner: &Owner, id: &Iri, access: AccessPolicy, caller: &Caller) -> Result<PkgStatement, ConnectorError> {
        if let Caller::Service(s) = caller {
            return Err(ConnectorError::Forbidden(format!("service {s} cannot change access rights")));
        }
        let graph = &owner.graph;
        self.store.transaction(graph, |txn| {
            let mut stmt =
                load_statement(txn.graph(), graph, id)?.ok_or_else(|| ConnectorError::NotFound(id.clone()))?;
            stmt.access = access;
            let violations = validate_in_context(&stmt, &owner.agent, self.clock.now());
            if !violations.is_empty() {
                return Err(ConnectorError::Invalid(violations));
            }
            for prop in [ns::pkg::READ_ACCESS_RIGHTS, ns::pkg::WRITE_ACCESS_RIGHTS] {
                txn.delete_where(&[TriplePattern::new(id.clone(), iri(prop), PatternTerm::var("a"))])?;
            }
            let mut quads = Vec::new();
            for (prop, set) in [(ns::pkg::READ_ACCESS_RIGHTS, &stmt.access.read), (ns::pkg::WRITE_ACCESS_RIGHTS, &stmt.access.write)] {
                quads.extend(set.iter().map(|s| Quad {
                    graph: graph.clone(),
                    subject: Term::iri(id.clone()),
                    predicate: iri(prop),
                    object: Term::iri(s.clone()),
                }));
            }
            txn.insert(&quads)?;
            Ok(stmt)
        })
    }

    /// Preferences visible to `caller`, optionally restricted to a topic
    /// (IRI, or concept label ignoring case).
    pub fn preferences(&self, owner: &Owner, topic: Option<&str>, caller: &Caller) -> Result<Vec<Preference>, ConnectorError> {
        let graph = &owner.graph;
        self.store.read(graph, |g| {
            let statements = find(g, graph, &StatementPattern::any(), caller, self.mode)?;
            Ok(statements
                .into_iter()
                .filter_map(|s| s.preference)
                .filter(|p| match topic.map(str::trim).filter(|t| !t.is_empty()) {
                    None => true,
                    Some(t) => text_matches(g, &Term::iri(p.topic.node().clone()), t),
                })
                .collect())
        })?
    }

    /// Every statement readable by `caller`, in id order.
    pub fn statements(&self, owner: &Owner, caller: &Caller) -> Result<Vec<PkgStatement>, ConnectorError> {
        let graph = &owner.graph;
        let ids = self.store.instances_of(graph, ns::rdf::STATEMENT);
        let all = self.store.read(graph, |g| rows_of(g, graph, ids))??;
        Ok(all.into_iter().filter(|s| caller.can_read(s)).collect())
    }

    /// Quads of the statements readable by `caller`.
    pub fn visible_quads(&self, owner: &Owner, caller: &Caller) -> Result<Vec<Quad>, ConnectorError> {
        let graph = &owner.graph;
        let ids = self.store.instances_of(graph, ns::rdf::STATEMENT);
        self.store.read(graph, |g| {
            let mut out = BTreeSet::new();
            for id in ids {
                if let Some(stmt) = load_statement(g, graph, &id)? {
                    if caller.can_read(&stmt) {
                        out.extend(statement_quads(g, graph, &id));
                    }
                }
            }
            Ok(out.into_iter().collect())
        })?
    }

    /// Record an alias of the owner's personal circle. Returns whether it
    /// was new.
    pub fn add_alias(&self, owner: &Owner, alias: &str, target: &Iri) -> Result<bool, ConnectorError> {
        let mut probe = PersonalAliasTable::new(owner.agent.clone());
        if !probe.insert(alias, target.clone()) {
            return Err(ConnectorError::Invalid(vec![Violation {
                path: "alias".into(),
                message: format!("{alias:?} is empty or a first-person alias"),
            }]));
        }
        let quad = PersonalAliasTable::alias_quad(&owner.graph, alias, target);
        self.store.transaction(&owner.graph, |txn| Ok(txn.insert(&[quad])? > 0))
    }

    pub fn alias_table(&self, owner: &Owner) -> Result<PersonalAliasTable, ConnectorError> {
        let pattern = TriplePattern::new(PatternTerm::var("s"), iri(ns::pkg::ALIAS), PatternTerm::var("o"));
        let graph = &owner.graph;
        let quads: Vec<Quad> = self
            .store
            .read(graph, |g| g.match_pattern(&pattern).iter().filter_map(|b| pattern.instantiate(graph, b)).collect())?;
        Ok(PersonalAliasTable::from_quads(owner.agent.clone(), &quads))
    }
}
