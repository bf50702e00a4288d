//! In-process quad store: one named graph per registered owner.
//!
//! Each graph sits behind its own reader-writer lock. A SELECT holds the read
//! lock for its whole evaluation and so observes a single revision; mutations
//! go through [`GraphTxn`], which rolls back if the closure fails.

mod graph;
mod lexer;
pub mod nquads;
mod pattern;
pub mod sparql;
pub mod turtle;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use parking_lot::RwLock;
use thiserror::Error;

use crate::vocab::{Iri, Quad};

pub use graph::{ExecMode, Graph};
pub use lexer::SyntaxError;
pub use pattern::{Binding, Filter, PatternTerm, QueryResults, SelectQuery, TriplePattern, UpdateQuery, Variable};

use graph::Triple;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("graph {0} is not registered")]
    UnknownGraph(Iri),
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Default)]
pub struct QuadStore {
    graphs: RwLock<BTreeMap<Iri, Arc<RwLock<Graph>>>>,
    revision: AtomicU64,
}

#[derive(Debug, Clone, Copy)]
enum Change {
    Inserted(Triple),
    Removed(Triple),
}

/// Write access to one graph inside [`QuadStore::transaction`].
pub struct GraphTxn<'a> {
    graph_iri: &'a Iri,
    graph: &'a mut Graph,
    log: Vec<Change>,
}

impl GraphTxn<'_> {
    pub fn graph(&self) -> &Graph {
        self.graph
    }

    pub fn graph_iri(&self) -> &Iri {
        self.graph_iri
    }

    pub fn changed(&self) -> bool {
        !self.log.is_empty()
    }

    /// Insert quads of this graph; returns how many were new.
    pub fn insert(&mut self, quads: &[Quad]) -> Result<usize, StoreError> {
        if let Some(q) = quads.iter().find(|q| &q.graph != self.graph_iri) {
            return Err(StoreError::InvalidQuery(format!("quad targets graph {} inside a transaction on {}", q.graph, self.graph_iri)));
        }
        let mut added = 0;
        for q in quads {
            let t = self.graph.encode(q);
            if self.graph.insert_ids(t) {
                self.log.push(Change::Inserted(t));
                added += 1;
            }
        }
        Ok(added)
    }

    /// Remove specific quads; returns how many were present.
    pub fn remove(&mut self, quads: &[Quad]) -> usize {
        let mut removed = 0;
        for q in quads.iter().filter(|q| &q.graph == self.graph_iri) {
            if let Some(t) = self.graph.encode_existing(q) {
                if self.graph.remove_ids(t) {
                    self.log.push(Change::Removed(t));
                    removed += 1;
                }
            }
        }
        removed
    }

    /// Remove every instantiation of the patterns; returns how many quads went.
    pub fn delete_where(&mut self, patterns: &[TriplePattern]) -> Result<usize, StoreError> {
        patterns.iter().try_for_each(TriplePattern::check)?;
        let targets = self.graph.delete_targets(patterns);
        for &t in &targets {
            if self.graph.remove_ids(t) {
                self.log.push(Change::Removed(t));
            }
        }
        Ok(targets.len())
    }

    fn rollback(&mut self) {
        for change in self.log.drain(..).rev() {
            match change {
                Change::Inserted(t) => {
                    self.graph.remove_ids(t);
                }
                Change::Removed(t) => {
                    self.graph.insert_ids(t);
                }
            }
        }
    }
}

impl QuadStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Register an owner graph. Returns false if it already existed.
    pub fn register_graph(&self, graph: Iri) -> bool {
        let mut graphs = self.graphs.write();
        if graphs.contains_key(&graph) {
            return false;
        }
        graphs.insert(graph, Arc::default());
        true
    }

    pub fn contains_graph(&self, graph: &Iri) -> bool {
        self.graphs.read().contains_key(graph)
    }

    pub fn graph_names(&self) -> Vec<Iri> {
        self.graphs.read().keys().cloned().collect()
    }

    /// Current store revision; bumped once per content-changing call.
    pub fn revision(&self) -> u64 {
        self.revision.load(Ordering::SeqCst)
    }

    fn handle(&self, graph: &Iri) -> Result<Arc<RwLock<Graph>>, StoreError> {
        self.graphs
            .read()
            .get(graph)
            .cloned()
            .ok_or_else(|| StoreError::UnknownGraph(graph.clone()))
    }

    /// Run `f` under the graph's read lock.
    pub fn read<R>(&self, graph: &Iri, f: impl FnOnce(&Graph) -> R) -> Result<R, StoreError> {
        let handle = self.handle(graph)?;
        let guard = handle.read();
        Ok(f(&guard))
    }

    /// Run `f` under the graph's write lock. If `f` fails, every change it
    /// made is undone and the revision is left alone.
    pub fn transaction<R, E>(&self, graph: &Iri, f: impl FnOnce(&mut GraphTxn<'_>) -> Result<R, E>) -> Result<R, E>
    where
        E: From<StoreError>,
    {
        let handle = self.handle(graph)?;
        let mut guard = handle.write();
        let mut txn = GraphTxn {
            graph_iri: graph,
            graph: &mut guard,
            log: Vec::new(),
        };
        match f(&mut txn) {
            Ok(value) => {
                if txn.changed() {
                    let rev = self.revision.fetch_add(1, Ordering::SeqCst) + 1;
                    txn.graph.revision = rev;
                }
                Ok(value)
            }
            Err(err) => {
                txn.rollback();
                Err(err)
            }
        }
    }

    fn by_graph<'q>(&self, quads: &'q [Quad]) -> Result<BTreeMap<&'q Iri, Vec<Quad>>, StoreError> {
        let mut grouped: BTreeMap<&Iri, Vec<Quad>> = BTreeMap::new();
        for q in quads {
            grouped.entry(&q.graph).or_default().push(q.clone());
        }
        let graphs = self.graphs.read();
        if let Some(missing) = grouped.keys().find(|g| !graphs.contains_key(**g)) {
            return Err(StoreError::UnknownGraph((*missing).clone()));
        }
        Ok(grouped)
    }

    /// Insert quads (set semantics). Returns the store revision afterwards.
    pub fn insert(&self, quads: &[Quad]) -> Result<u64, StoreError> {
        for (graph, batch) in self.by_graph(quads)? {
            self.transaction::<_, StoreError>(graph, |txn| txn.insert(&batch))?;
        }
        Ok(self.revision())
    }

    /// Remove quads that are present. Returns the store revision afterwards.
    pub fn remove(&self, quads: &[Quad]) -> Result<u64, StoreError> {
        for (graph, batch) in self.by_graph(quads)? {
            self.transaction::<_, StoreError>(graph, |txn| Ok(txn.remove(&batch)))?;
        }
        Ok(self.revision())
    }

    /// Bindings for every quad of `graph` unifying with `pattern`. An
    /// unregistered graph matches nothing.
    pub fn match_pattern(&self, graph: &Iri, pattern: &TriplePattern) -> Vec<Binding> {
        if pattern.check().is_err() {
            return Vec::new();
        }
        self.read(graph, |g| g.match_pattern(pattern)).unwrap_or_default()
    }

    pub fn quads(&self, graph: &Iri) -> Result<Vec<Quad>, StoreError> {
        self.read(graph, |g| g.quads(graph))
    }

    pub fn len(&self, graph: &Iri) -> Result<usize, StoreError> {
        self.read(graph, Graph::len)
    }

    pub fn execute_select(&self, query: &SelectQuery) -> Result<QueryResults, StoreError> {
        self.execute_select_with(query, ExecMode::default())
    }

    pub fn execute_select_with(&self, query: &SelectQuery, mode: ExecMode) -> Result<QueryResults, StoreError> {
        query.validate()?;
        self.read(&query.graph, |g| g.select(query, mode))
    }

    /// Run an update; returns the store revision afterwards.
    pub fn execute_update(&self, update: &UpdateQuery) -> Result<u64, StoreError> {
        update.validate()?;
        match update {
            UpdateQuery::InsertData(quads) => self.insert(quads),
            UpdateQuery::DeleteWhere { graph, patterns } => {
                self.transaction::<_, StoreError>(graph, |txn| txn.delete_where(patterns))?;
                Ok(self.revision())
            }
        }
    }

    /// Parse and run SPARQL-subset text.
    pub fn execute_text(&self, text: &str) -> Result<TextOutcome, StoreError> {
        match sparql::parse(text)? {
            sparql::Query::Select(q) => self.execute_select(&q).map(TextOutcome::Results),
            sparql::Query::Update(u) => self.execute_update(&u).map(TextOutcome::Revision),
        }
    }

    pub fn export_turtle(&self, graph: &Iri) -> Result<String, StoreError> {
        let quads = self.quads(graph)?;
        Ok(turtle::serialize(&quads))
    }

    /// Parse `text` fully, then insert it into `graph` in one transaction.
    pub fn import_turtle(&self, graph: &Iri, text: &str) -> Result<u64, StoreError> {
        let quads = turtle::parse(text, graph)?;
        self.transaction::<_, StoreError>(graph, |txn| txn.insert(&quads))?;
        Ok(self.revision())
    }

    /// Write every graph as N-Quads. Registered graphs are kept even when empty.
    pub fn save(&self, path: &Path) -> Result<(), StoreError> {
        let graphs: Vec<Iri> = self.graph_names();
        let mut quads = Vec::new();
        for g in &graphs {
            quads.extend(self.quads(g)?);
        }
        let text = nquads::serialize(&graphs, &quads);
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, text)?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, StoreError> {
        let text = std::fs::read_to_string(path)?;
        let (graphs, quads) = nquads::parse(&text)?;
        let store = QuadStore::new();
        for g in graphs {
            store.register_graph(g);
        }
        let mut grouped: HashMap<Iri, Vec<Quad>> = HashMap::new();
        for q in quads {
            store.register_graph(q.graph.clone());
            grouped.entry(q.graph.clone()).or_default().push(q);
        }
        for batch in grouped.values() {
            store.insert(batch)?;
        }
        Ok(store)
    }

    /// Distinct subjects in `graph` having `rdf:type <class>`.
    pub fn instances_of(&self, graph: &Iri, class: &str) -> Vec<Iri> {
        let Ok(class) = Iri::new(class) else { return Vec::new() };
        let ty = Iri::new(crate::vocab::ns::rdf::TYPE).expect("constant");
        let pattern = TriplePattern::new(PatternTerm::var("s"), ty, class);
        let found: BTreeSet<Iri> = self
            .match_pattern(graph, &pattern)
            .into_iter()
            .filter_map(|b| b.values().next().and_then(|t| t.as_iri().cloned()))
            .collect();
        found.into_iter().collect()
    }
}

#[derive(Debug)]
pub enum TextOutcome {
    Results(QueryResults),
    Revision(u64),
}
