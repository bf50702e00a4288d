//! Query atoms: variables, triple patterns, SELECT and update forms.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::vocab::{Iri, Quad, Term};

use super::StoreError;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Variable(String);

impl Variable {
    /// Names follow SPARQL `VARNAME` restricted to ASCII: letters, digits, `_`.
    pub fn new(name: impl Into<String>) -> Result<Self, StoreError> {
        let name = name.into();
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(StoreError::InvalidQuery(format!("invalid variable name {name:?}")));
        }
        Ok(Variable(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "?{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PatternTerm {
    Var(Variable),
    Term(Term),
}

impl PatternTerm {
    pub fn var(name: &str) -> Self {
        PatternTerm::Var(Variable::new(name).expect("valid variable name"))
    }

    pub fn as_var(&self) -> Option<&Variable> {
        match self {
            PatternTerm::Var(v) => Some(v),
            PatternTerm::Term(_) => None,
        }
    }

    pub fn is_ground(&self) -> bool {
        matches!(self, PatternTerm::Term(_))
    }
}

impl From<Term> for PatternTerm {
    fn from(t: Term) -> Self {
        PatternTerm::Term(t)
    }
}

impl From<Iri> for PatternTerm {
    fn from(iri: Iri) -> Self {
        PatternTerm::Term(Term::iri(iri))
    }
}

impl From<Variable> for PatternTerm {
    fn from(v: Variable) -> Self {
        PatternTerm::Var(v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TriplePattern {
    pub subject: PatternTerm,
    pub predicate: PatternTerm,
    pub object: PatternTerm,
}

impl TriplePattern {
    pub fn new(subject: impl Into<PatternTerm>, predicate: impl Into<PatternTerm>, object: impl Into<PatternTerm>) -> Self {
        TriplePattern {
            subject: subject.into(),
            predicate: predicate.into(),
            object: object.into(),
        }
    }

    pub fn terms(&self) -> [&PatternTerm; 3] {
        [&self.subject, &self.predicate, &self.object]
    }

    pub fn ground_count(&self) -> usize {
        self.terms().iter().filter(|t| t.is_ground()).count()
    }

    pub fn variables(&self) -> impl Iterator<Item = &Variable> {
        self.terms().into_iter().filter_map(PatternTerm::as_var)
    }

    pub(crate) fn check(&self) -> Result<(), StoreError> {
        if let PatternTerm::Term(t) = &self.predicate {
            if t.as_iri().is_none() {
                return Err(StoreError::InvalidQuery("predicate must be an IRI or a variable".into()));
            }
        }
        Ok(())
    }

    /// Instantiate with a binding; `None` if a variable is unbound or the
    /// result is not a valid quad.
    pub fn instantiate(&self, graph: &Iri, binding: &Binding) -> Option<Quad> {
        let resolve = |t: &PatternTerm| match t {
            PatternTerm::Term(t) => Some(t.clone()),
            PatternTerm::Var(v) => binding.get(v).cloned(),
        };
        let predicate = resolve(&self.predicate)?.as_iri()?.clone();
        Quad::new(graph.clone(), resolve(&self.subject)?, predicate, resolve(&self.object)?).ok()
    }
}

/// Variable assignment produced by matching.
pub type Binding = BTreeMap<Variable, Term>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Filter {
    pub variable: Variable,
    pub value: Term,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectQuery {
    pub projection: Vec<Variable>,
    pub graph: Iri,
    pub patterns: Vec<TriplePattern>,
    pub filters: Vec<Filter>,
}

impl SelectQuery {
    /// Every variable of the pattern, in first-occurrence order.
    pub fn pattern_variables(patterns: &[TriplePattern]) -> Vec<Variable> {
        let mut seen = BTreeSet::new();
        patterns
            .iter()
            .flat_map(TriplePattern::variables)
            .filter(|v| seen.insert((*v).clone()))
            .cloned()
            .collect()
    }

    pub fn validate(&self) -> Result<(), StoreError> {
        for p in &self.patterns {
            p.check()?;
        }
        let vars: BTreeSet<Variable> = Self::pattern_variables(&self.patterns).into_iter().collect();
        for v in &self.projection {
            if !vars.contains(v) {
                return Err(StoreError::InvalidQuery(format!("projected variable {v} does not occur in the pattern")));
            }
        }
        for f in &self.filters {
            if !vars.contains(&f.variable) {
                return Err(StoreError::InvalidQuery(format!(
                    "filtered variable {} does not occur in the pattern",
                    f.variable
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UpdateQuery {
    InsertData(Vec<Quad>),
    DeleteWhere { graph: Iri, patterns: Vec<TriplePattern> },
}

impl UpdateQuery {
    pub fn validate(&self) -> Result<(), StoreError> {
        match self {
            UpdateQuery::InsertData(_) => Ok(()),
            UpdateQuery::DeleteWhere { patterns, .. } => patterns.iter().try_for_each(TriplePattern::check),
        }
    }
}

/// A SELECT result: column names and rows, sorted by term serialization.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct QueryResults {
    pub variables: Vec<Variable>,
    pub rows: Vec<Vec<Term>>,
}

impl QueryResults {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<impl Iterator<Item = &Term>> {
        let idx = self.variables.iter().position(|v| v.name() == name)?;
        Some(self.rows.iter().map(move |r| &r[idx]))
    }

    /// Tab-separated rendering with a `?var` header line.
    pub fn to_tsv(&self) -> String {
        let mut out = self.variables.iter().map(ToString::to_string).collect::<Vec<_>>().join("\t");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.iter().map(ToString::to_string).collect::<Vec<_>>().join("\t"));
            out.push('\n');
        }
        out
    }
}
