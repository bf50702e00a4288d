//! RDF term model: IRIs, engine-minted skolem IRIs, literals and quads.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ns;

/// Path segment that marks an IRI as engine-minted (skolemized).
pub const GENID_MARKER: &str = "/.well-known/genid/";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("invalid IRI {0:?}: {1}")]
    InvalidIri(String, &'static str),
    #[error("invalid language tag {0:?}")]
    InvalidLanguage(String),
    #[error("language tag requires rdf:langString datatype")]
    LanguageWithoutLangString,
    #[error("literal in subject position")]
    LiteralSubject,
}

/// An absolute IRI.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Iri(String);

impl Iri {
    pub fn new(value: impl Into<String>) -> Result<Self, TermError> {
        let value = value.into();
        check_iri(&value).map_err(|why| TermError::InvalidIri(value.clone(), why))?;
        Ok(Iri(value))
    }

    /// For compile-time constants that are known to be valid.
    pub(crate) fn from_static(value: &'static str) -> Self {
        debug_assert!(check_iri(value).is_ok(), "{value}");
        Iri(value.to_owned())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_skolem(&self) -> bool {
        self.0.contains(GENID_MARKER)
    }

    /// Last path or fragment segment, used for display labels.
    pub fn local_name(&self) -> &str {
        let s = self.0.trim_end_matches(['/', '#']);
        match s.rfind(['/', '#', ':']) {
            Some(i) if i + 1 < s.len() => &s[i + 1..],
            _ => s,
        }
    }
}

fn check_iri(value: &str) -> Result<(), &'static str> {
    let Some(colon) = value.find(':') else {
        return Err("missing scheme");
    };
    let scheme = &value[..colon];
    let mut chars = scheme.chars();
    if !chars.next().is_some_and(|c| c.is_ascii_alphabetic()) {
        return Err("scheme must start with a letter");
    }
    if !chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.')) {
        return Err("invalid scheme character");
    }
    if colon + 1 == value.len() {
        return Err("empty after scheme");
    }
    if value
        .chars()
        .any(|c| c.is_whitespace() || c.is_control() || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\'))
    {
        return Err("forbidden character");
    }
    Ok(())
}

impl TryFrom<String> for Iri {
    type Error = TermError;
    fn try_from(value: String) -> Result<Self, Self::Error> {
        Iri::new(value)
    }
}

impl From<Iri> for String {
    fn from(iri: Iri) -> Self {
        iri.0
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Iri {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    lexical: String,
    datatype: Iri,
    language: Option<String>,
}

impl Literal {
    /// A plain (`xsd:string`) literal.
    pub fn string(lexical: impl Into<String>) -> Self {
        Literal {
            lexical: lexical.into(),
            datatype: Iri::from_static(ns::xsd::STRING),
            language: None,
        }
    }

    pub fn typed(lexical: impl Into<String>, datatype: Iri) -> Self {
        Literal {
            lexical: lexical.into(),
            datatype,
            language: None,
        }
    }

    pub fn with_language(lexical: impl Into<String>, language: impl Into<String>) -> Result<Self, TermError> {
        let language = language.into();
        let valid = {
            let mut parts = language.split('-');
            let head = parts.next().unwrap_or_default();
            !head.is_empty()
                && head.chars().all(|c| c.is_ascii_alphabetic())
                && parts.all(|p| !p.is_empty() && p.chars().all(|c| c.is_ascii_alphanumeric()))
        };
        if !valid {
            return Err(TermError::InvalidLanguage(language));
        }
        Ok(Literal {
            lexical: lexical.into(),
            datatype: Iri::from_static(ns::rdf::LANG_STRING),
            language: Some(language),
        })
    }

    /// Build from parts, enforcing the language-tag/datatype pairing.
    pub fn from_parts(lexical: String, datatype: Iri, language: Option<String>) -> Result<Self, TermError> {
        match language {
            Some(lang) if datatype.as_str() == ns::rdf::LANG_STRING => Literal::with_language(lexical, lang),
            Some(_) => Err(TermError::LanguageWithoutLangString),
            None if datatype.as_str() == ns::rdf::LANG_STRING => Err(TermError::LanguageWithoutLangString),
            None => Ok(Literal::typed(lexical, datatype)),
        }
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn datatype(&self) -> &Iri {
        &self.datatype
    }

    pub fn language(&self) -> Option<&str> {
        self.language.as_deref()
    }

    pub fn is_plain(&self) -> bool {
        self.language.is_none() && self.datatype.as_str() == ns::xsd::STRING
    }
}

/// A node or value in a quad.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Iri(Iri),
    /// An engine-minted IRI standing in for a blank node.
    Skolem(Iri),
    Literal(Literal),
}

impl Term {
    /// Wrap an IRI, classifying engine-minted IRIs as skolem nodes.
    pub fn iri(iri: Iri) -> Self {
        if iri.is_skolem() {
            Term::Skolem(iri)
        } else {
            Term::Iri(iri)
        }
    }

    pub fn literal(literal: Literal) -> Self {
        Term::Literal(literal)
    }

    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Term::Iri(iri) | Term::Skolem(iri) => Some(iri),
            Term::Literal(_) => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(lit) => Some(lit),
            _ => None,
        }
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Term::Literal(_))
    }
}

impl From<Iri> for Term {
    fn from(iri: Iri) -> Self {
        Term::iri(iri)
    }
}

impl From<Literal> for Term {
    fn from(literal: Literal) -> Self {
        Term::Literal(literal)
    }
}

/// N-Triples style serialization; also the ordering key for result rows.
impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(iri) | Term::Skolem(iri) => write!(f, "<{iri}>"),
            Term::Literal(lit) => {
                f.write_str("\"")?;
                write_escaped(f, &lit.lexical)?;
                f.write_str("\"")?;
                if let Some(lang) = &lit.language {
                    write!(f, "@{lang}")
                } else if lit.datatype.as_str() != ns::xsd::STRING {
                    write!(f, "^^<{}>", lit.datatype)
                } else {
                    Ok(())
                }
            }
        }
    }
}

pub(crate) fn write_escaped(out: &mut impl fmt::Write, value: &str) -> fmt::Result {
    for c in value.chars() {
        match c {
            '\\' => out.write_str("\\\\")?,
            '"' => out.write_str("\\\"")?,
            '\n' => out.write_str("\\n")?,
            '\r' => out.write_str("\\r")?,
            '\t' => out.write_str("\\t")?,
            c if c.is_control() => write!(out, "\\u{:04X}", c as u32)?,
            c => out.write_char(c)?,
        }
    }
    Ok(())
}

/// The storage atom: a triple in a named graph.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Quad {
    pub graph: Iri,
    pub subject: Term,
    pub predicate: Iri,
    pub object: Term,
}

impl Quad {
    pub fn new(graph: Iri, subject: Term, predicate: Iri, object: Term) -> Result<Self, TermError> {
        if subject.is_literal() {
            return Err(TermError::LiteralSubject);
        }
        Ok(Quad {
            graph,
            subject,
            predicate,
            object,
        })
    }
}

impl fmt::Display for Quad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} <{}> {} <{}> .", self.subject, self.predicate, self.object, self.graph)
    }
}
