//! Fixed namespace table. Every vocabulary IRI the engine emits comes from here.

pub const PKG: &str = "http://w3id.org/pkg/";
pub const RDF: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const SKOS: &str = "http://www.w3.org/2004/02/skos/core#";
pub const PAV: &str = "http://purl.org/pav/";
pub const DCTERMS: &str = "http://purl.org/dc/terms/";
pub const XSD: &str = "http://www.w3.org/2001/XMLSchema#";

/// Prefix declarations, in the order they are written to Turtle and SPARQL text.
pub const PREFIXES: &[(&str, &str)] = &[
    ("pkg", PKG),
    ("rdf", RDF),
    ("skos", SKOS),
    ("pav", PAV),
    ("dcterms", DCTERMS),
    ("xsd", XSD),
];

pub mod rdf {
    pub const TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
    pub const STATEMENT: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#Statement";
    pub const SUBJECT: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#subject";
    pub const PREDICATE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#predicate";
    pub const OBJECT: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#object";
    pub const LANG_STRING: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#langString";
}

pub mod skos {
    pub const CONCEPT: &str = "http://www.w3.org/2004/02/skos/core#Concept";
    pub const PREF_LABEL: &str = "http://www.w3.org/2004/02/skos/core#prefLabel";
    pub const IN_SCHEME: &str = "http://www.w3.org/2004/02/skos/core#inScheme";
    pub const RELATED: &str = "http://www.w3.org/2004/02/skos/core#related";
    pub const BROADER: &str = "http://www.w3.org/2004/02/skos/core#broader";
    pub const NARROWER: &str = "http://www.w3.org/2004/02/skos/core#narrower";
}

pub mod pav {
    pub const CREATED_BY: &str = "http://purl.org/pav/createdBy";
    pub const CREATED_ON: &str = "http://purl.org/pav/createdOn";
    pub const DERIVED_FROM: &str = "http://purl.org/pav/derivedFrom";
}

pub mod dcterms {
    pub const DESCRIPTION: &str = "http://purl.org/dc/terms/description";
    pub const IS_PART_OF: &str = "http://purl.org/dc/terms/isPartOf";
}

pub mod xsd {
    pub const STRING: &str = "http://www.w3.org/2001/XMLSchema#string";
    pub const DATE_TIME: &str = "http://www.w3.org/2001/XMLSchema#dateTime";
    pub const DECIMAL: &str = "http://www.w3.org/2001/XMLSchema#decimal";
    pub const INTEGER: &str = "http://www.w3.org/2001/XMLSchema#integer";
    pub const BOOLEAN: &str = "http://www.w3.org/2001/XMLSchema#boolean";
}

pub mod pkg {
    pub const READ_ACCESS_RIGHTS: &str = "http://w3id.org/pkg/readAccessRights";
    pub const WRITE_ACCESS_RIGHTS: &str = "http://w3id.org/pkg/writeAccessRights";
    pub const PREFERENCE: &str = "http://w3id.org/pkg/preference";
    pub const PREFERENCE_CLASS: &str = "http://w3id.org/pkg/Preference";
    pub const TOPIC: &str = "http://w3id.org/pkg/topic";
    pub const WEIGHT: &str = "http://w3id.org/pkg/weight";
    pub const ALIAS: &str = "http://w3id.org/pkg/alias";
    pub const LIKE: &str = "http://w3id.org/pkg/like";
}

/// Shortest prefixed form of `iri` if it falls in the namespace table and the
/// local part is a plain name.
pub fn compact(iri: &str) -> Option<(&'static str, &str)> {
    PREFIXES.iter().find_map(|(prefix, ns)| {
        let local = iri.strip_prefix(ns)?;
        is_plain_local(local).then_some((*prefix, local))
    })
}

fn is_plain_local(local: &str) -> bool {
    let mut chars = local.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compacts_known_namespaces_only() {
        assert_eq!(compact(rdf::TYPE), Some(("rdf", "type")));
        assert_eq!(compact(pkg::WEIGHT), Some(("pkg", "weight")));
        assert_eq!(compact("http://dbpedia.org/resource/Tom_Cruise"), None);
        assert_eq!(compact("http://w3id.org/pkg/a.b"), None);
        assert_eq!(compact(PKG), None);
    }
}
