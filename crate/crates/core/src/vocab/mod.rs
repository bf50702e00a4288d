//! PKG vocabulary: the data model and its reified RDF form.

pub mod fixtures;
mod mapping;
mod model;
pub mod ns;
mod term;
mod validate;

pub use mapping::{preference_quads, quads_to_statement, statement_to_quads, MappingError};
pub use model::{
    format_datetime, format_weight, parse_weight, AccessPolicy, Concept, Owner, PkgStatement, Preference, Provenance,
    SpoElement,
};
pub use term::{Iri, Literal, Quad, Term, TermError, GENID_MARKER};
pub(crate) use term::write_escaped as term_escape;
pub use validate::{validate_in_context, validate_statement, Violation};

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_valid() {
        assert_eq!(validate_statement(&fixtures::tom_cruise()), vec![]);
        assert_eq!(validate_statement(&fixtures::bob_oppenheimer()), vec![]);
        assert_eq!(validate_statement(&fixtures::minimal()), vec![]);
    }

    #[test]
    fn weight_out_of_range() {
        let mut stmt = fixtures::tom_cruise();
        stmt.preference.as_mut().unwrap().weight = 2.0;
        let v = validate_statement(&stmt);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].path, "preference.weight");
    }

    #[test]
    fn empty_annotation() {
        let mut stmt = fixtures::tom_cruise();
        stmt.annotation = String::new();
        let v = validate_statement(&stmt);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].path, "annotation");
    }

    #[test]
    fn owner_in_access_set_is_flagged() {
        let mut stmt = fixtures::minimal();
        let owner = fixtures::owner().agent;
        stmt.access.read.insert(owner.clone());
        let now = stmt.provenance.created_on;
        let v = validate_in_context(&stmt, &owner, now);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].path, "access.read");
    }

    #[test]
    fn future_timestamp_is_flagged() {
        let stmt = fixtures::minimal();
        let before = stmt.provenance.created_on - chrono::Duration::seconds(1);
        let v = validate_in_context(&stmt, &fixtures::owner().agent, before);
        assert_eq!(v[0].path, "provenance.createdOn");
    }

    #[test]
    fn statement_json_field_names() {
        let json = serde_json::to_value(fixtures::tom_cruise()).unwrap();
        let keys: Vec<&str> = json.as_object().unwrap().keys().map(String::as_str).collect();
        for key in ["id", "annotation", "subject", "predicate", "object", "preference", "provenance", "access"] {
            assert!(keys.contains(&key), "{key}");
        }
        assert_eq!(json["provenance"]["createdOn"], "2024-05-13T09:30:00Z");
        assert_eq!(json["preference"]["derivedFrom"], json["id"]);
        assert_eq!(json["access"]["read"], serde_json::json!([]));
        let back: PkgStatement = serde_json::from_value(json).unwrap();
        assert_eq!(back, fixtures::tom_cruise());
    }
}
