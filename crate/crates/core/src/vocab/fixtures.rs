//! Sample statements shared by tests, benches and the CLI demo data.

use chrono::{TimeZone, Utc};

use super::model::{AccessPolicy, Concept, Owner, PkgStatement, Preference, Provenance, SpoElement};
use super::term::Iri;

pub fn owner() -> Owner {
    Owner::new(Iri::new("http://example.org/pkg/alice").unwrap())
}

pub fn graph() -> Iri {
    owner().graph
}

fn provenance() -> Provenance {
    Provenance {
        created_by: owner().agent,
        created_on: Utc.with_ymd_and_hms(2024, 5, 13, 9, 30, 0).unwrap(),
        derived_from: None,
    }
}

/// Annotation plus three resolved elements, nothing else.
pub fn minimal() -> PkgStatement {
    let o = owner();
    PkgStatement {
        id: o.skolem("stmt", "minimal"),
        annotation: "I know Bob".into(),
        subject: SpoElement::Resolved(o.agent.clone()),
        predicate: SpoElement::Resolved(Iri::new("http://xmlns.com/foaf/0.1/knows").unwrap()),
        object: SpoElement::Resolved(Iri::new("http://example.org/people/bob").unwrap()),
        preference: None,
        provenance: provenance(),
        access: AccessPolicy::default(),
    }
}

/// "I dislike all movies with the actor Tom Cruise", unresolved predicate and
/// object, negative preference on the object.
pub fn tom_cruise() -> PkgStatement {
    let o = owner();
    let id = o.skolem("stmt", "tom-cruise");
    let object = SpoElement::Concept(Concept::new(
        o.skolem("concept", "tom-cruise-movies"),
        "all movies with the actor Tom Cruise",
    ));
    PkgStatement {
        annotation: "I dislike all movies with the actor Tom Cruise".into(),
        subject: SpoElement::Resolved(o.agent.clone()),
        predicate: SpoElement::Concept(Concept::new(o.skolem("concept", "dislike"), "dislike")),
        preference: Some(Preference {
            id: o.skolem("pref", "tom-cruise"),
            holder: o.agent.clone(),
            topic: object.clone(),
            weight: -1.0,
            derived_from: id.clone(),
        }),
        object,
        id,
        provenance: provenance(),
        access: AccessPolicy::default(),
    }
}

/// "Bob likes Oppenheimer" with a positive preference.
pub fn bob_oppenheimer() -> PkgStatement {
    let o = owner();
    let id = o.skolem("stmt", "bob-oppenheimer");
    let bob = o.skolem("concept", "bob");
    let object = SpoElement::Concept(Concept::new(o.skolem("concept", "oppenheimer"), "Oppenheimer"));
    PkgStatement {
        annotation: "Bob likes Oppenheimer".into(),
        subject: SpoElement::Concept(Concept::new(bob.clone(), "Bob")),
        predicate: SpoElement::Resolved(Iri::new(super::ns::pkg::LIKE).unwrap()),
        preference: Some(Preference {
            id: o.skolem("pref", "bob-oppenheimer"),
            holder: bob,
            topic: object.clone(),
            weight: 1.0,
            derived_from: id.clone(),
        }),
        object,
        id,
        provenance: provenance(),
        access: AccessPolicy::default(),
    }
}
