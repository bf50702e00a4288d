//! Personal knowledge graph engine.
//!
//! Natural-language statements are annotated ([`nl2pkg`]), linked to IRIs or
//! concept placeholders ([`linking`]), reified under the PKG vocabulary
//! ([`vocab`]) and stored in a quad store with one named graph per owner
//! ([`store`]). The [`connector`] turns intents into SPARQL-subset queries and
//! runs them.

pub mod connector;
pub mod ids;
pub mod linking;
pub mod nl2pkg;
pub mod store;
pub mod vocab;

mod intent;
mod limit;

pub use intent::Intent;
