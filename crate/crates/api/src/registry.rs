//! Registered agents and their bearer tokens. Only token hashes are kept.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;
use std::path::Path;

use rand::RngCore;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use pkg_core::vocab::{Iri, Owner};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RegistryError {
    #[error("owner name must be 1-64 characters of [a-z0-9_-]")]
    BadName,
    #[error("{0} is already registered")]
    Exists(String),
    #[error("unknown owner {0}")]
    UnknownOwner(String),
    #[error("{0} is an owner IRI, not a service")]
    OwnerAsService(Iri),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Agent {
    Owner(String),
    Service(Iri),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OwnerRecord {
    pub agent: Iri,
    pub token_sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServiceRecord {
    pub token_sha256: String,
    /// Owner names whose graphs this service may call into.
    pub owners: BTreeSet<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Registry {
    base_iri: String,
    owners: BTreeMap<String, OwnerRecord>,
    services: BTreeMap<Iri, ServiceRecord>,
}

pub fn hash_token(token: &str) -> String {
    let digest = Sha256::digest(token.as_bytes());
    let mut out = String::with_capacity(64);
    for b in digest {
        let _ = write!(out, "{b:02x}");
    }
    out
}

pub fn new_token() -> String {
    let mut bytes = [0u8; 24];
    rand::thread_rng().fill_bytes(&mut bytes);
    let mut out = String::from("pkg_");
    for b in bytes {
        let _ = write!(out, "{b:02x}");
    }
    out
}

fn valid_name(name: &str) -> bool {
    (1..=64).contains(&name.len()) && name.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'-' || b == b'_')
}

/// Compare in time independent of where the strings first differ.
fn same(a: &str, b: &str) -> bool {
    a.len() == b.len() && a.bytes().zip(b.bytes()).fold(0u8, |acc, (x, y)| acc | (x ^ y)) == 0
}

impl Registry {
    pub fn new(base_iri: impl Into<String>) -> Self {
        Registry { base_iri: base_iri.into(), ..Registry::default() }
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn save(&self, path: &Path) -> anyhow::Result<()> {
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, serde_json::to_string_pretty(self)?)?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn owner_iri(&self, name: &str) -> Result<Iri, RegistryError> {
        if !valid_name(name) {
            return Err(RegistryError::BadName);
        }
        Iri::new(format!("{}{name}", self.base_iri)).map_err(|_| RegistryError::BadName)
    }

    pub fn owner(&self, name: &str) -> Option<Owner> {
        self.owners.get(name).map(|r| Owner::new(r.agent.clone()))
    }

    pub fn owner_names(&self) -> impl Iterator<Item = &str> {
        self.owners.keys().map(String::as_str)
    }

    /// Register an owner; returns the plaintext token, shown once.
    pub fn add_owner(&mut self, name: &str) -> Result<(Owner, String), RegistryError> {
        let agent = self.owner_iri(name)?;
        if self.owners.contains_key(name) {
            return Err(RegistryError::Exists(name.to_string()));
        }
        let token = new_token();
        self.owners.insert(name.to_string(), OwnerRecord { agent: agent.clone(), token_sha256: hash_token(&token) });
        Ok((Owner::new(agent), token))
    }

    pub fn add_service(&mut self, id: Iri, owners: BTreeSet<String>) -> Result<String, RegistryError> {
        if self.owners.values().any(|o| o.agent == id) {
            return Err(RegistryError::OwnerAsService(id));
        }
        if self.services.contains_key(&id) {
            return Err(RegistryError::Exists(id.to_string()));
        }
        if let Some(missing) = owners.iter().find(|o| !self.owners.contains_key(*o)) {
            return Err(RegistryError::UnknownOwner(missing.clone()));
        }
        let token = new_token();
        self.services.insert(id, ServiceRecord { token_sha256: hash_token(&token), owners });
        Ok(token)
    }

    pub fn authenticate(&self, token: &str) -> Option<Agent> {
        let h = hash_token(token);
        let owner = self.owners.iter().find(|(_, r)| same(&r.token_sha256, &h)).map(|(n, _)| Agent::Owner(n.clone()));
        owner.or_else(|| {
            self.services.iter().find(|(_, r)| same(&r.token_sha256, &h)).map(|(id, _)| Agent::Service(id.clone()))
        })
    }

    pub fn service_allowed(&self, service: &Iri, owner: &str) -> bool {
        self.services.get(service).is_some_and(|r| r.owners.contains(owner))
    }
}
