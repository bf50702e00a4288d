//! The request-independent core of the REST facade: authentication,
//! authorization and the NL pipeline, all synchronous.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use pkg_core::connector::{ActionResult, Caller, Connector, ConnectorError, ElementMatch, GraphView, Outcome, PkgAction, StatementPattern};
use pkg_core::ids::{Clock, IdGenerator, RandomIds, SystemClock};
use pkg_core::linking::{HttpLinker, Resolver, ResolveError, StatementContext};
use pkg_core::nl2pkg::{validate_annotation, AnnotatedUtterance, Annotator, Lexicon, ModelAnnotator, PromptSet, RuleAnnotator};
use pkg_core::store::{turtle, QuadStore, StoreError};
use pkg_core::vocab::{AccessPolicy, Concept, Iri, Owner, PkgStatement, Preference, Provenance, SpoElement};
use pkg_core::Intent;

use crate::config::{AnnotatorKind, Config};
use crate::registry::{hash_token, Agent, Registry, RegistryError};

/// An error with the HTTP status it maps to.
#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: u16,
    pub message: String,
    pub detail: Option<Value>,
}

impl ApiError {
    pub fn new(status: u16, message: impl Into<String>) -> Self {
        ApiError { status, message: message.into(), detail: None }
    }

    fn with_detail(mut self, detail: Value) -> Self {
        self.detail = Some(detail);
        self
    }

    pub fn unauthorized() -> Self {
        ApiError::new(401, "missing or invalid bearer token")
    }

    pub fn forbidden(message: impl Into<String>) -> Self {
        ApiError::new(403, message)
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        ApiError::new(400, message)
    }

    pub fn body(&self) -> Value {
        let mut body = json!({ "error": self.message });
        if let Some(d) = &self.detail {
            body["detail"] = d.clone();
        }
        body
    }
}

impl std::fmt::Display for ApiError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {}", self.status, self.message)
    }
}

impl std::error::Error for ApiError {}

impl From<ConnectorError> for ApiError {
    fn from(e: ConnectorError) -> Self {
        let status = match &e {
            ConnectorError::Unsupported(_) => 422,
            ConnectorError::Store(StoreError::UnknownGraph(_)) | ConnectorError::NotFound(_) => 404,
            ConnectorError::Store(StoreError::Io(_)) => 500,
            ConnectorError::Store(_) | ConnectorError::Mapping(_) | ConnectorError::Invalid(_) => 400,
            ConnectorError::Forbidden(_) => 403,
        };
        ApiError::new(status, e.to_string())
    }
}

impl From<RegistryError> for ApiError {
    fn from(e: RegistryError) -> Self {
        let status = match e {
            RegistryError::Exists(_) => 409,
            RegistryError::UnknownOwner(_) => 404,
            RegistryError::BadName | RegistryError::OwnerAsService(_) => 400,
        };
        ApiError::new(status, e.to_string())
    }
}

/// The authenticated caller acting on one owner's graph.
#[derive(Debug, Clone)]
pub struct Access {
    pub owner: Owner,
    pub caller: Caller,
    /// Recorded as `createdBy` on statements this request adds.
    pub agent: Iri,
}

impl Access {
    fn require_owner(&self, what: &str) -> Result<(), ApiError> {
        match self.caller {
            Caller::Owner => Ok(()),
            Caller::Service(_) => Err(ApiError::forbidden(format!("only the owner may {what}"))),
        }
    }
}

/// Response of the natural-language endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NlResponse {
    #[serde(flatten)]
    pub action: ActionResult,
    pub annotation: AnnotatedUtterance,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
pub enum ElementDraft {
    #[serde(rename = "iri")]
    Iri(Iri),
    #[serde(rename = "concept")]
    Concept(ConceptDraft),
}

#[derive(Debug, Clone, Deserialize)]
pub struct ConceptDraft {
    pub text: String,
    #[serde(default)]
    pub related: BTreeSet<Iri>,
    #[serde(default)]
    pub broader: BTreeSet<Iri>,
    #[serde(default)]
    pub narrower: BTreeSet<Iri>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct PreferenceDraft {
    pub weight: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProvenanceDraft {
    #[serde(default)]
    pub derived_from: Option<Iri>,
}

/// Body of a structured add. Same shape as a stored statement, but ids,
/// `createdBy` and `createdOn` are assigned by the server; any sent are
/// ignored.
#[derive(Debug, Clone, Deserialize)]
pub struct StatementDraft {
    pub annotation: String,
    pub subject: ElementDraft,
    pub predicate: ElementDraft,
    pub object: ElementDraft,
    #[serde(default)]
    pub preference: Option<PreferenceDraft>,
    #[serde(default)]
    pub provenance: ProvenanceDraft,
    #[serde(default)]
    pub access: AccessPolicy,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AliasEntry {
    pub alias: String,
    pub iri: Iri,
}

pub struct Pkg {
    store: QuadStore,
    registry: RwLock<Registry>,
    annotator: Arc<dyn Annotator>,
    resolver: Resolver,
    clock: Arc<dyn Clock>,
    ids: Arc<dyn IdGenerator>,
    admin_token_sha256: Option<String>,
    data_file: Option<PathBuf>,
    agents_file: Option<PathBuf>,
    persist: Mutex<()>,
}

impl Pkg {
    pub fn new(store: QuadStore, registry: Registry, annotator: Arc<dyn Annotator>, resolver: Resolver) -> Self {
        Pkg {
            store,
            registry: RwLock::new(registry),
            annotator,
            resolver,
            clock: Arc::new(SystemClock),
            ids: Arc::new(RandomIds),
            admin_token_sha256: None,
            data_file: None,
            agents_file: None,
            persist: Mutex::new(()),
        }
    }

    /// Build from configuration, loading persisted state if present.
    pub fn from_config(config: &Config) -> anyhow::Result<Self> {
        let store = match &config.data_file {
            Some(path) if path.exists() => QuadStore::load(path)?,
            _ => QuadStore::new(),
        };
        let registry = match config.agents_file() {
            Some(path) if path.exists() => Registry::load(&path)?,
            _ => Registry::new(config.base_iri.clone()),
        };
        let annotator: Arc<dyn Annotator> = match config.annotator {
            AnnotatorKind::Rule => {
                let lexicon = match &config.lexicon_dir {
                    Some(dir) => Lexicon::load_dir(dir)?,
                    None => Lexicon::builtin().clone(),
                };
                Arc::new(RuleAnnotator::new(lexicon))
            }
            AnnotatorKind::Model => {
                let prompts = match &config.prompt_dir {
                    Some(dir) => PromptSet::load_dir(dir)?,
                    None => PromptSet::default(),
                };
                Arc::new(ModelAnnotator::http(&config.model_config(), prompts))
            }
        };
        let linker = config.linker_config().map(|c| Arc::new(HttpLinker::new(&c)) as _);
        let mut pkg = Pkg::new(store, registry, annotator, Resolver::new(linker, config.linker.threshold));
        pkg.admin_token_sha256 = config.admin_token.as_deref().map(hash_token);
        pkg.data_file = config.data_file.clone();
        pkg.agents_file = config.agents_file();
        for name in pkg.registry().owner_names().map(str::to_string).collect::<Vec<_>>() {
            if let Some(owner) = pkg.registry().owner(&name) {
                pkg.store.register_graph(owner.graph);
            }
        }
        Ok(pkg)
    }

    pub fn with_clock(mut self, clock: Arc<dyn Clock>) -> Self {
        self.clock = clock;
        self
    }

    pub fn with_ids(mut self, ids: Arc<dyn IdGenerator>) -> Self {
        self.ids = ids;
        self
    }

    pub fn with_admin_token(mut self, token: &str) -> Self {
        self.admin_token_sha256 = Some(hash_token(token));
        self
    }

    pub fn store(&self) -> &QuadStore {
        &self.store
    }

    fn registry(&self) -> std::sync::RwLockReadGuard<'_, Registry> {
        self.registry.read().unwrap_or_else(|e| e.into_inner())
    }

    fn connector(&self) -> Connector<'_> {
        Connector::new(&self.store).with_clock(self.clock.clone())
    }

    /// Write the store and the agent registry, when backed by files.
    pub fn persist(&self) -> Result<(), ApiError> {
        let _guard = self.persist.lock().unwrap_or_else(|e| e.into_inner());
        let fail = |e: String| {
            tracing::error!("persisting state failed: {e}");
            ApiError::new(500, format!("change applied but not persisted: {e}"))
        };
        if let Some(path) = &self.data_file {
            self.store.save(path).map_err(|e| fail(e.to_string()))?;
        }
        if let Some(path) = &self.agents_file {
            self.registry().save(path).map_err(|e| fail(e.to_string()))?;
        }
        Ok(())
    }

    // ---- authentication ----

    pub fn authenticate(&self, bearer: Option<&str>) -> Result<Agent, ApiError> {
        let token = bearer.ok_or_else(ApiError::unauthorized)?;
        self.registry().authenticate(token).ok_or_else(ApiError::unauthorized)
    }

    pub fn check_admin(&self, bearer: Option<&str>) -> Result<(), ApiError> {
        let Some(expected) = &self.admin_token_sha256 else {
            return Err(ApiError::forbidden("administration is disabled: no admin_token configured"));
        };
        match bearer {
            Some(t) if &hash_token(t) == expected => Ok(()),
            _ => Err(ApiError::unauthorized()),
        }
    }

    /// Authorize `agent` on the graph of owner `name`.
    pub fn access(&self, agent: &Agent, name: &str) -> Result<Access, ApiError> {
        let registry = self.registry();
        let owner = registry.owner(name).ok_or_else(|| ApiError::new(404, format!("unknown owner {name}")))?;
        match agent {
            Agent::Owner(n) if n == name => Ok(Access { agent: owner.agent.clone(), owner, caller: Caller::Owner }),
            Agent::Owner(_) => Err(ApiError::forbidden("owners may only act on their own graph")),
            Agent::Service(s) if registry.service_allowed(s, name) => {
                Ok(Access { owner, caller: Caller::Service(s.clone()), agent: s.clone() })
            }
            Agent::Service(_) => Err(ApiError::forbidden("service is not registered with this owner")),
        }
    }

    /// Local-owner access for the CLI, registering the owner if needed.
    pub fn local_access(&self, name: &str) -> Result<Access, ApiError> {
        if self.registry().owner(name).is_none() {
            self.register_owner(name)?;
        }
        self.access(&Agent::Owner(name.to_string()), name)
    }

    // ---- administration ----

    pub fn register_owner(&self, name: &str) -> Result<(Owner, String), ApiError> {
        let (owner, token) = self.registry.write().unwrap_or_else(|e| e.into_inner()).add_owner(name)?;
        self.store.register_graph(owner.graph.clone());
        self.persist()?;
        Ok((owner, token))
    }

    pub fn register_service(&self, id: Iri, owners: BTreeSet<String>) -> Result<String, ApiError> {
        let token = self.registry.write().unwrap_or_else(|e| e.into_inner()).add_service(id, owners)?;
        self.persist()?;
        Ok(token)
    }

    // ---- statements ----

    /// Annotate, resolve and execute one utterance.
    pub fn natural_language(&self, acc: &Access, text: &str) -> Result<NlResponse, ApiError> {
        let annotation = self.annotator.annotate(text);
        let as_json = |a: &AnnotatedUtterance| serde_json::to_value(a).unwrap_or(Value::Null);
        if annotation.intent == Intent::Unknown {
            let why = annotation.failure_reason.as_deref().unwrap_or("no supported intent recognized");
            return Err(ApiError::new(422, format!("UNKNOWN intent: {why}")).with_detail(as_json(&annotation)));
        }
        let violations = validate_annotation(&annotation);
        if !violations.is_empty() {
            let msg = violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ");
            return Err(ApiError::new(422, msg).with_detail(as_json(&annotation)));
        }
        let connector = self.connector();
        let table = connector.alias_table(&acc.owner)?;
        let (action, warnings) = match annotation.intent {
            Intent::Add => {
                let cx = StatementContext { owner: &acc.owner, agent: &acc.agent, clock: &*self.clock, ids: &*self.ids };
                let r = self.resolver.resolve(&annotation, &table, &cx).map_err(|e: ResolveError| {
                    ApiError::new(422, e.to_string()).with_detail(as_json(&annotation))
                })?;
                (PkgAction::Add(r.statement), r.warnings)
            }
            Intent::Get | Intent::Delete => {
                let (pattern, warnings) = self.resolver.resolve_pattern(&annotation, &table);
                let action = if annotation.intent == Intent::Get { PkgAction::Get(pattern) } else { PkgAction::Delete(pattern) };
                (action, warnings)
            }
            Intent::Unknown => unreachable!("handled above"),
        };
        let mutating = !matches!(action, PkgAction::Get(_));
        let action = connector.execute_action(action, &acc.owner, &acc.caller)?;
        if mutating {
            self.persist()?;
        }
        Ok(NlResponse { action, annotation, warnings })
    }

    /// The statement a draft describes, with fresh ids.
    pub fn statement_from_draft(&self, acc: &Access, draft: StatementDraft) -> PkgStatement {
        let owner = &acc.owner;
        let mut minted: BTreeMap<String, Iri> = BTreeMap::new();
        let mut element = |d: ElementDraft| match d {
            ElementDraft::Iri(iri) => SpoElement::Resolved(iri),
            ElementDraft::Concept(c) => {
                // Equal texts within one draft name one concept.
                let id = minted.entry(c.text.trim().to_lowercase()).or_insert_with(|| owner.mint("concept", &*self.ids)).clone();
                let mut concept = Concept::new(id, c.text.trim());
                concept.related = c.related;
                concept.broader = c.broader;
                concept.narrower = c.narrower;
                SpoElement::Concept(concept)
            }
        };
        let (subject, predicate, object) = (element(draft.subject), element(draft.predicate), element(draft.object));
        let id = owner.mint("stmt", &*self.ids);
        let preference = draft.preference.map(|p| Preference {
            id: owner.mint("pref", &*self.ids),
            holder: subject.node().clone(),
            topic: object.clone(),
            weight: p.weight,
            derived_from: id.clone(),
        });
        PkgStatement {
            id,
            annotation: draft.annotation.trim().to_string(),
            subject,
            predicate,
            object,
            preference,
            provenance: Provenance {
                created_by: acc.agent.clone(),
                created_on: self.clock.now(),
                derived_from: draft.provenance.derived_from,
            },
            access: draft.access,
        }
    }

    pub fn add_statement(&self, acc: &Access, draft: StatementDraft) -> Result<ActionResult, ApiError> {
        let stmt = self.statement_from_draft(acc, draft);
        let result = self.connector().execute_action(PkgAction::Add(stmt), &acc.owner, &acc.caller)?;
        self.persist()?;
        Ok(result)
    }

    pub fn find_statements(&self, acc: &Access, pattern: StatementPattern) -> Result<Vec<PkgStatement>, ApiError> {
        match self.connector().execute_action(PkgAction::Get(pattern), &acc.owner, &acc.caller)?.result {
            Outcome::Found { statements } => Ok(statements),
            other => Err(ApiError::new(500, format!("unexpected outcome {other:?}"))),
        }
    }

    pub fn get_statement(&self, acc: &Access, id: &str) -> Result<PkgStatement, ApiError> {
        let iri = statement_iri(&acc.owner, id)?;
        Ok(self.connector().get_statement(&acc.owner, &iri, &acc.caller)?)
    }

    pub fn delete_statement(&self, acc: &Access, id: &str) -> Result<ActionResult, ApiError> {
        let iri = statement_iri(&acc.owner, id)?;
        let result = self.connector().delete_statement(&acc.owner, &iri, &acc.caller)?;
        self.persist()?;
        Ok(result)
    }

    pub fn set_access(&self, acc: &Access, id: &str, policy: AccessPolicy) -> Result<PkgStatement, ApiError> {
        acc.require_owner("change access rights")?;
        let iri = statement_iri(&acc.owner, id)?;
        let stmt = self.connector().set_access(&acc.owner, &iri, policy, &acc.caller)?;
        self.persist()?;
        Ok(stmt)
    }

    pub fn preferences(&self, acc: &Access, topic: Option<&str>) -> Result<Vec<Preference>, ApiError> {
        Ok(self.connector().preferences(&acc.owner, topic, &acc.caller)?)
    }

    pub fn graph(&self, acc: &Access) -> Result<GraphView, ApiError> {
        Ok(self.connector().graph_view(&acc.owner, &acc.caller)?)
    }

    /// Turtle of everything the caller may read.
    pub fn export(&self, acc: &Access) -> Result<String, ApiError> {
        Ok(turtle::serialize(&self.connector().visible_quads(&acc.owner, &acc.caller)?))
    }

    pub fn add_alias(&self, acc: &Access, entry: &AliasEntry) -> Result<bool, ApiError> {
        acc.require_owner("edit aliases")?;
        let added = self.connector().add_alias(&acc.owner, &entry.alias, &entry.iri)?;
        if added {
            self.persist()?;
        }
        Ok(added)
    }

    pub fn aliases(&self, acc: &Access) -> Result<Vec<AliasEntry>, ApiError> {
        acc.require_owner("list aliases")?;
        let table = self.connector().alias_table(&acc.owner)?;
        Ok(table.entries().map(|(alias, iri)| AliasEntry { alias: alias.to_string(), iri: iri.clone() }).collect())
    }
}

/// `{id}` path segments: a full IRI, or the key of one minted in the
/// owner's namespace.
pub fn statement_iri(owner: &Owner, id: &str) -> Result<Iri, ApiError> {
    let id = id.trim();
    if id.contains(':') {
        return Iri::new(id).map_err(|e| ApiError::bad_request(e.to_string()));
    }
    if id.is_empty() || !id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
        return Err(ApiError::bad_request(format!("invalid statement id {id:?}")));
    }
    Ok(owner.skolem("stmt", id))
}

/// A query parameter as a match: `<iri>` binds an IRI, `*` or nothing is a
/// wildcard, anything else is text.
pub fn element_param(value: Option<&str>) -> Result<ElementMatch, ApiError> {
    match value.map(str::trim) {
        Some(v) if v.starts_with('<') => {
            let inner = v.strip_prefix('<').and_then(|v| v.strip_suffix('>')).ok_or_else(|| ApiError::bad_request(format!("unterminated IRI {v:?}")))?;
            Iri::new(inner).map(ElementMatch::Iri).map_err(|e| ApiError::bad_request(e.to_string()))
        }
        other => Ok(ElementMatch::from_param(other)),
    }
}
