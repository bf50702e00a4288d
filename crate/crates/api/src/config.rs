//! TOML configuration.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context};
use serde::Deserialize;

use pkg_core::linking::{LinkerConfig, LinkerFormat};
use pkg_core::nl2pkg::ModelConfig;
use pkg_core::vocab::Iri;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnnotatorKind {
    Rule,
    Model,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub listen: SocketAddr,
    /// Owner agent IRIs are `{base_iri}{name}`.
    pub base_iri: String,
    /// N-Quads file holding every graph; agents go to `<stem>.agents.json`.
    pub data_file: Option<PathBuf>,
    pub admin_token: Option<String>,
    pub annotator: AnnotatorKind,
    pub lexicon_dir: Option<PathBuf>,
    pub prompt_dir: Option<PathBuf>,
    pub model: ModelSection,
    pub linker: LinkerSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub endpoint: String,
    pub name: String,
    pub timeout_secs: u64,
    pub max_in_flight: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinkerSection {
    /// No endpoint: only the personal alias table links.
    pub endpoint: Option<String>,
    pub format: String,
    pub threshold: f64,
    pub timeout_secs: u64,
    pub max_in_flight: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            listen: "127.0.0.1:8080".parse().expect("valid address"),
            base_iri: "http://localhost:8080/pkg/".into(),
            data_file: None,
            admin_token: None,
            annotator: AnnotatorKind::Rule,
            lexicon_dir: None,
            prompt_dir: None,
            model: ModelSection::default(),
            linker: LinkerSection::default(),
        }
    }
}

impl Default for ModelSection {
    fn default() -> Self {
        let d = ModelConfig::default();
        ModelSection {
            endpoint: d.endpoint,
            name: d.model,
            timeout_secs: d.timeout.as_secs(),
            max_in_flight: d.max_in_flight,
        }
    }
}

impl Default for LinkerSection {
    fn default() -> Self {
        LinkerSection { endpoint: None, format: "generic".into(), threshold: 0.5, timeout_secs: 10, max_in_flight: 8 }
    }
}

impl Config {
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let config: Config = toml::from_str(text)?;
        config.check()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Config::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    fn check(&self) -> anyhow::Result<()> {
        if !(0.0..=1.0).contains(&self.linker.threshold) {
            bail!("linker.threshold must lie in [0, 1]");
        }
        self.linker_format()?;
        Iri::new(format!("{}x", self.base_iri)).context("base_iri")?;
        if self.admin_token.as_deref().is_some_and(|t| t.trim().len() < 8) {
            bail!("admin_token must have at least 8 characters");
        }
        Ok(())
    }

    pub fn linker_format(&self) -> anyhow::Result<LinkerFormat> {
        self.linker.format.parse().map_err(anyhow::Error::msg)
    }

    pub fn model_config(&self) -> ModelConfig {
        ModelConfig {
            endpoint: self.model.endpoint.clone(),
            model: self.model.name.clone(),
            timeout: Duration::from_secs(self.model.timeout_secs),
            max_in_flight: self.model.max_in_flight,
        }
    }

    pub fn linker_config(&self) -> Option<LinkerConfig> {
        let endpoint = self.linker.endpoint.clone()?;
        Some(LinkerConfig {
            endpoint,
            format: self.linker_format().ok()?,
            timeout: Duration::from_secs(self.linker.timeout_secs),
            max_in_flight: self.linker.max_in_flight,
        })
    }

    pub fn agents_file(&self) -> Option<PathBuf> {
        self.data_file.as_ref().map(|p| p.with_extension("agents.json"))
    }
}
