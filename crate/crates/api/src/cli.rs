//! Helpers behind the command-line subcommands.

use std::io::{BufRead, Write};

use serde_json::json;

use pkg_core::connector::StatementPattern;

use crate::service::{element_param, ApiError, Pkg};

/// `subject | predicate | object`, each `*`, empty, `<iri>` or text.
pub fn parse_pattern(text: &str) -> Result<StatementPattern, ApiError> {
    let parts: Vec<&str> = text.split('|').collect();
    let [s, p, o] = parts.as_slice() else {
        return Err(ApiError::bad_request("pattern must have three |-separated parts: subject | predicate | object"));
    };
    Ok(StatementPattern { subject: element_param(Some(s))?, predicate: element_param(Some(p))?, object: element_param(Some(o))? })
}

/// Whether a query argument is SPARQL text rather than an SPO pattern.
pub fn is_sparql(text: &str) -> bool {
    let head = text.split_whitespace().next().unwrap_or("").to_ascii_uppercase();
    matches!(head.as_str(), "SELECT" | "PREFIX" | "INSERT" | "DELETE")
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct IngestSummary {
    pub ok: usize,
    pub failed: usize,
}

/// Run every non-blank, non-`#` line through the NL pipeline as the owner,
/// writing one JSON object per line.
pub fn ingest(pkg: &Pkg, owner: &str, input: impl BufRead, mut out: impl Write) -> anyhow::Result<IngestSummary> {
    let acc = pkg.local_access(owner)?;
    let mut summary = IngestSummary::default();
    for (n, line) in input.lines().enumerate() {
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let record = match pkg.natural_language(&acc, text) {
            Ok(r) => {
                summary.ok += 1;
                json!({ "line": n + 1, "intent": r.action.intent, "result": r.action.result })
            }
            Err(e) => {
                summary.failed += 1;
                json!({ "line": n + 1, "status": e.status, "error": e.message })
            }
        };
        writeln!(out, "{record}")?;
    }
    Ok(summary)
}
