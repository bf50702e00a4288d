//! Line-based persistence: N-Quads, plus `#@graph <iri>` lines recording
//! registered graphs so that empty ones survive a reload.

use std::fmt::Write;

use crate::vocab::{Iri, Quad};

use super::lexer::{Parser, SyntaxError, Tok};

const GRAPH_MARK: &str = "#@graph ";

pub fn serialize(graphs: &[Iri], quads: &[Quad]) -> String {
    let mut out = String::new();
    for g in graphs {
        let _ = writeln!(out, "{GRAPH_MARK}<{g}>");
    }
    for q in quads {
        let _ = writeln!(out, "{q}");
    }
    out
}

pub fn parse(text: &str) -> Result<(Vec<Iri>, Vec<Quad>), SyntaxError> {
    let mut graphs = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if let Some(rest) = line.strip_prefix(GRAPH_MARK) {
            let mut p = Parser::new(rest).map_err(|e| SyntaxError { line: n + 1, ..e })?;
            let iri = p.iri(false).map_err(|e| SyntaxError { line: n + 1, ..e })?;
            graphs.push(iri);
        }
    }
    let mut p = Parser::new(text)?;
    let mut quads = Vec::new();
    while !p.at_end() {
        let pos = p.pos();
        let subject = match p.next()? {
            (tok @ Tok::IriRef(_), pos) => p.term_from(tok, pos)?,
            (other, pos) => return Err(pos.error(format!("expected subject IRI, found {other}"))),
        };
        let predicate = p.iri(false)?;
        let (tok, tpos) = p.next()?;
        let object = p.term_from(tok, tpos)?;
        let graph = p.iri(false)?;
        p.expect_punct('.')?;
        quads.push(Quad::new(graph, subject, predicate, object).map_err(|e| pos.error(e.to_string()))?);
    }
    Ok((graphs, quads))
}
