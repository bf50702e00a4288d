//! SPARQL-subset text form.
//!
//! ```text
//! SELECT [DISTINCT] (?v ... | *) [WHERE] { GRAPH <g> { patterns [FILTER(?v = term)] } }
//! INSERT DATA { GRAPH <g> { ground triples } }
//! DELETE WHERE { GRAPH <g> { patterns } }
//! ```
//!
//! Any of them may be preceded by `PREFIX p: <iri>` declarations. Keywords are
//! case-insensitive; whitespace is insignificant.

use std::collections::BTreeSet;
use std::fmt::Write;

use crate::vocab::{ns, Iri, Quad, Term};

use super::lexer::{Parser, Pos, SyntaxError, Tok};
use super::pattern::{Filter, PatternTerm, SelectQuery, TriplePattern, UpdateQuery, Variable};
use super::turtle::{write_iri, write_term};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Query {
    Select(SelectQuery),
    Update(UpdateQuery),
}

pub fn parse(text: &str) -> Result<Query, SyntaxError> {
    let mut p = Parser::new(text)?;
    while p.eat_keyword("PREFIX") {
        p.prefix_decl()?;
    }
    let query = if p.eat_keyword("SELECT") {
        Query::Select(select(&mut p)?)
    } else if p.eat_keyword("INSERT") {
        p.expect_keyword("DATA")?;
        let mut quads = Vec::new();
        for (graph, body) in graph_blocks(&mut p)? {
            reject_filters(&body.filters)?;
            for (pattern, pos) in body.patterns {
                quads.push(ground(pattern, &graph).ok_or_else(|| pos.error("INSERT DATA requires ground triples"))?);
            }
        }
        Query::Update(UpdateQuery::InsertData(quads))
    } else if p.eat_keyword("DELETE") {
        p.expect_keyword("WHERE")?;
        let (graph, body) = graph_block(&mut p)?;
        reject_filters(&body.filters)?;
        Query::Update(UpdateQuery::DeleteWhere {
            graph,
            patterns: body.patterns.into_iter().map(|(pattern, _)| pattern).collect(),
        })
    } else {
        return Err(p.error(format!("expected SELECT, INSERT DATA or DELETE WHERE{}", p.found())));
    };
    if !p.at_end() {
        return Err(p.error(format!("unexpected trailing input{}", p.found())));
    }
    Ok(query)
}

fn reject_filters(filters: &[(Filter, Pos)]) -> Result<(), SyntaxError> {
    match filters.first() {
        Some((_, pos)) => Err(pos.error("FILTER is only allowed in SELECT")),
        None => Ok(()),
    }
}

fn ground(pattern: TriplePattern, graph: &Iri) -> Option<Quad> {
    let take = |t: PatternTerm| match t {
        PatternTerm::Term(t) => Some(t),
        PatternTerm::Var(_) => None,
    };
    let predicate = take(pattern.predicate)?.as_iri()?.clone();
    Quad::new(graph.clone(), take(pattern.subject)?, predicate, take(pattern.object)?).ok()
}

fn select(p: &mut Parser) -> Result<SelectQuery, SyntaxError> {
    p.eat_keyword("DISTINCT");
    let mut projection = Vec::new();
    let star = p.eat_punct('*');
    if !star {
        while let Some(Tok::Var(_)) = p.peek() {
            let (Tok::Var(name), pos) = p.next()? else { unreachable!() };
            let v = Variable::new(name).map_err(|e| pos.error(e.to_string()))?;
            if !projection.contains(&v) {
                projection.push(v);
            }
        }
        if projection.is_empty() {
            return Err(p.error(format!("expected projected variables or '*'{}", p.found())));
        }
    }
    p.eat_keyword("WHERE");
    let pos = p.pos();
    let (graph, body) = graph_block(p)?;
    let patterns: Vec<TriplePattern> = body.patterns.into_iter().map(|(t, _)| t).collect();
    if star {
        projection = SelectQuery::pattern_variables(&patterns);
    }
    let query = SelectQuery {
        projection,
        graph,
        patterns,
        filters: body.filters.into_iter().map(|(f, _)| f).collect(),
    };
    query.validate().map_err(|e| pos.error(e.to_string()))?;
    Ok(query)
}

struct Body {
    patterns: Vec<(TriplePattern, Pos)>,
    filters: Vec<(Filter, Pos)>,
}

/// `{ GRAPH <g> { ... } }`
fn graph_block(p: &mut Parser) -> Result<(Iri, Body), SyntaxError> {
    let pos = p.pos();
    let mut blocks = graph_blocks(p)?;
    if blocks.len() != 1 {
        return Err(pos.error("exactly one GRAPH block expected"));
    }
    Ok(blocks.remove(0))
}

/// `{ GRAPH <g> { ... } ... }`
fn graph_blocks(p: &mut Parser) -> Result<Vec<(Iri, Body)>, SyntaxError> {
    p.expect_punct('{')?;
    let mut blocks = Vec::new();
    while !p.eat_punct('}') {
        p.expect_keyword("GRAPH")?;
        blocks.push(graph_body(p)?);
    }
    Ok(blocks)
}

fn graph_body(p: &mut Parser) -> Result<(Iri, Body), SyntaxError> {
    let graph = p.iri(false)?;
    p.expect_punct('{')?;
    let mut body = Body {
        patterns: Vec::new(),
        filters: Vec::new(),
    };
    loop {
        if p.eat_punct('}') {
            break;
        }
        if p.eat_punct('.') {
            continue;
        }
        let pos = p.pos();
        if p.eat_keyword("FILTER") {
            body.filters.push((filter(p)?, pos));
        } else {
            triples_block(p, &mut body.patterns)?;
            if !(p.is_punct('.') || p.is_punct('}') || p.is_keyword("FILTER")) {
                return Err(p.error(format!("expected '.' or '}}'{}", p.found())));
            }
        }
    }
    Ok((graph, body))
}

fn filter(p: &mut Parser) -> Result<Filter, SyntaxError> {
    p.expect_punct('(')?;
    let (lhs, lpos) = p.next()?;
    p.expect_punct('=')?;
    let (rhs, rpos) = p.next()?;
    let filter = match (lhs, rhs) {
        (Tok::Var(v), other) => Filter {
            variable: Variable::new(v).map_err(|e| lpos.error(e.to_string()))?,
            value: p.term_from(other, rpos)?,
        },
        (other, Tok::Var(v)) => Filter {
            variable: Variable::new(v).map_err(|e| rpos.error(e.to_string()))?,
            value: p.term_from(other, lpos)?,
        },
        _ => return Err(lpos.error("FILTER must compare a variable with a term")),
    };
    p.expect_punct(')')?;
    Ok(filter)
}

fn pattern_term(p: &mut Parser, position: &str) -> Result<PatternTerm, SyntaxError> {
    let (tok, pos) = p.next()?;
    match tok {
        Tok::Var(v) => Variable::new(v).map(PatternTerm::Var).map_err(|e| pos.error(e.to_string())),
        Tok::Word(w) if position == "predicate" && w == "a" => {
            Ok(PatternTerm::Term(Term::iri(Iri::new(ns::rdf::TYPE).expect("constant"))))
        }
        other => {
            let term = p.term_from(other, pos)?;
            match position {
                "subject" if term.is_literal() => Err(pos.error("literal in subject position")),
                "predicate" if term.is_literal() => Err(pos.error("literal in predicate position")),
                _ => Ok(PatternTerm::Term(term)),
            }
        }
    }
}

fn triples_block(p: &mut Parser, out: &mut Vec<(TriplePattern, Pos)>) -> Result<(), SyntaxError> {
    let pos = p.pos();
    let subject = pattern_term(p, "subject")?;
    loop {
        let predicate = pattern_term(p, "predicate")?;
        loop {
            let object = pattern_term(p, "object")?;
            out.push((TriplePattern::new(subject.clone(), predicate.clone(), object), pos));
            if !p.eat_punct(',') {
                break;
            }
        }
        if !p.eat_punct(';') {
            return Ok(());
        }
        while p.eat_punct(';') {}
        if p.is_punct('.') || p.is_punct('}') {
            return Ok(());
        }
    }
}

fn iris_of<'a>(terms: impl IntoIterator<Item = &'a Term>, acc: &mut BTreeSet<&'static str>) {
    for t in terms {
        let iri = match t {
            Term::Iri(i) | Term::Skolem(i) => i,
            Term::Literal(l) => {
                if !l.is_plain() && l.language().is_none() {
                    l.datatype()
                } else {
                    continue;
                }
            }
        };
        if let Some((prefix, _)) = ns::compact(iri.as_str()) {
            acc.insert(prefix);
        }
    }
}

fn prologue(used: &BTreeSet<&'static str>) -> String {
    let mut out = String::new();
    for (prefix, ns) in ns::PREFIXES {
        if used.contains(prefix) {
            let _ = writeln!(out, "PREFIX {prefix}: <{ns}>");
        }
    }
    out
}

fn write_pattern_term(out: &mut String, t: &PatternTerm, predicate: bool) {
    match t {
        PatternTerm::Var(v) => {
            let _ = write!(out, "{v}");
        }
        PatternTerm::Term(t) if predicate && t.as_iri().is_some_and(|i| i.as_str() == ns::rdf::TYPE) => out.push('a'),
        PatternTerm::Term(t) => write_term(out, t),
    }
}

fn write_patterns(out: &mut String, patterns: &[TriplePattern]) {
    for p in patterns {
        out.push_str("    ");
        write_pattern_term(out, &p.subject, false);
        out.push(' ');
        write_pattern_term(out, &p.predicate, true);
        out.push(' ');
        write_pattern_term(out, &p.object, false);
        out.push_str(" .\n");
    }
}

fn pattern_terms(patterns: &[TriplePattern]) -> impl Iterator<Item = &Term> {
    patterns.iter().flat_map(|p| {
        p.terms().into_iter().filter_map(|t| match t {
            PatternTerm::Term(t) => Some(t),
            PatternTerm::Var(_) => None,
        })
    })
}

pub fn select_to_string(q: &SelectQuery) -> String {
    let mut used = BTreeSet::new();
    iris_of(pattern_terms(&q.patterns), &mut used);
    iris_of(q.filters.iter().map(|f| &f.value), &mut used);
    let mut out = prologue(&used);
    out.push_str("SELECT");
    for v in &q.projection {
        let _ = write!(out, " {v}");
    }
    if q.projection.is_empty() {
        out.push_str(" *");
    }
    out.push_str(" WHERE {\n  GRAPH ");
    write_iri(&mut out, &q.graph);
    out.push_str(" {\n");
    write_patterns(&mut out, &q.patterns);
    for f in &q.filters {
        let _ = write!(out, "    FILTER({} = ", f.variable);
        write_term(&mut out, &f.value);
        out.push_str(")\n");
    }
    out.push_str("  }\n}");
    out
}

pub fn update_to_string(u: &UpdateQuery) -> String {
    match u {
        UpdateQuery::InsertData(quads) => {
            let mut used = BTreeSet::new();
            iris_of(quads.iter().flat_map(|q| [&q.subject, &q.object]), &mut used);
            let preds: Vec<Term> = quads.iter().map(|q| Term::iri(q.predicate.clone())).collect();
            iris_of(&preds, &mut used);
            let mut out = prologue(&used);
            // One GRAPH block per run of quads sharing a graph.
            out.push_str("INSERT DATA {\n");
            for run in quads.chunk_by(|a, b| a.graph == b.graph) {
                out.push_str("  GRAPH ");
                write_iri(&mut out, &run[0].graph);
                out.push_str(" {\n");
                let patterns: Vec<TriplePattern> = run
                    .iter()
                    .map(|q| TriplePattern::new(q.subject.clone(), Term::iri(q.predicate.clone()), q.object.clone()))
                    .collect();
                write_patterns(&mut out, &patterns);
                out.push_str("  }\n");
            }
            out.push('}');
            out
        }
        UpdateQuery::DeleteWhere { graph, patterns } => {
            let mut used = BTreeSet::new();
            iris_of(pattern_terms(patterns), &mut used);
            let mut out = prologue(&used);
            out.push_str("DELETE WHERE {\n  GRAPH ");
            write_iri(&mut out, graph);
            out.push_str(" {\n");
            write_patterns(&mut out, patterns);
            out.push_str("  }\n}");
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vocab::Literal;

    #[test]
    fn parses_select_with_filter() {
        let q = parse(
            "prefix rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#>
             select distinct ?st ?o where { graph <http://g> {
                ?st a rdf:Statement ; rdf:object ?o .
                filter(?o = \"x\"@en)
             } }",
        )
        .unwrap();
        let Query::Select(q) = q else { panic!() };
        assert_eq!(q.projection.len(), 2);
        assert_eq!(q.patterns.len(), 2);
        assert_eq!(q.filters[0].value, Term::literal(Literal::with_language("x", "en").unwrap()));
    }

    #[test]
    fn select_star_projects_pattern_variables() {
        let Query::Select(q) = parse("SELECT * { GRAPH <http://g> { ?a <http://p> ?b . ?b <http://p> ?a } }").unwrap()
        else {
            panic!()
        };
        assert_eq!(q.projection.iter().map(Variable::name).collect::<Vec<_>>(), ["a", "b"]);
    }

    #[test]
    fn rejects_bad_forms() {
        assert!(parse("SELECT ?x WHERE { GRAPH <http://g> { ?y <http://p> ?z } }").is_err());
        assert!(parse("INSERT DATA { GRAPH <http://g> { ?x <http://p> <http://o> } }").is_err());
        assert!(parse("DELETE WHERE { GRAPH <http://g> { \"s\" <http://p> ?o } }").is_err());
        assert!(parse("SELECT ?x WHERE { GRAPH <http://g> { ?x <http://p> ?o } } extra").is_err());
        assert!(parse("ASK { }").is_err());
        assert!(parse("").is_err());
    }

    #[test]
    fn round_trips_text() {
        let text = "SELECT ?s WHERE { GRAPH <http://g> { ?s <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://w3id.org/pkg/Preference> . ?s <http://w3id.org/pkg/weight> \"-1.0\"^^<http://www.w3.org/2001/XMLSchema#decimal> FILTER(?s = <http://x>) } }";
        let q = parse(text).unwrap();
        let Query::Select(sel) = &q else { panic!() };
        let printed = select_to_string(sel);
        assert!(printed.starts_with("PREFIX pkg:"), "{printed}");
        assert_eq!(parse(&printed).unwrap(), q);
    }

    #[test]
    fn update_text_round_trips() {
        let g = Iri::new("http://g").unwrap();
        let q = Quad::new(
            g.clone(),
            Term::iri(Iri::new("http://s").unwrap()),
            Iri::new(ns::dcterms::DESCRIPTION).unwrap(),
            Term::literal(Literal::string("I like \"cats\"\n")),
        )
        .unwrap();
        let ins = UpdateQuery::InsertData(vec![q]);
        assert_eq!(parse(&update_to_string(&ins)).unwrap(), Query::Update(ins));
        let del = UpdateQuery::DeleteWhere {
            graph: g,
            patterns: vec![TriplePattern::new(Iri::new("http://s").unwrap(), PatternTerm::var("p"), PatternTerm::var("o"))],
        };
        assert_eq!(parse(&update_to_string(&del)).unwrap(), Query::Update(del));
    }
}
