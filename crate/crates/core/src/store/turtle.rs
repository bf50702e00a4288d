//! Turtle subset: prefix directives, IRIs, prefixed names, plain/typed/language
//! literals, `a`, predicate-object lists and object lists. Blank nodes and
//! collections are rejected; all engine nodes are skolem IRIs.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::vocab::{ns, Iri, Quad, Term};

use super::lexer::{Parser, SyntaxError, Tok};

/// Parse a Turtle document into quads of `graph`.
pub fn parse(text: &str, graph: &Iri) -> Result<Vec<Quad>, SyntaxError> {
    let mut p = Parser::new(text)?;
    let mut out = Vec::new();
    while !p.at_end() {
        if matches!(p.peek(), Some(Tok::AtKeyword(k)) if k == "prefix") {
            p.next()?;
            p.prefix_decl()?;
            p.expect_punct('.')?;
            continue;
        }
        if matches!(p.peek(), Some(Tok::AtKeyword(_))) || p.is_keyword("BASE") {
            return Err(p.error("base directives are not supported"));
        }
        if p.eat_keyword("PREFIX") {
            p.prefix_decl()?;
            continue;
        }
        triples(&mut p, graph, &mut out)?;
        p.expect_punct('.')?;
    }
    Ok(out)
}

fn triples(p: &mut Parser, graph: &Iri, out: &mut Vec<Quad>) -> Result<(), SyntaxError> {
    let (tok, pos) = p.next()?;
    let subject = match tok {
        Tok::IriRef(_) | Tok::PName(..) => Term::iri(p.iri_from(tok, pos, false)?),
        Tok::Punct('[') => return Err(pos.error("blank node property lists are not supported")),
        other => return Err(pos.error(format!("expected subject IRI, found {other}"))),
    };
    loop {
        let predicate = p.iri(true)?;
        loop {
            let (tok, pos) = p.next()?;
            let object = p.term_from(tok, pos)?;
            out.push(Quad {
                graph: graph.clone(),
                subject: subject.clone(),
                predicate: predicate.clone(),
                object,
            });
            if !p.eat_punct(',') {
                break;
            }
        }
        if !p.eat_punct(';') {
            return Ok(());
        }
        // Trailing ';' before '.' is allowed.
        while p.eat_punct(';') {}
        if p.is_punct('.') {
            return Ok(());
        }
    }
}

/// IRI in prefixed form when the namespace table covers it.
pub(crate) fn write_iri(out: &mut String, iri: &Iri) {
    match ns::compact(iri.as_str()) {
        Some((prefix, local)) => {
            let _ = write!(out, "{prefix}:{local}");
        }
        None => {
            let _ = write!(out, "<{iri}>");
        }
    }
}

pub(crate) fn write_term(out: &mut String, term: &Term) {
    match term {
        Term::Iri(iri) | Term::Skolem(iri) => write_iri(out, iri),
        Term::Literal(lit) => {
            out.push('"');
            let _ = crate::vocab::term_escape(out, lit.lexical());
            out.push('"');
            if let Some(lang) = lit.language() {
                let _ = write!(out, "@{lang}");
            } else if !lit.is_plain() {
                out.push_str("^^");
                write_iri(out, lit.datatype());
            }
        }
    }
}

/// Serialize quads (graph names ignored) with the fixed prefix table, grouped
/// by subject and predicate, in sorted order.
/// subject -> (term, predicate -> (iri, object -> term)), keyed by display form.
type Grouped<'a> = BTreeMap<String, (&'a Term, BTreeMap<String, (&'a Iri, BTreeMap<String, &'a Term>)>)>;

pub fn serialize(quads: &[Quad]) -> String {
    let mut out = String::new();
    for (prefix, ns) in ns::PREFIXES {
        let _ = writeln!(out, "@prefix {prefix}: <{ns}> .");
    }
    let mut grouped: Grouped = BTreeMap::new();
    for q in quads {
        let entry = grouped.entry(q.subject.to_string()).or_insert((&q.subject, BTreeMap::new()));
        // rdf:type first, as is customary.
        let pkey = if q.predicate.as_str() == ns::rdf::TYPE {
            String::new()
        } else {
            q.predicate.to_string()
        };
        entry
            .1
            .entry(pkey)
            .or_insert((&q.predicate, BTreeMap::new()))
            .1
            .insert(q.object.to_string(), &q.object);
    }
    for (subject, predicates) in grouped.values() {
        out.push('\n');
        write_term(&mut out, subject);
        let mut first = true;
        for (predicate, objects) in predicates.values() {
            out.push_str(if first { "\n    " } else { " ;\n    " });
            first = false;
            if predicate.as_str() == ns::rdf::TYPE {
                out.push('a');
            } else {
                write_iri(&mut out, predicate);
            }
            for (k, object) in objects.values().enumerate() {
                out.push_str(if k == 0 { " " } else { ", " });
                write_term(&mut out, object);
            }
        }
        out.push_str(" .\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vocab::Literal;

    fn g() -> Iri {
        Iri::new("http://g.example/").unwrap()
    }

    #[test]
    fn parses_lists_and_literals() {
        let doc = r#"
            @prefix ex: <http://ex.org/> .
            PREFIX xsd: <http://www.w3.org/2001/XMLSchema#>
            ex:a a ex:C ;
                ex:p "x", "y"@en-GB ;
                ex:q "1.5"^^xsd:decimal, 3 ;
                .
            <http://ex.org/b> ex:p ex:a .
        "#;
        let quads = parse(doc, &g()).unwrap();
        assert_eq!(quads.len(), 6);
        assert_eq!(quads[0].predicate.as_str(), ns::rdf::TYPE);
        assert_eq!(quads[2].object, Term::literal(Literal::with_language("y", "en-GB").unwrap()));
        assert_eq!(quads[3].object.as_literal().unwrap().datatype().as_str(), ns::xsd::DECIMAL);
        assert_eq!(quads[4].object.as_literal().unwrap().datatype().as_str(), ns::xsd::INTEGER);
    }

    #[test]
    fn undeclared_prefix_located() {
        let err = parse("@prefix ex: <http://ex.org/> .\nex:a foo:b ex:c .", &g()).unwrap_err();
        assert_eq!((err.line, err.column), (2, 6));
        assert!(err.message.contains("undeclared prefix"), "{}", err.message);
    }

    #[test]
    fn unsupported_constructs() {
        assert!(parse("<http://a> <http://b> [ <http://c> 1 ] .", &g()).is_err());
        assert!(parse("<http://a> <http://b> ( 1 2 ) .", &g()).is_err());
        assert!(parse("<http://a> <http://b> _:x .", &g()).is_err());
        assert!(parse("\"lit\" <http://b> <http://c> .", &g()).is_err());
        assert!(parse("<http://a> <http://b> <http://c>", &g()).is_err());
        assert!(parse("<rel> <http://b> <http://c> .", &g()).is_err());
    }

    #[test]
    fn serializer_round_trip() {
        let doc = r#"<http://ex.org/s> <http://ex.org/p> "tab\there \"q\" \u0001", "x"@fr, <http://w3id.org/pkg/a.b> ;
              <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://w3id.org/pkg/Preference> ."#;
        let quads = parse(doc, &g()).unwrap();
        let text = serialize(&quads);
        assert!(text.contains("a pkg:Preference"), "{text}");
        let mut again = parse(&text, &g()).unwrap();
        let mut orig = quads.clone();
        again.sort();
        orig.sort();
        assert_eq!(again, orig);
    }
}
