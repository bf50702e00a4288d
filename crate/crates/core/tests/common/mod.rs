//! Generators and brute-force oracles shared by the property tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use chrono::{TimeZone, Utc};
use proptest::prelude::*;
use proptest::sample::subsequence;

use pkg_core::store::{Filter, PatternTerm, SelectQuery, TriplePattern, Variable};
use pkg_core::vocab::{
    fixtures, AccessPolicy, Concept, Iri, Literal, PkgStatement, Preference, Provenance, Quad, SpoElement, Term,
};

pub fn iri(s: &str) -> Iri {
    Iri::new(s).unwrap()
}

/// Entities a statement may point at; disjoint from every minted id.
pub fn external_pool() -> Vec<Iri> {
    [
        "http://example.org/pkg/alice",
        "http://xmlns.com/foaf/0.1/knows",
        "http://example.org/pkg/vocab#like",
        "http://dbpedia.org/resource/Oppenheimer_(film)",
        "https://en.wikipedia.org/wiki/Stavanger",
        "urn:isbn:0451450523",
    ]
    .into_iter()
    .map(iri)
    .collect()
}

pub fn service_pool(n: usize) -> Vec<Iri> {
    (0..n).map(|i| iri(&format!("http://services.example/s{i}"))).collect()
}

/// Non-blank text, mostly words but sometimes arbitrary Unicode.
pub fn text() -> impl Strategy<Value = String> {
    prop_oneof![
        3 => "[A-Za-z][A-Za-z' ]{0,24}",
        1 => any::<String>(),
        1 => "[a-z]{1,5}[\"\\\\\n\t\r]{1,3}[a-z]{0,5}",
    ]
    .prop_filter("non-blank", |s| !s.trim().is_empty())
}

#[derive(Debug, Clone)]
enum Slot {
    Resolved(usize),
    Concept(usize),
}

fn slot() -> impl Strategy<Value = Slot> {
    prop_oneof![(0..6usize).prop_map(Slot::Resolved), (0..3usize).prop_map(Slot::Concept)]
}

fn concept_body(k: usize) -> impl Strategy<Value = (String, [Vec<usize>; 3])> {
    // Link targets: the external pool (0..6) or another concept slot (6..9).
    let targets: Vec<usize> = (0..9).filter(|&t| t != 6 + k).collect();
    let links = || subsequence(targets.clone(), 0..=2);
    (text(), [links(), links(), links()])
}

/// Random statements that pass validation: up to three concepts shared
/// between positions, optional preference, provenance and access rights.
pub fn statement() -> impl Strategy<Value = PkgStatement> {
    let concepts = (concept_body(0), concept_body(1), concept_body(2));
    (
        text(),
        [slot(), slot(), slot()],
        concepts,
        proptest::option::of(-1.0f64..=1.0),
        946_684_800i64..1_900_000_000,
        proptest::option::of(0..6usize),
        subsequence(service_pool(4), 0..=4),
        subsequence(service_pool(4), 0..=4),
        any::<u64>(),
    )
        .prop_map(|(annotation, slots, (c0, c1, c2), weight, secs, derived, read, write, tag)| {
            let owner = fixtures::owner();
            let pool = external_pool();
            let concept_ids: Vec<Iri> = (0..3).map(|k| owner.skolem("concept", &format!("c{k}-{tag}"))).collect();
            let target = |t: usize| if t < 6 { pool[t].clone() } else { concept_ids[t - 6].clone() };
            let bodies = [c0, c1, c2];
            let element = |s: &Slot| match s {
                Slot::Resolved(i) => SpoElement::Resolved(pool[*i].clone()),
                Slot::Concept(k) => {
                    let (text, [rel, bro, nar]) = &bodies[*k];
                    let mut c = Concept::new(concept_ids[*k].clone(), text.clone());
                    c.related = rel.iter().map(|&t| target(t)).collect();
                    c.broader = bro.iter().map(|&t| target(t)).collect();
                    c.narrower = nar.iter().map(|&t| target(t)).collect();
                    SpoElement::Concept(c)
                }
            };
            let [s, p, o] = slots.each_ref().map(element);
            let id = owner.skolem("stmt", &tag.to_string());
            let preference = weight.map(|w| Preference {
                id: owner.skolem("pref", &tag.to_string()),
                holder: s.node().clone(),
                topic: o.clone(),
                weight: if w == 0.0 { 0.0 } else { w },
                derived_from: id.clone(),
            });
            PkgStatement {
                id,
                annotation,
                subject: s,
                predicate: p,
                object: o,
                preference,
                provenance: Provenance {
                    created_by: owner.agent.clone(),
                    created_on: Utc.timestamp_opt(secs, 0).unwrap(),
                    derived_from: derived.map(|i| pool[i].clone()),
                },
                access: AccessPolicy { read: read.into_iter().collect(), write: write.into_iter().collect() },
            }
        })
}

/// Quad count from the statement's shape alone.
pub fn expected_quad_count(stmt: &PkgStatement) -> usize {
    let mut concepts: BTreeMap<&Iri, usize> = BTreeMap::new();
    for e in [&stmt.subject, &stmt.predicate, &stmt.object] {
        if let SpoElement::Concept(c) = e {
            concepts.insert(&c.id, c.related.len() + c.broader.len() + c.narrower.len());
        }
    }
    let core = 8;
    let derived = usize::from(stmt.provenance.derived_from.is_some());
    let access = stmt.access.read.len() + stmt.access.write.len();
    let concept_quads: usize = concepts.values().map(|links| 3 + links).sum();
    let preference = if stmt.preference.is_some() { 5 } else { 0 };
    core + derived + access + concept_quads + preference
}

// ---- query oracle ----

pub const VARS: [&str; 3] = ["a", "b", "c"];

pub fn term_pool() -> Vec<Term> {
    let mut out: Vec<Term> = (0..4).map(|i| Term::iri(iri(&format!("http://t.example/n{i}")))).collect();
    out.push(Term::iri(fixtures::owner().skolem("concept", "k")));
    out.push(Term::literal(Literal::string("x")));
    out.push(Term::literal(Literal::typed("1", iri("http://www.w3.org/2001/XMLSchema#integer"))));
    out
}

fn predicate_pool() -> Vec<Iri> {
    (0..3).map(|i| iri(&format!("http://t.example/p{i}"))).collect()
}

pub fn query_graph() -> Iri {
    iri("http://t.example/graph")
}

fn small_quad() -> impl Strategy<Value = Quad> {
    let terms = term_pool();
    let subjects: Vec<Term> = terms.iter().filter(|t| !t.is_literal()).cloned().collect();
    (proptest::sample::select(subjects), proptest::sample::select(predicate_pool()), proptest::sample::select(terms))
        .prop_map(|(s, p, o)| Quad::new(query_graph(), s, p, o).unwrap())
}

fn pattern_term(terms: Vec<Term>) -> impl Strategy<Value = PatternTerm> {
    prop_oneof![
        2 => proptest::sample::select(VARS.to_vec()).prop_map(PatternTerm::var),
        1 => proptest::sample::select(terms).prop_map(PatternTerm::Term),
    ]
}

fn triple_pattern() -> impl Strategy<Value = TriplePattern> {
    let preds: Vec<Term> = predicate_pool().into_iter().map(Term::iri).collect();
    (pattern_term(term_pool()), pattern_term(preds), pattern_term(term_pool()))
        .prop_map(|(s, p, o)| TriplePattern { subject: s, predicate: p, object: o })
}

/// A graph of up to 50 quads and a query with up to 3 patterns and at most
/// one filter, whose projection and filter use pattern variables only.
pub fn graph_and_query() -> impl Strategy<Value = (Vec<Quad>, SelectQuery)> {
    (
        proptest::collection::vec(small_quad(), 0..=50),
        proptest::collection::vec(triple_pattern(), 1..=3),
        any::<proptest::sample::Index>(),
        any::<u8>(),
        proptest::option::of((any::<proptest::sample::Index>(), proptest::sample::select(term_pool()))),
    )
        .prop_filter_map("patterns need a variable", |(quads, patterns, _, mask, filter)| {
            let vars = SelectQuery::pattern_variables(&patterns);
            if vars.is_empty() {
                return None;
            }
            let mut projection: Vec<Variable> =
                vars.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, v)| v.clone()).collect();
            if projection.is_empty() {
                projection.push(vars[0].clone());
            }
            let filters = filter
                .map(|(ix, value)| vec![Filter { variable: ix.get(&vars).clone(), value }])
                .unwrap_or_default();
            Some((quads, SelectQuery { projection, graph: query_graph(), patterns, filters }))
        })
}

/// Every assignment of graph terms to the query's variables, kept when all
/// instantiated patterns are in the graph and the filters hold.
pub fn brute_force_select(quads: &[Quad], q: &SelectQuery) -> BTreeSet<Vec<Term>> {
    let vars = SelectQuery::pattern_variables(&q.patterns);
    let triples: BTreeSet<(Term, Term, Term)> =
        quads.iter().map(|x| (x.subject.clone(), Term::iri(x.predicate.clone()), x.object.clone())).collect();
    let mut domain: BTreeSet<Term> = BTreeSet::new();
    for (s, p, o) in &triples {
        domain.extend([s.clone(), p.clone(), o.clone()]);
    }
    let domain: Vec<Term> = domain.into_iter().collect();
    let mut out = BTreeSet::new();
    if domain.is_empty() {
        return out;
    }
    let total = domain.len().pow(vars.len() as u32);
    for mut n in 0..total {
        let mut assignment: BTreeMap<&Variable, &Term> = BTreeMap::new();
        for v in &vars {
            assignment.insert(v, &domain[n % domain.len()]);
            n /= domain.len();
        }
        let resolve = |t: &PatternTerm| match t {
            PatternTerm::Var(v) => assignment[v].clone(),
            PatternTerm::Term(t) => t.clone(),
        };
        let holds = q
            .patterns
            .iter()
            .all(|p| triples.contains(&(resolve(&p.subject), resolve(&p.predicate), resolve(&p.object))));
        let passes = q.filters.iter().all(|f| assignment[&f.variable] == &f.value);
        if holds && passes {
            out.insert(q.projection.iter().map(|v| assignment[v].clone()).collect());
        }
    }
    out
}

/// Left-to-right nested loops over the raw quad list, no indexes.
pub fn nested_loop_select(quads: &[Quad], q: &SelectQuery) -> BTreeSet<Vec<Term>> {
    let mut partial: Vec<BTreeMap<Variable, Term>> = vec![BTreeMap::new()];
    for p in &q.patterns {
        let mut next = Vec::new();
        for b in &partial {
            for x in quads {
                let mut b = b.clone();
                let pred = Term::iri(x.predicate.clone());
                let ok = [(&p.subject, &x.subject), (&p.predicate, &pred), (&p.object, &x.object)].into_iter().all(
                    |(pt, t)| match pt {
                        PatternTerm::Term(c) => c == t,
                        PatternTerm::Var(v) => match b.get(v) {
                            Some(bound) => bound == t,
                            None => {
                                b.insert(v.clone(), t.clone());
                                true
                            }
                        },
                    },
                );
                if ok {
                    next.push(b);
                }
            }
        }
        partial = next;
    }
    partial
        .into_iter()
        .filter(|b| q.filters.iter().all(|f| b.get(&f.variable) == Some(&f.value)))
        .map(|b| q.projection.iter().map(|v| b[v].clone()).collect())
        .collect()
}

// ---- NLU corpus ----

pub struct Fixture {
    pub utterance: String,
    pub intent: pkg_core::Intent,
    pub polarity: Option<i8>,
}

pub fn nlu_corpus() -> Vec<Fixture> {
    include_str!("../data/nlu_corpus.tsv")
        .lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .map(|line| {
            let cols: Vec<&str> = line.split('\t').collect();
            assert_eq!(cols.len(), 3, "bad corpus line {line:?}");
            Fixture {
                utterance: cols[0].trim_matches('"').to_string(),
                intent: cols[1].parse().expect("intent"),
                polarity: match cols[2] {
                    "-" => None,
                    p => Some(p.parse().expect("polarity")),
                },
            }
        })
        .collect()
}

/// Names of the fixtures the rule annotator gets wrong, with the reason.
pub fn corpus_mismatches() -> Vec<String> {
    let mut out = Vec::new();
    for f in nlu_corpus() {
        let a = pkg_core::nl2pkg::rule_annotate(&f.utterance);
        if a.intent != f.intent {
            out.push(format!("{:?}: intent {} != {}", f.utterance, a.intent, f.intent));
            continue;
        }
        let got = a.preference_polarity.map(|p| p.value());
        if f.intent == pkg_core::Intent::Add && got != f.polarity {
            out.push(format!("{:?}: polarity {got:?} != {:?}", f.utterance, f.polarity));
        }
    }
    out
}

// ---- multi-statement graphs ----

pub const LABELS: [&str; 5] = ["jazz", "Tom Cruise", "horror films", "like", "JAZZ"];

/// Statements whose concepts carry no SKOS links and draw their labels
/// from a small pool, so that several statements share a concept.
pub fn shared_concept_statements(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<PkgStatement>> {
    proptest::collection::vec((statement(), [0..LABELS.len(), 0..LABELS.len(), 0..LABELS.len()]), n)
        .prop_map(|items| {
            items
                .into_iter()
                .map(|(mut s, labels)| {
                    let mut by_id: BTreeMap<Iri, String> = BTreeMap::new();
                    for (k, e) in [&mut s.subject, &mut s.predicate, &mut s.object].into_iter().enumerate() {
                        if let SpoElement::Concept(c) = e {
                            let label = by_id.entry(c.id.clone()).or_insert_with(|| LABELS[labels[k]].to_string());
                            *c = Concept::new(c.id.clone(), label.clone());
                        }
                    }
                    if let Some(p) = &mut s.preference {
                        p.topic = s.object.clone();
                    }
                    s
                })
                .collect::<Vec<_>>()
        })
        .prop_filter("distinct ids", |v| v.iter().map(|s| &s.id).collect::<BTreeSet<_>>().len() == v.len())
}

/// Concept labels a set of statements needs, case-folded.
pub fn labels_in_use<'a>(statements: impl IntoIterator<Item = &'a PkgStatement>) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for s in statements {
        for e in [&s.subject, &s.predicate, &s.object] {
            if let SpoElement::Concept(c) = e {
                out.insert(c.text.to_lowercase());
            }
        }
    }
    out
}

/// Statements with random read/write sets over `services` services.
pub fn policy_statements(services: usize) -> impl Strategy<Value = Vec<PkgStatement>> {
    let pool = service_pool(services);
    proptest::collection::vec(
        (statement(), subsequence(pool.clone(), 0..=services / 2), subsequence(pool, 0..=3)),
        1..=8,
    )
    .prop_map(|items| {
        items
            .into_iter()
            .map(|(mut s, read, write)| {
                s.access = AccessPolicy { read: read.into_iter().collect(), write: write.into_iter().collect() };
                s
            })
            .collect::<Vec<_>>()
    })
    .prop_filter("distinct ids", |v| v.iter().map(|s| &s.id).collect::<BTreeSet<_>>().len() == v.len())
}
