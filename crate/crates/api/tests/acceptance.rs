//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any
//! fails. Case counts and time limits are fixed here.

#[path = "../../core/tests/common/mod.rs"]
mod common;
mod support;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::http::StatusCode;
use chrono::{TimeZone, Utc};
use proptest::prelude::*;
use proptest::test_runner::{RngAlgorithm, TestCaseError, TestRng, TestRunner};

use pkg_api::registry::{Agent, Registry};
use pkg_api::Pkg;
use pkg_core::connector::{Caller, Connector, Outcome, PkgAction, StatementPattern};
use pkg_core::ids::FixedClock;
use pkg_core::linking::Resolver;
use pkg_core::nl2pkg::{rule_annotate, validate_annotation, RuleAnnotator};
use pkg_core::store::{sparql, turtle, ExecMode, QuadStore};
use pkg_core::vocab::{fixtures, ns, quads_to_statement, statement_to_quads, Iri, Literal, PkgStatement, Quad, SpoElement};
use pkg_core::Intent;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

const E2E_LIMIT: Duration = Duration::from_secs(1);
const ORACLE_CASES: u32 = 1000;
const ORACLE_LIMIT: Duration = Duration::from_secs(30);
const ROUND_TRIP_CASES: u32 = 500;
const POLICY_CASES: u32 = 200;
const SERVICES: usize = 20;
const FUZZ_CASES: u32 = 10_000;
const CASCADE_CASES: u32 = 100;

fn runner(cases: u32) -> TestRunner {
    let config = ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn ensure(cond: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what())
    }
}

fn runtime() -> tokio::runtime::Runtime {
    tokio::runtime::Builder::new_current_thread().enable_all().build().unwrap()
}

fn labels(quads: &[Quad], node: &Iri) -> Vec<String> {
    quads
        .iter()
        .filter(|q| q.subject.as_iri() == Some(node) && q.predicate.as_str() == ns::skos::PREF_LABEL)
        .filter_map(|q| q.object.as_literal().map(|l| l.lexical().to_string()))
        .collect()
}

fn e2e_tom_cruise() -> Check {
    let h = support::harness(support::empty_linker(), 0.5);
    let started = Instant::now();
    let (status, body) = runtime().block_on(h.nl("I dislike all movies with the actor Tom Cruise"));
    let elapsed = started.elapsed();
    ensure(status == StatusCode::OK, || format!("status {status}: {body}"))?;
    ensure(body["intent"] == "ADD", || format!("intent {}", body["intent"]))?;
    let store = h.pkg.store();
    let graph = &h.owner.graph;
    let statements = store.instances_of(graph, ns::rdf::STATEMENT);
    ensure(statements.len() == 1, || format!("{} statements", statements.len()))?;
    let quads = store.quads(graph).unwrap();
    let stmt = quads_to_statement(&quads, &statements[0]).map_err(|e| e.to_string())?;
    ensure(stmt.subject == SpoElement::Resolved(h.owner.agent.clone()), || format!("subject {:?}", stmt.subject))?;
    let concepts: BTreeSet<Iri> = store.instances_of(graph, ns::skos::CONCEPT).into_iter().collect();
    for (node, text) in [(stmt.predicate.node(), "dislike"), (stmt.object.node(), "all movies with the actor Tom Cruise")] {
        ensure(concepts.contains(node), || format!("{node} is not a skos:Concept"))?;
        ensure(labels(&quads, node) == [text], || format!("{node} labelled {:?}", labels(&quads, node)))?;
    }
    let prefs = store.instances_of(graph, ns::pkg::PREFERENCE_CLASS);
    ensure(prefs.len() == 1, || format!("{} preferences", prefs.len()))?;
    let weights: Vec<&str> = quads
        .iter()
        .filter(|q| q.predicate.as_str() == ns::pkg::WEIGHT)
        .filter_map(|q| q.object.as_literal().map(Literal::lexical))
        .collect();
    ensure(weights == ["-1.0"], || format!("weights {weights:?}"))?;
    ensure(elapsed < E2E_LIMIT, || format!("took {elapsed:?}"))?;
    Ok(format!("{:.1} ms < {E2E_LIMIT:?}", elapsed.as_secs_f64() * 1e3))
}

fn e2e_bob() -> Check {
    let mut seen = Vec::new();
    for (threshold, expect_iri) in [(0.5, true), (0.95, false)] {
        let h = support::harness(support::oppenheimer_linker(0.9), threshold);
        let (status, body) = runtime().block_on(h.nl("Bob likes Oppenheimer"));
        ensure(status == StatusCode::OK, || format!("status {status}: {body}"))?;
        ensure(body["intent"] == "ADD", || format!("intent {}", body["intent"]))?;
        let s = &body["result"]["statement"];
        ensure(s["subject"]["concept"]["text"] == "Bob", || format!("subject {}", s["subject"]))?;
        ensure(s["predicate"]["iri"] == ns::pkg::LIKE, || format!("predicate {}", s["predicate"]))?;
        ensure(s["preference"]["weight"] == 1.0, || format!("preference {}", s["preference"]))?;
        let object_ok = if expect_iri {
            s["object"]["iri"] == support::OPPENHEIMER
        } else {
            s["object"]["concept"]["text"] == "Oppenheimer"
        };
        ensure(object_ok, || format!("threshold {threshold}: object {}", s["object"]))?;
        seen.push(format!("{threshold}->{}", if expect_iri { "iri" } else { "concept" }));
    }
    Ok(format!("linker confidence 0.9; {}", seen.join(", ")))
}

fn oracle_equivalence() -> Check {
    let started = Instant::now();
    runner(ORACLE_CASES)
        .run(&common::graph_and_query(), |(quads, q)| {
            let store = QuadStore::new();
            store.register_graph(common::query_graph());
            store.insert(&quads).unwrap();
            let expected = common::brute_force_select(&quads, &q);
            for mode in [ExecMode::Sequential, ExecMode::Parallel] {
                let rows: BTreeSet<_> = store.execute_select_with(&q, mode).unwrap().rows.into_iter().collect();
                prop_assert_eq!(&rows, &expected, "{:?}", mode);
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();
    ensure(elapsed < ORACLE_LIMIT, || format!("took {elapsed:?}"))?;
    Ok(format!("{ORACLE_CASES} cases, both modes, {:.2} s < {ORACLE_LIMIT:?}", elapsed.as_secs_f64()))
}

fn round_trip() -> Check {
    runner(ROUND_TRIP_CASES)
        .run(&common::statement(), |stmt| {
            let graph = fixtures::graph();
            let quads = statement_to_quads(&stmt, &graph).map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert_eq!(quads.len(), common::expected_quad_count(&stmt));
            prop_assert_eq!(&quads_to_statement(&quads, &stmt.id).unwrap(), &stmt);
            let store = QuadStore::new();
            store.register_graph(graph.clone());
            store.insert(&quads).unwrap();
            let copy = QuadStore::new();
            copy.register_graph(graph.clone());
            copy.import_turtle(&graph, &store.export_turtle(&graph).unwrap()).unwrap();
            prop_assert_eq!(&quads_to_statement(&copy.quads(&graph).unwrap(), &stmt.id).unwrap(), &stmt);
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(format!("{ROUND_TRIP_CASES} statements, quads and Turtle"))
}

fn later_clock() -> Arc<FixedClock> {
    Arc::new(FixedClock(Utc.with_ymd_and_hms(2031, 1, 1, 0, 0, 0).unwrap()))
}

fn access_soundness() -> Check {
    runner(POLICY_CASES)
        .run(&common::policy_statements(SERVICES), |stmts| {
            let pkg = Pkg::new(
                QuadStore::new(),
                Registry::new("http://example.org/pkg/"),
                Arc::new(RuleAnnotator::default()),
                Resolver::default(),
            );
            let (owner, _) = pkg.register_owner("alice").unwrap();
            let connector = Connector::new(pkg.store()).with_clock(later_clock());
            for s in &stmts {
                connector.execute_action(PkgAction::Add(s.clone()), &owner, &Caller::Owner).unwrap();
            }
            let ids = |v: Vec<PkgStatement>| v.into_iter().map(|s| s.id).collect::<BTreeSet<Iri>>();
            let owner_acc = pkg.access(&Agent::Owner("alice".into()), "alice").unwrap();
            let all: BTreeSet<Iri> = stmts.iter().map(|s| s.id.clone()).collect();
            prop_assert_eq!(ids(pkg.find_statements(&owner_acc, StatementPattern::any()).unwrap()), all);
            prop_assert_eq!(
                pkg.preferences(&owner_acc, None).unwrap().len(),
                stmts.iter().filter(|s| s.preference.is_some()).count()
            );
            for svc in common::service_pool(SERVICES) {
                pkg.register_service(svc.clone(), ["alice".to_string()].into()).unwrap();
                let acc = pkg.access(&Agent::Service(svc.clone()), "alice").unwrap();
                let readable: BTreeSet<Iri> =
                    stmts.iter().filter(|s| s.access.read.contains(&svc)).map(|s| s.id.clone()).collect();
                let seen = ids(pkg.find_statements(&acc, StatementPattern::any()).unwrap());
                prop_assert!(seen.is_subset(&readable), "{} saw unreadable statements", svc);
                let prefs: BTreeSet<Iri> = pkg.preferences(&acc, None).unwrap().into_iter().map(|p| p.derived_from).collect();
                prop_assert!(prefs.is_subset(&readable), "{} saw unreadable preferences", svc);
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(format!("{POLICY_CASES} policy assignments x {SERVICES} services"))
}

fn nlu_corpus() -> Check {
    let corpus = common::nlu_corpus();
    ensure(corpus.len() >= 30, || format!("only {} fixtures", corpus.len()))?;
    for intent in [Intent::Add, Intent::Get, Intent::Delete, Intent::Unknown] {
        let n = corpus.iter().filter(|f| f.intent == intent).count();
        ensure(n >= 10, || format!("{n} {intent} fixtures"))?;
    }
    let misses = common::corpus_mismatches();
    ensure(misses.is_empty(), || misses.join("; "))?;
    let polar = corpus.iter().filter(|f| f.polarity.is_some()).count();
    Ok(format!("{} utterances, intents 100%, polarity 100% on {polar}", corpus.len()))
}

fn any_input() -> impl Strategy<Value = String> {
    prop_oneof![
        any::<String>(),
        prop::collection::vec(any::<u8>(), 0..256).prop_map(|b| String::from_utf8_lossy(&b).into_owned()),
    ]
}

fn fuzz() -> Check {
    let graph = Iri::new("http://g").unwrap();
    runner(FUZZ_CASES)
        .run(&any_input(), |raw| {
            let a = rule_annotate(&raw);
            prop_assert!(validate_annotation(&a).is_empty(), "invalid annotation for {:?}", raw);
            Ok(())
        })
        .map_err(|e| format!("rule_annotate: {e}"))?;
    runner(FUZZ_CASES)
        .run(&any_input(), |raw| {
            let _ = sparql::parse(&raw);
            Ok(())
        })
        .map_err(|e| format!("sparql: {e}"))?;
    runner(FUZZ_CASES)
        .run(&any_input(), |raw| {
            let _ = turtle::parse(&raw, &graph);
            Ok(())
        })
        .map_err(|e| format!("turtle: {e}"))?;
    Ok(format!("{FUZZ_CASES} inputs each for rule_annotate, SPARQL, Turtle"))
}

fn delete_cascade() -> Check {
    runner(CASCADE_CASES)
        .run(&(common::shared_concept_statements(2..=6), any::<prop::sample::Index>()), |(stmts, victim)| {
            let owner = fixtures::owner();
            let store = QuadStore::new();
            store.register_graph(owner.graph.clone());
            let c = Connector::new(&store).with_clock(later_clock());
            let mut stored = Vec::new();
            for s in &stmts {
                match c.execute_action(PkgAction::Add(s.clone()), &owner, &Caller::Owner).unwrap().result {
                    Outcome::Added { statement, .. } => stored.push(*statement),
                    other => return Err(TestCaseError::fail(format!("{other:?}"))),
                }
            }
            let gone = stored.remove(victim.index(stored.len()));
            c.delete_statement(&owner, &gone.id, &Caller::Owner).unwrap();
            let quads = store.quads(&owner.graph).unwrap();
            // Reference counts per concept label over the surviving statements.
            let concept_nodes: BTreeSet<Iri> = store.instances_of(&owner.graph, ns::skos::CONCEPT).into_iter().collect();
            let remaining: BTreeSet<String> =
                concept_nodes.iter().flat_map(|n| labels(&quads, n)).map(|l| l.to_lowercase()).collect();
            prop_assert_eq!(remaining, common::labels_in_use(&stored));
            let mut dead = vec![gone.id.clone()];
            dead.extend(gone.preference.iter().map(|p| p.id.clone()));
            for q in &quads {
                let touches = |iri: &Iri| q.subject.as_iri() == Some(iri) || q.object.as_iri() == Some(iri);
                prop_assert!(!dead.iter().any(touches), "leftover {}", q);
            }
            for s in &stored {
                prop_assert_eq!(&c.get_statement(&owner, &s.id, &Caller::Owner).unwrap(), s);
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(format!("{CASCADE_CASES} multi-statement graphs"))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("e2e-tom-cruise", e2e_tom_cruise),
        ("e2e-bob-oppenheimer", e2e_bob),
        ("query-oracle-equivalence", oracle_equivalence),
        ("round-trip", round_trip),
        ("access-soundness", access_soundness),
        ("nlu-corpus", nlu_corpus),
        ("fuzz", fuzz),
        ("delete-cascade", delete_cascade),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, check) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
