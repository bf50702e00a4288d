mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use chrono::{TimeZone, Utc};
use proptest::prelude::*;

use pkg_core::connector::{Caller, Connector, Outcome, PkgAction, StatementPattern};
use pkg_core::ids::FixedClock;
use pkg_core::store::QuadStore;
use pkg_core::vocab::{fixtures, Iri};

const SERVICES: usize = 20;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn reads_respect_policies(stmts in common::policy_statements(SERVICES)) {
        let owner = fixtures::owner();
        let store = QuadStore::new();
        store.register_graph(owner.graph.clone());
        let c = Connector::new(&store).with_clock(Arc::new(FixedClock(Utc.with_ymd_and_hms(2031, 1, 1, 0, 0, 0).unwrap())));
        for s in &stmts {
            c.execute_action(PkgAction::Add(s.clone()), &owner, &Caller::Owner).unwrap();
        }
        let all: BTreeSet<Iri> = stmts.iter().map(|s| s.id.clone()).collect();
        let get = |caller: &Caller| -> BTreeSet<Iri> {
            match c.execute_action(PkgAction::Get(StatementPattern::any()), &owner, caller).unwrap().result {
                Outcome::Found { statements } => statements.into_iter().map(|s| s.id).collect(),
                other => panic!("{other:?}"),
            }
        };
        let prefs = |caller: &Caller| -> BTreeSet<Iri> {
            c.preferences(&owner, None, caller).unwrap().into_iter().map(|p| p.derived_from).collect()
        };
        prop_assert_eq!(get(&Caller::Owner), all.clone());
        prop_assert_eq!(
            prefs(&Caller::Owner),
            stmts.iter().filter(|s| s.preference.is_some()).map(|s| s.id.clone()).collect::<BTreeSet<_>>()
        );
        for svc in common::service_pool(SERVICES) {
            let caller = Caller::Service(svc.clone());
            let readable: BTreeSet<Iri> =
                stmts.iter().filter(|s| s.access.read.contains(&svc)).map(|s| s.id.clone()).collect();
            let seen = get(&caller);
            prop_assert!(seen.is_subset(&readable), "{svc} saw {:?}", seen.difference(&readable).collect::<Vec<_>>());
            prop_assert_eq!(seen, readable.clone());
            prop_assert!(prefs(&caller).is_subset(&readable));
            let listed: BTreeSet<Iri> = c.statements(&owner, &caller).unwrap().into_iter().map(|s| s.id).collect();
            prop_assert!(listed.is_subset(&readable));
        }
    }
}
