//! One named graph: a term dictionary plus SPO/POS/OSP permutation indexes,
//! and the basic-graph-pattern evaluator that runs over them.

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::vocab::{Iri, Quad, Term};

use super::pattern::{Binding, Filter, PatternTerm, QueryResults, SelectQuery, TriplePattern, Variable};

pub(crate) type TermId = u32;
pub(crate) type Triple = (TermId, TermId, TermId);

const UNBOUND: TermId = TermId::MAX;
const ID_MAX: TermId = TermId::MAX - 1;

/// How a SELECT is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    Sequential,
    /// Fan the join out over rayon once the first pattern yields enough
    /// partial solutions. Same as `Sequential` without the `parallel` feature.
    Parallel,
}

impl Default for ExecMode {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            ExecMode::Parallel
        } else {
            ExecMode::Sequential
        }
    }
}

/// Minimum number of first-pattern solutions before the join is split.
const PARALLEL_THRESHOLD: usize = 64;

#[derive(Debug, Clone, Default)]
pub struct Graph {
    terms: Vec<Term>,
    ids: HashMap<Term, TermId>,
    spo: BTreeSet<Triple>,
    pos: BTreeSet<Triple>,
    osp: BTreeSet<Triple>,
    pub(crate) revision: u64,
}

#[derive(Debug, Clone, Copy)]
enum Slot {
    Const(TermId),
    Var(usize),
}

/// A compiled BGP: variables in slot order and per-pattern slots in
/// evaluation order.
struct Plan {
    variables: Vec<Variable>,
    steps: Vec<[Slot; 3]>,
    seed: Vec<TermId>,
}

impl Graph {
    pub fn len(&self) -> usize {
        self.spo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spo.is_empty()
    }

    /// Store revision at which this graph last changed.
    pub fn revision(&self) -> u64 {
        self.revision
    }

    fn intern(&mut self, term: &Term) -> TermId {
        if let Some(&id) = self.ids.get(term) {
            return id;
        }
        let id = TermId::try_from(self.terms.len()).expect("term dictionary overflow");
        assert!(id < ID_MAX, "term dictionary overflow");
        self.terms.push(term.clone());
        self.ids.insert(term.clone(), id);
        id
    }

    fn lookup(&self, term: &Term) -> Option<TermId> {
        self.ids.get(term).copied()
    }

    fn term(&self, id: TermId) -> &Term {
        &self.terms[id as usize]
    }

    pub(crate) fn encode(&mut self, quad: &Quad) -> Triple {
        let p = Term::iri(quad.predicate.clone());
        (self.intern(&quad.subject), self.intern(&p), self.intern(&quad.object))
    }

    pub(crate) fn encode_existing(&self, quad: &Quad) -> Option<Triple> {
        let p = Term::iri(quad.predicate.clone());
        Some((self.lookup(&quad.subject)?, self.lookup(&p)?, self.lookup(&quad.object)?))
    }

    pub(crate) fn insert_ids(&mut self, t: Triple) -> bool {
        if !self.spo.insert(t) {
            return false;
        }
        let (s, p, o) = t;
        self.pos.insert((p, o, s));
        self.osp.insert((o, s, p));
        true
    }

    pub(crate) fn remove_ids(&mut self, t: Triple) -> bool {
        if !self.spo.remove(&t) {
            return false;
        }
        let (s, p, o) = t;
        self.pos.remove(&(p, o, s));
        self.osp.remove(&(o, s, p));
        true
    }

    pub fn contains(&self, quad: &Quad) -> bool {
        self.encode_existing(quad).is_some_and(|t| self.spo.contains(&t))
    }

    /// All triples of the graph as quads, in index order.
    pub fn quads(&self, graph: &Iri) -> Vec<Quad> {
        self.spo
            .iter()
            .map(|&(s, p, o)| Quad {
                graph: graph.clone(),
                subject: self.term(s).clone(),
                predicate: self.term(p).as_iri().expect("predicates are IRIs").clone(),
                object: self.term(o).clone(),
            })
            .collect()
    }

    fn scan(&self, s: Option<TermId>, p: Option<TermId>, o: Option<TermId>) -> Box<dyn Iterator<Item = Triple> + '_> {
        match (s, p, o) {
            (Some(s), Some(p), Some(o)) => Box::new(self.spo.get(&(s, p, o)).copied().into_iter()),
            (Some(s), Some(p), None) => Box::new(self.spo.range((s, p, 0)..=(s, p, ID_MAX)).copied()),
            (Some(s), None, None) => Box::new(self.spo.range((s, 0, 0)..=(s, ID_MAX, ID_MAX)).copied()),
            (None, Some(p), Some(o)) => {
                Box::new(self.pos.range((p, o, 0)..=(p, o, ID_MAX)).map(|&(p, o, s)| (s, p, o)))
            }
            (None, Some(p), None) => Box::new(self.pos.range((p, 0, 0)..=(p, ID_MAX, ID_MAX)).map(|&(p, o, s)| (s, p, o))),
            (None, None, Some(o)) => Box::new(self.osp.range((o, 0, 0)..=(o, ID_MAX, ID_MAX)).map(|&(o, s, p)| (s, p, o))),
            (Some(s), None, Some(o)) => Box::new(self.osp.range((o, s, 0)..=(o, s, ID_MAX)).map(|&(o, s, p)| (s, p, o))),
            (None, None, None) => Box::new(self.spo.iter().copied()),
        }
    }

    /// Compile patterns and equality filters. `None` when some ground term
    /// does not occur in the graph, so no solution can exist.
    fn plan(&self, patterns: &[TriplePattern], filters: &[Filter]) -> Option<Plan> {
        let variables = SelectQuery::pattern_variables(patterns);
        let slot_of = |v: &Variable| variables.iter().position(|x| x == v);
        let mut seed = vec![UNBOUND; variables.len()];
        for f in filters {
            let id = self.lookup(&f.value)?;
            // Filters on variables outside the pattern are rejected by validation.
            let slot = slot_of(&f.variable)?;
            if seed[slot] != UNBOUND && seed[slot] != id {
                return None;
            }
            seed[slot] = id;
        }
        let mut compiled = Vec::with_capacity(patterns.len());
        for p in patterns {
            let mut slots = [Slot::Var(0); 3];
            for (slot, term) in slots.iter_mut().zip(p.terms()) {
                *slot = match term {
                    PatternTerm::Term(t) => Slot::Const(self.lookup(t)?),
                    PatternTerm::Var(v) => Slot::Var(slot_of(v)?),
                };
            }
            compiled.push(slots);
        }

        // Greedy ordering: most bound positions first, ties keep query order.
        let mut bound: Vec<bool> = seed.iter().map(|&id| id != UNBOUND).collect();
        let mut steps = Vec::with_capacity(compiled.len());
        let mut remaining: Vec<[Slot; 3]> = compiled;
        while !remaining.is_empty() {
            let score = |slots: &[Slot; 3]| {
                slots
                    .iter()
                    .filter(|s| match s {
                        Slot::Const(_) => true,
                        Slot::Var(i) => bound[*i],
                    })
                    .count()
            };
            let best = (0..remaining.len())
                .max_by_key(|&i| (score(&remaining[i]), std::cmp::Reverse(i)))
                .expect("non-empty");
            let step = remaining.remove(best);
            for s in step {
                if let Slot::Var(i) = s {
                    bound[i] = true;
                }
            }
            steps.push(step);
        }
        Some(Plan { variables, steps, seed })
    }

    fn extend(&self, steps: &[[Slot; 3]], sol: &mut Vec<TermId>, out: &mut Vec<Vec<TermId>>) {
        let Some((step, rest)) = steps.split_first() else {
            out.push(sol.clone());
            return;
        };
        let key = |slot: &Slot| match *slot {
            Slot::Const(id) => Some(id),
            Slot::Var(i) => (sol[i] != UNBOUND).then_some(sol[i]),
        };
        let (ks, kp, ko) = (key(&step[0]), key(&step[1]), key(&step[2]));
        let mut newly = [usize::MAX; 3];
        for (s, p, o) in self.scan(ks, kp, ko) {
            let mut ok = true;
            let mut n = 0;
            for (slot, value) in step.iter().zip([s, p, o]) {
                if let Slot::Var(i) = *slot {
                    if sol[i] == UNBOUND {
                        sol[i] = value;
                        newly[n] = i;
                        n += 1;
                    } else if sol[i] != value {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                self.extend(rest, sol, out);
            }
            for &i in &newly[..n] {
                sol[i] = UNBOUND;
            }
        }
    }

    /// All complete solutions of the BGP, as slot vectors over the plan's variables.
    fn solve(&self, patterns: &[TriplePattern], filters: &[Filter], mode: ExecMode) -> (Vec<Variable>, Vec<Vec<TermId>>) {
        let Some(plan) = self.plan(patterns, filters) else {
            return (SelectQuery::pattern_variables(patterns), Vec::new());
        };
        let mut seed = plan.seed.clone();
        let solutions = match (mode, plan.steps.split_first()) {
            (ExecMode::Parallel, Some((first, rest))) if cfg!(feature = "parallel") => {
                let mut firsts = Vec::new();
                self.extend(std::slice::from_ref(first), &mut seed, &mut firsts);
                if firsts.len() < PARALLEL_THRESHOLD {
                    let mut out = Vec::new();
                    for mut sol in firsts {
                        self.extend(rest, &mut sol, &mut out);
                    }
                    out
                } else {
                    self.extend_parallel(rest, firsts)
                }
            }
            _ => {
                let mut out = Vec::new();
                self.extend(&plan.steps, &mut seed, &mut out);
                out
            }
        };
        (plan.variables, solutions)
    }

    #[cfg(feature = "parallel")]
    fn extend_parallel(&self, rest: &[[Slot; 3]], firsts: Vec<Vec<TermId>>) -> Vec<Vec<TermId>> {
        use rayon::prelude::*;
        firsts
            .into_par_iter()
            .flat_map_iter(|mut sol| {
                let mut out = Vec::new();
                self.extend(rest, &mut sol, &mut out);
                out
            })
            .collect()
    }

    #[cfg(not(feature = "parallel"))]
    fn extend_parallel(&self, rest: &[[Slot; 3]], firsts: Vec<Vec<TermId>>) -> Vec<Vec<TermId>> {
        let mut out = Vec::new();
        for mut sol in firsts {
            self.extend(rest, &mut sol, &mut out);
        }
        out
    }

    /// Every triple unifying with `pattern`, as variable bindings.
    pub fn match_pattern(&self, pattern: &TriplePattern) -> Vec<Binding> {
        let (vars, sols) = self.solve(std::slice::from_ref(pattern), &[], ExecMode::Sequential);
        sols.into_iter()
            .map(|sol| {
                vars.iter()
                    .zip(sol)
                    .map(|(v, id)| (v.clone(), self.term(id).clone()))
                    .collect()
            })
            .collect()
    }

    /// Evaluate a validated SELECT. Rows are distinct and sorted by the
    /// serialization of their terms.
    pub fn select(&self, query: &SelectQuery, mode: ExecMode) -> QueryResults {
        let (vars, sols) = self.solve(&query.patterns, &query.filters, mode);
        let columns: Vec<usize> = query
            .projection
            .iter()
            .map(|v| vars.iter().position(|x| x == v).expect("validated projection"))
            .collect();
        let distinct: HashSet<Vec<TermId>> = sols
            .into_iter()
            .map(|sol| columns.iter().map(|&c| sol[c]).collect())
            .collect();
        let mut keyed: Vec<(Vec<String>, Vec<Term>)> = distinct
            .into_iter()
            .map(|ids| {
                let row: Vec<Term> = ids.into_iter().map(|id| self.term(id).clone()).collect();
                (row.iter().map(ToString::to_string).collect(), row)
            })
            .collect();
        keyed.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        QueryResults {
            variables: query.projection.clone(),
            rows: keyed.into_iter().map(|(_, row)| row).collect(),
        }
    }

    /// Triples produced by instantiating the patterns with every solution.
    pub(crate) fn delete_targets(&self, patterns: &[TriplePattern]) -> BTreeSet<Triple> {
        let Some(plan) = self.plan(patterns, &[]) else {
            return BTreeSet::new();
        };
        let (_, sols) = self.solve(patterns, &[], ExecMode::Sequential);
        // plan.steps is reordered, so recompile in query order for instantiation.
        let slot_of = |v: &Variable| plan.variables.iter().position(|x| x == v).expect("planned");
        let ordered: Vec<[Option<TermId>; 3]> = patterns
            .iter()
            .map(|p| {
                p.terms().map(|t| match t {
                    PatternTerm::Term(t) => self.lookup(t),
                    PatternTerm::Var(_) => None,
                })
            })
            .collect();
        let mut out = BTreeSet::new();
        for sol in &sols {
            for (p, consts) in patterns.iter().zip(&ordered) {
                let mut ids = [0; 3];
                for (k, t) in p.terms().into_iter().enumerate() {
                    ids[k] = match t {
                        PatternTerm::Var(v) => sol[slot_of(v)],
                        PatternTerm::Term(_) => consts[k].expect("planned constants exist"),
                    };
                }
                out.insert((ids[0], ids[1], ids[2]));
            }
        }
        out
    }
}
