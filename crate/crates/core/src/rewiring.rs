//! Repair of multiset and duplicated hyperedges.
//!
//! Hyperedges that are proper sets and not yet seen go into the good set;
//! the rest queue up as bad. A bad hyperedge is merged with a random good
//! one, the pooled member slots are reshuffled into two hyperedges of the
//! original sizes, and the swap is kept only if it lowers the total
//! indisposition.

use std::collections::VecDeque;
use std::fmt;

use hashbrown::HashTable;
use rand::seq::SliceRandom;
use rand::Rng;
use rustc_hash::FxBuildHasher;
use serde::Serialize;
use std::hash::BuildHasher;

use crate::error::{Error, Result};
use crate::generation::{repeated_slots, Hyperedge};

/// Attempts allowed per initially bad hyperedge.
pub const REWIRE_MAX_ITER: usize = 100;

/// Distinct proper-set hyperedges with O(1) membership by member list.
#[derive(Default)]
pub struct GoodSet {
    edges: Vec<Hyperedge>,
    index: HashTable<usize>,
    hasher: FxBuildHasher,
}

impl fmt::Debug for GoodSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GoodSet")
            .field("edges", &self.edges)
            .finish()
    }
}

impl GoodSet {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn get(&self, i: usize) -> &Hyperedge {
        &self.edges[i]
    }

    pub fn contains(&self, members: &[u32]) -> bool {
        let hash = self.hasher.hash_one(members);
        self.index
            .find(hash, |&i| self.edges[i].members == members)
            .is_some()
    }

    /// Adds `edge` unless an equal member list is already present.
    pub fn insert(&mut self, edge: Hyperedge) -> std::result::Result<(), Hyperedge> {
        if self.contains(&edge.members) {
            return Err(edge);
        }
        let hash = self.hasher.hash_one(&edge.members[..]);
        let idx = self.edges.len();
        self.edges.push(edge);
        let (edges, hasher) = (&self.edges, &self.hasher);
        self.index
            .insert_unique(hash, idx, |&i| hasher.hash_one(&edges[i].members[..]));
        Ok(())
    }

    pub fn swap_remove(&mut self, i: usize) -> Hyperedge {
        let hash = self.hasher.hash_one(&self.edges[i].members[..]);
        if let Ok(entry) = self.index.find_entry(hash, |&k| k == i) {
            entry.remove();
        }
        let last = self.edges.len() - 1;
        if i != last {
            let moved = self.hasher.hash_one(&self.edges[last].members[..]);
            if let Some(slot) = self.index.find_mut(moved, |&k| k == last) {
                *slot = i;
            }
        }
        self.edges.swap_remove(i)
    }

    pub fn into_edges(self) -> Vec<Hyperedge> {
        self.edges
    }
}

/// Repeated member slots plus one if the member list is already good.
pub fn indisposition(members: &[u32], good: &GoodSet) -> usize {
    repeated_slots(members) + usize::from(good.contains(members))
}

/// Working state of one repair run.
#[derive(Debug, Default)]
pub struct RepairState {
    pub good: GoodSet,
    pub bad: VecDeque<Hyperedge>,
    pub iterations_used: usize,
}

impl RepairState {
    pub fn new(edges: Vec<Hyperedge>) -> Self {
        let mut state = Self::default();
        for e in edges {
            if e.repeated_slots() > 0 {
                state.bad.push_back(e);
            } else if let Err(e) = state.good.insert(e) {
                state.bad.push_back(e);
            }
        }
        state
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RewireWarning {
    pub unrepaired: usize,
    pub iterations: usize,
}

impl fmt::Display for RewireWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "rewiring gave up after {} iterations with {} hyperedges still not simple",
            self.iterations, self.unrepaired
        )
    }
}

#[derive(Debug, Clone)]
pub struct RewireOutcome {
    pub edges: Vec<Hyperedge>,
    pub initial_bad: usize,
    pub iterations: usize,
    pub unrepaired: usize,
}

impl RewireOutcome {
    pub fn warning(&self) -> Option<RewireWarning> {
        (self.unrepaired > 0).then_some(RewireWarning {
            unrepaired: self.unrepaired,
            iterations: self.iterations,
        })
    }
}

/// Repairs `edges` into a simple hypergraph, giving up after
/// [`REWIRE_MAX_ITER`] attempts per initially bad hyperedge. Leftover bad
/// hyperedges are returned (after the good ones) and reported through
/// [`RewireOutcome::warning`].
pub fn rewire<R: Rng + ?Sized>(edges: Vec<Hyperedge>, rng: &mut R) -> Result<RewireOutcome> {
    let mut state = RepairState::new(edges);
    let initial_bad = state.bad.len();
    let budget = REWIRE_MAX_ITER * initial_bad;
    let mut merged = Vec::new();

    while let Some(b) = state.bad.pop_front() {
        let cost = indisposition(&b.members, &state.good);
        if cost == 0 {
            state
                .good
                .insert(b)
                .expect("zero indisposition means absent");
            continue;
        }
        if state.iterations_used >= budget {
            state.bad.push_front(b);
            break;
        }
        if state.good.is_empty() {
            return Err(Error::Unrepairable {
                bad: state.bad.len() + 1,
            });
        }
        state.iterations_used += 1;

        let gi = rng.gen_range(0..state.good.len());
        let g = state.good.get(gi);
        merged.clear();
        merged.extend_from_slice(&b.members);
        merged.extend_from_slice(&g.members);
        merged.shuffle(rng);
        let mut h1 = merged[..b.len()].to_vec();
        let mut h2 = merged[b.len()..].to_vec();
        h1.sort_unstable();
        h2.sort_unstable();

        // Collisions are judged against the good set without g.
        let collides = |h: &[u32]| h != g.members.as_slice() && state.good.contains(h);
        let cost1 = repeated_slots(&h1) + usize::from(collides(&h1));
        let cost2 = repeated_slots(&h2) + usize::from(collides(&h2) || (cost1 == 0 && h1 == h2));

        if cost1 + cost2 < cost {
            let g = state.good.swap_remove(gi);
            for h in [
                Hyperedge {
                    members: h1,
                    origin: b.origin,
                },
                Hyperedge {
                    members: h2,
                    origin: g.origin,
                },
            ] {
                if h.repeated_slots() > 0 {
                    state.bad.push_back(h);
                } else if let Err(h) = state.good.insert(h) {
                    state.bad.push_back(h);
                }
            }
        } else {
            state.bad.push_back(b);
        }
    }

    let unrepaired = state.bad.len();
    let iterations = state.iterations_used;
    let mut edges = state.good.into_edges();
    edges.extend(state.bad);
    Ok(RewireOutcome {
        edges,
        initial_bad,
        iterations,
        unrepaired,
    })
}
