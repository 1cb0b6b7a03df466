//! Hypergraph construction from degree profiles and a ground-truth
//! assignment.
//!
//! Every node owns `x` configuration-model points. Points are routed into
//! size-1 hyperedges, community hyperedges (owned by one community, which
//! holds a strict majority of their members) and background hyperedges
//! spread over the whole node set.

use std::time::{Duration, Instant};

use rand::seq::index::sample_weighted;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::assignment::{
    assign_communities, precompute_feasibility, split_degrees, CommunityAssignment, DegreeProfile,
};
use crate::config::{min_majority, GeneratorParams, WeightMatrix};
use crate::error::Result;
use crate::fenwick::WeightTree;
use crate::rewiring::{rewire, RewireWarning};
use crate::sampling::{sample_community_sizes, sample_degrees, stochastic_round, DegreeSequence};

/// The seeded generator used for every run.
pub type GenRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> GenRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Where a hyperedge came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EdgeOrigin {
    SizeOne,
    /// Owned by `community`; `nominal` members were drawn from its internal
    /// pool.
    Community {
        community: u32,
        nominal: u32,
    },
    Background,
    /// Read back from a file; provenance unknown.
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Hyperedge {
    /// Node indices in ascending order; repeats allowed before rewiring.
    pub members: Vec<u32>,
    pub origin: EdgeOrigin,
}

impl Hyperedge {
    pub fn new(mut members: Vec<u32>, origin: EdgeOrigin) -> Self {
        members.sort_unstable();
        Self { members, origin }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Number of member slots repeating an earlier slot.
    pub fn repeated_slots(&self) -> usize {
        repeated_slots(&self.members)
    }
}

pub(crate) fn repeated_slots(sorted: &[u32]) -> usize {
    sorted.windows(2).filter(|w| w[0] == w[1]).count()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Hypergraph {
    pub n: usize,
    pub edges: Vec<Hyperedge>,
}

impl Hypergraph {
    pub fn new(n: usize, edges: Vec<Hyperedge>) -> Self {
        Self { n, edges }
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Incidence counts, repeats included.
    pub fn degrees(&self) -> Vec<u64> {
        let mut deg = vec![0u64; self.n];
        for e in &self.edges {
            for &v in &e.members {
                deg[v as usize] += 1;
            }
        }
        deg
    }

    pub fn volume(&self) -> u64 {
        self.edges.iter().map(|e| e.len() as u64).sum()
    }

    pub fn max_edge_size(&self) -> usize {
        self.edges.iter().map(Hyperedge::len).max().unwrap_or(0)
    }

    /// Edge counts indexed by size.
    pub fn size_counts(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.max_edge_size() + 1];
        for e in &self.edges {
            counts[e.len()] += 1;
        }
        counts
    }
}

/// Edge counts allocated from a pool of points.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct EdgeBudget {
    /// Points the sizes were allocated from (after leftover handling).
    pub pool: u64,
    /// `by_size[d]` hyperedges of size `d`.
    pub by_size: Vec<u64>,
    /// `by_type[d][c - (d / 2 + 1)]` hyperedges of type `(c, d)`; empty for
    /// the background.
    pub by_type: Vec<Vec<u64>>,
}

impl EdgeBudget {
    pub fn volume(&self) -> u64 {
        self.by_size
            .iter()
            .enumerate()
            .map(|(d, &m)| d as u64 * m)
            .sum()
    }

    /// Points drawn from the owning community's internal pool.
    pub fn internal_points(&self) -> u64 {
        self.by_type
            .iter()
            .enumerate()
            .flat_map(|(d, row)| {
                row.iter()
                    .enumerate()
                    .map(move |(k, &m)| (min_majority(d) + k) as u64 * m)
            })
            .sum()
    }
}

/// Size-1 hyperedges. `x` loses one point per hyperedge through its node.
///
/// Multi mode picks nodes proportionally to remaining points; simple mode
/// picks distinct nodes proportionally to their points, and caps the count
/// at `n`.
pub fn generate_size_one<R: Rng + ?Sized>(
    params: &GeneratorParams,
    x: &mut [u32],
    rng: &mut R,
) -> Vec<Hyperedge> {
    let q1 = params.q_of(1);
    if q1 <= 0.0 {
        return Vec::new();
    }
    let volume: u64 = x.iter().map(|&v| u64::from(v)).sum();
    let mut count = stochastic_round(q1 * volume as f64, rng);
    let mut chosen = Vec::new();
    if params.simple {
        let eligible = x.iter().filter(|&&v| v > 0).count() as u64;
        count = count.min(params.n as u64).min(eligible);
        if count > 0 {
            let picks = sample_weighted(rng, x.len(), |i| f64::from(x[i]), count as usize)
                .expect("non-negative weights");
            chosen.extend(picks.iter().map(|i| i as u32));
        }
    } else {
        count = count.min(volume);
        let mut tree = WeightTree::new(x.iter().map(|&v| u64::from(v)).collect());
        for _ in 0..count {
            let v = tree.sample(rng);
            tree.add(v, -1);
            chosen.push(v as u32);
        }
    }
    chosen.sort_unstable();
    chosen
        .into_iter()
        .map(|v| {
            x[v as usize] -= 1;
            Hyperedge::new(vec![v], EdgeOrigin::SizeOne)
        })
        .collect()
}

/// Hyperedge counts per size for a pool of points, largest size first:
/// `m_d = floor(q_d / (q_2 + .. + q_d) * (pool - sum_{f > d} f m_f) / d)`.
///
/// `q[d - 1]` is the share of size `d`; size 1 is ignored. Returns the counts
/// (indexed by size) and the number of points left over, which is below the
/// smallest active size.
pub fn allocate_edge_counts(pool: u64, q: &[f64]) -> (Vec<u64>, u64) {
    let max_size = q.len();
    let mut counts = vec![0u64; max_size + 1];
    let mut remaining = pool;
    for d in (2..=max_size).rev() {
        let qd = q[d - 1];
        if qd <= 0.0 {
            continue;
        }
        let lower: f64 = q[1..d].iter().sum();
        let m = if lower <= qd {
            // Smallest active size: the ratio is exactly one.
            remaining / d as u64
        } else {
            let target = qd / lower * remaining as f64 / d as f64;
            ((target + 1e-9).floor() as u64).min(remaining / d as u64)
        };
        counts[d] = m;
        remaining -= m * d as u64;
    }
    (counts, remaining)
}

/// Splits `by_size[d]` into types `(c, d)`, largest `c` first, with
/// `m_{c,d} = round(w_{c,d} / sum_{f <= c} w_{f,d} * (m_d - sum_{f > c} m_{f,d}))`
/// rounded stochastically.
pub fn allocate_type_counts<R: Rng + ?Sized>(
    by_size: &[u64],
    w: &WeightMatrix,
    rng: &mut R,
) -> Vec<Vec<u64>> {
    let mut out = Vec::with_capacity(by_size.len());
    for (d, &m_d) in by_size.iter().enumerate() {
        if d == 0 {
            out.push(Vec::new());
            continue;
        }
        let row = w.row(d);
        let mut counts = vec![0u64; row.len()];
        let mut remaining = m_d;
        for k in (0..row.len()).rev() {
            if remaining == 0 {
                break;
            }
            let wc = row[k];
            if wc <= 0.0 {
                continue;
            }
            let lower: f64 = row[..=k].iter().sum();
            let m = if lower <= wc {
                remaining
            } else {
                stochastic_round(wc / lower * remaining as f64, rng).min(remaining)
            };
            counts[k] = m;
            remaining -= m;
        }
        out.push(counts);
    }
    out
}

/// Picks a node from `nodes` with probability proportional to `weight`.
fn pick_weighted<R: Rng + ?Sized>(nodes: &[u32], weight: impl Fn(u32) -> u64, rng: &mut R) -> u32 {
    let total: u64 = nodes.iter().map(|&v| weight(v)).sum();
    let mut target = rng.gen_range(0..total);
    for &v in nodes {
        let w = weight(v);
        if target < w {
            return v;
        }
        target -= w;
    }
    unreachable!("target below total weight")
}

/// Output of the community phase.
#[derive(Debug, Clone)]
pub struct CommunityEdges {
    pub edges: Vec<Hyperedge>,
    pub budgets: Vec<EdgeBudget>,
    /// Size of the shared spill pool used to fill non-internal slots.
    pub spill_points: u64,
}

/// Builds every community's hyperedges.
///
/// Per community: allocate sizes from its `p_j` community points (moving
/// the remainder to the background), then types; reserve `y_int` internal
/// points per member so they add up to the internal demand `p'_j`; draw each
/// edge's nominal `c` members from the shuffled internal pool. The remaining
/// `d - c` slots of all community edges are then filled from one shuffled
/// global spill pool.
pub fn build_community_edges<R: Rng + ?Sized>(
    assignment: &CommunityAssignment,
    profiles: &mut [DegreeProfile],
    params: &GeneratorParams,
    rng: &mut R,
) -> CommunityEdges {
    let members = assignment.members();
    let mut edges: Vec<Hyperedge> = Vec::new();
    let mut budgets = Vec::with_capacity(members.len());
    let mut internal = Vec::new();

    for (j, nodes) in members.iter().enumerate() {
        let pool: u64 = nodes
            .iter()
            .map(|&v| u64::from(profiles[v as usize].y))
            .sum();
        let (by_size, leftover) = allocate_edge_counts(pool, &params.q);
        for _ in 0..leftover {
            let v = pick_weighted(nodes, |v| u64::from(profiles[v as usize].y), rng) as usize;
            profiles[v].y -= 1;
            profiles[v].z += 1;
        }
        let pool = pool - leftover;
        let by_type = allocate_type_counts(&by_size, &params.w, rng);
        let budget = EdgeBudget {
            pool,
            by_size,
            by_type,
        };
        let demand = budget.internal_points();
        debug_assert!(demand <= pool);

        let mut floor_sum = 0u64;
        let mut remainders = Vec::with_capacity(nodes.len());
        for &v in nodes {
            let p = &mut profiles[v as usize];
            let scaled = u64::from(p.y) * demand;
            let (base, rem) = scaled
                .checked_div(pool)
                .map_or((0, 0), |b| (b, scaled % pool));
            p.y_int = base as u32;
            floor_sum += base;
            remainders.push(rem);
        }
        let extra = (demand - floor_sum) as usize;
        if extra > 0 {
            let picks = sample_weighted(rng, nodes.len(), |i| remainders[i] as f64, extra)
                .expect("non-negative weights");
            for i in picks.iter() {
                profiles[nodes[i] as usize].y_int += 1;
            }
        }

        internal.clear();
        for &v in nodes {
            internal.extend(std::iter::repeat_n(v, profiles[v as usize].y_int as usize));
        }
        internal.shuffle(rng);
        let mut cursor = 0;
        for d in (2..budget.by_size.len()).rev() {
            for (k, &count) in budget.by_type[d].iter().enumerate().rev() {
                let c = min_majority(d) + k;
                for _ in 0..count {
                    let mut m = Vec::with_capacity(d);
                    m.extend_from_slice(&internal[cursor..cursor + c]);
                    cursor += c;
                    edges.push(Hyperedge {
                        members: m,
                        origin: EdgeOrigin::Community {
                            community: j as u32,
                            nominal: c as u32,
                        },
                    });
                }
            }
        }
        debug_assert_eq!(cursor, internal.len());
        budgets.push(budget);
    }

    let mut spill: Vec<u32> = Vec::new();
    for (v, p) in profiles.iter().enumerate() {
        spill.extend(std::iter::repeat_n(v as u32, (p.y - p.y_int) as usize));
    }
    spill.shuffle(rng);
    let mut cursor = 0;
    let mut realized_sizes = budgets.iter().flat_map(|b| {
        (2..b.by_size.len()).rev().flat_map(move |d| {
            b.by_type[d]
                .iter()
                .rev()
                .flat_map(move |&count| std::iter::repeat_n(d, count as usize))
        })
    });
    for e in edges.iter_mut() {
        let d = realized_sizes.next().expect("one size per edge");
        let missing = d - e.members.len();
        e.members
            .extend_from_slice(&spill[cursor..cursor + missing]);
        cursor += missing;
        e.members.sort_unstable();
    }
    assert_eq!(cursor, spill.len(), "spill pool must be exhausted");

    CommunityEdges {
        edges,
        budgets,
        spill_points: spill.len() as u64,
    }
}

/// Output of the background phase.
#[derive(Debug, Clone)]
pub struct BackgroundEdges {
    pub edges: Vec<Hyperedge>,
    pub budget: EdgeBudget,
    /// Points that did not fit the size allocation.
    pub leftover: u64,
    /// Nodes whose background degree was raised by one to close the last
    /// hyperedge.
    pub bumped: Vec<u32>,
}

/// Builds the background hyperedges from all `z` points, closing any
/// leftover either with extra size-1 hyperedges (when allowed) or by raising
/// the background degree of a few nodes to complete one more smallest-size
/// hyperedge.
pub fn build_background_edges<R: Rng + ?Sized>(
    profiles: &mut [DegreeProfile],
    params: &GeneratorParams,
    has_size_one: &mut [bool],
    rng: &mut R,
) -> BackgroundEdges {
    let mut points: Vec<u32> = Vec::new();
    for (v, p) in profiles.iter().enumerate() {
        points.extend(std::iter::repeat_n(v as u32, p.z as usize));
    }
    let pool = points.len() as u64;
    let (mut by_size, leftover) = allocate_edge_counts(pool, &params.q);
    points.shuffle(rng);

    let mut edges = Vec::new();
    let mut cursor = 0;
    for d in (2..by_size.len()).rev() {
        for _ in 0..by_size[d] {
            edges.push(Hyperedge::new(
                points[cursor..cursor + d].to_vec(),
                EdgeOrigin::Background,
            ));
            cursor += d;
        }
    }
    let rest = &points[cursor..];
    debug_assert_eq!(rest.len() as u64, leftover);

    let mut bumped = Vec::new();
    if leftover > 0 {
        let mut sorted_rest = rest.to_vec();
        sorted_rest.sort_unstable();
        let distinct = repeated_slots(&sorted_rest) == 0;
        let singles_ok = params.q_of(1) > 0.0
            && (!params.simple
                || (distinct && sorted_rest.iter().all(|&v| !has_size_one[v as usize])));
        if singles_ok {
            for &v in &sorted_rest {
                has_size_one[v as usize] = true;
                edges.push(Hyperedge::new(vec![v], EdgeOrigin::SizeOne));
            }
        } else {
            let size = params
                .smallest_active_size()
                .expect("validated parameters have a size >= 2");
            let needed = size - rest.len();
            let weight_excluding = |i: usize| {
                if sorted_rest.binary_search(&(i as u32)).is_ok() {
                    0.0
                } else {
                    f64::from(profiles[i].z)
                }
            };
            let outside = (0..profiles.len())
                .filter(|&i| weight_excluding(i) > 0.0)
                .count();
            let picks = if outside >= needed {
                sample_weighted(rng, profiles.len(), weight_excluding, needed)
            } else {
                sample_weighted(rng, profiles.len(), |i| f64::from(profiles[i].z), needed)
            }
            .expect("non-negative weights");
            let mut members = sorted_rest.clone();
            for i in picks.iter() {
                profiles[i].z += 1;
                profiles[i].x += 1;
                members.push(i as u32);
                bumped.push(i as u32);
            }
            bumped.sort_unstable();
            by_size[size] += 1;
            edges.push(Hyperedge::new(members, EdgeOrigin::Background));
        }
    }

    let budget = EdgeBudget {
        pool: pool + bumped.len() as u64,
        by_size,
        by_type: Vec::new(),
    };
    BackgroundEdges {
        edges,
        budget,
        leftover,
        bumped,
    }
}

/// Wall-clock time per generation phase.
#[derive(Debug, Clone, Default, Serialize)]
pub struct PhaseTimings {
    pub degrees: Duration,
    pub community_sizes: Duration,
    pub size_one: Duration,
    /// Degree split, constant precomputation and the greedy assignment.
    pub assignment: Duration,
    pub community_edges: Duration,
    pub background_edges: Duration,
    pub rewiring: Duration,
    pub total: Duration,
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct RewireSummary {
    pub initial_bad: usize,
    pub iterations: usize,
    pub unrepaired: usize,
}

/// Everything produced by one run.
#[derive(Debug, Clone)]
pub struct Generated {
    pub hypergraph: Hypergraph,
    pub assignment: CommunityAssignment,
    /// Final per-node split (after all adjustments).
    pub profiles: Vec<DegreeProfile>,
    /// Degrees as sampled, before any hyperedge is formed.
    pub sampled_degrees: DegreeSequence,
    pub community_budgets: Vec<EdgeBudget>,
    pub background: EdgeBudget,
    /// Nodes whose degree grew by one while closing the background.
    pub bumped: Vec<u32>,
    pub rewiring: Option<RewireSummary>,
    pub warning: Option<RewireWarning>,
    pub timings: PhaseTimings,
}

/// Runs the whole pipeline with a generator seeded from `params.seed`.
///
/// Random draws happen in a fixed order: degrees, community sizes, size-1
/// hyperedges, degree split, assignment, community hyperedges, background
/// hyperedges, rewiring.
pub fn generate(params: &GeneratorParams) -> Result<Generated> {
    let params = params.clone().normalized()?;
    for note in params.advisories() {
        log::warn!("{note}");
    }
    let mut rng = seeded_rng(params.seed);
    let mut timings = PhaseTimings::default();
    let started = Instant::now();

    let mut clock = Instant::now();
    let mut lap = |slot: &mut Duration| {
        let now = Instant::now();
        *slot = now - clock;
        clock = now;
    };

    let degrees = sample_degrees(&params, &mut rng)?;
    lap(&mut timings.degrees);
    let sizes = sample_community_sizes(&params, &mut rng)?;
    lap(&mut timings.community_sizes);

    let mut x = degrees.as_slice().to_vec();
    let mut edges = generate_size_one(&params, &mut x, &mut rng);
    let mut has_size_one = vec![false; params.n];
    for e in &edges {
        has_size_one[e.members[0] as usize] = true;
    }
    lap(&mut timings.size_one);

    let mut profiles = split_degrees(&x, params.xi, &mut rng);
    let consts = precompute_feasibility(&sizes, &params);
    let assignment = assign_communities(&profiles, &sizes, &consts, &mut rng)?;
    lap(&mut timings.assignment);

    let community = build_community_edges(&assignment, &mut profiles, &params, &mut rng);
    edges.extend(community.edges);
    lap(&mut timings.community_edges);

    let background = build_background_edges(&mut profiles, &params, &mut has_size_one, &mut rng);
    edges.extend(background.edges);
    lap(&mut timings.background_edges);

    let (edges, rewiring, warning) = if params.simple {
        let outcome = rewire(edges, &mut rng)?;
        let summary = RewireSummary {
            initial_bad: outcome.initial_bad,
            iterations: outcome.iterations,
            unrepaired: outcome.unrepaired,
        };
        let warning = outcome.warning();
        if let Some(w) = &warning {
            log::warn!("{w}");
        }
        (outcome.edges, Some(summary), warning)
    } else {
        (edges, None, None)
    };
    lap(&mut timings.rewiring);
    timings.total = started.elapsed();

    Ok(Generated {
        hypergraph: Hypergraph::new(params.n, edges),
        assignment,
        profiles,
        sampled_degrees: degrees,
        community_budgets: community.budgets,
        background: background.budget,
        bumped: background.bumped,
        rewiring,
        warning,
        timings,
    })
}
