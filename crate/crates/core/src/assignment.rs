//! Degree splitting and node-to-community assignment.
//!
//! A node with community degree `y` and background degree `z` may join
//! community `j` only if, for every size `d >= 2` and majority count `c`,
//! the expected number of type-`(c, d)` hyperedges through it,
//! `y * A[j,c,d] + z * B[j,c,d]`, fits into the number of distinct such
//! hyperedges the community can host, `C[j,c,d]`.

use hashbrown::HashMap;
use rand::Rng;
use serde::Serialize;
use statrs::function::factorial::ln_binomial;

use crate::config::{min_majority, GeneratorParams};
use crate::error::{Error, Result};
use crate::fenwick::WeightTree;
use crate::sampling::{stochastic_round, CommunitySizes};

/// Random spots-weighted candidates tried before the exhaustive scan.
pub const FAST_PATH_CANDIDATES: usize = 10;

const LOG_SLACK: f64 = 1e-12;

/// Per-node degree split.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct DegreeProfile {
    /// Total degree, excluding size-1 hyperedges.
    pub x: u32,
    /// Community degree.
    pub y: u32,
    /// Background degree.
    pub z: u32,
    /// Points of `y` reserved for hyperedges owned by the node's community.
    pub y_int: u32,
}

/// Splits each degree into `z = round(xi * x)` background points (rounded
/// stochastically) and `y = x - z` community points.
pub fn split_degrees<R: Rng + ?Sized>(degrees: &[u32], xi: f64, rng: &mut R) -> Vec<DegreeProfile> {
    degrees
        .iter()
        .map(|&x| {
            let z = (stochastic_round(xi * f64::from(x), rng) as u32).min(x);
            DegreeProfile {
                x,
                y: x - z,
                z,
                y_int: 0,
            }
        })
        .collect()
}

/// Exact binomial coefficient as a float; fine for the small arguments used
/// here (hyperedge sizes).
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// The three coefficients of one admissibility inequality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityTerms {
    pub a: f64,
    pub b: f64,
    /// Natural log of the capacity `C`; `-inf` when `C = 0`.
    pub ln_c: f64,
}

impl InequalityTerms {
    #[inline]
    fn holds(&self, y: f64, z: f64) -> bool {
        let lhs = y * self.a + z * self.b;
        lhs <= 0.0 || lhs.ln() <= self.ln_c + LOG_SLACK
    }
}

/// Precomputed `(A, B, C)` for every community and every admissible `(c, d)`
/// with `d >= 2`.
#[derive(Debug, Clone)]
pub struct FeasibilityConstants {
    types: Vec<(usize, usize)>,
    terms: Vec<InequalityTerms>,
    communities: usize,
}

impl FeasibilityConstants {
    pub fn community_count(&self) -> usize {
        self.communities
    }

    /// `(c, d)` pairs in storage order.
    pub fn types(&self) -> &[(usize, usize)] {
        &self.types
    }

    pub fn row(&self, j: usize) -> &[InequalityTerms] {
        let k = self.types.len();
        &self.terms[j * k..(j + 1) * k]
    }

    pub fn get(&self, j: usize, c: usize, d: usize) -> Option<InequalityTerms> {
        let idx = self.types.iter().position(|&t| t == (c, d))?;
        self.row(j).get(idx).copied()
    }
}

pub fn precompute_feasibility(
    sizes: &CommunitySizes,
    params: &GeneratorParams,
) -> FeasibilityConstants {
    let n = params.n;
    let max_size = params.max_edge_size();
    let types: Vec<(usize, usize)> = (2..=max_size)
        .flat_map(|d| (min_majority(d)..=d).map(move |c| (c, d)))
        .collect();

    let mut terms = Vec::with_capacity(types.len() * sizes.len());
    for &cj in sizes.as_slice() {
        let share = cj as f64 / n as f64;
        let rest = 1.0 - share;
        for &(c, d) in &types {
            let qd = params.q_of(d);
            let outside = rest.powi((d - c) as i32);
            let a: f64 = (min_majority(d)..=c)
                .map(|f| {
                    let wf = params.w.get(f, d).unwrap_or(0.0);
                    qd * wf * binomial(d - f, c - f) * share.powi((c - f) as i32) * outside
                })
                .sum();
            let b = qd * binomial(d - 1, c - 1) * share.powi((c - 1) as i32) * outside;
            let ln_c = ln_binomial(cj as u64 - 1, c as u64 - 1)
                + ln_binomial((n - cj) as u64, (d - c) as u64);
            terms.push(InequalityTerms { a, b, ln_c });
        }
    }
    FeasibilityConstants {
        types,
        terms,
        communities: sizes.len(),
    }
}

fn admissible_split(y: u32, z: u32, j: usize, consts: &FeasibilityConstants) -> bool {
    let (y, z) = (f64::from(y), f64::from(z));
    consts.row(j).iter().all(|t| t.holds(y, z))
}

/// Whether a node with this degree split may join community `j`.
pub fn is_admissible(profile: &DegreeProfile, j: usize, consts: &FeasibilityConstants) -> bool {
    admissible_split(profile.y, profile.z, j, consts)
}

/// Ground-truth partition of nodes into communities.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CommunityAssignment {
    pub sizes: CommunitySizes,
    /// Community index of every node.
    pub member_of: Vec<u32>,
}

impl CommunityAssignment {
    pub fn community_count(&self) -> usize {
        self.sizes.len()
    }

    /// Node lists per community, each ascending.
    pub fn members(&self) -> Vec<Vec<u32>> {
        let mut out: Vec<Vec<u32>> = self
            .sizes
            .as_slice()
            .iter()
            .map(|&c| Vec::with_capacity(c))
            .collect();
        for (node, &j) in self.member_of.iter().enumerate() {
            out[j as usize].push(node as u32);
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AssignOptions {
    /// Cache admissibility per distinct `(y, z)` split.
    pub memoize: bool,
}

impl Default for AssignOptions {
    fn default() -> Self {
        Self { memoize: true }
    }
}

/// Admissibility lookups, optionally cached per `(y, z)` across all
/// communities at once.
struct Admissibility<'a> {
    consts: &'a FeasibilityConstants,
    cache: Option<HashMap<(u32, u32), Vec<bool>>>,
}

impl Admissibility<'_> {
    fn check(&mut self, y: u32, z: u32, j: usize) -> bool {
        let consts = self.consts;
        match &mut self.cache {
            None => admissible_split(y, z, j, consts),
            Some(cache) => cache.entry((y, z)).or_insert_with(|| {
                (0..consts.community_count())
                    .map(|k| admissible_split(y, z, k, consts))
                    .collect()
            })[j],
        }
    }
}

/// Visit order: decreasing total degree, ties by decreasing community degree.
pub fn assignment_order(profiles: &[DegreeProfile]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..profiles.len()).collect();
    order.sort_by(|&a, &b| {
        let (pa, pb) = (&profiles[a], &profiles[b]);
        pb.x.cmp(&pa.x).then(pb.y.cmp(&pa.y)).then(a.cmp(&b))
    });
    order
}

pub fn assign_communities<R: Rng + ?Sized>(
    profiles: &[DegreeProfile],
    sizes: &CommunitySizes,
    consts: &FeasibilityConstants,
    rng: &mut R,
) -> Result<CommunityAssignment> {
    assign_communities_with(profiles, sizes, consts, AssignOptions::default(), rng)
}

/// Greedy assignment: nodes in [`assignment_order`], each placed in an
/// admissible community with free spots, chosen with probability
/// proportional to its remaining spots.
pub fn assign_communities_with<R: Rng + ?Sized>(
    profiles: &[DegreeProfile],
    sizes: &CommunitySizes,
    consts: &FeasibilityConstants,
    options: AssignOptions,
    rng: &mut R,
) -> Result<CommunityAssignment> {
    assert_eq!(
        sizes.total(),
        profiles.len(),
        "community sizes must cover all nodes"
    );
    let mut spots = WeightTree::new(sizes.as_slice().iter().map(|&c| c as u64).collect());
    let mut admissible = Admissibility {
        consts,
        cache: options.memoize.then(HashMap::new),
    };
    let mut member_of = vec![u32::MAX; profiles.len()];
    let mut candidates = Vec::new();

    for node in assignment_order(profiles) {
        let DegreeProfile { y, z, .. } = profiles[node];
        let mut chosen = None;
        for _ in 0..FAST_PATH_CANDIDATES {
            let j = spots.sample(rng);
            if admissible.check(y, z, j) {
                chosen = Some(j);
                break;
            }
        }
        let j = match chosen {
            Some(j) => j,
            None => {
                candidates.clear();
                let mut total = 0u64;
                for j in 0..sizes.len() {
                    let free = spots.weight(j);
                    if free > 0 && admissible.check(y, z, j) {
                        total += free;
                        candidates.push((j, total));
                    }
                }
                if total == 0 {
                    return Err(Error::AssignmentInfeasible { node, y, z });
                }
                let target = rng.gen_range(0..total);
                let k = candidates.partition_point(|&(_, upto)| upto <= target);
                candidates[k].0
            }
        };
        member_of[node] = j as u32;
        spots.add(j, -1);
    }

    Ok(CommunityAssignment {
        sizes: sizes.clone(),
        member_of,
    })
}
