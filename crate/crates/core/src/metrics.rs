//! Evaluation: 2-section graphs, graph and hypergraph modularity, type
//! histograms and distribution reports.

use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::assignment::{binomial, CommunityAssignment};
use crate::config::{min_majority, GeneratorParams, TriangularTable, WeightModel};
use crate::error::{Error, Result};
use crate::generation::Hypergraph;
use crate::sampling::PowerLaw;

/// Node partition with contiguous part labels `0..k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    parts: Vec<u32>,
    count: usize,
}

impl Partition {
    /// Relabels arbitrary labels to `0..k` in order of first appearance.
    pub fn from_labels<T: Copy + Eq + std::hash::Hash>(labels: &[T]) -> Self {
        let mut map: FxHashMap<T, u32> = FxHashMap::default();
        let parts = labels
            .iter()
            .map(|l| {
                let next = map.len() as u32;
                *map.entry(*l).or_insert(next)
            })
            .collect();
        Self {
            parts,
            count: map.len(),
        }
    }

    pub fn single(n: usize) -> Self {
        Self {
            parts: vec![0; n],
            count: usize::from(n > 0),
        }
    }

    pub fn part_of(&self, node: usize) -> usize {
        self.parts[node] as usize
    }

    pub fn part_count(&self) -> usize {
        self.count
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    fn check(&self, n: usize) -> Result<()> {
        if self.parts.len() != n {
            return Err(Error::PartitionSize {
                expected: n,
                found: self.parts.len(),
            });
        }
        Ok(())
    }
}

impl From<&CommunityAssignment> for Partition {
    fn from(a: &CommunityAssignment) -> Self {
        Self {
            parts: a.member_of.clone(),
            count: a.community_count(),
        }
    }
}

/// Weighted 2-section: every hyperedge (as a node set) adds one unit to each
/// pair of its members.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TwoSection {
    /// `(u, v, weight)` with `u < v`, sorted.
    pub edges: Vec<(u32, u32, u64)>,
    /// Weighted degree of every node.
    pub degree: Vec<u64>,
}

impl TwoSection {
    pub fn total_weight(&self) -> u64 {
        self.edges.iter().map(|e| e.2).sum()
    }

    pub fn weight(&self, u: u32, v: u32) -> u64 {
        let key = (u.min(v), u.max(v));
        self.edges
            .binary_search_by(|e| (e.0, e.1).cmp(&key))
            .map_or(0, |i| self.edges[i].2)
    }
}

pub fn two_section(h: &Hypergraph) -> TwoSection {
    let mut weights: FxHashMap<(u32, u32), u64> = FxHashMap::default();
    let mut degree = vec![0u64; h.n];
    let mut set = Vec::new();
    for e in &h.edges {
        set.clear();
        set.extend_from_slice(&e.members);
        set.dedup();
        for (i, &u) in set.iter().enumerate() {
            degree[u as usize] += (set.len() - 1) as u64;
            for &v in &set[i + 1..] {
                *weights.entry((u, v)).or_insert(0) += 1;
            }
        }
    }
    let mut edges: Vec<(u32, u32, u64)> =
        weights.into_iter().map(|((u, v), w)| (u, v, w)).collect();
    edges.sort_unstable();
    TwoSection { edges, degree }
}

/// Newman-Girvan modularity with multiplicities: edge contribution minus
/// degree tax.
pub fn graph_modularity(g: &TwoSection, partition: &Partition) -> Result<f64> {
    partition.check(g.degree.len())?;
    let total = g.total_weight();
    if total == 0 {
        return Err(Error::NoEdges);
    }
    let inside: u64 = g
        .edges
        .iter()
        .filter(|&&(u, v, _)| partition.part_of(u as usize) == partition.part_of(v as usize))
        .map(|e| e.2)
        .sum();
    let mut vol = vec![0u64; partition.part_count()];
    for (v, &d) in g.degree.iter().enumerate() {
        vol[partition.part_of(v)] += d;
    }
    let total_vol = (2 * total) as f64;
    let tax: f64 = vol.iter().map(|&x| (x as f64 / total_vol).powi(2)).sum();
    Ok(inside as f64 / total as f64 - tax)
}

/// 2-section modularity computed straight from the hypergraph, without
/// materializing the pair list.
pub fn two_section_modularity(h: &Hypergraph, partition: &Partition) -> Result<f64> {
    partition.check(h.n)?;
    let mut total = 0u64;
    let mut inside = 0u64;
    let mut vol = vec![0u64; partition.part_count()];
    let mut set = Vec::new();
    let mut parts: Vec<usize> = Vec::new();
    for e in &h.edges {
        set.clear();
        set.extend_from_slice(&e.members);
        set.dedup();
        let k = set.len() as u64;
        total += k * (k.saturating_sub(1)) / 2;
        parts.clear();
        parts.extend(set.iter().map(|&v| partition.part_of(v as usize)));
        parts.sort_unstable();
        for run in parts.chunk_by(|a, b| a == b) {
            let r = run.len() as u64;
            inside += r * (r - 1) / 2;
            vol[run[0]] += r * (k - 1);
        }
    }
    if total == 0 {
        return Err(Error::NoEdges);
    }
    let total_vol = (2 * total) as f64;
    let tax: f64 = vol.iter().map(|&x| (x as f64 / total_vol).powi(2)).sum();
    Ok(inside as f64 / total as f64 - tax)
}

/// Hyper-parameters `u[c, d]` weighting type-`(c, d)` contributions to
/// hypergraph modularity.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeWeights {
    table: TriangularTable,
}

impl TypeWeights {
    /// Standard families: majority counts every majority type fully, linear
    /// weights by homogeneity `c / d`, strict counts only pure hyperedges.
    pub fn standard(model: WeightModel, max_size: usize) -> Self {
        let table = TriangularTable::filled(max_size, |c, d| match model {
            WeightModel::Majority => 1.0,
            WeightModel::Linear => c as f64 / d as f64,
            WeightModel::Strict => f64::from(u8::from(c == d)),
        });
        Self { table }
    }

    pub fn from_fn(max_size: usize, f: impl FnMut(usize, usize) -> f64) -> Self {
        Self {
            table: TriangularTable::filled(max_size, f),
        }
    }

    pub fn get(&self, c: usize, d: usize) -> f64 {
        self.table.get(c, d).unwrap_or(0.0)
    }

    pub fn max_size(&self) -> usize {
        self.table.max_size()
    }
}

/// `P(Bin(d, p) = c)`.
pub fn binomial_pmf(d: usize, p: f64, c: usize) -> f64 {
    if c > d {
        return 0.0;
    }
    binomial(d, c) * p.powi(c as i32) * (1.0 - p).powi((d - c) as i32)
}

/// Per-(part, size) member counts of one hyperedge: the part holding a
/// strict majority and how many members it holds.
fn majority_of(
    members: &[u32],
    partition: &Partition,
    scratch: &mut Vec<usize>,
) -> Option<(usize, usize)> {
    scratch.clear();
    scratch.extend(members.iter().map(|&v| partition.part_of(v as usize)));
    scratch.sort_unstable();
    let d = members.len();
    scratch
        .chunk_by(|a, b| a == b)
        .find(|run| 2 * run.len() > d)
        .map(|run| (run[0], run.len()))
}

/// Hypergraph modularity: for every size `d >= 2` and majority count `c`,
/// hyperedges with exactly `c` members in one part, minus the count expected
/// when members fall into parts proportionally to part volume, weighted by
/// `u[c, d]` and normalized by the edge count.
pub fn hypergraph_modularity(
    h: &Hypergraph,
    partition: &Partition,
    u: &TypeWeights,
) -> Result<f64> {
    partition.check(h.n)?;
    if h.edges.is_empty() {
        return Err(Error::NoEdges);
    }
    let max_size = h.max_edge_size();
    let mut vol = vec![0u64; partition.part_count()];
    for e in &h.edges {
        for &v in &e.members {
            vol[partition.part_of(v as usize)] += 1;
        }
    }
    let total_vol: u64 = vol.iter().sum();

    let mut size_count = vec![0u64; max_size + 1];
    let mut type_count = TypeCounts::new(max_size);
    let mut scratch = Vec::new();
    for e in &h.edges {
        let d = e.len();
        size_count[d] += 1;
        if d < 2 {
            continue;
        }
        if let Some((_, c)) = majority_of(&e.members, partition, &mut scratch) {
            type_count.add(c, d);
        }
    }

    let shares: Vec<f64> = vol.iter().map(|&x| x as f64 / total_vol as f64).collect();
    let mut observed = 0.0;
    let mut expected = 0.0;
    for (d, &count) in size_count.iter().enumerate().skip(2) {
        if count == 0 {
            continue;
        }
        for c in min_majority(d)..=d {
            let weight = u.get(c, d);
            if weight == 0.0 {
                continue;
            }
            let null: f64 = shares.iter().map(|&p| binomial_pmf(d, p, c)).sum();
            observed += weight * type_count.get(c, d) as f64;
            expected += weight * count as f64 * null;
        }
    }
    Ok((observed - expected) / h.edges.len() as f64)
}

/// Counts per `(c, d)`, `c = 0` standing for "no strict majority".
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TypeCounts {
    /// `rows[d][0]` is type `(0, d)`; `rows[d][k]` for `k >= 1` is type
    /// `(d / 2 + k, d)`.
    rows: Vec<Vec<u64>>,
}

impl TypeCounts {
    fn new(max_size: usize) -> Self {
        Self {
            rows: (0..=max_size)
                .map(|d| vec![0; if d == 0 { 0 } else { d.div_ceil(2) + 1 }])
                .collect(),
        }
    }

    fn slot(c: usize, d: usize) -> Option<usize> {
        if c == 0 {
            Some(0)
        } else if c >= min_majority(d) && c <= d {
            Some(c - min_majority(d) + 1)
        } else {
            None
        }
    }

    fn add(&mut self, c: usize, d: usize) {
        let k = Self::slot(c, d).expect("admissible type");
        self.rows[d][k] += 1;
    }

    pub fn get(&self, c: usize, d: usize) -> u64 {
        match (self.rows.get(d), Self::slot(c, d)) {
            (Some(row), Some(k)) if !row.is_empty() => row[k],
            _ => 0,
        }
    }

    pub fn max_size(&self) -> usize {
        self.rows.len().saturating_sub(1)
    }

    /// Hyperedges of size `d`.
    pub fn size_total(&self, d: usize) -> u64 {
        self.rows.get(d).map_or(0, |r| r.iter().sum())
    }

    pub fn total(&self) -> u64 {
        self.rows.iter().flatten().sum()
    }

    /// Fraction of size-`d` hyperedges that are of type `(c, d)`.
    pub fn fraction(&self, c: usize, d: usize) -> f64 {
        let t = self.size_total(d);
        if t == 0 {
            0.0
        } else {
            self.get(c, d) as f64 / t as f64
        }
    }

    /// `(c, d, count)` in order of increasing `d`, then `c` (0 first).
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        self.rows.iter().enumerate().flat_map(|(d, row)| {
            row.iter().enumerate().map(move |(k, &n)| {
                let c = if k == 0 { 0 } else { min_majority(d) + k - 1 };
                (c, d, n)
            })
        })
    }
}

/// Classifies every hyperedge by size and by the largest share of its
/// members inside one ground-truth community.
pub fn type_histogram(h: &Hypergraph, truth: &CommunityAssignment) -> TypeCounts {
    let partition = Partition::from(truth);
    let mut counts = TypeCounts::new(h.max_edge_size());
    let mut scratch = Vec::new();
    for e in &h.edges {
        let d = e.len();
        if d == 0 {
            continue;
        }
        let c = majority_of(&e.members, &partition, &mut scratch).map_or(0, |(_, c)| c);
        counts.add(c, d);
    }
    counts
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CcdfRow {
    pub k: u64,
    pub empirical: f64,
    pub analytic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VolumeShare {
    pub size: usize,
    pub share: f64,
    pub requested: f64,
}

/// Distribution statistics of one generated hypergraph.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CcdfReport {
    /// Fraction of nodes with degree at least `k`, for `k` in
    /// `[min_degree, max_degree]`.
    pub degree: Vec<CcdfRow>,
    /// Fraction of communities with size at least `k`, for `k` in
    /// `[min_community, max_community]`.
    pub community_size: Vec<CcdfRow>,
    pub volume_share: Vec<VolumeShare>,
}

fn empirical_ccdf(
    values: &[u64],
    range: std::ops::RangeInclusive<u64>,
    law: &PowerLaw,
) -> Vec<CcdfRow> {
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    let n = sorted.len().max(1) as f64;
    range
        .map(|k| {
            let below = sorted.partition_point(|&v| v < k);
            CcdfRow {
                k,
                empirical: (sorted.len() - below) as f64 / n,
                analytic: law.ccdf(k),
            }
        })
        .collect()
}

pub fn ccdf_report(
    h: &Hypergraph,
    truth: &CommunityAssignment,
    params: &GeneratorParams,
) -> Result<CcdfReport> {
    let (dmin, dmax) = (u64::from(params.min_degree), u64::from(params.max_degree));
    let degree_law = PowerLaw::new(params.gamma, dmin, dmax)?;
    let degree = empirical_ccdf(&h.degrees(), dmin..=dmax, &degree_law);

    let (smin, smax) = (params.min_community as u64, params.max_community as u64);
    let size_law = PowerLaw::new(params.beta, smin, smax)?;
    let sizes: Vec<u64> = truth.sizes.as_slice().iter().map(|&c| c as u64).collect();
    let community_size = empirical_ccdf(&sizes, smin..=smax, &size_law);

    let volume = h.volume().max(1) as f64;
    let counts = h.size_counts();
    let volume_share = (1..=params.max_edge_size().max(counts.len().saturating_sub(1)))
        .map(|d| VolumeShare {
            size: d,
            share: (d as u64 * counts.get(d).copied().unwrap_or(0)) as f64 / volume,
            requested: params.q_of(d),
        })
        .collect();

    Ok(CcdfReport {
        degree,
        community_size,
        volume_share,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generation::{EdgeOrigin, Hyperedge};

    fn hypergraph(n: usize, edges: &[&[u32]]) -> Hypergraph {
        Hypergraph::new(
            n,
            edges
                .iter()
                .map(|m| Hyperedge::new(m.to_vec(), EdgeOrigin::Unknown))
                .collect(),
        )
    }

    #[test]
    fn triangle_section() {
        let g = two_section(&hypergraph(4, &[&[1, 2, 3]]));
        assert_eq!(g.edges, vec![(1, 2, 1), (1, 3, 1), (2, 3, 1)]);
        assert_eq!(g.degree, vec![0, 2, 2, 2]);
    }

    #[test]
    fn parallel_pairs_accumulate() {
        let g = two_section(&hypergraph(3, &[&[1, 2], &[1, 2]]));
        assert_eq!(g.weight(1, 2), 2);
        assert_eq!(g.weight(2, 1), 2);
    }

    #[test]
    fn empty_section() {
        let g = two_section(&hypergraph(3, &[]));
        assert!(g.edges.is_empty());
        assert!(matches!(
            graph_modularity(&g, &Partition::single(3)),
            Err(Error::NoEdges)
        ));
    }

    #[test]
    fn two_triangles() {
        let h = hypergraph(6, &[&[0, 1], &[1, 2], &[0, 2], &[3, 4], &[4, 5], &[3, 5]]);
        let g = two_section(&h);
        let p = Partition::from_labels(&[0, 0, 0, 1, 1, 1]);
        assert_eq!(graph_modularity(&g, &p).unwrap(), 0.5);
        assert_eq!(graph_modularity(&g, &Partition::single(6)).unwrap(), 0.0);
    }

    #[test]
    fn four_cycle_opposite_pairs() {
        // 0-1-2-3-0 split into {0,2} and {1,3}: no internal edges.
        let h = hypergraph(4, &[&[0, 1], &[1, 2], &[2, 3], &[0, 3]]);
        let g = two_section(&h);
        let p = Partition::from_labels(&[0, 1, 0, 1]);
        assert!((graph_modularity(&g, &p).unwrap() + 0.5).abs() < 1e-15);
        // Adjacent pairs {0,1} and {2,3}: edge share 1/2, tax 1/2.
        let p = Partition::from_labels(&[0, 0, 1, 1]);
        assert!(graph_modularity(&g, &p).unwrap().abs() < 1e-15);
    }

    #[test]
    fn whole_set_hypergraph_modularity_is_zero() {
        let h = hypergraph(5, &[&[0, 1, 2], &[1, 3], &[2, 3, 4, 0], &[4], &[1, 1, 2]]);
        for model in [
            WeightModel::Majority,
            WeightModel::Linear,
            WeightModel::Strict,
        ] {
            let u = TypeWeights::standard(model, 4);
            assert_eq!(
                hypergraph_modularity(&h, &Partition::single(5), &u).unwrap(),
                0.0
            );
        }
    }

    #[test]
    fn histogram_types() {
        let truth = CommunityAssignment {
            sizes: crate::sampling::CommunitySizes::new(vec![3, 3]),
            member_of: vec![0, 0, 0, 1, 1, 1],
        };
        let h = hypergraph(6, &[&[0, 1, 3], &[0, 1, 3, 4], &[0, 1, 2], &[5]]);
        let t = type_histogram(&h, &truth);
        assert_eq!(t.get(2, 3), 1);
        assert_eq!(t.get(0, 4), 1);
        assert_eq!(t.get(3, 3), 1);
        assert_eq!(t.get(1, 1), 1);
        assert_eq!(t.total(), 4);
    }

    #[test]
    fn pmf_edges() {
        assert_eq!(binomial_pmf(4, 1.0, 4), 1.0);
        assert_eq!(binomial_pmf(4, 1.0, 3), 0.0);
        assert_eq!(binomial_pmf(4, 0.0, 0), 1.0);
        assert!((binomial_pmf(3, 0.5, 2) - 0.375).abs() < 1e-15);
    }

    #[test]
    fn partition_size_mismatch() {
        let h = hypergraph(3, &[&[0, 1]]);
        let u = TypeWeights::standard(WeightModel::Majority, 2);
        assert!(matches!(
            hypergraph_modularity(&h, &Partition::single(2), &u),
            Err(Error::PartitionSize {
                expected: 3,
                found: 2
            })
        ));
    }
}
