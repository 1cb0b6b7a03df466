use std::collections::HashMap;

use proptest::prelude::*;

use habcd::assignment::{
    assign_communities_with, precompute_feasibility, split_degrees, AssignOptions,
};
use habcd::config::{GeneratorParams, WeightMatrix, WeightModel};
use habcd::generation::{seeded_rng, EdgeOrigin, Hyperedge, Hypergraph};
use habcd::io::{read_edges, write_edges};
use habcd::metrics::{
    graph_modularity, hypergraph_modularity, two_section, Partition, TypeWeights,
};
use habcd::rewiring::{rewire, REWIRE_MAX_ITER};
use habcd::sampling::{community_sizes_feasible, sample_community_sizes, sample_degrees};
use habcd::{generate, Error};

fn model() -> impl Strategy<Value = WeightModel> {
    prop_oneof![
        Just(WeightModel::Majority),
        Just(WeightModel::Linear),
        Just(WeightModel::Strict)
    ]
}

/// Small valid parameter sets.
fn small_params() -> impl Strategy<Value = GeneratorParams> {
    (
        300usize..900,
        2usize..=5,
        model(),
        0.0f64..=1.0,
        10usize..30,
        any::<u64>(),
        any::<bool>(),
    )
        .prop_map(|(n, max_size, model, xi, s, seed, simple)| {
            let mut p = GeneratorParams::standard(n);
            p.min_degree = 2;
            p.max_degree = 20;
            p.min_community = s;
            p.max_community = 4 * s;
            p.xi = xi;
            p.q = GeneratorParams::uniform_sizes(max_size);
            p.w = WeightMatrix::standard(model, max_size);
            p.seed = seed;
            p.simple = simple;
            p
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn community_sizes_cover_all_nodes(n in 50usize..5000, s in 5usize..60, extra in 0usize..200, seed: u64) {
        let max = s + extra;
        prop_assume!(community_sizes_feasible(n, s, max));
        let mut p = GeneratorParams::standard(n);
        p.min_community = s;
        p.max_community = max;
        let sizes = sample_community_sizes(&p, &mut seeded_rng(seed)).unwrap();
        prop_assert_eq!(sizes.total(), n);
        prop_assert!(sizes.as_slice().iter().all(|&c| c >= s && c <= max));
        prop_assert!(sizes.as_slice().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn generation_is_deterministic(p in small_params()) {
        let a = generate(&p).unwrap();
        let b = generate(&p).unwrap();
        prop_assert_eq!(a.hypergraph, b.hypergraph);
        prop_assert_eq!(a.assignment, b.assignment);
    }

    #[test]
    fn memoization_does_not_change_assignment(p in small_params()) {
        let run = |memoize| {
            let mut rng = seeded_rng(p.seed);
            let degrees = sample_degrees(&p, &mut rng).unwrap();
            let sizes = sample_community_sizes(&p, &mut rng).unwrap();
            let profiles = split_degrees(degrees.as_slice(), p.xi, &mut rng);
            let consts = precompute_feasibility(&sizes, &p);
            assign_communities_with(&profiles, &sizes, &consts, AssignOptions { memoize }, &mut rng).unwrap()
        };
        prop_assert_eq!(run(true), run(false));
    }

    #[test]
    fn multi_mode_budgets_and_points(p in small_params()) {
        let mut p = p;
        p.simple = false;
        let g = generate(&p).unwrap();
        let h = &g.hypergraph;

        for b in &g.community_budgets {
            prop_assert_eq!(b.volume(), b.pool);
            for d in 2..b.by_size.len() {
                prop_assert_eq!(b.by_type[d].iter().sum::<u64>(), b.by_size[d]);
            }
        }
        prop_assert_eq!(g.background.volume(), g.background.pool);

        // Every sampled point is used once, plus one per bumped node.
        let degrees = h.degrees();
        let mut expected: Vec<u64> = g.sampled_degrees.as_slice().iter().map(|&d| u64::from(d)).collect();
        for &v in &g.bumped {
            expected[v as usize] += 1;
        }
        prop_assert_eq!(&degrees, &expected);
        prop_assert!(g.bumped.len() < p.smallest_active_size().unwrap());

        for e in &h.edges {
            prop_assert!(e.len() <= p.max_edge_size() && !e.is_empty());
            if let EdgeOrigin::Community { community, nominal } = e.origin {
                let inside = e
                    .members
                    .iter()
                    .filter(|&&v| g.assignment.member_of[v as usize] == community)
                    .count();
                prop_assert!(inside >= nominal as usize);
                prop_assert!(2 * nominal as usize > e.len());
                let w = p.w.get(nominal as usize, e.len()).unwrap();
                prop_assert!(w > 0.0, "type ({}, {}) has zero weight", nominal, e.len());
            }
        }
    }

    #[test]
    fn simple_mode_output_is_simple(p in small_params()) {
        let mut p = p;
        p.simple = true;
        let g = generate(&p).unwrap();
        if g.warning.is_none() {
            let mut seen = std::collections::HashSet::new();
            for e in &g.hypergraph.edges {
                prop_assert_eq!(e.repeated_slots(), 0);
                prop_assert!(seen.insert(e.members.clone()));
            }
        }
    }
}

fn edges_strategy(
    nodes: u32,
    max_len: usize,
    count: usize,
) -> impl Strategy<Value = Vec<Vec<u32>>> {
    prop::collection::vec(prop::collection::vec(0..nodes, 1..=max_len), 1..count)
}

fn incidence(edges: &[Hyperedge]) -> HashMap<u32, usize> {
    let mut map = HashMap::new();
    for e in edges {
        for &v in &e.members {
            *map.entry(v).or_insert(0) += 1;
        }
    }
    map
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn rewiring_preserves_degrees_and_sizes(raw in edges_strategy(30, 5, 60), seed: u64) {
        let edges: Vec<Hyperedge> = raw.into_iter().map(|m| Hyperedge::new(m, EdgeOrigin::Unknown)).collect();
        match rewire(edges.clone(), &mut seeded_rng(seed)) {
            Ok(out) => {
                prop_assert!(out.iterations <= REWIRE_MAX_ITER * out.initial_bad);
                prop_assert_eq!(incidence(&out.edges), incidence(&edges));
                let mut before: Vec<usize> = edges.iter().map(Hyperedge::len).collect();
                let mut after: Vec<usize> = out.edges.iter().map(Hyperedge::len).collect();
                before.sort_unstable();
                after.sort_unstable();
                prop_assert_eq!(before, after);
                if out.unrepaired == 0 {
                    let mut seen = std::collections::HashSet::new();
                    for e in &out.edges {
                        prop_assert_eq!(e.repeated_slots(), 0);
                        prop_assert!(seen.insert(e.members.clone()));
                    }
                }
            }
            Err(Error::Unrepairable { .. }) => {}
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn modularity_ignores_node_names(
        raw in edges_strategy(20, 5, 40),
        labels in prop::collection::vec(0u8..4, 20),
        perm in Just((0..20u32).collect::<Vec<_>>()).prop_shuffle(),
    ) {
        let h = Hypergraph::new(20, raw.iter().map(|m| Hyperedge::new(m.clone(), EdgeOrigin::Unknown)).collect());
        let renamed = Hypergraph::new(
            20,
            raw.iter()
                .map(|m| Hyperedge::new(m.iter().map(|&v| perm[v as usize]).collect(), EdgeOrigin::Unknown))
                .collect(),
        );
        let mut moved = vec![0u8; 20];
        for (v, &l) in labels.iter().enumerate() {
            moved[perm[v] as usize] = l;
        }
        let (a, b) = (Partition::from_labels(&labels), Partition::from_labels(&moved));
        let u = TypeWeights::standard(WeightModel::Linear, 5);
        let qa = hypergraph_modularity(&h, &a, &u).unwrap();
        let qb = hypergraph_modularity(&renamed, &b, &u).unwrap();
        prop_assert!((qa - qb).abs() < 1e-12);
        if let (Ok(ga), Ok(gb)) = (graph_modularity(&two_section(&h), &a), graph_modularity(&two_section(&renamed), &b)) {
            prop_assert!((ga - gb).abs() < 1e-12);
        }
    }

    #[test]
    fn pair_hypergraph_matches_its_graph(
        pairs in prop::collection::vec((0u32..25, 0u32..25), 1..80),
        labels in prop::collection::vec(0u8..5, 25),
    ) {
        let edges: Vec<Hyperedge> = pairs
            .into_iter()
            .filter(|(u, v)| u != v)
            .map(|(u, v)| Hyperedge::new(vec![u, v], EdgeOrigin::Unknown))
            .collect();
        prop_assume!(!edges.is_empty());
        let h = Hypergraph::new(25, edges);
        let part = Partition::from_labels(&labels);
        for model in [WeightModel::Majority, WeightModel::Linear, WeightModel::Strict] {
            let qh = hypergraph_modularity(&h, &part, &TypeWeights::standard(model, 2)).unwrap();
            let qg = graph_modularity(&two_section(&h), &part).unwrap();
            prop_assert!((qh - qg).abs() <= 1e-9, "{} vs {}", qh, qg);
        }
    }

    #[test]
    fn edges_file_round_trip(raw in edges_strategy(40, 6, 50)) {
        let h = Hypergraph::new(40, raw.into_iter().map(|m| Hyperedge::new(m, EdgeOrigin::Unknown)).collect());
        let mut buf = Vec::new();
        write_edges(&h, &mut buf).unwrap();
        let back = read_edges(&buf[..]).unwrap();
        prop_assert_eq!(back.n, h.n);
        let members = |g: &Hypergraph| g.edges.iter().map(|e| e.members.clone()).collect::<Vec<_>>();
        prop_assert_eq!(members(&back), members(&h));
    }
}
