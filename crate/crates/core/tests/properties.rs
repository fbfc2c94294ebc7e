use degest_core::estimators::{estimate_average_degree, EstimatorConfig, Sampling};
use degest_core::generators::{gen_circulant, gen_clique_matching, gen_er};
use degest_core::graph::{
    arboricity_exact, degeneracy, ground_truth, partition_by_threshold, Graph,
};
use degest_core::oracle::QueryOracle;
use num_rational::Ratio;
use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Simple graphs on `2..=max_n` vertices with a uniformly chosen edge subset.
fn small_graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (2..=max_n).prop_flat_map(|n| {
        let pairs: Vec<(u64, u64)> = (0..n as u64)
            .flat_map(|u| (u + 1..n as u64).map(move |v| (u, v)))
            .collect();
        proptest::sample::subsequence(pairs.clone(), 0..=pairs.len())
            .prop_map(move |edges| Graph::new(n, &edges).unwrap())
    })
}

/// Smallest `k` such that the edges split into `k` forests, by backtracking
/// over colourings with a union-find per colour.
fn forest_partition_number(g: &Graph) -> u32 {
    fn find(p: &[usize], mut x: usize) -> usize {
        while p[x] != x {
            x = p[x];
        }
        x
    }
    fn place(edges: &[(u32, u32)], i: usize, forests: &mut Vec<Vec<usize>>) -> bool {
        let Some(&(u, v)) = edges.get(i) else {
            return true;
        };
        for f in 0..forests.len() {
            let (a, b) = (find(&forests[f], u as usize), find(&forests[f], v as usize));
            if a != b {
                forests[f][a] = b;
                if place(edges, i + 1, forests) {
                    return true;
                }
                forests[f][a] = a;
            }
        }
        false
    }
    if g.m() == 0 {
        return 0;
    }
    (1..)
        .find(|&k| place(g.edges(), 0, &mut vec![(0..g.n()).collect(); k as usize]))
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn partition_accounts_for_every_edge(g in small_graph(12), tau in 0u64..14) {
        let p = partition_by_threshold(&g, tau);
        let m = g.m() as u64;
        prop_assert_eq!(p.e_hh + p.e_ll + p.e_hl, m);
        prop_assert_eq!(p.m_light, 2 * p.e_ll + p.e_hl);
        prop_assert_eq!(p.m_heavy, 2 * p.e_hh + p.e_hl);
        prop_assert_eq!(p.heavy.len() + p.light.len(), g.n());
        prop_assert!(p.light.iter().all(|&v| g.degree(v) as u64 <= tau));
        prop_assert!(p.heavy.iter().all(|&v| g.degree(v) as u64 > tau));
        let light_sum: u64 = p.light.iter().map(|&v| g.degree(v) as u64).sum();
        prop_assert_eq!(light_sum, p.m_light);
        if m > 0 {
            let rho = p.rho_light().unwrap();
            prop_assert!(rho <= Ratio::from_integer(1));
            prop_assert!(partition_by_threshold(&g, tau + 1).rho_light().unwrap() >= rho);
            prop_assert_eq!(partition_by_threshold(&g, g.max_degree() as u64).rho_light().unwrap(), Ratio::from_integer(1));
        }
    }

    #[test]
    fn arboricity_matches_forest_partitions(g in small_graph(7)) {
        let a = arboricity_exact(&g).unwrap();
        prop_assert_eq!(a, forest_partition_number(&g));
        if a > 0 {
            let k = degeneracy(&g);
            prop_assert!(a <= k && k < 2 * a, "alpha {} degeneracy {}", a, k);
        }
    }

    #[test]
    fn ground_truth_brackets_contain_exact_value(g in small_graph(10)) {
        prop_assume!(g.m() > 0);
        let exact = arboricity_exact(&g).unwrap();
        let t = ground_truth(&g, 0).unwrap();
        prop_assert!(t.arboricity_lower <= exact && exact <= t.arboricity_upper);
        prop_assert_eq!(ground_truth(&g, 15).unwrap().arboricity(), Some(exact));
    }

    #[test]
    fn edge_lists_round_trip(g in small_graph(15)) {
        let text = g.to_edge_list_string();
        let back = Graph::parse_edge_list(&text).unwrap();
        prop_assert_eq!(&back, &g);
        prop_assert_eq!(back.to_edge_list_string(), text);
    }

    #[test]
    fn generated_graphs_round_trip(n in 2usize..300, p in 0.0f64..0.3, seed in any::<u64>()) {
        let g = gen_er(n, p, seed).unwrap();
        prop_assert_eq!(Graph::parse_edge_list(&g.to_edge_list_string()).unwrap(), g);
    }

    #[test]
    fn clique_matching_degrees(kk in 0usize..6, s in 2usize..9, extra in 0usize..20, seed in any::<u64>()) {
        let n = kk * s + 2 * extra;
        prop_assume!(n >= 2);
        let inst = gen_clique_matching(n, s, kk, seed).unwrap();
        prop_assert_eq!(inst.graph.m(), inst.expected_edges());
        if s > 2 {
            let in_cliques = inst.graph.degrees().filter(|&d| d as usize == s - 1).count();
            prop_assert_eq!(in_cliques, kk * s);
        }
        prop_assert_eq!(inst.truth.avg_degree, inst.graph.avg_degree().unwrap());
    }

    #[test]
    fn regular_graphs_are_estimated_exactly(n in 5usize..60, offsets in proptest::collection::btree_set(1usize..4, 1..3), seed in any::<u64>()) {
        let offsets: Vec<usize> = offsets.into_iter().collect();
        let g = gen_circulant(n, &offsets).unwrap();
        let d = g.degree(0) as u128;
        prop_assume!(g.degrees().all(|x| x as u128 == d));
        let cfg = EstimatorConfig::new(0.3, 0.2).unwrap();
        prop_assert_eq!(estimate_average_degree(&g, &cfg, seed).unwrap().d_hat, Ratio::from_integer(d));
        if n <= 12 {
            let c = EstimatorConfig { epsilon: 0.9, delta: 0.45, ..cfg.with_sampling(Sampling::PerQuery) };
            prop_assert_eq!(estimate_average_degree(&g, &c, seed).unwrap().d_hat, Ratio::from_integer(d));
        }
    }

    #[test]
    fn bulk_queries_advance_counters_exactly(g in small_graph(10), count in 1u64..10_000, seed in any::<u64>()) {
        prop_assume!(g.m() > 0);
        let mut o = QueryOracle::new(&g, seed);
        let h = o.q_degree_random_bulk(count).unwrap();
        prop_assert_eq!(h.iter().map(|&(_, c)| c).sum::<u64>(), count);
        let e = o.q_edge_endpoint_degrees_bulk(count).unwrap();
        prop_assert_eq!(e.iter().map(|&(_, c)| c).sum::<u64>(), count);
        prop_assert!(e.iter().all(|&(d, _)| d > 0));
        let c = o.counters();
        prop_assert_eq!((c.degree_random, c.rand_edge, c.degree_of), (count, count, count));
    }
}

/// Pearson χ² statistic of observed counts against expected probabilities.
fn chi_square(observed: &[u64], probs: &[f64]) -> f64 {
    let total: u64 = observed.iter().sum();
    observed
        .iter()
        .zip(probs)
        .map(|(&o, &p)| (o as f64 - total as f64 * p).powi(2) / (total as f64 * p))
        .sum()
}

#[test]
fn bulk_degree_histograms_fit_the_degree_distribution() {
    let g = gen_clique_matching(3_000, 7, 100, 5).unwrap().graph;
    let classes = g.degree_classes().to_vec();
    let n = g.n() as f64;
    let two_m = 2.0 * g.m() as f64;
    let vertex_probs: Vec<f64> = classes.iter().map(|c| c.count as f64 / n).collect();
    let endpoint_probs: Vec<f64> = classes
        .iter()
        .map(|c| (c.degree as f64 * c.count as f64) / two_m)
        .collect();
    let critical = ChiSquared::new((classes.len() - 1) as f64)
        .unwrap()
        .inverse_cdf(0.999);
    let mut o = QueryOracle::new(&g, 17);
    let tally = |h: Vec<(u32, u64)>| {
        classes
            .iter()
            .map(|c| {
                h.iter()
                    .find(|&&(d, _)| d == c.degree)
                    .map_or(0, |&(_, k)| k)
            })
            .collect::<Vec<u64>>()
    };
    let vertex = tally(o.q_degree_random_bulk(200_000).unwrap());
    let endpoint = tally(o.q_edge_endpoint_degrees_bulk(200_000).unwrap());
    assert!(chi_square(&vertex, &vertex_probs) < critical);
    assert!(chi_square(&endpoint, &endpoint_probs) < critical);

    // The per-query path against the same distributions.
    let mut vertex = vec![0u64; classes.len()];
    let mut endpoint = vec![0u64; classes.len()];
    let idx = |d: u32| classes.iter().position(|c| c.degree == d).unwrap();
    for _ in 0..50_000 {
        let (_, d) = o.q_degree_random().unwrap();
        vertex[idx(d)] += 1;
        let (u, _) = o.q_rand_edge().unwrap();
        endpoint[idx(g.degree(u))] += 1;
    }
    assert!(chi_square(&vertex, &vertex_probs) < critical);
    assert!(chi_square(&endpoint, &endpoint_probs) < critical);
}
