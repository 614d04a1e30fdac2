use std::collections::BTreeMap;

use ludeme::corpus;
use ludeme::grammar::{generate::random_tree as random_rules, Catalog};
use ludeme::phylo::{
    distance_matrix, from_newick, genotype_distance, neighbor_joining, random_tree, to_newick, Abstraction,
    DistanceMatrix, Edge, PhyloTree,
};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("g{i}")).collect()
}

/// Dyadic lengths keep path sums exact.
fn dyadic(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(1..=32) as f64 / 16.0
}

fn from_tree(t: &PhyloTree) -> DistanceMatrix {
    let sorted = t.leaf_distances();
    // Back to the tree's own label order.
    let idx: Vec<usize> = t.labels.iter().map(|l| sorted.labels.iter().position(|s| s == l).unwrap()).collect();
    DistanceMatrix::new(t.labels.clone(), idx.iter().map(|&i| idx.iter().map(|&j| sorted.d[i][j]).collect()).collect())
        .unwrap()
}

fn close(a: &DistanceMatrix, b: &DistanceMatrix, tol: f64) -> bool {
    let (a, b) = (a.sorted(), b.sorted());
    a.labels == b.labels && a.d.iter().flatten().zip(b.d.iter().flatten()).all(|(x, y)| (x - y).abs() <= tol)
}

/// Edge lengths keyed by the leaf set on the side away from the smallest label.
fn edge_lengths(t: &PhyloTree) -> BTreeMap<Vec<String>, f64> {
    let adj = t.adjacency();
    let n = t.leaf_count();
    let smallest = (0..n).min_by(|&a, &b| t.labels[a].cmp(&t.labels[b])).unwrap();
    let side = |from: usize, blocked: usize| {
        let mut seen = vec![false; t.node_count];
        seen[blocked] = true;
        seen[from] = true;
        let mut stack = vec![from];
        let mut leaves = Vec::new();
        while let Some(v) = stack.pop() {
            if v < n {
                leaves.push(v);
            }
            for &(w, _) in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        leaves
    };
    t.edges
        .iter()
        .map(|e| {
            let mut s = side(e.b, e.a);
            if s.contains(&smallest) {
                s = side(e.a, e.b);
            }
            let mut names: Vec<String> = s.iter().map(|&v| t.labels[v].clone()).collect();
            names.sort();
            (names, e.length)
        })
        .collect()
}

#[test]
fn neighbor_joining_recovers_additive_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut exact = 0;
    for k in 0..100 {
        let n = 2 + k % 7;
        let truth = random_tree(&labels(n), &mut rng, dyadic);
        let built = neighbor_joining(&from_tree(&truth)).unwrap();
        assert!(built.warnings.is_empty());
        assert!(n == 2 || built.is_binary());
        if built.splits() == truth.splits() && close(&built.leaf_distances(), &truth.leaf_distances(), 1e-9) {
            exact += 1;
        }
    }
    assert_eq!(exact, 100);
}

/// All 15 unrooted binary topologies on five leaves, by stepwise addition.
fn five_leaf_topologies() -> Vec<PhyloTree> {
    let mut out = Vec::new();
    for e3 in 0..3 {
        for e4 in 0..5 {
            let mut t = PhyloTree {
                labels: labels(5),
                node_count: 6,
                edges: (0..3).map(|a| Edge { a, b: 5, length: 1.0 }).collect(),
                warnings: vec![],
            };
            for (leaf, k) in [(3, e3), (4, e4)] {
                let Edge { a, b, .. } = t.edges[k];
                let mid = t.node_count;
                t.node_count += 1;
                t.edges[k] = Edge { a, b: mid, length: 1.0 };
                t.edges.push(Edge { a: mid, b, length: 1.0 });
                t.edges.push(Edge { a: leaf, b: mid, length: 1.0 });
            }
            out.push(t);
        }
    }
    out
}

/// Least-squares edge lengths for a topology; returns the fitted tree and
/// the residual norm.
fn fit(topology: &PhyloTree, m: &DistanceMatrix) -> (PhyloTree, f64) {
    let n = topology.leaf_count();
    let adj = topology.adjacency();
    let edge_index = |a: usize, b: usize| topology.edges.iter().position(|e| (e.a, e.b) == (a, b) || (e.b, e.a) == (a, b)).unwrap();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..i).map(move |j| (i, j))).collect();
    let mut a = DMatrix::<f64>::zeros(pairs.len(), topology.edges.len());
    for (row, &(i, j)) in pairs.iter().enumerate() {
        // Walk parents from j back to i.
        let mut parent = vec![usize::MAX; topology.node_count];
        parent[i] = i;
        let mut stack = vec![i];
        while let Some(v) = stack.pop() {
            for &(w, _) in &adj[v] {
                if parent[w] == usize::MAX {
                    parent[w] = v;
                    stack.push(w);
                }
            }
        }
        let mut v = j;
        while v != i {
            a[(row, edge_index(v, parent[v]))] = 1.0;
            v = parent[v];
        }
    }
    let b = DVector::from_iterator(pairs.len(), pairs.iter().map(|&(i, j)| m.d[i][j]));
    let x = a.clone().svd(true, true).solve(&b, 1e-12).unwrap();
    let residual = (&a * &x - &b).norm();
    let mut fitted = topology.clone();
    for (e, len) in fitted.edges.iter_mut().zip(x.iter()) {
        e.length = *len;
    }
    (fitted, residual)
}

#[test]
fn five_leaves_match_the_least_squares_oracle() {
    let topologies = five_leaf_topologies();
    assert_eq!(topologies.len(), 15);
    let distinct: std::collections::BTreeSet<_> = topologies.iter().map(|t| t.splits()).collect();
    assert_eq!(distinct.len(), 15);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let truth = random_tree(&labels(5), &mut rng, dyadic);
        let m = from_tree(&truth);
        let (best, residual) = topologies
            .iter()
            .map(|t| fit(t, &m))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        assert!(residual < 1e-9);
        let nj = neighbor_joining(&m).unwrap();
        assert_eq!(nj.splits(), best.splits());
        let (got, want) = (edge_lengths(&nj), edge_lengths(&best));
        assert_eq!(got.keys().collect::<Vec<_>>(), want.keys().collect::<Vec<_>>());
        for (k, v) in &got {
            assert!((v - want[k]).abs() < 1e-9, "{k:?}: {v} vs {}", want[k]);
        }
    }
}

#[test]
fn corpus_matrix_matches_golden() {
    let named: Vec<(String, _)> = corpus::games().into_iter().map(|g| (g.name, g.tree)).collect();
    let m = distance_matrix(&named, Abstraction::Categories).unwrap();
    let golden = DistanceMatrix::from_csv(include_str!("golden/corpus_distances.csv")).unwrap();
    assert_eq!(m, golden);
    let at = |a: &str, b: &str| {
        let i = m.labels.iter().position(|l| l == a).unwrap();
        let j = m.labels.iter().position(|l| l == b).unwrap();
        m.d[i][j]
    };
    // Hand-counted: 16 shared paths of 19 distinct; identical once
    // integers are abstracted; 15 shared of 23.
    assert_eq!(at("Tic-Tac-Toe", "Four in a Row"), 1.0 - 16.0 / 19.0);
    assert_eq!(at("Gomoku 7x7", "Four in a Row"), 0.0);
    assert_eq!(at("Tic-Tac-Toe", "Three Men's Morris"), 1.0 - 15.0 / 23.0);
    let raw = distance_matrix(&named, Abstraction::RawIntegers).unwrap();
    assert!(raw.d.iter().flatten().zip(m.d.iter().flatten()).all(|(r, a)| r >= a));
}

#[test]
fn corpus_tree_groups_families() {
    let named: Vec<(String, _)> = corpus::games().into_iter().map(|g| (g.name, g.tree)).collect();
    let t = neighbor_joining(&distance_matrix(&named, Abstraction::Categories).unwrap()).unwrap();
    assert!(t.is_binary());
    let nwk = to_newick(&t);
    let back = from_newick(&nwk).unwrap();
    assert_eq!(back.splits(), t.splits());
    // The three race games form a clade.
    let races: Vec<String> =
        ["Game of the Goose", "Royal Game of Ur", "Tab"].iter().map(|s| s.to_string()).collect();
    let clade = t.splits().iter().any(|s| *s == races) || {
        let mut rest: Vec<String> = t.labels.iter().filter(|l| !races.contains(l)).cloned().collect();
        rest.sort();
        t.splits().contains(&rest)
    };
    assert!(clade, "{nwk}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn genotype_distance_is_a_metric(seed: u64, raw: bool) {
        let catalog = Catalog::v1();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let [a, b, c] = [0; 3].map(|_| random_rules(&catalog, &mut rng));
        let mode = if raw { Abstraction::RawIntegers } else { Abstraction::Categories };
        let d = |x, y| genotype_distance(x, y, mode);
        prop_assert_eq!(d(&a, &a), 0.0);
        prop_assert_eq!(d(&a, &b), d(&b, &a));
        prop_assert!((0.0..=1.0).contains(&d(&a, &b)));
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-12);
    }

    #[test]
    fn newick_round_trips(seed: u64, n in 2usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_tree(&labels(n), &mut rng, |r| r.gen_range(0..1_000_000) as f64 / 1e6);
        let back = from_newick(&to_newick(&t)).unwrap();
        prop_assert_eq!(back.splits(), t.splits());
        prop_assert!(close(&back.leaf_distances(), &t.leaf_distances(), 1e-6 * n as f64));
        prop_assert_eq!(to_newick(&back), to_newick(&t));
    }
}

#[test]
#[ignore]
fn regenerate_golden_matrix() {
    let named: Vec<(String, _)> = corpus::games().into_iter().map(|g| (g.name, g.tree)).collect();
    let m = distance_matrix(&named, Abstraction::Categories).unwrap();
    std::fs::write(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/corpus_distances.csv"), m.to_csv()).unwrap();
}
