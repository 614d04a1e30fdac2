use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::matrix::DistanceMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub length: f64,
}

/// An unrooted tree. Nodes `0..labels.len()` are the leaves, in label
/// order; higher ids are internal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhyloTree {
    pub labels: Vec<String>,
    pub node_count: usize,
    pub edges: Vec<Edge>,
    /// Notes from construction, such as clamped negative branch lengths.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl PhyloTree {
    pub fn leaf_count(&self) -> usize {
        self.labels.len()
    }

    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.node_count];
        for e in &self.edges {
            adj[e.a].push((e.b, e.length));
            adj[e.b].push((e.a, e.length));
        }
        adj
    }

    /// Connected, acyclic, leaves of degree 1 and internal nodes of degree 3.
    pub fn is_binary(&self) -> bool {
        let n = self.leaf_count();
        if self.edges.len() + 1 != self.node_count {
            return false;
        }
        let adj = self.adjacency();
        let degrees_ok = adj.iter().enumerate().all(|(v, nb)| match (v < n, n) {
            (true, 1) => nb.is_empty(),
            (true, _) => nb.len() == 1,
            (false, _) => nb.len() == 3,
        });
        degrees_ok && self.reachable_from(0, usize::MAX).len() == self.node_count
    }

    /// Nodes reachable from `start` without crossing to `blocked`.
    fn reachable_from(&self, start: usize, blocked: usize) -> Vec<usize> {
        let adj = self.adjacency();
        let mut seen = vec![false; self.node_count];
        let mut stack = vec![start];
        let mut out = Vec::new();
        seen[start] = true;
        if blocked < self.node_count {
            seen[blocked] = true;
        }
        while let Some(v) = stack.pop() {
            out.push(v);
            for &(w, _) in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        out
    }

    /// Path lengths between leaves, with labels sorted.
    pub fn leaf_distances(&self) -> DistanceMatrix {
        let n = self.leaf_count();
        let adj = self.adjacency();
        let mut d = vec![vec![0.0; n]; n];
        for (i, row) in d.iter_mut().enumerate() {
            let mut dist = vec![f64::NAN; self.node_count];
            dist[i] = 0.0;
            let mut stack = vec![i];
            while let Some(v) = stack.pop() {
                for &(w, len) in &adj[v] {
                    if dist[w].is_nan() {
                        dist[w] = dist[v] + len;
                        stack.push(w);
                    }
                }
            }
            row.copy_from_slice(&dist[..n]);
        }
        DistanceMatrix {
            labels: self.labels.clone(),
            d,
        }
        .sorted()
    }

    /// Non-trivial bipartitions, each given by the side without the
    /// smallest label. Two trees over the same labels have the same
    /// topology exactly when their split sets agree.
    pub fn splits(&self) -> BTreeSet<Vec<String>> {
        let n = self.leaf_count();
        let smallest = (0..n).min_by(|&a, &b| self.labels[a].cmp(&self.labels[b]));
        let mut out = BTreeSet::new();
        for e in &self.edges {
            let side: Vec<usize> = self.reachable_from(e.b, e.a).into_iter().filter(|&v| v < n).collect();
            if side.len() < 2 || side.len() > n - 2 {
                continue;
            }
            let side = if side.contains(&smallest.unwrap()) {
                (0..n).filter(|v| !side.contains(v)).collect()
            } else {
                side
            };
            let mut names: Vec<String> = side.iter().map(|&v| self.labels[v].clone()).collect();
            names.sort();
            out.insert(names);
        }
        out
    }
}

impl DistanceMatrix {
    /// The same distances with labels in sorted order.
    pub fn sorted(&self) -> DistanceMatrix {
        let mut order: Vec<usize> = (0..self.labels.len()).collect();
        order.sort_by(|&a, &b| self.labels[a].cmp(&self.labels[b]));
        DistanceMatrix {
            labels: order.iter().map(|&i| self.labels[i].clone()).collect(),
            d: order.iter().map(|&i| order.iter().map(|&j| self.d[i][j]).collect()).collect(),
        }
    }
}

/// A random binary tree over `labels` grown by stepwise addition, with
/// edge lengths drawn from `length`.
pub fn random_tree<R: Rng + ?Sized>(labels: &[String], rng: &mut R, mut length: impl FnMut(&mut R) -> f64) -> PhyloTree {
    let n = labels.len();
    let mut tree = PhyloTree {
        labels: labels.to_vec(),
        node_count: n,
        edges: Vec::new(),
        warnings: Vec::new(),
    };
    match n {
        0 | 1 => return tree,
        2 => {
            tree.edges.push(Edge { a: 0, b: 1, length: length(rng) });
            return tree;
        }
        _ => {}
    }
    let centre = tree.node_count;
    tree.node_count += 1;
    for leaf in 0..3 {
        tree.edges.push(Edge { a: leaf, b: centre, length: length(rng) });
    }
    for leaf in 3..n {
        let k = rng.gen_range(0..tree.edges.len());
        let Edge { a, b, .. } = tree.edges[k];
        let mid = tree.node_count;
        tree.node_count += 1;
        tree.edges[k] = Edge { a, b: mid, length: length(rng) };
        tree.edges.push(Edge { a: mid, b, length: length(rng) });
        tree.edges.push(Edge { a: leaf, b: mid, length: length(rng) });
    }
    tree
}
