use super::matrix::DistanceMatrix;
use super::tree::{Edge, PhyloTree};
use super::PhyloError;

/// Saitou-Nei neighbour joining. Ties in the Q criterion go to the pair
/// whose smallest descendant labels sort first; negative branch lengths
/// are set to 0 and noted in `warnings`.
pub fn neighbor_joining(m: &DistanceMatrix) -> Result<PhyloTree, PhyloError> {
    m.check()?;
    let n = m.len();
    if n < 2 {
        return Err(PhyloError::Matrix("neighbour joining needs at least 2 labels".into()));
    }
    let total = 2 * n - 2;
    let mut d = vec![vec![0.0; total]; total];
    for (row, src) in d.iter_mut().zip(&m.d) {
        row[..n].copy_from_slice(src);
    }
    let mut names: Vec<String> = m.labels.clone();
    let mut active: Vec<usize> = (0..n).collect();
    let mut tree = PhyloTree {
        labels: m.labels.clone(),
        node_count: n,
        edges: Vec::new(),
        warnings: Vec::new(),
    };
    let clamp = |tree: &mut PhyloTree, len: f64, what: String| {
        if len < 0.0 {
            log::warn!("negative branch length {len} for {what}, set to 0");
            tree.warnings.push(format!("negative branch length {len:.6} for {what} set to 0"));
            0.0
        } else {
            len
        }
    };
    while active.len() > 2 {
        let r = active.len();
        let row_sum: Vec<f64> = active.iter().map(|&i| active.iter().map(|&k| d[i][k]).sum()).collect();
        let mut best: Option<(f64, (&str, &str), usize, usize)> = None;
        for a in 0..r {
            for b in a + 1..r {
                let (i, j) = (active[a], active[b]);
                let q = (r as f64 - 2.0) * d[i][j] - row_sum[a] - row_sum[b];
                let key = if names[i] <= names[j] { (names[i].as_str(), names[j].as_str()) } else { (names[j].as_str(), names[i].as_str()) };
                let better = match &best {
                    None => true,
                    Some((bq, bkey, ..)) => {
                        let eps = 1e-10 * bq.abs().max(1.0);
                        q < bq - eps || (q <= bq + eps && key < *bkey)
                    }
                };
                if better {
                    best = Some((q, key, a, b));
                }
            }
        }
        let (_, _, a, b) = best.expect("at least one pair");
        let (i, j) = (active[a], active[b]);
        let dij = d[i][j];
        let mut li = dij / 2.0 + (row_sum[a] - row_sum[b]) / (2.0 * (r as f64 - 2.0));
        let mut lj = dij - li;
        if li < 0.0 {
            li = clamp(&mut tree, li, format!("cluster of {}", names[i]));
            lj = dij;
        } else if lj < 0.0 {
            lj = clamp(&mut tree, lj, format!("cluster of {}", names[j]));
            li = dij;
        }
        let u = tree.node_count;
        tree.node_count += 1;
        tree.edges.push(Edge { a: i, b: u, length: li });
        tree.edges.push(Edge { a: j, b: u, length: lj });
        for &k in &active {
            if k != i && k != j {
                let v = (d[i][k] + d[j][k] - dij) / 2.0;
                d[u][k] = v;
                d[k][u] = v;
            }
        }
        names.push(names[i].clone().min(names[j].clone()));
        active.retain(|&k| k != i && k != j);
        active.push(u);
    }
    let (i, j) = (active[0], active[1]);
    let len = clamp(&mut tree, d[i][j], "the last edge".into());
    tree.edges.push(Edge { a: i, b: j, length: len });
    Ok(tree)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(labels: &[&str], d: Vec<Vec<f64>>) -> DistanceMatrix {
        DistanceMatrix::new(labels.iter().map(|s| s.to_string()).collect(), d).unwrap()
    }

    #[test]
    fn two_leaves() {
        let t = neighbor_joining(&matrix(&["A", "B"], vec![vec![0.0, 0.4], vec![0.4, 0.0]])).unwrap();
        assert_eq!(t.edges, vec![Edge { a: 0, b: 1, length: 0.4 }]);
    }

    #[test]
    fn three_point_star() {
        // a = (dAB + dAC - dBC)/2 and so on.
        let m = matrix(&["A", "B", "C"], vec![vec![0.0, 0.3, 0.5], vec![0.3, 0.0, 0.6], vec![0.5, 0.6, 0.0]]);
        let t = neighbor_joining(&m).unwrap();
        assert!(t.is_binary());
        let mut lens = [0.0; 3];
        for e in &t.edges {
            lens[e.a.min(e.b)] = e.length;
        }
        for (got, want) in lens.iter().zip([0.1, 0.2, 0.4]) {
            assert!((got - want).abs() < 1e-12, "{lens:?}");
        }
    }

    #[test]
    fn non_additive_input_is_clamped() {
        // Violates the triangle inequality badly.
        let m = matrix(&["A", "B", "C"], vec![vec![0.0, 1.0, 0.1], vec![1.0, 0.0, 0.1], vec![0.1, 0.1, 0.0]]);
        let t = neighbor_joining(&m).unwrap();
        assert!(t.edges.iter().all(|e| e.length >= 0.0));
        assert_eq!(t.warnings.len(), 1, "{:?}", t.warnings);
    }
}
