use super::tree::{Edge, PhyloTree};
use super::PhyloError;

const SPECIAL: &[char] = &['(', ')', '[', ']', '\'', ':', ';', ',', ' ', '\t', '\n', '_'];

fn quote(label: &str) -> String {
    if label.is_empty() || label.contains(SPECIAL) {
        format!("'{}'", label.replace('\'', "''"))
    } else {
        label.to_string()
    }
}

/// Newick text with 6-decimal branch lengths. Unrooted trees are written
/// from the internal node next to the smallest label; children are
/// ordered by their smallest descendant label. Two leaves are split at the
/// midpoint of their edge.
pub fn to_newick(t: &PhyloTree) -> String {
    let n = t.leaf_count();
    match n {
        0 => return ";".into(),
        1 => return format!("{};", quote(&t.labels[0])),
        2 => {
            let half = t.edges.first().map_or(0.0, |e| e.length / 2.0);
            let mut ls: Vec<&String> = t.labels.iter().collect();
            ls.sort();
            return format!("({}:{half:.6},{}:{half:.6});", quote(ls[0]), quote(ls[1]));
        }
        _ => {}
    }
    let adj = t.adjacency();
    let first = (0..n).min_by(|&a, &b| t.labels[a].cmp(&t.labels[b])).expect("leaves");
    let root = adj[first][0].0;

    // Smallest descendant label of the subtree at `v` away from `parent`.
    fn smallest<'a>(t: &'a PhyloTree, adj: &[Vec<(usize, f64)>], v: usize, parent: usize) -> &'a str {
        if v < t.leaf_count() {
            return &t.labels[v];
        }
        adj[v].iter().filter(|(w, _)| *w != parent).map(|&(w, _)| smallest(t, adj, w, v)).min().unwrap_or("")
    }
    fn write(t: &PhyloTree, adj: &[Vec<(usize, f64)>], v: usize, parent: usize, out: &mut String) {
        if v < t.leaf_count() {
            out.push_str(&quote(&t.labels[v]));
            return;
        }
        let mut kids: Vec<(usize, f64)> = adj[v].iter().copied().filter(|(w, _)| *w != parent).collect();
        kids.sort_by(|a, b| smallest(t, adj, a.0, v).cmp(smallest(t, adj, b.0, v)));
        out.push('(');
        for (k, (w, len)) in kids.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            write(t, adj, *w, v, out);
            out.push_str(&format!(":{len:.6}"));
        }
        out.push(')');
    }
    let mut out = String::new();
    write(t, &adj, root, usize::MAX, &mut out);
    out.push(';');
    out
}

struct Node {
    label: Option<String>,
    length: f64,
    children: Vec<usize>,
}

struct Reader<'a> {
    s: &'a [u8],
    pos: usize,
    nodes: Vec<Node>,
}

impl Reader<'_> {
    fn err(&self, message: impl Into<String>) -> PhyloError {
        PhyloError::Newick {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn label(&mut self) -> Result<Option<String>, PhyloError> {
        match self.peek() {
            Some(b'\'') => {
                self.pos += 1;
                let mut out = Vec::new();
                loop {
                    match self.s.get(self.pos) {
                        None => return Err(self.err("unterminated quoted label")),
                        Some(b'\'') if self.s.get(self.pos + 1) == Some(&b'\'') => {
                            out.push(b'\'');
                            self.pos += 2;
                        }
                        Some(b'\'') => {
                            self.pos += 1;
                            break;
                        }
                        Some(&c) => {
                            out.push(c);
                            self.pos += 1;
                        }
                    }
                }
                String::from_utf8(out).map(Some).map_err(|_| self.err("label is not UTF-8"))
            }
            _ => {
                let start = self.pos;
                while self.pos < self.s.len() && !b"(),:;[]' \t\r\n".contains(&self.s[self.pos]) {
                    self.pos += 1;
                }
                if start == self.pos {
                    return Ok(None);
                }
                let raw = std::str::from_utf8(&self.s[start..self.pos]).map_err(|_| self.err("label is not UTF-8"))?;
                Ok(Some(raw.replace('_', " ")))
            }
        }
    }

    fn length(&mut self) -> Result<f64, PhyloError> {
        if self.peek() != Some(b':') {
            return Ok(0.0);
        }
        self.pos += 1;
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && (self.s[self.pos].is_ascii_digit() || b"+-.eE".contains(&self.s[self.pos])) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.s[start..self.pos])
            .ok()
            .and_then(|x| x.parse().ok())
            .ok_or_else(|| self.err("bad branch length"))
    }

    fn subtree(&mut self) -> Result<usize, PhyloError> {
        let mut children = Vec::new();
        if self.peek() == Some(b'(') {
            self.pos += 1;
            loop {
                children.push(self.subtree()?);
                match self.peek() {
                    Some(b',') => self.pos += 1,
                    Some(b')') => {
                        self.pos += 1;
                        break;
                    }
                    _ => return Err(self.err("expected `,` or `)`")),
                }
            }
        }
        let label = self.label()?;
        if children.is_empty() && label.is_none() {
            return Err(self.err("leaf without a label"));
        }
        let length = self.length()?;
        self.nodes.push(Node { label, length, children });
        Ok(self.nodes.len() - 1)
    }
}

/// Reads Newick text back into an unrooted tree. A root with two children
/// is dissolved into a single edge. Internal node labels are ignored.
pub fn from_newick(text: &str) -> Result<PhyloTree, PhyloError> {
    let mut r = Reader {
        s: text.as_bytes(),
        pos: 0,
        nodes: Vec::new(),
    };
    let root = r.subtree()?;
    if r.peek() != Some(b';') {
        return Err(r.err("expected `;`"));
    }
    r.pos += 1;
    if r.peek().is_some() {
        return Err(r.err("text after `;`"));
    }
    let nodes = r.nodes;
    let leaves: Vec<usize> = (0..nodes.len()).filter(|&v| nodes[v].children.is_empty()).collect();
    let labels: Vec<String> = leaves.iter().map(|&v| nodes[v].label.clone().unwrap_or_default()).collect();
    let mut id = vec![usize::MAX; nodes.len()];
    for (k, &v) in leaves.iter().enumerate() {
        id[v] = k;
    }
    let mut next = leaves.len();
    let dissolve = nodes[root].children.len() == 2;
    for (v, slot) in id.iter_mut().enumerate() {
        if *slot == usize::MAX && !(dissolve && v == root) {
            *slot = next;
            next += 1;
        }
    }
    let mut edges = Vec::new();
    for (v, node) in nodes.iter().enumerate() {
        if dissolve && v == root {
            continue;
        }
        for &c in &node.children {
            edges.push(Edge { a: id[v], b: id[c], length: nodes[c].length });
        }
    }
    if dissolve {
        let (x, y) = (nodes[root].children[0], nodes[root].children[1]);
        edges.push(Edge { a: id[x], b: id[y], length: nodes[x].length + nodes[y].length });
    }
    let tree = PhyloTree {
        labels,
        node_count: next,
        edges,
        warnings: Vec::new(),
    };
    let mut sorted = tree.labels.clone();
    sorted.sort();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(PhyloError::DuplicateName(w[0].clone()));
    }
    Ok(tree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phylo::{neighbor_joining, DistanceMatrix};

    fn m(labels: &[&str], d: Vec<Vec<f64>>) -> DistanceMatrix {
        DistanceMatrix::new(labels.iter().map(|s| s.to_string()).collect(), d).unwrap()
    }

    #[test]
    fn two_leaves_split_at_midpoint() {
        let t = neighbor_joining(&m(&["B", "A"], vec![vec![0.0, 0.4], vec![0.4, 0.0]])).unwrap();
        assert_eq!(to_newick(&t), "(A:0.200000,B:0.200000);");
        let back = from_newick("(A:0.200000,B:0.200000);").unwrap();
        assert_eq!(back.edges.len(), 1);
        assert!((back.edges[0].length - 0.4).abs() < 1e-12);
    }

    #[test]
    fn three_leaf_star_golden() {
        let t = neighbor_joining(&m(
            &["A", "B", "C"],
            vec![vec![0.0, 0.3, 0.5], vec![0.3, 0.0, 0.6], vec![0.5, 0.6, 0.0]],
        ))
        .unwrap();
        assert_eq!(to_newick(&t), "(A:0.100000,B:0.200000,C:0.400000);");
    }

    #[test]
    fn nested_and_quoted() {
        let text = "('Tic-Tac-Toe':0.1,('Fox and Geese':0.2,'It''s':0.3):0.05,Ur:0.4);";
        let t = from_newick(text).unwrap();
        assert_eq!(t.labels, ["Tic-Tac-Toe", "Fox and Geese", "It's", "Ur"]);
        assert!(t.is_binary());
        let again = to_newick(&t);
        assert_eq!(again, "('Fox and Geese':0.200000,'It''s':0.300000,(Tic-Tac-Toe:0.100000,Ur:0.400000):0.050000);");
        assert_eq!(from_newick(&again).unwrap().splits(), t.splits());
    }

    #[test]
    fn malformed() {
        for bad in ["(A,B", "(A:x,B);", "(A,B);x", "(,B);", "(A,A);"] {
            assert!(from_newick(bad).is_err(), "{bad}");
        }
    }
}
