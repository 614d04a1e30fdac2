use std::collections::BTreeMap;

use crate::grammar::{Arg, LudemeNode, LudemeTree};

/// How atoms inside a node token are written.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Abstraction {
    /// Integers become `#int` (strings are always `#str`).
    #[default]
    Categories,
    /// Integers are kept literally, so `length:3` and `length:4` differ.
    RawIntegers,
}

/// Multiset of rooted paths, one per ludeme node. A path lists the
/// keywords from the root down to the node, and its last element also
/// carries the node's non-ludeme arguments (`line(length:#int)`).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GenotypeSignature {
    pub paths: BTreeMap<String, usize>,
}

impl GenotypeSignature {
    pub fn of(tree: &LudemeTree, mode: Abstraction) -> Self {
        let mut paths = BTreeMap::new();
        walk(&tree.root, "", mode, &mut paths);
        GenotypeSignature { paths }
    }

    pub fn len(&self) -> usize {
        self.paths.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }
}

fn atom(arg: &Arg, mode: Abstraction) -> Option<String> {
    Some(match arg {
        Arg::Node(_) => return None,
        Arg::Int(i) => match mode {
            Abstraction::Categories => "#int".into(),
            Abstraction::RawIntegers => i.to_string(),
        },
        Arg::Str(_) => "#str".into(),
        Arg::Symbol(s) => s.clone(),
        Arg::Player(p) => p.to_string(),
        Arg::Named(n, v) => format!("{n}:{}", atom(v, mode)?),
        Arg::Set(items) => {
            let inner: Vec<String> = items.iter().filter_map(|a| atom(a, mode)).collect();
            if inner.is_empty() && items.iter().any(|a| matches!(a, Arg::Node(_))) {
                return None;
            }
            format!("{{{}}}", inner.join(" "))
        }
        Arg::Hole(h) => format!("?{}", h.category),
    })
}

fn walk(node: &LudemeNode, prefix: &str, mode: Abstraction, out: &mut BTreeMap<String, usize>) {
    let atoms: Vec<String> = node.args.iter().filter_map(|a| atom(a, mode)).collect();
    let token = if atoms.is_empty() { node.keyword.clone() } else { format!("{}({})", node.keyword, atoms.join(",")) };
    *out.entry(format!("{prefix}{token}")).or_insert(0) += 1;
    let child_prefix = format!("{prefix}{}/", node.keyword);
    for c in node.child_nodes() {
        walk(c, &child_prefix, mode, out);
    }
}

/// Weighted Jaccard distance between path multisets, in [0,1].
pub fn signature_distance(a: &GenotypeSignature, b: &GenotypeSignature) -> f64 {
    let (mut min, mut max) = (0usize, 0usize);
    let mut ia = a.paths.iter().peekable();
    let mut ib = b.paths.iter().peekable();
    loop {
        match (ia.peek(), ib.peek()) {
            (Some((ka, &na)), Some((kb, &nb))) => match ka.cmp(kb) {
                std::cmp::Ordering::Less => {
                    max += na;
                    ia.next();
                }
                std::cmp::Ordering::Greater => {
                    max += nb;
                    ib.next();
                }
                std::cmp::Ordering::Equal => {
                    min += na.min(nb);
                    max += na.max(nb);
                    ia.next();
                    ib.next();
                }
            },
            (Some((_, &na)), None) => {
                max += na;
                ia.next();
            }
            (None, Some((_, &nb))) => {
                max += nb;
                ib.next();
            }
            (None, None) => break,
        }
    }
    if max == 0 {
        0.0
    } else {
        1.0 - min as f64 / max as f64
    }
}

pub fn genotype_distance(a: &LudemeTree, b: &LudemeTree, mode: Abstraction) -> f64 {
    signature_distance(&GenotypeSignature::of(a, mode), &GenotypeSignature::of(b, mode))
}
