use std::fmt;

use serde::{Deserialize, Serialize};

/// Byte offsets `[start, end)` into the source text.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }
}

/// Player references that may appear as bare arguments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PlayerRef {
    P1,
    P2,
}

impl PlayerRef {
    pub const BOTH: [PlayerRef; 2] = [PlayerRef::P1, PlayerRef::P2];

    pub fn index(self) -> usize {
        match self {
            PlayerRef::P1 => 0,
            PlayerRef::P2 => 1,
        }
    }

    pub fn opponent(self) -> PlayerRef {
        match self {
            PlayerRef::P1 => PlayerRef::P2,
            PlayerRef::P2 => PlayerRef::P1,
        }
    }
}

impl fmt::Display for PlayerRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlayerRef::P1 => f.write_str("P1"),
            PlayerRef::P2 => f.write_str("P2"),
        }
    }
}

/// An argument of a ludeme.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Arg {
    Node(LudemeNode),
    Str(String),
    Int(i64),
    /// A bare identifier such as `Win`, `Orthogonal` or `disc`.
    Symbol(String),
    Player(PlayerRef),
    Named(String, Box<Arg>),
    Set(Vec<Arg>),
    Hole(Hole),
}

impl Arg {
    pub fn as_node(&self) -> Option<&LudemeNode> {
        match self {
            Arg::Node(n) => Some(n),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Arg::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn as_symbol(&self) -> Option<&str> {
        match self {
            Arg::Symbol(s) => Some(s),
            _ => None,
        }
    }
}

/// One ludeme: a keyword applied to an ordered argument list.
///
/// Equality ignores `span`, so two trees compare equal when they have the
/// same structure regardless of where they were parsed from.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LudemeNode {
    pub keyword: String,
    pub args: Vec<Arg>,
    #[serde(default)]
    pub span: Span,
}

impl PartialEq for LudemeNode {
    fn eq(&self, other: &Self) -> bool {
        self.keyword == other.keyword && self.args == other.args
    }
}

impl LudemeNode {
    pub fn new(keyword: impl Into<String>, args: Vec<Arg>) -> Self {
        LudemeNode {
            keyword: keyword.into(),
            args,
            span: Span::default(),
        }
    }

    /// Named argument lookup.
    pub fn named(&self, name: &str) -> Option<&Arg> {
        self.args.iter().find_map(|a| match a {
            Arg::Named(n, v) if n == name => Some(v.as_ref()),
            _ => None,
        })
    }

    pub fn positional(&self) -> impl Iterator<Item = &Arg> {
        self.args.iter().filter(|a| !matches!(a, Arg::Named(..)))
    }

    /// Child nodes in argument order, looking through sets and named args.
    pub fn child_nodes(&self) -> Vec<&LudemeNode> {
        fn collect<'a>(arg: &'a Arg, out: &mut Vec<&'a LudemeNode>) {
            match arg {
                Arg::Node(n) => out.push(n),
                Arg::Named(_, v) => collect(v, out),
                Arg::Set(items) => items.iter().for_each(|i| collect(i, out)),
                _ => {}
            }
        }
        let mut out = Vec::new();
        self.args.iter().for_each(|a| collect(a, &mut out));
        out
    }

    /// Number of ludeme nodes in this subtree, including `self`.
    /// Hole options are not counted.
    pub fn node_count(&self) -> usize {
        1 + self.child_nodes().iter().map(|c| c.node_count()).sum::<usize>()
    }

    /// All keywords in this subtree, pre-order.
    pub fn keywords(&self) -> Vec<&str> {
        let mut out = vec![self.keyword.as_str()];
        for c in self.child_nodes() {
            out.extend(c.keywords());
        }
        out
    }
}

/// An unknown ludeme in a partial game.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Hole {
    pub category: String,
    /// Explicit alternatives. Empty means every catalog member of `category`.
    pub options: Vec<LudemeNode>,
    #[serde(default)]
    pub span: Span,
}

impl PartialEq for Hole {
    fn eq(&self, other: &Self) -> bool {
        self.category == other.category && self.options == other.options
    }
}

/// A parsed rule description. The root is always a `game` ludeme.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LudemeTree {
    pub root: LudemeNode,
}

impl LudemeTree {
    /// The game's name: the first string argument of the root.
    pub fn name(&self) -> Option<&str> {
        self.root.args.iter().find_map(|a| match a {
            Arg::Str(s) => Some(s.as_str()),
            _ => None,
        })
    }

    pub fn node_count(&self) -> usize {
        self.root.node_count()
    }

    /// Holes reachable from the root, in pre-order (this order defines hole ids).
    pub fn holes(&self) -> Vec<&Hole> {
        fn walk<'a>(arg: &'a Arg, out: &mut Vec<&'a Hole>) {
            match arg {
                Arg::Hole(h) => out.push(h),
                Arg::Node(n) => n.args.iter().for_each(|a| walk(a, out)),
                Arg::Named(_, v) => walk(v, out),
                Arg::Set(items) => items.iter().for_each(|a| walk(a, out)),
                _ => {}
            }
        }
        let mut out = Vec::new();
        self.root.args.iter().for_each(|a| walk(a, &mut out));
        out
    }

    pub fn hole_count(&self) -> usize {
        self.holes().len()
    }

    /// Replace holes in pre-order with the given nodes. `fill.len()` must equal
    /// the hole count.
    pub fn fill_holes(&self, fill: &[LudemeNode]) -> LudemeTree {
        fn walk(arg: &mut Arg, fill: &[LudemeNode], next: &mut usize) {
            match arg {
                Arg::Hole(_) => {
                    *arg = Arg::Node(fill[*next].clone());
                    *next += 1;
                }
                Arg::Node(n) => n.args.iter_mut().for_each(|a| walk(a, fill, next)),
                Arg::Named(_, v) => walk(v, fill, next),
                Arg::Set(items) => items.iter_mut().for_each(|a| walk(a, fill, next)),
                _ => {}
            }
        }
        assert_eq!(fill.len(), self.hole_count(), "one filler per hole");
        let mut tree = self.clone();
        let mut next = 0;
        tree.root.args.iter_mut().for_each(|a| walk(a, fill, &mut next));
        tree
    }
}
