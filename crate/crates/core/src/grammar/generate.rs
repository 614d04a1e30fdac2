//! Random catalog-valid trees, for fuzzing the parser, printer and distance.
//!
//! Generated trees always validate; they need not compile into a playable game.

use rand::seq::SliceRandom;
use rand::Rng;

use super::ast::{Arg, LudemeNode, LudemeTree, PlayerRef};
use super::catalog::{ArgKind, Catalog, Repeat, Signature};

const STRING_CHARS: &[char] = &['a', 'Z', '0', ' ', '-', '"', '\\', 'é', 'ᚺ', '\'', '#', '(', '}'];

pub fn random_tree<R: Rng>(catalog: &Catalog, rng: &mut R) -> LudemeTree {
    let sig = &catalog.categories["game"][0];
    LudemeTree {
        root: random_node(catalog, sig, rng),
    }
}

/// A random member of `category`, or `None` if the category is unknown.
pub fn random_member<R: Rng>(catalog: &Catalog, category: &str, rng: &mut R) -> Option<LudemeNode> {
    let sig = catalog.categories.get(category)?.choose(rng)?;
    Some(random_node(catalog, sig, rng))
}

fn random_node<R: Rng>(catalog: &Catalog, sig: &Signature, rng: &mut R) -> LudemeNode {
    let mut args = Vec::new();
    for p in &sig.params {
        let n = match p.repeat {
            Repeat::One => 1,
            Repeat::Optional => rng.gen_range(0..=1),
            Repeat::Many => rng.gen_range(0..=2),
            Repeat::OneOrMore => rng.gen_range(1..=2),
        };
        for _ in 0..n {
            args.push(random_arg(catalog, &p.kind, rng));
        }
    }
    for np in &sig.named {
        if np.required || rng.gen_bool(0.5) {
            args.push(Arg::Named(np.name.to_string(), Box::new(random_arg(catalog, &np.kind, rng))));
        }
    }
    LudemeNode::new(sig.keyword, args)
}

fn random_arg<R: Rng>(catalog: &Catalog, kind: &ArgKind, rng: &mut R) -> Arg {
    match kind {
        ArgKind::Node(cat) => Arg::Node(random_member(catalog, cat, rng).expect("catalog category exists")),
        ArgKind::Int { min, max } => Arg::Int(rng.gen_range(*min..=*max)),
        ArgKind::Str => {
            let len = rng.gen_range(0..8);
            Arg::Str((0..len).map(|_| *STRING_CHARS.choose(rng).unwrap()).collect())
        }
        ArgKind::Player => Arg::Player(if rng.gen_bool(0.5) { PlayerRef::P1 } else { PlayerRef::P2 }),
        ArgKind::Symbol(options) => Arg::Symbol(options.choose(rng).unwrap().to_string()),
        ArgKind::SetOf(inner) => {
            let n = rng.gen_range(0..=3);
            Arg::Set((0..n).map(|_| random_arg(catalog, inner, rng)).collect())
        }
        ArgKind::Either(kinds) => random_arg(catalog, kinds.choose(rng).unwrap(), rng),
    }
}
