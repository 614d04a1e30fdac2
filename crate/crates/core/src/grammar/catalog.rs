//! The closed ludeme vocabulary understood by the engine.
//!
//! Every ludeme belongs to a category, and every argument position of a
//! signature names the category (or atom type) it accepts. Holes in partial
//! games are typed by category, and a hole without explicit options ranges
//! over the category's exemplars.

use std::collections::BTreeMap;

use super::ast::LudemeNode;

pub const CATALOG_VERSION: &str = "1";

pub const PIECE_KINDS: &[&str] = &["ball", "cross", "disc", "king"];
pub const DIRECTIONS: &[&str] = &["Orthogonal", "Diagonal", "All"];
pub const OUTCOMES: &[&str] = &["Win", "Loss", "Draw"];
pub const HIT_STYLES: &[&str] = &["ToStart", "Remove"];
pub const TRACK_EXIT: &str = "Off";

/// Largest board side, and so the largest site index is below `MAX_SIDE²`.
pub const MAX_SIDE: i64 = 20;

#[derive(Clone, Debug, PartialEq)]
pub enum ArgKind {
    /// A ludeme from the named category.
    Node(&'static str),
    Int { min: i64, max: i64 },
    Str,
    Player,
    Symbol(&'static [&'static str]),
    SetOf(Box<ArgKind>),
    Either(Vec<ArgKind>),
}

impl ArgKind {
    pub fn describe(&self) -> String {
        match self {
            ArgKind::Node(c) => format!("a `{c}` ludeme"),
            ArgKind::Int { min, max } => format!("an integer in [{min}, {max}]"),
            ArgKind::Str => "a string".into(),
            ArgKind::Player => "P1 or P2".into(),
            ArgKind::Symbol(s) => format!("one of {}", s.join("/")),
            ArgKind::SetOf(k) => format!("a set of {}", k.describe()),
            ArgKind::Either(ks) => ks.iter().map(|k| k.describe()).collect::<Vec<_>>().join(" or "),
        }
    }

    /// Categories referenced anywhere inside this kind.
    pub fn categories(&self) -> Vec<&'static str> {
        match self {
            ArgKind::Node(c) => vec![c],
            ArgKind::SetOf(k) => k.categories(),
            ArgKind::Either(ks) => ks.iter().flat_map(|k| k.categories()).collect(),
            _ => vec![],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Repeat {
    One,
    Optional,
    Many,
    OneOrMore,
}

#[derive(Clone, Debug)]
pub struct Param {
    pub name: &'static str,
    pub kind: ArgKind,
    pub repeat: Repeat,
}

#[derive(Clone, Debug)]
pub struct NamedParam {
    pub name: &'static str,
    pub kind: ArgKind,
    pub required: bool,
}

#[derive(Clone, Debug)]
pub struct Signature {
    pub keyword: &'static str,
    pub params: Vec<Param>,
    pub named: Vec<NamedParam>,
    /// Concrete instances used when a hole ranges over the whole category.
    pub exemplars: Vec<&'static str>,
}

impl Signature {
    fn new(keyword: &'static str) -> Self {
        Signature {
            keyword,
            params: Vec::new(),
            named: Vec::new(),
            exemplars: Vec::new(),
        }
    }

    fn arg(mut self, name: &'static str, kind: ArgKind, repeat: Repeat) -> Self {
        self.params.push(Param { name, kind, repeat });
        self
    }

    fn named(mut self, name: &'static str, kind: ArgKind, required: bool) -> Self {
        self.named.push(NamedParam { name, kind, required });
        self
    }

    fn examples(mut self, ex: &[&'static str]) -> Self {
        self.exemplars.extend_from_slice(ex);
        self
    }

    /// Minimum and maximum positional argument counts (`None` = unbounded).
    pub fn arity(&self) -> (usize, Option<usize>) {
        let mut min = 0;
        let mut max = Some(0usize);
        for p in &self.params {
            match p.repeat {
                Repeat::One => {
                    min += 1;
                    max = max.map(|m| m + 1);
                }
                Repeat::Optional => max = max.map(|m| m + 1),
                Repeat::Many => max = None,
                Repeat::OneOrMore => {
                    min += 1;
                    max = None;
                }
            }
        }
        (min, max)
    }
}

#[derive(Clone, Debug)]
pub struct Catalog {
    pub categories: BTreeMap<&'static str, Vec<Signature>>,
}

impl Default for Catalog {
    fn default() -> Self {
        Catalog::v1()
    }
}

impl Catalog {
    /// The v1 vocabulary: alignment, capture and dice-race games for two players.
    pub fn v1() -> Self {
        use ArgKind::*;
        use Repeat::*;
        let site = || Int { min: 0, max: MAX_SIDE * MAX_SIDE - 1 };
        let outcome = || Symbol(OUTCOMES);
        let mut c: BTreeMap<&'static str, Vec<Signature>> = BTreeMap::new();

        c.insert(
            "game",
            vec![Signature::new("game")
                .arg("name", Str, One)
                .arg("mode", Node("mode"), One)
                .arg("equipment", Node("equipment"), One)
                .arg("rules", Node("rules"), One)],
        );
        c.insert(
            "mode",
            vec![Signature::new("mode")
                .arg("players", Int { min: 2, max: 2 }, One)
                .arg("flag", Node("modeFlag"), Optional)
                .examples(&["(mode 2)", "(mode 2 (addToEmpty))"])],
        );
        c.insert("modeFlag", vec![Signature::new("addToEmpty").examples(&["(addToEmpty)"])]);
        c.insert(
            "equipment",
            vec![Signature::new("equipment").arg("items", SetOf(Box::new(Node("item"))), One)],
        );

        let mut items = vec![Signature::new("board")
            .arg("shape", Node("shape"), One)
            .arg("tiling", Node("tiling"), Optional)
            .arg("tracks", Node("track"), Many)];
        for (kind, ex) in [
            ("ball", &["(ball P1)", "(ball P2)"][..]),
            ("cross", &["(cross P2)"][..]),
            ("disc", &["(disc P1)", "(disc P2)"][..]),
            ("king", &["(king P1)"][..]),
        ] {
            items.push(Signature::new(kind).arg("owner", Player, One).examples(ex));
        }
        items.push(
            Signature::new("place")
                .arg("piece", Symbol(PIECE_KINDS), One)
                .arg("owner", Player, One)
                .arg("sites", SetOf(Box::new(site())), Optional)
                .named("pool", Int { min: 0, max: 64 }, false),
        );
        items.push(
            Signature::new("dice")
                .named("num", Int { min: 1, max: 8 }, true)
                .named("faces", SetOf(Box::new(Int { min: 0, max: 12 })), true)
                .examples(&["(dice num:4 faces:{0 1})", "(dice num:1 faces:{1 2 3 4 5 6})"]),
        );
        c.insert("item", items);

        c.insert(
            "shape",
            vec![
                Signature::new("square")
                    .arg("side", Int { min: 1, max: MAX_SIDE }, One)
                    .examples(&["(square 3)", "(square 4)", "(square 5)", "(square 7)"]),
                Signature::new("rect")
                    .arg("rows", Int { min: 1, max: MAX_SIDE }, One)
                    .arg("columns", Int { min: 1, max: MAX_SIDE }, One)
                    .examples(&["(rect 3 8)"]),
            ],
        );
        c.insert("tiling", vec![Signature::new("square").examples(&["(square)"])]);
        c.insert(
            "track",
            vec![Signature::new("track")
                .arg("owner", Player, One)
                .arg("sites", SetOf(Box::new(Either(vec![site(), Symbol(&[TRACK_EXIT])]))), One)],
        );
        c.insert(
            "rules",
            vec![Signature::new("rules")
                .arg("play", Node("play"), One)
                .arg("end", Node("endRule"), OneOrMore)],
        );
        c.insert(
            "play",
            vec![Signature::new("play").arg(
                "moves",
                Either(vec![Node("move"), SetOf(Box::new(Node("move")))]),
                OneOrMore,
            )],
        );
        c.insert(
            "move",
            vec![
                Signature::new("to")
                    .arg("who", Node("who"), One)
                    .arg("site", Node("site"), One)
                    .arg("capture", Node("capture"), Optional)
                    .examples(&["(to (mover) (empty))", "(to (mover) (empty) (custodial))"]),
                Signature::new("step")
                    .arg("directions", Symbol(DIRECTIONS), Optional)
                    .arg("capture", Node("capture"), Optional)
                    .examples(&["(step)", "(step All)", "(step (custodial))", "(step All (replace))"]),
                Signature::new("leap")
                    .arg("directions", Symbol(DIRECTIONS), Optional)
                    .examples(&["(leap)"]),
                Signature::new("moveByDice")
                    .named("hit", Symbol(HIT_STYLES), false)
                    .examples(&["(moveByDice)", "(moveByDice hit:ToStart)", "(moveByDice hit:Remove)"]),
            ],
        );
        c.insert(
            "capture",
            vec![
                Signature::new("custodial").examples(&["(custodial)"]),
                Signature::new("replace").examples(&["(replace)"]),
            ],
        );
        c.insert("who", vec![Signature::new("mover").examples(&["(mover)"])]);
        c.insert("site", vec![Signature::new("empty").examples(&["(empty)"])]);
        c.insert(
            "endRule",
            vec![Signature::new("end")
                .arg("conditions", Either(vec![Node("end"), SetOf(Box::new(Node("end")))]), OneOrMore)
                .arg("result", Node("result"), Optional)],
        );
        c.insert(
            "end",
            vec![
                Signature::new("line")
                    .arg("outcome", outcome(), Optional)
                    .named("length", Int { min: 1, max: MAX_SIDE }, true)
                    .examples(&["(line length:3)", "(line length:4)", "(line length:5)"]),
                Signature::new("fullBoard").arg("outcome", outcome(), Optional).examples(&["(fullBoard Draw)"]),
                Signature::new("noMoves").arg("outcome", outcome(), Optional).examples(&["(noMoves)"]),
                Signature::new("capturedAll")
                    .arg("outcome", outcome(), Optional)
                    .examples(&["(capturedAll)"]),
                Signature::new("bearOffAll")
                    .arg("outcome", outcome(), Optional)
                    .examples(&["(bearOffAll)"]),
            ],
        );
        c.insert(
            "result",
            vec![Signature::new("result")
                .arg("who", Either(vec![Node("who"), Player]), One)
                .arg("outcome", outcome(), One)
                .examples(&["(result (mover) Win)", "(result (mover) Loss)", "(result (mover) Draw)"])],
        );

        Catalog { categories: c }
    }

    pub fn signature(&self, category: &str, keyword: &str) -> Option<&Signature> {
        self.categories.get(category)?.iter().find(|s| s.keyword == keyword)
    }

    pub fn has_category(&self, category: &str) -> bool {
        self.categories.contains_key(category)
    }

    /// Whether `keyword` appears in any category.
    pub fn knows_keyword(&self, keyword: &str) -> bool {
        self.categories.values().flatten().any(|s| s.keyword == keyword)
    }

    /// Parsed exemplars of every signature in `category`, in catalog order.
    pub fn members(&self, category: &str) -> Vec<LudemeNode> {
        let Some(sigs) = self.categories.get(category) else {
            return Vec::new();
        };
        sigs.iter()
            .flat_map(|s| s.exemplars.iter())
            .map(|text| parse_fragment(text).expect("catalog exemplars are well formed"))
            .collect()
    }

    /// Structural self-check: referenced categories exist, keywords are
    /// unique per category, and every exemplar validates.
    pub fn check(&self) -> Vec<String> {
        let mut problems = Vec::new();
        for (cat, sigs) in &self.categories {
            let mut seen = Vec::new();
            for s in sigs {
                if seen.contains(&s.keyword) {
                    problems.push(format!("duplicate keyword `{}` in `{cat}`", s.keyword));
                }
                seen.push(s.keyword);
                let kinds = s.params.iter().map(|p| &p.kind).chain(s.named.iter().map(|n| &n.kind));
                for k in kinds {
                    for referenced in k.categories() {
                        if !self.has_category(referenced) {
                            problems.push(format!("`{}` references unknown category `{referenced}`", s.keyword));
                        }
                    }
                }
                for ex in &s.exemplars {
                    match parse_fragment(ex) {
                        Some(node) => {
                            let issues = super::validate::validate_node(self, &node, cat);
                            if !issues.is_empty() || node.keyword != s.keyword {
                                problems.push(format!("exemplar `{ex}` does not validate as `{cat}`"));
                            }
                        }
                        None => problems.push(format!("exemplar `{ex}` does not parse")),
                    }
                }
            }
        }
        problems
    }
}

/// Parses a single ludeme outside a `game` root (catalog exemplars, hole options).
pub fn parse_fragment(text: &str) -> Option<LudemeNode> {
    let wrapped = format!("(game {text})");
    let tree = super::parse(&wrapped).ok()?;
    match tree.root.args.as_slice() {
        [super::ast::Arg::Node(n)] => {
            let mut n = n.clone();
            strip_spans(&mut n);
            Some(n)
        }
        _ => None,
    }
}

fn strip_spans(node: &mut LudemeNode) {
    use super::ast::Arg;
    fn arg(a: &mut Arg) {
        match a {
            Arg::Node(n) => strip_spans(n),
            Arg::Named(_, v) => arg(v),
            Arg::Set(items) => items.iter_mut().for_each(arg),
            Arg::Hole(h) => {
                h.span = Default::default();
                h.options.iter_mut().for_each(strip_spans);
            }
            _ => {}
        }
    }
    node.span = Default::default();
    node.args.iter_mut().for_each(arg);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn v1_catalog_is_consistent() {
        let problems = Catalog::v1().check();
        assert!(problems.is_empty(), "{problems:#?}");
    }

    #[test]
    fn members_follow_catalog_order() {
        let cat = Catalog::v1();
        let ends: Vec<String> = cat.members("end").iter().map(super::super::print_node).collect();
        assert_eq!(ends[0], "(line length:3)");
        assert!(ends.contains(&"(bearOffAll)".to_string()));
        assert!(cat.members("rules").is_empty());
    }

    #[test]
    fn arity_bounds() {
        let cat = Catalog::v1();
        assert_eq!(cat.signature("shape", "rect").unwrap().arity(), (2, Some(2)));
        assert_eq!(cat.signature("item", "board").unwrap().arity(), (1, None));
        assert_eq!(cat.signature("tiling", "square").unwrap().arity(), (0, Some(0)));
    }
}
