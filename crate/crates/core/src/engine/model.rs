use std::fmt;

use serde::{Deserialize, Serialize};

use super::board::{BoardGraph, DirectionSet, Site, Track};
use crate::grammar::{self, Arg, Catalog, LudemeNode, LudemeTree, PlayerRef, Span};

pub type Player = PlayerRef;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PieceKind {
    Ball,
    Cross,
    Disc,
    King,
}

impl PieceKind {
    pub fn from_keyword(kw: &str) -> Option<Self> {
        Some(match kw {
            "ball" => PieceKind::Ball,
            "cross" => PieceKind::Cross,
            "disc" => PieceKind::Disc,
            "king" => PieceKind::King,
            _ => return None,
        })
    }

    pub fn keyword(self) -> &'static str {
        match self {
            PieceKind::Ball => "ball",
            PieceKind::Cross => "cross",
            PieceKind::Disc => "disc",
            PieceKind::King => "king",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaptureStyle {
    Custodial,
    Replace,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HitStyle {
    /// The hit piece goes back to its owner's pool.
    ToStart,
    /// The hit piece leaves the game.
    Remove,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PlayRule {
    /// Add a piece from the mover's supply to an empty site.
    Place { capture: Option<CaptureStyle> },
    Step { directions: DirectionSet, capture: Option<CaptureStyle> },
    /// Jump over an adjacent enemy piece to the empty site beyond, capturing it.
    Leap { directions: DirectionSet },
    /// Advance along the mover's track by the dice value.
    Track { hit: Option<HitStyle> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EndCondition {
    Line(usize),
    FullBoard,
    NoMoves,
    CapturedAll,
    BearOffAll,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Who {
    /// The player who made the last move.
    Mover,
    Player(Player),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ResultKind {
    Win,
    Loss,
    Draw,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndRule {
    pub condition: EndCondition,
    pub who: Who,
    pub result: ResultKind,
}

impl fmt::Display for EndRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cond = match self.condition {
            EndCondition::Line(k) => format!("line {k}"),
            EndCondition::FullBoard => "fullBoard".into(),
            EndCondition::NoMoves => "noMoves".into(),
            EndCondition::CapturedAll => "capturedAll".into(),
            EndCondition::BearOffAll => "bearOffAll".into(),
        };
        let who = match self.who {
            Who::Mover => "mover".to_string(),
            Who::Player(p) => p.to_string(),
        };
        match self.result {
            ResultKind::Draw => write!(f, "{cond} => Draw"),
            r => write!(f, "{cond} => {who} {r:?}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiceSpec {
    pub count: u8,
    pub faces: Vec<u8>,
}

impl DiceSpec {
    pub fn max_total(&self) -> u32 {
        self.count as u32 * self.faces.iter().copied().max().unwrap_or(0) as u32
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub owner: Player,
    /// Index into the owner's piece types.
    pub piece: u8,
    pub site: Site,
}

/// A compiled, executable game.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameModel {
    pub name: String,
    pub board: BoardGraph,
    pub piece_types: [Vec<PieceKind>; 2],
    pub start_placements: Vec<Placement>,
    /// Pieces held off-board at the start; `None` means an unlimited supply.
    pub pools: [Option<u16>; 2],
    pub play_rules: Vec<PlayRule>,
    /// Declared end rules, evaluated in order.
    pub end_rules: Vec<EndRule>,
    pub chance: Option<DiceSpec>,
    pub add_to_empty: bool,
}

impl GameModel {
    pub fn player_count(&self) -> usize {
        2
    }

    pub fn site_count(&self) -> usize {
        self.board.site_count()
    }

    pub fn has_no_moves_rule(&self) -> bool {
        self.end_rules.iter().any(|r| r.condition == EndCondition::NoMoves)
    }

    /// Declared end rules followed by the implicit stalemate rule, when it
    /// applies. With unlimited placement as the only move, stalemate means a
    /// full board and is reported that way.
    pub fn end_rule_summary(&self) -> Vec<String> {
        let mut out: Vec<String> = self.end_rules.iter().map(ToString::to_string).collect();
        let declared_full = self.end_rules.iter().any(|r| r.condition == EndCondition::FullBoard);
        if !self.has_no_moves_rule() {
            let placement_only = self.play_rules.iter().all(|r| matches!(r, PlayRule::Place { .. }))
                && self.pools.iter().all(Option::is_none);
            if !placement_only {
                out.push("no legal moves => Draw".into());
            } else if !declared_full {
                out.push("fullBoard => Draw".into());
            }
        }
        out
    }

    pub fn has_placement(&self) -> bool {
        self.play_rules.iter().any(|r| matches!(r, PlayRule::Place { .. }))
    }

    pub fn hit_style(&self) -> Option<HitStyle> {
        self.play_rules.iter().find_map(|r| match r {
            PlayRule::Track { hit } => *hit,
            _ => None,
        })
    }

    /// Total pieces a player owns at the start (`None` if unlimited).
    pub fn piece_total(&self, p: Player) -> Option<u32> {
        let placed = self.start_placements.iter().filter(|pl| pl.owner == p).count() as u32;
        self.pools[p.index()].map(|n| n as u32 + placed)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CompileErrorKind {
    /// The tree has holes or validation issues.
    Incomplete,
    UnknownLudeme,
    ContradictoryRules,
    NoEndRule,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompileError {
    pub kind: CompileErrorKind,
    pub span: Span,
    pub message: String,
}

impl fmt::Display for CompileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.kind, self.message)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompileErrorList(pub Vec<CompileError>);

impl CompileErrorList {
    pub fn kinds(&self) -> Vec<CompileErrorKind> {
        self.0.iter().map(|e| e.kind).collect()
    }
}

impl fmt::Display for CompileErrorList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join("; "))
    }
}

impl std::error::Error for CompileErrorList {}

struct Compiler {
    errors: Vec<CompileError>,
}

impl Compiler {
    fn err(&mut self, kind: CompileErrorKind, span: Span, message: impl Into<String>) {
        self.errors.push(CompileError {
            kind,
            span,
            message: message.into(),
        });
    }
}

fn nodes_in(arg: &Arg) -> Vec<&LudemeNode> {
    match arg {
        Arg::Node(n) => vec![n],
        Arg::Set(items) => items.iter().flat_map(nodes_in).collect(),
        _ => vec![],
    }
}

fn int_set(arg: Option<&Arg>) -> Vec<i64> {
    match arg {
        Some(Arg::Set(items)) => items.iter().filter_map(Arg::as_int).collect(),
        _ => vec![],
    }
}

fn player_arg(node: &LudemeNode) -> Option<Player> {
    node.args.iter().find_map(|a| match a {
        Arg::Player(p) => Some(*p),
        _ => None,
    })
}

fn directions_arg(node: &LudemeNode) -> DirectionSet {
    match node.positional().find_map(Arg::as_symbol) {
        Some("Diagonal") => DirectionSet::Diagonal,
        Some("All") => DirectionSet::All,
        _ => DirectionSet::Orthogonal,
    }
}

fn capture_arg(node: &LudemeNode) -> Option<CaptureStyle> {
    node.child_nodes().iter().find_map(|c| match c.keyword.as_str() {
        "custodial" => Some(CaptureStyle::Custodial),
        "replace" => Some(CaptureStyle::Replace),
        _ => None,
    })
}

fn outcome_symbol(s: &str) -> Option<ResultKind> {
    match s {
        "Win" => Some(ResultKind::Win),
        "Loss" => Some(ResultKind::Loss),
        "Draw" => Some(ResultKind::Draw),
        _ => None,
    }
}

/// Compiles a complete tree into an executable model.
pub fn compile(tree: &LudemeTree, catalog: &Catalog) -> Result<GameModel, CompileErrorList> {
    let report = grammar::validate(tree, catalog);
    let mut c = Compiler { errors: Vec::new() };
    if !report.is_complete {
        if report.hole_count > 0 {
            c.err(
                CompileErrorKind::Incomplete,
                tree.root.span,
                format!("partial game with {} hole(s)", report.hole_count),
            );
        }
        for issue in report.issues {
            c.err(CompileErrorKind::Incomplete, issue.span, issue.message);
        }
        return Err(CompileErrorList(c.errors));
    }

    let root = &tree.root;
    let name = tree.name().unwrap_or_default().to_string();
    let sections = root.child_nodes();
    let mode = sections.iter().find(|n| n.keyword == "mode");
    let equipment = sections.iter().find(|n| n.keyword == "equipment");
    let rules = sections.iter().find(|n| n.keyword == "rules");
    let (Some(mode), Some(equipment), Some(rules)) = (mode, equipment, rules) else {
        c.err(CompileErrorKind::UnknownLudeme, root.span, "game needs mode, equipment and rules");
        return Err(CompileErrorList(c.errors));
    };
    let add_to_empty = mode.child_nodes().iter().any(|n| n.keyword == "addToEmpty");

    let mut board: Option<BoardGraph> = None;
    let mut piece_types: [Vec<PieceKind>; 2] = [Vec::new(), Vec::new()];
    let mut placement_nodes = Vec::new();
    let mut chance = None;
    for item in equipment.child_nodes() {
        match item.keyword.as_str() {
            "board" => {
                if board.is_some() {
                    c.err(CompileErrorKind::ContradictoryRules, item.span, "more than one board");
                    continue;
                }
                board = Some(compile_board(item, &mut c));
            }
            "place" => placement_nodes.push(item),
            "dice" => {
                let count = item.named("num").and_then(Arg::as_int).unwrap_or(1) as u8;
                let mut faces: Vec<u8> = int_set(item.named("faces")).into_iter().map(|f| f as u8).collect();
                faces.sort_unstable();
                if faces.is_empty() {
                    c.err(CompileErrorKind::ContradictoryRules, item.span, "dice need at least one face");
                }
                if chance.is_some() {
                    c.err(CompileErrorKind::ContradictoryRules, item.span, "more than one dice declaration");
                }
                chance = Some(DiceSpec { count, faces });
            }
            kw => match PieceKind::from_keyword(kw) {
                Some(kind) => {
                    let owner = player_arg(item).unwrap_or(Player::P1);
                    let types = &mut piece_types[owner.index()];
                    if types.contains(&kind) {
                        c.err(
                            CompileErrorKind::ContradictoryRules,
                            item.span,
                            format!("{owner} declares `{kw}` twice"),
                        );
                    } else {
                        types.push(kind);
                    }
                }
                None => c.err(
                    CompileErrorKind::UnknownLudeme,
                    item.span,
                    format!("`{kw}` is not supported as equipment"),
                ),
            },
        }
    }
    let Some(board) = board else {
        c.err(CompileErrorKind::ContradictoryRules, equipment.span, "no board declared");
        return Err(CompileErrorList(c.errors));
    };
    for p in Player::BOTH {
        if piece_types[p.index()].is_empty() {
            c.err(
                CompileErrorKind::ContradictoryRules,
                equipment.span,
                format!("{p} has no piece type"),
            );
        }
    }

    let mut start_placements = Vec::new();
    let mut pools: [Option<u16>; 2] = [None, None];
    for pl in placement_nodes {
        let kind = pl.positional().find_map(Arg::as_symbol).and_then(PieceKind::from_keyword);
        let owner = player_arg(pl).unwrap_or(Player::P1);
        let Some(piece) = kind.and_then(|k| piece_types[owner.index()].iter().position(|&t| t == k)) else {
            c.err(
                CompileErrorKind::ContradictoryRules,
                pl.span,
                format!("{owner} places a piece type it does not own"),
            );
            continue;
        };
        if let Some(n) = pl.named("pool").and_then(Arg::as_int) {
            let pool = pools[owner.index()].get_or_insert(0);
            *pool += n as u16;
        }
        let sites = pl.positional().find(|a| matches!(a, Arg::Set(_)));
        for s in int_set(sites) {
            if s as usize >= board.site_count() {
                c.err(
                    CompileErrorKind::ContradictoryRules,
                    pl.span,
                    format!("placement site {s} is off the {}-site board", board.site_count()),
                );
                continue;
            }
            start_placements.push(Placement {
                owner,
                piece: piece as u8,
                site: s as Site,
            });
        }
    }

    let rule_sections = rules.child_nodes();
    let mut play_rules = Vec::new();
    let mut end_rules = Vec::new();
    for section in rule_sections {
        match section.keyword.as_str() {
            "play" => {
                for mv in section.args.iter().flat_map(nodes_in) {
                    let rule = match mv.keyword.as_str() {
                        "to" => PlayRule::Place { capture: capture_arg(mv) },
                        "step" => PlayRule::Step {
                            directions: directions_arg(mv),
                            capture: capture_arg(mv),
                        },
                        "leap" => PlayRule::Leap {
                            directions: directions_arg(mv),
                        },
                        "moveByDice" => PlayRule::Track {
                            hit: match mv.named("hit").and_then(Arg::as_symbol) {
                                Some("ToStart") => Some(HitStyle::ToStart),
                                Some("Remove") => Some(HitStyle::Remove),
                                _ => None,
                            },
                        },
                        kw => {
                            c.err(CompileErrorKind::UnknownLudeme, mv.span, format!("unsupported move `{kw}`"));
                            continue;
                        }
                    };
                    if let PlayRule::Track { .. } = rule {
                        for p in Player::BOTH {
                            if board.tracks[p.index()].is_none() {
                                c.err(
                                    CompileErrorKind::ContradictoryRules,
                                    mv.span,
                                    format!("`moveByDice` needs a board track for {p}"),
                                );
                            }
                        }
                        if chance.is_none() {
                            c.err(CompileErrorKind::ContradictoryRules, mv.span, "`moveByDice` needs dice");
                        }
                    }
                    play_rules.push(rule);
                }
            }
            "end" => {
                let shared = section.child_nodes().into_iter().find(|n| n.keyword == "result");
                let shared = shared.map(|r| {
                    let who = r
                        .args
                        .iter()
                        .find_map(|a| match a {
                            Arg::Player(p) => Some(Who::Player(*p)),
                            Arg::Node(n) if n.keyword == "mover" => Some(Who::Mover),
                            _ => None,
                        })
                        .unwrap_or(Who::Mover);
                    let result = r
                        .positional()
                        .find_map(Arg::as_symbol)
                        .and_then(outcome_symbol)
                        .unwrap_or(ResultKind::Win);
                    (who, result)
                });
                for arg in section.args.iter() {
                    for cond in nodes_in(arg) {
                        if cond.keyword == "result" {
                            continue;
                        }
                        let condition = match cond.keyword.as_str() {
                            "line" => {
                                EndCondition::Line(cond.named("length").and_then(Arg::as_int).unwrap_or(3) as usize)
                            }
                            "fullBoard" => EndCondition::FullBoard,
                            "noMoves" => EndCondition::NoMoves,
                            "capturedAll" => EndCondition::CapturedAll,
                            "bearOffAll" => EndCondition::BearOffAll,
                            kw => {
                                c.err(
                                    CompileErrorKind::UnknownLudeme,
                                    cond.span,
                                    format!("unsupported end condition `{kw}`"),
                                );
                                continue;
                            }
                        };
                        let inline = cond.positional().find_map(Arg::as_symbol).and_then(outcome_symbol);
                        let (who, result) = match (inline, shared) {
                            (Some(r), _) => (Who::Mover, r),
                            (None, Some(s)) => s,
                            (None, None) if condition == EndCondition::FullBoard => (Who::Mover, ResultKind::Draw),
                            (None, None) => (Who::Mover, ResultKind::Win),
                        };
                        end_rules.push(EndRule { condition, who, result });
                    }
                }
            }
            kw => c.err(CompileErrorKind::UnknownLudeme, section.span, format!("unsupported rule section `{kw}`")),
        }
    }
    if play_rules.is_empty() {
        c.err(CompileErrorKind::ContradictoryRules, rules.span, "no play rule");
    }
    if end_rules.is_empty() {
        c.err(CompileErrorKind::NoEndRule, rules.span, "no end rule");
    }

    if !c.errors.is_empty() {
        return Err(CompileErrorList(c.errors));
    }
    // Supply is only unlimited when pieces can be placed from it.
    let places = play_rules.iter().any(|r| matches!(r, PlayRule::Place { .. }));
    if !places {
        for pool in pools.iter_mut() {
            pool.get_or_insert(0);
        }
    }
    Ok(GameModel {
        name,
        board,
        piece_types,
        start_placements,
        pools,
        play_rules,
        end_rules,
        chance,
        add_to_empty,
    })
}

fn compile_board(node: &LudemeNode, c: &mut Compiler) -> BoardGraph {
    let children = node.child_nodes();
    let shape = children[0];
    let dims: Vec<usize> = shape.positional().filter_map(Arg::as_int).map(|v| v as usize).collect();
    let (rows, cols) = match (shape.keyword.as_str(), dims.as_slice()) {
        ("square", [n]) => (*n, *n),
        ("rect", [r, c]) => (*r, *c),
        _ => (1, 1),
    };
    let mut board = BoardGraph::grid(rows, cols);
    for t in children.iter().filter(|n| n.keyword == "track") {
        let owner = player_arg(t).unwrap_or(Player::P1);
        let mut sites = Vec::new();
        let mut exits = false;
        if let Some(Arg::Set(items)) = t.positional().find(|a| matches!(a, Arg::Set(_))) {
            for (i, item) in items.iter().enumerate() {
                match item {
                    Arg::Int(s) if (*s as usize) < board.site_count() => {
                        if exits {
                            c.err(CompileErrorKind::ContradictoryRules, t.span, "track continues after `Off`");
                        }
                        if sites.contains(&(*s as Site)) {
                            c.err(
                                CompileErrorKind::ContradictoryRules,
                                t.span,
                                format!("track visits site {s} twice"),
                            );
                        }
                        sites.push(*s as Site);
                    }
                    Arg::Int(s) => c.err(
                        CompileErrorKind::ContradictoryRules,
                        t.span,
                        format!("track site {s} is off the board"),
                    ),
                    Arg::Symbol(_) if i + 1 == items.len() => exits = true,
                    _ => c.err(CompileErrorKind::ContradictoryRules, t.span, "`Off` must end the track"),
                }
            }
        }
        if sites.is_empty() {
            c.err(CompileErrorKind::ContradictoryRules, t.span, "empty track");
        }
        if board.tracks[owner.index()].is_some() {
            c.err(CompileErrorKind::ContradictoryRules, t.span, format!("{owner} has two tracks"));
        }
        board.tracks[owner.index()] = Some(Track { sites, exits });
    }
    board
}
