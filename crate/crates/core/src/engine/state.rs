use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::board::Site;
use super::model::{CaptureStyle, EndCondition, GameModel, HitStyle, Player, PlayRule, ResultKind, Who};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Occupant {
    pub owner: Player,
    /// Index into the owner's piece types.
    pub piece: u8,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MoveKind {
    Place,
    Step,
    Leap,
    TrackMove,
    Pass,
}

/// A decision move and its forced consequences.
///
/// Field order matters: the derived ordering sorts by origin, then
/// destination, then kind.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Move {
    /// `None` for placements and track entries from the pool.
    pub from: Option<Site>,
    /// `None` for bearing off and passing.
    pub to: Option<Site>,
    pub kind: MoveKind,
    /// Sites emptied of enemy pieces, ascending.
    pub captures: Vec<Site>,
}

impl Move {
    pub fn pass() -> Self {
        Move {
            from: None,
            to: None,
            kind: MoveKind::Pass,
            captures: Vec::new(),
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let site = |s: Option<Site>, none: &str| s.map_or(none.to_string(), |s| s.to_string());
        match self.kind {
            MoveKind::Pass => f.write_str("pass")?,
            MoveKind::Place => write!(f, "place {}", site(self.to, "?"))?,
            _ => write!(f, "{}-{}", site(self.from, "in"), site(self.to, "off"))?,
        }
        if !self.captures.is_empty() {
            let caps: Vec<String> = self.captures.iter().map(ToString::to_string).collect();
            write!(f, " x{}", caps.join(","))?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Win(Player),
    Draw,
    /// The move cap was reached while the game was ongoing.
    Timeout,
}

impl Outcome {
    /// Score for `p`: win 1, loss 0, draw and timeout 0.5.
    pub fn score_for(self, p: Player) -> f64 {
        match self {
            Outcome::Win(w) if w == p => 1.0,
            Outcome::Win(_) => 0.0,
            Outcome::Draw | Outcome::Timeout => 0.5,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Win(p) => write!(f, "Win {p}"),
            Outcome::Draw => f.write_str("Draw"),
            Outcome::Timeout => f.write_str("Timeout"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    Ongoing,
    Ended(Outcome),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum StateError {
    #[error("two start placements on site {0}")]
    OverlappingPlacements(Site),
    #[error("illegal move `{0}`")]
    IllegalMove(Move),
    #[error("the game is over")]
    GameOver,
}

/// An immutable position. Legal moves are computed once, on construction.
#[derive(Clone, Debug, Serialize)]
pub struct GameState {
    pub sites: Vec<Option<Occupant>>,
    pub mover: Player,
    pub pending_dice: Option<u32>,
    pub move_number: u32,
    /// Pieces off-board waiting to be placed or entered; `None` is unlimited.
    pub in_hand: [Option<u16>; 2],
    pub borne_off: [u16; 2],
    pub status: Status,
    board_hash: u64,
    #[serde(skip)]
    legal: Arc<Vec<Move>>,
}

impl PartialEq for GameState {
    fn eq(&self, other: &Self) -> bool {
        self.sites == other.sites
            && self.mover == other.mover
            && self.pending_dice == other.pending_dice
            && self.move_number == other.move_number
            && self.in_hand == other.in_hand
            && self.borne_off == other.borne_off
            && self.status == other.status
    }
}

impl Eq for GameState {}

pub(crate) fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn site_key(site: Site, occ: Occupant) -> u64 {
    mix(((site as u64) << 16) | ((occ.owner.index() as u64) << 8) | occ.piece as u64)
}

fn roll<R: Rng + ?Sized>(model: &GameModel, rng: &mut R) -> Option<u32> {
    model.chance.as_ref().map(|d| {
        (0..d.count)
            .map(|_| d.faces[rng.gen_range(0..d.faces.len())] as u32)
            .sum()
    })
}

impl GameState {
    pub fn legal_moves(&self) -> &[Move] {
        &self.legal
    }

    pub fn is_over(&self) -> bool {
        self.status != Status::Ongoing
    }

    pub fn outcome(&self) -> Option<Outcome> {
        match self.status {
            Status::Ended(o) => Some(o),
            Status::Ongoing => None,
        }
    }

    /// 64-bit hash of contents, mover, dice and off-board counts.
    pub fn hash(&self) -> u64 {
        let mut h = self.board_hash ^ mix(0x100 + self.mover.index() as u64);
        if let Some(d) = self.pending_dice {
            h ^= mix(0x200 + d as u64);
        }
        for p in 0..2 {
            if let Some(n) = self.in_hand[p] {
                h ^= mix(0x1_0000 * (p as u64 + 1) + n as u64);
            }
            h ^= mix(0x10_0000 * (p as u64 + 1) + self.borne_off[p] as u64);
        }
        h
    }

    pub fn piece_count(&self, p: Player) -> usize {
        self.sites.iter().flatten().filter(|o| o.owner == p).count()
    }

    fn set(&mut self, site: Site, occ: Option<Occupant>) {
        if let Some(old) = self.sites[site as usize] {
            self.board_hash ^= site_key(site, old);
        }
        if let Some(new) = occ {
            self.board_hash ^= site_key(site, new);
        }
        self.sites[site as usize] = occ;
    }
}

/// Builds the start position, rolling the first dice if the game has any.
pub fn initial_state<R: Rng + ?Sized>(model: &GameModel, rng: &mut R) -> Result<GameState, StateError> {
    let mut state = GameState {
        sites: vec![None; model.site_count()],
        mover: Player::P1,
        pending_dice: None,
        move_number: 0,
        in_hand: model.pools,
        borne_off: [0, 0],
        status: Status::Ongoing,
        board_hash: 0,
        legal: Arc::new(Vec::new()),
    };
    for pl in &model.start_placements {
        if state.sites[pl.site as usize].is_some() {
            return Err(StateError::OverlappingPlacements(pl.site));
        }
        state.set(
            pl.site,
            Some(Occupant {
                owner: pl.owner,
                piece: pl.piece,
            }),
        );
    }
    state.pending_dice = roll(model, rng);
    settle(model, &mut state, Player::P2);
    Ok(state)
}

/// Applies a legal move, returning the successor. The input is untouched.
pub fn apply_move<R: Rng + ?Sized>(
    model: &GameModel,
    state: &GameState,
    mv: &Move,
    rng: &mut R,
) -> Result<GameState, StateError> {
    if state.is_over() {
        return Err(StateError::GameOver);
    }
    match state.legal.iter().position(|m| m == mv) {
        Some(i) => Ok(apply_index(model, state, i, rng)),
        None => Err(StateError::IllegalMove(mv.clone())),
    }
}

/// Applies the `index`-th legal move. Panics if out of range.
pub fn apply_index<R: Rng + ?Sized>(model: &GameModel, state: &GameState, index: usize, rng: &mut R) -> GameState {
    let mv = &state.legal[index];
    let me = state.mover;
    let mut next = state.clone();
    let piece = match mv.from {
        Some(f) => state.sites[f as usize].expect("moves start from an occupied site"),
        None => Occupant { owner: me, piece: 0 },
    };
    if let Some(f) = mv.from {
        next.set(f, None);
    }
    let hit = model.hit_style();
    for &c in &mv.captures {
        let victim = next.sites[c as usize];
        next.set(c, None);
        if mv.kind == MoveKind::TrackMove && hit == Some(HitStyle::ToStart) {
            if let Some(v) = victim {
                if let Some(n) = next.in_hand[v.owner.index()].as_mut() {
                    *n += 1;
                }
            }
        }
    }
    match mv.to {
        Some(t) => next.set(t, Some(piece)),
        None if mv.kind == MoveKind::TrackMove => next.borne_off[me.index()] += 1,
        None => {}
    }
    if mv.from.is_none() && matches!(mv.kind, MoveKind::Place | MoveKind::TrackMove) {
        if let Some(n) = next.in_hand[me.index()].as_mut() {
            *n -= 1;
        }
    }
    next.mover = me.opponent();
    next.move_number += 1;
    next.pending_dice = roll(model, rng);
    settle(model, &mut next, me);
    next
}

/// Computes legal moves for the current mover and evaluates end rules with
/// `last` as the player who just moved.
fn settle(model: &GameModel, state: &mut GameState, last: Player) {
    state.legal = Arc::new(generate(model, state));
    state.status = evaluate(model, state, last);
    if state.is_over() {
        state.legal = Arc::new(Vec::new());
    }
}

fn evaluate(model: &GameModel, state: &GameState, last: Player) -> Status {
    let next = last.opponent();
    for rule in &model.end_rules {
        let fired = match rule.condition {
            EndCondition::Line(k) => has_line(model, state, last, k),
            EndCondition::FullBoard => state.sites.iter().all(Option::is_some),
            EndCondition::NoMoves => state.legal.is_empty(),
            EndCondition::CapturedAll => {
                state.in_hand[next.index()] == Some(0)
                    && state.borne_off[next.index()] == 0
                    && state.piece_count(next) == 0
            }
            EndCondition::BearOffAll => {
                state.in_hand[last.index()] == Some(0)
                    && state.borne_off[last.index()] > 0
                    && state.piece_count(last) == 0
            }
        };
        if fired {
            let who = match rule.who {
                Who::Mover => last,
                Who::Player(p) => p,
            };
            return Status::Ended(match rule.result {
                ResultKind::Win => Outcome::Win(who),
                ResultKind::Loss => Outcome::Win(who.opponent()),
                ResultKind::Draw => Outcome::Draw,
            });
        }
    }
    if state.legal.is_empty() {
        return Status::Ended(Outcome::Draw);
    }
    Status::Ongoing
}

/// Whether `p` has a run of at least `k` pieces along a row, column or diagonal.
pub fn has_line(model: &GameModel, state: &GameState, p: Player, k: usize) -> bool {
    let mine = |s: Site| state.sites[s as usize].is_some_and(|o| o.owner == p);
    // East, south-east, south and south-west; each run is counted from its start.
    for d in [2usize, 3, 4, 5] {
        let back = (d + 4) % 8;
        for s in 0..model.site_count() as Site {
            if !mine(s) || model.board.step(s, back).is_some_and(mine) {
                continue;
            }
            let mut len = 1;
            let mut cur = s;
            while let Some(n) = model.board.step(cur, d).filter(|&n| mine(n)) {
                len += 1;
                cur = n;
            }
            if len >= k {
                return true;
            }
        }
    }
    false
}

fn custodial_captures(model: &GameModel, state: &GameState, me: Player, to: Site, from: Option<Site>) -> Vec<Site> {
    let owner_at = |s: Site| {
        if Some(s) == from {
            None
        } else if s == to {
            Some(me)
        } else {
            state.sites[s as usize].map(|o| o.owner)
        }
    };
    let mut out = Vec::new();
    for d in [0usize, 2, 4, 6] {
        if let Some(n1) = model.board.step(to, d) {
            if owner_at(n1) == Some(me.opponent()) {
                if let Some(n2) = model.board.step(n1, d) {
                    if owner_at(n2) == Some(me) {
                        out.push(n1);
                    }
                }
            }
        }
    }
    out
}

fn generate(model: &GameModel, state: &GameState) -> Vec<Move> {
    let me = state.mover;
    let mut moves = Vec::new();
    let owned = |s: usize| state.sites[s].is_some_and(|o| o.owner == me);
    let enemy = |s: Site| state.sites[s as usize].is_some_and(|o| o.owner != me);
    for rule in &model.play_rules {
        match *rule {
            PlayRule::Place { capture } => {
                if state.in_hand[me.index()] == Some(0) {
                    continue;
                }
                for t in 0..model.site_count() {
                    if state.sites[t].is_none() {
                        let t = t as Site;
                        let captures = match capture {
                            Some(CaptureStyle::Custodial) => custodial_captures(model, state, me, t, None),
                            _ => Vec::new(),
                        };
                        moves.push(Move {
                            from: None,
                            to: Some(t),
                            kind: MoveKind::Place,
                            captures,
                        });
                    }
                }
            }
            PlayRule::Step { directions, capture } => {
                for f in (0..model.site_count()).filter(|&s| owned(s)) {
                    let f = f as Site;
                    for &d in directions.directions() {
                        let Some(t) = model.board.step(f, d) else { continue };
                        let captures = match (state.sites[t as usize], capture) {
                            (None, Some(CaptureStyle::Custodial)) => custodial_captures(model, state, me, t, Some(f)),
                            (None, _) => Vec::new(),
                            (Some(o), Some(CaptureStyle::Replace)) if o.owner != me => vec![t],
                            (Some(_), _) => continue,
                        };
                        moves.push(Move {
                            from: Some(f),
                            to: Some(t),
                            kind: MoveKind::Step,
                            captures,
                        });
                    }
                }
            }
            PlayRule::Leap { directions } => {
                for f in (0..model.site_count()).filter(|&s| owned(s)) {
                    let f = f as Site;
                    for &d in directions.directions() {
                        let Some(over) = model.board.step(f, d).filter(|&o| enemy(o)) else { continue };
                        let Some(t) = model.board.step(over, d).filter(|&t| state.sites[t as usize].is_none())
                        else {
                            continue;
                        };
                        moves.push(Move {
                            from: Some(f),
                            to: Some(t),
                            kind: MoveKind::Leap,
                            captures: vec![over],
                        });
                    }
                }
            }
            PlayRule::Track { hit } => {
                let Some(track) = &model.board.tracks[me.index()] else { continue };
                let roll = state.pending_dice.unwrap_or(0) as usize;
                if roll == 0 {
                    continue;
                }
                let mut push = |from: Option<Site>, target: usize| {
                    let (to, captures) = if target == track.sites.len() && track.exits {
                        (None, Vec::new())
                    } else if target < track.sites.len() {
                        let t = track.sites[target];
                        match state.sites[t as usize] {
                            None => (Some(t), Vec::new()),
                            Some(o) if o.owner != me && hit.is_some() => (Some(t), vec![t]),
                            Some(_) => return,
                        }
                    } else {
                        return;
                    };
                    moves.push(Move {
                        from,
                        to,
                        kind: MoveKind::TrackMove,
                        captures,
                    });
                };
                if state.in_hand[me.index()] != Some(0) {
                    push(None, roll - 1);
                }
                for s in (0..model.site_count()).filter(|&s| owned(s)) {
                    if let Some(i) = track.position(s as Site) {
                        push(Some(s as Site), i + roll);
                    }
                }
            }
        }
    }
    moves.sort();
    moves.dedup();
    if moves.is_empty() && model.chance.is_some() {
        moves.push(Move::pass());
    }
    moves
}

/// Dice outcomes with their probabilities, for exact expectation oracles.
pub fn dice_distribution(model: &GameModel) -> Vec<(u32, f64)> {
    let Some(d) = &model.chance else { return vec![] };
    let mut dist = vec![(0u32, 1.0f64)];
    let p = 1.0 / d.faces.len() as f64;
    for _ in 0..d.count {
        let mut nextd: Vec<(u32, f64)> = Vec::new();
        for &(v, w) in &dist {
            for &f in &d.faces {
                let nv = v + f as u32;
                match nextd.iter_mut().find(|(x, _)| *x == nv) {
                    Some(e) => e.1 += w * p,
                    None => nextd.push((nv, w * p)),
                }
            }
        }
        dist = nextd;
    }
    dist.sort_by_key(|e| e.0);
    dist
}
