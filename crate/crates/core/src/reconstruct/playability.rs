use std::fmt;

use serde::{Deserialize, Serialize};

use crate::agents::{matchup, AgentConfig};
use crate::engine::{EndCondition, GameModel, Outcome, Player, PlayRule};

/// Cut-offs of the playability filter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct PlayabilityThresholds {
    /// Random-vs-random probe games.
    pub probe_games: usize,
    /// Random play wanders; capture games can need well over 500 moves.
    pub move_cap: u32,
    pub min_completion: f64,
    /// Mean legal moves per decision must exceed this.
    pub min_branching: f64,
    /// The one-sided test only applies from this many decided probe games.
    pub min_decided: usize,
}

impl Default for PlayabilityThresholds {
    fn default() -> Self {
        PlayabilityThresholds {
            probe_games: 200,
            move_cap: 2000,
            min_completion: 0.95,
            min_branching: 1.5,
            min_decided: 20,
        }
    }
}

/// Why a rule set was judged unplayable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Reason {
    CompileError(String),
    UnreachableGoal(String),
    NonTerminating,
    NoDecisions,
    OneSided(Player),
}

impl Reason {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Reason::CompileError(_) => "compile error",
            Reason::UnreachableGoal(_) => "unreachable goal",
            Reason::NonTerminating => "non-terminating",
            Reason::NoDecisions => "no decisions",
            Reason::OneSided(_) => "one-sided",
        }
    }
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reason::CompileError(m) => write!(f, "compile error: {m}"),
            Reason::UnreachableGoal(m) => write!(f, "unreachable goal: {m}"),
            Reason::OneSided(p) => write!(f, "one-sided: {p} never wins"),
            r => f.write_str(r.code()),
        }
    }
}

/// Probe statistics behind a verdict.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProbeSummary {
    pub games: usize,
    pub completion_rate: f64,
    pub branching_factor: f64,
    pub p1_wins: usize,
    pub p2_wins: usize,
    pub draws: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Playability {
    pub playable: bool,
    pub reasons: Vec<Reason>,
    pub probe: ProbeSummary,
}

/// Seed-independent checks: every track ends in a bear-off point, dice can
/// move a piece, and a bear-off goal has a track to bear off from.
pub fn static_reachability(model: &GameModel) -> Vec<Reason> {
    let mut out = Vec::new();
    for p in [Player::P1, Player::P2] {
        if let Some(t) = &model.board.tracks[p.index()] {
            if !t.exits {
                out.push(Reason::UnreachableGoal(format!("{p} track never reaches bear-off")));
            }
        }
    }
    let races = model.play_rules.iter().any(|r| matches!(r, PlayRule::Track { .. }));
    if races && model.chance.as_ref().is_some_and(|d| d.max_total() == 0) {
        out.push(Reason::UnreachableGoal("dice never roll above 0".into()));
    }
    let bears_off = model.end_rules.iter().any(|r| r.condition == EndCondition::BearOffAll);
    if bears_off && !races {
        out.push(Reason::UnreachableGoal("bear-off goal without track moves".into()));
    }
    out
}

/// Static checks plus a random-vs-random probe batch.
pub fn playability_filter(model: &GameModel, thresholds: &PlayabilityThresholds, seed: u64) -> Playability {
    let mut reasons = static_reachability(model);
    let mut probe = ProbeSummary::default();
    if thresholds.probe_games > 0 {
        let r = AgentConfig::random();
        let trials = matchup(model, &r, &r, thresholds.probe_games, seed, true, thresholds.move_cap, None)
            .expect("compiled models have consistent start positions");
        let mut decisions = 0usize;
        let mut options = 0usize;
        for t in &trials {
            match t.outcome {
                Outcome::Win(Player::P1) => probe.p1_wins += 1,
                Outcome::Win(Player::P2) => probe.p2_wins += 1,
                Outcome::Draw => probe.draws += 1,
                Outcome::Timeout => {}
            }
            decisions += t.plies.len();
            options += t.plies.iter().map(|p| p.visits.len()).sum::<usize>();
        }
        probe.games = trials.len();
        probe.completion_rate = (probe.p1_wins + probe.p2_wins + probe.draws) as f64 / probe.games as f64;
        probe.branching_factor = if decisions == 0 { 0.0 } else { options as f64 / decisions as f64 };
        if probe.completion_rate < thresholds.min_completion {
            reasons.push(Reason::NonTerminating);
        }
        if probe.branching_factor <= thresholds.min_branching {
            reasons.push(Reason::NoDecisions);
        }
        if probe.p1_wins + probe.p2_wins >= thresholds.min_decided {
            if probe.p1_wins == 0 {
                reasons.push(Reason::OneSided(Player::P1));
            } else if probe.p2_wins == 0 {
                reasons.push(Reason::OneSided(Player::P2));
            }
        }
    }
    Playability {
        playable: reasons.is_empty(),
        reasons,
        probe,
    }
}
