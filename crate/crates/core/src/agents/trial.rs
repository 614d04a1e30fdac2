use std::sync::atomic::{AtomicUsize, Ordering};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::AgentConfig;
use super::search::choose;
use crate::engine::{apply_index, initial_state, mix, GameModel, Move, Outcome, Player, StateError};

const DICE_STREAM: u64 = 0xd1ce;
const AGENT_STREAM: [u64; 2] = [0xa1, 0xa2];

/// What an agent reported for one decision.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PlyRecord {
    pub mover: Player,
    pub dice: Option<u32>,
    #[serde(rename = "move")]
    pub mv: Move,
    /// Search estimate for the mover, absent for non-searching agents.
    pub estimate: Option<f64>,
    pub visits: Vec<u32>,
}

/// One recorded playout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Trial {
    pub game_index: usize,
    pub seed: u64,
    /// Agent seated as P1 and P2.
    pub seats: [AgentConfig; 2],
    /// Seat of the first configured agent of the matchup.
    pub first_agent_seat: Player,
    /// Hash of every state, starting with the initial one.
    pub hashes: Vec<u64>,
    pub plies: Vec<PlyRecord>,
    pub outcome: Outcome,
}

impl Trial {
    pub fn length(&self) -> usize {
        self.plies.len()
    }

    pub fn completed(&self) -> bool {
        self.outcome != Outcome::Timeout
    }

    /// Seat of `config` in this trial; P1 if it sits in both.
    pub fn seat_of(&self, config: &AgentConfig) -> Option<Player> {
        Player::BOTH.into_iter().find(|p| &self.seats[p.index()] == config)
    }
}

/// Plays one game. Dice and each seat draw from separate streams derived
/// from `seed`, so the trial is reproducible from its inputs alone.
pub fn playout(
    model: &GameModel,
    p1: &AgentConfig,
    p2: &AgentConfig,
    seed: u64,
    move_cap: u32,
) -> Result<Trial, StateError> {
    let seats = [*p1, *p2];
    let mut dice = ChaCha8Rng::seed_from_u64(mix(seed ^ DICE_STREAM));
    let mut agent_rngs =
        [0, 1].map(|i| ChaCha8Rng::seed_from_u64(mix(mix(seed ^ AGENT_STREAM[i]) ^ seats[i].seed)));
    let mut state = initial_state(model, &mut dice)?;
    let mut hashes = vec![state.hash()];
    let mut plies = Vec::new();
    let outcome = loop {
        if let Some(o) = state.outcome() {
            break o;
        }
        if state.move_number >= move_cap {
            break Outcome::Timeout;
        }
        let seat = state.mover.index();
        let (index, stats) = choose(&seats[seat], model, &state, move_cap, &mut agent_rngs[seat])
            .expect("ongoing states always have a legal move");
        plies.push(PlyRecord {
            mover: state.mover,
            dice: state.pending_dice,
            mv: stats.chosen_move,
            estimate: stats.searched.then_some(stats.root_value_estimate),
            visits: stats.visit_counts,
        });
        state = apply_index(model, &state, index, &mut dice);
        hashes.push(state.hash());
    };
    Ok(Trial {
        game_index: 0,
        seed,
        seats,
        first_agent_seat: Player::P1,
        hashes,
        plies,
        outcome,
    })
}

pub fn trial_seed(master_seed: u64, index: usize) -> u64 {
    mix(master_seed ^ mix(index as u64))
}

/// Plays `games` games between `a` and `b`. With `swap_seats`, `a` is P1 in
/// even-indexed games and P2 in odd ones; otherwise always P1. Trials come
/// back in game order whatever the worker count.
#[allow(clippy::too_many_arguments)]
pub fn matchup(
    model: &GameModel,
    a: &AgentConfig,
    b: &AgentConfig,
    games: usize,
    master_seed: u64,
    swap_seats: bool,
    move_cap: u32,
    progress: Option<&(dyn Fn(usize, usize) + Sync)>,
) -> Result<Vec<Trial>, StateError> {
    let done = AtomicUsize::new(0);
    let one = |i: usize| {
        let swapped = swap_seats && i % 2 == 1;
        let (p1, p2) = if swapped { (b, a) } else { (a, b) };
        let mut t = playout(model, p1, p2, trial_seed(master_seed, i), move_cap)?;
        t.game_index = i;
        if swapped {
            t.first_agent_seat = Player::P2;
        }
        let n = done.fetch_add(1, Ordering::Relaxed) + 1;
        if let Some(report) = progress {
            report(n, games);
        }
        Ok(t)
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..games).into_par_iter().map(one).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..games).map(one).collect()
    }
}
