//! Exact solvers for small deterministic games, used to check the search
//! agents and the Monte Carlo metrics.
//!
//! Positions are memoised by state hash, so these are only practical for
//! games with a few million positions at most.

use std::collections::HashMap;

use rand::rngs::mock::StepRng;

use crate::engine::{apply_index, GameModel, GameState, Outcome, Player};

/// The oracles apply moves without dice; the generator is never consulted.
fn no_dice() -> StepRng {
    StepRng::new(0, 0)
}

fn assert_deterministic(model: &GameModel) {
    assert!(model.chance.is_none(), "exact oracles only handle games without dice");
}

/// Game-theoretic value for P1 (1 win, 0.5 draw, 0 loss) under perfect play.
pub fn minimax(model: &GameModel, state: &GameState) -> f64 {
    assert_deterministic(model);
    let mut memo = HashMap::new();
    minimax_memo(model, state, &mut memo)
}

fn minimax_memo(model: &GameModel, state: &GameState, memo: &mut HashMap<u64, f64>) -> f64 {
    if let Some(o) = state.outcome() {
        return o.score_for(Player::P1);
    }
    if let Some(&v) = memo.get(&state.hash()) {
        return v;
    }
    let maximise = state.mover == Player::P1;
    let mut best = if maximise { 0.0f64 } else { 1.0f64 };
    for i in 0..state.legal_moves().len() {
        let v = minimax_memo(model, &apply_index(model, state, i, &mut no_dice()), memo);
        best = if maximise { best.max(v) } else { best.min(v) };
    }
    memo.insert(state.hash(), best);
    best
}

/// Minimax values for P1 of each legal move of `state`, in legal order.
pub fn move_values(model: &GameModel, state: &GameState) -> Vec<f64> {
    assert_deterministic(model);
    let mut memo = HashMap::new();
    (0..state.legal_moves().len())
        .map(|i| minimax_memo(model, &apply_index(model, state, i, &mut no_dice()), &mut memo))
        .collect()
}

/// Exact outcome probabilities when both players pick uniformly at random.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct OutcomeProbabilities {
    pub p1_win: f64,
    pub p2_win: f64,
    pub draw: f64,
}

impl OutcomeProbabilities {
    /// P1 win rate minus P2 win rate.
    pub fn balance(&self) -> f64 {
        self.p1_win - self.p2_win
    }
}

pub fn random_play_outcomes(model: &GameModel, state: &GameState) -> OutcomeProbabilities {
    assert_deterministic(model);
    let mut memo = HashMap::new();
    expect(model, state, &mut memo)
}

fn expect(model: &GameModel, state: &GameState, memo: &mut HashMap<u64, OutcomeProbabilities>) -> OutcomeProbabilities {
    match state.outcome() {
        Some(Outcome::Win(Player::P1)) => {
            return OutcomeProbabilities {
                p1_win: 1.0,
                ..Default::default()
            }
        }
        Some(Outcome::Win(Player::P2)) => {
            return OutcomeProbabilities {
                p2_win: 1.0,
                ..Default::default()
            }
        }
        Some(_) => {
            return OutcomeProbabilities {
                draw: 1.0,
                ..Default::default()
            }
        }
        None => {}
    }
    if let Some(&v) = memo.get(&state.hash()) {
        return v;
    }
    let n = state.legal_moves().len();
    let mut acc = OutcomeProbabilities::default();
    for i in 0..n {
        let o = expect(model, &apply_index(model, state, i, &mut no_dice()), memo);
        acc.p1_win += o.p1_win / n as f64;
        acc.p2_win += o.p2_win / n as f64;
        acc.draw += o.draw / n as f64;
    }
    memo.insert(state.hash(), acc);
    acc
}

/// Number of move sequences of length `depth` from `state`.
pub fn count_paths(model: &GameModel, state: &GameState, depth: u32) -> u64 {
    if depth == 0 {
        return 1;
    }
    (0..state.legal_moves().len())
        .map(|i| count_paths(model, &apply_index(model, state, i, &mut no_dice()), depth - 1))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::TIC_TAC_TOE;
    use crate::engine::{compile, initial_state};
    use crate::grammar::{parse, Catalog};

    #[test]
    fn tic_tac_toe_is_a_draw() {
        let m = compile(&parse(TIC_TAC_TOE).unwrap(), &Catalog::v1()).unwrap();
        let s = initial_state(&m, &mut no_dice()).unwrap();
        assert_eq!(minimax(&m, &s), 0.5);
        assert_eq!(count_paths(&m, &s, 1), 9);
        assert_eq!(count_paths(&m, &s, 2), 72);
        // Sequences lasting all nine moves: 81 792 wins on the last move plus 46 080 draws.
        assert_eq!(count_paths(&m, &s, 9), 127_872);
    }

    #[test]
    fn random_play_matches_known_probabilities() {
        let m = compile(&parse(TIC_TAC_TOE).unwrap(), &Catalog::v1()).unwrap();
        let s = initial_state(&m, &mut no_dice()).unwrap();
        let p = random_play_outcomes(&m, &s);
        assert!((p.p1_win + p.p2_win + p.draw - 1.0).abs() < 1e-12);
        // 737/1260, 121/420 and 8/63 for uniformly random play.
        assert!((p.p1_win - 737.0 / 1260.0).abs() < 1e-12, "{p:?}");
        assert!((p.p2_win - 121.0 / 420.0).abs() < 1e-12, "{p:?}");
        assert!((p.draw - 8.0 / 63.0).abs() < 1e-12, "{p:?}");
    }
}
