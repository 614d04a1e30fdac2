use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::{AgentConfig, AgentKind};
use crate::engine::{apply_index, GameModel, GameState, Move, Outcome, Player};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SearchStats {
    /// Expected score in [0,1] for the player to move.
    pub root_value_estimate: f64,
    /// Per legal move, in legal-move order.
    pub visit_counts: Vec<u32>,
    pub chosen_move: Move,
    /// False for agents that do not search; their estimate is a placeholder.
    pub searched: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum AgentError {
    #[error("no legal moves")]
    NoLegalMoves,
}

/// Plays uniformly random moves until the game ends or `move_cap` plies
/// have been played in total.
pub fn random_rollout<R: Rng + ?Sized>(model: &GameModel, state: &GameState, move_cap: u32, rng: &mut R) -> Outcome {
    let mut s = state.clone();
    loop {
        if let Some(o) = s.outcome() {
            return o;
        }
        if s.move_number >= move_cap {
            return Outcome::Timeout;
        }
        let i = rng.gen_range(0..s.legal_moves().len());
        s = apply_index(model, &s, i, rng);
    }
}

/// Picks a move for the player to move. Returns the index into
/// `state.legal_moves()` together with the search statistics.
pub fn choose<R: Rng + ?Sized>(
    config: &AgentConfig,
    model: &GameModel,
    state: &GameState,
    move_cap: u32,
    rng: &mut R,
) -> Result<(usize, SearchStats), AgentError> {
    let legal = state.legal_moves();
    if legal.is_empty() || state.is_over() {
        return Err(AgentError::NoLegalMoves);
    }
    let (index, estimate, visits) = match config.kind {
        AgentKind::Random => (rng.gen_range(0..legal.len()), 0.5, vec![0; legal.len()]),
        AgentKind::FlatMC => flat_mc(config, model, state, move_cap, rng),
        AgentKind::Uct => uct(config, model, state, move_cap, rng),
    };
    Ok((
        index,
        SearchStats {
            root_value_estimate: estimate,
            visit_counts: visits,
            chosen_move: legal[index].clone(),
            searched: config.is_search(),
        },
    ))
}

/// Picks a move for the player to move; deterministic given the config,
/// the state and the generator state.
pub fn select_move<R: Rng + ?Sized>(
    config: &AgentConfig,
    model: &GameModel,
    state: &GameState,
    move_cap: u32,
    rng: &mut R,
) -> Result<(Move, SearchStats), AgentError> {
    choose(config, model, state, move_cap, rng).map(|(_, s)| (s.chosen_move.clone(), s))
}

fn flat_mc<R: Rng + ?Sized>(
    config: &AgentConfig,
    model: &GameModel,
    state: &GameState,
    move_cap: u32,
    rng: &mut R,
) -> (usize, f64, Vec<u32>) {
    let me = state.mover;
    let n = state.legal_moves().len();
    let budget = config.iteration_budget as usize;
    let mut visits = vec![0u32; n];
    let mut totals = vec![0.0f64; n];
    for (i, v) in visits.iter_mut().enumerate() {
        *v = (budget / n + usize::from(i < budget % n)).max(1) as u32;
        let child = apply_index(model, state, i, rng);
        for _ in 0..*v {
            totals[i] += random_rollout(model, &child, move_cap, rng).score_for(me);
        }
    }
    let mut best = 0;
    for i in 1..n {
        if totals[i] / visits[i] as f64 > totals[best] / visits[best] as f64 {
            best = i;
        }
    }
    (best, totals[best] / visits[best] as f64, visits)
}

struct Node {
    /// The player who made the move into this node.
    player: Player,
    visits: u32,
    value: f64,
    children: Vec<(Move, u32)>,
}

impl Node {
    fn child(&self, index: usize, mv: &Move) -> Option<u32> {
        match self.children.get(index) {
            Some((m, id)) if m == mv => Some(*id),
            _ => self.children.iter().find(|(m, _)| m == mv).map(|(_, id)| *id),
        }
    }
}

/// Open-loop UCT: the tree is keyed by move sequences and dice are
/// resampled on each descent, so a node's available moves can vary.
fn uct<R: Rng + ?Sized>(
    config: &AgentConfig,
    model: &GameModel,
    root: &GameState,
    move_cap: u32,
    rng: &mut R,
) -> (usize, f64, Vec<u32>) {
    let mut tree = vec![Node {
        player: root.mover.opponent(),
        visits: 0,
        value: 0.0,
        children: Vec::new(),
    }];
    let mut path = Vec::new();
    for _ in 0..config.iteration_budget {
        path.clear();
        path.push(0u32);
        let mut node = 0u32;
        let mut state = root.clone();
        while !state.is_over() && state.move_number < move_cap {
            let legal = state.legal_moves();
            let n = &tree[node as usize];
            let unexpanded = legal.iter().enumerate().find(|(i, m)| n.child(*i, m).is_none()).map(|(i, _)| i);
            if let Some(i) = unexpanded {
                let id = tree.len() as u32;
                tree[node as usize].children.push((legal[i].clone(), id));
                tree.push(Node {
                    player: state.mover,
                    visits: 0,
                    value: 0.0,
                    children: Vec::new(),
                });
                state = apply_index(model, &state, i, rng);
                path.push(id);
                break;
            }
            let n = &tree[node as usize];
            let log_n = (n.visits.max(1) as f64).ln();
            let mut best = (f64::NEG_INFINITY, 0usize, 0u32);
            for (i, m) in legal.iter().enumerate() {
                let id = n.child(i, m).expect("all moves expanded");
                let c = &tree[id as usize];
                let score = c.value / c.visits as f64 + config.exploration * (log_n / c.visits as f64).sqrt();
                if score > best.0 {
                    best = (score, i, id);
                }
            }
            state = apply_index(model, &state, best.1, rng);
            node = best.2;
            path.push(node);
        }
        let outcome = random_rollout(model, &state, move_cap, rng);
        for &id in &path {
            let n = &mut tree[id as usize];
            n.visits += 1;
            n.value += outcome.score_for(n.player);
        }
    }

    let root_node = &tree[0];
    let legal = root.legal_moves();
    let mut visits = vec![0u32; legal.len()];
    let (mut value, mut total) = (0.0, 0u32);
    for (i, m) in legal.iter().enumerate() {
        if let Some(id) = root_node.child(i, m) {
            let c = &tree[id as usize];
            visits[i] = c.visits;
            value += c.value;
            total += c.visits;
        }
    }
    let mut best = 0;
    for i in 1..visits.len() {
        if visits[i] > visits[best] {
            best = i;
        }
    }
    let estimate = if total == 0 { 0.5 } else { value / total as f64 };
    (best, estimate, visits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::TIC_TAC_TOE;
    use crate::engine::{compile, initial_state};
    use crate::grammar::{parse, Catalog};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ttt() -> GameModel {
        compile(&parse(TIC_TAC_TOE).unwrap(), &Catalog::v1()).unwrap()
    }

    #[test]
    fn visit_counts_sum_to_budget() {
        let m = ttt();
        let s = initial_state(&m, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        for (config, expected) in [(AgentConfig::uct(500), 500), (AgentConfig::flat_mc(500), 500)] {
            let (_, stats) = choose(&config, &m, &s, 100, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
            assert_eq!(stats.visit_counts.iter().sum::<u32>(), expected);
            assert!((0.0..=1.0).contains(&stats.root_value_estimate));
        }
    }

    #[test]
    fn random_agent_is_deterministic() {
        let m = ttt();
        let s = initial_state(&m, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        let a = select_move(&AgentConfig::random(), &m, &s, 100, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = select_move(&AgentConfig::random(), &m, &s, 100, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.1.root_value_estimate, 0.5);
        assert!(!a.1.searched);
    }

    #[test]
    fn finished_games_have_no_moves() {
        let m = ttt();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut s = initial_state(&m, &mut rng).unwrap();
        while !s.is_over() {
            s = apply_index(&m, &s, 0, &mut rng);
        }
        assert_eq!(
            select_move(&AgentConfig::uct(10), &m, &s, 100, &mut rng).unwrap_err(),
            AgentError::NoLegalMoves
        );
    }
}
