//! Move-choosing policies (uniform random, flat Monte Carlo, UCT) and
//! recorded self-play.

mod config;
mod search;
mod trial;

pub use config::{AgentConfig, AgentKind, DEFAULT_EXPLORATION};
pub use search::{choose, random_rollout, select_move, AgentError, SearchStats};
pub use trial::{matchup, playout, trial_seed, PlyRecord, Trial};
