//! Compiled games: board graphs, rule models, immutable positions and move
//! generation.

mod board;
mod model;
mod state;

pub use board::{BoardGraph, DirectionSet, Site, Track, DIRECTIONS};
pub use model::{
    compile, CaptureStyle, CompileError, CompileErrorKind, CompileErrorList, DiceSpec, EndCondition, EndRule,
    GameModel, HitStyle, PieceKind, Placement, PlayRule, Player, ResultKind, Who,
};
pub use state::{
    apply_index, apply_move, dice_distribution, has_line, initial_state, GameState, Move, MoveKind, Occupant,
    Outcome, StateError, Status,
};
pub(crate) use state::mix;
