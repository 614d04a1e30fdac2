use std::sync::{Arc, Mutex};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use axum::http::StatusCode;
use ludeme::agents::{choose, AgentConfig};
use ludeme::engine::{apply_move, compile, initial_state, GameModel, GameState, Move, Player};
use ludeme::grammar::{parse, validate, Catalog};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use tokio::sync::broadcast;

use crate::wire::{Actor, ApiError, Layout, MessageType, MovePlayed, MoveRequest, MoveView, StateView, WireMessage};

fn default_ai() -> AgentConfig {
    AgentConfig::uct(1000)
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct CreateSession {
    #[serde(alias = "lud")]
    pub lud_text: String,
    #[serde(default)]
    pub human_seat: Option<Player>,
    #[serde(default = "default_ai")]
    pub ai: AgentConfig,
    /// Seeds dice and AI; random when absent.
    #[serde(default)]
    pub seed: Option<u64>,
}

/// Per-session event numbering and fan-out. Kept outside the session lock
/// so analysis progress can be pushed while a move is being searched.
pub struct Events {
    session_id: String,
    seq: Mutex<u64>,
    tx: broadcast::Sender<WireMessage>,
}

impl Events {
    fn new(session_id: String) -> Self {
        Events {
            session_id,
            seq: Mutex::new(0),
            tx: broadcast::channel(256).0,
        }
    }

    pub fn emit(&self, kind: MessageType, payload: impl Serialize) -> WireMessage {
        let mut seq = self.seq.lock().unwrap();
        *seq += 1;
        let msg = WireMessage {
            kind,
            session_id: self.session_id.clone(),
            seq: *seq,
            payload: serde_json::to_value(payload).unwrap_or(Value::Null),
        };
        // Nobody listening is fine.
        let _ = self.tx.send(msg.clone());
        msg
    }

    /// Subscribes and returns the last sequence number already sent, so a
    /// snapshot taken now is followed by events numbered after it.
    pub fn subscribe(&self) -> (u64, broadcast::Receiver<WireMessage>) {
        let seq = self.seq.lock().unwrap();
        (*seq, self.tx.subscribe())
    }

    pub fn current(&self) -> u64 {
        *self.seq.lock().unwrap()
    }

    pub fn snapshot(&self, kind: MessageType, payload: impl Serialize) -> WireMessage {
        WireMessage {
            kind,
            session_id: self.session_id.clone(),
            seq: self.current(),
            payload: serde_json::to_value(payload).unwrap_or(Value::Null),
        }
    }
}

pub struct Session {
    pub id: String,
    pub name: String,
    pub model: Arc<GameModel>,
    pub state: GameState,
    pub human_seat: Option<Player>,
    pub ai: AgentConfig,
    pub history: Vec<Move>,
    pub created_at: u64,
    pub seed: u64,
    dice: ChaCha8Rng,
    ai_rng: ChaCha8Rng,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SessionSummary {
    pub id: String,
    pub name: String,
    pub human_seat: Option<Player>,
    pub ai: AgentConfig,
    pub seed: u64,
    pub created_at: u64,
    pub seq: u64,
    pub layout: Layout,
    pub history: Vec<String>,
    pub state: StateView,
}

fn dice_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Compiles rules text for play, mapping each failure to its status code.
pub fn load_model(text: &str) -> Result<GameModel, ApiError> {
    let catalog = Catalog::v1();
    let tree = parse(text).map_err(|e| {
        ApiError::new(StatusCode::BAD_REQUEST, "parse_error", e.to_string()).with_details(&e.0)
    })?;
    let report = validate(&tree, &catalog);
    if report.hole_count > 0 {
        return Err(ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "partial_game", "partial game; use /reconstruct")
            .with_details(&report));
    }
    if !report.issues.is_empty() {
        let msg = report.issues.iter().map(|i| i.message.as_str()).collect::<Vec<_>>().join("; ");
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "invalid_rules", msg).with_details(&report));
    }
    compile(&tree, &catalog)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "compile_error", e.to_string()).with_details(&e.0))
}

impl Session {
    pub fn new(id: String, req: &CreateSession, model: GameModel) -> Result<Self, ApiError> {
        req.ai
            .check()
            .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "invalid_config", e))?;
        let seed = req.seed.unwrap_or_else(rand::random);
        let mut dice = dice_rng(seed);
        let state = initial_state(&model, &mut dice)
            .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "compile_error", e.to_string()))?;
        let mut ai_rng = ChaCha8Rng::seed_from_u64(seed);
        ai_rng.set_stream(1);
        Ok(Session {
            id,
            name: model.name.clone(),
            model: Arc::new(model),
            state,
            human_seat: req.human_seat,
            ai: req.ai,
            history: Vec::new(),
            created_at: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            seed,
            dice,
            ai_rng,
        })
    }

    pub fn summary(&self, events: &Events) -> SessionSummary {
        SessionSummary {
            id: self.id.clone(),
            name: self.name.clone(),
            human_seat: self.human_seat,
            ai: self.ai,
            seed: self.seed,
            created_at: self.created_at,
            seq: events.current(),
            layout: Layout::new(&self.model),
            history: self.history.iter().map(ToString::to_string).collect(),
            state: StateView::new(&self.state),
        }
    }

    /// Folds the history over a fresh start position.
    pub fn replay(&self) -> GameState {
        let mut dice = dice_rng(self.seed);
        let mut s = initial_state(&self.model, &mut dice).expect("the start position was built once already");
        for mv in &self.history {
            s = apply_move(&self.model, &s, mv, &mut dice).expect("history holds only legal moves");
        }
        s
    }

    fn play(&mut self, index: usize, actor: Actor, events: &Events) -> WireMessage {
        let mv = self.state.legal_moves()[index].clone();
        let player = self.state.mover;
        self.state = apply_move(&self.model, &self.state, &mv, &mut self.dice).expect("index comes from the legal list");
        self.history.push(mv.clone());
        debug_assert!(self.replay() == self.state, "history no longer replays to the current state");
        events.emit(
            MessageType::MovePlayed,
            MovePlayed {
                player,
                actor,
                mv: MoveView::new(index, &mv),
                state: StateView::new(&self.state),
            },
        )
    }

    fn ai_to_move(&self) -> bool {
        !self.state.is_over() && self.human_seat.is_some_and(|h| h != self.state.mover)
    }

    /// Lets the AI move until it is the human's turn or the game is over.
    /// Searches run on the blocking pool so other sessions keep going.
    pub async fn ai_replies(&mut self, move_cap: u32, events: &Events) -> Result<Vec<WireMessage>, ApiError> {
        let mut out = Vec::new();
        while self.ai_to_move() {
            let (model, state, ai, mut rng) = (self.model.clone(), self.state.clone(), self.ai, self.ai_rng.clone());
            let (result, rng) = tokio::task::spawn_blocking(move || {
                let r = choose(&ai, &model, &state, move_cap, &mut rng);
                (r, rng)
            })
            .await
            .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?;
            self.ai_rng = rng;
            let (index, _) = result.map_err(|e| {
                let msg = events.emit(MessageType::Error, serde_json::json!({ "code": "ai_failed", "message": e.to_string() }));
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "ai_failed", e.to_string()).with_details(msg)
            })?;
            out.push(self.play(index, Actor::Ai, events));
        }
        Ok(out)
    }

    /// Applies a human move, then the AI's replies.
    pub async fn submit(&mut self, req: &MoveRequest, move_cap: u32, events: &Events) -> Result<Vec<WireMessage>, ApiError> {
        if let Some(o) = self.state.outcome() {
            return Err(ApiError::new(StatusCode::CONFLICT, "game_over", format!("the game is over ({o})")));
        }
        if let Some(h) = self.human_seat {
            if h != self.state.mover {
                return Err(ApiError::new(
                    StatusCode::CONFLICT,
                    "not_your_turn",
                    format!("{} is to move; you play {h}", self.state.mover),
                ));
            }
        }
        let legal = self.state.legal_moves();
        let index = match req.matches(legal).as_slice() {
            [i] => *i,
            found => {
                let (code, message) = if found.is_empty() {
                    ("illegal_move", "not a legal move")
                } else {
                    ("ambiguous_move", "several legal moves match; give an index")
                };
                let views: Vec<MoveView> = legal.iter().enumerate().map(|(i, m)| MoveView::new(i, m)).collect();
                return Err(ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, code, message)
                    .with_details(serde_json::json!({ "legalMoves": views })));
            }
        };
        let mut out = vec![self.play(index, Actor::Human, events)];
        out.extend(self.ai_replies(move_cap, events).await?);
        Ok(out)
    }
}

/// A stored session: the single-writer state plus its event channel.
pub struct SessionHandle {
    pub session: tokio::sync::Mutex<Session>,
    pub events: Events,
    pub last_active: Mutex<Instant>,
}

impl SessionHandle {
    pub fn new(session: Session) -> Self {
        let events = Events::new(session.id.clone());
        SessionHandle {
            session: tokio::sync::Mutex::new(session),
            events,
            last_active: Mutex::new(Instant::now()),
        }
    }

    pub fn touch(&self) {
        *self.last_active.lock().unwrap() = Instant::now();
    }

    pub fn idle_for(&self) -> std::time::Duration {
        self.last_active.lock().unwrap().elapsed()
    }
}
