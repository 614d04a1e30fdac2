//! JSON shapes sent to clients.

use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use ludeme::engine::{GameModel, GameState, Move, MoveKind, Occupant, Outcome, Player, Site, Status, Track};
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum MessageType {
    State,
    LegalMoves,
    MovePlayed,
    Error,
    AnalysisProgress,
    AnalysisDone,
}

/// One pushed or returned event. `seq` increases by one per event within
/// a session; snapshots repeat the sequence number of the last event.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WireMessage {
    #[serde(rename = "type")]
    pub kind: MessageType,
    pub session_id: String,
    pub seq: u64,
    pub payload: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MoveView {
    pub index: usize,
    pub from: Option<Site>,
    pub to: Option<Site>,
    pub kind: MoveKind,
    pub captures: Vec<Site>,
    pub text: String,
}

impl MoveView {
    pub fn new(index: usize, mv: &Move) -> Self {
        MoveView {
            index,
            from: mv.from,
            to: mv.to,
            kind: mv.kind,
            captures: mv.captures.clone(),
            text: mv.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StateView {
    pub mover: Player,
    pub move_number: u32,
    pub dice: Option<u32>,
    pub sites: Vec<Option<Occupant>>,
    pub in_hand: [Option<u16>; 2],
    pub borne_off: [u16; 2],
    pub status: Status,
    /// `P1 wins`, `draw`, `ongoing`...
    pub status_text: String,
    pub legal_moves: Vec<MoveView>,
}

impl StateView {
    pub fn new(s: &GameState) -> Self {
        let status_text = match s.status {
            Status::Ongoing => "ongoing".to_string(),
            Status::Ended(Outcome::Win(p)) => format!("{p} wins"),
            Status::Ended(Outcome::Draw) => "draw".to_string(),
            Status::Ended(Outcome::Timeout) => "timeout".to_string(),
        };
        StateView {
            mover: s.mover,
            move_number: s.move_number,
            dice: s.pending_dice,
            sites: s.sites.clone(),
            in_hand: s.in_hand,
            borne_off: s.borne_off,
            status: s.status,
            status_text,
            legal_moves: s.legal_moves().iter().enumerate().map(|(i, m)| MoveView::new(i, m)).collect(),
        }
    }
}

/// What a client needs to draw the board without knowing the rules.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Layout {
    pub rows: usize,
    pub columns: usize,
    pub site_count: usize,
    /// Per player, the track as a polyline of sites.
    pub tracks: [Option<Track>; 2],
    /// Per player, piece names by piece index.
    pub pieces: [Vec<String>; 2],
}

impl Layout {
    pub fn new(m: &GameModel) -> Self {
        Layout {
            rows: m.board.rows,
            columns: m.board.columns,
            site_count: m.site_count(),
            tracks: m.board.tracks.clone(),
            pieces: m.piece_types.clone().map(|t| t.iter().map(|k| k.keyword().to_string()).collect()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Actor {
    Human,
    Ai,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MovePlayed {
    pub player: Player,
    pub actor: Actor,
    #[serde(rename = "move")]
    pub mv: MoveView,
    pub state: StateView,
}

/// A move as submitted: either an index into the legal list or any of
/// `from`, `to`, `kind` that together pick out one legal move.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct MoveRequest {
    pub index: Option<usize>,
    pub from: Option<Site>,
    pub to: Option<Site>,
    pub kind: Option<MoveKind>,
}

impl MoveRequest {
    /// Indices of the legal moves matching the request.
    pub fn matches(&self, legal: &[Move]) -> Vec<usize> {
        if let Some(i) = self.index {
            return if i < legal.len() { vec![i] } else { vec![] };
        }
        if self.from.is_none() && self.to.is_none() && self.kind.is_none() {
            return vec![];
        }
        (0..legal.len())
            .filter(|&i| {
                let m = &legal[i];
                self.from.is_none_or(|f| m.from == Some(f))
                    && self.to.is_none_or(|t| m.to == Some(t))
                    && self.kind.is_none_or(|k| m.kind == k)
            })
            .collect()
    }
}

/// An error response: `{"code", "message", "details"?}`.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    pub details: Option<Value>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
            details: None,
        }
    }

    pub fn with_details(mut self, details: impl Serialize) -> Self {
        self.details = serde_json::to_value(details).ok();
        self
    }

    pub fn not_found(what: &str, id: &str) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, "not_found", format!("no {what} `{id}`"))
    }

    pub fn bad_json(e: serde_json::Error) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "invalid_json", e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = serde_json::json!({ "code": self.code, "message": self.message });
        if let Some(d) = self.details {
            body["details"] = d;
        }
        (self.status, Json(body)).into_response()
    }
}
