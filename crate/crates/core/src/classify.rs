//! Seven-feature classification of games into the traditional families
//! (race games, complex race games, games of pure skill).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::engine::{CaptureStyle, EndCondition, GameModel, HitStyle, PlayRule, Player, ResultKind, Who};

macro_rules! feature_enum {
    ($name:ident { $($v:ident),+ $(,)? }) => {
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        pub enum $name { $($v),+ }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$v),+];
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                fmt::Debug::fmt(self, f)
            }
        }
    };
}

feature_enum!(Determination { Deterministic, Stochastic });
feature_enum!(Objective { Alignment, Capture, Race, Blockade, Territory, Traversal, Other });
feature_enum!(Balance { Symmetric, Asymmetric });
feature_enum!(PieceNature { Identical, Differentiated });
feature_enum!(MoveKind { Placement, Regular, Sowing, DiceDriven });
feature_enum!(Conflict { None, SentBack, Removed });
feature_enum!(CaptureMethod { None, Replacement, Leaping, Custodial, Other });

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FeatureVector {
    pub determination: Determination,
    pub main_objective: Objective,
    pub balance_of_forces: Balance,
    pub piece_nature: PieceNature,
    pub move_kind: MoveKind,
    pub conflict_resolution: Conflict,
    pub capture_method: CaptureMethod,
}

impl fmt::Display for FeatureVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{},{},{},{}",
            self.determination,
            self.main_objective,
            self.balance_of_forces,
            self.piece_nature,
            self.move_kind,
            self.conflict_resolution,
            self.capture_method
        )
    }
}

impl FeatureVector {
    /// Every point of the feature space, for totality checks.
    pub fn all() -> Vec<FeatureVector> {
        let mut out = Vec::new();
        for &determination in Determination::ALL {
            for &main_objective in Objective::ALL {
                for &balance_of_forces in Balance::ALL {
                    for &piece_nature in PieceNature::ALL {
                        for &move_kind in MoveKind::ALL {
                            for &conflict_resolution in Conflict::ALL {
                                for &capture_method in CaptureMethod::ALL {
                                    out.push(FeatureVector {
                                        determination,
                                        main_objective,
                                        balance_of_forces,
                                        piece_nature,
                                        move_kind,
                                        conflict_resolution,
                                        capture_method,
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RaceSubtype {
    ReenterFromStart,
    Immobilised,
    Eliminated,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SkillSubtype {
    Traversal,
    Alignment,
    Blockade,
    Sowing,
    SymmetricElimination,
    AsymmetricElimination,
    SelectiveCaptureSymmetric,
    SelectiveCaptureAsymmetric,
    TerritorialContest,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassLabel {
    SimpleRace,
    ComplexRace(RaceSubtype),
    PureSkill(SkillSubtype),
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassLabel::SimpleRace => f.write_str("SimpleRace"),
            ClassLabel::ComplexRace(s) => write!(f, "ComplexRace({s:?})"),
            ClassLabel::PureSkill(s) => write!(f, "PureSkill({s:?})"),
        }
    }
}

impl FromStr for ClassLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        use RaceSubtype::*;
        use SkillSubtype::*;
        let all = [
            ClassLabel::SimpleRace,
            ClassLabel::ComplexRace(ReenterFromStart),
            ClassLabel::ComplexRace(Immobilised),
            ClassLabel::ComplexRace(Eliminated),
        ]
        .into_iter()
        .chain(
            [
                Traversal,
                Alignment,
                Blockade,
                Sowing,
                SymmetricElimination,
                AsymmetricElimination,
                SelectiveCaptureSymmetric,
                SelectiveCaptureAsymmetric,
                TerritorialContest,
            ]
            .map(ClassLabel::PureSkill),
        );
        all.into_iter()
            .find(|l| l.to_string() == s.trim())
            .ok_or_else(|| format!("unknown class `{s}`"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ClassifyError {
    #[error("cannot derive `{feature}`: {reason}")]
    UnderivableFeature { feature: &'static str, reason: String },
}

fn underivable(feature: &'static str, reason: impl Into<String>) -> ClassifyError {
    ClassifyError::UnderivableFeature {
        feature,
        reason: reason.into(),
    }
}

/// Reads the seven features off the compiled rules.
pub fn extract_features(model: &GameModel) -> Result<FeatureVector, ClassifyError> {
    let determination = if model.chance.is_some() { Determination::Stochastic } else { Determination::Deterministic };

    let decisive = model
        .end_rules
        .iter()
        .find(|r| r.result != ResultKind::Draw)
        .ok_or_else(|| underivable("mainObjective", "no end rule decides a winner"))?;
    let main_objective = match decisive.condition {
        EndCondition::Line(_) => Objective::Alignment,
        EndCondition::CapturedAll => Objective::Capture,
        EndCondition::BearOffAll => Objective::Race,
        EndCondition::NoMoves => Objective::Blockade,
        EndCondition::FullBoard => Objective::Other,
    };

    let seat = |p: Player| {
        let types = model.piece_types[p.index()].len();
        let per_type: Vec<usize> = (0..types)
            .map(|t| model.start_placements.iter().filter(|pl| pl.owner == p && pl.piece as usize == t).count())
            .collect();
        let track = model.board.tracks[p.index()].as_ref().map(|t| (t.sites.len(), t.exits));
        (per_type, model.pools[p.index()], track)
    };
    let favours_a_seat = model.end_rules.iter().any(|r| matches!(r.who, Who::Player(_)));
    let balance_of_forces = if seat(Player::P1) == seat(Player::P2) && !favours_a_seat {
        Balance::Symmetric
    } else {
        Balance::Asymmetric
    };

    let piece_nature = if model.piece_types.iter().any(|t| t.len() > 1) {
        PieceNature::Differentiated
    } else {
        PieceNature::Identical
    };

    let dice_moves = model.play_rules.iter().any(|r| matches!(r, PlayRule::Track { .. }));
    let board_moves = model.play_rules.iter().any(|r| matches!(r, PlayRule::Step { .. } | PlayRule::Leap { .. }));
    let move_kind = match (dice_moves, board_moves) {
        (true, true) => return Err(underivable("moveKind", "dice-driven and free board moves are mixed")),
        (true, false) => MoveKind::DiceDriven,
        (false, true) => MoveKind::Regular,
        (false, false) => MoveKind::Placement,
    };

    let mut methods: Vec<CaptureMethod> = model
        .play_rules
        .iter()
        .filter_map(|r| match r {
            PlayRule::Place { capture } | PlayRule::Step { capture, .. } => capture.map(|c| match c {
                CaptureStyle::Custodial => CaptureMethod::Custodial,
                CaptureStyle::Replace => CaptureMethod::Replacement,
            }),
            PlayRule::Leap { .. } => Some(CaptureMethod::Leaping),
            PlayRule::Track { hit } => hit.map(|_| CaptureMethod::Other),
        })
        .collect();
    methods.sort();
    methods.dedup();
    let capture_method = match methods.as_slice() {
        [] => CaptureMethod::None,
        [one] => *one,
        _ => CaptureMethod::Other,
    };

    let conflict_resolution = match model.hit_style() {
        Some(HitStyle::ToStart) => Conflict::SentBack,
        Some(HitStyle::Remove) => Conflict::Removed,
        None if capture_method != CaptureMethod::None => Conflict::Removed,
        None => Conflict::None,
    };

    Ok(FeatureVector {
        determination,
        main_objective,
        balance_of_forces,
        piece_nature,
        move_kind,
        conflict_resolution,
        capture_method,
    })
}

/// The decision table. Chance games are race games, split by what happens
/// to a hit piece; skill games dispatch on objective, then (for capture
/// games) on piece nature and balance of forces.
pub fn assign_class(f: &FeatureVector) -> ClassLabel {
    use SkillSubtype::*;
    if f.determination == Determination::Stochastic || f.move_kind == MoveKind::DiceDriven {
        return match f.conflict_resolution {
            // No interaction between the runners: pure chance.
            Conflict::None => ClassLabel::SimpleRace,
            Conflict::SentBack => ClassLabel::ComplexRace(RaceSubtype::ReenterFromStart),
            Conflict::Removed => ClassLabel::ComplexRace(RaceSubtype::Eliminated),
        };
    }
    if f.move_kind == MoveKind::Sowing {
        return ClassLabel::PureSkill(Sowing);
    }
    let symmetric = f.balance_of_forces == Balance::Symmetric;
    let capture_row = || match (f.piece_nature, symmetric) {
        (PieceNature::Identical, true) => SymmetricElimination,
        (PieceNature::Identical, false) => AsymmetricElimination,
        (PieceNature::Differentiated, true) => SelectiveCaptureSymmetric,
        (PieceNature::Differentiated, false) => SelectiveCaptureAsymmetric,
    };
    ClassLabel::PureSkill(match f.main_objective {
        Objective::Alignment => Alignment,
        Objective::Blockade => Blockade,
        Objective::Race | Objective::Traversal => Traversal,
        Objective::Territory => TerritorialContest,
        Objective::Capture => capture_row(),
        Objective::Other if f.capture_method != CaptureMethod::None => capture_row(),
        Objective::Other => TerritorialContest,
    })
}

pub fn classify(model: &GameModel) -> Result<(FeatureVector, ClassLabel), ClassifyError> {
    let f = extract_features(model)?;
    Ok((f, assign_class(&f)))
}
