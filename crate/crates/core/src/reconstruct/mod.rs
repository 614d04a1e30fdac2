//! Forensic reconstruction: complete a partial game every possible way,
//! drop the unplayable completions and rank the rest by quality and
//! plausibility.

mod enumerate;
mod playability;
mod rank;
mod recovery;

pub use enumerate::{enumerate_completions, hole_options, Completion, Completions, HARD_CAP};
pub use playability::{playability_filter, static_reachability, Playability, PlayabilityThresholds, ProbeSummary, Reason};
pub use rank::{
    combined_score, rank, reconstruct_rank, Candidate, JobTemplate, PlausibilityPrior, RankedCandidates,
    ReconstructConfig,
};
pub use recovery::{deletion_sites, recovery_experiment, Deletion, DeletionSite, PriorSource, RecoveryReport};

#[derive(Debug, thiserror::Error)]
pub enum ReconstructError {
    #[error("the game has no holes to fill")]
    NoHoles,
    #[error("hole {hole} (`{category}`) has no options")]
    EmptyOptionSet { hole: usize, category: String },
    #[error("{total} completions exceed the limit of {HARD_CAP}")]
    CombinatorialOverflow { total: u64 },
    #[error("every option of hole {hole} has prior weight 0")]
    ZeroPrior { hole: usize },
    #[error("reconstruction config: {0}")]
    Config(String),
    #[error(transparent)]
    Job(#[from] crate::metrics::JobError),
}
