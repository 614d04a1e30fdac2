//! Playtesting indicators computed from batches of self-play trials, and
//! an aggregate quality score.

mod job;
mod quality;
mod report;

pub use job::{load_complete, run_analysis, run_trials, AnalysisJob, DepthProbe, JobError, JobTrials};
pub use quality::{
    complexity_penalty, drawishness_penalty, duration_desirability, quality_score, QualityWeights,
};
pub use report::{
    compute_metrics, strategic_depth, trials_csv, wilson_half_width, MetricsError, MetricsReport, TraceThresholds,
    METRICS_VERSION,
};
