use std::path::Path;

use serde::{Deserialize, Serialize};

use super::quality::QualityWeights;
use super::report::{compute_metrics, MetricsReport, TraceThresholds, METRICS_VERSION};
use crate::agents::{matchup, AgentConfig, Trial};
use crate::engine::{compile, mix};
use crate::grammar::{parse, validate, Catalog, LudemeTree};

/// Budget-gap matches used to estimate strategic depth.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct DepthProbe {
    pub games: usize,
    pub low_budget: u32,
    pub high_budget: u32,
}

impl Default for DepthProbe {
    fn default() -> Self {
        DepthProbe {
            games: 20,
            low_budget: 100,
            high_budget: 2000,
        }
    }
}

fn default_move_cap() -> u32 {
    500
}

fn default_true() -> bool {
    true
}

/// A batch self-play analysis, as read from a job file.
///
/// The game is given either inline (`lud`) or as a path (`ludPath`,
/// relative to the job file).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct AnalysisJob {
    pub metrics_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lud: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lud_path: Option<String>,
    /// The two configurations; with `swapSeats` they alternate seats.
    pub agents: [AgentConfig; 2],
    pub games: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_move_cap")]
    pub move_cap: u32,
    #[serde(default = "default_true")]
    pub swap_seats: bool,
    #[serde(default)]
    pub depth_probe: DepthProbe,
    #[serde(default)]
    pub weights: QualityWeights,
    #[serde(default)]
    pub thresholds: TraceThresholds,
}

#[derive(Debug, thiserror::Error)]
pub enum JobError {
    #[error("job file: {0}")]
    Config(String),
    #[error("game rules: {0}")]
    Game(String),
    #[error(transparent)]
    Metrics(#[from] super::report::MetricsError),
}

impl AnalysisJob {
    pub fn new(lud: &str, agents: [AgentConfig; 2], games: usize, master_seed: u64) -> Self {
        AnalysisJob {
            metrics_version: METRICS_VERSION,
            lud: Some(lud.to_string()),
            lud_path: None,
            agents,
            games,
            master_seed,
            move_cap: default_move_cap(),
            swap_seats: true,
            depth_probe: DepthProbe::default(),
            weights: QualityWeights::default(),
            thresholds: TraceThresholds::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, JobError> {
        let job: AnalysisJob = serde_json::from_str(text).map_err(|e| JobError::Config(e.to_string()))?;
        job.check()?;
        Ok(job)
    }

    pub fn check(&self) -> Result<(), JobError> {
        if self.metrics_version != METRICS_VERSION {
            return Err(JobError::Config(format!(
                "metricsVersion {} is not supported (expected {METRICS_VERSION})",
                self.metrics_version
            )));
        }
        if self.games == 0 {
            return Err(JobError::Config("games must be at least 1".into()));
        }
        if self.move_cap == 0 {
            return Err(JobError::Config("moveCap must be at least 1".into()));
        }
        if self.lud.is_some() == self.lud_path.is_some() {
            return Err(JobError::Config("give exactly one of `lud` and `ludPath`".into()));
        }
        for a in &self.agents {
            a.check().map_err(JobError::Config)?;
        }
        let p = &self.depth_probe;
        if p.games > 0 && (p.low_budget == 0 || p.high_budget == 0) {
            return Err(JobError::Config("depth probe budgets must be at least 1".into()));
        }
        self.weights.check()?;
        Ok(())
    }

    /// The rules text, reading `ludPath` relative to `base` if needed.
    pub fn game_text(&self, base: &Path) -> Result<String, JobError> {
        match (&self.lud, &self.lud_path) {
            (Some(t), _) => Ok(t.clone()),
            (None, Some(p)) => {
                std::fs::read_to_string(base.join(p)).map_err(|e| JobError::Config(format!("cannot read {p}: {e}")))
            }
            (None, None) => Err(JobError::Config("no game given".into())),
        }
    }
}

/// Parses, validates and compiles rules text into a tree ready to analyse.
pub fn load_complete(text: &str) -> Result<LudemeTree, JobError> {
    let tree = parse(text).map_err(|e| JobError::Game(e.to_string()))?;
    let report = validate(&tree, &Catalog::v1());
    if report.hole_count > 0 {
        return Err(JobError::Game(format!("partial game with {} hole(s)", report.hole_count)));
    }
    if let Some(i) = report.issues.first() {
        return Err(JobError::Game(i.message.clone()));
    }
    Ok(tree)
}

/// Main batch and depth-probe trials of a job.
pub struct JobTrials {
    pub main: Vec<Trial>,
    pub probe: Vec<Trial>,
}

/// Plays the job's matches. `progress` receives (done, total) over main
/// and probe games together.
pub fn run_trials(
    job: &AnalysisJob,
    tree: &LudemeTree,
    progress: Option<&(dyn Fn(usize, usize) + Sync)>,
) -> Result<JobTrials, JobError> {
    job.check()?;
    let model = compile(tree, &Catalog::v1()).map_err(|e| JobError::Game(e.to_string()))?;
    let probe_games = job.depth_probe.games;
    let total = job.games + probe_games;
    let main_progress = |done: usize, _: usize| {
        if let Some(p) = progress {
            p(done, total)
        }
    };
    let probe_progress = |done: usize, _: usize| {
        if let Some(p) = progress {
            p(job.games + done, total)
        }
    };
    let [a, b] = &job.agents;
    let main = matchup(&model, a, b, job.games, job.master_seed, job.swap_seats, job.move_cap, Some(&main_progress))
        .map_err(|e| JobError::Game(e.to_string()))?;
    let probe = if probe_games > 0 {
        let high = AgentConfig::uct(job.depth_probe.high_budget);
        let low = AgentConfig::uct(job.depth_probe.low_budget);
        matchup(&model, &high, &low, probe_games, mix(job.master_seed ^ 0xde97), true, job.move_cap, Some(&probe_progress))
            .map_err(|e| JobError::Game(e.to_string()))?
    } else {
        Vec::new()
    };
    Ok(JobTrials { main, probe })
}

/// Runs the job's matches and reduces them to a report.
pub fn run_analysis(
    job: &AnalysisJob,
    tree: &LudemeTree,
    progress: Option<&(dyn Fn(usize, usize) + Sync)>,
) -> Result<MetricsReport, JobError> {
    let trials = run_trials(job, tree, progress)?;
    let probe = (job.depth_probe.games > 0).then_some(trials.probe.as_slice());
    Ok(compute_metrics(&trials.main, tree, probe, &job.thresholds)?)
}
