use serde::{Deserialize, Serialize};

use crate::agents::Trial;
use crate::engine::{Outcome, Player};
use crate::grammar::LudemeTree;

pub const METRICS_VERSION: u32 = 1;

/// Normal quantile for 95% intervals.
const Z95: f64 = 1.959_963_984_540_054;

/// Half-width of the 95% Wilson score interval for a proportion.
pub fn wilson_half_width(p: f64, n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let n = n as f64;
    let z2 = Z95 * Z95;
    Z95 / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt()
}

/// Cut-offs used by the trace-based indicators.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct TraceThresholds {
    /// The outcome counts as settled once the winner's estimate stays at or above this.
    pub decided: f64,
    pub uncertain_low: f64,
    pub uncertain_high: f64,
    /// A winner whose estimate fell below this was at some point behind.
    pub drama: f64,
}

impl Default for TraceThresholds {
    fn default() -> Self {
        TraceThresholds {
            decided: 0.9,
            uncertain_low: 0.4,
            uncertain_high: 0.6,
            drama: 0.4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MetricsReport {
    pub metrics_version: u32,
    pub games: usize,
    /// Seat balance: P1 win rate minus P2 win rate.
    pub balance: f64,
    pub balance_ci: f64,
    /// Win rate of the first configured agent minus the second's, whatever
    /// seat each held.
    pub agent_balance: f64,
    pub agent_balance_ci: f64,
    pub p1_win_rate: f64,
    pub p2_win_rate: f64,
    pub draw_rate: f64,
    /// Draws among completed games.
    pub drawishness: f64,
    pub drawishness_ci: f64,
    pub completion_rate: f64,
    /// Moves per completed game.
    pub duration_mean: f64,
    pub duration_std: f64,
    /// Mean number of legal moves per decision.
    pub branching_factor: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decisiveness: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uncertainty: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drama: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategic_depth: Option<f64>,
    /// Ludeme node count of the rules.
    pub complexity: usize,
    pub flags: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum MetricsError {
    #[error("no trials to analyse")]
    NoTrials,
    #[error("report lacks `{0}`, which has a non-zero weight")]
    MissingField(&'static str),
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
}

#[derive(Default)]
struct Counts {
    games: usize,
    p1: usize,
    p2: usize,
    draws: usize,
    /// Wins by the first configured agent and by the second.
    first: usize,
    second: usize,
}

impl Counts {
    fn completed(&self) -> usize {
        self.p1 + self.p2 + self.draws
    }
}

/// Mean and population standard deviation.
fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Trace indicators of one trial, from the eventual winner's point of view.
struct TraceSummary {
    uncertain_fraction: f64,
    /// `(settled fraction, had a dip)` for decided trials.
    decided: Option<(f64, bool)>,
}

fn trace_summary(t: &Trial, th: &TraceThresholds) -> Option<TraceSummary> {
    let traced: Vec<(usize, Player, f64)> = t
        .plies
        .iter()
        .enumerate()
        .filter_map(|(i, p)| p.estimate.map(|e| (i, p.mover, e)))
        .collect();
    if traced.is_empty() {
        return None;
    }
    let uncertain = traced
        .iter()
        .filter(|(_, _, e)| (th.uncertain_low..=th.uncertain_high).contains(e))
        .count();
    let decided = match t.outcome {
        Outcome::Win(w) => {
            let for_winner: Vec<(usize, f64)> =
                traced.iter().map(|&(i, p, e)| (i, if p == w { e } else { 1.0 - e })).collect();
            let len = t.length();
            let mut settled_at = len;
            for &(i, v) in for_winner.iter().rev() {
                if v < th.decided {
                    break;
                }
                settled_at = i;
            }
            let dip = for_winner.iter().any(|&(_, v)| v < th.drama);
            Some((1.0 - settled_at as f64 / len as f64, dip))
        }
        _ => None,
    };
    Some(TraceSummary {
        uncertain_fraction: uncertain as f64 / traced.len() as f64,
        decided,
    })
}

fn count(trials: &[&Trial]) -> Counts {
    let mut c = Counts::default();
    for t in trials {
        c.games += 1;
        match t.outcome {
            Outcome::Win(w) => {
                if w == Player::P1 {
                    c.p1 += 1;
                } else {
                    c.p2 += 1;
                }
                if w == t.first_agent_seat {
                    c.first += 1;
                } else {
                    c.second += 1;
                }
            }
            Outcome::Draw => c.draws += 1,
            Outcome::Timeout => {}
        }
    }
    c
}

/// Win-rate gap between the deeper and the shallower searcher over probe
/// games in which the deeper one is the first configured agent.
pub fn strategic_depth(probe: &[Trial]) -> Option<f64> {
    if probe.is_empty() {
        return None;
    }
    let refs: Vec<&Trial> = probe.iter().collect();
    let c = count(&refs);
    Some(((c.first as f64 - c.second as f64) / c.games as f64).clamp(0.0, 1.0))
}

/// Folds a batch of trials into a report. Trials are processed in game
/// order, so the report does not depend on the order they are given in.
pub fn compute_metrics(
    trials: &[Trial],
    tree: &LudemeTree,
    probe: Option<&[Trial]>,
    thresholds: &TraceThresholds,
) -> Result<MetricsReport, MetricsError> {
    if trials.is_empty() {
        return Err(MetricsError::NoTrials);
    }
    let mut sorted: Vec<&Trial> = trials.iter().collect();
    sorted.sort_by_key(|t| (t.game_index, t.seed));
    let c = count(&sorted);
    let n = c.games as f64;
    let completed = c.completed();

    let balance = (c.p1 as f64 - c.p2 as f64) / n;
    // Timeouts and draws count half, so the score fraction s has 2s - 1 = balance.
    let seat_score = (balance + 1.0) / 2.0;
    let agent_balance = (c.first as f64 - c.second as f64) / n;
    let agent_score = (agent_balance + 1.0) / 2.0;
    let drawishness = if completed == 0 { 0.0 } else { c.draws as f64 / completed as f64 };

    let lengths: Vec<f64> = sorted.iter().filter(|t| t.completed()).map(|t| t.length() as f64).collect();
    let (duration_mean, duration_std) = mean_std(&lengths);
    let decisions: usize = sorted.iter().map(|t| t.length()).sum();
    let options: usize = sorted.iter().flat_map(|t| &t.plies).map(|p| p.visits.len()).sum();

    let summaries: Vec<TraceSummary> = sorted.iter().filter_map(|t| trace_summary(t, thresholds)).collect();
    let (uncertainty, decisiveness, drama) = if summaries.is_empty() {
        (None, None, None)
    } else {
        let unc = summaries.iter().map(|s| s.uncertain_fraction).sum::<f64>() / summaries.len() as f64;
        let decided: Vec<(f64, bool)> = summaries.iter().filter_map(|s| s.decided).collect();
        if decided.is_empty() {
            (Some(unc), Some(0.0), Some(0.0))
        } else {
            let k = decided.len() as f64;
            (
                Some(unc),
                Some(decided.iter().map(|d| d.0).sum::<f64>() / k),
                Some(decided.iter().filter(|d| d.1).count() as f64 / k),
            )
        }
    };

    let completion_rate = completed as f64 / n;
    let mut flags = Vec::new();
    if balance.abs() > 0.9 {
        flags.push("outlier: one-sided".to_string());
    }
    if completed > 0 && drawishness >= 0.99 {
        flags.push("outlier: all-draw".to_string());
    }
    if completion_rate < 0.95 {
        flags.push("outlier: non-terminating".to_string());
    }

    Ok(MetricsReport {
        metrics_version: METRICS_VERSION,
        games: c.games,
        balance,
        balance_ci: 2.0 * wilson_half_width(seat_score, c.games),
        agent_balance,
        agent_balance_ci: 2.0 * wilson_half_width(agent_score, c.games),
        p1_win_rate: c.p1 as f64 / n,
        p2_win_rate: c.p2 as f64 / n,
        draw_rate: c.draws as f64 / n,
        drawishness,
        drawishness_ci: wilson_half_width(drawishness, completed),
        completion_rate,
        duration_mean,
        duration_std,
        branching_factor: if decisions == 0 { 0.0 } else { options as f64 / decisions as f64 },
        decisiveness,
        uncertainty,
        drama,
        strategic_depth: probe.and_then(strategic_depth),
        complexity: tree.node_count(),
        flags,
    })
}

impl MetricsReport {
    /// Aligned two-column text table.
    pub fn to_table(&self) -> String {
        let opt = |v: Option<f64>| v.map_or("absent".to_string(), |v| format!("{v:.4}"));
        let rows: Vec<(&str, String)> = vec![
            ("metrics version", self.metrics_version.to_string()),
            ("games", self.games.to_string()),
            ("balance", format!("{:+.4} ± {:.4}", self.balance, self.balance_ci)),
            ("agent balance", format!("{:+.4} ± {:.4}", self.agent_balance, self.agent_balance_ci)),
            ("P1 win rate", format!("{:.4}", self.p1_win_rate)),
            ("P2 win rate", format!("{:.4}", self.p2_win_rate)),
            ("draw rate", format!("{:.4}", self.draw_rate)),
            ("drawishness", format!("{:.4} ± {:.4}", self.drawishness, self.drawishness_ci)),
            ("completion rate", format!("{:.4}", self.completion_rate)),
            ("duration", format!("{:.2} ± {:.2} moves", self.duration_mean, self.duration_std)),
            ("branching factor", format!("{:.2}", self.branching_factor)),
            ("decisiveness", opt(self.decisiveness)),
            ("uncertainty", opt(self.uncertainty)),
            ("drama", opt(self.drama)),
            ("strategic depth", opt(self.strategic_depth)),
            ("complexity", format!("{} ludemes", self.complexity)),
            (
                "flags",
                if self.flags.is_empty() { "none".to_string() } else { self.flags.join("; ") },
            ),
        ];
        let width = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
        rows.iter().map(|(k, v)| format!("{k:<width$}  {v}\n")).collect()
    }
}

/// One CSV row per trial.
pub fn trials_csv(trials: &[Trial]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["game", "seed", "p1", "p2", "outcome", "moves"]).unwrap();
    let mut sorted: Vec<&Trial> = trials.iter().collect();
    sorted.sort_by_key(|t| t.game_index);
    for t in sorted {
        w.write_record([
            t.game_index.to_string(),
            t.seed.to_string(),
            t.seats[0].to_string(),
            t.seats[1].to_string(),
            t.outcome.to_string(),
            t.length().to_string(),
        ])
        .unwrap();
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_matches_closed_form() {
        // p = 0.5, n = 100: 1.96 / 1.0384 * sqrt(0.0025 + 0.000096)
        let hw = wilson_half_width(0.5, 100);
        assert!((hw - 0.096_170).abs() < 1e-5, "{hw}");
        assert!(wilson_half_width(0.0, 10) > 0.0);
        assert_eq!(wilson_half_width(0.3, 0), 1.0);
    }

    #[test]
    fn mean_and_std() {
        assert_eq!(mean_std(&[]), (0.0, 0.0));
        assert_eq!(mean_std(&[2.0, 4.0]), (3.0, 1.0));
    }
}
