use serde::{Deserialize, Serialize};

use super::report::{MetricsError, MetricsReport};

/// Weights of the aggregate quality score. Non-negative, summing to 1.
///
/// Rewarded terms: completion, duration, uncertainty, drama, decisiveness,
/// depth. Penalised terms: |balance|, drawishness above one half, and
/// complexity above the reference.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct QualityWeights {
    pub balance: f64,
    pub drawishness: f64,
    pub completion: f64,
    pub duration: f64,
    pub uncertainty: f64,
    pub drama: f64,
    pub decisiveness: f64,
    pub depth: f64,
    pub complexity: f64,
    /// Node count above which complexity is penalised; the corpus 90th
    /// percentile when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub complexity_reference: Option<usize>,
}

impl Default for QualityWeights {
    /// Uniform over all nine terms.
    fn default() -> Self {
        let w = 1.0 / 9.0;
        QualityWeights {
            balance: w,
            drawishness: w,
            completion: w,
            duration: w,
            uncertainty: w,
            drama: w,
            decisiveness: w,
            depth: w,
            complexity: w,
            complexity_reference: None,
        }
    }
}

impl QualityWeights {
    /// Uniform over every term except strategic depth, for jobs without a
    /// depth probe.
    pub fn without_depth() -> Self {
        let w = 1.0 / 8.0;
        QualityWeights {
            balance: w,
            drawishness: w,
            completion: w,
            duration: w,
            uncertainty: w,
            drama: w,
            decisiveness: w,
            depth: 0.0,
            complexity: w,
            complexity_reference: None,
        }
    }

    /// Uniform over the terms that need no search traces, for batches
    /// played by non-searching agents.
    pub fn outcomes_only() -> Self {
        let w = 1.0 / 5.0;
        QualityWeights {
            balance: w,
            drawishness: w,
            completion: w,
            duration: w,
            uncertainty: 0.0,
            drama: 0.0,
            decisiveness: 0.0,
            depth: 0.0,
            complexity: w,
            complexity_reference: None,
        }
    }

    fn values(&self) -> [f64; 9] {
        [
            self.balance,
            self.drawishness,
            self.completion,
            self.duration,
            self.uncertainty,
            self.drama,
            self.decisiveness,
            self.depth,
            self.complexity,
        ]
    }

    pub fn check(&self) -> Result<(), MetricsError> {
        let v = self.values();
        if v.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(MetricsError::InvalidWeights("weights must be non-negative".into()));
        }
        let sum: f64 = v.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(MetricsError::InvalidWeights(format!("weights sum to {sum}, not 1")));
        }
        Ok(())
    }
}

/// 0 for games over in one move or less, rising to 1 at 5 moves, flat to
/// 200 and falling to 0 at 400.
pub fn duration_desirability(moves: f64) -> f64 {
    if moves <= 1.0 {
        0.0
    } else if moves < 5.0 {
        (moves - 1.0) / 4.0
    } else if moves <= 200.0 {
        1.0
    } else {
        ((400.0 - moves) / 200.0).max(0.0)
    }
}

pub fn complexity_penalty(complexity: usize, reference: usize) -> f64 {
    let r = reference.max(1) as f64;
    ((complexity as f64 - r) / r).clamp(0.0, 1.0)
}

pub fn drawishness_penalty(drawishness: f64) -> f64 {
    ((drawishness - 0.5) / 0.5).max(0.0)
}

/// Weighted sum of rewards minus weighted penalties, clamped to [0,1].
pub fn quality_score(report: &MetricsReport, weights: &QualityWeights) -> Result<f64, MetricsError> {
    weights.check()?;
    let need = |w: f64, v: Option<f64>, name: &'static str| -> Result<f64, MetricsError> {
        if w == 0.0 {
            return Ok(0.0);
        }
        v.map(|v| w * v).ok_or(MetricsError::MissingField(name))
    };
    let reference = weights.complexity_reference.unwrap_or_else(crate::corpus::complexity_p90);
    let reward = weights.completion * report.completion_rate
        + weights.duration * duration_desirability(report.duration_mean)
        + need(weights.uncertainty, report.uncertainty, "uncertainty")?
        + need(weights.drama, report.drama, "drama")?
        + need(weights.decisiveness, report.decisiveness, "decisiveness")?
        + need(weights.depth, report.strategic_depth, "strategicDepth")?;
    let penalty = weights.balance * report.balance.abs()
        + weights.drawishness * drawishness_penalty(report.drawishness)
        + weights.complexity * complexity_penalty(report.complexity, reference);
    Ok((reward - penalty).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::METRICS_VERSION;

    pub(crate) fn report() -> MetricsReport {
        MetricsReport {
            metrics_version: METRICS_VERSION,
            games: 100,
            balance: 0.1,
            balance_ci: 0.1,
            agent_balance: 0.0,
            agent_balance_ci: 0.1,
            p1_win_rate: 0.4,
            p2_win_rate: 0.3,
            draw_rate: 0.3,
            drawishness: 0.3,
            drawishness_ci: 0.1,
            completion_rate: 1.0,
            duration_mean: 9.0,
            duration_std: 1.0,
            branching_factor: 5.0,
            decisiveness: Some(0.5),
            uncertainty: Some(0.5),
            drama: Some(0.2),
            strategic_depth: Some(0.3),
            complexity: 18,
            flags: vec![],
        }
    }

    #[test]
    fn default_weights_are_valid() {
        QualityWeights::default().check().unwrap();
        QualityWeights::without_depth().check().unwrap();
        QualityWeights::outcomes_only().check().unwrap();
        let bad = QualityWeights {
            balance: 0.5,
            ..QualityWeights::default()
        };
        assert!(matches!(bad.check(), Err(MetricsError::InvalidWeights(_))));
    }

    #[test]
    fn hand_computed_score() {
        let r = report();
        let w = QualityWeights {
            complexity_reference: Some(20),
            ..QualityWeights::default()
        };
        // (1 + 1 + 0.5 + 0.2 + 0.5 + 0.3 - 0.1 - 0 - 0) / 9
        let expected = 3.4 / 9.0;
        assert!((quality_score(&r, &w).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn missing_fields_are_errors() {
        let mut r = report();
        r.strategic_depth = None;
        assert_eq!(
            quality_score(&r, &QualityWeights::default()),
            Err(MetricsError::MissingField("strategicDepth"))
        );
        assert!(quality_score(&r, &QualityWeights::without_depth()).is_ok());
    }

    #[test]
    fn one_move_wins_score_low() {
        // Every game is a first-move P1 win: the search sees the win at once.
        let r = MetricsReport {
            balance: 1.0,
            p1_win_rate: 1.0,
            p2_win_rate: 0.0,
            draw_rate: 0.0,
            drawishness: 0.0,
            duration_mean: 1.0,
            duration_std: 0.0,
            decisiveness: Some(1.0),
            uncertainty: Some(0.0),
            drama: Some(0.0),
            strategic_depth: Some(0.0),
            ..report()
        };
        let s = quality_score(&r, &QualityWeights::default()).unwrap();
        assert!(s < 0.2, "{s}");
    }

    #[test]
    fn trapezoid() {
        assert_eq!(duration_desirability(1.0), 0.0);
        assert_eq!(duration_desirability(3.0), 0.5);
        assert_eq!(duration_desirability(5.0), 1.0);
        assert_eq!(duration_desirability(200.0), 1.0);
        assert_eq!(duration_desirability(300.0), 0.5);
        assert_eq!(duration_desirability(1000.0), 0.0);
    }
}
