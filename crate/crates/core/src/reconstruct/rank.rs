use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::enumerate::{enumerate_completions, hole_options};
use super::playability::{playability_filter, PlayabilityThresholds, ProbeSummary, Reason};
use super::ReconstructError;
use crate::agents::{trial_seed, AgentConfig};
use crate::engine::{compile, mix};
use crate::grammar::{print, print_node, validate, Catalog, LudemeNode, LudemeTree};
use crate::metrics::{quality_score, run_analysis, AnalysisJob, DepthProbe, MetricsReport, QualityWeights, TraceThresholds};

/// User-supplied plausibility of ludemes. A weight is looked up by the
/// option's exact canonical text first, then by its keyword; missing
/// entries weigh 1.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct PlausibilityPrior {
    pub weights: BTreeMap<String, f64>,
    /// Free-text provenance per weight key.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub notes: BTreeMap<String, String>,
}

impl PlausibilityPrior {
    pub fn weight(&self, option: &LudemeNode) -> f64 {
        self.weights
            .get(&print_node(option))
            .or_else(|| self.weights.get(&option.keyword))
            .copied()
            .unwrap_or(1.0)
    }

    pub fn check(&self) -> Result<(), ReconstructError> {
        match self.weights.iter().find(|(_, w)| !w.is_finite() || **w < 0.0) {
            Some((k, w)) => Err(ReconstructError::Config(format!("prior weight {w} for `{k}` is not a non-negative number"))),
            None => Ok(()),
        }
    }

    /// Add-one counts of every ludeme (by canonical text) in `trees`.
    pub fn from_frequencies<'a>(trees: impl IntoIterator<Item = &'a LudemeTree>) -> Self {
        fn walk(n: &LudemeNode, counts: &mut BTreeMap<String, f64>) {
            *counts.entry(print_node(n)).or_insert(1.0) += 1.0;
            n.child_nodes().into_iter().for_each(|c| walk(c, counts));
        }
        let mut weights = BTreeMap::new();
        for t in trees {
            walk(&t.root, &mut weights);
        }
        PlausibilityPrior {
            weights,
            notes: BTreeMap::new(),
        }
    }

    /// Geometric mean over holes of the chosen option's weight relative to
    /// the heaviest option of that hole.
    pub fn score(&self, choices: &[LudemeNode], options: &[Vec<LudemeNode>]) -> Result<f64, ReconstructError> {
        let mut log_sum = 0.0;
        for (hole, (choice, opts)) in choices.iter().zip(options).enumerate() {
            let max = opts.iter().map(|o| self.weight(o)).fold(0.0, f64::max);
            if max <= 0.0 {
                return Err(ReconstructError::ZeroPrior { hole });
            }
            log_sum += (self.weight(choice) / max).ln();
        }
        Ok((log_sum / choices.len().max(1) as f64).exp())
    }
}

/// Everything of an analysis job except the game.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct JobTemplate {
    pub agents: [AgentConfig; 2],
    pub games: usize,
    pub move_cap: u32,
    pub swap_seats: bool,
    pub depth_probe: DepthProbe,
    pub weights: QualityWeights,
    pub thresholds: TraceThresholds,
}

impl Default for JobTemplate {
    fn default() -> Self {
        JobTemplate {
            agents: [AgentConfig::uct(50), AgentConfig::uct(50)],
            games: 100,
            move_cap: 500,
            swap_seats: true,
            depth_probe: DepthProbe {
                games: 20,
                low_budget: 10,
                high_budget: 100,
            },
            weights: QualityWeights::default(),
            thresholds: TraceThresholds::default(),
        }
    }
}

impl JobTemplate {
    /// Random agents and outcome-only weights: cheap enough for large sweeps.
    pub fn random_play(games: usize) -> Self {
        JobTemplate {
            agents: [AgentConfig::random(), AgentConfig::random()],
            games,
            move_cap: 2000,
            depth_probe: DepthProbe {
                games: 0,
                ..DepthProbe::default()
            },
            weights: QualityWeights::outcomes_only(),
            ..JobTemplate::default()
        }
    }

    pub fn job(&self, lud: &str, master_seed: u64) -> AnalysisJob {
        AnalysisJob {
            move_cap: self.move_cap,
            swap_seats: self.swap_seats,
            depth_probe: self.depth_probe,
            weights: self.weights,
            thresholds: self.thresholds,
            ..AnalysisJob::new(lud, self.agents, self.games, master_seed)
        }
    }
}

fn default_alpha() -> f64 {
    0.5
}

fn default_max_candidates() -> usize {
    1000
}

/// A reconstruction run, as read from a config file. The partial game is
/// given inline (`partial`) or as a path relative to the config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ReconstructConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partial: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partial_path: Option<String>,
    #[serde(default)]
    pub prior: PlausibilityPrior,
    /// Weight of quality against plausibility in the combined score.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub thresholds: PlayabilityThresholds,
    #[serde(default)]
    pub job: JobTemplate,
    #[serde(default = "default_max_candidates")]
    pub max_candidates: usize,
    #[serde(default)]
    pub master_seed: u64,
}

impl ReconstructConfig {
    pub fn new(partial: &str, job: JobTemplate, master_seed: u64) -> Self {
        ReconstructConfig {
            partial: Some(partial.to_string()),
            partial_path: None,
            prior: PlausibilityPrior::default(),
            alpha: default_alpha(),
            thresholds: PlayabilityThresholds::default(),
            job,
            max_candidates: default_max_candidates(),
            master_seed,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ReconstructError> {
        let c: ReconstructConfig = serde_json::from_str(text).map_err(|e| ReconstructError::Config(e.to_string()))?;
        c.check()?;
        Ok(c)
    }

    pub fn check(&self) -> Result<(), ReconstructError> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(ReconstructError::Config(format!("alpha {} is outside [0, 1]", self.alpha)));
        }
        if self.partial.is_some() == self.partial_path.is_some() {
            return Err(ReconstructError::Config("give exactly one of `partial` and `partialPath`".into()));
        }
        self.prior.check()?;
        self.job.job("", 0).check().map_err(|e| ReconstructError::Config(e.to_string()))
    }

    pub fn partial_text(&self, base: &Path) -> Result<String, ReconstructError> {
        match (&self.partial, &self.partial_path) {
            (Some(t), _) => Ok(t.clone()),
            (None, Some(p)) => std::fs::read_to_string(base.join(p))
                .map_err(|e| ReconstructError::Config(format!("cannot read {p}: {e}"))),
            (None, None) => Err(ReconstructError::Config("no partial game given".into())),
        }
    }
}

/// A completed rule set with its verdicts and scores.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Candidate {
    /// Position in enumeration order.
    pub index: usize,
    /// Canonical single-line text.
    pub text: String,
    #[serde(skip)]
    pub tree: LudemeTree,
    pub hole_choices: BTreeMap<usize, String>,
    pub playable: bool,
    pub reasons: Vec<String>,
    pub reason_codes: Vec<String>,
    pub probe: ProbeSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<MetricsReport>,
    pub quality_score: f64,
    pub prior_score: f64,
    pub combined_score: f64,
    /// Share of the combined score among playable candidates.
    pub probability: f64,
}

impl Candidate {
    /// Unplayable, or playable with an outlier flag.
    pub fn degenerate(&self) -> bool {
        !self.playable || self.report.as_ref().is_some_and(|r| r.flags.iter().any(|f| f.starts_with("outlier")))
    }

    /// Reason codes and report flags together.
    pub fn labels(&self) -> Vec<String> {
        let mut out = self.reason_codes.clone();
        if let Some(r) = &self.report {
            out.extend(r.flags.iter().cloned());
        }
        out
    }
}

pub fn combined_score(quality: f64, prior: f64, alpha: f64) -> f64 {
    quality.powf(alpha) * prior.powf(1.0 - alpha)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RankedCandidates {
    /// Size of the completion space before truncation.
    pub total: u64,
    pub truncated: bool,
    pub alpha: f64,
    pub candidates: Vec<Candidate>,
}

impl RankedCandidates {
    pub fn to_table(&self) -> String {
        let mut s = String::from("rank\tcombined\tquality\tprior\tprob\tchoices\tflags\n");
        for (i, c) in self.candidates.iter().enumerate() {
            let choices: Vec<&str> = c.hole_choices.values().map(String::as_str).collect();
            let _ = writeln!(
                s,
                "{}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{}\t{}",
                i + 1,
                c.combined_score,
                c.quality_score,
                c.prior_score,
                c.probability,
                choices.join(" "),
                c.labels().join(", ")
            );
        }
        s
    }

    pub fn position(&self, text: &str) -> Option<usize> {
        self.candidates.iter().position(|c| c.text == text)
    }
}

/// Sorts candidates (playable first, then combined score descending, then
/// canonical text) and fills in the normalized distribution.
pub fn rank(mut candidates: Vec<Candidate>) -> Vec<Candidate> {
    candidates.sort_by(|a, b| {
        b.playable
            .cmp(&a.playable)
            .then(b.combined_score.total_cmp(&a.combined_score))
            .then_with(|| a.text.cmp(&b.text))
    });
    let playable = candidates.iter().filter(|c| c.playable).count();
    let mass: f64 = candidates.iter().filter(|c| c.playable).map(|c| c.combined_score).sum();
    for c in &mut candidates {
        c.probability = match (c.playable, mass > 0.0) {
            (false, _) => 0.0,
            (true, true) => c.combined_score / mass,
            (true, false) => 1.0 / playable as f64,
        };
    }
    candidates
}

fn evaluate(
    index: usize,
    tree: LudemeTree,
    choices: &[LudemeNode],
    options: &[Vec<LudemeNode>],
    catalog: &Catalog,
    config: &ReconstructConfig,
) -> Result<Candidate, ReconstructError> {
    let text = print(&tree);
    let seed = trial_seed(config.master_seed, index);
    let prior_score = config.prior.score(choices, options)?;
    let issues = validate(&tree, catalog).issues;
    let (reasons, probe) = if let Some(i) = issues.first() {
        (vec![Reason::CompileError(i.message.clone())], ProbeSummary::default())
    } else {
        match compile(&tree, catalog) {
            Err(e) => (vec![Reason::CompileError(e.to_string())], ProbeSummary::default()),
            Ok(model) => {
                let p = playability_filter(&model, &config.thresholds, mix(seed ^ 0x9e0b));
                (p.reasons, p.probe)
            }
        }
    };
    let playable = reasons.is_empty();
    let (report, quality) = if playable {
        let job = config.job.job(&text, seed);
        let report = run_analysis(&job, &tree, None)?;
        let q = quality_score(&report, &config.job.weights).map_err(crate::metrics::JobError::from)?;
        (Some(report), q)
    } else {
        (None, 0.0)
    };
    Ok(Candidate {
        index,
        text,
        tree,
        hole_choices: choices.iter().map(print_node).enumerate().collect(),
        playable,
        reason_codes: reasons.iter().map(|r| r.code().to_string()).collect(),
        reasons: reasons.iter().map(ToString::to_string).collect(),
        probe,
        report,
        quality_score: quality,
        prior_score,
        combined_score: combined_score(quality, prior_score, config.alpha),
        probability: 0.0,
    })
}

/// Enumerates, filters, analyses and ranks the completions of `partial`.
pub fn reconstruct_rank(
    partial: &LudemeTree,
    catalog: &Catalog,
    config: &ReconstructConfig,
) -> Result<RankedCandidates, ReconstructError> {
    config.check()?;
    let options = hole_options(partial, catalog)?;
    let completions = enumerate_completions(partial, catalog, config.max_candidates)?;
    let one = |(i, c): (usize, super::Completion)| evaluate(i, c.tree, &c.choices, &options, catalog, config);
    #[cfg(feature = "parallel")]
    let evaluated: Result<Vec<Candidate>, _> = {
        use rayon::prelude::*;
        completions.candidates.into_par_iter().enumerate().map(one).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let evaluated: Result<Vec<Candidate>, _> = completions.candidates.into_iter().enumerate().map(one).collect();
    Ok(RankedCandidates {
        total: completions.total,
        truncated: completions.truncated,
        alpha: config.alpha,
        candidates: rank(evaluated?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::parse_fragment;
    use proptest::prelude::*;

    fn cand(index: usize, text: &str, quality: f64, prior: f64, playable: bool) -> Candidate {
        Candidate {
            index,
            text: text.to_string(),
            tree: crate::grammar::parse(crate::corpus::TIC_TAC_TOE).unwrap(),
            hole_choices: BTreeMap::new(),
            playable,
            reasons: vec![],
            reason_codes: vec![],
            probe: ProbeSummary::default(),
            report: None,
            quality_score: quality,
            prior_score: prior,
            combined_score: combined_score(quality, prior, 0.5),
            probability: 0.0,
        }
    }

    #[test]
    fn disfavoured_dice_lose_a_quality_tie() {
        let mut prior = PlausibilityPrior::default();
        prior.weights.insert("moveByDice".into(), 0.01);
        let options = vec![vec![parse_fragment("(moveByDice)").unwrap(), parse_fragment("(step)").unwrap()]];
        let dice = prior.score(&options[0][..1], &options).unwrap();
        let step = prior.score(&options[0][1..], &options).unwrap();
        assert!((dice - 0.01).abs() < 1e-12 && step == 1.0);
        let ranked = rank(vec![cand(0, "a dice", 0.4, dice, true), cand(1, "b step", 0.4, step, true)]);
        assert_eq!(ranked[0].text, "b step");
    }

    #[test]
    fn prior_is_a_normalized_geometric_mean() {
        let mut prior = PlausibilityPrior::default();
        prior.weights.insert("(line length:3)".into(), 4.0);
        prior.weights.insert("line".into(), 2.0);
        let o = |t: &str| parse_fragment(t).unwrap();
        let options = vec![
            vec![o("(line length:3)"), o("(line length:4)")],
            vec![o("(noMoves)"), o("(capturedAll)")],
        ];
        // (2/4 * 1/1)^(1/2)
        let s = prior.score(&[o("(line length:4)"), o("(noMoves)")], &options).unwrap();
        assert!((s - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn unplayable_candidates_trail_with_no_mass() {
        let ranked = rank(vec![cand(0, "x", 0.0, 1.0, false), cand(1, "y", 0.0, 1.0, true), cand(2, "z", 0.0, 1.0, true)]);
        assert_eq!(ranked.iter().map(|c| c.probability).collect::<Vec<_>>(), vec![0.5, 0.5, 0.0]);
        assert!(!ranked[2].playable);
    }

    proptest! {
        #[test]
        fn distribution_sums_to_one_in_any_order(
            scores in prop::collection::vec((0.0f64..1.0, 0.01f64..1.0, any::<bool>()), 1..12),
            seed: u64,
        ) {
            let cands: Vec<Candidate> = scores
                .iter()
                .enumerate()
                .map(|(i, &(q, p, ok))| cand(i, &format!("c{i:02}"), q, p, ok || i == 0))
                .collect();
            let a = rank(cands.clone());
            let mut shuffled = cands;
            let n = shuffled.len();
            shuffled.rotate_left((seed as usize) % n);
            shuffled.reverse();
            let b = rank(shuffled);
            let mass: f64 = a.iter().map(|c| c.probability).sum();
            prop_assert!((mass - 1.0).abs() < 1e-9);
            prop_assert_eq!(&a, &b);
            for w in a.windows(2) {
                prop_assert!(w[0].playable >= w[1].playable);
                if w[0].playable == w[1].playable {
                    prop_assert!(w[0].combined_score >= w[1].combined_score);
                }
            }
        }
    }
}
