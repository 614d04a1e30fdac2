use ludeme::agents::{matchup, AgentConfig};
use ludeme::corpus::TIC_TAC_TOE;
use ludeme::engine::{compile, initial_state};
use ludeme::grammar::{parse, Catalog};
use ludeme::metrics::{
    compute_metrics, quality_score, run_analysis, AnalysisJob, DepthProbe, JobError, MetricsReport, QualityWeights,
    TraceThresholds,
};
use ludeme::oracle::random_play_outcomes;
use rand::rngs::mock::StepRng;

fn with_end(end: &str) -> String {
    TIC_TAC_TOE.replace("(end (line length:3) (result (mover) Win))", end)
}

fn random_report(text: &str, games: usize, seed: u64) -> MetricsReport {
    let tree = parse(text).unwrap();
    let model = compile(&tree, &Catalog::v1()).unwrap();
    let r = AgentConfig::random();
    let trials = matchup(&model, &r, &r, games, seed, true, 100, None).unwrap();
    compute_metrics(&trials, &tree, None, &TraceThresholds::default()).unwrap()
}

#[test]
fn line_of_one_is_won_on_the_first_move() {
    let r = random_report(&with_end("(end (line length:1) (result (mover) Win))"), 200, 3);
    assert_eq!(r.balance, 1.0);
    assert_eq!(r.duration_mean, 1.0);
    assert_eq!(r.drawishness, 0.0);
    assert!(r.flags.iter().any(|f| f == "outlier: one-sided"));
}

#[test]
fn line_of_four_never_fires_on_three_by_three() {
    let r = random_report(&with_end("(end {(line length:4) (fullBoard Draw)})"), 200, 3);
    assert_eq!(r.drawishness, 1.0);
    assert_eq!(r.duration_mean, 9.0);
    assert_eq!(r.balance, 0.0);
    assert!(r.flags.iter().any(|f| f == "outlier: all-draw"));
}

#[test]
fn random_play_agrees_with_expectimax() {
    let tree = parse(TIC_TAC_TOE).unwrap();
    let model = compile(&tree, &Catalog::v1()).unwrap();
    let exact = random_play_outcomes(&model, &initial_state(&model, &mut StepRng::new(0, 0)).unwrap());
    let r = random_report(TIC_TAC_TOE, 2000, 17);
    assert!((r.balance - exact.balance()).abs() <= r.balance_ci, "{} vs {}", r.balance, exact.balance());
    assert!((r.drawishness - exact.draw).abs() <= r.drawishness_ci);
    assert!(r.agent_balance.abs() <= r.agent_balance_ci);
    assert!((r.p1_win_rate + r.p2_win_rate + r.draw_rate - r.completion_rate).abs() < 1e-12);
    // Random agents leave no search traces.
    assert_eq!((r.uncertainty, r.drama, r.decisiveness), (None, None, None));
}

#[test]
fn aggregation_ignores_trial_order() {
    let tree = parse(TIC_TAC_TOE).unwrap();
    let model = compile(&tree, &Catalog::v1()).unwrap();
    let trials = matchup(&model, &AgentConfig::flat_mc(30), &AgentConfig::random(), 40, 5, true, 100, None).unwrap();
    let th = TraceThresholds::default();
    let a = compute_metrics(&trials, &tree, None, &th).unwrap();
    let mut shuffled = trials.clone();
    shuffled.reverse();
    shuffled.swap(3, 17);
    let b = compute_metrics(&shuffled, &tree, None, &th).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    for v in [a.uncertainty, a.drama, a.decisiveness] {
        assert!((0.0..=1.0).contains(&v.unwrap()));
    }
}

#[test]
fn analysis_is_deterministic() {
    let mut job = AnalysisJob::new(TIC_TAC_TOE, [AgentConfig::random(), AgentConfig::random()], 1000, 1);
    job.depth_probe.games = 0;
    let tree = parse(TIC_TAC_TOE).unwrap();
    let a = run_analysis(&job, &tree, None).unwrap();
    let b = run_analysis(&job, &tree, None).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.strategic_depth, None);
}

#[test]
fn zero_games_is_rejected() {
    let job = AnalysisJob::new(TIC_TAC_TOE, [AgentConfig::random(), AgentConfig::random()], 0, 1);
    let tree = parse(TIC_TAC_TOE).unwrap();
    assert!(matches!(run_analysis(&job, &tree, None), Err(JobError::Config(_))));
}

#[test]
fn game_only_one_side_can_win_is_flagged() {
    // Whoever completes a pair, P1 is credited; five P1 pieces on a 3x3
    // board always include an adjacent pair, so P2 can never win.
    let text = with_end("(end (line length:2) (result P1 Win))");
    let mut job = AnalysisJob::new(&text, [AgentConfig::uct(50), AgentConfig::random()], 60, 2);
    job.depth_probe = DepthProbe {
        games: 4,
        low_budget: 10,
        high_budget: 50,
    };
    let r = run_analysis(&job, &parse(&text).unwrap(), None).unwrap();
    assert!(r.balance.abs() > 0.9);
    assert!(r.flags.iter().any(|f| f == "outlier: one-sided"));
}

#[test]
fn all_draw_scores_below_tic_tac_toe() {
    let weights = QualityWeights::outcomes_only();
    let ttt = random_report(TIC_TAC_TOE, 500, 8);
    let draw = random_report(&with_end("(end {(line length:4) (fullBoard Draw)})"), 500, 8);
    assert!(quality_score(&draw, &weights).unwrap() < quality_score(&ttt, &weights).unwrap());
    assert_eq!(quality_score(&ttt, &weights).unwrap(), quality_score(&ttt.clone(), &weights).unwrap());
}

#[test]
fn job_json_round_trip() {
    let text = r#"{
        "metricsVersion": 1,
        "ludPath": "tic_tac_toe.lud",
        "agents": ["uct:200", {"kind": "Random"}],
        "games": 10,
        "masterSeed": 4,
        "depthProbe": {"games": 0}
    }"#;
    let job = AnalysisJob::from_json(text).unwrap();
    assert_eq!(job.move_cap, 500);
    assert!(job.swap_seats);
    let again = AnalysisJob::from_json(&serde_json::to_string(&job).unwrap()).unwrap();
    assert_eq!(job, again);
    assert!(AnalysisJob::from_json(&text.replace("\"metricsVersion\": 1", "\"metricsVersion\": 2")).is_err());
    assert!(AnalysisJob::from_json(&text.replace("\"metricsVersion\": 1,", "")).is_err());
}
