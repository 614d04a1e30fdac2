use ludeme::corpus::{self, TIC_TAC_TOE};
use ludeme::engine::compile;
use ludeme::grammar::{parse, Catalog};
use ludeme::reconstruct::{
    enumerate_completions, recovery_experiment, reconstruct_rank, JobTemplate, PlausibilityPrior, PriorSource,
    ReconstructConfig, ReconstructError,
};

fn line_hole() -> String {
    TIC_TAC_TOE.replace(
        "(line length:3)",
        "?end{(line length:1)|(line length:2)|(line length:3)|(line length:4)|(line length:5)}",
    )
}

fn choice(c: &ludeme::reconstruct::Candidate) -> &str {
    &c.hole_choices[&0]
}

#[test]
fn every_line_length_compiles() {
    let c = enumerate_completions(&parse(&line_hole()).unwrap(), &Catalog::v1(), 100).unwrap();
    assert_eq!(c.candidates.len(), 5);
    for x in &c.candidates {
        compile(&x.tree, &Catalog::v1()).unwrap();
    }
}

#[test]
fn end_line_hole_ranks_three_first() {
    let text = line_hole();
    let config = ReconstructConfig::new(&text, JobTemplate::default(), 7);
    let ranked = reconstruct_rank(&parse(&text).unwrap(), &Catalog::v1(), &config).unwrap();
    let c = &ranked.candidates;
    assert_eq!(choice(&c[0]), "(line length:3)", "{}", ranked.to_table());
    assert!(!c[0].degenerate());
    for cand in &c[1..] {
        assert!(cand.degenerate(), "{}", ranked.to_table());
        let labels = cand.labels();
        match choice(cand) {
            "(line length:1)" | "(line length:2)" => assert!(labels.iter().any(|l| l.contains("one-sided")), "{labels:?}"),
            _ => assert!(labels.iter().any(|l| l == "outlier: all-draw"), "{labels:?}"),
        }
    }
    // A first-move win cannot even pass the filter.
    let one = c.iter().find(|x| choice(x) == "(line length:1)").unwrap();
    assert!(!one.playable && one.report.is_none());
    let mass: f64 = c.iter().map(|x| x.probability).sum();
    assert!((mass - 1.0).abs() < 1e-9);
}

#[test]
fn tracks_without_bear_off_are_rejected() {
    let ur = corpus::by_name("Royal Game of Ur").unwrap().text;
    let p1 = "(track P1 {3 2 1 0 8 9 10 11 12 13 14 15 7 6 Off})";
    let p2 = "(track P2 {19 18 17 16 8 9 10 11 12 13 14 15 23 22 Off})";
    let text = ur
        .replace(
            p1,
            "?track{(track P1 {3 2 1 0 8 9 10 11 12 13 14 15 7 6 Off})|(track P1 {3 2 1 0 8 9 10 11 12 13 14 15 7 6})\
             |(track P1 {3 2 1 0 8 9 10 11 12 13 14 15 Off})|(track P1 {3 2 1 0 8 9 10 11 12 13 14 15 7 6 5 4})}",
        )
        .replace(p2, "?track{(track P2 {19 18 17 16 8 9 10 11 12 13 14 15 23 22 Off})|(track P2 {19 18 17 16 8 9 10 11 12 13 14 15 23 22})}");
    let partial = parse(&text).unwrap();
    assert_eq!(partial.hole_count(), 2);
    let config = ReconstructConfig::new(&text, JobTemplate::random_play(50), 3);
    let ranked = reconstruct_rank(&partial, &Catalog::v1(), &config).unwrap();
    assert_eq!(ranked.candidates.len(), 8);
    for c in &ranked.candidates {
        let exits = c.hole_choices.values().all(|t| t.ends_with("Off})"));
        let unreachable = c.reason_codes.iter().any(|r| r == "unreachable goal");
        assert_eq!(unreachable, !exits, "{}: {:?}", c.text, c.reasons);
        assert_eq!(c.playable, exits, "{}: {:?}", c.text, c.reasons);
    }
    assert_eq!(ranked.candidates.iter().filter(|c| c.playable).count(), 2);
}

fn cheap_ranking(prior: PlausibilityPrior, alpha: f64) -> Vec<String> {
    let text = line_hole();
    let config = ReconstructConfig {
        prior,
        alpha,
        ..ReconstructConfig::new(&text, JobTemplate::random_play(100), 5)
    };
    let ranked = reconstruct_rank(&parse(&text).unwrap(), &Catalog::v1(), &config).unwrap();
    ranked.candidates.iter().map(|c| choice(c).to_string()).collect()
}

fn skewed_prior(scale: f64) -> PlausibilityPrior {
    let mut p = PlausibilityPrior::default();
    for (k, w) in [("(line length:2)", 3.0), ("(line length:4)", 0.5), ("line", 2.0)] {
        p.weights.insert(k.to_string(), w * scale);
    }
    p
}

#[test]
fn ranking_ignores_prior_scale() {
    assert_eq!(cheap_ranking(skewed_prior(1.0), 0.5), cheap_ranking(skewed_prior(40.0), 0.5));
}

#[test]
fn alpha_one_ranks_by_quality() {
    let text = line_hole();
    let config = ReconstructConfig {
        prior: skewed_prior(1.0),
        alpha: 1.0,
        ..ReconstructConfig::new(&text, JobTemplate::random_play(100), 5)
    };
    let ranked = reconstruct_rank(&parse(&text).unwrap(), &Catalog::v1(), &config).unwrap();
    let mut by_quality = ranked.candidates.clone();
    by_quality.sort_by(|a, b| {
        b.playable
            .cmp(&a.playable)
            .then(b.quality_score.total_cmp(&a.quality_score))
            .then_with(|| a.text.cmp(&b.text))
    });
    let ids = |v: &[ludeme::reconstruct::Candidate]| v.iter().map(|c| c.index).collect::<Vec<_>>();
    assert_eq!(ids(&ranked.candidates), ids(&by_quality));
}

#[test]
fn reconstruction_is_deterministic() {
    let text = line_hole();
    let config = ReconstructConfig::new(&text, JobTemplate::random_play(60), 12);
    let tree = parse(&text).unwrap();
    let a = reconstruct_rank(&tree, &Catalog::v1(), &config).unwrap();
    let b = reconstruct_rank(&tree, &Catalog::v1(), &config).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn zero_prior_hole_is_an_error() {
    let mut prior = PlausibilityPrior::default();
    prior.weights.insert("line".into(), 0.0);
    let text = line_hole();
    let config = ReconstructConfig {
        prior,
        ..ReconstructConfig::new(&text, JobTemplate::random_play(10), 1)
    };
    let err = reconstruct_rank(&parse(&text).unwrap(), &Catalog::v1(), &config).unwrap_err();
    assert!(matches!(err, ReconstructError::ZeroPrior { hole: 0 }));
}

#[test]
fn config_json() {
    let text = r#"{
        "partialPath": "ttt_end_hole.lud",
        "prior": {"weights": {"moveByDice": 0.01}, "notes": {"moveByDice": "no dice in this region"}},
        "alpha": 0.7,
        "job": {"agents": ["uct:50", "uct:50"], "games": 20},
        "masterSeed": 3
    }"#;
    let c = ReconstructConfig::from_json(text).unwrap();
    assert_eq!(c.alpha, 0.7);
    assert_eq!(c.job.games, 20);
    assert_eq!(c.thresholds.probe_games, 200);
    let again = ReconstructConfig::from_json(&serde_json::to_string(&c).unwrap()).unwrap();
    assert_eq!(c, again);
    assert!(ReconstructConfig::from_json(&text.replace("0.7", "1.5")).is_err());
    assert!(ReconstructConfig::from_json(&text.replace("\"alpha\"", "\"alfa\"")).is_err());
}

#[test]
fn tic_tac_toe_deletions_are_recovered() {
    let games = vec![parse(TIC_TAC_TOE).unwrap()];
    let base = ReconstructConfig::new("", JobTemplate::random_play(200), 11);
    let r = recovery_experiment(&games, &Catalog::v1(), &base, PriorSource::Uniform, 8, 3).unwrap();
    assert!(r.excluded.is_empty());
    assert_eq!(r.deletions.len(), 7);
    let line = r.deletions.iter().find(|d| d.original == "(line length:3)").unwrap();
    assert_eq!(line.rank, 1, "{:?}", r.deletions);
    assert_eq!(line.options, 7);
}
