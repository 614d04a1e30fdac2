//! Browser demo: check a `.lud` text, compare two games, and play a quick
//! seat-swapped match. Every export takes and returns plain strings; results
//! are JSON so the page can render them without glue types.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use ludeme::agents::{matchup, AgentConfig};
use ludeme::classify::classify;
use ludeme::engine::{compile, Outcome};
use ludeme::grammar::{parse, pretty, validate, Catalog};
use ludeme::phylo::{genotype_distance, Abstraction};

/// Upper bound on games per `play_match` call so the tab stays responsive.
pub const MAX_GAMES: usize = 200;

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct CheckReport {
    name: Option<String>,
    pretty: String,
    holes: Vec<String>,
    issues: Vec<String>,
    class: Option<String>,
    features: Option<String>,
    note: Option<String>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct MatchReport {
    games: usize,
    first_wins: usize,
    second_wins: usize,
    draws: usize,
    timeouts: usize,
    mean_length: f64,
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("report types always serialize")
}

/// Names of the bundled games, newline separated.
#[wasm_bindgen]
pub fn corpus_names() -> String {
    ludeme::corpus::games().iter().map(|g| g.name.clone()).collect::<Vec<_>>().join("\n")
}

/// Source text of a bundled game, or an empty string.
#[wasm_bindgen]
pub fn corpus_text(name: &str) -> String {
    ludeme::corpus::by_name(name).map(|g| g.text.to_string()).unwrap_or_default()
}

/// Parses, validates and classifies `text`. Parse failures are errors;
/// everything else is reported in the JSON result.
#[wasm_bindgen]
pub fn check(text: &str) -> Result<String, String> {
    let tree = parse(text).map_err(|e| e.to_string())?;
    let report = validate(&tree, &Catalog::v1());
    let mut out = CheckReport {
        name: tree.name().map(str::to_string),
        pretty: pretty(&tree),
        holes: tree
            .holes()
            .iter()
            .map(|h| match h.options.len() {
                0 => format!("?{} (any catalog member)", h.category),
                n => format!("?{} ({n} options)", h.category),
            })
            .collect(),
        issues: report.issues.iter().map(|i| format!("{:?}: {}", i.kind, i.message)).collect(),
        class: None,
        features: None,
        note: None,
    };
    if !out.holes.is_empty() || !out.issues.is_empty() {
        return Ok(to_json(&out));
    }
    match compile(&tree, &Catalog::v1()) {
        Ok(model) => match classify(&model) {
            Ok((features, label)) => {
                out.class = Some(label.to_string());
                out.features = Some(features.to_string());
            }
            Err(e) => out.note = Some(format!("unclassified: {e}")),
        },
        Err(e) => out.note = Some(e.to_string()),
    }
    Ok(to_json(&out))
}

/// Genotype distance in [0, 1] between two games.
#[wasm_bindgen]
pub fn distance(a: &str, b: &str, raw_integers: bool) -> Result<f64, String> {
    let a = parse(a).map_err(|e| format!("first game: {e}"))?;
    let b = parse(b).map_err(|e| format!("second game: {e}"))?;
    let mode = if raw_integers { Abstraction::RawIntegers } else { Abstraction::Categories };
    Ok(genotype_distance(&a, &b, mode))
}

/// Plays `games` seat-swapped games between two agent specs such as
/// `uct:200` or `random`, and tallies them from the first agent's side.
#[wasm_bindgen]
pub fn play_match(text: &str, first: &str, second: &str, games: usize, seed: u64) -> Result<String, String> {
    if games == 0 || games > MAX_GAMES {
        return Err(format!("games must be between 1 and {MAX_GAMES}"));
    }
    let p1: AgentConfig = first.parse().map_err(|e| format!("{first}: {e}"))?;
    let p2: AgentConfig = second.parse().map_err(|e| format!("{second}: {e}"))?;
    let tree = parse(text).map_err(|e| e.to_string())?;
    if tree.hole_count() > 0 {
        return Err("partial game; fill its holes first".into());
    }
    let model = compile(&tree, &Catalog::v1()).map_err(|e| e.to_string())?;
    let trials = matchup(&model, &p1, &p2, games, seed, true, 500, None).map_err(|e| e.to_string())?;
    let mut r = MatchReport {
        games,
        first_wins: 0,
        second_wins: 0,
        draws: 0,
        timeouts: 0,
        mean_length: 0.0,
    };
    for t in &trials {
        match t.outcome {
            Outcome::Win(p) if p == t.first_agent_seat => r.first_wins += 1,
            Outcome::Win(_) => r.second_wins += 1,
            Outcome::Draw => r.draws += 1,
            Outcome::Timeout => r.timeouts += 1,
        }
        r.mean_length += t.length() as f64;
    }
    r.mean_length /= games as f64;
    Ok(to_json(&r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ludeme::corpus::TIC_TAC_TOE;

    #[test]
    fn check_classifies_complete_game() {
        let v: serde_json::Value = serde_json::from_str(&check(TIC_TAC_TOE).unwrap()).unwrap();
        assert_eq!(v["class"], "PureSkill(Alignment)");
        assert!(v["holes"].as_array().unwrap().is_empty());
        assert!(v["pretty"].as_str().unwrap().starts_with("(game"));
    }

    #[test]
    fn check_lists_holes() {
        let partial = TIC_TAC_TOE.replace("(line length:3)", "?end{(line length:3)|(fullBoard Draw)}");
        let v: serde_json::Value = serde_json::from_str(&check(&partial).unwrap()).unwrap();
        assert_eq!(v["holes"].as_array().unwrap().len(), 1);
        assert!(v["class"].is_null());
        assert!(check("(game").is_err());
    }

    #[test]
    fn distance_is_zero_to_itself() {
        assert_eq!(distance(TIC_TAC_TOE, TIC_TAC_TOE, false).unwrap(), 0.0);
        let gomoku = corpus_text("Gomoku 7x7");
        let d = distance(TIC_TAC_TOE, &gomoku, false).unwrap();
        assert!(d > 0.0 && d <= 1.0, "{d}");
    }

    #[test]
    fn match_tallies_add_up() {
        let v: serde_json::Value =
            serde_json::from_str(&play_match(TIC_TAC_TOE, "random", "random", 10, 7).unwrap()).unwrap();
        let sum: u64 = ["firstWins", "secondWins", "draws", "timeouts"].iter().map(|k| v[k].as_u64().unwrap()).sum();
        assert_eq!(sum, 10);
        assert_eq!(play_match(TIC_TAC_TOE, "random", "random", 10, 7).unwrap(), play_match(TIC_TAC_TOE, "random", "random", 10, 7).unwrap());
        assert!(play_match(TIC_TAC_TOE, "random", "deepblue", 1, 0).is_err());
        assert!(play_match(TIC_TAC_TOE, "random", "random", 0, 0).is_err());
    }

    #[test]
    fn corpus_is_listed() {
        let names = corpus_names();
        assert_eq!(names.lines().count(), 13);
        assert!(!corpus_text(names.lines().next().unwrap()).is_empty());
    }
}
