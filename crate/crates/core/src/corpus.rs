//! Bundled reference games. Each file starts with a `# class: <label>` line
//! recording its hand-assigned family.

use crate::grammar::{parse, LudemeTree};

pub const TIC_TAC_TOE: &str = include_str!("../corpus/tic_tac_toe.lud");

const FILES: &[(&str, &str)] = &[
    ("tic_tac_toe.lud", TIC_TAC_TOE),
    ("four_in_a_row.lud", include_str!("../corpus/four_in_a_row.lud")),
    ("three_mens_morris.lud", include_str!("../corpus/three_mens_morris.lud")),
    ("gomoku.lud", include_str!("../corpus/gomoku.lud")),
    ("latrunculi.lud", include_str!("../corpus/latrunculi.lud")),
    ("draughts.lud", include_str!("../corpus/draughts.lud")),
    ("fox_and_geese.lud", include_str!("../corpus/fox_and_geese.lud")),
    ("hnefatafl.lud", include_str!("../corpus/hnefatafl.lud")),
    ("shatranj.lud", include_str!("../corpus/shatranj.lud")),
    ("mu_torere.lud", include_str!("../corpus/mu_torere.lud")),
    ("ur.lud", include_str!("../corpus/ur.lud")),
    ("goose.lud", include_str!("../corpus/goose.lud")),
    ("tab.lud", include_str!("../corpus/tab.lud")),
];

#[derive(Clone, Debug)]
pub struct CorpusGame {
    pub file: &'static str,
    pub text: &'static str,
    pub name: String,
    /// Hand-assigned class label, as printed by `ClassLabel`'s `Display`.
    pub class: String,
    pub tree: LudemeTree,
}

/// Reads the `# class:` header of a `.lud` file, if present.
pub fn class_header(text: &str) -> Option<&str> {
    text.lines()
        .take_while(|l| l.trim_start().starts_with('#'))
        .find_map(|l| l.trim_start().trim_start_matches('#').trim().strip_prefix("class:"))
        .map(str::trim)
}

/// All bundled games, in a fixed order.
pub fn games() -> Vec<CorpusGame> {
    FILES
        .iter()
        .map(|(file, text)| {
            let tree = parse(text).unwrap_or_else(|e| panic!("bundled {file} must parse: {e}"));
            CorpusGame {
                file,
                text,
                name: tree.name().unwrap_or(file).to_string(),
                class: class_header(text).unwrap_or_default().to_string(),
                tree,
            }
        })
        .collect()
}

pub fn by_name(name: &str) -> Option<CorpusGame> {
    games().into_iter().find(|g| g.name == name)
}

/// Complexity (node count) at the 90th percentile of the corpus, by the
/// nearest-rank method.
pub fn complexity_p90() -> usize {
    let mut counts: Vec<usize> = games().iter().map(|g| g.tree.node_count()).collect();
    counts.sort_unstable();
    let rank = (0.9 * counts.len() as f64).ceil() as usize;
    counts[rank.clamp(1, counts.len()) - 1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::{validate, Catalog};

    #[test]
    fn corpus_validates_complete() {
        let catalog = Catalog::v1();
        let games = games();
        assert!(games.len() >= 10);
        for g in &games {
            let r = validate(&g.tree, &catalog);
            assert!(r.is_complete, "{}: {:#?}", g.file, r.issues);
            assert!(!g.class.is_empty(), "{} lacks a class header", g.file);
        }
        let mut names: Vec<_> = games.iter().map(|g| g.name.clone()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), games.len());
    }

    #[test]
    fn header_parsing() {
        assert_eq!(class_header("# class: SimpleRace\n(game)"), Some("SimpleRace"));
        assert_eq!(class_header("(game)"), None);
    }
}
