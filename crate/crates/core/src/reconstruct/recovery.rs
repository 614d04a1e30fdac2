use serde::Serialize;

use super::playability::playability_filter;
use super::rank::{reconstruct_rank, PlausibilityPrior, ReconstructConfig};
use super::ReconstructError;
use crate::grammar::{print, validate_node, Arg, Catalog, Hole, LudemeNode, LudemeTree};

/// A partial game made by replacing one ludeme of a complete game with a
/// hole over that ludeme and some catalog alternatives.
#[derive(Clone, Debug)]
pub struct DeletionSite {
    pub category: String,
    pub original: LudemeNode,
    pub partial: LudemeTree,
    /// The complete game's canonical text, to find it among candidates.
    pub original_text: String,
}

/// Catalog category a node belongs to, judged by which signature it
/// validates against. `None` for the root or unknown keywords.
fn category_of(catalog: &Catalog, node: &LudemeNode) -> Option<&'static str> {
    catalog
        .categories
        .iter()
        .filter(|(_, sigs)| sigs.iter().any(|s| s.keyword == node.keyword))
        .find(|(cat, _)| validate_node(catalog, node, cat).is_empty())
        .map(|(cat, _)| *cat)
}

/// Every non-root exemplar-bearing ludeme with at least one catalog alternative, in
/// pre-order. The hole's options are the original followed by the first
/// `max_options - 1` other exemplars of its category.
pub fn deletion_sites(tree: &LudemeTree, catalog: &Catalog, max_options: usize) -> Vec<DeletionSite> {
    fn nodes<'a>(arg: &'a Arg, out: &mut Vec<&'a LudemeNode>) {
        match arg {
            Arg::Node(n) => {
                out.push(n);
                n.args.iter().for_each(|a| nodes(a, out));
            }
            Arg::Named(_, v) => nodes(v, out),
            Arg::Set(items) => items.iter().for_each(|a| nodes(a, out)),
            _ => {}
        }
    }
    fn punch(arg: &mut Arg, target: usize, seen: &mut usize, hole: &Hole) {
        match arg {
            Arg::Node(n) => {
                if *seen == target {
                    *arg = Arg::Hole(hole.clone());
                    *seen += 1;
                    return;
                }
                *seen += 1;
                n.args.iter_mut().for_each(|a| punch(a, target, seen, hole));
            }
            Arg::Named(_, v) => punch(v, target, seen, hole),
            Arg::Set(items) => items.iter_mut().for_each(|a| punch(a, target, seen, hole)),
            _ => {}
        }
    }
    let mut all = Vec::new();
    tree.root.args.iter().for_each(|a| nodes(a, &mut all));
    let mut out = Vec::new();
    for (i, node) in all.iter().enumerate() {
        let Some(category) = category_of(catalog, node) else { continue };
        // Structural ludemes (board, place, ...) have no exemplars and so
        // no interchangeable alternatives.
        if catalog.signature(category, &node.keyword).is_none_or(|s| s.exemplars.is_empty()) {
            continue;
        }
        let mut original = (*node).clone();
        original.span = Default::default();
        let mut options = vec![original.clone()];
        options.extend(
            catalog
                .members(category)
                .into_iter()
                .filter(|m| *m != original)
                .take(max_options.saturating_sub(1)),
        );
        if options.len() < 2 {
            continue;
        }
        let hole = Hole {
            category: category.to_string(),
            options,
            span: Default::default(),
        };
        let mut partial = tree.clone();
        let mut seen = 0;
        partial.root.args.iter_mut().for_each(|a| punch(a, i, &mut seen, &hole));
        out.push(DeletionSite {
            category: category.to_string(),
            original,
            original_text: print(tree),
            partial,
        });
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Deletion {
    pub game: String,
    pub category: String,
    pub original: String,
    pub options: usize,
    /// 1-based rank of the original completion.
    pub rank: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RecoveryReport {
    /// Games left out because the complete original is itself unplayable,
    /// with the filter's reasons.
    pub excluded: Vec<(String, Vec<String>)>,
    pub deletions: Vec<Deletion>,
    pub top: usize,
    pub recovered: usize,
    pub rate: f64,
}

/// How the prior of each deletion experiment is built.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PriorSource {
    Uniform,
    /// Ludeme frequencies over the other games only.
    LeaveOneOut,
}

/// Deletes each eligible ludeme of each playable game in turn and checks whether
/// the original lands in the top `top` candidates. `base` supplies the job
/// template, thresholds, alpha and master seed.
pub fn recovery_experiment(
    games: &[LudemeTree],
    catalog: &Catalog,
    base: &ReconstructConfig,
    prior: PriorSource,
    max_options: usize,
    top: usize,
) -> Result<RecoveryReport, ReconstructError> {
    let mut deletions = Vec::new();
    let mut excluded = Vec::new();
    for (g, tree) in games.iter().enumerate() {
        let name = tree.name().unwrap_or_default().to_string();
        let model = crate::engine::compile(tree, catalog)
            .map_err(|e| ReconstructError::Config(format!("{name} does not compile: {e}")))?;
        let verdict = playability_filter(&model, &base.thresholds, base.master_seed);
        if !verdict.playable {
            excluded.push((name, verdict.reasons.iter().map(ToString::to_string).collect()));
            continue;
        }
        let prior = match prior {
            PriorSource::Uniform => PlausibilityPrior::default(),
            PriorSource::LeaveOneOut => {
                PlausibilityPrior::from_frequencies(games.iter().enumerate().filter(|(i, _)| *i != g).map(|(_, t)| t))
            }
        };
        for site in deletion_sites(tree, catalog, max_options) {
            let config = ReconstructConfig {
                prior: prior.clone(),
                master_seed: crate::engine::mix(base.master_seed ^ deletions.len() as u64),
                ..base.clone()
            };
            let ranked = reconstruct_rank(&site.partial, catalog, &config)?;
            let rank = ranked.position(&site.original_text).expect("the original is one of the completions") + 1;
            deletions.push(Deletion {
                game: name.clone(),
                category: site.category,
                original: crate::grammar::print_node(&site.original),
                options: ranked.candidates.len(),
                rank,
            });
        }
    }
    let recovered = deletions.iter().filter(|d| d.rank <= top).count();
    Ok(RecoveryReport {
        rate: if deletions.is_empty() { 0.0 } else { recovered as f64 / deletions.len() as f64 },
        excluded,
        deletions,
        top,
        recovered,
    })
}
