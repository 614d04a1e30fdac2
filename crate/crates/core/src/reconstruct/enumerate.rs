use crate::grammar::{Catalog, LudemeNode, LudemeTree};

use super::ReconstructError;

/// Hard limit on the size of the completion space.
pub const HARD_CAP: u64 = 1_000_000;

/// One completion of a partial game.
#[derive(Clone, Debug, PartialEq)]
pub struct Completion {
    pub tree: LudemeTree,
    /// Chosen option per hole, in hole-id order.
    pub choices: Vec<LudemeNode>,
}

#[derive(Clone, Debug)]
pub struct Completions {
    pub candidates: Vec<Completion>,
    /// Size of the full Cartesian product.
    pub total: u64,
    pub truncated: bool,
}

/// Options of every hole, in hole-id order. A hole without explicit options
/// ranges over its category's catalog exemplars.
pub fn hole_options(partial: &LudemeTree, catalog: &Catalog) -> Result<Vec<Vec<LudemeNode>>, ReconstructError> {
    let holes = partial.holes();
    if holes.is_empty() {
        return Err(ReconstructError::NoHoles);
    }
    holes
        .iter()
        .enumerate()
        .map(|(id, h)| {
            let opts = if h.options.is_empty() { catalog.members(&h.category) } else { h.options.clone() };
            if opts.is_empty() {
                Err(ReconstructError::EmptyOptionSet { hole: id, category: h.category.clone() })
            } else {
                Ok(opts)
            }
        })
        .collect()
}

/// Cartesian product of the hole options. The first hole varies slowest.
/// Products above `max_candidates` are cut to their first `max_candidates`
/// members with a warning; products above [`HARD_CAP`] are refused.
pub fn enumerate_completions(
    partial: &LudemeTree,
    catalog: &Catalog,
    max_candidates: usize,
) -> Result<Completions, ReconstructError> {
    let options = hole_options(partial, catalog)?;
    let total = options
        .iter()
        .try_fold(1u64, |acc, o| acc.checked_mul(o.len() as u64))
        .unwrap_or(u64::MAX);
    if total > HARD_CAP {
        return Err(ReconstructError::CombinatorialOverflow { total });
    }
    let keep = (total as usize).min(max_candidates);
    let truncated = keep < total as usize;
    if truncated {
        log::warn!("completion space has {total} members; keeping the first {keep}");
    }
    let mut digits = vec![0usize; options.len()];
    let mut candidates = Vec::with_capacity(keep);
    for _ in 0..keep {
        let choices: Vec<LudemeNode> = digits.iter().zip(&options).map(|(&d, o)| o[d].clone()).collect();
        candidates.push(Completion {
            tree: partial.fill_holes(&choices),
            choices,
        });
        for pos in (0..digits.len()).rev() {
            digits[pos] += 1;
            if digits[pos] < options[pos].len() {
                break;
            }
            digits[pos] = 0;
        }
    }
    Ok(Completions {
        candidates,
        total,
        truncated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::{parse, print_node};

    const TWO_HOLES: &str = "(game \"T\" (mode 2) (equipment {(board ?shape{(square 3)|(square 4)|(rect 3 8)} (square)) (ball P1) (cross P2)}) \
        (rules (play (to (mover) (empty))) (end ?end{(line length:3)|(fullBoard Draw)})))";

    #[test]
    fn product_in_lexicographic_hole_order() {
        let c = enumerate_completions(&parse(TWO_HOLES).unwrap(), &Catalog::v1(), 100).unwrap();
        assert_eq!(c.total, 6);
        assert!(!c.truncated);
        let picks: Vec<String> =
            c.candidates.iter().map(|x| x.choices.iter().map(print_node).collect::<Vec<_>>().join(" ")).collect();
        assert_eq!(picks[0], "(square 3) (line length:3)");
        assert_eq!(picks[1], "(square 3) (fullBoard Draw)");
        assert_eq!(picks[2], "(square 4) (line length:3)");
        assert_eq!(picks[5], "(rect 3 8) (fullBoard Draw)");
        assert!(c.candidates.iter().all(|x| x.tree.hole_count() == 0));
    }

    #[test]
    fn truncation_keeps_a_prefix() {
        let c = enumerate_completions(&parse(TWO_HOLES).unwrap(), &Catalog::v1(), 4).unwrap();
        assert_eq!((c.total, c.candidates.len(), c.truncated), (6, 4, true));
    }

    #[test]
    fn open_holes_use_catalog_members() {
        let text = TWO_HOLES.replace("?end{(line length:3)|(fullBoard Draw)}", "?end");
        let c = enumerate_completions(&parse(&text).unwrap(), &Catalog::v1(), 1000).unwrap();
        assert_eq!(c.total, 3 * Catalog::v1().members("end").len() as u64);
    }

    #[test]
    fn errors() {
        let cat = Catalog::v1();
        let complete = parse(crate::corpus::TIC_TAC_TOE).unwrap();
        assert!(matches!(enumerate_completions(&complete, &cat, 10), Err(ReconstructError::NoHoles)));
        let empty = parse("(game \"T\" (mode 2) (equipment {(board (square 3))}) (rules ?rules))").unwrap();
        assert!(matches!(
            enumerate_completions(&empty, &cat, 10),
            Err(ReconstructError::EmptyOptionSet { hole: 0, .. })
        ));
        // Seven open holes over ten moves each: 10^7 completions.
        let many = format!(
            "(game \"T\" (mode 2) (equipment {{(board (square 3))}}) (rules (play {}) (end (noMoves))))",
            ["?move"; 7].join(" ")
        );
        assert!(matches!(
            enumerate_completions(&parse(&many).unwrap(), &cat, 10),
            Err(ReconstructError::CombinatorialOverflow { .. })
        ));
    }
}
