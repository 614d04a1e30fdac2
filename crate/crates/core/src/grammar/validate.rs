use serde::{Deserialize, Serialize};

use super::ast::{Arg, Hole, LudemeNode, LudemeTree, Span};
use super::catalog::{ArgKind, Catalog, Repeat};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum IssueKind {
    UnknownKeyword,
    WrongCategory,
    Arity,
    WrongType,
    OutOfRange,
    UnknownNamedArg,
    MissingNamedArg,
    HoleCategory,
    HoleOption,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Issue {
    pub span: Span,
    pub kind: IssueKind,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub is_complete: bool,
    pub hole_count: usize,
    pub issues: Vec<Issue>,
}

/// Checks a tree against the catalog. Issues are data; this never fails.
pub fn validate(tree: &LudemeTree, catalog: &Catalog) -> ValidationReport {
    let mut issues = validate_node(catalog, &tree.root, "game");
    issues.sort();
    issues.dedup();
    let hole_count = tree.hole_count();
    ValidationReport {
        is_complete: hole_count == 0 && issues.is_empty(),
        hole_count,
        issues,
    }
}

/// Validates `node` as a member of `category`.
pub fn validate_node(catalog: &Catalog, node: &LudemeNode, category: &str) -> Vec<Issue> {
    let mut v = Validator { catalog, issues: Vec::new() };
    v.node(node, category);
    v.issues
}

struct Validator<'c> {
    catalog: &'c Catalog,
    issues: Vec<Issue>,
}

impl Validator<'_> {
    fn push(&mut self, span: Span, kind: IssueKind, message: String) {
        self.issues.push(Issue { span, kind, message });
    }

    fn node(&mut self, node: &LudemeNode, category: &str) {
        let Some(sig) = self.catalog.signature(category, &node.keyword) else {
            if self.catalog.knows_keyword(&node.keyword) {
                self.push(
                    node.span,
                    IssueKind::WrongCategory,
                    format!("`{}` is not a `{category}` ludeme", node.keyword),
                );
            } else {
                self.push(node.span, IssueKind::UnknownKeyword, format!("unknown ludeme `{}`", node.keyword));
            }
            return;
        };

        let positional: Vec<&Arg> = node.positional().collect();
        let mut i = 0;
        let mut missing = Vec::new();
        for p in &sig.params {
            let mut taken = 0;
            loop {
                let more = match p.repeat {
                    Repeat::One | Repeat::Optional => taken < 1,
                    Repeat::Many | Repeat::OneOrMore => true,
                };
                if !more || i >= positional.len() || !self.shallow_match(&p.kind, positional[i]) {
                    break;
                }
                self.arg(positional[i], &p.kind, p.name, node);
                i += 1;
                taken += 1;
            }
            if taken == 0 && matches!(p.repeat, Repeat::One | Repeat::OneOrMore) {
                missing.push(p);
            }
        }
        for p in missing {
            let found = positional
                .get(i)
                .map(|a| format!(", found `{}`", super::print_arg(a)))
                .unwrap_or_default();
            self.push(
                node.span,
                IssueKind::Arity,
                format!("`{}` is missing {} ({}){found}", node.keyword, p.name, p.kind.describe()),
            );
        }
        for extra in &positional[i.min(positional.len())..] {
            if let Arg::Hole(h) = extra {
                self.push(
                    h.span,
                    IssueKind::HoleCategory,
                    format!("hole of category `{}` is not accepted by `{}` here", h.category, node.keyword),
                );
                continue;
            }
            self.push(
                node.span,
                IssueKind::Arity,
                format!("unexpected argument `{}` to `{}`", super::print_arg(extra), node.keyword),
            );
        }

        for a in &node.args {
            if let Arg::Named(name, value) = a {
                match sig.named.iter().find(|n| n.name == name) {
                    Some(np) => self.arg(value, &np.kind, np.name, node),
                    None => self.push(
                        node.span,
                        IssueKind::UnknownNamedArg,
                        format!("`{}` has no named argument `{name}`", node.keyword),
                    ),
                }
            }
        }
        for np in sig.named.iter().filter(|n| n.required) {
            if node.named(np.name).is_none() {
                self.push(
                    node.span,
                    IssueKind::MissingNamedArg,
                    format!("`{}` requires `{}:`", node.keyword, np.name),
                );
            }
        }
    }

    /// Cheap structural test used to assign positional args to parameters.
    fn shallow_match(&self, kind: &ArgKind, arg: &Arg) -> bool {
        match (kind, arg) {
            // An unknown keyword takes the slot so that it is reported as
            // unknown rather than as an arity problem.
            (ArgKind::Node(cat), Arg::Node(n)) => {
                self.catalog.signature(cat, &n.keyword).is_some() || !self.catalog.knows_keyword(&n.keyword)
            }
            (ArgKind::Node(cat), Arg::Hole(h)) => h.category == *cat,
            (ArgKind::Int { .. }, Arg::Int(_)) => true,
            (ArgKind::Str, Arg::Str(_)) => true,
            (ArgKind::Player, Arg::Player(_)) => true,
            (ArgKind::Symbol(allowed), Arg::Symbol(s)) => allowed.contains(&s.as_str()),
            (ArgKind::SetOf(_), Arg::Set(_)) => true,
            (ArgKind::Either(ks), a) => ks.iter().any(|k| self.shallow_match(k, a)),
            _ => false,
        }
    }

    fn arg(&mut self, arg: &Arg, kind: &ArgKind, name: &str, owner: &LudemeNode) {
        match (kind, arg) {
            (ArgKind::Either(ks), a) => match ks.iter().find(|k| self.shallow_match(k, a)) {
                Some(k) => self.arg(a, k, name, owner),
                None => self.wrong_type(a, kind, name, owner),
            },
            (ArgKind::Node(cat), Arg::Node(n)) => self.node(n, cat),
            (ArgKind::Node(cat), Arg::Hole(h)) => self.hole(h, cat),
            (ArgKind::Int { min, max }, Arg::Int(v)) => {
                if v < min {
                    self.push(
                        owner.span,
                        IssueKind::OutOfRange,
                        format!("integer out of range, {name} ≥ {min}"),
                    );
                } else if v > max {
                    self.push(
                        owner.span,
                        IssueKind::OutOfRange,
                        format!("integer out of range, {name} ≤ {max}"),
                    );
                }
            }
            (ArgKind::SetOf(inner), Arg::Set(items)) => {
                for item in items {
                    if self.shallow_match(inner, item) {
                        self.arg(item, inner, name, owner);
                    } else {
                        self.wrong_type(item, inner, name, owner);
                    }
                }
            }
            (k, a) if self.shallow_match(k, a) => {}
            (k, a) => self.wrong_type(a, k, name, owner),
        }
    }

    fn wrong_type(&mut self, arg: &Arg, kind: &ArgKind, name: &str, owner: &LudemeNode) {
        let span = match arg {
            Arg::Node(n) => n.span,
            Arg::Hole(h) => h.span,
            _ => owner.span,
        };
        let kind_of_issue = match arg {
            Arg::Hole(_) => IssueKind::HoleCategory,
            _ => IssueKind::WrongType,
        };
        self.push(
            span,
            kind_of_issue,
            format!(
                "`{}` of `{}` expects {}, found `{}`",
                name,
                owner.keyword,
                kind.describe(),
                super::print_arg(arg)
            ),
        );
    }

    fn hole(&mut self, hole: &Hole, category: &str) {
        if !self.catalog.has_category(&hole.category) {
            self.push(
                hole.span,
                IssueKind::HoleCategory,
                format!("unknown hole category `{}`", hole.category),
            );
            return;
        }
        for opt in &hole.options {
            let before = self.issues.len();
            self.node(opt, category);
            if self.issues.len() > before {
                self.push(
                    hole.span,
                    IssueKind::HoleOption,
                    format!("option `{}` is not a valid `{category}`", super::print_node(opt)),
                );
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::TIC_TAC_TOE;
    use crate::grammar::parse;

    fn report(text: &str) -> ValidationReport {
        validate(&parse(text).unwrap(), &Catalog::v1())
    }

    #[test]
    fn tic_tac_toe_is_complete() {
        let r = report(TIC_TAC_TOE);
        assert!(r.is_complete, "{:#?}", r.issues);
        assert_eq!(r.hole_count, 0);
    }

    #[test]
    fn line_length_zero_is_out_of_range() {
        let text = TIC_TAC_TOE.replace("length:3", "length:0");
        let r = report(&text);
        assert!(!r.is_complete);
        assert_eq!(r.issues.len(), 1);
        assert_eq!(r.issues[0].kind, IssueKind::OutOfRange);
        assert_eq!(r.issues[0].message, "integer out of range, length ≥ 1");
        let span = r.issues[0].span;
        assert_eq!(&text[span.start..span.end], "(line length:0)");
    }

    #[test]
    fn single_end_hole() {
        let text = TIC_TAC_TOE.replace("(line length:3)", "?end");
        let r = report(&text);
        assert!(!r.is_complete);
        assert_eq!(r.hole_count, 1);
        assert!(r.issues.is_empty(), "{:#?}", r.issues);
    }

    #[test]
    fn unknown_keyword_and_arity() {
        let r = report(&TIC_TAC_TOE.replace("(square 3)", "(hexagon 3)"));
        assert!(r.issues.iter().any(|i| i.kind == IssueKind::UnknownKeyword));
        let r = report(&TIC_TAC_TOE.replace("(square 3)", "(rect 3)"));
        assert!(r.issues.iter().any(|i| i.kind == IssueKind::Arity), "{:#?}", r.issues);
        let r = report(&TIC_TAC_TOE.replace("(square)", "(square) (square)"));
        assert!(r.issues.iter().any(|i| i.kind == IssueKind::Arity), "{:#?}", r.issues);
    }

    #[test]
    fn hole_option_must_fit_category() {
        let text = TIC_TAC_TOE.replace("(line length:3)", "?end{(line length:3)|(step)}");
        let r = report(&text);
        assert!(r.issues.iter().any(|i| i.kind == IssueKind::HoleOption));
        let text = TIC_TAC_TOE.replace("(line length:3)", "?move");
        let r = report(&text);
        assert!(r.issues.iter().any(|i| i.kind == IssueKind::HoleCategory), "{:#?}", r.issues);
    }

    #[test]
    fn named_arguments_checked() {
        let r = report(&TIC_TAC_TOE.replace("length:3", "size:3"));
        let kinds: Vec<_> = r.issues.iter().map(|i| i.kind).collect();
        assert!(kinds.contains(&IssueKind::UnknownNamedArg));
        assert!(kinds.contains(&IssueKind::MissingNamedArg));
    }

    #[test]
    fn deterministic_issue_set() {
        let text = "(game \"X\" (mode 3) (equipment {(board (square 0)) (blob)}) (rules (play (step Up)) (end (line length:99))))";
        let a = report(text);
        let b = report(text);
        assert_eq!(a, b);
        assert!(a.issues.len() >= 4);
    }
}
