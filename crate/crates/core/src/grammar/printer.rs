use super::ast::{Arg, Hole, LudemeNode, LudemeTree};

/// Canonical single-line rendering of a tree.
pub fn print(tree: &LudemeTree) -> String {
    print_node(&tree.root)
}

pub fn print_node(node: &LudemeNode) -> String {
    let mut out = String::new();
    write_node(node, &mut out);
    out
}

pub fn print_arg(arg: &Arg) -> String {
    let mut out = String::new();
    write_arg(arg, &mut out);
    out
}

fn write_node(node: &LudemeNode, out: &mut String) {
    out.push('(');
    out.push_str(&node.keyword);
    for a in &node.args {
        out.push(' ');
        write_arg(a, out);
    }
    out.push(')');
}

fn write_str(s: &str, out: &mut String) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
}

fn write_hole(h: &Hole, out: &mut String) {
    out.push('?');
    out.push_str(&h.category);
    if !h.options.is_empty() {
        out.push('{');
        for (i, o) in h.options.iter().enumerate() {
            if i > 0 {
                out.push('|');
            }
            write_node(o, out);
        }
        out.push('}');
    }
}

fn write_arg(arg: &Arg, out: &mut String) {
    match arg {
        Arg::Node(n) => write_node(n, out),
        Arg::Str(s) => write_str(s, out),
        Arg::Int(i) => out.push_str(&i.to_string()),
        Arg::Symbol(s) => out.push_str(s),
        Arg::Player(p) => out.push_str(&p.to_string()),
        Arg::Named(name, v) => {
            out.push_str(name);
            out.push(':');
            write_arg(v, out);
        }
        Arg::Set(items) => {
            out.push('{');
            for (i, a) in items.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                write_arg(a, out);
            }
            out.push('}');
        }
        Arg::Hole(h) => write_hole(h, out),
    }
}

/// Multi-line rendering for files written to disk: top-level sections of
/// the root on their own indented lines. Parses to the same tree as
/// [`print`].
pub fn pretty(tree: &LudemeTree) -> String {
    let mut out = String::from("(game");
    for a in &tree.root.args {
        match a {
            Arg::Node(_) => {
                out.push_str("\n    ");
                write_arg(a, &mut out);
            }
            _ => {
                out.push(' ');
                write_arg(a, &mut out);
            }
        }
    }
    out.push_str("\n)\n");
    out
}
