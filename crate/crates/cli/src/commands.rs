use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ludeme::agents::{matchup, AgentConfig};
use ludeme::classify::classify;
use ludeme::corpus;
use ludeme::engine::{compile, Outcome};
use ludeme::grammar::{parse, pretty, validate, Catalog, LudemeTree, Span};
use ludeme::metrics::{
    compute_metrics, load_complete, quality_score, run_trials, trials_csv, AnalysisJob,
};
use ludeme::phylo::{distance_matrix, from_newick, neighbor_joining, to_newick, Abstraction, DistanceMatrix};
use ludeme::reconstruct::{reconstruct_rank, ReconstructConfig};
use serde::Serialize;
use serde_json::json;

use crate::{Cli, Command, Failure, Format};

pub const VERSION: &str = concat!(
    env!("CARGO_PKG_VERSION"),
    " (engine ",
    env!("CARGO_PKG_VERSION"),
    ", catalog 1, metrics 1)"
);

type Out = Result<String, Failure>;

fn domain(msg: impl Into<String>) -> Failure {
    Failure::Domain(msg.into())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| domain(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| domain(format!("cannot write {}: {e}", path.display())))
}

fn to_json(v: &impl Serialize) -> Out {
    serde_json::to_string_pretty(v)
        .map(|s| s + "\n")
        .map_err(|e| Failure::Internal(e.to_string()))
}

/// 1-based line and column (in characters) of a byte offset.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().unwrap_or("").chars().count() + 1;
    (line, col)
}

fn at(file: &Path, text: &str, span: Span) -> String {
    let (l, c) = line_col(text, span.start);
    format!("{}:{l}:{c}", file.display())
}

fn parse_file(file: &Path) -> Result<(String, LudemeTree), Failure> {
    let text = read(file)?;
    let tree = parse(&text).map_err(|errs| {
        let lines: Vec<String> = errs
            .0
            .iter()
            .map(|e| format!("{}:{}:{}: {:?}: {}", file.display(), e.line, e.column, e.kind, e.message))
            .collect();
        domain(lines.join("\n"))
    })?;
    Ok((text, tree))
}

/// `.lud` files of a directory, sorted by file name.
fn lud_files(dir: &Path) -> Result<Vec<PathBuf>, Failure> {
    let entries = fs::read_dir(dir).map_err(|e| domain(format!("cannot read {}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "lud"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(domain(format!("no .lud files in {}", dir.display())));
    }
    Ok(files)
}

fn label(file: &Path, tree: &LudemeTree) -> String {
    tree.name()
        .map(str::to_string)
        .unwrap_or_else(|| file.file_stem().unwrap_or_default().to_string_lossy().into_owned())
}

fn base_dir(file: &Path) -> PathBuf {
    file.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn columns(rows: &[Vec<String>]) -> String {
    let widths: Vec<usize> = (0..rows[0].len())
        .map(|i| rows.iter().map(|r| r[i].chars().count()).max().unwrap_or(0))
        .collect();
    let mut s = String::new();
    for r in rows {
        let cells: Vec<String> = r.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        s.push_str(cells.join("  ").trim_end());
        s.push('\n');
    }
    s
}

pub fn run(cli: &Cli) -> Out {
    let g = &cli.global;
    let json = g.format == Format::Json;
    match &cli.command {
        Command::Check { file } => check(file, json),
        Command::Play {
            file,
            p1,
            p2,
            games,
            move_cap,
            no_swap,
            out,
        } => play(file, [*p1, *p2], *games, g.seed.unwrap_or(0), *move_cap, !no_swap, out.as_deref(), json),
        Command::Analyze { job, out, trials_csv } => analyze(job, g.seed, out.as_deref(), trials_csv.as_deref(), json),
        Command::Reconstruct { config, out } => reconstruct(config, g.seed, out, json),
        Command::Dist { dir, out, raw_integers } => dist(dir, out.as_deref(), *raw_integers, json),
        Command::Phylo { matrix, out } => phylo(matrix, out.as_deref(), json),
        Command::Classify { dir } => classify_dir(dir, json),
        Command::Corpus { dir } => write_corpus(dir),
        Command::Serve { host, port } => serve(host, *port),
    }
}

fn check(file: &Path, json: bool) -> Out {
    let (text, tree) = parse_file(file)?;
    let catalog = Catalog::v1();
    let report = validate(&tree, &catalog);
    if !report.issues.is_empty() {
        let lines: Vec<String> = report
            .issues
            .iter()
            .map(|i| format!("{}: {:?}: {}", at(file, &text, i.span), i.kind, i.message))
            .collect();
        return Err(domain(lines.join("\n")));
    }
    if report.hole_count == 0 {
        compile(&tree, &catalog).map_err(|e| domain(format!("{}: {e}", file.display())))?;
    }
    if json {
        return to_json(&report);
    }
    let mut s = if report.hole_count == 0 {
        "complete, 0 holes\n".to_string()
    } else {
        let n = report.hole_count;
        format!("partial, {n} hole{}\n", if n == 1 { "" } else { "s" })
    };
    for h in tree.holes() {
        let (l, c) = line_col(&text, h.span.start);
        let options = if h.options.is_empty() {
            "catalog members".to_string()
        } else {
            format!("{} options", h.options.len())
        };
        let _ = writeln!(s, "  {l}:{c}  ?{}  {options}", h.category);
    }
    Ok(s)
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct AgentRow {
    agent: String,
    wins: usize,
    losses: usize,
    draws: usize,
    timeouts: usize,
}

#[allow(clippy::too_many_arguments)]
fn play(
    file: &Path,
    agents: [AgentConfig; 2],
    games: usize,
    seed: u64,
    move_cap: u32,
    swap: bool,
    out: Option<&Path>,
    json: bool,
) -> Out {
    if games == 0 {
        return Err(domain("--games must be at least 1"));
    }
    let text = read(file)?;
    let tree = load_complete(&text).map_err(|e| domain(format!("{}: {e}", file.display())))?;
    let model = compile(&tree, &Catalog::v1()).map_err(|e| domain(e.to_string()))?;
    let trials = matchup(&model, &agents[0], &agents[1], games, seed, swap, move_cap, None)
        .map_err(|e| domain(e.to_string()))?;
    let rows: Vec<AgentRow> = (0..2)
        .map(|i| {
            let mut row = AgentRow {
                agent: agents[i].to_string(),
                wins: 0,
                losses: 0,
                draws: 0,
                timeouts: 0,
            };
            for t in &trials {
                let seat = if i == 0 { t.first_agent_seat } else { t.first_agent_seat.opponent() };
                match t.outcome {
                    Outcome::Win(w) if w == seat => row.wins += 1,
                    Outcome::Win(_) => row.losses += 1,
                    Outcome::Draw => row.draws += 1,
                    Outcome::Timeout => row.timeouts += 1,
                }
            }
            row
        })
        .collect();
    if let Some(path) = out {
        write(path, &trials_csv(&trials))?;
    }
    if json {
        return to_json(&json!({ "seed": seed, "games": games, "moveCap": move_cap, "swapSeats": swap, "agents": rows }));
    }
    let mut table = vec![["agent", "wins", "losses", "draws", "timeouts", "loss rate"].map(String::from).to_vec()];
    for (i, r) in rows.iter().enumerate() {
        table.push(vec![
            format!("{} ({})", r.agent, if i == 0 { "--p1" } else { "--p2" }),
            r.wins.to_string(),
            r.losses.to_string(),
            r.draws.to_string(),
            r.timeouts.to_string(),
            format!("{:.4}", r.losses as f64 / games as f64),
        ]);
    }
    let seats = if swap { "seats alternate" } else { "--p1 always moves first" };
    Ok(format!("seed: {seed}\n{games} games, {seats}\n{}", columns(&table)))
}

fn analyze(path: &Path, seed: Option<u64>, out: Option<&Path>, csv: Option<&Path>, json: bool) -> Out {
    let mut job = AnalysisJob::from_json(&read(path)?).map_err(|e| domain(format!("{}: {e}", path.display())))?;
    if let Some(s) = seed {
        job.master_seed = s;
    }
    let text = job.game_text(&base_dir(path)).map_err(|e| domain(e.to_string()))?;
    let tree = load_complete(&text).map_err(|e| domain(e.to_string()))?;
    let trials = run_trials(&job, &tree, None).map_err(|e| domain(e.to_string()))?;
    let probe = (job.depth_probe.games > 0).then_some(trials.probe.as_slice());
    let report = compute_metrics(&trials.main, &tree, probe, &job.thresholds).map_err(|e| domain(e.to_string()))?;
    let quality = quality_score(&report, &job.weights);
    if let Some(p) = out {
        write(p, &to_json(&report)?)?;
    }
    if let Some(p) = csv {
        write(p, &trials_csv(&trials.main))?;
    }
    if json {
        return to_json(&json!({ "seed": job.master_seed, "report": report, "quality": quality.as_ref().ok() }));
    }
    let quality = match quality {
        Ok(q) => format!("{q:.4}"),
        Err(e) => format!("n/a ({e})"),
    };
    Ok(format!("seed: {}\n{}quality: {quality}\n", job.master_seed, report.to_table()))
}

fn reconstruct(path: &Path, seed: Option<u64>, out: &Path, json: bool) -> Out {
    let mut config =
        ReconstructConfig::from_json(&read(path)?).map_err(|e| domain(format!("{}: {e}", path.display())))?;
    if let Some(s) = seed {
        config.master_seed = s;
    }
    let text = config.partial_text(&base_dir(path)).map_err(|e| domain(e.to_string()))?;
    let partial = parse(&text).map_err(|e| domain(e.to_string()))?;
    let ranked = reconstruct_rank(&partial, &Catalog::v1(), &config).map_err(|e| domain(e.to_string()))?;
    fs::create_dir_all(out).map_err(|e| domain(format!("cannot create {}: {e}", out.display())))?;
    let report = to_json(&ranked)?;
    write(&out.join("ranked.json"), &report)?;
    write(&out.join("ranked.txt"), &ranked.to_table())?;
    let width = ranked.candidates.len().to_string().len().max(2);
    for (i, c) in ranked.candidates.iter().enumerate() {
        write(&out.join(format!("candidate-{:0width$}.lud", i + 1)), &pretty(&c.tree))?;
    }
    if json {
        return Ok(report);
    }
    let playable = ranked.candidates.iter().filter(|c| c.playable).count();
    let truncated = if ranked.truncated { " (truncated)" } else { "" };
    Ok(format!(
        "seed: {}\n{} completions{truncated}, {} ranked, {playable} playable\n{}wrote {} candidate files\n",
        config.master_seed,
        ranked.total,
        ranked.candidates.len(),
        ranked.to_table(),
        ranked.candidates.len()
    ))
}

fn matrix_json(m: &DistanceMatrix) -> serde_json::Value {
    json!({ "labels": m.labels, "distances": m.d })
}

fn dist(dir: &Path, out: Option<&Path>, raw: bool, json: bool) -> Out {
    let mut corpus = Vec::new();
    for f in lud_files(dir)? {
        let (_, tree) = parse_file(&f)?;
        corpus.push((label(&f, &tree), tree));
    }
    let mode = if raw { Abstraction::RawIntegers } else { Abstraction::Categories };
    let m = distance_matrix(&corpus, mode).map_err(|e| domain(e.to_string()))?;
    if let Some(p) = out {
        write(p, &m.to_csv())?;
    }
    if json {
        return to_json(&matrix_json(&m));
    }
    Ok(m.to_table())
}

fn phylo(path: &Path, out: Option<&Path>, json: bool) -> Out {
    let m = DistanceMatrix::from_csv(&read(path)?).map_err(|e| domain(format!("{}: {e}", path.display())))?;
    let tree = neighbor_joining(&m).map_err(|e| domain(e.to_string()))?;
    let newick = to_newick(&tree);
    debug_assert!(from_newick(&newick).is_ok());
    if let Some(p) = out {
        write(p, &format!("{newick}\n"))?;
    }
    if json {
        return to_json(&json!({ "newick": newick, "warnings": tree.warnings }));
    }
    let mut s = format!("{} leaves\n{newick}\n", tree.leaf_count());
    for w in &tree.warnings {
        let _ = writeln!(s, "warning: {w}");
    }
    Ok(s)
}

fn classify_dir(dir: &Path, json: bool) -> Out {
    let catalog = Catalog::v1();
    let mut rows = Vec::new();
    for f in lud_files(dir)? {
        let (_, tree) = parse_file(&f)?;
        let model = compile(&tree, &catalog).map_err(|e| domain(format!("{}: {e}", f.display())))?;
        let name = label(&f, &tree);
        rows.push(match classify(&model) {
            Ok((features, class)) => (name, class.to_string(), features.to_string()),
            Err(e) => (name, "unclassified".to_string(), e.to_string()),
        });
    }
    if json {
        let v: Vec<_> = rows.iter().map(|(n, c, f)| json!({ "name": n, "class": c, "features": f })).collect();
        return to_json(&v);
    }
    Ok(rows.iter().map(|(n, c, f)| format!("{n}\t{c}\t{f}\n")).collect())
}

fn write_corpus(dir: &Path) -> Out {
    fs::create_dir_all(dir).map_err(|e| domain(format!("cannot create {}: {e}", dir.display())))?;
    let games = corpus::games();
    for g in &games {
        write(&dir.join(g.file), g.text)?;
    }
    Ok(format!("wrote {} games\n", games.len()))
}

fn serve(host: &str, port: u16) -> Out {
    let addr: std::net::SocketAddr = format!("{host}:{port}")
        .parse()
        .map_err(|e| domain(format!("bad address {host}:{port}: {e}")))?;
    let rt = tokio::runtime::Runtime::new().map_err(|e| Failure::Internal(e.to_string()))?;
    eprintln!("serving on http://{addr}");
    rt.block_on(ludeme_service::serve(addr, ludeme_service::ServiceConfig::default()))
        .map_err(|e| domain(format!("cannot serve on {addr}: {e}")))?;
    Ok(String::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ludeme::grammar::CATALOG_VERSION;
    use ludeme::metrics::METRICS_VERSION;

    #[test]
    fn versions_match_the_library() {
        assert!(VERSION.contains(&format!("catalog {CATALOG_VERSION}")));
        assert!(VERSION.contains(&format!("metrics {METRICS_VERSION}")));
    }

    #[test]
    fn line_and_column() {
        assert_eq!(line_col("ab\ncd", 4), (2, 2));
        assert_eq!(line_col("é(", 2), (1, 2));
    }
}
