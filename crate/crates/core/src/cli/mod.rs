//! The `niaas` command line.
//!
//! Exit codes: 0 clean, 1 semantic or expectation failure, 2 input error.

pub mod scenario;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::actors::World;
use crate::embed::{embed_request, shortest_valid_path, Constraints, PathRequest, DEFAULT_ATTEMPT_LIMIT};
use crate::graphstore::{merge, parse_bgp, parse_document, query_bgp, resolve_name, serialize_document, Iri, Model};
use crate::models::{build_delegation, build_manifest, delegation_view, parse_request, parse_substrate};
use crate::pathquery::{eval_path, parse_path};
use crate::rules::{self, parse_ruleset, Rule};
use crate::vocab::{self, ns::terms};

use scenario::{parse_script, Command};

#[derive(Debug, Parser)]
#[command(name = "niaas", version, about = "Semantic network resource descriptions: validation, queries, pathfinding and embedding")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Check documents against the schema and the request rules.
    Validate {
        files: Vec<PathBuf>,
        #[arg(long)]
        schema: Vec<PathBuf>,
        #[arg(long)]
        rules: Vec<PathBuf>,
    },
    /// Print the entailment closure of the merged documents.
    Entail {
        files: Vec<PathBuf>,
        #[arg(long)]
        schema: Vec<PathBuf>,
    },
    /// Run a basic graph pattern or a path expression.
    Query {
        files: Vec<PathBuf>,
        #[arg(long)]
        schema: Vec<PathBuf>,
        #[arg(long, conflicts_with = "path")]
        pattern: Option<String>,
        #[arg(long, requires = "start")]
        path: Option<String>,
        #[arg(long)]
        start: Option<String>,
    },
    /// Find the shortest valid path between two elements.
    Path {
        files: Vec<PathBuf>,
        #[arg(long)]
        schema: Vec<PathBuf>,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[arg(long)]
        layer: Option<String>,
        #[arg(long, default_value_t = 0)]
        bandwidth: i64,
        #[arg(long)]
        label: Option<i64>,
        #[arg(long, default_value_t = DEFAULT_ATTEMPT_LIMIT)]
        limit: usize,
    },
    /// Print the delegation summary of a substrate.
    Delegate {
        file: PathBuf,
        #[arg(long)]
        schema: Vec<PathBuf>,
    },
    /// Embed one request onto one or more substrates and print the manifest.
    Embed {
        #[arg(long, required = true)]
        substrate: Vec<PathBuf>,
        #[arg(long)]
        request: PathBuf,
        #[arg(long, default_value = "slice")]
        slice: String,
        #[arg(long)]
        schema: Vec<PathBuf>,
        #[arg(long)]
        rules: Vec<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_ATTEMPT_LIMIT)]
        limit: usize,
    },
    /// Execute a scenario script.
    Run { script: PathBuf },
}

/// A failure with its exit code.
#[derive(Debug)]
enum Fail {
    Input(String),
    Semantic(String),
}

impl Fail {
    fn code(&self) -> i32 {
        match self {
            Fail::Input(_) => 2,
            Fail::Semantic(_) => 1,
        }
    }
}

type CliResult = Result<(), Fail>;

fn input(e: impl std::fmt::Display) -> Fail {
    Fail::Input(e.to_string())
}

fn read(path: &Path) -> Result<String, Fail> {
    std::fs::read_to_string(path).map_err(|e| Fail::Input(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Model, Fail> {
    parse_document(&read(path)?).map_err(|e| Fail::Input(format!("{}: {e}", path.display())))
}

fn load_all(paths: &[PathBuf]) -> Result<Vec<Model>, Fail> {
    paths.iter().map(|p| load(p)).collect()
}

fn closure(files: &[PathBuf], schema: &[PathBuf]) -> Result<Model, Fail> {
    let docs = load_all(files)?;
    let ext = load_all(schema)?;
    vocab::closure_with_schema(&merge(&docs), &ext).map_err(input)
}

fn load_rules(paths: &[PathBuf]) -> Result<Vec<Rule>, Fail> {
    let prefixes = vocab::prefixed_model();
    let mut out = Vec::new();
    for p in paths {
        out.extend(parse_ruleset(&read(p)?, &prefixes).map_err(|e| Fail::Input(format!("{}: {e}", p.display())))?);
    }
    Ok(out)
}

fn name(m: &Model, tok: &str) -> Result<Iri, Fail> {
    resolve_name(tok, m).map_err(input)
}

fn mentions(m: &Model, iri: &Iri) -> bool {
    !m.matching(Some(iri), None, None).is_empty()
        || !m.matching(None, None, Some(&crate::graphstore::Term::Iri(iri.clone()))).is_empty()
}

fn validate(out: &mut dyn Write, files: &[PathBuf], schema: &[PathBuf], rule_files: &[PathBuf]) -> CliResult {
    let m = closure(files, schema)?;
    let extra = load_rules(rule_files)?;
    let issues = vocab::validate_conformance(&m);
    let violations = rules::validate_request(&m, &extra).map_err(|e| Fail::Semantic(e.to_string()))?;
    for i in &issues {
        let _ = writeln!(out, "ISSUE {i}");
    }
    for v in &violations {
        let _ = writeln!(out, "{v}");
    }
    if issues.is_empty() && violations.is_empty() {
        Ok(())
    } else {
        Err(Fail::Semantic(format!("{} issue(s), {} violation(s)", issues.len(), violations.len())))
    }
}

#[allow(clippy::too_many_arguments)]
fn path(
    out: &mut dyn Write,
    files: &[PathBuf],
    schema: &[PathBuf],
    from: &str,
    to: &str,
    layer: Option<&str>,
    bandwidth: i64,
    label: Option<i64>,
    limit: usize,
) -> CliResult {
    let m = closure(files, schema)?;
    let source = name(&m, from)?;
    let dest = name(&m, to)?;
    for e in [&source, &dest] {
        if !mentions(&m, e) {
            return Err(Fail::Input(format!("unknown element {e}")));
        }
    }
    let layer = match layer {
        Some(l) => name(&m, l)?,
        None => terms().ethernet.clone(),
    };
    let req = PathRequest { source, dest, constraints: Constraints { layer: layer.clone(), bandwidth, required_label: label } };
    let Some(p) = shortest_valid_path(&m, &req, limit) else {
        let _ = writeln!(out, "NO PATH");
        return Err(Fail::Semantic("no path".into()));
    };
    let _ = write!(out, "{}", p.listing(&layer));
    Ok(())
}

fn query(
    out: &mut dyn Write,
    files: &[PathBuf],
    schema: &[PathBuf],
    pattern: Option<&str>,
    expr: Option<&str>,
    start: Option<&str>,
) -> CliResult {
    let m = closure(files, schema)?;
    match (pattern, expr, start) {
        (Some(p), None, _) => {
            let bgp = parse_bgp(p, &m).map_err(input)?;
            for b in query_bgp(&m, &bgp).map_err(input)? {
                let line: Vec<String> = b.iter().map(|(k, v)| format!("?{k}={v}")).collect();
                let _ = writeln!(out, "{}", line.join(" "));
            }
            Ok(())
        }
        (None, Some(e), Some(s)) => {
            let expr = parse_path(e, &m).map_err(input)?;
            let start = name(&m, s)?;
            for n in eval_path(&m, &start, &expr) {
                let _ = writeln!(out, "{n}");
            }
            Ok(())
        }
        _ => Err(Fail::Input("give either --pattern, or --path with --start".into())),
    }
}

fn delegate(out: &mut dyn Write, file: &Path, schema: &[PathBuf]) -> CliResult {
    let m = closure(&[file.to_path_buf()], schema)?;
    let g = parse_substrate(&m).map_err(input)?;
    let _ = write!(out, "{}", serialize_document(&build_delegation(&g)));
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn embed(
    out: &mut dyn Write,
    substrates: &[PathBuf],
    request: &Path,
    slice: &str,
    schema: &[PathBuf],
    rule_files: &[PathBuf],
    limit: usize,
) -> CliResult {
    let ext = load_all(schema)?;
    let mut detailed = BTreeMap::new();
    let mut delegations = Vec::new();
    for s in substrates {
        let m = vocab::closure_with_schema(&load(s)?, &ext).map_err(input)?;
        let issues = vocab::validate_conformance(&m);
        if let Some(i) = issues.first() {
            return Err(Fail::Input(format!("{}: {i}", s.display())));
        }
        let g = parse_substrate(&m).map_err(|e| Fail::Input(format!("{}: {e}", s.display())))?;
        delegations.push(build_delegation(&g));
        detailed.insert(g.domain, m);
    }
    let view = delegation_view(&delegations).map_err(input)?;
    let doc = load(request)?;
    let closed = vocab::closure_with_schema(&doc, &ext).map_err(input)?;
    let violations = rules::validate_request(&closed, &load_rules(rule_files)?).map_err(|e| Fail::Semantic(e.to_string()))?;
    if !violations.is_empty() {
        for v in &violations {
            let _ = writeln!(out, "{v}");
        }
        return Err(Fail::Semantic("request violates rules".into()));
    }
    let mut req = parse_request(&closed).map_err(input)?;
    req.source = doc;
    let plan = embed_request(&req, &view, &detailed, limit).map_err(|e| Fail::Semantic(e.to_string()))?;
    let manifest = build_manifest(&req, &plan, slice).map_err(input)?;
    let _ = write!(out, "{}", serialize_document(&manifest));
    Ok(())
}

/// Executes a scenario script, streaming the event log to `out`.
fn run_script(out: &mut dyn Write, script: &Path) -> CliResult {
    let base = script.parent().unwrap_or(Path::new("."));
    let commands = parse_script(&read(script)?, base).map_err(input)?;
    let mut w = World::new();
    let mut failures = 0;
    let mut last_violations: Vec<String> = Vec::new();
    let mut printed = 0;
    for cmd in commands {
        match cmd {
            Command::LoadSubstrate(f) => {
                w.load_substrate(&load(&f)?).map_err(|e| Fail::Input(format!("{}: {e}", f.display())))?;
            }
            Command::LoadRules(f) => w.add_rules(load_rules(&[f])?),
            Command::SubmitRequest { file, slice } => {
                let doc = load(&file)?;
                last_violations = match w.create_slice(&slice, &doc) {
                    Ok(_) => Vec::new(),
                    Err(e) => e.violations().iter().map(|v| v.message.clone()).collect(),
                };
            }
            Command::DeleteSlice(id) => {
                let _ = w.delete_slice(&id);
            }
            Command::AdvanceTime(t) => {
                if let Err(e) = w.advance_time(t) {
                    return Err(Fail::Input(e.to_string()));
                }
            }
            Command::ExpectViolation(msg) => {
                let ok = last_violations.contains(&msg);
                failures += usize::from(!ok);
                w.note("script", "expect-violation", &format!("{msg:?}"), if ok { "ok" } else { "FAILED" });
            }
            Command::ExpectState { slice, state } => {
                let actual = w.slice_state(&slice);
                let ok = actual == Some(state);
                failures += usize::from(!ok);
                let outcome = if ok { "ok".to_string() } else { format!("FAILED:{}", actual.map_or("none".into(), |s| s.to_string())) };
                w.note("script", "expect-state", &format!("{slice}={state}"), &outcome);
            }
            Command::DumpManifest { slice, file } => {
                let ok = match w.manifest(&slice) {
                    Some(m) => {
                        let text = serialize_document(m);
                        if let Some(dir) = file.parent() {
                            std::fs::create_dir_all(dir).map_err(input)?;
                        }
                        std::fs::write(&file, text).map_err(|e| Fail::Input(format!("{}: {e}", file.display())))?;
                        true
                    }
                    None => false,
                };
                failures += usize::from(!ok);
                w.note("script", "dump-manifest", &slice, if ok { "ok" } else { "FAILED" });
            }
        }
        for line in &w.log()[printed..] {
            let _ = writeln!(out, "{line}");
        }
        printed = w.log().len();
    }
    if failures == 0 {
        Ok(())
    } else {
        Err(Fail::Semantic(format!("{failures} expectation(s) failed")))
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> CliResult {
    match cli.command {
        Cmd::Validate { files, schema, rules } => validate(out, &files, &schema, &rules),
        Cmd::Entail { files, schema } => {
            let m = closure(&files, &schema)?;
            let _ = write!(out, "{}", serialize_document(&m));
            Ok(())
        }
        Cmd::Query { files, schema, pattern, path, start } => {
            query(out, &files, &schema, pattern.as_deref(), path.as_deref(), start.as_deref())
        }
        Cmd::Path { files, schema, from, to, layer, bandwidth, label, limit } => {
            path(out, &files, &schema, &from, &to, layer.as_deref(), bandwidth, label, limit)
        }
        Cmd::Delegate { file, schema } => delegate(out, &file, &schema),
        Cmd::Embed { substrate, request, slice, schema, rules, limit } => {
            embed(out, &substrate, &request, &slice, &schema, &rules, limit)
        }
        Cmd::Run { script } => run_script(out, &script),
    }
}

/// Runs the command line with explicit arguments and streams; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if code == 0 { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    match dispatch(cli, out) {
        Ok(()) => 0,
        Err(f) => {
            let (Fail::Input(msg) | Fail::Semantic(msg)) = &f;
            let _ = writeln!(err, "error: {msg}");
            f.code()
        }
    }
}
