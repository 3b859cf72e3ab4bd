//! `scoopw`: command-line front door of the semantics comparison workbench.
//!
//! Subcommands: `explore`, `compare`, `trace-check`, `compile`,
//! `list-benchmarks`. Programs are given as a file path or `bench:ID`.
//!
//! Exit codes: 0 = clean, 1 = compile/usage failure, 2 = property violation
//! or discrepancy found, 3 = exploration truncated.

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use scoopw_core::engine::Engine;
use scoopw_core::explorer::{explore, ExploreLimits, ExploreOptions, SearchOrder};
use scoopw_core::frontend;
use scoopw_core::models::{Dscoop, Qoq, Rq};
use scoopw_core::properties::{
    compare_semantics, parse_rule_file, parse_rule_specs, trace_check, ErrorRule,
};
use scoopw_core::{bench, report};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

#[derive(Parser)]
#[command(
    name = "scoopw",
    about = "Semantics comparison workbench for a mini-SCOOP concurrent language",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Explore the full state space of a program under one execution model.
    Explore(ExploreArgs),
    /// Explore under several models and compare per-rule verdicts.
    Compare(CompareArgs),
    /// Check the order guarantee over all traces up to a depth bound.
    TraceCheck(TraceCheckArgs),
    /// Parse, check, and summarise a program's control-flow graphs.
    Compile(CompileArgs),
    /// List the embedded benchmark ids.
    ListBenchmarks,
}

#[derive(Args)]
struct CommonArgs {
    /// Program file path or bench:ID.
    program: String,
    /// Rules: builtin list (e.g. "deadlock,stuck,mutex:eat") or a JSON file.
    #[arg(long, default_value = "deadlock,stuck")]
    rules: String,
    /// State-count limit before truncation.
    #[arg(long, default_value_t = 5_000_000)]
    max_states: usize,
    /// Exploration depth limit (macro steps from the initial configuration).
    #[arg(long)]
    depth: Option<usize>,
    /// Wall-clock budget in seconds.
    #[arg(long, default_value_t = 86_400)]
    time_budget: u64,
    /// Worker threads for frontier expansion.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Output format: text, json, or dot.
    #[arg(long, default_value = "text")]
    format: String,
    /// Frontier order: bfs or dfs.
    #[arg(long, default_value = "bfs")]
    order: String,
    /// Fault-injection hooks for monitor/protocol liveness tests:
    /// "reorder-subqueue" (QoQ) or "unordered-prelock" (D-SCOOP).
    #[arg(long, hide = true)]
    test_fault: Option<String>,
}

#[derive(Args)]
struct ExploreArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Execution model: rq, qoq, or dscoop.
    #[arg(long, default_value = "qoq")]
    model: String,
    /// DOT output size threshold (states).
    #[arg(long, default_value_t = 2000)]
    dot_max_states: usize,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated list of models (at least two).
    #[arg(long, default_value = "rq,qoq,dscoop")]
    models: String,
}

#[derive(Args)]
struct TraceCheckArgs {
    /// Program file path or bench:ID.
    program: String,
    /// Execution model: rq, qoq, or dscoop.
    #[arg(long, default_value = "qoq")]
    model: String,
    /// Trace length bound (transitions).
    #[arg(long, default_value_t = 500)]
    depth: usize,
    /// Output format: text or json.
    #[arg(long, default_value = "text")]
    format: String,
    /// Fault-injection hooks (see explore).
    #[arg(long, hide = true)]
    test_fault: Option<String>,
}

#[derive(Args)]
struct CompileArgs {
    /// Program file path or bench:ID.
    program: String,
    /// Output format: text or json.
    #[arg(long, default_value = "text")]
    format: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::ListBenchmarks => {
            for id in bench::BENCHMARK_IDS {
                println!("{id}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Compile(args) => cmd_compile(args),
        Command::Explore(args) => cmd_explore(args),
        Command::Compare(args) => cmd_compare(args),
        Command::TraceCheck(args) => cmd_trace_check(args),
    }
}

fn load_source(spec: &str) -> Result<(String, String)> {
    if let Some(id) = spec.strip_prefix("bench:") {
        let source = bench::source(id)
            .ok_or_else(|| anyhow!("unknown benchmark `{id}` (see list-benchmarks)"))?;
        Ok((spec.to_string(), source))
    } else {
        let source = std::fs::read_to_string(spec)
            .with_context(|| format!("cannot read program file `{spec}`"))?;
        Ok((spec.to_string(), source))
    }
}

/// Compiles or prints diagnostics and exits 1.
fn compile_or_fail(source: &str) -> Result<Arc<scoopw_core::frontend::ir::CompiledProgram>, ExitCode> {
    match frontend::compile_source(source) {
        Ok(program) => Ok(program),
        Err(diags) => {
            for d in &diags {
                eprintln!("{d}");
            }
            Err(ExitCode::from(1))
        }
    }
}

fn parse_rules(spec: &str) -> Result<Vec<ErrorRule>> {
    if spec.ends_with(".json") || std::path::Path::new(spec).is_file() {
        let text = std::fs::read_to_string(spec)
            .with_context(|| format!("cannot read rule file `{spec}`"))?;
        parse_rule_file(&text).map_err(|e| anyhow!(e))
    } else {
        parse_rule_specs(spec).map_err(|e| anyhow!(e))
    }
}

fn limits_of(common: &CommonArgs) -> ExploreLimits {
    ExploreLimits {
        max_states: common.max_states,
        max_depth: common.depth.unwrap_or(usize::MAX),
        time_budget: Duration::from_secs(common.time_budget),
    }
}

fn options_of(common: &CommonArgs) -> Result<ExploreOptions> {
    let order = match common.order.as_str() {
        "bfs" => SearchOrder::Bfs,
        "dfs" => SearchOrder::Dfs,
        other => return Err(anyhow!("unknown order `{other}` (expected bfs or dfs)")),
    };
    Ok(ExploreOptions {
        order,
        workers: common.workers,
        keep_configurations: false,
        check_collisions: false,
    })
}

enum FaultyModel {
    Rq(Rq),
    Qoq(Qoq),
    Dscoop(Dscoop),
}

impl FaultyModel {
    fn as_model(&self) -> &dyn scoopw_core::engine::ExecutionModel {
        match self {
            FaultyModel::Rq(m) => m,
            FaultyModel::Qoq(m) => m,
            FaultyModel::Dscoop(m) => m,
        }
    }
}

fn build_model(id: &str, fault: Option<&str>) -> Result<FaultyModel> {
    match (id, fault) {
        ("rq", None) => Ok(FaultyModel::Rq(Rq)),
        ("qoq", None) => Ok(FaultyModel::Qoq(Qoq::default())),
        ("qoq", Some("reorder-subqueue")) => Ok(FaultyModel::Qoq(Qoq::with_reorder_fault())),
        ("dscoop", None) => Ok(FaultyModel::Dscoop(Dscoop::default())),
        ("dscoop", Some("unordered-prelock")) => {
            Ok(FaultyModel::Dscoop(Dscoop::with_unordered_prelock_fault()))
        }
        (_, Some(fault)) => Err(anyhow!("fault `{fault}` is not available for model `{id}`")),
        _ => Err(anyhow!("unknown model `{id}` (expected rq, qoq, or dscoop)")),
    }
}

fn cmd_compile(args: CompileArgs) -> Result<ExitCode> {
    let (_, source) = load_source(&args.program)?;
    let program = match frontend::parse(&source) {
        Ok(p) => p,
        Err(d) => {
            eprintln!("{d}");
            return Ok(ExitCode::from(1));
        }
    };
    let diags = frontend::check(&program);
    for d in &diags {
        eprintln!("{d}");
    }
    if diags.iter().any(|d| d.is_error()) {
        return Ok(ExitCode::from(1));
    }
    let compiled = frontend::compile(&program);
    match args.format.as_str() {
        "json" => {
            let summary: Vec<serde_json::Value> = compiled
                .methods
                .iter()
                .map(|m| {
                    serde_json::json!({
                        "class": compiled.class(m.class).name,
                        "method": m.name,
                        "states": m.cfg.state_count,
                        "edges": m.cfg.edges.len(),
                        "controlled_formals": m.controlled_formals.len(),
                        "has_wait_condition": m.wait_condition.is_some(),
                        "is_query": m.is_query(),
                    })
                })
                .collect();
            println!("{}", serde_json::to_string_pretty(&serde_json::json!({"methods": summary}))?);
        }
        _ => {
            for m in &compiled.methods {
                println!(
                    "{}.{}: {} states, {} edges{}{}",
                    compiled.class(m.class).name,
                    m.name,
                    m.cfg.state_count,
                    m.cfg.edges.len(),
                    if m.wait_condition.is_some() { ", wait condition" } else { "" },
                    if m.is_query() { ", query" } else { "" },
                );
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_explore(args: ExploreArgs) -> Result<ExitCode> {
    let (name, source) = load_source(&args.common.program)?;
    let program = match compile_or_fail(&source) {
        Ok(p) => p,
        Err(code) => return Ok(code),
    };
    let rules = parse_rules(&args.common.rules)?;
    let model = build_model(&args.model, args.common.test_fault.as_deref())?;
    let engine = Engine::new(program, model.as_model());
    let limits = limits_of(&args.common);
    let options = options_of(&args.common)?;
    let space = explore(&engine, &rules, &limits, &options);
    let out = report::explore_out(&name, &args.model, &space, &rules);
    match args.common.format.as_str() {
        "json" => println!("{}", serde_json::to_string_pretty(&out)?),
        "dot" => {
            if space.states.len() > args.dot_max_states {
                eprintln!(
                    "state space has {} states, over the DOT threshold {}",
                    space.states.len(),
                    args.dot_max_states
                );
                return Ok(ExitCode::from(3));
            }
            println!("{}", report::dot(&space));
        }
        _ => print!("{}", report::explore_text(&out)),
    }
    if space.truncated {
        return Ok(ExitCode::from(3));
    }
    if !space.stats.errors.is_empty() {
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_compare(args: CompareArgs) -> Result<ExitCode> {
    let (name, source) = load_source(&args.common.program)?;
    let program = match compile_or_fail(&source) {
        Ok(p) => p,
        Err(code) => return Ok(code),
    };
    let rules = parse_rules(&args.common.rules)?;
    let models: Vec<String> = args
        .models
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    if models.len() < 2 {
        return Err(anyhow!("compare needs at least two models"));
    }
    if args.common.test_fault.is_some() {
        return Err(anyhow!("fault hooks apply to single-model commands only"));
    }
    let limits = limits_of(&args.common);
    let options = options_of(&args.common)?;
    let comparison =
        compare_semantics(&program, &models, &rules, &limits, &options).map_err(|e| anyhow!(e))?;
    let out = report::compare_out(&name, &comparison);
    match args.common.format.as_str() {
        "json" => println!("{}", serde_json::to_string_pretty(&out)?),
        _ => print!("{}", report::compare_text(&out)),
    }
    if comparison.runs.iter().any(|r| r.space.truncated) {
        return Ok(ExitCode::from(3));
    }
    if !comparison.consistent() {
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_trace_check(args: TraceCheckArgs) -> Result<ExitCode> {
    let (name, source) = load_source(&args.program)?;
    let program = match compile_or_fail(&source) {
        Ok(p) => p,
        Err(code) => return Ok(code),
    };
    let model = build_model(&args.model, args.test_fault.as_deref())?;
    let engine = Engine::new(program, model.as_model());
    let outcome = trace_check(&engine, args.depth);
    match args.format.as_str() {
        "json" => {
            let out = serde_json::json!({
                "program": name,
                "model": args.model,
                "depth": args.depth,
                "traces": outcome.traces,
                "depth_clipped": outcome.depth_clipped,
                "violation": outcome.violation.as_ref().map(|(v, path)| serde_json::json!({
                    "supplier": v.supplier.0,
                    "block": v.block.0,
                    "detail": v.detail,
                    "trace": path,
                })),
            });
            println!("{}", serde_json::to_string_pretty(&out)?);
        }
        _ => {
            println!(
                "program: {name}\nmodel: {}\ntraces explored: {} (depth bound {}{})",
                args.model,
                outcome.traces,
                args.depth,
                if outcome.depth_clipped { ", clipped" } else { "" }
            );
            match &outcome.violation {
                None => println!("order guarantee: no violations"),
                Some((v, path)) => {
                    println!("ORDER VIOLATION: {}", v.detail);
                    println!("offending trace ({} steps):", path.len());
                    for step in path {
                        println!("  {step}");
                    }
                }
            }
        }
    }
    if outcome.violation.is_some() {
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}
