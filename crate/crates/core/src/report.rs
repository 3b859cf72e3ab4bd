//! Report rendering: schema-stable JSON, human-readable text, and DOT dumps
//! of explored transition systems.
//!
//! JSON output is byte-deterministic for a fixed run configuration, except
//! for the `wall_time_secs` field.

use crate::explorer::{SccSummary, StateSpace};
use crate::properties::{ComparisonReport, ErrorRule};
use crate::state::ErrorMarker;
use serde::Serialize;

#[derive(Serialize)]
pub struct StatsOut {
    pub configurations: usize,
    pub transitions: usize,
    pub finals: usize,
    pub errors: usize,
    pub max_frontier: usize,
    pub wall_time_secs: f64,
}

#[derive(Serialize)]
pub struct VerdictOut {
    pub rule: String,
    /// "yes", "no", or "unknown" (truncated exploration).
    pub verdict: String,
}

#[derive(Serialize)]
pub struct WitnessOut {
    pub kind: String,
    pub marker: ErrorMarker,
    /// Transition labels from the initial configuration.
    pub path: Vec<String>,
}

#[derive(Serialize)]
pub struct ExploreOut {
    pub program: String,
    pub model: String,
    pub truncated: bool,
    pub stats: StatsOut,
    pub verdicts: Vec<VerdictOut>,
    pub witnesses: Vec<WitnessOut>,
}

fn verdict_str(space: &StateSpace, rule: &ErrorRule) -> String {
    if space.truncated {
        "unknown".to_string()
    } else if space.rule_matched(rule) {
        "yes".to_string()
    } else {
        "no".to_string()
    }
}

pub fn explore_out(
    program: &str,
    model: &str,
    space: &StateSpace,
    rules: &[ErrorRule],
) -> ExploreOut {
    let witnesses = space
        .stats
        .errors
        .iter()
        .map(|(state, marker)| WitnessOut {
            kind: marker.kind_name().to_string(),
            marker: marker.clone(),
            path: space.witness_path(*state),
        })
        .collect();
    ExploreOut {
        program: program.to_string(),
        model: model.to_string(),
        truncated: space.truncated,
        stats: StatsOut {
            configurations: space.stats.configurations,
            transitions: space.stats.transitions,
            finals: space.stats.finals,
            errors: space.stats.errors.len(),
            max_frontier: space.stats.max_frontier,
            wall_time_secs: space.stats.wall_time.as_secs_f64(),
        },
        verdicts: rules
            .iter()
            .map(|r| VerdictOut { rule: r.name().to_string(), verdict: verdict_str(space, r) })
            .collect(),
        witnesses,
    }
}

pub fn explore_text(out: &ExploreOut) -> String {
    use std::fmt::Write;
    let mut s = String::new();
    let _ = writeln!(s, "program: {}", out.program);
    let _ = writeln!(s, "model: {}", out.model);
    let _ = writeln!(
        s,
        "configurations: {}  transitions: {}  finals: {}{}",
        out.stats.configurations,
        out.stats.transitions,
        out.stats.finals,
        if out.truncated { "  (TRUNCATED)" } else { "" }
    );
    for v in &out.verdicts {
        let _ = writeln!(s, "rule {}: {}", v.rule, v.verdict);
    }
    for w in &out.witnesses {
        let _ = writeln!(s, "error {}: {:?}", w.kind, w.marker);
        let _ = writeln!(s, "  witness path ({} steps):", w.path.len());
        for step in &w.path {
            let _ = writeln!(s, "    {step}");
        }
    }
    s
}

#[derive(Serialize)]
pub struct ModelVerdictsOut {
    pub model: String,
    pub truncated: bool,
    pub configurations: usize,
    pub transitions: usize,
    pub finals: usize,
    pub verdicts: Vec<VerdictOut>,
}

#[derive(Serialize)]
pub struct CompareOut {
    pub program: String,
    pub models: Vec<ModelVerdictsOut>,
    pub discrepancies: Vec<String>,
}

pub fn compare_out(program: &str, report: &ComparisonReport) -> CompareOut {
    CompareOut {
        program: program.to_string(),
        models: report
            .runs
            .iter()
            .map(|run| ModelVerdictsOut {
                model: run.model.clone(),
                truncated: run.space.truncated,
                configurations: run.space.stats.configurations,
                transitions: run.space.stats.transitions,
                finals: run.space.stats.finals,
                verdicts: run
                    .verdicts
                    .iter()
                    .map(|(rule, v)| VerdictOut {
                        rule: rule.clone(),
                        verdict: match v {
                            None => "unknown".to_string(),
                            Some(true) => "yes".to_string(),
                            Some(false) => "no".to_string(),
                        },
                    })
                    .collect(),
            })
            .collect(),
        discrepancies: report.discrepancies.clone(),
    }
}

pub fn compare_text(out: &CompareOut) -> String {
    use std::fmt::Write;
    let mut s = String::new();
    let _ = writeln!(s, "program: {}", out.program);
    for m in &out.models {
        let verdicts: Vec<String> = m
            .verdicts
            .iter()
            .map(|v| format!("{}={}", v.rule, v.verdict))
            .collect();
        let _ = writeln!(
            s,
            "model {:8} configurations={} transitions={} finals={}{}  {}",
            m.model,
            m.configurations,
            m.transitions,
            m.finals,
            if m.truncated { " (TRUNCATED)" } else { "" },
            verdicts.join(" ")
        );
    }
    if out.discrepancies.is_empty() {
        let _ = writeln!(s, "verdicts consistent across models");
    } else {
        let _ = writeln!(s, "DISCREPANCIES: {}", out.discrepancies.join(", "));
    }
    s
}

/// DOT rendering of an explored transition system; intended for spaces under
/// a size threshold.
pub fn dot(space: &StateSpace) -> String {
    use std::fmt::Write;
    let mut s = String::new();
    let _ = writeln!(s, "digraph state_space {{");
    let _ = writeln!(s, "  rankdir=LR;");
    for (i, state) in space.states.iter().enumerate() {
        let mut attrs = Vec::new();
        if state.error.is_some() {
            attrs.push("color=red".to_string());
            attrs.push("penwidth=2".to_string());
        } else if state.is_final {
            attrs.push("shape=doublecircle".to_string());
        }
        let label = match &state.error {
            Some(marker) => format!("{i}\\n{}", marker.kind_name()),
            None => i.to_string(),
        };
        attrs.push(format!("label=\"{label}\""));
        let _ = writeln!(s, "  s{i} [{}];", attrs.join(","));
    }
    for t in &space.transitions {
        let _ = writeln!(s, "  s{} -> s{} [label=\"{}\"];", t.from, t.to, t.transition.label());
    }
    let _ = writeln!(s, "}}");
    s
}

#[derive(Serialize)]
pub struct SccOut {
    pub size: usize,
    pub labels: Vec<String>,
}

pub fn scc_out(sccs: &[SccSummary]) -> Vec<SccOut> {
    sccs.iter()
        .map(|scc| SccOut {
            size: scc.states.len(),
            labels: scc.labels.iter().map(|l| l.to_string()).collect(),
        })
        .collect()
}
