//! Error rules: pure predicates over configurations, evaluated between
//! synchronization points. A match seals the configuration as a final error
//! state.

use crate::engine::{Engine, Transition};
use crate::state::{Configuration, ErrorMarker, HandlerId, WaitEdge};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ErrorRule {
    /// Circular waiting dependency among blocked handlers.
    Deadlock,
    /// Terminal configuration with a non-idle handler (catches whatever the
    /// cycle matcher misses).
    Stuck,
    /// Two distinct handlers both inside `method`'s separate block with
    /// overlapping separate-formal targets.
    Mutex { name: String, method: String },
}

impl ErrorRule {
    pub fn mutex(method: &str) -> ErrorRule {
        ErrorRule::Mutex {
            name: format!("mutex:{method}"),
            method: method.to_string(),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            ErrorRule::Deadlock => "deadlock",
            ErrorRule::Stuck => "stuck",
            ErrorRule::Mutex { name, .. } => name,
        }
    }

    /// Does a recorded marker correspond to this rule?
    pub fn matches_marker(&self, marker: &ErrorMarker) -> bool {
        match (self, marker) {
            (ErrorRule::Deadlock, ErrorMarker::Deadlock { .. }) => true,
            (ErrorRule::Stuck, ErrorMarker::Stuck { .. }) => true,
            (ErrorRule::Mutex { method, .. }, ErrorMarker::MutexViolation { method: m, .. }) => {
                method == m
            }
            _ => false,
        }
    }

    /// Evaluates the rule on a configuration at a macro-step boundary.
    /// `successors` are the configuration's enabled transitions (used to
    /// derive which handlers are genuinely blocked). `Stuck` is handled by
    /// the explorer at terminal states and never matches here.
    pub fn evaluate(
        &self,
        engine: &Engine,
        cfg: &Configuration,
        successors: &[&Transition],
    ) -> Option<ErrorMarker> {
        match self {
            ErrorRule::Deadlock => deadlock_rule(engine, cfg, successors),
            ErrorRule::Stuck => None,
            ErrorRule::Mutex { method, .. } => mutex_rule(cfg, method),
        }
    }
}

/// Builds the wait-for graph over blocked handlers (no enabled transition)
/// and reports a cycle as a deadlock witness. Handlers with any enabled
/// transition contribute no edges, so every cycle member is genuinely stuck.
pub fn deadlock_rule(
    engine: &Engine,
    cfg: &Configuration,
    successors: &[&Transition],
) -> Option<ErrorMarker> {
    let movers: BTreeSet<HandlerId> = successors.iter().map(|t| t.handler()).collect();
    let mut edges: BTreeMap<HandlerId, Vec<WaitEdge>> = BTreeMap::new();
    for h in &cfg.handlers {
        if h.is_idle() || movers.contains(&h.id) {
            continue;
        }
        let waits = engine.wait_edges(cfg, h.id);
        if !waits.is_empty() {
            edges.insert(h.id, waits);
        }
    }
    if edges.is_empty() {
        return None;
    }
    // Cycle detection over the wait edges (owners without their own edges
    // are dead ends).
    let mut visiting: BTreeSet<HandlerId> = BTreeSet::new();
    let mut done: BTreeSet<HandlerId> = BTreeSet::new();
    for &start in edges.keys() {
        if done.contains(&start) {
            continue;
        }
        let mut path: Vec<WaitEdge> = Vec::new();
        if let Some(cycle) = dfs_cycle(&edges, start, &mut visiting, &mut done, &mut path) {
            return Some(ErrorMarker::Deadlock { cycle });
        }
    }
    None
}

fn dfs_cycle(
    edges: &BTreeMap<HandlerId, Vec<WaitEdge>>,
    at: HandlerId,
    visiting: &mut BTreeSet<HandlerId>,
    done: &mut BTreeSet<HandlerId>,
    path: &mut Vec<WaitEdge>,
) -> Option<Vec<WaitEdge>> {
    visiting.insert(at);
    for edge in edges.get(&at).map(|v| v.as_slice()).unwrap_or(&[]) {
        if visiting.contains(&edge.owner) {
            // found a cycle: slice the path from the owner's position
            let mut cycle: Vec<WaitEdge> = Vec::new();
            let start = path
                .iter()
                .position(|e| e.waiter == edge.owner)
                .unwrap_or(path.len());
            cycle.extend(path[start..].iter().cloned());
            cycle.push(edge.clone());
            return Some(cycle);
        }
        if done.contains(&edge.owner) {
            continue;
        }
        if edges.contains_key(&edge.owner) {
            path.push(edge.clone());
            if let Some(cycle) = dfs_cycle(edges, edge.owner, visiting, done, path) {
                return Some(cycle);
            }
            path.pop();
        }
    }
    visiting.remove(&at);
    done.insert(at);
    None
}

/// Matches when two distinct handlers have active frames of `method` (between
/// its EnterBlock and ExitBlock) whose separate-formal targets overlap.
pub fn mutex_rule(cfg: &Configuration, method: &str) -> Option<ErrorMarker> {
    let program = &cfg.program;
    // (handler, separate-formal target handlers) per active frame of `method`
    let mut active: Vec<(HandlerId, BTreeSet<HandlerId>)> = Vec::new();
    for h in &cfg.handlers {
        for frame in &h.stack {
            let m = program.method(frame.method);
            if m.name != method {
                continue;
            }
            let Some(implicit) = m.implicit_block else {
                continue;
            };
            let inside = frame.blocks.iter().any(|b| b.static_block == implicit);
            if !inside {
                continue;
            }
            let targets: BTreeSet<HandlerId> = m
                .controlled_formals
                .iter()
                .filter_map(|&i| frame.locals[i].as_ref().map(|(th, _)| th))
                .collect();
            active.push((h.id, targets));
        }
    }
    for i in 0..active.len() {
        for j in (i + 1)..active.len() {
            if active[i].0 == active[j].0 {
                continue;
            }
            if let Some(&shared) = active[i].1.intersection(&active[j].1).next() {
                return Some(ErrorMarker::MutexViolation {
                    method: method.to_string(),
                    first: active[i].0.min(active[j].0),
                    second: active[i].0.max(active[j].0),
                    shared_target: shared,
                });
            }
        }
    }
    None
}

/// Parses a comma-separated rule list: builtin ids `deadlock` and `stuck`,
/// plus `mutex:METHOD`.
pub fn parse_rule_specs(spec: &str) -> Result<Vec<ErrorRule>, String> {
    let mut rules = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if part == "deadlock" {
            rules.push(ErrorRule::Deadlock);
        } else if part == "stuck" {
            rules.push(ErrorRule::Stuck);
        } else if let Some(method) = part.strip_prefix("mutex:") {
            rules.push(ErrorRule::mutex(method));
        } else {
            return Err(format!("unknown rule `{part}` (expected deadlock, stuck, or mutex:METHOD)"));
        }
    }
    Ok(rules)
}

/// Parses the JSON rule file format:
/// `{"rules":[{"name":"...","kind":"mutex","method":"eat","overlap":"shared_formal_target"}]}`
/// with builtin kinds `deadlock` and `stuck`.
pub fn parse_rule_file(text: &str) -> Result<Vec<ErrorRule>, String> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| format!("rule file is not valid JSON: {e}"))?;
    let rules = value
        .get("rules")
        .and_then(|r| r.as_array())
        .ok_or("rule file must contain a \"rules\" array")?;
    let mut out = Vec::new();
    for rule in rules {
        let kind = rule
            .get("kind")
            .and_then(|k| k.as_str())
            .ok_or("rule without a \"kind\"")?;
        match kind {
            "deadlock" => out.push(ErrorRule::Deadlock),
            "stuck" => out.push(ErrorRule::Stuck),
            "mutex" => {
                let method = rule
                    .get("method")
                    .and_then(|m| m.as_str())
                    .ok_or("mutex rule without a \"method\"")?;
                if let Some(overlap) = rule.get("overlap").and_then(|o| o.as_str()) {
                    if overlap != "shared_formal_target" {
                        return Err(format!("unsupported overlap spec `{overlap}`"));
                    }
                }
                let name = rule
                    .get("name")
                    .and_then(|n| n.as_str())
                    .map(str::to_string)
                    .unwrap_or_else(|| format!("mutex:{method}"));
                out.push(ErrorRule::Mutex { name, method: method.to_string() });
            }
            other => return Err(format!("unknown rule kind `{other}`")),
        }
    }
    Ok(out)
}

