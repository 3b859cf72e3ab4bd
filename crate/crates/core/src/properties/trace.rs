//! Trace mode: exhaustive DFS over transitions without state dedup, feeding
//! every `dequeue_execute` into the order monitor. Monitor state must not
//! pollute canonical keys, so the scan memoizes (configuration key, monitor
//! state) pairs instead: the traces possible from such a pair depend on
//! nothing else, so revisiting one with no more depth budget than before
//! cannot produce new monitor behaviour. That keeps the scan finite on
//! cyclic (retry) state spaces.

use super::monitor::{OrderMonitor, OrderViolation};
use crate::engine::Engine;
use crate::state::canonical_key;
use std::collections::HashMap;

#[derive(Debug)]
pub struct TraceCheckOutcome {
    pub violation: Option<(OrderViolation, Vec<String>)>,
    /// Maximal traces enumerated (shared suffixes counted once).
    pub traces: usize,
    /// Some trace hit the depth bound.
    pub depth_clipped: bool,
}

impl TraceCheckOutcome {
    pub fn ok(&self) -> bool {
        self.violation.is_none()
    }
}

/// Explores all maximal traces up to `depth` transitions and reports the
/// first order violation together with the offending transition path.
pub fn trace_check(engine: &Engine, depth: usize) -> TraceCheckOutcome {
    let initial = engine.local_macro_step(&engine.initial());
    let mut seen: HashMap<(Box<[u8]>, OrderMonitor), usize> = HashMap::new();
    let mut path: Vec<String> = Vec::new();
    let mut outcome = TraceCheckOutcome { violation: None, traces: 0, depth_clipped: false };
    dfs(engine, initial, OrderMonitor::default(), depth, &mut seen, &mut path, &mut outcome);
    outcome
}

fn dfs(
    engine: &Engine,
    cfg: crate::state::Configuration,
    monitor: OrderMonitor,
    depth_left: usize,
    seen: &mut HashMap<(Box<[u8]>, OrderMonitor), usize>,
    path: &mut Vec<String>,
    outcome: &mut TraceCheckOutcome,
) {
    if outcome.violation.is_some() {
        return;
    }
    let key = (canonical_key(&cfg), monitor.clone());
    match seen.get(&key) {
        // Already scanned with at least this much budget left.
        Some(&budget) if budget >= depth_left => return,
        _ => {
            seen.insert(key, depth_left);
        }
    }
    if depth_left == 0 {
        outcome.depth_clipped = true;
        outcome.traces += 1;
        return;
    }
    let successors = engine.successors(&cfg);
    if successors.is_empty() {
        outcome.traces += 1;
        return;
    }
    for (transition, succ) in successors {
        let mut next_monitor = monitor.clone();
        path.push(transition.to_string());
        if let Some(violation) = next_monitor.step(&transition) {
            outcome.violation = Some((violation, path.clone()));
            path.pop();
            return;
        }
        dfs(engine, succ, next_monitor, depth_left - 1, seen, path, outcome);
        path.pop();
        if outcome.violation.is_some() {
            return;
        }
    }
}
