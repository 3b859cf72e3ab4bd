//! Exhaustive deduplicated state-space exploration over `Engine::successors`,
//! with canonical-key dedup, error-rule evaluation at macro-step boundaries,
//! BFS/DFS/parallel frontier strategies, and terminal-SCC livelock
//! diagnostics.

mod scc;

pub use scc::{terminal_sccs, SccSummary};

use crate::engine::{Engine, Transition};
use crate::properties::ErrorRule;
use crate::state::{canonical_key, Configuration, ErrorMarker};
use rayon::prelude::*;
use std::collections::HashMap;
use std::time::{Duration, Instant};

#[derive(Debug, Clone)]
pub struct ExploreLimits {
    pub max_states: usize,
    pub max_depth: usize,
    pub time_budget: Duration,
}

impl Default for ExploreLimits {
    fn default() -> Self {
        ExploreLimits {
            max_states: 5_000_000,
            max_depth: usize::MAX,
            time_budget: Duration::from_secs(24 * 60 * 60),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchOrder {
    Bfs,
    Dfs,
}

#[derive(Debug, Clone)]
pub struct ExploreOptions {
    pub order: SearchOrder,
    pub workers: usize,
    /// Keep full configurations (needed for heap inspections in tests and
    /// reports; also enables key-collision checking).
    pub keep_configurations: bool,
    /// Compare full configurations whenever a canonical key is re-seen, to
    /// witness injectivity of the key on the reachable set.
    pub check_collisions: bool,
}

impl Default for ExploreOptions {
    fn default() -> Self {
        ExploreOptions {
            order: SearchOrder::Bfs,
            workers: 1,
            keep_configurations: false,
            check_collisions: false,
        }
    }
}

pub type StateIdx = u32;

#[derive(Debug, Clone)]
pub struct StateRecord {
    pub key: Box<[u8]>,
    pub depth: u32,
    /// Discovery parent, for reconstructing witness paths.
    pub parent: Option<(StateIdx, u32)>,
    /// Runtime error carried by the configuration itself, or an error-rule
    /// match recorded at expansion time.
    pub error: Option<ErrorMarker>,
    /// No successors (error states are final by construction).
    pub is_final: bool,
}

#[derive(Debug, Clone)]
pub struct TransitionRecord {
    pub from: StateIdx,
    pub to: StateIdx,
    pub transition: Transition,
}

#[derive(Debug, Clone, Default)]
pub struct Stats {
    pub configurations: usize,
    pub transitions: usize,
    pub finals: usize,
    pub errors: Vec<(StateIdx, ErrorMarker)>,
    pub max_frontier: usize,
    pub wall_time: Duration,
}

#[derive(Debug)]
pub struct StateSpace {
    pub states: Vec<StateRecord>,
    pub transitions: Vec<TransitionRecord>,
    pub truncated: bool,
    pub stats: Stats,
    /// Present when `keep_configurations` was on; indexed like `states`.
    pub configurations: Option<Vec<Configuration>>,
}

impl StateSpace {
    pub fn sorted_keys(&self) -> Vec<&[u8]> {
        let mut keys: Vec<&[u8]> = self.states.iter().map(|s| &*s.key).collect();
        keys.sort_unstable();
        keys
    }

    /// Transition-label path from the initial state to `state`.
    pub fn witness_path(&self, state: StateIdx) -> Vec<String> {
        let mut labels = Vec::new();
        let mut at = state;
        while let Some((parent, t)) = self.states[at as usize].parent {
            labels.push(self.transitions[t as usize].transition.to_string());
            at = parent;
        }
        labels.reverse();
        labels
    }

    /// Verdict for a rule: does any reachable state carry a matching marker?
    pub fn rule_matched(&self, rule: &ErrorRule) -> bool {
        self.stats.errors.iter().any(|(_, m)| rule.matches_marker(m))
    }

    pub fn final_states(&self) -> impl Iterator<Item = StateIdx> + '_ {
        self.states
            .iter()
            .enumerate()
            .filter(|(_, s)| s.is_final)
            .map(|(i, _)| i as StateIdx)
    }
}

struct Store {
    index: HashMap<Box<[u8]>, StateIdx>,
    states: Vec<StateRecord>,
    configurations: Vec<Configuration>,
    keep_configurations: bool,
    check_collisions: bool,
}

impl Store {
    /// Returns the state index and whether it was newly inserted.
    fn intern(
        &mut self,
        key: Box<[u8]>,
        cfg: &Configuration,
        depth: u32,
        parent: Option<(StateIdx, u32)>,
    ) -> (StateIdx, bool) {
        if let Some(&idx) = self.index.get(&key) {
            if self.check_collisions && self.keep_configurations {
                assert!(
                    self.configurations[idx as usize] == *cfg,
                    "canonical key collision between distinct configurations"
                );
            }
            return (idx, false);
        }
        let idx = self.states.len() as StateIdx;
        self.index.insert(key.clone(), idx);
        self.states.push(StateRecord {
            key,
            depth,
            parent,
            error: cfg.error.clone(),
            is_final: false,
        });
        if self.keep_configurations {
            self.configurations.push(cfg.clone());
        }
        (idx, true)
    }
}

/// Result of expanding one state (computed in parallel, merged sequentially).
struct Expansion {
    state: StateIdx,
    rule_error: Option<ErrorMarker>,
    successors: Vec<(Transition, Configuration, Box<[u8]>)>,
}

fn expand(engine: &Engine, rules: &[ErrorRule], state: StateIdx, cfg: &Configuration) -> Expansion {
    if cfg.error.is_some() {
        return Expansion { state, rule_error: None, successors: Vec::new() };
    }
    let successors: Vec<(Transition, Configuration, Box<[u8]>)> = engine
        .successors(cfg)
        .into_iter()
        .map(|(t, c)| {
            let key = canonical_key(&c);
            (t, c, key)
        })
        .collect();
    // Error rules are evaluated between synchronization points, before the
    // state's successors are committed; a match seals the state.
    let succ_refs: Vec<&Transition> = successors.iter().map(|(t, _, _)| t).collect();
    let mut rule_error = None;
    for rule in rules {
        if let Some(marker) = rule.evaluate(engine, cfg, &succ_refs) {
            rule_error = Some(marker);
            break;
        }
    }
    if rule_error.is_none() && successors.is_empty() {
        // Terminal: a non-idle handler means the execution is stuck.
        if rules.iter().any(|r| matches!(r, ErrorRule::Stuck))
            && cfg.handlers.iter().any(|h| !h.is_idle())
        {
            let blocked: Vec<String> = cfg
                .handlers
                .iter()
                .filter(|h| !h.is_idle())
                .map(|h| h.id.to_string())
                .collect();
            rule_error = Some(ErrorMarker::Stuck {
                detail: format!("terminal configuration with busy handlers [{}]", blocked.join(", ")),
            });
        }
    }
    Expansion { state, rule_error, successors }
}

/// Exhaustive exploration from the engine's initial configuration. The
/// initial local fixpoint counts as configuration 1; error rules are
/// evaluated on every configuration before it is expanded, and matching
/// states are sealed (zero outgoing transitions).
pub fn explore(
    engine: &Engine,
    rules: &[ErrorRule],
    limits: &ExploreLimits,
    options: &ExploreOptions,
) -> StateSpace {
    let start = Instant::now();
    let mut store = Store {
        index: HashMap::new(),
        states: Vec::new(),
        configurations: Vec::new(),
        keep_configurations: options.keep_configurations || options.check_collisions,
        check_collisions: options.check_collisions,
    };
    let mut transitions: Vec<TransitionRecord> = Vec::new();
    let mut truncated = false;
    let mut max_frontier = 0usize;

    let initial = engine.local_macro_step(&engine.initial());
    let initial_key = canonical_key(&initial);
    let (root, _) = store.intern(initial_key, &initial, 0, None);

    // Frontier of states to expand; holds configurations so expansion never
    // needs the (possibly discarded) store copies.
    let mut frontier: Vec<(StateIdx, Configuration)> = vec![(root, initial)];

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.workers.max(1))
        .build()
        .expect("worker pool");

    while !frontier.is_empty() {
        if start.elapsed() > limits.time_budget {
            truncated = true;
            break;
        }
        max_frontier = max_frontier.max(frontier.len());

        // Pick the batch to expand this round.
        let batch: Vec<(StateIdx, Configuration)> = match options.order {
            SearchOrder::Bfs => std::mem::take(&mut frontier),
            SearchOrder::Dfs => vec![frontier.pop().unwrap()],
        };

        let expansions: Vec<Expansion> = if options.workers > 1 && batch.len() > 1 {
            pool.install(|| {
                batch
                    .par_iter()
                    .map(|(idx, cfg)| expand(engine, rules, *idx, cfg))
                    .collect()
            })
        } else {
            batch
                .iter()
                .map(|(idx, cfg)| expand(engine, rules, *idx, cfg))
                .collect()
        };

        for expansion in expansions {
            let state = expansion.state;
            if let Some(marker) = expansion.rule_error {
                store.states[state as usize].error = Some(marker);
                store.states[state as usize].is_final = true;
                continue;
            }
            if store.states[state as usize].error.is_some() {
                // runtime error carried by the configuration itself
                store.states[state as usize].is_final = true;
                continue;
            }
            if expansion.successors.is_empty() {
                store.states[state as usize].is_final = true;
                continue;
            }
            if store.states[state as usize].depth as usize >= limits.max_depth {
                truncated = true;
                continue;
            }
            let depth = store.states[state as usize].depth + 1;
            for (t, succ, key) in expansion.successors {
                let t_idx = transitions.len() as u32;
                let (to, new) = store.intern(key, &succ, depth, Some((state, t_idx)));
                transitions.push(TransitionRecord { from: state, to, transition: t });
                if new {
                    if store.states.len() > limits.max_states {
                        truncated = true;
                    } else {
                        frontier.push((to, succ));
                    }
                }
            }
            if truncated {
                break;
            }
        }
        if truncated {
            break;
        }
    }

    let errors: Vec<(StateIdx, ErrorMarker)> = store
        .states
        .iter()
        .enumerate()
        .filter_map(|(i, s)| s.error.clone().map(|e| (i as StateIdx, e)))
        .collect();
    let finals = store.states.iter().filter(|s| s.is_final).count();
    let stats = Stats {
        configurations: store.states.len(),
        transitions: transitions.len(),
        finals,
        errors,
        max_frontier,
        wall_time: start.elapsed(),
    };
    StateSpace {
        states: store.states,
        transitions,
        truncated,
        stats,
        configurations: if store.keep_configurations {
            Some(store.configurations)
        } else {
            None
        },
    }
}

/// Per-metric deltas plus per-rule verdict pairs between two explorations of
/// the same program under different models.
#[derive(Debug, Clone, serde::Serialize)]
pub struct DiffRecord {
    pub configurations: (usize, usize),
    pub transitions: (usize, usize),
    pub finals: (usize, usize),
    /// rule name -> (matched in a, matched in b); None = unknown (truncated).
    pub verdicts: Vec<(String, Option<bool>, Option<bool>)>,
}

pub fn stats_diff(a: &StateSpace, b: &StateSpace, rules: &[ErrorRule]) -> DiffRecord {
    let verdict = |space: &StateSpace, rule: &ErrorRule| -> Option<bool> {
        if space.truncated {
            None
        } else {
            Some(space.rule_matched(rule))
        }
    };
    DiffRecord {
        configurations: (a.stats.configurations, b.stats.configurations),
        transitions: (a.stats.transitions, b.stats.transitions),
        finals: (a.stats.finals, b.stats.finals),
        verdicts: rules
            .iter()
            .map(|r| (r.name().to_string(), verdict(a, r), verdict(b, r)))
            .collect(),
    }
}
