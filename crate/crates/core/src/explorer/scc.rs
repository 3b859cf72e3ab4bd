//! Terminal strongly connected components: livelock candidates (for example
//! a wait condition retrying forever with no producer to satisfy it).

use super::{StateIdx, StateSpace};
use std::collections::BTreeSet;

#[derive(Debug, Clone)]
pub struct SccSummary {
    pub states: Vec<StateIdx>,
    /// Transition labels occurring inside the component.
    pub labels: BTreeSet<&'static str>,
}

/// Lists the strongly connected components with no outgoing edges and no
/// final state. Expects a complete (non-truncated) exploration.
pub fn terminal_sccs(space: &StateSpace) -> Vec<SccSummary> {
    assert!(!space.truncated, "terminal SCC analysis needs a complete exploration");
    let n = space.states.len();
    let mut adjacency: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (ti, t) in space.transitions.iter().enumerate() {
        adjacency[t.from as usize].push((t.to as usize, ti));
    }

    // Iterative Tarjan.
    const UNVISITED: usize = usize::MAX;
    let mut index = vec![UNVISITED; n];
    let mut lowlink = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut next_index = 0usize;
    let mut components: Vec<Vec<usize>> = Vec::new();
    let mut component_of = vec![usize::MAX; n];

    for start in 0..n {
        if index[start] != UNVISITED {
            continue;
        }
        // call stack of (node, next child position)
        let mut calls: Vec<(usize, usize)> = vec![(start, 0)];
        while let Some(&mut (v, ref mut child)) = calls.last_mut() {
            if *child == 0 {
                index[v] = next_index;
                lowlink[v] = next_index;
                next_index += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if *child < adjacency[v].len() {
                let (w, _) = adjacency[v][*child];
                *child += 1;
                if index[w] == UNVISITED {
                    calls.push((w, 0));
                } else if on_stack[w] {
                    lowlink[v] = lowlink[v].min(index[w]);
                }
            } else {
                if lowlink[v] == index[v] {
                    let mut component = Vec::new();
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        component_of[w] = components.len();
                        component.push(w);
                        if w == v {
                            break;
                        }
                    }
                    component.sort_unstable();
                    components.push(component);
                }
                calls.pop();
                if let Some(&mut (parent, _)) = calls.last_mut() {
                    lowlink[parent] = lowlink[parent].min(lowlink[v]);
                }
            }
        }
    }

    let mut out = Vec::new();
    for (ci, component) in components.iter().enumerate() {
        let mut terminal = true;
        let mut has_internal_edge = false;
        let mut labels = BTreeSet::new();
        for &v in component {
            if space.states[v].is_final {
                terminal = false;
                break;
            }
            for &(w, ti) in &adjacency[v] {
                if component_of[w] != ci {
                    terminal = false;
                    break;
                }
                has_internal_edge = true;
                labels.insert(space.transitions[ti].transition.label());
            }
            if !terminal {
                break;
            }
        }
        // A terminal singleton without a self-loop is just a final state.
        if terminal && has_internal_edge {
            out.push(SccSummary {
                states: component.iter().map(|&v| v as StateIdx).collect(),
                labels,
            });
        }
    }
    out
}
