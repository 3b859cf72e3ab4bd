//! Error rules and trace monitors: generic deadlock detection over a
//! wait-for graph, program-specific mutual-exclusion rules, the
//! order-guarantee monitor (trace mode), and cross-model comparison.

mod monitor;
mod rules;
mod trace;

pub use monitor::{OrderMonitor, OrderViolation};
pub use rules::{parse_rule_file, parse_rule_specs, ErrorRule};
pub use trace::{trace_check, TraceCheckOutcome};

use crate::engine::Engine;
use crate::explorer::{explore, stats_diff, DiffRecord, ExploreLimits, ExploreOptions, StateSpace};
use crate::frontend::ir::CompiledProgram;
use crate::models;
use std::sync::Arc;

/// One model's exploration outcome within a comparison.
pub struct ModelRun {
    pub model: String,
    pub space: StateSpace,
    /// rule name -> verdict; None when the exploration was truncated.
    pub verdicts: Vec<(String, Option<bool>)>,
}

pub struct ComparisonReport {
    pub runs: Vec<ModelRun>,
    /// Rules whose verdict differs between at least two models.
    pub discrepancies: Vec<String>,
    /// Pairwise stats diffs, keyed by (model a, model b).
    pub diffs: Vec<(String, String, DiffRecord)>,
}

impl ComparisonReport {
    pub fn consistent(&self) -> bool {
        self.discrepancies.is_empty()
    }
}

/// Explores the program under every listed model and compares per-rule
/// verdicts; a discrepancy is a rule whose verdict differs across models.
/// Truncated explorations yield unknown verdicts, which never count as
/// discrepancies.
pub fn compare_semantics(
    program: &Arc<CompiledProgram>,
    model_ids: &[String],
    rules: &[ErrorRule],
    limits: &ExploreLimits,
    options: &ExploreOptions,
) -> Result<ComparisonReport, String> {
    assert!(model_ids.len() >= 2, "comparison needs at least two models");
    let mut runs = Vec::new();
    for id in model_ids {
        let model = models::by_id(id).ok_or_else(|| format!("unknown model `{id}`"))?;
        let engine = Engine::new(Arc::clone(program), model.as_ref());
        let space = explore(&engine, rules, limits, options);
        let verdicts = rules
            .iter()
            .map(|r| {
                let v = if space.truncated { None } else { Some(space.rule_matched(r)) };
                (r.name().to_string(), v)
            })
            .collect();
        runs.push(ModelRun { model: id.clone(), space, verdicts });
    }
    let mut discrepancies = Vec::new();
    for (ri, rule) in rules.iter().enumerate() {
        let known: Vec<bool> = runs
            .iter()
            .filter_map(|r| r.verdicts[ri].1)
            .collect();
        if known.iter().any(|&v| v != known[0]) {
            discrepancies.push(rule.name().to_string());
        }
    }
    let mut diffs = Vec::new();
    for i in 0..runs.len() {
        for j in (i + 1)..runs.len() {
            diffs.push((
                runs[i].model.clone(),
                runs[j].model.clone(),
                stats_diff(&runs[i].space, &runs[j].space, rules),
            ));
        }
    }
    Ok(ComparisonReport { runs, discrepancies, diffs })
}
