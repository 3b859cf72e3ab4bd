//! The order-guarantee monitor: per supplier, the requests of one block
//! instance must execute contiguously and in program-text order. Monitor
//! state is trace-local and never part of a configuration's canonical key.

use crate::engine::{Transition, TransitionKind};
use crate::state::{BlockInstanceId, HandlerId};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct OrderMonitor {
    /// Block instance currently being served, per supplier.
    last_served: BTreeMap<HandlerId, BlockInstanceId>,
    /// Blocks whose contiguous run on a supplier has ended.
    finished: BTreeMap<HandlerId, BTreeSet<BlockInstanceId>>,
    /// Last sequence number seen per (block instance, supplier).
    last_seq: BTreeMap<(BlockInstanceId, HandlerId), u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderViolation {
    pub supplier: HandlerId,
    pub block: BlockInstanceId,
    pub detail: String,
}

impl OrderMonitor {
    /// Feeds one transition; only `dequeue_execute` is order-relevant.
    /// A violation means either an out-of-order sequence number within a
    /// block or a request of a block whose run already ended (a foreign
    /// request intervened).
    pub fn step(&mut self, transition: &Transition) -> Option<OrderViolation> {
        let TransitionKind::DequeueExecute { supplier, block, seq, .. } = transition.kind else {
            return None;
        };
        if self
            .finished
            .get(&supplier)
            .is_some_and(|set| set.contains(&block))
        {
            return Some(OrderViolation {
                supplier,
                block,
                detail: format!(
                    "request of block {block} executed on supplier {supplier} after its run ended"
                ),
            });
        }
        match self.last_served.get(&supplier) {
            Some(&current) if current == block => {}
            Some(&current) => {
                self.finished.entry(supplier).or_default().insert(current);
                self.last_served.insert(supplier, block);
            }
            None => {
                self.last_served.insert(supplier, block);
            }
        }
        let expected = self.last_seq.get(&(block, supplier)).copied().unwrap_or(0) + 1;
        if seq != expected {
            return Some(OrderViolation {
                supplier,
                block,
                detail: format!(
                    "block {block} on supplier {supplier}: expected seq {expected}, executed seq {seq}"
                ),
            });
        }
        self.last_seq.insert((block, supplier), seq);
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::ir::MethodId;

    fn dequeue(supplier: u32, block: u32, seq: u32) -> Transition {
        Transition {
            kind: TransitionKind::DequeueExecute {
                supplier: HandlerId(supplier),
                client: HandlerId(99),
                method: MethodId(0),
                block: BlockInstanceId(block),
                seq,
            },
        }
    }

    #[test]
    fn contiguous_runs_pass() {
        // stack shape: pushes 1..7 in one block, then 8 in another
        let mut monitor = OrderMonitor::default();
        for seq in 1..=7 {
            assert_eq!(monitor.step(&dequeue(1, 10, seq)), None);
        }
        assert_eq!(monitor.step(&dequeue(1, 11, 1)), None);
    }

    #[test]
    fn resumed_block_is_a_violation() {
        // b1:1, b2:1, b1:2 on one supplier: b1's run ended when b2 started
        let mut monitor = OrderMonitor::default();
        assert_eq!(monitor.step(&dequeue(1, 1, 1)), None);
        assert_eq!(monitor.step(&dequeue(1, 2, 1)), None);
        let violation = monitor.step(&dequeue(1, 1, 2)).expect("violation");
        assert!(violation.detail.contains("after its run ended"));
    }

    #[test]
    fn out_of_order_seq_is_a_violation() {
        let mut monitor = OrderMonitor::default();
        assert_eq!(monitor.step(&dequeue(1, 1, 1)), None);
        let violation = monitor.step(&dequeue(1, 1, 3)).expect("violation");
        assert!(violation.detail.contains("expected seq 2"));
    }

    #[test]
    fn independent_suppliers_do_not_interact() {
        let mut monitor = OrderMonitor::default();
        assert_eq!(monitor.step(&dequeue(1, 1, 1)), None);
        assert_eq!(monitor.step(&dequeue(2, 2, 1)), None);
        assert_eq!(monitor.step(&dequeue(1, 1, 2)), None);
        assert_eq!(monitor.step(&dequeue(2, 2, 2)), None);
    }
}
