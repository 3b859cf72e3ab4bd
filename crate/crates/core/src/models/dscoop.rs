//! D-SCOOP: the QoQ queueing semantics lifted to a multi-node topology.
//! Every separate object creation spawns a new node, and block entry over
//! remote targets runs a two-phase protocol: prelock the target nodes
//! one-at-a-time in ascending node-id order, then a LOCK fan-out that creates
//! the subqueues everywhere and immediately frees the prelocks.
//!
//! Message round-trips (PRELOCK/OK, LOCK/OK) are modelled as atomic
//! transitions: the observable contention point is prelock ownership, not
//! wire-level interleaving.

use super::qoq;
use crate::engine::{prelock_plan, EnterInfo, ExecutionModel, ReserveOutcome, TransitionKind};
use crate::state::{
    BlockInstance, BlockInstanceId, Configuration, HandlerId, Inbox, NodeId, PendingBlock,
    Request, ReservePhase,
};
use std::collections::VecDeque;

#[derive(Default)]
pub struct Dscoop {
    /// Fault-injection hook: prelock in argument order instead of ascending
    /// node-id order, which re-introduces the wait cycles that the fixed
    /// global order exists to prevent.
    pub fault_unordered_prelock: bool,
}

impl Dscoop {
    pub fn with_unordered_prelock_fault() -> Dscoop {
        Dscoop { fault_unordered_prelock: true }
    }
}

impl ExecutionModel for Dscoop {
    fn id(&self) -> &'static str {
        "dscoop"
    }

    fn empty_inbox(&self) -> Inbox {
        Inbox::Qoq { subqueues: VecDeque::new() }
    }

    /// One node per separate object: the program runs as distributed as
    /// possible.
    fn assign_node(&self, cfg: &mut Configuration) -> NodeId {
        cfg.topology.fresh_node()
    }

    fn prelock_in_argument_order(&self) -> bool {
        self.fault_unordered_prelock
    }

    fn reserve_step(
        &self,
        cfg: &mut Configuration,
        client: HandlerId,
        info: &EnterInfo,
    ) -> ReserveOutcome {
        let plan = prelock_plan(cfg, client, &info.acquire, self.fault_unordered_prelock);
        if plan.is_empty() {
            // All targets local to the client's node: prelocking skipped.
            qoq::create_subqueues(cfg, client, &info.acquire);
            qoq::install_pending(cfg, client, info, ReservePhase::Active, Vec::new(), Vec::new());
            return ReserveOutcome::Progress(TransitionKind::Reserve {
                client,
                block: info.block,
                targets: info.targets.clone(),
            });
        }
        let first = plan[0];
        if cfg.topology.prelock_owner.contains_key(&first) {
            return ReserveOutcome::Blocked;
        }
        cfg.topology.prelock_owner.insert(first, client);
        let phase = if plan.len() == 1 {
            ReservePhase::Locking
        } else {
            ReservePhase::Prelocking(1)
        };
        qoq::install_pending(cfg, client, info, phase, plan, vec![first]);
        ReserveOutcome::Progress(TransitionKind::Prelock { client, node: first })
    }

    fn reserve_continue(&self, cfg: &mut Configuration, client: HandlerId) -> ReserveOutcome {
        let pending = cfg
            .handler(client)
            .top_frame()
            .and_then(|f| f.pending.clone())
            .expect("reserve_continue with a pending reservation");
        match pending.phase {
            ReservePhase::Prelocking(i) => {
                let node = pending.prelock_nodes[i];
                if cfg.topology.prelock_owner.contains_key(&node) {
                    return ReserveOutcome::Blocked;
                }
                cfg.topology.prelock_owner.insert(node, client);
                let frame = cfg.handler_mut(client).top_frame_mut().unwrap();
                let p = frame.pending.as_mut().unwrap();
                p.holding_prelocks.push(node);
                p.phase = if i + 1 == p.prelock_nodes.len() {
                    ReservePhase::Locking
                } else {
                    ReservePhase::Prelocking(i + 1)
                };
                ReserveOutcome::Progress(TransitionKind::Prelock { client, node })
            }
            ReservePhase::Locking => {
                // LOCK fan-out: subqueues appear on every target and the
                // prelocked nodes become free for others.
                qoq::create_subqueues(cfg, client, &pending.acquired);
                for node in &pending.holding_prelocks {
                    let owner = cfg.topology.prelock_owner.remove(node);
                    debug_assert_eq!(owner, Some(client));
                }
                let frame = cfg.handler_mut(client).top_frame_mut().unwrap();
                let p = frame.pending.as_mut().unwrap();
                p.holding_prelocks.clear();
                p.phase = ReservePhase::Active;
                let block = p.static_block;
                ReserveOutcome::Progress(TransitionKind::Lock { client, block })
            }
            ReservePhase::Active => unreachable!("Active reservations evaluate, not continue"),
        }
    }

    fn cond_target_ready(
        &self,
        cfg: &Configuration,
        client: HandlerId,
        target: HandlerId,
    ) -> bool {
        qoq::cond_target_ready(cfg, client, target)
    }

    fn activate_pending(
        &self,
        cfg: &mut Configuration,
        client: HandlerId,
        pending: &PendingBlock,
        id: BlockInstanceId,
    ) {
        qoq::activate_pending(cfg, client, pending, id);
    }

    /// A false wait condition closes the subqueues and drops the reservation;
    /// the protocol restarts from the first prelock on retry (the prelocks
    /// were already released at LOCK time).
    fn release_pending(&self, cfg: &mut Configuration, client: HandlerId, pending: &PendingBlock) {
        debug_assert!(pending.holding_prelocks.is_empty());
        qoq::release_pending(cfg, client, pending);
    }

    fn enqueue(&self, cfg: &mut Configuration, supplier: HandlerId, request: Request) {
        qoq::enqueue(cfg, supplier, request);
    }

    fn enqueue_creation(&self, cfg: &mut Configuration, supplier: HandlerId, request: Request) {
        qoq::enqueue_creation(cfg, supplier, request);
    }

    fn dequeue(&self, cfg: &mut Configuration, supplier: HandlerId) -> Option<Request> {
        qoq::dequeue(cfg, supplier, false)
    }

    fn release(
        &self,
        cfg: &mut Configuration,
        client: HandlerId,
        instance: &BlockInstance,
    ) -> TransitionKind {
        qoq::release(cfg, client, instance)
    }

    fn supplier_next_actor(&self, cfg: &Configuration, supplier: HandlerId) -> Option<HandlerId> {
        qoq::supplier_next_actor(cfg, supplier)
    }
}
