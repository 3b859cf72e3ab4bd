//! Request Queues: one flat FIFO inbox per handler, protected by a lock.
//! Entering a separate block atomically acquires the locks of all targets
//! and holds them for the duration of the block.

use crate::engine::{EnterInfo, ExecutionModel, ReserveOutcome, TransitionKind};
use crate::state::{
    BlockInstance, BlockInstanceId, Configuration, HandlerId, Inbox, NodeId, PendingBlock,
    Request, ReservePhase,
};
use std::collections::VecDeque;

pub struct Rq;

fn lock_owner_mut(cfg: &mut Configuration, handler: HandlerId) -> &mut Option<HandlerId> {
    match &mut cfg.handler_mut(handler).inbox {
        Inbox::Rq { lock_owner, .. } => lock_owner,
        Inbox::Qoq { .. } => unreachable!("RQ model with QoQ inbox"),
    }
}

fn lock_owner(cfg: &Configuration, handler: HandlerId) -> Option<HandlerId> {
    match &cfg.handler(handler).inbox {
        Inbox::Rq { lock_owner, .. } => *lock_owner,
        Inbox::Qoq { .. } => unreachable!("RQ model with QoQ inbox"),
    }
}

impl ExecutionModel for Rq {
    fn id(&self) -> &'static str {
        "rq"
    }

    fn empty_inbox(&self) -> Inbox {
        Inbox::Rq { queue: VecDeque::new(), lock_owner: None }
    }

    fn assign_node(&self, _cfg: &mut Configuration) -> NodeId {
        NodeId(0)
    }

    /// All target locks must be acquired simultaneously: the transition stays
    /// disabled while any of them is held by someone else.
    fn reserve_step(
        &self,
        cfg: &mut Configuration,
        client: HandlerId,
        info: &EnterInfo,
    ) -> ReserveOutcome {
        let all_free = info.acquire.iter().all(|&t| lock_owner(cfg, t).is_none());
        if !all_free {
            return ReserveOutcome::Blocked;
        }
        for &t in &info.acquire {
            *lock_owner_mut(cfg, t) = Some(client);
        }
        let pending = PendingBlock {
            static_block: info.block,
            targets: info.targets.clone(),
            acquired: info.acquire.clone(),
            phase: ReservePhase::Active,
            prelock_nodes: Vec::new(),
            holding_prelocks: Vec::new(),
            has_wait_condition: info.has_wait,
        };
        cfg.handler_mut(client).top_frame_mut().unwrap().pending = Some(pending);
        ReserveOutcome::Progress(TransitionKind::Reserve {
            client,
            block: info.block,
            targets: info.targets.clone(),
        })
    }

    fn reserve_continue(&self, _cfg: &mut Configuration, _client: HandlerId) -> ReserveOutcome {
        unreachable!("RQ reservations acquire everything in one step")
    }

    /// The client's (hypothetical) wait-condition queries would run after
    /// everything already in the queue, so the heap may only be read once the
    /// supplier is idle with an empty queue.
    fn cond_target_ready(
        &self,
        cfg: &Configuration,
        _client: HandlerId,
        target: HandlerId,
    ) -> bool {
        let h = cfg.handler(target);
        h.stack.is_empty()
            && match &h.inbox {
                Inbox::Rq { queue, .. } => queue.is_empty(),
                Inbox::Qoq { .. } => unreachable!(),
            }
    }

    fn activate_pending(
        &self,
        _cfg: &mut Configuration,
        _client: HandlerId,
        _pending: &PendingBlock,
        _id: BlockInstanceId,
    ) {
        // Locks are keyed by owning handler; nothing to stamp.
    }

    fn release_pending(&self, cfg: &mut Configuration, client: HandlerId, pending: &PendingBlock) {
        for &t in &pending.acquired {
            let owner = lock_owner_mut(cfg, t);
            debug_assert_eq!(*owner, Some(client));
            *owner = None;
        }
    }

    fn enqueue(&self, cfg: &mut Configuration, supplier: HandlerId, request: Request) {
        match &mut cfg.handler_mut(supplier).inbox {
            Inbox::Rq { queue, lock_owner } => {
                debug_assert_eq!(
                    *lock_owner,
                    Some(request.client),
                    "append without holding the queue lock"
                );
                queue.push_back(request);
            }
            Inbox::Qoq { .. } => unreachable!(),
        }
    }

    fn enqueue_creation(&self, cfg: &mut Configuration, supplier: HandlerId, request: Request) {
        match &mut cfg.handler_mut(supplier).inbox {
            // Nobody else can know the fresh handler yet, so the transient
            // lock hold is folded into the creation transition.
            Inbox::Rq { queue, .. } => queue.push_back(request),
            Inbox::Qoq { .. } => unreachable!(),
        }
    }

    fn dequeue(&self, cfg: &mut Configuration, supplier: HandlerId) -> Option<Request> {
        match &mut cfg.handler_mut(supplier).inbox {
            Inbox::Rq { queue, .. } => queue.pop_front(),
            Inbox::Qoq { .. } => unreachable!(),
        }
    }

    fn release(
        &self,
        cfg: &mut Configuration,
        client: HandlerId,
        instance: &BlockInstance,
    ) -> TransitionKind {
        for &t in &instance.acquired {
            let owner = lock_owner_mut(cfg, t);
            debug_assert_eq!(*owner, Some(client));
            *owner = None;
        }
        TransitionKind::Release { client, block: instance.id }
    }

    fn supplier_next_actor(&self, cfg: &Configuration, supplier: HandlerId) -> Option<HandlerId> {
        let h = cfg.handler(supplier);
        if !h.stack.is_empty() {
            return Some(supplier);
        }
        match &h.inbox {
            Inbox::Rq { queue, .. } if !queue.is_empty() => Some(supplier),
            _ => None,
        }
    }
}
