//! Queues of Queues: a FIFO of private subqueues per handler. Block entry
//! creates subqueues on all targets without ever blocking; suppliers drain
//! subqueues wholly, one by one, in creation order.

use crate::engine::{EnterInfo, ExecutionModel, ReserveOutcome, TransitionKind};
use crate::state::{
    BlockInstance, BlockInstanceId, Configuration, HandlerId, Inbox, NodeId, PendingBlock,
    Request, ReservePhase, Subqueue,
};
use std::collections::VecDeque;

#[derive(Default)]
pub struct Qoq {
    /// Fault-injection hook for monitor liveness tests: serve the second
    /// request of the head subqueue before the first whenever possible.
    pub fault_reorder_subqueue: bool,
}

impl Qoq {
    pub fn with_reorder_fault() -> Qoq {
        Qoq { fault_reorder_subqueue: true }
    }
}

pub(crate) fn subqueues_mut(cfg: &mut Configuration, handler: HandlerId) -> &mut VecDeque<Subqueue> {
    match &mut cfg.handler_mut(handler).inbox {
        Inbox::Qoq { subqueues } => subqueues,
        Inbox::Rq { .. } => unreachable!("QoQ model with RQ inbox"),
    }
}

pub(crate) fn subqueues(cfg: &Configuration, handler: HandlerId) -> &VecDeque<Subqueue> {
    match &cfg.handler(handler).inbox {
        Inbox::Qoq { subqueues } => subqueues,
        Inbox::Rq { .. } => unreachable!("QoQ model with RQ inbox"),
    }
}

/// Appends a fresh open subqueue for `client` on every target, atomically for
/// the whole block (contention order is immaterial: creation never blocks).
pub(crate) fn create_subqueues(cfg: &mut Configuration, client: HandlerId, targets: &[HandlerId]) {
    for &t in targets {
        subqueues_mut(cfg, t).push_back(Subqueue {
            owner_client: client,
            block: None,
            open: true,
            queue: VecDeque::new(),
        });
    }
}

pub(crate) fn install_pending(
    cfg: &mut Configuration,
    client: HandlerId,
    info: &EnterInfo,
    phase: ReservePhase,
    prelock_nodes: Vec<NodeId>,
    holding_prelocks: Vec<NodeId>,
) {
    let pending = PendingBlock {
        static_block: info.block,
        targets: info.targets.clone(),
        acquired: info.acquire.clone(),
        phase,
        prelock_nodes,
        holding_prelocks,
        has_wait_condition: info.has_wait,
    };
    cfg.handler_mut(client).top_frame_mut().unwrap().pending = Some(pending);
}

/// A target is ready for heap-direct wait-condition evaluation when it is
/// idle and the client's own subqueue sits at the head of its inbox, empty:
/// the (hypothetical) condition queries would execute next, with nothing
/// ahead of them — "wholly processing the subqueues".
pub(crate) fn cond_target_ready(cfg: &Configuration, client: HandlerId, target: HandlerId) -> bool {
    let supplier = cfg.handler(target);
    if !supplier.stack.is_empty() {
        return false;
    }
    let Some(head) = subqueues(cfg, target).front() else {
        return false;
    };
    if head.owner_client != client || !head.queue.is_empty() {
        return false;
    }
    // The head must be *our* resource: either the pending reservation's
    // unstamped subqueue, or the subqueue of the instance already controlling
    // the target (nested blocks re-use outer subqueues).
    let client_handler = cfg.handler(client);
    let pending_covers = client_handler
        .top_frame()
        .and_then(|f| f.pending.as_ref())
        .is_some_and(|p| p.acquired.contains(&target));
    if pending_covers {
        head.block.is_none()
    } else if let Some(instance) = client_handler.controlling_instance(target) {
        head.block == Some(instance.id)
    } else {
        false
    }
}

pub(crate) fn activate_pending(
    cfg: &mut Configuration,
    client: HandlerId,
    pending: &PendingBlock,
    id: BlockInstanceId,
) {
    for &t in &pending.acquired {
        let sq = subqueues_mut(cfg, t)
            .iter_mut()
            .find(|s| s.owner_client == client && s.block.is_none())
            .expect("pending subqueue present");
        sq.block = Some(id);
    }
}

pub(crate) fn release_pending(cfg: &mut Configuration, client: HandlerId, pending: &PendingBlock) {
    for &t in &pending.acquired {
        let sq = subqueues_mut(cfg, t)
            .iter_mut()
            .find(|s| s.owner_client == client && s.block.is_none())
            .expect("pending subqueue present");
        debug_assert!(sq.queue.is_empty(), "condition evaluation issues no requests");
        sq.open = false; // gc removes it
    }
}

pub(crate) fn enqueue(cfg: &mut Configuration, supplier: HandlerId, request: Request) {
    let sq = subqueues_mut(cfg, supplier)
        .iter_mut()
        .find(|s| {
            s.open && s.owner_client == request.client && s.block == Some(request.block)
        })
        .expect("open subqueue for the controlling block");
    sq.queue.push_back(request);
}

pub(crate) fn enqueue_creation(cfg: &mut Configuration, supplier: HandlerId, request: Request) {
    let mut queue = VecDeque::new();
    let owner_client = request.client;
    let block = Some(request.block);
    queue.push_back(request);
    subqueues_mut(cfg, supplier).push_back(Subqueue {
        owner_client,
        block,
        open: false, // one-shot creation block
        queue,
    });
}

/// Head-subqueue discipline: serve the head's next request; a closed drained
/// head was already removed by gc; an open empty head blocks the supplier.
pub(crate) fn dequeue(
    cfg: &mut Configuration,
    supplier: HandlerId,
    fault_reorder: bool,
) -> Option<Request> {
    let queues = subqueues_mut(cfg, supplier);
    let head = queues.front_mut()?;
    debug_assert!(
        head.open || !head.queue.is_empty(),
        "drained closed subqueues are gc'd before serving"
    );
    if head.queue.is_empty() {
        return None;
    }
    if fault_reorder && head.queue.len() >= 2 {
        return head.queue.remove(1);
    }
    head.queue.pop_front()
}

pub(crate) fn release(
    cfg: &mut Configuration,
    client: HandlerId,
    instance: &BlockInstance,
) -> TransitionKind {
    for &t in &instance.acquired {
        let sq = subqueues_mut(cfg, t)
            .iter_mut()
            .find(|s| s.open && s.block == Some(instance.id))
            .expect("open subqueue of the exiting block");
        sq.open = false;
    }
    TransitionKind::BlockExit { client, block: instance.id }
}

pub(crate) fn supplier_next_actor(cfg: &Configuration, supplier: HandlerId) -> Option<HandlerId> {
    let h = cfg.handler(supplier);
    if !h.stack.is_empty() {
        return Some(supplier);
    }
    let head = subqueues(cfg, supplier).front()?;
    if !head.queue.is_empty() {
        Some(supplier)
    } else {
        // Open empty head: only its owner can issue into it or close it.
        Some(head.owner_client)
    }
}

impl ExecutionModel for Qoq {
    fn id(&self) -> &'static str {
        "qoq"
    }

    fn empty_inbox(&self) -> Inbox {
        Inbox::Qoq { subqueues: VecDeque::new() }
    }

    fn assign_node(&self, _cfg: &mut Configuration) -> NodeId {
        NodeId(0)
    }

    /// Never blocks: dedicated subqueues are prepared on all targets at once.
    fn reserve_step(
        &self,
        cfg: &mut Configuration,
        client: HandlerId,
        info: &EnterInfo,
    ) -> ReserveOutcome {
        create_subqueues(cfg, client, &info.acquire);
        install_pending(cfg, client, info, ReservePhase::Active, Vec::new(), Vec::new());
        ReserveOutcome::Progress(TransitionKind::Reserve {
            client,
            block: info.block,
            targets: info.targets.clone(),
        })
    }

    fn reserve_continue(&self, _cfg: &mut Configuration, _client: HandlerId) -> ReserveOutcome {
        unreachable!("QoQ reservations complete in one step")
    }

    fn cond_target_ready(
        &self,
        cfg: &Configuration,
        client: HandlerId,
        target: HandlerId,
    ) -> bool {
        cond_target_ready(cfg, client, target)
    }

    fn activate_pending(
        &self,
        cfg: &mut Configuration,
        client: HandlerId,
        pending: &PendingBlock,
        id: BlockInstanceId,
    ) {
        activate_pending(cfg, client, pending, id);
    }

    fn release_pending(&self, cfg: &mut Configuration, client: HandlerId, pending: &PendingBlock) {
        release_pending(cfg, client, pending);
    }

    fn enqueue(&self, cfg: &mut Configuration, supplier: HandlerId, request: Request) {
        enqueue(cfg, supplier, request);
    }

    fn enqueue_creation(&self, cfg: &mut Configuration, supplier: HandlerId, request: Request) {
        enqueue_creation(cfg, supplier, request);
    }

    fn dequeue(&self, cfg: &mut Configuration, supplier: HandlerId) -> Option<Request> {
        dequeue(cfg, supplier, self.fault_reorder_subqueue)
    }

    fn release(
        &self,
        cfg: &mut Configuration,
        client: HandlerId,
        instance: &BlockInstance,
    ) -> TransitionKind {
        release(cfg, client, instance)
    }

    fn supplier_next_actor(&self, cfg: &Configuration, supplier: HandlerId) -> Option<HandlerId> {
        supplier_next_actor(cfg, supplier)
    }
}
