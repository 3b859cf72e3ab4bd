//! Macro-step scheduler: deterministic as-long-as-possible local execution
//! per handler, then nondeterministic enumeration of synchronization steps,
//! with model-specific queueing behaviour behind the [`ExecutionModel`]
//! interface.
//!
//! One configuration of the transition system corresponds to a local
//! fixpoint: every returned successor has been closed under
//! [`Engine::local_macro_step`].

mod transition;

pub use transition::{Transition, TransitionKind};

use crate::frontend::ir::{
    Action, BlockId, CompiledProgram, Expr, MethodId, Place, StateId, TargetBase,
};
use crate::state::{
    eval_expr, eval_wait_condition, load_initial, BlockInstance, Configuration, ErrorMarker,
    EvalError, FrameKind, Handler, HandlerId, Inbox, NodeId, Object, ObjectId, PendingBlock,
    Request, RequestKind, ReservePhase, StackFrame, Value, Wait, WaitEdge,
};
use std::sync::Arc;

pub const DEFAULT_MAX_STACK_DEPTH: usize = 64;

/// Precomputed facts about the `EnterBlock` a handler is standing at.
#[derive(Debug, Clone)]
pub struct EnterInfo {
    pub block: BlockId,
    pub has_wait: bool,
    /// Distinct target handlers other than the client, declaration order.
    pub targets: Vec<HandlerId>,
    /// Targets needing new resources (not already controlled by the client).
    pub acquire: Vec<HandlerId>,
}

/// Outcome of a reservation hook.
pub enum ReserveOutcome {
    /// The transition fired; the configuration has been mutated.
    Progress(TransitionKind),
    /// No reservation transition is enabled for this handler right now.
    Blocked,
}

/// Pluggable execution-model hooks. All hooks are pure functions of the
/// configuration they receive; the engine owns cloning and local closure.
pub trait ExecutionModel: Sync {
    /// Stable identifier: "rq", "qoq", or "dscoop".
    fn id(&self) -> &'static str;

    fn empty_inbox(&self) -> Inbox;

    /// Node for a newly created separate handler (node 0 except D-SCOOP).
    fn assign_node(&self, cfg: &mut Configuration) -> NodeId;

    /// First reservation step for a handler at `EnterBlock` with no pending
    /// reservation; `info.acquire` is nonempty. On progress the hook installs
    /// `PendingBlock` on the top frame (phase `Active` once all resources are
    /// held).
    fn reserve_step(
        &self,
        cfg: &mut Configuration,
        client: HandlerId,
        info: &EnterInfo,
    ) -> ReserveOutcome;

    /// Continuation while the pending reservation is in `Prelocking`/`Locking`
    /// phase (D-SCOOP only; unreachable for RQ/QoQ).
    fn reserve_continue(&self, cfg: &mut Configuration, client: HandlerId) -> ReserveOutcome;

    /// Whether `target` is quiescent from `client`'s point of view, so the
    /// wait condition can be evaluated heap-directly: the supplier is idle
    /// and would execute the client's (hypothetical) query next.
    fn cond_target_ready(&self, cfg: &Configuration, client: HandlerId, target: HandlerId)
        -> bool;

    /// Stamp freshly activated resources with the allocated block instance id.
    fn activate_pending(
        &self,
        cfg: &mut Configuration,
        client: HandlerId,
        pending: &PendingBlock,
        id: crate::state::BlockInstanceId,
    );

    /// Release the resources of a pending reservation whose wait condition
    /// evaluated to false.
    fn release_pending(&self, cfg: &mut Configuration, client: HandlerId, pending: &PendingBlock);

    /// Append a request; the client holds the lock/subqueue by construction.
    fn enqueue(&self, cfg: &mut Configuration, supplier: HandlerId, request: Request);

    /// Enqueue a constructor request on a freshly created handler.
    fn enqueue_creation(&self, cfg: &mut Configuration, supplier: HandlerId, request: Request);

    /// Remove the next serveable request of an idle supplier, if any.
    fn dequeue(&self, cfg: &mut Configuration, supplier: HandlerId) -> Option<Request>;

    /// Release the resources of an activated block at `ExitBlock`; returns
    /// the transition kind to record ("release" under RQ, "block_exit"
    /// otherwise).
    fn release(
        &self,
        cfg: &mut Configuration,
        client: HandlerId,
        instance: &BlockInstance,
    ) -> TransitionKind;

    /// The unique handler whose action advances `supplier` towards serving
    /// its next pending request (None when nothing is pending).
    fn supplier_next_actor(&self, cfg: &Configuration, supplier: HandlerId) -> Option<HandlerId>;

    /// Fault hook (D-SCOOP): prelock in argument order instead of ascending
    /// node-id order, forfeiting the ordered-acquisition guarantee.
    fn prelock_in_argument_order(&self) -> bool {
        false
    }
}

pub struct Engine<'m> {
    pub program: Arc<CompiledProgram>,
    pub model: &'m dyn ExecutionModel,
    pub max_stack_depth: usize,
}

impl<'m> Engine<'m> {
    pub fn new(program: Arc<CompiledProgram>, model: &'m dyn ExecutionModel) -> Self {
        Engine { program, model, max_stack_depth: DEFAULT_MAX_STACK_DEPTH }
    }

    /// The initial configuration (not yet closed under local steps).
    pub fn initial(&self) -> Configuration {
        load_initial(&self.program, self.model.empty_inbox())
    }

    /// Applies purely local actions to every handler, in ascending id order,
    /// as long as possible; then garbage-collects drained subqueues. Runtime
    /// errors (void calls, overflow, depth) seal the configuration.
    pub fn local_macro_step(&self, cfg: &Configuration) -> Configuration {
        let mut cfg = cfg.clone();
        self.close_locally(&mut cfg);
        cfg
    }

    fn close_locally(&self, cfg: &mut Configuration) {
        let handler_count = cfg.handlers.len();
        for h in 0..handler_count {
            let h = HandlerId(h as u32);
            while cfg.error.is_none() && self.local_step(cfg, h) {}
            if cfg.error.is_some() {
                break;
            }
        }
        cfg.gc();
        debug_assert!(
            cfg.check_heap_ownership().is_ok(),
            "{:?}",
            cfg.check_heap_ownership()
        );
    }

    /// Test hook: local closure with an explicit handler order, used to
    /// check confluence of local steps.
    pub fn local_macro_step_in_order(
        &self,
        cfg: &Configuration,
        order: &[HandlerId],
    ) -> Configuration {
        let mut cfg = cfg.clone();
        let mut progress = true;
        while progress && cfg.error.is_none() {
            progress = false;
            for &h in order {
                while cfg.error.is_none() && self.local_step(&mut cfg, h) {
                    progress = true;
                }
            }
        }
        cfg.gc();
        cfg
    }

    /// One local action for `h`; returns false when idle, blocked, or at a
    /// synchronization point.
    fn local_step(&self, cfg: &mut Configuration, h: HandlerId) -> bool {
        let handler = cfg.handler(h);
        if handler.wait.is_some() {
            return false;
        }
        let Some(frame) = handler.top_frame() else {
            return false;
        };
        let method = self.program.method(frame.method);

        if frame.current_state == method.cfg.final_state {
            return match frame.kind {
                FrameKind::Root => false, // handler_idle is a sync step
                _ => {
                    self.pop_frame(cfg, h);
                    true
                }
            };
        }

        let out: Vec<u32> = method.cfg.out[frame.current_state.0 as usize].clone();
        if out.len() == 2 {
            // complementary guards
            for ei in out {
                let edge = method.cfg.edges[ei as usize].clone();
                let Action::Guard { expr, polarity } = &edge.action else {
                    unreachable!("branch without guards")
                };
                match eval_expr(cfg, h, expr) {
                    Ok(Value::Bool(b)) if b == *polarity => {
                        self.clear_consumed_temps(cfg, h, &edge.action);
                        cfg.handler_mut(h).top_frame_mut().unwrap().current_state = edge.to;
                        return true;
                    }
                    Ok(_) => continue,
                    Err(e) => {
                        self.seal_error(cfg, h, e);
                        return false;
                    }
                }
            }
            unreachable!("complementary guards cover both polarities");
        }
        let edge = method.cfg.sole_edge(frame.current_state).expect("linear state").clone();
        let to = edge.to;
        match &edge.action {
            Action::AssignLocal { place, expr } => {
                match eval_expr(cfg, h, expr) {
                    Ok(value) => {
                        self.write_place(cfg, h, *place, value);
                        self.clear_consumed_temps(cfg, h, &edge.action);
                        cfg.handler_mut(h).top_frame_mut().unwrap().current_state = to;
                        true
                    }
                    Err(e) => {
                        self.seal_error(cfg, h, e);
                        false
                    }
                }
            }
            Action::CreateObject { separate: false, place, class, ctor, args } => {
                let mut values = Vec::with_capacity(args.len());
                for a in args {
                    match eval_expr(cfg, h, a) {
                        Ok(v) => values.push(v),
                        Err(e) => {
                            self.seal_error(cfg, h, e);
                            return false;
                        }
                    }
                }
                self.clear_consumed_temps(cfg, h, &edge.action);
                let oid = cfg.fresh_object_id();
                let attributes = self
                    .program
                    .class(*class)
                    .attributes
                    .iter()
                    .map(|a| self.program.default_value_of(&a.ty))
                    .collect();
                cfg.handler_mut(h)
                    .heap
                    .insert(oid, Object { id: oid, class: *class, attributes });
                self.write_place(cfg, h, *place, Value::Ref(h, oid));
                cfg.handler_mut(h).top_frame_mut().unwrap().current_state = to;
                if let Some(ctor) = ctor {
                    return self.push_local_frame(cfg, h, *ctor, oid, values, None);
                }
                true
            }
            Action::CreateObject { separate: true, .. } => false, // sync
            Action::CommandCall { target, method: mid, args }
            | Action::QueryCall { target, method: mid, args, .. } => {
                // Local only when the resolved target lives on this handler.
                let resolved = crate::state::resolve_call_target(cfg, h, target);
                match resolved {
                    Err(e) => {
                        self.seal_error(cfg, h, e);
                        false
                    }
                    Ok((th, to_obj)) if th == h => {
                        let mut values = Vec::with_capacity(args.len());
                        for a in args {
                            match eval_expr(cfg, h, a) {
                                Ok(v) => values.push(v),
                                Err(e) => {
                                    self.seal_error(cfg, h, e);
                                    return false;
                                }
                            }
                        }
                        let return_place = match &edge.action {
                            Action::QueryCall { place, .. } => Some(*place),
                            _ => None,
                        };
                        self.clear_consumed_temps(cfg, h, &edge.action);
                        cfg.handler_mut(h).top_frame_mut().unwrap().current_state = to;
                        self.push_local_frame(cfg, h, *mid, to_obj, values, return_place)
                    }
                    Ok(_) => false, // remote: sync step
                }
            }
            Action::EnterBlock { wait, .. } => {
                if wait.is_some() {
                    return false; // wait conditions synchronize
                }
                match self.analyze_enter(cfg, h, &edge.action) {
                    Err(e) => {
                        self.seal_error(cfg, h, e);
                        false
                    }
                    Ok(info) if info.acquire.is_empty() => {
                        // No new resources and no wait condition: trivial block.
                        let id = cfg.fresh_block_instance_id();
                        let frame = cfg.handler_mut(h).top_frame_mut().unwrap();
                        frame.blocks.push(BlockInstance {
                            id,
                            static_block: info.block,
                            targets: info.targets,
                            acquired: Vec::new(),
                            next_seq: Default::default(),
                        });
                        frame.current_state = to;
                        true
                    }
                    Ok(_) => false, // needs reservation: sync step
                }
            }
            Action::ExitBlock { block } => {
                let frame = cfg.handler(h).top_frame().unwrap();
                let instance = frame.blocks.last().expect("ExitBlock with active block");
                debug_assert_eq!(instance.static_block, *block);
                if instance.acquired.is_empty() {
                    let frame = cfg.handler_mut(h).top_frame_mut().unwrap();
                    frame.blocks.pop();
                    frame.current_state = to;
                    true
                } else {
                    false // release is a sync step
                }
            }
            Action::Guard { .. } => unreachable!("guards are branch points"),
            Action::Return => {
                cfg.handler_mut(h).top_frame_mut().unwrap().current_state = to;
                true
            }
        }
    }

    /// All configurations reachable by exactly one synchronization step from
    /// a local fixpoint, each closed under local steps again.
    pub fn successors(&self, cfg: &Configuration) -> Vec<(Transition, Configuration)> {
        if cfg.error.is_some() {
            return Vec::new();
        }
        debug_assert_eq!(
            crate::state::canonical_key(&self.local_macro_step(cfg)),
            crate::state::canonical_key(cfg),
            "successors expects a local fixpoint"
        );
        let mut out = Vec::new();
        for idx in 0..cfg.handlers.len() {
            let h = HandlerId(idx as u32);
            self.sync_steps_of(cfg, h, &mut out);
        }
        out.into_iter()
            .map(|(kind, succ)| {
                let closed = if succ.error.is_some() { succ } else { self.local_macro_step(&succ) };
                (Transition { kind }, closed)
            })
            .collect()
    }

    fn sync_steps_of(
        &self,
        cfg: &Configuration,
        h: HandlerId,
        out: &mut Vec<(TransitionKind, Configuration)>,
    ) {
        let handler = cfg.handler(h);

        // Reply deliveries are enabled independently of what the supplier is
        // doing; enumerate one per outbox entry.
        for (i, (client, _)) in handler.reply_outbox.iter().enumerate() {
            let mut succ = cfg.clone();
            let (_, value) = succ.handler_mut(h).reply_outbox.remove(i).unwrap();
            let client = *client;
            let Some(Wait::QueryReply { place }) = succ.handler(client).wait.clone() else {
                unreachable!("reply for a client that is not waiting")
            };
            self.write_place(&mut succ, client, place, value);
            succ.handler_mut(client).wait = None;
            out.push((TransitionKind::QueryReply { supplier: h, client }, succ));
        }

        if handler.wait.is_some() {
            return;
        }

        let Some(frame) = handler.top_frame() else {
            // Idle: serving.
            let mut succ = cfg.clone();
            if let Some(request) = self.model.dequeue(&mut succ, h) {
                let kind = TransitionKind::DequeueExecute {
                    supplier: h,
                    client: request.client,
                    method: request.method,
                    block: request.block,
                    seq: request.seq,
                };
                self.push_request_frame(&mut succ, h, request);
                out.push((kind, succ));
            }
            return;
        };

        let method = self.program.method(frame.method);
        if frame.current_state == method.cfg.final_state {
            debug_assert!(matches!(frame.kind, FrameKind::Root));
            let mut succ = cfg.clone();
            succ.handler_mut(h).stack.pop();
            out.push((TransitionKind::HandlerIdle { handler: h }, succ));
            return;
        }

        let Some(edge) = method.cfg.sole_edge(frame.current_state) else {
            unreachable!("guard branch points never persist at a fixpoint")
        };
        let action = edge.action.clone();
        let to = edge.to;
        match &action {
            Action::CreateObject { separate: true, place, class, ctor, args } => {
                let mut succ = cfg.clone();
                match self.create_separate(&mut succ, h, *place, *class, *ctor, args, to, &action) {
                    Ok(kind) => out.push((kind, succ)),
                    Err(e) => {
                        self.seal_error(&mut succ, h, e);
                        out.push((
                            TransitionKind::CreateSeparate {
                                client: h,
                                created: succ.next_handler_id(),
                                node: NodeId(0),
                            },
                            succ,
                        ));
                    }
                }
            }
            Action::EnterBlock { wait, .. } => {
                self.enter_block_steps(cfg, h, &action, wait.as_ref(), to, out);
            }
            Action::CommandCall { .. } | Action::QueryCall { .. } => {
                let mut succ = cfg.clone();
                match self.enqueue_remote(&mut succ, h, &action, to) {
                    Ok(kind) => out.push((kind, succ)),
                    Err(e) => {
                        self.seal_error(&mut succ, h, e);
                        let kind = TransitionKind::EnqueueCommand {
                            client: h,
                            supplier: h,
                            method: MethodId(0),
                            block: crate::state::BlockInstanceId(0),
                            seq: 0,
                        };
                        out.push((kind, succ));
                    }
                }
            }
            Action::ExitBlock { .. } => {
                let mut succ = cfg.clone();
                let frame = succ.handler_mut(h).top_frame_mut().unwrap();
                let instance = frame.blocks.pop().expect("active block at ExitBlock");
                frame.current_state = to;
                let kind = self.model.release(&mut succ, h, &instance);
                out.push((kind, succ));
            }
            other => unreachable!("handler stopped on a local action {other:?}"),
        }
    }

    fn enter_block_steps(
        &self,
        cfg: &Configuration,
        h: HandlerId,
        action: &Action,
        wait: Option<&Expr>,
        to: StateId,
        out: &mut Vec<(TransitionKind, Configuration)>,
    ) {
        let info = match self.analyze_enter(cfg, h, action) {
            Ok(info) => info,
            Err(e) => {
                let mut succ = cfg.clone();
                self.seal_error(&mut succ, h, e);
                out.push((
                    TransitionKind::Reserve { client: h, block: block_of(action), targets: vec![] },
                    succ,
                ));
                return;
            }
        };
        let frame = cfg.handler(h).top_frame().unwrap();
        match &frame.pending {
            None => {
                if info.acquire.is_empty() {
                    // Only a wait condition to synchronise on (locals are
                    // handled as local steps): go straight to evaluation stage.
                    debug_assert!(wait.is_some());
                    let mut succ = cfg.clone();
                    let pending = PendingBlock {
                        static_block: info.block,
                        targets: info.targets.clone(),
                        acquired: Vec::new(),
                        phase: ReservePhase::Active,
                        prelock_nodes: Vec::new(),
                        holding_prelocks: Vec::new(),
                        has_wait_condition: true,
                    };
                    succ.handler_mut(h).top_frame_mut().unwrap().pending = Some(pending);
                    out.push((
                        TransitionKind::Reserve {
                            client: h,
                            block: info.block,
                            targets: info.targets.clone(),
                        },
                        succ,
                    ));
                    return;
                }
                let mut succ = cfg.clone();
                match self.model.reserve_step(&mut succ, h, &info) {
                    ReserveOutcome::Blocked => {}
                    ReserveOutcome::Progress(kind) => {
                        self.finish_reservation_if_ready(&mut succ, h, to);
                        out.push((kind, succ));
                    }
                }
            }
            Some(pending) => match pending.phase {
                ReservePhase::Prelocking(_) | ReservePhase::Locking => {
                    let mut succ = cfg.clone();
                    match self.model.reserve_continue(&mut succ, h) {
                        ReserveOutcome::Blocked => {}
                        ReserveOutcome::Progress(kind) => {
                            self.finish_reservation_if_ready(&mut succ, h, to);
                            out.push((kind, succ));
                        }
                    }
                }
                ReservePhase::Active => {
                    // Evaluation stage of a reservation with a wait condition.
                    debug_assert!(pending.has_wait_condition);
                    let ready = pending
                        .targets
                        .iter()
                        .all(|&t| self.model.cond_target_ready(cfg, h, t));
                    if !ready {
                        return;
                    }
                    let wait = wait.expect("pending Active implies wait condition");
                    let mut succ = cfg.clone();
                    match eval_wait_condition(&succ, h, wait) {
                        Err(e) => {
                            self.seal_error(&mut succ, h, e);
                            out.push((
                                TransitionKind::WaitRetry { client: h, block: info.block },
                                succ,
                            ));
                        }
                        Ok(true) => {
                            let pending =
                                succ.handler_mut(h).top_frame_mut().unwrap().pending.take().unwrap();
                            self.activate(&mut succ, h, pending, to);
                            out.push((
                                TransitionKind::CondPass { client: h, block: info.block },
                                succ,
                            ));
                        }
                        Ok(false) => {
                            let pending =
                                succ.handler_mut(h).top_frame_mut().unwrap().pending.take().unwrap();
                            self.model.release_pending(&mut succ, h, &pending);
                            out.push((
                                TransitionKind::WaitRetry { client: h, block: info.block },
                                succ,
                            ));
                        }
                    }
                }
            },
        }
    }

    /// After a reservation hook reports progress: if all resources are held
    /// and there is no wait condition, activate the block immediately as part
    /// of the same transition.
    fn finish_reservation_if_ready(&self, cfg: &mut Configuration, h: HandlerId, to: StateId) {
        let frame = cfg.handler(h).top_frame().unwrap();
        let Some(pending) = &frame.pending else { return };
        if pending.phase == ReservePhase::Active && !pending.has_wait_condition {
            let pending = cfg.handler_mut(h).top_frame_mut().unwrap().pending.take().unwrap();
            self.activate(cfg, h, pending, to);
        }
    }

    fn activate(&self, cfg: &mut Configuration, h: HandlerId, pending: PendingBlock, to: StateId) {
        let id = cfg.fresh_block_instance_id();
        self.model.activate_pending(cfg, h, &pending, id);
        let frame = cfg.handler_mut(h).top_frame_mut().unwrap();
        frame.blocks.push(BlockInstance {
            id,
            static_block: pending.static_block,
            targets: pending.targets,
            acquired: pending.acquired,
            next_seq: Default::default(),
        });
        frame.current_state = to;
    }

    fn create_separate(
        &self,
        cfg: &mut Configuration,
        h: HandlerId,
        place: Place,
        class: crate::frontend::ir::ClassId,
        ctor: Option<MethodId>,
        args: &[Expr],
        to: StateId,
        action: &Action,
    ) -> Result<TransitionKind, EvalError> {
        let mut values = Vec::with_capacity(args.len());
        for a in args {
            values.push(eval_expr(cfg, h, a)?);
        }
        self.clear_consumed_temps(cfg, h, action);
        let node = self.model.assign_node(cfg);
        let new_id = cfg.next_handler_id();
        let oid = cfg.fresh_object_id();
        let attributes = self
            .program
            .class(class)
            .attributes
            .iter()
            .map(|a| self.program.default_value_of(&a.ty))
            .collect();
        let mut heap = std::collections::BTreeMap::new();
        heap.insert(oid, Object { id: oid, class, attributes });
        cfg.handlers.push(Handler {
            id: new_id,
            node,
            stack: Vec::new(),
            heap,
            inbox: self.model.empty_inbox(),
            reply_outbox: Default::default(),
            wait: None,
        });
        self.write_place(cfg, h, place, Value::Ref(new_id, oid));
        cfg.handler_mut(h).top_frame_mut().unwrap().current_state = to;
        if let Some(ctor) = ctor {
            // The constructor is logged as a one-shot creation block.
            let block = cfg.fresh_block_instance_id();
            let request = Request {
                kind: RequestKind::Command,
                method: ctor,
                target: oid,
                args: values,
                client: h,
                block,
                seq: 1,
                reply_to: None,
            };
            self.model.enqueue_creation(cfg, new_id, request);
        }
        Ok(TransitionKind::CreateSeparate { client: h, created: new_id, node })
    }

    fn enqueue_remote(
        &self,
        cfg: &mut Configuration,
        h: HandlerId,
        action: &Action,
        to: StateId,
    ) -> Result<TransitionKind, EvalError> {
        let (target, mid, args, reply_place) = match action {
            Action::CommandCall { target, method, args } => (target, *method, args, None),
            Action::QueryCall { place, target, method, args } => {
                (target, *method, args, Some(*place))
            }
            _ => unreachable!(),
        };
        let (supplier, object) = crate::state::resolve_call_target(cfg, h, target)?;
        debug_assert_ne!(supplier, h, "local calls are local steps");
        let mut values = Vec::with_capacity(args.len());
        for a in args {
            values.push(eval_expr(cfg, h, a)?);
        }
        self.clear_consumed_temps(cfg, h, action);
        let (block, seq) = {
            let handler = cfg.handler_mut(h);
            let Some(instance) = handler.controlling_instance_mut(supplier) else {
                return Err(EvalError::VoidTarget {
                    handler: h,
                    detail: format!(
                        "call on handler {supplier} outside any controlling block (runtime control violation)"
                    ),
                });
            };
            (instance.id, instance.take_seq(supplier))
        };
        let kind_enum = if reply_place.is_some() { RequestKind::Query } else { RequestKind::Command };
        let request = Request {
            kind: kind_enum,
            method: mid,
            target: object,
            args: values,
            client: h,
            block,
            seq,
            reply_to: reply_place.map(|_| h),
        };
        self.model.enqueue(cfg, supplier, request);
        let handler = cfg.handler_mut(h);
        handler.top_frame_mut().unwrap().current_state = to;
        let kind = if let Some(place) = reply_place {
            handler.wait = Some(Wait::QueryReply { place });
            TransitionKind::EnqueueQuery { client: h, supplier, method: mid, block, seq }
        } else {
            TransitionKind::EnqueueCommand { client: h, supplier, method: mid, block, seq }
        };
        Ok(kind)
    }

    /// Resolves the targets of an `EnterBlock`: evaluates the target places,
    /// drops the client itself, dedups, and splits off those already
    /// controlled.
    pub fn analyze_enter(
        &self,
        cfg: &Configuration,
        h: HandlerId,
        action: &Action,
    ) -> Result<EnterInfo, EvalError> {
        let Action::EnterBlock { block, targets, wait } = action else {
            unreachable!("analyze_enter on a non-EnterBlock action")
        };
        let handler = cfg.handler(h);
        let frame = handler.top_frame().expect("active frame");
        let mut resolved: Vec<HandlerId> = Vec::new();
        for place in targets {
            let value = match place {
                Place::Local(i) => frame.locals[*i as usize],
                Place::Attr(i) => {
                    handler.heap[&frame.current_object].attributes[*i as usize]
                }
            };
            match value {
                Value::Ref(th, _) => {
                    if th != h && !resolved.contains(&th) {
                        resolved.push(th);
                    }
                }
                Value::Void => {
                    return Err(EvalError::VoidTarget {
                        handler: h,
                        detail: "separate block target is Void".to_string(),
                    })
                }
                other => unreachable!("separate block target is {other:?}"),
            }
        }
        let acquire: Vec<HandlerId> = resolved
            .iter()
            .copied()
            .filter(|&t| !handler.controls(t))
            .collect();
        Ok(EnterInfo {
            block: *block,
            has_wait: wait.is_some(),
            targets: resolved,
            acquire,
        })
    }

    fn push_request_frame(&self, cfg: &mut Configuration, supplier: HandlerId, request: Request) {
        let method = self.program.method(request.method);
        let mut locals: Vec<Value> = method
            .vars
            .iter()
            .map(|v| self.program.default_value_of(&v.ty))
            .collect();
        locals[..request.args.len()].copy_from_slice(&request.args);
        let frame = StackFrame {
            method: request.method,
            current_object: request.target,
            current_state: method.cfg.initial,
            locals,
            kind: FrameKind::Request {
                client: request.client,
                block: request.block,
                seq: request.seq,
                reply_to: request.reply_to,
            },
            blocks: Vec::new(),
            pending: None,
        };
        cfg.handler_mut(supplier).stack.push(frame);
    }

    fn push_local_frame(
        &self,
        cfg: &mut Configuration,
        h: HandlerId,
        mid: MethodId,
        object: ObjectId,
        args: Vec<Value>,
        return_place: Option<Place>,
    ) -> bool {
        if cfg.handler(h).stack.len() >= self.max_stack_depth {
            cfg.set_error(ErrorMarker::Stuck {
                detail: format!(
                    "handler {h} exceeded the stack depth limit ({})",
                    self.max_stack_depth
                ),
            });
            return false;
        }
        let method = self.program.method(mid);
        let mut locals: Vec<Value> = method
            .vars
            .iter()
            .map(|v| self.program.default_value_of(&v.ty))
            .collect();
        locals[..args.len()].copy_from_slice(&args);
        cfg.handler_mut(h).stack.push(StackFrame {
            method: mid,
            current_object: object,
            current_state: method.cfg.initial,
            locals,
            kind: FrameKind::LocalCall { return_place },
            blocks: Vec::new(),
            pending: None,
        });
        true
    }

    fn pop_frame(&self, cfg: &mut Configuration, h: HandlerId) {
        let handler = cfg.handler_mut(h);
        let frame = handler.stack.pop().expect("frame to pop");
        debug_assert!(frame.blocks.is_empty(), "blocks must be closed before return");
        debug_assert!(frame.pending.is_none());
        let method = self.program.method(frame.method);
        let result = method.result_index.map(|i| frame.locals[i]);
        match frame.kind {
            FrameKind::Root => unreachable!("root frames pop via handler_idle"),
            FrameKind::LocalCall { return_place } => {
                if let Some(place) = return_place {
                    let value = result.expect("query returns a value");
                    self.write_place(cfg, h, place, value);
                }
            }
            FrameKind::Request { reply_to, .. } => {
                if let Some(client) = reply_to {
                    let value = result.expect("query returns a value");
                    cfg.handler_mut(h).reply_outbox.push_back((client, value));
                }
            }
        }
    }

    fn write_place(&self, cfg: &mut Configuration, h: HandlerId, place: Place, value: Value) {
        let handler = cfg.handler_mut(h);
        match place {
            Place::Local(i) => {
                handler.top_frame_mut().expect("active frame").locals[i as usize] = value;
            }
            Place::Attr(i) => {
                let obj = handler.top_frame().expect("active frame").current_object;
                handler
                    .heap
                    .get_mut(&obj)
                    .expect("current object exists")
                    .attributes[i as usize] = value;
            }
        }
    }

    /// Hoisting temporaries are single-use; once the action that reads them
    /// has fired they are reset to Void so reconverging paths share keys.
    fn clear_consumed_temps(&self, cfg: &mut Configuration, h: HandlerId, action: &Action) {
        fn visit_expr(e: &Expr, is_temp: &dyn Fn(u16) -> bool, consumed: &mut Vec<u16>) {
            let mut stack = vec![e];
            while let Some(e) = stack.pop() {
                match e {
                    Expr::Read(Place::Local(i)) => {
                        if is_temp(*i) {
                            consumed.push(*i);
                        }
                    }
                    Expr::Binary { lhs, rhs, .. } => {
                        stack.push(lhs);
                        stack.push(rhs);
                    }
                    Expr::Not(inner) => stack.push(inner),
                    Expr::Query { args, .. } => stack.extend(args.iter()),
                    _ => {}
                }
            }
        }
        let frame = cfg.handler(h).top_frame().expect("active frame");
        let method = self.program.method(frame.method);
        let is_temp = |i: u16| method.vars[i as usize].is_temp;
        let mut consumed: Vec<u16> = Vec::new();
        match action {
            Action::AssignLocal { expr, .. } => visit_expr(expr, &is_temp, &mut consumed),
            Action::CreateObject { args, .. } => {
                args.iter().for_each(|a| visit_expr(a, &is_temp, &mut consumed))
            }
            Action::CommandCall { target, args, .. }
            | Action::QueryCall { target, args, .. } => {
                if let TargetBase::Place(Place::Local(i)) = target.base {
                    if is_temp(i) {
                        consumed.push(i);
                    }
                }
                args.iter().for_each(|a| visit_expr(a, &is_temp, &mut consumed));
            }
            Action::Guard { expr, .. } => visit_expr(expr, &is_temp, &mut consumed),
            _ => {}
        }
        if !consumed.is_empty() {
            let frame = cfg.handler_mut(h).top_frame_mut().unwrap();
            for i in consumed {
                frame.locals[i as usize] = Value::Void;
            }
        }
    }

    fn seal_error(&self, cfg: &mut Configuration, h: HandlerId, e: EvalError) {
        let marker = match e {
            EvalError::VoidTarget { handler, detail } => ErrorMarker::VoidCall { handler, detail },
            EvalError::Overflow => ErrorMarker::Stuck {
                detail: format!("integer overflow in handler {h}"),
            },
            EvalError::Diverged => ErrorMarker::Stuck {
                detail: format!("wait-condition evaluation diverged in handler {h}"),
            },
        };
        cfg.set_error(marker);
    }

    /// Wait-for edges of a handler with no enabled transition, for the
    /// deadlock rule: what must happen, and by whom, before it can move.
    pub fn wait_edges(&self, cfg: &Configuration, h: HandlerId) -> Vec<WaitEdge> {
        let handler = cfg.handler(h);
        if let Some(Wait::QueryReply { .. }) = &handler.wait {
            // Blocked on a query whose reply has not been produced yet.
            let supplier = self.query_supplier_of(cfg, h);
            if let Some(supplier) = supplier {
                if cfg.handler(supplier).reply_outbox.iter().any(|(c, _)| *c == h) {
                    return Vec::new(); // delivery enabled: not blocked
                }
                if let Some(actor) = self.model.supplier_next_actor(cfg, supplier) {
                    return vec![WaitEdge {
                        waiter: h,
                        resource: format!("query_reply({supplier})"),
                        owner: actor,
                    }];
                }
            }
            return Vec::new();
        }
        let Some(frame) = handler.top_frame() else {
            return Vec::new();
        };
        let method = self.program.method(frame.method);
        if frame.current_state == method.cfg.final_state {
            return Vec::new();
        }
        let Some(edge) = method.cfg.sole_edge(frame.current_state) else {
            return Vec::new();
        };
        let Action::EnterBlock { .. } = &edge.action else {
            return Vec::new();
        };
        let Ok(info) = self.analyze_enter(cfg, h, &edge.action) else {
            return Vec::new();
        };
        match &frame.pending {
            None => self.reservation_wait_edges(cfg, h, &info),
            Some(pending) => match pending.phase {
                ReservePhase::Prelocking(i) => {
                    let node = pending.prelock_nodes[i];
                    match cfg.topology.prelock_owner.get(&node) {
                        Some(&owner) if owner != h => vec![WaitEdge {
                            waiter: h,
                            resource: format!("prelock(node {node})"),
                            owner,
                        }],
                        _ => Vec::new(),
                    }
                }
                ReservePhase::Locking => Vec::new(),
                ReservePhase::Active => pending
                    .targets
                    .iter()
                    .filter(|&&t| !self.model.cond_target_ready(cfg, h, t))
                    .filter_map(|&t| {
                        self.model.supplier_next_actor(cfg, t).map(|actor| WaitEdge {
                            waiter: h,
                            resource: format!("quiescence({t})"),
                            owner: actor,
                        })
                    })
                    .collect(),
            },
        }
    }

    /// Edges for a handler whose initial reservation step is disabled.
    fn reservation_wait_edges(
        &self,
        cfg: &Configuration,
        h: HandlerId,
        info: &EnterInfo,
    ) -> Vec<WaitEdge> {
        let mut edges = Vec::new();
        // RQ: contested queue locks.
        for &t in &info.acquire {
            if let Inbox::Rq { lock_owner: Some(owner), .. } = &cfg.handler(t).inbox {
                if *owner != h {
                    edges.push(WaitEdge {
                        waiter: h,
                        resource: format!("queue_lock({t})"),
                        owner: *owner,
                    });
                }
            }
        }
        // D-SCOOP: first prelock contested.
        if self.model.id() == "dscoop" {
            let nodes = self.prelock_plan(cfg, h, info);
            if let Some(&first) = nodes.first() {
                if let Some(&owner) = cfg.topology.prelock_owner.get(&first) {
                    if owner != h {
                        edges.push(WaitEdge {
                            waiter: h,
                            resource: format!("prelock(node {first})"),
                            owner,
                        });
                    }
                }
            }
        }
        edges
    }

    /// The remote nodes a D-SCOOP reservation must prelock, in acquisition
    /// order (ascending node id, or argument order under the fault hook).
    pub fn prelock_plan(&self, cfg: &Configuration, h: HandlerId, info: &EnterInfo) -> Vec<NodeId> {
        prelock_plan(cfg, h, &info.acquire, self.model.prelock_in_argument_order())
    }

    /// The supplier of the query `h` is waiting on, found by scanning inboxes.
    fn query_supplier_of(&self, cfg: &Configuration, h: HandlerId) -> Option<HandlerId> {
        for supplier in &cfg.handlers {
            let found = match &supplier.inbox {
                Inbox::Rq { queue, .. } => queue
                    .iter()
                    .any(|r| r.reply_to == Some(h)),
                Inbox::Qoq { subqueues } => subqueues
                    .iter()
                    .any(|s| s.queue.iter().any(|r| r.reply_to == Some(h))),
            };
            if found {
                return Some(supplier.id);
            }
            // The request may already be executing on the supplier's stack.
            if supplier.stack.iter().any(
                |f| matches!(f.kind, FrameKind::Request { reply_to: Some(c), .. } if c == h),
            ) {
                return Some(supplier.id);
            }
        }
        None
    }
}

fn block_of(action: &Action) -> BlockId {
    match action {
        Action::EnterBlock { block, .. } | Action::ExitBlock { block } => *block,
        _ => unreachable!(),
    }
}

/// Remote nodes to prelock for a reservation over `acquire`, deduplicated, in
/// ascending node-id order (or declaration order when `argument_order` — the
/// fault hook — is on).
pub fn prelock_plan(
    cfg: &Configuration,
    client: HandlerId,
    acquire: &[HandlerId],
    argument_order: bool,
) -> Vec<NodeId> {
    let own = cfg.handler(client).node;
    let mut nodes: Vec<NodeId> = Vec::new();
    for &t in acquire {
        let n = cfg.handler(t).node;
        if n != own && !nodes.contains(&n) {
            nodes.push(n);
        }
    }
    if !argument_order {
        nodes.sort();
    }
    nodes
}
