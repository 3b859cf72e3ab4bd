//! Configuration: a full dynamic snapshot of all handlers, their storage and
//! queues, plus the topology connecting them.

use crate::frontend::ir::{BlockId, CompiledProgram, MethodId, Place, StateId};
use serde::Serialize;
use std::collections::BTreeMap;
use std::collections::VecDeque;
use std::fmt;
use std::sync::Arc;

macro_rules! id_type {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
        pub struct $name(pub u32);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    };
}

id_type!(HandlerId);
id_type!(ObjectId);
id_type!(NodeId);
id_type!(
    /// A runtime instance of a separate block; allocated on activation, so
    /// failed wait-condition attempts leave no trace.
    BlockInstanceId
);

/// A runtime value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Void,
    Ref(HandlerId, ObjectId),
}

impl Value {
    pub fn as_ref(&self) -> Option<(HandlerId, ObjectId)> {
        match self {
            Value::Ref(h, o) => Some((*h, *o)),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Void => write!(f, "Void"),
            Value::Ref(h, o) => write!(f, "ref({h},{o})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RequestKind {
    Command,
    Query,
}

/// A logged call with its provenance: which client issued it, under which
/// block instance, and its per-(block, supplier) sequence number (1-based).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Request {
    pub kind: RequestKind,
    pub method: MethodId,
    pub target: ObjectId,
    pub args: Vec<Value>,
    pub client: HandlerId,
    pub block: BlockInstanceId,
    pub seq: u32,
    /// Present exactly for queries.
    pub reply_to: Option<HandlerId>,
}

/// A private area within a QoQ inbox owned by one block instance.
/// `block` is None while the owning reservation is still evaluating its wait
/// condition (no instance id has been allocated yet).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subqueue {
    pub owner_client: HandlerId,
    pub block: Option<BlockInstanceId>,
    pub open: bool,
    pub queue: VecDeque<Request>,
}

/// Model-specific inbox structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Inbox {
    /// One flat FIFO protected by a lock; only the lock owner may append.
    Rq {
        queue: VecDeque<Request>,
        lock_owner: Option<HandlerId>,
    },
    /// FIFO of private subqueues, drained wholly in creation order.
    Qoq { subqueues: VecDeque<Subqueue> },
}

impl Inbox {
    pub fn is_empty(&self) -> bool {
        match self {
            Inbox::Rq { queue, .. } => queue.is_empty(),
            Inbox::Qoq { subqueues } => subqueues.iter().all(|s| s.queue.is_empty()),
        }
    }
}

/// Progress of one reservation before its block instance is activated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReservePhase {
    /// D-SCOOP: prelocking remote nodes one at a time; the index points into
    /// `PendingBlock::prelock_nodes`.
    Prelocking(usize),
    /// D-SCOOP: all prelocks held, LOCK fan-out not yet performed.
    Locking,
    /// Resources held (locks or subqueues); for reservations with a wait
    /// condition this is the evaluation stage.
    Active,
}

/// Reservation in progress for the `EnterBlock` the top frame is sitting at.
/// Activation (wait condition true, or no wait condition) converts this into
/// a [`BlockInstance`]; a false wait condition releases everything and drops
/// it, returning the handler to the bare `EnterBlock` state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PendingBlock {
    pub static_block: BlockId,
    /// All distinct target handlers of the block, in declaration order
    /// (self and already-controlled targets excluded from `acquired`).
    pub targets: Vec<HandlerId>,
    /// Targets this reservation newly acquired resources on.
    pub acquired: Vec<HandlerId>,
    pub phase: ReservePhase,
    /// D-SCOOP: remote nodes to prelock, in acquisition order.
    pub prelock_nodes: Vec<NodeId>,
    /// D-SCOOP: prelocks currently held by this reservation.
    pub holding_prelocks: Vec<NodeId>,
    pub has_wait_condition: bool,
}

/// An activated separate block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockInstance {
    pub id: BlockInstanceId,
    pub static_block: BlockId,
    pub targets: Vec<HandlerId>,
    /// Targets on which this instance owns the lock (RQ) or a subqueue
    /// (QoQ/D-SCOOP); nested blocks re-using outer resources leave these out.
    pub acquired: Vec<HandlerId>,
    /// Next request sequence number per supplier, 1-based.
    pub next_seq: BTreeMap<HandlerId, u32>,
}

impl BlockInstance {
    pub fn take_seq(&mut self, supplier: HandlerId) -> u32 {
        let entry = self.next_seq.entry(supplier).or_insert(1);
        let seq = *entry;
        *entry += 1;
        seq
    }
}

/// Why a stack frame exists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FrameKind {
    /// The root routine of the initial handler.
    Root,
    /// Local (same-handler) call; on return the result is stored in
    /// `return_place` of the frame below.
    LocalCall { return_place: Option<Place> },
    /// Execution of a dequeued request.
    Request {
        client: HandlerId,
        block: BlockInstanceId,
        seq: u32,
        reply_to: Option<HandlerId>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StackFrame {
    pub method: MethodId,
    pub current_object: ObjectId,
    pub current_state: StateId,
    pub locals: Vec<Value>,
    pub kind: FrameKind,
    /// Active block instances opened by this frame, innermost last.
    pub blocks: Vec<BlockInstance>,
    /// Reservation for the `EnterBlock` at `current_state`, if in progress.
    pub pending: Option<PendingBlock>,
}

/// A handler blocked on something only another handler can resolve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Wait {
    /// Awaiting the reply to an issued query; the value lands in `place`.
    QueryReply { place: Place },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Object {
    pub id: ObjectId,
    pub class: crate::frontend::ir::ClassId,
    pub attributes: Vec<Value>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Handler {
    pub id: HandlerId,
    pub node: NodeId,
    /// Bottom to top; empty stack = idle.
    pub stack: Vec<StackFrame>,
    pub heap: BTreeMap<ObjectId, Object>,
    pub inbox: Inbox,
    /// Executed query results awaiting their delivery transition.
    pub reply_outbox: VecDeque<(HandlerId, Value)>,
    pub wait: Option<Wait>,
}

impl Handler {
    pub fn is_idle(&self) -> bool {
        self.stack.is_empty() && self.wait.is_none()
    }

    pub fn top_frame(&self) -> Option<&StackFrame> {
        self.stack.last()
    }

    pub fn top_frame_mut(&mut self) -> Option<&mut StackFrame> {
        self.stack.last_mut()
    }

    /// The block instance owning a resource on `target`, if any frame holds
    /// one (lock under RQ, subqueue under QoQ/D-SCOOP).
    pub fn controlling_instance(&self, target: HandlerId) -> Option<&BlockInstance> {
        self.stack
            .iter()
            .rev()
            .flat_map(|f| f.blocks.iter().rev())
            .find(|b| b.acquired.contains(&target))
    }

    pub fn controlling_instance_mut(&mut self, target: HandlerId) -> Option<&mut BlockInstance> {
        self.stack
            .iter_mut()
            .rev()
            .flat_map(|f| f.blocks.iter_mut().rev())
            .find(|b| b.acquired.contains(&target))
    }

    /// True when some active block (or the in-progress reservation) already
    /// holds a resource on `target`.
    pub fn controls(&self, target: HandlerId) -> bool {
        self.controlling_instance(target).is_some()
    }
}

/// Multi-node structure (D-SCOOP); under RQ/QoQ every handler lives on node 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    pub next_node_id: u32,
    /// Node-level prelock ownership (D-SCOOP only).
    pub prelock_owner: BTreeMap<NodeId, HandlerId>,
}

impl Topology {
    pub fn single_node() -> Topology {
        Topology { next_node_id: 1, prelock_owner: BTreeMap::new() }
    }

    pub fn fresh_node(&mut self) -> NodeId {
        let id = NodeId(self.next_node_id);
        self.next_node_id += 1;
        id
    }
}

/// Why an execution was sealed as an error state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum ErrorMarker {
    /// Circular waiting dependency; the witness lists each blocked handler,
    /// the resource it waits for, and the handler holding it.
    Deadlock { cycle: Vec<WaitEdge> },
    MutexViolation {
        method: String,
        first: HandlerId,
        second: HandlerId,
        shared_target: HandlerId,
    },
    OrderViolation {
        supplier: HandlerId,
        detail: String,
    },
    VoidCall { handler: HandlerId, detail: String },
    /// Terminal non-final configuration, or a runtime anomaly (arithmetic
    /// overflow, stack depth exceeded, diverging wait-condition evaluation).
    Stuck { detail: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WaitEdge {
    pub waiter: HandlerId,
    pub resource: String,
    pub owner: HandlerId,
}

impl ErrorMarker {
    pub fn kind_name(&self) -> &'static str {
        match self {
            ErrorMarker::Deadlock { .. } => "deadlock",
            ErrorMarker::MutexViolation { .. } => "mutex_violation",
            ErrorMarker::OrderViolation { .. } => "order_violation",
            ErrorMarker::VoidCall { .. } => "void_call",
            ErrorMarker::Stuck { .. } => "stuck",
        }
    }
}

/// A full dynamic snapshot; one state of the transition system.
#[derive(Debug, Clone)]
pub struct Configuration {
    pub program: Arc<CompiledProgram>,
    pub handlers: Vec<Handler>,
    pub topology: Topology,
    pub next_object_id: u32,
    pub next_block_instance_id: u32,
    pub error: Option<ErrorMarker>,
}

impl PartialEq for Configuration {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.program, &other.program)
            && self.handlers == other.handlers
            && self.topology == other.topology
            && self.next_object_id == other.next_object_id
            && self.next_block_instance_id == other.next_block_instance_id
            && self.error == other.error
    }
}

impl Eq for Configuration {}

impl Configuration {
    pub fn handler(&self, id: HandlerId) -> &Handler {
        &self.handlers[id.0 as usize]
    }

    pub fn handler_mut(&mut self, id: HandlerId) -> &mut Handler {
        &mut self.handlers[id.0 as usize]
    }

    pub fn next_handler_id(&self) -> HandlerId {
        HandlerId(self.handlers.len() as u32)
    }

    pub fn fresh_object_id(&mut self) -> ObjectId {
        let id = ObjectId(self.next_object_id);
        self.next_object_id += 1;
        id
    }

    pub fn fresh_block_instance_id(&mut self) -> BlockInstanceId {
        let id = BlockInstanceId(self.next_block_instance_id);
        self.next_block_instance_id += 1;
        id
    }

    pub fn object(&self, handler: HandlerId, object: ObjectId) -> Option<&Object> {
        self.handler(handler).heap.get(&object)
    }

    /// Removes drained closed subqueues. Never collects unreachable heap
    /// objects; the heap grows with the number of created objects.
    pub fn gc(&mut self) {
        for handler in &mut self.handlers {
            if let Inbox::Qoq { subqueues } = &mut handler.inbox {
                subqueues.retain(|s| s.open || !s.queue.is_empty());
            }
        }
    }

    pub fn set_error(&mut self, marker: ErrorMarker) {
        if self.error.is_none() {
            self.error = Some(marker);
        }
    }

    /// Heap-ownership sanity check: every reference reachable from frames,
    /// heaps, queues and outboxes points at an existing object of its
    /// handler. Used by debug assertions and tests.
    pub fn check_heap_ownership(&self) -> Result<(), String> {
        let check = |v: &Value, what: &str| -> Result<(), String> {
            if let Value::Ref(h, o) = v {
                let ok = self
                    .handlers
                    .get(h.0 as usize)
                    .is_some_and(|handler| handler.heap.contains_key(o));
                if !ok {
                    return Err(format!("dangling reference {v} in {what}"));
                }
            }
            Ok(())
        };
        for handler in &self.handlers {
            for frame in &handler.stack {
                for v in &frame.locals {
                    check(v, &format!("handler {} frame locals", handler.id))?;
                }
            }
            for obj in handler.heap.values() {
                for v in &obj.attributes {
                    check(v, &format!("handler {} object {}", handler.id, obj.id))?;
                }
            }
            let check_req = |r: &Request| -> Result<(), String> {
                for v in &r.args {
                    check(v, &format!("request on handler {}", handler.id))?;
                }
                Ok(())
            };
            match &handler.inbox {
                Inbox::Rq { queue, .. } => {
                    for r in queue {
                        check_req(r)?;
                    }
                }
                Inbox::Qoq { subqueues } => {
                    for s in subqueues {
                        for r in &s.queue {
                            check_req(r)?;
                        }
                    }
                }
            }
            for (_, v) in &handler.reply_outbox {
                check(v, &format!("handler {} reply outbox", handler.id))?;
            }
        }
        Ok(())
    }

    /// Deterministic line-oriented text rendering, used in golden tests and
    /// `--format text` dumps.
    pub fn dump(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let program = &self.program;
        let _ = writeln!(
            out,
            "configuration: handlers={} next_object={} next_block={} nodes={}",
            self.handlers.len(),
            self.next_object_id,
            self.next_block_instance_id,
            self.topology.next_node_id
        );
        if let Some(err) = &self.error {
            let _ = writeln!(out, "error: {err:?}");
        }
        for (node, owner) in &self.topology.prelock_owner {
            let _ = writeln!(out, "prelock: node {node} owned by handler {owner}");
        }
        for h in &self.handlers {
            let _ = writeln!(out, "handler {} on node {}:", h.id, h.node);
            match &h.wait {
                Some(Wait::QueryReply { .. }) => {
                    let _ = writeln!(out, "  waiting for query reply");
                }
                None => {}
            }
            for frame in &h.stack {
                let method = program.method(frame.method);
                let locals: Vec<String> = method
                    .vars
                    .iter()
                    .zip(&frame.locals)
                    .map(|(v, val)| format!("{}={}", v.name, val))
                    .collect();
                let _ = writeln!(
                    out,
                    "  frame {}.{} at s{} obj {} [{}]",
                    program.class(method.class).name,
                    method.name,
                    frame.current_state,
                    frame.current_object,
                    locals.join(", ")
                );
                for b in &frame.blocks {
                    let targets: Vec<String> = b.targets.iter().map(|t| t.to_string()).collect();
                    let _ = writeln!(
                        out,
                        "    block {} static {} targets [{}]",
                        b.id,
                        b.static_block,
                        targets.join(", ")
                    );
                }
                if let Some(p) = &frame.pending {
                    let _ = writeln!(
                        out,
                        "    pending block static {} phase {:?}",
                        p.static_block, p.phase
                    );
                }
            }
            for obj in h.heap.values() {
                let class = program.class(obj.class);
                let attrs: Vec<String> = class
                    .attributes
                    .iter()
                    .zip(&obj.attributes)
                    .map(|(a, v)| format!("{}={}", a.name, v))
                    .collect();
                let _ = writeln!(out, "  object {} {} [{}]", obj.id, class.name, attrs.join(", "));
            }
            match &h.inbox {
                Inbox::Rq { queue, lock_owner } => {
                    let owner = lock_owner
                        .map(|o| o.to_string())
                        .unwrap_or_else(|| "free".to_string());
                    let _ = writeln!(out, "  inbox rq lock={owner}");
                    for r in queue {
                        let _ = writeln!(out, "    {}", request_line(program, r));
                    }
                }
                Inbox::Qoq { subqueues } => {
                    let _ = writeln!(out, "  inbox qoq subqueues={}", subqueues.len());
                    for s in subqueues {
                        let block = s
                            .block
                            .map(|b| b.to_string())
                            .unwrap_or_else(|| "pending".to_string());
                        let _ = writeln!(
                            out,
                            "    subqueue client={} block={} {}",
                            s.owner_client,
                            block,
                            if s.open { "open" } else { "closed" }
                        );
                        for r in &s.queue {
                            let _ = writeln!(out, "      {}", request_line(program, r));
                        }
                    }
                }
            }
            for (to, v) in &h.reply_outbox {
                let _ = writeln!(out, "  reply to {to}: {v}");
            }
        }
        out
    }
}

fn request_line(program: &CompiledProgram, r: &Request) -> String {
    let method = program.method(r.method);
    format!(
        "{:?} {} on obj {} from handler {} block {} seq {}",
        r.kind, method.name, r.target, r.client, r.block, r.seq
    )
}

/// The initial configuration: one root handler on node 0, executing the entry
/// method on the root object, with an empty model-shaped inbox.
pub fn load_initial(program: &Arc<CompiledProgram>, empty_inbox: Inbox) -> Configuration {
    let entry = program.method(program.entry);
    let root_class = program.class(entry.class);
    let root_object = Object {
        id: ObjectId(0),
        class: entry.class,
        attributes: root_class
            .attributes
            .iter()
            .map(|a| program.default_value_of(&a.ty))
            .collect(),
    };
    let locals: Vec<Value> = entry
        .vars
        .iter()
        .map(|v| program.default_value_of(&v.ty))
        .collect();
    let frame = StackFrame {
        method: program.entry,
        current_object: ObjectId(0),
        current_state: entry.cfg.initial,
        locals,
        kind: FrameKind::Root,
        blocks: Vec::new(),
        pending: None,
    };
    let mut heap = BTreeMap::new();
    heap.insert(ObjectId(0), root_object);
    let root = Handler {
        id: HandlerId(0),
        node: NodeId(0),
        stack: vec![frame],
        heap,
        inbox: empty_inbox,
        reply_outbox: VecDeque::new(),
        wait: None,
    };
    Configuration {
        program: Arc::clone(program),
        handlers: vec![root],
        topology: Topology::single_node(),
        next_object_id: 1,
        next_block_instance_id: 0,
        error: None,
    }
}
