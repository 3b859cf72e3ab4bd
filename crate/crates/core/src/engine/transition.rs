//! Synchronization-step labels. The label strings are a stable external
//! interface, used in reports, witnesses, and the order monitor.

use crate::frontend::ir::{BlockId, MethodId};
use crate::state::{BlockInstanceId, HandlerId, NodeId};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransitionKind {
    CreateSeparate {
        client: HandlerId,
        created: HandlerId,
        node: NodeId,
    },
    Reserve {
        client: HandlerId,
        block: BlockId,
        targets: Vec<HandlerId>,
    },
    Prelock {
        client: HandlerId,
        node: NodeId,
    },
    Lock {
        client: HandlerId,
        block: BlockId,
    },
    EnqueueCommand {
        client: HandlerId,
        supplier: HandlerId,
        method: MethodId,
        block: BlockInstanceId,
        seq: u32,
    },
    EnqueueQuery {
        client: HandlerId,
        supplier: HandlerId,
        method: MethodId,
        block: BlockInstanceId,
        seq: u32,
    },
    DequeueExecute {
        supplier: HandlerId,
        client: HandlerId,
        method: MethodId,
        block: BlockInstanceId,
        seq: u32,
    },
    QueryReply {
        supplier: HandlerId,
        client: HandlerId,
    },
    WaitRetry {
        client: HandlerId,
        block: BlockId,
    },
    CondPass {
        client: HandlerId,
        block: BlockId,
    },
    BlockExit {
        client: HandlerId,
        block: BlockInstanceId,
    },
    Release {
        client: HandlerId,
        block: BlockInstanceId,
    },
    HandlerIdle {
        handler: HandlerId,
    },
}

impl TransitionKind {
    /// Stable label taxonomy.
    pub fn label(&self) -> &'static str {
        match self {
            TransitionKind::CreateSeparate { .. } => "create_separate",
            TransitionKind::Reserve { .. } => "reserve",
            TransitionKind::Prelock { .. } => "prelock",
            TransitionKind::Lock { .. } => "lock",
            TransitionKind::EnqueueCommand { .. } => "enqueue_command",
            TransitionKind::EnqueueQuery { .. } => "enqueue_query",
            TransitionKind::DequeueExecute { .. } => "dequeue_execute",
            TransitionKind::QueryReply { .. } => "query_reply",
            TransitionKind::WaitRetry { .. } => "wait_retry",
            TransitionKind::CondPass { .. } => "cond_pass",
            TransitionKind::BlockExit { .. } => "block_exit",
            TransitionKind::Release { .. } => "release",
            TransitionKind::HandlerIdle { .. } => "handler_idle",
        }
    }

    /// The handler whose situation enabled this transition (the resuming
    /// client, for reply deliveries).
    pub fn handler(&self) -> HandlerId {
        match self {
            TransitionKind::CreateSeparate { client, .. }
            | TransitionKind::Reserve { client, .. }
            | TransitionKind::Prelock { client, .. }
            | TransitionKind::Lock { client, .. }
            | TransitionKind::EnqueueCommand { client, .. }
            | TransitionKind::EnqueueQuery { client, .. }
            | TransitionKind::QueryReply { client, .. }
            | TransitionKind::WaitRetry { client, .. }
            | TransitionKind::CondPass { client, .. }
            | TransitionKind::BlockExit { client, .. }
            | TransitionKind::Release { client, .. } => *client,
            TransitionKind::DequeueExecute { supplier, .. } => *supplier,
            TransitionKind::HandlerIdle { handler } => *handler,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub kind: TransitionKind,
}

impl Transition {
    pub fn label(&self) -> &'static str {
        self.kind.label()
    }

    pub fn handler(&self) -> HandlerId {
        self.kind.handler()
    }
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            TransitionKind::CreateSeparate { client, created, node } => {
                write!(f, "create_separate(client={client}, new={created}, node={node})")
            }
            TransitionKind::Reserve { client, block, targets } => {
                let t: Vec<String> = targets.iter().map(|t| t.to_string()).collect();
                write!(f, "reserve(client={client}, block={block}, targets=[{}])", t.join(","))
            }
            TransitionKind::Prelock { client, node } => {
                write!(f, "prelock(client={client}, node={node})")
            }
            TransitionKind::Lock { client, block } => {
                write!(f, "lock(client={client}, block={block})")
            }
            TransitionKind::EnqueueCommand { client, supplier, method, block, seq } => write!(
                f,
                "enqueue_command(client={client}, supplier={supplier}, method={method}, block={block}, seq={seq})"
            ),
            TransitionKind::EnqueueQuery { client, supplier, method, block, seq } => write!(
                f,
                "enqueue_query(client={client}, supplier={supplier}, method={method}, block={block}, seq={seq})"
            ),
            TransitionKind::DequeueExecute { supplier, client, method, block, seq } => write!(
                f,
                "dequeue_execute(supplier={supplier}, client={client}, method={method}, block={block}, seq={seq})"
            ),
            TransitionKind::QueryReply { supplier, client } => {
                write!(f, "query_reply(supplier={supplier}, client={client})")
            }
            TransitionKind::WaitRetry { client, block } => {
                write!(f, "wait_retry(client={client}, block={block})")
            }
            TransitionKind::CondPass { client, block } => {
                write!(f, "cond_pass(client={client}, block={block})")
            }
            TransitionKind::BlockExit { client, block } => {
                write!(f, "block_exit(client={client}, block={block})")
            }
            TransitionKind::Release { client, block } => {
                write!(f, "release(client={client}, block={block})")
            }
            TransitionKind::HandlerIdle { handler } => write!(f, "handler_idle({handler})"),
        }
    }
}
