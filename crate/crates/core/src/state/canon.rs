//! Deterministic byte serialization of configurations, replacing an
//! isomorphism-based state store: creation-order naming makes ids
//! deterministic per path, so equal keys mean identical configurations.
//!
//! Every semantic field is covered, with length prefixes so the encoding is
//! prefix-free per field sequence. The static program is excluded (shared by
//! all configurations), as is any trace-level monitor metadata (it lives
//! outside the configuration entirely).

use super::config::*;
use crate::frontend::ir::Place;

pub type Key = Box<[u8]>;

struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn i64(&mut self, v: i64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn usize(&mut self, v: usize) {
        self.u32(v as u32);
    }
    fn str(&mut self, s: &str) {
        self.usize(s.len());
        self.buf.extend_from_slice(s.as_bytes());
    }
    fn opt_u32(&mut self, v: Option<u32>) {
        match v {
            None => self.u8(0),
            Some(v) => {
                self.u8(1);
                self.u32(v);
            }
        }
    }
}

/// Serializes all semantic fields of a configuration: handlers in id order,
/// maps in key order, queues front to back, topology, and the error marker.
pub fn canonical_key(cfg: &Configuration) -> Key {
    let mut w = Writer { buf: Vec::with_capacity(256) };
    w.u32(cfg.next_object_id);
    w.u32(cfg.next_block_instance_id);
    w.u32(cfg.topology.next_node_id);
    w.usize(cfg.topology.prelock_owner.len());
    for (node, owner) in &cfg.topology.prelock_owner {
        w.u32(node.0);
        w.u32(owner.0);
    }
    write_error(&mut w, cfg.error.as_ref());
    w.usize(cfg.handlers.len());
    for h in &cfg.handlers {
        write_handler(&mut w, h);
    }
    w.buf.into_boxed_slice()
}

fn write_error(w: &mut Writer, error: Option<&ErrorMarker>) {
    match error {
        None => w.u8(0),
        Some(ErrorMarker::Deadlock { cycle }) => {
            w.u8(1);
            w.usize(cycle.len());
            for edge in cycle {
                w.u32(edge.waiter.0);
                w.str(&edge.resource);
                w.u32(edge.owner.0);
            }
        }
        Some(ErrorMarker::MutexViolation { method, first, second, shared_target }) => {
            w.u8(2);
            w.str(method);
            w.u32(first.0);
            w.u32(second.0);
            w.u32(shared_target.0);
        }
        Some(ErrorMarker::OrderViolation { supplier, detail }) => {
            w.u8(3);
            w.u32(supplier.0);
            w.str(detail);
        }
        Some(ErrorMarker::VoidCall { handler, detail }) => {
            w.u8(4);
            w.u32(handler.0);
            w.str(detail);
        }
        Some(ErrorMarker::Stuck { detail }) => {
            w.u8(5);
            w.str(detail);
        }
    }
}

fn write_value(w: &mut Writer, v: &Value) {
    match v {
        Value::Int(n) => {
            w.u8(0);
            w.i64(*n);
        }
        Value::Bool(b) => {
            w.u8(1);
            w.u8(*b as u8);
        }
        Value::Void => w.u8(2),
        Value::Ref(h, o) => {
            w.u8(3);
            w.u32(h.0);
            w.u32(o.0);
        }
    }
}

fn write_place(w: &mut Writer, p: &Place) {
    match p {
        Place::Local(i) => {
            w.u8(0);
            w.u32(*i as u32);
        }
        Place::Attr(i) => {
            w.u8(1);
            w.u32(*i as u32);
        }
    }
}

fn write_request(w: &mut Writer, r: &Request) {
    w.u8(match r.kind {
        RequestKind::Command => 0,
        RequestKind::Query => 1,
    });
    w.u32(r.method.0);
    w.u32(r.target.0);
    w.usize(r.args.len());
    for a in &r.args {
        write_value(w, a);
    }
    w.u32(r.client.0);
    w.u32(r.block.0);
    w.u32(r.seq);
    w.opt_u32(r.reply_to.map(|h| h.0));
}

fn write_block_instance(w: &mut Writer, b: &BlockInstance) {
    w.u32(b.id.0);
    w.u32(b.static_block.0);
    w.usize(b.targets.len());
    for t in &b.targets {
        w.u32(t.0);
    }
    w.usize(b.acquired.len());
    for t in &b.acquired {
        w.u32(t.0);
    }
    w.usize(b.next_seq.len());
    for (h, s) in &b.next_seq {
        w.u32(h.0);
        w.u32(*s);
    }
}

fn write_pending(w: &mut Writer, p: &PendingBlock) {
    w.u32(p.static_block.0);
    w.usize(p.targets.len());
    for t in &p.targets {
        w.u32(t.0);
    }
    w.usize(p.acquired.len());
    for t in &p.acquired {
        w.u32(t.0);
    }
    match p.phase {
        ReservePhase::Prelocking(i) => {
            w.u8(0);
            w.usize(i);
        }
        ReservePhase::Locking => w.u8(1),
        ReservePhase::Active => w.u8(2),
    }
    w.usize(p.prelock_nodes.len());
    for n in &p.prelock_nodes {
        w.u32(n.0);
    }
    w.usize(p.holding_prelocks.len());
    for n in &p.holding_prelocks {
        w.u32(n.0);
    }
    w.u8(p.has_wait_condition as u8);
}

fn write_frame(w: &mut Writer, f: &StackFrame) {
    w.u32(f.method.0);
    w.u32(f.current_object.0);
    w.u32(f.current_state.0);
    w.usize(f.locals.len());
    for v in &f.locals {
        write_value(w, v);
    }
    match &f.kind {
        FrameKind::Root => w.u8(0),
        FrameKind::LocalCall { return_place } => {
            w.u8(1);
            match return_place {
                None => w.u8(0),
                Some(p) => {
                    w.u8(1);
                    write_place(w, p);
                }
            }
        }
        FrameKind::Request { client, block, seq, reply_to } => {
            w.u8(2);
            w.u32(client.0);
            w.u32(block.0);
            w.u32(*seq);
            w.opt_u32(reply_to.map(|h| h.0));
        }
    }
    w.usize(f.blocks.len());
    for b in &f.blocks {
        write_block_instance(w, b);
    }
    match &f.pending {
        None => w.u8(0),
        Some(p) => {
            w.u8(1);
            write_pending(w, p);
        }
    }
}

fn write_handler(w: &mut Writer, h: &Handler) {
    w.u32(h.id.0);
    w.u32(h.node.0);
    w.usize(h.stack.len());
    for f in &h.stack {
        write_frame(w, f);
    }
    w.usize(h.heap.len());
    for (id, obj) in &h.heap {
        w.u32(id.0);
        w.u32(obj.class.0);
        w.usize(obj.attributes.len());
        for v in &obj.attributes {
            write_value(w, v);
        }
    }
    match &h.inbox {
        Inbox::Rq { queue, lock_owner } => {
            w.u8(0);
            w.opt_u32(lock_owner.map(|h| h.0));
            w.usize(queue.len());
            for r in queue {
                write_request(w, r);
            }
        }
        Inbox::Qoq { subqueues } => {
            w.u8(1);
            w.usize(subqueues.len());
            for s in subqueues {
                w.u32(s.owner_client.0);
                w.opt_u32(s.block.map(|b| b.0));
                w.u8(s.open as u8);
                w.usize(s.queue.len());
                for r in &s.queue {
                    write_request(w, r);
                }
            }
        }
    }
    w.usize(h.reply_outbox.len());
    for (to, v) in &h.reply_outbox {
        w.u32(to.0);
        write_value(w, v);
    }
    match &h.wait {
        None => w.u8(0),
        Some(Wait::QueryReply { place }) => {
            w.u8(1);
            write_place(w, place);
        }
    }
}
