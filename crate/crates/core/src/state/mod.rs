//! Dynamic configuration model: handlers with stacks, heaps and inboxes, the
//! topology abstraction, and deterministic canonicalization over all of it.
//!
//! Configurations are immutable values as far as the engine is concerned:
//! every transition clones and returns a new configuration.

mod canon;
mod config;
mod eval;

pub use canon::canonical_key;
pub use config::*;
pub use eval::{eval_expr, eval_wait_condition, resolve_call_target, EvalError, PURE_EVAL_STEP_BUDGET};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::compile_source;
    use crate::frontend::ir::{BinOp, Expr, Place};
    use std::collections::VecDeque;

    fn initial_for(src: &str) -> Configuration {
        let program = compile_source(src).expect("compiles");
        load_initial(&program, Inbox::Rq { queue: VecDeque::new(), lock_owner: None })
    }

    const SMALL: &str = "
class APPLICATION
  counter: INTEGER
  make
    local
      times_to_eat: INTEGER
    do
      counter := 1
    end
end";

    #[test]
    fn eval_arithmetic_and_comparison() {
        let cfg = initial_for(SMALL);
        let sum = Expr::Binary {
            op: BinOp::Add,
            lhs: Box::new(Expr::Int(1)),
            rhs: Box::new(Expr::Int(2)),
        };
        assert_eq!(eval_expr(&cfg, HandlerId(0), &sum), Ok(Value::Int(3)));
        // times_to_eat < 1 with the local still at its default 0
        let cmp = Expr::Binary {
            op: BinOp::Lt,
            lhs: Box::new(Expr::Read(Place::Local(0))),
            rhs: Box::new(Expr::Int(1)),
        };
        assert_eq!(eval_expr(&cfg, HandlerId(0), &cmp), Ok(Value::Bool(true)));
    }

    #[test]
    fn eval_overflow_is_an_error() {
        let cfg = initial_for(SMALL);
        let overflow = Expr::Binary {
            op: BinOp::Add,
            lhs: Box::new(Expr::Int(i64::MAX)),
            rhs: Box::new(Expr::Int(1)),
        };
        assert_eq!(eval_expr(&cfg, HandlerId(0), &overflow), Err(EvalError::Overflow));
    }

    #[test]
    fn canonical_key_distinguishes_and_matches() {
        let cfg = initial_for(SMALL);
        let copy = cfg.clone();
        assert_eq!(canonical_key(&cfg), canonical_key(&copy));
        let mut changed = cfg.clone();
        changed.handler_mut(HandlerId(0)).top_frame_mut().unwrap().locals[0] = Value::Int(7);
        assert_ne!(canonical_key(&cfg), canonical_key(&changed));
    }

    #[test]
    fn load_twice_is_deterministic() {
        let a = initial_for(SMALL);
        let b = initial_for(SMALL);
        assert_eq!(canonical_key(&a), canonical_key(&b));
    }

    #[test]
    fn initial_shape() {
        let cfg = initial_for(SMALL);
        assert_eq!(cfg.handlers.len(), 1);
        assert_eq!(cfg.handler(HandlerId(0)).heap.len(), 1);
        assert!(cfg.error.is_none());
        assert!(cfg.handler(HandlerId(0)).inbox.is_empty());
        // locals initialised to their type defaults
        let frame = cfg.handler(HandlerId(0)).top_frame().unwrap();
        assert_eq!(frame.locals[0], Value::Int(0));
    }

    #[test]
    fn gc_removes_drained_closed_subqueues_only() {
        let program = compile_source(SMALL).expect("compiles");
        let mut cfg = load_initial(&program, Inbox::Qoq { subqueues: VecDeque::new() });
        let h = HandlerId(0);
        let drained = Subqueue {
            owner_client: h,
            block: Some(BlockInstanceId(0)),
            open: false,
            queue: VecDeque::new(),
        };
        let open_empty = Subqueue {
            owner_client: h,
            block: Some(BlockInstanceId(1)),
            open: true,
            queue: VecDeque::new(),
        };
        match &mut cfg.handler_mut(h).inbox {
            Inbox::Qoq { subqueues } => {
                subqueues.push_back(drained);
                subqueues.push_back(open_empty);
            }
            _ => unreachable!(),
        }
        cfg.gc();
        match &cfg.handler(h).inbox {
            Inbox::Qoq { subqueues } => {
                assert_eq!(subqueues.len(), 1);
                assert!(subqueues[0].open);
            }
            _ => unreachable!(),
        }
        // unreachable heap objects are retained
        let before_heap = cfg.handler(h).heap.len();
        cfg.gc();
        assert_eq!(cfg.handler(h).heap.len(), before_heap);
        // idempotent
        let key = canonical_key(&cfg);
        cfg.gc();
        assert_eq!(canonical_key(&cfg), key);
    }

    #[test]
    fn dump_format_is_stable() {
        let cfg = initial_for(SMALL);
        let expected = "configuration: handlers=1 next_object=1 next_block=0 nodes=1
handler 0 on node 0:
  frame APPLICATION.make at s0 obj 0 [times_to_eat=0]
  object 0 APPLICATION [counter=0]
  inbox rq lock=free
";
        assert_eq!(cfg.dump(), expected);
    }
}
