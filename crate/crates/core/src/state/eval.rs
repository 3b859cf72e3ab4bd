//! Expression evaluation over a configuration.
//!
//! Statement-position expressions are query-free (the compiler hoists
//! queries into dedicated edges), so [`eval_expr`] is purely local. Wait
//! conditions keep inline queries on controlled targets; they are evaluated
//! by [`eval_wait_condition`] against the supplier heaps once the engine has
//! established that the suppliers are quiescent, interpreting the (checked
//! side-effect-free) query bodies functionally.

use super::config::{Configuration, Handler, HandlerId, ObjectId, Value};
use crate::frontend::ir::{
    Action, BinOp, CompiledProgram, Expr, MethodId, Place, TargetBase, TargetPath,
};

/// Step budget for functional interpretation of pure query bodies; exceeding
/// it (a diverging loop inside a wait condition) becomes a Stuck error.
pub const PURE_EVAL_STEP_BUDGET: u32 = 100_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvalError {
    VoidTarget { handler: HandlerId, detail: String },
    Overflow,
    Diverged,
}

struct Env<'a> {
    locals: &'a [Value],
    attrs: &'a [Value],
}

impl<'a> Env<'a> {
    fn read(&self, place: Place) -> Value {
        match place {
            Place::Local(i) => self.locals[i as usize],
            Place::Attr(i) => self.attrs[i as usize],
        }
    }
}

/// Evaluates a hoisted (query-free) expression in the context of `handler`'s
/// active frame. Integer arithmetic is checked 64-bit; overflow is an error.
pub fn eval_expr(cfg: &Configuration, handler: HandlerId, expr: &Expr) -> Result<Value, EvalError> {
    let h = cfg.handler(handler);
    let frame = h.top_frame().expect("eval_expr needs an active frame");
    let attrs = &h.heap[&frame.current_object].attributes;
    let env = Env { locals: &frame.locals, attrs };
    eval_in(&env, expr, &mut |_, _, _| {
        unreachable!("query call in a hoisted expression")
    })
}

fn eval_in(
    env: &Env,
    expr: &Expr,
    on_query: &mut dyn FnMut(&TargetPath, MethodId, Vec<Value>) -> Result<Value, EvalError>,
) -> Result<Value, EvalError> {
    match expr {
        Expr::Int(n) => Ok(Value::Int(*n)),
        Expr::Bool(b) => Ok(Value::Bool(*b)),
        Expr::Void => Ok(Value::Void),
        Expr::Read(place) => Ok(env.read(*place)),
        Expr::Not(inner) => match eval_in(env, inner, on_query)? {
            Value::Bool(b) => Ok(Value::Bool(!b)),
            other => unreachable!("`not` on {other:?}"),
        },
        Expr::Binary { op, lhs, rhs } => {
            let l = eval_in(env, lhs, on_query)?;
            let r = eval_in(env, rhs, on_query)?;
            apply_binop(*op, l, r)
        }
        Expr::Query { target, method, args } => {
            let mut vals = Vec::with_capacity(args.len());
            for a in args {
                vals.push(eval_in(env, a, on_query)?);
            }
            on_query(target, *method, vals)
        }
    }
}

fn apply_binop(op: BinOp, l: Value, r: Value) -> Result<Value, EvalError> {
    use Value::*;
    let int = |v: Value| match v {
        Int(n) => n,
        other => unreachable!("INTEGER operand expected, got {other:?}"),
    };
    let boolean = |v: Value| match v {
        Bool(b) => b,
        other => unreachable!("BOOLEAN operand expected, got {other:?}"),
    };
    Ok(match op {
        BinOp::Add => Int(int(l).checked_add(int(r)).ok_or(EvalError::Overflow)?),
        BinOp::Sub => Int(int(l).checked_sub(int(r)).ok_or(EvalError::Overflow)?),
        BinOp::Mul => Int(int(l).checked_mul(int(r)).ok_or(EvalError::Overflow)?),
        BinOp::Lt => Bool(int(l) < int(r)),
        BinOp::Le => Bool(int(l) <= int(r)),
        BinOp::Gt => Bool(int(l) > int(r)),
        BinOp::Ge => Bool(int(l) >= int(r)),
        BinOp::Eq => Bool(values_equal(l, r)),
        BinOp::Ne => Bool(!values_equal(l, r)),
        BinOp::And => Bool(boolean(l) && boolean(r)),
        BinOp::Or => Bool(boolean(l) || boolean(r)),
    })
}

fn values_equal(l: Value, r: Value) -> bool {
    use Value::*;
    match (l, r) {
        (Int(a), Int(b)) => a == b,
        (Bool(a), Bool(b)) => a == b,
        (Void, Void) => true,
        (Ref(h1, o1), Ref(h2, o2)) => (h1, o1) == (h2, o2),
        (Void, Ref(..)) | (Ref(..), Void) => false,
        other => unreachable!("incomparable values {other:?}"),
    }
}

/// Evaluates a wait condition for the handler sitting at an `EnterBlock`.
/// Inline queries on controlled targets are interpreted functionally against
/// the target handler's heap; the frontend guarantees those query bodies are
/// side-effect free.
pub fn eval_wait_condition(
    cfg: &Configuration,
    handler: HandlerId,
    expr: &Expr,
) -> Result<bool, EvalError> {
    let program = &cfg.program;
    let h = cfg.handler(handler);
    let frame = h.top_frame().expect("wait condition needs an active frame");
    let attrs = &h.heap[&frame.current_object].attributes;
    let env = Env { locals: &frame.locals, attrs };
    let mut budget = PURE_EVAL_STEP_BUDGET;
    let result = eval_in(&env, expr, &mut |target, method, args| {
        let (owner, object) = resolve_target(cfg, handler, frame.current_object, &env, target)?;
        interp_pure(program, cfg.handler(owner), object, method, args, &mut budget)
    })?;
    match result {
        Value::Bool(b) => Ok(b),
        other => unreachable!("wait condition evaluated to {other:?}"),
    }
}

/// Resolves a call target path to (handler, object), walking non-separate
/// attribute hops. A Void anywhere along the path is a VoidCall error.
fn resolve_target(
    cfg: &Configuration,
    client: HandlerId,
    current_object: ObjectId,
    env: &Env,
    target: &TargetPath,
) -> Result<(HandlerId, ObjectId), EvalError> {
    let mut at = match target.base {
        TargetBase::Current => (client, current_object),
        TargetBase::Place(place) => match env.read(place) {
            Value::Ref(h, o) => (h, o),
            Value::Void => {
                return Err(EvalError::VoidTarget {
                    handler: client,
                    detail: "call target is Void".to_string(),
                })
            }
            other => unreachable!("call target is {other:?}"),
        },
    };
    for &field in &target.fields {
        let obj = cfg
            .object(at.0, at.1)
            .expect("heap ownership: target object exists");
        match obj.attributes[field as usize] {
            Value::Ref(h, o) => at = (h, o),
            Value::Void => {
                return Err(EvalError::VoidTarget {
                    handler: client,
                    detail: "attribute hop through Void".to_string(),
                })
            }
            other => unreachable!("path hop through {other:?}"),
        }
    }
    Ok(at)
}

/// Engine-facing variant of [`resolve_target`] reading from a handler frame.
pub fn resolve_call_target(
    cfg: &Configuration,
    handler: HandlerId,
    target: &TargetPath,
) -> Result<(HandlerId, ObjectId), EvalError> {
    let h = cfg.handler(handler);
    let frame = h.top_frame().expect("active frame");
    let attrs = &h.heap[&frame.current_object].attributes;
    let env = Env { locals: &frame.locals, attrs };
    resolve_target(cfg, handler, frame.current_object, &env, target)
}

/// Functional interpretation of a pure query body over a (read-only) heap.
/// Only the action kinds a pure-local body can contain are handled.
fn interp_pure(
    program: &CompiledProgram,
    owner: &Handler,
    object: ObjectId,
    method_id: MethodId,
    args: Vec<Value>,
    budget: &mut u32,
) -> Result<Value, EvalError> {
    let method = program.method(method_id);
    debug_assert!(method.pure_local, "wait-condition query must be pure");
    let mut locals: Vec<Value> = method
        .vars
        .iter()
        .map(|v| program.default_value_of(&v.ty))
        .collect();
    locals[..args.len()].copy_from_slice(&args);
    let attrs = &owner.heap[&object].attributes;
    let mut state = method.cfg.initial;
    while state != method.cfg.final_state {
        *budget = budget.checked_sub(1).ok_or(EvalError::Diverged)?;
        if *budget == 0 {
            return Err(EvalError::Diverged);
        }
        let out: Vec<_> = method.cfg.out_edges(state).collect();
        let env = Env { locals: &locals, attrs };
        if out.len() == 2 {
            // complementary guards
            let mut next = None;
            for edge in &out {
                let Action::Guard { expr, polarity } = &edge.action else {
                    unreachable!("branch without guards in pure body")
                };
                let cond = eval_in(&env, expr, &mut |t, m, a| {
                    let (h, o) = resolve_pure_target(owner, object, &env, t)?;
                    debug_assert_eq!(h, owner.id);
                    interp_pure(program, owner, o, m, a, budget)
                })?;
                if matches!(cond, Value::Bool(b) if b == *polarity) {
                    next = Some(edge.to);
                    break;
                }
            }
            state = next.expect("complementary guards cover both cases");
            continue;
        }
        let edge = out[0];
        match &edge.action {
            Action::AssignLocal { place, expr } => {
                let value = eval_in(&env, expr, &mut |t, m, a| {
                    let (h, o) = resolve_pure_target(owner, object, &env, t)?;
                    debug_assert_eq!(h, owner.id);
                    interp_pure(program, owner, o, m, a, budget)
                })?;
                let Place::Local(i) = place else {
                    unreachable!("pure body writing an attribute")
                };
                locals[*i as usize] = value;
            }
            Action::QueryCall { place, target, method: m, args } => {
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(eval_in(&env, a, &mut |t, mm, aa| {
                        let (h, o) = resolve_pure_target(owner, object, &env, t)?;
                        debug_assert_eq!(h, owner.id);
                        interp_pure(program, owner, o, mm, aa, budget)
                    })?);
                }
                let (h, o) = resolve_pure_target(owner, object, &env, target)?;
                debug_assert_eq!(h, owner.id, "pure query must stay on its handler");
                let value = interp_pure(program, owner, o, *m, vals, budget)?;
                let Place::Local(i) = place else {
                    unreachable!("pure body writing an attribute")
                };
                locals[*i as usize] = value;
            }
            Action::Return => {
                state = edge.to;
                continue;
            }
            other => unreachable!("impure action {other:?} in pure body"),
        }
        state = edge.to;
    }
    let result_index = method.result_index.expect("wait-condition query has a result");
    Ok(locals[result_index])
}

fn resolve_pure_target(
    owner: &Handler,
    object: ObjectId,
    env: &Env,
    target: &TargetPath,
) -> Result<(HandlerId, ObjectId), EvalError> {
    let mut at = match target.base {
        TargetBase::Current => (owner.id, object),
        TargetBase::Place(place) => match env.read(place) {
            Value::Ref(h, o) => (h, o),
            Value::Void => {
                return Err(EvalError::VoidTarget {
                    handler: owner.id,
                    detail: "call target is Void inside query body".to_string(),
                })
            }
            other => unreachable!("call target is {other:?}"),
        },
    };
    for &field in &target.fields {
        let obj = owner.heap.get(&at.1).expect("pure target object exists");
        match obj.attributes[field as usize] {
            Value::Ref(h, o) => at = (h, o),
            Value::Void => {
                return Err(EvalError::VoidTarget {
                    handler: owner.id,
                    detail: "attribute hop through Void".to_string(),
                })
            }
            other => unreachable!("path hop through {other:?}"),
        }
    }
    Ok(at)
}
