//! Compiled program representation: flat class/method tables and per-method
//! control-flow graphs. The static part of a configuration; it never changes
//! during simulation.

use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;

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

id_type!(ClassId);
id_type!(MethodId);
id_type!(
    /// A control state within one method's CFG.
    StateId
);
id_type!(
    /// A static separate block (one per syntactic block, per method).
    BlockId
);

/// Base of a compiled type.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TypeBase {
    Integer,
    Boolean,
    Class(ClassId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Type {
    pub base: TypeBase,
    pub separate: bool,
}

impl Type {
    pub const INTEGER: Type = Type { base: TypeBase::Integer, separate: false };
    pub const BOOLEAN: Type = Type { base: TypeBase::Boolean, separate: false };

    pub fn class(id: ClassId, separate: bool) -> Type {
        Type { base: TypeBase::Class(id), separate }
    }

    pub fn is_reference(&self) -> bool {
        matches!(self.base, TypeBase::Class(_))
    }
}

/// A storage slot in a stack frame (formal/local/Result/temporary) or an
/// attribute of the current object.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Place {
    Local(u16),
    Attr(u16),
}

/// Start of a call target path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetBase {
    /// Unqualified self call.
    Current,
    Place(Place),
}

/// A call target: a base followed by zero or more non-separate attribute
/// hops (`a.b.m` navigates `b` locally before calling `m`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetPath {
    pub base: TargetBase,
    pub fields: Vec<u16>,
}

impl TargetPath {
    pub fn place(base: Place) -> TargetPath {
        TargetPath { base: TargetBase::Place(base), fields: Vec::new() }
    }

    pub fn current() -> TargetPath {
        TargetPath { base: TargetBase::Current, fields: Vec::new() }
    }
}

/// Compiled expression. Query calls are hoisted out of statement expressions
/// into dedicated [`Action::QueryCall`] edges; `Query` nodes remain only
/// inside wait conditions, where they are evaluated against the supplier's
/// heap once the supplier is quiescent.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Int(i64),
    Bool(bool),
    Void,
    Read(Place),
    Query {
        target: TargetPath,
        method: MethodId,
        args: Vec<Expr>,
    },
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Not(Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

/// One CFG edge label.
#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    AssignLocal {
        place: Place,
        expr: Expr,
    },
    CreateObject {
        place: Place,
        class: ClassId,
        ctor: Option<MethodId>,
        args: Vec<Expr>,
        separate: bool,
    },
    CommandCall {
        target: TargetPath,
        method: MethodId,
        args: Vec<Expr>,
    },
    QueryCall {
        place: Place,
        target: TargetPath,
        method: MethodId,
        args: Vec<Expr>,
    },
    EnterBlock {
        block: BlockId,
        targets: Vec<Place>,
        wait: Option<Expr>,
    },
    ExitBlock {
        block: BlockId,
    },
    Guard {
        expr: Expr,
        polarity: bool,
    },
    Return,
}

#[derive(Debug, Clone)]
pub struct Edge {
    pub from: StateId,
    pub action: Action,
    pub to: StateId,
}

/// Control-flow graph of one method. States are numbered densely in lowering
/// order, so identical source yields identical CFGs.
#[derive(Debug, Clone)]
pub struct Cfg {
    pub state_count: u32,
    pub initial: StateId,
    pub final_state: StateId,
    pub edges: Vec<Edge>,
    /// Outgoing edge indices per state.
    pub out: Vec<Vec<u32>>,
}

impl Cfg {
    pub fn out_edges(&self, state: StateId) -> impl Iterator<Item = &Edge> {
        self.out[state.0 as usize].iter().map(|&i| &self.edges[i as usize])
    }

    /// The unique outgoing edge, if the state is not a guard branch point.
    pub fn sole_edge(&self, state: StateId) -> Option<&Edge> {
        let out = &self.out[state.0 as usize];
        if out.len() == 1 {
            Some(&self.edges[out[0] as usize])
        } else {
            None
        }
    }
}

#[derive(Debug, Clone)]
pub struct VarInfo {
    pub name: String,
    pub ty: Type,
    /// Compiler-introduced temporary holding a hoisted query result; cleared
    /// once the action that reads it has fired.
    pub is_temp: bool,
}

#[derive(Debug, Clone)]
pub struct ClassInfo {
    pub name: String,
    pub attributes: Vec<VarInfo>,
    pub methods: BTreeMap<String, MethodId>,
}

impl ClassInfo {
    pub fn attr_index(&self, name: &str) -> Option<u16> {
        self.attributes.iter().position(|a| a.name == name).map(|i| i as u16)
    }
}

#[derive(Debug, Clone)]
pub struct MethodInfo {
    pub class: ClassId,
    pub name: String,
    /// Frame variable layout: formals, then `Result` (queries), then declared
    /// locals, then hoisting temporaries.
    pub vars: Vec<VarInfo>,
    pub formal_count: usize,
    pub result_index: Option<usize>,
    pub return_type: Option<Type>,
    /// Indices (into `vars`) of formals with separate type.
    pub controlled_formals: Vec<usize>,
    pub wait_condition: Option<Expr>,
    /// The implicit separate block wrapping the body, present when the method
    /// has controlled formals or a wait condition.
    pub implicit_block: Option<BlockId>,
    /// True when the body only reads state and writes its own locals; such
    /// queries may appear inside wait conditions.
    pub pure_local: bool,
    pub cfg: Cfg,
}

impl MethodInfo {
    pub fn is_query(&self) -> bool {
        self.return_type.is_some()
    }
}

/// Static data about one separate block.
#[derive(Debug, Clone)]
pub struct BlockInfo {
    pub method: MethodId,
    /// 0 for the implicit method block, then explicit blocks in source order.
    pub index_in_method: u16,
}

#[derive(Debug)]
pub struct CompiledProgram {
    pub classes: Vec<ClassInfo>,
    pub methods: Vec<MethodInfo>,
    pub blocks: Vec<BlockInfo>,
    pub entry: MethodId,
}

impl CompiledProgram {
    pub fn class(&self, id: ClassId) -> &ClassInfo {
        &self.classes[id.0 as usize]
    }

    pub fn method(&self, id: MethodId) -> &MethodInfo {
        &self.methods[id.0 as usize]
    }

    pub fn block(&self, id: BlockId) -> &BlockInfo {
        &self.blocks[id.0 as usize]
    }

    pub fn class_named(&self, name: &str) -> Option<ClassId> {
        self.classes
            .iter()
            .position(|c| c.name == name)
            .map(|i| ClassId(i as u32))
    }

    pub fn method_of(&self, class: ClassId, name: &str) -> Option<MethodId> {
        self.class(class).methods.get(name).copied()
    }

    pub fn default_value_of(&self, ty: &Type) -> crate::state::Value {
        use crate::state::Value;
        match ty.base {
            TypeBase::Integer => Value::Int(0),
            TypeBase::Boolean => Value::Bool(false),
            TypeBase::Class(_) => Value::Void,
        }
    }
}
