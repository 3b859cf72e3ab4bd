//! Surface syntax tree produced by the parser. Name resolution and typing
//! happen later, in `check`; lowering to control-flow graphs in `compile`.

use crate::diag::Pos;

#[derive(Debug, Clone)]
pub struct Program {
    pub classes: Vec<ClassDecl>,
}

#[derive(Debug, Clone)]
pub struct ClassDecl {
    pub name: String,
    pub pos: Pos,
    pub features: Vec<Feature>,
}

#[derive(Debug, Clone)]
pub enum Feature {
    Attribute(Attribute),
    Method(MethodDecl),
}

#[derive(Debug, Clone)]
pub struct Attribute {
    pub name: String,
    pub pos: Pos,
    pub ty: TypeRef,
}

#[derive(Debug, Clone)]
pub struct MethodDecl {
    pub name: String,
    pub pos: Pos,
    pub formals: Vec<Formal>,
    pub return_type: Option<TypeRef>,
    /// `require` clauses, re-interpreted as a wait condition (conjunction).
    pub require: Vec<Expr>,
    /// `ensure` clauses are accepted syntactically but ignored with a warning.
    pub ensure: Vec<Expr>,
    pub locals: Vec<Formal>,
    pub body: Vec<Stmt>,
}

impl MethodDecl {
    pub fn is_query(&self) -> bool {
        self.return_type.is_some()
    }
}

#[derive(Debug, Clone)]
pub struct Formal {
    pub name: String,
    pub pos: Pos,
    pub ty: TypeRef,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeRef {
    pub base: TypeBase,
    pub separate: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypeBase {
    Integer,
    Boolean,
    Class(String),
}

#[derive(Debug, Clone)]
pub enum Stmt {
    /// `create x` or `create x.make (args)`
    Create {
        pos: Pos,
        name: String,
        ctor: Option<(String, Vec<Expr>)>,
    },
    /// `x := e`
    Assign {
        pos: Pos,
        name: String,
        expr: Expr,
    },
    /// `m`, `m (args)`, `x.m`, `x.y.m (args)`; `path` holds everything before
    /// the final method name (empty for an unqualified self call).
    Call {
        pos: Pos,
        path: Vec<String>,
        method: String,
        args: Vec<Expr>,
    },
    If {
        pos: Pos,
        cond: Expr,
        then_branch: Vec<Stmt>,
        else_branch: Vec<Stmt>,
    },
    /// `from init until cond loop body end`
    Loop {
        pos: Pos,
        init: Vec<Stmt>,
        until: Expr,
        body: Vec<Stmt>,
    },
    /// `separate x, y do body end`
    Separate {
        pos: Pos,
        names: Vec<String>,
        body: Vec<Stmt>,
    },
}

#[derive(Debug, Clone)]
pub enum Expr {
    Int(Pos, i64),
    Bool(Pos, bool),
    Void(Pos),
    /// Local, formal, `Result`, or attribute read.
    Name(Pos, String),
    /// Query call; `path` as in `Stmt::Call`. A trailing name without
    /// arguments also parses here (`x.get_colour`), never as a field read.
    Call {
        pos: Pos,
        path: Vec<String>,
        method: String,
        args: Vec<Expr>,
    },
    Binary {
        pos: Pos,
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Not(Pos, Box<Expr>),
}

impl Expr {
    pub fn pos(&self) -> Pos {
        match self {
            Expr::Int(p, _)
            | Expr::Bool(p, _)
            | Expr::Void(p)
            | Expr::Name(p, _)
            | Expr::Call { pos: p, .. }
            | Expr::Binary { pos: p, .. }
            | Expr::Not(p, _) => *p,
        }
    }
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

impl BinOp {
    pub fn symbol(&self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Eq => "=",
            BinOp::Ne => "/=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "and",
            BinOp::Or => "or",
        }
    }
}
