//! Semantic checks over the surface AST: name resolution, typing, the
//! controlled-call rule for separate targets, and wait-condition restrictions.
//!
//! All findings come back as diagnostics; an empty error set means the
//! program is ready for `compile`.

use super::ast::*;
use crate::diag::{Diagnostic, Pos};
use std::collections::{BTreeMap, BTreeSet};

pub const ENTRY_CLASS: &str = "APPLICATION";
pub const ENTRY_METHOD: &str = "make";

/// Class/feature lookup tables shared by `check` and `compile`.
pub(crate) struct Tables<'a> {
    pub classes: Vec<ClassEntry<'a>>,
    pub by_name: BTreeMap<&'a str, usize>,
}

pub(crate) struct ClassEntry<'a> {
    pub decl: &'a ClassDecl,
    pub attrs: Vec<&'a Attribute>,
    pub methods: Vec<&'a MethodDecl>,
}

impl<'a> ClassEntry<'a> {
    pub fn attr(&self, name: &str) -> Option<&'a Attribute> {
        self.attrs.iter().find(|a| a.name == name).copied()
    }

    pub fn method(&self, name: &str) -> Option<&'a MethodDecl> {
        self.methods.iter().find(|m| m.name == name).copied()
    }
}

impl<'a> Tables<'a> {
    pub fn build(program: &'a Program) -> Tables<'a> {
        let mut classes = Vec::new();
        let mut by_name = BTreeMap::new();
        for class in &program.classes {
            let mut entry = ClassEntry { decl: class, attrs: Vec::new(), methods: Vec::new() };
            for feature in &class.features {
                match feature {
                    Feature::Attribute(a) => entry.attrs.push(a),
                    Feature::Method(m) => entry.methods.push(m),
                }
            }
            let idx = classes.len();
            classes.push(entry);
            by_name.entry(class.name.as_str()).or_insert(idx);
        }
        Tables { classes, by_name }
    }

    pub fn class_index(&self, name: &str) -> Option<usize> {
        self.by_name.get(name).copied()
    }
}

/// Checked type of an expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Ty {
    Int,
    Bool,
    Class { id: usize, separate: bool },
    /// The `Void` literal: assignable to and comparable with any reference.
    VoidRef,
    /// Error recovery: compatible with everything.
    Unknown,
}

impl Ty {
    fn is_reference(self) -> bool {
        matches!(self, Ty::Class { .. } | Ty::VoidRef | Ty::Unknown)
    }
}

fn describe(ty: Ty, tables: &Tables) -> String {
    match ty {
        Ty::Int => "INTEGER".into(),
        Ty::Bool => "BOOLEAN".into(),
        Ty::Class { id, separate } => {
            let name = tables.classes[id].decl.name.as_str();
            if separate {
                format!("separate {name}")
            } else {
                name.to_string()
            }
        }
        Ty::VoidRef => "Void".into(),
        Ty::Unknown => "<error>".into(),
    }
}

pub fn check(program: &Program) -> Vec<Diagnostic> {
    let tables = Tables::build(program);
    let mut diags = Vec::new();

    check_declarations(program, &tables, &mut diags);
    check_entry(&tables, &mut diags);
    for entry in &tables.classes {
        for method in &entry.methods {
            MethodChecker::new(&tables, entry, method, &mut diags).run();
        }
    }
    diags
}

fn check_declarations(program: &Program, tables: &Tables, diags: &mut Vec<Diagnostic>) {
    let mut seen_classes = BTreeSet::new();
    for class in &program.classes {
        if !seen_classes.insert(class.name.as_str()) {
            diags.push(Diagnostic::error(
                class.pos,
                format!("duplicate class `{}`", class.name),
            ));
        }
        let mut feature_names: BTreeMap<&str, Pos> = BTreeMap::new();
        for feature in &class.features {
            let (name, pos) = match feature {
                Feature::Attribute(a) => (a.name.as_str(), a.pos),
                Feature::Method(m) => (m.name.as_str(), m.pos),
            };
            if feature_names.insert(name, pos).is_some() {
                diags.push(Diagnostic::error(
                    pos,
                    format!("duplicate feature `{name}` in class `{}`", class.name),
                ));
            }
        }
        for feature in &class.features {
            if let Feature::Attribute(a) = feature {
                check_type(&a.ty, a.pos, tables, diags);
            }
        }
    }
}

fn check_type(ty: &TypeRef, pos: Pos, tables: &Tables, diags: &mut Vec<Diagnostic>) -> Ty {
    match &ty.base {
        TypeBase::Integer | TypeBase::Boolean => {
            if ty.separate {
                diags.push(Diagnostic::error(
                    pos,
                    "INTEGER and BOOLEAN cannot be separate",
                ));
            }
            if matches!(ty.base, TypeBase::Integer) {
                Ty::Int
            } else {
                Ty::Bool
            }
        }
        TypeBase::Class(name) => match tables.class_index(name) {
            Some(id) => Ty::Class { id, separate: ty.separate },
            None => {
                diags.push(Diagnostic::error(pos, format!("unknown class `{name}`")));
                Ty::Unknown
            }
        },
    }
}

fn check_entry(tables: &Tables, diags: &mut Vec<Diagnostic>) {
    let Some(idx) = tables.class_index(ENTRY_CLASS) else {
        diags.push(Diagnostic::error(
            Pos::default(),
            format!("no `{ENTRY_CLASS}` class: the entry point is {ENTRY_CLASS}.{ENTRY_METHOD}"),
        ));
        return;
    };
    let entry = &tables.classes[idx];
    match entry.method(ENTRY_METHOD) {
        None => diags.push(Diagnostic::error(
            entry.decl.pos,
            format!("class `{ENTRY_CLASS}` has no `{ENTRY_METHOD}` method"),
        )),
        Some(m) => {
            if !m.formals.is_empty() {
                diags.push(Diagnostic::error(
                    m.pos,
                    format!("entry method `{ENTRY_METHOD}` must have no formals"),
                ));
            }
            if m.return_type.is_some() {
                diags.push(Diagnostic::error(
                    m.pos,
                    format!("entry method `{ENTRY_METHOD}` must be a command"),
                ));
            }
        }
    }
}

#[derive(Clone, Copy)]
enum VarKind {
    Formal,
    Local,
    Result,
    Attribute,
}

struct MethodChecker<'a, 'd> {
    tables: &'a Tables<'a>,
    class: &'a ClassEntry<'a>,
    method: &'a MethodDecl,
    diags: &'d mut Vec<Diagnostic>,
    /// name -> (kind, type)
    scope: BTreeMap<&'a str, (VarKind, Ty)>,
    /// Names currently controlled by an enclosing separate block (including
    /// the implicit block over separate formals).
    controlled: Vec<BTreeSet<&'a str>>,
}

impl<'a, 'd> MethodChecker<'a, 'd> {
    fn new(
        tables: &'a Tables<'a>,
        class: &'a ClassEntry<'a>,
        method: &'a MethodDecl,
        diags: &'d mut Vec<Diagnostic>,
    ) -> Self {
        MethodChecker {
            tables,
            class,
            method,
            diags,
            scope: BTreeMap::new(),
            controlled: Vec::new(),
        }
    }

    fn error(&mut self, pos: Pos, message: impl Into<String>) {
        self.diags.push(Diagnostic::error(pos, message));
    }

    fn run(&mut self) {
        // Attributes are visible unless shadowed by formals/locals.
        for attr in &self.class.attrs {
            let ty = resolve_type(&attr.ty, self.tables);
            self.scope.insert(attr.name.as_str(), (VarKind::Attribute, ty));
        }
        let mut controlled_formals = BTreeSet::new();
        for formal in &self.method.formals {
            let ty = check_type(&formal.ty, formal.pos, self.tables, self.diags);
            if self.scope.insert(formal.name.as_str(), (VarKind::Formal, ty)).is_some()
                && self.method.formals.iter().filter(|f| f.name == formal.name).count() > 1
            {
                self.error(formal.pos, format!("duplicate formal `{}`", formal.name));
            }
            if formal.ty.separate {
                controlled_formals.insert(formal.name.as_str());
            }
        }
        for local in &self.method.locals {
            let ty = check_type(&local.ty, local.pos, self.tables, self.diags);
            if local.name == "Result" {
                self.error(local.pos, "`Result` cannot be declared explicitly");
                continue;
            }
            if self
                .method
                .formals
                .iter()
                .any(|f| f.name == local.name)
            {
                self.error(
                    local.pos,
                    format!("local `{}` shadows a formal", local.name),
                );
                continue;
            }
            if matches!(self.scope.get(local.name.as_str()), Some((VarKind::Local, _))) {
                self.error(local.pos, format!("duplicate local `{}`", local.name));
            }
            self.scope.insert(local.name.as_str(), (VarKind::Local, ty));
        }
        if let Some(rt) = &self.method.return_type {
            let ty = check_type(rt, self.method.pos, self.tables, self.diags);
            self.scope.insert("Result", (VarKind::Result, ty));
        }

        // The body of a method with separate formals is an implicit separate
        // block over them.
        self.controlled.push(controlled_formals);
        self.check_wait_condition();
        if !self.method.ensure.is_empty() {
            self.diags.push(Diagnostic::warning(
                self.method.pos,
                format!(
                    "postconditions of `{}` are ignored (no concurrent re-interpretation)",
                    self.method.name
                ),
            ));
        }
        let body = &self.method.body;
        self.check_stmts(body);
        self.controlled.pop();
    }

    fn is_controlled(&self, name: &str) -> bool {
        self.controlled.iter().any(|set| set.contains(name))
    }

    fn check_stmts(&mut self, stmts: &'a [Stmt]) {
        for stmt in stmts {
            self.check_stmt(stmt);
        }
    }

    fn check_stmt(&mut self, stmt: &'a Stmt) {
        match stmt {
            Stmt::Assign { pos, name, expr } => {
                let value_ty = self.check_expr(expr);
                let Some(&(kind, ty)) = self.scope.get(name.as_str()) else {
                    self.error(*pos, format!("unknown name `{name}`"));
                    return;
                };
                match kind {
                    VarKind::Formal => {
                        self.error(*pos, format!("cannot assign to formal `{name}`"));
                        return;
                    }
                    VarKind::Result => {
                        if self.method.return_type.is_none() {
                            self.error(*pos, "`Result` is only available in queries");
                            return;
                        }
                    }
                    VarKind::Local | VarKind::Attribute => {}
                }
                if self.is_controlled(name) {
                    self.error(
                        *pos,
                        format!("cannot assign to `{name}` while it is controlled by a separate block"),
                    );
                }
                self.require_assignable(*pos, ty, value_ty);
            }
            Stmt::Create { pos, name, ctor } => {
                let Some(&(kind, ty)) = self.scope.get(name.as_str()) else {
                    self.error(*pos, format!("unknown name `{name}`"));
                    return;
                };
                if matches!(kind, VarKind::Formal) {
                    self.error(*pos, format!("cannot create into formal `{name}`"));
                }
                if self.is_controlled(name) {
                    self.error(
                        *pos,
                        format!("cannot create `{name}` while it is controlled by a separate block"),
                    );
                }
                let Ty::Class { id, .. } = ty else {
                    if ty != Ty::Unknown {
                        self.error(*pos, format!("`create` needs a class-typed target, `{name}` is {}", describe(ty, self.tables)));
                    }
                    return;
                };
                if let Some((ctor_name, args)) = ctor {
                    let class = &self.tables.classes[id];
                    match class.method(ctor_name) {
                        None => self.error(
                            *pos,
                            format!(
                                "class `{}` has no creation procedure `{ctor_name}`",
                                class.decl.name
                            ),
                        ),
                        Some(m) => {
                            if m.return_type.is_some() {
                                self.error(*pos, format!("creation procedure `{ctor_name}` must be a command"));
                            }
                            self.check_args(*pos, m, args, ctor_name);
                        }
                    }
                } else {
                    // plain `create x`: default-initialised object
                }
            }
            Stmt::Call { pos, path, method, args } => {
                let Some((target_class, target_separate)) = self.resolve_call_target(*pos, path) else {
                    // diagnostics already emitted; still check arguments
                    for arg in args {
                        self.check_expr(arg);
                    }
                    return;
                };
                if target_separate {
                    // A separate call must target a controlled name directly.
                    let base = &path[0];
                    if !self.is_controlled(base) {
                        self.error(
                            *pos,
                            format!("uncontrolled separate call: `{base}` is not controlled by any separate block here"),
                        );
                    }
                }
                match target_class {
                    None => {
                        for arg in args {
                            self.check_expr(arg);
                        }
                    }
                    Some(class_idx) => {
                        let class = &self.tables.classes[class_idx];
                        match class.method(method) {
                            None => self.error(
                                *pos,
                                format!("class `{}` has no method `{method}`", class.decl.name),
                            ),
                            Some(m) => {
                                if m.return_type.is_some() {
                                    self.error(
                                        *pos,
                                        format!("result of query `{method}` is discarded; call it in an expression"),
                                    );
                                }
                                self.check_args(*pos, m, args, method);
                            }
                        }
                    }
                }
            }
            Stmt::If { pos, cond, then_branch, else_branch } => {
                let ty = self.check_expr(cond);
                self.require_bool(*pos, ty, "if condition");
                self.check_stmts(then_branch);
                self.check_stmts(else_branch);
            }
            Stmt::Loop { pos, init, until, body } => {
                self.check_stmts(init);
                let ty = self.check_expr(until);
                self.require_bool(*pos, ty, "until condition");
                self.check_stmts(body);
            }
            Stmt::Separate { pos, names, body } => {
                let mut set = BTreeSet::new();
                for name in names {
                    match self.scope.get(name.as_str()) {
                        None => self.error(*pos, format!("unknown name `{name}`")),
                        Some(&(_, ty)) => match ty {
                            Ty::Class { separate: true, .. } => {
                                set.insert(name.as_str());
                            }
                            Ty::Unknown => {}
                            _ => self.error(
                                *pos,
                                format!(
                                    "separate block target `{name}` must have separate type, found {}",
                                    describe(ty, self.tables)
                                ),
                            ),
                        },
                    }
                }
                self.controlled.push(set);
                self.check_stmts(body);
                self.controlled.pop();
            }
        }
    }

    /// Resolves a call path up to (but excluding) the method segment.
    /// Returns the class index of the receiver (None if unknown but already
    /// diagnosed or recovery) and whether the receiver is separate-typed.
    fn resolve_call_target(&mut self, pos: Pos, path: &[String]) -> Option<(Option<usize>, bool)> {
        if path.is_empty() {
            // unqualified self call
            let idx = self.tables.class_index(&self.class.decl.name);
            return Some((idx, false));
        }
        let base = &path[0];
        let Some(&(_, base_ty)) = self.scope.get(base.as_str()) else {
            self.error(pos, format!("unknown name `{base}`"));
            return None;
        };
        let (mut class_idx, separate) = match base_ty {
            Ty::Class { id, separate } => (id, separate),
            Ty::Unknown => return Some((None, false)),
            _ => {
                self.error(
                    pos,
                    format!("`{base}` is {}, not an object", describe(base_ty, self.tables)),
                );
                return None;
            }
        };
        if separate && path.len() > 1 {
            self.error(
                pos,
                format!("cannot navigate through separate `{base}`; call a query instead"),
            );
            return None;
        }
        for hop in &path[1..] {
            let class = &self.tables.classes[class_idx];
            let Some(attr) = class.attr(hop) else {
                self.error(
                    pos,
                    format!("class `{}` has no attribute `{hop}`", class.decl.name),
                );
                return None;
            };
            match resolve_type(&attr.ty, self.tables) {
                Ty::Class { id, separate: false } => class_idx = id,
                Ty::Class { separate: true, .. } => {
                    self.error(
                        pos,
                        format!("cannot navigate through separate attribute `{hop}`"),
                    );
                    return None;
                }
                Ty::Unknown => return Some((None, false)),
                other => {
                    self.error(
                        pos,
                        format!("`{hop}` is {}, not an object", describe(other, self.tables)),
                    );
                    return None;
                }
            }
        }
        Some((Some(class_idx), separate))
    }

    fn check_args(&mut self, pos: Pos, method: &MethodDecl, args: &[Expr], name: &str) {
        if method.formals.len() != args.len() {
            self.error(
                pos,
                format!(
                    "`{name}` takes {} argument(s), {} given",
                    method.formals.len(),
                    args.len()
                ),
            );
        }
        for (formal, arg) in method.formals.iter().zip(args) {
            let arg_ty = self.check_expr(arg);
            let formal_ty = resolve_type(&formal.ty, self.tables);
            self.require_assignable(arg.pos(), formal_ty, arg_ty);
        }
        for arg in args.iter().skip(method.formals.len()) {
            self.check_expr(arg);
        }
    }

    fn require_bool(&mut self, pos: Pos, ty: Ty, what: &str) {
        if !matches!(ty, Ty::Bool | Ty::Unknown) {
            self.error(pos, format!("{what} must be BOOLEAN, found {}", describe(ty, self.tables)));
        }
    }

    /// `var := value` / argument-passing compatibility. Separate references
    /// may absorb non-separate ones but not the other way around.
    fn require_assignable(&mut self, pos: Pos, target: Ty, value: Ty) {
        let ok = match (target, value) {
            (Ty::Unknown, _) | (_, Ty::Unknown) => true,
            (Ty::Int, Ty::Int) | (Ty::Bool, Ty::Bool) => true,
            (Ty::Class { .. }, Ty::VoidRef) => true,
            (Ty::Class { id: t, separate: ts }, Ty::Class { id: v, separate: vs }) => {
                t == v && (ts || !vs)
            }
            _ => false,
        };
        if !ok {
            self.error(
                pos,
                format!(
                    "type mismatch: expected {}, found {}",
                    describe(target, self.tables),
                    describe(value, self.tables)
                ),
            );
        }
    }

    fn check_expr(&mut self, expr: &Expr) -> Ty {
        match expr {
            Expr::Int(_, _) => Ty::Int,
            Expr::Bool(_, _) => Ty::Bool,
            Expr::Void(_) => Ty::VoidRef,
            Expr::Name(pos, name) => match self.scope.get(name.as_str()) {
                Some(&(kind, ty)) => {
                    if matches!(kind, VarKind::Result) && self.method.return_type.is_none() {
                        self.error(*pos, "`Result` is only available in queries");
                    }
                    ty
                }
                None => {
                    if self.class.method(name).is_some() {
                        self.error(
                            *pos,
                            format!("`{name}` is a method; call it with parentheses"),
                        );
                    } else {
                        self.error(*pos, format!("unknown name `{name}`"));
                    }
                    Ty::Unknown
                }
            },
            Expr::Call { pos, path, method, args } => {
                let Some((target_class, target_separate)) = self.resolve_call_target(*pos, path)
                else {
                    for arg in args {
                        self.check_expr(arg);
                    }
                    return Ty::Unknown;
                };
                if target_separate {
                    let base = &path[0];
                    if !self.is_controlled(base) {
                        self.error(
                            *pos,
                            format!("uncontrolled separate call: `{base}` is not controlled by any separate block here"),
                        );
                    }
                }
                let Some(class_idx) = target_class else {
                    for arg in args {
                        self.check_expr(arg);
                    }
                    return Ty::Unknown;
                };
                let class = &self.tables.classes[class_idx];
                match class.method(method) {
                    None => {
                        if class.attr(method).is_some() {
                            self.error(
                                *pos,
                                format!(
                                    "`{method}` is an attribute of `{}`; qualified attribute access is not supported, define a query",
                                    class.decl.name
                                ),
                            );
                        } else {
                            self.error(
                                *pos,
                                format!("class `{}` has no method `{method}`", class.decl.name),
                            );
                        }
                        Ty::Unknown
                    }
                    Some(m) => {
                        let Some(rt) = &m.return_type else {
                            self.error(*pos, format!("`{method}` is a command, not a query"));
                            self.check_args(*pos, m, args, method);
                            return Ty::Unknown;
                        };
                        self.check_args(*pos, m, args, method);
                        resolve_type(rt, self.tables)
                    }
                }
            }
            Expr::Binary { pos, op, lhs, rhs } => {
                let lt = self.check_expr(lhs);
                let rt = self.check_expr(rhs);
                match op {
                    BinOp::Add | BinOp::Sub | BinOp::Mul => {
                        self.require_int(*pos, lt);
                        self.require_int(*pos, rt);
                        Ty::Int
                    }
                    BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                        self.require_int(*pos, lt);
                        self.require_int(*pos, rt);
                        Ty::Bool
                    }
                    BinOp::Eq | BinOp::Ne => {
                        let comparable = match (lt, rt) {
                            (Ty::Unknown, _) | (_, Ty::Unknown) => true,
                            (Ty::Int, Ty::Int) | (Ty::Bool, Ty::Bool) => true,
                            (a, b) if a.is_reference() && b.is_reference() => true,
                            _ => false,
                        };
                        if !comparable {
                            self.error(
                                *pos,
                                format!(
                                    "cannot compare {} with {}",
                                    describe(lt, self.tables),
                                    describe(rt, self.tables)
                                ),
                            );
                        }
                        Ty::Bool
                    }
                    BinOp::And | BinOp::Or => {
                        self.require_bool(*pos, lt, "boolean operand");
                        self.require_bool(*pos, rt, "boolean operand");
                        Ty::Bool
                    }
                }
            }
            Expr::Not(pos, inner) => {
                let ty = self.check_expr(inner);
                self.require_bool(*pos, ty, "operand of `not`");
                Ty::Bool
            }
        }
    }

    fn require_int(&mut self, pos: Pos, ty: Ty) {
        if !matches!(ty, Ty::Int | Ty::Unknown) {
            self.error(
                pos,
                format!("arithmetic operand must be INTEGER, found {}", describe(ty, self.tables)),
            );
        }
    }

    // --- wait conditions -------------------------------------------------

    fn check_wait_condition(&mut self) {
        let clauses: &[Expr] = &self.method.require;
        for clause in clauses {
            let ty = self.check_expr(clause);
            if !matches!(ty, Ty::Bool | Ty::Unknown) {
                self.error(
                    clause.pos(),
                    format!("wait condition must be BOOLEAN, found {}", describe(ty, self.tables)),
                );
            }
            self.check_wait_expr(clause);
        }
    }

    /// Wait conditions are restricted to pure local expressions plus
    /// side-effect-free queries on controlled formals (or Current), so the
    /// retry semantics stay well defined.
    fn check_wait_expr(&mut self, expr: &Expr) {
        match expr {
            Expr::Int(..) | Expr::Bool(..) | Expr::Void(..) | Expr::Name(..) => {}
            Expr::Binary { lhs, rhs, .. } => {
                self.check_wait_expr(lhs);
                self.check_wait_expr(rhs);
            }
            Expr::Not(_, inner) => self.check_wait_expr(inner),
            Expr::Call { pos, path, method, args } => {
                let target_ok = match path.len() {
                    0 => true, // self query, evaluated locally
                    1 => {
                        let base = path[0].as_str();
                        let is_controlled_formal = self
                            .method
                            .formals
                            .iter()
                            .any(|f| f.name == base && f.ty.separate);
                        if !is_controlled_formal {
                            self.error(
                                *pos,
                                format!(
                                    "wait condition query target `{base}` must be a separate formal of this method"
                                ),
                            );
                        }
                        is_controlled_formal
                    }
                    _ => {
                        self.error(*pos, "wait condition queries cannot navigate paths");
                        false
                    }
                };
                for arg in args {
                    if contains_call(arg) {
                        self.error(
                            arg.pos(),
                            "wait condition query arguments must be pure local expressions",
                        );
                    }
                }
                if target_ok {
                    let class_idx = if path.is_empty() {
                        self.tables.class_index(&self.class.decl.name)
                    } else {
                        let formal = self
                            .method
                            .formals
                            .iter()
                            .find(|f| f.name == path[0])
                            .expect("checked above");
                        match resolve_type(&formal.ty, self.tables) {
                            Ty::Class { id, .. } => Some(id),
                            _ => None,
                        }
                    };
                    if let Some(class_idx) = class_idx {
                        let class = &self.tables.classes[class_idx];
                        if let Some(m) = class.method(method) {
                            let mut visited = BTreeSet::new();
                            if !method_is_pure_local(self.tables, class_idx, m, &mut visited) {
                                self.error(
                                    *pos,
                                    format!(
                                        "wait condition query `{method}` has side effects; preconditions must be side-effect free"
                                    ),
                                );
                            }
                        }
                    }
                }
            }
        }
    }
}

fn contains_call(expr: &Expr) -> bool {
    match expr {
        Expr::Call { .. } => true,
        Expr::Binary { lhs, rhs, .. } => contains_call(lhs) || contains_call(rhs),
        Expr::Not(_, inner) => contains_call(inner),
        _ => false,
    }
}

fn resolve_type(ty: &TypeRef, tables: &Tables) -> Ty {
    match &ty.base {
        TypeBase::Integer => Ty::Int,
        TypeBase::Boolean => Ty::Bool,
        TypeBase::Class(name) => match tables.class_index(name) {
            Some(id) => Ty::Class { id, separate: ty.separate },
            None => Ty::Unknown,
        },
    }
}

/// A method is pure-local when it only reads state and writes its own
/// locals/Result: no creates, no commands, no qualified calls, and any self
/// queries it calls are pure-local too.
pub(crate) fn method_is_pure_local<'a>(
    tables: &Tables<'a>,
    class_idx: usize,
    method: &'a MethodDecl,
    visited: &mut BTreeSet<(usize, &'a str)>,
) -> bool {
    if !visited.insert((class_idx, method.name.as_str())) {
        return true; // recursion: assume pure on the cycle
    }
    fn stmts_pure<'a>(
        tables: &Tables<'a>,
        class_idx: usize,
        stmts: &'a [Stmt],
        method: &'a MethodDecl,
        visited: &mut BTreeSet<(usize, &'a str)>,
    ) -> bool {
        stmts.iter().all(|stmt| match stmt {
            Stmt::Assign { name, expr, .. } => {
                let writes_local = name == "Result"
                    || method.locals.iter().any(|l| &l.name == name);
                writes_local && expr_pure(tables, class_idx, expr, visited)
            }
            Stmt::If { cond, then_branch, else_branch, .. } => {
                expr_pure(tables, class_idx, cond, visited)
                    && stmts_pure(tables, class_idx, then_branch, method, visited)
                    && stmts_pure(tables, class_idx, else_branch, method, visited)
            }
            Stmt::Loop { init, until, body, .. } => {
                stmts_pure(tables, class_idx, init, method, visited)
                    && expr_pure(tables, class_idx, until, visited)
                    && stmts_pure(tables, class_idx, body, method, visited)
            }
            Stmt::Create { .. } | Stmt::Call { .. } | Stmt::Separate { .. } => false,
        })
    }
    fn expr_pure<'a>(
        tables: &Tables<'a>,
        class_idx: usize,
        expr: &'a Expr,
        visited: &mut BTreeSet<(usize, &'a str)>,
    ) -> bool {
        match expr {
            Expr::Int(..) | Expr::Bool(..) | Expr::Void(..) | Expr::Name(..) => true,
            Expr::Binary { lhs, rhs, .. } => {
                expr_pure(tables, class_idx, lhs, visited)
                    && expr_pure(tables, class_idx, rhs, visited)
            }
            Expr::Not(_, inner) => expr_pure(tables, class_idx, inner, visited),
            Expr::Call { path, method, args, .. } => {
                if !path.is_empty() {
                    return false;
                }
                let Some(m) = tables.classes[class_idx].method(method) else {
                    return false;
                };
                args.iter().all(|a| expr_pure(tables, class_idx, a, visited))
                    && method_is_pure_local(tables, class_idx, m, visited)
            }
        }
    }
    stmts_pure(tables, class_idx, &method.body, method, visited)
}

#[cfg(test)]
mod tests {
    use super::super::parser::parse;
    use super::*;
    use crate::diag::no_errors;

    fn errors_of(src: &str) -> Vec<String> {
        let program = parse(src).expect("parse");
        check(&program)
            .into_iter()
            .filter(|d| d.is_error())
            .map(|d| d.message)
            .collect()
    }

    const PHILOSOPHERS: &str = "
class FORK
  use_count: INTEGER
  use do use_count := use_count + 1 end
end
class PHILOSOPHER
  times_to_eat: INTEGER
  left_fork: separate FORK
  right_fork: separate FORK
  make (a_left, a_right: separate FORK, rounds: INTEGER)
    do
      left_fork := a_left
      right_fork := a_right
      times_to_eat := rounds
    end
  live
    do
      from until times_to_eat < 1 loop
        eat (left_fork, right_fork)
        times_to_eat := times_to_eat - 1
      end
    end
  eat (left, right: separate FORK)
    do
      left.use
      right.use
    end
  bad_eat
    do
      pickup_left_then_right (left_fork)
    end
  pickup_left_then_right (left: separate FORK)
    do
      pickup_right_and_eat (left, right_fork)
    end
  pickup_right_and_eat (left, right: separate FORK)
    do
      left.use
      right.use
    end
end
class APPLICATION
  make
    local
      f1, f2: separate FORK
      p: separate PHILOSOPHER
    do
      create f1
      create f2
      create p.make (f1, f2, 1)
      launch (p)
    end
  launch (philosopher: separate PHILOSOPHER)
    do
      philosopher.live
    end
end";

    #[test]
    fn philosophers_program_checks_clean() {
        assert_eq!(errors_of(PHILOSOPHERS), Vec::<String>::new());
    }

    #[test]
    fn uncontrolled_separate_call() {
        let errs = errors_of(
            "class F use do end end
             class APPLICATION
               f: separate F
               make do f.use end
             end",
        );
        assert_eq!(errs.len(), 1);
        assert!(errs[0].contains("uncontrolled separate call"));
    }

    #[test]
    fn wait_condition_must_be_boolean() {
        let errs = errors_of(
            "class APPLICATION
               make do end
               m (k: INTEGER)
                 require 1 + 2
                 do end
             end",
        );
        assert!(errs.iter().any(|e| e.contains("wait condition must be BOOLEAN")));
    }

    #[test]
    fn wait_condition_query_must_target_controlled_formal() {
        let errs = errors_of(
            "class B is_ok: BOOLEAN do Result := True end end
             class APPLICATION
               b: separate B
               make do end
               m
                 require b.is_ok
                 do end
             end",
        );
        assert!(errs.iter().any(|e| e.contains("must be a separate formal")));
    }

    #[test]
    fn wait_condition_query_must_be_pure() {
        let errs = errors_of(
            "class B
               n: INTEGER
               bump_and_test: BOOLEAN do n := n + 1 Result := n > 0 end
             end
             class APPLICATION
               make do end
               m (b: separate B)
                 require b.bump_and_test
                 do end
             end",
        );
        assert!(errs.iter().any(|e| e.contains("side effects")));
    }

    #[test]
    fn postconditions_warn_but_do_not_fail() {
        let program = parse(
            "class APPLICATION
               n: INTEGER
               make do n := 1 ensure n > 0 end
             end",
        )
        .unwrap();
        let diags = check(&program);
        assert!(no_errors(&diags));
        assert!(diags.iter().any(|d| d.message.contains("postconditions")));
    }

    #[test]
    fn entry_must_exist_and_take_no_formals() {
        let errs = errors_of("class C m do end end");
        assert!(errs.iter().any(|e| e.contains("APPLICATION")));
        let errs = errors_of("class APPLICATION make (x: INTEGER) do end end");
        assert!(errs.iter().any(|e| e.contains("no formals")));
    }

    #[test]
    fn assignment_to_controlled_name_rejected() {
        let errs = errors_of(
            "class F use do end end
             class APPLICATION
               f: separate F
               make do separate f do f := Void f.use end end
             end",
        );
        assert!(errs.iter().any(|e| e.contains("controlled")));
    }

    #[test]
    fn duplicate_names_rejected() {
        let errs = errors_of("class C m do end end class C m do end end class APPLICATION make do end end");
        assert!(errs.iter().any(|e| e.contains("duplicate class")));
        let errs = errors_of("class APPLICATION make do end make do end end");
        assert!(errs.iter().any(|e| e.contains("duplicate feature")));
    }

    #[test]
    fn query_result_must_not_be_discarded() {
        let errs = errors_of(
            "class B q: INTEGER do Result := 1 end end
             class APPLICATION
               b: B
               make do create b b.q end
             end",
        );
        assert!(errs.iter().any(|e| e.contains("discarded")));
    }

    #[test]
    fn separate_to_nonseparate_assignment_rejected() {
        let errs = errors_of(
            "class F end
             class APPLICATION
               s: separate F
               n: F
               make do n := s end
             end",
        );
        assert!(errs.iter().any(|e| e.contains("type mismatch")));
    }
}
