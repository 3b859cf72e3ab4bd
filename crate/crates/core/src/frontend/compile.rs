//! Lowering of checked programs to per-method control-flow graphs.
//!
//! Query calls nested in statement expressions are hoisted into dedicated
//! `QueryCall` edges assigning to fresh temporaries, so every CFG edge
//! carries at most one remote interaction. Methods with controlled formals
//! (or a wait condition) are wrapped in an implicit separate block:
//! `EnterBlock` at entry, `ExitBlock` before the final `Return` edge.
//! `from … until … loop … end` becomes a pair of complementary guard edges
//! with a back edge. State ids are renumbered in traversal order at the end,
//! so identical source compiles to identical CFGs.

use super::ast;
use super::check::Tables;
use super::ir::*;
use std::collections::BTreeMap;

pub fn compile(program: &ast::Program) -> CompiledProgram {
    let tables = Tables::build(program);

    // Class table and flat method id assignment, in declaration order.
    let mut classes = Vec::new();
    let mut method_ids: BTreeMap<(usize, &str), MethodId> = BTreeMap::new();
    let mut next_method = 0u32;
    for (class_idx, entry) in tables.classes.iter().enumerate() {
        let attributes = entry
            .attrs
            .iter()
            .map(|a| VarInfo {
                name: a.name.clone(),
                ty: resolve_type(&a.ty, &tables),
                is_temp: false,
            })
            .collect();
        let mut methods = BTreeMap::new();
        for m in &entry.methods {
            let id = MethodId(next_method);
            next_method += 1;
            method_ids.insert((class_idx, m.name.as_str()), id);
            methods.insert(m.name.clone(), id);
        }
        classes.push(ClassInfo {
            name: entry.decl.name.clone(),
            attributes,
            methods,
        });
    }

    let mut methods = vec![None; next_method as usize];
    let mut blocks = Vec::new();
    for (class_idx, entry) in tables.classes.iter().enumerate() {
        for m in &entry.methods {
            let id = method_ids[&(class_idx, m.name.as_str())];
            let lowered = Lowerer::new(&tables, &classes, &method_ids, class_idx, m, id, &mut blocks)
                .lower();
            methods[id.0 as usize] = Some(lowered);
        }
    }
    let methods: Vec<MethodInfo> = methods.into_iter().map(|m| m.expect("lowered")).collect();

    let entry_class = tables
        .class_index(super::check::ENTRY_CLASS)
        .expect("checked: entry class exists");
    let entry = method_ids[&(entry_class, super::check::ENTRY_METHOD)];

    let compiled = CompiledProgram { classes, methods, blocks, entry };
    debug_assert!(validate(&compiled).is_empty(), "{:?}", validate(&compiled));
    compiled
}

/// Post-compile linter: every action references only in-bounds places, every
/// state is reachable, guard branch points carry complementary polarities,
/// and the final state has no outgoing edges. Returns human-readable
/// complaints (empty = clean).
pub fn validate(program: &CompiledProgram) -> Vec<String> {
    let mut problems = Vec::new();
    for (mid, method) in program.methods.iter().enumerate() {
        let cfg = &method.cfg;
        let name = format!("{}.{}", program.class(method.class).name, method.name);
        if !cfg.out[cfg.final_state.0 as usize].is_empty() {
            problems.push(format!("{name}: final state has outgoing edges"));
        }
        for (sid, out) in cfg.out.iter().enumerate() {
            let sid = StateId(sid as u32);
            if out.len() > 1 {
                let all_guards = out.iter().all(|&e| {
                    matches!(cfg.edges[e as usize].action, Action::Guard { .. })
                });
                if !all_guards || out.len() != 2 {
                    problems.push(format!("{name}: state {sid} branches without complementary guards"));
                } else {
                    let pol: Vec<bool> = out
                        .iter()
                        .map(|&e| match &cfg.edges[e as usize].action {
                            Action::Guard { polarity, .. } => *polarity,
                            _ => unreachable!(),
                        })
                        .collect();
                    if pol[0] == pol[1] {
                        problems.push(format!("{name}: state {sid} guards are not complementary"));
                    }
                }
            }
        }
        // reachability
        let mut seen = vec![false; cfg.state_count as usize];
        let mut queue = vec![cfg.initial];
        seen[cfg.initial.0 as usize] = true;
        while let Some(s) = queue.pop() {
            for edge in cfg.out_edges(s) {
                if !seen[edge.to.0 as usize] {
                    seen[edge.to.0 as usize] = true;
                    queue.push(edge.to);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            problems.push(format!("{name}: unreachable control states"));
        }
        for edge in &cfg.edges {
            check_action_places(program, MethodId(mid as u32), &edge.action, &mut problems);
        }
    }
    problems
}

fn check_action_places(
    program: &CompiledProgram,
    mid: MethodId,
    action: &Action,
    problems: &mut Vec<String>,
) {
    let method = program.method(mid);
    let class = program.class(method.class);
    fn check_place(
        p: &Place,
        method: &MethodInfo,
        class: &ClassInfo,
        problems: &mut Vec<String>,
    ) {
        let ok = match p {
            Place::Local(i) => (*i as usize) < method.vars.len(),
            Place::Attr(i) => (*i as usize) < class.attributes.len(),
        };
        if !ok {
            problems.push(format!("{}.{}: out-of-bounds place {p:?}", class.name, method.name));
        }
    }
    fn check_expr(e: &Expr, method: &MethodInfo, class: &ClassInfo, problems: &mut Vec<String>) {
        let mut stack = vec![e];
        while let Some(e) = stack.pop() {
            match e {
                Expr::Read(p) => check_place(p, method, class, problems),
                Expr::Binary { lhs, rhs, .. } => {
                    stack.push(lhs);
                    stack.push(rhs);
                }
                Expr::Not(inner) => stack.push(inner),
                Expr::Query { target, args, .. } => {
                    if let TargetBase::Place(p) = &target.base {
                        check_place(p, method, class, problems);
                    }
                    stack.extend(args.iter());
                }
                _ => {}
            }
        }
    }
    match action {
        Action::AssignLocal { place, expr } => {
            check_place(place, method, class, problems);
            check_expr(expr, method, class, problems);
        }
        Action::CreateObject { place, args, .. } => {
            check_place(place, method, class, problems);
            args.iter().for_each(|a| check_expr(a, method, class, problems));
        }
        Action::CommandCall { target, args, .. } => {
            if let TargetBase::Place(p) = &target.base {
                check_place(p, method, class, problems);
            }
            args.iter().for_each(|a| check_expr(a, method, class, problems));
        }
        Action::QueryCall { place, target, args, .. } => {
            check_place(place, method, class, problems);
            if let TargetBase::Place(p) = &target.base {
                check_place(p, method, class, problems);
            }
            args.iter().for_each(|a| check_expr(a, method, class, problems));
        }
        Action::EnterBlock { targets, wait, .. } => {
            targets.iter().for_each(|t| check_place(t, method, class, problems));
            if let Some(w) = wait {
                check_expr(w, method, class, problems);
            }
        }
        Action::Guard { expr, .. } => check_expr(expr, method, class, problems),
        Action::ExitBlock { .. } | Action::Return => {}
    }
}

fn resolve_type(ty: &ast::TypeRef, tables: &Tables) -> Type {
    match &ty.base {
        ast::TypeBase::Integer => Type::INTEGER,
        ast::TypeBase::Boolean => Type::BOOLEAN,
        ast::TypeBase::Class(name) => {
            let id = tables.class_index(name).expect("checked: class resolves");
            Type::class(ClassId(id as u32), ty.separate)
        }
    }
}

struct Lowerer<'a> {
    tables: &'a Tables<'a>,
    classes: &'a [ClassInfo],
    method_ids: &'a BTreeMap<(usize, &'a str), MethodId>,
    class_idx: usize,
    decl: &'a ast::MethodDecl,
    id: MethodId,
    blocks: &'a mut Vec<BlockInfo>,
    blocks_in_method: u16,

    vars: Vec<VarInfo>,
    var_index: BTreeMap<String, u16>,
    temp_counter: u32,

    edges: Vec<Edge>,
    state_count: u32,
}

impl<'a> Lowerer<'a> {
    fn new(
        tables: &'a Tables<'a>,
        classes: &'a [ClassInfo],
        method_ids: &'a BTreeMap<(usize, &'a str), MethodId>,
        class_idx: usize,
        decl: &'a ast::MethodDecl,
        id: MethodId,
        blocks: &'a mut Vec<BlockInfo>,
    ) -> Self {
        Lowerer {
            tables,
            classes,
            method_ids,
            class_idx,
            decl,
            id,
            blocks,
            blocks_in_method: 0,
            vars: Vec::new(),
            var_index: BTreeMap::new(),
            temp_counter: 0,
            edges: Vec::new(),
            state_count: 0,
        }
    }

    fn fresh_state(&mut self) -> StateId {
        let id = StateId(self.state_count);
        self.state_count += 1;
        id
    }

    fn edge(&mut self, from: StateId, action: Action, to: StateId) {
        self.edges.push(Edge { from, action, to });
    }

    /// Rewrites every edge targeting `from` to target `to` instead; used to
    /// merge branch ends and to close loop back edges.
    fn redirect(&mut self, from: StateId, to: StateId) {
        if from == to {
            return;
        }
        for edge in &mut self.edges {
            if edge.to == from {
                edge.to = to;
            }
        }
    }

    fn new_block(&mut self) -> BlockId {
        let id = BlockId(self.blocks.len() as u32);
        self.blocks.push(BlockInfo {
            method: self.id,
            index_in_method: self.blocks_in_method,
        });
        self.blocks_in_method += 1;
        id
    }

    fn lower(mut self) -> MethodInfo {
        // Variable layout: formals, Result, declared locals (temps appended later).
        let mut controlled_formals = Vec::new();
        for (i, formal) in self.decl.formals.iter().enumerate() {
            let ty = resolve_type(&formal.ty, self.tables);
            if ty.separate {
                controlled_formals.push(i);
            }
            self.var_index.insert(formal.name.clone(), self.vars.len() as u16);
            self.vars.push(VarInfo { name: formal.name.clone(), ty, is_temp: false });
        }
        let formal_count = self.vars.len();
        let return_type = self.decl.return_type.as_ref().map(|t| resolve_type(t, self.tables));
        let result_index = return_type.map(|ty| {
            let idx = self.vars.len();
            self.var_index.insert("Result".to_string(), idx as u16);
            self.vars.push(VarInfo { name: "Result".to_string(), ty, is_temp: false });
            idx
        });
        for local in &self.decl.locals {
            let ty = resolve_type(&local.ty, self.tables);
            self.var_index.insert(local.name.clone(), self.vars.len() as u16);
            self.vars.push(VarInfo { name: local.name.clone(), ty, is_temp: false });
        }

        let initial = self.fresh_state();
        let mut cur = initial;

        let wait_condition = if self.decl.require.is_empty() {
            None
        } else {
            let mut clauses = self.decl.require.iter();
            let mut cond = self.cond_expr(clauses.next().unwrap());
            for clause in clauses {
                cond = Expr::Binary {
                    op: BinOp::And,
                    lhs: Box::new(cond),
                    rhs: Box::new(self.cond_expr(clause)),
                };
            }
            Some(cond)
        };

        let implicit_block = if !controlled_formals.is_empty() || wait_condition.is_some() {
            let block = self.new_block();
            let targets: Vec<Place> = controlled_formals
                .iter()
                .map(|&i| Place::Local(i as u16))
                .collect();
            let next = self.fresh_state();
            self.edge(
                cur,
                Action::EnterBlock { block, targets, wait: wait_condition.clone() },
                next,
            );
            cur = next;
            Some(block)
        } else {
            None
        };

        let body: &'a [ast::Stmt] = &self.decl.body;
        cur = self.lower_stmts(body, cur);

        if let Some(block) = implicit_block {
            let next = self.fresh_state();
            self.edge(cur, Action::ExitBlock { block }, next);
            cur = next;
        }
        let final_state = self.fresh_state();
        self.edge(cur, Action::Return, final_state);

        let cfg = self.normalize(initial, final_state);
        let mut visited = std::collections::BTreeSet::new();
        let pure_local = super::check::method_is_pure_local(
            self.tables,
            self.class_idx,
            self.decl,
            &mut visited,
        );
        MethodInfo {
            class: ClassId(self.class_idx as u32),
            name: self.decl.name.clone(),
            vars: self.vars,
            formal_count,
            result_index,
            return_type,
            controlled_formals,
            wait_condition,
            implicit_block,
            pure_local,
            cfg,
        }
    }

    /// Renumbers states in BFS traversal order from `initial`, dropping
    /// states orphaned by `redirect`.
    fn normalize(&mut self, initial: StateId, final_state: StateId) -> Cfg {
        let mut map: BTreeMap<u32, u32> = BTreeMap::new();
        let mut order = Vec::new();
        let mut queue = std::collections::VecDeque::new();
        map.insert(initial.0, 0);
        order.push(initial);
        queue.push_back(initial);
        // out-adjacency over the raw edges, in insertion order
        let mut raw_out: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for (i, e) in self.edges.iter().enumerate() {
            raw_out.entry(e.from.0).or_default().push(i);
        }
        while let Some(s) = queue.pop_front() {
            for &ei in raw_out.get(&s.0).map(|v| v.as_slice()).unwrap_or(&[]) {
                let to = self.edges[ei].to;
                if !map.contains_key(&to.0) {
                    let new_id = map.len() as u32;
                    map.insert(to.0, new_id);
                    order.push(to);
                    queue.push_back(to);
                }
            }
        }
        let mut edges = Vec::new();
        for s in &order {
            for &ei in raw_out.get(&s.0).map(|v| v.as_slice()).unwrap_or(&[]) {
                let e = &self.edges[ei];
                edges.push(Edge {
                    from: StateId(map[&e.from.0]),
                    action: e.action.clone(),
                    to: StateId(map[&e.to.0]),
                });
            }
        }
        let state_count = map.len() as u32;
        let mut out = vec![Vec::new(); state_count as usize];
        for (i, e) in edges.iter().enumerate() {
            out[e.from.0 as usize].push(i as u32);
        }
        Cfg {
            state_count,
            initial: StateId(0),
            final_state: StateId(map[&final_state.0]),
            edges,
            out,
        }
    }

    fn lower_stmts(&mut self, stmts: &[ast::Stmt], mut cur: StateId) -> StateId {
        for stmt in stmts {
            cur = self.lower_stmt(stmt, cur);
        }
        cur
    }

    fn lower_stmt(&mut self, stmt: &ast::Stmt, mut cur: StateId) -> StateId {
        match stmt {
            ast::Stmt::Assign { name, expr, .. } => {
                let value = self.lower_expr(expr, &mut cur);
                let place = self.place_of(name);
                let next = self.fresh_state();
                self.edge(cur, Action::AssignLocal { place, expr: value }, next);
                next
            }
            ast::Stmt::Create { name, ctor, .. } => {
                let place = self.place_of(name);
                let ty = self.type_of_place(place);
                let TypeBase::Class(class) = ty.base else {
                    unreachable!("checked: create target is class-typed")
                };
                let (ctor_id, args) = match ctor {
                    None => (None, Vec::new()),
                    Some((ctor_name, args)) => {
                        let mid = self.method_ids[&(class.0 as usize, ctor_name.as_str())];
                        let lowered: Vec<Expr> =
                            args.iter().map(|a| self.lower_expr(a, &mut cur)).collect();
                        (Some(mid), lowered)
                    }
                };
                let next = self.fresh_state();
                self.edge(
                    cur,
                    Action::CreateObject {
                        place,
                        class,
                        ctor: ctor_id,
                        args,
                        separate: ty.separate,
                    },
                    next,
                );
                next
            }
            ast::Stmt::Call { path, method, args, .. } => {
                let (target, class) = self.lower_target(path);
                let mid = self.method_ids[&(class, method.as_str())];
                let lowered: Vec<Expr> = args.iter().map(|a| self.lower_expr(a, &mut cur)).collect();
                let next = self.fresh_state();
                self.edge(
                    cur,
                    Action::CommandCall { target, method: mid, args: lowered },
                    next,
                );
                next
            }
            ast::Stmt::If { cond, then_branch, else_branch, .. } => {
                let guard = self.lower_expr(cond, &mut cur);
                let then_start = self.fresh_state();
                self.edge(cur, Action::Guard { expr: guard.clone(), polarity: true }, then_start);
                let then_end = self.lower_stmts(then_branch, then_start);
                let else_start = self.fresh_state();
                self.edge(cur, Action::Guard { expr: guard, polarity: false }, else_start);
                let else_end = self.lower_stmts(else_branch, else_start);
                self.redirect(else_end, then_end);
                then_end
            }
            ast::Stmt::Loop { init, until, body, .. } => {
                cur = self.lower_stmts(init, cur);
                let test_entry = cur;
                let exit_cond = self.lower_expr(until, &mut cur);
                let exit = self.fresh_state();
                self.edge(cur, Action::Guard { expr: exit_cond.clone(), polarity: true }, exit);
                let body_start = self.fresh_state();
                self.edge(cur, Action::Guard { expr: exit_cond, polarity: false }, body_start);
                let body_end = self.lower_stmts(body, body_start);
                self.redirect(body_end, test_entry);
                exit
            }
            ast::Stmt::Separate { names, body, .. } => {
                let block = self.new_block();
                let targets: Vec<Place> = names.iter().map(|n| self.place_of(n)).collect();
                let body_start = self.fresh_state();
                self.edge(cur, Action::EnterBlock { block, targets, wait: None }, body_start);
                let body_end = self.lower_stmts(body, body_start);
                let next = self.fresh_state();
                self.edge(body_end, Action::ExitBlock { block }, next);
                next
            }
        }
    }

    fn place_of(&self, name: &str) -> Place {
        if let Some(&idx) = self.var_index.get(name) {
            return Place::Local(idx);
        }
        let idx = self.classes[self.class_idx]
            .attr_index(name)
            .expect("checked: name resolves");
        Place::Attr(idx)
    }

    fn type_of_place(&self, place: Place) -> Type {
        match place {
            Place::Local(i) => self.vars[i as usize].ty,
            Place::Attr(i) => self.classes[self.class_idx].attributes[i as usize].ty,
        }
    }

    /// Resolves a call path to a target and the receiver's class index.
    fn lower_target(&self, path: &[String]) -> (TargetPath, usize) {
        if path.is_empty() {
            return (TargetPath::current(), self.class_idx);
        }
        let base = self.place_of(&path[0]);
        let mut ty = self.type_of_place(base);
        let mut fields = Vec::new();
        for hop in &path[1..] {
            let TypeBase::Class(cid) = ty.base else {
                unreachable!("checked: path hops are class-typed")
            };
            let class = &self.classes[cid.0 as usize];
            let idx = class.attr_index(hop).expect("checked: attribute resolves");
            ty = class.attributes[idx as usize].ty;
            fields.push(idx);
        }
        let TypeBase::Class(cid) = ty.base else {
            unreachable!("checked: receiver is class-typed")
        };
        (
            TargetPath { base: TargetBase::Place(base), fields },
            cid.0 as usize,
        )
    }

    fn fresh_temp(&mut self, ty: Type) -> Place {
        let idx = self.vars.len() as u16;
        let name = format!("$t{}", self.temp_counter);
        self.temp_counter += 1;
        self.var_index.insert(name.clone(), idx);
        self.vars.push(VarInfo { name, ty, is_temp: true });
        Place::Local(idx)
    }

    /// Lowers a statement-position expression, hoisting query calls into
    /// `QueryCall` edges that assign fresh temporaries.
    fn lower_expr(&mut self, expr: &ast::Expr, cur: &mut StateId) -> Expr {
        match expr {
            ast::Expr::Int(_, n) => Expr::Int(*n),
            ast::Expr::Bool(_, b) => Expr::Bool(*b),
            ast::Expr::Void(_) => Expr::Void,
            ast::Expr::Name(_, name) => Expr::Read(self.place_of(name)),
            ast::Expr::Binary { op, lhs, rhs, .. } => {
                let l = self.lower_expr(lhs, cur);
                let r = self.lower_expr(rhs, cur);
                Expr::Binary { op: lower_op(*op), lhs: Box::new(l), rhs: Box::new(r) }
            }
            ast::Expr::Not(_, inner) => Expr::Not(Box::new(self.lower_expr(inner, cur))),
            ast::Expr::Call { path, method, args, .. } => {
                let (target, class) = self.lower_target(path);
                let mid = self.method_ids[&(class, method.as_str())];
                let lowered: Vec<Expr> = args.iter().map(|a| self.lower_expr(a, cur)).collect();
                let decl = self.tables.classes[class].method(method).expect("checked");
                let rt = resolve_type(decl.return_type.as_ref().expect("checked: query"), self.tables);
                let temp = self.fresh_temp(rt);
                let next = self.fresh_state();
                self.edge(
                    *cur,
                    Action::QueryCall { place: temp, target, method: mid, args: lowered },
                    next,
                );
                *cur = next;
                Expr::Read(temp)
            }
        }
    }

    /// Compiles a wait-condition expression; query calls stay inline.
    fn cond_expr(&mut self, expr: &ast::Expr) -> Expr {
        match expr {
            ast::Expr::Int(_, n) => Expr::Int(*n),
            ast::Expr::Bool(_, b) => Expr::Bool(*b),
            ast::Expr::Void(_) => Expr::Void,
            ast::Expr::Name(_, name) => Expr::Read(self.place_of(name)),
            ast::Expr::Binary { op, lhs, rhs, .. } => Expr::Binary {
                op: lower_op(*op),
                lhs: Box::new(self.cond_expr(lhs)),
                rhs: Box::new(self.cond_expr(rhs)),
            },
            ast::Expr::Not(_, inner) => Expr::Not(Box::new(self.cond_expr(inner))),
            ast::Expr::Call { path, method, args, .. } => {
                let (target, class) = self.lower_target(path);
                let mid = self.method_ids[&(class, method.as_str())];
                let lowered: Vec<Expr> = args.iter().map(|a| self.cond_expr(a)).collect();
                Expr::Query { target, method: mid, args: lowered }
            }
        }
    }
}

fn lower_op(op: ast::BinOp) -> BinOp {
    match op {
        ast::BinOp::Add => BinOp::Add,
        ast::BinOp::Sub => BinOp::Sub,
        ast::BinOp::Mul => BinOp::Mul,
        ast::BinOp::Eq => BinOp::Eq,
        ast::BinOp::Ne => BinOp::Ne,
        ast::BinOp::Lt => BinOp::Lt,
        ast::BinOp::Le => BinOp::Le,
        ast::BinOp::Gt => BinOp::Gt,
        ast::BinOp::Ge => BinOp::Ge,
        ast::BinOp::And => BinOp::And,
        ast::BinOp::Or => BinOp::Or,
    }
}

#[cfg(test)]
mod tests {
    use super::super::parser::parse;
    use super::*;

    fn compile_src(src: &str) -> CompiledProgram {
        let program = parse(src).expect("parse");
        let diags = super::super::check::check(&program);
        assert!(
            diags.iter().all(|d| !d.is_error()),
            "check errors: {diags:?}"
        );
        compile(&program)
    }

    fn action_names(cfg: &Cfg) -> Vec<&'static str> {
        // follow the unique path (panics on branches; for straight-line CFGs)
        let mut out = Vec::new();
        let mut state = cfg.initial;
        while state != cfg.final_state {
            let edge = cfg.sole_edge(state).expect("straight-line CFG");
            out.push(match &edge.action {
                Action::AssignLocal { .. } => "assign",
                Action::CreateObject { .. } => "create",
                Action::CommandCall { .. } => "command",
                Action::QueryCall { .. } => "query",
                Action::EnterBlock { .. } => "enter",
                Action::ExitBlock { .. } => "exit",
                Action::Guard { .. } => "guard",
                Action::Return => "return",
            });
            state = edge.to;
        }
        out
    }

    const EAT: &str = "
class FORK
  use_count: INTEGER
  use do use_count := use_count + 1 end
end
class APPLICATION
  make do end
  eat (left, right: separate FORK)
    do
      left.use
      right.use
    end
  eat_no_statements (left, right: separate FORK)
    do
    end
end";

    #[test]
    fn eat_cfg_shape() {
        let p = compile_src(EAT);
        let app = p.class_named("APPLICATION").unwrap();
        let eat = p.method(p.method_of(app, "eat").unwrap());
        assert_eq!(
            action_names(&eat.cfg),
            vec!["enter", "command", "command", "exit", "return"]
        );
        assert_eq!(eat.cfg.edges.len(), 5);
        assert_eq!(eat.controlled_formals, vec![0, 1]);
        assert!(eat.implicit_block.is_some());
    }

    #[test]
    fn empty_body_cfg_shape() {
        let p = compile_src(EAT);
        let app = p.class_named("APPLICATION").unwrap();
        let m = p.method(p.method_of(app, "eat_no_statements").unwrap());
        assert_eq!(action_names(&m.cfg), vec!["enter", "exit", "return"]);
    }

    #[test]
    fn straight_line_assignments() {
        let p = compile_src(
            "class APPLICATION
               make
                 local x: INTEGER
                 do x := 1 x := x + 1 end
             end",
        );
        let m = p.method(p.entry);
        assert_eq!(action_names(&m.cfg), vec!["assign", "assign", "return"]);
        assert_eq!(m.cfg.state_count, 4);
    }

    #[test]
    fn loop_produces_complementary_guards_and_back_edge() {
        let p = compile_src(
            "class APPLICATION
               make
                 local i: INTEGER
                 do from i := 0 until i >= 2 loop i := i + 1 end end
             end",
        );
        let m = p.method(p.entry);
        // i := 0 from state 0; state 1 is the test with two guard edges.
        let test_out: Vec<_> = m.cfg.out_edges(StateId(1)).collect();
        assert_eq!(test_out.len(), 2);
        let polarities: Vec<bool> = test_out
            .iter()
            .map(|e| match &e.action {
                Action::Guard { polarity, .. } => *polarity,
                other => panic!("expected guard, got {other:?}"),
            })
            .collect();
        assert_eq!(polarities, vec![true, false]);
        // the false branch's assignment loops back to the test state
        let body_edge = test_out[1].to;
        let back = m.cfg.sole_edge(body_edge).unwrap();
        assert_eq!(back.to, StateId(1));
    }

    #[test]
    fn query_calls_are_hoisted_to_temporaries() {
        let p = compile_src(
            "class HOLDER
               v: INTEGER
               get: INTEGER do Result := v end
             end
             class APPLICATION
               h: separate HOLDER
               n: INTEGER
               make do
                 create h
                 separate h do n := h.get + 1 end
               end
             end",
        );
        let m = p.method(p.entry);
        assert_eq!(
            action_names(&m.cfg),
            vec!["create", "enter", "query", "assign", "exit", "return"]
        );
        let temp = m.vars.iter().find(|v| v.is_temp).expect("temporary present");
        assert_eq!(temp.ty, Type::INTEGER);
    }

    #[test]
    fn wait_condition_keeps_inline_queries() {
        let p = compile_src(
            "class BUFFER
               count: INTEGER
               is_empty: BOOLEAN do Result := count <= 0 end
               consume do count := count - 1 end
             end
             class APPLICATION
               make do end
               take (b: separate BUFFER)
                 require not b.is_empty
                 do b.consume end
             end",
        );
        let app = p.class_named("APPLICATION").unwrap();
        let m = p.method(p.method_of(app, "take").unwrap());
        let wait = m.wait_condition.as_ref().expect("wait condition");
        assert!(matches!(wait, Expr::Not(inner) if matches!(**inner, Expr::Query { .. })));
    }

    #[test]
    fn compile_is_deterministic() {
        let p1 = compile_src(EAT);
        let p2 = compile_src(EAT);
        assert_eq!(format!("{p1:?}"), format!("{p2:?}"));
    }

    #[test]
    fn validator_is_clean_on_compiled_programs() {
        let p = compile_src(EAT);
        assert!(validate(&p).is_empty());
    }
}
