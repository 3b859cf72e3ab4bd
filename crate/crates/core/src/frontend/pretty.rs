//! Canonical pretty-printer for the surface AST. Printing a parsed program
//! and re-parsing it yields a structurally identical tree, which the tests
//! verify by comparing canonical prints.

use super::ast::*;
use std::fmt::Write;

pub fn print_program(program: &Program) -> String {
    let mut out = String::new();
    for class in &program.classes {
        print_class(&mut out, class);
    }
    out
}

fn print_class(out: &mut String, class: &ClassDecl) {
    let _ = writeln!(out, "class {}", class.name);
    for feature in &class.features {
        match feature {
            Feature::Attribute(a) => {
                let _ = writeln!(out, "  {}: {}", a.name, type_str(&a.ty));
            }
            Feature::Method(m) => print_method(out, m),
        }
    }
    let _ = writeln!(out, "end");
}

fn print_method(out: &mut String, m: &MethodDecl) {
    let _ = write!(out, "  {}", m.name);
    if !m.formals.is_empty() {
        let formals: Vec<String> = m
            .formals
            .iter()
            .map(|f| format!("{}: {}", f.name, type_str(&f.ty)))
            .collect();
        let _ = write!(out, " ({})", formals.join(", "));
    }
    if let Some(rt) = &m.return_type {
        let _ = write!(out, ": {}", type_str(rt));
    }
    let _ = writeln!(out);
    if !m.require.is_empty() {
        let _ = writeln!(out, "    require");
        for e in &m.require {
            let _ = writeln!(out, "      {}", expr_str(e));
        }
    }
    if !m.locals.is_empty() {
        let _ = writeln!(out, "    local");
        for l in &m.locals {
            let _ = writeln!(out, "      {}: {}", l.name, type_str(&l.ty));
        }
    }
    let _ = writeln!(out, "    do");
    for s in &m.body {
        print_stmt(out, s, 6);
    }
    if !m.ensure.is_empty() {
        let _ = writeln!(out, "    ensure");
        for e in &m.ensure {
            let _ = writeln!(out, "      {}", expr_str(e));
        }
    }
    let _ = writeln!(out, "    end");
}

fn print_stmt(out: &mut String, stmt: &Stmt, indent: usize) {
    let pad = " ".repeat(indent);
    match stmt {
        Stmt::Create { name, ctor, .. } => match ctor {
            None => {
                let _ = writeln!(out, "{pad}create {name}");
            }
            Some((ctor_name, args)) => {
                let _ = writeln!(out, "{pad}create {name}.{ctor_name}{}", args_str(args));
            }
        },
        Stmt::Assign { name, expr, .. } => {
            let _ = writeln!(out, "{pad}{name} := {}", expr_str(expr));
        }
        Stmt::Call { path, method, args, .. } => {
            let mut target = path.join(".");
            if !target.is_empty() {
                target.push('.');
            }
            let _ = writeln!(out, "{pad}{target}{method}{}", args_str(args));
        }
        Stmt::If { cond, then_branch, else_branch, .. } => {
            let _ = writeln!(out, "{pad}if {} then", expr_str(cond));
            for s in then_branch {
                print_stmt(out, s, indent + 2);
            }
            if !else_branch.is_empty() {
                let _ = writeln!(out, "{pad}else");
                for s in else_branch {
                    print_stmt(out, s, indent + 2);
                }
            }
            let _ = writeln!(out, "{pad}end");
        }
        Stmt::Loop { init, until, body, .. } => {
            let _ = writeln!(out, "{pad}from");
            for s in init {
                print_stmt(out, s, indent + 2);
            }
            let _ = writeln!(out, "{pad}until {}", expr_str(until));
            let _ = writeln!(out, "{pad}loop");
            for s in body {
                print_stmt(out, s, indent + 2);
            }
            let _ = writeln!(out, "{pad}end");
        }
        Stmt::Separate { names, body, .. } => {
            let _ = writeln!(out, "{pad}separate {} do", names.join(", "));
            for s in body {
                print_stmt(out, s, indent + 2);
            }
            let _ = writeln!(out, "{pad}end");
        }
    }
}

fn args_str(args: &[Expr]) -> String {
    if args.is_empty() {
        // A bare trailing name re-parses as a call with no arguments, so no
        // parentheses are needed (and `m ()` would not round-trip).
        String::new()
    } else {
        let parts: Vec<String> = args.iter().map(expr_str).collect();
        format!(" ({})", parts.join(", "))
    }
}

fn type_str(ty: &TypeRef) -> String {
    let base = match &ty.base {
        TypeBase::Integer => "INTEGER",
        TypeBase::Boolean => "BOOLEAN",
        TypeBase::Class(name) => name.as_str(),
    };
    if ty.separate {
        format!("separate {base}")
    } else {
        base.to_string()
    }
}

pub fn expr_str(expr: &Expr) -> String {
    print_expr(expr, 0)
}

fn prec(op: BinOp) -> u8 {
    match op {
        BinOp::Or => 1,
        BinOp::And => 2,
        BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 3,
        BinOp::Add | BinOp::Sub => 4,
        BinOp::Mul => 5,
    }
}

fn print_expr(expr: &Expr, parent: u8) -> String {
    match expr {
        Expr::Int(_, n) => n.to_string(),
        Expr::Bool(_, true) => "True".into(),
        Expr::Bool(_, false) => "False".into(),
        Expr::Void(_) => "Void".into(),
        Expr::Name(_, name) => name.clone(),
        Expr::Call { path, method, args, .. } => {
            let mut target = path.join(".");
            if !target.is_empty() {
                target.push('.');
            }
            if args.is_empty() {
                format!("{target}{method}")
            } else {
                let parts: Vec<String> = args.iter().map(expr_str).collect();
                format!("{target}{method} ({})", parts.join(", "))
            }
        }
        Expr::Binary { op, lhs, rhs, .. } => {
            let p = prec(*op);
            // Comparisons are non-associative; everything else associates left.
            let (lp, rp) = match op {
                BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                    (p + 1, p + 1)
                }
                _ => (p, p + 1),
            };
            let text = format!(
                "{} {} {}",
                print_expr(lhs, lp),
                op.symbol(),
                print_expr(rhs, rp)
            );
            if p < parent {
                format!("({text})")
            } else {
                text
            }
        }
        Expr::Not(_, inner) => {
            let text = format!("not {}", print_expr(inner, 6));
            if parent > 5 {
                format!("({text})")
            } else {
                text
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parser::parse;
    use super::*;

    fn round_trip(src: &str) {
        let p1 = parse(src).expect("initial parse");
        let printed = print_program(&p1);
        let p2 = parse(&printed)
            .unwrap_or_else(|e| panic!("re-parse failed: {e}\n--- printed ---\n{printed}"));
        assert_eq!(printed, print_program(&p2), "print is not a fixpoint");
    }

    #[test]
    fn round_trip_expressions() {
        round_trip(
            "class C m do x := 1 + 2 * 3 - (4 + 5) y := not (a and b) or c z := -7 + f.q (1, x) end end",
        );
    }

    #[test]
    fn round_trip_control_flow() {
        round_trip(
            "class C
  n: INTEGER
  m (k: INTEGER): BOOLEAN
    require k >= 0
    local i: INTEGER
    do
      from i := 0 until i >= k loop
        if i = 2 then n := n + 1 else n := n - 1 end
        i := i + 1
      end
      Result := n > 0
    ensure n >= 0
    end
end",
        );
    }

    #[test]
    fn round_trip_separate_and_create() {
        round_trip(
            "class APPLICATION
  x: separate H
  make do
    create x.make (1)
    separate x do x.poke x.prod (2) end
  end
end
class H
  v: INTEGER
  make (a: INTEGER) do v := a end
  poke do v := v + 1 end
  prod (a: INTEGER) do v := v + a end
end",
        );
    }
}
