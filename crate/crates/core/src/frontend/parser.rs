//! Recursive-descent parser for the mini-SCOOP grammar.
//!
//! ```text
//! program  := class+
//! class    := "class" NAME feature* "end"
//! feature  := attr | method
//! attr     := NAME ":" type
//! method   := NAME ["(" formal ("," formal)* ")"] [":" type]
//!             ["require" expr+] ["local" formal+]
//!             "do" stmt* ["ensure" expr+] "end"
//! formal   := NAME ("," NAME)* ":" type
//! type     := ["separate"] NAME
//! stmt     := "create" NAME ["." NAME args?]
//!           | NAME ":=" expr
//!           | NAME args? | path "." NAME args?
//!           | "if" expr "then" stmt* ["else" stmt*] "end"
//!           | "from" stmt* "until" expr "loop" stmt* "end"
//!           | "separate" NAME ("," NAME)* "do" stmt* "end"
//! args     := "(" [expr ("," expr)*] ")"
//! path     := NAME ("." NAME)*
//! ```
//!
//! Unqualified calls (`eat (left, right)`, bare `bad_eat`) are accepted as
//! self calls. Inheritance clauses are rejected outright.

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use crate::diag::{Diagnostic, Pos};

const KEYWORDS: &[&str] = &[
    "class", "end", "do", "local", "require", "ensure", "if", "then", "else", "from", "until",
    "loop", "separate", "create", "and", "or", "not", "True", "False", "Void", "inherit",
    "Current",
];

pub fn is_keyword(name: &str) -> bool {
    KEYWORDS.contains(&name)
}

pub fn parse(source: &str) -> Result<Program, Diagnostic> {
    let tokens = tokenize(source)?;
    let mut parser = Parser { tokens, at: 0 };
    parser.program()
}

struct Parser {
    tokens: Vec<Token>,
    at: usize,
}

type PResult<T> = Result<T, Diagnostic>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.at].tok
    }

    fn peek2(&self) -> &Tok {
        let idx = (self.at + 1).min(self.tokens.len() - 1);
        &self.tokens[idx].tok
    }

    fn pos(&self) -> Pos {
        self.tokens[self.at].pos
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.at].clone();
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        t
    }

    fn err<T>(&self, expected: &str) -> PResult<T> {
        Err(Diagnostic::error(
            self.pos(),
            format!("expected {expected}, found {}", self.peek().describe()),
        ))
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> PResult<Pos> {
        if *self.peek() == tok {
            Ok(self.bump().pos)
        } else {
            self.err(expected)
        }
    }

    /// True when the current token is the identifier keyword `kw`.
    fn at_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.at_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<Pos> {
        if self.at_kw(kw) {
            Ok(self.bump().pos)
        } else {
            self.err(&format!("`{kw}`"))
        }
    }

    /// True when the current token is a non-keyword identifier.
    fn at_name(&self) -> bool {
        matches!(self.peek(), Tok::Ident(s) if !is_keyword(s))
    }

    fn name(&mut self, what: &str) -> PResult<(String, Pos)> {
        match self.peek() {
            Tok::Ident(s) if !is_keyword(s) => {
                let s = s.clone();
                let pos = self.bump().pos;
                Ok((s, pos))
            }
            Tok::Ident(s) if s == "inherit" => Err(Diagnostic::error(
                self.pos(),
                "inheritance is not supported".to_string(),
            )),
            _ => self.err(what),
        }
    }

    fn program(&mut self) -> PResult<Program> {
        let mut classes = Vec::new();
        while !matches!(self.peek(), Tok::Eof) {
            classes.push(self.class()?);
        }
        if classes.is_empty() {
            return self.err("`class`");
        }
        Ok(Program { classes })
    }

    fn class(&mut self) -> PResult<ClassDecl> {
        self.expect_kw("class")?;
        let (name, pos) = self.name("class name")?;
        let mut features = Vec::new();
        while !self.at_kw("end") {
            if matches!(self.peek(), Tok::Eof) {
                return self.err("`end`");
            }
            features.push(self.feature()?);
        }
        self.expect_kw("end")?;
        Ok(ClassDecl { name, pos, features })
    }

    fn feature(&mut self) -> PResult<Feature> {
        let (name, pos) = self.name("feature name")?;
        if matches!(self.peek(), Tok::LParen) {
            // method with formals
            self.bump();
            let mut formals = Vec::new();
            self.formal_group(&mut formals)?;
            while matches!(self.peek(), Tok::Comma) {
                self.bump();
                self.formal_group(&mut formals)?;
            }
            self.expect(Tok::RParen, "`)`")?;
            let return_type = if matches!(self.peek(), Tok::Colon) {
                self.bump();
                Some(self.type_ref()?)
            } else {
                None
            };
            return Ok(Feature::Method(self.method_tail(name, pos, formals, return_type)?));
        }
        if matches!(self.peek(), Tok::Colon) {
            self.bump();
            let ty = self.type_ref()?;
            // A `NAME : type` prefix is an attribute unless a method section
            // follows (return-typed method without formals).
            if self.at_kw("require") || self.at_kw("local") || self.at_kw("do") {
                return Ok(Feature::Method(self.method_tail(name, pos, Vec::new(), Some(ty))?));
            }
            return Ok(Feature::Attribute(Attribute { name, pos, ty }));
        }
        if self.at_kw("require") || self.at_kw("local") || self.at_kw("do") {
            return Ok(Feature::Method(self.method_tail(name, pos, Vec::new(), None)?));
        }
        self.err("`:`, `(`, `require`, `local`, or `do` after feature name")
    }

    /// `NAME ("," NAME)* ":" type` appended to `out`.
    fn formal_group(&mut self, out: &mut Vec<Formal>) -> PResult<()> {
        let mut names = vec![self.name("formal name")?];
        // A comma can continue either this group or start a new one; groups
        // share a type, so collect names until the colon.
        while matches!(self.peek(), Tok::Comma) && self.formals_continue() {
            self.bump();
            names.push(self.name("formal name")?);
        }
        self.expect(Tok::Colon, "`:`")?;
        let ty = self.type_ref()?;
        for (name, pos) in names {
            out.push(Formal { name, pos, ty: ty.clone() });
        }
        Ok(())
    }

    /// Lookahead: does the comma continue the current formal group?
    /// `a, b: T` yes; in `a: T, b: U` the comma is consumed by the caller.
    fn formals_continue(&self) -> bool {
        matches!(self.peek2(), Tok::Ident(s) if !is_keyword(s))
    }

    fn type_ref(&mut self) -> PResult<TypeRef> {
        let separate = self.eat_kw("separate");
        let (name, _) = self.name("type name")?;
        let base = match name.as_str() {
            "INTEGER" => TypeBase::Integer,
            "BOOLEAN" => TypeBase::Boolean,
            _ => TypeBase::Class(name),
        };
        Ok(TypeRef { base, separate })
    }

    fn method_tail(
        &mut self,
        name: String,
        pos: Pos,
        formals: Vec<Formal>,
        return_type: Option<TypeRef>,
    ) -> PResult<MethodDecl> {
        let mut require = Vec::new();
        if self.eat_kw("require") {
            require.push(self.expr()?);
            while self.at_expr_start() {
                require.push(self.expr()?);
            }
        }
        let mut locals = Vec::new();
        if self.eat_kw("local") {
            while self.at_name() {
                self.formal_group(&mut locals)?;
            }
        }
        self.expect_kw("do")?;
        let body = self.stmts(&["end", "ensure"])?;
        let mut ensure = Vec::new();
        if self.eat_kw("ensure") {
            ensure.push(self.expr()?);
            while self.at_expr_start() {
                ensure.push(self.expr()?);
            }
        }
        self.expect_kw("end")?;
        Ok(MethodDecl {
            name,
            pos,
            formals,
            return_type,
            require,
            ensure,
            locals,
            body,
        })
    }

    fn at_stmt_start(&self) -> bool {
        match self.peek() {
            Tok::Ident(s) => {
                !is_keyword(s) || matches!(s.as_str(), "create" | "if" | "from" | "separate")
            }
            _ => false,
        }
    }

    fn stmts(&mut self, terminators: &[&str]) -> PResult<Vec<Stmt>> {
        let mut out = Vec::new();
        loop {
            if terminators.iter().any(|t| self.at_kw(t)) {
                return Ok(out);
            }
            if !self.at_stmt_start() {
                return self.err(&format!(
                    "a statement or `{}`",
                    terminators.join("`/`")
                ));
            }
            out.push(self.stmt()?);
        }
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let pos = self.pos();
        if self.eat_kw("create") {
            let (name, _) = self.name("variable name after `create`")?;
            let ctor = if matches!(self.peek(), Tok::Dot) {
                self.bump();
                let (ctor_name, _) = self.name("creation procedure name")?;
                let args = if matches!(self.peek(), Tok::LParen) {
                    self.args()?
                } else {
                    Vec::new()
                };
                Some((ctor_name, args))
            } else {
                None
            };
            return Ok(Stmt::Create { pos, name, ctor });
        }
        if self.eat_kw("if") {
            let cond = self.expr()?;
            self.expect_kw("then")?;
            let then_branch = self.stmts(&["else", "end"])?;
            let else_branch = if self.eat_kw("else") {
                self.stmts(&["end"])?
            } else {
                Vec::new()
            };
            self.expect_kw("end")?;
            return Ok(Stmt::If { pos, cond, then_branch, else_branch });
        }
        if self.eat_kw("from") {
            let init = self.stmts(&["until"])?;
            self.expect_kw("until")?;
            let until = self.expr()?;
            self.expect_kw("loop")?;
            let body = self.stmts(&["end"])?;
            self.expect_kw("end")?;
            return Ok(Stmt::Loop { pos, init, until, body });
        }
        if self.eat_kw("separate") {
            let mut names = vec![self.name("separate block target")?.0];
            while matches!(self.peek(), Tok::Comma) {
                self.bump();
                names.push(self.name("separate block target")?.0);
            }
            self.expect_kw("do")?;
            let body = self.stmts(&["end"])?;
            self.expect_kw("end")?;
            return Ok(Stmt::Separate { pos, names, body });
        }
        // assignment or call
        let (first, _) = self.name("a statement")?;
        if matches!(self.peek(), Tok::Assign) {
            self.bump();
            let expr = self.expr()?;
            return Ok(Stmt::Assign { pos, name: first, expr });
        }
        let mut segments = vec![first];
        while matches!(self.peek(), Tok::Dot) {
            self.bump();
            segments.push(self.name("feature name after `.`")?.0);
        }
        let args = if matches!(self.peek(), Tok::LParen) {
            self.args()?
        } else {
            Vec::new()
        };
        let method = segments.pop().expect("at least one segment");
        Ok(Stmt::Call { pos, path: segments, method, args })
    }

    fn args(&mut self) -> PResult<Vec<Expr>> {
        self.expect(Tok::LParen, "`(`")?;
        let mut out = Vec::new();
        if !matches!(self.peek(), Tok::RParen) {
            out.push(self.expr()?);
            while matches!(self.peek(), Tok::Comma) {
                self.bump();
                out.push(self.expr()?);
            }
        }
        self.expect(Tok::RParen, "`)`")?;
        Ok(out)
    }

    fn at_expr_start(&self) -> bool {
        match self.peek() {
            Tok::Int(_) | Tok::LParen | Tok::Minus => true,
            Tok::Ident(s) => !is_keyword(s) || matches!(s.as_str(), "not" | "True" | "False" | "Void"),
            _ => false,
        }
    }

    // Precedence: or < and < comparison < additive < multiplicative < unary.
    fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.expr_and()?;
        while self.at_kw("or") {
            let pos = self.bump().pos;
            let rhs = self.expr_and()?;
            lhs = Expr::Binary { pos, op: BinOp::Or, lhs: Box::new(lhs), rhs: Box::new(rhs) };
        }
        Ok(lhs)
    }

    fn expr_and(&mut self) -> PResult<Expr> {
        let mut lhs = self.expr_cmp()?;
        while self.at_kw("and") {
            let pos = self.bump().pos;
            let rhs = self.expr_cmp()?;
            lhs = Expr::Binary { pos, op: BinOp::And, lhs: Box::new(lhs), rhs: Box::new(rhs) };
        }
        Ok(lhs)
    }

    fn expr_cmp(&mut self) -> PResult<Expr> {
        let lhs = self.expr_add()?;
        let op = match self.peek() {
            Tok::Eq => Some(BinOp::Eq),
            Tok::Ne => Some(BinOp::Ne),
            Tok::Lt => Some(BinOp::Lt),
            Tok::Le => Some(BinOp::Le),
            Tok::Gt => Some(BinOp::Gt),
            Tok::Ge => Some(BinOp::Ge),
            _ => None,
        };
        if let Some(op) = op {
            let pos = self.bump().pos;
            let rhs = self.expr_add()?;
            return Ok(Expr::Binary { pos, op, lhs: Box::new(lhs), rhs: Box::new(rhs) });
        }
        Ok(lhs)
    }

    fn expr_add(&mut self) -> PResult<Expr> {
        let mut lhs = self.expr_mul()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            let pos = self.bump().pos;
            let rhs = self.expr_mul()?;
            lhs = Expr::Binary { pos, op, lhs: Box::new(lhs), rhs: Box::new(rhs) };
        }
    }

    fn expr_mul(&mut self) -> PResult<Expr> {
        let mut lhs = self.expr_unary()?;
        while matches!(self.peek(), Tok::Star) {
            let pos = self.bump().pos;
            let rhs = self.expr_unary()?;
            lhs = Expr::Binary { pos, op: BinOp::Mul, lhs: Box::new(lhs), rhs: Box::new(rhs) };
        }
        Ok(lhs)
    }

    fn expr_unary(&mut self) -> PResult<Expr> {
        if self.at_kw("not") {
            let pos = self.bump().pos;
            let inner = self.expr_unary()?;
            return Ok(Expr::Not(pos, Box::new(inner)));
        }
        if matches!(self.peek(), Tok::Minus) {
            let pos = self.bump().pos;
            let inner = self.expr_unary()?;
            if let Expr::Int(_, n) = inner {
                return Ok(Expr::Int(pos, -n));
            }
            return Ok(Expr::Binary {
                pos,
                op: BinOp::Sub,
                lhs: Box::new(Expr::Int(pos, 0)),
                rhs: Box::new(inner),
            });
        }
        self.expr_atom()
    }

    fn expr_atom(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Expr::Int(pos, n))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::Ident(s) if s == "True" => {
                self.bump();
                Ok(Expr::Bool(pos, true))
            }
            Tok::Ident(s) if s == "False" => {
                self.bump();
                Ok(Expr::Bool(pos, false))
            }
            Tok::Ident(s) if s == "Void" => {
                self.bump();
                Ok(Expr::Void(pos))
            }
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                let mut segments = vec![s];
                let mut has_args = matches!(self.peek(), Tok::LParen);
                let mut args = if has_args { self.args()? } else { Vec::new() };
                while matches!(self.peek(), Tok::Dot) {
                    if has_args {
                        return self.err("no chained call on a call result");
                    }
                    self.bump();
                    segments.push(self.name("feature name after `.`")?.0);
                    has_args = matches!(self.peek(), Tok::LParen);
                    if has_args {
                        args = self.args()?;
                    }
                }
                if segments.len() == 1 && !has_args {
                    return Ok(Expr::Name(pos, segments.pop().unwrap()));
                }
                let method = segments.pop().unwrap();
                Ok(Expr::Call { pos, path: segments, method, args })
            }
            _ => self.err("an expression"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_program() {
        let p = parse("class APPLICATION make do end end").unwrap();
        assert_eq!(p.classes.len(), 1);
        assert_eq!(p.classes[0].name, "APPLICATION");
        match &p.classes[0].features[0] {
            Feature::Method(m) => assert_eq!(m.name, "make"),
            other => panic!("expected method, got {other:?}"),
        }
    }

    #[test]
    fn philosopher_methods() {
        let src = "
class PHILOSOPHER
  times_to_eat: INTEGER
  left_fork: separate FORK
  right_fork: separate FORK
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
end";
        let p = parse(src).unwrap();
        let methods: Vec<_> = p.classes[0]
            .features
            .iter()
            .filter_map(|f| match f {
                Feature::Method(m) => Some(m),
                _ => None,
            })
            .collect();
        assert_eq!(methods.len(), 4);
        let eat = methods.iter().find(|m| m.name == "eat").unwrap();
        assert_eq!(eat.formals.len(), 2);
        assert!(eat.formals.iter().all(|f| f.ty.separate));
        let bad = methods.iter().find(|m| m.name == "bad_eat").unwrap();
        assert!(bad.formals.is_empty());
    }

    #[test]
    fn dangling_assign_is_a_syntax_error() {
        let err = parse("class C m do x := end end").unwrap_err();
        assert!(err.message.contains("expected"));
        assert_eq!(err.pos.line, 1);
    }

    #[test]
    fn grouped_formals_and_mixed_groups() {
        let p = parse("class C m (a, b: INTEGER, c: BOOLEAN) do end end").unwrap();
        let Feature::Method(m) = &p.classes[0].features[0] else {
            panic!()
        };
        assert_eq!(m.formals.len(), 3);
        assert_eq!(m.formals[1].name, "b");
        assert_eq!(m.formals[1].ty.base, TypeBase::Integer);
        assert_eq!(m.formals[2].ty.base, TypeBase::Boolean);
    }

    #[test]
    fn query_with_require_and_ensure() {
        let src = "
class BUFFER
  count: INTEGER
  take (n: INTEGER): INTEGER
    require
      count > 0
      n >= 0
    do
      count := count - 1
      Result := n
    ensure
      count >= 0
    end
end";
        let p = parse(src).unwrap();
        let Feature::Method(m) = &p.classes[0].features[1] else {
            panic!()
        };
        assert_eq!(m.require.len(), 2);
        assert_eq!(m.ensure.len(), 1);
        assert!(m.is_query());
    }

    #[test]
    fn inherit_is_rejected() {
        let err = parse("class C inherit OTHER end").unwrap_err();
        assert!(err.message.contains("inheritance"));
    }

    #[test]
    fn separate_block_and_create() {
        let src = "
class APPLICATION
  x: separate HOLDER
  make
    do
      create x.make (1 + 2, True)
      separate x do x.poke end
    end
end";
        let p = parse(src).unwrap();
        let Feature::Method(m) = &p.classes[0].features[1] else {
            panic!()
        };
        assert_eq!(m.body.len(), 2);
        match &m.body[1] {
            Stmt::Separate { names, body, .. } => {
                assert_eq!(names, &["x".to_string()]);
                assert_eq!(body.len(), 1);
            }
            other => panic!("expected separate block, got {other:?}"),
        }
    }
}
