//! Hand-rolled lexer for the mini-SCOOP grammar. Whitespace-insensitive,
//! `--` starts a line comment.

use crate::diag::{Diagnostic, Pos};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    // punctuation
    LParen,
    RParen,
    Comma,
    Dot,
    Colon,
    Assign, // :=
    // operators
    Plus,
    Minus,
    Star,
    Eq,   // =
    Ne,   // /=
    Lt,   // <
    Le,   // <=
    Gt,   // >
    Ge,   // >=
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Assign => "`:=`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Ne => "`/=`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Le => "`<=`".into(),
            Tok::Gt => "`>`".into(),
            Tok::Ge => "`>=`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

pub fn tokenize(source: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut out = Vec::new();
    let mut line: u32 = 1;
    let mut col: u32 = 1;
    let mut chars = source.chars().peekable();

    macro_rules! bump {
        () => {{
            let c = chars.next();
            if let Some(c) = c {
                if c == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
            }
            c
        }};
    }

    loop {
        let pos = Pos::new(line, col);
        let c = match chars.peek().copied() {
            None => break,
            Some(c) => c,
        };
        match c {
            ' ' | '\t' | '\r' | '\n' => {
                bump!();
            }
            '-' => {
                bump!();
                if chars.peek() == Some(&'-') {
                    // line comment
                    while let Some(&c) = chars.peek() {
                        if c == '\n' {
                            break;
                        }
                        bump!();
                    }
                } else {
                    out.push(Token { tok: Tok::Minus, pos });
                }
            }
            '(' => {
                bump!();
                out.push(Token { tok: Tok::LParen, pos });
            }
            ')' => {
                bump!();
                out.push(Token { tok: Tok::RParen, pos });
            }
            ',' => {
                bump!();
                out.push(Token { tok: Tok::Comma, pos });
            }
            '.' => {
                bump!();
                out.push(Token { tok: Tok::Dot, pos });
            }
            ':' => {
                bump!();
                if chars.peek() == Some(&'=') {
                    bump!();
                    out.push(Token { tok: Tok::Assign, pos });
                } else {
                    out.push(Token { tok: Tok::Colon, pos });
                }
            }
            '+' => {
                bump!();
                out.push(Token { tok: Tok::Plus, pos });
            }
            '*' => {
                bump!();
                out.push(Token { tok: Tok::Star, pos });
            }
            '=' => {
                bump!();
                out.push(Token { tok: Tok::Eq, pos });
            }
            '/' => {
                bump!();
                if chars.peek() == Some(&'=') {
                    bump!();
                    out.push(Token { tok: Tok::Ne, pos });
                } else {
                    return Err(Diagnostic::error(pos, "unexpected character `/`"));
                }
            }
            '<' => {
                bump!();
                if chars.peek() == Some(&'=') {
                    bump!();
                    out.push(Token { tok: Tok::Le, pos });
                } else {
                    out.push(Token { tok: Tok::Lt, pos });
                }
            }
            '>' => {
                bump!();
                if chars.peek() == Some(&'=') {
                    bump!();
                    out.push(Token { tok: Tok::Ge, pos });
                } else {
                    out.push(Token { tok: Tok::Gt, pos });
                }
            }
            c if c.is_ascii_digit() => {
                let mut text = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_digit() {
                        text.push(c);
                        bump!();
                    } else {
                        break;
                    }
                }
                let value: i64 = text
                    .parse()
                    .map_err(|_| Diagnostic::error(pos, format!("integer literal `{text}` out of range")))?;
                out.push(Token { tok: Tok::Int(value), pos });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut text = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        text.push(c);
                        bump!();
                    } else {
                        break;
                    }
                }
                out.push(Token { tok: Tok::Ident(text), pos });
            }
            other => {
                return Err(Diagnostic::error(pos, format!("unexpected character `{other}`")));
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: Pos::new(line, col),
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_and_symbols() {
        let toks = tokenize("x := 1 -- set x\ny /= 2").unwrap();
        let kinds: Vec<&Tok> = toks.iter().map(|t| &t.tok).collect();
        assert!(matches!(kinds[1], Tok::Assign));
        assert!(matches!(kinds[4], Tok::Ne));
        assert_eq!(toks[3].pos.line, 2);
    }

    #[test]
    fn stray_slash_is_rejected ()  {
        assert!(tokenize("a / b").is_err());
    }
}
