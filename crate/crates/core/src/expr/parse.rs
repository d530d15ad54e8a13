//! Recursive-descent parser for the expression language.
//!
//! ```text
//! expr   := term (("+"|"-") term)*
//! term   := factor (("*"|"/") factor)*
//! factor := base ("^" uint)?
//! base   := number | "i" | ident | ident "(" expr ")" | "(" expr ")" | "-" base
//! ident  ∈ {z1..zN, conj, re, im, abs2, exp}
//! ```

use num_complex::Complex64;
use thiserror::Error;

use super::{Expr, Node};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("variable z{index} at offset {offset} is out of range for n = {n}")]
    IndexOutOfRange { index: usize, n: usize, offset: usize },
    #[error("negative exponent at offset {offset}")]
    NegativeExponent { offset: usize },
    #[error("dimension n must be positive")]
    ZeroDimension,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(s) | Tok::Ident(s) => format!("'{s}'"),
        Tok::Plus => "'+'".into(),
        Tok::Minus => "'-'".into(),
        Tok::Star => "'*'".into(),
        Tok::Slash => "'/'".into(),
        Tok::Caret => "'^'".into(),
        Tok::LParen => "'('".into(),
        Tok::RParen => "')'".into(),
        Tok::End => "end of input".into(),
    }
}

fn syntax(offset: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        offset,
        message: message.into(),
    }
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        let start = i;
        let tok = match b {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                out.push((Tok::Num(text[start..i].to_string()), start));
                continue;
            }
            c if c.is_ascii_alphabetic() => {
                while i < bytes.len() && bytes[i].is_ascii_alphanumeric() {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
                continue;
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(syntax(i, format!("unexpected character '{ch}'")));
            }
        };
        i += 1;
        out.push((tok, start));
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    n: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(syntax(
                self.offset(),
                format!("expected {}, found {}", describe(&want), describe(self.peek())),
            ))
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = Node::add(acc, self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    acc = Node::sub(acc, self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    acc = Node::mul(acc, self.factor()?);
                }
                Tok::Slash => {
                    self.bump();
                    acc = Node::div(acc, self.factor()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Node, ParseError> {
        let base = self.base()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let (tok, offset) = self.bump();
        match tok {
            Tok::Minus => Err(ParseError::NegativeExponent { offset }),
            Tok::Num(s) => {
                let k: u32 = s
                    .parse()
                    .map_err(|_| syntax(offset, format!("exponent '{s}' is not an unsigned integer")))?;
                Ok(Node::pow(base, k))
            }
            other => Err(syntax(
                offset,
                format!("expected unsigned integer exponent, found {}", describe(&other)),
            )),
        }
    }

    fn base(&mut self) -> Result<Node, ParseError> {
        let (tok, offset) = self.bump();
        match tok {
            Tok::Num(s) => {
                let x: f64 = s
                    .parse()
                    .map_err(|_| syntax(offset, format!("invalid number '{s}'")))?;
                if !x.is_finite() {
                    return Err(syntax(offset, format!("number '{s}' is not finite")));
                }
                Ok(Node::Const(Complex64::new(x, 0.0)))
            }
            Tok::Minus => Ok(Node::neg(self.base()?)),
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::Ident(name) => self.ident(&name, offset),
            other => Err(syntax(offset, format!("unexpected {}", describe(&other)))),
        }
    }

    fn call_arg(&mut self) -> Result<Node, ParseError> {
        self.expect(Tok::LParen)?;
        let arg = self.expr()?;
        self.expect(Tok::RParen)?;
        Ok(arg)
    }

    fn ident(&mut self, name: &str, offset: usize) -> Result<Node, ParseError> {
        if name == "i" {
            return Ok(Node::Const(Complex64::new(0.0, 1.0)));
        }
        if let Some(digits) = name.strip_prefix('z') {
            if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
                let index: usize = digits.parse().unwrap_or(usize::MAX);
                if index == 0 || index > self.n {
                    return Err(ParseError::IndexOutOfRange {
                        index,
                        n: self.n,
                        offset,
                    });
                }
                return Ok(Node::Var(index - 1));
            }
        }
        let n = self.n;
        let wrap = move |node: Node| Expr { n, root: node };
        let node = match name {
            "exp" => Node::exp(self.call_arg()?),
            "conj" => wrap(self.call_arg()?).conjugate().root,
            "re" => wrap(self.call_arg()?).re_part().root,
            "im" => wrap(self.call_arg()?).im_part().root,
            "abs2" => wrap(self.call_arg()?).abs2().root,
            _ => return Err(syntax(offset, format!("unknown identifier '{name}'"))),
        };
        Ok(node)
    }
}

/// Parses `text` as a function of `z1..zn`.
pub fn parse(text: &str, n: usize) -> Result<Expr, ParseError> {
    if n == 0 {
        return Err(ParseError::ZeroDimension);
    }
    if text.trim().is_empty() {
        return Err(syntax(0, "empty input"));
    }
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0, n };
    let root = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(syntax(p.offset(), format!("unexpected {}", describe(p.peek()))));
    }
    Ok(Expr { n, root })
}
