//! Tiny arithmetic expressions in the spatial variables `x1`, `x2`.
//!
//! Grammar: `+ - * / ^`, unary minus, parentheses, numeric literals, `pi`,
//! the variables `x1` and `x2`, and the functions `sin`, `cos`, `exp`.
//! `^` is right-associative and binds tighter than unary minus.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    X1,
    X2,
    Neg(Box<Node>),
    Bin(Op, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Func {
    Sin,
    Cos,
    Exp,
}

/// A parsed expression; keeps its source text for serialization.
#[derive(Clone, PartialEq)]
pub struct Expr {
    source: String,
    root: Node,
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({:?})", self.source)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

impl Expr {
    pub fn parse(src: &str) -> Result<Self> {
        let tokens = tokenize(src)?;
        let mut p = Parser { tokens, pos: 0 };
        let root = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(Error::Expression(format!(
                "unexpected trailing input in {src:?}"
            )));
        }
        Ok(Expr {
            source: src.to_string(),
            root,
        })
    }

    pub fn constant(value: f64) -> Self {
        Expr {
            source: format!("{value:?}"),
            root: Node::Num(value),
        }
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// `Some(c)` when the expression does not depend on position.
    pub fn as_constant(&self) -> Option<f64> {
        fn fold(n: &Node) -> Option<f64> {
            Some(match n {
                Node::Num(v) => *v,
                Node::X1 | Node::X2 => return None,
                Node::Neg(a) => -fold(a)?,
                Node::Bin(op, a, b) => apply(*op, fold(a)?, fold(b)?),
                Node::Call(f, a) => call(*f, fold(a)?),
            })
        }
        fold(&self.root)
    }

    pub fn eval(&self, x: [f64; 2]) -> f64 {
        eval(&self.root, x)
    }
}

fn apply(op: Op, a: f64, b: f64) -> f64 {
    match op {
        Op::Add => a + b,
        Op::Sub => a - b,
        Op::Mul => a * b,
        Op::Div => a / b,
        Op::Pow => a.powf(b),
    }
}

fn call(f: Func, a: f64) -> f64 {
    match f {
        Func::Sin => a.sin(),
        Func::Cos => a.cos(),
        Func::Exp => a.exp(),
    }
}

fn eval(n: &Node, x: [f64; 2]) -> f64 {
    match n {
        Node::Num(v) => *v,
        Node::X1 => x[0],
        Node::X2 => x[1],
        Node::Neg(a) => -eval(a, x),
        Node::Bin(op, a, b) => apply(*op, eval(a, x), eval(b, x)),
        Node::Call(f, a) => call(*f, eval(a, x)),
    }
}

impl Serialize for Expr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.source)
    }
}

impl<'de> Deserialize<'de> for Expr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Expr::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
}

fn tokenize(src: &str) -> Result<Vec<Tok>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // exponent part, e.g. 1e-3
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v = text
                .parse::<f64>()
                .map_err(|_| Error::Expression(format!("bad number {text:?}")))?;
            out.push(Tok::Num(v));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^()".contains(c) {
            out.push(Tok::Sym(c));
            i += 1;
        } else if c == '·' || c == '−' {
            out.push(Tok::Sym(if c == '·' { '*' } else { '-' }));
            i += 1;
        } else {
            return Err(Error::Expression(format!("unexpected character {c:?}")));
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat('+') {
                Op::Add
            } else if self.eat('-') {
                Op::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat('*') {
                Op::Mul
            } else if self.eat('/') {
                Op::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if self.eat('-') {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if self.eat('^') {
            let exp = self.unary()?;
            return Ok(Node::Bin(Op::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        match self.tokens.get(self.pos).cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Node::Num(v))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                match name.as_str() {
                    "x1" => Ok(Node::X1),
                    "x2" => Ok(Node::X2),
                    "pi" => Ok(Node::Num(std::f64::consts::PI)),
                    "sin" | "cos" | "exp" => {
                        let f = match name.as_str() {
                            "sin" => Func::Sin,
                            "cos" => Func::Cos,
                            _ => Func::Exp,
                        };
                        if !self.eat('(') {
                            return Err(Error::Expression(format!("expected '(' after {name}")));
                        }
                        let arg = self.expr()?;
                        if !self.eat(')') {
                            return Err(Error::Expression("unbalanced parenthesis".into()));
                        }
                        Ok(Node::Call(f, Box::new(arg)))
                    }
                    other => Err(Error::Expression(format!("unknown identifier {other:?}"))),
                }
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(Error::Expression("unbalanced parenthesis".into()));
                }
                Ok(e)
            }
            Some(t) => Err(Error::Expression(format!("unexpected token {t:?}"))),
            None => Err(Error::Expression("unexpected end of expression".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: &str, x: [f64; 2]) -> f64 {
        Expr::parse(s).unwrap().eval(x)
    }

    #[test]
    fn precedence() {
        assert_eq!(ev("1 + 2 * 3", [0.0, 0.0]), 7.0);
        assert_eq!(ev("2 ^ 3 ^ 2", [0.0, 0.0]), 512.0);
        assert_eq!(ev("-2 ^ 2", [0.0, 0.0]), -4.0);
        assert_eq!(ev("(1 + 2) * 3 / 9", [0.0, 0.0]), 1.0);
        assert_eq!(ev("8 - 3 - 2", [0.0, 0.0]), 3.0);
    }

    #[test]
    fn variables_and_functions() {
        let x = [0.3, -0.7];
        assert_eq!(ev("x1", x), 0.3);
        assert_eq!(ev("x2 * x1", x), -0.7 * 0.3);
        assert!((ev("sin(pi*x1)*cos(x2) + exp(-x1)", x)
            - ((std::f64::consts::PI * 0.3).sin() * (-0.7f64).cos() + (-0.3f64).exp()))
        .abs()
            < 1e-15);
        assert_eq!(ev("1.5e-1", x), 0.15);
    }

    #[test]
    fn constant_folding() {
        assert_eq!(Expr::parse("2*0.25").unwrap().as_constant(), Some(0.5));
        assert_eq!(Expr::parse("x1+1").unwrap().as_constant(), None);
    }

    #[test]
    fn errors() {
        assert!(Expr::parse("1 +").is_err());
        assert!(Expr::parse("sin 1").is_err());
        assert!(Expr::parse("x3").is_err());
        assert!(Expr::parse("(1").is_err());
        assert!(Expr::parse("1 2").is_err());
        assert!(Expr::parse("2 $ 3").is_err());
    }
}
