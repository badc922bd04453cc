//! Weight expressions: numbers, coordinates (`x`, `y`, `z`, `x1`..`xn`, `r = |x|`),
//! `+ − * / ^` and parentheses. `^` binds tighter than unary minus and associates to the right.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::operators::ScalarField;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Coord(usize),
    Radius,
    Neg(Box<Node>),
    Bin(Op, Box<Node>, Box<Node>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// A parsed expression over the coordinates of `R^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    source: String,
    root: Node,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
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
                .map_err(|_| Error::Expression { column: col, message: format!("malformed number `{text}`") })?;
            out.push((col, Tok::Num(v)));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                i += 1;
            }
            out.push((col, Tok::Ident(chars[start..i].iter().collect())));
        } else if "+-*/^()".contains(c) {
            out.push((col, Tok::Sym(c)));
            i += 1;
        } else {
            return Err(Error::Expression { column: col, message: format!("unexpected character `{c}`") });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: &'a [(usize, Tok)],
    pos: usize,
    dim: usize,
    end: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn column(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(c, _)| *c)
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Expression { column: self.column(), message: message.into() })
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
            lhs = Node::Bin(op, Box::new(lhs), Box::new(self.term()?));
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
            lhs = Node::Bin(op, Box::new(lhs), Box::new(self.unary()?));
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
            return Ok(Node::Bin(Op::Pow, Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Node::Num(v))
            }
            Some(Tok::Ident(name)) => {
                let node = self.ident(&name)?;
                self.pos += 1;
                Ok(node)
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(')') {
                    return self.fail("expected `)`");
                }
                Ok(inner)
            }
            Some(Tok::Sym(c)) => self.fail(format!("unexpected `{c}`")),
            None => self.fail("unexpected end of expression"),
        }
    }

    fn ident(&self, name: &str) -> Result<Node> {
        let axis = match name {
            "r" => return Ok(Node::Radius),
            "x" => 0,
            "y" => 1,
            "z" => 2,
            _ => match name.strip_prefix('x').and_then(|k| k.parse::<usize>().ok()) {
                Some(k) if k >= 1 => k - 1,
                _ => return self.fail(format!("unknown symbol `{name}`")),
            },
        };
        if axis >= self.dim {
            return self.fail(format!("`{name}` needs dimension {}, domain has {}", axis + 1, self.dim));
        }
        Ok(Node::Coord(axis))
    }
}

impl Expr {
    /// Parses `src` for points of `R^dim`.
    pub fn parse(src: &str, dim: usize) -> Result<Self> {
        let toks = tokenize(src)?;
        let mut p = Parser { toks: &toks, pos: 0, dim, end: src.chars().count() + 1 };
        let root = p.expr()?;
        if p.pos < toks.len() {
            return p.fail("unexpected trailing input");
        }
        Ok(Self { source: src.to_string(), root })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// The value at `x`, when the expression does not depend on the point.
    pub fn as_constant(&self) -> Option<f64> {
        fn walk(n: &Node) -> Option<f64> {
            Some(match n {
                Node::Num(v) => *v,
                Node::Coord(_) | Node::Radius => return None,
                Node::Neg(a) => -walk(a)?,
                Node::Bin(op, a, b) => apply(*op, walk(a)?, walk(b)?),
            })
        }
        walk(&self.root)
    }

    pub fn eval<T: Real>(&self, x: &[T]) -> T {
        fn walk<T: Real>(n: &Node, x: &[T]) -> T {
            match n {
                Node::Num(v) => T::lit(*v),
                Node::Coord(k) => x[*k],
                Node::Radius => x.iter().map(|&v| v * v).sum::<T>().sqrt(),
                Node::Neg(a) => -walk(a, x),
                Node::Bin(op, a, b) => {
                    let (a, b) = (walk(a, x), walk(b, x));
                    match op {
                        Op::Add => a + b,
                        Op::Sub => a - b,
                        Op::Mul => a * b,
                        Op::Div => a / b,
                        Op::Pow => a.powf(b),
                    }
                }
            }
        }
        walk(&self.root, x)
    }

    pub fn to_field<T: Real>(&self) -> ScalarField<T> {
        if let Some(c) = self.as_constant() {
            return ScalarField::constant(T::lit(c));
        }
        let e = Arc::new(self.clone());
        ScalarField::new(move |x: &[T]| e.eval(x))
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

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(src: &str, x: &[f64]) -> f64 {
        Expr::parse(src, x.len()).unwrap().eval(x)
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("1 + 2 * 3", &[0.0]), 7.0);
        assert_eq!(ev("(1 + 2) * 3", &[0.0]), 9.0);
        assert_eq!(ev("2 ^ 3 ^ 2", &[0.0]), 512.0);
        assert_eq!(ev("-x^2", &[3.0]), -9.0);
        assert_eq!(ev("8 / 4 / 2", &[0.0]), 1.0);
        assert_eq!(ev("1 - 2 - 3", &[0.0]), -4.0);
        assert_eq!(ev("2^-1", &[0.0]), 0.5);
    }

    #[test]
    fn coordinates_and_radius() {
        assert_eq!(ev("x + 10*y + 100*z", &[1.0, 2.0, 3.0]), 321.0);
        assert_eq!(ev("x1 * x4", &[2.0, 0.0, 0.0, 5.0]), 10.0);
        assert_eq!(ev("r", &[3.0, 4.0]), 5.0);
        assert_eq!(ev("1.5e1 + .5", &[0.0]), 15.5);
    }

    #[test]
    fn constants_fold() {
        assert_eq!(Expr::parse("2 * (3 + 1)", 1).unwrap().as_constant(), Some(8.0));
        assert_eq!(Expr::parse("1 + x", 1).unwrap().as_constant(), None);
        assert_eq!(Expr::parse("4", 2).unwrap().to_field::<f64>().as_constant(), Some(4.0));
    }

    #[test]
    fn errors_carry_columns() {
        let col = |src: &str, dim| match Expr::parse(src, dim) {
            Err(Error::Expression { column, .. }) => column,
            other => panic!("{other:?}"),
        };
        assert_eq!(col("1 + $", 1), 5);
        assert_eq!(col("1 + (x", 1), 7);
        assert_eq!(col("x + y", 1), 5);
        assert_eq!(col("sin(x)", 1), 1);
        assert_eq!(col("1 2", 1), 3);
        assert_eq!(col("", 1), 1);
        assert_eq!(col("x0", 2), 1);
    }
}
