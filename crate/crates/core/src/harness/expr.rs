//! A small floating-point expression language over `x` and `y`.
//!
//! Grammar (usual precedence, `^` right associative and binding tighter
//! than unary minus, so `-x^2 = -(x^2)`):
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?
//! atom  := number | 'x' | 'y' | 'pi' | 'e' | name '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! Functions: `exp ln sqrt abs sin cos` (one argument), `max min` (two or more).

use std::fmt;
use std::str::FromStr;

use crate::{Error, Point, Result};

#[derive(Clone, Debug, PartialEq)]
enum Node {
    Num(f64),
    X,
    Y,
    Neg(Box<Node>),
    Bin(Op, Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Func {
    Exp,
    Ln,
    Sqrt,
    Abs,
    Sin,
    Cos,
    Max,
    Min,
}

impl Func {
    fn lookup(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "max" => Func::Max,
            "min" => Func::Min,
            _ => return None,
        })
    }

    fn variadic(self) -> bool {
        matches!(self, Func::Max | Func::Min)
    }
}

/// A parsed expression in `x` and `y`.
#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    src: String,
    root: Node,
}

impl Expr {
    pub fn parse(src: &str) -> Result<Self> {
        let mut p = Parser { s: src.as_bytes(), pos: 0 };
        let root = p.expr()?;
        p.skip_ws();
        if p.pos != p.s.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(Expr { src: src.to_string(), root })
    }

    pub fn eval(&self, p: Point) -> f64 {
        eval(&self.root, p)
    }

    pub fn source(&self) -> &str {
        &self.src
    }
}

impl FromStr for Expr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Expr::parse(s)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.src)
    }
}

fn eval(n: &Node, p: Point) -> f64 {
    match n {
        Node::Num(v) => *v,
        Node::X => p[0],
        Node::Y => p[1],
        Node::Neg(a) => -eval(a, p),
        Node::Bin(op, a, b) => {
            let (a, b) = (eval(a, p), eval(b, p));
            match op {
                Op::Add => a + b,
                Op::Sub => a - b,
                Op::Mul => a * b,
                Op::Div => a / b,
                Op::Pow => {
                    // integer exponents via powi keep x^2 exact
                    if b.fract() == 0.0 && b.abs() <= 64.0 {
                        a.powi(b as i32)
                    } else {
                        a.powf(b)
                    }
                }
            }
        }
        Node::Call(f, args) => {
            let a0 = eval(&args[0], p);
            match f {
                Func::Exp => a0.exp(),
                Func::Ln => a0.ln(),
                Func::Sqrt => a0.sqrt(),
                Func::Abs => a0.abs(),
                Func::Sin => a0.sin(),
                Func::Cos => a0.cos(),
                Func::Max => args[1..].iter().fold(a0, |m, a| m.max(eval(a, p))),
                Func::Min => args[1..].iter().fold(a0, |m, a| m.min(eval(a, p))),
            }
        }
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> Error {
        let src = String::from_utf8_lossy(self.s);
        Error::Expr(format!("{msg} at offset {} in `{src}`", self.pos))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => Op::Add,
                Some(b'-') => Op::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => Op::Mul,
                Some(b'/') => Op::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if self.eat(b'-') {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if self.eat(b'^') {
            return Ok(Node::Bin(Op::Pow, Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        match self.peek() {
            None => Err(self.error("unexpected end of expression")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected `)`"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.s.len() && (self.s[self.pos].is_ascii_alphanumeric() || self.s[self.pos] == b'_') {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
                match name {
                    "x" => return Ok(Node::X),
                    "y" => return Ok(Node::Y),
                    "pi" => return Ok(Node::Num(std::f64::consts::PI)),
                    "e" if self.peek() != Some(b'(') => return Ok(Node::Num(std::f64::consts::E)),
                    _ => {}
                }
                let f = Func::lookup(name).ok_or_else(|| self.error(&format!("unknown name `{name}`")))?;
                if !self.eat(b'(') {
                    return Err(self.error(&format!("expected `(` after `{name}`")));
                }
                let mut args = vec![self.expr()?];
                while self.eat(b',') {
                    args.push(self.expr()?);
                }
                if !self.eat(b')') {
                    return Err(self.error("expected `)` or `,`"));
                }
                let ok = if f.variadic() { args.len() >= 2 } else { args.len() == 1 };
                if !ok {
                    return Err(self.error(&format!("wrong number of arguments to `{name}`")));
                }
                Ok(Node::Call(f, args))
            }
            Some(c) => Err(self.error(&format!("unexpected character `{}`", c as char))),
        }
    }

    fn number(&mut self) -> Result<Node> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            while p.pos < p.s.len() && p.s[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
        };
        digits(self);
        if self.s.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            digits(self);
        }
        if matches!(self.s.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.s.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if self.s.get(self.pos).is_some_and(u8::is_ascii_digit) {
                digits(self);
            } else {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
        text.parse::<f64>().map(Node::Num).map_err(|_| self.error(&format!("bad number `{text}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: &str, x: f64, y: f64) -> f64 {
        Expr::parse(s).unwrap().eval([x, y])
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("1 + 2 * 3", 0.0, 0.0), 7.0);
        assert_eq!(ev("(1 + 2) * 3", 0.0, 0.0), 9.0);
        assert_eq!(ev("2^3^2", 0.0, 0.0), 512.0);
        assert_eq!(ev("-x^2", 3.0, 0.0), -9.0);
        assert_eq!(ev("8 / 4 / 2", 0.0, 0.0), 1.0);
        assert_eq!(ev("1 - 2 - 3", 0.0, 0.0), -4.0);
        assert_eq!(ev("2^-1", 0.0, 0.0), 0.5);
    }

    #[test]
    fn functions_and_constants() {
        assert_eq!(ev("(x^2 + y^2)/2", 1.0, 2.0), 2.5);
        assert_eq!(ev("max(x, y, 0.5)", 0.1, 0.2), 0.5);
        assert_eq!(ev("min(abs(x), 3)", -2.0, 0.0), 2.0);
        assert!((ev("exp((x^2+y^2)/2)", 1.0, 1.0) - std::f64::consts::E).abs() < 1e-15);
        assert!((ev("ln(e) + cos(pi) + sin(0) + sqrt(4)", 0.0, 0.0) - 2.0).abs() < 1e-15);
        assert_eq!(ev("1e-3 * 2E2", 0.0, 0.0), 0.2);
        assert_eq!(ev("x - 0.5", 0.25, 0.0), -0.25);
    }

    #[test]
    fn parse_errors() {
        for bad in ["", "1 +", "foo(x)", "max(x)", "exp(x, y)", "(x", "x y", "2 $ 3", "z"] {
            assert!(matches!(Expr::parse(bad), Err(Error::Expr(_))), "{bad}");
        }
    }
}
