//! Arithmetic expressions for coefficient fields, densities and jump maps.
//!
//! Grammar (usual precedence, `^` right associative):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?
//! atom   := number | name | name '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! Names: `x1`..`x9` (point coordinates, `x` = `x1`), `z1`..`z9` (jump
//! variable, `z` = `z1`), `rz` (Euclidean norm of z), `pi`, `e`.
//! Functions: `sin cos tan exp ln log sqrt abs sign floor min max pow`.

use crate::error::{Error, Result};
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    X(usize),
    Z(usize),
    Rz,
    Neg(Box<Node>),
    Bin(char, Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
    Abs,
    Sign,
    Floor,
    Min,
    Max,
    Pow,
}

impl Func {
    fn lookup(name: &str) -> Option<(Func, usize)> {
        Some(match name {
            "sin" => (Func::Sin, 1),
            "cos" => (Func::Cos, 1),
            "tan" => (Func::Tan, 1),
            "exp" => (Func::Exp, 1),
            "ln" | "log" => (Func::Ln, 1),
            "sqrt" => (Func::Sqrt, 1),
            "abs" => (Func::Abs, 1),
            "sign" => (Func::Sign, 1),
            "floor" => (Func::Floor, 1),
            "min" => (Func::Min, 2),
            "max" => (Func::Max, 2),
            "pow" => (Func::Pow, 2),
            _ => return None,
        })
    }
}

/// A parsed expression in the point `x` and jump variable `z`.
#[derive(Clone, PartialEq)]
pub struct Expr {
    source: String,
    root: Node,
    max_x: usize,
    max_z: usize,
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

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    max_x: usize,
    max_z: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: &str) -> Result<T> {
        Err(Error::Parse(format!("{msg} at offset {}", self.pos)))
    }

    fn skip(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip();
        self.s.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Node::Bin(c as char, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Node::Bin(c as char, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(Node::Neg(Box::new(self.unary()?)))
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Node::Bin('^', Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        match self.peek() {
            None => self.err("unexpected end of expression"),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return self.err("expected ')'");
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let start = self.pos;
                while self.pos < self.s.len() && (self.s[self.pos].is_ascii_digit() || self.s[self.pos] == b'.') {
                    self.pos += 1;
                }
                if self.pos < self.s.len() && (self.s[self.pos] == b'e' || self.s[self.pos] == b'E') {
                    let save = self.pos;
                    self.pos += 1;
                    if self.pos < self.s.len() && (self.s[self.pos] == b'+' || self.s[self.pos] == b'-') {
                        self.pos += 1;
                    }
                    if self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                            self.pos += 1;
                        }
                    } else {
                        self.pos = save;
                    }
                }
                let text = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
                text.parse::<f64>().map(Node::Num).or_else(|_| self.err("bad number"))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.s.len() && (self.s[self.pos].is_ascii_alphanumeric() || self.s[self.pos] == b'_') {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.s[start..self.pos]).unwrap().to_string();
                if self.peek() == Some(b'(') {
                    let Some((func, arity)) = Func::lookup(&name) else {
                        return self.err(&format!("unknown function '{name}'"));
                    };
                    self.pos += 1;
                    let mut args = vec![self.expr()?];
                    while self.peek() == Some(b',') {
                        self.pos += 1;
                        args.push(self.expr()?);
                    }
                    if self.peek() != Some(b')') {
                        return self.err("expected ')'");
                    }
                    self.pos += 1;
                    if args.len() != arity {
                        return self.err(&format!("'{name}' takes {arity} argument(s)"));
                    }
                    return Ok(Node::Call(func, args));
                }
                self.variable(&name)
            }
            Some(c) => self.err(&format!("unexpected character '{}'", c as char)),
        }
    }

    fn variable(&mut self, name: &str) -> Result<Node> {
        match name {
            "pi" => return Ok(Node::Num(std::f64::consts::PI)),
            "e" => return Ok(Node::Num(std::f64::consts::E)),
            "x" => {
                self.max_x = self.max_x.max(1);
                return Ok(Node::X(0));
            }
            "z" => {
                self.max_z = self.max_z.max(1);
                return Ok(Node::Z(0));
            }
            "rz" => {
                self.max_z = self.max_z.max(1);
                return Ok(Node::Rz);
            }
            _ => {}
        }
        let (head, tail) = name.split_at(1);
        if let Ok(k) = tail.parse::<usize>() {
            if (1..=9).contains(&k) {
                match head {
                    "x" => {
                        self.max_x = self.max_x.max(k);
                        return Ok(Node::X(k - 1));
                    }
                    "z" => {
                        self.max_z = self.max_z.max(k);
                        return Ok(Node::Z(k - 1));
                    }
                    _ => {}
                }
            }
        }
        self.err(&format!("unknown variable '{name}'"))
    }
}

impl Expr {
    pub fn parse(source: &str) -> Result<Expr> {
        let mut p = Parser { s: source.as_bytes(), pos: 0, max_x: 0, max_z: 0 };
        let root = p.expr()?;
        if p.peek().is_some() {
            return p.err("trailing input");
        }
        Ok(Expr { source: source.to_string(), root, max_x: p.max_x, max_z: p.max_z })
    }

    pub fn constant(c: f64) -> Expr {
        Expr { source: format!("{c}"), root: Node::Num(c), max_x: 0, max_z: 0 }
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Highest point coordinate referenced (1-based, 0 if none).
    pub fn max_x_index(&self) -> usize {
        self.max_x
    }

    /// Highest jump coordinate referenced (1-based, 0 if none).
    pub fn max_z_index(&self) -> usize {
        self.max_z
    }

    /// Checks that every referenced coordinate exists.
    pub fn check_dims(&self, x_dim: usize, z_dim: usize) -> Result<()> {
        if self.max_x > x_dim || self.max_z > z_dim {
            return Err(Error::InvalidInput(format!(
                "expression '{}' references coordinates beyond x-dimension {x_dim} / z-dimension {z_dim}",
                self.source
            )));
        }
        Ok(())
    }

    pub fn is_constant(&self) -> bool {
        self.max_x == 0 && self.max_z == 0
    }

    pub fn eval(&self, x: &[f64], z: &[f64]) -> f64 {
        eval(&self.root, x, z)
    }
}

fn eval(n: &Node, x: &[f64], z: &[f64]) -> f64 {
    match n {
        Node::Num(v) => *v,
        Node::X(k) => x.get(*k).copied().unwrap_or(0.0),
        Node::Z(k) => z.get(*k).copied().unwrap_or(0.0),
        Node::Rz => z.iter().map(|v| v * v).sum::<f64>().sqrt(),
        Node::Neg(a) => -eval(a, x, z),
        Node::Bin(op, a, b) => {
            let (a, b) = (eval(a, x, z), eval(b, x, z));
            match op {
                '+' => a + b,
                '-' => a - b,
                '*' => a * b,
                '/' => a / b,
                _ => a.powf(b),
            }
        }
        Node::Call(f, args) => {
            let a = eval(&args[0], x, z);
            match f {
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
                Func::Tan => a.tan(),
                Func::Exp => a.exp(),
                Func::Ln => a.ln(),
                Func::Sqrt => a.sqrt(),
                Func::Abs => a.abs(),
                Func::Sign => {
                    if a > 0.0 {
                        1.0
                    } else if a < 0.0 {
                        -1.0
                    } else {
                        0.0
                    }
                }
                Func::Floor => a.floor(),
                Func::Min => a.min(eval(&args[1], x, z)),
                Func::Max => a.max(eval(&args[1], x, z)),
                Func::Pow => a.powf(eval(&args[1], x, z)),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: &str, x: &[f64], z: &[f64]) -> f64 {
        Expr::parse(s).unwrap().eval(x, z)
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("1 + 2 * 3", &[], &[]), 7.0);
        assert_eq!(ev("2 ^ 3 ^ 2", &[], &[]), 512.0);
        assert_eq!(ev("-2 ^ 2", &[], &[]), -4.0);
        assert_eq!(ev("(1 - 2) - 3", &[], &[]), -4.0);
        assert_eq!(ev("8 / 2 / 2", &[], &[]), 2.0);
        assert_eq!(ev("1.5e2 + 2E-1", &[], &[]), 150.2);
    }

    #[test]
    fn variables_and_functions() {
        let v = ev("1 + 0.5*sin(2*pi*x1)", &[0.25], &[]);
        assert!((v - 1.5).abs() < 1e-15);
        assert_eq!(ev("x2 * z1 + rz", &[0.0, 3.0], &[3.0, 4.0]), 14.0);
        assert_eq!(ev("max(x, 2) + min(z, -1) + pow(2, 3)", &[1.0], &[0.0]), 9.0);
        assert_eq!(ev("abs(-3) * sign(-2)", &[], &[]), -3.0);
    }

    #[test]
    fn dimension_tracking() {
        let e = Expr::parse("x3 + z2").unwrap();
        assert_eq!(e.max_x_index(), 3);
        assert_eq!(e.max_z_index(), 2);
        assert!(e.check_dims(2, 2).is_err());
        assert!(e.check_dims(3, 2).is_ok());
        assert!(Expr::parse("2*pi").unwrap().is_constant());
    }

    #[test]
    fn rejects_malformed_input() {
        for bad in ["", "1 +", "foo(1)", "sin(1, 2)", "(1", "1 2", "y", "x0", "3 $ 4"] {
            assert!(Expr::parse(bad).is_err(), "{bad}");
        }
    }
}
