//! Small arithmetic expression language for user problem files.
//!
//! Grammar:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?
//! atom    := number | ident | ident '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! Identifiers `x` and `t` are the free variables; every other name must be a
//! constant known at parse time. Functions: `sin`, `cos`, `exp`, `gamma`, `pow`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    X,
    T,
    Neg(Box<Node>),
    Bin(Op, Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
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
    Gamma,
    Pow,
}

impl Func {
    fn lookup(name: &str) -> Option<(Func, usize)> {
        Some(match name {
            "sin" => (Func::Sin, 1),
            "cos" => (Func::Cos, 1),
            "exp" => (Func::Exp, 1),
            "gamma" => (Func::Gamma, 1),
            "pow" => (Func::Pow, 2),
            _ => return None,
        })
    }
}

/// A parsed expression in `x` and `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    root: Node,
    source: String,
}

impl Expr {
    /// Parses `text`, resolving every identifier other than `x`, `t` against `constants`.
    pub fn parse(text: &str, constants: &BTreeMap<String, f64>) -> Result<Self> {
        let tokens = tokenize(text)?;
        let mut p = Parser {
            tokens,
            pos: 0,
            constants,
        };
        let root = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(Error::Expression(format!(
                "unexpected trailing input in `{text}`"
            )));
        }
        Ok(Self {
            root,
            source: text.to_string(),
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, x: f64, t: f64) -> f64 {
        eval(&self.root, x, t)
    }

    /// True if the expression never reads `t`.
    pub fn is_time_free(&self) -> bool {
        !mentions(&self.root, &Node::T)
    }

    /// True if the expression never reads `x`.
    pub fn is_space_free(&self) -> bool {
        !mentions(&self.root, &Node::X)
    }
}

fn mentions(node: &Node, var: &Node) -> bool {
    match node {
        Node::X | Node::T => node == var,
        Node::Num(_) => false,
        Node::Neg(a) => mentions(a, var),
        Node::Bin(_, a, b) => mentions(a, var) || mentions(b, var),
        Node::Call(_, args) => args.iter().any(|a| mentions(a, var)),
    }
}

fn eval(node: &Node, x: f64, t: f64) -> f64 {
    match node {
        Node::Num(v) => *v,
        Node::X => x,
        Node::T => t,
        Node::Neg(a) => -eval(a, x, t),
        Node::Bin(op, a, b) => {
            let (a, b) = (eval(a, x, t), eval(b, x, t));
            match op {
                Op::Add => a + b,
                Op::Sub => a - b,
                Op::Mul => a * b,
                Op::Div => a / b,
                Op::Pow => pow(a, b),
            }
        }
        Node::Call(func, args) => {
            let a = eval(&args[0], x, t);
            match func {
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
                Func::Exp => a.exp(),
                Func::Gamma => statrs::function::gamma::gamma(a),
                Func::Pow => pow(a, eval(&args[1], x, t)),
            }
        }
    }
}

// Integer exponents use repeated multiplication so negative bases stay finite.
fn pow(a: f64, b: f64) -> f64 {
    if b.fract() == 0.0 && b.abs() <= 64.0 {
        a.powi(b as i32)
    } else {
        a.powf(b)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
}

fn tokenize(text: &str) -> Result<Vec<Tok>> {
    let chars: Vec<char> = text.chars().collect();
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
            let s: String = chars[start..i].iter().collect();
            let v = s
                .parse::<f64>()
                .map_err(|_| Error::Expression(format!("bad number `{s}`")))?;
            out.push(Tok::Num(v));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^(),".contains(c) {
            out.push(Tok::Sym(c));
            i += 1;
        } else {
            return Err(Error::Expression(format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Tok>,
    pos: usize,
    constants: &'a BTreeMap<String, f64>,
}

impl Parser<'_> {
    fn peek_sym(&self, c: char) -> bool {
        matches!(self.tokens.get(self.pos), Some(Tok::Sym(s)) if *s == c)
    }

    fn expect_sym(&mut self, c: char) -> Result<()> {
        if self.peek_sym(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::Expression(format!("expected `{c}`")))
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.peek_sym('+') {
                Op::Add
            } else if self.peek_sym('-') {
                Op::Sub
            } else {
                return Ok(lhs);
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.peek_sym('*') {
                Op::Mul
            } else if self.peek_sym('/') {
                Op::Div
            } else {
                return Ok(lhs);
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if self.peek_sym('-') {
            self.pos += 1;
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        if self.peek_sym('+') {
            self.pos += 1;
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if self.peek_sym('^') {
            self.pos += 1;
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
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect_sym(')')?;
                Ok(inner)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if self.peek_sym('(') {
                    let (func, arity) = Func::lookup(&name)
                        .ok_or_else(|| Error::Expression(format!("unknown function `{name}`")))?;
                    self.pos += 1;
                    let mut args = vec![self.expr()?];
                    while self.peek_sym(',') {
                        self.pos += 1;
                        args.push(self.expr()?);
                    }
                    self.expect_sym(')')?;
                    if args.len() != arity {
                        return Err(Error::Expression(format!(
                            "`{name}` takes {arity} argument(s), got {}",
                            args.len()
                        )));
                    }
                    return Ok(Node::Call(func, args));
                }
                match name.as_str() {
                    "x" => Ok(Node::X),
                    "t" => Ok(Node::T),
                    "pi" => Ok(Node::Num(std::f64::consts::PI)),
                    _ => self
                        .constants
                        .get(&name)
                        .map(|&v| Node::Num(v))
                        .ok_or_else(|| Error::Expression(format!("unknown identifier `{name}`"))),
                }
            }
            Some(tok) => Err(Error::Expression(format!("unexpected token {tok:?}"))),
            None => Err(Error::Expression("unexpected end of input".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Expr {
        let mut c = BTreeMap::new();
        c.insert("alpha".to_string(), 0.25);
        Expr::parse(s, &c).unwrap()
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(parse("1 + 2 * 3").eval(0.0, 0.0), 7.0);
        assert_eq!(parse("(1 + 2) * 3").eval(0.0, 0.0), 9.0);
        assert_eq!(parse("8 / 4 / 2").eval(0.0, 0.0), 1.0);
        assert_eq!(parse("2 ^ 3 ^ 2").eval(0.0, 0.0), 512.0);
        assert_eq!(parse("-2 ^ 2").eval(0.0, 0.0), -4.0);
        assert_eq!(parse("1e-3 * 2E2").eval(0.0, 0.0), 0.2);
    }

    #[test]
    fn variables_functions_constants() {
        let e = parse("pow(x, 2) * sin(pi * t) + alpha");
        assert!((e.eval(3.0, 0.5) - 9.25).abs() < 1e-14);
        assert!((parse("gamma(5)").eval(0.0, 0.0) - 24.0).abs() < 1e-12);
        assert!((parse("exp(0) + cos(0)").eval(0.0, 0.0) - 2.0).abs() < 1e-15);
        assert_eq!(parse("(-x)^3").eval(2.0, 0.0), -8.0);
        assert!(parse("x*x").is_time_free());
        assert!(!parse("x*t").is_space_free());
    }

    #[test]
    fn errors() {
        let c = BTreeMap::new();
        for bad in ["1 +", "foo", "sin(1, 2)", "bar(1)", "(1", "1 $ 2", "1 2"] {
            assert!(Expr::parse(bad, &c).is_err(), "{bad}");
        }
    }
}
