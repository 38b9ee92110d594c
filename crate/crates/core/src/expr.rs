//! Arithmetic expressions in `x1, …, xn` used as function sources.
//!
//! Grammar, loosest binding first: `+ -`, then `* /`, then unary minus, then
//! right-associative `^`. Atoms are numbers, the constants `pi`, `tau` and
//! `e`, variables, parenthesised expressions and the calls `sin cos tan exp
//! ln sqrt abs floor`. `x`, `y` and `z` are aliases for `x1`, `x2` and `x3`.

use std::fmt;

use crate::error::{Error, Result};
use crate::oracle::{check_dim, DomainTag, Probe, RealOracle};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
    Abs,
    Floor,
}

impl Func {
    fn lookup(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "ln" | "log" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "floor" => Func::Floor,
            _ => return None,
        })
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Tan => v.tan(),
            Func::Exp => v.exp(),
            Func::Ln => v.ln(),
            Func::Sqrt => v.sqrt(),
            Func::Abs => v.abs(),
            Func::Floor => v.floor(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Var(usize),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

impl Node {
    fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Node::Num(v) => *v,
            Node::Var(i) => x[*i],
            Node::Neg(a) => -a.eval(x),
            Node::Add(a, b) => a.eval(x) + b.eval(x),
            Node::Sub(a, b) => a.eval(x) - b.eval(x),
            Node::Mul(a, b) => a.eval(x) * b.eval(x),
            Node::Div(a, b) => a.eval(x) / b.eval(x),
            Node::Pow(a, b) => a.eval(x).powf(b.eval(x)),
            Node::Call(f, a) => f.apply(a.eval(x)),
        }
    }

    fn max_var(&self) -> Option<usize> {
        match self {
            Node::Num(_) => None,
            Node::Var(i) => Some(*i),
            Node::Neg(a) | Node::Call(_, a) => a.max_var(),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
                a.max_var().max(b.max_var())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<(usize, Token)>> {
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
                .parse()
                .map_err(|_| Error::Expression(format!("bad number {text:?} at column {}", start + 1)))?;
            out.push((start, Token::Num(v)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((start, Token::Ident(chars[start..i].iter().collect())));
        } else if "+-*/^()".contains(c) {
            out.push((i, Token::Op(c)));
            i += 1;
        } else {
            return Err(Error::Expression(format!(
                "unexpected character {c:?} at column {}",
                i + 1
            )));
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|t| &t.1)
    }

    fn column(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.len, |t| t.0) + 1
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Token::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Result<Node> {
        let mut lhs = self.product()?;
        loop {
            if self.eat('+') {
                lhs = Node::Add(Box::new(lhs), Box::new(self.product()?));
            } else if self.eat('-') {
                lhs = Node::Sub(Box::new(lhs), Box::new(self.product()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn product(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
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
            return Ok(Node::Pow(Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        let col = self.column();
        match self.tokens.get(self.pos).map(|t| t.1.clone()) {
            Some(Token::Num(v)) => {
                self.pos += 1;
                Ok(Node::Num(v))
            }
            Some(Token::Op('(')) => {
                self.pos += 1;
                let inner = self.sum()?;
                if !self.eat(')') {
                    return Err(Error::Expression(format!("expected ')' at column {}", self.column())));
                }
                Ok(inner)
            }
            Some(Token::Ident(name)) => {
                self.pos += 1;
                if let Some(f) = Func::lookup(&name) {
                    if !self.eat('(') {
                        return Err(Error::Expression(format!("{name} needs an argument in parentheses")));
                    }
                    let arg = self.sum()?;
                    if !self.eat(')') {
                        return Err(Error::Expression(format!("expected ')' at column {}", self.column())));
                    }
                    return Ok(Node::Call(f, Box::new(arg)));
                }
                match name.as_str() {
                    "pi" => Ok(Node::Num(std::f64::consts::PI)),
                    "tau" => Ok(Node::Num(std::f64::consts::TAU)),
                    "e" => Ok(Node::Num(std::f64::consts::E)),
                    "x" => Ok(Node::Var(0)),
                    "y" => Ok(Node::Var(1)),
                    "z" => Ok(Node::Var(2)),
                    _ => match name.strip_prefix('x').and_then(|k| k.parse::<usize>().ok()) {
                        Some(k) if k >= 1 => Ok(Node::Var(k - 1)),
                        _ => Err(Error::Expression(format!("unknown name {name:?} at column {col}"))),
                    },
                }
            }
            Some(Token::Op(c)) => Err(Error::Expression(format!("unexpected {c:?} at column {col}"))),
            None => Err(Error::Expression("unexpected end of expression".into())),
        }
    }
}

/// A parsed expression.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    source: String,
    root: Node,
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let tokens = tokenize(src)?;
        let mut p = Parser {
            tokens,
            pos: 0,
            len: src.chars().count(),
        };
        let root = p.sum()?;
        if p.pos != p.tokens.len() {
            return Err(Error::Expression(format!("unexpected input at column {}", p.column())));
        }
        Ok(Expr {
            source: src.to_string(),
            root,
        })
    }

    /// Number of variables the expression refers to (the highest index used).
    pub fn arity(&self) -> usize {
        self.root.max_var().map_or(0, |i| i + 1)
    }

    /// Evaluates at `x`; variables beyond `x.len()` are an error.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if self.arity() > x.len() {
            return Err(Error::DimensionMismatch {
                expected: self.arity(),
                actual: x.len(),
            });
        }
        Ok(self.root.eval(x))
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

/// An expression as a function on `Rⁿ` or `Tⁿ`.
#[derive(Debug, Clone)]
pub struct ExprOracle {
    expr: Expr,
    dim: usize,
    domain: DomainTag,
}

impl ExprOracle {
    pub fn new(expr: Expr, dim: usize) -> Result<Self> {
        if dim == 0 || expr.arity() > dim {
            return Err(Error::Expression(format!(
                "{:?} uses {} variable(s) but the domain has dimension {dim}",
                expr.source,
                expr.arity()
            )));
        }
        Ok(ExprOracle {
            expr,
            dim,
            domain: DomainTag::Euclidean,
        })
    }

    pub fn parse(src: &str, dim: usize) -> Result<Self> {
        Self::new(Expr::parse(src)?, dim)
    }

    /// The same expression read on the torus, evaluated at reduced coordinates.
    pub fn on_torus(mut self) -> Self {
        self.domain = DomainTag::Torus;
        self
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }
}

impl RealOracle for ExprOracle {
    fn dim(&self) -> usize {
        self.dim
    }

    fn domain(&self) -> DomainTag {
        self.domain
    }

    fn eval(&self, x: &Probe) -> Result<f64> {
        check_dim(self.dim, x)?;
        Ok(self.expr.root.eval(&x.coords()))
    }
}
