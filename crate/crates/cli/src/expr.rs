//! Arithmetic expressions over `t`, `x1..xd` and `u1..ud`.
//!
//! Grammar, loosest binding first: `+ -`, `* /`, unary `-`, `^` (right
//! associative), then numbers, variables, parentheses and the calls
//! `exp sin cos abs` (one argument) and `min max` (two or more).

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct ExprError {
    /// 1-based character column inside the expression text.
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "column {}: {}", self.column, self.message)
    }
}

impl std::error::Error for ExprError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    T,
    X(usize),
    U(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Func {
    Exp,
    Sin,
    Cos,
    Abs,
    Min,
    Max,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Var(Var),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

/// A parsed expression with its source text.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    source: String,
    root: Node,
    max_x: usize,
    max_u: usize,
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
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
            let v = text.parse::<f64>().map_err(|_| ExprError {
                column: col,
                message: format!("malformed number '{text}'"),
            })?;
            out.push((Tok::Num(v), col));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), col));
        } else if "+-*/^(),".contains(c) {
            out.push((Tok::Op(c), col));
            i += 1;
        } else {
            return Err(ExprError {
                column: col,
                message: format!("unexpected character '{c}'"),
            });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end_col: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |(_, c)| *c)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError {
            column: self.col(),
            message: message.into(),
        })
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Result<Node, ExprError> {
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

    fn product(&mut self) -> Result<Node, ExprError> {
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

    // Unary minus binds looser than `^`, so `-x1^2` is `-(x1^2)`.
    fn unary(&mut self) -> Result<Node, ExprError> {
        if self.eat('-') {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ExprError> {
        let base = self.atom()?;
        if self.eat('^') {
            let exp = self.unary()?;
            return Ok(Node::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, ExprError> {
        let col = self.col();
        match self.toks.get(self.pos).cloned() {
            Some((Tok::Num(v), _)) => {
                self.pos += 1;
                Ok(Node::Num(v))
            }
            Some((Tok::Op('('), _)) => {
                self.pos += 1;
                let inner = self.sum()?;
                if !self.eat(')') {
                    return self.err("expected ')'");
                }
                Ok(inner)
            }
            Some((Tok::Ident(name), _)) => {
                self.pos += 1;
                if let Some(f) = func(&name) {
                    return self.call(f, &name);
                }
                match variable(&name) {
                    Some(v) => Ok(Node::Var(v)),
                    None => Err(ExprError {
                        column: col,
                        message: format!("unknown name '{name}'"),
                    }),
                }
            }
            Some((Tok::Op(c), _)) => self.err(format!("unexpected '{c}'")),
            None => self.err("unexpected end of expression"),
        }
    }

    fn call(&mut self, f: Func, name: &str) -> Result<Node, ExprError> {
        if !self.eat('(') {
            return self.err(format!("expected '(' after {name}"));
        }
        let mut args = vec![self.sum()?];
        while self.eat(',') {
            args.push(self.sum()?);
        }
        if !self.eat(')') {
            return self.err("expected ')' or ','");
        }
        let ok = match f {
            Func::Min | Func::Max => args.len() >= 2,
            _ => args.len() == 1,
        };
        if !ok {
            return self.err(format!("wrong number of arguments to {name}"));
        }
        Ok(Node::Call(f, args))
    }
}

fn func(name: &str) -> Option<Func> {
    Some(match name {
        "exp" => Func::Exp,
        "sin" => Func::Sin,
        "cos" => Func::Cos,
        "abs" => Func::Abs,
        "min" => Func::Min,
        "max" => Func::Max,
        _ => return None,
    })
}

fn variable(name: &str) -> Option<Var> {
    if name == "t" {
        return Some(Var::T);
    }
    let (head, tail) = name.split_at(1);
    let k: usize = tail.parse().ok().filter(|k| *k >= 1)?;
    if tail.starts_with('0') {
        return None;
    }
    match head {
        "x" => Some(Var::X(k - 1)),
        "u" => Some(Var::U(k - 1)),
        _ => None,
    }
}

fn scan(n: &Node, e: &mut Expr) {
    match n {
        Node::Num(_) => {}
        Node::Var(Var::T) => {}
        Node::Var(Var::X(k)) => e.max_x = e.max_x.max(k + 1),
        Node::Var(Var::U(k)) => e.max_u = e.max_u.max(k + 1),
        Node::Neg(a) => scan(a, e),
        Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
            scan(a, e);
            scan(b, e);
        }
        Node::Call(_, args) => args.iter().for_each(|a| scan(a, e)),
    }
}

fn eval(n: &Node, t: f64, x: &[f64], u: &[f64]) -> f64 {
    match n {
        Node::Num(v) => *v,
        Node::Var(Var::T) => t,
        Node::Var(Var::X(k)) => x.get(*k).copied().unwrap_or(f64::NAN),
        Node::Var(Var::U(k)) => u.get(*k).copied().unwrap_or(f64::NAN),
        Node::Neg(a) => -eval(a, t, x, u),
        Node::Add(a, b) => eval(a, t, x, u) + eval(b, t, x, u),
        Node::Sub(a, b) => eval(a, t, x, u) - eval(b, t, x, u),
        Node::Mul(a, b) => eval(a, t, x, u) * eval(b, t, x, u),
        Node::Div(a, b) => eval(a, t, x, u) / eval(b, t, x, u),
        Node::Pow(a, b) => {
            let base = eval(a, t, x, u);
            let p = eval(b, t, x, u);
            if p.fract() == 0.0 && p.abs() <= i32::MAX as f64 {
                base.powi(p as i32)
            } else {
                base.powf(p)
            }
        }
        Node::Call(f, args) => {
            let a = eval(&args[0], t, x, u);
            match f {
                Func::Exp => a.exp(),
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
                Func::Abs => a.abs(),
                Func::Min => args[1..].iter().fold(a, |m, b| m.min(eval(b, t, x, u))),
                Func::Max => args[1..].iter().fold(a, |m, b| m.max(eval(b, t, x, u))),
            }
        }
    }
}

impl Expr {
    pub fn parse(source: &str) -> Result<Self, ExprError> {
        let toks = tokenize(source)?;
        let mut p = Parser {
            toks,
            pos: 0,
            end_col: source.chars().count() + 1,
        };
        let root = p.sum()?;
        if p.pos != p.toks.len() {
            return p.err("trailing input");
        }
        let mut e = Expr {
            source: source.trim().to_string(),
            root,
            max_x: 0,
            max_u: 0,
        };
        let root = e.root.clone();
        scan(&root, &mut e);
        Ok(e)
    }

    pub fn eval(&self, t: f64, x: &[f64], u: &[f64]) -> f64 {
        eval(&self.root, t, x, u)
    }

    /// Highest `x` index used, 1-based (0 if none).
    pub fn max_x(&self) -> usize {
        self.max_x
    }

    /// Highest `u` index used, 1-based (0 if none).
    pub fn max_u(&self) -> usize {
        self.max_u
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}
