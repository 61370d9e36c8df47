//! A tiny expression language for user-defined fields.
//!
//! ```text
//! field   := expr (';' expr)*
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?
//! primary := number | var | func '(' expr ')' | '(' expr ')'
//! ```
//!
//! Variables are `x1..xd`; functions are `sin cos exp tanh sqrt abs`. `^` binds
//! tighter than unary minus and is right-associative, so `-x1^2^3` is
//! `-(x1^(2^3))`.

use std::fmt;

use crate::error::{Error, EvalError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Tanh,
    Sqrt,
    Abs,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "tanh" => Func::Tanh,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Tanh => "tanh",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    pub const ALL: [Func; 6] = [Func::Sin, Func::Cos, Func::Exp, Func::Tanh, Func::Sqrt, Func::Abs];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// Zero-based variable index (`x1` is `Var(0)`).
    Var(usize),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

fn finite(v: f64, what: &'static str) -> std::result::Result<f64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::Overflow(what))
    }
}

impl Expr {
    pub fn eval(&self, x: &[f64]) -> std::result::Result<f64, EvalError> {
        match self {
            Expr::Num(v) => Ok(*v),
            Expr::Var(i) => Ok(x[*i]),
            Expr::Neg(e) => Ok(-e.eval(x)?),
            Expr::Bin(op, l, r) => {
                let a = l.eval(x)?;
                let b = r.eval(x)?;
                match op {
                    BinOp::Add => finite(a + b, "+"),
                    BinOp::Sub => finite(a - b, "-"),
                    BinOp::Mul => finite(a * b, "*"),
                    BinOp::Div => {
                        if b == 0.0 {
                            Err(EvalError::DivisionByZero)
                        } else {
                            finite(a / b, "/")
                        }
                    }
                    BinOp::Pow => {
                        let v = if b.fract() == 0.0 && b.abs() <= 64.0 {
                            if a == 0.0 && b < 0.0 {
                                return Err(EvalError::DivisionByZero);
                            }
                            a.powi(b as i32)
                        } else {
                            a.powf(b)
                        };
                        if v.is_nan() {
                            Err(EvalError::Domain("^"))
                        } else {
                            finite(v, "^")
                        }
                    }
                }
            }
            Expr::Call(f, e) => {
                let a = e.eval(x)?;
                let v = match f {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Exp => a.exp(),
                    Func::Tanh => a.tanh(),
                    Func::Sqrt => {
                        if a < 0.0 {
                            return Err(EvalError::Domain("sqrt"));
                        }
                        a.sqrt()
                    }
                    Func::Abs => a.abs(),
                };
                finite(v, f.name())
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Bin(BinOp::Pow, ..) => 4,
            Expr::Num(_) | Expr::Var(_) | Expr::Call(..) => 5,
        }
    }

    /// Largest variable index used, plus one.
    pub fn var_bound(&self) -> usize {
        match self {
            Expr::Num(_) => 0,
            Expr::Var(i) => i + 1,
            Expr::Neg(e) | Expr::Call(_, e) => e.var_bound(),
            Expr::Bin(_, l, r) => l.var_bound().max(r.var_bound()),
        }
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Var(i) => write!(f, "x{}", i + 1),
            Expr::Neg(e) => {
                f.write_str("-")?;
                write_child(f, e, e.precedence() < 3)
            }
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
            Expr::Bin(op, l, r) => {
                let p = self.precedence();
                let (lp, rp) = if *op == BinOp::Pow {
                    // base must be atomic; exponent may be a unary or another power
                    (l.precedence() <= 4, r.precedence() < 3)
                } else {
                    (l.precedence() < p, r.precedence() <= p)
                };
                write_child(f, l, lp)?;
                f.write_str(op.symbol())?;
                write_child(f, r, rp)
            }
        }
    }
}

/// A compiled vector (or matrix) field: one expression tree per component.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldExpr {
    source: String,
    arity: usize,
    components: Vec<Expr>,
}

impl FieldExpr {
    pub fn source(&self) -> &str {
        &self.source
    }

    /// Number of input variables.
    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) -> std::result::Result<(), EvalError> {
        for (o, c) in out.iter_mut().zip(&self.components) {
            *o = c.eval(x)?;
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> std::result::Result<Vec<f64>, EvalError> {
        let mut out = vec![0.0; self.components.len()];
        self.eval_into(x, &mut out)?;
        Ok(out)
    }

    /// Canonical text; parsing it back yields identical trees.
    pub fn print(&self) -> String {
        self.components
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join("; ")
    }
}

impl fmt::Display for FieldExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.print())
    }
}

/// Parses `d` semicolon-separated components over `x1..xd`.
pub fn parse_field_expr(source: &str, d: usize) -> Result<FieldExpr> {
    parse_components(source, d, d)
}

/// Parses `n_components` components over `x1..x{n_vars}` (a `d x d` matrix field
/// uses `n_components = d * d`, row-major).
pub fn parse_components(source: &str, n_vars: usize, n_components: usize) -> Result<FieldExpr> {
    let tokens = lex(source)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        n_vars,
    };
    let mut components = vec![p.expr()?];
    while p.peek().kind == Tok::Semi {
        p.pos += 1;
        components.push(p.expr()?);
    }
    let t = p.peek();
    if t.kind != Tok::Eof {
        return Err(syntax(t, "expected `;` or end of input"));
    }
    if components.len() != n_components {
        return Err(Error::Arity {
            expected: n_components,
            found: components.len(),
        });
    }
    Ok(FieldExpr {
        source: source.to_string(),
        arity: n_vars,
        components,
    })
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Semi,
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    kind: Tok,
    line: usize,
    column: usize,
}

fn syntax(t: &Token, message: &str) -> Error {
    Error::Syntax {
        line: t.line,
        column: t.column,
        message: message.to_string(),
    }
}

fn lex(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let single = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ';' => Some(Tok::Semi),
            _ => None,
        };
        if let Some(kind) = single {
            out.push(Token { kind, line: tl, column: tc });
            i += 1;
            col += 1;
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
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
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text: String = chars[start..i].iter().collect();
            let tok = Token { kind: Tok::Eof, line: tl, column: tc };
            let v: f64 = text
                .parse()
                .map_err(|_| syntax(&tok, &format!("malformed number `{text}`")))?;
            if !v.is_finite() {
                return Err(syntax(&tok, &format!("number `{text}` overflows")));
            }
            out.push(Token { kind: Tok::Num(v), line: tl, column: tc });
            col += i - start;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            out.push(Token { kind: Tok::Ident(text), line: tl, column: tc });
            col += i - start;
            continue;
        }
        let tok = Token { kind: Tok::Eof, line: tl, column: tc };
        return Err(syntax(&tok, &format!("unexpected character `{c}`")));
    }
    out.push(Token { kind: Tok::Eof, line, column: col });
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    n_vars: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.kind != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().kind {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().kind {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek().kind == Tok::Minus {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if self.peek().kind == Tok::Caret {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        let t = self.next();
        match &t.kind {
            Tok::Num(v) => Ok(Expr::Num(*v)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect_rparen()?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if let Some(func) = Func::from_name(name) {
                    if self.peek().kind != Tok::LParen {
                        return Err(syntax(self.peek(), &format!("expected `(` after `{name}`")));
                    }
                    self.pos += 1;
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                match parse_var(name) {
                    Some(k) if k >= 1 && k <= self.n_vars => Ok(Expr::Var(k - 1)),
                    _ => Err(Error::UnknownIdentifier {
                        name: name.clone(),
                        line: t.line,
                        column: t.column,
                    }),
                }
            }
            Tok::Eof => Err(syntax(&t, "unexpected end of input")),
            other => Err(syntax(&t, &format!("unexpected token {}", describe(other)))),
        }
    }

    fn expect_rparen(&mut self) -> Result<()> {
        let t = self.next();
        if t.kind == Tok::RParen {
            Ok(())
        } else {
            Err(syntax(&t, "expected `)`"))
        }
    }
}

fn parse_var(name: &str) -> Option<usize> {
    let digits = name.strip_prefix('x')?;
    if digits.is_empty() || digits.starts_with('0') || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(v) => format!("number {v}"),
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Plus => "`+`".into(),
        Tok::Minus => "`-`".into(),
        Tok::Star => "`*`".into(),
        Tok::Slash => "`/`".into(),
        Tok::Caret => "`^`".into(),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Semi => "`;`".into(),
        Tok::Eof => "end of input".into(),
    }
}
