//! A small arithmetic language for spatial fields.
//!
//! Exponents `p(x)`, `q(x)`, weights `mu(x)` and friends are written as text
//! and parsed into an [`Expr`] tree. The grammar, in EBNF:
//!
//! ```text
//! expr    = term , { ("+" | "-") , term } ;
//! term    = power , { ("*" | "/") , power } ;
//! power   = signed , [ "^" , power ] ;            (* right associative *)
//! signed  = "-" , signed | primary ;               (* -a^b parses as (-a)^b *)
//! primary = number | "x" | "y" | "t" | "pi"
//!         | func , "(" , expr , { "," , expr } , ")"
//!         | "(" , expr , ")" ;
//! func    = "sin" | "cos" | "exp" | "abs" | "sqrt" | "min" | "max" ;
//! number  = digit , { digit } , [ "." , { digit } ] , [ exponent ]
//!         | "." , digit , { digit } , [ exponent ] ;
//! exponent = ("e" | "E") , [ "+" | "-" ] , digit , { digit } ;
//! ```
//!
//! `min` and `max` take two arguments, every other function one. Whitespace
//! is insignificant. The variable `t` is only bound when evaluating a
//! nonlinearity `f(x, t)`; spatial fields referencing it fail to evaluate.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X,
    Y,
    T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Abs,
    Sqrt,
    Min,
    Max,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "abs" => Func::Abs,
            "sqrt" => Func::Sqrt,
            "min" => Func::Min,
            "max" => Func::Max,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Abs => "abs",
            Func::Sqrt => "sqrt",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max => 2,
            _ => 1,
        }
    }
}

/// Expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

/// Renders fully parenthesised text that parses back to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{}", v),
            Expr::Var(Var::X) => f.write_str("x"),
            Expr::Var(Var::Y) => f.write_str("y"),
            Expr::Var(Var::T) => f.write_str("t"),
            Expr::Neg(a) => write!(f, "(-{})", a),
            Expr::Bin(op, a, b) => {
                let sym = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                write!(f, "({} {} {})", a, sym, b)
            }
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{}", a)?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("syntax error at offset {offset}: expected {expected}")]
pub struct ParseError {
    /// 0-based character offset into the source.
    pub offset: usize,
    pub expected: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalErrorKind {
    DivisionByZero,
    /// Argument outside the function's real domain, e.g. `sqrt(-1)`.
    Domain,
    /// Overflow or an undefined power such as `(-2)^0.5`.
    NonFinite,
    UnboundVariable,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("evaluation error ({kind:?}) in `{subexpr}`")]
pub struct EvalError {
    pub kind: EvalErrorKind,
    /// The offending subexpression, rendered.
    pub subexpr: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Tok {
    Num(f64),
    Ident(usize, usize),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    End,
}

fn describe(t: &Tok, src: &[char]) -> String {
    match t {
        Tok::Num(v) => format!("number {}", v),
        Tok::Ident(a, b) => {
            let s: String = src[*a..*b].iter().collect();
            format!("identifier `{}`", s)
        }
        Tok::Plus => "`+`".into(),
        Tok::Minus => "`-`".into(),
        Tok::Star => "`*`".into(),
        Tok::Slash => "`/`".into(),
        Tok::Caret => "`^`".into(),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Comma => "`,`".into(),
        Tok::End => "end of input".into(),
    }
}

fn tokenize(src: &[char]) -> Result<Vec<(Tok, usize)>, ParseError> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < src.len() {
        let c = src[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            _ if c.is_ascii_digit() || c == '.' => {
                let mut j = i;
                while j < src.len() && src[j].is_ascii_digit() {
                    j += 1;
                }
                if j < src.len() && src[j] == '.' {
                    j += 1;
                    while j < src.len() && src[j].is_ascii_digit() {
                        j += 1;
                    }
                }
                if j < src.len() && (src[j] == 'e' || src[j] == 'E') {
                    let mut k = j + 1;
                    if k < src.len() && (src[k] == '+' || src[k] == '-') {
                        k += 1;
                    }
                    if k < src.len() && src[k].is_ascii_digit() {
                        while k < src.len() && src[k].is_ascii_digit() {
                            k += 1;
                        }
                        j = k;
                    }
                }
                let text: String = src[i..j].iter().collect();
                let v: f64 = text.parse().map_err(|_| ParseError {
                    offset: start,
                    expected: "a number".into(),
                })?;
                i = j;
                out.push((Tok::Num(v), start));
                continue;
            }
            _ if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i;
                while j < src.len() && (src[j].is_ascii_alphanumeric() || src[j] == '_') {
                    j += 1;
                }
                i = j;
                out.push((Tok::Ident(start, j), start));
                continue;
            }
            _ => {
                return Err(ParseError {
                    offset: start,
                    expected: "a number, variable, function, operator or parenthesis".into(),
                })
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

struct Parser<'a> {
    src: &'a [char],
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Tok {
        self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.peek();
        if t != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &str) -> ParseError {
        ParseError {
            offset: self.offset(),
            expected: format!("{}, found {}", expected, describe(&self.peek(), self.src)),
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(what))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.power()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.power()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.signed()?;
        if self.peek() == Tok::Caret {
            self.bump();
            let exp = self.power()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn signed(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == Tok::Minus {
            self.bump();
            let inner = self.signed()?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Num(v))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(a, b) => {
                let name: String = self.src[a..b].iter().collect();
                match name.as_str() {
                    "x" => {
                        self.bump();
                        Ok(Expr::Var(Var::X))
                    }
                    "y" => {
                        self.bump();
                        Ok(Expr::Var(Var::Y))
                    }
                    "t" => {
                        self.bump();
                        Ok(Expr::Var(Var::T))
                    }
                    "pi" => {
                        self.bump();
                        Ok(Expr::Num(core::f64::consts::PI))
                    }
                    _ => {
                        let Some(func) = Func::from_name(&name) else {
                            return Err(self.error("a variable (x, y, t), `pi` or a known function"));
                        };
                        self.bump();
                        self.expect(Tok::LParen, "`(` after function name")?;
                        let mut args = Vec::with_capacity(func.arity());
                        args.push(self.expr()?);
                        while args.len() < func.arity() {
                            self.expect(Tok::Comma, "`,`")?;
                            args.push(self.expr()?);
                        }
                        self.expect(Tok::RParen, "`)`")?;
                        Ok(Expr::Call(func, args))
                    }
                }
            }
            _ => Err(self.error("an expression")),
        }
    }
}

/// Parses `src` under the grammar in the module docs.
pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let toks = tokenize(&chars)?;
    let mut p = Parser {
        src: &chars,
        toks,
        pos: 0,
    };
    if p.peek() == Tok::End {
        return Err(p.error("an expression"));
    }
    let e = p.expr()?;
    if p.peek() != Tok::End {
        return Err(p.error("an operator or end of input"));
    }
    Ok(e)
}

/// Variable bindings for evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Env {
    pub x: f64,
    pub y: f64,
    pub t: Option<f64>,
}

impl Env {
    pub fn at(point: [f64; 2]) -> Self {
        Env {
            x: point[0],
            y: point[1],
            t: None,
        }
    }

    pub fn with_t(point: [f64; 2], t: f64) -> Self {
        Env {
            x: point[0],
            y: point[1],
            t: Some(t),
        }
    }
}

impl Expr {
    pub fn eval(&self, env: &Env) -> Result<f64, EvalError> {
        let fail = |kind| EvalError {
            kind,
            subexpr: self.to_string(),
        };
        let v = match self {
            Expr::Num(v) => *v,
            Expr::Var(Var::X) => env.x,
            Expr::Var(Var::Y) => env.y,
            Expr::Var(Var::T) => env.t.ok_or_else(|| fail(EvalErrorKind::UnboundVariable))?,
            Expr::Neg(a) => -a.eval(env)?,
            Expr::Bin(op, a, b) => {
                let a = a.eval(env)?;
                let b = b.eval(env)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(fail(EvalErrorKind::DivisionByZero));
                        }
                        a / b
                    }
                    BinOp::Pow => {
                        if a == 0.0 && b < 0.0 {
                            return Err(fail(EvalErrorKind::DivisionByZero));
                        }
                        math::powf(a, b)
                    }
                }
            }
            Expr::Call(func, args) => {
                let a = args[0].eval(env)?;
                match func {
                    Func::Sin => math::sin(a),
                    Func::Cos => math::cos(a),
                    Func::Exp => math::exp(a),
                    Func::Abs => a.abs(),
                    Func::Sqrt => {
                        if a < 0.0 {
                            return Err(fail(EvalErrorKind::Domain));
                        }
                        math::sqrt(a)
                    }
                    Func::Min => a.min(args[1].eval(env)?),
                    Func::Max => a.max(args[1].eval(env)?),
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(fail(EvalErrorKind::NonFinite))
        }
    }

    /// The value if the tree contains no variables.
    pub fn constant_value(&self) -> Option<f64> {
        if self.mentions(Var::X) || self.mentions(Var::Y) || self.mentions(Var::T) {
            return None;
        }
        self.eval(&Env::at([0.0, 0.0])).ok()
    }

    pub fn mentions(&self, var: Var) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Var(v) => *v == var,
            Expr::Neg(a) => a.mentions(var),
            Expr::Bin(_, a, b) => a.mentions(var) || b.mentions(var),
            Expr::Call(_, args) => args.iter().any(|a| a.mentions(var)),
        }
    }
}

/// A labelled spatial function (exponent or coefficient).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub label: String,
    pub expr: Expr,
}

impl ScalarField {
    pub fn new(label: impl Into<String>, expr: Expr) -> Self {
        ScalarField {
            label: label.into(),
            expr,
        }
    }

    pub fn parse(label: impl Into<String>, src: &str) -> Result<Self, ParseError> {
        Ok(Self::new(label, parse_expr(src)?))
    }

    pub fn constant(label: impl Into<String>, value: f64) -> Self {
        Self::new(label, Expr::Num(value))
    }

    pub fn eval(&self, point: [f64; 2]) -> Result<f64, EvalError> {
        self.expr.eval(&Env::at(point))
    }
}

/// The geometric domain Ω.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DomainSpec {
    Rect { x0: f64, y0: f64, x1: f64, y1: f64 },
    Disc { center: [f64; 2], radius: f64 },
}

impl DomainSpec {
    pub fn unit_square() -> Self {
        DomainSpec::Rect {
            x0: 0.0,
            y0: 0.0,
            x1: 1.0,
            y1: 1.0,
        }
    }

    /// `[x0, y0, x1, y1]`.
    pub fn bounding_box(&self) -> [f64; 4] {
        match *self {
            DomainSpec::Rect { x0, y0, x1, y1 } => [x0, y0, x1, y1],
            DomainSpec::Disc { center, radius } => [
                center[0] - radius,
                center[1] - radius,
                center[0] + radius,
                center[1] + radius,
            ],
        }
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        match *self {
            DomainSpec::Rect { x0, y0, x1, y1 } => {
                p[0] >= x0 && p[0] <= x1 && p[1] >= y0 && p[1] <= y1
            }
            DomainSpec::Disc { center, radius } => {
                math::hypot(p[0] - center[0], p[1] - center[1]) <= radius * (1.0 + 1e-12)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExtremaError {
    #[error("grid resolution must be at least 2 per axis, got {0}")]
    Resolution(usize),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Minimum and maximum of `f` over an `n x n` grid on the domain's bounding
/// box, keeping only points inside the domain. Disc domains always include
/// their centre.
pub fn field_extrema(
    f: &ScalarField,
    domain: &DomainSpec,
    n: usize,
) -> Result<(f64, f64), ExtremaError> {
    extrema_of(|p| f.eval(p), domain, n)
}

/// [`field_extrema`] for an arbitrary fallible function of the position.
pub fn extrema_of(
    f: impl Fn([f64; 2]) -> Result<f64, EvalError>,
    domain: &DomainSpec,
    n: usize,
) -> Result<(f64, f64), ExtremaError> {
    if n < 2 {
        return Err(ExtremaError::Resolution(n));
    }
    let [x0, y0, x1, y1] = domain.bounding_box();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut visit = |p: [f64; 2]| -> Result<(), EvalError> {
        let v = f(p)?;
        lo = lo.min(v);
        hi = hi.max(v);
        Ok(())
    };
    if let DomainSpec::Disc { center, .. } = domain {
        visit(*center)?;
    }
    let last = (n - 1) as f64;
    for j in 0..n {
        let y = y0 + (y1 - y0) * (j as f64) / last;
        for i in 0..n {
            let x = x0 + (x1 - x0) * (i as f64) / last;
            if domain.contains([x, y]) {
                visit([x, y])?;
            }
        }
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn ev(src: &str, x: f64, y: f64) -> f64 {
        parse_expr(src).unwrap().eval(&Env::at([x, y])).unwrap()
    }

    #[test]
    fn literal() {
        assert_eq!(parse_expr("2.5").unwrap(), Expr::Num(2.5));
        assert_eq!(parse_expr("1e-3").unwrap(), Expr::Num(1e-3));
        assert_eq!(parse_expr(".5E+1").unwrap(), Expr::Num(5.0));
    }

    #[test]
    fn sin_field_at_origin() {
        assert_eq!(ev("2.5 + 0.1*sin(x)", 0.0, 0.0), 2.5);
    }

    #[test]
    fn unbalanced_paren_offset() {
        let e = parse_expr("2*(x+").unwrap_err();
        assert_eq!(e.offset, 5);
        assert!(e.expected.contains("expression"));
    }

    #[test]
    fn other_syntax_errors() {
        assert_eq!(parse_expr("").unwrap_err().offset, 0);
        assert_eq!(parse_expr("x y").unwrap_err().offset, 2);
        assert_eq!(parse_expr("foo(x)").unwrap_err().offset, 0);
        assert_eq!(parse_expr("min(x)").unwrap_err().offset, 5);
        assert_eq!(parse_expr("2 # 3").unwrap_err().offset, 2);
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("1+2*3", 0.0, 0.0), 7.0);
        assert_eq!(ev("2^3^2", 0.0, 0.0), 512.0);
        assert_eq!(ev("-2^2", 0.0, 0.0), 4.0);
        assert_eq!(ev("2^-1", 0.0, 0.0), 0.5);
        assert_eq!(ev("8/4/2", 0.0, 0.0), 1.0);
        assert_eq!(ev("1-2-3", 0.0, 0.0), -4.0);
        assert_eq!(ev("max(x, y) - min(x, y)", 3.0, 5.0), 2.0);
    }

    #[test]
    fn eval_examples() {
        assert_eq!(ev("x^2+y", 2.0, 1.0), 5.0);
        assert_eq!(ev("2.8", 0.3, -7.0), 2.8);
        let err = parse_expr("1/x").unwrap().eval(&Env::at([0.0, 0.0])).unwrap_err();
        assert_eq!(err.kind, EvalErrorKind::DivisionByZero);
        assert_eq!(err.subexpr, "(1 / x)");
        let err = parse_expr("1 + sqrt(x)").unwrap().eval(&Env::at([-1.0, 0.0])).unwrap_err();
        assert_eq!(err.kind, EvalErrorKind::Domain);
        assert_eq!(err.subexpr, "sqrt(x)");
        let err = parse_expr("exp(1000)").unwrap().eval(&Env::at([0.0, 0.0])).unwrap_err();
        assert_eq!(err.kind, EvalErrorKind::NonFinite);
        let err = parse_expr("t").unwrap().eval(&Env::at([0.0, 0.0])).unwrap_err();
        assert_eq!(err.kind, EvalErrorKind::UnboundVariable);
        assert_eq!(
            parse_expr("x*t").unwrap().eval(&Env::with_t([2.0, 0.0], 3.0)).unwrap(),
            6.0
        );
    }

    #[test]
    fn roundtrip_display() {
        for src in ["2.5 + 0.1*sin(x)", "-x^2^-y", "min(1, max(x, y)) / (1 + abs(-y))", "pi*x"] {
            let e = parse_expr(src).unwrap();
            let again = parse_expr(&e.to_string()).unwrap();
            assert_eq!(e, again, "{}", src);
        }
    }

    #[test]
    fn constant_detection() {
        assert_eq!(parse_expr("2*1.5").unwrap().constant_value(), Some(3.0));
        assert_eq!(parse_expr("2*x").unwrap().constant_value(), None);
    }

    #[test]
    fn extrema_examples() {
        let c = ScalarField::constant("p", 2.5);
        assert_eq!(field_extrema(&c, &DomainSpec::unit_square(), 5).unwrap(), (2.5, 2.5));

        let x = ScalarField::parse("p", "x").unwrap();
        assert_eq!(field_extrema(&x, &DomainSpec::unit_square(), 2).unwrap(), (0.0, 1.0));

        let s = ScalarField::parse("p", "2.5 + 0.1*sin(x)").unwrap();
        let pi = core::f64::consts::PI;
        let sq = DomainSpec::Rect {
            x0: 0.0,
            y0: 0.0,
            x1: pi,
            y1: pi,
        };
        let (lo, hi) = field_extrema(&s, &sq, 101).unwrap();
        // dense reference: the field only depends on x, so sample 10001 abscissae
        let (mut rlo, mut rhi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..10001 {
            let v = s.eval([pi * i as f64 / 10000.0, 0.0]).unwrap();
            rlo = rlo.min(v);
            rhi = rhi.max(v);
        }
        assert!((lo - 2.5).abs() < 1e-3 && (hi - 2.6).abs() < 1e-3);
        assert!((lo - rlo).abs() < 1e-3 && (hi - rhi).abs() < 1e-3);

        assert_eq!(
            field_extrema(&c, &DomainSpec::unit_square(), 1),
            Err(ExtremaError::Resolution(1))
        );
        let bad = ScalarField::parse("p", "1/x").unwrap();
        assert!(matches!(
            field_extrema(&bad, &DomainSpec::unit_square(), 3),
            Err(ExtremaError::Eval(_))
        ));
    }

    #[test]
    fn extrema_disc_includes_center() {
        let f = ScalarField::parse("mu", "x*x + y*y").unwrap();
        let d = DomainSpec::Disc {
            center: [0.0, 0.0],
            radius: 1.0,
        };
        let (lo, hi) = field_extrema(&f, &d, 2).unwrap();
        assert_eq!((lo, hi), (0.0, 0.0));
        let (lo, hi) = field_extrema(&f, &d, 3).unwrap();
        assert_eq!(lo, 0.0);
        assert!((hi - 1.0).abs() < 1e-12);
    }

    #[test]
    fn call_arity_is_fixed() {
        let e = parse_expr("max(1, 2)").unwrap();
        assert_eq!(e, Expr::Call(Func::Max, vec![Expr::Num(1.0), Expr::Num(2.0)]));
    }
}
