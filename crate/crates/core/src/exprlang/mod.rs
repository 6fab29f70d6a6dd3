//! Scalar coordinate expressions.
//!
//! Metric components, vector fields and Rosen data are written as small
//! arithmetic expressions over the coordinates `x1..xn` (or user-chosen
//! coordinate names). They are parsed into an [`Expr`] tree and evaluated
//! either as plain numbers or over truncated Taylor jets ([`Jet2`]) that
//! carry exact first and second partial derivatives.
//!
//! Grammar (whitespace is insignificant):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | '+' unary | power
//! power   := primary ('^' unary)?          exponent must be constant
//! primary := number | ident | ident '(' expr ')' | '(' expr ')'
//! number  := digits ['.' digits] [('e'|'E') ['+'|'-'] digits]
//! ident   := coordinate name | 'pi' | function name
//! ```
//!
//! Functions: `sin cos tan exp log sqrt sinh cosh`. Trigonometry is in
//! radians. `^` binds tighter than unary minus, so `-x1^2` is `-(x1^2)`.

mod jet;
mod parser;

use std::fmt;
use std::sync::Arc;

pub use jet::{eval, eval_grad, eval_jet, Jet1, Jet2};
pub use parser::{parse, parse_with_names};

use crate::interp::HermiteTable;

/// Errors raised while parsing or evaluating expressions.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExprError {
    #[error("syntax error at position {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("unknown identifier `{name}` at position {pos}")]
    UnknownIdentifier { name: String, pos: usize },
    #[error("variable index {index} out of range for dimension {dimension} (position {pos})")]
    VariableOutOfRange {
        index: usize,
        dimension: usize,
        pos: usize,
    },
    #[error("domain error in `{subexpr}`: {reason}")]
    Domain { subexpr: String, reason: String },
    #[error("point has {got} coordinates, expression needs at least {needed}")]
    PointDimension { needed: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Sinh,
    Cosh,
}

impl UnaryOp {
    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Tan => "tan",
            UnaryOp::Exp => "exp",
            UnaryOp::Log => "log",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Sinh => "sinh",
            UnaryOp::Cosh => "cosh",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => UnaryOp::Sin,
            "cos" => UnaryOp::Cos,
            "tan" => UnaryOp::Tan,
            "exp" => UnaryOp::Exp,
            "log" | "ln" => UnaryOp::Log,
            "sqrt" => UnaryOp::Sqrt,
            "sinh" => UnaryOp::Sinh,
            "cosh" => UnaryOp::Cosh,
            _ => return None,
        })
    }

    pub const FUNCTIONS: [UnaryOp; 8] = [
        UnaryOp::Sin,
        UnaryOp::Cos,
        UnaryOp::Tan,
        UnaryOp::Exp,
        UnaryOp::Log,
        UnaryOp::Sqrt,
        UnaryOp::Sinh,
        UnaryOp::Cosh,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinaryOp {
    pub fn symbol(self) -> char {
        match self {
            BinaryOp::Add => '+',
            BinaryOp::Sub => '-',
            BinaryOp::Mul => '*',
            BinaryOp::Div => '/',
        }
    }
}

/// A univariate function known only through samples, e.g. a wave profile
/// entry `A_ij(t)`. Evaluated through its cubic Hermite interpolant, which
/// supplies the first and second derivatives the jets need.
#[derive(Debug, Clone)]
pub struct SampledFn {
    pub label: String,
    pub table: HermiteTable,
}

impl SampledFn {
    pub fn new(label: impl Into<String>, table: HermiteTable) -> Self {
        Self {
            label: label.into(),
            table,
        }
    }
}

/// Expression tree. Variables are zero-based internally and printed as
/// `x1..xn`.
#[derive(Debug, Clone)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    /// Power with a constant exponent.
    Pow(Box<Expr>, f64),
    /// Sampled function applied to a subexpression. Has no textual form.
    Sampled(Arc<SampledFn>, Box<Expr>),
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        use Expr::*;
        match (self, other) {
            (Const(a), Const(b)) => a.to_bits() == b.to_bits(),
            (Var(a), Var(b)) => a == b,
            (Unary(o1, a), Unary(o2, b)) => o1 == o2 && a == b,
            (Binary(o1, a1, b1), Binary(o2, a2, b2)) => o1 == o2 && a1 == a2 && b1 == b2,
            (Pow(a, p), Pow(b, q)) => p.to_bits() == q.to_bits() && a == b,
            (Sampled(f, a), Sampled(g, b)) => Arc::ptr_eq(f, g) && a == b,
            _ => false,
        }
    }
}

impl Expr {
    pub fn constant(c: f64) -> Self {
        Expr::Const(c)
    }

    pub fn var(i: usize) -> Self {
        Expr::Var(i)
    }

    pub fn unary(op: UnaryOp, e: Expr) -> Self {
        Expr::Unary(op, Box::new(e))
    }

    pub fn binary(op: BinaryOp, a: Expr, b: Expr) -> Self {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn pow(base: Expr, exponent: f64) -> Self {
        Expr::Pow(Box::new(base), exponent)
    }

    pub fn sampled(f: Arc<SampledFn>, arg: Expr) -> Self {
        Expr::Sampled(f, Box::new(arg))
    }

    pub fn add(a: Expr, b: Expr) -> Self {
        Self::binary(BinaryOp::Add, a, b)
    }

    pub fn sub(a: Expr, b: Expr) -> Self {
        Self::binary(BinaryOp::Sub, a, b)
    }

    pub fn mul(a: Expr, b: Expr) -> Self {
        Self::binary(BinaryOp::Mul, a, b)
    }

    pub fn div(a: Expr, b: Expr) -> Self {
        Self::binary(BinaryOp::Div, a, b)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == 0.0)
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    /// Smallest dimension the expression can be evaluated in.
    pub fn required_dimension(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Var(i) => i + 1,
            Expr::Unary(_, a) | Expr::Pow(a, _) | Expr::Sampled(_, a) => a.required_dimension(),
            Expr::Binary(_, a, b) => a.required_dimension().max(b.required_dimension()),
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Unary(_, a) | Expr::Pow(a, _) | Expr::Sampled(_, a) => 1 + a.node_count(),
            Expr::Binary(_, a, b) => 1 + a.node_count() + b.node_count(),
        }
    }

    /// Renumber every variable `xi` to `x(i+offset)`.
    pub fn shift_vars(&self, offset: usize) -> Expr {
        self.map_vars(&|i| i + offset)
    }

    pub fn map_vars(&self, f: &dyn Fn(usize) -> usize) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Var(i) => Expr::Var(f(*i)),
            Expr::Unary(op, a) => Expr::unary(*op, a.map_vars(f)),
            Expr::Binary(op, a, b) => Expr::binary(*op, a.map_vars(f), b.map_vars(f)),
            Expr::Pow(a, p) => Expr::pow(a.map_vars(f), *p),
            Expr::Sampled(s, a) => Expr::sampled(s.clone(), a.map_vars(f)),
        }
    }

    /// Fold constant subtrees. No other rewriting is done.
    pub fn fold_constants(&self) -> Expr {
        match self {
            Expr::Const(_) | Expr::Var(_) => self.clone(),
            Expr::Unary(op, a) => {
                let a = a.fold_constants();
                if let Expr::Const(c) = a {
                    if let Some(v) = jet::apply_unary_f64(*op, c) {
                        return Expr::Const(v);
                    }
                }
                Expr::unary(*op, a)
            }
            Expr::Binary(op, a, b) => {
                let (a, b) = (a.fold_constants(), b.fold_constants());
                if let (Expr::Const(x), Expr::Const(y)) = (&a, &b) {
                    let v = match op {
                        BinaryOp::Add => Some(x + y),
                        BinaryOp::Sub => Some(x - y),
                        BinaryOp::Mul => Some(x * y),
                        BinaryOp::Div => (*y != 0.0).then(|| x / y),
                    };
                    if let Some(v) = v {
                        return Expr::Const(v);
                    }
                }
                Expr::binary(*op, a, b)
            }
            Expr::Pow(a, p) => {
                let a = a.fold_constants();
                if let Expr::Const(c) = a {
                    if let Some(v) = jet::pow_f64(c, *p) {
                        return Expr::Const(v);
                    }
                }
                Expr::pow(a, *p)
            }
            Expr::Sampled(s, a) => Expr::sampled(s.clone(), a.fold_constants()),
        }
    }

    /// Render with the given coordinate names instead of `x1..xn`.
    pub fn display_with<'a>(&'a self, names: &'a [String]) -> impl fmt::Display + 'a {
        Named { expr: self, names }
    }
}

struct Named<'a> {
    expr: &'a Expr,
    names: &'a [String],
}

impl fmt::Display for Named<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self.expr, Some(self.names))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self, None)
    }
}

fn write_number(f: &mut fmt::Formatter<'_>, c: f64) -> fmt::Result {
    if c.is_sign_negative() {
        write!(f, "(-{:?})", -c)
    } else {
        write!(f, "{c:?}")
    }
}

// Fully parenthesised so that parsing the output rebuilds the same tree.
fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr, names: Option<&[String]>) -> fmt::Result {
    match e {
        Expr::Const(c) => write_number(f, *c),
        Expr::Var(i) => match names.and_then(|n| n.get(*i)) {
            Some(name) => write!(f, "{name}"),
            None => write!(f, "x{}", i + 1),
        },
        Expr::Unary(UnaryOp::Neg, a) => {
            write!(f, "(-")?;
            write_expr(f, a, names)?;
            write!(f, ")")
        }
        Expr::Unary(op, a) => {
            write!(f, "{}(", op.name())?;
            write_expr(f, a, names)?;
            write!(f, ")")
        }
        Expr::Binary(op, a, b) => {
            write!(f, "(")?;
            write_expr(f, a, names)?;
            write!(f, " {} ", op.symbol())?;
            write_expr(f, b, names)?;
            write!(f, ")")
        }
        Expr::Pow(a, p) => {
            write!(f, "(")?;
            write_expr(f, a, names)?;
            write!(f, " ^ ")?;
            write_number(f, *p)?;
            write!(f, ")")
        }
        Expr::Sampled(s, a) => {
            write!(f, "{}[{} samples](", s.label, s.table.ts().len())?;
            write_expr(f, a, names)?;
            write!(f, ")")
        }
    }
}
