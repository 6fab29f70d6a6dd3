//! Forward-mode evaluation over plain numbers, first-order jets and
//! second-order jets. One generic walker serves all three; each number type
//! only has to know the ring operations and how to compose with a scalar
//! function given its value and first two derivatives.

use nalgebra::{DMatrix, DVector};

use super::{BinaryOp, Expr, ExprError, UnaryOp};

/// Value with gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet1 {
    pub value: f64,
    pub grad: Vec<f64>,
}

/// Value with gradient and Hessian. The Hessian is stored as its packed
/// upper triangle, so it is symmetric by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub grad: Vec<f64>,
    hess: Vec<f64>,
}

#[inline]
fn packed(i: usize, j: usize, n: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + j
}

impl Jet2 {
    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    pub fn hess(&self, i: usize, j: usize) -> f64 {
        self.hess[packed(i, j, self.dim())]
    }

    pub fn gradient(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.grad)
    }

    pub fn hessian(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.hess(i, j))
    }
}

/// Number types the evaluator can run over.
pub(crate) trait Scalar: Sized {
    /// Highest derivative order carried.
    const ORDER: usize;
    fn constant(c: f64, n: usize) -> Self;
    fn variable(i: usize, x: f64, n: usize) -> Self;
    fn value(&self) -> f64;
    fn add(self, other: &Self) -> Self;
    fn sub(self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(self) -> Self;
    /// Compose with a univariate function whose value and first two
    /// derivatives at `self.value()` are `f0, f1, f2`.
    fn chain(&self, f0: f64, f1: f64, f2: f64) -> Self;
}

impl Scalar for f64 {
    const ORDER: usize = 0;
    fn constant(c: f64, _: usize) -> Self {
        c
    }
    fn variable(_: usize, x: f64, _: usize) -> Self {
        x
    }
    fn value(&self) -> f64 {
        *self
    }
    fn add(self, other: &Self) -> Self {
        self + other
    }
    fn sub(self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(self) -> Self {
        -self
    }
    fn chain(&self, f0: f64, _: f64, _: f64) -> Self {
        f0
    }
}

impl Scalar for Jet1 {
    const ORDER: usize = 1;
    fn constant(c: f64, n: usize) -> Self {
        Jet1 {
            value: c,
            grad: vec![0.0; n],
        }
    }
    fn variable(i: usize, x: f64, n: usize) -> Self {
        let mut j = Self::constant(x, n);
        j.grad[i] = 1.0;
        j
    }
    fn value(&self) -> f64 {
        self.value
    }
    fn add(mut self, other: &Self) -> Self {
        self.value += other.value;
        self.grad.iter_mut().zip(&other.grad).for_each(|(a, b)| *a += b);
        self
    }
    fn sub(mut self, other: &Self) -> Self {
        self.value -= other.value;
        self.grad.iter_mut().zip(&other.grad).for_each(|(a, b)| *a -= b);
        self
    }
    fn mul(&self, other: &Self) -> Self {
        let (a, b) = (self.value, other.value);
        Jet1 {
            value: a * b,
            grad: self
                .grad
                .iter()
                .zip(&other.grad)
                .map(|(ga, gb)| a * gb + b * ga)
                .collect(),
        }
    }
    fn neg(mut self) -> Self {
        self.value = -self.value;
        self.grad.iter_mut().for_each(|g| *g = -*g);
        self
    }
    fn chain(&self, f0: f64, f1: f64, _: f64) -> Self {
        Jet1 {
            value: f0,
            grad: self.grad.iter().map(|g| f1 * g).collect(),
        }
    }
}

impl Scalar for Jet2 {
    const ORDER: usize = 2;
    fn constant(c: f64, n: usize) -> Self {
        Jet2 {
            value: c,
            grad: vec![0.0; n],
            hess: vec![0.0; n * (n + 1) / 2],
        }
    }
    fn variable(i: usize, x: f64, n: usize) -> Self {
        let mut j = Self::constant(x, n);
        j.grad[i] = 1.0;
        j
    }
    fn value(&self) -> f64 {
        self.value
    }
    fn add(mut self, other: &Self) -> Self {
        self.value += other.value;
        self.grad.iter_mut().zip(&other.grad).for_each(|(a, b)| *a += b);
        self.hess.iter_mut().zip(&other.hess).for_each(|(a, b)| *a += b);
        self
    }
    fn sub(mut self, other: &Self) -> Self {
        self.value -= other.value;
        self.grad.iter_mut().zip(&other.grad).for_each(|(a, b)| *a -= b);
        self.hess.iter_mut().zip(&other.hess).for_each(|(a, b)| *a -= b);
        self
    }
    fn mul(&self, other: &Self) -> Self {
        let n = self.dim();
        let (a, b) = (self.value, other.value);
        let (ga, gb) = (&self.grad, &other.grad);
        let mut hess = Vec::with_capacity(self.hess.len());
        for i in 0..n {
            for j in i..n {
                let k = packed(i, j, n);
                hess.push(a * other.hess[k] + b * self.hess[k] + ga[i] * gb[j] + gb[i] * ga[j]);
            }
        }
        Jet2 {
            value: a * b,
            grad: ga.iter().zip(gb).map(|(x, y)| a * y + b * x).collect(),
            hess,
        }
    }
    fn neg(mut self) -> Self {
        self.value = -self.value;
        self.grad.iter_mut().for_each(|g| *g = -*g);
        self.hess.iter_mut().for_each(|h| *h = -*h);
        self
    }
    fn chain(&self, f0: f64, f1: f64, f2: f64) -> Self {
        let n = self.dim();
        let g = &self.grad;
        let mut hess = Vec::with_capacity(self.hess.len());
        for i in 0..n {
            for j in i..n {
                hess.push(f1 * self.hess[packed(i, j, n)] + f2 * g[i] * g[j]);
            }
        }
        Jet2 {
            value: f0,
            grad: g.iter().map(|x| f1 * x).collect(),
            hess,
        }
    }
}

fn domain(e: &Expr, reason: impl Into<String>) -> ExprError {
    ExprError::Domain {
        subexpr: e.to_string(),
        reason: reason.into(),
    }
}

/// Value and first two derivatives of `op` at `u`, or the reason it is
/// undefined there. `order` is the highest derivative that will be used.
fn unary_derivatives(op: UnaryOp, u: f64, order: usize) -> Result<(f64, f64, f64), &'static str> {
    Ok(match op {
        UnaryOp::Neg => (-u, -1.0, 0.0),
        UnaryOp::Sin => {
            let (s, c) = u.sin_cos();
            (s, c, -s)
        }
        UnaryOp::Cos => {
            let (s, c) = u.sin_cos();
            (c, -s, -c)
        }
        UnaryOp::Tan => {
            if u.cos() == 0.0 {
                return Err("tangent pole");
            }
            let t = u.tan();
            let sec2 = 1.0 + t * t;
            (t, sec2, 2.0 * t * sec2)
        }
        UnaryOp::Exp => {
            let e = u.exp();
            (e, e, e)
        }
        UnaryOp::Log => {
            if u <= 0.0 {
                return Err("logarithm of a nonpositive number");
            }
            (u.ln(), 1.0 / u, -1.0 / (u * u))
        }
        UnaryOp::Sqrt => {
            if u < 0.0 {
                return Err("square root of a negative number");
            }
            if u == 0.0 && order > 0 {
                return Err("square root is not differentiable at zero");
            }
            let s = u.sqrt();
            (s, 0.5 / s, -0.25 / (s * u))
        }
        UnaryOp::Sinh => (u.sinh(), u.cosh(), u.sinh()),
        UnaryOp::Cosh => (u.cosh(), u.sinh(), u.cosh()),
    })
}

fn pow_derivatives(u: f64, p: f64, order: usize) -> Result<(f64, f64, f64), &'static str> {
    if p == 0.0 {
        return Ok((1.0, 0.0, 0.0));
    }
    let integer = p.fract() == 0.0 && p.abs() <= i32::MAX as f64;
    if integer {
        let k = p as i32;
        if u == 0.0 && k < 0 {
            return Err("division by zero");
        }
        let f0 = u.powi(k);
        if order == 0 {
            return Ok((f0, 0.0, 0.0));
        }
        // powi(0, 0) = 1 keeps the low-order terms right at u = 0.
        let f1 = p * u.powi(k - 1);
        let f2 = if k == 1 { 0.0 } else { p * (p - 1.0) * u.powi(k - 2) };
        Ok((f0, f1, f2))
    } else {
        if u <= 0.0 {
            return Err("non-integer power of a nonpositive base");
        }
        Ok((u.powf(p), p * u.powf(p - 1.0), p * (p - 1.0) * u.powf(p - 2.0)))
    }
}

pub(crate) fn eval_generic<S: Scalar>(e: &Expr, x: &[f64]) -> Result<S, ExprError> {
    let n = x.len();
    let out: S = match e {
        Expr::Const(c) => S::constant(*c, n),
        Expr::Var(i) => S::variable(*i, x[*i], n),
        Expr::Unary(UnaryOp::Neg, a) => eval_generic::<S>(a, x)?.neg(),
        Expr::Unary(op, a) => {
            let a = eval_generic::<S>(a, x)?;
            let (f0, f1, f2) =
                unary_derivatives(*op, a.value(), S::ORDER).map_err(|r| domain(e, r))?;
            a.chain(f0, f1, f2)
        }
        Expr::Binary(op, a, b) => {
            let a = eval_generic::<S>(a, x)?;
            let b = eval_generic::<S>(b, x)?;
            match op {
                BinaryOp::Add => a.add(&b),
                BinaryOp::Sub => a.sub(&b),
                BinaryOp::Mul => a.mul(&b),
                BinaryOp::Div => {
                    let d = b.value();
                    if d == 0.0 {
                        return Err(domain(e, "division by zero"));
                    }
                    a.mul(&b.chain(1.0 / d, -1.0 / (d * d), 2.0 / (d * d * d)))
                }
            }
        }
        Expr::Pow(a, p) => {
            let a = eval_generic::<S>(a, x)?;
            let (f0, f1, f2) = pow_derivatives(a.value(), *p, S::ORDER).map_err(|r| domain(e, r))?;
            a.chain(f0, f1, f2)
        }
        Expr::Sampled(f, a) => {
            let a = eval_generic::<S>(a, x)?;
            let t = a.value();
            if !f.table.contains(t) {
                let (lo, hi) = f.table.domain();
                return Err(domain(e, format!("argument {t} outside sampled range [{lo}, {hi}]")));
            }
            let (f0, f1, f2) = f.table.eval(t);
            a.chain(f0, f1, f2)
        }
    };
    if !out.value().is_finite() {
        return Err(domain(e, "non-finite result"));
    }
    Ok(out)
}

fn check_point(e: &Expr, x: &[f64]) -> Result<(), ExprError> {
    let needed = e.required_dimension();
    if x.len() < needed {
        return Err(ExprError::PointDimension {
            needed,
            got: x.len(),
        });
    }
    Ok(())
}

/// Evaluate to a plain number.
pub fn eval(e: &Expr, x: &[f64]) -> Result<f64, ExprError> {
    check_point(e, x)?;
    eval_generic::<f64>(e, x)
}

/// Evaluate with exact first partial derivatives.
pub fn eval_grad(e: &Expr, x: &[f64]) -> Result<Jet1, ExprError> {
    check_point(e, x)?;
    eval_generic::<Jet1>(e, x)
}

/// Evaluate with exact first and second partial derivatives.
pub fn eval_jet(e: &Expr, x: &[f64]) -> Result<Jet2, ExprError> {
    check_point(e, x)?;
    eval_generic::<Jet2>(e, x)
}

pub(crate) fn apply_unary_f64(op: UnaryOp, c: f64) -> Option<f64> {
    unary_derivatives(op, c, 0)
        .ok()
        .map(|d| d.0)
        .filter(|v| v.is_finite())
}

pub(crate) fn pow_f64(c: f64, p: f64) -> Option<f64> {
    pow_derivatives(c, p, 0)
        .ok()
        .map(|d| d.0)
        .filter(|v| v.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprlang::parse;
    use std::f64::consts::PI;

    #[test]
    fn product_jet() {
        let e = parse("x1*x2", 2).unwrap();
        let j = eval_jet(&e, &[3.0, 5.0]).unwrap();
        assert_eq!(j.value, 15.0);
        assert_eq!(j.grad, vec![5.0, 3.0]);
        assert_eq!(j.hessian(), DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
    }

    #[test]
    fn sine_jet_at_zero() {
        let e = parse("sin(x1)", 1).unwrap();
        let j = eval_jet(&e, &[0.0]).unwrap();
        assert_eq!((j.value, j.grad[0], j.hess(0, 0)), (0.0, 1.0, 0.0));
    }

    #[test]
    fn sine_squared_matches_central_differences() {
        let e = parse("sin(x1)^2", 1).unwrap();
        let t = PI / 3.0;
        let j = eval_jet(&e, &[t]).unwrap();
        let h = 1e-5;
        let fd = (eval(&e, &[t + h]).unwrap() - eval(&e, &[t - h]).unwrap()) / (2.0 * h);
        assert!((j.grad[0] - fd).abs() < 1e-8);
        assert!((j.grad[0] - (2.0 * PI / 3.0).sin()).abs() < 1e-14);
        assert!((j.hess(0, 0) - 2.0 * (2.0 * t).cos()).abs() < 1e-14);
    }

    #[test]
    fn quotient_and_powers() {
        let e = parse("x1 / x2 + x1^0.5 + x2^-2", 2).unwrap();
        let (a, b) = (4.0, 2.0);
        let j = eval_jet(&e, &[a, b]).unwrap();
        assert!((j.value - (2.0 + 2.0 + 0.25)).abs() < 1e-15);
        assert!((j.grad[0] - (1.0 / b + 0.5 / a.sqrt())).abs() < 1e-15);
        assert!((j.grad[1] - (-a / (b * b) - 2.0 / (b * b * b))).abs() < 1e-15);
        assert!((j.hess(0, 1) - (-1.0 / (b * b))).abs() < 1e-15);
        assert!((j.hess(1, 1) - (2.0 * a / b.powi(3) + 6.0 / b.powi(4))).abs() < 1e-14);
        assert!((j.hess(0, 0) - (-0.25 * a.powf(-1.5))).abs() < 1e-15);
    }

    #[test]
    fn first_and_second_order_agree() {
        let e = parse("exp(x1*x2) - log(1 + x3^2) * cosh(x1) / sqrt(2 + sinh(x2))", 3).unwrap();
        let p = [0.3, -0.2, 1.1];
        let j1 = eval_grad(&e, &p).unwrap();
        let j2 = eval_jet(&e, &p).unwrap();
        assert_eq!(j1.value, eval(&e, &p).unwrap());
        for (a, b) in j1.grad.iter().zip(&j2.grad) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn domain_errors_name_the_subexpression() {
        let e = parse("1 + log(x1 - 1)", 1).unwrap();
        match eval(&e, &[1.0]) {
            Err(ExprError::Domain { subexpr, .. }) => assert_eq!(subexpr, "log((x1 - 1.0))"),
            other => panic!("{other:?}"),
        }
        let e = parse("x2 / (x1 - x1)", 2).unwrap();
        assert!(matches!(eval_jet(&e, &[1.0, 1.0]), Err(ExprError::Domain { .. })));
        let e = parse("(x1 - 2)^1.5", 1).unwrap();
        assert!(matches!(eval(&e, &[1.0]), Err(ExprError::Domain { .. })));
        let e = parse("sqrt(x1)", 1).unwrap();
        assert_eq!(eval(&e, &[0.0]).unwrap(), 0.0);
        assert!(eval_grad(&e, &[0.0]).is_err());
    }

    #[test]
    fn integer_powers_at_zero() {
        let e = parse("x1^2 + x1^1 + x1^0", 1).unwrap();
        let j = eval_jet(&e, &[0.0]).unwrap();
        assert_eq!((j.value, j.grad[0], j.hess(0, 0)), (1.0, 1.0, 2.0));
        let e = parse("x1^-1", 1).unwrap();
        assert!(eval(&e, &[0.0]).is_err());
    }

    #[test]
    fn short_point_rejected() {
        let e = parse("x1 + x3", 3).unwrap();
        assert_eq!(
            eval(&e, &[1.0, 2.0]),
            Err(ExprError::PointDimension { needed: 3, got: 2 })
        );
    }
}
