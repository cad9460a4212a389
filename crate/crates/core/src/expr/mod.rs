//! Entire functions of one complex variable built from a small closed set of
//! constructors, evaluated together with their derivatives by truncated
//! Taylor arithmetic.

pub(crate) mod parse;
pub(crate) mod print;

use num_complex::Complex64;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scaled::{Scaled, ScaledJet};

pub use parse::parse_expr;

/// Default cap on the jet order accepted by [`HoloExpr::eval_jet`].
pub const DEFAULT_ORDER_CAP: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(Complex64),
    Var,
    Add(HoloExpr, HoloExpr),
    Sub(HoloExpr, HoloExpr),
    Mul(HoloExpr, HoloExpr),
    Pow(HoloExpr, u32),
    Exp(HoloExpr),
    Sin(HoloExpr),
    Cos(HoloExpr),
    Neg(HoloExpr),
}

/// Immutable, cheaply cloneable expression tree.
#[derive(Debug, Clone, PartialEq)]
pub struct HoloExpr(Arc<Node>);

/// Derivative values `f^(j)(center)` for `j = 0..=order`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub center: Complex64,
    pub order: usize,
    pub derivs: Vec<Complex64>,
}

impl Jet {
    pub fn truncate(&self, order: usize) -> Jet {
        let order = order.min(self.order);
        Jet {
            center: self.center,
            order,
            derivs: self.derivs[..=order].to_vec(),
        }
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

impl HoloExpr {
    pub fn node(&self) -> &Node {
        &self.0
    }

    fn wrap(node: Node) -> Self {
        HoloExpr(Arc::new(node))
    }

    pub fn constant(v: Complex64) -> Self {
        Self::wrap(Node::Const(v))
    }

    pub fn real(v: f64) -> Self {
        Self::constant(c(v))
    }

    pub fn z() -> Self {
        Self::wrap(Node::Var)
    }

    pub fn as_const(&self) -> Option<Complex64> {
        match self.node() {
            Node::Const(v) => Some(*v),
            _ => None,
        }
    }

    fn is_const(&self, v: f64) -> bool {
        self.as_const() == Some(c(v))
    }

    // Raw constructors keep the tree exactly as written (used by the parser).

    pub fn raw_add(a: Self, b: Self) -> Self {
        Self::wrap(Node::Add(a, b))
    }
    pub fn raw_sub(a: Self, b: Self) -> Self {
        Self::wrap(Node::Sub(a, b))
    }
    pub fn raw_mul(a: Self, b: Self) -> Self {
        Self::wrap(Node::Mul(a, b))
    }
    pub fn raw_pow(a: Self, n: u32) -> Self {
        Self::wrap(Node::Pow(a, n))
    }
    pub fn raw_neg(a: Self) -> Self {
        Self::wrap(Node::Neg(a))
    }
    pub fn exp(a: Self) -> Self {
        match a.as_const() {
            Some(v) if v == c(0.0) => Self::real(1.0),
            _ => Self::wrap(Node::Exp(a)),
        }
    }
    pub fn sin(a: Self) -> Self {
        Self::wrap(Node::Sin(a))
    }
    pub fn cos(a: Self) -> Self {
        Self::wrap(Node::Cos(a))
    }

    /// `a^n` with the trivial exponents folded.
    pub fn pow(a: Self, n: u32) -> Self {
        match n {
            0 => Self::real(1.0),
            1 => a,
            _ => {
                if a.is_const(1.0) || a.is_const(0.0) {
                    return a;
                }
                Self::raw_pow(a, n)
            }
        }
    }

    /// Symbolic derivative with light constant folding.
    pub fn derivative(&self) -> HoloExpr {
        match self.node() {
            Node::Const(_) => Self::real(0.0),
            Node::Var => Self::real(1.0),
            Node::Add(a, b) => a.derivative() + b.derivative(),
            Node::Sub(a, b) => a.derivative() - b.derivative(),
            Node::Mul(a, b) => a.derivative() * b.clone() + a.clone() * b.derivative(),
            Node::Pow(a, n) => {
                Self::real(*n as f64) * Self::pow(a.clone(), n - 1) * a.derivative()
            }
            Node::Exp(a) => self.clone() * a.derivative(),
            Node::Sin(a) => Self::cos(a.clone()) * a.derivative(),
            Node::Cos(a) => -(Self::sin(a.clone()) * a.derivative()),
            Node::Neg(a) => -a.derivative(),
        }
    }

    pub fn nth_derivative(&self, n: usize) -> HoloExpr {
        (0..n).fold(self.clone(), |e, _| e.derivative())
    }

    /// Jet in scaled form; `order` is not capped here.
    pub fn eval_scaled(&self, z: Complex64, order: usize) -> Result<ScaledJet> {
        match self.node() {
            Node::Const(v) => Ok(ScaledJet::constant(*v, order)),
            Node::Var => Ok(ScaledJet::variable(z, order)),
            Node::Add(a, b) => Ok(a.eval_scaled(z, order)?.add(&b.eval_scaled(z, order)?)),
            Node::Sub(a, b) => Ok(a.eval_scaled(z, order)?.sub(&b.eval_scaled(z, order)?)),
            Node::Mul(a, b) => {
                if let Some(k) = a.as_const() {
                    return Ok(b.eval_scaled(z, order)?.scale(k));
                }
                if let Some(k) = b.as_const() {
                    return Ok(a.eval_scaled(z, order)?.scale(k));
                }
                Ok(a.eval_scaled(z, order)?.mul(&b.eval_scaled(z, order)?))
            }
            Node::Pow(a, n) => Ok(a.eval_scaled(z, order)?.powi(*n)),
            Node::Exp(a) => a.eval_scaled(z, order)?.exp(),
            Node::Sin(a) => Ok(a.eval_scaled(z, order)?.sin_cos()?.0),
            Node::Cos(a) => Ok(a.eval_scaled(z, order)?.sin_cos()?.1),
            Node::Neg(a) => Ok(a.eval_scaled(z, order)?.neg()),
        }
    }

    pub fn eval_value(&self, z: Complex64) -> Result<Scaled> {
        Ok(self.eval_scaled(z, 0)?.value())
    }

    /// Derivative values up to `order` (capped at [`DEFAULT_ORDER_CAP`]).
    pub fn eval_jet(&self, z: Complex64, order: usize) -> Result<Jet> {
        self.eval_jet_capped(z, order, DEFAULT_ORDER_CAP)
    }

    pub fn eval_jet_capped(&self, z: Complex64, order: usize, cap: usize) -> Result<Jet> {
        if order > cap {
            return Err(Error::OrderCap { order, cap });
        }
        let jet = self.eval_scaled(z, order)?;
        let plain = ScaledJet {
            coeffs: jet.derivative_mantissas(),
            exp: jet.exp,
        }
        .plain_coeffs()?;
        Ok(Jet {
            center: z,
            order,
            derivs: plain,
        })
    }

    /// Numerical test for `self ≡ 0`: every sample point must evaluate to
    /// (relative) zero.
    pub fn is_identically_zero(&self) -> Result<bool> {
        for z in probe_points() {
            let v = self.eval_value(z)?;
            if !v.is_zero() && v.ln_abs() > -30.0 * std::f64::consts::LN_10 {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Deterministic probe points in the disc `|z| < 3`.
pub(crate) fn probe_points() -> impl Iterator<Item = Complex64> {
    (0..16).map(|i| {
        let t = i as f64;
        let rho = 0.4 + 2.5 * ((t * 0.618_033_988_749_895).fract());
        let th = 2.399_963_229_728_653 * t + 0.3;
        Complex64::from_polar(rho, th)
    })
}

impl Add for HoloExpr {
    type Output = HoloExpr;
    fn add(self, rhs: HoloExpr) -> HoloExpr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => HoloExpr::constant(a + b),
            (Some(a), _) if a == c(0.0) => rhs,
            (_, Some(b)) if b == c(0.0) => self,
            _ => HoloExpr::raw_add(self, rhs),
        }
    }
}

impl Sub for HoloExpr {
    type Output = HoloExpr;
    fn sub(self, rhs: HoloExpr) -> HoloExpr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => HoloExpr::constant(a - b),
            (_, Some(b)) if b == c(0.0) => self,
            (Some(a), _) if a == c(0.0) => -rhs,
            _ => HoloExpr::raw_sub(self, rhs),
        }
    }
}

impl Mul for HoloExpr {
    type Output = HoloExpr;
    fn mul(self, rhs: HoloExpr) -> HoloExpr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => HoloExpr::constant(a * b),
            (Some(a), _) if a == c(0.0) => self,
            (_, Some(b)) if b == c(0.0) => rhs,
            (Some(a), _) if a == c(1.0) => rhs,
            (_, Some(b)) if b == c(1.0) => self,
            _ => HoloExpr::raw_mul(self, rhs),
        }
    }
}

impl Neg for HoloExpr {
    type Output = HoloExpr;
    fn neg(self) -> HoloExpr {
        match self.node() {
            Node::Const(v) => HoloExpr::constant(-*v),
            Node::Neg(a) => a.clone(),
            _ => HoloExpr::raw_neg(self),
        }
    }
}

/// Quotient of two entire functions.
#[derive(Debug, Clone, PartialEq)]
pub struct MeroFn {
    pub numerator: HoloExpr,
    pub denominator: HoloExpr,
}

impl MeroFn {
    pub fn new(numerator: HoloExpr, denominator: HoloExpr) -> Result<Self> {
        if denominator.is_identically_zero()? {
            return Err(Error::Degenerate("denominator vanishes identically".into()));
        }
        Ok(MeroFn {
            numerator,
            denominator,
        })
    }

    pub fn entire(f: HoloExpr) -> Self {
        MeroFn {
            numerator: f,
            denominator: HoloExpr::real(1.0),
        }
    }

    pub fn parse(num: &str, den: &str) -> Result<Self> {
        MeroFn::new(parse_expr(num)?, parse_expr(den)?)
    }

    pub fn reciprocal(&self) -> Result<Self> {
        MeroFn::new(self.denominator.clone(), self.numerator.clone())
    }

    /// `ln|f(z)|`, possibly `±inf` at zeros and poles.
    pub fn ln_abs(&self, z: Complex64) -> Result<f64> {
        let n = self.numerator.eval_value(z)?;
        let d = self.denominator.eval_value(z)?;
        Ok(n.ln_abs() - d.ln_abs())
    }

    /// `f^(k)/f` as a quotient of entire functions: with `f = N/D` and
    /// `(N/D)^(j) = P_j / D^(j+1)`, `P_{j+1} = P_j' D - (j+1) P_j D'`, so that
    /// `f^(k)/f = P_k / (N D^k)`.
    pub fn log_derivative_ratio(&self, k: usize) -> Result<Self> {
        let n = &self.numerator;
        let d = &self.denominator;
        let dd = d.derivative();
        let mut p = n.clone();
        for j in 0..k {
            p = p.derivative() * d.clone() - HoloExpr::real((j + 1) as f64) * p * dd.clone();
        }
        let den = n.clone() * HoloExpr::pow(d.clone(), k as u32);
        MeroFn::new(p, den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn exp_jet_at_zero() {
        let e = parse_expr("exp(z)").unwrap();
        let j = e.eval_jet(Complex64::new(0.0, 0.0), 2).unwrap();
        for d in &j.derivs {
            assert!(close(*d, c(1.0), 1e-15));
        }
    }

    #[test]
    fn square_jet() {
        let e = parse_expr("z^2").unwrap();
        let j = e.eval_jet(c(3.0), 2).unwrap();
        assert_eq!(j.derivs, vec![c(9.0), c(6.0), c(2.0)]);
    }

    #[test]
    fn sine_jet_at_zero() {
        let e = parse_expr("sin(z)").unwrap();
        let j = e.eval_jet(c(0.0), 3).unwrap();
        let want = [0.0, 1.0, 0.0, -1.0];
        for (d, w) in j.derivs.iter().zip(want) {
            assert!(close(*d, c(w), 1e-15), "{d} vs {w}");
        }
    }

    #[test]
    fn order_zero_truncation_matches_value() {
        let e = parse_expr("exp(2*z)*cos(z) + z^3").unwrap();
        let z = Complex64::new(0.7, -1.2);
        let j = e.eval_jet(z, 5).unwrap();
        let v = e.eval_jet(z, 0).unwrap();
        assert_eq!(j.truncate(0).derivs[0], v.derivs[0]);
    }

    #[test]
    fn order_cap_enforced() {
        let e = HoloExpr::z();
        assert!(matches!(
            e.eval_jet(c(1.0), 33),
            Err(Error::OrderCap { order: 33, cap: 32 })
        ));
    }

    #[test]
    fn large_exponent_reports_overflow_in_plain_jet() {
        let e = parse_expr("exp(z)").unwrap();
        let err = e.eval_jet(c(1000.0), 1).unwrap_err();
        assert!(matches!(err, Error::Overflow { .. }));
        let s = e.eval_value(c(1000.0)).unwrap();
        assert!((s.ln_abs() - 1000.0).abs() < 1e-12);
    }

    #[test]
    fn double_exponential_overflow_carries_exponent() {
        let e = parse_expr("exp(exp(z))").unwrap();
        match e.eval_value(c(60.0)) {
            Err(Error::Overflow { exponent }) => assert!(exponent > 1e20),
            other => panic!("expected overflow, got {other:?}"),
        }
    }

    #[test]
    fn sine_far_off_axis() {
        let e = parse_expr("sin(z)").unwrap();
        let v = e.eval_value(Complex64::new(0.3, 900.0)).unwrap();
        // |sin(x+iy)| ~ e^y / 2
        assert!((v.ln_abs() - (900.0 - 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn symbolic_derivative_matches_jet() {
        let e = parse_expr("exp(z^2)*sin(3*z) - cos(z)^3").unwrap();
        let d = e.derivative();
        let z = Complex64::new(0.4, 0.9);
        let j = e.eval_jet(z, 1).unwrap();
        let v = d.eval_jet(z, 0).unwrap();
        assert!(close(j.derivs[1], v.derivs[0], 1e-13));
    }

    #[test]
    fn log_derivative_of_exponential_is_one() {
        let f = MeroFn::entire(parse_expr("exp(z)").unwrap());
        let g = f.log_derivative_ratio(1).unwrap();
        let z = Complex64::new(3.0, 1.0);
        assert!(g.ln_abs(z).unwrap().abs() < 1e-14);
    }

    #[test]
    fn second_log_derivative_of_rational() {
        // f = z/(z-2): f'' / f = 4 / (z (z-2)^2) * (z-2) / z ... checked numerically
        let f = MeroFn::parse("z", "z-2").unwrap();
        let g = f.log_derivative_ratio(2).unwrap();
        let z = Complex64::new(0.5, 0.75);
        let fz = z / (z - 2.0);
        let f2 = 4.0 / (z - 2.0).powi(3);
        let want = (f2 / fz).norm().ln();
        assert!((g.ln_abs(z).unwrap() - want).abs() < 1e-13);
    }

    #[test]
    fn zero_denominator_rejected() {
        assert!(MeroFn::parse("z", "z - z").is_err());
    }
}
