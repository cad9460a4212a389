use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

use super::Curve;
use crate::error::{Error, Result};
use crate::expr::parse::{Builder, Parser};
use crate::expr::print::fmt_float;
use crate::expr::{probe_points, HoloExpr};
use crate::scaled::Scaled;

#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coeff: Complex64,
    pub exps: Vec<u32>,
}

/// Homogeneous polynomial in `n_vars` variables, stored as a merged list of
/// monomials in lexicographic exponent order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FormJson", into = "FormJson")]
pub struct HomogForm {
    n_vars: usize,
    degree: u32,
    monomials: Vec<Monomial>,
}

#[derive(Serialize, Deserialize)]
struct MonomialJson {
    c: [f64; 2],
    e: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct FormJson {
    n_vars: usize,
    degree: u32,
    monomials: Vec<MonomialJson>,
}

impl TryFrom<FormJson> for HomogForm {
    type Error = Error;
    fn try_from(j: FormJson) -> Result<Self> {
        let form = HomogForm::new(
            j.n_vars,
            j.monomials
                .into_iter()
                .map(|m| Monomial {
                    coeff: Complex64::new(m.c[0], m.c[1]),
                    exps: m.e,
                })
                .collect(),
        )?;
        if form.degree != j.degree {
            return Err(Error::Invalid(format!(
                "declared degree {} but monomials have degree {}",
                j.degree, form.degree
            )));
        }
        Ok(form)
    }
}

impl From<HomogForm> for FormJson {
    fn from(f: HomogForm) -> Self {
        FormJson {
            n_vars: f.n_vars,
            degree: f.degree,
            monomials: f
                .monomials
                .into_iter()
                .map(|m| MonomialJson {
                    c: [m.coeff.re, m.coeff.im],
                    e: m.exps,
                })
                .collect(),
        }
    }
}

impl HomogForm {
    pub fn new(n_vars: usize, monomials: Vec<Monomial>) -> Result<Self> {
        if n_vars == 0 {
            return Err(Error::Invalid("a form needs at least one variable".into()));
        }
        let mut merged: BTreeMap<Vec<u32>, Complex64> = BTreeMap::new();
        let mut degree = None;
        for m in monomials {
            if m.exps.len() != n_vars {
                return Err(Error::DimensionMismatch {
                    expected: n_vars,
                    got: m.exps.len(),
                });
            }
            if !m.coeff.is_finite() {
                return Err(Error::Invalid("non-finite coefficient".into()));
            }
            let d: u32 = m.exps.iter().sum();
            match degree {
                None => degree = Some(d),
                Some(d0) if d0 != d => {
                    return Err(Error::Invalid(format!(
                        "not homogeneous: monomials of degree {d0} and {d}"
                    )))
                }
                _ => {}
            }
            *merged.entry(m.exps).or_insert(Complex64::new(0.0, 0.0)) += m.coeff;
        }
        let monomials: Vec<Monomial> = merged
            .into_iter()
            .filter(|(_, c)| c.norm() != 0.0)
            .map(|(exps, coeff)| Monomial { coeff, exps })
            .collect();
        if monomials.is_empty() {
            return Err(Error::Degenerate("form has no nonzero coefficient".into()));
        }
        let degree = degree.unwrap_or(0);
        if degree == 0 {
            return Err(Error::Invalid("degree must be at least 1".into()));
        }
        Ok(HomogForm {
            n_vars,
            degree,
            monomials,
        })
    }

    /// Parse an expression in `x0 .. x{n_vars-1}`; homogeneity is checked.
    pub fn parse(text: &str, n_vars: usize) -> Result<Self> {
        let poly = Parser::new(text, PolyBuilder).parse_all()?;
        let mut monomials = Vec::with_capacity(poly.len());
        for (mut exps, coeff) in poly {
            if exps.len() > n_vars {
                return Err(Error::Invalid(format!(
                    "variable x{} out of range for {n_vars} variables",
                    exps.len() - 1
                )));
            }
            exps.resize(n_vars, 0);
            monomials.push(Monomial { coeff, exps });
        }
        HomogForm::new(n_vars, monomials)
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }
    pub fn degree(&self) -> u32 {
        self.degree
    }
    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn coeff_norm(&self) -> f64 {
        self.monomials.iter().map(|m| m.coeff.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scaled_by(&self, c: Complex64) -> Result<Self> {
        HomogForm::new(
            self.n_vars,
            self.monomials
                .iter()
                .map(|m| Monomial {
                    coeff: m.coeff * c,
                    exps: m.exps.clone(),
                })
                .collect(),
        )
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.n_vars {
            return Err(Error::DimensionMismatch {
                expected: self.n_vars,
                got,
            });
        }
        Ok(())
    }

    pub fn eval(&self, x: &[Complex64]) -> Result<Complex64> {
        self.check_len(x.len())?;
        Ok(self
            .monomials
            .iter()
            .map(|m| {
                m.exps
                    .iter()
                    .zip(x)
                    .fold(m.coeff, |acc, (&e, &xi)| acc * xi.powu(e))
            })
            .sum())
    }

    /// Overflow-safe evaluation on scaled arguments.
    pub fn eval_scaled(&self, x: &[Scaled]) -> Result<Scaled> {
        self.check_len(x.len())?;
        let mut acc = Scaled::ZERO;
        for m in &self.monomials {
            let mut term = Scaled::from_c64(m.coeff);
            for (&e, xi) in m.exps.iter().zip(x) {
                for _ in 0..e {
                    term = term.mul(xi);
                }
            }
            acc = acc.add(&term);
        }
        Ok(acc)
    }

    /// Partial derivatives `dQ/dx_j` at `x`.
    pub fn gradient(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(x.len())?;
        let mut g = vec![Complex64::new(0.0, 0.0); self.n_vars];
        for m in &self.monomials {
            for (j, gj) in g.iter_mut().enumerate() {
                if m.exps[j] == 0 {
                    continue;
                }
                let mut t = m.coeff * m.exps[j] as f64;
                for (i, (&e, &xi)) in m.exps.iter().zip(x).enumerate() {
                    let p = if i == j { e - 1 } else { e };
                    t *= xi.powu(p);
                }
                *gj += t;
            }
        }
        Ok(g)
    }

    pub fn mul(&self, other: &HomogForm) -> Result<HomogForm> {
        self.check_len(other.n_vars)?;
        let mut out = Vec::with_capacity(self.monomials.len() * other.monomials.len());
        for a in &self.monomials {
            for b in &other.monomials {
                out.push(Monomial {
                    coeff: a.coeff * b.coeff,
                    exps: a.exps.iter().zip(&b.exps).map(|(x, y)| x + y).collect(),
                });
            }
        }
        HomogForm::new(self.n_vars, out)
    }

    pub fn pow(&self, n: u32) -> Result<HomogForm> {
        if n == 0 {
            return Err(Error::Invalid("zeroth power is not a form of positive degree".into()));
        }
        let mut acc = self.clone();
        for _ in 1..n {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    pub fn add(&self, other: &HomogForm) -> Result<HomogForm> {
        self.check_len(other.n_vars)?;
        if self.degree != other.degree {
            return Err(Error::Invalid(format!(
                "cannot add forms of degree {} and {}",
                self.degree, other.degree
            )));
        }
        let mut all = self.monomials.clone();
        all.extend(other.monomials.iter().cloned());
        HomogForm::new(self.n_vars, all)
    }
}

/// `Q(f_0, ..., f_n)` as an entire expression; rejected when it vanishes
/// identically (the image of `f` lies in `{Q = 0}`).
pub fn compose(q: &HomogForm, f: &Curve) -> Result<HoloExpr> {
    let comps = f.components();
    if q.n_vars() != comps.len() {
        return Err(Error::DimensionMismatch {
            expected: comps.len(),
            got: q.n_vars(),
        });
    }
    let mut terms = Vec::with_capacity(q.monomials().len());
    for m in q.monomials() {
        let mut t = HoloExpr::constant(m.coeff);
        for (fj, &e) in comps.iter().zip(&m.exps) {
            if e > 0 {
                t = t * HoloExpr::pow(fj.clone(), e);
            }
        }
        terms.push(t);
    }
    // relative cancellation test at the probe points
    let mut vanishes = true;
    for z in probe_points() {
        let mut sum = Scaled::ZERO;
        let mut mag = f64::NEG_INFINITY;
        for t in &terms {
            let v = t.eval_value(z)?;
            mag = mag.max(v.ln_abs());
            sum = sum.add(&v);
        }
        if !sum.is_zero() && sum.ln_abs() > mag + (1e-12f64).ln() {
            vanishes = false;
            break;
        }
    }
    if vanishes {
        return Err(Error::Degenerate(
            "Q(f) vanishes identically: the image of the curve lies in the hypersurface".into(),
        ));
    }
    Ok(terms.into_iter().reduce(|a, b| a + b).unwrap())
}

/// Coefficient vector of a hyperplane `a_0 x_0 + ... + a_n x_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct HyperplaneVec(Vec<Complex64>);

impl TryFrom<Vec<[f64; 2]>> for HyperplaneVec {
    type Error = Error;
    fn try_from(v: Vec<[f64; 2]>) -> Result<Self> {
        HyperplaneVec::new(v.into_iter().map(|c| Complex64::new(c[0], c[1])).collect())
    }
}

impl From<HyperplaneVec> for Vec<[f64; 2]> {
    fn from(h: HyperplaneVec) -> Self {
        h.0.into_iter().map(|c| [c.re, c.im]).collect()
    }
}

impl HyperplaneVec {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().all(|c| c.norm() == 0.0) {
            return Err(Error::Degenerate("hyperplane coefficients are all zero".into()));
        }
        Ok(HyperplaneVec(coeffs))
    }

    pub fn real(coeffs: &[f64]) -> Result<Self> {
        HyperplaneVec::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.0
    }

    pub fn to_form(&self) -> HomogForm {
        let n = self.0.len();
        let monomials = self
            .0
            .iter()
            .enumerate()
            .map(|(j, &c)| {
                let mut exps = vec![0; n];
                exps[j] = 1;
                Monomial { coeff: c, exps }
            })
            .collect();
        HomogForm::new(n, monomials).expect("nonzero hyperplane")
    }

    /// The hyperplane if `q` has degree one.
    pub fn from_form(q: &HomogForm) -> Result<Self> {
        if q.degree() != 1 {
            return Err(Error::Invalid(format!("degree {} form is not a hyperplane", q.degree())));
        }
        let mut c = vec![Complex64::new(0.0, 0.0); q.n_vars()];
        for m in q.monomials() {
            let j = m.exps.iter().position(|&e| e == 1).unwrap();
            c[j] = m.coeff;
        }
        HyperplaneVec::new(c)
    }
}

impl fmt::Display for HomogForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, m) in self.monomials.iter().enumerate() {
            let c = m.coeff;
            let (neg, body) = if c.im == 0.0 {
                (c.re < 0.0, fmt_float(c.re.abs()))
            } else {
                let sign = if c.im < 0.0 { '-' } else { '+' };
                (false, format!("({}{}{}i)", fmt_float(c.re), sign, fmt_float(c.im.abs())))
            };
            match (i, neg) {
                (0, true) => write!(f, "-{body}")?,
                (0, false) => write!(f, "{body}")?,
                (_, true) => write!(f, " - {body}")?,
                (_, false) => write!(f, " + {body}")?,
            }
            for (j, &e) in m.exps.iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*x{j}")?,
                    _ => write!(f, "*x{j}^{e}")?,
                }
            }
        }
        Ok(())
    }
}

type Poly = BTreeMap<Vec<u32>, Complex64>;

fn trim(mut e: Vec<u32>) -> Vec<u32> {
    while e.last() == Some(&0) {
        e.pop();
    }
    e
}

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let n = ea.len().max(eb.len());
            let e: Vec<u32> = (0..n)
                .map(|i| ea.get(i).copied().unwrap_or(0) + eb.get(i).copied().unwrap_or(0))
                .collect();
            *out.entry(trim(e)).or_insert(Complex64::new(0.0, 0.0)) += ca * cb;
        }
    }
    out
}

fn poly_axpy(a: Poly, b: Poly, sign: f64) -> Poly {
    let mut out = a;
    for (e, c) in b {
        *out.entry(e).or_insert(Complex64::new(0.0, 0.0)) += c * sign;
    }
    out
}

/// Builds sparse polynomials in `x0, x1, ...`.
struct PolyBuilder;

impl Builder for PolyBuilder {
    type Out = Poly;
    fn constant(&mut self, v: Complex64) -> Poly {
        Poly::from([(Vec::new(), v)])
    }
    fn ident(&mut self, name: &str, offset: usize) -> Result<Poly> {
        let idx = name
            .strip_prefix('x')
            .filter(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
            .and_then(|d| d.parse::<usize>().ok());
        match idx {
            Some(i) if i < 4096 => {
                let mut e = vec![0; i + 1];
                e[i] = 1;
                Ok(Poly::from([(e, Complex64::new(1.0, 0.0))]))
            }
            _ => Err(Error::Syntax {
                offset,
                message: format!("unknown variable '{name}' (expected x0, x1, ...)"),
            }),
        }
    }
    fn call(&mut self, name: &str, _arg: Poly, offset: usize) -> Result<Poly> {
        Err(Error::Syntax {
            offset,
            message: format!("function '{name}' is not allowed in a homogeneous form"),
        })
    }
    fn add(&mut self, a: Poly, b: Poly) -> Poly {
        poly_axpy(a, b, 1.0)
    }
    fn sub(&mut self, a: Poly, b: Poly) -> Poly {
        poly_axpy(a, b, -1.0)
    }
    fn mul(&mut self, a: Poly, b: Poly) -> Poly {
        poly_mul(&a, &b)
    }
    fn pow(&mut self, a: Poly, n: u32) -> Poly {
        let mut acc = Poly::from([(Vec::new(), Complex64::new(1.0, 0.0))]);
        for _ in 0..n {
            acc = poly_mul(&acc, &a);
        }
        acc
    }
    fn neg(&mut self, a: Poly) -> Poly {
        a.into_iter().map(|(e, c)| (e, -c)).collect()
    }
}
