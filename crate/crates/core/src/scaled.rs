//! Complex numbers and truncated Taylor jets carrying an explicit binary
//! exponent.
//!
//! A [`Scaled`] value stands for `mant * 2^exp`. Rescaling only touches the
//! exponent, so it is exact; this keeps `exp(z)` at `|z| = 10^3` and beyond
//! representable, while `ln|value|` stays accurate to the last bit of the
//! mantissa. A [`ScaledJet`] stores Taylor coefficients `f^(j)(z0)/j!` that
//! share a single exponent.

use num_complex::Complex64;
use std::f64::consts::LN_2;

use crate::error::{Error, Result};

/// Mantissas are kept within `[2^-LIMIT, 2^LIMIT]` in modulus.
const LIMIT: i32 = 400;

/// `x * 2^e` without intermediate overflow.
pub fn ldexp(mut x: f64, mut e: i64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    if e > 2200 {
        return x.signum() * f64::INFINITY;
    }
    if e < -2200 {
        return x.signum() * 0.0;
    }
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
        if x.is_infinite() {
            return x;
        }
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
        if x == 0.0 {
            return x;
        }
    }
    x * 2f64.powi(e as i32)
}

fn scale_c(c: Complex64, e: i64) -> Complex64 {
    Complex64::new(ldexp(c.re, e), ldexp(c.im, e))
}

fn max_norm(c: &[Complex64]) -> f64 {
    c.iter().map(|v| v.re.abs().max(v.im.abs())).fold(0.0, f64::max)
}

/// Exponent shift that brings `m` (a positive finite magnitude) near 1.
fn shift_for(m: f64) -> i64 {
    if m == 0.0 || !m.is_finite() {
        return 0;
    }
    m.log2().floor() as i64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled {
    pub mant: Complex64,
    pub exp: i64,
}

impl Scaled {
    pub const ZERO: Scaled = Scaled {
        mant: Complex64 { re: 0.0, im: 0.0 },
        exp: 0,
    };

    pub fn new(mant: Complex64, exp: i64) -> Self {
        let mut s = Scaled { mant, exp };
        s.normalize();
        s
    }

    pub fn from_c64(c: Complex64) -> Self {
        Scaled::new(c, 0)
    }

    /// `e^w` for a plain complex exponent, never overflowing.
    pub fn exp_of(w: Complex64) -> Result<Self> {
        let k = (w.re / LN_2).floor();
        if !k.is_finite() || k.abs() > 9.0e18 {
            return Err(Error::Overflow { exponent: w.re / LN_2 });
        }
        let frac = w.re - k * LN_2;
        let mag = frac.exp();
        Ok(Scaled::new(
            Complex64::new(mag * w.im.cos(), mag * w.im.sin()),
            k as i64,
        ))
    }

    fn normalize(&mut self) {
        let m = self.mant.re.abs().max(self.mant.im.abs());
        if m == 0.0 {
            self.exp = 0;
            return;
        }
        let lg = m.log2();
        if lg > LIMIT as f64 || lg < -(LIMIT as f64) {
            let s = shift_for(m);
            self.mant = scale_c(self.mant, -s);
            self.exp += s;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.mant.re == 0.0 && self.mant.im == 0.0
    }

    /// Natural log of the modulus; `-inf` for zero.
    pub fn ln_abs(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        self.mant.norm().ln() + self.exp as f64 * LN_2
    }

    pub fn arg(&self) -> f64 {
        self.mant.arg()
    }

    /// Plain value, or `None` when it does not fit in an `f64`.
    pub fn to_c64(&self) -> Option<Complex64> {
        let c = scale_c(self.mant, self.exp);
        if c.re.is_finite() && c.im.is_finite() {
            Some(c)
        } else {
            None
        }
    }

    pub fn mul(&self, other: &Scaled) -> Scaled {
        Scaled::new(self.mant * other.mant, self.exp + other.exp)
    }

    pub fn add(&self, other: &Scaled) -> Scaled {
        if self.is_zero() {
            return *other;
        }
        if other.is_zero() {
            return *self;
        }
        let e = self.exp.max(other.exp);
        Scaled::new(
            scale_c(self.mant, self.exp - e) + scale_c(other.mant, other.exp - e),
            e,
        )
    }

    pub fn neg(&self) -> Scaled {
        Scaled {
            mant: -self.mant,
            exp: self.exp,
        }
    }

    pub fn scale(&self, c: Complex64) -> Scaled {
        Scaled::new(self.mant * c, self.exp)
    }

    /// `self / other` as a plain complex number (finite when the exponents
    /// are close, which is the case for ratios used in Newton steps).
    pub fn ratio(&self, other: &Scaled) -> Complex64 {
        scale_c(self.mant / other.mant, self.exp - other.exp)
    }
}

/// Truncated Taylor jet `sum_j c[j] (z - z0)^j`, all coefficients scaled by a
/// common `2^exp`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledJet {
    pub coeffs: Vec<Complex64>,
    pub exp: i64,
}

impl ScaledJet {
    pub fn constant(c: Complex64, order: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); order + 1];
        coeffs[0] = c;
        ScaledJet { coeffs, exp: 0 }.normalized()
    }

    pub fn variable(z: Complex64, order: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); order + 1];
        coeffs[0] = z;
        if order >= 1 {
            coeffs[1] = Complex64::new(1.0, 0.0);
        }
        ScaledJet { coeffs, exp: 0 }.normalized()
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    fn normalized(mut self) -> Self {
        let m = max_norm(&self.coeffs);
        if m == 0.0 {
            self.exp = 0;
            return self;
        }
        let lg = m.log2();
        if lg > LIMIT as f64 || lg < -(LIMIT as f64) {
            let s = shift_for(m);
            for c in &mut self.coeffs {
                *c = scale_c(*c, -s);
            }
            self.exp += s;
        }
        self
    }

    /// Value at the center.
    pub fn value(&self) -> Scaled {
        Scaled::new(self.coeffs[0], self.exp)
    }

    /// Derivative values `f^(j)(z0)` as mantissas sharing `self.exp`.
    pub fn derivative_mantissas(&self) -> Vec<Complex64> {
        let mut fact = 1.0;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| {
                if j > 0 {
                    fact *= j as f64;
                }
                *c * fact
            })
            .collect()
    }

    /// `g'/g` at the center, computed from mantissas so it never overflows.
    pub fn log_derivative(&self) -> Complex64 {
        self.coeffs[1] / self.coeffs[0]
    }

    /// Plain coefficients, failing when they do not fit in `f64`.
    pub fn plain_coeffs(&self) -> Result<Vec<Complex64>> {
        let out: Vec<Complex64> = self.coeffs.iter().map(|c| scale_c(*c, self.exp)).collect();
        if out.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
            Ok(out)
        } else {
            let m = max_norm(&self.coeffs);
            Err(Error::Overflow {
                exponent: m.log2() + self.exp as f64,
            })
        }
    }

    pub fn neg(&self) -> Self {
        ScaledJet {
            coeffs: self.coeffs.iter().map(|c| -*c).collect(),
            exp: self.exp,
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        ScaledJet {
            coeffs: self.coeffs.iter().map(|v| *v * c).collect(),
            exp: self.exp,
        }
        .normalized()
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let e = self.exp.max(other.exp);
        let (da, db) = (self.exp - e, other.exp - e);
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| scale_c(*a, da) + scale_c(*b, db))
            .collect();
        ScaledJet { coeffs, exp: e }.normalized()
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.coeffs.len();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
        for (j, out) in coeffs.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..=j {
                acc += self.coeffs[i] * other.coeffs[j - i];
            }
            *out = acc;
        }
        ScaledJet {
            coeffs,
            exp: self.exp + other.exp,
        }
        .normalized()
    }

    pub fn powi(&self, mut n: u32) -> Self {
        let order = self.order();
        let mut result = ScaledJet::constant(Complex64::new(1.0, 0.0), order);
        let mut base = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                result = result.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    pub fn exp(&self) -> Result<Self> {
        let g = self.plain_coeffs()?;
        let h0 = Scaled::exp_of(g[0])?;
        let n = g.len();
        let mut h = vec![Complex64::new(0.0, 0.0); n];
        h[0] = h0.mant;
        for j in 1..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 1..=j {
                acc += g[i] * h[j - i] * i as f64;
            }
            h[j] = acc / j as f64;
        }
        finite_or_overflow(&h, h0.exp)?;
        Ok(ScaledJet { coeffs: h, exp: h0.exp }.normalized())
    }

    /// Jets of `sin g` and `cos g`.
    pub fn sin_cos(&self) -> Result<(Self, Self)> {
        let g = self.plain_coeffs()?;
        let g0 = g[0];
        let (s0, c0, e) = if g0.im.abs() < 600.0 {
            (g0.sin(), g0.cos(), 0)
        } else if g0.im > 0.0 {
            // e^{-i g0} dominates
            let big = Scaled::exp_of(Complex64::new(g0.im, -g0.re))?;
            (big.mant * Complex64::new(0.0, 0.5), big.mant * 0.5, big.exp)
        } else {
            let big = Scaled::exp_of(Complex64::new(-g0.im, g0.re))?;
            (big.mant * Complex64::new(0.0, -0.5), big.mant * 0.5, big.exp)
        };
        let n = g.len();
        let mut s = vec![Complex64::new(0.0, 0.0); n];
        let mut c = vec![Complex64::new(0.0, 0.0); n];
        s[0] = s0;
        c[0] = c0;
        for j in 1..n {
            let mut as_ = Complex64::new(0.0, 0.0);
            let mut ac = Complex64::new(0.0, 0.0);
            for i in 1..=j {
                as_ += g[i] * c[j - i] * i as f64;
                ac += g[i] * s[j - i] * i as f64;
            }
            s[j] = as_ / j as f64;
            c[j] = -ac / j as f64;
        }
        finite_or_overflow(&s, e)?;
        finite_or_overflow(&c, e)?;
        Ok((
            ScaledJet { coeffs: s, exp: e }.normalized(),
            ScaledJet { coeffs: c, exp: e }.normalized(),
        ))
    }

    /// Power-series quotient `self / other`; requires a nonzero constant
    /// term in `other`.
    pub fn div(&self, other: &Self) -> Result<Self> {
        if other.coeffs[0] == Complex64::new(0.0, 0.0) {
            return Err(Error::Invalid("jet division by a vanishing series".into()));
        }
        let n = self.coeffs.len();
        let mut q = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            let mut acc = self.coeffs[j];
            for i in 1..=j {
                acc -= other.coeffs[i] * q[j - i];
            }
            q[j] = acc / other.coeffs[0];
        }
        Ok(ScaledJet {
            coeffs: q,
            exp: self.exp - other.exp,
        }
        .normalized())
    }
}

fn finite_or_overflow(c: &[Complex64], e: i64) -> Result<()> {
    if c.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::Overflow {
            exponent: e as f64 + 1024.0,
        })
    }
}
