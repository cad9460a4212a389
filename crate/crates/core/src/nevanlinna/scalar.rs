//! Scalar meromorphic functionals: poles are zeros of the denominator after
//! cancelling numerically common zeros.

use num_complex::Complex64;

use super::curve::finite_log;
use super::paths::{angular_integrals, ray_integral, tsuji_integral};
use super::{c_small, c_sum, n_sum, TruncationLevel};
use crate::error::{Error, Result};
use crate::expr::MeroFn;
use crate::projective::Sector;
use crate::quad::QuadratureConfig;
use crate::zeros::{LocatorConfig, ZeroRecord, ZeroSet};

/// Matched zero/pole distance under which the two cancel.
const CANCEL_DIST: f64 = 1e-8;
/// Between `CANCEL_DIST` and this, a zero/pole pair is ambiguous.
const AMBIGUOUS_DIST: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct MeroData {
    pub f: MeroFn,
    pub zeros: ZeroSet,
    pub poles: ZeroSet,
    /// Multiplicity removed from both sides by cancellation.
    pub cancelled: u32,
}

fn cancel(zeros: &mut Vec<ZeroRecord>, poles: &mut Vec<ZeroRecord>) -> Result<u32> {
    let mut removed = 0;
    for p in poles.iter_mut() {
        for z in zeros.iter_mut() {
            if z.multiplicity == 0 || p.multiplicity == 0 {
                continue;
            }
            let d = (z.location - p.location).norm();
            if d < CANCEL_DIST {
                let m = z.multiplicity.min(p.multiplicity);
                z.multiplicity -= m;
                p.multiplicity -= m;
                removed += m;
            } else if d < AMBIGUOUS_DIST {
                return Err(Error::CommonZeroAmbiguity { z: p.location });
            }
        }
    }
    zeros.retain(|z| z.multiplicity > 0);
    poles.retain(|z| z.multiplicity > 0);
    Ok(removed)
}

impl MeroData {
    pub fn new(f: &MeroFn, s: &Sector, r_max: f64, loc: &LocatorConfig) -> Result<Self> {
        let mut zeros = ZeroSet::locate(&f.numerator, s, r_max, loc)?;
        let mut poles = if f.denominator.as_const().is_some() {
            ZeroSet::empty(s, r_max)
        } else {
            ZeroSet::locate(&f.denominator, s, r_max, loc)?
        };
        let cancelled = cancel(&mut zeros.zeros, &mut poles.zeros)?;
        Ok(MeroData {
            f: f.clone(),
            zeros,
            poles,
            cancelled,
        })
    }

    /// Data for `1/f` (zeros and poles swapped).
    pub fn reciprocal(&self) -> Result<Self> {
        Ok(MeroData {
            f: self.f.reciprocal()?,
            zeros: self.poles.clone(),
            poles: self.zeros.clone(),
            cancelled: self.cancelled,
        })
    }

    pub fn sector(&self) -> Sector {
        self.zeros.sector
    }

    fn pole_points(&self) -> Vec<Complex64> {
        self.poles.zeros.iter().map(|z| z.location).collect()
    }

    fn all_points(&self) -> Vec<Complex64> {
        self.zeros
            .zeros
            .iter()
            .chain(&self.poles.zeros)
            .map(|z| z.location)
            .collect()
    }

    fn ln_abs(&self, z: Complex64) -> Result<f64> {
        let n = finite_log(self.f.numerator.eval_value(z)?.ln_abs());
        let d = finite_log(self.f.denominator.eval_value(z)?.ln_abs());
        Ok(n - d)
    }

    fn log_plus_abs(&self, z: Complex64) -> Result<f64> {
        Ok(self.ln_abs(z)?.max(0.0))
    }

    pub fn a(&self, r: f64, cfg: &QuadratureConfig) -> Result<f64> {
        let s = self.sector();
        let h = |z| self.log_plus_abs(z);
        let sing = self.pole_points();
        Ok(ray_integral(&s, r, s.alpha(), &h, &sing, cfg)? + ray_integral(&s, r, s.beta(), &h, &sing, cfg)?)
    }

    pub fn b(&self, r: f64, cfg: &QuadratureConfig) -> Result<f64> {
        let s = self.sector();
        super::paths::arc_integral(&s, r, &|z| self.log_plus_abs(z), &self.pole_points(), cfg)
    }

    /// Angular counting function of the poles.
    pub fn c(&self, r: f64, delta: TruncationLevel) -> Result<f64> {
        Ok(c_sum(&self.sector(), &self.poles.annulus(r)?, r, delta))
    }

    pub fn c_small(&self, t: f64, delta: TruncationLevel) -> Result<f64> {
        Ok(c_small(&self.sector(), &self.poles.annulus(t)?, t, delta))
    }

    pub fn s(&self, r: f64, cfg: &QuadratureConfig) -> Result<f64> {
        Ok(self.a(r, cfg)? + self.b(r, cfg)? + self.c(r, TruncationLevel::Untruncated)?)
    }

    pub fn m_tsuji(&self, r: f64, cfg: &QuadratureConfig) -> Result<f64> {
        tsuji_integral(&self.sector(), r, &|z| self.log_plus_abs(z), &self.pole_points(), cfg)
    }

    /// Tsuji counting function of the poles.
    pub fn n_tsuji(&self, r: f64, delta: TruncationLevel) -> Result<f64> {
        Ok(n_sum(&self.sector(), &self.poles.xi(r)?, r, delta))
    }

    pub fn t_tsuji(&self, r: f64, cfg: &QuadratureConfig) -> Result<f64> {
        Ok(self.m_tsuji(r, cfg)? + self.n_tsuji(r, TruncationLevel::Untruncated)?)
    }

    /// Ray and arc integrals of `log|f|` (the boundary side of the Carleman formula).
    pub fn carleman_integrals(&self, r: f64, cfg: &QuadratureConfig) -> Result<f64> {
        let (rays, arc) = angular_integrals(&self.sector(), r, &|z| self.ln_abs(z), &self.all_points(), cfg)?;
        Ok(rays + arc)
    }

    /// Tsuji boundary integral of `log|f|`.
    pub fn tsuji_jensen_integral(&self, r: f64, cfg: &QuadratureConfig) -> Result<f64> {
        tsuji_integral(&self.sector(), r, &|z| self.ln_abs(z), &self.all_points(), cfg)
    }
}
