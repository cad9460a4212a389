//! Sectors, Tsuji domains, curves in reduced representation and the
//! homogeneous forms they are composed with.

mod form;
mod position;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::expr::{parse_expr, HoloExpr};
use crate::scaled::Scaled;

pub use form::{compose, HomogForm, HyperplaneVec, Monomial};
pub use position::{
    build_f_curve, build_theorem10_target, hyperplanes_general_position,
    hypersurfaces_general_position_sampled, GeneralPosition, Theorem10Target, EPS_CZ, EPS_GP,
};

/// Angular tolerance used by the closed-sector predicate.
const ANGLE_SLACK: f64 = 1e-12;

/// Angular domain `alpha < arg z < beta` with opening constant `k = pi/(beta-alpha)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SectorSpec", into = "SectorSpec")]
pub struct Sector {
    alpha: f64,
    beta: f64,
    k: f64,
}

#[derive(Serialize, Deserialize)]
struct SectorSpec {
    alpha: f64,
    beta: f64,
}

impl TryFrom<SectorSpec> for Sector {
    type Error = Error;
    fn try_from(s: SectorSpec) -> Result<Self> {
        Sector::new(s.alpha, s.beta)
    }
}

impl From<Sector> for SectorSpec {
    fn from(s: Sector) -> Self {
        SectorSpec {
            alpha: s.alpha,
            beta: s.beta,
        }
    }
}

impl Sector {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let w = beta - alpha;
        if !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::InvalidSector("endpoints must be finite".into()));
        }
        if w <= 0.0 {
            return Err(Error::InvalidSector(format!(
                "empty sector: beta - alpha = {w} must be positive"
            )));
        }
        if w > TAU * (1.0 + 1e-15) {
            return Err(Error::InvalidSector(format!(
                "opening {w} exceeds 2*pi"
            )));
        }
        Ok(Sector {
            alpha,
            beta,
            k: PI / w,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn k(&self) -> f64 {
        self.k
    }
    pub fn width(&self) -> f64 {
        self.beta - self.alpha
    }

    pub fn is_full_plane(&self) -> bool {
        (self.width() - TAU).abs() < 1e-12
    }

    /// `arg z` moved into `[alpha, alpha + 2pi)`.
    pub fn normalize_arg(&self, z: Complex64) -> f64 {
        let th = self.alpha + (z.arg() - self.alpha).rem_euclid(TAU);
        if th >= self.alpha + TAU {
            self.alpha
        } else {
            th
        }
    }

    pub fn contains_open(&self, z: Complex64) -> bool {
        let th = self.normalize_arg(z);
        th > self.alpha && th < self.beta
    }

    /// `alpha <= arg z <= beta`, with a rounding allowance at both rays.
    pub fn contains_closed(&self, z: Complex64) -> bool {
        let th = self.normalize_arg(z);
        th <= self.beta + ANGLE_SLACK || th >= self.alpha + TAU - ANGLE_SLACK
    }

    /// `sin(k (theta - alpha))`.
    pub fn kernel_sin(&self, theta: f64) -> f64 {
        (self.k * (theta - self.alpha)).sin()
    }

    /// Upper bound on `|z|` for Xi at angle `theta`: `r sin(k(theta-alpha))^(1/k)`.
    pub fn xi_bound(&self, r: f64, theta: f64) -> f64 {
        let s = self.kernel_sin(theta).max(0.0);
        r * s.powf(1.0 / self.k)
    }

    /// Membership in `Xi(alpha, beta; r)`; the outer bound is inclusive.
    pub fn xi_contains(&self, r: f64, z: Complex64) -> bool {
        if !self.contains_open(z) {
            return false;
        }
        let t = z.norm();
        let th = self.normalize_arg(z);
        t > 1.0 && t <= self.xi_bound(r, th) * (1.0 + 4.0 * f64::EPSILON)
    }

    /// Point of the boundary curve `r sin^(1/k)(phi) e^{i(alpha + phi/k)}`
    /// written in `u = cot(phi)`, `u` in `[-U, U]`, `U = sqrt(r^(2k) - 1)`.
    pub fn tsuji_point(&self, r: f64, u: f64) -> Complex64 {
        let modulus = r * (1.0 + u * u).powf(-0.5 / self.k);
        let phi = 1f64.atan2(u);
        Complex64::from_polar(modulus, self.alpha + phi / self.k)
    }

    /// Half-length `U` of the `u`-interval that parametrizes the Tsuji boundary.
    pub fn tsuji_u_max(&self, r: f64) -> f64 {
        (r.powf(2.0 * self.k) - 1.0).max(0.0).sqrt()
    }

    /// Parameter `u = cot(k(theta - alpha))` of the boundary point in direction `theta`.
    pub fn tsuji_u_of_angle(&self, theta: f64) -> f64 {
        let phi = self.k * (theta - self.alpha);
        phi.cos() / phi.sin()
    }
}

/// Holomorphic curve `(f_0 : ... : f_n)` given by entire components.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    components: Vec<HoloExpr>,
}

impl Curve {
    pub fn new(components: Vec<HoloExpr>) -> Result<Self> {
        if components.len() < 2 {
            return Err(Error::Invalid(format!(
                "a curve needs at least 2 components, got {}",
                components.len()
            )));
        }
        let mut all_zero = true;
        for c in &components {
            if !c.is_identically_zero()? {
                all_zero = false;
                break;
            }
        }
        if all_zero {
            return Err(Error::Degenerate("all components vanish identically".into()));
        }
        Ok(Curve { components })
    }

    pub fn parse<S: AsRef<str>>(texts: &[S]) -> Result<Self> {
        let comps = texts
            .iter()
            .map(|t| parse_expr(t.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Curve::new(comps)
    }

    /// Projective dimension `n` (number of components minus one).
    pub fn dim(&self) -> usize {
        self.components.len() - 1
    }

    pub fn components(&self) -> &[HoloExpr] {
        &self.components
    }

    pub fn values(&self, z: Complex64) -> Result<Vec<Scaled>> {
        self.components.iter().map(|c| c.eval_value(z)).collect()
    }

    /// `log ||f(z)||` with the max norm, in log scale.
    pub fn sup_log_norm(&self, z: Complex64) -> Result<f64> {
        let mut best = f64::NEG_INFINITY;
        for c in &self.components {
            best = best.max(c.eval_value(z)?.ln_abs());
        }
        if best == f64::NEG_INFINITY {
            return Err(Error::ReducedViolation { z });
        }
        Ok(best)
    }

    /// Numerical certificate that the components share no zero on the
    /// sector annulus `1 <= |z| <= r_max`.
    pub fn reduced_check(&self, s: &Sector, r_max: f64, samples: usize) -> Result<ReducedVerdict> {
        reduced_check(self, s, r_max, samples, EPS_COMMON)
    }
}

/// Default relative threshold for a common zero of all components.
pub const EPS_COMMON: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReducedVerdict {
    pub pass: bool,
    pub witness: Option<Complex64>,
    pub samples: usize,
    pub note: String,
}

fn halton(mut i: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

fn newton_on(g: &HoloExpr, mut z: Complex64, bound: f64) -> Option<Complex64> {
    for _ in 0..60 {
        let jet = g.eval_scaled(z, 1).ok()?;
        if jet.coeffs[0] == Complex64::new(0.0, 0.0) {
            return Some(z);
        }
        let ld = jet.log_derivative();
        if !ld.is_finite() || ld.norm() == 0.0 {
            return None;
        }
        let step = 1.0 / ld;
        z -= step;
        if !z.is_finite() || z.norm() > bound {
            return None;
        }
        if step.norm() < 1e-14 * z.norm().max(1.0) {
            return Some(z);
        }
    }
    Some(z)
}

/// `ln(sum_{m<=4} rho^m |c_m|)` from a scaled jet.
fn local_log_scale(g: &HoloExpr, z: Complex64, rho: f64) -> Result<f64> {
    let jet = g.eval_scaled(z, 4)?;
    let s: f64 = jet
        .coeffs
        .iter()
        .enumerate()
        .map(|(m, c)| rho.powi(m as i32) * c.norm())
        .sum();
    Ok(s.ln() + jet.exp as f64 * std::f64::consts::LN_2)
}

pub fn reduced_check(
    f: &Curve,
    s: &Sector,
    r_max: f64,
    samples: usize,
    eps_common: f64,
) -> Result<ReducedVerdict> {
    if samples < 64 {
        return Err(Error::Invalid(format!("reduced check needs at least 64 samples, got {samples}")));
    }
    let lr = r_max.max(1.0).ln();
    for i in 1..=samples {
        let t = (halton(i, 2) * lr).exp();
        let th = s.alpha() + halton(i, 3) * s.width();
        let z0 = Complex64::from_polar(t, th);

        // the component whose nearest zero looks closest
        let mut pick = None;
        let mut best = f64::INFINITY;
        for (j, c) in f.components().iter().enumerate() {
            let jet = c.eval_scaled(z0, 1)?;
            let d = 1.0 / jet.log_derivative().norm();
            if d < best {
                best = d;
                pick = Some(j);
            }
        }
        let Some(j) = pick else { continue };
        let Some(zs) = newton_on(&f.components()[j], z0, 10.0 * r_max + 10.0) else {
            continue;
        };
        let m = zs.norm();
        if m < 1.0 - 1e-9 || m > r_max * (1.0 + 1e-9) || !s.contains_closed(zs) {
            continue;
        }
        let rho = 1e-3 * m.max(1.0);
        let mut common = true;
        for c in f.components() {
            let v = c.eval_value(zs)?.ln_abs();
            if v >= eps_common.ln() + local_log_scale(c, zs, rho)? {
                common = false;
                break;
            }
        }
        if common {
            return Ok(ReducedVerdict {
                pass: false,
                witness: Some(zs),
                samples: i,
                note: "all components vanish at the witness".into(),
            });
        }
    }
    Ok(ReducedVerdict {
        pass: true,
        witness: None,
        samples,
        note: "heuristic: no common zero found from the sampled starts".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sector_constants() {
        assert_eq!(Sector::new(0.0, PI).unwrap().k(), 1.0);
        assert_eq!(Sector::new(-PI / 4.0, PI / 4.0).unwrap().k(), 2.0);
        assert_eq!(Sector::new(0.0, TAU).unwrap().k(), 0.5);
        assert!(Sector::new(1.0, 1.0).is_err());
        assert!(Sector::new(0.0, 7.0).is_err());
    }

    #[test]
    fn xi_membership_examples() {
        let s = Sector::new(0.0, PI).unwrap();
        assert!(s.xi_contains(4.0, Complex64::new(0.0, 2.0)));
        assert!(!s.xi_contains(4.0, Complex64::new(0.0, 0.5)));
        let s2 = Sector::new(-PI / 4.0, PI / 4.0).unwrap();
        assert!(s2.xi_contains(10.0, Complex64::new(3.0 * PI, 0.0)));
        assert!(!s2.xi_contains(10.0, Complex64::new(10.5, 0.0)));
    }

    #[test]
    fn arg_normalization_handles_wrapping_sectors() {
        let s = Sector::new(3.0, 4.0).unwrap();
        // arg = -2.8 is 3.48 after wrapping
        assert!(s.contains_open(Complex64::from_polar(2.0, -2.8)));
        let s = Sector::new(-1.0, 1.0).unwrap();
        assert!(s.contains_open(Complex64::from_polar(2.0, -0.5)));
        assert!(!s.contains_open(Complex64::from_polar(2.0, 1.5)));
    }

    #[test]
    fn tsuji_curve_ends_on_unit_circle() {
        for (a, b) in [(0.0, PI), (-PI / 4.0, PI / 4.0), (0.0, TAU)] {
            let s = Sector::new(a, b).unwrap();
            let r = 7.0;
            let u = s.tsuji_u_max(r);
            assert!((s.tsuji_point(r, u).norm() - 1.0).abs() < 1e-12);
            assert!((s.tsuji_point(r, -u).norm() - 1.0).abs() < 1e-12);
            assert!((s.tsuji_point(r, 0.0).norm() - r).abs() < 1e-12);
        }
        // k = 1: the curve is the circle through 0 and i r
        let s = Sector::new(0.0, PI).unwrap();
        let z = s.tsuji_point(5.0, 0.7);
        assert!((z - 5.0 / Complex64::new(0.7, -1.0)).norm() < 1e-12);
    }

    #[test]
    fn sup_norm_examples() {
        let f = Curve::parse(&["1", "exp(z)"]).unwrap();
        assert!((f.sup_log_norm(Complex64::new(2.0, 0.0)).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(f.sup_log_norm(Complex64::new(-2.0, 0.0)).unwrap(), 0.0);
        let g = Curve::parse(&["1", "z", "z^2"]).unwrap();
        let v = g.sup_log_norm(Complex64::new(0.0, 3.0)).unwrap();
        assert!((v - 9f64.ln()).abs() < 1e-15);
        let h = Curve::parse(&["z", "z^2"]).unwrap();
        assert!(matches!(
            h.sup_log_norm(Complex64::new(0.0, 0.0)),
            Err(Error::ReducedViolation { .. })
        ));
    }

    #[test]
    fn reduced_check_examples() {
        let s = Sector::new(-PI / 4.0, PI / 4.0).unwrap();
        let ok = Curve::parse(&["1", "exp(z)"]).unwrap();
        assert!(ok.reduced_check(&s, 10.0, 64).unwrap().pass);
        let sc = Curve::parse(&["sin(z)", "cos(z)"]).unwrap();
        assert!(sc.reduced_check(&s, 10.0, 64).unwrap().pass);
        let zz = Curve::parse(&["z", "z^2"]).unwrap();
        assert!(zz.reduced_check(&s, 10.0, 64).unwrap().pass);
        let bad = Curve::parse(&["z - 2", "(z - 2)*exp(z)"]).unwrap();
        let v = bad.reduced_check(&s, 10.0, 64).unwrap();
        assert!(!v.pass);
        assert!((v.witness.unwrap() - Complex64::new(2.0, 0.0)).norm() < 1e-8);
    }

    proptest! {
        #[test]
        fn xi_boundary_is_inclusive_and_inside_annulus(
            th in 0.01f64..3.13, r in 1.5f64..100.0
        ) {
            let s = Sector::new(0.0, PI).unwrap();
            let b = s.xi_bound(r, th);
            prop_assume!(b > 1.0 + 1e-9);
            let z = Complex64::from_polar(b, th);
            prop_assert!(s.xi_contains(r, z));
            prop_assert!(z.norm() <= r * (1.0 + 1e-12));
        }

        #[test]
        fn xi_monotone_in_r(
            t in 1.0f64..50.0, th in -0.78f64..0.78, r1 in 1.1f64..40.0, dr in 0.0f64..40.0
        ) {
            let s = Sector::new(-PI / 4.0, PI / 4.0).unwrap();
            let z = Complex64::from_polar(t, th);
            if s.xi_contains(r1, z) {
                prop_assert!(s.xi_contains(r1 + dr, z));
            }
        }

        #[test]
        fn whole_plane_bound_is_sine_squared(th in 0.01f64..6.27, r in 1.1f64..50.0) {
            let s = Sector::new(0.0, TAU).unwrap();
            let b = s.xi_bound(r, th);
            prop_assert!((b - r * (th / 2.0).sin().powi(2)).abs() < 1e-12 * r);
        }
    }
}
