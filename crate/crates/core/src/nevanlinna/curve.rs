use itertools::Itertools;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use super::paths::{angular_integrals, tsuji_integral};
use super::{c_sum, n_sum, TruncationLevel};
use crate::error::{Error, Result};
use crate::expr::HoloExpr;
use crate::projective::{compose, Curve, HomogForm, HyperplaneVec, Sector};
use crate::quad::{integrate, QuadratureConfig};
use crate::zeros::{LocatorConfig, ZeroSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Angular,
    Tsuji,
}

/// A hypersurface `Q` together with `Q(f)` and its zeros on the sector up to `r_max`.
#[derive(Debug, Clone)]
pub struct Target {
    pub form: HomogForm,
    pub composed: HoloExpr,
    pub zeros: ZeroSet,
}

impl Target {
    pub fn new(f: &Curve, q: &HomogForm, s: &Sector, r_max: f64, loc: &LocatorConfig) -> Result<Self> {
        let composed = compose(q, f)?;
        let zeros = ZeroSet::locate(&composed, s, r_max, loc)?;
        Ok(Target {
            form: q.clone(),
            composed,
            zeros,
        })
    }

    pub fn sector(&self) -> Sector {
        self.zeros.sector
    }

    pub fn degree(&self) -> u32 {
        self.form.degree()
    }

    fn singular(&self) -> Vec<Complex64> {
        self.zeros.zeros.iter().map(|z| z.location).collect()
    }
}

/// Logs of exact zeros only show up when a node lands on a zero; cap them.
pub(crate) fn finite_log(x: f64) -> f64 {
    x.clamp(-1e3, 1e3)
}

fn proximity_integrand<'a>(f: &'a Curve, t: &'a Target) -> impl Fn(Complex64) -> Result<f64> + 'a {
    let d = t.degree() as f64;
    move |z| Ok(d * f.sup_log_norm(z)? - finite_log(t.composed.eval_value(z)?.ln_abs()))
}

/// Ray part of the angular proximity function.
pub fn proximity_a(f: &Curve, t: &Target, r: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let s = t.sector();
    let h = proximity_integrand(f, t);
    let sing = t.singular();
    Ok(super::paths::ray_integral(&s, r, s.alpha(), &h, &sing, cfg)?
        + super::paths::ray_integral(&s, r, s.beta(), &h, &sing, cfg)?)
}

/// Arc part of the angular proximity function.
pub fn proximity_b(f: &Curve, t: &Target, r: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let s = t.sector();
    super::paths::arc_integral(&s, r, &proximity_integrand(f, t), &t.singular(), cfg)
}

pub fn proximity_m_tsuji(f: &Curve, t: &Target, r: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let s = t.sector();
    tsuji_integral(&s, r, &proximity_integrand(f, t), &t.singular(), cfg)
}

pub fn counting_c(t: &Target, r: f64, delta: TruncationLevel) -> Result<f64> {
    Ok(c_sum(&t.sector(), &t.zeros.annulus(r)?, r, delta))
}

pub fn counting_n_tsuji(t: &Target, r: f64, delta: TruncationLevel) -> Result<f64> {
    Ok(n_sum(&t.sector(), &t.zeros.xi(r)?, r, delta))
}

/// Angular characteristic: the ray and arc integrals of `log ||f||`.
pub fn char_s(f: &Curve, s: &Sector, r: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let (rays, arc) = angular_integrals(s, r, &|z| f.sup_log_norm(z), &[], cfg)?;
    Ok(rays + arc)
}

/// Tsuji characteristic: the boundary-curve integral of `log ||f||`.
pub fn char_t_tsuji(f: &Curve, s: &Sector, r: f64, cfg: &QuadratureConfig) -> Result<f64> {
    tsuji_integral(s, r, &|z| f.sup_log_norm(z), &[], cfg)
}

/// Subsets (as index lists) of size `1..=n+1` whose coefficient vectors are independent.
fn independent_subsets(hs: &[HyperplaneVec]) -> Vec<Vec<usize>> {
    let dim = hs.first().map_or(0, |h| h.coeffs().len());
    let mut out = Vec::new();
    for size in 1..=dim.min(hs.len()) {
        for idx in (0..hs.len()).combinations(size) {
            let m = DMatrix::from_fn(size, dim, |i, j| {
                let c = hs[idx[i]].coeffs();
                c[j] / c.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
            });
            let sv = m.singular_values();
            if sv.iter().all(|x| *x > 1e-9) {
                out.push(idx);
            }
        }
    }
    out
}

/// Max over independent subsets `K` of `sum_{j in K} log(||f|| / |(a_j, f)|)`,
/// integrated with the angular (rays + arc) or Tsuji weight. All targets must be hyperplanes.
pub fn proximity_max_k(f: &Curve, targets: &[Target], variant: Variant, r: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let Some(first) = targets.first() else {
        return Ok(0.0);
    };
    let s = first.sector();
    let hs = targets
        .iter()
        .map(|t| HyperplaneVec::from_form(&t.form))
        .collect::<Result<Vec<_>>>()?;
    let subsets = independent_subsets(&hs);
    let sing: Vec<Complex64> = targets.iter().flat_map(|t| t.singular()).collect();
    let h = |z: Complex64| -> Result<f64> {
        let norm = f.sup_log_norm(z)?;
        let terms = targets
            .iter()
            .map(|t| Ok(norm - finite_log(t.composed.eval_value(z)?.ln_abs())))
            .collect::<Result<Vec<f64>>>()?;
        Ok(subsets
            .iter()
            .map(|k| k.iter().map(|&j| terms[j]).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max))
    };
    match variant {
        Variant::Angular => {
            let (rays, arc) = angular_integrals(&s, r, &h, &sing, cfg)?;
            Ok(rays + arc)
        }
        Variant::Tsuji => tsuji_integral(&s, r, &h, &sing, cfg),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CartanValue {
    pub value: f64,
    /// Point where `log ||f||` was subtracted; 0 unless all components vanish there.
    pub base: Complex64,
}

fn base_points() -> impl Iterator<Item = Complex64> {
    std::iter::once(Complex64::new(0.0, 0.0))
        .chain((1..=64).map(|m| Complex64::from_polar(0.1 * m as f64, m as f64)))
}

/// Whole-plane Cartan characteristic `(1/2pi) int log ||f(r e^{it})|| dt - log ||f(z0)||`.
pub fn char_cartan_plane(f: &Curve, r: f64, cfg: &QuadratureConfig) -> Result<CartanValue> {
    let mut base = None;
    for z in base_points() {
        match f.sup_log_norm(z) {
            Ok(v) => {
                base = Some((z, v));
                break;
            }
            Err(Error::ReducedViolation { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    let (z0, v0) = base.ok_or_else(|| Error::Degenerate("all components vanish at every base point".into()))?;
    let pts: Vec<f64> = (0..=64).map(|i| TAU * i as f64 / 64.0).collect();
    let mean = integrate(|t: f64| f.sup_log_norm(Complex64::from_polar(r, t)), &pts, cfg)?.value / TAU;
    Ok(CartanValue {
        value: mean - v0,
        base: z0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projective::HyperplaneVec;
    use std::f64::consts::PI;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn exp_curve() -> Curve {
        Curve::parse(&["1", "exp(z)"]).unwrap()
    }

    fn upper() -> Sector {
        Sector::new(0.0, PI).unwrap()
    }

    fn target(f: &Curve, q: &str, s: &Sector, r: f64) -> Target {
        let form = HomogForm::parse(q, f.dim() + 1).unwrap();
        Target::new(f, &form, s, r, &LocatorConfig::default()).unwrap()
    }

    #[test]
    fn exp_curve_angular_values() {
        let f = exp_curve();
        let s = upper();
        for r in [10.0f64, 100.0] {
            let t = target(&f, "x1", &s, r);
            let a = proximity_a(&f, &t, r, &cfg()).unwrap();
            let want_a = (r.ln() - (r * r - 1.0) / (2.0 * r * r)) / PI;
            assert!((a - want_a).abs() < 1e-8, "{a} {want_a}");
            let b = proximity_b(&f, &t, r, &cfg()).unwrap();
            assert!((b - 1.0 / PI).abs() < 1e-8);
            let sv = char_s(&f, &s, r, &cfg()).unwrap();
            assert!((sv - want_a - 1.0 / PI).abs() < 1e-8);
            assert_eq!(counting_c(&t, r, TruncationLevel::Untruncated).unwrap(), 0.0);
        }
    }

    #[test]
    fn constant_curve_is_zero() {
        let f = Curve::parse(&["1", "1"]).unwrap();
        let s = upper();
        let t = target(&f, "x0", &s, 20.0);
        assert!(proximity_a(&f, &t, 20.0, &cfg()).unwrap().abs() < 1e-14);
        assert!(proximity_b(&f, &t, 20.0, &cfg()).unwrap().abs() < 1e-14);
        assert!(proximity_m_tsuji(&f, &t, 20.0, &cfg()).unwrap().abs() < 1e-14);
        assert!(char_s(&f, &s, 20.0, &cfg()).unwrap().abs() < 1e-14);
        assert!(char_t_tsuji(&f, &s, 20.0, &cfg()).unwrap().abs() < 1e-14);
    }

    #[test]
    fn tsuji_exp_characteristic() {
        // oracle: (1/2pi) int_{arcsin 1/r}^{pi/2} cot(phi) dphi = ln(r)/(2pi)
        let f = exp_curve();
        let s = upper();
        let r = 100.0f64;
        let t = char_t_tsuji(&f, &s, r, &cfg()).unwrap();
        assert!((t - r.ln() / TAU).abs() < 1e-8, "{t}");
        let tg = target(&f, "x1", &s, r);
        let m = proximity_m_tsuji(&f, &tg, r, &cfg()).unwrap();
        assert!((m - r.ln() / TAU).abs() < 1e-8, "{m}");
    }

    #[test]
    fn tsuji_power_ratio() {
        let s = upper();
        let r = 50.0;
        let t1 = char_t_tsuji(&Curve::parse(&["1", "z"]).unwrap(), &s, r, &cfg()).unwrap();
        let t3 = char_t_tsuji(&Curve::parse(&["1", "z^3"]).unwrap(), &s, r, &cfg()).unwrap();
        assert!((t3 / t1 - 3.0).abs() < 1e-2);
    }

    #[test]
    fn square_doubles_proximity() {
        let f = Curve::parse(&["1", "z - 2"]).unwrap();
        let s = Sector::new(-PI / 4.0, PI / 4.0).unwrap();
        let r = 20.0;
        let t1 = target(&f, "x1", &s, r);
        let t2 = target(&f, "x1^2", &s, r);
        for (p1, p2) in [
            (proximity_a(&f, &t1, r, &cfg()).unwrap(), proximity_a(&f, &t2, r, &cfg()).unwrap()),
            (proximity_b(&f, &t1, r, &cfg()).unwrap(), proximity_b(&f, &t2, r, &cfg()).unwrap()),
            (proximity_m_tsuji(&f, &t1, r, &cfg()).unwrap(), proximity_m_tsuji(&f, &t2, r, &cfg()).unwrap()),
        ] {
            assert!((p2 - 2.0 * p1).abs() < 1e-7 * p1.abs().max(1.0), "{p1} {p2}");
        }
        let n1 = counting_n_tsuji(&t1, r, TruncationLevel::Untruncated).unwrap();
        let n2 = counting_n_tsuji(&t2, r, TruncationLevel::Untruncated).unwrap();
        assert!(n1 > 0.0);
        assert_eq!(n2, 2.0 * n1);
    }

    #[test]
    fn max_k_for_coordinate_pair() {
        // integrand is |Re z|
        let f = exp_curve();
        let s = upper();
        let r = 30.0;
        let ts = [target(&f, "x0", &s, r), target(&f, "x1", &s, r)];
        let got = proximity_max_k(&f, &ts, Variant::Tsuji, r, &cfg()).unwrap();
        let want = tsuji_integral(&s, r, &|z: Complex64| Ok(z.re.abs()), &[], &cfg()).unwrap();
        assert!((got - want).abs() < 1e-8);
        // single hyperplane reduces to m
        let one = proximity_max_k(&f, &ts[1..], Variant::Tsuji, r, &cfg()).unwrap();
        let m = proximity_m_tsuji(&f, &ts[1], r, &cfg()).unwrap();
        assert!((one - m).abs() < 1e-10);
        let ang = proximity_max_k(&f, &ts[1..], Variant::Angular, r, &cfg()).unwrap();
        let ab = proximity_a(&f, &ts[1], r, &cfg()).unwrap() + proximity_b(&f, &ts[1], r, &cfg()).unwrap();
        assert!((ang - ab).abs() < 1e-10);
    }

    #[test]
    fn max_k_dominates_sum_of_m() {
        let f = exp_curve();
        let s = upper();
        let r = 40.0;
        let ts = [
            target(&f, "x0", &s, r),
            target(&f, "x1", &s, r),
            target(&f, "x0 + x1", &s, r),
        ];
        let mk = proximity_max_k(&f, &ts, Variant::Tsuji, r, &cfg()).unwrap();
        let sum: f64 = ts.iter().map(|t| proximity_m_tsuji(&f, t, r, &cfg()).unwrap()).sum();
        assert!(mk >= sum - 2.0, "{mk} {sum}");
        let _ = HyperplaneVec::real(&[1.0, 1.0]).unwrap();
    }

    #[test]
    fn cartan_examples() {
        let r = 200.0;
        let e = char_cartan_plane(&exp_curve(), r, &cfg()).unwrap();
        assert!((e.value - r / PI).abs() < 1e-6 * r);
        let z = char_cartan_plane(&Curve::parse(&["1", "z"]).unwrap(), r, &cfg()).unwrap();
        assert!((z.value - r.ln()).abs() < 1e-8);
        let c = char_cartan_plane(&Curve::parse(&["3", "3"]).unwrap(), r, &cfg()).unwrap();
        assert!(c.value.abs() < 1e-12);
        let shifted = char_cartan_plane(&Curve::parse(&["z", "z^2"]).unwrap(), r, &cfg()).unwrap();
        assert_ne!(shifted.base, Complex64::new(0.0, 0.0));
    }
}
