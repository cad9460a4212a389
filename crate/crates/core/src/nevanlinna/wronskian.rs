use nalgebra::DMatrix;
use num_complex::Complex64;

use super::curve::Variant;
use super::{c_sum, n_sum, TruncationLevel};
use crate::error::{Error, Result};
use crate::expr::{probe_points, HoloExpr};
use crate::projective::{Curve, Sector};
use crate::scaled::{Scaled, ScaledJet};
use crate::zeros::{LocatorConfig, ZeroSet};

/// Wronskian of functions given by their jets at one point (orders at least
/// `jets.len() - 1`). Columns are scaled to unit size before the determinant
/// and the scales are carried in the exponent.
pub fn wronskian_of_jets(jets: &[ScaledJet]) -> Scaled {
    let n = jets.len();
    let mut scale = Scaled::new(Complex64::new(1.0, 0.0), 0);
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for (i, jet) in jets.iter().enumerate() {
        let d = jet.derivative_mantissas();
        let norm = d[..n].iter().map(|x| x.norm()).fold(0.0, f64::max);
        if norm == 0.0 {
            return Scaled::ZERO;
        }
        for j in 0..n {
            m[(j, i)] = d[j] / norm;
        }
        scale = scale.mul(&Scaled::new(Complex64::new(norm, 0.0), jet.exp));
    }
    scale.scale(m.determinant())
}

pub(crate) fn curve_jets(f: &Curve, z: Complex64) -> Result<Vec<ScaledJet>> {
    let n = f.components().len();
    f.components().iter().map(|c| c.eval_scaled(z, n - 1)).collect()
}

/// `W(f_0, ..., f_n)(z)` in scaled form.
pub fn wronskian_value(f: &Curve, z: Complex64) -> Result<Scaled> {
    Ok(wronskian_of_jets(&curve_jets(f, z)?))
}

/// Relative size `|W| / prod_i max_j |f_i^(j)|` in log scale; at most 0 by Hadamard.
fn relative_log_size(f: &Curve, z: Complex64) -> Result<f64> {
    let n = f.components().len();
    let mut bound = 0.0;
    for c in f.components() {
        let jet = c.eval_scaled(z, n - 1)?;
        let norm = jet.derivative_mantissas().iter().map(|x| x.norm()).fold(0.0, f64::max);
        bound += Scaled::new(Complex64::new(norm, 0.0), jet.exp).ln_abs();
    }
    Ok(wronskian_value(f, z)?.ln_abs() - bound)
}

/// Numerical test for `W ≡ 0` (linear degeneracy) at the probe points.
pub fn wronskian_is_zero(f: &Curve) -> Result<bool> {
    for z in probe_points() {
        if relative_log_size(f, z)? > (1e-10f64).ln() {
            return Ok(false);
        }
    }
    Ok(true)
}

fn det_expr(cols: &[Vec<HoloExpr>], rows: &[usize], used: &mut Vec<bool>, row: usize) -> HoloExpr {
    if row == rows.len() {
        return HoloExpr::real(1.0);
    }
    let mut acc: Option<HoloExpr> = None;
    let mut sign = 1.0;
    for i in 0..cols.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let minor = det_expr(cols, rows, used, row + 1);
        used[i] = false;
        let term = cols[i][rows[row]].clone() * minor;
        acc = Some(match acc {
            None if sign > 0.0 => term,
            None => -term,
            Some(a) if sign > 0.0 => a + term,
            Some(a) => a - term,
        });
        sign = -sign;
    }
    acc.unwrap()
}

/// The Wronskian as an expression, by cofactor expansion of symbolic derivatives.
pub fn wronskian_expr(f: &Curve) -> HoloExpr {
    let n = f.components().len();
    let cols: Vec<Vec<HoloExpr>> = f
        .components()
        .iter()
        .map(|c| {
            let mut v = vec![c.clone()];
            for _ in 1..n {
                let d = v.last().unwrap().derivative();
                v.push(d);
            }
            v
        })
        .collect();
    let rows: Vec<usize> = (0..n).collect();
    det_expr(&cols, &rows, &mut vec![false; n], 0)
}

/// Zeros of the Wronskian on the sector up to `r_max`.
pub fn wronskian_zeros(f: &Curve, s: &Sector, r_max: f64, loc: &LocatorConfig) -> Result<ZeroSet> {
    if wronskian_is_zero(f)? {
        return Err(Error::LinearlyDegenerate);
    }
    let w = wronskian_expr(f);
    if w.as_const().is_some() {
        return Ok(ZeroSet::empty(s, r_max));
    }
    ZeroSet::locate(&w, s, r_max, loc)
}

/// Angular or Tsuji counting function of the zeros of `W`.
pub fn counting_w(zeros: &ZeroSet, r: f64, variant: Variant) -> Result<f64> {
    let s = zeros.sector;
    let d = TruncationLevel::Untruncated;
    Ok(match variant {
        Variant::Angular => c_sum(&s, &zeros.annulus(r)?, r, d),
        Variant::Tsuji => n_sum(&s, &zeros.xi(r)?, r, d),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn rand_point(rng: &mut ChaCha8Rng) -> Complex64 {
        Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0))
    }

    #[test]
    fn polynomial_basis_gives_two() {
        let f = Curve::parse(&["1", "z", "z^2"]).unwrap();
        for z in probe_points() {
            let w = wronskian_value(&f, z).unwrap().to_c64().unwrap();
            assert!((w - Complex64::new(2.0, 0.0)).norm() < 1e-13, "{w}");
        }
        assert_eq!(wronskian_expr(&f).eval_value(Complex64::new(0.3, 0.1)).unwrap().to_c64().unwrap(), Complex64::new(2.0, 0.0));
    }

    #[test]
    fn exponentials() {
        let f = Curve::parse(&["exp(z)", "exp(2*z)"]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let z = rand_point(&mut rng);
            let w = wronskian_value(&f, z).unwrap().to_c64().unwrap();
            let want = (3.0 * z).exp();
            assert!((w - want).norm() < 1e-12 * want.norm());
        }
        // large arguments stay in scaled form
        let w = wronskian_value(&f, Complex64::new(800.0, 1.0)).unwrap();
        assert!((w.ln_abs() - 2400.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_curve_detected() {
        let f = Curve::parse(&["z", "2*z", "1"]).unwrap();
        assert!(wronskian_is_zero(&f).unwrap());
        let s = Sector::new(0.0, PI).unwrap();
        assert!(matches!(
            wronskian_zeros(&f, &s, 10.0, &LocatorConfig::default()),
            Err(Error::LinearlyDegenerate)
        ));
        assert!(!wronskian_is_zero(&Curve::parse(&["1", "exp(z)"]).unwrap()).unwrap());
    }

    #[test]
    fn sine_wronskian_counts_cosine_zeros() {
        let f = Curve::parse(&["1", "sin(z)"]).unwrap();
        let s = Sector::new(-PI / 4.0, PI / 4.0).unwrap();
        let r = 10.0f64;
        let zs = wronskian_zeros(&f, &s, r, &LocatorConfig::default()).unwrap();
        assert_eq!(zs.zeros.len(), 3);
        let c = counting_w(&zs, r, Variant::Angular).unwrap();
        let want: f64 = (0..3)
            .map(|n| {
                let x = PI / 2.0 + n as f64 * PI;
                2.0 * (x.powi(-2) - x * x / r.powi(4))
            })
            .sum();
        assert!((c - want).abs() < 1e-12);
        let nt = counting_w(&zs, r, Variant::Tsuji).unwrap();
        let want: f64 = (0..3).map(|n| (PI / 2.0 + n as f64 * PI).powi(-2) - r.powi(-2)).sum();
        assert!((nt - want).abs() < 1e-12);
    }

    #[test]
    fn nonvanishing_wronskians_count_zero() {
        let s = Sector::new(0.0, PI).unwrap();
        for comps in [["1", "exp(z)"], ["1", "z"]] {
            let f = Curve::parse(&comps).unwrap();
            let zs = wronskian_zeros(&f, &s, 50.0, &LocatorConfig::default()).unwrap();
            assert_eq!(counting_w(&zs, 50.0, Variant::Angular).unwrap(), 0.0);
            assert_eq!(counting_w(&zs, 50.0, Variant::Tsuji).unwrap(), 0.0);
        }
    }
}
