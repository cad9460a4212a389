use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::form::{compose, HomogForm, HyperplaneVec};
use super::Curve;
use crate::error::{Error, Result};
use crate::expr::HoloExpr;

/// Relative determinant threshold for hyperplanes in general position.
pub const EPS_GP: f64 = 1e-9;
/// Residual below which a sampled common zero is accepted.
pub const EPS_CZ: f64 = 1e-10;

/// Every `n+1` of the coefficient vectors are linearly independent.
pub fn hyperplanes_general_position(hs: &[HyperplaneVec], n: usize, eps_gp: f64) -> Result<bool> {
    if hs.len() < n + 1 {
        return Err(Error::Invalid(format!(
            "need at least {} hyperplanes in P^{n}, got {}",
            n + 1,
            hs.len()
        )));
    }
    for h in hs {
        if h.coeffs().len() != n + 1 {
            return Err(Error::DimensionMismatch {
                expected: n + 1,
                got: h.coeffs().len(),
            });
        }
    }
    for subset in (0..hs.len()).combinations(n + 1) {
        let m = DMatrix::from_fn(n + 1, n + 1, |i, j| hs[subset[i]].coeffs()[j]);
        let scale: f64 = subset
            .iter()
            .map(|&i| hs[i].coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt())
            .product();
        if m.lu().determinant().norm() <= eps_gp * scale {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneralPosition {
    pub pass: bool,
    /// Smallest residual met over all subsets and starts.
    pub min_residual: f64,
    pub witness_subset: Option<Vec<usize>>,
    pub witness: Option<Vec<Complex64>>,
    pub note: String,
}

fn normalize(x: &mut [Complex64]) {
    let n = x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    for c in x {
        *c /= n;
    }
}

fn residual(qs: &[HomogForm], x: &[Complex64]) -> Result<(Vec<Complex64>, f64)> {
    let f: Vec<Complex64> = qs.iter().map(|q| q.eval(x)).collect::<Result<_>>()?;
    let r = f.iter().map(|c| c.norm_sqr()).sum();
    Ok((f, r))
}

/// `sum |Q_i(x)|^(2/d_i)`: every term scales like `|x|^2`, so high-degree
/// forms are not mistaken for vanishing where they are merely small.
fn root_residual(qs: &[HomogForm], x: &[Complex64]) -> Result<f64> {
    let mut s = 0.0;
    for q in qs {
        s += q.eval(x)?.norm().powf(2.0 / q.degree() as f64);
    }
    Ok(s)
}

/// Damped Gauss-Newton descent of `sum |Q_i(x)|^2` on the unit sphere.
fn descend(qs: &[HomogForm], mut x: Vec<Complex64>) -> Result<(Vec<Complex64>, f64)> {
    let n = x.len();
    normalize(&mut x);
    let (mut f, mut res) = residual(qs, &x)?;
    let mut lambda = 1e-3;
    for _ in 0..200 {
        if res < 1e-28 {
            break;
        }
        let grads: Vec<Vec<Complex64>> = qs.iter().map(|q| q.gradient(&x)).collect::<Result<_>>()?;
        let jac = DMatrix::from_fn(qs.len(), n, |i, j| grads[i][j]);
        let jh = jac.adjoint();
        let rhs = -(&jh * DVector::from_vec(f.clone()));
        let mut improved = false;
        for _ in 0..12 {
            let a = &jh * &jac + DMatrix::identity(n, n) * Complex64::new(lambda, 0.0);
            let Some(dx) = a.lu().solve(&rhs) else {
                lambda *= 4.0;
                continue;
            };
            let mut y: Vec<Complex64> = x.iter().zip(dx.iter()).map(|(a, b)| a + b).collect();
            normalize(&mut y);
            let (fy, ry) = residual(qs, &y)?;
            if ry < res {
                x = y;
                f = fy;
                res = ry;
                lambda = (lambda / 3.0).max(1e-15);
                improved = true;
                break;
            }
            lambda *= 4.0;
        }
        if !improved {
            break;
        }
    }
    Ok((x, res))
}

/// Sampled search for a common projective zero of every `n+1` of the forms,
/// each normalized to unit coefficient norm. The acceptance residual is
/// [`root_residual`] at a unit vector. A pass is heuristic.
pub fn hypersurfaces_general_position_sampled(
    qs: &[HomogForm],
    n: usize,
    budget: usize,
    seed: u64,
    eps_cz: f64,
) -> Result<GeneralPosition> {
    if qs.len() < n + 1 {
        return Err(Error::Invalid(format!(
            "need at least {} hypersurfaces in P^{n}, got {}",
            n + 1,
            qs.len()
        )));
    }
    let normed: Vec<HomogForm> = qs
        .iter()
        .map(|q| {
            if q.n_vars() != n + 1 {
                return Err(Error::DimensionMismatch {
                    expected: n + 1,
                    got: q.n_vars(),
                });
            }
            q.scaled_by(Complex64::new(1.0 / q.coeff_norm(), 0.0))
        })
        .collect::<Result<_>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_residual = f64::INFINITY;
    for subset in (0..qs.len()).combinations(n + 1) {
        let sub: Vec<HomogForm> = subset.iter().map(|&i| normed[i].clone()).collect();
        for _ in 0..budget.max(1) {
            let x0: Vec<Complex64> = (0..=n)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let (x, _) = descend(&sub, x0)?;
            let res = root_residual(&sub, &x)?;
            min_residual = min_residual.min(res);
            if res < eps_cz {
                return Ok(GeneralPosition {
                    pass: false,
                    min_residual: res,
                    witness_subset: Some(subset),
                    witness: Some(x),
                    note: "common projective zero found".into(),
                });
            }
        }
    }
    Ok(GeneralPosition {
        pass: true,
        min_residual,
        witness_subset: None,
        witness: None,
        note: format!("heuristic: no common zero found from {budget} starts per subset"),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Theorem10Target {
    pub form: HomogForm,
    /// Whether `n > N(d + N + 1)`.
    pub hypothesis_ok: bool,
}

/// `sum_i H_i^n Q_i` for `N+1` hyperplanes `H_i` and forms `Q_i` of one degree `d`.
pub fn build_theorem10_target(
    hs: &[HyperplaneVec],
    qs: &[HomogForm],
    n: u32,
) -> Result<Theorem10Target> {
    if hs.is_empty() || hs.len() != qs.len() {
        return Err(Error::Invalid(format!(
            "need the same positive number of hyperplanes and forms, got {} and {}",
            hs.len(),
            qs.len()
        )));
    }
    let big_n = hs.len() - 1;
    let d = qs[0].degree();
    if qs.iter().any(|q| q.degree() != d) {
        return Err(Error::Invalid("forms Q_i must share one degree".into()));
    }
    let mut acc: Option<HomogForm> = None;
    for (h, q) in hs.iter().zip(qs) {
        let term = if n == 0 {
            q.clone()
        } else {
            h.to_form().pow(n)?.mul(q)?
        };
        acc = Some(match acc {
            None => term,
            Some(a) => a.add(&term)?,
        });
    }
    let bound = big_n as u64 * (d as u64 + big_n as u64 + 1);
    Ok(Theorem10Target {
        form: acc.unwrap(),
        hypothesis_ok: n as u64 > bound,
    })
}

/// `F = (phi_0 f_0^n : ... : phi_N f_N^n)` with `phi_i = Q_i(f)`.
pub fn build_f_curve(f: &Curve, qs: &[HomogForm], n: u32) -> Result<Curve> {
    if qs.len() != f.dim() + 1 {
        return Err(Error::DimensionMismatch {
            expected: f.dim() + 1,
            got: qs.len(),
        });
    }
    let comps = qs
        .iter()
        .zip(f.components())
        .map(|(q, fi)| Ok(compose(q, f)? * HoloExpr::pow(fi.clone(), n)))
        .collect::<Result<Vec<_>>>()?;
    Curve::new(comps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hp(c: &[f64]) -> HyperplaneVec {
        HyperplaneVec::real(c).unwrap()
    }

    #[test]
    fn hyperplane_examples() {
        let hs = [hp(&[1.0, 0.0]), hp(&[0.0, 1.0]), hp(&[1.0, 1.0])];
        assert!(hyperplanes_general_position(&hs, 1, EPS_GP).unwrap());
        let hs = [hp(&[1.0, 0.0]), hp(&[0.0, 1.0]), hp(&[1.0, 0.0])];
        assert!(!hyperplanes_general_position(&hs, 1, EPS_GP).unwrap());
        assert!(hyperplanes_general_position(&hs[..1], 1, EPS_GP).is_err());
    }

    #[test]
    fn coordinate_plus_sum_hyperplanes_are_in_general_position() {
        for big_n in 1..6 {
            let mut hs: Vec<HyperplaneVec> = (0..=big_n)
                .map(|i| {
                    let mut v = vec![0.0; big_n + 1];
                    v[i] = 1.0;
                    hp(&v)
                })
                .collect();
            hs.push(hp(&vec![1.0; big_n + 1]));
            assert!(hyperplanes_general_position(&hs, big_n, EPS_GP).unwrap());
        }
    }

    #[test]
    fn hypersurface_examples() {
        let q = |s: &str| HomogForm::parse(s, 2).unwrap();
        let v = hypersurfaces_general_position_sampled(&[q("x0^3"), q("x1^3")], 1, 16, 0, EPS_CZ)
            .unwrap();
        assert!(v.pass);
        let v = hypersurfaces_general_position_sampled(&[q("x0"), q("x0^2")], 1, 16, 0, EPS_CZ)
            .unwrap();
        assert!(!v.pass);
        let w = v.witness.unwrap();
        assert!(w[0].norm() < 1e-5 && (w[1].norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn example_family_in_p2_is_in_general_position() {
        let q = |s: &str| HomogForm::parse(s, 3).unwrap();
        let forms = [q("x0^9"), q("(x0 + x1)^8*x1"), q("(x0 + x1 + x2)^8*x2")];
        let v = hypersurfaces_general_position_sampled(&forms, 2, 16, 7, EPS_CZ).unwrap();
        assert!(v.pass, "{v:?}");
    }

    #[test]
    fn theorem10_target_example() {
        let hs = [hp(&[1.0, 0.0]), hp(&[1.0, 1.0])];
        let qs = [
            HomogForm::parse("x0", 2).unwrap(),
            HomogForm::parse("x1", 2).unwrap(),
        ];
        let t = build_theorem10_target(&hs, &qs, 5).unwrap();
        assert_eq!(t.form, HomogForm::parse("x0^6 + (x0 + x1)^5*x1", 2).unwrap());
        assert_eq!(t.form.degree(), 6);
        assert!(t.hypothesis_ok);
        let t = build_theorem10_target(&hs, &qs, 3).unwrap();
        assert!(!t.hypothesis_ok);
        // N = 0
        let t = build_theorem10_target(
            &[hp(&[2.0])],
            &[HomogForm::parse("x0^2", 1).unwrap()],
            3,
        )
        .unwrap();
        assert_eq!(t.form, HomogForm::parse("8*x0^5", 1).unwrap());
    }

    #[test]
    fn theorem10_target_matches_pointwise_sum() {
        let hs = [hp(&[1.0, 0.0, 0.0]), hp(&[1.0, 1.0, 0.0]), hp(&[1.0, 1.0, 1.0])];
        let qs: Vec<HomogForm> = ["x0^2", "x1^2 - x0*x2", "(1+1i)*x2^2"]
            .iter()
            .map(|s| HomogForm::parse(s, 3).unwrap())
            .collect();
        let t = build_theorem10_target(&hs, &qs, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..16 {
            let x: Vec<Complex64> = (0..3)
                .map(|_| Complex64::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)))
                .collect();
            let want: Complex64 = hs
                .iter()
                .zip(&qs)
                .map(|(h, q)| h.to_form().eval(&x).unwrap().powu(4) * q.eval(&x).unwrap())
                .sum();
            let got = t.form.eval(&x).unwrap();
            assert!((got - want).norm() <= 1e-12 * want.norm().max(1.0));
        }
        assert!(build_theorem10_target(&hs, &[qs[0].clone(), qs[1].clone(), hs[0].to_form()], 4).is_err());
    }

    #[test]
    fn f_curve_examples() {
        let f = Curve::parse(&["1", "exp(z)"]).unwrap();
        let qs = [HomogForm::parse("x0", 2).unwrap(), HomogForm::parse("x1", 2).unwrap()];
        let big_f = build_f_curve(&f, &qs, 2).unwrap();
        let z = Complex64::new(0.4, -1.1);
        let v = big_f.values(z).unwrap();
        assert!((v[0].to_c64().unwrap() - 1.0).norm() < 1e-15);
        assert!((v[1].to_c64().unwrap() - (3.0 * z).exp()).norm() < 1e-13);

        let g = Curve::parse(&["1", "z"]).unwrap();
        let qs = [HomogForm::parse("x0 + x1", 2).unwrap(), HomogForm::parse("x1", 2).unwrap()];
        let big_g = build_f_curve(&g, &qs, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..16 {
            let z = Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let v = big_g.values(z).unwrap();
            assert!((v[0].to_c64().unwrap() - (1.0 + z)).norm() <= 1e-12 * (1.0 + z.norm()));
            assert!((v[1].to_c64().unwrap() - z * z).norm() <= 1e-12 * (1.0 + z.norm_sqr()));
        }
    }
}
