use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

use nevanlinna_core::lab::{check_carleman, check_fmt_tsuji, LabConfig, RGrid, Spacing, Verdict};
use nevanlinna_core::nevanlinna::{char_s, char_t_tsuji, counting_n_tsuji, proximity_m_tsuji, Target, TruncationLevel};
use nevanlinna_core::projective::{Curve, HomogForm, Sector};
use nevanlinna_core::quad::QuadratureConfig;
use nevanlinna_core::zeros::LocatorConfig;
use nevanlinna_core::MeroFn;

fn exp_curve(w: Complex64) -> Curve {
    Curve::parse(&["1".to_string(), format!("exp(({} + {}i)*z)", w.re, w.im)]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    // rotating the plane by phi and the sector by -phi leaves every functional unchanged
    #[test]
    fn rotation_invariance(alpha in -3.0f64..3.0, width in 0.5f64..3.0, phi in -1.5f64..1.5, r in 3.0f64..40.0) {
        let w = Complex64::new(0.7, -0.4);
        let rot = Complex64::from_polar(1.0, phi);
        let f = exp_curve(w);
        let g = exp_curve(w * rot);
        let s = Sector::new(alpha, alpha + width).unwrap();
        let t = Sector::new(alpha - phi, alpha - phi + width).unwrap();
        let cfg = QuadratureConfig::default();
        let (a, b) = (char_s(&f, &s, r, &cfg).unwrap(), char_s(&g, &t, r, &cfg).unwrap());
        prop_assert!((a - b).abs() <= 1e-7 * (1.0 + a.abs()), "S {} vs {}", a, b);
        let (a, b) = (char_t_tsuji(&f, &s, r, &cfg).unwrap(), char_t_tsuji(&g, &t, r, &cfg).unwrap());
        prop_assert!((a - b).abs() <= 1e-7 * (1.0 + a.abs()), "T {} vs {}", a, b);
    }
}

#[test]
fn tsuji_first_main_theorem_for_a_conic() {
    let f = Curve::parse(&["1", "z", "z^2 + 1"]).unwrap();
    let q = HomogForm::parse("x0^2 + 3*x1^2 - x0*x2", 3).unwrap();
    let s = Sector::new(-PI / 3.0, PI / 3.0).unwrap();
    let grid = RGrid::new(10.0, 300.0, 10, Spacing::Geometric).unwrap();
    let rep = check_fmt_tsuji(&f, &q, &s, &grid, &LabConfig::default()).unwrap();
    assert_eq!(rep.verdict, Verdict::Pass, "{:?} {:?}", rep.notes, rep.fit);
    assert!(rep.fit.b.abs() < 0.02);
}

#[test]
fn first_main_theorem_terms_add_up() {
    // zeros of 1 + e^z sit on the imaginary axis, so (0, pi) sees all of them
    let f = Curve::parse(&["1", "exp(z)"]).unwrap();
    let s = Sector::new(0.0, PI).unwrap();
    let r = 80.0;
    let cfg = QuadratureConfig::default();
    let t = Target::new(&f, &HomogForm::parse("x0 + x1", 2).unwrap(), &s, r, &LocatorConfig::default()).unwrap();
    assert_eq!(t.zeros.zeros.len(), 13);
    let total = proximity_m_tsuji(&f, &t, r, &cfg).unwrap() + counting_n_tsuji(&t, r, TruncationLevel::Untruncated).unwrap();
    let ch = char_t_tsuji(&f, &s, r, &cfg).unwrap();
    assert!((ch - total).abs() < 0.25, "{ch} vs {total}");
}

#[test]
fn carleman_for_a_rational_function() {
    let mf = MeroFn::parse("(z - 3)*(z - 2i)", "z - 5 - 5i").unwrap();
    let s = Sector::new(-0.2, 1.9).unwrap();
    let grid = RGrid::new(10.0, 400.0, 8, Spacing::Geometric).unwrap();
    let rep = check_carleman(&mf, &s, &grid, &LabConfig::default()).unwrap();
    assert_eq!(rep.verdict, Verdict::Pass);
    assert!(rep.range < 0.1, "{:?}", rep.defect);
}
