//! Angular and Tsuji functionals: counting sums, proximity and
//! characteristic integrals, scalar meromorphic versions, Wronskians.

mod curve;
pub mod paths;
mod scalar;
mod wronskian;

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};
use crate::projective::Sector;
use crate::quad::{integrate, QuadratureConfig};
use crate::zeros::ZeroRecord;

pub use curve::{
    char_cartan_plane, char_s, char_t_tsuji, counting_c, counting_n_tsuji, proximity_a, proximity_b,
    proximity_max_k, proximity_m_tsuji, CartanValue, Target, Variant,
};
pub use scalar::MeroData;
pub(crate) use wronskian::curve_jets;
pub use wronskian::{
    counting_w, wronskian_expr, wronskian_is_zero, wronskian_of_jets, wronskian_value, wronskian_zeros,
};

pub fn log_plus(x: f64) -> f64 {
    x.max(1.0).ln()
}

/// Multiplicity cap for counting functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "TruncationSpec", into = "TruncationSpec")]
pub enum TruncationLevel {
    #[default]
    Untruncated,
    Level(u32),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum TruncationSpec {
    Level(u32),
    Word(String),
}

impl TryFrom<TruncationSpec> for TruncationLevel {
    type Error = Error;
    fn try_from(s: TruncationSpec) -> Result<Self> {
        match s {
            TruncationSpec::Level(d) => TruncationLevel::level(d),
            TruncationSpec::Word(w) if w == "untruncated" => Ok(TruncationLevel::Untruncated),
            TruncationSpec::Word(w) => Err(Error::Invalid(format!(
                "truncation must be a positive integer or \"untruncated\", got {w:?}"
            ))),
        }
    }
}

impl From<TruncationLevel> for TruncationSpec {
    fn from(t: TruncationLevel) -> Self {
        match t {
            TruncationLevel::Untruncated => TruncationSpec::Word("untruncated".into()),
            TruncationLevel::Level(d) => TruncationSpec::Level(d),
        }
    }
}

impl TruncationLevel {
    pub fn level(delta: u32) -> Result<Self> {
        if delta == 0 {
            return Err(Error::Invalid("truncation level must be at least 1".into()));
        }
        Ok(TruncationLevel::Level(delta))
    }

    /// `min(m, delta)`.
    pub fn weight(&self, m: u32) -> f64 {
        match self {
            TruncationLevel::Untruncated => m as f64,
            TruncationLevel::Level(d) => m.min(*d) as f64,
        }
    }
}

impl fmt::Display for TruncationLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TruncationLevel::Untruncated => write!(f, "untruncated"),
            TruncationLevel::Level(d) => write!(f, "{d}"),
        }
    }
}

fn in_closed_annulus(s: &Sector, z: &ZeroRecord, r: f64) -> bool {
    let m = z.location.norm();
    m >= 1.0 - 1e-12 && m <= r && s.contains_closed(z.location)
}

/// `C = 2 sum min(m, delta) (rho^-k - rho^k/r^2k) sin(k(psi - alpha))` over the
/// closed sector with `1 <= rho <= r`.
pub fn c_sum(s: &Sector, zeros: &[ZeroRecord], r: f64, delta: TruncationLevel) -> f64 {
    let k = s.k();
    let r2k = r.powf(2.0 * k);
    zeros
        .iter()
        .filter(|z| in_closed_annulus(s, z, r))
        .map(|z| {
            let rho = z.location.norm();
            let psi = s.normalize_arg(z.location);
            let w = (rho.powf(-k) - rho.powf(k) / r2k).max(0.0);
            2.0 * delta.weight(z.multiplicity) * w * s.kernel_sin(psi).max(0.0)
        })
        .fold(0.0, |acc, x| acc + x)
}

/// `c(t) = sum min(m, delta) sin(k(psi - alpha))` over the closed sector with `1 <= rho <= t`.
pub fn c_small(s: &Sector, zeros: &[ZeroRecord], t: f64, delta: TruncationLevel) -> f64 {
    zeros
        .iter()
        .filter(|z| in_closed_annulus(s, z, t))
        .map(|z| delta.weight(z.multiplicity) * s.kernel_sin(s.normalize_arg(z.location)).max(0.0))
        .fold(0.0, |acc, x| acc + x)
}

/// `N = sum min(m, delta) (sin(k(theta - alpha))/|a|^k - r^-k)` over `Xi(r)`.
pub fn n_sum(s: &Sector, zeros: &[ZeroRecord], r: f64, delta: TruncationLevel) -> f64 {
    let k = s.k();
    let rk = r.powf(-k);
    zeros
        .iter()
        .filter(|z| s.xi_contains(r, z.location))
        .map(|z| {
            let a = z.location.norm();
            let th = s.normalize_arg(z.location);
            delta.weight(z.multiplicity) * (s.kernel_sin(th) / a.powf(k) - rk).max(0.0)
        })
        .fold(0.0, |acc, x| acc + x)
}

/// Step function `t -> sum of weights with key <= t`, as sorted keys and prefix sums.
struct Steps {
    keys: Vec<f64>,
    prefix: Vec<f64>,
}

impl Steps {
    fn new(mut items: Vec<(f64, f64)>) -> Self {
        items.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut acc = 0.0;
        let mut prefix = Vec::with_capacity(items.len());
        for (_, w) in &items {
            acc += w;
            prefix.push(acc);
        }
        Steps {
            keys: items.into_iter().map(|x| x.0).collect(),
            prefix,
        }
    }

    fn at(&self, t: f64) -> f64 {
        let n = self.keys.partition_point(|k| *k <= t);
        if n == 0 {
            0.0
        } else {
            self.prefix[n - 1]
        }
    }

    fn breakpoints(&self, a: f64, b: f64) -> Vec<f64> {
        let mut pts = vec![a];
        pts.extend(self.keys.iter().copied().filter(|k| *k > a && *k < b));
        pts.push(b);
        pts.dedup();
        pts
    }
}

/// Integral form of C: `2k int_1^r c(t) (t^{-k-1} + t^{k-1}/r^{2k}) dt`.
pub fn c_integral(s: &Sector, zeros: &[ZeroRecord], r: f64, delta: TruncationLevel, cfg: &QuadratureConfig) -> Result<f64> {
    let k = s.k();
    let steps = Steps::new(
        zeros
            .iter()
            .filter(|z| in_closed_annulus(s, z, r))
            .map(|z| {
                let w = delta.weight(z.multiplicity) * s.kernel_sin(s.normalize_arg(z.location)).max(0.0);
                (z.location.norm().max(1.0), w)
            })
            .collect(),
    );
    let r2k = r.powf(2.0 * k);
    let f = |t: f64| Ok(steps.at(t) * (t.powf(-k - 1.0) + t.powf(k - 1.0) / r2k));
    Ok(2.0 * k * integrate(f, &steps.breakpoints(1.0, r), cfg)?.value)
}

/// Integral form of N: `k int_1^r n(t) t^{-k-1} dt`, where a zero `a` enters
/// `Xi(t)` at `t = |a| / sin^{1/k}(k(theta - alpha))`.
pub fn n_integral(s: &Sector, zeros: &[ZeroRecord], r: f64, delta: TruncationLevel, cfg: &QuadratureConfig) -> Result<f64> {
    let k = s.k();
    let steps = Steps::new(
        zeros
            .iter()
            .filter(|z| s.xi_contains(r, z.location))
            .map(|z| {
                let th = s.normalize_arg(z.location);
                let tau = z.location.norm() / s.kernel_sin(th).powf(1.0 / k);
                (tau.min(r), delta.weight(z.multiplicity))
            })
            .collect(),
    );
    let f = |t: f64| Ok(steps.at(t) * t.powf(-k - 1.0));
    Ok(k * integrate(f, &steps.breakpoints(1.0, r), cfg)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn rec(z: Complex64, m: u32) -> ZeroRecord {
        ZeroRecord {
            location: z,
            multiplicity: m,
            residual: 0.0,
            log_abs_value: f64::NEG_INFINITY,
        }
    }

    fn sin_zeros() -> Vec<ZeroRecord> {
        (1..=3).map(|n| rec(Complex64::new(n as f64 * PI, 0.0), 1)).collect()
    }

    #[test]
    fn sine_counting_examples() {
        let s = Sector::new(-PI / 4.0, PI / 4.0).unwrap();
        let c = c_sum(&s, &sin_zeros(), 10.0, TruncationLevel::Untruncated);
        let want: f64 = (1..=3)
            .map(|n| {
                let x = n as f64 * PI;
                2.0 * (1.0 / (x * x) - x * x / 1e4)
            })
            .sum();
        assert!((c - want).abs() < 1e-14);
        assert!((c - 0.2482).abs() < 5e-4);
        let c1 = c_sum(&s, &sin_zeros(), 10.0, TruncationLevel::Level(1));
        assert_eq!(c, c1);

        let n = n_sum(&s, &sin_zeros(), 10.0, TruncationLevel::Untruncated);
        let want: f64 = (1..=3).map(|n| 1.0 / (n as f64 * PI).powi(2) - 0.01).sum();
        assert!((n - want).abs() < 1e-14);
        assert!((n - 0.1079).abs() < 5e-4);
    }

    #[test]
    fn double_zero_truncated_to_half() {
        let s = Sector::new(-PI / 4.0, PI / 4.0).unwrap();
        let z = [rec(Complex64::new(2.0, 0.0), 2)];
        let full = n_sum(&s, &z, 10.0, TruncationLevel::Untruncated);
        let one = n_sum(&s, &z, 10.0, TruncationLevel::Level(1));
        assert_eq!(one * 2.0, full);
    }

    #[test]
    fn truncation_serde() {
        let t: TruncationLevel = serde_json::from_str("3").unwrap();
        assert_eq!(t, TruncationLevel::Level(3));
        let t: TruncationLevel = serde_json::from_str("\"untruncated\"").unwrap();
        assert_eq!(t, TruncationLevel::Untruncated);
        assert!(serde_json::from_str::<TruncationLevel>("0").is_err());
        assert_eq!(serde_json::to_string(&TruncationLevel::Level(2)).unwrap(), "2");
    }

    #[test]
    fn unit_circle_zero_counts_in_c_only() {
        let s = Sector::new(0.0, PI).unwrap();
        let z = [rec(Complex64::from_polar(1.0, 1.0), 1)];
        assert!(c_sum(&s, &z, 5.0, TruncationLevel::Untruncated) > 0.0);
        assert_eq!(n_sum(&s, &z, 5.0, TruncationLevel::Untruncated), 0.0);
    }

    fn zero_strategy() -> impl Strategy<Value = Vec<ZeroRecord>> {
        prop::collection::vec((0.0f64..4.0, -3.2f64..3.2, 1u32..5), 0..25).prop_map(|v| {
            v.into_iter()
                .map(|(lr, th, m)| rec(Complex64::from_polar(lr.exp(), th), m))
                .collect()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn integral_forms_match_sums(zs in zero_strategy(), a in -1.0f64..1.0, w in 0.5f64..6.2, r in 1.5f64..60.0) {
            let s = Sector::new(a, a + w).unwrap();
            let cfg = QuadratureConfig::default();
            let d = TruncationLevel::Untruncated;
            let cs = c_sum(&s, &zs, r, d);
            let ci = c_integral(&s, &zs, r, d, &cfg).unwrap();
            prop_assert!((cs - ci).abs() <= 1e-6 * cs.abs().max(1e-3), "{} {}", cs, ci);
            let ns = n_sum(&s, &zs, r, d);
            let ni = n_integral(&s, &zs, r, d, &cfg).unwrap();
            prop_assert!((ns - ni).abs() <= 1e-6 * ns.abs().max(1e-3), "{} {}", ns, ni);
        }

        #[test]
        fn truncation_inequalities(zs in zero_strategy(), r in 1.5f64..60.0, d1 in 1u32..4, extra in 0u32..3) {
            let s = Sector::new(0.0, PI).unwrap();
            let d2 = d1 + extra;
            let full = TruncationLevel::Untruncated;
            let l1 = TruncationLevel::Level(1);
            let a = TruncationLevel::Level(d1);
            let b = TruncationLevel::Level(d2);
            for f in [n_sum, c_sum] {
                let nf = f(&s, &zs, r, full);
                let na = f(&s, &zs, r, a);
                let nb = f(&s, &zs, r, b);
                let n1 = f(&s, &zs, r, l1);
                prop_assert!(na >= 0.0);
                prop_assert!(na <= nf * (1.0 + 1e-15));
                prop_assert!(na <= nb * (1.0 + 1e-15));
                prop_assert!(na <= d1 as f64 * n1 * (1.0 + 1e-15));
            }
        }
    }
}
