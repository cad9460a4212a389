//! Globally adaptive Gauss-Kronrod (7/15) quadrature over a list of
//! breakpoints, with deterministic panel summation.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
    /// Distance (relative to the path scale) under which a known zero is
    /// treated as a singularity of the integrand on the path.
    pub singularity_pad: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            abs_tol: 1e-8,
            rel_tol: 1e-8,
            max_panels: 1 << 16,
            singularity_pad: 1e-3,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) || self.max_panels == 0 {
            return Err(Error::Invalid(
                "quadrature tolerances must be positive and max_panels nonzero".into(),
            ));
        }
        Ok(())
    }
}

/// Values that can be integrated: reals and complex numbers.
pub trait QuadValue:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync
{
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: f64,
    pub panels: usize,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn gk15<T: QuadValue, F: FnMut(f64) -> Result<T>>(f: &mut F, a: f64, b: f64) -> Result<Panel<T>> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c)?;
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x)? + f(c + x)?;
        kron = kron + s * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + s * WG[j / 2];
        }
    }
    let value = kron * h;
    let error = ((kron - gauss) * h).magnitude();
    Ok(Panel {
        a,
        b,
        value,
        error,
    })
}

/// Integrate `f` over `[points[0], points[last]]`, starting from the panels
/// delimited by `points` (which must be nondecreasing).
pub fn integrate<T, F>(mut f: F, points: &[f64], cfg: &QuadratureConfig) -> Result<QuadResult<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> Result<T>,
{
    if points.len() < 2 {
        return Ok(QuadResult {
            value: T::zero(),
            error: 0.0,
            panels: 0,
        });
    }
    let mut heap = BinaryHeap::new();
    let mut total = T::zero();
    let mut err = 0.0;
    for w in points.windows(2) {
        if w[1] > w[0] {
            let p = gk15(&mut f, w[0], w[1])?;
            total = total + p.value;
            err += p.error;
            heap.push(p);
        }
    }
    while err > cfg.abs_tol.max(cfg.rel_tol * total.magnitude()) {
        if heap.len() >= cfg.max_panels {
            return Err(Error::Quadrature {
                value: total.magnitude(),
                error: err,
                panels: heap.len(),
            });
        }
        let worst = heap.pop().unwrap();
        let m = 0.5 * (worst.a + worst.b);
        if m <= worst.a || m >= worst.b {
            // cannot split further; keep it and stop refining
            heap.push(worst);
            break;
        }
        let l = gk15(&mut f, worst.a, m)?;
        let r = gk15(&mut f, m, worst.b)?;
        total = total - worst.value + l.value + r.value;
        err += l.error + r.error - worst.error;
        heap.push(l);
        heap.push(r);
    }
    // Re-sum in panel order so the result does not depend on heap history.
    let mut panels = heap.into_vec();
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value = panels.iter().fold(T::zero(), |acc, p| acc + p.value);
    let error = panels.iter().map(|p| p.error).sum::<f64>();
    if error > 10.0 * cfg.abs_tol.max(cfg.rel_tol * value.magnitude()) {
        return Err(Error::Quadrature {
            value: value.magnitude(),
            error,
            panels: panels.len(),
        });
    }
    Ok(QuadResult {
        value,
        error,
        panels: panels.len(),
    })
}

/// Breakpoints on `[a, b]` graded geometrically (ratio 0.25, 12 levels)
/// toward each singular parameter in `singular`.
pub fn graded_breakpoints(a: f64, b: f64, base: &[f64], singular: &[f64]) -> Vec<f64> {
    let mut pts: Vec<f64> = base.iter().copied().filter(|x| *x > a && *x < b).collect();
    pts.push(a);
    pts.push(b);
    let mut sing: Vec<f64> = singular
        .iter()
        .copied()
        .filter(|s| *s >= a && *s <= b)
        .collect();
    sing.sort_by(f64::total_cmp);
    sing.dedup();
    for (i, &s) in sing.iter().enumerate() {
        let lo = if i > 0 { sing[i - 1] } else { a };
        let hi = if i + 1 < sing.len() { sing[i + 1] } else { b };
        let mut gap = f64::INFINITY;
        if s > lo {
            gap = gap.min(s - lo);
        }
        if hi > s {
            gap = gap.min(hi - s);
        }
        if !gap.is_finite() || gap <= 0.0 {
            continue;
        }
        let h = 0.5 * gap;
        pts.push(s);
        let mut step = h;
        for _ in 0..12 {
            step *= 0.25;
            if s - step > a {
                pts.push(s - step);
            }
            if s + step < b {
                pts.push(s + step);
            }
        }
        if s - h > a {
            pts.push(s - h);
        }
        if s + h < b {
            pts.push(s + h);
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}
