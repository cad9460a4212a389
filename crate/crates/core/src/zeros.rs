//! Zeros of entire functions on sector annuli and Tsuji domains.
//!
//! The search runs on rectangles in `(ln|z|, arg z)`. Each rectangle edge
//! carries the change of `arg g` along it: the endpoint arguments are exact,
//! and the integral of `g'/g dz` only decides the multiple of `2 pi`, so box
//! windings are exact integers once the integral is within a few
//! milliradians. Boxes are split until they hold a single zero, which Newton
//! then refines, or a multiple zero confirmed by a small circle.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::expr::HoloExpr;
use crate::projective::Sector;
use crate::quad::{integrate, QuadratureConfig};

/// A located zero with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroRecord {
    pub location: Complex64,
    pub multiplicity: u32,
    /// Size of the last Newton step.
    pub residual: f64,
    /// `ln|g|` at the refined point.
    pub log_abs_value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RegionSpec {
    SectorAnnulus { sector: Sector, r_lo: f64, r_hi: f64 },
    Tsuji { sector: Sector, r: f64 },
}

impl RegionSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            RegionSpec::SectorAnnulus { r_lo, r_hi, .. } => {
                if !(r_lo >= 1.0 && r_hi > r_lo && r_hi.is_finite()) {
                    return Err(Error::Invalid(format!(
                        "sector annulus needs 1 <= r_lo < r_hi, got ({r_lo}, {r_hi})"
                    )));
                }
            }
            RegionSpec::Tsuji { r, .. } => {
                if !(r > 1.0 && r.is_finite()) {
                    return Err(Error::Invalid(format!("Tsuji domain needs r > 1, got {r}")));
                }
            }
        }
        Ok(())
    }

    pub fn sector(&self) -> Sector {
        match *self {
            RegionSpec::SectorAnnulus { sector, .. } | RegionSpec::Tsuji { sector, .. } => sector,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            RegionSpec::SectorAnnulus { .. } => "sector-annulus",
            RegionSpec::Tsuji { .. } => "tsuji",
        }
    }

    pub fn outer_radius(&self) -> f64 {
        match *self {
            RegionSpec::SectorAnnulus { r_hi, .. } => r_hi,
            RegionSpec::Tsuji { r, .. } => r,
        }
    }

    /// Closed sector with `r_lo <= |z| <= r_hi`, or membership in Xi.
    pub fn contains(&self, z: Complex64) -> bool {
        match *self {
            RegionSpec::SectorAnnulus { sector, r_lo, r_hi } => {
                let m = z.norm();
                sector.contains_closed(z) && m >= r_lo * (1.0 - 1e-14) && m <= r_hi * (1.0 + 1e-14)
            }
            RegionSpec::Tsuji { sector, r } => sector.xi_contains(r, z),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LocatorConfig {
    /// Newton step tolerance (absolute, floored at `1e-14 |z|`).
    pub tol: f64,
    pub seed: u64,
    pub max_depth: usize,
    /// Quadrature settings for the edge integrals.
    pub quad: QuadratureConfig,
}

impl Default for LocatorConfig {
    fn default() -> Self {
        LocatorConfig {
            tol: 1e-12,
            seed: 0,
            max_depth: 40,
            quad: QuadratureConfig {
                abs_tol: 1e-4,
                rel_tol: 1e-12,
                max_panels: 1 << 14,
                singularity_pad: 0.0,
            },
        }
    }
}

impl LocatorConfig {
    pub fn with_tol(tol: f64) -> Result<Self> {
        if !(1e-12..=1e-4).contains(&tol) {
            return Err(Error::Invalid(format!("tolerance {tol} outside [1e-12, 1e-4]")));
        }
        Ok(LocatorConfig {
            tol,
            ..Default::default()
        })
    }
}

/// Allowed mismatch between an edge integral and the snapped phase change.
const SNAP_TOL: f64 = 6e-3;
/// Relative size of `|g/g'|` below which a node counts as sitting on a zero.
const EPS_PATH: f64 = 1e-10;
const MAX_ATTEMPTS: u64 = 5;

fn principal(a: f64) -> f64 {
    let mut x = a.rem_euclid(TAU);
    if x > PI {
        x -= TAU;
    }
    x
}

/// Deterministic value in `[-1, 1)` from a few integers.
fn hash_unit(parts: &[u64]) -> f64 {
    let mut h: u64 = 0x9E37_79B9_7F4A_7C15;
    for &p in parts {
        h ^= p.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_add(h << 6).wrapping_add(h >> 2);
        h = h.wrapping_mul(0xBF58_476D_1CE4_E5B9);
        h ^= h >> 31;
    }
    (h >> 11) as f64 / (1u64 << 52) as f64 - 1.0
}

struct Ctx<'a> {
    g: &'a HoloExpr,
    cfg: LocatorConfig,
}

/// Change of `arg g` along `z(s)`, `s` in `[0, 1]`; `dz(s)` is `z'(s)`.
fn path_darg(
    ctx: &Ctx,
    z: &dyn Fn(f64) -> Complex64,
    dz: &dyn Fn(f64) -> Complex64,
    pieces: usize,
) -> Result<f64> {
    let za = z(0.0);
    let zb = z(1.0);
    let ga = ctx.g.eval_value(za)?;
    let gb = ctx.g.eval_value(zb)?;
    if ga.is_zero() {
        return Err(Error::NearZeroOnContour { z: za });
    }
    if gb.is_zero() {
        return Err(Error::NearZeroOnContour { z: zb });
    }
    let integrand = |s: f64| -> Result<Complex64> {
        let w = z(s);
        let jet = ctx.g.eval_scaled(w, 1)?;
        let c0 = jet.coeffs[0];
        let c1 = jet.coeffs[1];
        if c0.norm() <= EPS_PATH * w.norm().max(1.0) * c1.norm() {
            return Err(Error::NearZeroOnContour { z: w });
        }
        Ok(c1 / c0 * dz(s))
    };
    let pts: Vec<f64> = (0..=pieces).map(|i| i as f64 / pieces as f64).collect();
    let res = integrate(integrand, &pts, &ctx.cfg.quad)?;
    let p = principal(gb.arg() - ga.arg());
    let darg = p + TAU * ((res.value.im - p) / TAU).round();
    if (res.value.im - darg).abs() > SNAP_TOL {
        return Err(Error::Precision(format!(
            "phase integral {} does not snap (nearest {darg})",
            res.value.im
        )));
    }
    let dlog = gb.ln_abs() - ga.ln_abs();
    if (res.value.re - dlog).abs() > SNAP_TOL.max(1e-6 * dlog.abs()) {
        return Err(Error::Precision(format!(
            "log-modulus integral {} disagrees with {dlog}",
            res.value.re
        )));
    }
    Ok(darg)
}

/// Straight segment in `(ln|z|, arg z)` coordinates.
fn segment_darg(ctx: &Ctx, a: (f64, f64), b: (f64, f64)) -> Result<f64> {
    let dl = b.0 - a.0;
    let dt = b.1 - a.1;
    let w = Complex64::new(dl, dt);
    let z = move |s: f64| Complex64::new(a.0 + s * dl, a.1 + s * dt).exp();
    let dz = move |s: f64| z(s) * w;
    let phys = a.0.max(b.0).exp() * w.norm();
    let pieces = (phys.ceil() as usize).clamp(2, 256);
    path_darg(ctx, &z, &dz, pieces)
}

fn circle_winding(ctx: &Ctx, c: Complex64, rho: f64) -> Result<i64> {
    let mut total = 0.0;
    for q in 0..4 {
        let t0 = q as f64 * TAU / 4.0 + 0.1;
        let z = move |s: f64| c + Complex64::from_polar(rho, t0 + s * TAU / 4.0);
        let dz = move |s: f64| Complex64::new(0.0, TAU / 4.0) * Complex64::from_polar(rho, t0 + s * TAU / 4.0);
        total += path_darg(ctx, &z, &dz, 2)?;
    }
    Ok((total / TAU).round() as i64)
}

/// Log-polar box with the phase changes along its edges, listed
/// counterclockwise: bottom (`theta = t0`), right (`l = l1`), top, left.
#[derive(Debug, Clone, Copy)]
struct LBox {
    l0: f64,
    l1: f64,
    t0: f64,
    t1: f64,
    edges: [f64; 4],
}

impl LBox {
    fn winding(&self) -> Result<i64> {
        let s: f64 = self.edges.iter().sum();
        let w = (s / TAU).round();
        if (s - w * TAU).abs() > 1e-6 {
            return Err(Error::Precision(format!("box phase sum {s} is not a multiple of 2 pi")));
        }
        Ok(w as i64)
    }

    fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.l0 + self.l1), 0.5 * (self.t0 + self.t1)).exp()
    }

    fn diameter(&self) -> f64 {
        self.l1.exp() * Complex64::new(self.l1 - self.l0, self.t1 - self.t0).norm()
    }

    /// Log-polar coordinates of `z` if it lies strictly inside, with the
    /// margin (in physical units) to the nearest edge.
    fn inside_margin(&self, z: Complex64) -> Option<f64> {
        let l = z.norm().ln();
        let t = self.t0 + (z.arg() - self.t0).rem_euclid(TAU);
        if l > self.l0 && l < self.l1 && t > self.t0 && t < self.t1 {
            let m = (l - self.l0)
                .min(self.l1 - l)
                .min(t - self.t0)
                .min(self.t1 - t);
            Some(m * z.norm())
        } else {
            None
        }
    }
}

/// Newton (or modified Newton with multiplicity `m`) from `z0`, abandoned
/// once the iterate leaves the disc of radius `reach` around `z0`.
fn newton(ctx: &Ctx, z0: Complex64, m: f64, reach: f64) -> Option<(Complex64, f64)> {
    let mut z = z0;
    let mut last = f64::INFINITY;
    for _ in 0..60 {
        let jet = ctx.g.eval_scaled(z, 1).ok()?;
        let c0 = jet.coeffs[0];
        if c0.re == 0.0 && c0.im == 0.0 {
            return Some((z, 0.0));
        }
        let c1 = jet.coeffs[1];
        if c1.re == 0.0 && c1.im == 0.0 {
            return None;
        }
        let step = m * c0 / c1;
        if !step.is_finite() {
            return None;
        }
        z -= step;
        if (z - z0).norm() > reach {
            return None;
        }
        last = step.norm();
        if last < ctx.cfg.tol.max(1e-14 * z.norm()) {
            return Some((z, last));
        }
    }
    // accept a point that stalls at rounding level
    (last < 1e3 * ctx.cfg.tol.max(1e-14 * z.norm())).then_some((z, last))
}

fn record(ctx: &Ctx, z: Complex64, multiplicity: u32, residual: f64) -> Result<ZeroRecord> {
    Ok(ZeroRecord {
        location: z,
        multiplicity,
        residual,
        log_abs_value: ctx.g.eval_value(z)?.ln_abs(),
    })
}

/// Try to resolve a box holding `w >= 1` zeros without splitting.
fn try_resolve(ctx: &Ctx, bx: &LBox, w: i64) -> Result<Option<ZeroRecord>> {
    let Some((z, res)) = newton(ctx, bx.center(), w as f64, 2.0 * bx.diameter()) else {
        return Ok(None);
    };
    let Some(margin) = bx.inside_margin(z) else {
        return Ok(None);
    };
    if w == 1 {
        return Ok(Some(record(ctx, z, 1, res)?));
    }
    let diam = bx.diameter();
    let rho = (1e-4 * diam).clamp(8.0 * ctx.cfg.tol, 0.25 * diam);
    if rho >= 0.5 * margin {
        return Ok(None);
    }
    match circle_winding(ctx, z, rho) {
        Ok(k) if k == w => Ok(Some(record(ctx, z, w as u32, res)?)),
        _ => Ok(None),
    }
}

fn split_box(ctx: &Ctx, bx: &LBox, depth: usize, attempt: u64) -> Result<(LBox, LBox)> {
    let jitter = 0.05 * hash_unit(&[ctx.cfg.seed, attempt, depth as u64, bx.l0.to_bits(), bx.t0.to_bits()]);
    let base = if depth.is_multiple_of(2) { 0.0173 } else { -0.0131 };
    let frac = 0.5 + base + if attempt > 0 { jitter } else { 0.0 };
    let [bottom, right, top, left] = bx.edges;
    if bx.l1 - bx.l0 >= bx.t1 - bx.t0 {
        let lm = bx.l0 + frac * (bx.l1 - bx.l0);
        let b1 = segment_darg(ctx, (bx.l0, bx.t0), (lm, bx.t0))?;
        let b2 = segment_darg(ctx, (lm, bx.t0), (bx.l1, bx.t0))?;
        let t2 = segment_darg(ctx, (bx.l1, bx.t1), (lm, bx.t1))?;
        let t1 = segment_darg(ctx, (lm, bx.t1), (bx.l0, bx.t1))?;
        let mid = segment_darg(ctx, (lm, bx.t0), (lm, bx.t1))?;
        check_parts(b1 + b2, bottom)?;
        check_parts(t1 + t2, top)?;
        Ok((
            LBox { l0: bx.l0, l1: lm, t0: bx.t0, t1: bx.t1, edges: [b1, mid, t1, left] },
            LBox { l0: lm, l1: bx.l1, t0: bx.t0, t1: bx.t1, edges: [b2, right, t2, -mid] },
        ))
    } else {
        let tm = bx.t0 + frac * (bx.t1 - bx.t0);
        let r1 = segment_darg(ctx, (bx.l1, bx.t0), (bx.l1, tm))?;
        let r2 = segment_darg(ctx, (bx.l1, tm), (bx.l1, bx.t1))?;
        let lf2 = segment_darg(ctx, (bx.l0, bx.t1), (bx.l0, tm))?;
        let lf1 = segment_darg(ctx, (bx.l0, tm), (bx.l0, bx.t0))?;
        let mid = segment_darg(ctx, (bx.l1, tm), (bx.l0, tm))?;
        check_parts(r1 + r2, right)?;
        check_parts(lf1 + lf2, left)?;
        Ok((
            LBox { l0: bx.l0, l1: bx.l1, t0: bx.t0, t1: tm, edges: [bottom, r1, mid, lf1] },
            LBox { l0: bx.l0, l1: bx.l1, t0: tm, t1: bx.t1, edges: [-mid, r2, top, lf2] },
        ))
    }
}

fn check_parts(sum: f64, whole: f64) -> Result<()> {
    if (sum - whole).abs() > 1e-6 * (1.0 + whole.abs()) {
        return Err(Error::Precision(format!(
            "edge phase {whole} differs from the sum of its parts {sum}"
        )));
    }
    Ok(())
}

fn retryable(e: &Error) -> bool {
    matches!(
        e,
        Error::NearZeroOnContour { .. } | Error::Precision(_) | Error::Quadrature { .. }
    )
}

fn process(ctx: &Ctx, bx: LBox, w: i64, depth: usize, out: &mut Vec<ZeroRecord>) -> Result<()> {
    if w == 0 {
        return Ok(());
    }
    if w < 0 {
        return Err(Error::Precision(format!("negative winding {w} for an entire function")));
    }
    if let Some(rec) = try_resolve(ctx, &bx, w)? {
        out.push(rec);
        return Ok(());
    }
    if bx.diameter() < 4.0 * ctx.cfg.tol {
        // a cluster below resolution: report it as one zero
        let z = bx.center();
        out.push(record(ctx, z, w as u32, bx.diameter())?);
        return Ok(());
    }
    if depth >= ctx.cfg.max_depth {
        return Err(Error::DepthExhausted { depth, z: bx.center() });
    }
    let mut last_err = None;
    for attempt in 0..MAX_ATTEMPTS {
        let split = split_box(ctx, &bx, depth, attempt).and_then(|(a, b)| {
            let wa = a.winding()?;
            let wb = b.winding()?;
            if wa + wb != w {
                return Err(Error::Precision(format!(
                    "winding not conserved: {wa} + {wb} != {w}"
                )));
            }
            Ok((a, wa, b, wb))
        });
        match split {
            Ok((a, wa, b, wb)) => {
                process(ctx, a, wa, depth + 1, out)?;
                process(ctx, b, wb, depth + 1, out)?;
                return Ok(());
            }
            Err(e) if retryable(&e) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last_err.unwrap())
}

/// Search window in log-polar coordinates for radii `[r_lo, r_hi]` of `s`.
fn window(s: &Sector, r_lo: f64, r_hi: f64, attempt: u64, seed: u64) -> (f64, f64, f64, f64) {
    let j = |k: u64| 1.0 + 0.3 * hash_unit(&[seed, attempt, k]) * (attempt > 0) as u64 as f64;
    let l0 = r_lo.ln() - 0.0171 * j(1);
    let l1 = r_hi.ln() + 0.0097 * j(2);
    let (t0, t1) = if s.width() + 0.03 >= TAU {
        let t0 = s.alpha() - 0.0123 * j(3);
        (t0, t0 + TAU)
    } else {
        (s.alpha() - 0.0113 * j(3), s.beta() + 0.0131 * j(4))
    };
    (l0, l1, t0, t1)
}

fn search(g: &HoloExpr, s: &Sector, r_lo: f64, r_hi: f64, cfg: &LocatorConfig, attempt: u64) -> Result<Vec<ZeroRecord>> {
    let ctx = Ctx { g, cfg: *cfg };
    let (l0, l1, t0, t1) = window(s, r_lo, r_hi, attempt, cfg.seed);
    let nl = ((l1 - l0) / 0.5).ceil().max(1.0) as usize;
    let nt = ((t1 - t0) / 0.5).ceil().max(1.0) as usize;
    let ls: Vec<f64> = (0..=nl).map(|i| l0 + (l1 - l0) * i as f64 / nl as f64).collect();
    let ts: Vec<f64> = (0..=nt).map(|i| t0 + (t1 - t0) * i as f64 / nt as f64).collect();

    // horizontal edges h[j][i]: theta = ts[j], l from ls[i] to ls[i+1]
    let h: Vec<Vec<f64>> = (0..=nt)
        .into_par_iter()
        .map(|j| {
            (0..nl)
                .map(|i| segment_darg(&ctx, (ls[i], ts[j]), (ls[i + 1], ts[j])))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    // vertical edges v[i][j]: l = ls[i], theta from ts[j] to ts[j+1]
    let v: Vec<Vec<f64>> = (0..=nl)
        .into_par_iter()
        .map(|i| {
            (0..nt)
                .map(|j| segment_darg(&ctx, (ls[i], ts[j]), (ls[i], ts[j + 1])))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let mut boxes = Vec::with_capacity(nl * nt);
    for i in 0..nl {
        for j in 0..nt {
            boxes.push(LBox {
                l0: ls[i],
                l1: ls[i + 1],
                t0: ts[j],
                t1: ts[j + 1],
                edges: [h[j][i], v[i + 1][j], -h[j + 1][i], -v[i][j]],
            });
        }
    }
    let found: Vec<Vec<ZeroRecord>> = boxes
        .into_par_iter()
        .map(|bx| {
            let w = bx.winding()?;
            let mut out = Vec::new();
            process(&ctx, bx, w, 0, &mut out)?;
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut all: Vec<ZeroRecord> = found.into_iter().flatten().collect();
    sort_zeros(&mut all);
    Ok(all)
}

pub fn sort_zeros(zs: &mut [ZeroRecord]) {
    zs.sort_by(|a, b| {
        let (x, y) = (a.location, b.location);
        x.norm()
            .total_cmp(&y.norm())
            .then(x.arg().total_cmp(&y.arg()))
            .then(x.re.total_cmp(&y.re))
            .then(x.im.total_cmp(&y.im))
    });
}

/// All zeros in a padded neighbourhood of the closed sector annulus
/// `r_lo <= |z| <= r_hi` (unfiltered).
pub fn locate_zeros(g: &HoloExpr, s: &Sector, r_lo: f64, r_hi: f64, cfg: &LocatorConfig) -> Result<Vec<ZeroRecord>> {
    if !(r_lo > 0.0 && r_hi > r_lo) {
        return Err(Error::Invalid(format!("bad radii ({r_lo}, {r_hi})")));
    }
    let mut last = None;
    for attempt in 0..MAX_ATTEMPTS {
        match search(g, s, r_lo, r_hi, cfg, attempt) {
            Ok(z) => return Ok(z),
            Err(e) if retryable(&e) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.unwrap())
}

/// Winding number of `g` along a closed polygon (vertices in order).
pub fn winding_count(g: &HoloExpr, polygon: &[Complex64], cfg: &LocatorConfig) -> Result<i64> {
    let ctx = Ctx { g, cfg: *cfg };
    let mut total = 0.0;
    for i in 0..polygon.len() {
        let a = polygon[i];
        let b = polygon[(i + 1) % polygon.len()];
        let z = move |s: f64| a + (b - a) * s;
        let dz = move |_s: f64| b - a;
        let pieces = ((b - a).norm().ceil() as usize).clamp(2, 256);
        total += path_darg(&ctx, &z, &dz, pieces)?;
    }
    Ok((total / TAU).round() as i64)
}

/// Winding number of `g` along the circle `|z - c| = rho`.
pub fn winding_on_circle(g: &HoloExpr, c: Complex64, rho: f64, cfg: &LocatorConfig) -> Result<i64> {
    circle_winding(&Ctx { g, cfg: *cfg }, c, rho)
}

/// Zeros of `g` in `region`, with multiplicities.
pub fn zeros_in_region(g: &HoloExpr, region: &RegionSpec, cfg: &LocatorConfig) -> Result<Vec<ZeroRecord>> {
    region.validate()?;
    let s = region.sector();
    let (r_lo, r_hi) = match *region {
        RegionSpec::SectorAnnulus { r_lo, r_hi, .. } => (r_lo, r_hi),
        RegionSpec::Tsuji { r, .. } => (1.0, r),
    };
    let all = locate_zeros(g, &s, r_lo, r_hi, cfg)?;
    Ok(all.into_iter().filter(|z| region.contains(z.location)).collect())
}

/// Zeros of one function located once up to `r_max`, filtered per radius.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroSet {
    pub sector: Sector,
    pub r_max: f64,
    pub zeros: Vec<ZeroRecord>,
}

impl ZeroSet {
    pub fn locate(g: &HoloExpr, sector: &Sector, r_max: f64, cfg: &LocatorConfig) -> Result<Self> {
        let zeros = locate_zeros(g, sector, 1.0, r_max, cfg)?
            .into_iter()
            .filter(|z| {
                let m = z.location.norm();
                m >= 1.0 - 1e-12 && m <= r_max * (1.0 + 1e-9) && sector.contains_closed(z.location)
            })
            .collect();
        Ok(ZeroSet {
            sector: *sector,
            r_max,
            zeros,
        })
    }

    /// An empty set, for functions known not to vanish.
    pub fn empty(sector: &Sector, r_max: f64) -> Self {
        ZeroSet {
            sector: *sector,
            r_max,
            zeros: Vec::new(),
        }
    }

    fn check_radius(&self, r: f64) -> Result<()> {
        if r > self.r_max * (1.0 + 1e-9) {
            return Err(Error::Invalid(format!(
                "radius {r} beyond the located range {}",
                self.r_max
            )));
        }
        Ok(())
    }

    /// Zeros in the closed sector with `1 <= |z| <= r`.
    pub fn annulus(&self, r: f64) -> Result<Vec<ZeroRecord>> {
        self.check_radius(r)?;
        Ok(self
            .zeros
            .iter()
            .filter(|z| z.location.norm() <= r)
            .copied()
            .collect())
    }

    /// Zeros in `Xi(alpha, beta; r)`.
    pub fn xi(&self, r: f64) -> Result<Vec<ZeroRecord>> {
        self.check_radius(r)?;
        Ok(self
            .zeros
            .iter()
            .filter(|z| self.sector.xi_contains(r, z.location))
            .copied()
            .collect())
    }

    /// Whether a zero lies within `1e-6 r` of `|z| = r` or of the Xi boundary.
    pub fn contact(&self, r: f64) -> bool {
        let eps = 1e-6 * r;
        self.zeros.iter().any(|z| {
            let m = z.location.norm();
            if (m - r).abs() < eps {
                return true;
            }
            if self.sector.contains_open(z.location) {
                let th = self.sector.normalize_arg(z.location);
                (m - self.sector.xi_bound(r, th)).abs() < eps
            } else {
                false
            }
        })
    }

    /// Zeros on the unit circle (they enter the closed-sector sums only).
    pub fn on_unit_circle(&self) -> usize {
        self.zeros
            .iter()
            .filter(|z| (z.location.norm() - 1.0).abs() < 1e-9)
            .count()
    }
}
