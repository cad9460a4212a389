//! Weighted integrals along the boundary rays, the arc `|z| = r`, and the
//! Tsuji boundary curve.
//!
//! Rays use `s = ln t`, so the kernel `(t^-k - t^k r^-2k) dt/t` becomes
//! `e^{-ks} - e^{ks} r^{-2k}`. The Tsuji curve uses `u = cot(phi)`, for which
//! `dphi / (r^k sin^2 phi) = du / r^k` and the curve is
//! `r (1+u^2)^{-1/(2k)} e^{i(alpha + atan2(1,u)/k)}`.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::Result;
use crate::projective::Sector;
use crate::quad::{graded_breakpoints, integrate, QuadratureConfig};

/// Distance under which a known zero or pole is treated as sitting on a path.
pub(crate) fn near_threshold(a: Complex64) -> f64 {
    0.5 + 0.02 * a.norm()
}

fn uniform(a: f64, b: f64, step: f64) -> Vec<f64> {
    let n = ((b - a) / step).ceil().max(1.0) as usize;
    (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
}

/// `(k/pi) int_1^r (t^-k - t^k/r^2k) h(t e^{i theta}) dt/t`.
pub fn ray_integral<H>(s: &Sector, r: f64, theta: f64, h: &H, singular: &[Complex64], cfg: &QuadratureConfig) -> Result<f64>
where
    H: Fn(Complex64) -> Result<f64>,
{
    let k = s.k();
    let lr = r.ln();
    let dir = Complex64::from_polar(1.0, theta);
    let sing: Vec<f64> = singular
        .iter()
        .filter_map(|a| {
            let p = a * dir.conj();
            (p.re > 0.0 && p.im.abs() < near_threshold(*a)).then(|| p.re.ln().clamp(0.0, lr))
        })
        .collect();
    let pts = graded_breakpoints(0.0, lr, &uniform(0.0, lr, 0.25), &sing);
    let f = |sv: f64| -> Result<f64> {
        let w = (-k * sv).exp() - (k * (sv - 2.0 * lr)).exp();
        Ok(w * h(dir * sv.exp())?)
    };
    Ok(k / PI * integrate(f, &pts, cfg)?.value)
}

/// `(2k/(pi r^k)) int_alpha^beta h(r e^{i phi}) sin(k(phi - alpha)) dphi`.
pub fn arc_integral<H>(s: &Sector, r: f64, h: &H, singular: &[Complex64], cfg: &QuadratureConfig) -> Result<f64>
where
    H: Fn(Complex64) -> Result<f64>,
{
    let k = s.k();
    let sing: Vec<f64> = singular
        .iter()
        .filter(|a| (a.norm() - r).abs() < near_threshold(**a) && s.contains_closed(**a))
        .map(|a| s.normalize_arg(*a).clamp(s.alpha(), s.beta()))
        .collect();
    let pts = graded_breakpoints(s.alpha(), s.beta(), &uniform(s.alpha(), s.beta(), 0.1), &sing);
    let f = |phi: f64| -> Result<f64> { Ok(h(Complex64::from_polar(r, phi))? * s.kernel_sin(phi)) };
    Ok(2.0 * k / (PI * r.powf(k)) * integrate(f, &pts, cfg)?.value)
}

/// Both rays plus the arc: the sum of the two angular boundary integrals.
pub fn angular_integrals<H>(s: &Sector, r: f64, h: &H, singular: &[Complex64], cfg: &QuadratureConfig) -> Result<(f64, f64)>
where
    H: Fn(Complex64) -> Result<f64>,
{
    let rays = ray_integral(s, r, s.alpha(), h, singular, cfg)? + ray_integral(s, r, s.beta(), h, singular, cfg)?;
    let arc = arc_integral(s, r, h, singular, cfg)?;
    Ok((rays, arc))
}

/// `(1/2pi) int h(z(phi)) dphi/(r^k sin^2 phi)` over the Tsuji boundary curve.
pub fn tsuji_integral<H>(s: &Sector, r: f64, h: &H, singular: &[Complex64], cfg: &QuadratureConfig) -> Result<f64>
where
    H: Fn(Complex64) -> Result<f64>,
{
    let k = s.k();
    let u_max = s.tsuji_u_max(r);
    if u_max == 0.0 {
        return Ok(0.0);
    }
    let mut base = vec![0.0];
    let mut x = 0.125;
    while x < u_max {
        base.push(x);
        base.push(-x);
        x *= 2.0;
    }
    let sing: Vec<f64> = singular
        .iter()
        .filter(|a| s.contains_open(**a))
        .filter_map(|a| {
            let u = s.tsuji_u_of_angle(s.normalize_arg(*a));
            (u.abs() <= u_max && (a - s.tsuji_point(r, u)).norm() < near_threshold(*a)).then_some(u)
        })
        .collect();
    let pts = graded_breakpoints(-u_max, u_max, &base, &sing);
    let f = |u: f64| h(s.tsuji_point(r, u));
    Ok(integrate(f, &pts, cfg)?.value / (2.0 * PI * r.powf(k)))
}
