use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{allowed_exceptions, fit_slack, satisfaction, DefectReport, GridPoint, LabConfig, RGrid, Verdict};
use crate::error::{Error, Result};
use crate::expr::{HoloExpr, MeroFn};
use crate::nevanlinna::{
    char_cartan_plane, char_s, curve_jets, char_t_tsuji, counting_c, counting_n_tsuji, n_sum, proximity_a, proximity_b,
    proximity_m_tsuji, wronskian_is_zero, wronskian_of_jets, wronskian_value, MeroData, Target, TruncationLevel,
    Variant,
};
use crate::projective::{
    build_theorem10_target, hyperplanes_general_position, hypersurfaces_general_position_sampled, Curve, HomogForm,
    HyperplaneVec, Sector, EPS_CZ, EPS_GP,
};
use crate::scaled::Scaled;
use crate::zeros::ZeroRecord;

const A_TYPO_NOTE: &str = "A-integral denominator read as Q(f)(t e^{i beta}) on the beta ray";

fn targets(f: &Curve, qs: &[HomogForm], s: &Sector, grid: &RGrid, cfg: &LabConfig) -> Result<Vec<Target>> {
    qs.iter()
        .map(|q| Target::new(f, q, s, grid.reach(), &cfg.locator))
        .collect()
}

fn realize(grid: &RGrid, ts: &[Target]) -> Vec<GridPoint> {
    grid.realize(|r| ts.iter().any(|t| t.zeros.contact(r)))
}

fn per_radius<T: Send>(points: &[GridPoint], f: impl Fn(f64) -> Result<T> + Sync) -> Result<Vec<T>> {
    points.par_iter().map(|p| f(p.r)).collect()
}

fn bounded_verdict(rep: &mut DefectReport, cfg: &LabConfig, d: u32) {
    let cap = cfg.cap(d);
    rep.verdict = if rep.fit.b.abs() <= cfg.slope_tol && rep.max_abs <= cap {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    rep.notes.push(format!("bounded iff |slope| <= {} and max |defect| <= {}", cfg.slope_tol, cap));
}

/// A degenerate composition turns into a hypothesis-violated report.
macro_rules! try_hyp {
    ($check:expr, $e:expr) => {
        match $e {
            Ok(v) => v,
            Err(Error::Degenerate(m)) => return Ok(DefectReport::hypothesis_violated($check, m)),
            Err(e) => return Err(e),
        }
    };
}

/// `d S - (A + B + C)` over the grid.
pub fn check_fmt_angular(f: &Curve, q: &HomogForm, s: &Sector, grid: &RGrid, cfg: &LabConfig) -> Result<DefectReport> {
    const NAME: &str = "fmt_angular";
    let t = try_hyp!(NAME, Target::new(f, q, s, grid.reach(), &cfg.locator));
    let pts = realize(grid, std::slice::from_ref(&t));
    let d = q.degree() as f64;
    let defect = per_radius(&pts, |r| {
        let sv = char_s(f, s, r, &cfg.quad)?;
        let a = proximity_a(f, &t, r, &cfg.quad)?;
        let b = proximity_b(f, &t, r, &cfg.quad)?;
        let c = counting_c(&t, r, TruncationLevel::Untruncated)?;
        Ok(d * sv - (a + b + c))
    })?;
    let mut rep = DefectReport::new(NAME, &pts, defect);
    rep.notes.push(A_TYPO_NOTE.into());
    if q.degree() == 1 {
        rep.notes.push("d = 1: hyperplane case".into());
    }
    bounded_verdict(&mut rep, cfg, q.degree());
    Ok(rep)
}

/// `d T - (m + N)` over the grid.
pub fn check_fmt_tsuji(f: &Curve, q: &HomogForm, s: &Sector, grid: &RGrid, cfg: &LabConfig) -> Result<DefectReport> {
    const NAME: &str = "fmt_tsuji";
    let t = try_hyp!(NAME, Target::new(f, q, s, grid.reach(), &cfg.locator));
    let pts = realize(grid, std::slice::from_ref(&t));
    let d = q.degree() as f64;
    let defect = per_radius(&pts, |r| {
        let tv = char_t_tsuji(f, s, r, &cfg.quad)?;
        let m = proximity_m_tsuji(f, &t, r, &cfg.quad)?;
        let n = counting_n_tsuji(&t, r, TruncationLevel::Untruncated)?;
        Ok(d * tv - (m + n))
    })?;
    let mut rep = DefectReport::new(NAME, &pts, defect);
    if q.degree() == 1 {
        rep.notes.push("d = 1: hyperplane case".into());
    }
    if s.is_full_plane() {
        rep.notes.push("whole-plane sector".into());
    }
    bounded_verdict(&mut rep, cfg, q.degree());
    Ok(rep)
}

fn mero_points(grid: &RGrid, d: &MeroData) -> Vec<GridPoint> {
    grid.realize(|r| d.zeros.contact(r) || d.poles.contact(r))
}

/// `[C(r, 1/f) - C(r, f)]` minus the ray and arc integrals of `log|f|`.
pub fn check_carleman(mf: &MeroFn, s: &Sector, grid: &RGrid, cfg: &LabConfig) -> Result<DefectReport> {
    let data = MeroData::new(mf, s, grid.reach(), &cfg.locator)?;
    let inv = data.reciprocal()?;
    let pts = mero_points(grid, &data);
    let defect = per_radius(&pts, |r| {
        let lhs = inv.c(r, TruncationLevel::Untruncated)? - data.c(r, TruncationLevel::Untruncated)?;
        Ok(lhs - data.carleman_integrals(r, &cfg.quad)?)
    })?;
    let mut rep = DefectReport::new("carleman", &pts, defect);
    bounded_verdict(&mut rep, cfg, 1);
    Ok(rep)
}

/// `[N(r, 1/f) - N(r, f)]` minus the Tsuji boundary integral of `log|f|`.
pub fn check_tsuji_jensen(mf: &MeroFn, s: &Sector, grid: &RGrid, cfg: &LabConfig) -> Result<DefectReport> {
    let data = MeroData::new(mf, s, grid.reach(), &cfg.locator)?;
    let inv = data.reciprocal()?;
    let pts = mero_points(grid, &data);
    let defect = per_radius(&pts, |r| {
        let lhs = inv.n_tsuji(r, TruncationLevel::Untruncated)? - data.n_tsuji(r, TruncationLevel::Untruncated)?;
        Ok(lhs - data.tsuji_jensen_integral(r, &cfg.quad)?)
    })?;
    let mut rep = DefectReport::new("tsuji_jensen", &pts, defect);
    bounded_verdict(&mut rep, cfg, 1);
    Ok(rep)
}

fn log_plus(x: f64) -> f64 {
    x.max(1.0).ln()
}

/// Ratio `S(r, f^(k)/f) / (log T(r, f) + log r)` (or `m` in place of `S`), with
/// `T` the whole-plane characteristic of `(denominator : numerator)`.
pub fn check_logderiv(mf: &MeroFn, order: usize, s: &Sector, grid: &RGrid, variant: Variant, cfg: &LabConfig) -> Result<DefectReport> {
    let name = match variant {
        Variant::Angular => "logderiv_angular",
        Variant::Tsuji => "logderiv_tsuji",
    };
    if order == 0 {
        return Err(Error::Invalid("derivative order must be positive".into()));
    }
    if mf.numerator.derivative().is_identically_zero()? && mf.denominator.derivative().is_identically_zero()? {
        return Ok(DefectReport::hypothesis_violated(name, "f is constant".into()));
    }
    let ratio_fn = mf.log_derivative_ratio(order)?;
    let data = MeroData::new(&ratio_fn, s, grid.reach(), &cfg.locator)?;
    let plane = Curve::new(vec![mf.denominator.clone(), mf.numerator.clone()])?;
    let pts = mero_points(grid, &data);
    let ratios = per_radius(&pts, |r| {
        let top = match variant {
            Variant::Angular => data.s(r, &cfg.quad)?,
            Variant::Tsuji => data.m_tsuji(r, &cfg.quad)?,
        };
        let t = char_cartan_plane(&plane, r, &cfg.quad)?.value;
        let bottom = log_plus(t) + r.ln();
        Ok(if bottom > 0.0 { top / bottom } else { f64::INFINITY })
    })?;
    let radii: Vec<f64> = pts.iter().map(|p| p.r).collect();
    let excess: Vec<f64> = ratios.iter().map(|x| cfg.ratio_bound - x).collect();
    let (sat, measure) = satisfaction(&excess, &radii, 0.0);
    let mut rep = DefectReport::new(name, &pts, ratios);
    rep.exceptional_measure = measure;
    let total = radii.last().copied().unwrap_or(0.0) - radii.first().copied().unwrap_or(0.0);
    rep.verdict = if sat >= cfg.satisfaction && measure <= cfg.exceptional_fraction * total {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    rep.notes.push(format!("derivative order {order}; ratio bound {}", cfg.ratio_bound));
    rep.notes.push(format!("{:.4} of grid points within the bound", sat));
    Ok(rep)
}

fn slack_verdict(rep: &mut DefectReport, deficit: &[f64], growth: &[f64], cfg: &LabConfig) {
    let radii = rep.grid.clone();
    let fit = fit_slack(deficit, growth, &radii, cfg);
    let total = radii.last().copied().unwrap_or(0.0) - radii.first().copied().unwrap_or(0.0);
    rep.lambda = Some(fit.lambda);
    rep.mu = Some(fit.mu);
    rep.exceptional_measure = fit.exceptional_measure;
    rep.verdict = if fit.lambda <= cfg.lambda_max
        && fit.satisfied >= cfg.satisfaction
        && fit.exceptional_measure <= cfg.exceptional_fraction * total
    {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    rep.notes.push(format!(
        "slack = lambda (log+ T + log r) + mu - deficit; lambda <= {} required; {:.4} of points satisfied",
        cfg.lambda_max, fit.satisfied
    ));
    rep.fit = super::Fit::of(&radii, &fit.slack);
    rep.defect = fit.slack;
    rep.max_abs = rep.defect.iter().fold(0.0f64, |m, d| m.max(d.abs()));
}

fn smt_hypotheses(name: &str, f: &Curve, hs: &[HyperplaneVec]) -> Result<Option<DefectReport>> {
    let n = f.dim();
    if let Some(h) = hs.iter().find(|h| h.coeffs().len() != n + 1) {
        return Err(Error::DimensionMismatch {
            expected: n + 1,
            got: h.coeffs().len(),
        });
    }
    if hs.len() < n + 1 {
        return Ok(Some(DefectReport::hypothesis_violated(
            name,
            format!("need at least n+1 = {} hyperplanes, got {}", n + 1, hs.len()),
        )));
    }
    if !hyperplanes_general_position(hs, n, EPS_GP)? {
        return Ok(Some(DefectReport::hypothesis_violated(name, "hyperplanes not in general position".into())));
    }
    if wronskian_is_zero(f)? {
        return Ok(Some(DefectReport::hypothesis_violated(name, "curve is linearly degenerate".into())));
    }
    Ok(None)
}

/// `(q - n - 1) S <= sum C^n(r, H_j) + O(log T_f + log r)` with plane Cartan `T_f`.
pub fn check_smt_angular(f: &Curve, hs: &[HyperplaneVec], s: &Sector, grid: &RGrid, cfg: &LabConfig) -> Result<DefectReport> {
    const NAME: &str = "smt_angular";
    if let Some(r) = smt_hypotheses(NAME, f, hs)? {
        return Ok(r);
    }
    let n = f.dim();
    let forms: Vec<HomogForm> = hs.iter().map(|h| h.to_form()).collect();
    let ts = targets(f, &forms, s, grid, cfg)?;
    let pts = realize(grid, &ts);
    let coef = (hs.len() - n - 1) as f64;
    let trunc = TruncationLevel::level(n as u32)?;
    let rows = per_radius(&pts, |r| {
        let sv = if coef > 0.0 { char_s(f, s, r, &cfg.quad)? } else { 0.0 };
        let counts: f64 = ts.iter().map(|t| counting_c(t, r, trunc)).sum::<Result<f64>>()?;
        let t = char_cartan_plane(f, r, &cfg.quad)?.value;
        Ok((coef * sv - counts, log_plus(t) + r.ln()))
    })?;
    let (deficit, growth): (Vec<f64>, Vec<f64>) = rows.into_iter().unzip();
    let mut rep = DefectReport::new(NAME, &pts, deficit.clone());
    slack_verdict(&mut rep, &deficit, &growth, cfg);
    rep.notes.push(format!("truncation level n = {n}; T_f is the whole-plane characteristic"));
    Ok(rep)
}

/// `(q - n - 1) T <= sum N^n(r, H_j) + O(log T + log r)`.
pub fn check_smt_tsuji(f: &Curve, hs: &[HyperplaneVec], s: &Sector, grid: &RGrid, cfg: &LabConfig) -> Result<DefectReport> {
    const NAME: &str = "smt_tsuji";
    if let Some(r) = smt_hypotheses(NAME, f, hs)? {
        return Ok(r);
    }
    let n = f.dim();
    let forms: Vec<HomogForm> = hs.iter().map(|h| h.to_form()).collect();
    let weights = vec![1.0; forms.len()];
    let mut rep = tsuji_slack(NAME, f, &forms, &weights, (hs.len() - n - 1) as f64, TruncationLevel::level(n as u32)?, s, grid, cfg)?;
    rep.notes.push(format!("truncation level n = {n}"));
    Ok(rep)
}

#[allow(clippy::too_many_arguments)]
fn tsuji_slack(
    name: &str,
    f: &Curve,
    forms: &[HomogForm],
    weights: &[f64],
    coef: f64,
    trunc: TruncationLevel,
    s: &Sector,
    grid: &RGrid,
    cfg: &LabConfig,
) -> Result<DefectReport> {
    let ts = targets(f, forms, s, grid, cfg)?;
    let pts = realize(grid, &ts);
    let rows = per_radius(&pts, |r| {
        let t = char_t_tsuji(f, s, r, &cfg.quad)?;
        let mut counts = 0.0;
        for (tg, w) in ts.iter().zip(weights) {
            counts += w * counting_n_tsuji(tg, r, trunc)?;
        }
        Ok((coef * t - counts, log_plus(t) + r.ln()))
    })?;
    let (deficit, growth): (Vec<f64>, Vec<f64>) = rows.into_iter().unzip();
    let mut rep = DefectReport::new(name, &pts, deficit.clone());
    slack_verdict(&mut rep, &deficit, &growth, cfg);
    Ok(rep)
}

/// `I(x) = min{k in N : k > x}`.
pub fn int_ceil_strict(x: f64) -> u64 {
    if x < 0.0 {
        return 0;
    }
    x.floor() as u64 + 1
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `n^n d^(n^2+n) (19 n I(1/eps))^n deg(V)^(n+1) / n!` with `V = P^n`.
pub fn variety_m_bound(n: usize, degrees: &[u32], eps: f64) -> f64 {
    let d = degrees.iter().fold(1u64, |acc, &x| acc / gcd(acc, x as u64) * x as u64) as f64;
    let nf = n as f64;
    let fact: f64 = (1..=n).map(|i| i as f64).product();
    nf.powf(nf) * d.powf(nf * nf + nf) * (19.0 * nf * int_ceil_strict(1.0 / eps) as f64).powf(nf) / fact
}

/// `(q(1 - eps/3) - (n+1) - eps/3) T <= sum d_l^-1 N^M(r, Q_l) + O(log T + log r)`.
pub fn check_smt_variety(f: &Curve, qs: &[HomogForm], m: u32, eps: f64, s: &Sector, grid: &RGrid, cfg: &LabConfig) -> Result<DefectReport> {
    const NAME: &str = "smt_variety";
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::Invalid("epsilon must be positive".into()));
    }
    let n = f.dim();
    let gp = hypersurfaces_general_position_sampled(qs, n, cfg.position_budget, cfg.seed, EPS_CZ)?;
    if !gp.pass {
        return Ok(DefectReport::hypothesis_violated(NAME, format!("hypersurfaces not in general position: {}", gp.note)));
    }
    let q = qs.len() as f64;
    let coef = q * (1.0 - eps / 3.0) - (n as f64 + 1.0) - eps / 3.0;
    let weights: Vec<f64> = qs.iter().map(|x| 1.0 / x.degree() as f64).collect();
    let mut rep = tsuji_slack(NAME, f, qs, &weights, coef, TruncationLevel::level(m)?, s, grid, cfg)?;
    let degrees: Vec<u32> = qs.iter().map(|x| x.degree()).collect();
    let bound = variety_m_bound(n, &degrees, eps);
    rep.notes.push(format!("truncation M = {m}; sufficient bound on M = {bound:e}"));
    if (m as f64) < bound {
        rep.notes.push("M is below the sufficient bound".into());
    }
    rep.notes.push("algebraic nondegeneracy assumed, not verified".into());
    Ok(rep)
}

/// `(n - (d+N+1)N) T + sum (N(r, D_i) - N^N(r, D_i)) <= N^N(r, D) + eps T`.
pub fn check_smt_mixed(
    f: &Curve,
    hs: &[HyperplaneVec],
    qs: &[HomogForm],
    n: u32,
    s: &Sector,
    grid: &RGrid,
    cfg: &LabConfig,
) -> Result<DefectReport> {
    const NAME: &str = "smt_mixed";
    let big_n = f.dim();
    if hs.len() != big_n + 1 {
        return Err(Error::DimensionMismatch {
            expected: big_n + 1,
            got: hs.len(),
        });
    }
    let target = build_theorem10_target(hs, qs, n)?;
    let d = qs[0].degree();
    let bound = big_n as u64 * (d as u64 + big_n as u64 + 1);
    if !target.hypothesis_ok {
        return Ok(DefectReport::hypothesis_violated(NAME, format!("n = {n} does not exceed N(d+N+1) = {bound}")));
    }
    let combined = hs
        .iter()
        .zip(qs)
        .map(|(h, q)| h.to_form().pow(n)?.mul(q))
        .collect::<Result<Vec<_>>>()?;
    let gp = hypersurfaces_general_position_sampled(&combined, big_n, cfg.position_budget, cfg.seed, EPS_CZ)?;
    if !gp.pass {
        return Ok(DefectReport::hypothesis_violated(NAME, format!("H_i^n Q_i not in general position: {}", gp.note)));
    }
    let td = try_hyp!(NAME, Target::new(f, &target.form, s, grid.reach(), &cfg.locator));
    let tq = targets(f, qs, s, grid, cfg)?;
    let mut all = tq.clone();
    all.push(td.clone());
    let pts = realize(grid, &all);
    let trunc = TruncationLevel::level(big_n as u32)?;
    let coef = n as f64 - bound as f64;
    let rows = per_radius(&pts, |r| {
        let t = char_t_tsuji(f, s, r, &cfg.quad)?;
        let mut lhs = coef * t;
        for tg in &tq {
            lhs += counting_n_tsuji(tg, r, TruncationLevel::Untruncated)? - counting_n_tsuji(tg, r, trunc)?;
        }
        Ok((lhs - counting_n_tsuji(&td, r, trunc)?, t))
    })?;
    let (deficit, chars): (Vec<f64>, Vec<f64>) = rows.into_iter().unzip();
    let radii: Vec<f64> = pts.iter().map(|p| p.r).collect();
    let need: Vec<f64> = deficit
        .iter()
        .zip(&chars)
        .map(|(d, t)| {
            if *d <= 0.0 {
                0.0
            } else if *t > 0.0 {
                d / t
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let skip = allowed_exceptions(&need, &radii, cfg);
    let eps = need
        .iter()
        .enumerate()
        .filter(|(i, _)| !skip.contains(i))
        .map(|(_, e)| *e)
        .fold(0.0f64, f64::max);
    let slack: Vec<f64> = deficit.iter().zip(&chars).map(|(d, t)| eps * t - d).collect();
    let (sat, measure) = satisfaction(&slack, &radii, cfg.slack_tol);
    let mut rep = DefectReport::new(NAME, &pts, slack);
    rep.epsilon = Some(eps);
    rep.exceptional_measure = measure;
    rep.verdict = if eps <= cfg.epsilon_max && sat >= cfg.satisfaction {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    rep.notes.push(format!("D = {}", target.form));
    rep.notes.push(format!("slack = eps T - deficit; eps <= {} required", cfg.epsilon_max));
    rep.notes.push(format!("general position (sampled): {}", gp.note));
    rep.notes.push("algebraic nondegeneracy assumed, not verified".into());
    Ok(rep)
}

/// `max_{a<b} |f_a g_b - f_b g_a| / (||f|| ||g||)` at `z`.
fn cross_ratio_residual(f: &Curve, g: &Curve, z: Complex64) -> Result<f64> {
    let fv = f.values(z)?;
    let gv = g.values(z)?;
    let nf = fv.iter().map(|v| v.ln_abs()).fold(f64::NEG_INFINITY, f64::max);
    let ng = gv.iter().map(|v| v.ln_abs()).fold(f64::NEG_INFINITY, f64::max);
    let mut worst = 0.0f64;
    for a in 0..fv.len() {
        for b in a + 1..fv.len() {
            let c = fv[a].mul(&gv[b]).add(&fv[b].mul(&gv[a]).neg());
            if !c.is_zero() {
                worst = worst.max((c.ln_abs() - nf - ng).exp());
            }
        }
    }
    Ok(worst)
}

/// Verifies `N^N(r, D) <= N N^1(r, D)` and `N^1(r, D) <= N(r, 1/(f_i/f_j - g_i/g_j)) + O(1)`
/// over zeros of `D(f)` where `f = g` projectively.
#[allow(clippy::too_many_arguments)]
pub fn check_uniqueness_chain(
    f: &Curve,
    g: &Curve,
    d: &HomogForm,
    i: usize,
    j: usize,
    s: &Sector,
    grid: &RGrid,
    cfg: &LabConfig,
) -> Result<DefectReport> {
    const NAME: &str = "uniqueness_chain";
    let big_n = f.dim();
    if g.dim() != big_n || i > big_n || j > big_n || i == j {
        return Err(Error::Invalid(format!("indices {i}, {j} must be distinct components of curves in P^{big_n}")));
    }
    let (fi, fj) = (f.components()[i].clone(), f.components()[j].clone());
    let (gi, gj) = (g.components()[i].clone(), g.components()[j].clone());
    let num = fi * gj.clone() - fj.clone() * gi;
    if num.is_identically_zero()? {
        return Err(Error::ProportionalPair);
    }
    let h = MeroData::new(&MeroFn::new(num, fj * gj)?, s, grid.reach(), &cfg.locator)?;
    let td = try_hyp!(NAME, Target::new(f, d, s, grid.reach(), &cfg.locator));
    let mut verified: Vec<ZeroRecord> = Vec::new();
    let mut rejected = 0usize;
    for z in &td.zeros.zeros {
        if cross_ratio_residual(f, g, z.location)? < 1e-8 {
            verified.push(*z);
        } else {
            rejected += 1;
        }
    }
    let pts = grid.realize(|r| td.zeros.contact(r) || h.zeros.contact(r) || h.poles.contact(r));
    let l1 = TruncationLevel::Level(1);
    let ln = TruncationLevel::level(big_n as u32)?;
    let rows = per_radius(&pts, |r| {
        let n_big = n_sum(s, &verified, r, ln);
        let n_one = n_sum(s, &verified, r, l1);
        let zeros_h = n_sum(s, &h.zeros.xi(r)?, r, TruncationLevel::Untruncated);
        Ok((big_n as f64 * n_one - n_big, zeros_h - n_one))
    })?;
    let (trunc_slack, slack): (Vec<f64>, Vec<f64>) = rows.into_iter().unzip();
    let truncation_ok = trunc_slack.iter().all(|x| *x >= -1e-12);
    let mut rep = DefectReport::new(NAME, &pts, slack);
    bounded_verdict(&mut rep, cfg, d.degree());
    let lower_ok = rep.defect.iter().all(|x| *x >= -cfg.cap(d.degree()));
    if !(truncation_ok && lower_ok) {
        rep.verdict = Verdict::Fail;
    }
    rep.notes.push(format!(
        "N^N <= N N^1 holds at every radius: {truncation_ok}; min margin {:e}",
        trunc_slack.iter().copied().fold(f64::INFINITY, f64::min)
    ));
    rep.notes.push(format!("{} zeros of D(f) verified, {rejected} excluded (f != g there)", verified.len()));
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WronskianReport {
    pub samples: usize,
    /// Largest relative error of `W(f) = f_0^(n+1) W(1, f_1/f_0, ...)`.
    pub factorization_error: f64,
    /// Largest relative deviation of `W(L f)/W(f)` from `det L`.
    pub constancy_error: Option<f64>,
    pub pass: bool,
    pub notes: Vec<String>,
}

fn rel_err(a: &Scaled, b: &Scaled) -> f64 {
    if b.is_zero() {
        return if a.is_zero() { 0.0 } else { f64::INFINITY };
    }
    (a.ratio(b) - Complex64::new(1.0, 0.0)).norm()
}

/// Both Wronskian identities at `samples` random points of `|Re z|, |Im z| < 3`.
pub fn check_wronskian_identities(f: &Curve, forms: Option<&[HyperplaneVec]>, samples: usize, seed: u64) -> Result<WronskianReport> {
    let n = f.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut notes = Vec::new();
    let lin = match forms {
        Some(hs) => {
            if hs.len() != n + 1 || hs.iter().any(|h| h.coeffs().len() != n + 1) {
                return Err(Error::DimensionMismatch {
                    expected: n + 1,
                    got: hs.len(),
                });
            }
            let m = nalgebra::DMatrix::from_fn(n + 1, n + 1, |a, b| hs[a].coeffs()[b]);
            let det = m.determinant();
            if det.norm() < 1e-12 {
                return Err(Error::Invalid("linear forms are not invertible".into()));
            }
            let comps = hs
                .iter()
                .map(|h| {
                    h.coeffs()
                        .iter()
                        .zip(f.components())
                        .map(|(c, fc)| HoloExpr::constant(*c) * fc.clone())
                        .reduce(|a, b| a + b)
                        .unwrap()
                })
                .collect();
            Some((Curve::new(comps)?, Scaled::from_c64(det)))
        }
        None => None,
    };
    let mut fact_err = 0.0f64;
    let mut const_err = 0.0f64;
    let mut used = 0;
    while used < samples {
        let z = Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let jets = curve_jets(f, z)?;
        if jets[0].value().is_zero() {
            continue;
        }
        used += 1;
        let w = wronskian_of_jets(&jets);
        let mut quot = Vec::with_capacity(n + 1);
        for jet in &jets {
            quot.push(jet.div(&jets[0])?);
        }
        let f0 = jets[0].value();
        let mut pow = Scaled::from_c64(Complex64::new(1.0, 0.0));
        for _ in 0..=n {
            pow = pow.mul(&f0);
        }
        fact_err = fact_err.max(rel_err(&w, &pow.mul(&wronskian_of_jets(&quot))));
        if let Some((lf, det)) = &lin {
            const_err = const_err.max(rel_err(&wronskian_value(lf, z)?, &w.mul(det)));
        }
    }
    let tol = 1e-8;
    let pass = fact_err < tol && (lin.is_none() || const_err < tol);
    notes.push(format!("relative tolerance {tol}"));
    Ok(WronskianReport {
        samples,
        factorization_error: fact_err,
        constancy_error: lin.map(|_| const_err),
        pass,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lab::Spacing;
    use std::f64::consts::PI;

    fn grid(a: f64, b: f64, n: usize) -> RGrid {
        RGrid::new(a, b, n, Spacing::Geometric).unwrap()
    }

    #[test]
    fn strict_ceiling() {
        assert_eq!(int_ceil_strict(2.0), 3);
        assert_eq!(int_ceil_strict(0.5), 1);
        assert_eq!(int_ceil_strict(0.0), 1);
    }

    #[test]
    fn fmt_constant_curve() {
        // Q(f) = ||f|| = 1 everywhere, so every functional vanishes
        let f = Curve::parse(&["1", "0"]).unwrap();
        let s = Sector::new(0.0, PI).unwrap();
        let q = HomogForm::parse("x0 + 2*x1", 2).unwrap();
        let rep = check_fmt_tsuji(&f, &q, &s, &grid(2.0, 50.0, 6), &LabConfig::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);
        assert!(rep.range < 1e-9);
    }

    #[test]
    fn fmt_degenerate_is_hypothesis_violation() {
        let f = Curve::parse(&["1", "z", "z^2"]).unwrap();
        let s = Sector::new(0.0, PI).unwrap();
        let q = HomogForm::parse("x0*x2 - x1^2", 3).unwrap();
        let rep = check_fmt_angular(&f, &q, &s, &grid(2.0, 50.0, 4), &LabConfig::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::HypothesisViolated);
    }

    #[test]
    fn fmt_square_doubles_defect() {
        let f = Curve::parse(&["1", "exp(z)"]).unwrap();
        let s = Sector::new(0.0, PI).unwrap();
        let g = grid(5.0, 60.0, 5);
        let q1 = HomogForm::parse("x0 + x1", 2).unwrap();
        let q2 = q1.pow(2).unwrap();
        let r1 = check_fmt_angular(&f, &q1, &s, &g, &LabConfig::default()).unwrap();
        let r2 = check_fmt_angular(&f, &q2, &s, &g, &LabConfig::default()).unwrap();
        for (a, b) in r1.defect.iter().zip(&r2.defect) {
            assert!((b - 2.0 * a).abs() < 1e-6, "{a} {b}");
        }
        assert_eq!(r2.verdict, Verdict::Pass);
    }

    #[test]
    fn smt_with_n_plus_one_hyperplanes_is_trivial() {
        let f = Curve::parse(&["1", "exp(z)"]).unwrap();
        let s = Sector::new(0.0, PI).unwrap();
        let hs = [HyperplaneVec::real(&[1.0, 0.0]).unwrap(), HyperplaneVec::real(&[0.0, 1.0]).unwrap()];
        for rep in [
            check_smt_tsuji(&f, &hs, &s, &grid(5.0, 100.0, 6), &LabConfig::default()).unwrap(),
            check_smt_angular(&f, &hs, &s, &grid(5.0, 100.0, 6), &LabConfig::default()).unwrap(),
        ] {
            assert_eq!(rep.verdict, Verdict::Pass);
            assert_eq!(rep.lambda, Some(0.0));
        }
    }

    #[test]
    fn smt_bad_position_is_hypothesis_violation() {
        let f = Curve::parse(&["1", "exp(z)"]).unwrap();
        let s = Sector::new(0.0, PI).unwrap();
        let hs = [
            HyperplaneVec::real(&[1.0, 0.0]).unwrap(),
            HyperplaneVec::real(&[2.0, 0.0]).unwrap(),
            HyperplaneVec::real(&[0.0, 1.0]).unwrap(),
        ];
        let rep = check_smt_tsuji(&f, &hs, &s, &grid(5.0, 100.0, 4), &LabConfig::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::HypothesisViolated);
    }

    #[test]
    fn wronskian_identities_hold() {
        let f = Curve::parse(&["exp(z)", "z*exp(z) + 1", "sin(z)"]).unwrap();
        let hs = [
            HyperplaneVec::real(&[1.0, 2.0, 0.5]).unwrap(),
            HyperplaneVec::real(&[0.0, 1.0, -1.0]).unwrap(),
            HyperplaneVec::real(&[3.0, 0.0, 1.0]).unwrap(),
        ];
        let rep = check_wronskian_identities(&f, Some(&hs), 100, 7).unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn proportional_pair_rejected() {
        let f = Curve::parse(&["1", "exp(z)"]).unwrap();
        let s = Sector::new(0.0, PI).unwrap();
        let d = HomogForm::parse("x0 + x1", 2).unwrap();
        let e = check_uniqueness_chain(&f, &f, &d, 0, 1, &s, &grid(5.0, 20.0, 3), &LabConfig::default());
        assert!(matches!(e, Err(Error::ProportionalPair)));
    }

    #[test]
    fn smt_mixed_negative_control() {
        let f = Curve::parse(&["1", "exp(z)"]).unwrap();
        let s = Sector::new(0.0, PI).unwrap();
        let hs = [HyperplaneVec::real(&[1.0, 0.0]).unwrap(), HyperplaneVec::real(&[1.0, 1.0]).unwrap()];
        let qs = [HomogForm::parse("x0", 2).unwrap(), HomogForm::parse("x1", 2).unwrap()];
        let rep = check_smt_mixed(&f, &hs, &qs, 3, &s, &grid(5.0, 20.0, 3), &LabConfig::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::HypothesisViolated);
        assert!(rep.defect.is_empty());
    }

    #[test]
    fn m_bound_uses_strict_ceiling() {
        // n = 1, d = 1, eps = 1/2: 1 * 1 * 19 * I(2) = 57
        assert!((variety_m_bound(1, &[1, 1, 1], 0.5) - 57.0).abs() < 1e-9);
    }
}
