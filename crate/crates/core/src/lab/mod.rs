//! Numerical checks of the main-theorem identities and inequalities over a
//! grid of radii, reported as defect or slack sequences with fitted constants.

mod checks;
mod table;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::QuadratureConfig;
use crate::zeros::LocatorConfig;

pub use checks::{
    check_carleman, check_fmt_angular, check_fmt_tsuji, check_logderiv, check_smt_angular, check_smt_tsuji,
    check_smt_variety, check_smt_mixed, check_tsuji_jensen, check_uniqueness_chain, check_wronskian_identities,
    int_ceil_strict, variety_m_bound, WronskianReport,
};
pub use table::{characteristic_samples, CharacteristicSample, Functional, TableInput};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Geometric,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RGrid {
    pub r_min: f64,
    pub r_max: f64,
    pub count: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

/// A realized radius; `contact` is set when it was moved off a zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridPoint {
    pub r: f64,
    pub contact: bool,
}

/// Multiplicative nudge applied to radii that touch a zero.
pub const CONTACT_NUDGE: f64 = 1e-6;

impl RGrid {
    pub fn new(r_min: f64, r_max: f64, count: usize, spacing: Spacing) -> Result<Self> {
        let g = RGrid {
            r_min,
            r_max,
            count,
            spacing,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_min > 1.0 && self.r_max.is_finite()) {
            return Err(Error::Invalid(format!("grid r_min must exceed 1, got {}", self.r_min)));
        }
        if self.count == 0 || (self.count > 1 && self.r_max <= self.r_min) || (self.count == 1 && self.r_max < self.r_min) {
            return Err(Error::Invalid(format!(
                "grid needs count >= 1 and r_max > r_min, got count {} on [{}, {}]",
                self.count, self.r_min, self.r_max
            )));
        }
        Ok(())
    }

    pub fn radii(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.r_min];
        }
        let n = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                let t = i as f64 / n;
                match self.spacing {
                    Spacing::Geometric => self.r_min * (self.r_max / self.r_min).powf(t),
                    Spacing::Linear => self.r_min + (self.r_max - self.r_min) * t,
                }
            })
            .collect()
    }

    /// Largest radius any realized point can reach.
    pub fn reach(&self) -> f64 {
        self.r_max * (1.0 + 16.0 * CONTACT_NUDGE)
    }

    /// Radii after moving each one off contact zeros by factors `1 + 1e-6`.
    pub fn realize(&self, contact: impl Fn(f64) -> bool) -> Vec<GridPoint> {
        self.radii()
            .into_iter()
            .map(|r0| {
                let mut r = r0;
                let mut moved = false;
                for _ in 0..15 {
                    if !contact(r) {
                        break;
                    }
                    r *= 1.0 + CONTACT_NUDGE;
                    moved = true;
                }
                GridPoint { r, contact: moved }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
    HypothesisViolated,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
            Verdict::HypothesisViolated => "hypothesis-violated",
        }
    }
}

/// Least-squares line `defect ≈ a + b ln r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct Fit {
    pub a: f64,
    pub b: f64,
    pub rms: f64,
}

impl Fit {
    pub fn of(radii: &[f64], ys: &[f64]) -> Fit {
        let n = ys.len();
        if n == 0 {
            return Fit::default();
        }
        let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
        let mx = xs.iter().sum::<f64>() / n as f64;
        let my = ys.iter().sum::<f64>() / n as f64;
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
        let a = my - b * mx;
        let rms = (xs.iter().zip(ys).map(|(x, y)| (y - a - b * x).powi(2)).sum::<f64>() / n as f64).sqrt();
        Fit { a, b, rms }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DefectReport {
    pub check: String,
    pub scenario_hash: String,
    pub grid: Vec<f64>,
    pub contact: Vec<bool>,
    pub defect: Vec<f64>,
    pub fit: Fit,
    pub max_abs: f64,
    pub range: f64,
    pub lambda: Option<f64>,
    pub mu: Option<f64>,
    pub epsilon: Option<f64>,
    pub exceptional_measure: f64,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

impl DefectReport {
    pub(crate) fn new(check: &str, points: &[GridPoint], defect: Vec<f64>) -> Self {
        let grid: Vec<f64> = points.iter().map(|p| p.r).collect();
        let fit = Fit::of(&grid, &defect);
        let max_abs = defect.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        let lo = defect.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = defect.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        DefectReport {
            check: check.to_string(),
            scenario_hash: String::new(),
            contact: points.iter().map(|p| p.contact).collect(),
            grid,
            defect,
            fit,
            max_abs,
            range: if hi >= lo { hi - lo } else { 0.0 },
            lambda: None,
            mu: None,
            epsilon: None,
            exceptional_measure: 0.0,
            verdict: Verdict::Inconclusive,
            notes: Vec::new(),
        }
    }

    pub(crate) fn hypothesis_violated(check: &str, note: String) -> Self {
        let mut r = DefectReport::new(check, &[], Vec::new());
        r.verdict = Verdict::HypothesisViolated;
        r.notes.push(note);
        r
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LabConfig {
    pub quad: QuadratureConfig,
    pub locator: LocatorConfig,
    /// Largest admissible `|slope|` of a bounded defect against `ln r`.
    pub slope_tol: f64,
    /// Cap on `max |defect|`; `None` means `50 d`.
    pub bound_cap: Option<f64>,
    /// Slack values above `-slack_tol` count as satisfied.
    pub slack_tol: f64,
    /// Required fraction of satisfied grid points.
    pub satisfaction: f64,
    /// Largest exceptional measure, as a fraction of `r_max - r_min`.
    pub exceptional_fraction: f64,
    /// Largest admissible fitted `lambda` in the second-main-theorem checks.
    pub lambda_max: f64,
    /// Largest admissible `epsilon` in the hypersurface inequality.
    pub epsilon_max: f64,
    /// Bound on logarithmic-derivative ratios.
    pub ratio_bound: f64,
    /// Starts per subset for the sampled hypersurface position check.
    pub position_budget: usize,
    pub seed: u64,
}

impl Default for LabConfig {
    fn default() -> Self {
        LabConfig {
            quad: QuadratureConfig::default(),
            locator: LocatorConfig::default(),
            slope_tol: 0.02,
            bound_cap: None,
            slack_tol: 1e-6,
            satisfaction: 0.9,
            exceptional_fraction: 0.05,
            lambda_max: 5.0,
            epsilon_max: 0.2,
            ratio_bound: 10.0,
            position_budget: 64,
            seed: 0,
        }
    }
}

impl LabConfig {
    pub fn cap(&self, d: u32) -> f64 {
        self.bound_cap.unwrap_or(50.0 * d.max(1) as f64)
    }
}

/// Share of `[r_min, r_max]` attributed to each grid point (half-way to its neighbours).
pub(crate) fn cell_measures(radii: &[f64]) -> Vec<f64> {
    let n = radii.len();
    (0..n)
        .map(|i| {
            let lo = if i == 0 { radii[0] } else { 0.5 * (radii[i - 1] + radii[i]) };
            let hi = if i + 1 == n { radii[n - 1] } else { 0.5 * (radii[i] + radii[i + 1]) };
            hi - lo
        })
        .collect()
}

/// Indices that may be left out: largest `excess` first, while at most
/// `1 - satisfaction` of the points and `exceptional_fraction` of the measure are used.
pub(crate) fn allowed_exceptions(excess: &[f64], radii: &[f64], cfg: &LabConfig) -> Vec<usize> {
    let n = excess.len();
    if n == 0 {
        return Vec::new();
    }
    let cells = cell_measures(radii);
    let total = radii[n - 1] - radii[0];
    let max_count = ((1.0 - cfg.satisfaction) * n as f64 + 1e-9).floor() as usize;
    let mut order: Vec<usize> = (0..n).filter(|&i| excess[i] > 0.0).collect();
    order.sort_by(|&i, &j| excess[j].total_cmp(&excess[i]).then(i.cmp(&j)));
    let mut out = Vec::new();
    let mut measure = 0.0;
    for i in order {
        if out.len() + 1 > max_count || measure + cells[i] > cfg.exceptional_fraction * total {
            break;
        }
        measure += cells[i];
        out.push(i);
    }
    out
}

/// Nonnegative least squares for `y ≈ lambda x + mu`, `lambda, mu >= 0`.
pub fn nnls2(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    if x.is_empty() {
        return (0.0, 0.0);
    }
    let sse = |l: f64, m: f64| x.iter().zip(y).map(|(xi, yi)| (yi - l * xi - m).powi(2)).sum::<f64>();
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let mut cands = vec![(0.0, 0.0), (0.0, my.max(0.0))];
    let xx: f64 = x.iter().map(|v| v * v).sum();
    if xx > 0.0 {
        cands.push(((x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / xx).max(0.0), 0.0));
    }
    if sxx > 0.0 {
        let l = sxy / sxx;
        let m = my - l * mx;
        if l >= 0.0 && m >= 0.0 {
            cands.push((l, m));
        }
    }
    cands
        .into_iter()
        .min_by(|a, b| sse(a.0, a.1).total_cmp(&sse(b.0, b.1)))
        .unwrap()
}

/// Slack `lambda L + mu - D` with `(lambda, mu)` from NNLS and `mu` then raised
/// until every point outside the allowed exceptional set is satisfied.
pub(crate) struct SlackFit {
    pub lambda: f64,
    pub mu: f64,
    pub slack: Vec<f64>,
    pub satisfied: f64,
    pub exceptional_measure: f64,
}

pub(crate) fn fit_slack(deficit: &[f64], growth: &[f64], radii: &[f64], cfg: &LabConfig) -> SlackFit {
    let (lambda, mut mu) = nnls2(growth, deficit);
    let resid: Vec<f64> = deficit.iter().zip(growth).map(|(d, l)| d - lambda * l - mu).collect();
    let skip = allowed_exceptions(&resid, radii, cfg);
    let lift = resid
        .iter()
        .enumerate()
        .filter(|(i, _)| !skip.contains(i))
        .map(|(_, e)| *e)
        .fold(0.0f64, f64::max);
    mu += lift;
    let slack: Vec<f64> = deficit.iter().zip(growth).map(|(d, l)| lambda * l + mu - d).collect();
    let (satisfied, exceptional_measure) = satisfaction(&slack, radii, cfg.slack_tol);
    SlackFit {
        lambda,
        mu,
        slack,
        satisfied,
        exceptional_measure,
    }
}

/// Fraction of points with `value >= -tol`, and the measure of the others.
pub(crate) fn satisfaction(values: &[f64], radii: &[f64], tol: f64) -> (f64, f64) {
    if values.is_empty() {
        return (1.0, 0.0);
    }
    let cells = cell_measures(radii);
    let mut ok = 0;
    let mut bad = 0.0;
    for (i, v) in values.iter().enumerate() {
        if *v >= -tol {
            ok += 1;
        } else {
            bad += cells[i];
        }
    }
    (ok as f64 / values.len() as f64, bad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn geometric_grid() {
        let g = RGrid::new(10.0, 1000.0, 3, Spacing::Geometric).unwrap();
        let r = g.radii();
        assert!((r[1] - 100.0).abs() < 1e-9);
        assert!(RGrid::new(1.0, 10.0, 3, Spacing::Linear).is_err());
        assert!(RGrid::new(5.0, 2.0, 3, Spacing::Linear).is_err());
    }

    #[test]
    fn contact_nudges_radius() {
        let g = RGrid::new(10.0, 20.0, 2, Spacing::Linear).unwrap();
        let pts = g.realize(|r| (r - 10.0).abs() < 1e-9);
        assert!(pts[0].contact && pts[0].r > 10.0 && pts[0].r < 10.0 * (1.0 + 2e-6));
        assert!(!pts[1].contact && pts[1].r == 20.0);
    }

    #[test]
    fn fit_recovers_line() {
        let radii: Vec<f64> = (1..10).map(|i| 10f64.powf(i as f64 / 3.0)).collect();
        let ys: Vec<f64> = radii.iter().map(|r| 2.0 - 0.5 * r.ln()).collect();
        let f = Fit::of(&radii, &ys);
        assert!((f.a - 2.0).abs() < 1e-12 && (f.b + 0.5).abs() < 1e-12 && f.rms < 1e-12);
    }

    #[test]
    fn nnls_clamps_negative_slope() {
        let x = [1.0, 2.0, 3.0];
        let y = [3.0, 2.0, 1.0];
        let (l, m) = nnls2(&x, &y);
        assert_eq!(l, 0.0);
        assert!((m - 2.0).abs() < 1e-12);
        let (l, m) = nnls2(&x, &[2.0, 3.0, 4.0]);
        assert!((l - 1.0).abs() < 1e-12 && (m - 1.0).abs() < 1e-12);
    }

    #[test]
    fn report_json_keys() {
        let pts = [GridPoint { r: 2.0, contact: false }, GridPoint { r: 4.0, contact: true }];
        let rep = DefectReport::new("x", &pts, vec![1.0, -1.0]);
        let v: serde_json::Value = serde_json::from_str(&rep.to_json()).unwrap();
        for k in ["check", "scenario_hash", "grid", "defect", "fit", "lambda", "mu", "exceptional_measure", "verdict", "notes"] {
            assert!(v.get(k).is_some(), "{k}");
        }
        assert_eq!(v["verdict"], "inconclusive");
        assert_eq!(rep.range, 2.0);
        let hv = DefectReport::hypothesis_violated("y", "n too small".into());
        assert_eq!(serde_json::to_value(hv.verdict).unwrap(), "hypothesis-violated");
    }

    proptest! {
        #[test]
        fn slack_fit_satisfies_required_fraction(ds in prop::collection::vec(-5.0f64..5.0, 10..30)) {
            let radii: Vec<f64> = (0..ds.len()).map(|i| 10.0 * 1.2f64.powi(i as i32)).collect();
            let growth: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
            let cfg = LabConfig::default();
            let fit = fit_slack(&ds, &growth, &radii, &cfg);
            prop_assert!(fit.lambda >= 0.0 && fit.mu >= 0.0);
            prop_assert!(fit.satisfied >= cfg.satisfaction);
            prop_assert!(fit.exceptional_measure <= cfg.exceptional_fraction * (radii[radii.len() - 1] - radii[0]) + 1e-9);
        }
    }
}
