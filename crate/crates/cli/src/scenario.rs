//! Scenario files: one JSON document, `"schema": 1`.

use serde::Deserialize;
use serde_json::Value;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::f64::consts::PI;

use nevanlinna_core::lab::{LabConfig, RGrid};
use nevanlinna_core::nevanlinna::TruncationLevel;
use nevanlinna_core::projective::{Curve, HomogForm, HyperplaneVec, Sector};
use nevanlinna_core::quad::QuadratureConfig;
use nevanlinna_core::zeros::LocatorConfig;
use nevanlinna_core::MeroFn;

use crate::CliError;

pub const SCHEMA: u32 = 1;

/// `0`, `1.5`, `"pi"`, `"-pi/4"`, `"3*pi/4"`, `"2pi"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Angle(pub f64);

impl<'de> Deserialize<'de> for Angle {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(Angle(x)),
            Raw::Text(t) => parse_angle(&t).map(Angle).map_err(serde::de::Error::custom),
        }
    }
}

pub fn parse_angle(text: &str) -> Result<f64, String> {
    let bad = || format!("cannot read angle '{text}' (expected a number or a multiple of pi such as \"-pi/4\")");
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let (num, den) = match t.split_once('/') {
        Some((a, b)) => (a.to_string(), b.parse::<f64>().map_err(|_| bad())?),
        None => (t.clone(), 1.0),
    };
    let (sign, body) = match num.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, num.strip_prefix('+').unwrap_or(&num)),
    };
    let value = match body.strip_suffix("pi") {
        Some(c) => {
            let c = c.strip_suffix('*').unwrap_or(c);
            let c = if c.is_empty() { 1.0 } else { c.parse::<f64>().map_err(|_| bad())? };
            c * PI
        }
        None => body.parse::<f64>().map_err(|_| bad())?,
    };
    if den == 0.0 {
        return Err(bad());
    }
    Ok(sign * value / den)
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectorSpec {
    pub alpha: Angle,
    pub beta: Angle,
}

/// A form as an expression string, an expression with an explicit variable
/// count, or the full monomial listing.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum TargetSpec {
    Text(String),
    Expr { expr: String, n_vars: Option<usize> },
    Form(HomogForm),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionSpec {
    pub num: String,
    #[serde(default = "one")]
    pub den: String,
}

fn one() -> String {
    "1".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableSpec {
    pub curve: String,
    #[serde(default)]
    pub targets: Vec<String>,
    #[serde(default)]
    pub delta: Option<TruncationLevel>,
    #[serde(default)]
    pub functionals: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    pub kind: String,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub params: Value,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub slope: Option<f64>,
    pub bound_cap: Option<f64>,
    pub slack: Option<f64>,
    pub satisfaction: Option<f64>,
    pub exceptional_fraction: Option<f64>,
    pub lambda_max: Option<f64>,
    pub epsilon_max: Option<f64>,
    pub ratio_bound: Option<f64>,
    pub locator: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: u32,
    #[serde(default)]
    pub name: Option<String>,
    pub sector: SectorSpec,
    #[serde(default)]
    pub curves: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub functions: BTreeMap<String, FunctionSpec>,
    #[serde(default)]
    pub targets: BTreeMap<String, TargetSpec>,
    pub grid: RGrid,
    #[serde(default)]
    pub table: Option<TableSpec>,
    #[serde(default)]
    pub checks: Vec<CheckSpec>,
    #[serde(default)]
    pub quadrature: Option<QuadratureConfig>,
    #[serde(default)]
    pub locator: Option<LocatorConfig>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
}

/// A parsed scenario together with the hash of its canonical JSON form.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub scenario: Scenario,
    pub hash: String,
    pub sector: Sector,
}

pub fn load_str(text: &str) -> Result<Loaded, CliError> {
    let value: Value = serde_json::from_str(text).map_err(|e| CliError::Input(format!("malformed JSON: {e}")))?;
    let canonical = serde_json::to_string(&value).expect("value serializes");
    let hash = format!("{:x}", Sha256::digest(canonical.as_bytes()));
    let scenario: Scenario = serde_path_to_error::deserialize(value)
        .map_err(|e| CliError::Input(format!("scenario field '{}': {}", e.path(), e.inner())))?;
    if scenario.schema != SCHEMA {
        return Err(CliError::Input(format!("scenario field 'schema': unsupported version {}", scenario.schema)));
    }
    let sector = Sector::new(scenario.sector.alpha.0, scenario.sector.beta.0)
        .map_err(|e| CliError::Input(format!("scenario field 'sector': {e}")))?;
    scenario
        .grid
        .validate()
        .map_err(|e| CliError::Input(format!("scenario field 'grid': {e}")))?;
    let loaded = Loaded { scenario, hash, sector };
    loaded.check_references()?;
    Ok(loaded)
}

pub fn load(path: &std::path::Path) -> Result<Loaded, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    load_str(&text)
}

fn field_err(field: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("scenario field '{field}': {e}"))
}

impl Loaded {
    pub fn lab_config(&self) -> LabConfig {
        let sc = &self.scenario;
        let mut cfg = LabConfig {
            seed: sc.seed,
            ..LabConfig::default()
        };
        if let Some(q) = sc.quadrature {
            cfg.quad = q;
        }
        if let Some(l) = sc.locator {
            cfg.locator = l;
        }
        cfg.locator.seed = sc.seed;
        apply_tolerances(&mut cfg, &sc.tolerances);
        cfg
    }

    pub fn curve(&self, name: &str, field: &str) -> Result<Curve, CliError> {
        let texts = self
            .scenario
            .curves
            .get(name)
            .ok_or_else(|| field_err(field, format!("unknown curve '{name}'")))?;
        Curve::parse(texts).map_err(|e| field_err(&format!("curves.{name}"), e))
    }

    pub fn function(&self, name: &str, field: &str) -> Result<MeroFn, CliError> {
        let spec = self
            .scenario
            .functions
            .get(name)
            .ok_or_else(|| field_err(field, format!("unknown function '{name}'")))?;
        MeroFn::parse(&spec.num, &spec.den).map_err(|e| field_err(&format!("functions.{name}"), e))
    }

    /// Resolves a target for a curve in `P^n`, reading bare expressions in `n + 1` variables.
    pub fn target(&self, name: &str, n_vars: usize, field: &str) -> Result<HomogForm, CliError> {
        let spec = self
            .scenario
            .targets
            .get(name)
            .ok_or_else(|| field_err(field, format!("unknown target '{name}'")))?;
        let tf = format!("targets.{name}");
        let form = match spec {
            TargetSpec::Text(t) => HomogForm::parse(t, n_vars),
            TargetSpec::Expr { expr, n_vars: nv } => HomogForm::parse(expr, nv.unwrap_or(n_vars)),
            TargetSpec::Form(f) => Ok(f.clone()),
        }
        .map_err(|e| field_err(&tf, e))?;
        if form.n_vars() != n_vars {
            return Err(field_err(&tf, format!("form has {} variables, curve needs {n_vars}", form.n_vars())));
        }
        Ok(form)
    }

    pub fn hyperplane(&self, name: &str, n_vars: usize, field: &str) -> Result<HyperplaneVec, CliError> {
        let form = self.target(name, n_vars, field)?;
        HyperplaneVec::from_form(&form).map_err(|e| field_err(&format!("targets.{name}"), e))
    }

    fn check_references(&self) -> Result<(), CliError> {
        let sc = &self.scenario;
        if let Some(t) = &sc.table {
            if !sc.curves.contains_key(&t.curve) {
                return Err(field_err("table.curve", format!("unknown curve '{}'", t.curve)));
            }
            for (i, name) in t.targets.iter().enumerate() {
                if !sc.targets.contains_key(name) {
                    return Err(field_err(&format!("table.targets[{i}]"), format!("unknown target '{name}'")));
                }
            }
        }
        for (i, c) in sc.checks.iter().enumerate() {
            let Value::Object(params) = &c.params else {
                if c.params.is_null() {
                    continue;
                }
                return Err(field_err(&format!("checks[{i}].params"), "expected an object"));
            };
            for (key, v) in params {
                let pool: Option<Vec<&str>> = match key.as_str() {
                    "curve" | "other" => Some(sc.curves.keys().map(String::as_str).collect()),
                    "function" => Some(sc.functions.keys().map(String::as_str).collect()),
                    "target" | "hyperplanes" | "forms" | "targets" => Some(sc.targets.keys().map(String::as_str).collect()),
                    _ => None,
                };
                let Some(pool) = pool else { continue };
                let names: Vec<&str> = match v {
                    Value::String(s) => vec![s.as_str()],
                    Value::Array(a) => a.iter().filter_map(Value::as_str).collect(),
                    _ => Vec::new(),
                };
                for n in names {
                    if !pool.contains(&n) {
                        return Err(field_err(&format!("checks[{i}].params.{key}"), format!("unknown name '{n}'")));
                    }
                }
            }
        }
        Ok(())
    }
}

pub fn apply_tolerances(cfg: &mut LabConfig, t: &Tolerances) {
    if let Some(v) = t.slope {
        cfg.slope_tol = v;
    }
    if t.bound_cap.is_some() {
        cfg.bound_cap = t.bound_cap;
    }
    if let Some(v) = t.slack {
        cfg.slack_tol = v;
    }
    if let Some(v) = t.satisfaction {
        cfg.satisfaction = v;
    }
    if let Some(v) = t.exceptional_fraction {
        cfg.exceptional_fraction = v;
    }
    if let Some(v) = t.lambda_max {
        cfg.lambda_max = v;
    }
    if let Some(v) = t.epsilon_max {
        cfg.epsilon_max = v;
    }
    if let Some(v) = t.ratio_bound {
        cfg.ratio_bound = v;
    }
    if let Some(v) = t.locator {
        cfg.locator.tol = v;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles() {
        assert_eq!(parse_angle("pi").unwrap(), PI);
        assert_eq!(parse_angle("-pi/4").unwrap(), -PI / 4.0);
        assert_eq!(parse_angle("3*pi/4").unwrap(), 3.0 * PI / 4.0);
        assert_eq!(parse_angle("2pi").unwrap(), 2.0 * PI);
        assert_eq!(parse_angle("0.5").unwrap(), 0.5);
        assert!(parse_angle("tau").is_err());
        assert!(parse_angle("pi/0").is_err());
    }

    const MINIMAL: &str = r#"{
        "schema": 1,
        "sector": {"alpha": 0, "beta": "pi"},
        "curves": {"f": ["1", "exp(z)"]},
        "targets": {"q": "x0 + x1"},
        "grid": {"r_min": 10, "r_max": 100, "count": 4},
        "table": {"curve": "f", "targets": ["q"], "functionals": ["T"]}
    }"#;

    #[test]
    fn minimal_loads() {
        let l = load_str(MINIMAL).unwrap();
        assert_eq!(l.sector.beta(), PI);
        assert_eq!(l.hash.len(), 64);
        let q = l.target("q", 2, "x").unwrap();
        assert_eq!(q.degree(), 1);
    }

    #[test]
    fn hash_ignores_layout() {
        let squashed = MINIMAL.replace("\n        ", "").replace(": ", ":");
        assert_eq!(load_str(MINIMAL).unwrap().hash, load_str(&squashed).unwrap().hash);
    }

    #[test]
    fn errors_name_the_field() {
        let e = load_str(&MINIMAL.replace("\"count\": 4", "\"count\": \"four\"")).unwrap_err();
        assert!(e.to_string().contains("grid.count"), "{e}");
        let e = load_str(&MINIMAL.replace("\"targets\": [\"q\"]", "\"targets\": [\"nope\"]")).unwrap_err();
        assert!(e.to_string().contains("table.targets[0]"), "{e}");
        let e = load_str(&MINIMAL.replace("\"schema\": 1", "\"schema\": 2")).unwrap_err();
        assert!(e.to_string().contains("schema"), "{e}");
        assert!(matches!(load_str("{").unwrap_err(), CliError::Input(_)));
    }
}
