use serde_json::{json, Map, Value};
use std::fmt::Write as _;
use std::path::Path;

use nevanlinna_core::lab::{
    characteristic_samples, check_carleman, check_fmt_angular, check_fmt_tsuji, check_logderiv, check_smt_angular,
    check_smt_tsuji, check_smt_variety, check_smt_mixed, check_tsuji_jensen, check_uniqueness_chain,
    check_wronskian_identities, CharacteristicSample, DefectReport, Functional, LabConfig, TableInput, Verdict,
};
use nevanlinna_core::nevanlinna::{TruncationLevel, Variant};
use nevanlinna_core::projective::HyperplaneVec;
use nevanlinna_core::zeros::{zeros_in_region, RegionSpec, ZeroRecord};

use crate::scenario::Loaded;
use crate::{CliError, EXIT_CHECK_FAILED, EXIT_OK};

fn core<T>(context: &str, r: nevanlinna_core::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| CliError::from_core(context, e))
}

pub fn parse_functionals(names: &[String], field: &str) -> Result<Vec<Functional>, CliError> {
    names
        .iter()
        .enumerate()
        .map(|(i, n)| {
            n.parse::<Functional>()
                .map_err(|e| CliError::Input(format!("{field}[{i}]: {e}")))
        })
        .collect()
}

/// Functionals from the command line, else from the scenario's table section.
pub fn table_samples(l: &Loaded, cfg: &LabConfig, functionals: Option<&[String]>) -> Result<(Vec<Functional>, Vec<CharacteristicSample>), CliError> {
    let spec = l
        .scenario
        .table
        .as_ref()
        .ok_or_else(|| CliError::Input("scenario field 'table': missing".into()))?;
    let funs = match functionals {
        Some(names) => parse_functionals(names, "option --functionals")?,
        None => parse_functionals(&spec.functionals, "scenario field table.functionals")?,
    };
    if funs.is_empty() {
        return Err(CliError::Input("scenario field 'table.functionals': no functionals requested".into()));
    }
    let curve = l.curve(&spec.curve, "table.curve")?;
    let n_vars = curve.dim() + 1;
    let targets = spec
        .targets
        .iter()
        .enumerate()
        .map(|(i, t)| l.target(t, n_vars, &format!("table.targets[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    let delta = match spec.delta {
        Some(d) => d,
        None => core("table.delta", TruncationLevel::level(curve.dim() as u32))?,
    };
    let input = TableInput {
        curve: &curve,
        targets: &targets,
        sector: l.sector,
        grid: l.scenario.grid,
        delta,
        functionals: &funs,
        cfg: *cfg,
    };
    let rows = core("table", characteristic_samples(&input))?;
    Ok((funs, rows))
}

pub fn table_csv(funs: &[Functional], rows: &[CharacteristicSample]) -> String {
    let mut out = String::from("r");
    for f in funs {
        write!(out, ",{f}").unwrap();
    }
    out.push_str(",contact_flag\n");
    for row in rows {
        write!(out, "{}", row.r).unwrap();
        for f in funs {
            write!(out, ",{}", row.values[&f.to_string()]).unwrap();
        }
        writeln!(out, ",{}", row.contact_flag).unwrap();
    }
    out
}

pub fn cmd_table(l: &Loaded, cfg: &LabConfig, functionals: Option<&[String]>) -> Result<String, CliError> {
    let (funs, rows) = table_samples(l, cfg, functionals)?;
    Ok(table_csv(&funs, &rows))
}

/// `(name, [(r, value)])`.
pub type Series = (String, Vec<(f64, f64)>);

/// Series read back from table CSV text.
pub fn read_table_csv(text: &str) -> Result<Vec<Series>, CliError> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| CliError::Input("empty table".into()))?
        .split(',')
        .collect();
    if header.first() != Some(&"r") || header.last() != Some(&"contact_flag") {
        return Err(CliError::Input("table header must start with 'r' and end with 'contact_flag'".into()));
    }
    let names = &header[1..header.len() - 1];
    let mut series: Vec<Series> = names.iter().map(|n| (n.to_string(), Vec::new())).collect();
    for (ln, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != header.len() {
            return Err(CliError::Input(format!("table line {}: expected {} cells", ln + 2, header.len())));
        }
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| CliError::Input(format!("table line {}: bad number '{s}'", ln + 2)))
        };
        let r = num(cells[0])?;
        for (k, s) in series.iter_mut().enumerate() {
            s.1.push((r, num(cells[k + 1])?));
        }
    }
    Ok(series)
}

fn file_stem(name: &str) -> String {
    name.replace('.', "_")
}

/// One `<name>.dat` per series plus `plot.gp`.
pub fn write_plotdata(series: &[Series], dir: &Path) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Input(format!("cannot write to {}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut script = String::from("set logscale x\nset xlabel 'r'\nset key left top\nplot \\\n");
    for (i, (name, pts)) in series.iter().enumerate() {
        let mut body = format!("# r {name}\n");
        for (r, v) in pts {
            writeln!(body, "{r} {v}").unwrap();
        }
        let file = format!("{}.dat", file_stem(name));
        std::fs::write(dir.join(&file), body).map_err(io)?;
        let sep = if i + 1 == series.len() { "\n" } else { ", \\\n" };
        write!(script, "  '{file}' using 1:2 with linespoints title '{name}'{sep}").unwrap();
    }
    std::fs::write(dir.join("plot.gp"), script).map_err(io)
}

pub fn cmd_plotdata(l: &Loaded, cfg: &LabConfig, functionals: Option<&[String]>, dir: &Path) -> Result<(), CliError> {
    let csv = cmd_table(l, cfg, functionals)?;
    write_plotdata(&read_table_csv(&csv)?, dir)
}

pub fn zeros_csv(zs: &[ZeroRecord]) -> String {
    let mut out = String::from("re,im,modulus,arg,multiplicity,residual\n");
    for z in zs {
        writeln!(
            out,
            "{},{},{},{},{},{:e}",
            z.location.re,
            z.location.im,
            z.location.norm(),
            z.location.arg(),
            z.multiplicity,
            z.residual
        )
        .unwrap();
    }
    out
}

/// Zeros of a scenario function's numerator, or of `Q(f)` when a curve is given.
pub fn cmd_zeros(l: &Loaded, cfg: &LabConfig, target: &str, curve: Option<&str>, region: &str, r: f64, r_lo: f64) -> Result<String, CliError> {
    let g = match curve {
        Some(c) => {
            let f = l.curve(c, "--curve")?;
            let q = l.target(target, f.dim() + 1, "--target")?;
            core("--target", nevanlinna_core::projective::compose(&q, &f))?
        }
        None => l.function(target, "--target")?.numerator,
    };
    let spec = match region {
        "sector-annulus" => RegionSpec::SectorAnnulus {
            sector: l.sector,
            r_lo,
            r_hi: r,
        },
        "tsuji" => RegionSpec::Tsuji { sector: l.sector, r },
        other => return Err(CliError::Input(format!("--region: unknown region '{other}' (sector-annulus or tsuji)"))),
    };
    core("--region", spec.validate())?;
    let zs = core("zeros", zeros_in_region(&g, &spec, &cfg.locator))?;
    Ok(zeros_csv(&zs))
}

struct Params<'a> {
    map: Option<&'a Map<String, Value>>,
    prefix: String,
}

impl<'a> Params<'a> {
    fn field(&self, key: &str) -> String {
        format!("{}.{key}", self.prefix)
    }

    fn err(&self, key: &str, msg: &str) -> CliError {
        CliError::Input(format!("scenario field '{}': {msg}", self.field(key)))
    }

    fn get(&self, key: &str) -> Option<&'a Value> {
        self.map.and_then(|m| m.get(key))
    }

    fn str(&self, key: &str) -> Result<&'a str, CliError> {
        self.get(key)
            .ok_or_else(|| self.err(key, "missing"))?
            .as_str()
            .ok_or_else(|| self.err(key, "expected a string"))
    }

    fn names(&self, key: &str) -> Result<Vec<&'a str>, CliError> {
        let arr = self
            .get(key)
            .ok_or_else(|| self.err(key, "missing"))?
            .as_array()
            .ok_or_else(|| self.err(key, "expected a list of names"))?;
        arr.iter()
            .map(|v| v.as_str().ok_or_else(|| self.err(key, "expected a list of names")))
            .collect()
    }

    fn uint(&self, key: &str, default: Option<u64>) -> Result<u64, CliError> {
        match self.get(key) {
            None => default.ok_or_else(|| self.err(key, "missing")),
            Some(v) => v.as_u64().ok_or_else(|| self.err(key, "expected a nonnegative integer")),
        }
    }

    fn float(&self, key: &str) -> Result<f64, CliError> {
        self.get(key)
            .ok_or_else(|| self.err(key, "missing"))?
            .as_f64()
            .ok_or_else(|| self.err(key, "expected a number"))
    }
}

/// Outcome of one check: its JSON record and verdict.
pub struct CheckOutcome {
    pub label: String,
    pub record: Value,
    pub verdict: Verdict,
}

fn defect_record(label: &str, hash: &str, mut rep: DefectReport) -> (Value, Verdict) {
    rep.scenario_hash = hash.to_string();
    let verdict = rep.verdict;
    let mut v = serde_json::to_value(&rep).expect("report serializes");
    v["name"] = json!(label);
    (v, verdict)
}

pub fn run_check(l: &Loaded, cfg: &LabConfig, index: usize) -> Result<CheckOutcome, CliError> {
    let spec = &l.scenario.checks[index];
    let p = Params {
        map: spec.params.as_object(),
        prefix: format!("checks[{index}].params"),
    };
    let label = spec.name.clone().unwrap_or_else(|| format!("{}#{index}", spec.kind));
    let ctx = format!("check '{label}'");
    let s = &l.sector;
    let grid = &l.scenario.grid;
    let rep = match spec.kind.as_str() {
        "fmt_angular" | "fmt_tsuji" => {
            let f = l.curve(p.str("curve")?, &p.field("curve"))?;
            let q = l.target(p.str("target")?, f.dim() + 1, &p.field("target"))?;
            if spec.kind == "fmt_angular" {
                core(&ctx, check_fmt_angular(&f, &q, s, grid, cfg))?
            } else {
                core(&ctx, check_fmt_tsuji(&f, &q, s, grid, cfg))?
            }
        }
        "carleman" | "tsuji_jensen" => {
            let mf = l.function(p.str("function")?, &p.field("function"))?;
            if spec.kind == "carleman" {
                core(&ctx, check_carleman(&mf, s, grid, cfg))?
            } else {
                core(&ctx, check_tsuji_jensen(&mf, s, grid, cfg))?
            }
        }
        "logderiv" => {
            let mf = l.function(p.str("function")?, &p.field("function"))?;
            let order = p.uint("order", Some(1))? as usize;
            let variant = match p.get("variant").map(|v| v.as_str()) {
                None | Some(Some("angular")) => Variant::Angular,
                Some(Some("tsuji")) => Variant::Tsuji,
                _ => return Err(p.err("variant", "expected \"angular\" or \"tsuji\"")),
            };
            core(&ctx, check_logderiv(&mf, order, s, grid, variant, cfg))?
        }
        "smt_angular" | "smt_tsuji" => {
            let f = l.curve(p.str("curve")?, &p.field("curve"))?;
            let hs = hyperplanes(l, &p, "hyperplanes", f.dim() + 1)?;
            if spec.kind == "smt_angular" {
                core(&ctx, check_smt_angular(&f, &hs, s, grid, cfg))?
            } else {
                core(&ctx, check_smt_tsuji(&f, &hs, s, grid, cfg))?
            }
        }
        "smt_mixed" => {
            let f = l.curve(p.str("curve")?, &p.field("curve"))?;
            let hs = hyperplanes(l, &p, "hyperplanes", f.dim() + 1)?;
            let qs = forms(l, &p, "forms", f.dim() + 1)?;
            let n = p.uint("n", None)? as u32;
            core(&ctx, check_smt_mixed(&f, &hs, &qs, n, s, grid, cfg))?
        }
        "uniqueness_chain" => {
            let f = l.curve(p.str("curve")?, &p.field("curve"))?;
            let g = l.curve(p.str("other")?, &p.field("other"))?;
            let d = l.target(p.str("target")?, f.dim() + 1, &p.field("target"))?;
            let i = p.uint("i", None)? as usize;
            let j = p.uint("j", None)? as usize;
            core(&ctx, check_uniqueness_chain(&f, &g, &d, i, j, s, grid, cfg))?
        }
        "smt_variety" => {
            let f = l.curve(p.str("curve")?, &p.field("curve"))?;
            let qs = forms(l, &p, "targets", f.dim() + 1)?;
            let m = p.uint("m", None)? as u32;
            let eps = p.float("epsilon")?;
            core(&ctx, check_smt_variety(&f, &qs, m, eps, s, grid, cfg))?
        }
        "wronskian" => {
            let f = l.curve(p.str("curve")?, &p.field("curve"))?;
            let hs = match p.get("hyperplanes") {
                Some(_) => Some(hyperplanes(l, &p, "hyperplanes", f.dim() + 1)?),
                None => None,
            };
            let samples = p.uint("samples", Some(100))? as usize;
            let rep = core(&ctx, check_wronskian_identities(&f, hs.as_deref(), samples, cfg.seed))?;
            let verdict = if rep.pass { Verdict::Pass } else { Verdict::Fail };
            let mut v = serde_json::to_value(&rep).expect("report serializes");
            v["check"] = json!("wronskian_identities");
            v["name"] = json!(label);
            v["scenario_hash"] = json!(l.hash);
            v["verdict"] = json!(verdict.as_str());
            return Ok(CheckOutcome { label, record: v, verdict });
        }
        other => {
            return Err(CliError::Input(format!(
                "scenario field 'checks[{index}].kind': unknown check '{other}'"
            )))
        }
    };
    let (record, verdict) = defect_record(&label, &l.hash, rep);
    Ok(CheckOutcome { label, record, verdict })
}

fn hyperplanes(l: &Loaded, p: &Params, key: &str, n_vars: usize) -> Result<Vec<HyperplaneVec>, CliError> {
    p.names(key)?
        .into_iter()
        .map(|n| l.hyperplane(n, n_vars, &p.field(key)))
        .collect()
}

fn forms(l: &Loaded, p: &Params, key: &str, n_vars: usize) -> Result<Vec<nevanlinna_core::projective::HomogForm>, CliError> {
    p.names(key)?
        .into_iter()
        .map(|n| l.target(n, n_vars, &p.field(key)))
        .collect()
}

pub struct VerifyOutput {
    /// One JSON object per line, in check order.
    pub reports: String,
    /// `<verdict> <label>` per check.
    pub summary: Vec<String>,
    pub exit: u8,
}

pub fn cmd_verify(l: &Loaded, cfg: &LabConfig) -> Result<VerifyOutput, CliError> {
    let mut reports = String::new();
    let mut summary = Vec::new();
    let mut failed = false;
    for i in 0..l.scenario.checks.len() {
        let out = run_check(l, cfg, i)?;
        reports.push_str(&serde_json::to_string(&out.record).expect("record serializes"));
        reports.push('\n');
        let mut line = format!("{} {}", out.verdict.as_str(), out.label);
        match out.verdict {
            Verdict::Fail => failed = true,
            Verdict::HypothesisViolated => line.push_str(" (warning: hypothesis violated, no verdict)"),
            Verdict::Inconclusive => line.push_str(" (warning: inconclusive)"),
            Verdict::Pass => {}
        }
        summary.push(line);
    }
    Ok(VerifyOutput {
        reports,
        summary,
        exit: if failed { EXIT_CHECK_FAILED } else { EXIT_OK },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::load_str;

    const SIN: &str = r#"{
        "schema": 1,
        "sector": {"alpha": "-pi/4", "beta": "pi/4"},
        "functions": {"s": {"num": "sin(z)"}, "e": {"num": "exp(z)"}},
        "grid": {"r_min": 2, "r_max": 10, "count": 2}
    }"#;

    #[test]
    fn sine_zeros() {
        let l = load_str(SIN).unwrap();
        let cfg = l.lab_config();
        let csv = cmd_zeros(&l, &cfg, "s", None, "sector-annulus", 10.0, 1.0).unwrap();
        let rows: Vec<&str> = csv.lines().skip(1).collect();
        assert_eq!(rows.len(), 3);
        assert_eq!(cmd_zeros(&l, &cfg, "e", None, "sector-annulus", 10.0, 1.0).unwrap().lines().count(), 1);
        assert!(matches!(cmd_zeros(&l, &cfg, "s", None, "disk", 10.0, 1.0), Err(CliError::Input(_))));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let funs = vec![Functional::T, Functional::M(0)];
        let rows = vec![CharacteristicSample {
            r: 10.000001,
            values: [("T".to_string(), 0.1f64 + 0.2), ("m.0".to_string(), 1e-300)].into_iter().collect(),
            contact_flag: true,
        }];
        let series = read_table_csv(&table_csv(&funs, &rows)).unwrap();
        assert_eq!(series[0], ("T".to_string(), vec![(10.000001, 0.1 + 0.2)]));
        assert_eq!(series[1].1[0].1, 1e-300);
    }

    #[test]
    fn unknown_functional_names_field() {
        let e = parse_functionals(&["T".into(), "Z.1".into()], "scenario field table.functionals").unwrap_err();
        assert!(e.to_string().contains("table.functionals[1]"), "{e}");
    }
}
