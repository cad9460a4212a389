use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::{LabConfig, RGrid};
use crate::error::{Error, Result};
use crate::nevanlinna::{
    char_cartan_plane, char_s, char_t_tsuji, counting_c, counting_n_tsuji, counting_w, proximity_a, proximity_b,
    proximity_m_tsuji, wronskian_zeros, Target, TruncationLevel, Variant,
};
use crate::projective::{Curve, HomogForm, Sector};
use crate::zeros::ZeroSet;

/// A column of the characteristic table. Target indices are zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Functional {
    S,
    T,
    A(usize),
    B(usize),
    C(usize),
    Cd(usize),
    M(usize),
    N(usize),
    Nd(usize),
    WC,
    WN,
    Tcartan,
}

impl Functional {
    fn target(&self) -> Option<usize> {
        match *self {
            Functional::A(j)
            | Functional::B(j)
            | Functional::C(j)
            | Functional::Cd(j)
            | Functional::M(j)
            | Functional::N(j)
            | Functional::Nd(j) => Some(j),
            _ => None,
        }
    }
}

impl FromStr for Functional {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let bad = || Error::Invalid(format!("unknown functional '{text}'"));
        Ok(match text {
            "S" => Functional::S,
            "T" => Functional::T,
            "W.C" => Functional::WC,
            "W.N" => Functional::WN,
            "Tcartan" => Functional::Tcartan,
            _ => {
                let (head, idx) = text.split_once('.').ok_or_else(bad)?;
                let j: usize = idx.parse().map_err(|_| bad())?;
                match head {
                    "A" => Functional::A(j),
                    "B" => Functional::B(j),
                    "C" => Functional::C(j),
                    "Cd" => Functional::Cd(j),
                    "m" => Functional::M(j),
                    "N" => Functional::N(j),
                    "Nd" => Functional::Nd(j),
                    _ => return Err(bad()),
                }
            }
        })
    }
}

impl fmt::Display for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Functional::S => write!(f, "S"),
            Functional::T => write!(f, "T"),
            Functional::A(j) => write!(f, "A.{j}"),
            Functional::B(j) => write!(f, "B.{j}"),
            Functional::C(j) => write!(f, "C.{j}"),
            Functional::Cd(j) => write!(f, "Cd.{j}"),
            Functional::M(j) => write!(f, "m.{j}"),
            Functional::N(j) => write!(f, "N.{j}"),
            Functional::Nd(j) => write!(f, "Nd.{j}"),
            Functional::WC => write!(f, "W.C"),
            Functional::WN => write!(f, "W.N"),
            Functional::Tcartan => write!(f, "Tcartan"),
        }
    }
}

pub struct TableInput<'a> {
    pub curve: &'a Curve,
    pub targets: &'a [HomogForm],
    pub sector: Sector,
    pub grid: RGrid,
    /// Truncation used by `Cd.j` and `Nd.j`.
    pub delta: TruncationLevel,
    pub functionals: &'a [Functional],
    pub cfg: LabConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CharacteristicSample {
    pub r: f64,
    /// Keyed by the functional's column name.
    pub values: BTreeMap<String, f64>,
    pub contact_flag: bool,
}

/// One sample per grid radius, radii nudged off zeros of every target used.
pub fn characteristic_samples(input: &TableInput) -> Result<Vec<CharacteristicSample>> {
    let TableInput {
        curve: f,
        sector: s,
        grid,
        delta,
        cfg,
        ..
    } = *input;
    grid.validate()?;
    let reach = grid.reach();
    let mut needed: Vec<usize> = input.functionals.iter().filter_map(|x| x.target()).collect();
    needed.sort_unstable();
    needed.dedup();
    let mut targets: BTreeMap<usize, Target> = BTreeMap::new();
    for j in needed {
        let q = input
            .targets
            .get(j)
            .ok_or_else(|| Error::Invalid(format!("target index {j} out of range ({} targets)", input.targets.len())))?;
        targets.insert(j, Target::new(f, q, &s, reach, &cfg.locator)?);
    }
    let wz: Option<ZeroSet> = if input.functionals.iter().any(|x| matches!(x, Functional::WC | Functional::WN)) {
        Some(wronskian_zeros(f, &s, reach, &cfg.locator)?)
    } else {
        None
    };
    let pts = grid.realize(|r| targets.values().any(|t| t.zeros.contact(r)) || wz.as_ref().is_some_and(|z| z.contact(r)));
    pts.par_iter()
        .map(|p| {
            let r = p.r;
            let mut values = BTreeMap::new();
            for fun in input.functionals {
                let t = |j: &usize| &targets[j];
                let v = match fun {
                    Functional::S => char_s(f, &s, r, &cfg.quad)?,
                    Functional::T => char_t_tsuji(f, &s, r, &cfg.quad)?,
                    Functional::A(j) => proximity_a(f, t(j), r, &cfg.quad)?,
                    Functional::B(j) => proximity_b(f, t(j), r, &cfg.quad)?,
                    Functional::C(j) => counting_c(t(j), r, TruncationLevel::Untruncated)?,
                    Functional::Cd(j) => counting_c(t(j), r, delta)?,
                    Functional::M(j) => proximity_m_tsuji(f, t(j), r, &cfg.quad)?,
                    Functional::N(j) => counting_n_tsuji(t(j), r, TruncationLevel::Untruncated)?,
                    Functional::Nd(j) => counting_n_tsuji(t(j), r, delta)?,
                    Functional::WC => counting_w(wz.as_ref().unwrap(), r, Variant::Angular)?,
                    Functional::WN => counting_w(wz.as_ref().unwrap(), r, Variant::Tsuji)?,
                    Functional::Tcartan => char_cartan_plane(f, r, &cfg.quad)?.value,
                };
                if !v.is_finite() {
                    return Err(Error::Precision(format!("{fun} is not finite at r = {r}")));
                }
                values.insert(fun.to_string(), v);
            }
            Ok(CharacteristicSample {
                r,
                values,
                contact_flag: p.contact,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lab::Spacing;
    use std::f64::consts::{PI, TAU};

    #[test]
    fn names_round_trip() {
        for name in ["S", "T", "A.0", "B.2", "C.1", "Cd.0", "m.3", "N.0", "Nd.1", "W.C", "W.N", "Tcartan"] {
            assert_eq!(name.parse::<Functional>().unwrap().to_string(), name);
        }
        for bad in ["X", "A", "A.x", "Q.1", "t"] {
            assert!(bad.parse::<Functional>().is_err(), "{bad}");
        }
    }

    #[test]
    fn exp_table_matches_closed_form() {
        let f = Curve::parse(&["1", "exp(z)"]).unwrap();
        let q = [HomogForm::parse("x0 + x1", 2).unwrap()];
        let funs: Vec<Functional> = ["T", "m.0", "N.0"].iter().map(|x| x.parse().unwrap()).collect();
        let input = TableInput {
            curve: &f,
            targets: &q,
            sector: Sector::new(0.0, PI).unwrap(),
            grid: RGrid::new(10.0, 100.0, 4, Spacing::Geometric).unwrap(),
            delta: TruncationLevel::Untruncated,
            functionals: &funs,
            cfg: LabConfig::default(),
        };
        let rows = characteristic_samples(&input).unwrap();
        assert_eq!(rows.len(), 4);
        let mut last = 0.0;
        for row in &rows {
            let t = row.values["T"];
            assert!((t - row.r.ln() / TAU).abs() < 1e-8);
            assert!(t > last);
            last = t;
            assert!((t - row.values["m.0"] - row.values["N.0"]).abs() < 0.5);
        }
    }

    #[test]
    fn missing_target_is_rejected() {
        let f = Curve::parse(&["1", "z"]).unwrap();
        let funs = [Functional::C(1)];
        let input = TableInput {
            curve: &f,
            targets: &[HomogForm::parse("x1", 2).unwrap()],
            sector: Sector::new(0.0, PI).unwrap(),
            grid: RGrid::new(2.0, 5.0, 2, Spacing::Linear).unwrap(),
            delta: TruncationLevel::Untruncated,
            functionals: &funs,
            cfg: LabConfig::default(),
        };
        assert!(characteristic_samples(&input).is_err());
    }
}
