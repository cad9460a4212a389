//! Angular and Tsuji-type Nevanlinna functionals for holomorphic curves into
//! complex projective space, evaluated numerically on sectors.

pub mod error;
pub mod expr;
pub mod lab;
pub mod nevanlinna;
pub mod projective;
pub mod quad;
pub mod scaled;
pub mod zeros;

pub use error::{Error, Result};
pub use expr::{parse_expr, HoloExpr, Jet, MeroFn};
