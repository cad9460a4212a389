use num_complex::Complex64;
use std::fmt;

use super::{HoloExpr, Node};

// Printing levels mirror the grammar: expr > term > factor > atom. A child
// that binds looser than its slot is parenthesized, so the output reparses
// to the same tree.

fn is_plain_real(v: Complex64) -> bool {
    v.im == 0.0 && v.re.is_sign_positive()
}

pub(crate) fn fmt_float(x: f64) -> String {
    format!("{x:?}")
}

fn write_const(f: &mut fmt::Formatter<'_>, v: Complex64) -> fmt::Result {
    if is_plain_real(v) {
        write!(f, "{}", fmt_float(v.re))
    } else {
        let sign = if v.im.is_sign_negative() { '-' } else { '+' };
        write!(f, "({}{}{}i)", fmt_float(v.re), sign, fmt_float(v.im.abs()))
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &HoloExpr) -> fmt::Result {
    match e.node() {
        Node::Add(a, b) => {
            write_expr(f, a)?;
            f.write_str(" + ")?;
            write_term(f, b)
        }
        Node::Sub(a, b) => {
            write_expr(f, a)?;
            f.write_str(" - ")?;
            write_term(f, b)
        }
        _ => write_term(f, e),
    }
}

fn write_term(f: &mut fmt::Formatter<'_>, e: &HoloExpr) -> fmt::Result {
    match e.node() {
        Node::Mul(a, b) => {
            write_term(f, a)?;
            f.write_str("*")?;
            write_factor(f, b)
        }
        Node::Add(..) | Node::Sub(..) => {
            f.write_str("(")?;
            write_expr(f, e)?;
            f.write_str(")")
        }
        _ => write_factor(f, e),
    }
}

fn write_factor(f: &mut fmt::Formatter<'_>, e: &HoloExpr) -> fmt::Result {
    match e.node() {
        Node::Pow(a, n) => {
            write_atom(f, a)?;
            write!(f, "^{n}")
        }
        _ => write_atom(f, e),
    }
}

fn write_atom(f: &mut fmt::Formatter<'_>, e: &HoloExpr) -> fmt::Result {
    match e.node() {
        Node::Const(v) => write_const(f, *v),
        Node::Var => f.write_str("z"),
        Node::Exp(a) => {
            f.write_str("exp(")?;
            write_expr(f, a)?;
            f.write_str(")")
        }
        Node::Sin(a) => {
            f.write_str("sin(")?;
            write_expr(f, a)?;
            f.write_str(")")
        }
        Node::Cos(a) => {
            f.write_str("cos(")?;
            write_expr(f, a)?;
            f.write_str(")")
        }
        Node::Neg(a) => {
            f.write_str("-")?;
            write_atom(f, a)
        }
        _ => {
            f.write_str("(")?;
            write_expr(f, e)?;
            f.write_str(")")
        }
    }
}

impl fmt::Display for HoloExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self)
    }
}
