//! Recursive-descent parser for
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor ('*' factor)*
//! factor := atom ('^' uint)?
//! atom   := ident | complex-literal | ident '(' expr ')' | '(' expr ')' | '-' atom
//! complex-literal := float | float 'i' | '(' float ('+'|'-') float 'i' ')'
//! ```
//!
//! The grammar is shared with the homogeneous-polynomial parser; what an
//! identifier means is decided by a [`Builder`].

use num_complex::Complex64;

use super::HoloExpr;
use crate::error::{Error, Result};

pub(crate) trait Builder {
    type Out;
    fn constant(&mut self, v: Complex64) -> Self::Out;
    fn ident(&mut self, name: &str, offset: usize) -> Result<Self::Out>;
    fn call(&mut self, name: &str, arg: Self::Out, offset: usize) -> Result<Self::Out>;
    fn add(&mut self, a: Self::Out, b: Self::Out) -> Self::Out;
    fn sub(&mut self, a: Self::Out, b: Self::Out) -> Self::Out;
    fn mul(&mut self, a: Self::Out, b: Self::Out) -> Self::Out;
    fn pow(&mut self, a: Self::Out, n: u32) -> Self::Out;
    fn neg(&mut self, a: Self::Out) -> Self::Out;
}

pub(crate) struct Parser<'a, B: Builder> {
    src: &'a [u8],
    pos: usize,
    builder: B,
}

fn syntax<T>(offset: usize, message: impl Into<String>) -> Result<T> {
    Err(Error::Syntax {
        offset,
        message: message.into(),
    })
}

impl<'a, B: Builder> Parser<'a, B> {
    pub(crate) fn new(text: &'a str, builder: B) -> Self {
        Parser {
            src: text.as_bytes(),
            pos: 0,
            builder,
        }
    }

    pub(crate) fn parse_all(mut self) -> Result<B::Out> {
        self.skip_ws();
        if self.pos >= self.src.len() {
            return syntax(self.pos, "empty expression");
        }
        let e = self.expr()?;
        self.skip_ws();
        if self.pos < self.src.len() {
            return self.unexpected();
        }
        Ok(e)
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn unexpected<T>(&self) -> Result<T> {
        match self.src.get(self.pos) {
            Some(b'/') => Err(Error::DivisionRejected { offset: self.pos }),
            Some(ch) => syntax(self.pos, format!("unexpected character '{}'", *ch as char)),
            None => syntax(self.pos, "unexpected end of input"),
        }
    }

    fn expect(&mut self, ch: u8) -> Result<()> {
        if self.peek() == Some(ch) {
            self.pos += 1;
            Ok(())
        } else if self.pos >= self.src.len() {
            syntax(self.pos, format!("expected '{}' before end of input", ch as char))
        } else {
            self.unexpected()
        }
    }

    fn expr(&mut self) -> Result<B::Out> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = self.builder.add(lhs, rhs);
                }
                Some(b'-') => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = self.builder.sub(lhs, rhs);
                }
                Some(b'/') => return Err(Error::DivisionRejected { offset: self.pos }),
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<B::Out> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    lhs = self.builder.mul(lhs, rhs);
                }
                Some(b'/') => return Err(Error::DivisionRejected { offset: self.pos }),
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<B::Out> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if start == self.pos {
                return syntax(start, "exponent must be a nonnegative integer");
            }
            let digits = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
            let n: u32 = digits
                .parse()
                .or_else(|_| syntax(start, "exponent out of range"))?;
            return Ok(self.builder.pow(base, n));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<B::Out> {
        let start = match self.peek() {
            Some(_) => self.pos,
            None => return syntax(self.pos, "unexpected end of input"),
        };
        let ch = self.src[start];
        if ch == b'-' {
            self.pos += 1;
            let inner = self.atom()?;
            return Ok(self.builder.neg(inner));
        }
        if ch == b'(' {
            if let Some((v, end)) = self.paren_literal(start) {
                self.pos = end;
                return Ok(self.builder.constant(v));
            }
            self.pos += 1;
            let e = self.expr()?;
            self.expect(b')')?;
            return Ok(e);
        }
        if ch.is_ascii_digit() || ch == b'.' {
            let (x, end) = match scan_float(self.src, start) {
                Some(v) => v,
                None => return syntax(start, "malformed number"),
            };
            self.pos = end;
            if self.src.get(self.pos) == Some(&b'i') && !ident_continues(self.src, self.pos + 1) {
                self.pos += 1;
                return Ok(self.builder.constant(Complex64::new(0.0, x)));
            }
            return Ok(self.builder.constant(Complex64::new(x, 0.0)));
        }
        if ch.is_ascii_alphabetic() || ch == b'_' {
            let mut end = start;
            while end < self.src.len() && (self.src[end].is_ascii_alphanumeric() || self.src[end] == b'_') {
                end += 1;
            }
            let name = std::str::from_utf8(&self.src[start..end]).unwrap().to_owned();
            self.pos = end;
            if self.peek() == Some(b'(') {
                self.pos += 1;
                let arg = self.expr()?;
                self.expect(b')')?;
                return self.builder.call(&name, arg, start);
            }
            return self.builder.ident(&name, start);
        }
        self.unexpected()
    }

    /// `'(' signed-float ('+'|'-') float 'i' ')'`, without consuming input
    /// unless the whole literal matches.
    fn paren_literal(&self, start: usize) -> Option<(Complex64, usize)> {
        let s = self.src;
        let mut p = start + 1;
        let ws = |p: &mut usize| {
            while *p < s.len() && s[*p].is_ascii_whitespace() {
                *p += 1;
            }
        };
        ws(&mut p);
        let mut neg = false;
        if p < s.len() && (s[p] == b'-' || s[p] == b'+') {
            neg = s[p] == b'-';
            p += 1;
        }
        let (re, e) = scan_float(s, p)?;
        p = e;
        ws(&mut p);
        let sign = match s.get(p) {
            Some(b'+') => 1.0,
            Some(b'-') => -1.0,
            _ => return None,
        };
        p += 1;
        ws(&mut p);
        let (im, e) = scan_float(s, p)?;
        p = e;
        if s.get(p) != Some(&b'i') {
            return None;
        }
        p += 1;
        ws(&mut p);
        if s.get(p) != Some(&b')') {
            return None;
        }
        let re = if neg { -re } else { re };
        Some((Complex64::new(re, sign * im), p + 1))
    }
}

fn ident_continues(s: &[u8], p: usize) -> bool {
    s.get(p).is_some_and(|c| c.is_ascii_alphanumeric() || *c == b'_')
}

/// Unsigned decimal float: `digits ('.' digits?)? exponent?` or `'.' digits exponent?`.
fn scan_float(s: &[u8], start: usize) -> Option<(f64, usize)> {
    let mut p = start;
    let digits = |p: &mut usize| {
        let b = *p;
        while *p < s.len() && s[*p].is_ascii_digit() {
            *p += 1;
        }
        *p - b
    };
    let int_digits = digits(&mut p);
    let mut frac_digits = 0;
    if p < s.len() && s[p] == b'.' {
        p += 1;
        frac_digits = digits(&mut p);
    }
    if int_digits == 0 && frac_digits == 0 {
        return None;
    }
    if p < s.len() && (s[p] == b'e' || s[p] == b'E') {
        let mut q = p + 1;
        if q < s.len() && (s[q] == b'+' || s[q] == b'-') {
            q += 1;
        }
        let b = q;
        while q < s.len() && s[q].is_ascii_digit() {
            q += 1;
        }
        if q > b {
            p = q;
        }
    }
    let text = std::str::from_utf8(&s[start..p]).ok()?;
    text.parse::<f64>().ok().map(|x| (x, p))
}

struct ExprBuilder;

impl Builder for ExprBuilder {
    type Out = HoloExpr;
    fn constant(&mut self, v: Complex64) -> HoloExpr {
        HoloExpr::constant(v)
    }
    fn ident(&mut self, name: &str, offset: usize) -> Result<HoloExpr> {
        match name {
            "z" => Ok(HoloExpr::z()),
            "exp" | "sin" | "cos" => syntax(offset, format!("function '{name}' needs an argument")),
            _ => syntax(offset, format!("unknown identifier '{name}' (only z is a variable)")),
        }
    }
    fn call(&mut self, name: &str, arg: HoloExpr, offset: usize) -> Result<HoloExpr> {
        match name {
            "exp" => Ok(HoloExpr::exp(arg)),
            "sin" => Ok(HoloExpr::sin(arg)),
            "cos" => Ok(HoloExpr::cos(arg)),
            _ => syntax(offset, format!("unknown function '{name}'")),
        }
    }
    fn add(&mut self, a: HoloExpr, b: HoloExpr) -> HoloExpr {
        HoloExpr::raw_add(a, b)
    }
    fn sub(&mut self, a: HoloExpr, b: HoloExpr) -> HoloExpr {
        HoloExpr::raw_sub(a, b)
    }
    fn mul(&mut self, a: HoloExpr, b: HoloExpr) -> HoloExpr {
        HoloExpr::raw_mul(a, b)
    }
    fn pow(&mut self, a: HoloExpr, n: u32) -> HoloExpr {
        HoloExpr::raw_pow(a, n)
    }
    fn neg(&mut self, a: HoloExpr) -> HoloExpr {
        HoloExpr::raw_neg(a)
    }
}

/// Parse an entire-function expression in the variable `z`.
pub fn parse_expr(text: &str) -> Result<HoloExpr> {
    Parser::new(text, ExprBuilder).parse_all()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Node;
    use proptest::prelude::*;

    fn k(re: f64, im: f64) -> HoloExpr {
        HoloExpr::constant(Complex64::new(re, im))
    }

    #[test]
    fn exp_plus_one() {
        let e = parse_expr("exp(2*z)+1").unwrap();
        let want = HoloExpr::raw_add(
            HoloExpr::exp(HoloExpr::raw_mul(k(2.0, 0.0), HoloExpr::z())),
            k(1.0, 0.0),
        );
        assert_eq!(e, want);
    }

    #[test]
    fn cubic_with_complex_literal() {
        let e = parse_expr("z^3 - (1+2i)*z").unwrap();
        let want = HoloExpr::raw_sub(
            HoloExpr::raw_pow(HoloExpr::z(), 3),
            HoloExpr::raw_mul(k(1.0, 2.0), HoloExpr::z()),
        );
        assert_eq!(e, want);
    }

    #[test]
    fn division_rejected_with_offset() {
        assert_eq!(parse_expr("z/2"), Err(Error::DivisionRejected { offset: 1 }));
        let msg = parse_expr("z/2").unwrap_err().to_string();
        assert!(msg.contains("MeroFn"));
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        match parse_expr("exp(z") {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 5),
            other => panic!("{other:?}"),
        }
        match parse_expr("z + w") {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("{other:?}"),
        }
        assert!(parse_expr("z^-1").is_err());
        assert!(parse_expr("").is_err());
        assert!(parse_expr("log(z)").is_err());
    }

    #[test]
    fn imaginary_literal_and_whitespace() {
        let e = parse_expr("  2.5i *  z ").unwrap();
        assert_eq!(e, HoloExpr::raw_mul(k(0.0, 2.5), HoloExpr::z()));
        let e = parse_expr("1e-3*exp(z)").unwrap();
        assert!(matches!(e.node(), Node::Mul(..)));
    }

    #[test]
    fn unary_minus_binds_to_atom() {
        // '-' atom sits below '^' in the grammar
        let e = parse_expr("-z^2").unwrap();
        assert_eq!(e, HoloExpr::raw_pow(HoloExpr::raw_neg(HoloExpr::z()), 2));
    }

    fn arb_expr() -> impl Strategy<Value = HoloExpr> {
        let leaf = prop_oneof![
            Just(HoloExpr::z()),
            (-3.0f64..3.0, -3.0f64..3.0).prop_map(|(a, b)| k(a, b)),
            (0.0f64..5.0).prop_map(|a| k(a, 0.0)),
        ];
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| HoloExpr::raw_add(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| HoloExpr::raw_sub(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| HoloExpr::raw_mul(a, b)),
                (inner.clone(), 0u32..4).prop_map(|(a, n)| HoloExpr::raw_pow(a, n)),
                inner.clone().prop_map(HoloExpr::exp),
                inner.clone().prop_map(HoloExpr::sin),
                inner.clone().prop_map(HoloExpr::cos),
                inner.prop_map(HoloExpr::raw_neg),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_is_a_fixed_point(e in arb_expr()) {
            let printed = e.to_string();
            let once = parse_expr(&printed).unwrap();
            prop_assert_eq!(&once, &e);
            let twice = parse_expr(&once.to_string()).unwrap();
            prop_assert_eq!(twice, once);
        }
    }
}
