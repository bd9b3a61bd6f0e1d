use num_bigint::BigInt;
use num_rational::BigRational;

use super::{check_exp, PlanePoly};
use crate::error::{Error, Result};
use crate::field::{Field, FieldElement};

/// Parse `x`, `y`, `t`, integer literals, `+ - * / ^` and parentheses.
///
/// `/` only accepts a nonzero constant divisor; `^` takes a nonnegative
/// integer literal.
pub fn parse_poly(text: &str, field: &Field) -> Result<PlanePoly> {
    let mut p = Parser { src: text.as_bytes(), pos: 0, field };
    let out = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(out)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    field: &'a Field,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse { pos: self.pos, msg: msg.to_string() }
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

    fn expr(&mut self) -> Result<PlanePoly> {
        let mut acc = self.term()?;
        while let Some(c) = self.peek() {
            match c {
                b'+' => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                b'-' => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<PlanePoly> {
        let mut acc = self.unary()?;
        while let Some(c) = self.peek() {
            match c {
                b'*' => {
                    self.pos += 1;
                    acc = acc.mul(&self.unary()?)?;
                }
                b'/' => {
                    self.pos += 1;
                    let at = self.pos;
                    let d = self.unary()?;
                    if !d.is_constant() || d.is_zero() {
                        return Err(Error::Parse { pos: at, msg: "divisor must be a nonzero constant".into() });
                    }
                    acc = acc.scale(&d.constant_term().inv()?);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<PlanePoly> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(-&self.unary()?)
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<PlanePoly> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            let digits = self.digits();
            if digits.is_empty() {
                return Err(Error::Parse { pos: start, msg: "exponent must be a nonnegative integer literal".into() });
            }
            let e: u64 = digits.parse().unwrap_or(u64::MAX);
            let e = check_exp(e)?;
            return base.pow(e);
        }
        Ok(base)
    }

    fn digits(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn atom(&mut self) -> Result<PlanePoly> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(b'x') => {
                self.pos += 1;
                Ok(PlanePoly::x(self.field))
            }
            Some(b'y') => {
                self.pos += 1;
                Ok(PlanePoly::y(self.field))
            }
            Some(b't') => {
                let at = self.pos;
                self.pos += 1;
                let g = FieldElement::generator(self.field)
                    .map_err(|_| Error::Parse { pos: at, msg: "generator t used over Q".into() })?;
                Ok(PlanePoly::constant(g))
            }
            Some(c) if c.is_ascii_digit() => {
                let d = self.digits();
                let n: BigInt = d.parse().expect("digits");
                Ok(PlanePoly::constant(FieldElement::from_rational(self.field, BigRational::from_integer(n))))
            }
            Some(_) => Err(self.err("unexpected character")),
            None => Err(self.err("unexpected end of input")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldSpec;
    use crate::poly::Exp;

    #[test]
    fn simple_sum() {
        let q = FieldSpec::rationals();
        let p = parse_poly("x + y^3", &q).unwrap();
        assert_eq!(p.len(), 2);
        assert!(p.coeff(1, 0).is_one() && p.coeff(0, 3).is_one());
    }

    #[test]
    fn expansion_cancels() {
        let q = FieldSpec::rationals();
        let p = parse_poly("(x+y)^2 - x^2 - y^2", &q).unwrap();
        assert_eq!(p.terms().map(|(e, _)| e).collect::<Vec<_>>(), vec![Exp::new(1, 1)]);
        assert_eq!(p.coeff(1, 1), FieldElement::from_int(&q, 2));
    }

    #[test]
    fn generator_coefficient() {
        let k = FieldSpec::extension_i64(&[-2, 0, 1], None).unwrap();
        let p = parse_poly("t*x", &k).unwrap();
        assert_eq!(p.coeff(1, 0), FieldElement::generator(&k).unwrap());
        assert_eq!(p.len(), 1);
    }

    #[test]
    fn errors_carry_positions() {
        let q = FieldSpec::rationals();
        assert_eq!(parse_poly("x + * y", &q).unwrap_err(), Error::Parse { pos: 4, msg: "unexpected character".into() });
        assert!(matches!(parse_poly("x / y", &q), Err(Error::Parse { pos: 3, .. })));
        assert!(matches!(parse_poly("x^y", &q), Err(Error::Parse { .. })));
        assert!(matches!(parse_poly("t*x", &q), Err(Error::Parse { pos: 0, .. })));
        assert!(matches!(parse_poly("(x + 1", &q), Err(Error::Parse { .. })));
        assert!(matches!(parse_poly("x 2", &q), Err(Error::Parse { .. })));
    }

    #[test]
    fn rational_literals() {
        let q = FieldSpec::rationals();
        let p = parse_poly("-3/4*x^2 + 1/2", &q).unwrap();
        assert_eq!(p.coeff(2, 0), FieldElement::from_ratio(&q, -3, 4));
        assert_eq!(p.constant_term(), FieldElement::from_ratio(&q, 1, 2));
    }
}
