//! One-pass recursive-descent parser for polynomial expressions.
//!
//! ```text
//! EXPR   := TERM (('+' | '-') TERM)*
//! TERM   := UNARY ('*' UNARY)*
//! UNARY  := ('-' | '+') UNARY | FACTOR
//! FACTOR := RATIONAL | VAR ('^' NAT)? | '(' EXPR ')'
//! ```
//!
//! `RATIONAL` is `NAT` or `NAT/NAT`. Exponents apply to variables only.

use num_bigint::BigInt;
use num_traits::Zero;

use super::{Poly, Rational};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown variable `{name}` at byte {offset}")]
    UnknownVariable { offset: usize, name: String },
}

pub fn parse_poly(text: &str, vars: &[&str]) -> Result<Poly, ParseError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        vars,
    };
    let out = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.syntax(format!("unexpected `{}`", p.src[p.pos] as char)));
    }
    Ok(out)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    vars: &'a [&'a str],
}

impl Parser<'_> {
    fn arity(&self) -> usize {
        self.vars.len()
    }

    fn syntax(&self, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            offset: self.pos,
            message: message.into(),
        }
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

    fn expr(&mut self) -> Result<Poly, ParseError> {
        let mut acc = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if c == b'+' { &acc + &rhs } else { &acc - &rhs };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Poly, ParseError> {
        let mut acc = self.unary()?;
        while let Some(b'*') = self.peek() {
            self.pos += 1;
            let rhs = self.unary()?;
            acc = &acc * &rhs;
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Poly, ParseError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.factor(),
        }
    }

    fn factor(&mut self) -> Result<Poly, ParseError> {
        match self.peek() {
            None => Err(self.syntax("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.syntax("expected `)`"));
                }
                self.pos += 1;
                if self.peek() == Some(b'^') {
                    return Err(self.syntax("exponent on a parenthesized group is not supported"));
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => {
                let num = self.nat()?;
                let value = if self.peek() == Some(b'/') {
                    self.pos += 1;
                    if !matches!(self.peek(), Some(d) if d.is_ascii_digit()) {
                        return Err(self.syntax("expected denominator"));
                    }
                    let den = self.nat()?;
                    if den.is_zero() {
                        return Err(self.syntax("zero denominator"));
                    }
                    Rational::new(num, den)
                } else {
                    Rational::from_integer(num)
                };
                if self.peek() == Some(b'^') {
                    return Err(self.syntax("exponent on a number is not supported"));
                }
                Ok(Poly::constant(self.arity(), value))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                let index = self
                    .vars
                    .iter()
                    .position(|v| *v == name)
                    .ok_or_else(|| ParseError::UnknownVariable {
                        offset: start,
                        name: name.to_string(),
                    })?;
                let mut exp = 1u32;
                if self.peek() == Some(b'^') {
                    self.pos += 1;
                    if !matches!(self.peek(), Some(d) if d.is_ascii_digit()) {
                        return Err(self.syntax("expected a natural exponent"));
                    }
                    let e = self.nat()?;
                    exp = u32::try_from(e).map_err(|_| self.syntax("exponent too large"))?;
                }
                let mut exps = vec![0; self.arity()];
                exps[index] = exp;
                Ok(Poly::monomial(self.arity(), exps, Rational::from_integer(1.into())))
            }
            Some(c) => Err(self.syntax(format!("unexpected `{}`", c as char))),
        }
    }

    fn nat(&mut self) -> Result<BigInt, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.syntax("expected digits"));
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        Ok(digits.parse().expect("ascii digits"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat;

    const V3: [&str; 3] = ["x1", "x2", "x3"];

    #[test]
    fn term_collection() {
        let p = parse_poly("x1^2*x2 - 3/2*x3", &V3).unwrap();
        assert_eq!(p.num_terms(), 2);
        assert_eq!(p.coefficient(&[2, 1, 0]), rat(1, 1));
        assert_eq!(p.coefficient(&[0, 0, 1]), rat(-3, 2));
    }

    #[test]
    fn zero_and_unary_minus() {
        assert!(parse_poly("0", &V3).unwrap().is_zero());
        assert!(parse_poly("x1 - x1", &V3).unwrap().is_zero());
        let p = parse_poly("-(x1 - -x2)", &V3).unwrap();
        assert_eq!(p, parse_poly("-x1 - x2", &V3).unwrap());
    }

    #[test]
    fn grouped_exponent_is_rejected() {
        let err = parse_poly("(x+y)^2", &["x", "y"]).unwrap_err();
        assert!(matches!(err, ParseError::Syntax { offset: 5, .. }), "{err:?}");
    }

    #[test]
    fn errors_carry_offsets() {
        assert_eq!(
            parse_poly("x1 + z", &V3).unwrap_err(),
            ParseError::UnknownVariable {
                offset: 5,
                name: "z".into()
            }
        );
        assert!(matches!(
            parse_poly("x1 + ", &V3),
            Err(ParseError::Syntax { offset: 5, .. })
        ));
        assert!(matches!(
            parse_poly("x1 ** 2", &V3),
            Err(ParseError::Syntax { offset: 4, .. })
        ));
        assert!(matches!(parse_poly("1/0", &V3), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse_poly("(x1", &V3), Err(ParseError::Syntax { .. })));
    }
}
