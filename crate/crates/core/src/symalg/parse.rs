//! Text syntax for words and sums.
//!
//! ```text
//! sum     := ['+' | '-'] product (('+' | '-') product)*
//! product := power (['*'] power)*          juxtaposition multiplies
//! power   := atom ['^' integer]
//! atom    := generator | number | 'i' | phase | '(' sum ')'
//! generator := 'V' digits ['*']            star written directly after the digits
//! number  := digits ['.' digits] ['i']
//! phase   := 'w(' ['-'] digits '/' digits ')'   meaning e^{2πi p/q}
//! ```
//!
//! A `*` immediately after a generator is its adjoint; anywhere else it is
//! multiplication. Generators are numbered from 1.

use num_rational::Ratio;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::phase::{Phase, Rational, StructureConstants};
use crate::scalar::Scalar;

use super::monomial::Letter;
use super::sum::FormalSum;

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Gen(Letter),
    Number { value: Rational, imaginary: bool },
    Phase(Phase),
    Plus,
    Minus,
    Times,
    Caret,
    Open,
    Close,
}

#[derive(Debug, Clone)]
struct Spanned {
    token: Token,
    column: usize,
}

fn err(column: usize, message: impl Into<String>) -> Error {
    Error::Parse { column, message: message.into() }
}

fn lex(src: &str, n: usize) -> Result<Vec<Spanned>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut pos = 0;
    let digits = |pos: &mut usize| {
        let start = *pos;
        while *pos < chars.len() && chars[*pos].is_ascii_digit() {
            *pos += 1;
        }
        chars[start..*pos].iter().collect::<String>()
    };
    while pos < chars.len() {
        let c = chars[pos];
        let column = pos + 1;
        if c.is_whitespace() {
            pos += 1;
            continue;
        }
        let token = match c {
            '+' => {
                pos += 1;
                Token::Plus
            }
            '-' => {
                pos += 1;
                Token::Minus
            }
            '*' | '·' => {
                pos += 1;
                Token::Times
            }
            '^' => {
                pos += 1;
                Token::Caret
            }
            '(' => {
                pos += 1;
                Token::Open
            }
            ')' => {
                pos += 1;
                Token::Close
            }
            'V' => {
                pos += 1;
                let d = digits(&mut pos);
                let k: usize = d.parse().map_err(|_| err(column, "expected generator number after 'V'"))?;
                if k == 0 || k > n {
                    return Err(err(column, format!("generator V{k} out of range 1..={n}")));
                }
                let starred = pos < chars.len() && chars[pos] == '*';
                if starred {
                    pos += 1;
                }
                Token::Gen(Letter { index: k - 1, starred })
            }
            'w' => {
                pos += 1;
                if pos >= chars.len() || chars[pos] != '(' {
                    return Err(err(column, "expected '(' after 'w'"));
                }
                pos += 1;
                let negative = pos < chars.len() && chars[pos] == '-';
                if negative {
                    pos += 1;
                }
                let p: i64 = digits(&mut pos).parse().map_err(|_| err(pos + 1, "expected numerator"))?;
                if pos >= chars.len() || chars[pos] != '/' {
                    return Err(err(pos + 1, "expected '/' in phase literal"));
                }
                pos += 1;
                let q: i64 = digits(&mut pos).parse().map_err(|_| err(pos + 1, "expected denominator"))?;
                if q == 0 {
                    return Err(err(column, "phase denominator must be non-zero"));
                }
                if pos >= chars.len() || chars[pos] != ')' {
                    return Err(err(pos + 1, "expected ')' closing phase literal"));
                }
                pos += 1;
                Token::Phase(Phase::turns(if negative { -p } else { p }, q))
            }
            'i' => {
                pos += 1;
                Token::Number { value: Rational::one(), imaginary: true }
            }
            c if c.is_ascii_digit() => {
                let int = digits(&mut pos);
                let mut value = Rational::from_integer(
                    int.parse::<i64>().map_err(|_| err(column, "number too large"))?,
                );
                if pos < chars.len() && chars[pos] == '.' {
                    pos += 1;
                    let frac = digits(&mut pos);
                    if frac.is_empty() {
                        return Err(err(pos + 1, "expected digits after '.'"));
                    }
                    if frac.len() > 15 {
                        return Err(err(column, "too many decimal digits"));
                    }
                    let num: i64 = frac.parse().unwrap();
                    value += Ratio::new(num, 10i64.pow(frac.len() as u32));
                }
                let imaginary = pos < chars.len() && chars[pos] == 'i';
                if imaginary {
                    pos += 1;
                }
                Token::Number { value, imaginary }
            }
            other => return Err(err(column, format!("unexpected character '{other}'"))),
        };
        out.push(Spanned { token, column });
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Spanned>,
    pos: usize,
    end_column: usize,
    n: usize,
    zc: &'a StructureConstants,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|s| &s.token)
    }

    fn column(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end_column, |s| s.column)
    }

    fn sum(&mut self) -> Result<FormalSum> {
        let mut negate = false;
        match self.peek() {
            Some(Token::Minus) => {
                negate = true;
                self.pos += 1;
            }
            Some(Token::Plus) => self.pos += 1,
            _ => {}
        }
        let mut acc = self.product()?;
        if negate {
            acc = acc.scale(&Scalar::from_int(-1));
        }
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.pos += 1;
                    acc = acc.add(&self.product()?);
                }
                Some(Token::Minus) => {
                    self.pos += 1;
                    acc = acc.sub(&self.product()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn starts_atom(&self) -> bool {
        matches!(
            self.peek(),
            Some(Token::Gen(_) | Token::Number { .. } | Token::Phase(_) | Token::Open)
        )
    }

    fn product(&mut self) -> Result<FormalSum> {
        let mut acc = self.power()?;
        loop {
            if self.peek() == Some(&Token::Times) {
                self.pos += 1;
                acc = acc.mul(&self.power()?, self.zc);
            } else if self.starts_atom() {
                acc = acc.mul(&self.power()?, self.zc);
            } else {
                return Ok(acc);
            }
        }
    }

    fn power(&mut self) -> Result<FormalSum> {
        let base = self.atom()?;
        if self.peek() != Some(&Token::Caret) {
            return Ok(base);
        }
        self.pos += 1;
        let column = self.column();
        match self.peek() {
            Some(Token::Number { value, imaginary: false }) if value.is_integer() && *value >= Rational::zero() => {
                let k = value.to_integer();
                if k > 64 {
                    return Err(err(column, "exponent above 64"));
                }
                self.pos += 1;
                Ok(base.pow(k as u32, self.zc))
            }
            _ => Err(err(column, "expected a non-negative integer exponent")),
        }
    }

    fn atom(&mut self) -> Result<FormalSum> {
        let column = self.column();
        let token = self.peek().cloned().ok_or_else(|| err(column, "unexpected end of input"))?;
        self.pos += 1;
        match token {
            Token::Gen(l) => Ok(FormalSum::letter(self.n, l)),
            Token::Number { value, imaginary } => {
                let mut c = Scalar::from_rational(value);
                if imaginary {
                    c = c * Phase::turns(1, 4);
                }
                Ok(FormalSum::scalar(self.n, c))
            }
            Token::Phase(p) => Ok(FormalSum::scalar(self.n, Scalar::from_phase(p))),
            Token::Open => {
                let inner = self.sum()?;
                if self.peek() != Some(&Token::Close) {
                    return Err(err(self.column(), "expected ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            other => Err(err(column, format!("unexpected token {other:?}"))),
        }
    }
}

/// Parses and canonicalizes an expression over the generators of `zc`.
pub fn parse_expression(src: &str, zc: &StructureConstants) -> Result<FormalSum> {
    let n = zc.n();
    let tokens = lex(src, n)?;
    if tokens.is_empty() {
        return Err(err(1, "empty expression"));
    }
    let mut p = Parser { tokens, pos: 0, end_column: src.chars().count() + 1, n, zc };
    let s = p.sum()?;
    if p.pos < p.tokens.len() {
        return Err(err(p.column(), "unexpected trailing input"));
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symalg::verify_identity;

    fn zc_i() -> StructureConstants {
        StructureConstants::new(2, &[(0, 1, Phase::turns(1, 4))]).unwrap()
    }

    #[test]
    fn word_reduces() {
        let s = parse_expression("V1* V2", &zc_i()).unwrap();
        assert_eq!(s.to_string(), "w(3/4) · V2 V1*");
    }

    #[test]
    fn product_of_defects() {
        let zc = zc_i();
        let s = parse_expression("(1 - V1 V1*) * (1 - V2 V2*)", &zc).unwrap();
        let t = parse_expression("1 - V1 V1* - V2 V2* + V1 V1* V2 V2*", &zc).unwrap();
        assert!(verify_identity(&s, &t));
    }

    #[test]
    fn scalars_and_phases() {
        let zc = zc_i();
        let a = parse_expression("2+3i", &zc).unwrap();
        let b = parse_expression("2 + 3 w(1/4)", &zc).unwrap();
        assert!(verify_identity(&a, &b));
        let c = parse_expression("w(-1/4) * i", &zc).unwrap();
        assert!(verify_identity(&c, &FormalSum::one(2)));
        let d = parse_expression("0.5 + 0.5", &zc).unwrap();
        assert!(verify_identity(&d, &FormalSum::one(2)));
    }

    #[test]
    fn powers_round_trip() {
        let zc = zc_i();
        let s = parse_expression("V1*^2 V1^3", &zc).unwrap();
        assert_eq!(s.to_string(), "V1");
        let t = parse_expression("V2^2 V1*^2", &zc).unwrap();
        let u = parse_expression(&t.to_string(), &zc).unwrap();
        assert!(verify_identity(&t, &u));
    }

    #[test]
    fn errors_carry_columns() {
        let zc = zc_i();
        assert_eq!(
            parse_expression("V1 + V3", &zc),
            Err(Error::Parse { column: 6, message: "generator V3 out of range 1..=2".into() })
        );
        assert!(matches!(parse_expression("(V1", &zc), Err(Error::Parse { column: 4, .. })));
        assert!(matches!(parse_expression("V1 $", &zc), Err(Error::Parse { column: 4, .. })));
        assert!(matches!(parse_expression("", &zc), Err(Error::Parse { .. })));
        assert!(matches!(parse_expression("w(1/0)", &zc), Err(Error::Parse { .. })));
    }
}
