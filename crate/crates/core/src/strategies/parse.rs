//! Strategy expressions.
//!
//! ```text
//! expr   := term ('*' term)*                 composition, left-to-right product
//! term   := 'C' | 'D' | 'Q' | 'sx' | 'sy' | 'sz' | 'haar'
//!         | 'U' '(' num ',' num ')'           restricted family, radians
//!         | 'su2' '(' num ',' num ',' num ',' num ')'   top row re, im, re, im
//!         | 'mix' '(' num ':' expr (',' num ':' expr)* ')'
//!         | '(' expr ')'
//! num    := ('+' | '-')? atom (('*' | '/') atom)*
//! atom   := decimal literal | 'pi'
//! ```

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{ewl_unitary, EwlParams, Mixture, NamedStrategy, Strategy};
use crate::error::{Error, Result};
use crate::qmath::Unitary2;

/// Parses a strategy expression.
pub fn parse_strategy(expr: &str) -> Result<Strategy> {
    let mut p = Parser { src: expr, pos: 0 };
    let s = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(s)
}

/// Parses a bare numeric expression such as `pi/2` or `-0.25`.
pub fn parse_number(expr: &str) -> Result<f64> {
    let mut p = Parser { src: expr, pos: 0 };
    let x = p.num()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(x)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn error(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            position: self.pos,
            message: message.into(),
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(format!("expected '{c}'")))
        }
    }

    fn ident(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let len = self
            .rest()
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
            .unwrap_or(self.rest().len());
        if len == 0 || !self.rest().starts_with(|c: char| c.is_ascii_alphabetic()) {
            return None;
        }
        let id = &self.rest()[..len];
        self.pos += len;
        Some(id)
    }

    fn expr(&mut self) -> Result<Strategy> {
        let start = self.pos;
        let mut acc = self.term()?;
        while self.eat('*') {
            let rhs_pos = self.pos;
            let rhs = self.term()?;
            acc = match (acc, rhs) {
                (Strategy::Pure(a), Strategy::Pure(b)) => Strategy::Pure(a * b),
                _ => {
                    return Err(Error::Parse {
                        position: rhs_pos.max(start),
                        message: "composition requires pure moves".into(),
                    })
                }
            };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Strategy> {
        if self.eat('(') {
            let s = self.expr()?;
            self.expect(')')?;
            return Ok(s);
        }
        let start = {
            self.skip_ws();
            self.pos
        };
        let Some(id) = self.ident() else {
            return Err(self.error("expected a strategy"));
        };
        let named = |n: NamedStrategy| Ok(Strategy::Pure(n.unitary()));
        match id {
            "C" => named(NamedStrategy::C),
            "D" => named(NamedStrategy::D),
            "Q" => named(NamedStrategy::Q),
            "sx" => named(NamedStrategy::SX),
            "sy" => named(NamedStrategy::SY),
            "sz" => named(NamedStrategy::SZ),
            "haar" => Ok(Strategy::HaarRandom),
            "U" => {
                self.expect('(')?;
                let theta = self.num()?;
                self.expect(',')?;
                let phi = self.num()?;
                self.expect(')')?;
                Ok(Strategy::Pure(ewl_unitary(&EwlParams::new(theta, phi)?)))
            }
            "su2" => {
                self.expect('(')?;
                let mut v = [0.0; 4];
                for (k, x) in v.iter_mut().enumerate() {
                    if k > 0 {
                        self.expect(',')?;
                    }
                    *x = self.num()?;
                }
                self.expect(')')?;
                let u = Unitary2::from_top_row(Complex64::new(v[0], v[1]), Complex64::new(v[2], v[3]))?;
                Ok(Strategy::Pure(u))
            }
            "mix" => {
                self.expect('(')?;
                let mut components = Vec::new();
                loop {
                    let w = self.num()?;
                    self.expect(':')?;
                    let at = self.pos;
                    match self.expr()? {
                        Strategy::Pure(u) => components.push((w, u)),
                        _ => {
                            return Err(Error::Parse {
                                position: at,
                                message: "mixture components must be pure moves".into(),
                            })
                        }
                    }
                    if !self.eat(',') {
                        break;
                    }
                }
                self.expect(')')?;
                Ok(Strategy::Mixed(Mixture::new(components)?))
            }
            other => Err(Error::Parse {
                position: start,
                message: format!("unknown strategy '{other}'"),
            }),
        }
    }

    fn num(&mut self) -> Result<f64> {
        let neg = if self.eat('-') {
            true
        } else {
            self.eat('+');
            false
        };
        let mut x = self.atom()?;
        loop {
            if self.eat('*') {
                x *= self.atom()?;
            } else if self.eat('/') {
                x /= self.atom()?;
            } else {
                break;
            }
        }
        if !x.is_finite() {
            return Err(self.error("non-finite number"));
        }
        Ok(if neg { -x } else { x })
    }

    fn atom(&mut self) -> Result<f64> {
        self.skip_ws();
        if self.rest().starts_with("pi") {
            self.pos += 2;
            return Ok(PI);
        }
        let bytes = self.rest().as_bytes();
        let mut len = 0;
        while len < bytes.len() && (bytes[len].is_ascii_digit() || bytes[len] == b'.') {
            len += 1;
        }
        if len > 0 && len < bytes.len() && (bytes[len] == b'e' || bytes[len] == b'E') {
            let mut k = len + 1;
            if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                k += 1;
            }
            let digits = k;
            while k < bytes.len() && bytes[k].is_ascii_digit() {
                k += 1;
            }
            if k > digits {
                len = k;
            }
        }
        if len == 0 {
            return Err(self.error("expected a number"));
        }
        let text = &self.rest()[..len];
        let x = text
            .parse::<f64>()
            .map_err(|_| self.error(format!("malformed number '{text}'")))?;
        self.pos += len;
        Ok(x)
    }
}
