//! Parser for generator strings such as `s1^2 - s2` or `2*s1*s2 + s2^3`.
//!
//! Variables are `s1 .. sl`; a bare `s` means `s1`. Products may be written
//! with `*` or by juxtaposition, powers with `^`, and parentheses group.

use super::{MultiIndex, TruncatedPoly, WeilError};

/// Parses a polynomial in `nvars` variables, truncated below `order`.
pub fn parse_poly(src: &str, nvars: usize, order: usize) -> Result<TruncatedPoly, WeilError> {
    let mut p = Parser {
        src: src.as_bytes(),
        pos: 0,
        nvars,
        order,
    };
    p.skip_ws();
    if p.at_end() {
        return Err(p.err("empty polynomial"));
    }
    let poly = p.expr()?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(poly)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    nvars: usize,
    order: usize,
}

impl Parser<'_> {
    fn err(&self, message: &str) -> WeilError {
        WeilError::Parse {
            pos: self.pos,
            message: message.to_string(),
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn expr(&mut self) -> Result<TruncatedPoly, WeilError> {
        self.skip_ws();
        let mut sign = 1.0;
        if let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            if c == b'-' {
                sign = -1.0;
            }
        }
        let mut acc = self.term()?.scale(sign);
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<TruncatedPoly, WeilError> {
        let mut acc = self.factor()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = acc.mul(&self.factor()?);
                }
                Some(c) if c == b'(' || c == b's' || c.is_ascii_digit() || c == b'.' => {
                    acc = acc.mul(&self.factor()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<TruncatedPoly, WeilError> {
        self.skip_ws();
        let base = match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.skip_ws();
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                e
            }
            Some(b's') => {
                self.pos += 1;
                let start = self.pos;
                while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    self.pos += 1;
                }
                let idx = if start == self.pos {
                    1
                } else {
                    std::str::from_utf8(&self.src[start..self.pos])
                        .ok()
                        .and_then(|s| s.parse::<usize>().ok())
                        .ok_or_else(|| self.err("bad variable index"))?
                };
                if idx == 0 || idx > self.nvars {
                    self.pos = start;
                    return Err(self.err(&format!("variable s{idx} out of range 1..={}", self.nvars)));
                }
                TruncatedPoly::monomial(MultiIndex::unit(self.nvars, idx - 1), self.order, 1.0)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let start = self.pos;
                while matches!(self.peek(), Some(c) if c.is_ascii_digit() || c == b'.') {
                    self.pos += 1;
                }
                if matches!(self.peek(), Some(b'e' | b'E')) {
                    self.pos += 1;
                    if matches!(self.peek(), Some(b'+' | b'-')) {
                        self.pos += 1;
                    }
                    while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                        self.pos += 1;
                    }
                }
                let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
                let v: f64 = text.parse().map_err(|_| {
                    WeilError::Parse {
                        pos: start,
                        message: format!("bad number '{text}'"),
                    }
                })?;
                TruncatedPoly::constant(self.nvars, self.order, v)
            }
            Some(_) => return Err(self.err("expected a number, variable or '('")),
            None => return Err(self.err("unexpected end of input")),
        };
        self.skip_ws();
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.pos += 1;
            }
            let n: u32 = std::str::from_utf8(&self.src[start..self.pos])
                .ok()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| self.err("expected a non-negative integer exponent"))?;
            let mut acc = TruncatedPoly::constant(self.nvars, self.order, 1.0);
            for _ in 0..n {
                acc = acc.mul(&base);
            }
            return Ok(acc);
        }
        Ok(base)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_parabola_generator() {
        let p = parse_poly("s1^2-s2", 2, 3).unwrap();
        assert_eq!(p.get(&MultiIndex::new(vec![2, 0])), 1.0);
        assert_eq!(p.get(&MultiIndex::new(vec![0, 1])), -1.0);
    }

    #[test]
    fn implicit_products_and_groups() {
        let p = parse_poly("2s1 s2 + (s1 - s2)^2", 2, 5).unwrap();
        assert_eq!(p.get(&MultiIndex::new(vec![1, 1])), 0.0);
        assert_eq!(p.get(&MultiIndex::new(vec![2, 0])), 1.0);
        let q = parse_poly("-0.5e1*s^3", 1, 5).unwrap();
        assert_eq!(q.get(&MultiIndex::new(vec![3])), -5.0);
    }

    #[test]
    fn malformed_inputs() {
        for bad in ["", "s1^", "s3", "s1 +", "(s1", "s1 # 2", "x1"] {
            assert!(
                matches!(parse_poly(bad, 2, 3), Err(WeilError::Parse { .. })),
                "{bad:?} should not parse"
            );
        }
    }
}
