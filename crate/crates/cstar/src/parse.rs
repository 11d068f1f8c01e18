//! Parser for the one-line map grammar:
//!
//! ```text
//! map  := "arnold(" float "," float ")"
//!       | "n=" int "; g=" poly "; h=" poly
//! poly := "0" | [sign] term (sign term)*
//! term := float var ("^" uint)?          -- var is z in g, w in h
//! ```
//!
//! Constant terms are rejected, signs may be ASCII `-` or U+2212, and
//! whitespace is allowed between tokens. Parsed maps carry their canonical
//! spec string as label, so `parse(format(m))` reproduces `m` field by field.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::map::CStarMap;

struct Cursor<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str) -> Self {
        Cursor {
            src,
            bytes: src.as_bytes(),
            pos: 0,
        }
    }

    fn err<T>(&self, reason: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            pos: self.pos,
            reason: reason.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && (self.bytes[self.pos] as char).is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<()> {
        if self.eat(token) {
            Ok(())
        } else {
            self.err(format!("expected `{token}`"))
        }
    }

    /// Minus sign, ASCII or U+2212.
    fn eat_minus(&mut self) -> bool {
        self.eat("-") || self.eat("\u{2212}")
    }

    fn parse_f64(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        let neg = self.eat_minus();
        if !neg {
            let _ = self.eat("+");
        }
        let digits_start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        if self.peek() == Some(b'.') {
            self.pos += 1;
            while matches!(self.peek(), Some(b'0'..=b'9')) {
                self.pos += 1;
            }
        }
        if self.pos == digits_start {
            self.pos = start;
            return self.err("expected a number");
        }
        if matches!(self.peek(), Some(b'e') | Some(b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some(b'+') | Some(b'-')) {
                self.pos += 1;
            }
            if matches!(self.peek(), Some(b'0'..=b'9')) {
                while matches!(self.peek(), Some(b'0'..=b'9')) {
                    self.pos += 1;
                }
            } else {
                self.pos = mark;
            }
        }
        let text = &self.src[digits_start..self.pos];
        match text.parse::<f64>() {
            Ok(v) => Ok(if neg { -v } else { v }),
            Err(_) => self.err(format!("invalid number `{text}`")),
        }
    }

    fn parse_i32(&mut self) -> Result<i32> {
        self.skip_ws();
        let neg = self.eat_minus();
        if !neg {
            let _ = self.eat("+");
        }
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        if self.pos == start {
            return self.err("expected an integer");
        }
        let text = &self.src[start..self.pos];
        match text.parse::<i32>() {
            Ok(v) => Ok(if neg { -v } else { v }),
            Err(_) => self.err(format!("integer `{text}` out of range")),
        }
    }

    fn parse_usize(&mut self) -> Result<usize> {
        self.skip_ws();
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        if self.pos == start {
            return self.err("expected an exponent");
        }
        self.src[start..self.pos]
            .parse::<usize>()
            .map_err(|_| Error::Parse {
                pos: start,
                reason: "exponent out of range".into(),
            })
    }

    /// Polynomial without constant term in the given variable.
    fn parse_poly(&mut self, var: char) -> Result<Vec<Complex64>> {
        self.skip_ws();
        // A literal 0 stands for the empty polynomial; the non-constant
        // check downstream rejects it with a clearer message than a raw
        // syntax error would give.
        if self.eat("0") {
            let next = {
                self.skip_ws();
                self.peek()
            };
            if !matches!(next, Some(b'.') | Some(b'0'..=b'9')) && next != Some(var as u8) {
                return Ok(Vec::new());
            }
            self.pos -= 1;
        }
        let mut coeffs: Vec<Complex64> = Vec::new();
        let mut first = true;
        loop {
            self.skip_ws();
            let sign = if self.eat_minus() {
                -1.0
            } else if self.eat("+") {
                1.0
            } else if first {
                1.0
            } else {
                break;
            };
            first = false;
            let coeff = sign * self.parse_f64()?;
            self.skip_ws();
            if self.peek() != Some(var as u8) {
                return self.err(format!(
                    "constant terms are not permitted; expected `{var}` after coefficient"
                ));
            }
            self.pos += 1;
            let degree = if self.eat("^") {
                let d = self.parse_usize()?;
                if d == 0 {
                    return self.err("exponent 0 would be a constant term");
                }
                d
            } else {
                1
            };
            if coeffs.len() < degree {
                coeffs.resize(degree, Complex64::new(0.0, 0.0));
            }
            coeffs[degree - 1] += Complex64::new(coeff, 0.0);
        }
        while coeffs.last().map_or(false, |c| c.norm_sqr() == 0.0) {
            coeffs.pop();
        }
        Ok(coeffs)
    }
}

/// Parse a map spec string.
pub fn parse_map(spec: &str) -> Result<CStarMap> {
    let mut cur = Cursor::new(spec);
    cur.skip_ws();
    let map = if cur.eat("arnold") {
        cur.expect("(")?;
        let alpha = cur.parse_f64()?;
        cur.expect(",")?;
        let beta = cur.parse_f64()?;
        cur.expect(")")?;
        CStarMap::arnold(alpha, beta).map_err(|e| Error::Parse {
            pos: cur.pos,
            reason: e.to_string(),
        })?
    } else {
        cur.expect("n=")?;
        let n = cur.parse_i32()?;
        cur.expect(";")?;
        cur.expect("g=")?;
        let g = cur.parse_poly('z')?;
        cur.expect(";")?;
        cur.expect("h=")?;
        let h = cur.parse_poly('w')?;
        let mut map = CStarMap::new(n, 0.0, g, h, "").map_err(|e| Error::Parse {
            pos: cur.pos,
            reason: e.to_string(),
        })?;
        map.label = map.canonical_spec().unwrap_or_else(|| spec.trim().to_string());
        map
    };
    cur.skip_ws();
    if cur.pos != cur.bytes.len() {
        return cur.err("unexpected trailing input");
    }
    Ok(map)
}

/// Canonical spec string of a map; errors when the map cannot be expressed
/// in the grammar (complex coefficients or a non-trivial rotation outside
/// the Arnol'd family).
pub fn format_map(map: &CStarMap) -> Result<String> {
    map.canonical_spec().ok_or_else(|| {
        Error::InvalidParameter("map is not expressible in the spec grammar".into())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_test_map() {
        let map = parse_map("n=0; g=1z; h=-1w").unwrap();
        assert_eq!(map.index_n, 0);
        assert_eq!(map.g_coeffs, vec![Complex64::new(1.0, 0.0)]);
        assert_eq!(map.h_coeffs, vec![Complex64::new(-1.0, 0.0)]);
        assert_eq!(map.rot_angle, 0.0);
    }

    #[test]
    fn parses_arnold_shortcut() {
        let map = parse_map("arnold(0.5, 1.2)").unwrap();
        let direct = CStarMap::arnold(0.5, 1.2).unwrap();
        assert_eq!(map, direct);
    }

    #[test]
    fn rejects_constant_g() {
        let err = parse_map("n=2; g=0; h=1w").unwrap_err();
        match err {
            Error::Parse { reason, .. } => assert!(reason.contains("non-constant"), "{reason}"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn rejects_constant_terms() {
        assert!(parse_map("n=0; g=1z+2; h=-1w").is_err());
        assert!(parse_map("n=0; g=1z^0; h=-1w").is_err());
    }

    #[test]
    fn round_trips_corpus() {
        let corpus = [
            "n=0; g=1z; h=-1w",
            "arnold(0.5, 1.2)",
            "arnold(0, 2)",
            "n=2; g=0.5z^3-1z; h=2w^2",
            "n=-2; g=1z; h=-1w",
            "n=0; g=1z^2; h=-1w^2",
        ];
        for spec in corpus {
            let map = parse_map(spec).unwrap();
            let canonical = format_map(&map).unwrap();
            let reparsed = parse_map(&canonical).unwrap();
            assert_eq!(map, reparsed, "spec `{spec}` via `{canonical}`");
        }
    }

    #[test]
    fn accepts_unicode_minus() {
        let a = parse_map("n=0; g=1z; h=\u{2212}1w").unwrap();
        let b = parse_map("n=0; g=1z; h=-1w").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn reports_position() {
        let err = parse_map("n=0; g=1z; h=1q").unwrap_err();
        match err {
            Error::Parse { pos, .. } => assert!(pos >= 13, "pos {pos}"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn rejects_trailing_garbage() {
        assert!(parse_map("arnold(0.5, 1.2) extra").is_err());
    }
}
