//! Reader for sums of symbol terms written in TeX notation, e.g.
//! `-4 \xi _1^5\xi _3 k^2 b_0^2 \delta _1 (k^2 )b_0^2 \delta _3 (k^2 ) b_0`.
//!
//! `δ_j(k²)` is expanded by the Leibniz rule, `δ_i(δ_j(k))` becomes a
//! second-order atom and a trailing `u^n` power is returned separately.

use crate::coeff::{qi, Q};
use crate::error::{Error, Result};
use crate::symbols::{Atom, Mono, MultiIndex, SymbolExpr, Word};
use std::collections::BTreeMap;

/// Terms keyed by u-power, each a symbol expression.
pub type UTerms = BTreeMap<u32, SymbolExpr>;

struct Cursor<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, lit: &str) -> bool {
        if self.s[self.pos..].starts_with(lit.as_bytes()) {
            self.pos += lit.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, lit: &str) -> Result<()> {
        if self.eat(lit) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{}`", lit)))
        }
    }

    fn error(&self, msg: &str) -> Error {
        let rest = String::from_utf8_lossy(&self.s[self.pos..(self.pos + 20).min(self.s.len())]).into_owned();
        Error::Parse(format!("{} at `{}`", msg, rest))
    }

    fn uint(&mut self) -> Result<i64> {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected a number"));
        }
        Ok(std::str::from_utf8(&self.s[start..self.pos]).unwrap().parse().unwrap())
    }

    /// `^n`, `^{n}` or `^{-n}`; 1 when absent.
    fn exponent(&mut self) -> Result<i64> {
        if !self.eat("^") {
            return Ok(1);
        }
        if self.eat("{") {
            let neg = self.eat("-");
            let n = self.uint()?;
            self.expect("}")?;
            Ok(if neg { -n } else { n })
        } else {
            // single digit exponent, as in ξ_1^5
            let d = self.peek().filter(u8::is_ascii_digit).ok_or_else(|| self.error("bad exponent"))?;
            self.pos += 1;
            Ok((d - b'0') as i64)
        }
    }

    fn direction(&mut self) -> Result<usize> {
        self.expect("_")?;
        let d = self.uint()? as usize;
        if !(1..=3).contains(&d) {
            return Err(self.error("direction out of range"));
        }
        Ok(d - 1)
    }
}

fn clean(src: &str) -> String {
    let s: String = src.replace("\\left", "").replace("\\right", "").replace("\\\\", "").chars().filter(|c| !c.is_whitespace() && *c != '&').collect();
    s.trim_end_matches('.').to_string()
}

/// Words produced by one `\delta_j(…)` factor.
fn delta_factor(c: &mut Cursor) -> Result<Vec<Word>> {
    let j = c.direction()?;
    c.expect("(")?;
    let out = if c.eat("\\delta") {
        let i = c.direction()?;
        c.expect("(k))")?;
        vec![Word::from_atoms([Atom::DK(MultiIndex::pair(i, j))])]
    } else if c.eat("k^2)") {
        let d = Atom::DK(MultiIndex::unit(j));
        vec![Word::from_atoms([d, Atom::KPow(1)]), Word::from_atoms([Atom::KPow(1), d])]
    } else {
        c.expect("k)")?;
        vec![Word::from_atoms([Atom::DK(MultiIndex::unit(j))])]
    };
    Ok(out)
}

/// Parses a signed sum of terms.
pub fn parse_terms(src: &str) -> Result<UTerms> {
    let text = clean(src);
    let mut c = Cursor { s: text.as_bytes(), pos: 0 };
    let mut out = UTerms::new();
    while c.peek().is_some() {
        let mut coeff = if c.eat("-") {
            qi(-1)
        } else {
            c.eat("+");
            qi(1)
        };
        if matches!(c.peek(), Some(b'0'..=b'9')) {
            coeff *= qi(c.uint()? as i128);
        } else if c.eat("\\frac") {
            let (n, d) = if c.eat("{") {
                let n = c.uint()?;
                c.expect("}{")?;
                let d = c.uint()?;
                c.expect("}")?;
                (n, d)
            } else {
                // \frac12
                let n = c.peek().ok_or_else(|| c.error("bad fraction"))?;
                let d = c.s.get(c.pos + 1).copied().ok_or_else(|| c.error("bad fraction"))?;
                c.pos += 2;
                ((n - b'0') as i64, (d - b'0') as i64)
            };
            coeff *= Q::new(n as i128, d as i128);
        }
        let mut xi: Mono = [0; 3];
        let mut upow = 0u32;
        let mut words = vec![Word::one()];
        loop {
            let factor: Vec<Word> = if c.eat("\\xi") {
                let j = c.direction()?;
                xi[j] += c.exponent()? as u8;
                continue;
            } else if c.eat("u") {
                upow += c.exponent()? as u32;
                continue;
            } else if c.eat("b_0") {
                vec![Word::from_atoms([Atom::B0(c.exponent()? as u32)])]
            } else if c.eat("\\delta") {
                delta_factor(&mut c)?
            } else if c.eat("k") {
                vec![Word::from_atoms([Atom::KPow(c.exponent()? as i32)])]
            } else {
                break;
            };
            words = words.iter().flat_map(|w| factor.iter().map(move |f| w.concat(f))).collect();
        }
        if !matches!(c.peek(), None | Some(b'+') | Some(b'-')) {
            return Err(c.error("unexpected input"));
        }
        let e = out.entry(upow).or_insert_with(SymbolExpr::zero);
        for w in words {
            e.add_term(coeff, xi, w);
        }
    }
    Ok(out)
}

/// Parses a sum with no u factors.
pub fn parse_symbol(src: &str) -> Result<SymbolExpr> {
    let mut t = parse_terms(src)?;
    if t.keys().any(|&p| p != 0) {
        return Err(Error::Parse("unexpected u factor".into()));
    }
    Ok(t.remove(&0).unwrap_or_else(SymbolExpr::zero))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leibniz_and_second_derivative() {
        let e = parse_symbol(r"-4 \xi _1^5\xi _3  k^2 b_0^2 \delta _1 (k^2 )b_0").unwrap();
        assert_eq!(e.len(), 2);
        let d = Atom::DK(MultiIndex::unit(0));
        let w = Word::from_atoms([Atom::KPow(2), Atom::B0(2), d, Atom::KPow(1), Atom::B0(1)]);
        assert_eq!(e.coefficient(&[5, 0, 1], &w), qi(-4));
        let f = parse_symbol(r"-  b_0 k \delta _1\left(\delta _1(k)\right) b_0").unwrap();
        let w = Word::from_atoms([Atom::B0(1), Atom::KPow(1), Atom::DK(MultiIndex::pair(0, 0)), Atom::B0(1)]);
        assert_eq!(f.coefficient(&[0, 0, 0], &w), qi(-1));
    }

    #[test]
    fn u_powers_and_fractions() {
        let t = parse_terms(r"+2 u^3 k^2 b_0 + \frac12 b_0 k^{-1} \delta_3(k) b_0 - u b_0").unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t[&3].len(), 1);
        let w = Word::from_atoms([Atom::B0(1), Atom::KPow(-1), Atom::DK(MultiIndex::unit(2)), Atom::B0(1)]);
        assert_eq!(t[&0].coefficient(&[0, 0, 0], &w), Q::new(1, 2));
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_terms(r"2 \xi_1 q").is_err());
    }
}
