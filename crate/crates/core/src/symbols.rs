//! Noncommutative symbol algebra with exact rational coefficients.
//!
//! Words are products of atoms built from the positive generator `k`: powers of
//! `k`, derivatives `δ^α(k)`, powers of the formal resolvent `b₀`, and (after
//! translation) derivatives of `log k`. The symbol variables ξ commute with
//! everything and are kept as a separate monomial.

use crate::coeff::{qi, Q};
use crate::error::{Error, Result};
use crate::metric::MetricDescriptor;
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Multi-index over directions 1..=3 (stored 0-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(pub [u8; 3]);

impl MultiIndex {
    pub fn unit(j: usize) -> Self {
        let mut a = [0u8; 3];
        a[j] = 1;
        MultiIndex(a)
    }

    pub fn pair(i: usize, j: usize) -> Self {
        let mut a = [0u8; 3];
        a[i] += 1;
        a[j] += 1;
        MultiIndex(a)
    }

    pub fn order(&self) -> u8 {
        self.0.iter().sum()
    }

    /// Directions in increasing order, with repetition.
    pub fn directions(&self) -> Vec<usize> {
        let mut v = Vec::new();
        for (j, &c) in self.0.iter().enumerate() {
            for _ in 0..c {
                v.push(j);
            }
        }
        v
    }

    pub fn plus(&self, j: usize) -> Self {
        let mut a = self.0;
        a[j] += 1;
        MultiIndex(a)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (j, &c) in self.0.iter().enumerate() {
            match c {
                0 => {}
                1 => write!(f, "δ{}", sub(j + 1))?,
                c => write!(f, "δ{}{}", sub(j + 1), sup(c as i64))?,
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    KPow(i32),
    DK(MultiIndex),
    B0(u32),
    B0u(u32),
    DLogK(MultiIndex),
}

impl Atom {
    /// Atoms that are functions of `k` and commute with each other.
    pub fn is_k_function(&self) -> bool {
        matches!(self, Atom::KPow(_) | Atom::B0(_) | Atom::B0u(_))
    }
}

/// Canonical ordered product of atoms.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(pub Vec<Atom>);

impl Word {
    pub fn one() -> Self {
        Word(Vec::new())
    }

    pub fn from_atoms(atoms: impl IntoIterator<Item = Atom>) -> Self {
        let mut w = Word::one();
        for a in atoms {
            w.push(a);
        }
        w
    }

    pub fn kpow(r: i32) -> Self {
        Word::from_atoms([Atom::KPow(r)])
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Appends an atom, keeping the word canonical.
    pub fn push(&mut self, a: Atom) {
        match a {
            Atom::KPow(0) | Atom::B0(0) | Atom::B0u(0) => {}
            Atom::KPow(r) => {
                // KPow goes before the B0-type atoms of the trailing run
                let mut pos = self.0.len();
                while pos > 0 && matches!(self.0[pos - 1], Atom::B0(_) | Atom::B0u(_)) {
                    pos -= 1;
                }
                if pos > 0 {
                    if let Atom::KPow(s) = self.0[pos - 1] {
                        if s + r == 0 {
                            self.0.remove(pos - 1);
                        } else {
                            self.0[pos - 1] = Atom::KPow(s + r);
                        }
                        return;
                    }
                }
                self.0.insert(pos, Atom::KPow(r));
            }
            Atom::B0(m) => match self.0.last_mut() {
                Some(Atom::B0(n)) => *n += m,
                _ => self.0.push(a),
            },
            Atom::B0u(m) => match self.0.last_mut() {
                Some(Atom::B0u(n)) => *n += m,
                _ => self.0.push(a),
            },
            _ => self.0.push(a),
        }
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut w = self.clone();
        for &a in &other.0 {
            w.push(a);
        }
        w
    }

    /// Number of `b₀` factors (either stage).
    pub fn b0_count(&self) -> u32 {
        self.0
            .iter()
            .map(|a| match a {
                Atom::B0(m) | Atom::B0u(m) => *m,
                _ => 0,
            })
            .sum()
    }

    /// Total number of derivations applied to `k` in the word.
    pub fn derivative_count(&self) -> u32 {
        self.0
            .iter()
            .map(|a| match a {
                Atom::DK(al) | Atom::DLogK(al) => al.order() as u32,
                _ => 0,
            })
            .sum()
    }

    /// Total `k`-degree, counting `δ^α(k)` as degree one.
    pub fn k_degree(&self) -> i32 {
        self.0
            .iter()
            .map(|a| match a {
                Atom::KPow(r) => *r,
                Atom::DK(_) => 1,
                _ => 0,
            })
            .sum()
    }
}

/// Exponents of ξ₁..ξ₃.
pub type Mono = [u8; 3];

pub fn mono_mul(a: &Mono, b: &Mono) -> Mono {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn mono_degree(a: &Mono) -> u32 {
    a.iter().map(|&x| x as u32).sum()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub coeff: Q,
    pub xi: Mono,
    pub word: Word,
}

/// Sum of terms, kept sorted with like terms combined.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SymbolExpr {
    terms: BTreeMap<(Mono, Word), Q>,
}

impl SymbolExpr {
    pub fn zero() -> Self {
        SymbolExpr::default()
    }

    pub fn one() -> Self {
        Self::term(Q::one(), [0; 3], Word::one())
    }

    pub fn constant(c: Q) -> Self {
        Self::term(c, [0; 3], Word::one())
    }

    pub fn term(coeff: Q, xi: Mono, word: Word) -> Self {
        let mut e = SymbolExpr::zero();
        e.add_term(coeff, xi, word);
        e
    }

    pub fn word(w: Word) -> Self {
        Self::term(Q::one(), [0; 3], w)
    }

    pub fn atom(a: Atom) -> Self {
        Self::word(Word::from_atoms([a]))
    }

    pub fn kpow(r: i32) -> Self {
        Self::word(Word::kpow(r))
    }

    pub fn xi(j: usize) -> Self {
        let mut m = [0; 3];
        m[j] = 1;
        Self::term(Q::one(), m, Word::one())
    }

    pub fn add_term(&mut self, coeff: Q, xi: Mono, word: Word) {
        if coeff.is_zero() {
            return;
        }
        let key = (xi, word);
        let entry = self.terms.entry(key.clone()).or_insert_with(Q::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = Term> + '_ {
        self.terms.iter().map(|((xi, w), c)| Term { coeff: *c, xi: *xi, word: w.clone() })
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Mono, &Word, &Q)> + '_ {
        self.terms.iter().map(|((xi, w), c)| (xi, w, c))
    }

    pub fn coefficient(&self, xi: &Mono, word: &Word) -> Q {
        self.terms.get(&(*xi, word.clone())).copied().unwrap_or_else(Q::zero)
    }

    pub fn scale(&self, c: Q) -> Self {
        let mut out = SymbolExpr::zero();
        if c.is_zero() {
            return out;
        }
        for ((xi, w), v) in &self.terms {
            out.terms.insert((*xi, w.clone()), *v * c);
        }
        out
    }

    /// Terms of ξ-degree exactly `d`.
    pub fn degree_part(&self, d: u32) -> Self {
        let mut out = SymbolExpr::zero();
        for ((xi, w), v) in &self.terms {
            if mono_degree(xi) == d {
                out.terms.insert((*xi, w.clone()), *v);
            }
        }
        out
    }

    pub fn max_xi_degree(&self) -> Option<u32> {
        self.terms.keys().map(|(xi, _)| mono_degree(xi)).max()
    }

    /// Replace every word by `f(word)`, combining like terms.
    pub fn map_words(&self, mut f: impl FnMut(&Word) -> Word) -> Self {
        let mut out = SymbolExpr::zero();
        for ((xi, w), v) in &self.terms {
            out.add_term(*v, *xi, f(w));
        }
        out
    }

    /// Keep only terms satisfying the predicate.
    pub fn filter(&self, mut keep: impl FnMut(&Mono, &Word) -> bool) -> Self {
        let mut out = SymbolExpr::zero();
        for ((xi, w), v) in &self.terms {
            if keep(xi, w) {
                out.terms.insert((*xi, w.clone()), *v);
            }
        }
        out
    }

    /// Re-canonicalizes every word. Expressions are always kept canonical, so
    /// this is the identity on well-formed values; it exists for words built
    /// by hand.
    pub fn normalize(&self) -> Self {
        self.map_words(|w| Word::from_atoms(w.0.iter().copied()))
    }
}

impl fmt::Display for SymbolExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for t in self.terms() {
            let s = format_term(&t);
            if first {
                write!(f, "{}", s)?;
                first = false;
            } else if let Some(rest) = s.strip_prefix('-') {
                write!(f, " - {}", rest)?;
            } else {
                write!(f, " + {}", s)?;
            }
        }
        Ok(())
    }
}

impl Add for &SymbolExpr {
    type Output = SymbolExpr;
    fn add(self, rhs: &SymbolExpr) -> SymbolExpr {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl std::ops::AddAssign<&SymbolExpr> for SymbolExpr {
    fn add_assign(&mut self, rhs: &SymbolExpr) {
        for ((xi, w), v) in &rhs.terms {
            self.add_term(*v, *xi, w.clone());
        }
    }
}

impl Sub for &SymbolExpr {
    type Output = SymbolExpr;
    fn sub(self, rhs: &SymbolExpr) -> SymbolExpr {
        let mut out = self.clone();
        for ((xi, w), v) in &rhs.terms {
            out.add_term(-*v, *xi, w.clone());
        }
        out
    }
}

impl Neg for &SymbolExpr {
    type Output = SymbolExpr;
    fn neg(self) -> SymbolExpr {
        self.scale(-Q::one())
    }
}

impl Mul for &SymbolExpr {
    type Output = SymbolExpr;
    fn mul(self, rhs: &SymbolExpr) -> SymbolExpr {
        let mut out = SymbolExpr::zero();
        for ((x1, w1), c1) in &self.terms {
            for ((x2, w2), c2) in &rhs.terms {
                out.add_term(*c1 * *c2, mono_mul(x1, x2), w1.concat(w2));
            }
        }
        out
    }
}

/// Expansion of `δ_j(k^m)` as a list of words with coefficients.
fn delta_kpow(j: usize, m: i32) -> Vec<(Q, Word)> {
    let d = Atom::DK(MultiIndex::unit(j));
    if m > 0 {
        (0..m)
            .map(|i| (Q::one(), Word::from_atoms([Atom::KPow(i), d, Atom::KPow(m - 1 - i)])))
            .collect()
    } else if m < 0 {
        // δ(k^{-n}) = -k^{-n} δ(k^n) k^{-n}
        let n = -m;
        (0..n)
            .map(|i| (-Q::one(), Word::from_atoms([Atom::KPow(-n + i), d, Atom::KPow(-1 - i)])))
            .collect()
    } else {
        Vec::new()
    }
}

/// `δ_j` of a single atom, as (coefficient, extra ξ-monomial, replacement word).
fn delta_atom(j: usize, a: Atom, m: Option<&MetricDescriptor>) -> Result<Vec<(Q, Mono, Word)>> {
    match a {
        Atom::KPow(r) => Ok(delta_kpow(j, r).into_iter().map(|(c, w)| (c, [0; 3], w)).collect()),
        Atom::DK(al) => {
            if al.order() >= 2 {
                return Err(Error::ThirdDerivative { direction: j + 1, existing: al.0 });
            }
            Ok(vec![(Q::one(), [0; 3], Word::from_atoms([Atom::DK(al.plus(j))]))])
        }
        Atom::B0(n) => {
            let m = m.ok_or_else(|| Error::StageMismatch("δ applied to b₀ without a metric".into()))?;
            // δ(b₀) = -b₀ δ(a₂) b₀ with δ(a₂) = Σ_i ξ_i² δ(k^{c_i})
            let mut single = Vec::new();
            for (i, &c) in m.leading.iter().enumerate() {
                let mut xi = [0u8; 3];
                xi[i] = 2;
                for (coef, w) in delta_kpow(j, c) {
                    let mut word = Word::from_atoms([Atom::B0(1)]);
                    word = word.concat(&w);
                    word.push(Atom::B0(1));
                    single.push((-coef, xi, word));
                }
            }
            let mut out = Vec::new();
            for l in 0..n {
                for (c, xi, w) in &single {
                    let mut word = Word::from_atoms([Atom::B0(l)]);
                    word = word.concat(w);
                    word.push(Atom::B0(n - 1 - l));
                    out.push((*c, *xi, word));
                }
            }
            Ok(out)
        }
        Atom::B0u(_) | Atom::DLogK(_) => Err(Error::StageMismatch(format!("δ applied to {:?}", a))),
    }
}

fn delta_impl(j: usize, e: &SymbolExpr, m: Option<&MetricDescriptor>) -> Result<SymbolExpr> {
    let mut out = SymbolExpr::zero();
    for ((xi, w), c) in &e.terms {
        let atoms = w.atoms();
        for (pos, &a) in atoms.iter().enumerate() {
            let repl = delta_atom(j, a, m)?;
            if repl.is_empty() {
                continue;
            }
            let left = Word::from_atoms(atoms[..pos].iter().copied());
            let right = Word::from_atoms(atoms[pos + 1..].iter().copied());
            for (rc, rxi, rw) in repl {
                out.add_term(*c * rc, mono_mul(xi, &rxi), left.concat(&rw).concat(&right));
            }
        }
    }
    Ok(out)
}

/// Derivation `δ_j` (0-based direction) on expressions without `b₀` atoms.
pub fn delta(j: usize, e: &SymbolExpr) -> Result<SymbolExpr> {
    delta_impl(j, e, None)
}

/// Derivation `δ_j` allowing `b₀` atoms, expanded through the metric's a₂.
pub fn delta_with_metric(j: usize, e: &SymbolExpr, m: &MetricDescriptor) -> Result<SymbolExpr> {
    delta_impl(j, e, Some(m))
}

/// `∂/∂ξ_j` (0-based direction).
pub fn xi_partial(j: usize, e: &SymbolExpr, m: &MetricDescriptor) -> Result<SymbolExpr> {
    let c_j = *m
        .leading
        .get(j)
        .ok_or(Error::BadDirection(j + 1, m.dimension))?;
    let mut out = SymbolExpr::zero();
    for ((xi, w), c) in &e.terms {
        if xi[j] > 0 {
            let mut nx = *xi;
            nx[j] -= 1;
            out.add_term(*c * qi(xi[j] as i128), nx, w.clone());
        }
        let atoms = w.atoms();
        for (pos, &a) in atoms.iter().enumerate() {
            match a {
                Atom::B0(n) => {
                    let mut nx = *xi;
                    nx[j] += 1;
                    let mut word = Word::from_atoms(atoms[..pos].iter().copied());
                    word.push(Atom::KPow(c_j));
                    word.push(Atom::B0(n + 1));
                    for &b in &atoms[pos + 1..] {
                        word.push(b);
                    }
                    out.add_term(*c * qi(-2 * n as i128), nx, word);
                }
                Atom::B0u(_) | Atom::DLogK(_) => {
                    return Err(Error::StageMismatch(format!("∂_ξ applied to {:?}", a)))
                }
                _ => {}
            }
        }
    }
    Ok(out)
}

/// Square matrix of symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrixSymbol {
    pub n: usize,
    pub entries: Vec<SymbolExpr>,
}

impl MatrixSymbol {
    pub fn zero(n: usize) -> Self {
        MatrixSymbol { n, entries: vec![SymbolExpr::zero(); n * n] }
    }

    pub fn scalar(n: usize, e: &SymbolExpr) -> Self {
        let mut m = Self::zero(n);
        for i in 0..n {
            m.entries[i * n + i] = e.clone();
        }
        m
    }

    pub fn get(&self, r: usize, c: usize) -> &SymbolExpr {
        &self.entries[r * self.n + c]
    }

    pub fn get_mut(&mut self, r: usize, c: usize) -> &mut SymbolExpr {
        &mut self.entries[r * self.n + c]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    pub fn map(&self, f: impl Fn(&SymbolExpr) -> SymbolExpr) -> Self {
        MatrixSymbol { n: self.n, entries: self.entries.iter().map(f).collect() }
    }

    pub fn try_map(&self, f: impl Fn(&SymbolExpr) -> Result<SymbolExpr>) -> Result<Self> {
        let entries = self.entries.iter().map(f).collect::<Result<Vec<_>>>()?;
        Ok(MatrixSymbol { n: self.n, entries })
    }

    pub fn add(&self, o: &MatrixSymbol) -> MatrixSymbol {
        assert_eq!(self.n, o.n);
        MatrixSymbol {
            n: self.n,
            entries: self.entries.iter().zip(&o.entries).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &MatrixSymbol) -> MatrixSymbol {
        assert_eq!(self.n, o.n);
        MatrixSymbol {
            n: self.n,
            entries: self.entries.iter().zip(&o.entries).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, c: Q) -> MatrixSymbol {
        self.map(|e| e.scale(c))
    }

    pub fn mul(&self, o: &MatrixSymbol) -> MatrixSymbol {
        assert_eq!(self.n, o.n);
        let n = self.n;
        let mut out = MatrixSymbol::zero(n);
        for r in 0..n {
            for c in 0..n {
                let mut acc = SymbolExpr::zero();
                for k in 0..n {
                    let a = self.get(r, k);
                    let b = o.get(k, c);
                    if a.is_zero() || b.is_zero() {
                        continue;
                    }
                    acc += &(a * b);
                }
                out.entries[r * n + c] = acc;
            }
        }
        out
    }

    /// Left multiplication by a scalar symbol.
    pub fn lmul_scalar(&self, s: &SymbolExpr) -> MatrixSymbol {
        self.map(|e| s * e)
    }

    /// Right multiplication by a scalar symbol.
    pub fn rmul_scalar(&self, s: &SymbolExpr) -> MatrixSymbol {
        self.map(|e| e * s)
    }

    pub fn trace(&self) -> SymbolExpr {
        let mut acc = SymbolExpr::zero();
        for i in 0..self.n {
            acc += self.get(i, i);
        }
        acc
    }

    pub fn term_count(&self) -> usize {
        self.entries.iter().map(|e| e.len()).sum()
    }
}

pub(crate) fn sub(n: usize) -> String {
    const D: [char; 10] = ['₀', '₁', '₂', '₃', '₄', '₅', '₆', '₇', '₈', '₉'];
    n.to_string().chars().map(|c| D[c.to_digit(10).unwrap() as usize]).collect()
}

pub(crate) fn sup(n: i64) -> String {
    const D: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];
    let mut s = String::new();
    if n < 0 {
        s.push('⁻');
    }
    for c in n.abs().to_string().chars() {
        s.push(D[c.to_digit(10).unwrap() as usize]);
    }
    s
}

pub fn format_atom(a: &Atom) -> String {
    match a {
        Atom::KPow(1) => "k".into(),
        Atom::KPow(r) => format!("k{}", sup(*r as i64)),
        Atom::DK(al) => format!("{}(k)", al),
        Atom::B0(1) => "b₀".into(),
        Atom::B0(m) => format!("b₀{}", sup(*m as i64)),
        Atom::B0u(1) => "b₀(u)".into(),
        Atom::B0u(m) => format!("b₀(u){}", sup(*m as i64)),
        Atom::DLogK(al) => format!("{}(log k)", al),
    }
}

pub fn format_word(w: &Word) -> String {
    if w.is_empty() {
        return "1".into();
    }
    w.atoms().iter().map(format_atom).collect::<Vec<_>>().join(" ")
}

pub fn format_mono(xi: &Mono) -> String {
    let mut parts = Vec::new();
    for (j, &e) in xi.iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(format!("ξ{}", sub(j + 1))),
            e => parts.push(format!("ξ{}{}", sub(j + 1), sup(e as i64))),
        }
    }
    parts.join("")
}

/// One term in TeX-like notation, e.g. `2 ξ₁² k² b₀² δ₁(k) b₀`.
pub fn format_term(t: &Term) -> String {
    let mut parts = vec![t.coeff.to_string()];
    let m = format_mono(&t.xi);
    if !m.is_empty() {
        parts.push(m);
    }
    if !t.word.is_empty() {
        parts.push(format_word(&t.word));
    }
    parts.join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::q;

    fn dk(j: usize) -> Atom {
        Atom::DK(MultiIndex::unit(j))
    }

    #[test]
    fn canonical_merging() {
        let w = Word::from_atoms([Atom::KPow(2), Atom::KPow(3)]);
        assert_eq!(w, Word::kpow(5));
        let w = Word::from_atoms([Atom::B0(1), Atom::KPow(2)]);
        assert_eq!(w.0, vec![Atom::KPow(2), Atom::B0(1)]);
        let w = Word::from_atoms([Atom::KPow(1), Atom::B0(2), Atom::KPow(-1), Atom::B0(1)]);
        assert_eq!(w.0, vec![Atom::B0(3)]);
        let e = SymbolExpr::kpow(3);
        assert!((&e - &e).is_zero());
    }

    #[test]
    fn delta_generator_cases() {
        assert_eq!(delta(0, &SymbolExpr::kpow(1)).unwrap(), SymbolExpr::atom(dk(0)));
        let d = delta(2, &SymbolExpr::kpow(2)).unwrap();
        let mut want = SymbolExpr::word(Word::from_atoms([dk(2), Atom::KPow(1)]));
        want += &SymbolExpr::word(Word::from_atoms([Atom::KPow(1), dk(2)]));
        assert_eq!(d, want);
        let d = delta(1, &SymbolExpr::kpow(-1)).unwrap();
        let want = SymbolExpr::term(-Q::one(), [0; 3], Word::from_atoms([Atom::KPow(-1), dk(1), Atom::KPow(-1)]));
        assert_eq!(d, want);
    }

    #[test]
    fn delta_rejects_third_derivative() {
        let e = SymbolExpr::atom(Atom::DK(MultiIndex::pair(0, 1)));
        assert!(matches!(delta(2, &e), Err(Error::ThirdDerivative { .. })));
    }

    #[test]
    fn inverse_rule_consistency() {
        // δ(k^{-2} k^2) = 0
        let a = SymbolExpr::kpow(-2);
        let b = SymbolExpr::kpow(2);
        let lhs = &(&delta(0, &a).unwrap() * &b) + &(&a * &delta(0, &b).unwrap());
        assert!(lhs.is_zero(), "{}", lhs);
    }

    #[test]
    fn xi_partial_examples() {
        let nc = MetricDescriptor::nonconformal3();
        let b0 = SymbolExpr::atom(Atom::B0(1));
        let d1 = xi_partial(0, &b0, &nc).unwrap();
        assert_eq!(d1, SymbolExpr::term(qi(-2), [1, 0, 0], Word::from_atoms([Atom::KPow(2), Atom::B0(2)])));
        let d3 = xi_partial(2, &b0, &nc).unwrap();
        assert_eq!(d3, SymbolExpr::term(qi(-2), [0, 0, 1], Word::from_atoms([Atom::B0(2)])));

        let c3 = MetricDescriptor::conformal3();
        let e = SymbolExpr::term(Q::one(), [0, 2, 0], Word::from_atoms([Atom::B0(1)]));
        let d = xi_partial(1, &e, &c3).unwrap();
        let mut want = SymbolExpr::term(qi(2), [0, 1, 0], Word::from_atoms([Atom::B0(1)]));
        want.add_term(qi(-2), [0, 3, 0], Word::from_atoms([Atom::KPow(4), Atom::B0(2)]));
        assert_eq!(d, want);
    }

    #[test]
    fn delta_of_b0_power() {
        let m = MetricDescriptor::nonconformal3();
        let d2 = delta_with_metric(1, &SymbolExpr::atom(Atom::B0(2)), &m).unwrap();
        // two positions, two ξ-monomials, two terms of δ₂(k²)
        assert_eq!(d2.len(), 8);
        let w = Word::from_atoms([Atom::B0(1), dk(1), Atom::KPow(1), Atom::B0(2)]);
        assert_eq!(d2.coefficient(&[2, 0, 0], &w), q(-1, 1));
    }

    #[test]
    fn display_notation() {
        let w = Word::from_atoms([Atom::KPow(2), Atom::B0(2), dk(0), Atom::KPow(3), Atom::B0(2), Atom::KPow(1), dk(0), Atom::B0(1)]);
        let t = Term { coeff: qi(2), xi: [0; 3], word: w };
        assert_eq!(format_term(&t), "2 k² b₀² δ₁(k) k⁴ b₀² δ₁(k) b₀");
    }
}
