//! Translation from k^{-1}δ^α(k) units to δ^α(log k), and the final
//! curvature expressions.
//!
//! With Δ(x) = k^{-e} x k^{e}:
//!   k^{-1}δ_j(k)     = f(Δ)(δ_j(log k))
//!   k^{-1}δ_iδ_j(k)  = f(Δ)(δ_iδ_j(log k)) + g(Δ₍₁₎,Δ₍₂₎)(δ_i(log k)·δ_j(log k) + δ_j(log k)·δ_i(log k))
//! where f(x) = ∫₀¹ x^{σ/e} dσ and g(x, y) = ∫₀¹∫₀^σ x^{σ/e} y^{τ/e} dτ dσ.

use crate::coeff::{Coefficient, Q};
use crate::error::{Error, Result};
use crate::metric::MetricDescriptor;
use crate::rearrange::{lin_unit, FCache, LinForm, SpectralExpr, SpectralFunction, Trans};
use crate::symbols::{sub, Atom, MultiIndex, Word};
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::fmt;

/// One slot of a translated operand.
#[derive(Clone, Debug)]
struct SlotChoice {
    atoms: Vec<MultiIndex>,
    factor: Trans,
    weight: i128,
}

fn slot_choices(alpha: &MultiIndex, w: i32) -> Result<Vec<SlotChoice>> {
    let dirs = alpha.directions();
    match dirs.len() {
        1 => Ok(vec![SlotChoice { atoms: vec![*alpha], factor: Trans::F { w, arg: vec![Q::one()] }, weight: 1 }]),
        2 => {
            let (i, j) = (dirs[0], dirs[1]);
            let mut out = vec![SlotChoice { atoms: vec![*alpha], factor: Trans::F { w, arg: vec![Q::one()] }, weight: 1 }];
            let g = Trans::G { w, a: vec![Q::one(), Q::zero()], b: vec![Q::zero(), Q::one()] };
            if i == j {
                out.push(SlotChoice { atoms: vec![MultiIndex::unit(i), MultiIndex::unit(i)], factor: g, weight: 2 });
            } else {
                out.push(SlotChoice { atoms: vec![MultiIndex::unit(i), MultiIndex::unit(j)], factor: g.clone(), weight: 1 });
                out.push(SlotChoice { atoms: vec![MultiIndex::unit(j), MultiIndex::unit(i)], factor: g, weight: 1 });
            }
            Ok(out)
        }
        n => Err(Error::OrderTooHigh(n)),
    }
}

/// Places a slot-local factor at new slot offset `at` of `p` slots.
fn place(t: &Trans, at: usize, p: usize) -> Trans {
    let shift = |l: &LinForm| {
        let mut v = vec![Q::zero(); p];
        for (k, c) in l.iter().enumerate() {
            v[at + k] = *c;
        }
        v
    };
    match t {
        Trans::F { w, arg } => Trans::F { w: *w, arg: shift(arg) },
        Trans::G { w, a, b } => Trans::G { w: *w, a: shift(a), b: shift(b) },
    }
}

fn unit_of(w: &Word) -> Result<MultiIndex> {
    match w.atoms() {
        [Atom::DK(a)] => Ok(*a),
        _ => Err(Error::StageMismatch(format!("operand {} is not a unit", crate::symbols::format_word(w)))),
    }
}

/// Rewrites a normalized expression over δ^α(log k) atoms.
pub fn translate(e: &SpectralExpr, m: &MetricDescriptor) -> Result<SpectralExpr> {
    let w = m.modular_exponent;
    let mut out = SpectralExpr::default();
    for ((prefix, operand), f) in &e.terms {
        let units = operand.iter().map(unit_of).collect::<Result<Vec<_>>>()?;
        let choices = units.iter().map(|a| slot_choices(a, w)).collect::<Result<Vec<_>>>()?;
        // cartesian product over slot choices
        let mut combos: Vec<Vec<&SlotChoice>> = vec![vec![]];
        for cs in &choices {
            combos = combos.into_iter().flat_map(|c| cs.iter().map(move |x| [c.clone(), vec![x]].concat())).collect();
        }
        for combo in combos {
            let p: usize = combo.iter().map(|c| c.atoms.len()).sum();
            let mut map = Vec::with_capacity(combo.len());
            let mut factors = Vec::new();
            let mut atoms = Vec::new();
            let mut weight = 1i128;
            let mut at = 0;
            for c in &combo {
                let mut l = vec![Q::zero(); p];
                for k in 0..c.atoms.len() {
                    l[at + k] = Q::one();
                }
                map.push(l);
                factors.push(place(&c.factor, at, p));
                atoms.extend(c.atoms.iter().copied());
                weight *= c.weight;
                at += c.atoms.len();
            }
            let mut g = f.substitute(&map, p).scale(Coefficient::rational(Q::from_integer(weight)));
            for t in factors {
                g = g.times_factor(t);
            }
            let word: Vec<Word> = atoms.into_iter().map(|a| Word::from_atoms([Atom::DLogK(a)])).collect();
            out.add(*prefix, word, &g);
        }
    }
    Ok(out.simplify())
}

/// Basis elements of a curvature expression, applied to log k.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BasisWord {
    /// δ^α(log k)
    One(MultiIndex),
    /// δ_i(log k)·δ_j(log k) in this order
    Prod(usize, usize),
    /// {δ_i(log k), δ_j(log k)}, i ≤ j
    Anti(usize, usize),
    /// [δ_j(log k), δ_i(log k)], stored as (j, i) with i < j
    Comm(usize, usize),
}

impl BasisWord {
    pub fn arity(&self) -> usize {
        match self {
            BasisWord::One(_) => 1,
            _ => 2,
        }
    }

    pub fn parse(s: &str) -> Option<BasisWord> {
        let (kind, idx) = s.split_once('_')?;
        let dirs: Vec<usize> = idx
            .chars()
            .map(|c| c.to_digit(10).filter(|d| (1..=3).contains(d)).map(|d| d as usize - 1))
            .collect::<Option<_>>()?;
        match (kind, dirs.as_slice()) {
            ("d", [i]) => Some(BasisWord::One(MultiIndex::unit(*i))),
            ("d2", [i, j]) => Some(BasisWord::One(MultiIndex::pair(*i, *j))),
            ("dd", [i, j]) => Some(BasisWord::Prod(*i, *j)),
            ("anti", [i, j]) if i <= j => Some(BasisWord::Anti(*i, *j)),
            ("comm", [j, i]) if i < j => Some(BasisWord::Comm(*j, *i)),
            _ => None,
        }
    }

    /// ASCII key: `d_1`, `d2_12`, `dd_13`, `anti_12`, `comm_21`.
    pub fn key(&self) -> String {
        match self {
            BasisWord::One(a) => {
                let d = a.directions();
                if d.len() == 1 {
                    format!("d_{}", d[0] + 1)
                } else {
                    format!("d2_{}{}", d[0] + 1, d[1] + 1)
                }
            }
            BasisWord::Prod(i, j) => format!("dd_{}{}", i + 1, j + 1),
            BasisWord::Anti(i, j) => format!("anti_{}{}", i + 1, j + 1),
            BasisWord::Comm(i, j) => format!("comm_{}{}", i + 1, j + 1),
        }
    }
}

impl fmt::Display for BasisWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = |i: &usize| format!("δ{}(log k)", sub(i + 1));
        match self {
            BasisWord::One(a) => write!(f, "{}(log k)", a),
            BasisWord::Prod(i, j) => write!(f, "{}·{}", d(i), d(j)),
            BasisWord::Anti(i, j) => write!(f, "{{{}, {}}}", d(i), d(j)),
            BasisWord::Comm(i, j) => write!(f, "[{}, {}]", d(i), d(j)),
        }
    }
}

/// Entries keyed by (k-power prefix, basis word), functions in ∇-coordinates.
#[derive(Clone, Debug, Default)]
pub struct CurvatureExpression {
    pub terms: BTreeMap<(i32, BasisWord), SpectralFunction>,
}

impl CurvatureExpression {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|f| f.is_zero())
    }

    pub fn add_term(&mut self, prefix: i32, w: BasisWord, f: &SpectralFunction) {
        match self.terms.get_mut(&(prefix, w)) {
            Some(e) => e.add(f),
            None => {
                self.terms.insert((prefix, w), f.clone());
            }
        }
    }

    pub fn add(&self, o: &CurvatureExpression) -> CurvatureExpression {
        let mut out = self.clone();
        for ((p, w), f) in &o.terms {
            out.add_term(*p, *w, f);
        }
        out.simplify()
    }

    pub fn scale(&self, c: Coefficient) -> CurvatureExpression {
        CurvatureExpression { terms: self.terms.iter().map(|(k, f)| (*k, f.scale(c))).collect() }.simplify()
    }

    pub fn sub(&self, o: &CurvatureExpression) -> CurvatureExpression {
        self.add(&o.scale(Coefficient::rational(-Q::one())))
    }

    pub fn simplify(&self) -> CurvatureExpression {
        CurvatureExpression {
            terms: self
                .terms
                .iter()
                .map(|(k, f)| (*k, f.simplify()))
                .filter(|(_, f)| !f.is_zero())
                .collect(),
        }
    }

    pub fn get(&self, prefix: i32, w: BasisWord) -> Option<&SpectralFunction> {
        self.terms.get(&(prefix, w))
    }

    pub fn words(&self) -> Vec<(i32, BasisWord)> {
        self.terms.keys().copied().collect()
    }

    /// Coefficient function of a basis word; absent words evaluate to 0.
    pub fn eval(&self, prefix: i32, w: BasisWord, s: &[f64]) -> f64 {
        self.terms.get(&(prefix, w)).map_or(0.0, |f| f.eval(s))
    }

    pub fn eval_with(&self, prefix: i32, w: BasisWord, s: &[f64], cache: &mut FCache) -> f64 {
        self.terms.get(&(prefix, w)).map_or(0.0, |f| f.eval_with(s, cache))
    }

    /// Keeps words whose atoms avoid every direction in `drop`.
    pub fn without_directions(&self, drop: &[usize]) -> CurvatureExpression {
        let keep = |w: &BasisWord| match w {
            BasisWord::One(a) => a.directions().iter().all(|d| !drop.contains(d)),
            BasisWord::Prod(i, j) | BasisWord::Anti(i, j) | BasisWord::Comm(i, j) => !drop.contains(i) && !drop.contains(j),
        };
        CurvatureExpression { terms: self.terms.iter().filter(|((_, w), _)| keep(w)).map(|(k, f)| (*k, f.clone())).collect() }
    }
}

impl fmt::Display for CurvatureExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for ((p, w), sf) in &self.terms {
            writeln!(f, "k^{} {}  [{} contributions]", p, w, sf.terms.len())?;
        }
        Ok(())
    }
}

/// Collects a translated expression into ordered-product basis words.
pub fn to_curvature(e: &SpectralExpr) -> Result<CurvatureExpression> {
    let mut out = CurvatureExpression::zero();
    for ((prefix, operand), f) in &e.terms {
        let atoms = operand
            .iter()
            .map(|w| match w.atoms() {
                [Atom::DLogK(a)] => Ok(*a),
                _ => Err(Error::StageMismatch(format!("operand {} not translated", crate::symbols::format_word(w)))),
            })
            .collect::<Result<Vec<_>>>()?;
        let word = match atoms.as_slice() {
            [] => return Err(Error::Shape("term without derivatives".into())),
            [a] => BasisWord::One(*a),
            [a, b] if a.order() == 1 && b.order() == 1 => BasisWord::Prod(a.directions()[0], b.directions()[0]),
            _ => return Err(Error::Shape(format!("operand with {} atoms", atoms.len()))),
        };
        out.add_term(*prefix, word, f);
    }
    Ok(out.simplify())
}

/// Replaces ordered products by {δ_i, δ_j} (W = (c₁+c₂)/2) and
/// [δ_j, δ_i] (S = (c₂−c₁)/2), with c₁ on δ_i·δ_j and c₂ on δ_j·δ_i, i ≤ j.
pub fn split_sym_antisym(c: &CurvatureExpression) -> CurvatureExpression {
    let half = Coefficient::rational(Q::new(1, 2));
    let mut out = CurvatureExpression::zero();
    for ((p, w), f) in &c.terms {
        match *w {
            BasisWord::Prod(i, j) if i == j => out.add_term(*p, BasisWord::Anti(i, i), &f.scale(half)),
            BasisWord::Prod(i, j) => {
                let (lo, hi) = (i.min(j), i.max(j));
                out.add_term(*p, BasisWord::Anti(lo, hi), &f.scale(half));
                let sign = if i < j { -half } else { half };
                out.add_term(*p, BasisWord::Comm(hi, lo), &f.scale(sign));
            }
            other => out.add_term(*p, other, f),
        }
    }
    out.simplify()
}

/// Inverse of [`split_sym_antisym`].
pub fn reconstruct_products(c: &CurvatureExpression) -> CurvatureExpression {
    let two = Coefficient::rational(Q::from_integer(2));
    let neg = Coefficient::rational(-Q::one());
    let mut out = CurvatureExpression::zero();
    for ((p, w), f) in &c.terms {
        match *w {
            BasisWord::Anti(i, j) if i == j => out.add_term(*p, BasisWord::Prod(i, i), &f.scale(two)),
            BasisWord::Anti(i, j) => {
                out.add_term(*p, BasisWord::Prod(i, j), f);
                out.add_term(*p, BasisWord::Prod(j, i), f);
            }
            BasisWord::Comm(j, i) => {
                out.add_term(*p, BasisWord::Prod(j, i), f);
                out.add_term(*p, BasisWord::Prod(i, j), &f.scale(neg));
            }
            other => out.add_term(*p, other, f),
        }
    }
    out.simplify()
}

/// Unit slot i of p for building single-leaf functions in tests and tools.
pub fn unit_slot(i: usize, p: usize) -> LinForm {
    lin_unit(i, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rearrange::FSpec;

    type M = [[f64; 3]; 3];

    fn mm(a: &M, b: &M) -> M {
        let mut c = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    c[i][j] += a[i][k] * b[k][j];
                }
            }
        }
        c
    }

    fn comm(x: &M, y: &M) -> M {
        let (a, b) = (mm(x, y), mm(y, x));
        let mut c = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                c[i][j] = a[i][j] - b[i][j];
            }
        }
        c
    }

    /// Applies a translated expression to log k = diag(λ) with δ_d = [X_d, ·].
    fn apply(e: &SpectralExpr, lam: &[f64; 3], xs: &[M; 2], ev: f64) -> M {
        let h: M = [[lam[0], 0.0, 0.0], [0.0, lam[1], 0.0], [0.0, 0.0, lam[2]]];
        let atom = |a: &MultiIndex| {
            let d = a.directions();
            let mut v = comm(&xs[d[0]], &h);
            for &k in &d[1..] {
                v = comm(&xs[k], &v);
            }
            v
        };
        let mut out = [[0.0; 3]; 3];
        for ((prefix, op), f) in &e.terms {
            assert_eq!(*prefix, 0);
            let ms: Vec<M> = op
                .iter()
                .map(|w| match w.atoms() {
                    [Atom::DLogK(a)] => atom(a),
                    _ => panic!(),
                })
                .collect();
            let s = |a: usize, b: usize| ev * (lam[b] - lam[a]);
            for a in 0..3 {
                for c in 0..3 {
                    out[a][c] += match ms.len() {
                        1 => ms[0][a][c] * f.eval(&[s(a, c)]),
                        _ => (0..3).map(|b| ms[0][a][b] * ms[1][b][c] * f.eval(&[s(a, b), s(b, c)])).sum(),
                    };
                }
            }
        }
        out
    }

    fn one_unit(alpha: MultiIndex) -> SpectralExpr {
        // ∫(1+v)^{-2} dv = 1 stands in for the constant function
        let f = SpectralFunction::leaf(Coefficient::one(), FSpec::new(vec![2, 0], Q::from_integer(2), Q::one()));
        let mut e = SpectralExpr::default();
        e.add(0, vec![Word::from_atoms([Atom::DK(alpha)])], &f);
        e
    }

    #[test]
    fn translation_reproduces_matrix_model() {
        let lam = [0.3, -0.5, 0.9];
        let x0: M = [[0.1, 0.7, -0.4], [0.2, -0.3, 0.5], [0.6, 0.1, 0.2]];
        let x1 = mm(&x0, &x0);
        let xs = [x0, x1];
        for (mdesc, e_pow) in [(MetricDescriptor::nonconformal3(), 2.0), (MetricDescriptor::conformal3(), 6.0)] {
            for alpha in [MultiIndex::unit(0), MultiIndex::pair(0, 0), MultiIndex::pair(0, 1)] {
                let tr = translate(&one_unit(alpha), &mdesc).unwrap();
                let got = apply(&tr, &lam, &xs, e_pow);
                // k^{-1} δ^α(k) directly, k = exp(diag λ)
                let k: M = [[lam[0].exp(), 0.0, 0.0], [0.0, lam[1].exp(), 0.0], [0.0, 0.0, lam[2].exp()]];
                let kinv: M = [[(-lam[0]).exp(), 0.0, 0.0], [0.0, (-lam[1]).exp(), 0.0], [0.0, 0.0, (-lam[2]).exp()]];
                let d = alpha.directions();
                let mut v = comm(&xs[d[0]], &k);
                for &kk in &d[1..] {
                    v = comm(&xs[kk], &v);
                }
                let want = mm(&kinv, &v);
                for a in 0..3 {
                    for c in 0..3 {
                        assert!((got[a][c] - want[a][c]).abs() < 1e-11, "{:?} {} {}: {} vs {}", alpha, a, c, got[a][c], want[a][c]);
                    }
                }
            }
        }
    }

    #[test]
    fn diagonal_rule_is_polarization_at_equal_indices() {
        let m = MetricDescriptor::nonconformal3();
        let tr = translate(&one_unit(MultiIndex::pair(1, 1)), &m).unwrap();
        let w = vec![Word::from_atoms([Atom::DLogK(MultiIndex::unit(1))]); 2];
        let f = &tr.terms[&(0, w)];
        let (s, t) = (0.4, -1.1);
        let want = 2.0 * crate::rearrange::g_trans(s, t, 2.0);
        assert!((f.eval(&[s, t]) - want).abs() < 1e-12);
    }

    #[test]
    fn split_round_trip() {
        let mut c = CurvatureExpression::zero();
        let f1 = SpectralFunction::leaf(Coefficient::one(), FSpec::nonconformal(2, &[1, 1, 1]));
        let f2 = SpectralFunction::leaf(Coefficient::rational(Q::new(3, 2)), FSpec::nonconformal(3, &[2, 1, 1]));
        c.add_term(0, BasisWord::Prod(0, 2), &f1);
        c.add_term(0, BasisWord::Prod(2, 0), &f2);
        c.add_term(-2, BasisWord::Prod(2, 2), &f2);
        let s = split_sym_antisym(&c);
        let pt = [0.7, -0.2];
        let w = s.eval(0, BasisWord::Anti(0, 2), &pt);
        let sa = s.eval(0, BasisWord::Comm(2, 0), &pt);
        let (c1, c2) = (f1.eval(&pt), f2.eval(&pt));
        assert!((w - sa - c1).abs() < 1e-12);
        assert!((w + sa - c2).abs() < 1e-12);
        assert!((2.0 * s.eval(-2, BasisWord::Anti(2, 2), &pt) - c2).abs() < 1e-12);
        let r = reconstruct_products(&s);
        for (p, wd) in c.words() {
            assert!((r.eval(p, wd, &pt) - c.eval(p, wd, &pt)).abs() < 1e-12);
        }
    }

    #[test]
    fn basis_keys_round_trip() {
        for w in [BasisWord::One(MultiIndex::unit(2)), BasisWord::One(MultiIndex::pair(0, 2)), BasisWord::Prod(1, 0), BasisWord::Anti(0, 1), BasisWord::Comm(2, 1)] {
            assert_eq!(BasisWord::parse(&w.key()), Some(w));
        }
    }
}
