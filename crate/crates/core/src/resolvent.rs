//! Parametrix symbols b₀, b₁, b₂ of (σ(P) − λ) at λ = −1.

use crate::coeff::{q, qi, Q};
use crate::error::Result;
use crate::metric::{laplacian_symbol, Form, MetricDescriptor, SymbolParts};
use crate::symbols::{delta, mono_degree, xi_partial, Atom, MatrixSymbol, Mono, SymbolExpr, Word};
use num_traits::{One, Zero};
use std::collections::{BTreeMap, HashMap};

/// b₁ and b₂ for one Laplacian; b₀ is the scalar atom `B0(1)`.
#[derive(Clone, Debug)]
pub struct BTriple {
    pub parts: SymbolParts,
    pub b1: MatrixSymbol,
    pub b2: MatrixSymbol,
}

pub fn b0_expr() -> SymbolExpr {
    SymbolExpr::atom(Atom::B0(1))
}

fn mdelta(j: usize, a: &MatrixSymbol) -> Result<MatrixSymbol> {
    a.try_map(|e| delta(j, e))
}

fn mxi(j: usize, a: &MatrixSymbol, m: &MetricDescriptor) -> Result<MatrixSymbol> {
    a.try_map(|e| xi_partial(j, e, m))
}

/// Sandwich b₀ · X · b₀.
fn sandwich(x: &MatrixSymbol) -> MatrixSymbol {
    let b0 = b0_expr();
    x.map(|e| &(&b0 * e) * &b0)
}

pub fn compute_b1(m: &MetricDescriptor, parts: &SymbolParts) -> Result<MatrixSymbol> {
    let b0 = b0_expr();
    let mut b1 = sandwich(&parts.a1).scale(-Q::one());
    for j in 0..m.dimension {
        let db0 = xi_partial(j, &b0, m)?;
        let da2 = mdelta(j, &parts.a2)?;
        b1 = b1.sub(&da2.lmul_scalar(&db0).rmul_scalar(&b0));
    }
    Ok(b1)
}

pub fn compute_b2(m: &MetricDescriptor, parts: &SymbolParts, b1: &MatrixSymbol) -> Result<MatrixSymbol> {
    let b0 = b0_expr();
    let n = m.dimension;
    let mut acc = sandwich(&parts.a0);
    acc = acc.add(&b1.mul(&parts.a1).rmul_scalar(&b0));
    for i in 0..n {
        let db0 = xi_partial(i, &b0, m)?;
        acc = acc.add(&mdelta(i, &parts.a1)?.lmul_scalar(&db0).rmul_scalar(&b0));
        let db1 = mxi(i, b1, m)?;
        acc = acc.add(&db1.mul(&mdelta(i, &parts.a2)?).rmul_scalar(&b0));
    }
    for i in 0..n {
        let dib0 = xi_partial(i, &b0, m)?;
        let di_a2 = mdelta(i, &parts.a2)?;
        for j in 0..n {
            let dijb0 = xi_partial(j, &dib0, m)?;
            let dd_a2 = mdelta(j, &di_a2)?;
            acc = acc.add(&dd_a2.lmul_scalar(&dijb0).rmul_scalar(&b0).scale(q(1, 2)));
        }
    }
    Ok(acc.scale(-Q::one()))
}

/// Full computation for the Laplacian on functions or 1-forms.
pub fn parametrix(m: &MetricDescriptor, form: Form) -> Result<BTriple> {
    let parts = laplacian_symbol(m, form)?;
    let b1 = compute_b1(m, &parts)?;
    let b2 = compute_b2(m, &parts, &b1)?;
    Ok(BTriple { parts, b1, b2 })
}

/// ξ-degree minus twice the number of b₀ factors.
pub fn weight(xi: &Mono, w: &Word) -> i32 {
    mono_degree(xi) as i32 - 2 * w.b0_count() as i32
}

/// True when every term of the expression has the given weight.
pub fn is_homogeneous(e: &SymbolExpr, order: i32) -> bool {
    e.iter().all(|(xi, w, _)| weight(xi, w) == order)
}

/// A symbol of fixed homogeneity order.
#[derive(Clone, Debug)]
pub struct Graded {
    pub order: i32,
    pub sym: MatrixSymbol,
}

/// Homogeneous components of order ≥ `order_cut` of the composition p ∘ q,
/// using Σ_α (1/α!) ∂^α(p) δ^α(q) with |α| ≤ 2.
pub fn symbol_product_truncated(
    p: &[Graded],
    qs: &[Graded],
    order_cut: i32,
    m: &MetricDescriptor,
) -> Result<BTreeMap<i32, MatrixSymbol>> {
    let n = m.dimension;
    let size = p.first().map(|g| g.sym.n).unwrap_or(1);
    let mut out: BTreeMap<i32, MatrixSymbol> = BTreeMap::new();
    let mut add = |ord: i32, s: MatrixSymbol| {
        if ord < order_cut {
            return;
        }
        let e = out.entry(ord).or_insert_with(|| MatrixSymbol::zero(size));
        *e = e.add(&s);
    };
    for a in p {
        for b in qs {
            let base = a.order + b.order;
            if base >= order_cut {
                add(base, a.sym.mul(&b.sym));
            }
            if base > order_cut {
                for i in 0..n {
                    add(base - 1, mxi(i, &a.sym, m)?.mul(&mdelta(i, &b.sym)?));
                }
            }
            if base - 2 >= order_cut {
                for i in 0..n {
                    let pa = mxi(i, &a.sym, m)?;
                    let qb = mdelta(i, &b.sym)?;
                    for j in 0..n {
                        let t = mxi(j, &pa, m)?.mul(&mdelta(j, &qb)?).scale(q(1, 2));
                        add(base - 2, t);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Commutative image used for exact zero tests.
///
/// Each maximal DK-free run of a word is a function of `k`; runs separated by
/// DK atoms are independent, so a sum of words vanishes iff, for every DK
/// skeleton, the sum of products of run functions vanishes as a function of
/// independent commuting variables k₀, k₁, …. Each run function
/// k^r (1 + Q(k))^{-m} is cleared by multiplying through with (1 + Q)^{M},
/// where M is the largest power of b₀ seen in that run position.
/// Coefficients keyed by ξ-monomial and the k-powers between b₀ runs.
pub type SegmentPoly = BTreeMap<(Mono, Vec<i32>), Q>;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SegmentPolynomials {
    pub skeletons: BTreeMap<Vec<Atom>, SegmentPoly>,
}

impl SegmentPolynomials {
    pub fn is_zero(&self) -> bool {
        self.skeletons.values().all(|p| p.is_empty())
    }
}

fn split_runs(w: &Word) -> (Vec<Atom>, Vec<(i32, u32)>) {
    let mut skeleton = Vec::new();
    let mut runs = vec![(0i32, 0u32)];
    for a in w.atoms() {
        match a {
            Atom::KPow(r) => runs.last_mut().unwrap().0 += r,
            Atom::B0(m) | Atom::B0u(m) => runs.last_mut().unwrap().1 += m,
            other => {
                skeleton.push(*other);
                runs.push((0, 0));
            }
        }
    }
    (skeleton, runs)
}

type Poly = HashMap<(Mono, Vec<i32>), Q>;

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out: Poly = HashMap::new();
    for ((x1, k1), c1) in a {
        for ((x2, k2), c2) in b {
            let x = [x1[0] + x2[0], x1[1] + x2[1], x1[2] + x2[2]];
            let k: Vec<i32> = k1.iter().zip(k2).map(|(p, q)| p + q).collect();
            *out.entry((x, k)).or_insert_with(Q::zero) += *c1 * *c2;
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

/// (1 + Σ_j k_i^{c_j} ξ_j²)^e as a polynomial in (ξ, k₀..k_{R-1}).
fn one_plus_q_pow(leading: &[i32], run: usize, nruns: usize, e: u32, cache: &mut HashMap<(usize, u32), Poly>) -> Poly {
    if let Some(p) = cache.get(&(run, e)) {
        return p.clone();
    }
    let mut base: Poly = HashMap::new();
    base.insert(([0; 3], vec![0; nruns]), Q::one());
    let mut qpoly = base.clone();
    for (j, &c) in leading.iter().enumerate() {
        let mut xi = [0u8; 3];
        xi[j] = 2;
        let mut k = vec![0; nruns];
        k[run] = c;
        *qpoly.entry((xi, k)).or_insert_with(Q::zero) += Q::one();
    }
    let mut acc = base;
    for _ in 0..e {
        acc = poly_mul(&acc, &qpoly);
    }
    cache.insert((run, e), acc.clone());
    acc
}

pub fn segment_polynomials(e: &SymbolExpr, m: &MetricDescriptor) -> SegmentPolynomials {
    type Runs = Vec<(i32, u32)>;
    let mut groups: BTreeMap<Vec<Atom>, Vec<(Q, Mono, Runs)>> = BTreeMap::new();
    for (xi, w, c) in e.iter() {
        let (sk, runs) = split_runs(w);
        groups.entry(sk).or_default().push((*c, *xi, runs));
    }
    let mut out = SegmentPolynomials::default();
    for (sk, terms) in groups {
        let nruns = sk.len() + 1;
        let mut maxm = vec![0u32; nruns];
        for (_, _, runs) in &terms {
            for (i, r) in runs.iter().enumerate() {
                maxm[i] = maxm[i].max(r.1);
            }
        }
        let mut cache = HashMap::new();
        let mut total: Poly = HashMap::new();
        for (c, xi, runs) in terms {
            let mut p: Poly = HashMap::new();
            p.insert((xi, runs.iter().map(|r| r.0).collect()), c);
            for (i, r) in runs.iter().enumerate() {
                let e = maxm[i] - r.1;
                if e > 0 {
                    p = poly_mul(&p, &one_plus_q_pow(&m.leading, i, nruns, e, &mut cache));
                }
            }
            for (k, v) in p {
                *total.entry(k).or_insert_with(Q::zero) += v;
            }
        }
        total.retain(|_, v| !v.is_zero());
        out.skeletons.insert(sk, total.into_iter().collect());
    }
    out
}

/// Exact check that `e` equals the constant `c` (as an element, with b₀
/// interpreted as (1 + a₂)^{-1}).
pub fn equals_constant(e: &SymbolExpr, c: Q, m: &MetricDescriptor) -> bool {
    let diff = e - &SymbolExpr::constant(c);
    segment_polynomials(&diff, m).is_zero()
}

/// Components of orders 0, −1, −2 of (b₀ + b₁ + b₂) ∘ (σ(P) + 1).
pub fn parametrix_components(m: &MetricDescriptor, t: &BTriple) -> Result<BTreeMap<i32, MatrixSymbol>> {
    let size = t.b1.n;
    let b0 = MatrixSymbol::scalar(size, &b0_expr());
    let p = vec![
        Graded { order: -2, sym: b0 },
        Graded { order: -3, sym: t.b1.clone() },
        Graded { order: -4, sym: t.b2.clone() },
    ];
    let a2s = t.parts.a2.add(&MatrixSymbol::scalar(size, &SymbolExpr::one()));
    let qs = vec![
        Graded { order: 2, sym: a2s },
        Graded { order: 1, sym: t.parts.a1.clone() },
        Graded { order: 0, sym: t.parts.a0.clone() },
    ];
    symbol_product_truncated(&p, &qs, -2, m)
}

/// Order 0 component equals the identity, orders −1 and −2 vanish.
pub fn check_parametrix(m: &MetricDescriptor, t: &BTriple) -> Result<bool> {
    let comps = parametrix_components(m, t)?;
    let size = t.b1.n;
    for (ord, s) in &comps {
        for r in 0..size {
            for c in 0..size {
                let target = if *ord == 0 && r == c { qi(1) } else { Q::zero() };
                if !equals_constant(s.get(r, c), target, m) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(comps.contains_key(&0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::MultiIndex;

    #[test]
    fn flat_nullity() {
        let m = MetricDescriptor::flat(3);
        let t = parametrix(&m, Form::Functions).unwrap();
        assert!(t.b1.is_zero() && t.b2.is_zero());
    }

    #[test]
    fn homogeneity() {
        for m in [MetricDescriptor::conformal3(), MetricDescriptor::nonconformal3(), MetricDescriptor::conformal2()] {
            let t = parametrix(&m, Form::Functions).unwrap();
            assert!(is_homogeneous(&t.b1.entries[0], -3));
            assert!(is_homogeneous(&t.b2.entries[0], -4));
        }
    }

    #[test]
    fn conformal_b1_has_single_first_derivative() {
        let t = parametrix(&MetricDescriptor::conformal3(), Form::Functions).unwrap();
        for (_, w, _) in t.b1.entries[0].iter() {
            let dks: Vec<_> = w.atoms().iter().filter(|a| matches!(a, Atom::DK(_))).collect();
            assert_eq!(dks.len(), 1);
            assert!(matches!(dks[0], Atom::DK(al) if al.order() == 1));
        }
    }

    #[test]
    fn b0_times_one_plus_a2_is_one() {
        let m = MetricDescriptor::nonconformal3();
        let e = &b0_expr() * &(&SymbolExpr::one() + &m.a2_scalar());
        assert!(equals_constant(&e, qi(1), &m));
        assert!(!equals_constant(&b0_expr(), qi(1), &m));
    }

    #[test]
    fn nonconformal_b1_contains_a1_piece() {
        let m = MetricDescriptor::nonconformal3();
        let t = parametrix(&m, Form::Functions).unwrap();
        // −b₀ (k^{-1}δ₃(k) − δ₃(k)k^{-1}) ξ₃ b₀
        let d3 = Atom::DK(MultiIndex::unit(2));
        let w1 = Word::from_atoms([Atom::KPow(-1), Atom::B0(1), d3, Atom::B0(1)]);
        let w2 = Word::from_atoms([Atom::B0(1), d3, Atom::KPow(-1), Atom::B0(1)]);
        assert_eq!(t.b1.entries[0].coefficient(&[0, 0, 1], &w1), qi(-1));
        assert_eq!(t.b1.entries[0].coefficient(&[0, 0, 1], &w2), qi(1));
    }

    #[test]
    fn product_of_constants() {
        let m = MetricDescriptor::conformal3();
        let a = MatrixSymbol::scalar(1, &SymbolExpr::constant(qi(3)));
        let b = MatrixSymbol::scalar(1, &SymbolExpr::constant(qi(5)));
        let out = symbol_product_truncated(
            &[Graded { order: 0, sym: a }],
            &[Graded { order: 0, sym: b }],
            -2,
            &m,
        )
        .unwrap();
        assert_eq!(out[&0].entries[0], SymbolExpr::constant(qi(15)));
        assert!(out.get(&-1).is_none_or(|s| s.is_zero()));
    }

    #[test]
    fn second_order_weight_is_half() {
        let m = MetricDescriptor::flat(3);
        // p = ξ₁², q = k: ∂₁² p δ₁² q / 2 = δ₁²(k)
        let p = MatrixSymbol::scalar(1, &SymbolExpr::term(Q::one(), [2, 0, 0], Word::one()));
        let qq = MatrixSymbol::scalar(1, &SymbolExpr::kpow(1));
        let out = symbol_product_truncated(
            &[Graded { order: 2, sym: p }],
            &[Graded { order: 0, sym: qq }],
            0,
            &m,
        )
        .unwrap();
        let want = SymbolExpr::atom(Atom::DK(MultiIndex::pair(0, 0)));
        assert_eq!(out[&0].entries[0], want);
    }

    #[test]
    fn parametrix_scalar_all_metrics() {
        for m in [MetricDescriptor::conformal3(), MetricDescriptor::nonconformal3(), MetricDescriptor::conformal2()] {
            let t = parametrix(&m, Form::Functions).unwrap();
            assert!(check_parametrix(&m, &t).unwrap(), "{}", m.name());
        }
    }

    #[test]
    fn parametrix_detects_perturbation() {
        let m = MetricDescriptor::nonconformal3();
        let mut t = parametrix(&m, Form::Functions).unwrap();
        let first = t.b2.entries[0].terms().next().unwrap();
        t.b2.entries[0].add_term(first.coeff, first.xi, first.word);
        assert!(!check_parametrix(&m, &t).unwrap());
    }

    #[test]
    fn parametrix_one_forms() {
        for m in [MetricDescriptor::conformal3(), MetricDescriptor::nonconformal3()] {
            let t = parametrix(&m, Form::OneForms).unwrap();
            assert!(check_parametrix(&m, &t).unwrap(), "{}", m.name());
        }
    }
}
