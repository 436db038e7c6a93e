//! Metric descriptors and the differential operators they induce.

use crate::coeff::{q, Coefficient, Q};
use crate::error::{Error, Result};
use crate::symbols::{delta, Atom, MatrixSymbol, SymbolExpr};
use num_traits::One;
use std::collections::BTreeMap;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MetricKind {
    Conformal3,
    Nonconformal3,
    Conformal2,
    /// Flat metric in dimension n; used as a null reference.
    Flat(usize),
}

/// How b₂ is integrated over ξ.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reduction {
    /// a₂ = k^a |ξ|²; spherical coordinates.
    Spherical,
    /// a₂ = k²(ξ₁² + ξ₂²) + ξ₃²; the (u, η, θ) substitution.
    Cylindrical,
}

/// One factor of an operator word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OpFactor {
    /// Left multiplication by a ξ-free element.
    Mul(SymbolExpr),
    /// The derivation δ_j (0-based).
    D(usize),
}

/// Coefficient times an ordered product of factors, applied right to left.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpWord {
    pub coeff: Q,
    pub factors: Vec<OpFactor>,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Operator {
    pub words: Vec<OpWord>,
}

impl Operator {
    pub fn zero() -> Self {
        Operator::default()
    }

    pub fn push(&mut self, coeff: Q, factors: Vec<OpFactor>) {
        self.words.push(OpWord { coeff, factors });
    }

    /// k^{r1} δ_i k^{r2} δ_j k^{r3}
    pub fn push_kdkdk(&mut self, coeff: Q, r1: i32, i: usize, r2: i32, j: usize, r3: i32) {
        self.push(
            coeff,
            vec![
                OpFactor::Mul(SymbolExpr::kpow(r1)),
                OpFactor::D(i),
                OpFactor::Mul(SymbolExpr::kpow(r2)),
                OpFactor::D(j),
                OpFactor::Mul(SymbolExpr::kpow(r3)),
            ],
        );
    }

    pub fn order(&self) -> usize {
        self.words
            .iter()
            .map(|w| w.factors.iter().filter(|f| matches!(f, OpFactor::D(_))).count())
            .max()
            .unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.words.is_empty()
    }
}

/// Square matrix of operators; entry (r, c) maps component c to output r.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrixOperator {
    pub n: usize,
    pub entries: Vec<Operator>,
}

impl MatrixOperator {
    pub fn zero(n: usize) -> Self {
        MatrixOperator { n, entries: vec![Operator::zero(); n * n] }
    }

    pub fn scalar(op: Operator) -> Self {
        MatrixOperator { n: 1, entries: vec![op] }
    }

    pub fn get_mut(&mut self, r: usize, c: usize) -> &mut Operator {
        &mut self.entries[r * self.n + c]
    }
}

#[derive(Clone, Debug)]
pub struct MetricDescriptor {
    pub kind: MetricKind,
    pub dimension: usize,
    /// a₂ = Σ_j k^{leading[j]} ξ_j²
    pub leading: Vec<i32>,
    pub scalar_op: Operator,
    pub one_form_op: Option<MatrixOperator>,
    /// Δ(x) = k^{-e} x k^{e}
    pub modular_exponent: i32,
    /// b₀(u) = (1 + u k^a)^{-1} after reduction
    pub radial_power: i32,
    pub reduction: Reduction,
    /// Multiplies the integrated density to give the reported density.
    pub normalization: Coefficient,
    /// log k = kappa · h
    pub log_k_in_h: Q,
}

impl fmt::Display for MetricDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

impl MetricDescriptor {
    pub fn name(&self) -> String {
        match self.kind {
            MetricKind::Conformal3 => "conformal3".into(),
            MetricKind::Nonconformal3 => "nonconformal3".into(),
            MetricKind::Conformal2 => "conformal2".into(),
            MetricKind::Flat(n) => format!("flat{}", n),
        }
    }

    /// Looks up one of the supported metrics by name.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "conformal3" => Ok(Self::conformal3()),
            "nonconformal3" => Ok(Self::nonconformal3()),
            "conformal2" => Ok(Self::conformal2()),
            other => Err(Error::UnknownMetric(other.to_string())),
        }
    }

    pub fn supported_names() -> [&'static str; 3] {
        ["conformal3", "nonconformal3", "conformal2"]
    }

    /// Conformally flat metric e^{-2h} I₃ with k = e^{h/2}.
    pub fn conformal3() -> Self {
        let mut scalar = Operator::zero();
        for j in 0..3 {
            scalar.push_kdkdk(Q::one(), 3, j, -2, j, 3);
        }
        let mut one = MatrixOperator::zero(3);
        for r in 0..3 {
            for m in 0..3 {
                if m != r {
                    one.get_mut(r, r).push_kdkdk(Q::one(), 1, m, 2, m, 1);
                }
            }
            for c in 0..3 {
                if c != r {
                    one.get_mut(r, c).push_kdkdk(-Q::one(), 1, c, 2, r, 1);
                }
                one.get_mut(r, c).push_kdkdk(Q::one(), -1, r, 6, c, -1);
            }
        }
        MetricDescriptor {
            kind: MetricKind::Conformal3,
            dimension: 3,
            leading: vec![4, 4, 4],
            scalar_op: scalar,
            one_form_op: Some(one),
            modular_exponent: 6,
            radial_power: 4,
            reduction: Reduction::Spherical,
            normalization: Coefficient::new(Q::one(), 3),
            log_k_in_h: q(1, 2),
        }
    }

    /// Metric e^{-2h}(dx² + dy²) + dz² with k = e^{h}.
    pub fn nonconformal3() -> Self {
        let mut scalar = Operator::zero();
        scalar.push_kdkdk(Q::one(), 1, 0, 0, 0, 1);
        scalar.push_kdkdk(Q::one(), 1, 1, 0, 1, 1);
        scalar.push_kdkdk(Q::one(), 1, 2, -2, 2, 1);

        let d = |j: usize, e: &SymbolExpr| delta(j, e).expect("first derivative of a k-power");
        let k2 = SymbolExpr::kpow(2);
        // δ₃(k²) k^{-1} and k^{-1} δ₃(k²)
        let d3k2_kinv = &d(2, &k2) * &SymbolExpr::kpow(-1);
        let kinv_d3k2 = &SymbolExpr::kpow(-1) * &d(2, &k2);

        let mut one = MatrixOperator::zero(3);
        for r in 0..2 {
            let o = 1 - r;
            {
                let e = one.get_mut(r, r);
                e.push_kdkdk(Q::one(), 0, 0, 2, 0, 0);
                e.push_kdkdk(Q::one(), 0, 1, 2, 1, 0);
                e.push_kdkdk(Q::one(), 0, 2, 0, 2, 0);
            }
            // row 1: δ₁(k²)δ₂(a₂) − δ₂(k²)δ₁(a₂); row 2: δ₂(k²)δ₁(a₁) − δ₁(k²)δ₂(a₁)
            let e = one.get_mut(r, o);
            e.push(Q::one(), vec![OpFactor::Mul(d(r, &k2)), OpFactor::D(o)]);
            e.push(-Q::one(), vec![OpFactor::Mul(d(o, &k2)), OpFactor::D(r)]);
            // −δ_r(δ₃(k²)k^{-1} a₃)
            one.get_mut(r, 2)
                .push(-Q::one(), vec![OpFactor::D(r), OpFactor::Mul(d3k2_kinv.clone())]);
            // k^{-1}δ₃(k²) δ_r(a_r) in row 3
            one.get_mut(2, r)
                .push(Q::one(), vec![OpFactor::Mul(kinv_d3k2.clone()), OpFactor::D(r)]);
        }
        {
            let e = one.get_mut(2, 2);
            e.push_kdkdk(Q::one(), 1, 0, 0, 0, 1);
            e.push_kdkdk(Q::one(), 1, 1, 0, 1, 1);
            e.push_kdkdk(Q::one(), -1, 2, 2, 2, -1);
        }
        MetricDescriptor {
            kind: MetricKind::Nonconformal3,
            dimension: 3,
            leading: vec![2, 2, 0],
            scalar_op: scalar,
            one_form_op: Some(one),
            modular_exponent: 2,
            radial_power: 2,
            reduction: Reduction::Cylindrical,
            normalization: Coefficient::new(Q::one(), 3),
            log_k_in_h: Q::one(),
        }
    }

    /// Two-dimensional conformal factor: the operator k δ*δ k on T²_θ.
    pub fn conformal2() -> Self {
        let mut scalar = Operator::zero();
        for j in 0..2 {
            scalar.push_kdkdk(Q::one(), 1, j, 0, j, 1);
        }
        MetricDescriptor {
            kind: MetricKind::Conformal2,
            dimension: 2,
            leading: vec![2, 2],
            scalar_op: scalar,
            one_form_op: None,
            modular_exponent: 2,
            radial_power: 2,
            reduction: Reduction::Spherical,
            normalization: Coefficient::new(q(1, 2), 1),
            log_k_in_h: Q::one(),
        }
    }

    /// Flat Laplacian Σδ_j² in dimension n (2 or 3).
    pub fn flat(n: usize) -> Self {
        let mut scalar = Operator::zero();
        for j in 0..n {
            scalar.push(Q::one(), vec![OpFactor::D(j), OpFactor::D(j)]);
        }
        let mut one = MatrixOperator::zero(n);
        for r in 0..n {
            *one.get_mut(r, r) = scalar.clone();
        }
        MetricDescriptor {
            kind: MetricKind::Flat(n),
            dimension: n,
            leading: vec![0; n],
            scalar_op: scalar,
            one_form_op: if n == 3 { Some(one) } else { None },
            modular_exponent: 2,
            radial_power: 0,
            reduction: Reduction::Spherical,
            normalization: if n == 3 { Coefficient::new(Q::one(), 3) } else { Coefficient::new(q(1, 2), 1) },
            log_k_in_h: Q::one(),
        }
    }

    pub fn is_flat(&self) -> bool {
        matches!(self.kind, MetricKind::Flat(_))
    }

    /// The scalar leading symbol Σ k^{c_j} ξ_j².
    pub fn a2_scalar(&self) -> SymbolExpr {
        let mut e = SymbolExpr::zero();
        for (j, &c) in self.leading.iter().enumerate() {
            let mut xi = [0u8; 3];
            xi[j] = 2;
            e.add_term(Q::one(), xi, crate::symbols::Word::from_atoms([Atom::KPow(c)]));
        }
        e
    }

    pub fn has_one_forms(&self) -> bool {
        self.one_form_op.is_some()
    }
}

/// Expands an operator into its full symbol (all homogeneous parts).
pub fn operator_to_symbol(op: &Operator) -> Result<SymbolExpr> {
    let ord = op.order();
    if ord > 2 {
        return Err(Error::OrderTooHigh(ord));
    }
    let mut total = SymbolExpr::zero();
    for w in &op.words {
        // normal form Σ_β y_β δ^β, built by applying factors right to left
        let mut nf: BTreeMap<[u8; 3], SymbolExpr> = BTreeMap::new();
        nf.insert([0; 3], SymbolExpr::one());
        for f in w.factors.iter().rev() {
            match f {
                OpFactor::Mul(x) => {
                    for y in nf.values_mut() {
                        *y = x * y;
                    }
                }
                OpFactor::D(j) => {
                    let mut next: BTreeMap<[u8; 3], SymbolExpr> = BTreeMap::new();
                    for (beta, y) in &nf {
                        let dy = delta(*j, y)?;
                        if !dy.is_zero() {
                            *next.entry(*beta).or_default() += &dy;
                        }
                        let mut b2 = *beta;
                        b2[*j] += 1;
                        *next.entry(b2).or_default() += y;
                    }
                    nf = next;
                }
            }
        }
        for (beta, y) in nf {
            let xi = SymbolExpr::term(Q::one(), beta, crate::symbols::Word::one());
            total += &(&y * &xi).scale(w.coeff);
        }
    }
    Ok(total)
}

pub fn matrix_operator_to_symbol(op: &MatrixOperator) -> Result<MatrixSymbol> {
    let entries = op.entries.iter().map(operator_to_symbol).collect::<Result<Vec<_>>>()?;
    Ok(MatrixSymbol { n: op.n, entries })
}

/// Homogeneous parts (a₂, a₁, a₀) of a matrix symbol.
#[derive(Clone, Debug)]
pub struct SymbolParts {
    pub a2: MatrixSymbol,
    pub a1: MatrixSymbol,
    pub a0: MatrixSymbol,
}

impl SymbolParts {
    pub fn split(full: &MatrixSymbol) -> Self {
        SymbolParts {
            a2: full.map(|e| e.degree_part(2)),
            a1: full.map(|e| e.degree_part(1)),
            a0: full.map(|e| e.degree_part(0)),
        }
    }
}

/// Which Laplacian of a metric to work with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Form {
    Functions,
    OneForms,
}

/// Symbol parts of the Laplacian on functions (1×1) or on 1-forms (3×3).
pub fn laplacian_symbol(m: &MetricDescriptor, form: Form) -> Result<SymbolParts> {
    let full = match form {
        Form::Functions => MatrixSymbol { n: 1, entries: vec![operator_to_symbol(&m.scalar_op)?] },
        Form::OneForms => {
            let op = m
                .one_form_op
                .as_ref()
                .ok_or_else(|| Error::Other(format!("{} has no 1-form Laplacian", m.name())))?;
            matrix_operator_to_symbol(op)?
        }
    };
    let parts = SymbolParts::split(&full);
    let expected = MatrixSymbol::scalar(full.n, &m.a2_scalar());
    if parts.a2 != expected {
        return Err(Error::Shape(format!(
            "principal symbol of {} does not match the leading coefficients",
            m.name()
        )));
    }
    Ok(parts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::qi;
    use crate::symbols::{MultiIndex, Word};

    fn dk(j: usize) -> Atom {
        Atom::DK(MultiIndex::unit(j))
    }

    #[test]
    fn single_derivation() {
        let mut op = Operator::zero();
        op.push(Q::one(), vec![OpFactor::D(0)]);
        assert_eq!(operator_to_symbol(&op).unwrap(), SymbolExpr::xi(0));
    }

    #[test]
    fn order_three_rejected() {
        let mut op = Operator::zero();
        op.push(Q::one(), vec![OpFactor::D(0), OpFactor::D(0), OpFactor::D(1)]);
        assert_eq!(operator_to_symbol(&op), Err(Error::OrderTooHigh(3)));
    }

    #[test]
    fn flat_laplacian_has_no_lower_parts() {
        let p = laplacian_symbol(&MetricDescriptor::flat(3), Form::Functions).unwrap();
        assert!(p.a1.is_zero() && p.a0.is_zero());
        let p = laplacian_symbol(&MetricDescriptor::flat(3), Form::OneForms).unwrap();
        assert!(p.a1.is_zero() && p.a0.is_zero());
    }

    #[test]
    fn principal_parts_match_leading() {
        for m in [MetricDescriptor::conformal3(), MetricDescriptor::nonconformal3()] {
            laplacian_symbol(&m, Form::Functions).unwrap();
            laplacian_symbol(&m, Form::OneForms).unwrap();
        }
        laplacian_symbol(&MetricDescriptor::conformal2(), Form::Functions).unwrap();
    }

    #[test]
    fn conformal_scalar_a1() {
        let m = MetricDescriptor::conformal3();
        let p = laplacian_symbol(&m, Form::Functions).unwrap();
        // a₁ = Σ (2kδ_j(k³) + k³δ_j(k^{-2})k³) ξ_j
        let mut want = SymbolExpr::zero();
        for j in 0..3 {
            let x = SymbolExpr::xi(j);
            let t1 = (&SymbolExpr::kpow(1) * &delta(j, &SymbolExpr::kpow(3)).unwrap()).scale(qi(2));
            let t2 = &(&SymbolExpr::kpow(3) * &delta(j, &SymbolExpr::kpow(-2)).unwrap()) * &SymbolExpr::kpow(3);
            want += &(&(&t1 + &t2) * &x);
        }
        assert_eq!(p.a1.entries[0], want);
    }

    #[test]
    fn nonconformal_scalar_lower_parts() {
        let m = MetricDescriptor::nonconformal3();
        let p = laplacian_symbol(&m, Form::Functions).unwrap();
        let a1 = &p.a1.entries[0];
        // ξ₃ coefficient k^{-1}δ₃(k) − δ₃(k)k^{-1}
        let mut want3 = SymbolExpr::zero();
        want3.add_term(Q::one(), [0, 0, 1], Word::from_atoms([Atom::KPow(-1), dk(2)]));
        want3.add_term(-Q::one(), [0, 0, 1], Word::from_atoms([dk(2), Atom::KPow(-1)]));
        assert_eq!(a1.filter(|xi, _| xi[2] == 1), want3);
        // ξ₁ coefficient 2kδ₁(k)
        assert_eq!(a1.coefficient(&[1, 0, 0], &Word::from_atoms([Atom::KPow(1), dk(0)])), qi(2));
    }

    #[test]
    fn conformal_one_form_a1_entry() {
        let m = MetricDescriptor::conformal3();
        let p = laplacian_symbol(&m, Form::OneForms).unwrap();
        // (1,2) entry, ξ₁ part: −kδ₂(k⁴)k^{-1}
        let k4 = SymbolExpr::kpow(4);
        let want = (&(&SymbolExpr::kpow(1) * &delta(1, &k4).unwrap()) * &SymbolExpr::kpow(-1))
            .scale(-Q::one());
        let want = &want * &SymbolExpr::xi(0);
        assert_eq!(p.a1.get(0, 1).filter(|xi, _| xi[0] == 1), want);
        // (1,1) ξ₁ part: k⁵δ₁(k^{-1}) + k^{-1}δ₁(k⁵)
        let w = &(&SymbolExpr::kpow(5) * &delta(0, &SymbolExpr::kpow(-1)).unwrap())
            + &(&SymbolExpr::kpow(-1) * &delta(0, &SymbolExpr::kpow(5)).unwrap());
        assert_eq!(p.a1.get(0, 0).filter(|xi, _| xi[0] == 1), &w * &SymbolExpr::xi(0));
    }

    #[test]
    fn conformal_one_form_a0_matches_printed() {
        let m = MetricDescriptor::conformal3();
        let p = laplacian_symbol(&m, Form::OneForms).unwrap();
        let k = |r| SymbolExpr::kpow(r);
        let d = |j, e: &SymbolExpr| delta(j, e).unwrap();
        let mut common = SymbolExpr::zero();
        for j in 0..3 {
            common += &(&k(1) * &d(j, &(&k(2) * &d(j, &k(1)))));
        }
        for i in 0..3 {
            for j in 0..3 {
                let mut want = &(&k(-1) * &d(i, &(&k(6) * &d(j, &k(-1))))) - &(&k(1) * &d(j, &(&k(2) * &d(i, &k(1)))));
                if i == j {
                    want += &common;
                }
                assert_eq!(p.a0.get(i, j), &want, "entry {} {}", i, j);
            }
        }
    }

    #[test]
    fn nonconformal_one_form_matches_printed() {
        let m = MetricDescriptor::nonconformal3();
        let p = laplacian_symbol(&m, Form::OneForms).unwrap();
        let k = |r| SymbolExpr::kpow(r);
        let d = |j, e: &SymbolExpr| delta(j, e).unwrap();
        let x = SymbolExpr::xi;
        let k2 = k(2);
        // (1,2): δ₁(k²)ξ₂ − δ₂(k²)ξ₁
        let want = &(&d(0, &k2) * &x(1)) - &(&d(1, &k2) * &x(0));
        assert_eq!(p.a1.get(0, 1), &want);
        // (3,3): 2kΣδ_i(k)ξ_i + [k^{-1}, δ₃(k)]ξ₃
        let mut want = SymbolExpr::zero();
        for i in 0..2 {
            want += &(&(&k(1) * &d(i, &k(1))) * &x(i)).scale(qi(2));
        }
        let comm = &(&k(-1) * &d(2, &k(1))) - &(&d(2, &k(1)) * &k(-1));
        want += &(&comm * &x(2));
        assert_eq!(p.a1.get(2, 2), &want);
        // a₀ (1,3): −δ₁(δ₃(k²)k^{-1})
        let want = d(0, &(&d(2, &k2) * &k(-1))).scale(-Q::one());
        assert_eq!(p.a0.get(0, 2), &want);
        assert!(p.a0.get(0, 0).is_zero() && p.a0.get(2, 0).is_zero());
        let want = &(&(&k(1) * &d(0, &d(0, &k(1)))) + &(&k(1) * &d(1, &d(1, &k(1)))))
            + &(&k(-1) * &d(2, &(&k2 * &d(2, &k(-1)))));
        assert_eq!(p.a0.get(2, 2), &want);
    }
}
