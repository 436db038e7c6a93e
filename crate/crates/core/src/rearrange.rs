//! Rearrangement of radial integrals into functions of the modular operator.
//!
//! A radial integral k^{lead} ∫ u^{Σm−ν} b₀^{m₀} ρ₁ b₀^{m₁} ⋯ du becomes
//! k^{lead + a(ν−1−Σm)} F(Δ₍₁₎, …, Δ₍p₎)(ρ₁ ⋯ ρ_p), where
//! F(s) = ∫₀^∞ (1+v)^{−m₀} Π_j (1 + v Π_{h≤j} s_h^q)^{−m_j} v^{Σm−ν} dv and
//! q = a/e. Spectral functions are evaluated in ∇-coordinates, Δ = e^s.

use crate::coeff::{q_to_f64, Coefficient, Q};
use crate::error::{Error, Result};
use crate::metric::MetricDescriptor;
use crate::quad::{default_tolerance, integrate_half_line};
use crate::reduce::RadialIntegral;
use crate::symbols::{sub, Atom, MultiIndex, Word};
use num_traits::{One, Zero};
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::OnceLock;

/// Parameters of one rearrangement integral.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FSpec {
    pub m: Vec<u32>,
    pub nu: Q,
    /// exponent q in (1 + v Π s_h^q)
    pub q: Q,
}

impl FSpec {
    pub fn new(m: Vec<u32>, nu: Q, q: Q) -> Self {
        FSpec { m, nu, q }
    }

    /// Functions of the conformal family (q = 2/3, ν = 3/2).
    pub fn conformal(m: &[u32]) -> Self {
        FSpec::new(m.to_vec(), Q::new(3, 2), Q::new(2, 3))
    }

    /// Functions of the non-conformal family (q = 1).
    pub fn nonconformal(nu: i128, m: &[u32]) -> Self {
        FSpec::new(m.to_vec(), Q::from_integer(nu), Q::one())
    }

    pub fn arity(&self) -> usize {
        self.m.len() - 1
    }

    pub fn u_power(&self) -> Q {
        Q::from_integer(self.m.iter().sum::<u32>() as i128) - self.nu
    }

    pub fn check_integrable(&self) -> Result<()> {
        let p = self.u_power();
        if p <= -Q::one() || self.nu <= Q::one() {
            return Err(Error::NotIntegrable(self.to_string()));
        }
        Ok(())
    }

    /// Value at ∇-coordinates x (Δ_h = e^{x_h}) by adaptive quadrature.
    pub fn eval_log(&self, x: &[f64], tol: f64) -> f64 {
        debug_assert_eq!(x.len(), self.arity());
        let qf = q_to_f64(&self.q);
        let pw = q_to_f64(&self.u_power());
        let mut scales = Vec::with_capacity(x.len());
        let mut acc = 0.0;
        for &xi in x {
            acc += qf * xi;
            scales.push(acc.exp());
        }
        let m = &self.m;
        let f = |v: f64| {
            let mut val = v.powf(pw) * (1.0 + v).powi(-(m[0] as i32));
            for (j, s) in scales.iter().enumerate() {
                if m[j + 1] > 0 {
                    val *= (1.0 + v * s).powi(-(m[j + 1] as i32));
                }
            }
            val
        };
        integrate_half_line(f, tol).value
    }

    /// Value at Δ-coordinates (all entries positive).
    pub fn eval(&self, s: &[f64], tol: f64) -> f64 {
        let x: Vec<f64> = s.iter().map(|v| v.ln()).collect();
        self.eval_log(&x, tol)
    }

    /// Name in the catalogue notation, e.g. `F_{2,1}` or `F^[3]_{2,1}`.
    pub fn name(&self) -> String {
        let idx = self.m.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        if self.q == Q::new(2, 3) && self.nu == Q::new(3, 2) {
            format!("F_{{{}}}", idx)
        } else if self.q.is_one() && self.nu.is_integer() {
            format!("F^[{}]_{{{}}}", self.nu, idx)
        } else {
            format!("F(q={},nu={})_{{{}}}", self.q, self.nu, idx)
        }
    }
}

impl fmt::Display for FSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// Linear form Σ c_i s_i over the slots of a spectral function.
pub type LinForm = Vec<Q>;

pub fn lin_eval(l: &[Q], s: &[f64]) -> f64 {
    l.iter().zip(s).map(|(c, x)| q_to_f64(c) * x).sum()
}

pub fn lin_unit(i: usize, p: usize) -> LinForm {
    let mut v = vec![Q::zero(); p];
    v[i] = Q::one();
    v
}

/// Re-expresses a linear form over old slots in terms of new slots.
pub fn lin_substitute(l: &[Q], map: &[LinForm], new_p: usize) -> LinForm {
    let mut out = vec![Q::zero(); new_p];
    for (c, img) in l.iter().zip(map) {
        for (o, x) in out.iter_mut().zip(img) {
            *o += *c * *x;
        }
    }
    out
}

/// Translation factors from k^{-1}δ(k) units to δ(log k).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Trans {
    /// f(e^x) = ∫₀¹ e^{σx/w} dσ
    F { w: i32, arg: LinForm },
    /// g(e^x, e^y) = ∫₀¹∫₀^σ e^{(σx + τy)/w} dτ dσ
    G { w: i32, a: LinForm, b: LinForm },
}

/// (e^z − 1)/z
pub fn phi1(z: f64) -> f64 {
    if z.abs() < 1e-8 {
        1.0 + 0.5 * z
    } else {
        z.exp_m1() / z
    }
}

pub fn f_trans(x: f64, w: f64) -> f64 {
    phi1(x / w)
}

fn gauss_legendre() -> &'static (Vec<f64>, Vec<f64>) {
    static GL: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    GL.get_or_init(|| {
        let n = 24;
        let mut xs = Vec::with_capacity(n);
        let mut ws = Vec::with_capacity(n);
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            xs.push(0.5 * (1.0 - x));
            ws.push(1.0 / ((1.0 - x * x) * dp * dp));
        }
        (xs, ws)
    })
}

/// g in ∇-coordinates: ∫₀¹ e^{aσ} σ φ₁(bσ) dσ with a = x/w, b = y/w.
pub fn g_trans(x: f64, y: f64, w: f64) -> f64 {
    let (a, b) = (x / w, y / w);
    let (xs, ws) = gauss_legendre();
    xs.iter().zip(ws).map(|(s, wt)| wt * (a * s).exp() * s * phi1(b * s)).sum()
}

impl Trans {
    pub fn eval(&self, s: &[f64]) -> f64 {
        match self {
            Trans::F { w, arg } => f_trans(lin_eval(arg, s), *w as f64),
            Trans::G { w, a, b } => g_trans(lin_eval(a, s), lin_eval(b, s), *w as f64),
        }
    }

    fn substitute(&self, map: &[LinForm], p: usize) -> Trans {
        match self {
            Trans::F { w, arg } => Trans::F { w: *w, arg: lin_substitute(arg, map, p) },
            Trans::G { w, a, b } => Trans::G { w: *w, a: lin_substitute(a, map, p), b: lin_substitute(b, map, p) },
        }
    }
}

/// coeff · e^{exp·s} · F_spec(args·s) · Π factors
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Contribution {
    pub coeff: Coefficient,
    pub exp: LinForm,
    pub spec: FSpec,
    pub args: Vec<LinForm>,
    pub factors: Vec<Trans>,
}

impl Contribution {
    fn substitute(&self, map: &[LinForm], p: usize) -> Contribution {
        Contribution {
            coeff: self.coeff,
            exp: lin_substitute(&self.exp, map, p),
            spec: self.spec.clone(),
            args: self.args.iter().map(|a| lin_substitute(a, map, p)).collect(),
            factors: self.factors.iter().map(|t| t.substitute(map, p)).collect(),
        }
    }

    /// Identity up to the coefficient.
    fn shape_key(&self) -> (LinForm, FSpec, Vec<LinForm>, Vec<Trans>, i32) {
        let mut f = self.factors.clone();
        f.sort();
        (self.exp.clone(), self.spec.clone(), self.args.clone(), f, self.coeff.pi_half)
    }
}

/// Cache of F values keyed by spec and argument bit patterns.
#[derive(Default)]
pub struct FCache {
    map: HashMap<(FSpec, Vec<u64>), f64>,
    pub tol: f64,
}

impl FCache {
    pub fn new(tol: f64) -> Self {
        FCache { map: HashMap::new(), tol }
    }

    pub fn get(&mut self, spec: &FSpec, x: &[f64]) -> f64 {
        let key = (spec.clone(), x.iter().map(|v| v.to_bits()).collect());
        if let Some(v) = self.map.get(&key) {
            return *v;
        }
        let v = spec.eval_log(x, self.tol);
        self.map.insert(key, v);
        v
    }
}

/// Sum of contributions; arity p.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct SpectralFunction {
    pub arity: usize,
    pub terms: Vec<Contribution>,
}

impl SpectralFunction {
    pub fn zero(arity: usize) -> Self {
        SpectralFunction { arity, terms: Vec::new() }
    }

    pub fn leaf(coeff: Coefficient, spec: FSpec) -> Self {
        let p = spec.arity();
        SpectralFunction {
            arity: p,
            terms: vec![Contribution {
                coeff,
                exp: vec![Q::zero(); p],
                args: (0..p).map(|i| lin_unit(i, p)).collect(),
                spec,
                factors: Vec::new(),
            }],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&mut self, other: &SpectralFunction) {
        assert_eq!(self.arity, other.arity, "arity mismatch in spectral sum");
        self.terms.extend(other.terms.iter().cloned());
    }

    pub fn scale(&self, c: Coefficient) -> SpectralFunction {
        SpectralFunction {
            arity: self.arity,
            terms: self.terms.iter().map(|t| Contribution { coeff: t.coeff * c, ..t.clone() }).filter(|t| !t.coeff.is_zero()).collect(),
        }
    }

    /// Multiplies by e^{l·s}.
    pub fn times_exp(&self, l: &[Q]) -> SpectralFunction {
        let mut out = self.clone();
        for t in &mut out.terms {
            for (e, c) in t.exp.iter_mut().zip(l) {
                *e += *c;
            }
        }
        out
    }

    pub fn times_factor(&self, f: Trans) -> SpectralFunction {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.factors.push(f.clone());
        }
        out
    }

    /// Rewrites in terms of `new_p` slots, slot i ↦ map[i].
    pub fn substitute(&self, map: &[LinForm], new_p: usize) -> SpectralFunction {
        SpectralFunction { arity: new_p, terms: self.terms.iter().map(|t| t.substitute(map, new_p)).collect() }
    }

    /// Merges contributions that differ only in their coefficient.
    pub fn simplify(&self) -> SpectralFunction {
        let mut acc: BTreeMap<_, (Q, Contribution)> = BTreeMap::new();
        for t in &self.terms {
            let key = t.shape_key();
            let e = acc.entry(key).or_insert_with(|| (Q::zero(), t.clone()));
            e.0 += t.coeff.rat;
        }
        let mut terms: Vec<Contribution> = acc
            .into_values()
            .filter(|(r, _)| !r.is_zero())
            .map(|(r, mut t)| {
                t.coeff = Coefficient::new(r, t.coeff.pi_half);
                t.factors.sort();
                t
            })
            .collect();
        terms.sort();
        SpectralFunction { arity: self.arity, terms }
    }

    /// Distinct F leaves with their arguments.
    pub fn leaves(&self) -> Vec<(FSpec, Vec<LinForm>)> {
        let mut v: Vec<_> = self.terms.iter().map(|t| (t.spec.clone(), t.args.clone())).collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn eval_with(&self, s: &[f64], cache: &mut FCache) -> f64 {
        assert_eq!(s.len(), self.arity, "point dimension does not match arity");
        let mut total = 0.0;
        let mut xs = Vec::new();
        for t in &self.terms {
            xs.clear();
            xs.extend(t.args.iter().map(|a| lin_eval(a, s)));
            let fv = cache.get(&t.spec, &xs);
            let mut v = t.coeff.to_f64() * lin_eval(&t.exp, s).exp() * fv;
            for tr in &t.factors {
                v *= tr.eval(s);
            }
            total += v;
        }
        total
    }

    pub fn eval(&self, s: &[f64]) -> f64 {
        let mut cache = FCache::new(default_tolerance());
        self.eval_with(s, &mut cache)
    }
}

/// Spectral terms keyed by (k-power prefix, operand word).
///
/// Operand slots hold a ρ word before normalization, a single `DK(α)` atom
/// standing for the unit k^{-1}δ^α(k) after it, and `DLogK` atoms after
/// translation.
#[derive(Clone, Debug, Default)]
pub struct SpectralExpr {
    pub terms: BTreeMap<(i32, Vec<Word>), SpectralFunction>,
}

impl SpectralExpr {
    pub fn add(&mut self, prefix: i32, operand: Vec<Word>, f: &SpectralFunction) {
        match self.terms.get_mut(&(prefix, operand.clone())) {
            Some(e) => e.add(f),
            None => {
                self.terms.insert((prefix, operand), f.clone());
            }
        }
    }

    pub fn merge(&mut self, other: &SpectralExpr) {
        for ((p, o), f) in &other.terms {
            self.add(*p, o.clone(), f);
        }
    }

    pub fn simplify(&self) -> SpectralExpr {
        let mut out = SpectralExpr::default();
        for (k, f) in &self.terms {
            let s = f.simplify();
            if !s.is_zero() {
                out.terms.insert(k.clone(), s);
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, c: Coefficient) -> SpectralExpr {
        let mut out = SpectralExpr::default();
        for (k, f) in &self.terms {
            out.terms.insert(k.clone(), f.scale(c));
        }
        out
    }
}

/// The F-family parameter q = a/e of a metric.
pub fn family_q(m: &MetricDescriptor) -> Q {
    Q::new(m.radial_power as i128, m.modular_exponent as i128)
}

pub fn to_spectral(r: &RadialIntegral, m: &MetricDescriptor) -> Result<SpectralExpr> {
    let spec = FSpec::new(r.m.clone(), r.nu, family_q(m));
    spec.check_integrable()?;
    let total: i128 = r.m.iter().map(|&x| x as i128).sum();
    let shift = Q::from_integer(m.radial_power as i128) * (r.nu - Q::one() - Q::from_integer(total));
    if !shift.is_integer() {
        return Err(Error::Shape(format!("non-integral k power {} for {}", shift, spec)));
    }
    let prefix = r.lead + *shift.numer() as i32;
    let mut e = SpectralExpr::default();
    e.add(prefix, r.rho.clone(), &SpectralFunction::leaf(r.coeff, spec));
    Ok(e)
}

/// Splits a ρ word k^a δ^α(k) k^b into (a, α, b).
fn rho_shape(w: &Word) -> Result<(i32, MultiIndex, i32)> {
    let mut a = 0;
    let mut b = 0;
    let mut alpha = None;
    for at in w.atoms() {
        match at {
            Atom::KPow(r) => {
                if alpha.is_none() {
                    a += r
                } else {
                    b += r
                }
            }
            Atom::DK(al) if alpha.is_none() => alpha = Some(*al),
            other => return Err(Error::StageMismatch(format!("{:?} in operand", other))),
        }
    }
    let alpha = alpha.ok_or_else(|| Error::Shape("operand slot without a derivative".into()))?;
    Ok((a, alpha, b))
}

/// Pushes every k power to the left, leaving unit operands k^{-1}δ^α(k).
pub fn normalize_spectral(e: &SpectralExpr, m: &MetricDescriptor) -> Result<SpectralExpr> {
    let ev = Q::from_integer(m.modular_exponent as i128);
    let mut out = SpectralExpr::default();
    for ((prefix, operand), f) in &e.terms {
        let p = operand.len();
        let mut shapes = Vec::with_capacity(p);
        for w in operand {
            shapes.push(rho_shape(w)?);
        }
        // slot i is k^{a_i + 1} U_i k^{b_i}
        let mut exp = vec![Q::zero(); p];
        let mut new_prefix = *prefix;
        for (i, (a, _, b)) in shapes.iter().enumerate() {
            new_prefix += a + 1 + b;
            for (h, e) in exp.iter_mut().enumerate() {
                if h < i {
                    *e += Q::from_integer((a + 1) as i128) / ev;
                }
                if h <= i {
                    *e += Q::from_integer(*b as i128) / ev;
                }
            }
        }
        let units: Vec<Word> = shapes.iter().map(|(_, al, _)| Word::from_atoms([Atom::DK(*al)])).collect();
        out.add(new_prefix, units, &f.times_exp(&exp));
    }
    Ok(out.simplify())
}

/// Human-readable operand, e.g. `k⁻¹δ₁(k)·k⁻¹δ₁(k)` for units.
pub fn format_operand(o: &[Word]) -> String {
    o.iter()
        .map(|w| match w.atoms() {
            [Atom::DK(al)] => format!("k⁻¹{}(k)", al),
            [Atom::DLogK(al)] => format!("{}(log k)", al),
            _ => crate::symbols::format_word(w),
        })
        .collect::<Vec<_>>()
        .join("·")
}

pub fn slot_name(i: usize) -> String {
    format!("s{}", sub(i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{q, qi};
    use approx::assert_relative_eq;

    #[test]
    fn f_values() {
        let tol = 1e-13;
        assert_relative_eq!(FSpec::conformal(&[1, 1]).eval(&[1.0], tol), std::f64::consts::FRAC_PI_2, epsilon = 1e-12);
        assert_relative_eq!(FSpec::nonconformal(2, &[1, 1]).eval(&[2.0], tol), 2f64.ln(), epsilon = 1e-12);
        assert_relative_eq!(FSpec::nonconformal(3, &[2, 1]).eval(&[1.0], tol), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn p0_conformal_leaf() {
        // ∫(1+u)^{-2} u^{1/2} du = π/2, prefix k^{2−8}
        let m = MetricDescriptor::conformal3();
        let r = RadialIntegral { coeff: Coefficient::one(), nu: q(3, 2), lead: 0, m: vec![2], rho: vec![] };
        let e = to_spectral(&r, &m).unwrap();
        let ((prefix, op), f) = e.terms.iter().next().unwrap();
        assert_eq!(*prefix, -6);
        assert!(op.is_empty());
        assert_relative_eq!(f.eval(&[]), std::f64::consts::FRAC_PI_2, epsilon = 1e-12);
    }

    #[test]
    fn corollary_prefixes() {
        let d = Word::from_atoms([Atom::DK(MultiIndex::unit(0))]);
        let c = MetricDescriptor::conformal3();
        let r = RadialIntegral { coeff: Coefficient::one(), nu: q(3, 2), lead: 0, m: vec![1, 1], rho: vec![d.clone()] };
        assert_eq!(to_spectral(&r, &c).unwrap().terms.keys().next().unwrap().0, -6);
        let n = MetricDescriptor::nonconformal3();
        let r = RadialIntegral { coeff: Coefficient::one(), nu: qi(3), lead: 0, m: vec![2, 1], rho: vec![d] };
        assert_eq!(to_spectral(&r, &n).unwrap().terms.keys().next().unwrap().0, -2);
    }

    #[test]
    fn normalize_moves_powers() {
        // F(Δ)(k^m ρ k^n) = k^{m+n} Δ^{n/2} F(Δ)(ρ) with ρ = δ(k) = k·U
        let m = MetricDescriptor::nonconformal3();
        let d = Atom::DK(MultiIndex::unit(0));
        let mut e = SpectralExpr::default();
        let f = SpectralFunction::leaf(Coefficient::one(), FSpec::nonconformal(2, &[1, 1]));
        e.add(0, vec![Word::from_atoms([Atom::KPow(2), d, Atom::KPow(3)])], &f);
        let n = normalize_spectral(&e, &m).unwrap();
        let ((prefix, _), g) = n.terms.iter().next().unwrap();
        assert_eq!(*prefix, 6);
        assert_eq!(g.terms[0].exp, vec![q(3, 2)]);
    }

    #[test]
    fn normalize_two_slots() {
        // ρ₁ · ρ₂ k^n: factor e^{(n/2)(s₁+s₂)}; leading k of ρ₂ crosses ρ₁
        let m = MetricDescriptor::nonconformal3();
        let d = Atom::DK(MultiIndex::unit(2));
        let mut e = SpectralExpr::default();
        let f = SpectralFunction::leaf(Coefficient::one(), FSpec::nonconformal(2, &[1, 1, 1]));
        e.add(0, vec![Word::from_atoms([d]), Word::from_atoms([d, Atom::KPow(2)])], &f);
        let n = normalize_spectral(&e, &m).unwrap();
        let ((prefix, _), g) = n.terms.iter().next().unwrap();
        assert_eq!(*prefix, 4);
        assert_eq!(g.terms[0].exp, vec![q(3, 2), qi(1)]);
    }

    #[test]
    fn translation_functions() {
        for w in [2.0, 6.0] {
            assert_relative_eq!(f_trans(0.0, w), 1.0);
            assert_relative_eq!(g_trans(0.0, 0.0, w), 0.5, epsilon = 1e-15);
            let x: f64 = 1.3;
            assert_relative_eq!(f_trans(x, w), w * ((x / w).exp() - 1.0) / x, epsilon = 1e-14);
        }
        // closed form 36(x^{1/6}((y^{1/6}−1)log x − log y) + log y)/(log x log y (log x + log y))
        let (a, b) = (0.7f64, -1.9f64);
        let (x, y) = (a.exp(), b.exp());
        let closed = 36.0 * (x.powf(1.0 / 6.0) * ((y.powf(1.0 / 6.0) - 1.0) * a - b) + b) / (a * b * (a + b));
        assert_relative_eq!(g_trans(a, b, 6.0), closed, epsilon = 1e-13);
    }
}
