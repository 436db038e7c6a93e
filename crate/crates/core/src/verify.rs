//! Verification suites: rearrangement closed forms, limits, structural
//! identities, the symbol-level regression and the product decomposition.

use crate::coeff::{q_to_f64, qi, Q};
use crate::error::Error;
use crate::metric::{laplacian_symbol, Form};
use crate::notation::{parse_symbol, parse_terms, UTerms};
use crate::reduce::reduce;
use crate::resolvent::{b0_expr, compute_b1, parametrix};
use crate::symbols::{delta, xi_partial, Atom, SymbolExpr, Word};
use crate::curvature::{one_form_density, ricci_from_parts, scalar_density, DensityMatrix};
use crate::error::Result;
use crate::logk::BasisWord;
use crate::metric::MetricDescriptor;
use crate::rearrange::{FCache, FSpec};
use crate::reference::{printed_limits, rearrangement_catalogue};
use crate::symbols::MultiIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub point: Vec<f64>,
    pub value: f64,
    pub expected: f64,
    pub error: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub tol: f64,
    pub worst: f64,
    pub pass: bool,
    pub checks: Vec<Check>,
    /// Findings reported alongside the checks without affecting `pass`.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl SuiteReport {
    fn new(suite: &str, tol: f64, checks: Vec<Check>) -> Self {
        let worst = checks.iter().map(|c| c.error).fold(0.0, f64::max);
        let pass = checks.iter().all(|c| c.pass);
        SuiteReport { suite: suite.into(), tol, worst, pass, checks, notes: Vec::new() }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Points drawn log-uniformly from [0.1, 10]^p.
pub fn log_uniform_points(seed: u64, p: usize, n: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lo = 0.1f64.ln();
    let hi = 10f64.ln();
    (0..n).map(|_| (0..p).map(|_| rng.gen_range(lo..hi).exp()).collect()).collect()
}

/// Every rearrangement closed form against direct quadrature.
pub fn appendix_b(points: usize, tol: f64, seed: u64) -> SuiteReport {
    let qtol = crate::quad::default_tolerance();
    let cat = rearrangement_catalogue();
    let mut tasks: Vec<(FSpec, usize, Vec<f64>)> = Vec::new();
    for (i, (spec, _)) in cat.iter().enumerate() {
        for x in log_uniform_points(seed.wrapping_add(i as u64), spec.arity(), points) {
            tasks.push((spec.clone(), i, x));
        }
    }
    let checks = crate::par::map(&tasks, |(spec, i, s)| {
        let x: Vec<f64> = s.iter().map(|v| v.ln()).collect();
        let expected = crate::reference::analytic_value(cat[*i].1, &x);
        let value = spec.eval(s, qtol);
        let error = rel(value, expected);
        Check { name: spec.name(), point: s.clone(), value, expected, error, pass: error <= tol }
    });
    SuiteReport::new("appendix-b", tol, checks)
}

/// Engine output for both three-dimensional metrics.
pub struct EngineTables {
    pub conformal_scalar: DensityMatrix,
    pub conformal_one_form: DensityMatrix,
    pub nonconformal_scalar: DensityMatrix,
    pub nonconformal_one_form: DensityMatrix,
    pub nonconformal_ricci: DensityMatrix,
}

impl EngineTables {
    pub fn build() -> Result<Self> {
        let c = MetricDescriptor::conformal3();
        let n = MetricDescriptor::nonconformal3();
        let cs = scalar_density(&c)?;
        let ns = scalar_density(&n)?;
        let n1 = one_form_density(&n)?;
        Ok(EngineTables {
            conformal_one_form: one_form_density(&c)?,
            nonconformal_ricci: ricci_from_parts(&ns, &n1),
            conformal_scalar: DensityMatrix { n: 1, entries: vec![cs] },
            nonconformal_scalar: DensityMatrix { n: 1, entries: vec![ns] },
            nonconformal_one_form: n1,
        })
    }
}

#[derive(Clone, Copy)]
enum Table {
    CScalar,
    COneForm,
    NScalar,
    NOneForm,
    NRicci,
}

/// (weight, table, row, column, k-prefix, word), all indices 0-based.
type Pick = (f64, Table, usize, usize, i32, BasisWord);

fn d2(i: usize) -> BasisWord {
    BasisWord::One(MultiIndex::pair(i, i))
}

/// How a printed function is read off the engine output.
fn engine_picks(name: &str) -> Option<Vec<Pick>> {
    use BasisWord::{Anti, Comm, One};
    use Table::*;
    let v = match name {
        "K" => vec![(1.0, CScalar, 0, 0, -2, d2(0))],
        "H" => vec![(2.0, CScalar, 0, 0, -2, Anti(0, 0))],
        "F" => vec![(1.0, COneForm, 0, 1, -2, One(MultiIndex::pair(0, 1)))],
        "T" => vec![(2.0, COneForm, 0, 0, -2, Anti(1, 1))],
        "W" => vec![(2.0, COneForm, 0, 1, -2, Anti(0, 1))],
        "S" => vec![(1.0, COneForm, 0, 1, -2, Anti(0, 1)), (1.0, COneForm, 0, 1, -2, Comm(1, 0))],
        "K1" => vec![(1.0, NScalar, 0, 0, 0, d2(0))],
        "H1" => vec![(2.0, NScalar, 0, 0, 0, Anti(0, 0))],
        "K2" => vec![(1.0, NScalar, 0, 0, -2, d2(2))],
        "H2" => vec![(2.0, NScalar, 0, 0, -2, Anti(2, 2))],
        "K13" => vec![(1.0, NOneForm, 0, 2, -1, One(MultiIndex::pair(0, 2)))],
        "K31" => vec![(1.0, NOneForm, 2, 0, -1, One(MultiIndex::pair(0, 2)))],
        "Kt11" => vec![(-1.0, NRicci, 0, 0, 0, d2(0))],
        "Kt33" => vec![(-1.0, NRicci, 2, 2, -2, d2(2))],
        "Kt3" => vec![(-1.0, NRicci, 0, 0, -2, d2(2))],
        "Ht3" => vec![(-2.0, NRicci, 0, 0, -2, Anti(2, 2))],
        // the (3,3) entry carries H̃₄ + 2W₃₃; W₃₃ is antisymmetric and
        // drops out on the diagonal s = t
        "Ht4" => vec![(-2.0, NRicci, 2, 2, -2, Anti(2, 2))],
        _ => return None,
    };
    Some(v)
}

impl EngineTables {
    fn table(&self, t: Table) -> &DensityMatrix {
        match t {
            Table::CScalar => &self.conformal_scalar,
            Table::COneForm => &self.conformal_one_form,
            Table::NScalar => &self.nonconformal_scalar,
            Table::NOneForm => &self.nonconformal_one_form,
            Table::NRicci => &self.nonconformal_ricci,
        }
    }

    /// Engine value of a printed function, if it can be read off directly.
    pub fn named(&self, name: &str, x: &[f64], cache: &mut FCache) -> Option<f64> {
        let picks = engine_picks(name)?;
        Some(picks.iter().map(|(w, t, r, c, p, word)| w * self.table(*t).get(*r, *c).eval_with(*p, *word, x, cache)).sum())
    }
}

/// Printed limits at the origin against the engine evaluated at |s| = |t| = eps.
pub fn limits(engine: &EngineTables, eps: f64, tol: f64) -> SuiteReport {
    let mut tasks = Vec::new();
    for (name, v) in printed_limits() {
        let arity = crate::reference::lookup(name).map(|f| f.arity).unwrap_or(1);
        let pts: Vec<Vec<f64>> = if arity == 1 {
            vec![vec![eps], vec![-eps]]
        } else if name == "Ht4" {
            vec![vec![eps, eps], vec![-eps, -eps]]
        } else {
            vec![vec![eps, eps], vec![eps, -eps], vec![-eps, eps], vec![-eps, -eps]]
        };
        for x in pts {
            tasks.push((name, q_to_f64(&v), x));
        }
    }
    let qtol = crate::quad::default_tolerance();
    let checks = crate::par::map(&tasks, |(name, expected, x)| {
        let mut cache = FCache::new(qtol);
        let value = engine.named(name, x, &mut cache).unwrap_or(f64::NAN);
        let error = (value - expected).abs();
        Check { name: name.to_string(), point: x.clone(), value, expected: *expected, error, pass: error <= tol }
    });
    SuiteReport::new("limits", tol, checks)
}

fn fuzz_points(seed: u64, n: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| vec![rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)]).collect()
}

fn abs_check(name: &str, point: &[f64], value: f64, expected: f64, tol: f64) -> Check {
    let error = (value - expected).abs();
    Check { name: name.into(), point: point.to_vec(), value, expected, error, pass: error <= tol }
}

/// S₁ symmetry, H₁ antisymmetry, the W/S reconstruction identity on the
/// engine's 1-form densities, and flat nullity.
pub fn structure(points: usize, tol: f64, seed: u64) -> Result<SuiteReport> {
    use crate::reference::eval_reference as ev;
    let pts = fuzz_points(seed, points);
    let mut checks = Vec::new();
    for x in &pts {
        let y = [x[1], x[0]];
        checks.push(abs_check("S1 symmetric", x, ev("S1", x)?, ev("S1", &y)?, tol));
        checks.push(abs_check("H1 antisymmetric", x, ev("H1", x)?, -ev("H1", &y)?, tol));
    }

    // ordered-product coefficients P(i,j), P(j,i) against W − S and W + S
    // built from the split expression
    let qtol = crate::quad::default_tolerance();
    for m in [MetricDescriptor::conformal3(), MetricDescriptor::nonconformal3()] {
        let t = crate::resolvent::parametrix(&m, crate::metric::Form::OneForms)?;
        let cells: Vec<(usize, usize)> = (0..3).flat_map(|r| (0..3).map(move |c| (r, c))).collect();
        let prods = crate::par::try_map(&cells, |&(r, c)| crate::curvature::product_density(t.b2.get(r, c), &m))?;
        let mut tasks = Vec::new();
        for (cell, prod) in prods.iter().enumerate() {
            for (p, w) in prod.words() {
                if let BasisWord::Prod(i, j) = w {
                    for x in &pts {
                        tasks.push((cell, p, i, j, x.clone()));
                    }
                }
            }
        }
        let splits: Vec<_> = prods.iter().map(crate::logk::split_sym_antisym).collect();
        let name = format!("{} W/S reconstruction", m.name());
        checks.extend(crate::par::map(&tasks, |(cell, p, i, j, x)| {
            let mut cache = FCache::new(qtol);
            let direct = prods[*cell].eval_with(*p, BasisWord::Prod(*i, *j), x, &mut cache);
            let s = &splits[*cell];
            let (lo, hi) = ((*i).min(*j), (*i).max(*j));
            let w = s.eval_with(*p, BasisWord::Anti(lo, hi), x, &mut cache);
            let rebuilt = if i == j {
                2.0 * w
            } else {
                let sv = s.eval_with(*p, BasisWord::Comm(hi, lo), x, &mut cache);
                if i < j {
                    w - sv
                } else {
                    w + sv
                }
            };
            abs_check(&name, x, rebuilt, direct, tol)
        }));
    }

    let flat = MetricDescriptor::flat(3);
    let r = scalar_density(&flat)?;
    let d = one_form_density(&flat)?;
    let ric = ricci_from_parts(&r, &d);
    for (label, zero) in [("flat scalar", r.is_zero()), ("flat 1-form", d.is_zero()), ("flat Ricci", ric.is_zero())] {
        let v = if zero { 0.0 } else { 1.0 };
        checks.push(abs_check(label, &[], v, 0.0, tol));
    }
    Ok(SuiteReport::new("structure", tol, checks))
}

/// Non-conformal scalar density with direction-3 words removed against
/// √π times the two-dimensional conformal density, word by word.
pub fn product_decomposition(points: usize, tol: f64, seed: u64) -> Result<SuiteReport> {
    use crate::curvature::REL_FLOOR;
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let two = scalar_density(&MetricDescriptor::conformal2())?;
    let three = scalar_density(&MetricDescriptor::nonconformal3())?.without_directions(&[2]);
    let pts = fuzz_points(seed, points);
    let mut words = two.words();
    words.extend(three.words());
    words.sort();
    words.dedup();
    let mut tasks = Vec::new();
    for (p, w) in &words {
        for x in &pts {
            tasks.push((*p, *w, x[..w.arity()].to_vec()));
        }
    }
    let qtol = crate::quad::default_tolerance();
    let mut checks = crate::par::map(&tasks, |(p, w, x)| {
        let mut cache = FCache::new(qtol);
        let value = three.eval_with(*p, *w, x, &mut cache);
        let expected = sqrt_pi * two.eval_with(*p, *w, x, &mut cache);
        let error = (value - expected).abs() / expected.abs().max(REL_FLOOR);
        Check { name: format!("k^{} {}", p, w.key()), point: x.clone(), value, expected, error, pass: error <= tol }
    });

    // K₁ against the engine's two-dimensional function: the constant
    // relating them is √π in this normalization
    let d2_11 = d2(0);
    let mut ratios = Vec::new();
    for x in &pts {
        let k1 = crate::reference::eval_reference("K1", &x[..1])?;
        let k = two.eval(0, d2_11, &x[..1]);
        ratios.push(k1 / k);
        let error = (k1 / k - sqrt_pi).abs() / sqrt_pi;
        checks.push(Check { name: "K1 / K(2-torus)".into(), point: x[..1].to_vec(), value: k1 / k, expected: sqrt_pi, error, pass: error <= tol });
    }
    let mut report = SuiteReport::new("product-decomposition", tol, checks);

    let (lo, hi) = pts.iter().map(|x| {
        let k1 = crate::reference::eval_reference("K1", &x[..1]).unwrap_or(f64::NAN);
        let k = crate::reference::eval_reference("K", &x[..1]).unwrap_or(f64::NAN);
        k1 / k
    })
    .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| (a.min(r), b.max(r)));
    report.notes.push("K1/K(2-torus engine) = sqrt(pi) at every point; the printed factor -1/8 refers to an external normalization of the 2-torus K and is not checked".to_string());
    report.notes.push(format!(
        "K1/K against the conformal 3-torus K is not constant (ranges over [{:.6}, {:.6}]), so K1 = -K/8 does not hold for that K",
        lo, hi
    ));
    Ok(report)
}

const EXPANSION: &str = include_str!("../data/expansion.tex");
const REDUCED: &str = include_str!("../data/reduced.tex");

/// Displayed terms of ∂₃(b₁)δ₃(a₂)b₀ checked one by one.
const EXPANSION_SPOTS: [&str; 5] = [
    r"-4 \xi _1^5\xi _3  k^2 b_0^2 \delta _1 (k^2 )b_0^2 \delta _3 (k^2 ) b_0",
    r"+2 \xi _1^4 b_0^2 \delta _3 (k^2 ) b_0 \delta _3 (k^2 ) b_0",
    r"+4 \xi _1^3\xi _3 b_0 k \delta _1(k) b_0^2 \delta _3 (k^2 ) b_0",
    r"+2 \xi _1^2\xi _3^2 b_0  k^{-1}  \delta _3(k) b_0^2 \delta _3 (k^2 ) b_0",
    r"-16 \xi _1^2\xi _2^2 \xi _3^2 b_0^3 \delta _3 (k^2 ) b_0 \delta _3 (k^2 ) b_0",
];

/// Displayed terms of the (η, θ)-integrated b₂ checked one by one.
const REDUCED_SPOTS: [&str; 5] = [
    r"2 u^3k^2 b_0^2 \delta _1(k) k^3 b_0^2 k\delta _1(k) b_0",
    r"-  b_0 k \delta _1\left(\delta _1(k)\right) b_0",
    r"-8 u^2k^2 b_0^2 k \delta _1(k) b_0 k \delta _1(k) b_0",
    r"+\frac12 b_0k^{-1}\delta_3(k) b_0 k^{-1} \delta_3(k) b_0",
    r"-4 u  b_0^3 \delta _3(k) \delta _3(k) b_0",
];

fn exact_check(name: &str, value: Q, expected: Q) -> Check {
    let pass = value == expected;
    Check {
        name: name.into(),
        point: Vec::new(),
        value: q_to_f64(&value),
        expected: q_to_f64(&expected),
        error: if pass { 0.0 } else { q_to_f64(&(value - expected)).abs() },
        pass,
    }
}

/// (η, θ)-integrated scalar b₂ of the non-conformal metric, with the
/// density prefactor and π² divided out, keyed by u-power.
pub fn reduced_scalar_b2() -> Result<UTerms> {
    let m = MetricDescriptor::nonconformal3();
    let t = parametrix(&m, Form::Functions)?;
    let pre = crate::reduce::density_prefactor(3);
    let mut out = UTerms::new();
    for r in reduce(t.b2.get(0, 0), &m)? {
        if r.coeff.pi_half - pre.pi_half != 4 || !r.u_power().is_integer() {
            return Err(Error::Shape(format!("unexpected radial integral {}", r)));
        }
        let w = Word::from_atoms(r.word().atoms().iter().map(|a| match a {
            Atom::B0u(n) => Atom::B0(*n),
            x => *x,
        }));
        let p = *r.u_power().numer() as u32;
        out.entry(p).or_insert_with(SymbolExpr::zero).add_term(r.coeff.rat / pre.rat, [0, 0, 0], w);
    }
    Ok(out)
}

/// ∂₃(b₁)δ₃(a₂)b₀ for the non-conformal scalar Laplacian.
pub fn sample_product() -> Result<SymbolExpr> {
    let m = MetricDescriptor::nonconformal3();
    let parts = laplacian_symbol(&m, Form::Functions)?;
    let b1 = compute_b1(&m, &parts)?;
    let da2 = delta(2, parts.a2.get(0, 0))?;
    Ok(&(&xi_partial(2, b1.get(0, 0), &m)? * &da2) * &b0_expr())
}

fn spot(name: &str, engine: &SymbolExpr, term: &SymbolExpr, checks: &mut Vec<Check>) {
    for (xi, w, c) in term.iter() {
        checks.push(exact_check(name, engine.coefficient(xi, w), *c));
    }
}

/// Regression against the displayed expansion and its (η, θ) integral.
pub fn appendix_a() -> Result<SuiteReport> {
    let mut checks = Vec::new();

    let engine = sample_product()?;
    let shown = parse_symbol(EXPANSION)?;
    let diff = &engine - &shown;
    checks.push(exact_check("d3(b1) d3(a2) b0: terms differing from display", qi(diff.len() as i128), qi(0)));
    for s in EXPANSION_SPOTS {
        spot(&format!("expansion {}", s.trim()), &engine, &parse_symbol(s)?, &mut checks);
    }

    let reduced = reduced_scalar_b2()?;
    let shown = parse_terms(REDUCED)?;
    let powers: std::collections::BTreeSet<u32> = reduced.keys().chain(shown.keys()).copied().collect();
    for p in powers {
        let zero = SymbolExpr::zero();
        let diff = reduced.get(&p).unwrap_or(&zero) - shown.get(&p).unwrap_or(&zero);
        checks.push(exact_check(&format!("reduced b2, u^{}: terms differing from display", p), qi(diff.len() as i128), qi(0)));
    }
    for s in REDUCED_SPOTS {
        for (p, term) in parse_terms(s)? {
            let zero = SymbolExpr::zero();
            spot(&format!("reduced {}", s.trim()), reduced.get(&p).unwrap_or(&zero), &term, &mut checks);
        }
    }

    // ξ₂⁴ξ₃² b₀³ δ₃(k²) b₀ δ₃(k²) b₀: angular factor 3π²/16 and u²
    match crate::reduce::cylindrical_factor(&[0, 4, 2], 5)? {
        Some((c, nu)) => {
            checks.push(exact_check("angular factor of xi2^4 xi3^2 (rational part)", c.rat, Q::new(3, 16)));
            checks.push(exact_check("angular factor of xi2^4 xi3^2 (power of pi)", qi(c.pi_half as i128), qi(4)));
            checks.push(exact_check("u-power of xi2^4 xi3^2 b0^5", qi(5) - nu, qi(2)));
        }
        None => checks.push(exact_check("angular factor of xi2^4 xi3^2", qi(0), Q::new(3, 16))),
    }
    Ok(SuiteReport::new("appendix-a", 0.0, checks))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_are_seeded_and_in_range() {
        let a = log_uniform_points(7, 2, 20);
        assert_eq!(a, log_uniform_points(7, 2, 20));
        assert!(a.iter().flatten().all(|v| (0.1..=10.0).contains(v)));
    }
}
