//! End-to-end pipelines: heat densities, scalar curvature and Ricci density.

use crate::coeff::{rationalize, Coefficient, Q};
use crate::error::{Error, Result};
use crate::logk::{split_sym_antisym, to_curvature, translate, BasisWord, CurvatureExpression};
use crate::reference::{one_form_reference, ricci_reference, scalar_reference, ClassicalExpr, ReferenceExpression};
use crate::symbols::MultiIndex;
use serde::Serialize;
use crate::metric::{Form, MetricDescriptor};
use crate::rearrange::{normalize_spectral, to_spectral, FCache, SpectralExpr, SpectralFunction};
use crate::reduce::{reduce, RadialIntegral};
use crate::resolvent::parametrix;
use crate::symbols::SymbolExpr;

/// Radial integrals of one b₂ entry (prefactor included, normalization not).
pub fn radial_integrals(b2: &SymbolExpr, m: &MetricDescriptor) -> Result<Vec<RadialIntegral>> {
    reduce(b2, m)
}

/// Normalized spectral expression over unit operands k^{-1}δ^α(k).
pub fn unit_stage(b2: &SymbolExpr, m: &MetricDescriptor) -> Result<SpectralExpr> {
    let mut acc = SpectralExpr::default();
    for r in radial_integrals(b2, m)? {
        acc.merge(&to_spectral(&r, m)?);
    }
    Ok(normalize_spectral(&acc.simplify(), m)?.scale(m.normalization).simplify())
}

/// One b₂ entry in the ordered-product basis (before the split).
pub fn product_density(b2: &SymbolExpr, m: &MetricDescriptor) -> Result<CurvatureExpression> {
    if b2.is_zero() {
        return Ok(CurvatureExpression::zero());
    }
    let units = unit_stage(b2, m)?;
    to_curvature(&translate(&units, m)?)
}

/// Full pipeline from one b₂ entry to a curvature expression.
pub fn entry_density(b2: &SymbolExpr, m: &MetricDescriptor) -> Result<CurvatureExpression> {
    Ok(split_sym_antisym(&product_density(b2, m)?))
}

/// Scalar curvature density of the Laplacian on functions.
pub fn scalar_density(m: &MetricDescriptor) -> Result<CurvatureExpression> {
    let t = parametrix(m, Form::Functions)?;
    entry_density(t.b2.get(0, 0), m)
}

/// Square grid of curvature expressions.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    pub n: usize,
    pub entries: Vec<CurvatureExpression>,
}

impl DensityMatrix {
    pub fn get(&self, r: usize, c: usize) -> &CurvatureExpression {
        &self.entries[r * self.n + c]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }
}

/// Second heat density of the Laplacian on 1-forms.
pub fn one_form_density(m: &MetricDescriptor) -> Result<DensityMatrix> {
    if !m.has_one_forms() {
        return Err(Error::Other(format!("{} has no 1-form Laplacian", m.name())));
    }
    let t = parametrix(m, Form::OneForms)?;
    let n = m.dimension;
    let cells: Vec<(usize, usize)> = (0..n).flat_map(|r| (0..n).map(move |c| (r, c))).collect();
    let entries = crate::par::try_map(&cells, |&(r, c)| entry_density(t.b2.get(r, c), m))?;
    Ok(DensityMatrix { n, entries })
}

/// Ric = R ⊗ I − a₂(Δ₁).
pub fn ricci_density(m: &MetricDescriptor) -> Result<DensityMatrix> {
    let r = scalar_density(m)?;
    let d = one_form_density(m)?;
    Ok(ricci_from_parts(&r, &d))
}

pub fn ricci_from_parts(r: &CurvatureExpression, d: &DensityMatrix) -> DensityMatrix {
    let n = d.n;
    let entries = (0..n * n)
        .map(|i| {
            let e = &d.entries[i];
            if i / n == i % n {
                r.sub(e)
            } else {
                e.scale(Coefficient::rational(-Q::from_integer(1)))
            }
        })
        .collect();
    DensityMatrix { n, entries }
}

/// Step used for the numerical limit at the origin.
pub const LIMIT_STEP: f64 = 1e-6;
/// Agreement required between successive extrapolations.
pub const LIMIT_TOL: f64 = 1e-6;
/// Largest denominator tried when rationalizing a limit.
pub const LIMIT_MAX_DEN: i128 = 96;

/// Limit of a coefficient function at the origin: Richardson extrapolation
/// from the diagonal points (h, …, h) with h = ε, 2ε, 4ε.
pub fn origin_limit(f: &SpectralFunction, cache: &mut FCache) -> Option<f64> {
    let at = |h: f64, cache: &mut FCache| f.eval_with(&vec![h; f.arity], cache);
    let (a, b, c) = (at(LIMIT_STEP, cache), at(2.0 * LIMIT_STEP, cache), at(4.0 * LIMIT_STEP, cache));
    let l1 = 2.0 * a - b;
    let l2 = 2.0 * b - c;
    ((l1 - l2).abs() <= LIMIT_TOL && l1.is_finite()).then_some(l1)
}

/// Commutative limit: every coefficient function is replaced by its value
/// at the origin, log k by κh, [·,·] by 0 and {a, b} by 2ab.
pub fn abelianize(c: &CurvatureExpression, m: &MetricDescriptor) -> Result<ClassicalExpr> {
    let kappa = m.log_k_in_h;
    let mut out = ClassicalExpr::default();
    let mut cache = FCache::new(crate::quad::default_tolerance());
    for ((p, w), f) in &c.terms {
        if matches!(w, BasisWord::Comm(..)) {
            continue;
        }
        let label = || format!("k^{} {}", p, w.key());
        let v = origin_limit(f, &mut cache).ok_or_else(|| Error::NonConvergent(label()))?;
        let r = rationalize(v, LIMIT_MAX_DEN, LIMIT_TOL).ok_or_else(|| Error::NonConvergent(label()))?;
        let e = Q::from_integer(*p as i128) * kappa;
        if !e.is_integer() {
            return Err(Error::Shape(format!("k^{} is not an integer power of e^h", p)));
        }
        let exp = *e.numer() as i32;
        match *w {
            BasisWord::One(a) => out.add(r * kappa, exp, vec![a]),
            BasisWord::Prod(i, j) => out.add(r * kappa * kappa, exp, vec![MultiIndex::unit(i), MultiIndex::unit(j)]),
            BasisWord::Anti(i, j) => out.add(r * kappa * kappa * Q::from_integer(2), exp, vec![MultiIndex::unit(i), MultiIndex::unit(j)]),
            BasisWord::Comm(..) => {}
        }
    }
    Ok(out)
}

pub fn abelianize_matrix(d: &DensityMatrix, m: &MetricDescriptor) -> Result<Vec<ClassicalExpr>> {
    crate::par::try_map(&d.entries, |e| abelianize(e, m))
}

/// Which density a comparison is about.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Object {
    Scalar,
    OneForm,
    Ricci,
}

impl Object {
    pub fn name(&self) -> &'static str {
        match self {
            Object::Scalar => "scalar",
            Object::OneForm => "one_form_density",
            Object::Ricci => "ricci",
        }
    }
}

/// Evaluation points: unary points and binary points.
#[derive(Clone, Debug)]
pub struct Grid {
    pub unary: Vec<Vec<f64>>,
    pub binary: Vec<Vec<f64>>,
}

impl Grid {
    /// n points on [a, b] for unary words; ⌈√n⌉² points for binary words.
    pub fn linspace(a: f64, b: f64, n: usize) -> Grid {
        let pts = |m: usize| -> Vec<f64> {
            if m <= 1 {
                vec![0.5 * (a + b)]
            } else {
                (0..m).map(|i| a + (b - a) * i as f64 / (m - 1) as f64).collect()
            }
        };
        let side = (n as f64).sqrt().ceil() as usize;
        let axis = pts(side);
        Grid {
            unary: pts(n).into_iter().map(|x| vec![x]).collect(),
            binary: axis.iter().flat_map(|s| axis.iter().map(move |t| vec![*s, *t])).collect(),
        }
    }

    /// Explicit (s, t) points; unary words use s.
    pub fn from_points(pts: &[(f64, f64)]) -> Grid {
        Grid { unary: pts.iter().map(|p| vec![p.0]).collect(), binary: pts.iter().map(|p| vec![p.0, p.1]).collect() }
    }

    fn for_arity(&self, p: usize) -> &[Vec<f64>] {
        if p == 1 {
            &self.unary
        } else {
            &self.binary
        }
    }
}

/// Relative error with the reference magnitude floored at this value.
pub const REL_FLOOR: f64 = 1e-3;

#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub point: Vec<f64>,
    pub engine: f64,
    pub reference: f64,
    pub abs_err: f64,
    pub rel_err: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct WordTable {
    pub metric: String,
    pub object: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entry: Option<(usize, usize)>,
    pub basis_word: String,
    pub k_prefix: i32,
    pub rows: Vec<Row>,
}

impl WordTable {
    pub fn worst(&self) -> f64 {
        self.rows.iter().map(|r| r.rel_err).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ComparisonReport {
    pub metric: String,
    pub object: String,
    pub tol: f64,
    pub worst_rel_err: f64,
    pub pass: bool,
    pub tables: Vec<WordTable>,
}

/// Engine grid for an object (1×1 for the scalar density).
pub fn engine_object(m: &MetricDescriptor, object: Object) -> Result<DensityMatrix> {
    match object {
        Object::Scalar => Ok(DensityMatrix { n: 1, entries: vec![scalar_density(m)?] }),
        Object::OneForm => one_form_density(m),
        Object::Ricci => ricci_density(m),
    }
}

pub fn reference_object(m: &MetricDescriptor, object: Object) -> Result<Vec<ReferenceExpression>> {
    match object {
        Object::Scalar => Ok(vec![scalar_reference(m)?]),
        Object::OneForm => one_form_reference(m),
        Object::Ricci => ricci_reference(m),
    }
}

/// Compares already-built engine output with the printed closed forms.
pub fn compare_with(m: &MetricDescriptor, object: Object, engine: &DensityMatrix, grid: &Grid, tol: f64) -> Result<ComparisonReport> {
    let refs = reference_object(m, object)?;
    if refs.len() != engine.entries.len() {
        return Err(Error::Shape("engine and reference grids differ in size".into()));
    }
    let n = engine.n;
    let mut tasks: Vec<(usize, i32, BasisWord, Vec<f64>)> = Vec::new();
    let mut layout: Vec<(usize, i32, BasisWord, usize)> = Vec::new();
    for (idx, (e, r)) in engine.entries.iter().zip(&refs).enumerate() {
        let mut words = e.words();
        words.extend(r.split_words());
        words.sort();
        words.dedup();
        for (p, w) in words {
            let pts = grid.for_arity(w.arity());
            layout.push((idx, p, w, pts.len()));
            for x in pts {
                tasks.push((idx, p, w, x.clone()));
            }
        }
    }
    let tol_q = crate::quad::default_tolerance();
    let rows: Vec<Result<Row>> = crate::par::map(&tasks, |(idx, p, w, x)| {
        let mut cache = crate::rearrange::FCache::new(tol_q);
        let engine_v = engine.entries[*idx].eval_with(*p, *w, x, &mut cache);
        let ref_v = refs[*idx].eval(*p, *w, x)?;
        let abs_err = (engine_v - ref_v).abs();
        Ok(Row { point: x.clone(), engine: engine_v, reference: ref_v, abs_err, rel_err: abs_err / ref_v.abs().max(REL_FLOOR) })
    });
    let mut rows = rows.into_iter().collect::<Result<Vec<_>>>()?.into_iter();
    let mut tables = Vec::new();
    for (idx, p, w, count) in layout {
        tables.push(WordTable {
            metric: m.name(),
            object: object.name().into(),
            entry: if n > 1 { Some((idx / n + 1, idx % n + 1)) } else { None },
            basis_word: w.key(),
            k_prefix: p,
            rows: rows.by_ref().take(count).collect(),
        });
    }
    let worst = tables.iter().map(|t| t.worst()).fold(0.0, f64::max);
    Ok(ComparisonReport { metric: m.name(), object: object.name().into(), tol, worst_rel_err: worst, pass: worst <= tol, tables })
}

pub fn compare(m: &MetricDescriptor, object: Object, grid: &Grid, tol: f64) -> Result<ComparisonReport> {
    let engine = engine_object(m, object)?;
    compare_with(m, object, &engine, grid, tol)
}
