//! Closed-form reference functions and classical limits.
//!
//! Every closed form is written over complex ∇-coordinates (Δ = e^s), so a
//! point near a removable singularity (s, t or s + t close to 0) can be
//! evaluated as the mean over a small complex circle around it.

use crate::coeff::{q, qi, Q};
use crate::error::{Error, Result};
use crate::logk::BasisWord;
use crate::metric::{MetricDescriptor, MetricKind};
use crate::rearrange::FSpec;
use crate::symbols::MultiIndex;
use num_complex::Complex64 as C;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

/// Below this distance from a singular line the circle mean is used.
pub const SINGULAR_THRESHOLD: f64 = 0.05;
const CIRCLE_RADIUS: f64 = 0.5;
const CIRCLE_POINTS: usize = 32;
/// Direction of the complex line used for two-variable functions.
const LINE_SLOPE: f64 = 0.618_033_988_749_894_8;

pub type Closed = fn(&[C]) -> C;

fn e(z: C) -> C {
    z.exp()
}

fn r(x: f64) -> C {
    C::new(x, 0.0)
}

fn near_singular(x: &[f64]) -> bool {
    match x {
        [s] => s.abs() < SINGULAR_THRESHOLD,
        [s, t] => s.abs() < SINGULAR_THRESHOLD || t.abs() < SINGULAR_THRESHOLD || (s + t).abs() < SINGULAR_THRESHOLD,
        _ => false,
    }
}

/// Evaluates an analytic closed form at a real point, averaging over a
/// complex circle when the point is close to a removable singularity.
pub fn analytic_value(f: Closed, x: &[f64]) -> f64 {
    if !near_singular(x) {
        let z: Vec<C> = x.iter().map(|v| r(*v)).collect();
        return f(&z).re;
    }
    circle_mean(f, x)
}

/// Mean of `f` over a complex circle centred at `x` along a fixed complex line.
pub fn circle_mean(f: Closed, x: &[f64]) -> f64 {
    let dir = [1.0, LINE_SLOPE];
    let mut acc = C::new(0.0, 0.0);
    for k in 0..CIRCLE_POINTS {
        let th = 2.0 * PI * (k as f64 + 0.5) / CIRCLE_POINTS as f64;
        let w = C::from_polar(CIRCLE_RADIUS, th);
        let z: Vec<C> = x.iter().zip(dir).map(|(v, d)| r(*v) + w * d).collect();
        acc += f(&z);
    }
    (acc / CIRCLE_POINTS as f64).re
}

// ---- conformal 3-torus ----

fn k_conf(z: &[C]) -> C {
    let s = z[0];
    (1.0 - e(s / 3.0)) / (s * (e(s / 6.0) + e(s / 2.0)))
}

fn h_conf(z: &[C]) -> C {
    let (s, t) = (z[0], z[1]);
    let num = (e(s / 3.0) + 3.0) * s * (e(t / 3.0) - 1.0) - (e(s / 3.0) - 1.0) * (3.0 * e(t / 3.0) + 1.0) * t;
    -3.0 * num / (s * t * (s + t) * e((s + t) / 6.0) * (e((s + t) / 3.0) + 1.0))
}

fn f_conf(z: &[C]) -> C {
    let s = z[0];
    e(-s / 2.0) * (e(s) - 1.0) / (2.0 * (1.0 + e(s / 3.0)) * s)
}

fn t_conf(z: &[C]) -> C {
    let (s, t) = (z[0], z[1]);
    let a = 3.0 * s * (1.0 - e(t / 3.0)) * (e((2.0 * s + t) / 3.0) - e((s + t) / 3.0) - e(2.0 * s / 3.0) - 1.0);
    let b = 3.0 * t * (1.0 - e(s / 3.0)) * (e((s + 2.0 * t) / 3.0) + e(s / 3.0) + e(t / 3.0) - 1.0);
    (a + b) / (s * t * (s + t) * e((3.0 * s + t) / 6.0) * (e((s + t) / 3.0) + 1.0))
}

fn w_conf(z: &[C]) -> C {
    let (s, t) = (z[0], z[1]);
    let u = e((s + t) / 3.0);
    6.0 * (u + u * u + 1.0) * (s * u - e(s / 3.0) * (s + t) + t) / (s * t * (s + t) * e((s + t) / 2.0) * (u + 1.0))
}

fn s_conf(z: &[C]) -> C {
    let (s, t) = (z[0], z[1]);
    let a = 3.0 * s * (e(t / 3.0) - 1.0) * (2.0 * e((s + t) / 3.0) + e((2.0 * s + 2.0 * t) / 3.0) - e((2.0 * s + t) / 3.0) + 1.0);
    let b = 3.0 * t * (e(s / 3.0) - 1.0) * (2.0 * e((s + 2.0 * t) / 3.0) + e((2.0 * s + 3.0 * t) / 3.0) - e((s + t) / 3.0) + e(t / 3.0));
    (a - b) / (s * t * (s + t) * e((s + t) / 2.0) * (e((s + t) / 3.0) + 1.0))
}

// ---- non-conformal 3-torus, functions ----

fn k1(z: &[C]) -> C {
    let s = z[0];
    e(s / 2.0) * (2.0 * e(s) - s * e(s) - 2.0 - s) / (4.0 * s * (e(s) - 1.0).powi(2))
}

fn k2(z: &[C]) -> C {
    let s = z[0];
    (1.0 - e(2.0 * s) + 2.0 * s * e(s)) / (4.0 * s * e(s / 2.0) * (1.0 - e(s)).powi(2))
}

fn h1(z: &[C]) -> C {
    let (s, t) = (z[0], z[1]);
    let (es, et, est) = (e(s), e(t), e(s + t));
    let num = es * (et - 1.0).powi(2) * s * s - et * (es - 1.0).powi(2) * t * t - (es - et) * (est - 1.0) * s * t
        + (1.0 - es) * (et - 1.0) * (est - 1.0) * (t - s);
    num / (e(-(s + t) / 2.0) * (es - 1.0) * s * (et - 1.0) * t * (est - 1.0).powi(2) * (s + t))
}

fn h2(z: &[C]) -> C {
    let (s, t) = (z[0], z[1]);
    let (es, et, est) = (e(s), e(t), e(s + t));
    let num = (et - 1.0).powi(2) * (est - 3.0 * e(2.0 * s + t) - es - 1.0) * s * s
        + (es - 1.0).powi(2) * (e(s + 2.0 * t) + e(s + 3.0 * t) - e(2.0 * t) + 3.0 * et) * t * t
        - 2.0 * (es - 1.0) * (et - 1.0) * (e(2.0 * (s + t)) - 1.0) * (s - t)
        + (est - 1.0) * (4.0 * est + e(2.0 * s + t) - 5.0 * e(s + 2.0 * t) + e(2.0 * s + 2.0 * t) + es - 5.0 * et + 2.0 * e(2.0 * t) + 1.0) * s * t;
    num / (4.0 * e((s + t) / 2.0) * (es - 1.0) * (et - 1.0) * (est - 1.0).powi(2) * s * t * (s + t))
}

// ---- non-conformal 3-torus, 1-forms ----

fn k11(z: &[C]) -> C {
    let s = z[0];
    let d = 4.0 * s * (e(s) - 1.0);
    (e(2.0 * s) - 2.0 * s * e(s) - 1.0) / (e(s) - 1.0) / d
}

fn k13(z: &[C]) -> C {
    let s = z[0];
    ((s - 1.0) * e(s / 2.0) + e(-s / 2.0)) / (4.0 * s * (e(s) - 1.0))
}

fn k31(z: &[C]) -> C {
    let s = z[0];
    (e(s) - s - 1.0) / (4.0 * s * (e(s) - 1.0))
}

fn k33(z: &[C]) -> C {
    let s = z[0];
    (1.0 - e(2.0 * s) + s * e(2.0 * s) + s) / (e(s / 2.0) * (e(s) - 1.0)) / (4.0 * s * (e(s) - 1.0))
}

fn s1(z: &[C]) -> C {
    let (s, t) = (z[0], z[1]);
    let (es, et) = (e(s), e(t));
    1.0 / (2.0 * s * t)
        - ((es - 1.0).powi(2) * et * t + es * s * (et - 1.0).powi(2)) / (2.0 * s * t * (es - 1.0) * (et - 1.0) * (e(s + t) - 1.0))
}

fn s12(z: &[C]) -> C {
    s1(z)
}

fn s13(z: &[C]) -> C {
    0.5 * e(-(z[0] + z[1]) / 2.0) * s1(z)
}

fn s31(z: &[C]) -> C {
    0.5 * s1(z)
}

fn w11(z: &[C]) -> C {
    0.5 * ((z[0] + z[1]) / 2.0).cosh() * h1(z)
}

fn w13(z: &[C]) -> C {
    (e(-z[0] - z[1]) - 1.0) / 4.0 * h1(z)
}

fn w31(z: &[C]) -> C {
    0.5 * ((z[0] + z[1]) / 2.0).sinh() * h1(z)
}

fn w33(z: &[C]) -> C {
    let (s, t) = (z[0], z[1]);
    let (es, et, est) = (e(s), e(t), e(s + t));
    let num = (et - 1.0).powi(2) * (1.0 - 4.0 * es - e(2.0 * s) - est - 4.0 * e(2.0 * s + t) + e(3.0 * s + t)) * s * s
        + 2.0 * (es + 1.0) * (et + 1.0) * (est - 1.0) * (es - et) * s * t
        - (es - 1.0).powi(2) * (1.0 - 4.0 * et - e(2.0 * t) - est - 4.0 * e(2.0 * t + s) + e(3.0 * t + s)) * t * t
        - 4.0 * (es - 1.0) * (et - 1.0) * (e(2.0 * (s + t)) - 1.0) * (s - t);
    num / (16.0 * e((s + t) / 2.0) * (es - 1.0) * (et - 1.0) * (est - 1.0).powi(2) * s * t * (s + t))
}

fn h3(z: &[C]) -> C {
    let (s, t) = (z[0], z[1]);
    let (es, et, est) = (e(s), e(t), e(s + t));
    let num = es * (et - 1.0).powi(2) * (-1.0 - 3.0 * es + est - e(2.0 * s + t)) * s * s
        + (es - 1.0).powi(2) * (1.0 - et + 3.0 * est + e(s + 2.0 * t)) * t * t
        - 4.0 * es * (es - 1.0) * (et - 1.0) * (est - 1.0) * (s - t)
        + (7.0 * est - 7.0 * e(2.0 * (s + t)) - e(3.0 * (s + t)) + 2.0 * e(3.0 * s + t) + 3.0 * e(3.0 * s + 2.0 * t) + e(2.0 * s + 3.0 * t)
            - 3.0 * es
            - 2.0 * e(2.0 * s)
            - et
            + 1.0)
            * s
            * t;
    num / (4.0 * es * (es - 1.0) * (et - 1.0) * (est - 1.0).powi(2) * s * t * (s + t))
}

fn k3(z: &[C]) -> C {
    let s = z[0];
    (2.0 - 2.0 * e(s) + s * e(s) + s) / (4.0 * s * (e(s) - 1.0).powi(2))
}

fn h4_printed(z: &[C]) -> C {
    let (s, t) = (z[0], z[1]);
    (e(s) - 1.0) * (e(t) - 1.0) * (s + t) / (8.0 * e((s + t) / 2.0) * (e(s + t) - 1.0) * s * t)
}

/// Opposite sign to the printed form; only this sign gives lim H̃₄ = −1/4
/// and the classical (3,3) Ricci entry.
fn h4(z: &[C]) -> C {
    -h4_printed(z)
}

fn kt11(z: &[C]) -> C {
    let s = z[0];
    (-1.0 + e(s) + s * e(s / 2.0)) / (4.0 * s * (1.0 + e(s / 2.0)).powi(2))
}

fn kt33(z: &[C]) -> C {
    1.0 / (4.0 * e(z[0] / 2.0))
}

fn kt3(z: &[C]) -> C {
    let s = z[0];
    (-1.0 + e(s) + s * e(s / 2.0)) / (4.0 * s * e(s / 2.0) * (1.0 + e(s / 2.0)).powi(2))
}

fn wt11(z: &[C]) -> C {
    w11(z) - 0.5 * h1(z)
}

fn ht3(z: &[C]) -> C {
    h3(z) - h2(z)
}

fn ht4(z: &[C]) -> C {
    h4(z) - h2(z)
}

// ---- translation functions ----

fn f_w(z: C, w: f64) -> C {
    w * (e(z / w) - 1.0) / z
}

fn g_w(z: &[C], w: f64) -> C {
    let (lx, ly) = (z[0], z[1]);
    let x = e(lx / w);
    let y = e(ly / w);
    w * w * (x * ((y - 1.0) * lx - ly) + ly) / (lx * ly * (lx + ly))
}

fn f6(z: &[C]) -> C {
    f_w(z[0], 6.0)
}
fn f2(z: &[C]) -> C {
    f_w(z[0], 2.0)
}
fn g6(z: &[C]) -> C {
    g_w(z, 6.0)
}
fn g2(z: &[C]) -> C {
    g_w(z, 2.0)
}

/// A named closed form.
#[derive(Clone, Copy)]
pub struct ReferenceFunction {
    pub name: &'static str,
    pub arity: usize,
    pub location: &'static str,
    pub eval: Closed,
}

impl fmt::Debug for ReferenceFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.name, self.arity)
    }
}

impl ReferenceFunction {
    pub fn value(&self, x: &[f64]) -> f64 {
        analytic_value(self.eval, x)
    }
}

const fn rf(name: &'static str, arity: usize, location: &'static str, eval: Closed) -> ReferenceFunction {
    ReferenceFunction { name, arity, location, eval }
}

/// Every printed reference function.
pub fn catalogue() -> Vec<ReferenceFunction> {
    vec![
        rf("K", 1, "conformal scalar curvature", k_conf),
        rf("H", 2, "conformal scalar curvature", h_conf),
        rf("F", 1, "conformal 1-form density", f_conf),
        rf("T", 2, "conformal 1-form density", t_conf),
        rf("W", 2, "conformal 1-form density", w_conf),
        rf("S", 2, "conformal 1-form density", s_conf),
        rf("K1", 1, "non-conformal scalar curvature", k1),
        rf("K2", 1, "non-conformal scalar curvature", k2),
        rf("H1", 2, "non-conformal scalar curvature", h1),
        rf("H2", 2, "non-conformal scalar curvature", h2),
        rf("K11", 1, "non-conformal 1-form density, matrix K", k11),
        rf("K13", 1, "non-conformal 1-form density, matrix K", k13),
        rf("K31", 1, "non-conformal 1-form density, matrix K", k31),
        rf("K33", 1, "non-conformal 1-form density, matrix K", k33),
        rf("S1", 2, "non-conformal 1-form density, matrix S", s1),
        rf("S12", 2, "non-conformal 1-form density, matrix S", s12),
        rf("S13", 2, "non-conformal 1-form density, matrix S", s13),
        rf("S31", 2, "non-conformal 1-form density, matrix S", s31),
        rf("W11", 2, "non-conformal 1-form density, matrix W", w11),
        rf("W13", 2, "non-conformal 1-form density, matrix W", w13),
        rf("W31", 2, "non-conformal 1-form density, matrix W", w31),
        rf("W33", 2, "non-conformal 1-form density", w33),
        rf("H3", 2, "non-conformal 1-form density", h3),
        rf("K3", 1, "non-conformal 1-form density", k3),
        rf("H4", 2, "non-conformal 1-form density (sign corrected)", h4),
        rf("H4_printed", 2, "non-conformal 1-form density (as printed)", h4_printed),
        rf("Kt11", 1, "non-conformal Ricci density", kt11),
        rf("Kt33", 1, "non-conformal Ricci density", kt33),
        rf("Kt3", 1, "non-conformal Ricci density", kt3),
        rf("Wt11", 2, "non-conformal Ricci density", wt11),
        rf("Ht3", 2, "non-conformal Ricci density", ht3),
        rf("Ht4", 2, "non-conformal Ricci density", ht4),
        rf("f6", 1, "translation to log k, conformal", f6),
        rf("g6", 2, "translation to log k, conformal", g6),
        rf("f2", 1, "translation to log k, non-conformal", f2),
        rf("g2", 2, "translation to log k, non-conformal", g2),
    ]
}

pub fn lookup(name: &str) -> Result<ReferenceFunction> {
    catalogue().into_iter().find(|f| f.name == name).ok_or_else(|| Error::UnknownReference(name.to_string()))
}

pub fn eval_reference(name: &str, x: &[f64]) -> Result<f64> {
    let f = lookup(name)?;
    if x.len() != f.arity {
        return Err(Error::Shape(format!("{} takes {} arguments, got {}", name, f.arity, x.len())));
    }
    Ok(f.value(x))
}

/// Printed limits at the origin: (function, value).
pub fn printed_limits() -> Vec<(&'static str, Q)> {
    vec![
        ("K", q(-1, 6)),
        ("H", q(1, 6)),
        ("F", q(1, 4)),
        ("T", q(-1, 3)),
        ("W", q(1, 2)),
        ("H1", qi(0)),
        ("H2", q(1, 8)),
        ("K1", q(-1, 24)),
        ("K2", q(-1, 12)),
        ("Kt11", q(1, 8)),
        ("K13", q(1, 8)),
        ("K31", q(1, 8)),
        ("Kt33", q(1, 4)),
        ("Kt3", q(1, 8)),
        ("Ht3", q(-1, 4)),
        ("Ht4", q(-1, 4)),
    ]
}

// ---- rearrangement functions ----

/// Arguments of the rearrangement closed forms.
struct V {
    s1: C,
    s2: C,
    l1: C,
    l12: C,
    c1: C,
    c2: C,
}

impl V {
    fn new(z: &[C]) -> V {
        let z2 = z.get(1).copied().unwrap_or(C::new(0.0, 0.0));
        V { s1: e(z[0]), s2: e(z2), l1: z[0], l12: z[0] + z2, c1: e(z[0] / 3.0), c2: e(z2 / 3.0) }
    }
}

fn cf11(z: &[C]) -> C {
    let v = V::new(z);
    PI / (v.c1 * v.c1 + v.c1)
}
fn cf21(z: &[C]) -> C {
    let v = V::new(z);
    PI * (v.c1 + 2.0) / (2.0 * (v.c1 + 1.0).powi(2) * v.c1)
}
fn cf31(z: &[C]) -> C {
    let v = V::new(z);
    PI * (3.0 * v.c1 * v.c1 + 9.0 * v.c1 + 8.0) / (8.0 * (v.c1 + 1.0).powi(3) * v.c1)
}
fn cf111(z: &[C]) -> C {
    let v = V::new(z);
    let (a, b) = (v.c1, v.c2);
    PI * (a * (b + 1.0) + 1.0) / ((a + 1.0) * v.s1 * (b + 1.0) * b * (a * b + 1.0))
}
fn cf121(z: &[C]) -> C {
    let v = V::new(z);
    let (a, b) = (v.c1, v.c2);
    PI * (2.0 * a * a * (b + 1.0).powi(2) + a * (b + 2.0).powi(2) + b + 2.0)
        / (2.0 * (a + 1.0).powi(2) * a.powi(5) * (b + 1.0).powi(2) * b * (a * b + 1.0))
}
fn cf211(z: &[C]) -> C {
    let v = V::new(z);
    let (a, b) = (v.c1, v.c2);
    PI * ((a + 2.0) * a * (b + 1.0) * (a * b + 2.0) + 2.0) / (2.0 * (a + 1.0).powi(2) * v.s1 * (b + 1.0) * b * (a * b + 1.0).powi(2))
}
fn cf221(z: &[C]) -> C {
    let v = V::new(z);
    let (a, b) = (v.c1, v.c2);
    let num = a * (2.0 * b * b + 7.0 * b + 6.0) + (b + 1.0).powi(2) * (a.powi(4) * b + a * a * (b + 6.0) + a.powi(3) * (3.0 * b + 2.0)) + b + 2.0;
    PI * num / (2.0 * (a + 1.0).powi(3) * a.powi(5) * (b + 1.0).powi(2) * b * (a * b + 1.0).powi(2))
}
fn cf311(z: &[C]) -> C {
    let v = V::new(z);
    let (a, b) = (v.c1, v.c2);
    let num = (9.0 * a.powi(4) * b + 24.0 * a * a) * (b + 1.0).powi(2)
        + (24.0 * a + 3.0 * b * b * a.powi(5) + 27.0 * b * a.powi(3) + 8.0 * b * b * a.powi(3) + 8.0 * a.powi(3)) * (b + 1.0)
        + 8.0;
    PI * num / (8.0 * v.s1 * b * (a + 1.0).powi(3) * (b + 1.0) * (a * b + 1.0).powi(3))
}

fn n2_11(z: &[C]) -> C {
    let v = V::new(z);
    v.l1 / (v.s1 - 1.0)
}
fn n2_21(z: &[C]) -> C {
    let v = V::new(z);
    (v.s1 - v.l1 - 1.0) / (v.s1 - 1.0).powi(2)
}
fn n2_31(z: &[C]) -> C {
    let v = V::new(z);
    ((v.s1 - 4.0) * v.s1 + 2.0 * v.l1 + 3.0) / (2.0 * (v.s1 - 1.0).powi(3))
}
fn n3_31(z: &[C]) -> C {
    let v = V::new(z);
    (v.s1 * v.s1 - 2.0 * v.s1 * v.l1 - 1.0) / (2.0 * (v.s1 - 1.0).powi(3))
}
fn n3_21(z: &[C]) -> C {
    let v = V::new(z);
    (v.s1 * (v.l1 - 1.0) + 1.0) / (v.s1 - 1.0).powi(2)
}
fn n2_101(z: &[C]) -> C {
    let v = V::new(z);
    v.l12 / (v.s1 * v.s2 - 1.0)
}
fn n2_111(z: &[C]) -> C {
    let v = V::new(z);
    let (x, y) = (v.s1, v.s2);
    ((x * y - 1.0) * v.l1 - (x - 1.0) * v.l12) / ((x - 1.0) * x * (y - 1.0) * (x * y - 1.0))
}
fn n2_201(z: &[C]) -> C {
    let v = V::new(z);
    let p = v.s1 * v.s2;
    (p - v.l12 - 1.0) / (p - 1.0).powi(2)
}
fn n2_121(z: &[C]) -> C {
    let v = V::new(z);
    let (x, y) = (v.s1, v.s2);
    let num = (x - 1.0).powi(2) * v.l12 + (x * y - 1.0) * (x * (-y) + (x * (y - 2.0) + 1.0) * v.l1 + x + y - 1.0);
    num / ((x - 1.0).powi(2) * x * x * (y - 1.0).powi(2) * (x * y - 1.0))
}
fn n2_211(z: &[C]) -> C {
    let v = V::new(z);
    let (x, y) = (v.s1, v.s2);
    let num = (x - 1.0).powi(2) * v.l12 + (x * y - 1.0) * ((x - 1.0) * x * (y - 1.0) + (1.0 - x * y) * v.l1);
    num / ((x - 1.0).powi(2) * x * (y - 1.0) * (x * y - 1.0).powi(2))
}
fn n2_221(z: &[C]) -> C {
    // the printed numerator has an unbalanced parenthesis; this reading
    // squares the (s₁s₂ − 1) factor of the log s₁ term
    let v = V::new(z);
    let (x, y) = (v.s1, v.s2);
    let num = -(x * y - 1.0).powi(2) * (x * (2.0 * y - 3.0) + 1.0) * v.l1
        + (x * y - 1.0) * (x - 1.0) * (y - 1.0) * (x * x * (y - 1.0) + y * x - 1.0)
        - (x - 1.0).powi(3) * v.l12;
    num / ((x - 1.0).powi(3) * x * x * (y - 1.0).powi(2) * (x * y - 1.0).powi(2))
}
fn n2_301(z: &[C]) -> C {
    let v = V::new(z);
    let p = v.s1 * v.s2;
    ((p - 3.0) * (p - 1.0) + 2.0 * v.l12) / (2.0 * (p - 1.0).powi(3))
}
fn n2_311(z: &[C]) -> C {
    let v = V::new(z);
    let (x, y) = (v.s1, v.s2);
    let num = 2.0 * (x * y - 1.0).powi(3) * v.l1 - 2.0 * (x - 1.0).powi(3) * v.l12
        + x * (x - 1.0) * (y - 1.0) * (x * y - 1.0) * ((x - 3.0) * x * y - 3.0 * x + 5.0);
    num / (2.0 * (x - 1.0).powi(3) * x * (y - 1.0) * (x * y - 1.0).powi(3))
}
fn n3_111(z: &[C]) -> C {
    let v = V::new(z);
    let (x, y) = (v.s1, v.s2);
    ((-x * y + 1.0) * v.l1 + (x - 1.0) * y * v.l12) / ((x - 1.0) * (y - 1.0) * (x * y - 1.0))
}
fn n3_201(z: &[C]) -> C {
    let v = V::new(z);
    let p = v.s1 * v.s2;
    (-p + p * v.l12 + 1.0) / (p - 1.0).powi(2)
}
fn n3_301(z: &[C]) -> C {
    let v = V::new(z);
    let p = v.s1 * v.s2;
    (p * p - 2.0 * p * v.l12 - 1.0) / (2.0 * (p - 1.0).powi(3))
}
fn n3_121(z: &[C]) -> C {
    let v = V::new(z);
    let (x, y) = (v.s1, v.s2);
    let num = (x * y - 1.0) * ((x - 1.0) * (y - 1.0) + (x - y) * v.l1) - (x - 1.0).powi(2) * y * v.l12;
    num / ((x - 1.0).powi(2) * x * (y - 1.0).powi(2) * (x * y - 1.0))
}
fn n3_211(z: &[C]) -> C {
    let v = V::new(z);
    let (x, y) = (v.s1, v.s2);
    let num = (x * y - 1.0).powi(2) * v.l1 - (x - 1.0) * ((y - 1.0) * (x * y - 1.0) + (x - 1.0) * y * v.l12);
    num / ((x - 1.0).powi(2) * (y - 1.0) * (x * y - 1.0).powi(2))
}
fn n3_221(z: &[C]) -> C {
    let v = V::new(z);
    let (x, y, l1, l12) = (v.s1, v.s2, v.l1, v.l12);
    let num = x * x + y.powi(3) * x.powi(3) * (l1 - 2.0) + y * y * x.powi(3) * (3.0 - 2.0 * l1) + y * x.powi(3) * (l12 - 1.0)
        + y.powi(3) * x * x * (l1 + 2.0)
        - y * y * x * x * (2.0 * l1)
        + y * x * x * (4.0 * l1 - 3.0 * l12 - 3.0)
        + y * y * x * (-2.0 * l1 - 3.0)
        - x * (2.0 * l1)
        + y * x * (l1 + 3.0 * l12 + 3.0)
        + y * (l1 - l12 + 1.0)
        - 1.0;
    num / ((x - 1.0).powi(3) * x * (y - 1.0).powi(2) * (x * y - 1.0).powi(2))
}
fn n3_311(z: &[C]) -> C {
    let v = V::new(z);
    let (x, y) = (v.s1, v.s2);
    let num = 2.0 * (x - 1.0).powi(3) * y * v.l12 - 2.0 * (x * y - 1.0).powi(3) * v.l1
        + (x - 1.0) * (y - 1.0) * (x * y - 1.0) * ((x + 1.0) * x * y + x - 3.0);
    num / (2.0 * (x - 1.0).powi(3) * (y - 1.0) * (x * y - 1.0).powi(3))
}

/// The 8 conformal and 20 non-conformal rearrangement functions, with closed
/// forms in ∇-coordinates.
pub fn rearrangement_catalogue() -> Vec<(FSpec, Closed)> {
    let c = FSpec::conformal;
    let n = FSpec::nonconformal;
    vec![
        (c(&[1, 1]), cf11 as Closed),
        (c(&[2, 1]), cf21),
        (c(&[3, 1]), cf31),
        (c(&[1, 1, 1]), cf111),
        (c(&[1, 2, 1]), cf121),
        (c(&[2, 1, 1]), cf211),
        (c(&[2, 2, 1]), cf221),
        (c(&[3, 1, 1]), cf311),
        (n(2, &[1, 1]), n2_11),
        (n(2, &[2, 1]), n2_21),
        (n(2, &[3, 1]), n2_31),
        (n(3, &[3, 1]), n3_31),
        (n(3, &[2, 1]), n3_21),
        (n(2, &[1, 0, 1]), n2_101),
        (n(2, &[1, 1, 1]), n2_111),
        (n(2, &[2, 0, 1]), n2_201),
        (n(2, &[1, 2, 1]), n2_121),
        (n(2, &[2, 1, 1]), n2_211),
        (n(2, &[2, 2, 1]), n2_221),
        (n(2, &[3, 0, 1]), n2_301),
        (n(2, &[3, 1, 1]), n2_311),
        (n(3, &[1, 1, 1]), n3_111),
        (n(3, &[2, 0, 1]), n3_201),
        (n(3, &[3, 0, 1]), n3_301),
        (n(3, &[1, 2, 1]), n3_121),
        (n(3, &[2, 1, 1]), n3_211),
        (n(3, &[2, 2, 1]), n3_221),
        (n(3, &[3, 1, 1]), n3_311),
    ]
}

/// Closed-form value of a catalogued rearrangement function at Δ-coordinates.
pub fn rearrangement_value(spec: &FSpec, s: &[f64]) -> Option<f64> {
    let f = rearrangement_catalogue().into_iter().find(|(sp, _)| sp == spec)?.1;
    let x: Vec<f64> = s.iter().map(|v| v.ln()).collect();
    Some(analytic_value(f, &x))
}

// ---- reference densities ----

/// Linear combination of named reference functions.
pub type RefCombination = Vec<(f64, &'static str)>;

/// Expected coefficient functions of one density entry, in the
/// ordered-product basis (`One` and `Prod` words).
#[derive(Clone, Debug, Default)]
pub struct ReferenceExpression {
    pub terms: BTreeMap<(i32, BasisWord), RefCombination>,
}

impl ReferenceExpression {
    fn put(&mut self, prefix: i32, w: BasisWord, c: RefCombination) {
        self.terms.entry((prefix, w)).or_default().extend(c);
    }

    fn combination(&self, prefix: i32, w: BasisWord, x: &[f64]) -> Result<f64> {
        match self.terms.get(&(prefix, w)) {
            None => Ok(0.0),
            Some(c) => c.iter().map(|(k, n)| Ok(k * eval_reference(n, x)?)).sum(),
        }
    }

    /// Value on any basis word, split words included.
    pub fn eval(&self, prefix: i32, w: BasisWord, x: &[f64]) -> Result<f64> {
        match w {
            BasisWord::One(_) | BasisWord::Prod(..) => self.combination(prefix, w, x),
            BasisWord::Anti(i, j) if i == j => Ok(0.5 * self.combination(prefix, BasisWord::Prod(i, i), x)?),
            BasisWord::Anti(i, j) => {
                Ok(0.5 * (self.combination(prefix, BasisWord::Prod(i, j), x)? + self.combination(prefix, BasisWord::Prod(j, i), x)?))
            }
            BasisWord::Comm(j, i) => {
                Ok(0.5 * (self.combination(prefix, BasisWord::Prod(j, i), x)? - self.combination(prefix, BasisWord::Prod(i, j), x)?))
            }
        }
    }

    /// Basis words after the symmetric/antisymmetric split.
    pub fn split_words(&self) -> Vec<(i32, BasisWord)> {
        let mut v: Vec<(i32, BasisWord)> = Vec::new();
        for (p, w) in self.terms.keys() {
            match *w {
                BasisWord::Prod(i, j) if i == j => v.push((*p, BasisWord::Anti(i, i))),
                BasisWord::Prod(i, j) => {
                    v.push((*p, BasisWord::Anti(i.min(j), i.max(j))));
                    v.push((*p, BasisWord::Comm(i.max(j), i.min(j))));
                }
                other => v.push((*p, other)),
            }
        }
        v.sort();
        v.dedup();
        v
    }

    pub fn negate(&self) -> ReferenceExpression {
        ReferenceExpression {
            terms: self.terms.iter().map(|(k, c)| (*k, c.iter().map(|(a, n)| (-a, *n)).collect())).collect(),
        }
    }
}

fn d2(i: usize) -> BasisWord {
    BasisWord::One(MultiIndex::pair(i, i))
}

fn dd(i: usize, j: usize) -> BasisWord {
    BasisWord::Prod(i, j)
}

/// Scalar curvature density as printed.
pub fn scalar_reference(m: &MetricDescriptor) -> Result<ReferenceExpression> {
    let mut r = ReferenceExpression::default();
    match m.kind {
        MetricKind::Conformal3 => {
            for j in 0..3 {
                r.put(-2, d2(j), vec![(1.0, "K")]);
                r.put(-2, dd(j, j), vec![(1.0, "H")]);
            }
        }
        MetricKind::Nonconformal3 => {
            for j in 0..2 {
                r.put(0, d2(j), vec![(1.0, "K1")]);
                r.put(0, dd(j, j), vec![(1.0, "H1")]);
            }
            r.put(-2, d2(2), vec![(1.0, "K2")]);
            r.put(-2, dd(2, 2), vec![(1.0, "H2")]);
        }
        MetricKind::Flat(_) => {}
        MetricKind::Conformal2 => return Err(Error::UnknownReference("conformal2 scalar density".into())),
    }
    Ok(r)
}

fn nc_entry_names(i: usize, j: usize) -> (&'static str, &'static str, &'static str) {
    // (K_ij, S_ij, W_ij) for i ≠ j; an empty name means zero
    if i < 2 && j < 2 {
        ("", "S12", "")
    } else if j == 2 {
        ("K13", "S13", "W13")
    } else {
        ("K31", "S31", "W31")
    }
}

/// 1-form density grid as printed.
pub fn one_form_reference(m: &MetricDescriptor) -> Result<Vec<ReferenceExpression>> {
    let mut out = vec![ReferenceExpression::default(); 9];
    match m.kind {
        MetricKind::Conformal3 => {
            for i in 0..3 {
                for j in 0..3 {
                    let e = &mut out[3 * i + j];
                    if i == j {
                        for l in 0..3 {
                            e.put(-2, d2(l), vec![(-0.5, "K")]);
                            e.put(-2, dd(l, l), vec![(1.0, "T")]);
                        }
                        e.put(-2, d2(i), vec![(1.0, "F")]);
                        e.put(-2, dd(i, i), vec![(1.0, "W")]);
                    } else {
                        e.put(-2, BasisWord::One(MultiIndex::pair(i, j)), vec![(1.0, "F")]);
                        e.put(-2, dd(i, j), vec![(1.0, "W"), (-1.0, "S")]);
                        e.put(-2, dd(j, i), vec![(1.0, "S")]);
                    }
                }
            }
        }
        MetricKind::Nonconformal3 => {
            for i in 0..2 {
                let e = &mut out[3 * i + i];
                for l in 0..2 {
                    e.put(0, d2(l), vec![(1.0, "K11")]);
                    e.put(0, dd(l, l), vec![(2.0, "W11")]);
                }
                e.put(-2, d2(2), vec![(1.0, "K3")]);
                e.put(-2, dd(2, 2), vec![(1.0, "H3")]);
            }
            let e = &mut out[8];
            for l in 0..2 {
                e.put(0, d2(l), vec![(1.0, "K1")]);
                e.put(0, dd(l, l), vec![(1.0, "H1")]);
            }
            e.put(-2, d2(2), vec![(1.0, "K33")]);
            e.put(-2, dd(2, 2), vec![(1.0, "H4"), (2.0, "W33")]);
            for i in 0..3 {
                for j in 0..3 {
                    if i == j {
                        continue;
                    }
                    let c = -(((i == 2) as i32) + ((j == 2) as i32));
                    let (k, s, w) = nc_entry_names(i, j);
                    let e = &mut out[3 * i + j];
                    if !k.is_empty() {
                        e.put(c, BasisWord::One(MultiIndex::pair(i, j)), vec![(1.0, k)]);
                    }
                    let mut plus = vec![(1.0, s)];
                    let mut minus = vec![(-1.0, s)];
                    if !w.is_empty() {
                        plus.push((1.0, w));
                        minus.push((1.0, w));
                    }
                    e.put(c, dd(i, j), plus);
                    e.put(c, dd(j, i), minus);
                }
            }
        }
        MetricKind::Flat(_) => {}
        MetricKind::Conformal2 => return Err(Error::UnknownReference("conformal2 1-form density".into())),
    }
    Ok(out)
}

/// Ricci density grid as printed.
pub fn ricci_reference(m: &MetricDescriptor) -> Result<Vec<ReferenceExpression>> {
    match m.kind {
        MetricKind::Conformal3 => {
            let mut out = vec![ReferenceExpression::default(); 9];
            for i in 0..3 {
                for j in 0..3 {
                    let e = &mut out[3 * i + j];
                    if i == j {
                        for l in 0..3 {
                            e.put(-2, d2(l), vec![(1.5, "K")]);
                            e.put(-2, dd(l, l), vec![(1.0, "H"), (-1.0, "T")]);
                        }
                        e.put(-2, d2(i), vec![(-1.0, "F")]);
                        e.put(-2, dd(i, i), vec![(-1.0, "W")]);
                    } else {
                        e.put(-2, BasisWord::One(MultiIndex::pair(i, j)), vec![(-1.0, "F")]);
                        e.put(-2, dd(i, j), vec![(-1.0, "W"), (1.0, "S")]);
                        e.put(-2, dd(j, i), vec![(-1.0, "S")]);
                    }
                }
            }
            Ok(out)
        }
        MetricKind::Nonconformal3 => {
            let mut out: Vec<ReferenceExpression> = one_form_reference(m)?.iter().map(|e| e.negate()).collect();
            for i in 0..2 {
                let mut e = ReferenceExpression::default();
                for l in 0..2 {
                    e.put(0, d2(l), vec![(-1.0, "Kt11")]);
                    e.put(0, dd(l, l), vec![(-2.0, "Wt11")]);
                }
                e.put(-2, d2(2), vec![(-1.0, "Kt3")]);
                e.put(-2, dd(2, 2), vec![(-1.0, "Ht3")]);
                out[3 * i + i] = e;
            }
            let mut e = ReferenceExpression::default();
            e.put(-2, d2(2), vec![(-1.0, "Kt33")]);
            e.put(-2, dd(2, 2), vec![(-1.0, "Ht4"), (-2.0, "W33")]);
            out[8] = e;
            Ok(out)
        }
        MetricKind::Flat(_) => Ok(vec![ReferenceExpression::default(); 9]),
        MetricKind::Conformal2 => Err(Error::UnknownReference("conformal2 Ricci density".into())),
    }
}

// ---- classical formulas ----

/// Commutative polynomial in the jets of h, each monomial carrying e^{c·h}.
/// Keys are (c, sorted jets).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClassicalExpr {
    pub terms: BTreeMap<(i32, Vec<MultiIndex>), Q>,
}

impl ClassicalExpr {
    pub fn add(&mut self, c: Q, exp: i32, mut jets: Vec<MultiIndex>) {
        jets.sort();
        let e = self.terms.entry((exp, jets)).or_insert_with(|| qi(0));
        *e += c;
        let key_zero: Vec<_> = self.terms.iter().filter(|(_, v)| **v == qi(0)).map(|(k, _)| k.clone()).collect();
        for k in key_zero {
            self.terms.remove(&k);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

fn jet_name(a: &MultiIndex) -> String {
    let d: String = a.directions().iter().map(|i| (i + 1).to_string()).collect();
    format!("h{}", d)
}

impl fmt::Display for ClassicalExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for ((c, jets), v) in &self.terms {
            let sign = if *v < qi(0) { "-" } else if first { "" } else { "+" };
            let mag = if *v < qi(0) { -*v } else { *v };
            if !first {
                write!(f, " ")?;
            }
            write!(f, "{}{}", sign, mag)?;
            match *c {
                0 => {}
                1 => write!(f, "*exp(h)")?,
                -1 => write!(f, "*exp(-h)")?,
                c => write!(f, "*exp({}h)", c)?,
            }
            for j in jets {
                write!(f, "*{}", jet_name(j))?;
            }
            first = false;
        }
        Ok(())
    }
}

fn u(i: usize) -> MultiIndex {
    MultiIndex::unit(i)
}

fn p(i: usize, j: usize) -> MultiIndex {
    MultiIndex::pair(i, j)
}

/// Printed classical scalar curvature, π^{3/2} factor removed.
pub fn classical_scalar(m: &MetricDescriptor) -> ClassicalExpr {
    let mut c = ClassicalExpr::default();
    match m.kind {
        MetricKind::Conformal3 => {
            for j in 0..3 {
                c.add(q(-2, 24), -1, vec![p(j, j)]);
                c.add(q(1, 24), -1, vec![u(j), u(j)]);
            }
        }
        MetricKind::Nonconformal3 => {
            c.add(q(-2, 48), 0, vec![p(0, 0)]);
            c.add(q(-2, 48), 0, vec![p(1, 1)]);
            c.add(q(-4, 48), -2, vec![p(2, 2)]);
            c.add(q(6, 48), -2, vec![u(2), u(2)]);
        }
        _ => {}
    }
    c
}

/// Printed classical Ricci density, π^{3/2} factor removed.
pub fn classical_ricci(m: &MetricDescriptor) -> Vec<ClassicalExpr> {
    let mut out = vec![ClassicalExpr::default(); 9];
    match m.kind {
        MetricKind::Conformal3 => {
            let f = q(-1, 8);
            for i in 0..3 {
                for j in 0..3 {
                    let e = &mut out[3 * i + j];
                    if i == j {
                        for l in 0..3 {
                            e.add(f, -1, vec![p(l, l)]);
                            e.add(-f, -1, vec![u(l), u(l)]);
                        }
                    }
                    e.add(f, -1, vec![u(i), u(j)]);
                    e.add(f, -1, vec![p(i, j)]);
                }
            }
        }
        MetricKind::Nonconformal3 => {
            let f = q(1, 8);
            for i in 0..2 {
                let e = &mut out[3 * i + i];
                e.add(f * qi(2), -2, vec![u(2), u(2)]);
                e.add(-f, -2, vec![p(2, 2)]);
                e.add(-f, 0, vec![p(0, 0)]);
                e.add(-f, 0, vec![p(1, 1)]);
                out[3 * i + 2].add(-f, -1, vec![p(i, 2)]);
                out[6 + i].add(-f, -1, vec![p(i, 2)]);
            }
            out[8].add(f * qi(2), -2, vec![u(2), u(2)]);
            out[8].add(-f * qi(2), -2, vec![p(2, 2)]);
        }
        _ => {}
    }
    out
}
