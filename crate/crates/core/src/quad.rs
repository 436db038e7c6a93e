//! Adaptive Gauss–Kronrod (7/15) quadrature.
#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Default absolute/relative tolerance, overridable with `NCG_QUAD_TOL`.
pub fn default_tolerance() -> f64 {
    std::env::var("NCG_QUAD_TOL")
        .ok()
        .and_then(|s| s.parse::<f64>().ok())
        .filter(|t| *t > 0.0)
        .unwrap_or(1e-13)
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = fc * WGK[7];
    let mut rg = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        rk += WGK[j] * s;
        if j % 2 == 1 {
            rg += WG[j / 2] * s;
        }
    }
    (rk * h, ((rk - rg) * h).abs())
}

struct Piece {
    a: f64,
    b: f64,
    val: f64,
    err: f64,
}

impl PartialEq for Piece {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Piece {
    fn cmp(&self, o: &Self) -> Ordering {
        self.err.partial_cmp(&o.err).unwrap_or(Ordering::Equal)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

/// Integrates `f` over [a, b] until the error estimate is below
/// max(abs_tol, rel_tol · |value|).
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> QuadResult {
    const MAX_PIECES: usize = 4000;
    let (v, e) = gk15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Piece { a, b, val: v, err: e });
    let mut total = v;
    let mut err = e;
    while err > abs_tol.max(rel_tol * total.abs()) && heap.len() < MAX_PIECES {
        let p = heap.pop().unwrap();
        let mid = 0.5 * (p.a + p.b);
        let (v1, e1) = gk15(&f, p.a, mid);
        let (v2, e2) = gk15(&f, mid, p.b);
        total += v1 + v2 - p.val;
        err += e1 + e2 - p.err;
        heap.push(Piece { a: p.a, b: mid, val: v1, err: e1 });
        heap.push(Piece { a: mid, b: p.b, val: v2, err: e2 });
        if mid <= p.a || mid >= p.b {
            break;
        }
    }
    // re-sum to limit drift from the running updates
    let value: f64 = heap.iter().map(|p| p.val).sum();
    let error: f64 = heap.iter().map(|p| p.err).sum();
    QuadResult { value, error, converged: error <= abs_tol.max(rel_tol * value.abs()) }
}

/// ∫₀^∞ f(u) du, split at 1 with u = y² on [0, 1] and u = y^{-2} on the tail.
/// Both maps turn half-integer powers of u into integer powers of y.
pub fn integrate_half_line<F: Fn(f64) -> f64>(f: F, tol: f64) -> QuadResult {
    let head = integrate(|y| 2.0 * y * f(y * y), 0.0, 1.0, tol, tol);
    let tail = integrate(
        |y| {
            if y <= 0.0 {
                0.0
            } else {
                2.0 * f(1.0 / (y * y)) / (y * y * y)
            }
        },
        0.0,
        1.0,
        tol,
        tol,
    );
    QuadResult {
        value: head.value + tail.value,
        error: head.error + tail.error,
        converged: head.converged && tail.converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_exact() {
        let r = integrate(|x| x * x * x - x, 0.0, 2.0, 1e-14, 1e-14);
        assert_relative_eq!(r.value, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn half_line_beta() {
        // ∫ u^{1/2} (1+u)^{-2} du = π/2
        let r = integrate_half_line(|u| u.sqrt() / ((1.0 + u) * (1.0 + u)), 1e-13);
        assert_relative_eq!(r.value, std::f64::consts::FRAC_PI_2, epsilon = 1e-12);
        // ∫ (1+u)^{-3} du = 1/2
        let r = integrate_half_line(|u| (1.0 + u).powi(-3), 1e-13);
        assert_relative_eq!(r.value, 0.5, epsilon = 1e-13);
    }

    #[test]
    fn oscillatory_converges() {
        let r = integrate(|x| (10.0 * x).sin(), 0.0, std::f64::consts::PI, 1e-12, 1e-12);
        assert!(r.converged);
        assert!(r.value.abs() < 1e-11);
    }
}
