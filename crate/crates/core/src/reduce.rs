//! Exact integration of b₂ over ξ down to one-dimensional radial integrals.

use crate::coeff::{gamma_half, q, recip, Coefficient, Q};
use crate::error::{Error, Result};
use crate::metric::{MetricDescriptor, Reduction};
use crate::symbols::{format_word, sup, Atom, Mono, SymbolExpr, Word};
use std::collections::BTreeMap;
use std::fmt;

/// coeff · k^{lead} ∫₀^∞ u^{Σm − ν} b₀(u)^{m₀} ρ₁ b₀(u)^{m₁} ⋯ ρ_p b₀(u)^{m_p} du
///
/// Each ρ_i is a single DK atom followed by the k-power of its run.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RadialIntegral {
    pub coeff: Coefficient,
    pub nu: Q,
    pub lead: i32,
    pub m: Vec<u32>,
    pub rho: Vec<Word>,
}

impl RadialIntegral {
    pub fn u_power(&self) -> Q {
        let s: u32 = self.m.iter().sum();
        Q::from_integer(s as i128) - self.nu
    }

    pub fn arity(&self) -> usize {
        self.rho.len()
    }

    /// The integrand as a word over B0u atoms, e.g. `k² b₀(u)² δ₁(k) k⁴ b₀(u)² δ₁(k) b₀(u)`.
    pub fn word(&self) -> Word {
        let mut w = Word::from_atoms([Atom::KPow(self.lead), Atom::B0u(self.m[0])]);
        for (i, r) in self.rho.iter().enumerate() {
            w = w.concat(r);
            w.push(Atom::B0u(self.m[i + 1]));
        }
        w
    }
}

impl fmt::Display for RadialIntegral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.u_power();
        let u = if p == Q::from_integer(0) {
            String::new()
        } else if p.is_integer() {
            format!(" u{}", sup(*p.numer() as i64))
        } else {
            format!(" u^({})", p)
        };
        write!(f, "{}{} {}", self.coeff, u, format_word(&self.word()))
    }
}

/// Sphere moment ∫_{S^{n-1}} ω^e dω.
pub fn sphere_moment(e: &[u8]) -> Coefficient {
    if e.iter().any(|x| x % 2 == 1) {
        return Coefficient::zero();
    }
    let total: i64 = e.iter().map(|&x| x as i64).sum::<i64>() + e.len() as i64;
    let mut c = Coefficient::rational(Q::from_integer(2));
    for &x in e {
        c = c * gamma_half(x as i64 + 1);
    }
    c * recip(gamma_half(total))
}

/// ∫₀^{2π} cos^a θ sin^b θ dθ
pub fn theta_integral(a: u8, b: u8) -> Coefficient {
    sphere_moment(&[a, b])
}

/// ∫_{-∞}^{∞} η^{2a} (1 + η²)^{-b} dη = B(a + ½, b − a − ½), for b > a + ½.
pub fn eta_integral(a: u32, b: i64) -> Result<Coefficient> {
    let x2 = 2 * a as i64 + 1; // 2(a + ½)
    let y2 = 2 * b - 2 * a as i64 - 1; // 2(b − a − ½)
    if y2 <= 0 {
        return Err(Error::NotIntegrable(format!("η^{} (1+η²)^-{}", 2 * a, b)));
    }
    Ok(gamma_half(x2) * gamma_half(y2) * recip(gamma_half(x2 + y2)))
}

/// (2π)^{-n} ∫ over the contour at λ = −1, folded into a constant.
pub fn density_prefactor(n: usize) -> Coefficient {
    match n {
        3 => Coefficient::new(q(1, 8), -7),
        2 => Coefficient::new(q(1, 4), -4),
        _ => panic!("dimension {} not supported", n),
    }
}

/// Splits a canonical word into (lead k-power, b₀ powers, ρ words).
fn segments(w: &Word) -> Result<(i32, Vec<u32>, Vec<Word>)> {
    let mut lead = 0;
    let mut m = vec![0u32];
    let mut rho: Vec<Word> = Vec::new();
    for a in w.atoms() {
        match a {
            Atom::KPow(r) => match rho.last_mut() {
                None => lead += r,
                Some(last) => last.push(Atom::KPow(*r)),
            },
            Atom::B0(k) => *m.last_mut().unwrap() += k,
            Atom::DK(_) => {
                rho.push(Word::from_atoms([*a]));
                m.push(0);
            }
            other => return Err(Error::StageMismatch(format!("{:?} in b₂", other))),
        }
    }
    Ok((lead, m, rho))
}

/// (ν, leading k-power, m, operand, π exponent) → rational part.
type Buckets = BTreeMap<(Q, i32, Vec<u32>, Vec<Word>, i32), Q>;

fn collect(out: &mut Buckets, c: Coefficient, nu: Q, lead: i32, m: Vec<u32>, rho: Vec<Word>) {
    if c.is_zero() {
        return;
    }
    let e = out.entry((nu, lead, m, rho, c.pi_half)).or_insert_with(|| Q::from_integer(0));
    *e += c.rat;
}

fn finish(map: Buckets) -> Vec<RadialIntegral> {
    map.into_iter()
        .filter(|(_, v)| *v != Q::from_integer(0))
        .map(|((nu, lead, m, rho, pi_half), rat)| RadialIntegral { coeff: Coefficient::new(rat, pi_half), nu, lead, m, rho })
        .collect()
}

/// Spherical reduction for a₂ = k^a |ξ|².
pub fn reduce_conformal(b2: &SymbolExpr, m: &MetricDescriptor) -> Result<Vec<RadialIntegral>> {
    let c0 = m.leading[0];
    if m.leading.iter().any(|&c| c != c0) {
        return Err(Error::Shape(format!("{} is not conformal", m.name())));
    }
    let n = m.dimension;
    let pre = density_prefactor(n) * Coefficient::rational(q(1, 2));
    let mut out = BTreeMap::new();
    for (xi, w, c) in b2.iter() {
        let mom = sphere_moment(&xi[..n]);
        if mom.is_zero() {
            continue;
        }
        let deg: u32 = xi.iter().map(|&x| x as u32).sum();
        let (lead, ms, rho) = segments(w)?;
        let total_m: u32 = ms.iter().sum();
        // u-power (|e| + n)/2 − 1 = Σm − ν
        let nu = Q::from_integer(total_m as i128) - q(deg as i128 + n as i128, 2) + Q::from_integer(1);
        collect(&mut out, pre * mom * *c, nu, lead, ms, rho);
    }
    Ok(finish(out))
}

/// Angular factor of a monomial after the (u, η, θ) substitution, and its ν.
pub fn cylindrical_factor(xi: &Mono, total_b0: u32) -> Result<Option<(Coefficient, Q)>> {
    let (a1, a2, c) = (xi[0], xi[1], xi[2]);
    if a1 % 2 == 1 || a2 % 2 == 1 || c % 2 == 1 {
        return Ok(None);
    }
    let th = theta_integral(a1, a2);
    // η-integrand ½ η^c (1+η²)^{(a₁+a₂)/2 − M + 1}
    let e = (a1 as i64 + a2 as i64) / 2 - total_b0 as i64 + 1;
    let eta = eta_integral(c as u32 / 2, -e)? * Coefficient::rational(q(1, 2));
    // u^{(a₁+a₂)/2} = u^{Σm − ν}
    let nu = Q::from_integer(total_b0 as i128 - (a1 as i128 + a2 as i128) / 2);
    Ok(Some((th * eta, nu)))
}

/// (u, η, θ) reduction for a₂ = k²(ξ₁² + ξ₂²) + ξ₃².
pub fn reduce_nonconformal(b2: &SymbolExpr, m: &MetricDescriptor) -> Result<Vec<RadialIntegral>> {
    if m.dimension != 3 || m.leading[0] != m.leading[1] || m.leading[2] != 0 {
        return Err(Error::Shape(format!("{} does not have the cylindrical leading symbol", m.name())));
    }
    let pre = density_prefactor(3);
    let mut out = BTreeMap::new();
    for (xi, w, c) in b2.iter() {
        let (lead, ms, rho) = segments(w)?;
        let total_m: u32 = ms.iter().sum();
        if let Some((ang, nu)) = cylindrical_factor(xi, total_m)? {
            collect(&mut out, pre * ang * *c, nu, lead, ms, rho);
        }
    }
    Ok(finish(out))
}

pub fn reduce(b2: &SymbolExpr, m: &MetricDescriptor) -> Result<Vec<RadialIntegral>> {
    match m.reduction {
        Reduction::Spherical => reduce_conformal(b2, m),
        Reduction::Cylindrical => reduce_nonconformal(b2, m),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::qi;
    use crate::symbols::MultiIndex;

    #[test]
    fn sphere_moments() {
        let pi = std::f64::consts::PI;
        assert!((sphere_moment(&[2, 0, 0]).to_f64() - 4.0 * pi / 3.0).abs() < 1e-14);
        assert!((sphere_moment(&[4, 0, 0]).to_f64() - 4.0 * pi / 5.0).abs() < 1e-14);
        assert!((sphere_moment(&[2, 2, 0]).to_f64() - 4.0 * pi / 15.0).abs() < 1e-14);
        assert!(sphere_moment(&[1, 1, 0]).is_zero());
        assert_eq!(sphere_moment(&[0, 0, 0]), Coefficient::new(qi(4), 2));
        assert_eq!(sphere_moment(&[0, 0]), Coefficient::new(qi(2), 2));
    }

    #[test]
    fn wallis_and_beta() {
        assert_eq!(theta_integral(0, 4), Coefficient::new(q(3, 4), 2));
        // ∫η²(1+η²)^{-3} = π/8
        assert_eq!(eta_integral(1, 3).unwrap(), Coefficient::new(q(1, 8), 2));
        assert!(eta_integral(1, 1).is_err());
    }

    #[test]
    fn sample_term_factor() {
        // ξ₂⁴ξ₃² b₀³ δ₃(k²) b₀ δ₃(k²) b₀ carries 3π²/16 and u²
        let (c, nu) = cylindrical_factor(&[0, 4, 2], 5).unwrap().unwrap();
        assert_eq!(c, Coefficient::new(q(3, 16), 4));
        assert_eq!(Q::from_integer(5) - nu, Q::from_integer(2));
    }

    #[test]
    fn odd_terms_vanish() {
        let m = MetricDescriptor::conformal3();
        let d = Atom::DK(MultiIndex::unit(0));
        let e = SymbolExpr::term(qi(1), [1, 1, 0], Word::from_atoms([Atom::B0(2), d, Atom::B0(2)]));
        assert!(reduce_conformal(&e, &m).unwrap().is_empty());
    }

    #[test]
    fn segments_attach_k_to_previous_rho() {
        let d = Atom::DK(MultiIndex::unit(0));
        let w = Word::from_atoms([Atom::KPow(2), Atom::B0(2), d, Atom::KPow(4), Atom::B0(2), d, Atom::B0(1)]);
        let (lead, m, rho) = segments(&w).unwrap();
        assert_eq!(lead, 2);
        assert_eq!(m, vec![2, 2, 1]);
        assert_eq!(rho[0], Word::from_atoms([d, Atom::KPow(4)]));
        assert_eq!(rho[1], Word::from_atoms([d]));
    }
}
