//! Exact coefficients: a rational times a half-integer power of π.

use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::ops::{Mul, Neg};

pub type Q = Ratio<i128>;

pub fn q(n: i128, d: i128) -> Q {
    Ratio::new(n, d)
}

pub fn qi(n: i128) -> Q {
    Ratio::from_integer(n)
}

pub fn q_to_f64(x: &Q) -> f64 {
    x.numer().to_f64().unwrap() / x.denom().to_f64().unwrap()
}

/// Value `rat * pi^(pi_half / 2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coefficient {
    pub rat: Q,
    pub pi_half: i32,
}

impl Coefficient {
    pub fn new(rat: Q, pi_half: i32) -> Self {
        if rat.is_zero() {
            Self::zero()
        } else {
            Coefficient { rat, pi_half }
        }
    }

    pub fn rational(rat: Q) -> Self {
        Self::new(rat, 0)
    }

    pub fn zero() -> Self {
        Coefficient { rat: Q::zero(), pi_half: 0 }
    }

    pub fn one() -> Self {
        Coefficient { rat: Q::one(), pi_half: 0 }
    }

    pub fn is_zero(&self) -> bool {
        self.rat.is_zero()
    }

    /// Sum of two coefficients; `None` when the π powers differ.
    pub fn checked_add(&self, other: &Self) -> Option<Self> {
        if self.is_zero() {
            return Some(*other);
        }
        if other.is_zero() {
            return Some(*self);
        }
        if self.pi_half != other.pi_half {
            return None;
        }
        Some(Self::new(self.rat + other.rat, self.pi_half))
    }

    pub fn to_f64(&self) -> f64 {
        q_to_f64(&self.rat) * std::f64::consts::PI.powf(self.pi_half as f64 / 2.0)
    }
}

impl Mul for Coefficient {
    type Output = Coefficient;
    fn mul(self, rhs: Coefficient) -> Coefficient {
        Coefficient::new(self.rat * rhs.rat, self.pi_half + rhs.pi_half)
    }
}

impl Mul<Q> for Coefficient {
    type Output = Coefficient;
    fn mul(self, rhs: Q) -> Coefficient {
        Coefficient::new(self.rat * rhs, self.pi_half)
    }
}

impl Neg for Coefficient {
    type Output = Coefficient;
    fn neg(self) -> Coefficient {
        Coefficient::new(-self.rat, self.pi_half)
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.rat)?;
        match self.pi_half {
            0 => Ok(()),
            2 => write!(f, "·π"),
            p if p % 2 == 0 => write!(f, "·π^{}", p / 2),
            p => write!(f, "·π^({}/2)", p),
        }
    }
}

/// Γ(n/2) for a positive integer n, as an exact coefficient.
pub fn gamma_half(n: i64) -> Coefficient {
    assert!(n > 0, "gamma_half needs a positive argument");
    if n % 2 == 0 {
        let mut r = Q::one();
        for k in 1..(n / 2) {
            r *= qi(k as i128);
        }
        Coefficient::rational(r)
    } else {
        // Γ(1/2) = √π, Γ(x+1) = xΓ(x)
        let mut r = Q::one();
        let mut x = q(1, 2);
        while x < q(n as i128, 2) {
            r *= x;
            x += Q::one();
        }
        Coefficient::new(r, 1)
    }
}

/// Inverse of a nonzero coefficient.
pub fn recip(c: Coefficient) -> Coefficient {
    assert!(!c.is_zero());
    Coefficient::new(c.rat.recip(), -c.pi_half)
}

/// Best rational approximation with denominator at most `max_den`, if one
/// lies within `tol` of `x`.
pub fn rationalize(x: f64, max_den: i128, tol: f64) -> Option<Q> {
    let mut best: Option<(f64, Q)> = None;
    for d in 1..=max_den {
        let n = (x * d as f64).round();
        let err = (x - n / d as f64).abs();
        if err <= tol && best.as_ref().is_none_or(|(e, _)| err < *e - 1e-15) {
            best = Some((err, q(n as i128, d)));
        }
    }
    best.map(|(_, r)| r)
}

pub fn abs_q(x: &Q) -> Q {
    x.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_is_unique() {
        let a = Coefficient::new(q(0, 5), 3);
        assert_eq!(a, Coefficient::zero());
        assert_eq!(Coefficient::new(q(2, 4), 1).rat, q(1, 2));
    }

    #[test]
    fn gamma_values() {
        assert_eq!(gamma_half(2), Coefficient::one());
        assert_eq!(gamma_half(6), Coefficient::rational(qi(2)));
        assert_eq!(gamma_half(1), Coefficient::new(qi(1), 1));
        assert_eq!(gamma_half(5), Coefficient::new(q(3, 4), 1));
        assert!((gamma_half(7).to_f64() - 3.323_350_970_447_843).abs() < 1e-12);
    }

    #[test]
    fn add_requires_matching_pi() {
        let a = Coefficient::new(qi(1), 2);
        let b = Coefficient::new(qi(1), 1);
        assert!(a.checked_add(&b).is_none());
        assert_eq!(a.checked_add(&a).unwrap().rat, qi(2));
        assert_eq!(a.checked_add(&-a).unwrap(), Coefficient::zero());
    }

    #[test]
    fn rationalize_small() {
        assert_eq!(rationalize(-1.0 / 24.0 + 1e-9, 96, 1e-6), Some(q(-1, 24)));
        assert_eq!(rationalize(0.125, 96, 1e-6), Some(q(1, 8)));
        assert_eq!(rationalize(std::f64::consts::PI, 96, 1e-6), None);
    }
}
