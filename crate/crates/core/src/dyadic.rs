//! Exact dyadic rationals `k / 2^n`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use num_bigint::BigUint;
use num_traits::{One, Zero};

/// A non-negative rational whose denominator is a power of two, kept in
/// lowest terms.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dyadic {
    num: BigUint,
    exp: u32,
}

impl Dyadic {
    pub fn zero() -> Self {
        Dyadic { num: BigUint::zero(), exp: 0 }
    }

    pub fn one() -> Self {
        Dyadic { num: BigUint::one(), exp: 0 }
    }

    /// `num / 2^exp`.
    pub fn new(num: impl Into<BigUint>, exp: u32) -> Self {
        Dyadic { num: num.into(), exp }.normalized()
    }

    fn normalized(mut self) -> Self {
        if self.num.is_zero() {
            self.exp = 0;
            return self;
        }
        let tz = self.num.trailing_zeros().unwrap_or(0).min(u64::from(self.exp)) as u32;
        self.num >>= tz;
        self.exp -= tz;
        self
    }

    pub fn half(&self) -> Self {
        Dyadic { num: self.num.clone(), exp: self.exp + 1 }.normalized()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.exp == 0 && self.num.is_one()
    }

    pub fn numerator(&self) -> &BigUint {
        &self.num
    }

    pub fn exponent(&self) -> u32 {
        self.exp
    }

    /// Nearest `f64`, for display only.
    pub fn to_f64(&self) -> f64 {
        let n: f64 = self.num.to_string().parse().unwrap_or(f64::INFINITY);
        n / 2f64.powi(self.exp as i32)
    }

    /// Parse `k/2^n`, `k/m` with `m` a power of two, or an integer.
    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let num: BigUint = n.parse().ok()?;
        let exp = if let Some(e) = d.strip_prefix("2^") {
            e.parse().ok()?
        } else {
            let den: BigUint = d.parse().ok()?;
            if den.is_zero() || den.count_ones() != 1 {
                return None;
            }
            den.trailing_zeros()? as u32
        };
        Some(Dyadic::new(num, exp))
    }
}

impl Add for &Dyadic {
    type Output = Dyadic;

    fn add(self, other: &Dyadic) -> Dyadic {
        let exp = self.exp.max(other.exp);
        let a = &self.num << (exp - self.exp) as usize;
        let b = &other.num << (exp - other.exp) as usize;
        Dyadic { num: a + b, exp }.normalized()
    }
}

impl Add for Dyadic {
    type Output = Dyadic;

    fn add(self, other: Dyadic) -> Dyadic {
        &self + &other
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let exp = self.exp.max(other.exp);
        let a = &self.num << (exp - self.exp) as usize;
        let b = &other.num << (exp - other.exp) as usize;
        a.cmp(&b)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, BigUint::one() << self.exp as usize)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn arithmetic_and_printing() {
        let h = Dyadic::one().half();
        assert_eq!(h.to_string(), "1/2");
        assert_eq!((&h + &h), Dyadic::one());
        let q = h.half();
        assert_eq!((&h + &q).to_string(), "3/4");
        assert_eq!(Dyadic::one().to_string(), "1");
        assert!(q < h);
        assert_eq!(Dyadic::parse("3/4"), Some(&h + &q));
        assert_eq!(Dyadic::parse("1/2^3"), Some(Dyadic::new(1u32, 3)));
        assert_eq!(Dyadic::parse("1/3"), None);
        assert_eq!(Dyadic::new(4u32, 3).to_string(), "1/2");
    }

    #[test]
    fn deep_halving_stays_exact() {
        let mut p = Dyadic::one();
        for _ in 0..200 {
            p = p.half();
        }
        let mut total = Dyadic::zero();
        let mut remaining = Dyadic::one();
        for _ in 0..200 {
            remaining = remaining.half();
            total = &total + &remaining;
        }
        assert_eq!(&total + &p, Dyadic::one());
    }

    proptest! {
        #[test]
        fn addition_commutes_and_matches_floats(a in 0u32..1000, ea in 0u32..12, b in 0u32..1000, eb in 0u32..12) {
            let x = Dyadic::new(a, ea);
            let y = Dyadic::new(b, eb);
            prop_assert_eq!(&x + &y, &y + &x);
            let f = x.to_f64() + y.to_f64();
            prop_assert!(((&x + &y).to_f64() - f).abs() < 1e-9);
            prop_assert_eq!(x.cmp(&y), x.to_f64().partial_cmp(&y.to_f64()).unwrap());
        }
    }
}
