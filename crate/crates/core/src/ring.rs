//! Exact scalar arithmetic for the three coefficient rings: the rationals,
//! prime fields, and the integers.
//!
//! Every container (matrix, vector, submodule) carries a [`Ring`] tag and all
//! arithmetic is dispatched through it. Prime-field elements are kept reduced
//! in `0..p` and use `u64` arithmetic with `u128` intermediates; rational and
//! integer entries are arbitrary precision.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Coefficient ring selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ring {
    Rationals,
    PrimeField(u64),
    Integers,
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum RingError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("scalar {0} does not belong to ring {1}")]
    WrongRing(String, String),
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl Ring {
    pub fn validate(&self) -> Result<(), RingError> {
        match self {
            Ring::PrimeField(p) if !is_prime(*p) => Err(RingError::NotPrime(*p)),
            _ => Ok(()),
        }
    }

    pub fn is_field(&self) -> bool {
        !matches!(self, Ring::Integers)
    }

    pub fn zero(&self) -> Scalar {
        match self {
            Ring::Rationals => Scalar::Rat(BigRational::zero()),
            Ring::PrimeField(_) => Scalar::Fp(0),
            Ring::Integers => Scalar::Int(BigInt::zero()),
        }
    }

    pub fn one(&self) -> Scalar {
        match self {
            Ring::Rationals => Scalar::Rat(BigRational::one()),
            Ring::PrimeField(_) => Scalar::Fp(1),
            Ring::Integers => Scalar::Int(BigInt::one()),
        }
    }

    pub fn from_i64(&self, v: i64) -> Scalar {
        match self {
            Ring::Rationals => Scalar::Rat(BigRational::from(BigInt::from(v))),
            Ring::PrimeField(p) => Scalar::Fp(v.rem_euclid(*p as i64) as u64),
            Ring::Integers => Scalar::Int(BigInt::from(v)),
        }
    }

    pub fn add(&self, a: &Scalar, b: &Scalar) -> Scalar {
        match (self, a, b) {
            (Ring::Rationals, Scalar::Rat(x), Scalar::Rat(y)) => Scalar::Rat(x + y),
            (Ring::PrimeField(p), Scalar::Fp(x), Scalar::Fp(y)) => {
                Scalar::Fp(((*x as u128 + *y as u128) % *p as u128) as u64)
            }
            (Ring::Integers, Scalar::Int(x), Scalar::Int(y)) => Scalar::Int(x + y),
            _ => panic!("scalar/ring mismatch in add"),
        }
    }

    pub fn sub(&self, a: &Scalar, b: &Scalar) -> Scalar {
        self.add(a, &self.neg(b))
    }

    pub fn neg(&self, a: &Scalar) -> Scalar {
        match (self, a) {
            (Ring::Rationals, Scalar::Rat(x)) => Scalar::Rat(-x),
            (Ring::PrimeField(p), Scalar::Fp(x)) => Scalar::Fp(if *x == 0 { 0 } else { p - x }),
            (Ring::Integers, Scalar::Int(x)) => Scalar::Int(-x),
            _ => panic!("scalar/ring mismatch in neg"),
        }
    }

    pub fn mul(&self, a: &Scalar, b: &Scalar) -> Scalar {
        match (self, a, b) {
            (Ring::Rationals, Scalar::Rat(x), Scalar::Rat(y)) => Scalar::Rat(x * y),
            (Ring::PrimeField(p), Scalar::Fp(x), Scalar::Fp(y)) => {
                Scalar::Fp(((*x as u128 * *y as u128) % *p as u128) as u64)
            }
            (Ring::Integers, Scalar::Int(x), Scalar::Int(y)) => Scalar::Int(x * y),
            _ => panic!("scalar/ring mismatch in mul"),
        }
    }

    pub fn is_zero(&self, a: &Scalar) -> bool {
        match a {
            Scalar::Rat(x) => x.is_zero(),
            Scalar::Fp(x) => *x == 0,
            Scalar::Int(x) => x.is_zero(),
        }
    }

    /// Multiplicative inverse; `None` for non-units (0 everywhere, non-±1 over ℤ).
    pub fn inv(&self, a: &Scalar) -> Option<Scalar> {
        match (self, a) {
            (Ring::Rationals, Scalar::Rat(x)) => {
                (!x.is_zero()).then(|| Scalar::Rat(x.recip()))
            }
            (Ring::PrimeField(p), Scalar::Fp(x)) => {
                (*x != 0).then(|| Scalar::Fp(mod_pow(*x, p - 2, *p)))
            }
            (Ring::Integers, Scalar::Int(x)) => {
                (x.abs() == BigInt::one()).then(|| Scalar::Int(x.clone()))
            }
            _ => panic!("scalar/ring mismatch in inv"),
        }
    }

    /// Exact quotient a/b; `None` when b does not divide a in this ring.
    pub fn div_exact(&self, a: &Scalar, b: &Scalar) -> Option<Scalar> {
        match (self, a, b) {
            (Ring::Integers, Scalar::Int(x), Scalar::Int(y)) => {
                if y.is_zero() {
                    return None;
                }
                let (q, r) = num::Integer::div_rem(x, y);
                r.is_zero().then(|| Scalar::Int(q))
            }
            _ => self.inv(b).map(|bi| self.mul(a, &bi)),
        }
    }

    /// Parse a scalar from its text form: an integer, or `p/q` over the rationals.
    pub fn parse(&self, s: &str) -> Result<Scalar, RingError> {
        let bad = || RingError::WrongRing(s.to_string(), format!("{self}"));
        match self {
            Ring::Rationals => {
                if let Some((n, d)) = s.split_once('/') {
                    let n: BigInt = n.trim().parse().map_err(|_| bad())?;
                    let d: BigInt = d.trim().parse().map_err(|_| bad())?;
                    if d.is_zero() {
                        return Err(bad());
                    }
                    Ok(Scalar::Rat(BigRational::new(n, d)))
                } else {
                    let n: BigInt = s.trim().parse().map_err(|_| bad())?;
                    Ok(Scalar::Rat(BigRational::from(n)))
                }
            }
            Ring::PrimeField(p) => {
                let n: i128 = s.trim().parse().map_err(|_| bad())?;
                Ok(Scalar::Fp(n.rem_euclid(*p as i128) as u64))
            }
            Ring::Integers => {
                let n: BigInt = s.trim().parse().map_err(|_| bad())?;
                Ok(Scalar::Int(n))
            }
        }
    }
}

impl fmt::Display for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ring::Rationals => write!(f, "Q"),
            Ring::PrimeField(p) => write!(f, "F{p}"),
            Ring::Integers => write!(f, "Z"),
        }
    }
}

fn mod_pow(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc: u128 = 1;
    let mut b = base as u128 % p as u128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % p as u128;
        }
        b = b * b % p as u128;
        exp >>= 1;
    }
    base = acc as u64;
    base
}

/// An exact ring element. The variant must match the ring of the container
/// holding it; prime-field values are always reduced into `0..p`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Scalar {
    Fp(u64),
    Int(BigInt),
    Rat(BigRational),
}

impl Scalar {
    /// Text form used in reports and scenario files.
    pub fn render(&self) -> String {
        match self {
            Scalar::Fp(x) => x.to_string(),
            Scalar::Int(x) => x.to_string(),
            Scalar::Rat(x) => {
                if x.denom().is_one() {
                    format!("{}/1", x.numer())
                } else {
                    format!("{}/{}", x.numer(), x.denom())
                }
            }
        }
    }

    /// The value as an `i64` when it is an integer that fits; used by tests.
    pub fn as_i64(&self) -> Option<i64> {
        match self {
            Scalar::Fp(x) => i64::try_from(*x).ok(),
            Scalar::Int(x) => i64::try_from(x.clone()).ok(),
            Scalar::Rat(x) => {
                if x.denom().is_one() {
                    i64::try_from(x.numer().clone()).ok()
                } else {
                    None
                }
            }
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_validation() {
        assert!(Ring::PrimeField(2).validate().is_ok());
        assert!(Ring::PrimeField(5).validate().is_ok());
        assert!(Ring::PrimeField(4).validate().is_err());
        assert!(Ring::PrimeField(1).validate().is_err());
        assert!(Ring::Integers.validate().is_ok());
    }

    #[test]
    fn field_inverses() {
        let f5 = Ring::PrimeField(5);
        for v in 1..5i64 {
            let x = f5.from_i64(v);
            let xi = f5.inv(&x).unwrap();
            assert_eq!(f5.mul(&x, &xi), f5.one());
        }
        assert!(f5.inv(&f5.zero()).is_none());

        let q = Ring::Rationals;
        let half = q.parse("1/2").unwrap();
        assert_eq!(q.mul(&half, &q.from_i64(2)), q.one());
    }

    #[test]
    fn integer_exact_division() {
        let z = Ring::Integers;
        assert_eq!(
            z.div_exact(&z.from_i64(6), &z.from_i64(3)),
            Some(z.from_i64(2))
        );
        assert_eq!(z.div_exact(&z.from_i64(7), &z.from_i64(3)), None);
        assert!(z.inv(&z.from_i64(2)).is_none());
        assert_eq!(z.inv(&z.from_i64(-1)), Some(z.from_i64(-1)));
    }

    #[test]
    fn parse_round_trip() {
        let q = Ring::Rationals;
        let v = q.parse("-3/9").unwrap();
        assert_eq!(v.render(), "-1/3");
        let f7 = Ring::PrimeField(7);
        assert_eq!(f7.parse("-1").unwrap(), Scalar::Fp(6));
    }
}
