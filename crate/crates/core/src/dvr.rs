//! The valued field `Q` with the `p`-adic valuation, its valuation ring
//! `Z_(p)`, and the residue field `F_p`.

use std::fmt;

use num::{BigInt, BigRational, Integer, One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// An exact element of `K = Q`.
pub type Rat = BigRational;

/// Choice of the residue characteristic; the uniformizer is `p` itself.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ValConfig {
    p: u64,
}

impl ValConfig {
    /// Accepts any prime, including 2. Operations on quadratic forms call
    /// [`ValConfig::require_odd`] themselves.
    pub fn new(p: u64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(ValConfig { p })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn require_odd(&self) -> Result<()> {
        if self.p == 2 {
            Err(Error::EvenResidueChar)
        } else {
            Ok(())
        }
    }

    /// The uniformizer raised to an integer power.
    pub fn pi_pow(&self, e: i64) -> Rat {
        pi_pow(self.p, e)
    }
}

/// A `p`-adic valuation; `Infinite` is the valuation of zero and compares
/// greater than every finite value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        self == Valuation::Infinite
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "+inf"),
        }
    }
}

/// An element of the residue field `F_p`, stored in `[0, p)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ResScalar(u64);

impl ResScalar {
    pub fn value(self) -> u64 {
        self.0
    }
}

impl fmt::Display for ResScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub(crate) fn int_valuation(n: &BigInt, p: u64) -> i64 {
    debug_assert!(!n.is_zero());
    let p = BigInt::from(p);
    let mut n = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return v;
        }
        n = q;
        v += 1;
    }
}

/// Exact power of `p` dividing `x`; negative when `p` divides the denominator.
pub fn valuation(x: &Rat, cfg: ValConfig) -> Valuation {
    val_p(x, cfg.p)
}

pub(crate) fn val_p(x: &Rat, p: u64) -> Valuation {
    if x.is_zero() {
        return Valuation::Infinite;
    }
    let num = int_valuation(x.numer(), p);
    if num > 0 {
        return Valuation::Finite(num);
    }
    Valuation::Finite(-int_valuation(x.denom(), p))
}

/// Splits a nonzero `x` as `u * p^v` with `v(u) = 0`.
pub fn unit_part(x: &Rat, p: u64) -> (Rat, i64) {
    let v = val_p(x, p).finite().expect("unit_part of zero");
    (x * pi_pow(p, -v), v)
}

pub fn pi_pow(p: u64, e: i64) -> Rat {
    let base = BigInt::from(p).pow(e.unsigned_abs() as u32);
    if e >= 0 {
        Rat::from_integer(base)
    } else {
        Rat::new(BigInt::one(), base)
    }
}

pub(crate) fn big_mod(n: &BigInt, m: u64) -> u64 {
    let r = n.mod_floor(&BigInt::from(m));
    r.to_u64().expect("residue fits in u64")
}

/// Image of `x` in `F_p`.
pub fn residue(x: &Rat, cfg: ValConfig) -> Result<ResScalar> {
    residue_p(x, cfg.p).map(ResScalar)
}

pub(crate) fn residue_p(x: &Rat, p: u64) -> Result<u64> {
    match val_p(x, p) {
        Valuation::Infinite => Ok(0),
        Valuation::Finite(v) if v < 0 => Err(Error::NegativeValuation(v)),
        Valuation::Finite(v) if v > 0 => Ok(0),
        Valuation::Finite(_) => {
            let a = big_mod(x.numer(), p);
            let b = big_mod(x.denom(), p);
            Ok(a * inv_mod(b, p) % p)
        }
    }
}

/// Residue of `x` modulo `p^e` for `x` in the valuation ring, as an integer in
/// `[0, p^e)`.
pub(crate) fn residue_mod_pow(x: &Rat, p: u64, e: u32) -> BigInt {
    let m = BigInt::from(p).pow(e);
    let den = x.denom().mod_floor(&m);
    let inv = den
        .modinv(&m)
        .expect("denominator must be a unit in the valuation ring");
    (x.numer() * inv).mod_floor(&m)
}

pub(crate) fn inv_mod(a: u64, p: u64) -> u64 {
    debug_assert!(!a.is_multiple_of(p));
    pow_mod(a % p, p - 2, p)
}

pub(crate) fn pow_mod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * a % m;
        }
        a = a * a % m;
        e >>= 1;
    }
    r
}

/// The lower and upper middles `(floor((x+y)/2), ceil((x+y)/2))`.
pub fn int_middles(x: i64, y: i64) -> (i64, i64) {
    let s = x + y;
    (s.div_euclid(2), -(-s).div_euclid(2))
}

/// Renders a rational as `num/den`, or just `num` for integers.
pub fn fmt_rat(x: &Rat) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parses `a`, `-a`, or `a/b`.
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.strip_prefix('+').unwrap_or(n).parse().ok()?;
    let d: BigInt = d.parse().ok()?;
    if d.is_zero() {
        return None;
    }
    Some(Rat::new(n, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rat {
        Rat::new(n.into(), d.into())
    }

    fn five() -> ValConfig {
        ValConfig::new(5).unwrap()
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(valuation(&q(0, 1), five()), Valuation::Infinite);
        assert_eq!(valuation(&q(50, 1), five()), Valuation::Finite(2));
        assert_eq!(valuation(&q(3, 25), five()), Valuation::Finite(-2));
        assert!(Valuation::Finite(i64::MAX) < Valuation::Infinite);
    }

    #[test]
    fn residue_examples() {
        assert_eq!(residue(&q(7, 1), five()).unwrap().value(), 2);
        assert_eq!(residue(&q(1, 2), five()).unwrap().value(), 3);
        assert_eq!(residue(&q(1, 5), five()), Err(Error::NegativeValuation(-1)));
        assert_eq!(residue(&q(-1, 1), five()).unwrap().value(), 4);
    }

    #[test]
    fn residue_mod_prime_power() {
        // 1/2 mod 25 = 13
        assert_eq!(residue_mod_pow(&q(1, 2), 5, 2), BigInt::from(13));
        assert_eq!(residue_mod_pow(&q(-3, 1), 5, 1), BigInt::from(2));
    }

    #[test]
    fn middles_examples() {
        assert_eq!(int_middles(1, 2), (1, 2));
        assert_eq!(int_middles(3, 3), (3, 3));
        assert_eq!(int_middles(-1, -2), (-2, -1));
    }

    #[test]
    fn config_rejects_composites() {
        assert_eq!(ValConfig::new(9), Err(Error::NotPrime(9)));
        assert!(ValConfig::new(2).unwrap().require_odd().is_err());
    }

    #[test]
    fn rational_text_round_trip() {
        for s in ["0", "-7", "3/25", "-1/2"] {
            assert_eq!(fmt_rat(&parse_rat(s).unwrap()), s);
        }
        assert_eq!(parse_rat("6/4"), Some(q(3, 2)));
        assert_eq!(parse_rat("1/0"), None);
        assert_eq!(parse_rat("x"), None);
    }

    proptest! {
        #[test]
        fn middle_shift_identities(x in -1000i64..1000, y in -1000i64..1000) {
            let (lo, hi) = int_middles(x, y);
            let (lo1, hi1) = int_middles(x + 1, y);
            prop_assert_eq!(lo1, hi);
            prop_assert_eq!(hi1, lo + 1);
            let (nlo, nhi) = int_middles(-x, -y);
            prop_assert_eq!(nhi, -lo);
            prop_assert_eq!(nlo, -hi);
            if (x - y).rem_euclid(2) == 0 {
                prop_assert_eq!(lo, hi);
                prop_assert_eq!(2 * lo, x + y);
            } else {
                prop_assert_eq!(hi, lo + 1);
            }
        }

        #[test]
        fn middles_as_sup_inf(x in -40i64..40, y in -40i64..40) {
            let bound = x.abs() + y.abs() + 1;
            let lo = (-bound..=bound).map(|n| (x - n).min(y + n)).max().unwrap();
            let hi = (-bound..=bound).map(|n| (x - n).max(y + n)).min().unwrap();
            prop_assert_eq!(int_middles(x, y), (lo, hi));
        }

        #[test]
        fn valuation_is_multiplicative_and_ultrametric(
            a in -500i64..500, b in 1i64..500, c in -500i64..500, d in 1i64..500,
        ) {
            let cfg = ValConfig::new(3).unwrap();
            let (x, y) = (q(a, b), q(c, d));
            if a != 0 && c != 0 {
                let (vx, vy) = (valuation(&x, cfg).finite().unwrap(), valuation(&y, cfg).finite().unwrap());
                prop_assert_eq!(valuation(&(&x * &y), cfg), Valuation::Finite(vx + vy));
                let vs = valuation(&(&x + &y), cfg);
                prop_assert!(vs >= Valuation::Finite(vx.min(vy)));
                if vx != vy {
                    prop_assert_eq!(vs, Valuation::Finite(vx.min(vy)));
                }
            }
        }
    }
}
