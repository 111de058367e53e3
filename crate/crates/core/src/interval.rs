//! Dyadic rationals and outward-rounded intervals.
//!
//! Every endpoint is an exact `mantissa * 2^exponent` with a big-integer
//! mantissa. Operations are carried out exactly and then rounded to the
//! working precision: lower endpoints toward `-inf`, upper endpoints toward
//! `+inf`. The true result of any operation on contained reals is therefore
//! always contained in the result interval.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Rounding direction for inexact dyadic operations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Round {
    Down,
    Up,
}

/// An exact binary fraction `mant * 2^exp`.
#[derive(Clone, Debug)]
pub struct Dyadic {
    mant: BigInt,
    exp: i64,
}

fn shift_round(mant: &BigInt, shift: u64, dir: Round) -> BigInt {
    // floor(mant / 2^shift), or ceil for Round::Up
    let floor = mant >> shift;
    match dir {
        Round::Down => floor,
        Round::Up => {
            if (&floor << shift) == *mant {
                floor
            } else {
                floor + 1
            }
        }
    }
}

impl Dyadic {
    pub fn zero() -> Self {
        Dyadic {
            mant: BigInt::zero(),
            exp: 0,
        }
    }

    pub fn one() -> Self {
        Dyadic::from_int(BigInt::one())
    }

    pub fn new(mant: BigInt, exp: i64) -> Self {
        Dyadic { mant, exp }
    }

    pub fn from_int(n: BigInt) -> Self {
        Dyadic { mant: n, exp: 0 }
    }

    pub fn from_i64(n: i64) -> Self {
        Dyadic::from_int(BigInt::from(n))
    }

    pub fn from_biguint(n: &BigUint) -> Self {
        Dyadic::from_int(BigInt::from(n.clone()))
    }

    /// Exact conversion; `None` for non-finite input.
    pub fn from_f64(x: f64) -> Option<Self> {
        if !x.is_finite() {
            return None;
        }
        if x == 0.0 {
            return Some(Dyadic::zero());
        }
        let bits = x.to_bits();
        let sign = if bits >> 63 == 0 { 1i64 } else { -1 };
        let raw_exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, exp) = if raw_exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), raw_exp - 1075)
        };
        Some(Dyadic {
            mant: BigInt::from(mant) * sign,
            exp,
        })
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mant
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn signum(&self) -> Sign {
        self.mant.sign()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    pub fn abs(&self) -> Dyadic {
        Dyadic {
            mant: self.mant.abs(),
            exp: self.exp,
        }
    }

    /// Number of significant bits in the mantissa.
    pub fn bits(&self) -> u64 {
        self.mant.bits()
    }

    fn align(&self, other: &Dyadic) -> (BigInt, BigInt, i64) {
        match self.exp.cmp(&other.exp) {
            Ordering::Equal => (self.mant.clone(), other.mant.clone(), self.exp),
            Ordering::Greater => (
                &self.mant << ((self.exp - other.exp) as u64),
                other.mant.clone(),
                other.exp,
            ),
            Ordering::Less => (
                self.mant.clone(),
                &other.mant << ((other.exp - self.exp) as u64),
                self.exp,
            ),
        }
    }

    pub fn add_exact(&self, other: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let (a, b, exp) = self.align(other);
        Dyadic { mant: a + b, exp }
    }

    pub fn sub_exact(&self, other: &Dyadic) -> Dyadic {
        self.add_exact(&other.neg_exact())
    }

    pub fn mul_exact(&self, other: &Dyadic) -> Dyadic {
        Dyadic {
            mant: &self.mant * &other.mant,
            exp: self.exp + other.exp,
        }
    }

    pub fn neg_exact(&self) -> Dyadic {
        Dyadic {
            mant: -&self.mant,
            exp: self.exp,
        }
    }

    /// Multiply by `2^k` exactly.
    pub fn ldexp(&self, k: i64) -> Dyadic {
        Dyadic {
            mant: self.mant.clone(),
            exp: self.exp + k,
        }
    }

    /// Round to at most `prec` significant bits in direction `dir`.
    pub fn round(&self, prec: u32, dir: Round) -> Dyadic {
        let bits = self.mant.bits();
        if bits <= prec as u64 {
            return self.clone();
        }
        let shift = bits - prec as u64;
        Dyadic {
            mant: shift_round(&self.mant, shift, dir),
            exp: self.exp + shift as i64,
        }
    }

    /// `self / other` rounded to `prec` bits in direction `dir`.
    ///
    /// Panics on division by zero.
    pub fn div(&self, other: &Dyadic, prec: u32, dir: Round) -> Dyadic {
        assert!(!other.is_zero(), "dyadic division by zero");
        if self.is_zero() {
            return Dyadic::zero();
        }
        let extra = (prec as i64 + 2 + other.mant.bits() as i64 - self.mant.bits() as i64).max(0);
        let num = &self.mant << (extra as u64);
        let (mut num, mut den) = (num, other.mant.clone());
        if den.is_negative() {
            num = -num;
            den = -den;
        }
        let q = match dir {
            Round::Down => num.div_floor(&den),
            Round::Up => -((-num).div_floor(&den)),
        };
        Dyadic {
            mant: q,
            exp: self.exp - other.exp - extra,
        }
        .round(prec, dir)
    }

    /// Nearest-ish `f64` in the requested direction (directed for normal range values).
    pub fn to_f64_dir(&self, dir: Round) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let r = self.round(53, dir);
        let m = r.mant.to_f64().expect("53-bit mantissa fits f64");
        ldexp_f64(m, r.exp)
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let r = self.round(60, Round::Down);
        ldexp_f64(r.mant.to_f64().unwrap_or(f64::NAN), r.exp)
    }
}

fn ldexp_f64(m: f64, mut exp: i64) -> f64 {
    let mut x = m;
    while exp > 1000 {
        x *= 2f64.powi(1000);
        exp -= 1000;
    }
    while exp < -1000 {
        x *= 2f64.powi(-1000);
        exp += 1000;
    }
    x * 2f64.powi(exp as i32)
}

impl PartialEq for Dyadic {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Dyadic {}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let sa = self.mant.sign();
        let sb = other.mant.sign();
        if sa != sb || sa == Sign::NoSign {
            let rank = |s: Sign| match s {
                Sign::Minus => -1,
                Sign::NoSign => 0,
                Sign::Plus => 1,
            };
            return rank(sa).cmp(&rank(sb));
        }
        let (a, b, _) = self.align(other);
        a.cmp(&b)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}

/// Default working precision in bits.
pub const DEFAULT_PRECISION: u32 = 128;

/// A closed interval `[lo, hi]` with dyadic endpoints.
#[derive(Clone, Debug)]
pub struct Interval {
    lo: Dyadic,
    hi: Dyadic,
    prec: u32,
}

impl Interval {
    pub fn new(lo: Dyadic, hi: Dyadic, prec: u32) -> Self {
        debug_assert!(lo <= hi, "inverted interval");
        Interval { lo, hi, prec }
    }

    pub fn point(x: Dyadic, prec: u32) -> Self {
        Interval {
            lo: x.clone(),
            hi: x,
            prec,
        }
    }

    pub fn from_int(n: impl Into<BigInt>, prec: u32) -> Self {
        Interval::point(Dyadic::from_int(n.into()), prec)
    }

    pub fn zero(prec: u32) -> Self {
        Interval::point(Dyadic::zero(), prec)
    }

    pub fn one(prec: u32) -> Self {
        Interval::point(Dyadic::one(), prec)
    }

    pub fn lo(&self) -> &Dyadic {
        &self.lo
    }

    pub fn hi(&self) -> &Dyadic {
        &self.hi
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn with_precision(mut self, prec: u32) -> Self {
        self.prec = prec;
        self
    }

    fn rounded(lo: Dyadic, hi: Dyadic, prec: u32) -> Self {
        Interval {
            lo: lo.round(prec, Round::Down),
            hi: hi.round(prec, Round::Up),
            prec,
        }
    }

    /// Upper bound on `hi - lo`.
    pub fn width(&self) -> f64 {
        self.hi.sub_exact(&self.lo).to_f64_dir(Round::Up)
    }

    pub fn lo_f64(&self) -> f64 {
        self.lo.to_f64_dir(Round::Down)
    }

    pub fn hi_f64(&self) -> f64 {
        self.hi.to_f64_dir(Round::Up)
    }

    pub fn mid_f64(&self) -> f64 {
        self.lo.add_exact(&self.hi).ldexp(-1).to_f64()
    }

    pub fn contains(&self, x: &Dyadic) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_f64(&self, x: f64) -> bool {
        Dyadic::from_f64(x).is_some_and(|d| self.contains(&d))
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    /// Every element of `self` is strictly below every element of `other`.
    pub fn certainly_lt(&self, other: &Interval) -> bool {
        self.hi < other.lo
    }

    /// Every element of `self` is at most every element of `other`.
    pub fn certainly_le(&self, other: &Interval) -> bool {
        self.hi <= other.lo
    }

    pub fn is_positive(&self) -> bool {
        self.lo.signum() == Sign::Plus
    }

    pub fn contains_zero(&self) -> bool {
        self.lo.signum() != Sign::Plus && self.hi.signum() != Sign::Minus
    }

    pub fn abs(&self) -> Interval {
        if !self.lo.is_negative() {
            self.clone()
        } else if self.hi.signum() != Sign::Plus {
            -self
        } else {
            let hi = std::cmp::max(self.lo.abs(), self.hi.abs());
            Interval::new(Dyadic::zero(), hi, self.prec)
        }
    }

    /// Multiply by an exact integer.
    pub fn scale(&self, k: &BigInt) -> Interval {
        let kd = Dyadic::from_int(k.clone());
        let a = self.lo.mul_exact(&kd);
        let b = self.hi.mul_exact(&kd);
        if k.is_negative() {
            Interval::rounded(b, a, self.prec)
        } else {
            Interval::rounded(a, b, self.prec)
        }
    }

    pub fn recip(&self) -> Interval {
        assert!(
            !self.contains_zero(),
            "reciprocal of an interval containing zero"
        );
        let one = Dyadic::one();
        Interval {
            lo: one.div(&self.hi, self.prec, Round::Down),
            hi: one.div(&self.lo, self.prec, Round::Up),
            prec: self.prec,
        }
    }

    pub fn div(&self, other: &Interval) -> Interval {
        let prec = self.prec.max(other.prec);
        self.with_prec_ref(prec) * &other.clone().with_precision(prec).recip()
    }

    fn with_prec_ref(&self, prec: u32) -> Interval {
        Interval {
            lo: self.lo.clone(),
            hi: self.hi.clone(),
            prec,
        }
    }

    pub fn powi(&self, n: u32) -> Interval {
        let mut result = Interval::one(self.prec);
        let mut base = self.clone();
        let mut e = n;
        // binary powering; only valid as an enclosure for non-negative bases,
        // which is all this crate needs
        debug_assert!(!self.lo.is_negative() || n <= 1);
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// `1 - self`.
    pub fn one_minus(&self) -> Interval {
        &Interval::one(self.prec) - self
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: std::cmp::min(&self.lo, &other.lo).clone(),
            hi: std::cmp::max(&self.hi, &other.hi).clone(),
            prec: self.prec.max(other.prec),
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo_f64(), self.hi_f64())
    }
}

impl Add for &Interval {
    type Output = Interval;
    fn add(self, rhs: &Interval) -> Interval {
        Interval::rounded(
            self.lo.add_exact(&rhs.lo),
            self.hi.add_exact(&rhs.hi),
            self.prec.max(rhs.prec),
        )
    }
}

impl Sub for &Interval {
    type Output = Interval;
    fn sub(self, rhs: &Interval) -> Interval {
        Interval::rounded(
            self.lo.sub_exact(&rhs.hi),
            self.hi.sub_exact(&rhs.lo),
            self.prec.max(rhs.prec),
        )
    }
}

impl Mul for &Interval {
    type Output = Interval;
    fn mul(self, rhs: &Interval) -> Interval {
        let prec = self.prec.max(rhs.prec);
        if !self.lo.is_negative() && !rhs.lo.is_negative() {
            return Interval::rounded(self.lo.mul_exact(&rhs.lo), self.hi.mul_exact(&rhs.hi), prec);
        }
        let products = [
            self.lo.mul_exact(&rhs.lo),
            self.lo.mul_exact(&rhs.hi),
            self.hi.mul_exact(&rhs.lo),
            self.hi.mul_exact(&rhs.hi),
        ];
        let lo = products.iter().min().unwrap().clone();
        let hi = products.iter().max().unwrap().clone();
        Interval::rounded(lo, hi, prec)
    }
}

impl Neg for &Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval {
            lo: self.hi.neg_exact(),
            hi: self.lo.neg_exact(),
            prec: self.prec,
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Interval {
            type Output = Interval;
            fn $m(self, rhs: Interval) -> Interval {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Interval> for Interval {
            type Output = Interval;
            fn $m(self, rhs: &Interval) -> Interval {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        -&self
    }
}

/// Enclosure of `num / den` for exact integers.
pub fn ratio_interval(num: &BigInt, den: &BigInt, prec: u32) -> Interval {
    let n = Dyadic::from_int(num.clone());
    let d = Dyadic::from_int(den.clone());
    let mut lo = n.div(&d, prec, Round::Down);
    let mut hi = n.div(&d, prec, Round::Up);
    if lo > hi {
        std::mem::swap(&mut lo, &mut hi);
    }
    Interval { lo, hi, prec }
}
