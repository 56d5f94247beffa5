//! Certified interval arithmetic with rational endpoints.
//!
//! Field operations on intervals are exact. Only the transcendental and
//! algebraic primitives (`sqrt`, `pi`, `cos_pi`, `sin_pi`) round, and they
//! round outward onto the dyadic grid `2^-bits`, so every enclosure is
//! guaranteed to contain the true value. Exact inputs stay exact whenever the
//! result is representable (perfect squares, the rational special values of
//! cosine).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::rational::{format_rational, rat, to_f64};
use crate::Rational;

/// Working precision, in bits of the dyadic rounding grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Precision(pub u32);

impl Precision {
    pub const DEFAULT: Precision = Precision(96);
    pub const MAX: Precision = Precision(4096);

    /// Starting precision, overridable with `CAUSALBOX_PRECISION`.
    pub fn from_env() -> Self {
        std::env::var("CAUSALBOX_PRECISION")
            .ok()
            .and_then(|v| v.trim().parse::<u32>().ok())
            .filter(|&b| b >= 16)
            .map(|b| Precision(b.min(Self::MAX.0)))
            .unwrap_or(Self::DEFAULT)
    }

    /// Next precision in the escalation ladder, or `None` once exhausted.
    pub fn escalate(self) -> Option<Self> {
        if self >= Self::MAX {
            None
        } else {
            Some(Precision((self.0 * 2).min(Self::MAX.0)))
        }
    }

    pub fn bits(self) -> u32 {
        self.0
    }
}

impl Default for Precision {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// Outcome of a certified comparison between two enclosures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Certified {
    Less,
    Equal,
    Greater,
    Unknown,
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    lo: Rational,
    hi: Rational,
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_point() {
            write!(f, "[{}]", format_rational(&self.lo))
        } else {
            write!(f, "[{:.17e}, {:.17e}]", to_f64(&self.lo), to_f64(&self.hi))
        }
    }
}

fn pow2(bits: u32) -> BigInt {
    BigInt::one() << bits as usize
}

fn fits(r: &Rational, bits: u32) -> bool {
    r.denom().bits() <= bits as u64 && r.numer().bits() <= bits as u64 + 256
}

/// Largest grid point `<= r` (or `r` itself when it is already compact).
pub fn round_down(r: &Rational, bits: u32) -> Rational {
    if fits(r, bits) {
        return r.clone();
    }
    let scale = pow2(bits);
    let scaled = r * Rational::from_integer(scale.clone());
    Rational::new(scaled.floor().to_integer(), scale)
}

/// Smallest grid point `>= r`.
pub fn round_up(r: &Rational, bits: u32) -> Rational {
    if fits(r, bits) {
        return r.clone();
    }
    let scale = pow2(bits);
    let scaled = r * Rational::from_integer(scale.clone());
    Rational::new(scaled.ceil().to_integer(), scale)
}

fn rational_sqrt_exact(r: &Rational) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer().sqrt();
    let d = r.denom().sqrt();
    if &n * &n == *r.numer() && &d * &d == *r.denom() {
        Some(Rational::new(n, d))
    } else {
        None
    }
}

/// Certified lower and upper bounds for `sqrt(r)`, `r >= 0`.
fn rational_sqrt_bounds(r: &Rational, bits: u32) -> (Rational, Rational) {
    if let Some(exact) = rational_sqrt_exact(r) {
        return (exact.clone(), exact);
    }
    // sqrt(p/q) = sqrt(p*q)/q ; scale by 2^bits for resolution
    let scale = pow2(bits);
    let radicand = r.numer() * r.denom() * &scale * &scale;
    let root = radicand.sqrt();
    let den = r.denom() * &scale;
    let lo = Rational::new(root.clone(), den.clone());
    let hi = Rational::new(root + 1, den);
    (round_down(&lo, bits), round_up(&hi, bits))
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        assert!(lo <= hi, "interval endpoints out of order");
        Interval { lo, hi }
    }

    pub fn point(r: Rational) -> Self {
        Interval { lo: r.clone(), hi: r }
    }

    pub fn from_int(n: i64) -> Self {
        Self::point(Rational::from_integer(BigInt::from(n)))
    }

    pub fn zero() -> Self {
        Self::point(Rational::zero())
    }

    pub fn one() -> Self {
        Self::point(Rational::one())
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn width_f64(&self) -> f64 {
        to_f64(&self.width())
    }

    pub fn mid_f64(&self) -> f64 {
        (to_f64(&self.lo) + to_f64(&self.hi)) / 2.0
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    /// The exact value, when the enclosure is degenerate.
    pub fn exact(&self) -> Option<&Rational> {
        self.is_point().then_some(&self.lo)
    }

    pub fn contains(&self, r: &Rational) -> bool {
        &self.lo <= r && r <= &self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(&Rational::zero())
    }

    /// Re-rounds both endpoints outward onto the precision grid.
    pub fn rounded(&self, prec: Precision) -> Self {
        Interval {
            lo: round_down(&self.lo, prec.0),
            hi: round_up(&self.hi, prec.0),
        }
    }

    /// Hull of two enclosures.
    pub fn hull(&self, other: &Interval) -> Self {
        Interval {
            lo: self.lo.clone().min(other.lo.clone()),
            hi: self.hi.clone().max(other.hi.clone()),
        }
    }

    /// Enclosure of `max(a, b)` for `a` in self and `b` in other.
    pub fn max(&self, other: &Interval) -> Self {
        Interval {
            lo: self.lo.clone().max(other.lo.clone()),
            hi: self.hi.clone().max(other.hi.clone()),
        }
    }

    pub fn min(&self, other: &Interval) -> Self {
        Interval {
            lo: self.lo.clone().min(other.lo.clone()),
            hi: self.hi.clone().min(other.hi.clone()),
        }
    }

    pub fn square(&self) -> Self {
        let a = &self.lo * &self.lo;
        let b = &self.hi * &self.hi;
        if self.contains_zero() {
            Interval {
                lo: Rational::zero(),
                hi: a.max(b),
            }
        } else if a <= b {
            Interval { lo: a, hi: b }
        } else {
            Interval { lo: b, hi: a }
        }
    }

    pub fn scale(&self, k: &Rational) -> Self {
        let a = &self.lo * k;
        let b = &self.hi * k;
        if a <= b {
            Interval { lo: a, hi: b }
        } else {
            Interval { lo: b, hi: a }
        }
    }

    /// Exact quotient; `None` when the divisor may vanish.
    pub fn checked_div(&self, other: &Interval) -> Option<Self> {
        if other.contains_zero() {
            return None;
        }
        let inv = Interval {
            lo: other.hi.recip(),
            hi: other.lo.recip(),
        };
        Some(self * &inv)
    }

    /// Square root of the part of the enclosure that is nonnegative.
    ///
    /// The caller asserts that the enclosed true value is nonnegative; a
    /// lower endpoint below zero is clamped. Returns `None` when the whole
    /// enclosure is negative.
    pub fn sqrt(&self, prec: Precision) -> Option<Self> {
        if self.hi.is_negative() {
            return None;
        }
        let lo = if self.lo.is_negative() {
            Rational::zero()
        } else {
            rational_sqrt_bounds(&self.lo, prec.0).0
        };
        let hi = rational_sqrt_bounds(&self.hi, prec.0).1;
        Some(Interval { lo, hi })
    }

    pub fn compare(&self, other: &Interval) -> Certified {
        if self.hi < other.lo {
            Certified::Less
        } else if self.lo > other.hi {
            Certified::Greater
        } else if self.is_point() && other.is_point() {
            Certified::Equal
        } else {
            Certified::Unknown
        }
    }

    pub fn compare_rational(&self, r: &Rational) -> Certified {
        self.compare(&Interval::point(r.clone()))
    }

    pub fn certainly_lt(&self, other: &Interval) -> bool {
        self.hi < other.lo
    }

    pub fn certainly_le(&self, other: &Interval) -> bool {
        self.hi <= other.lo
    }

    pub fn certainly_gt(&self, other: &Interval) -> bool {
        other.certainly_lt(self)
    }

    pub fn certainly_ge(&self, other: &Interval) -> bool {
        other.certainly_le(self)
    }
}

impl Add for &Interval {
    type Output = Interval;
    fn add(self, rhs: &Interval) -> Interval {
        Interval {
            lo: &self.lo + &rhs.lo,
            hi: &self.hi + &rhs.hi,
        }
    }
}

impl Sub for &Interval {
    type Output = Interval;
    fn sub(self, rhs: &Interval) -> Interval {
        Interval {
            lo: &self.lo - &rhs.hi,
            hi: &self.hi - &rhs.lo,
        }
    }
}

impl Neg for &Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval {
            lo: -&self.hi,
            hi: -&self.lo,
        }
    }
}

impl Mul for &Interval {
    type Output = Interval;
    fn mul(self, rhs: &Interval) -> Interval {
        if self.is_point() && self.lo.is_zero() || rhs.is_point() && rhs.lo.is_zero() {
            return Interval::zero();
        }
        let products = [
            &self.lo * &rhs.lo,
            &self.lo * &rhs.hi,
            &self.hi * &rhs.lo,
            &self.hi * &rhs.hi,
        ];
        let mut lo = products[0].clone();
        let mut hi = products[0].clone();
        for p in &products[1..] {
            if p < &lo {
                lo = p.clone();
            }
            if p > &hi {
                hi = p.clone();
            }
        }
        Interval { lo, hi }
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
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// Bounds on `atan(1/x)` from the alternating Gregory series.
fn atan_inv_bounds(x: u64, bits: u32) -> (Rational, Rational) {
    let x = BigInt::from(x);
    let x2 = &x * &x;
    let tol = Rational::new(BigInt::one(), pow2(bits + 8));
    let mut sum = Rational::zero();
    let mut power = x.clone(); // x^(2k+1)
    let mut k: u64 = 0;
    loop {
        let term = Rational::new(BigInt::one(), &power * BigInt::from(2 * k + 1));
        let next = Rational::new(BigInt::one(), &power * &x2 * BigInt::from(2 * k + 3));
        if k.is_multiple_of(2) {
            sum += &term;
        } else {
            sum -= &term;
        }
        if next < tol {
            // truncation after an even-index term overshoots, after odd undershoots
            return if k.is_multiple_of(2) {
                (&sum - &next, sum)
            } else {
                (sum.clone(), &sum + &next)
            };
        }
        power *= &x2;
        k += 1;
    }
}

/// Enclosure of pi by Machin's formula.
pub fn pi(prec: Precision) -> Interval {
    let bits = prec.0 + 8;
    let (a5_lo, a5_hi) = atan_inv_bounds(5, bits);
    let (a239_lo, a239_hi) = atan_inv_bounds(239, bits);
    let sixteen = Rational::from_integer(BigInt::from(16));
    let four = Rational::from_integer(BigInt::from(4));
    let lo = &sixteen * a5_lo - &four * a239_hi;
    let hi = &sixteen * a5_hi - &four * a239_lo;
    Interval::new(lo, hi).rounded(prec)
}

/// Bounds for cos at a rational point `0 <= theta < 2` by the Taylor series.
fn cos_point_bounds(theta: &Rational, bits: u32) -> (Rational, Rational) {
    let tol = Rational::new(BigInt::one(), pow2(bits + 8));
    let theta2 = theta * theta;
    let mut term = Rational::one();
    let mut sum = Rational::zero();
    let mut k: u64 = 0;
    loop {
        sum += &term;
        let next = -(&term * &theta2) / Rational::from_integer(BigInt::from((2 * k + 1) * (2 * k + 2)));
        if next.abs() < tol && k >= 1 {
            let err = next.abs();
            return (&sum - &err, &sum + &err);
        }
        term = next;
        k += 1;
    }
}

/// Enclosure of `cos(pi * r)` for rational `r`.
pub fn cos_pi(r: &Rational, prec: Precision) -> Interval {
    let two = Rational::from_integer(BigInt::from(2));
    let mut r = r - &two * (r / &two).floor();
    if r > Rational::one() {
        r = &two - r;
    }
    let mut negate = false;
    if r > rat(1, 2) {
        r = Rational::one() - r;
        negate = true;
    }
    let exact = if r.is_zero() {
        Some(Rational::one())
    } else if r == rat(1, 3) {
        Some(rat(1, 2))
    } else if r == rat(1, 2) {
        Some(Rational::zero())
    } else {
        None
    };
    let enclosure = match exact {
        Some(v) => Interval::point(v),
        None => {
            let pi = pi(Precision(prec.0 + 8));
            let theta_lo = pi.lo() * &r;
            let theta_hi = pi.hi() * &r;
            let bits = prec.0 + 8;
            let (lo, _) = cos_point_bounds(&round_up(&theta_hi, bits + 8), bits);
            let (_, hi) = cos_point_bounds(&round_down(&theta_lo, bits + 8), bits);
            Interval::new(lo, hi).rounded(prec)
        }
    };
    if negate {
        -&enclosure
    } else {
        enclosure
    }
}

/// Enclosure of `sin(pi * r)`.
pub fn sin_pi(r: &Rational, prec: Precision) -> Interval {
    cos_pi(&(rat(1, 2) - r), prec)
}

impl PartialOrd for Certified {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        use Certified::*;
        let rank = |c: &Certified| match c {
            Less => Some(0),
            Equal => Some(1),
            Greater => Some(2),
            Unknown => None,
        };
        match (rank(self), rank(other)) {
            (Some(a), Some(b)) => a.partial_cmp(&b),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    #[test]
    fn pi_enclosure_is_tight_and_correct() {
        let p = pi(Precision(128));
        assert!(p.width_f64() < 1e-35);
        assert!(!p.contains(&rat(314159265358979323, 100000000000000000)));
        assert!((p.mid_f64() - std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn cosine_special_values_are_exact() {
        let prec = Precision::DEFAULT;
        assert_eq!(cos_pi(&rat(1, 3), prec).exact(), Some(&rat(1, 2)));
        assert_eq!(cos_pi(&rat(2, 3), prec).exact(), Some(&rat(-1, 2)));
        assert_eq!(cos_pi(&rat(1, 2), prec).exact(), Some(&int(0)));
        assert_eq!(cos_pi(&int(1), prec).exact(), Some(&int(-1)));
        assert_eq!(cos_pi(&int(2), prec).exact(), Some(&int(1)));
        assert_eq!(cos_pi(&rat(4, 3), prec).exact(), Some(&rat(-1, 2)));
    }

    #[test]
    fn cosine_enclosures_contain_float_values() {
        let prec = Precision(80);
        for (num, den) in [(1, 4), (1, 5), (2, 5), (1, 7), (3, 7), (11, 6), (-1, 9)] {
            let r = rat(num, den);
            let c = cos_pi(&r, prec);
            let expected = (std::f64::consts::PI * num as f64 / den as f64).cos();
            assert!((c.mid_f64() - expected).abs() < 1e-14, "{num}/{den}");
            assert!(c.width_f64() < 1e-20);
            let s = sin_pi(&r, prec);
            let expected = (std::f64::consts::PI * num as f64 / den as f64).sin();
            assert!((s.mid_f64() - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn sqrt_is_exact_on_squares_and_tight_otherwise() {
        let prec = Precision(64);
        let nine_quarters = Interval::point(rat(9, 4));
        assert_eq!(nine_quarters.sqrt(prec).unwrap().exact(), Some(&rat(3, 2)));
        let two = Interval::from_int(2).sqrt(prec).unwrap();
        assert!(!two.contains(&rat(14142135623, 10000000000)));
        assert!(two.square().contains(&int(2)));
        assert!(two.width_f64() < 1e-18);
        assert!(Interval::from_int(-1).sqrt(prec).is_none());
    }

    #[test]
    fn multiplication_handles_signs() {
        let a = Interval::new(int(-2), int(3));
        let b = Interval::new(int(-1), int(4));
        let p = &a * &b;
        assert_eq!(p.lo(), &int(-8));
        assert_eq!(p.hi(), &int(12));
        assert_eq!(a.square().lo(), &int(0));
        assert!(a.checked_div(&b).is_none());
    }

    #[test]
    fn comparisons_are_certified() {
        let a = Interval::new(int(0), int(1));
        let b = Interval::new(int(2), int(3));
        assert_eq!(a.compare(&b), Certified::Less);
        assert_eq!(b.compare(&a), Certified::Greater);
        assert_eq!(a.compare(&Interval::new(rat(1, 2), int(2))), Certified::Unknown);
        assert_eq!(Interval::one().compare(&Interval::one()), Certified::Equal);
    }

    #[test]
    fn precision_ladder_terminates() {
        let mut p = Precision(64);
        let mut steps = 0;
        while let Some(next) = p.escalate() {
            p = next;
            steps += 1;
        }
        assert_eq!(p, Precision::MAX);
        assert!(steps < 10);
    }
}
