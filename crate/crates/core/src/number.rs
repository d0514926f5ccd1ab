//! Exact dyadic rationals and the scalar abstraction shared by exact and
//! floating-point signals.
//!
//! Every weight that appears in the Walsh model on a `2^L` grid is a power of
//! two (cell measures, interval lengths, `L^∞`-normalised packet products), so
//! a rational with a power-of-two denominator is closed under everything the
//! library needs: sums, differences, products and rescaling by `2^e`.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
enum Mantissa {
    Small(i128),
    Big(BigInt),
}

/// An exact rational number `mantissa · 2^exponent`.
///
/// The representation is canonical: the mantissa is odd (or the value is
/// zero with exponent zero), and it is stored inline whenever it fits in an
/// `i128`. Equality and hashing rely on that.
#[derive(Clone, Debug)]
pub struct Dyadic {
    mant: Mantissa,
    exp: i32,
}

impl Dyadic {
    pub const fn zero() -> Self {
        Dyadic {
            mant: Mantissa::Small(0),
            exp: 0,
        }
    }

    pub fn from_int(v: i64) -> Self {
        Self::from_small(v as i128, 0)
    }

    /// `2^e`.
    pub fn pow2(e: i32) -> Self {
        Dyadic {
            mant: Mantissa::Small(1),
            exp: e,
        }
    }

    /// `mantissa · 2^exp`, normalised.
    pub fn from_small(mant: i128, exp: i32) -> Self {
        if mant == 0 {
            return Self::zero();
        }
        let tz = mant.trailing_zeros();
        Dyadic {
            mant: Mantissa::Small(mant >> tz),
            exp: exp + tz as i32,
        }
    }

    pub fn from_big(mant: BigInt, exp: i32) -> Self {
        if mant.is_zero() {
            return Self::zero();
        }
        let tz = mant.trailing_zeros().unwrap_or(0);
        let mant = if tz > 0 { mant >> tz } else { mant };
        let exp = exp + tz as i32;
        match mant.to_i128() {
            Some(m) => Dyadic {
                mant: Mantissa::Small(m),
                exp,
            },
            None => Dyadic {
                mant: Mantissa::Big(mant),
                exp,
            },
        }
    }

    /// Converts a finite `f64` exactly (every finite double is dyadic).
    pub fn from_f64(v: f64) -> Option<Self> {
        if !v.is_finite() {
            return None;
        }
        if v == 0.0 {
            return Some(Self::zero());
        }
        let bits = v.to_bits();
        let sign = if bits >> 63 == 0 { 1i128 } else { -1 };
        let raw_exp = ((bits >> 52) & 0x7ff) as i32;
        let frac = (bits & ((1u64 << 52) - 1)) as i128;
        let (mant, exp) = if raw_exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1i128 << 52), raw_exp - 1075)
        };
        Some(Self::from_small(sign * mant, exp))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.mant, Mantissa::Small(0))
    }

    pub fn signum(&self) -> i32 {
        match &self.mant {
            Mantissa::Small(m) => m.signum() as i32,
            Mantissa::Big(m) => {
                if m.is_negative() {
                    -1
                } else {
                    1
                }
            }
        }
    }

    pub fn is_negative(&self) -> bool {
        self.signum() < 0
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    /// Multiplies by `2^e` exactly.
    pub fn mul_pow2(&self, e: i32) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        Dyadic {
            mant: self.mant.clone(),
            exp: self.exp + e,
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Dyadic::from_int(1);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Numerator and base-two exponent of the denominator, i.e. the value is
    /// `num / 2^den_exp` with `den_exp ≥ 0`.
    pub fn to_fraction(&self) -> (BigInt, u32) {
        let m = self.mantissa_big();
        if self.exp >= 0 {
            (m << self.exp as usize, 0)
        } else {
            (m, (-self.exp) as u32)
        }
    }

    pub fn exponent(&self) -> i32 {
        self.exp
    }

    fn mantissa_big(&self) -> BigInt {
        match &self.mant {
            Mantissa::Small(m) => BigInt::from(*m),
            Mantissa::Big(m) => m.clone(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match &self.mant {
            Mantissa::Small(m) => ldexp(*m as f64, self.exp),
            Mantissa::Big(m) => {
                // keep the top 64 significant bits so the conversion cannot overflow
                let bits = m.bits() as i64;
                let drop = (bits - 64).max(0);
                let top = (m >> drop as usize).to_f64().unwrap_or(f64::NAN);
                ldexp(top, self.exp + drop as i32)
            }
        }
    }

    fn add_impl(a: &Dyadic, b: &Dyadic) -> Dyadic {
        if a.is_zero() {
            return b.clone();
        }
        if b.is_zero() {
            return a.clone();
        }
        let e = a.exp.min(b.exp);
        let (sa, sb) = ((a.exp - e) as u32, (b.exp - e) as u32);
        if let (Mantissa::Small(x), Mantissa::Small(y)) = (&a.mant, &b.mant) {
            if let (Some(xs), Some(ys)) = (shl_checked(*x, sa), shl_checked(*y, sb)) {
                if let Some(s) = xs.checked_add(ys) {
                    return Dyadic::from_small(s, e);
                }
            }
        }
        let xs = a.mantissa_big() << sa as usize;
        let ys = b.mantissa_big() << sb as usize;
        Dyadic::from_big(xs + ys, e)
    }

    fn mul_impl(a: &Dyadic, b: &Dyadic) -> Dyadic {
        if a.is_zero() || b.is_zero() {
            return Dyadic::zero();
        }
        let exp = a.exp + b.exp;
        if let (Mantissa::Small(x), Mantissa::Small(y)) = (&a.mant, &b.mant) {
            if let Some(p) = x.checked_mul(*y) {
                return Dyadic {
                    mant: Mantissa::Small(p),
                    exp,
                };
            }
        }
        Dyadic::from_big(a.mantissa_big() * b.mantissa_big(), exp)
    }

    fn neg_impl(&self) -> Dyadic {
        match &self.mant {
            Mantissa::Small(m) => Dyadic {
                mant: Mantissa::Small(-m),
                exp: self.exp,
            },
            Mantissa::Big(m) => Dyadic::from_big(-m.clone(), self.exp),
        }
    }
}

fn shl_checked(x: i128, s: u32) -> Option<i128> {
    if s == 0 {
        return Some(x);
    }
    if s >= 127 {
        return None;
    }
    let y = x << s;
    if (y >> s) == x {
        Some(y)
    } else {
        None
    }
}

/// `x · 2^e`, scaling in steps so intermediate powers stay finite.
pub(crate) fn ldexp(mut x: f64, mut e: i32) -> f64 {
    while e > 1000 {
        x *= pow2_f64(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= pow2_f64(-1000);
        e += 1000;
    }
    x * pow2_f64(e)
}

pub(crate) fn pow2_f64(e: i32) -> f64 {
    if (-1022..=1023).contains(&e) {
        f64::from_bits(((e + 1023) as u64) << 52)
    } else {
        2f64.powi(e)
    }
}

impl PartialEq for Dyadic {
    fn eq(&self, other: &Self) -> bool {
        if self.exp != other.exp {
            return false;
        }
        match (&self.mant, &other.mant) {
            (Mantissa::Small(a), Mantissa::Small(b)) => a == b,
            (Mantissa::Big(a), Mantissa::Big(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Dyadic {}

impl Hash for Dyadic {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.exp.hash(state);
        match &self.mant {
            Mantissa::Small(m) => {
                0u8.hash(state);
                m.hash(state)
            }
            Mantissa::Big(m) => {
                1u8.hash(state);
                m.hash(state)
            }
        }
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        (self - other).signum().cmp(&0)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<'a> Add<&'a Dyadic> for &'a Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &'a Dyadic) -> Dyadic {
        Dyadic::add_impl(self, rhs)
    }
}

impl<'a> Sub<&'a Dyadic> for &'a Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: &'a Dyadic) -> Dyadic {
        Dyadic::add_impl(self, &rhs.neg_impl())
    }
}

impl<'a> Mul<&'a Dyadic> for &'a Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: &'a Dyadic) -> Dyadic {
        Dyadic::mul_impl(self, rhs)
    }
}

impl Add for Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: Dyadic) -> Dyadic {
        Dyadic::add_impl(&self, &rhs)
    }
}

impl Sub for Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: Dyadic) -> Dyadic {
        &self - &rhs
    }
}

impl Mul for Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: Dyadic) -> Dyadic {
        Dyadic::mul_impl(&self, &rhs)
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        self.neg_impl()
    }
}

impl AddAssign for Dyadic {
    fn add_assign(&mut self, rhs: Dyadic) {
        *self = Dyadic::add_impl(self, &rhs);
    }
}

impl SubAssign for Dyadic {
    fn sub_assign(&mut self, rhs: Dyadic) {
        *self = &*self - &rhs;
    }
}

impl Sum for Dyadic {
    fn sum<I: Iterator<Item = Dyadic>>(iter: I) -> Dyadic {
        iter.fold(Dyadic::zero(), |a, b| a + b)
    }
}

impl Zero for Dyadic {
    fn zero() -> Self {
        Dyadic::zero()
    }
    fn is_zero(&self) -> bool {
        Dyadic::is_zero(self)
    }
}

impl One for Dyadic {
    fn one() -> Self {
        Dyadic::from_int(1)
    }
}

impl From<i64> for Dyadic {
    fn from(v: i64) -> Self {
        Dyadic::from_int(v)
    }
}

impl fmt::Display for Dyadic {
    /// Integers print as `n`, everything else as `num/den`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (num, den_exp) = self.to_fraction();
        if den_exp == 0 {
            write!(f, "{num}")
        } else {
            write!(f, "{}/{}", num, BigInt::one() << den_exp as usize)
        }
    }
}

impl FromStr for Dyadic {
    type Err = Error;

    /// Accepts `n`, `num/den` with a power-of-two `den`, and decimal strings
    /// whose value is dyadic (e.g. `0.375`).
    fn from_str(s: &str) -> Result<Self> {
        parse_rational(s)?
            .and_then(|(n, d)| dyadic_from_fraction(n, d))
            .ok_or_else(|| Error::Parse(format!("`{s}` is not a dyadic rational")))
    }
}

/// Parses `n`, `num/den`, or a plain decimal into a reduced fraction.
/// Returns `Ok(None)` for syntactically valid floats with exponents or
/// non-finite values that have no exact fraction form.
pub(crate) fn parse_rational(s: &str) -> Result<Option<(BigInt, BigInt)>> {
    let t = s.trim();
    let bad = || Error::Parse(format!("malformed number `{s}`"));
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in `{s}`")));
        }
        return Ok(Some(reduce(n, d)));
    }
    if t.contains(['e', 'E']) || t.eq_ignore_ascii_case("nan") || t.contains("inf") {
        t.parse::<f64>().map_err(|_| bad())?;
        return Ok(None);
    }
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut n: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().map_err(|_| bad())?
    };
    if neg {
        n = -n;
    }
    let d = num_traits::pow(BigInt::from(10), frac_part.len());
    Ok(Some(reduce(n, d)))
}

fn reduce(n: BigInt, d: BigInt) -> (BigInt, BigInt) {
    let g = n.gcd(&d);
    let (mut n, mut d) = if g.is_zero() { (n, d) } else { (n / &g, d / &g) };
    if d.is_negative() {
        n = -n;
        d = -d;
    }
    (n, d)
}

fn dyadic_from_fraction(n: BigInt, d: BigInt) -> Option<Dyadic> {
    let tz = d.trailing_zeros()?;
    if (&d >> tz as usize) != BigInt::one() {
        return None;
    }
    Some(Dyadic::from_big(n, -(tz as i32)))
}

impl Serialize for Dyadic {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Dyadic {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Arithmetic shared by exact ([`Dyadic`]) and floating (`f64`) samples.
pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + 'static
{
    /// Whether arithmetic on this type is exact.
    const EXACT: bool;

    fn from_i64(v: i64) -> Self;

    /// `self · 2^e`.
    fn mul_pow2(&self, e: i32) -> Self;

    fn to_f64(&self) -> f64;

    fn abs_val(&self) -> Self;

    /// Lifts the value into a [`Num`], exact when the type is.
    fn to_num(&self) -> Num;

    /// Converts from an exact dyadic (lossy for `f64`).
    fn from_dyadic(d: &Dyadic) -> Self;
}

impl Scalar for Dyadic {
    const EXACT: bool = true;

    fn from_i64(v: i64) -> Self {
        Dyadic::from_int(v)
    }
    fn mul_pow2(&self, e: i32) -> Self {
        Dyadic::mul_pow2(self, e)
    }
    fn to_f64(&self) -> f64 {
        Dyadic::to_f64(self)
    }
    fn abs_val(&self) -> Self {
        self.abs()
    }
    fn to_num(&self) -> Num {
        Num::Exact(self.clone())
    }
    fn from_dyadic(d: &Dyadic) -> Self {
        d.clone()
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn mul_pow2(&self, e: i32) -> Self {
        self * pow2_f64(e)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn abs_val(&self) -> Self {
        self.abs()
    }
    fn to_num(&self) -> Num {
        Num::Float(*self)
    }
    fn from_dyadic(d: &Dyadic) -> Self {
        d.to_f64()
    }
}

/// A quantity that is exact when every input was exact and a float otherwise.
#[derive(Clone, Debug, PartialEq)]
pub enum Num {
    Exact(Dyadic),
    Float(f64),
}

impl Num {
    pub fn zero() -> Self {
        Num::Exact(Dyadic::zero())
    }

    pub fn pow2(e: i32) -> Self {
        Num::Exact(Dyadic::pow2(e))
    }

    /// `2^x` for a real exponent: exact when `x` is an integer.
    pub fn pow2_real(x: f64) -> Self {
        if x.fract() == 0.0 && x.abs() < 1.0e6 {
            Num::Exact(Dyadic::pow2(x as i32))
        } else {
            Num::Float(x.exp2())
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Num::Exact(_))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Num::Exact(d) => d.to_f64(),
            Num::Float(x) => *x,
        }
    }

    pub fn as_exact(&self) -> Option<&Dyadic> {
        match self {
            Num::Exact(d) => Some(d),
            Num::Float(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Num::Exact(d) => d.is_zero(),
            Num::Float(x) => *x == 0.0,
        }
    }

    /// Exact comparison when both sides are exact, otherwise IEEE total order.
    pub fn cmp_num(&self, other: &Num) -> Ordering {
        match (self, other) {
            (Num::Exact(a), Num::Exact(b)) => a.cmp(b),
            _ => self.to_f64().total_cmp(&other.to_f64()),
        }
    }

    pub fn le(&self, other: &Num) -> bool {
        self.cmp_num(other) != Ordering::Greater
    }

    pub fn gt(&self, other: &Num) -> bool {
        self.cmp_num(other) == Ordering::Greater
    }

    pub fn max(self, other: Num) -> Num {
        if other.gt(&self) {
            other
        } else {
            self
        }
    }

    /// Real `q`-th root as a float.
    pub fn root(&self, q: f64) -> f64 {
        let v = self.to_f64();
        if v <= 0.0 {
            0.0
        } else {
            v.powf(1.0 / q)
        }
    }
}

impl Add for Num {
    type Output = Num;
    fn add(self, rhs: Num) -> Num {
        match (self, rhs) {
            (Num::Exact(a), Num::Exact(b)) => Num::Exact(a + b),
            (a, b) => Num::Float(a.to_f64() + b.to_f64()),
        }
    }
}

impl Mul for Num {
    type Output = Num;
    fn mul(self, rhs: Num) -> Num {
        match (self, rhs) {
            (Num::Exact(a), Num::Exact(b)) => Num::Exact(a * b),
            (a, b) => Num::Float(a.to_f64() * b.to_f64()),
        }
    }
}

impl Sum for Num {
    fn sum<I: Iterator<Item = Num>>(iter: I) -> Num {
        iter.fold(Num::zero(), |a, b| a + b)
    }
}

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Num::Exact(d) => write!(f, "{d}"),
            Num::Float(x) => write!(f, "{x:?}"),
        }
    }
}

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn canonical_form() {
        let a = Dyadic::from_small(12, -4);
        assert_eq!(a, Dyadic::from_small(3, -2));
        assert_eq!(a.to_string(), "3/4");
        assert_eq!(Dyadic::from_int(-8).to_string(), "-8");
        assert_eq!(Dyadic::zero(), Dyadic::from_small(0, 17));
    }

    #[test]
    fn parse_forms() {
        assert_eq!("3/4".parse::<Dyadic>().unwrap(), Dyadic::from_small(3, -2));
        assert_eq!("0.375".parse::<Dyadic>().unwrap(), Dyadic::from_small(3, -3));
        assert_eq!("-6/8".parse::<Dyadic>().unwrap(), Dyadic::from_small(-3, -2));
        assert_eq!("17".parse::<Dyadic>().unwrap(), Dyadic::from_int(17));
        assert!("1/3".parse::<Dyadic>().is_err());
        assert!("0.1".parse::<Dyadic>().is_err());
        assert!("abc".parse::<Dyadic>().is_err());
        assert!("1/0".parse::<Dyadic>().is_err());
    }

    #[test]
    fn overflow_promotes_to_bigint() {
        let big = Dyadic::from_small(i128::MAX, 0);
        let sq = &big * &big;
        let back = Dyadic::from_big(BigInt::from(i128::MAX) * BigInt::from(i128::MAX), 0);
        assert_eq!(sq, back);
        let shifted = &Dyadic::from_small(1, 200) + &Dyadic::from_small(1, -200);
        let diff = &shifted - &Dyadic::from_small(1, 200);
        assert_eq!(diff, Dyadic::pow2(-200));
    }

    #[test]
    fn f64_round_trip() {
        for v in [0.0, 1.0, -0.1, 3.5e-300, 1.0e300, f64::MIN_POSITIVE / 8.0] {
            let d = Dyadic::from_f64(v).unwrap();
            assert_eq!(d.to_f64(), v);
        }
    }

    proptest! {
        #[test]
        fn ring_laws(a in -1_000_000i64..1_000_000, ea in -40i32..40,
                     b in -1_000_000i64..1_000_000, eb in -40i32..40,
                     c in -1000i64..1000) {
            let x = Dyadic::from_small(a as i128, ea);
            let y = Dyadic::from_small(b as i128, eb);
            let z = Dyadic::from_int(c);
            prop_assert_eq!(&(&x + &y) - &y, x.clone());
            prop_assert_eq!(&x * &(&y + &z), &(&x * &y) + &(&x * &z));
            prop_assert_eq!((&x + &y).to_f64(), x.to_f64() + y.to_f64());
            prop_assert_eq!(x.cmp(&y), x.to_f64().partial_cmp(&y.to_f64()).unwrap());
            let s = x.to_string();
            prop_assert_eq!(s.parse::<Dyadic>().unwrap(), x);
        }
    }
}
