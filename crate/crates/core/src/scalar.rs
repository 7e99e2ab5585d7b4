//! Scalar types shared by the polynomial, linear-algebra and SDP layers.
//!
//! [`BigScalar`] is a binary floating-point number with a per-value mantissa
//! precision (backed by MPFR). [`Rational`] is an exact GMP rational and
//! [`QuadraticSurd`] an exact element `a + b·√n` of a real quadratic field,
//! used where closed forms involve a square root.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Float, Integer};

pub use rug::Rational;

use crate::error::ScalarError;

/// Default working precision in mantissa bits.
pub const DEFAULT_PREC: u32 = 256;

/// Arithmetic needed by polynomials, matrices and certificates.
///
/// Every value knows how to build constants "like itself" so that generic code
/// never needs a global precision.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + Neg<Output = Self>
    + for<'a> Add<&'a Self, Output = Self>
    + for<'a> Sub<&'a Self, Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
    + for<'a> Div<&'a Self, Output = Self>
{
    /// True when arithmetic is exact (no rounding).
    const EXACT: bool;

    fn from_i64_like(&self, v: i64) -> Self;
    fn is_zero(&self) -> bool;
    fn abs(&self) -> Self;
    /// Whether `self` is structurally zero when compared with `scale`.
    fn is_negligible(&self, scale: &Self) -> bool;
    fn to_big(&self, prec: u32) -> BigScalar;
    /// Precision carried by the value, `None` for exact types.
    fn working_prec(&self) -> Option<u32>;
    /// Lossless textual form (decimal for floats, `p/q` for rationals).
    fn to_exact_string(&self) -> String;

    fn zero_like(&self) -> Self {
        self.from_i64_like(0)
    }

    fn one_like(&self) -> Self {
        self.from_i64_like(1)
    }

    fn to_f64(&self) -> f64 {
        self.to_big(64).to_f64()
    }

    fn is_negative(&self) -> bool {
        *self < self.zero_like()
    }

    /// Exact rational value when one exists (dyadic floats, rationals).
    fn to_rational(&self) -> Option<Rational>;
}

/// Arbitrary-precision binary float. Binary operations produce a result at
/// the larger of the two operand precisions.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct BigScalar(Float);

impl BigScalar {
    pub fn zero(prec: u32) -> Self {
        BigScalar(Float::new(prec))
    }

    pub fn one(prec: u32) -> Self {
        Self::from_i64(1, prec)
    }

    pub fn from_i64(v: i64, prec: u32) -> Self {
        BigScalar(Float::with_val(prec, v))
    }

    pub fn from_f64(v: f64, prec: u32) -> Self {
        BigScalar(Float::with_val(prec, v))
    }

    pub fn from_rational(q: &Rational, prec: u32) -> Self {
        BigScalar(Float::with_val(prec, q))
    }

    /// `num/den` rounded to `prec` bits.
    pub fn ratio(num: i64, den: i64, prec: u32) -> Self {
        Self::from_rational(&Rational::from((num, den)), prec)
    }

    /// `10^k` rounded to `prec` bits.
    pub fn pow10(k: i32, prec: u32) -> Self {
        let ten = Float::with_val(prec, 10);
        BigScalar(ten.pow(k))
    }

    /// Parses decimal (`"0.1"`, `"1e-20"`) or rational (`"1/16"`) text.
    pub fn parse(s: &str, prec: u32) -> Result<Self, ScalarError> {
        let t = s.trim();
        if let Some((n, d)) = t.split_once('/') {
            let q = parse_rational_parts(n, d)?;
            return Ok(Self::from_rational(&q, prec));
        }
        Float::parse(t)
            .map(|inc| BigScalar(Float::with_val(prec, inc)))
            .map_err(|e| ScalarError::Parse(format!("{t:?}: {e}")))
    }

    pub fn from_float(f: Float) -> Self {
        BigScalar(f)
    }

    pub fn as_float(&self) -> &Float {
        &self.0
    }

    pub fn prec(&self) -> u32 {
        self.0.prec()
    }

    /// Same value re-rounded to `prec` bits.
    pub fn with_prec(&self, prec: u32) -> Self {
        BigScalar(Float::with_val(prec, &self.0))
    }

    pub fn pi(prec: u32) -> Self {
        BigScalar(Float::with_val(prec, Constant::Pi))
    }

    /// Euler's number.
    pub fn e(prec: u32) -> Self {
        BigScalar(Float::with_val(prec, 1).exp())
    }

    pub fn sqrt(&self) -> Self {
        BigScalar(Float::with_val(self.prec(), self.0.sqrt_ref()))
    }

    pub fn ln(&self) -> Self {
        BigScalar(Float::with_val(self.prec(), self.0.ln_ref()))
    }

    pub fn log10(&self) -> Self {
        BigScalar(Float::with_val(self.prec(), self.0.log10_ref()))
    }

    pub fn exp(&self) -> Self {
        BigScalar(Float::with_val(self.prec(), self.0.exp_ref()))
    }

    pub fn sin(&self) -> Self {
        BigScalar(Float::with_val(self.prec(), self.0.sin_ref()))
    }

    pub fn cos(&self) -> Self {
        BigScalar(Float::with_val(self.prec(), self.0.cos_ref()))
    }

    pub fn atan(&self) -> Self {
        BigScalar(Float::with_val(self.prec(), self.0.atan_ref()))
    }

    pub fn powi(&self, n: i32) -> Self {
        BigScalar(Float::with_val(self.prec(), (&self.0).pow(n)))
    }

    pub fn recip(&self) -> Self {
        BigScalar(Float::with_val(self.prec(), self.0.recip_ref()))
    }

    pub fn mul_i64(&self, k: i64) -> Self {
        BigScalar(Float::with_val(self.prec(), &self.0 * k))
    }

    pub fn div_i64(&self, k: i64) -> Self {
        BigScalar(Float::with_val(self.prec(), &self.0 / k))
    }

    /// `2^k` at `prec` bits.
    pub fn pow2(k: i32, prec: u32) -> Self {
        let mut f = Float::with_val(prec, 1);
        f <<= k;
        BigScalar(f)
    }

    /// Relative rounding unit `2^(1-prec)`.
    pub fn ulp_rel(prec: u32) -> Self {
        Self::pow2(1 - prec as i32, prec)
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn is_finite(&self) -> bool {
        self.0.is_finite()
    }

    pub fn signum_i(&self) -> i32 {
        match self.0.partial_cmp(&0) {
            Some(Ordering::Less) => -1,
            Some(Ordering::Greater) => 1,
            _ => 0,
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    /// Scientific notation with `digits` significant digits.
    pub fn to_sci(&self, digits: usize) -> String {
        self.0.to_string_radix(10, Some(digits.max(1)))
    }

    /// Fixed-point notation with `frac` fractional digits, rounded half away
    /// from zero on the decimal value.
    pub fn to_fixed(&self, frac: usize) -> String {
        let scale = Integer::from(10).pow(frac as u32);
        let q = self.0.to_rational().unwrap_or_default() * &scale;
        let neg = q < 0;
        let q = q.abs();
        let (rem, mut int) = q.fract_floor(Integer::new());
        if rem * 2u32 >= 1u32 {
            int += 1;
        }
        let (whole, part) = int.div_rem(scale);
        let part = format!("{:0>width$}", part.to_string(), width = frac);
        let sign = if neg && (whole != 0 || part.chars().any(|c| c != '0')) {
            "-"
        } else {
            ""
        };
        if frac == 0 {
            format!("{sign}{whole}")
        } else {
            format!("{sign}{whole}.{part}")
        }
    }

    pub fn to_rational_exact(&self) -> Option<Rational> {
        self.0.to_rational()
    }
}

fn parse_rational_parts(n: &str, d: &str) -> Result<Rational, ScalarError> {
    let n: Integer = n
        .trim()
        .parse()
        .map_err(|e| ScalarError::Parse(format!("numerator {n:?}: {e}")))?;
    let d: Integer = d
        .trim()
        .parse()
        .map_err(|e| ScalarError::Parse(format!("denominator {d:?}: {e}")))?;
    if d == 0 {
        return Err(ScalarError::Parse("zero denominator".into()));
    }
    Ok(Rational::from((n, d)))
}

/// Parses `"p/q"` or an integer into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational, ScalarError> {
    let t = s.trim();
    match t.split_once('/') {
        Some((n, d)) => parse_rational_parts(n, d),
        None => parse_rational_parts(t, "1"),
    }
}

/// Simplest rational within `tol` of `x` (Stern–Brocot descent on the
/// continued fraction).
pub fn simplest_rational_within(x: &Rational, tol: &Rational) -> Rational {
    let lo = Rational::from(x - tol);
    let hi = Rational::from(x + tol);
    if lo <= 0 && hi >= 0 {
        return Rational::new();
    }
    if hi < 0 {
        let lo_neg = Rational::from(-&hi);
        let hi_neg = Rational::from(-&lo);
        return -simplest_in(&lo_neg, &hi_neg);
    }
    simplest_in(&lo, &hi)
}

// Simplest rational in the closed interval [lo, hi], 0 < lo <= hi.
fn simplest_in(lo: &Rational, hi: &Rational) -> Rational {
    let fl = lo.clone().floor();
    let fl_int = fl.numer().clone();
    if Rational::from(&fl_int) == *lo {
        return lo.clone();
    }
    let next = Rational::from(&fl_int + 1u32);
    if next <= *hi {
        return next;
    }
    // lo and hi share the integer part; recurse on reciprocals of the fractions.
    let flo = Rational::from(lo - &fl);
    let fhi = Rational::from(hi - &fl);
    let inner = simplest_in(&fhi.recip(), &flo.recip());
    Rational::from(&fl_int) + inner.recip()
}

fn max_prec(a: &BigScalar, b: &BigScalar) -> u32 {
    a.prec().max(b.prec())
}

macro_rules! impl_bin_op {
    ($Tr:ident, $m:ident, $ATr:ident, $am:ident) => {
        impl $Tr<&BigScalar> for &BigScalar {
            type Output = BigScalar;
            fn $m(self, rhs: &BigScalar) -> BigScalar {
                BigScalar(Float::with_val(max_prec(self, rhs), (&self.0).$m(&rhs.0)))
            }
        }
        impl $Tr<&BigScalar> for BigScalar {
            type Output = BigScalar;
            fn $m(mut self, rhs: &BigScalar) -> BigScalar {
                if self.prec() < rhs.prec() {
                    self.0.set_prec(rhs.prec());
                }
                self.0.$am(&rhs.0);
                self
            }
        }
        impl $Tr<BigScalar> for BigScalar {
            type Output = BigScalar;
            fn $m(self, rhs: BigScalar) -> BigScalar {
                self.$m(&rhs)
            }
        }
        impl $Tr<BigScalar> for &BigScalar {
            type Output = BigScalar;
            fn $m(self, rhs: BigScalar) -> BigScalar {
                self.$m(&rhs)
            }
        }
        impl $ATr<&BigScalar> for BigScalar {
            fn $am(&mut self, rhs: &BigScalar) {
                if self.prec() < rhs.prec() {
                    self.0.set_prec(rhs.prec());
                }
                self.0.$am(&rhs.0);
            }
        }
        impl $ATr<BigScalar> for BigScalar {
            fn $am(&mut self, rhs: BigScalar) {
                self.$am(&rhs);
            }
        }
    };
}

impl_bin_op!(Add, add, AddAssign, add_assign);
impl_bin_op!(Sub, sub, SubAssign, sub_assign);
impl_bin_op!(Mul, mul, MulAssign, mul_assign);
impl_bin_op!(Div, div, DivAssign, div_assign);

impl Neg for BigScalar {
    type Output = BigScalar;
    fn neg(self) -> BigScalar {
        BigScalar(-self.0)
    }
}

impl Neg for &BigScalar {
    type Output = BigScalar;
    fn neg(self) -> BigScalar {
        BigScalar(Float::with_val(self.prec(), -&self.0))
    }
}

impl fmt::Debug for BigScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}b]", self.to_sci(24), self.prec())
    }
}

impl fmt::Display for BigScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match f.precision() {
            Some(p) => f.write_str(&self.to_sci(p)),
            None => f.write_str(&self.to_sci(20)),
        }
    }
}

impl serde::Serialize for BigScalar {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&self.to_exact_string())
    }
}

impl Scalar for BigScalar {
    const EXACT: bool = false;

    fn from_i64_like(&self, v: i64) -> Self {
        BigScalar::from_i64(v, self.prec())
    }

    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    fn abs(&self) -> Self {
        BigScalar(Float::with_val(self.prec(), self.0.abs_ref()))
    }

    fn is_negligible(&self, scale: &Self) -> bool {
        if self.0.is_zero() {
            return true;
        }
        let prec = max_prec(self, scale);
        let thresh = Scalar::abs(scale) * BigScalar::pow2(16 - prec as i32, prec);
        Scalar::abs(self) < thresh
    }

    fn to_big(&self, prec: u32) -> BigScalar {
        self.with_prec(prec)
    }

    fn working_prec(&self) -> Option<u32> {
        Some(self.prec())
    }

    fn to_exact_string(&self) -> String {
        self.0.to_string_radix(10, None)
    }

    fn to_rational(&self) -> Option<Rational> {
        self.0.to_rational()
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_i64_like(&self, v: i64) -> Self {
        Rational::from(v)
    }

    fn is_zero(&self) -> bool {
        self.cmp0() == Ordering::Equal
    }

    fn abs(&self) -> Self {
        self.clone().abs()
    }

    fn is_negligible(&self, _scale: &Self) -> bool {
        Scalar::is_zero(self)
    }

    fn to_big(&self, prec: u32) -> BigScalar {
        BigScalar::from_rational(self, prec)
    }

    fn working_prec(&self) -> Option<u32> {
        None
    }

    fn to_exact_string(&self) -> String {
        if *self.denom() == 1 {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }

    fn to_rational(&self) -> Option<Rational> {
        Some(self.clone())
    }
}

/// Exact element `a + b·√n` of the real quadratic field Q(√n).
///
/// Operands of a binary operation must share the radicand; a value with
/// `b = 0` is compatible with any radicand.
#[derive(Clone, PartialEq, Eq)]
pub struct QuadraticSurd {
    a: Rational,
    b: Rational,
    radicand: u32,
}

impl QuadraticSurd {
    /// `a + b·√radicand`; `radicand` must not be a perfect square.
    pub fn new(a: Rational, b: Rational, radicand: u32) -> Self {
        let r = Integer::from(radicand);
        assert!(
            !r.is_perfect_square(),
            "radicand {radicand} is a perfect square"
        );
        QuadraticSurd { a, b, radicand }
    }

    pub fn rational(a: Rational, radicand: u32) -> Self {
        Self::new(a, Rational::new(), radicand)
    }

    /// `√radicand` itself.
    pub fn root(radicand: u32) -> Self {
        Self::new(Rational::new(), Rational::from(1), radicand)
    }

    pub fn rational_part(&self) -> &Rational {
        &self.a
    }

    pub fn surd_part(&self) -> &Rational {
        &self.b
    }

    pub fn radicand(&self) -> u32 {
        self.radicand
    }

    fn join(&self, other: &Self) -> u32 {
        if self.b.cmp0() == Ordering::Equal {
            return other.radicand;
        }
        if other.b.cmp0() == Ordering::Equal {
            return self.radicand;
        }
        assert_eq!(
            self.radicand, other.radicand,
            "mixing different quadratic fields"
        );
        self.radicand
    }

    /// Sign of `a + b√n` without rounding.
    pub fn sign(&self) -> Ordering {
        let sa = self.a.cmp0();
        let sb = self.b.cmp0();
        if sb == Ordering::Equal {
            return sa;
        }
        if sa == Ordering::Equal || sa == sb {
            return sb;
        }
        // Opposite signs: compare a^2 with b^2 n.
        let a2 = Rational::from(self.a.square_ref());
        let b2n = Rational::from(self.b.square_ref()) * self.radicand;
        match a2.cmp(&b2n) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => Ordering::Equal,
        }
    }

    fn conj_norm(&self) -> Rational {
        Rational::from(self.a.square_ref())
            - Rational::from(self.b.square_ref()) * self.radicand
    }
}

impl fmt::Debug for QuadraticSurd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_exact_string())
    }
}

impl PartialOrd for QuadraticSurd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some((self.clone() - other).sign())
    }
}

impl Neg for QuadraticSurd {
    type Output = QuadraticSurd;
    fn neg(self) -> Self {
        QuadraticSurd {
            a: -self.a,
            b: -self.b,
            radicand: self.radicand,
        }
    }
}

impl Add<&QuadraticSurd> for QuadraticSurd {
    type Output = QuadraticSurd;
    fn add(self, rhs: &QuadraticSurd) -> Self {
        let radicand = self.join(rhs);
        QuadraticSurd {
            a: self.a + &rhs.a,
            b: self.b + &rhs.b,
            radicand,
        }
    }
}

impl Sub<&QuadraticSurd> for QuadraticSurd {
    type Output = QuadraticSurd;
    fn sub(self, rhs: &QuadraticSurd) -> Self {
        let radicand = self.join(rhs);
        QuadraticSurd {
            a: self.a - &rhs.a,
            b: self.b - &rhs.b,
            radicand,
        }
    }
}

impl Mul<&QuadraticSurd> for QuadraticSurd {
    type Output = QuadraticSurd;
    fn mul(self, rhs: &QuadraticSurd) -> Self {
        let radicand = self.join(rhs);
        let a = Rational::from(&self.a * &rhs.a)
            + Rational::from(&self.b * &rhs.b) * radicand;
        let b = Rational::from(&self.a * &rhs.b) + Rational::from(&self.b * &rhs.a);
        QuadraticSurd { a, b, radicand }
    }
}

impl Div<&QuadraticSurd> for QuadraticSurd {
    type Output = QuadraticSurd;
    fn div(self, rhs: &QuadraticSurd) -> Self {
        let radicand = self.join(rhs);
        let norm = rhs.conj_norm();
        assert!(norm.cmp0() != Ordering::Equal, "division by zero surd");
        let conj = QuadraticSurd {
            a: rhs.a.clone(),
            b: -rhs.b.clone(),
            radicand,
        };
        let num = QuadraticSurd { radicand, ..self } * &conj;
        QuadraticSurd {
            a: num.a / &norm,
            b: num.b / &norm,
            radicand,
        }
    }
}

impl Scalar for QuadraticSurd {
    const EXACT: bool = true;

    fn from_i64_like(&self, v: i64) -> Self {
        QuadraticSurd::rational(Rational::from(v), self.radicand)
    }

    fn is_zero(&self) -> bool {
        self.a.cmp0() == Ordering::Equal && self.b.cmp0() == Ordering::Equal
    }

    fn abs(&self) -> Self {
        if self.sign() == Ordering::Less {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn is_negligible(&self, _scale: &Self) -> bool {
        Scalar::is_zero(self)
    }

    fn to_big(&self, prec: u32) -> BigScalar {
        // Guard digits so that cancellation between the parts stays accurate.
        let p = prec + 64;
        let root = BigScalar::from_i64(self.radicand as i64, p).sqrt();
        let v = BigScalar::from_rational(&self.a, p) + BigScalar::from_rational(&self.b, p) * &root;
        v.with_prec(prec)
    }

    fn working_prec(&self) -> Option<u32> {
        None
    }

    fn to_exact_string(&self) -> String {
        format!(
            "{} + {}*sqrt({})",
            self.a.to_exact_string(),
            self.b.to_exact_string(),
            self.radicand
        )
    }

    fn to_rational(&self) -> Option<Rational> {
        if self.b.cmp0() == Ordering::Equal {
            Some(self.a.clone())
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precision_is_max_of_operands() {
        let a = BigScalar::from_i64(1, 64);
        let b = BigScalar::from_i64(3, 256);
        assert_eq!((&a / &b).prec(), 256);
        assert_eq!((a.clone() + &b).prec(), 256);
        assert_eq!((b.clone() * &a).prec(), 256);
    }

    #[test]
    fn sqrt3_to_many_digits() {
        let s = BigScalar::from_i64(3, 256).sqrt();
        let err = (&s * &s - BigScalar::from_i64(3, 256)).abs();
        assert!(err < BigScalar::pow2(-250, 256));
    }

    #[test]
    fn fixed_formatting_rounds() {
        let x = BigScalar::parse("-0.0149724", 256).unwrap();
        assert_eq!(x.to_fixed(6), "-0.014972");
        let y = BigScalar::parse("-0.99999951", 256).unwrap();
        assert_eq!(y.to_fixed(6), "-1.000000");
        assert_eq!(BigScalar::parse("-1e-30", 256).unwrap().to_fixed(6), "0.000000");
        assert_eq!(BigScalar::from_i64(-1, 64).to_fixed(0), "-1");
    }

    #[test]
    fn parse_rational_text() {
        let x = BigScalar::parse("1/16", 128).unwrap();
        assert_eq!(x, BigScalar::pow2(-4, 128));
        assert!(BigScalar::parse("1/0", 64).is_err());
        assert!(BigScalar::parse("abc", 64).is_err());
    }

    #[test]
    fn simplest_rational_recovers_decimal() {
        let x = BigScalar::parse("0.1", 256).unwrap().to_rational_exact().unwrap();
        let tol = Rational::from((1, 1u64 << 60));
        assert_eq!(simplest_rational_within(&x, &tol), Rational::from((1, 10)));
        let y = Rational::from((-22, 7));
        assert_eq!(simplest_rational_within(&y, &Rational::from((1, 1000))), y);
    }

    #[test]
    fn surd_sign_and_order() {
        let s3 = QuadraticSurd::root(3);
        let half = QuadraticSurd::rational(Rational::from((1, 2)), 3);
        // 1 - sqrt(3)/2 > 0
        let one = half.one_like();
        let eps2 = one.clone() - &(s3.clone() * &half);
        assert_eq!(eps2.sign(), Ordering::Greater);
        // sqrt(3)^2 == 3 exactly
        assert_eq!(s3.clone() * &s3, s3.from_i64_like(3));
        // (1 - sqrt3 x)^2 discriminant style identity: 4(1-e)^2 = 3 at e = 1 - sqrt3/2
        let z = one.clone() - &eps2;
        let four = one.from_i64_like(4);
        assert_eq!(four * &z * &z, one.from_i64_like(3));
        let inv = one.clone() / &s3;
        assert_eq!(inv * &s3, one);
    }

    #[test]
    fn surd_to_big_matches_float() {
        let x = QuadraticSurd::new(Rational::from(1), Rational::from((-1, 2)), 3);
        let f = BigScalar::from_i64(1, 256) - BigScalar::from_i64(3, 256).sqrt().div_i64(2);
        let diff = (x.to_big(256) - f).abs();
        assert!(diff < BigScalar::pow2(-250, 256));
    }
}
