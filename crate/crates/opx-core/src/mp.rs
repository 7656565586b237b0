//! Multiprecision reals.
//!
//! [`Mp`] wraps an `astro_float::BigFloat` and carries its own precision.
//! Binary operations round to the larger of the two operand precisions, so a
//! computation seeded with 256-bit values stays at 256 bits without a global
//! context.

use alloc::format;
use alloc::string::String;
use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};

const RM: RoundingMode = RoundingMode::ToEven;

/// Default working precision in bits.
pub const DEFAULT_BITS: usize = 256;

fn consts() -> Consts {
    Consts::new().expect("constant cache allocation")
}

/// A binary floating-point number with per-value precision.
#[derive(Clone)]
pub struct Mp(BigFloat, usize);

impl Mp {
    pub fn from_f64(v: f64, bits: usize) -> Self {
        Mp(BigFloat::from_f64(v, bits), bits)
    }

    pub fn from_i64(v: i64, bits: usize) -> Self {
        Mp(BigFloat::from_i64(v, bits), bits)
    }

    pub fn zero(bits: usize) -> Self {
        Self::from_i64(0, bits)
    }

    pub fn one(bits: usize) -> Self {
        Self::from_i64(1, bits)
    }

    /// Exact rational `p/q` rounded to `bits`.
    pub fn ratio(p: i64, q: i64, bits: usize) -> Self {
        Self::from_i64(p, bits + 64) / Self::from_i64(q, bits + 64)
    }

    pub fn pi(bits: usize) -> Self {
        Mp(consts().pi(bits, RM), bits)
    }

    /// Parses a decimal string such as `"-1.25e-3"`.
    pub fn parse(s: &str, bits: usize) -> Option<Self> {
        let v = BigFloat::parse(s.trim(), Radix::Dec, bits, RM, &mut consts());
        if v.is_nan() {
            None
        } else {
            Some(Mp(v, bits))
        }
    }

    pub fn bits(&self) -> usize {
        self.1
    }

    /// Same value rounded to a new precision.
    pub fn with_bits(&self, bits: usize) -> Self {
        let mut v = self.0.clone();
        // Precision changes on a finite value cannot fail except on allocation.
        let _ = v.set_precision(bits, RM);
        Mp(v, bits)
    }

    /// A constant at the precision of `self`.
    pub fn cst(&self, v: f64) -> Self {
        Self::from_f64(v, self.bits())
    }

    /// An integer at the precision of `self`.
    pub fn int(&self, v: i64) -> Self {
        Self::from_i64(v, self.bits())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        !self.0.is_nan() && !self.0.is_inf()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative() && !self.0.is_zero()
    }

    pub fn abs(&self) -> Self {
        Mp(self.0.abs(), self.1)
    }

    pub fn sqrt(&self) -> Self {
        Mp(self.0.sqrt(self.1, RM), self.1)
    }

    pub fn exp(&self) -> Self {
        Mp(self.0.exp(self.1, RM, &mut consts()), self.1)
    }

    pub fn ln(&self) -> Self {
        Mp(self.0.ln(self.1, RM, &mut consts()), self.1)
    }

    pub fn sinh(&self) -> Self {
        Mp(self.0.sinh(self.1, RM, &mut consts()), self.1)
    }

    pub fn cosh(&self) -> Self {
        // astro-float returns NaN for cosh(0).
        if self.is_zero() {
            return Self::one(self.bits());
        }
        Mp(self.0.cosh(self.1, RM, &mut consts()), self.1)
    }

    pub fn tanh(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        Mp(self.0.tanh(self.1, RM, &mut consts()), self.1)
    }

    pub fn sin(&self) -> Self {
        Mp(self.0.sin(self.1, RM, &mut consts()), self.1)
    }

    pub fn cos(&self) -> Self {
        if self.is_zero() {
            return Self::one(self.bits());
        }
        Mp(self.0.cos(self.1, RM, &mut consts()), self.1)
    }

    /// `self^e` for real `e`; `self` must be positive.
    pub fn powf(&self, e: &Mp) -> Self {
        let p = self.bits().max(e.bits());
        Mp(self.0.pow(&e.0, p, RM, &mut consts()), p)
    }

    /// `self^n` for a signed integer exponent.
    pub fn powi(&self, n: i64) -> Self {
        let p = self.bits();
        let m = Mp(self.0.powi(n.unsigned_abs() as usize, p, RM), p);
        if n < 0 {
            m.recip()
        } else {
            m
        }
    }

    pub fn recip(&self) -> Self {
        Mp(self.0.reciprocal(self.1, RM), self.1)
    }

    /// `self * 2^k`.
    pub fn ldexp(&self, k: i32) -> Self {
        if self.is_zero() || !self.is_finite() {
            return self.clone();
        }
        let mut v = self.0.clone();
        if let Some(e) = v.exponent() {
            v.set_exponent(e + k);
        }
        Mp(v, self.1)
    }

    /// Binary exponent `e` with `|self| = 0.m * 2^e`, `None` for zero.
    pub fn exponent(&self) -> Option<i32> {
        if self.is_zero() {
            None
        } else {
            self.0.exponent()
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    /// Nearest `f64`, correct to within one ulp.
    pub fn to_f64(&self) -> f64 {
        if self.0.is_nan() {
            return f64::NAN;
        }
        if self.0.is_inf() {
            return if self.0.is_inf_pos() { f64::INFINITY } else { f64::NEG_INFINITY };
        }
        let Some((words, _, sign, exp, _)) = self.0.as_raw_parts() else {
            return f64::NAN;
        };
        if self.0.is_zero() || words.is_empty() {
            return 0.0;
        }
        let top = words[words.len() - 1] as f64;
        let next = if words.len() > 1 { words[words.len() - 2] as f64 } else { 0.0 };
        let m = top + next * libm::ldexp(1.0, -64);
        let v = libm::ldexp(m, exp - 64);
        if sign == Sign::Neg {
            -v
        } else {
            v
        }
    }

    /// Scientific decimal rendering with every significant digit the
    /// precision supports.
    pub fn to_decimal(&self) -> String {
        if self.is_zero() {
            return String::from("0");
        }
        match self.0.format(Radix::Dec, RM, &mut consts()) {
            Ok(raw) => tidy_decimal(&raw),
            Err(_) => String::from("NaN"),
        }
    }

    /// Decimal rendering rounded to `digits` significant digits.
    pub fn to_decimal_digits(&self, digits: usize) -> String {
        let bits = ((digits as f64) * 3.321_928_094_887_362).ceil() as usize + 4;
        self.with_bits(bits.max(64)).to_decimal()
    }
}

/// Rewrites `d.ddde±x` positionally for moderate exponents and drops a
/// dangling point otherwise.
fn tidy_decimal(raw: &str) -> String {
    let Some((mant, exp)) = raw.split_once('e') else {
        return String::from(raw);
    };
    let Ok(exp) = exp.parse::<i64>() else {
        return String::from(raw);
    };
    let (sign, mant) = match mant.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mant),
    };
    let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
    if !(-6..21).contains(&exp) {
        let frac = frac.trim_end_matches('0');
        return if frac.is_empty() { format!("{sign}{int}e{exp}") } else { format!("{sign}{int}.{frac}e{exp}") };
    }
    let digits = format!("{int}{frac}");
    let point = int.len() as i64 + exp;
    let (whole, rest) = if point <= 0 {
        (String::from("0"), format!("{}{digits}", "0".repeat((-point) as usize)))
    } else if point as usize >= digits.len() {
        (format!("{digits}{}", "0".repeat(point as usize - digits.len())), String::new())
    } else {
        (String::from(&digits[..point as usize]), String::from(&digits[point as usize..]))
    };
    let rest = rest.trim_end_matches('0');
    if rest.is_empty() {
        format!("{sign}{whole}")
    } else {
        format!("{sign}{whole}.{rest}")
    }
}

impl fmt::Debug for Mp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mp({})", self.to_decimal_digits(30))
    }
}

impl fmt::Display for Mp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal())
    }
}

impl PartialEq for Mp {
    fn eq(&self, other: &Self) -> bool {
        self.0.cmp(&other.0) == Some(0)
    }
}

impl PartialOrd for Mp {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.cmp(&other.0).map(|c| c.cmp(&0))
    }
}

macro_rules! binop {
    ($tr:ident, $f:ident, $op:ident) => {
        impl $tr<Mp> for Mp {
            type Output = Mp;
            fn $f(self, rhs: Mp) -> Mp {
                let p = self.bits().max(rhs.bits());
                Mp(self.0.$op(&rhs.0, p, RM), p)
            }
        }
        impl<'a> $tr<&'a Mp> for Mp {
            type Output = Mp;
            fn $f(self, rhs: &'a Mp) -> Mp {
                let p = self.bits().max(rhs.bits());
                Mp(self.0.$op(&rhs.0, p, RM), p)
            }
        }
        impl<'a> $tr<&'a Mp> for &'a Mp {
            type Output = Mp;
            fn $f(self, rhs: &'a Mp) -> Mp {
                let p = self.bits().max(rhs.bits());
                Mp(self.0.$op(&rhs.0, p, RM), p)
            }
        }
        impl<'a> $tr<Mp> for &'a Mp {
            type Output = Mp;
            fn $f(self, rhs: Mp) -> Mp {
                let p = self.bits().max(rhs.bits());
                Mp(self.0.$op(&rhs.0, p, RM), p)
            }
        }
    };
}

binop!(Add, add, add);
binop!(Sub, sub, sub);
binop!(Mul, mul, mul);
binop!(Div, div, div);

impl Neg for Mp {
    type Output = Mp;
    fn neg(mut self) -> Mp {
        self.0.inv_sign();
        self
    }
}

impl Neg for &Mp {
    type Output = Mp;
    fn neg(self) -> Mp {
        -self.clone()
    }
}

impl AddAssign<&Mp> for Mp {
    fn add_assign(&mut self, rhs: &Mp) {
        let p = self.bits().max(rhs.bits());
        self.0 = self.0.add(&rhs.0, p, RM);
        self.1 = p;
    }
}

impl AddAssign<Mp> for Mp {
    fn add_assign(&mut self, rhs: Mp) {
        *self += &rhs;
    }
}

impl SubAssign<&Mp> for Mp {
    fn sub_assign(&mut self, rhs: &Mp) {
        let p = self.bits().max(rhs.bits());
        self.0 = self.0.sub(&rhs.0, p, RM);
        self.1 = p;
    }
}

impl SubAssign<Mp> for Mp {
    fn sub_assign(&mut self, rhs: Mp) {
        *self -= &rhs;
    }
}

impl MulAssign<&Mp> for Mp {
    fn mul_assign(&mut self, rhs: &Mp) {
        let p = self.bits().max(rhs.bits());
        self.0 = self.0.mul(&rhs.0, p, RM);
        self.1 = p;
    }
}

impl MulAssign<Mp> for Mp {
    fn mul_assign(&mut self, rhs: Mp) {
        *self *= &rhs;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_layout() {
        assert_eq!(tidy_decimal("5.e-1"), "0.5");
        assert_eq!(tidy_decimal("1.e+0"), "1");
        assert_eq!(tidy_decimal("-1.25e+2"), "-125");
        assert_eq!(tidy_decimal("3.5e+3"), "3500");
        assert_eq!(tidy_decimal("1.2e-7"), "1.2e-7");
        assert_eq!(tidy_decimal("6.e+23"), "6e23");
        assert_eq!(Mp::from_f64(0.1, 64).to_decimal().parse::<f64>().unwrap(), 0.1);
        assert_eq!(Mp::from_f64(-3.0e-7, 64).to_decimal().parse::<f64>().unwrap(), -3.0e-7);
    }

    #[test]
    fn f64_round_trip() {
        for v in [1.0, -2.5, 0.1, 1e-300, 6.02e23, -3.0e-7] {
            assert_eq!(Mp::from_f64(v, 128).to_f64(), v);
        }
        assert_eq!(Mp::zero(64).to_f64(), 0.0);
    }

    #[test]
    fn arithmetic_at_256_bits() {
        let third = Mp::ratio(1, 3, 256);
        let back = &third * &third.int(3);
        assert!((back - Mp::one(256)).abs() < Mp::one(256).ldexp(-250));
        let two = Mp::from_i64(2, 256);
        let s = two.sqrt();
        assert!((&s * &s - two).abs() < Mp::one(256).ldexp(-250));
    }

    #[test]
    fn transcendental_consistency() {
        let x = Mp::ratio(7, 10, 256);
        let e = x.exp().ln();
        assert!((e - &x).abs() < Mp::one(256).ldexp(-248));
        let p = Mp::pi(256);
        assert!((p.to_f64() - core::f64::consts::PI).abs() < 1e-15);
        assert!(p.sin().abs() < Mp::one(256).ldexp(-240));
    }

    #[test]
    fn decimal_round_trip() {
        let x = Mp::ratio(-22, 7, 256);
        let s = x.to_decimal();
        let y = Mp::parse(&s, 256).unwrap();
        assert!((x - y).abs() < Mp::one(256).ldexp(-240));
    }

    #[test]
    fn ordering_and_ldexp() {
        let a = Mp::from_f64(1.5, 128);
        assert!(a.ldexp(3).to_f64() == 12.0);
        assert!(Mp::from_f64(-1.0, 64) < a);
        assert!(Mp::from_f64(-1.0, 64).is_negative());
        assert_eq!(a.powi(-2).to_f64(), 1.0 / 2.25);
        let z = Mp::zero(128);
        assert_eq!(z.cosh().to_f64(), 1.0);
        assert_eq!(z.cos().to_f64(), 1.0);
        assert_eq!(z.tanh().to_f64(), 0.0);
        assert_eq!(z.exp().to_f64(), 1.0);
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for Mp {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_decimal())
    }
}

/// Parsed at the precision implied by the digit count, at least 64 bits.
#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for Mp {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        let s = <String as serde::Deserialize>::deserialize(d)?;
        let digits = s.chars().filter(char::is_ascii_digit).count();
        let bits = 64usize.max(digits * 10 / 3 + 8);
        Mp::parse(&s, bits).ok_or_else(|| serde::de::Error::custom("malformed decimal"))
    }
}
