//! Scalar types: exact rationals, a small field abstraction shared by the
//! exact and floating-point code paths, and fixed-precision helpers for the
//! few places where square roots are unavoidable.

use std::fmt::Debug;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision exact rational; the scalar type of every coefficient computation.
pub type Rational = BigRational;

/// Builds `num / den` as an exact rational.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Builds an integer-valued rational.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `base^exp` for a rational base and signed exponent.
pub fn pow(base: &Rational, exp: i32) -> Rational {
    if exp >= 0 {
        num_traits::pow(base.clone(), exp as usize)
    } else {
        num_traits::pow(base.recip(), (-exp) as usize)
    }
}

/// Serializes as `"num/den"` (integers keep the `/1`, so every entry has the same shape).
pub fn to_fraction_string(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Parses `"num/den"` or a bare integer.
pub fn parse_fraction(s: &str) -> Result<Rational> {
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(s.trim().parse().map_err(|_| bad())?)),
    }
}

/// A field the generic graph algorithms run over: exact rationals or `f64`.
pub trait Scalar:
    Clone + Debug + PartialEq + PartialOrd + Send + Sync + num_traits::Num + Signed + 'static
{
    fn from_rational(q: &Rational) -> Self;
    fn to_f64(&self) -> f64;
    /// True when arithmetic is exact, so equality checks need no tolerance.
    fn is_exact() -> bool;
}

impl Scalar for Rational {
    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }

    fn to_f64(&self) -> f64 {
        ratio_to_f64(self)
    }

    fn is_exact() -> bool {
        true
    }
}

impl Scalar for f64 {
    fn from_rational(q: &Rational) -> Self {
        ratio_to_f64(q)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn is_exact() -> bool {
        false
    }
}

/// Converts to `f64` without overflowing on huge numerators/denominators.
pub fn ratio_to_f64(q: &Rational) -> f64 {
    if let Some(v) = ToPrimitive::to_f64(q) {
        if v.is_finite() && (v != 0.0 || q.is_zero()) {
            return v;
        }
    }
    // Shift both parts down to ~60 significant bits before dividing.
    let n = q.numer();
    let d = q.denom();
    let nb = n.bits() as i64;
    let db = d.bits() as i64;
    let ns = (nb - 60).max(0);
    let ds = (db - 60).max(0);
    let nf = (n >> ns as usize).to_f64().unwrap_or(f64::NAN);
    let df = (d >> ds as usize).to_f64().unwrap_or(f64::NAN);
    nf / df * 2f64.powi((ns - ds) as i32)
}

/// Square root of a non-negative rational, truncated to `digits` significant
/// decimal digits (the result is a rational with a power-of-ten denominator
/// times the input denominator).
pub fn sqrt_rational(x: &Rational, digits: u32) -> Rational {
    assert!(!x.is_negative(), "square root of a negative rational");
    if x.is_zero() {
        return Rational::zero();
    }
    // sqrt(n/d) = sqrt(n*d)/d; scale n*d by 10^(2k) so the root carries enough digits.
    let nd = x.numer() * x.denom();
    let have = decimal_digits(&nd) as i64;
    let want = 2 * digits as i64 + 2;
    let k = ((want - have) / 2 + 1).max(0) as u32;
    let scale = BigInt::from(10u32).pow(k);
    let root = (nd * &scale * &scale).sqrt();
    Rational::new(root, x.denom() * scale)
}

fn decimal_digits(n: &BigInt) -> u64 {
    n.abs().to_str_radix(10).len() as u64
}

/// Formats a rational in scientific notation with `digits` significant
/// digits, rounding half away from zero. Exact: no floating point involved.
pub fn to_decimal_string(q: &Rational, digits: usize) -> String {
    let digits = digits.max(1);
    if q.is_zero() {
        return "0".to_string();
    }
    let negative = q.is_negative();
    let num = q.numer().abs();
    let den = q.denom().clone();
    // Find e with 10^e <= |q| < 10^(e+1).
    let mut e = decimal_digits(&num) as i64 - decimal_digits(&den) as i64;
    let ten = BigInt::from(10u32);
    let cmp_pow = |e: i64| -> std::cmp::Ordering {
        // compare num/den with 10^e
        if e >= 0 {
            num.cmp(&(&den * ten.pow(e as u32)))
        } else {
            (&num * ten.pow((-e) as u32)).cmp(&den)
        }
    };
    while cmp_pow(e) == std::cmp::Ordering::Less {
        e -= 1;
    }
    while cmp_pow(e + 1) != std::cmp::Ordering::Less {
        e += 1;
    }
    // mantissa = round(|q| * 10^(digits-1-e))
    let shift = digits as i64 - 1 - e;
    let (sn, sd) = if shift >= 0 {
        (&num * ten.pow(shift as u32), den.clone())
    } else {
        (num.clone(), &den * ten.pow((-shift) as u32))
    };
    let (mut m, rem) = sn.div_rem(&sd);
    if rem * 2 >= sd {
        m += 1;
    }
    if decimal_digits(&m) as usize > digits {
        m /= 10;
        e += 1;
    }
    let s = m.to_str_radix(10);
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    out.push_str(&s[..1]);
    if s.len() > 1 {
        out.push('.');
        out.push_str(&s[1..]);
    }
    if e != 0 {
        out.push_str(&format!("e{e}"));
    }
    out
}

/// Sign of a rational as -1, 0, 1.
pub fn signum(q: &Rational) -> i32 {
    match q.numer().sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

/// `true` when `x` is one.
pub fn is_one(x: &Rational) -> bool {
    x.is_one()
}
