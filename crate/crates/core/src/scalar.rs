//! Numeric backends: exact rationals and 64-bit floats behind one trait.
//!
//! Every algorithm in the crate is generic over [`Scalar`]. In exact mode
//! (`BigRational`) every tolerance collapses to zero and comparisons are
//! exact; in float mode (`f64`) tolerances come from [`crate::config`].

use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational scalar.
pub type Rational = BigRational;

/// Which arithmetic a solve runs in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
}

impl Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mode::Exact => f.write_str("exact"),
            Mode::Float => f.write_str("float"),
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Mode::Exact),
            "float" => Ok(Mode::Float),
            other => Err(Error::Parse(format!("unknown mode `{other}`"))),
        }
    }
}

pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialOrd
    + Zero
    + One
    + Signed
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    const MODE: Mode;

    fn from_ratio(num: i64, den: i64) -> Self;

    fn from_int(v: i64) -> Self {
        Self::from_ratio(v, 1)
    }

    /// Exact conversion for rationals (every finite `f64` is a dyadic rational).
    fn from_f64(v: f64) -> Option<Self>;

    fn to_f64(&self) -> f64;

    fn floor(&self) -> Self;

    /// Parses `"p/q"`, plain decimals and decimals with an exponent.
    fn parse(text: &str) -> Result<Self>;

    /// Textual encoding used by all file formats.
    fn encode(&self) -> String;

    /// A tolerance of the given size: zero in exact mode.
    fn eps(size: f64) -> Self;

    /// Bit length of numerator plus denominator; zero for floats.
    fn magnitude_bits(&self) -> u64 {
        0
    }

    fn is_exact() -> bool {
        Self::MODE == Mode::Exact
    }

    fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }
}

impl Scalar for Rational {
    const MODE: Mode = Mode::Exact;

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_f64(v: f64) -> Option<Self> {
        BigRational::from_float(v)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn floor(&self) -> Self {
        BigRational::floor(self)
    }

    fn parse(text: &str) -> Result<Self> {
        parse_rational(text)
    }

    fn encode(&self) -> String {
        self.to_string()
    }

    fn eps(_size: f64) -> Self {
        Self::zero()
    }

    fn magnitude_bits(&self) -> u64 {
        self.numer().bits() + self.denom().bits()
    }
}

impl Scalar for f64 {
    const MODE: Mode = Mode::Float;

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn from_f64(v: f64) -> Option<Self> {
        v.is_finite().then_some(v)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn floor(&self) -> Self {
        f64::floor(*self)
    }

    fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let value = if let Some((p, q)) = text.split_once('/') {
            let p: f64 = p.trim().parse().map_err(|_| bad_number(text))?;
            let q: f64 = q.trim().parse().map_err(|_| bad_number(text))?;
            if q == 0.0 {
                return Err(bad_number(text));
            }
            p / q
        } else {
            text.parse::<f64>().map_err(|_| bad_number(text))?
        };
        if !value.is_finite() {
            return Err(bad_number(text));
        }
        Ok(value)
    }

    fn encode(&self) -> String {
        format!("{self:?}")
    }

    fn eps(size: f64) -> Self {
        size
    }
}

fn bad_number(text: &str) -> Error {
    Error::Parse(format!("`{text}` is not a finite number"))
}

/// Parses a rational number from `"p/q"` or a decimal literal such as
/// `"-0.125"` or `"2.5e-3"`, without going through floating point.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let text = text.trim();
    if let Some((p, q)) = text.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad_number(text))?;
        let q: BigInt = q.trim().parse().map_err(|_| bad_number(text))?;
        if q.is_zero() {
            return Err(bad_number(text));
        }
        return Ok(BigRational::new(p, q));
    }

    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => {
            let exp: i64 = text[pos + 1..].parse().map_err(|_| bad_number(text))?;
            (&text[..pos], exp)
        }
        None => (text, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad_number(text));
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad_number(text));
    }
    let all_digits = format!("{int_part}{frac_part}");
    let numer: BigInt = if all_digits.is_empty() {
        BigInt::zero()
    } else {
        all_digits.parse().map_err(|_| bad_number(text))?
    };
    let scale = exponent - frac_part.len() as i64;
    if scale.abs() > 4096 {
        return Err(Error::Parse(format!("exponent of `{text}` out of range")));
    }
    let ten = BigInt::from(10u32);
    let pow = num_traits::pow(ten, scale.unsigned_abs() as usize);
    let mut value = if scale >= 0 {
        BigRational::from_integer(numer * pow)
    } else {
        BigRational::new(numer, pow)
    };
    if negative {
        value = -value;
    }
    Ok(value)
}

/// Converts between the two backends. Float to rational is exact.
pub fn convert<S: Scalar, T: Scalar>(value: &S) -> T {
    match (S::MODE, T::MODE) {
        (Mode::Exact, Mode::Exact) => T::parse(&value.encode()).expect("re-encoding a rational"),
        _ => T::from_f64(value.to_f64()).expect("finite value"),
    }
}
