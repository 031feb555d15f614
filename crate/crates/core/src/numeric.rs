//! Number types shared by every module.
//!
//! Probabilities, ratios and closeness constants are generic over [`Scalar`],
//! which is implemented for exact rationals ([`BigRational`]) and for `f64`.
//! Entropies involve logarithms and are always `f64`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Absolute tolerance for stochasticity and stationarity checks on float inputs.
pub const VALIDATION_TOL: f64 = 1e-10;

/// Absolute tolerance for the unit sum of a float probability vector.
pub const PROB_SUM_TOL: f64 = 1e-12;

/// Arithmetic used for cylinder probabilities and closeness constants.
pub trait Scalar:
    Num + Signed + Clone + PartialOrd + fmt::Debug + fmt::Display + Send + Sync + 'static
{
    /// True when arithmetic is exact; validation then uses no tolerance.
    const EXACT: bool;
    const MODE: Mode;

    fn to_f64(&self) -> f64;

    fn from_ratio(num: i64, den: i64) -> Self;

    /// Parses `"3/10"`, `"0.3"`, `"3e-1"` or `"2"`.
    fn parse_literal(text: &str) -> Result<Self>;

    /// Converts a JSON number. Exact arithmetic reads the shortest decimal
    /// form of `x`, so a literal `0.1` becomes `1/10`.
    fn from_json_number(x: f64) -> Result<Self>;

    fn to_quantity(&self) -> Quantity;

    /// Whether `self` is zero up to the validation tolerance `tol`
    /// (exactly zero in exact arithmetic).
    fn negligible(&self, tol: f64) -> bool;

    /// Equality used when re-identifying an extremal value along a path.
    fn matches(&self, other: &Self) -> bool;
}

impl Scalar for BigRational {
    const EXACT: bool = true;
    const MODE: Mode = Mode::Rational;

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn parse_literal(text: &str) -> Result<Self> {
        parse_rational(text)
    }

    fn from_json_number(x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::Parse(format!("non-finite number {x}")));
        }
        parse_rational(&format!("{x}"))
    }

    fn to_quantity(&self) -> Quantity {
        Quantity::Rational(self.clone())
    }

    fn negligible(&self, _tol: f64) -> bool {
        self.is_zero()
    }

    fn matches(&self, other: &Self) -> bool {
        self == other
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;
    const MODE: Mode = Mode::Float;

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn parse_literal(text: &str) -> Result<Self> {
        let text = text.trim();
        let value = match text.split_once('/') {
            Some((n, d)) => parse_float(n)? / parse_float(d)?,
            None => parse_float(text)?,
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::Parse(format!("non-finite number {text:?}")))
        }
    }

    fn from_json_number(x: f64) -> Result<Self> {
        if x.is_finite() {
            Ok(x)
        } else {
            Err(Error::Parse(format!("non-finite number {x}")))
        }
    }

    fn to_quantity(&self) -> Quantity {
        Quantity::Float(*self)
    }

    fn negligible(&self, tol: f64) -> bool {
        self.abs() <= tol
    }

    fn matches(&self, other: &Self) -> bool {
        (self - other).abs() <= 1e-9 * self.abs().max(other.abs()).max(f64::MIN_POSITIVE)
    }
}

fn parse_float(text: &str) -> Result<f64> {
    let t = text.trim();
    if t.is_empty()
        || t.chars()
            .any(|c| c.is_ascii_alphabetic() && c != 'e' && c != 'E')
    {
        return Err(Error::Parse(format!("not a number: {text:?}")));
    }
    t.parse::<f64>()
        .map_err(|e| Error::Parse(format!("not a number: {text:?} ({e})")))
}

/// Exact parse of an integer, a `num/den` fraction or a decimal with an
/// optional exponent.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let t = text.trim();
    if let Some((n, d)) = t.split_once('/') {
        let num = parse_rational(n)?;
        let den = parse_rational(d)?;
        if den.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {text:?}")));
        }
        return Ok(num / den);
    }
    let bad = || Error::Parse(format!("not a rational number: {text:?}"));
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(i) => {
            let exp: i64 = t[i + 1..].parse().map_err(|_| bad())?;
            (&t[..i], exp)
        }
        None => (t, 0),
    };
    let (negative, digits) = match mantissa.as_bytes().first() {
        Some(b'-') => (true, &mantissa[1..]),
        Some(b'+') => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part
        .bytes()
        .chain(frac_part.bytes())
        .all(|b| b.is_ascii_digit())
    {
        return Err(bad());
    }
    // Guards against exponents that would allocate absurdly large integers.
    let scale = exponent - frac_part.len() as i64;
    if scale.abs() > 4096 || int_part.len() + frac_part.len() > 4096 {
        return Err(Error::Parse(format!(
            "number out of supported range: {text:?}"
        )));
    }
    let joined = format!("{int_part}{frac_part}");
    let mut value = BigInt::from_str_radix(if joined.is_empty() { "0" } else { &joined }, 10)
        .map_err(|_| bad())?;
    if negative {
        value = -value;
    }
    let ten = BigInt::from(10u8);
    let power = num_traits::pow(ten, scale.unsigned_abs() as usize);
    Ok(if scale >= 0 {
        BigRational::from_integer(value * power)
    } else {
        BigRational::new(value, power)
    })
}

/// Renders a rational as `num/den`, always with an explicit denominator.
pub fn format_rational(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Rounds `x` to 15 significant digits. Report values are stored in this
/// form so that decimal renderings parse back to the identical `f64`.
pub fn canonical(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{x:.14e}").parse().unwrap_or(x)
}

/// Which arithmetic a scenario runs in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Rational,
    Float,
}

/// A value that is either finite or `+inf`.
#[derive(Debug, Clone, PartialEq)]
pub enum Extended<F> {
    Finite(F),
    Infinite,
}

impl<F: Scalar> Extended<F> {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Extended::Infinite)
    }

    pub fn finite(&self) -> Option<&F> {
        match self {
            Extended::Finite(x) => Some(x),
            Extended::Infinite => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Extended::Finite(x) => x.to_f64(),
            Extended::Infinite => f64::INFINITY,
        }
    }

    pub fn to_quantity(&self) -> Quantity {
        match self {
            Extended::Finite(x) => x.to_quantity(),
            Extended::Infinite => Quantity::Infinite,
        }
    }

    /// `self <= bound`, with `+inf` exceeding every finite bound.
    pub fn le(&self, bound: &F) -> bool {
        match self {
            Extended::Finite(x) => x <= bound,
            Extended::Infinite => false,
        }
    }
}

impl<F: fmt::Display> fmt::Display for Extended<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(x) => write!(f, "{x}"),
            Extended::Infinite => f.write_str("inf"),
        }
    }
}

/// Mode-independent value carried by reports: an exact rational (rendered
/// `"num/den"`), a float, or `+inf` (rendered `"inf"`).
#[derive(Debug, Clone, PartialEq)]
pub enum Quantity {
    Rational(BigRational),
    Float(f64),
    Infinite,
}

impl Quantity {
    pub fn to_f64(&self) -> f64 {
        match self {
            Quantity::Rational(r) => Scalar::to_f64(r),
            Quantity::Float(x) => *x,
            Quantity::Infinite => f64::INFINITY,
        }
    }

    /// Float payloads rounded to 15 significant digits.
    pub fn canonical(self) -> Self {
        match self {
            Quantity::Float(x) => Quantity::Float(canonical(x)),
            other => other,
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantity::Rational(r) => f.write_str(&format_rational(r)),
            Quantity::Float(x) => write!(f, "{x}"),
            Quantity::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Quantity {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Quantity::Rational(r) => s.serialize_str(&format_rational(r)),
            Quantity::Float(x) => s.serialize_f64(*x),
            Quantity::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Quantity {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(x) => Ok(Quantity::Float(x)),
            Raw::Text(t) if t == "inf" => Ok(Quantity::Infinite),
            Raw::Text(t) => parse_rational(&t)
                .map(Quantity::Rational)
                .map_err(serde::de::Error::custom),
        }
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Exact sum in exact arithmetic, plain left-to-right otherwise.
pub(crate) fn sum<F: Scalar>(values: impl IntoIterator<Item = F>) -> F {
    values.into_iter().fold(F::zero(), |acc, x| acc + x)
}

pub(crate) fn half<F: Scalar>() -> F {
    F::from_ratio(1, 2)
}

pub(crate) fn third<F: Scalar>() -> F {
    F::from_ratio(1, 3)
}

pub(crate) fn two<F: Scalar>() -> F {
    F::one() + F::one()
}
