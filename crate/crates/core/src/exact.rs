//! Exact rationals, reciprocal sums and truncated decimal rendering.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::catalog::{CatalogError, MersenneCatalog, SequenceSpec};
use crate::euclid;

#[derive(Debug, Error)]
pub enum ExactError {
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error("non-digit character {ch:?} at position {position}")]
    NonDigit { position: usize, ch: char },
    #[error("digit string is empty")]
    EmptyDigits,
    #[error("cannot parse `{0}` as a rational")]
    Parse(String),
    #[error("denominator is zero")]
    ZeroDenominator,
}

/// Rational number in lowest terms with a positive denominator.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BigRational {
    num: BigInt,
    den: BigUint,
}

impl BigRational {
    /// Reduces `num / den`.
    ///
    /// # Panics
    /// If `den` is zero.
    pub fn new(num: BigInt, den: BigUint) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        let g = euclid::gcd(num.magnitude(), &den);
        if g.is_one() {
            return Self { num, den };
        }
        let (sign, mag) = num.into_parts();
        Self {
            num: BigInt::from_biguint(sign, mag / &g),
            den: den / g,
        }
    }

    /// Builds from parts already known to be coprime (e.g. consecutive
    /// convergent numerators and denominators).
    pub(crate) fn from_coprime(num: BigInt, den: BigUint) -> Self {
        debug_assert!(!den.is_zero());
        debug_assert!(euclid::gcd(num.magnitude(), &den).is_one());
        Self { num, den }
    }

    pub fn from_integer(n: BigInt) -> Self {
        Self {
            num: n,
            den: BigUint::one(),
        }
    }

    pub fn numer(&self) -> &BigInt {
        &self.num
    }

    pub fn denom(&self) -> &BigUint {
        &self.den
    }

    pub fn into_parts(self) -> (BigInt, BigUint) {
        (self.num, self.den)
    }

    pub fn is_integer(&self) -> bool {
        self.den.is_one()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn abs(&self) -> Self {
        Self {
            num: self.num.abs(),
            den: self.den.clone(),
        }
    }

    pub fn floor(&self) -> BigInt {
        self.num.div_floor(&BigInt::from(self.den.clone()))
    }

    /// `10^{-d}` as a rational.
    pub fn pow10_neg(d: u64) -> Self {
        Self {
            num: BigInt::one(),
            den: pow10(d),
        }
    }

    /// Natural log of the absolute value, from leading bits only.
    ///
    /// # Panics
    /// If the value is zero.
    pub fn ln_abs(&self) -> f64 {
        ln_biguint(self.num.magnitude()) - ln_biguint(&self.den)
    }
}

impl fmt::Display for BigRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl FromStr for BigRational {
    type Err = ExactError;

    /// Accepts `p/q`, an integer, or a plain decimal such as `-0.125`.
    fn from_str(s: &str) -> Result<Self, ExactError> {
        let s = s.trim();
        if let Some((p, q)) = s.split_once('/') {
            let num: BigInt = p.trim().parse().map_err(|_| ExactError::Parse(s.into()))?;
            let den: BigUint = q.trim().parse().map_err(|_| ExactError::Parse(s.into()))?;
            if den.is_zero() {
                return Err(ExactError::ZeroDenominator);
            }
            return Ok(Self::new(num, den));
        }
        if s.contains('.') {
            return DecimalApprox::parse(s).map(|d| d.to_rational());
        }
        let num: BigInt = s.parse().map_err(|_| ExactError::Parse(s.into()))?;
        Ok(Self::from_integer(num))
    }
}

impl Ord for BigRational {
    fn cmp(&self, other: &Self) -> Ordering {
        let lhs = &self.num * BigInt::from(other.den.clone());
        let rhs = &other.num * BigInt::from(self.den.clone());
        lhs.cmp(&rhs)
    }
}

impl PartialOrd for BigRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for &BigRational {
    type Output = BigRational;
    fn add(self, rhs: &BigRational) -> BigRational {
        let num = &self.num * BigInt::from(rhs.den.clone()) + &rhs.num * BigInt::from(self.den.clone());
        BigRational::new(num, &self.den * &rhs.den)
    }
}

impl Sub for &BigRational {
    type Output = BigRational;
    fn sub(self, rhs: &BigRational) -> BigRational {
        let num = &self.num * BigInt::from(rhs.den.clone()) - &rhs.num * BigInt::from(self.den.clone());
        BigRational::new(num, &self.den * &rhs.den)
    }
}

impl Mul for &BigRational {
    type Output = BigRational;
    fn mul(self, rhs: &BigRational) -> BigRational {
        BigRational::new(&self.num * &rhs.num, &self.den * &rhs.den)
    }
}

impl Neg for BigRational {
    type Output = BigRational;
    fn neg(self) -> BigRational {
        BigRational {
            num: -self.num,
            den: self.den,
        }
    }
}

impl From<i64> for BigRational {
    fn from(n: i64) -> Self {
        Self::from_integer(n.into())
    }
}

impl From<BigInt> for BigRational {
    fn from(n: BigInt) -> Self {
        Self::from_integer(n)
    }
}

pub fn pow10(d: u64) -> BigUint {
    Pow::pow(BigUint::from(10u32), d)
}

/// Natural logarithm from the bit length plus the leading 64 bits.
///
/// # Panics
/// If `q` is zero.
pub fn ln_biguint(q: &BigUint) -> f64 {
    assert!(!q.is_zero(), "logarithm of zero");
    let bits = q.bits();
    if bits <= 64 {
        return (q.to_u64().expect("fits") as f64).ln();
    }
    let shift = bits - 64;
    let top = euclid::top_word(q, shift);
    (top as f64).ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn log10_biguint(q: &BigUint) -> f64 {
    ln_biguint(q) / std::f64::consts::LN_10
}

/// `Σ 1/t_k`, reduced. Terms are combined pairwise (binary splitting) so the
/// cost is dominated by a few large multiplications.
///
/// # Panics
/// If `terms` is empty or contains zero.
pub fn reciprocal_sum_of_terms(terms: &[BigUint]) -> BigRational {
    assert!(!terms.is_empty(), "empty reciprocal sum");
    fn split(terms: &[BigUint]) -> (BigUint, BigUint) {
        if terms.len() == 1 {
            assert!(!terms[0].is_zero(), "reciprocal of zero");
            return (BigUint::one(), terms[0].clone());
        }
        let mid = terms.len() / 2;
        let (n1, d1) = split(&terms[..mid]);
        let (n2, d2) = split(&terms[mid..]);
        (n1 * &d2 + n2 * &d1, d1 * d2)
    }
    let (num, den) = split(terms);
    BigRational::new(BigInt::from(num), den)
}

pub fn reciprocal_sum(
    spec: &SequenceSpec,
    catalog: &MersenneCatalog,
) -> Result<BigRational, ExactError> {
    let terms = spec.terms(catalog)?;
    Ok(reciprocal_sum_of_terms(&terms))
}

/// Decimal expansion truncated toward zero after `precision` fractional
/// digits: the represented value differs from the source by less than
/// `10^{-precision}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecimalApprox {
    negative: bool,
    /// `floor(|x| · 10^precision)`
    scaled: BigUint,
    precision: u64,
}

impl DecimalApprox {
    pub fn precision(&self) -> u64 {
        self.precision
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    pub fn scaled(&self) -> &BigUint {
        &self.scaled
    }

    /// Digits before and after the point, without sign.
    pub fn parts(&self) -> (String, String) {
        let d = self.precision as usize;
        let mut s = self.scaled.to_str_radix(10);
        if s.len() <= d {
            s = format!("{}{}", "0".repeat(d + 1 - s.len()), s);
        }
        let frac = s.split_off(s.len() - d);
        (s, frac)
    }

    pub fn fraction_digits(&self) -> String {
        self.parts().1
    }

    pub fn to_rational(&self) -> BigRational {
        let sign = if self.negative { Sign::Minus } else { Sign::Plus };
        BigRational::new(
            BigInt::from_biguint(sign, self.scaled.clone()),
            pow10(self.precision),
        )
    }

    /// Closed interval guaranteed to contain the value that was rendered.
    pub fn enclosure(&self) -> (BigRational, BigRational) {
        let v = self.to_rational();
        let ulp = BigRational::pow10_neg(self.precision);
        if self.scaled.is_zero() {
            // Truncation to zero loses the sign.
            return (-ulp.clone(), ulp);
        }
        if self.negative {
            (&v - &ulp, v)
        } else {
            let hi = &v + &ulp;
            (v, hi)
        }
    }

    /// Keeps the first `d` fractional digits.
    pub fn truncate_to(&self, d: u64) -> Self {
        if d >= self.precision {
            return self.clone();
        }
        let scaled = &self.scaled / pow10(self.precision - d);
        Self {
            negative: self.negative && !scaled.is_zero(),
            scaled,
            precision: d,
        }
    }

    /// Parses `[-]int.frac`; the precision is the number of fractional
    /// digits.
    pub fn parse(s: &str) -> Result<Self, ExactError> {
        let s = s.trim();
        let (negative, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let (int, frac) = body.split_once('.').unwrap_or((body, ""));
        if int.is_empty() && frac.is_empty() {
            return Err(ExactError::EmptyDigits);
        }
        for (position, ch) in int.chars().chain(frac.chars()).enumerate() {
            if !ch.is_ascii_digit() {
                return Err(ExactError::NonDigit { position, ch });
            }
        }
        let all = format!("{int}{frac}");
        let scaled = if all.is_empty() {
            BigUint::zero()
        } else {
            BigUint::parse_bytes(all.as_bytes(), 10).ok_or_else(|| ExactError::Parse(s.into()))?
        };
        Ok(Self {
            negative: negative && !scaled.is_zero(),
            scaled,
            precision: frac.len() as u64,
        })
    }
}

impl fmt::Display for DecimalApprox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (int, frac) = self.parts();
        if self.negative {
            f.write_str("-")?;
        }
        if frac.is_empty() {
            write!(f, "{int}")
        } else {
            write!(f, "{int}.{frac}")
        }
    }
}

#[derive(Serialize, Deserialize)]
struct DecimalJson {
    digits: String,
    precision: u64,
}

impl Serialize for DecimalApprox {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        DecimalJson {
            digits: self.to_string(),
            precision: self.precision,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DecimalApprox {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = DecimalJson::deserialize(d)?;
        let parsed = DecimalApprox::parse(&raw.digits).map_err(serde::de::Error::custom)?;
        if parsed.precision < raw.precision {
            return Err(serde::de::Error::custom(format!(
                "declared precision {} exceeds the {} digits present",
                raw.precision, parsed.precision
            )));
        }
        Ok(parsed.truncate_to(raw.precision))
    }
}

/// Truncates `r` toward zero to `d` fractional digits.
pub fn to_decimal(r: &BigRational, d: u64) -> DecimalApprox {
    let scaled = (r.num.magnitude() * pow10(d)) / &r.den;
    DecimalApprox {
        negative: r.num.is_negative() && !scaled.is_zero(),
        scaled,
        precision: d,
    }
}

/// `num/den` in scientific notation with `sig` significant digits,
/// truncated (not rounded), e.g. `2.131173743e-06`. The exponent has at
/// least two digits.
///
/// # Panics
/// If `num` or `den` is zero, or `sig` is zero.
pub fn sci_truncated(num: &BigUint, den: &BigUint, sig: u32) -> String {
    assert!(!num.is_zero() && !den.is_zero() && sig >= 1);
    let lo = pow10(u64::from(sig) - 1);
    let hi = pow10(u64::from(sig));
    // exponent estimate, corrected below
    let mut k = (log10_biguint(num) - log10_biguint(den)).floor() as i64;
    let mantissa = loop {
        let shift = i64::from(sig) - 1 - k;
        let m = if shift >= 0 {
            num * pow10(shift as u64) / den
        } else {
            num / (den * pow10(shift.unsigned_abs()))
        };
        if m >= hi {
            k += 1;
        } else if m < lo {
            k -= 1;
        } else {
            break m;
        }
    };
    let digits = mantissa.to_str_radix(10);
    let (lead, rest) = digits.split_at(1);
    let sign = if k < 0 { '-' } else { '+' };
    if rest.is_empty() {
        format!("{lead}e{sign}{:02}", k.unsigned_abs())
    } else {
        format!("{lead}.{rest}e{sign}{:02}", k.unsigned_abs())
    }
}

/// `1/q^2` via [`sci_truncated`] with 10 significant digits.
pub fn inverse_square_sci(q: &BigUint) -> String {
    sci_truncated(&BigUint::one(), &(q * q), 10)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DigitCensus {
    pub counts: [u64; 10],
}

impl DigitCensus {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn frequencies(&self) -> [f64; 10] {
        let total = self.total() as f64;
        self.counts.map(|c| c as f64 / total)
    }
}

/// Census of the fractional digits.
pub fn digit_census(a: &DecimalApprox) -> Result<DigitCensus, ExactError> {
    digit_census_str(&a.fraction_digits())
}

pub fn digit_census_str(digits: &str) -> Result<DigitCensus, ExactError> {
    if digits.is_empty() {
        return Err(ExactError::EmptyDigits);
    }
    let mut counts = [0u64; 10];
    for (position, b) in digits.bytes().enumerate() {
        match b {
            b'0'..=b'9' => counts[(b - b'0') as usize] += 1,
            _ => {
                return Err(ExactError::NonDigit {
                    position,
                    ch: digits[position..].chars().next().unwrap_or('?'),
                })
            }
        }
    }
    Ok(DigitCensus { counts })
}
