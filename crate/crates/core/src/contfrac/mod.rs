//! Simple continued fractions: exact and interval-certified expansion,
//! convergents, reconstruction and approximation error bounds.

mod convergents;
mod format;
mod stream;

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::euclid::QuotientStream;
use crate::exact::{ln_biguint, pow10, to_decimal, BigRational, DecimalApprox};

pub use convergents::{convergents, Convergent, ConvergentSeries, ConvergentState};
pub use format::CfJson;
pub use stream::ExpansionStream;

#[derive(Debug, Error)]
pub enum ContFracError {
    #[error("partial quotient {index} is zero")]
    ZeroQuotient { index: usize },
    #[error("interval endpoints do not share an integer part")]
    EmptyPrefix,
    #[error("interval lower endpoint exceeds upper endpoint")]
    InvalidInterval,
    #[error("need convergent {needed} but only {available} are available")]
    NotEnoughConvergents { needed: usize, available: usize },
    #[error("value coincides with convergent {n}; the error is zero")]
    ExactHit { n: usize },
    #[error("requested {requested} digits but 1/Q_n^2 certifies only {certified}")]
    PrecisionNotCertified { requested: u64, certified: u64 },
    #[error("digit {requested} is not yet determined by the first {terms} quotients")]
    DigitsUndetermined { requested: u64, terms: usize },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Whether the quotient list is the complete expansion of a rational or a
/// prefix of a longer one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tail {
    Exact,
    /// Prefix certified for a value known to `precision` decimal digits.
    Truncated { precision: u64 },
}

impl fmt::Display for Tail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tail::Exact => f.write_str("exact"),
            Tail::Truncated { precision } => write!(f, "truncated:{precision}"),
        }
    }
}

/// `[a0; a1, a2, ..., an]` with every `a_k ≥ 1` for `k ≥ 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CfExpansion {
    a0: BigInt,
    quotients: Vec<BigUint>,
    tail: Tail,
}

impl CfExpansion {
    /// Validates the quotients. Exact expansions are put in canonical form:
    /// a trailing quotient 1 is folded into its predecessor.
    pub fn new(a0: BigInt, quotients: Vec<BigUint>, tail: Tail) -> Result<Self, ContFracError> {
        if let Some(index) = quotients.iter().position(Zero::is_zero) {
            return Err(ContFracError::ZeroQuotient { index: index + 1 });
        }
        let mut cf = Self {
            a0,
            quotients,
            tail,
        };
        if tail == Tail::Exact {
            cf.canonicalize();
        }
        Ok(cf)
    }

    fn canonicalize(&mut self) {
        if self.quotients.last().is_some_and(One::is_one) {
            self.quotients.pop();
            match self.quotients.last_mut() {
                Some(prev) => *prev += 1u32,
                None => self.a0 += 1,
            }
        }
    }

    pub fn a0(&self) -> &BigInt {
        &self.a0
    }

    pub fn quotients(&self) -> &[BigUint] {
        &self.quotients
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    pub fn len(&self) -> usize {
        self.quotients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quotients.is_empty()
    }

    /// Largest partial quotient and its 1-based index (first occurrence).
    pub fn largest_quotient(&self) -> Option<(usize, &BigUint)> {
        let mut best: Option<(usize, &BigUint)> = None;
        for (i, q) in self.quotients.iter().enumerate() {
            if best.is_none_or(|(_, b)| q > b) {
                best = Some((i + 1, q));
            }
        }
        best
    }

    /// The first `n` quotients, marked as truncated.
    pub fn prefix(&self, n: usize, precision: u64) -> Self {
        Self {
            a0: self.a0.clone(),
            quotients: self.quotients[..n.min(self.len())].to_vec(),
            tail: Tail::Truncated { precision },
        }
    }

    pub fn into_parts(self) -> (BigInt, Vec<BigUint>, Tail) {
        (self.a0, self.quotients, self.tail)
    }
}

impl fmt::Display for CfExpansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}", self.a0)?;
        for (i, q) in self.quotients.iter().enumerate() {
            let sep = if i == 0 { "; " } else { ", " };
            write!(f, "{sep}{q}")?;
        }
        f.write_str("]")
    }
}

/// Integer part and the Euclidean stream for the fractional part.
fn split_rational(r: &BigRational) -> (BigInt, Option<QuotientStream>) {
    let den = BigInt::from(r.denom().clone());
    let (a0, rem) = r.numer().div_mod_floor(&den);
    if rem.is_zero() {
        return (a0, None);
    }
    let rem = rem.into_parts().1;
    (a0, Some(QuotientStream::new(r.denom().clone(), rem)))
}

/// Complete expansion of a rational by the Euclidean algorithm. The result
/// is canonical (last quotient ≥ 2) without post-processing.
pub fn expand_rational(r: &BigRational) -> CfExpansion {
    let (a0, stream) = split_rational(r);
    let quotients = stream.map(Iterator::collect).unwrap_or_default();
    CfExpansion {
        a0,
        quotients,
        tail: Tail::Exact,
    }
}

/// Longest quotient prefix shared by every real number in `[low, high]`.
///
/// The set of reals whose expansion starts with `[a0; a1..ak]` is an
/// interval that contains each canonical rational carrying that prefix, so
/// the common prefix of the two endpoint expansions is valid for all points
/// between them.
pub fn expand_certified(low: &BigRational, high: &BigRational) -> Result<CfExpansion, ContFracError> {
    if low > high {
        return Err(ContFracError::InvalidInterval);
    }
    if low == high {
        return Ok(expand_rational(low));
    }
    let (a0_lo, stream_lo) = split_rational(low);
    let (a0_hi, stream_hi) = split_rational(high);
    if a0_lo != a0_hi {
        return Err(ContFracError::EmptyPrefix);
    }
    let mut quotients = Vec::new();
    if let (Some(mut lo), Some(mut hi)) = (stream_lo, stream_hi) {
        loop {
            match (lo.next(), hi.next()) {
                (Some(x), Some(y)) if x == y => quotients.push(x),
                _ => break,
            }
        }
    }
    let width = high - low;
    let digits = (-width.ln_abs() / std::f64::consts::LN_10).floor().max(0.0) as u64;
    Ok(CfExpansion {
        a0: a0_lo,
        quotients,
        tail: Tail::Truncated { precision: digits },
    })
}

/// Expansion of `value` continued while `Q_n^2 < 10^digits`, the stopping
/// rule used when only a `digits`-digit decimal is available. Unlike
/// [`expand_certified`] the last quotients are not guaranteed.
pub fn expand_paper_mode(value: &BigRational, digits: u64) -> CfExpansion {
    // Q_n^2 < 10^d  <=>  Q_n <= isqrt(10^d - 1)
    let limit = (pow10(digits) - 1u32).sqrt();
    let (a0, stream) = split_rational(value);
    let mut state = ConvergentState::new(&a0);
    let mut quotients = Vec::new();
    if let Some(stream) = stream {
        for q in stream {
            state.push(&q);
            if state.q() > &limit {
                break;
            }
            quotients.push(q);
        }
    }
    CfExpansion {
        a0,
        quotients,
        tail: Tail::Truncated { precision: digits },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExpansionMode {
    /// Treat the decimal as an exact rational.
    Exact,
    /// Only quotients shared by both ends of the truncation interval.
    #[default]
    Certified,
    /// `Q_n^2 < 10^d` cut-off.
    Paper,
}

pub fn expand_decimal(approx: &DecimalApprox, mode: ExpansionMode) -> Result<CfExpansion, ContFracError> {
    match mode {
        ExpansionMode::Exact => Ok(expand_rational(&approx.to_rational())),
        ExpansionMode::Certified => {
            let (lo, hi) = approx.enclosure();
            let mut cf = expand_certified(&lo, &hi)?;
            cf.tail = Tail::Truncated {
                precision: approx.precision(),
            };
            Ok(cf)
        }
        ExpansionMode::Paper => Ok(expand_paper_mode(&approx.to_rational(), approx.precision())),
    }
}

/// Reconstructs the rational value by multiplying the quotient matrices
/// `[[a, 1], [1, 0]]` in a balanced tree.
pub fn from_cf(cf: &CfExpansion) -> BigRational {
    if cf.quotients.is_empty() {
        return BigRational::from_integer(cf.a0.clone());
    }
    let [m00, _, m10, _] = matrix_product(&cf.quotients);
    // [0; a1..an] = m10 / m00
    let num = &cf.a0 * BigInt::from(m00.clone()) + BigInt::from(m10);
    BigRational::from_coprime(num, m00)
}

fn matrix_product(qs: &[BigUint]) -> [BigUint; 4] {
    const LEAF: usize = 16;
    if qs.len() <= LEAF {
        let mut m = [BigUint::one(), BigUint::zero(), BigUint::zero(), BigUint::one()];
        for a in qs {
            // m · [[a,1],[1,0]]
            let c0 = a * &m[0] + &m[1];
            let c2 = a * &m[2] + &m[3];
            m = [c0, std::mem::take(&mut m[0]), c2, std::mem::take(&mut m[2])];
        }
        return m;
    }
    let (l, r) = qs.split_at(qs.len() / 2);
    let [l00, l01, l10, l11] = matrix_product(l);
    let [r00, r01, r10, r11] = matrix_product(r);
    [
        &l00 * &r00 + &l01 * &r10,
        &l00 * &r01 + &l01 * &r11,
        &l10 * &r00 + &l11 * &r10,
        l10 * r01 + l11 * r11,
    ]
}

/// Natural logs of the approximation error and of its two-sided bound
/// `1/(Q_n(Q_n + Q_{n+1})) < |r - P_n/Q_n| ≤ 1/(Q_n Q_{n+1})`.
///
/// The upper bound is attained only when `r` is exactly the convergent
/// `P_{n+1}/Q_{n+1}`; every earlier convergent satisfies it strictly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorSandwich {
    pub n: usize,
    pub ln_lower: f64,
    pub ln_error: f64,
    pub ln_upper: f64,
}

pub fn error_bounds(
    r: &BigRational,
    series: &[Convergent],
    n: usize,
) -> Result<ErrorSandwich, ContFracError> {
    if n + 1 >= series.len() {
        return Err(ContFracError::NotEnoughConvergents {
            needed: n + 1,
            available: series.len(),
        });
    }
    let (cur, next) = (&series[n], &series[n + 1]);
    let approx = BigRational::from_coprime(cur.p.clone(), cur.q.clone());
    let diff = r - &approx;
    if diff.is_zero() {
        return Err(ContFracError::ExactHit { n });
    }
    let ln_q = ln_biguint(&cur.q);
    Ok(ErrorSandwich {
        n,
        ln_lower: -(ln_q + ln_biguint(&(&cur.q + &next.q))),
        ln_error: diff.ln_abs(),
        ln_upper: -(ln_q + ln_biguint(&next.q)),
    })
}

/// `[0; t1, ..., tn]` and its decimal value to `digits` places.
///
/// Every infinite continuation of the quotient list lies between
/// `P_n/Q_n` and `(P_n + P_{n-1})/(Q_n + Q_{n-1})`; digits are returned only
/// if `1/Q_n^2 ≤ 10^{-digits}` and both ends of that interval truncate to
/// the same decimal.
pub fn cf_from_quotient_sequence(
    terms: &[BigUint],
    digits: u64,
) -> Result<(CfExpansion, DecimalApprox), ContFracError> {
    let cf = CfExpansion::new(
        BigInt::zero(),
        terms.to_vec(),
        Tail::Truncated { precision: digits },
    )?;
    let mut state = ConvergentState::new(cf.a0());
    for t in terms {
        state.push(t);
    }
    let q2 = state.q() * state.q();
    let certified = if q2.is_zero() {
        0
    } else {
        (ln_biguint(&q2) / std::f64::consts::LN_10).floor() as u64
    };
    if q2 < pow10(digits) {
        return Err(ContFracError::PrecisionNotCertified {
            requested: digits,
            certified,
        });
    }
    let (p_prev, q_prev) = state.previous();
    let near = BigRational::from_coprime(state.p().clone(), state.q().clone());
    let far = BigRational::new(state.p() + p_prev, state.q() + q_prev);
    let near_dec = to_decimal(&near, digits);
    if near_dec != to_decimal(&far, digits) {
        return Err(ContFracError::DigitsUndetermined {
            requested: digits,
            terms: terms.len(),
        });
    }
    Ok((cf, near_dec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::RandBigInt;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rat(s: &str) -> BigRational {
        s.parse().unwrap()
    }

    fn qs(c: &CfExpansion) -> Vec<u64> {
        c.quotients().iter().map(|q| u64::try_from(q).unwrap()).collect()
    }

    /// Textbook expansion with rational floor/reciprocal steps; shares no
    /// code with the Euclidean engine.
    fn naive_expand(r: &BigRational) -> (BigInt, Vec<BigUint>) {
        let a0 = r.floor();
        let mut x = r - &BigRational::from_integer(a0.clone());
        let mut out = Vec::new();
        while !x.is_zero() {
            let (n, d) = x.clone().into_parts();
            let inv = BigRational::new(BigInt::from(d), n.into_parts().1);
            let a = inv.floor();
            out.push(a.clone().into_parts().1);
            x = &inv - &BigRational::from_integer(a);
        }
        (a0, out)
    }

    #[test]
    fn hand_examples() {
        let c = expand_rational(&rat("331/651"));
        assert_eq!(c.a0(), &BigInt::zero());
        assert_eq!(qs(&c), vec![1, 1, 29, 11]);
        assert_eq!(c.largest_quotient().map(|(i, q)| (i, u64::try_from(q).unwrap())), Some((3, 29)));
        let c = expand_rational(&rat("7"));
        assert!(c.is_empty());
        assert_eq!(c.a0(), &BigInt::from(7));
        let c = expand_rational(&rat("-7/3"));
        assert_eq!(c.a0(), &BigInt::from(-3));
        assert_eq!(qs(&c), vec![1, 2]);
    }

    #[test]
    fn canonical_form() {
        let c = CfExpansion::new(0.into(), vec![2u32.into(), 1u32.into()], Tail::Exact).unwrap();
        assert_eq!(qs(&c), vec![3]);
        let c = CfExpansion::new(4.into(), vec![1u32.into()], Tail::Exact).unwrap();
        assert_eq!((c.a0().clone(), c.len()), (BigInt::from(5), 0));
        let c = CfExpansion::new(0.into(), vec![2u32.into(), 1u32.into()], Tail::Truncated { precision: 3 }).unwrap();
        assert_eq!(qs(&c), vec![2, 1]);
        assert!(matches!(
            CfExpansion::new(0.into(), vec![2u32.into(), 0u32.into()], Tail::Exact),
            Err(ContFracError::ZeroQuotient { index: 2 })
        ));
    }

    #[test]
    fn reconstruction() {
        let c = CfExpansion::new(0.into(), [1u32, 1, 29, 11].map(BigUint::from).to_vec(), Tail::Exact).unwrap();
        assert_eq!(from_cf(&c), rat("331/651"));
        let c = CfExpansion::new(0.into(), vec![2u32.into()], Tail::Exact).unwrap();
        assert_eq!(from_cf(&c), rat("1/2"));
        let c = CfExpansion::new(0.into(), [3u32, 7, 31].map(BigUint::from).to_vec(), Tail::Exact).unwrap();
        assert_eq!(from_cf(&c), rat("218/685"));
    }

    #[test]
    fn certified_examples() {
        let r = rat("331/651");
        let eps = BigRational::pow10_neg(20);
        let c = expand_certified(&(&r - &eps), &(&r + &eps)).unwrap();
        let got = qs(&c);
        assert!(got == vec![1, 1, 29, 11] || got == vec![1, 1, 29], "{got:?}");

        // Around 1/3 the interval straddles the boundary between the a1 = 3
        // and a1 = 2 cylinders, so only a0 is certified.
        let c = expand_certified(&rat("333/1000"), &rat("334/1000")).unwrap();
        assert_eq!(c.a0(), &BigInt::zero());
        assert!(c.is_empty());

        let c = expand_certified(&r, &r).unwrap();
        assert_eq!(c.tail(), Tail::Exact);
        assert_eq!(qs(&c), vec![1, 1, 29, 11]);

        assert!(matches!(
            expand_certified(&rat("9/10"), &rat("11/10")),
            Err(ContFracError::EmptyPrefix)
        ));
        assert!(matches!(
            expand_certified(&rat("1/2"), &rat("1/3")),
            Err(ContFracError::InvalidInterval)
        ));
    }

    #[test]
    fn paper_mode_cutoff() {
        let c = expand_paper_mode(&rat("5084485407/10000000000"), 10);
        let mut state = ConvergentState::new(c.a0());
        for q in c.quotients() {
            state.push(q);
        }
        assert!(state.q() * state.q() < pow10(10));
        assert!(!c.is_empty());
    }

    #[test]
    fn error_bound_examples() {
        let u = rat("0.31824815840584486942596202748140694243806236564");
        let c = CfExpansion::new(0.into(), [3u32, 7, 31, 127].map(BigUint::from).to_vec(), Tail::Exact).unwrap();
        let series: Vec<_> = convergents(&c).collect();
        let s = error_bounds(&u, &series, 3).unwrap();
        assert!(s.ln_upper < -(685f64 * 685.0).ln());
        assert!(s.ln_lower < s.ln_error && s.ln_error < s.ln_upper);

        let r = rat("331/651");
        let full: Vec<_> = convergents(&expand_rational(&r)).collect();
        assert!(matches!(
            error_bounds(&r, &full, 4),
            Err(ContFracError::NotEnoughConvergents { .. })
        ));
        let one_more = vec![full[4].clone(), full[4].clone()];
        assert!(matches!(error_bounds(&r, &one_more, 0), Err(ContFracError::ExactHit { n: 0 })));
    }

    #[test]
    fn sandwich_on_random_rational() {
        let mut rng = ChaCha8Rng::seed_from_u64(200);
        let num = rng.gen_biguint(660);
        let den = rng.gen_biguint(664) + 1u32;
        let r = BigRational::new(BigInt::from(num), den);
        let cf = expand_rational(&r);
        let series: Vec<_> = convergents(&cf).collect();
        let last = series.len() - 1;
        for n in 0..last {
            let k = &series[n];
            let next = &series[n + 1];
            let diff = (&r - &BigRational::new(k.p.clone(), k.q.clone())).abs();
            let lower = BigRational::new(BigInt::one(), &k.q * (&k.q + &next.q));
            let upper = BigRational::new(BigInt::one(), &k.q * &next.q);
            assert!(lower < diff);
            if n + 1 < last {
                assert!(diff < upper);
            } else {
                assert_eq!(diff, upper);
            }
        }
    }

    #[test]
    fn quotient_sequence_decimal() {
        let t: Vec<BigUint> = [3u32, 7, 31].map(BigUint::from).to_vec();
        let (cf, dec) = cf_from_quotient_sequence(&t, 5).unwrap();
        assert_eq!(from_cf(&cf), rat("218/685"));
        assert_eq!(dec.to_string(), "0.31824");
        assert!(matches!(
            cf_from_quotient_sequence(&t, 6),
            Err(ContFracError::PrecisionNotCertified { .. })
        ));
        let (_, dec) = cf_from_quotient_sequence(&[BigUint::from(3u32)], 0).unwrap();
        assert_eq!(dec.to_string(), "0");
    }

    #[test]
    fn random_roundtrip_against_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for bits in [8u64, 64, 130, 700] {
            for _ in 0..5 {
                let num = BigInt::from(rng.gen_biguint(bits)) - BigInt::from(rng.gen_biguint(bits));
                let den = rng.gen_biguint(bits) + 1u32;
                let r = BigRational::new(num, den);
                let c = expand_rational(&r);
                let (a0, q) = naive_expand(&r);
                assert_eq!(c.a0(), &a0);
                assert_eq!(c.quotients(), &q[..]);
                assert_eq!(from_cf(&c), r);
            }
        }
    }

    proptest! {
        #[test]
        fn certified_is_prefix_of_interior_points(
            a in 1u64..1_000_000_000_000, b in 1u64..1_000_000_000_000,
            w in 1u64..1_000_000, t in 0u64..=1000,
        ) {
            let lo = BigRational::new(BigInt::from(a), BigUint::from(b));
            let width = BigRational::new(BigInt::from(w), BigUint::from(10u64).pow(9));
            let hi = &lo + &width;
            let frac = BigRational::new(BigInt::from(t), BigUint::from(1000u32));
            let mid = &lo + &(&width * &frac);
            let full = expand_rational(&mid);
            let cert = match expand_certified(&lo, &hi) {
                Err(ContFracError::EmptyPrefix) => {
                    // Only an interval containing an integer has no common prefix.
                    prop_assert!(lo.floor() != hi.floor());
                    return Ok(());
                }
                r => r.unwrap(),
            };
            prop_assert_eq!(cert.a0(), full.a0());
            prop_assert!(cert.len() <= full.len());
            prop_assert_eq!(cert.quotients(), &full.quotients()[..cert.len()]);
        }

        #[test]
        fn certified_prefix_of_paper_mode(scaled in 1u64..u64::MAX, d in 5u64..19) {
            let approx = DecimalApprox::parse(&format!("0.{:0>width$}", scaled % 10u64.pow(d as u32), width = d as usize)).unwrap();
            prop_assume!(!approx.scaled().is_zero());
            let cert = expand_decimal(&approx, ExpansionMode::Certified).unwrap();
            let paper = expand_decimal(&approx, ExpansionMode::Paper).unwrap();
            prop_assert!(cert.len() <= paper.len());
            prop_assert_eq!(cert.quotients(), &paper.quotients()[..cert.len()]);
        }
    }
}
