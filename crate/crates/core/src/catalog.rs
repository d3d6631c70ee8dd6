//! Mersenne exponent catalog, integer sequence generators and the Wagstaff
//! growth model.

use std::fmt;
use std::path::Path;

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::fit::{least_squares, FitError, LinearFit};

/// The checked-in exponent list, embedded byte for byte.
pub const DEFAULT_EXPONENTS: &str = include_str!("../data/mersenne_exponents.txt");

/// Exponents above this value were not covered by an exhaustive search when
/// the list was frozen.
pub const FULLY_SEARCHED_UP_TO: u64 = 20_996_011;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// The eight-decimal value of γ quoted alongside the growth model. Constants
/// derived from it (notably `c`) are published to ten digits computed from
/// this truncation.
pub const QUOTED_GAMMA: f64 = 0.577_215_66;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("line {line}: `{token}` is not a positive integer")]
    InvalidToken { line: usize, token: String },
    #[error("line {line}: exponent {value} must be at least 2")]
    TooSmall { line: usize, value: u64 },
    #[error("line {line}: exponent {value} duplicates the previous entry")]
    Duplicate { line: usize, value: u64 },
    #[error("line {line}: exponent {value} is not larger than previous entry {previous}")]
    NonIncreasing {
        line: usize,
        value: u64,
        previous: u64,
    },
    #[error("catalog is empty")]
    Empty,
    #[error("requested {requested} terms but only {available} are available")]
    CountExceedsCatalog { requested: usize, available: usize },
    #[error("custom sequence term {index} is not strictly increasing or is below 2")]
    InvalidCustomTerm { index: usize },
    #[error("sequence count must be at least 1")]
    ZeroCount,
    #[error("cannot read catalog {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Fit(#[from] FitError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchStatus {
    Verified,
    IntervalNotSearched,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub exponent: u64,
    pub status: SearchStatus,
}

/// Ordered list of Mersenne prime exponents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MersenneCatalog {
    entries: Vec<CatalogEntry>,
}

impl MersenneCatalog {
    /// The embedded 47-entry list.
    pub fn embedded() -> Self {
        Self::parse(DEFAULT_EXPONENTS).expect("embedded exponent list is valid")
    }

    /// Reads a catalog from a file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, CatalogError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| CatalogError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Parses one or more integers per line, separated by whitespace or
    /// commas. Everything after `#` on a line is ignored.
    pub fn parse(text: &str) -> Result<Self, CatalogError> {
        let mut entries: Vec<CatalogEntry> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("");
            for token in body
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
            {
                let value: u64 = token.parse().map_err(|_| CatalogError::InvalidToken {
                    line,
                    token: token.to_string(),
                })?;
                if value < 2 {
                    return Err(CatalogError::TooSmall { line, value });
                }
                if let Some(prev) = entries.last() {
                    if value == prev.exponent {
                        return Err(CatalogError::Duplicate { line, value });
                    }
                    if value < prev.exponent {
                        return Err(CatalogError::NonIncreasing {
                            line,
                            value,
                            previous: prev.exponent,
                        });
                    }
                }
                entries.push(CatalogEntry {
                    exponent: value,
                    status: status_of(value),
                });
            }
        }
        if entries.is_empty() {
            return Err(CatalogError::Empty);
        }
        Ok(Self { entries })
    }

    pub fn from_exponents(exponents: &[u64]) -> Result<Self, CatalogError> {
        let text = exponents
            .iter()
            .map(u64::to_string)
            .collect::<Vec<_>>()
            .join("\n");
        Self::parse(&text)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[CatalogEntry] {
        &self.entries
    }

    pub fn exponents(&self) -> impl ExactSizeIterator<Item = u64> + '_ {
        self.entries.iter().map(|e| e.exponent)
    }

    pub fn max_exponent(&self) -> u64 {
        self.entries.last().map(|e| e.exponent).unwrap_or(0)
    }

    /// First `count` exponents, or an error if the catalog is shorter.
    pub fn prefix(&self, count: usize) -> Result<Vec<u64>, CatalogError> {
        if count == 0 {
            return Err(CatalogError::ZeroCount);
        }
        if count > self.len() {
            return Err(CatalogError::CountExceedsCatalog {
                requested: count,
                available: self.len(),
            });
        }
        Ok(self.exponents().take(count).collect())
    }

    /// SHA-256 of the canonical one-exponent-per-line rendering.
    pub fn checksum(&self) -> String {
        let mut hasher = Sha256::new();
        for p in self.exponents() {
            hasher.update(p.to_string().as_bytes());
            hasher.update(b"\n");
        }
        hex::encode(hasher.finalize())
    }
}

fn status_of(exponent: u64) -> SearchStatus {
    if exponent > FULLY_SEARCHED_UP_TO {
        SearchStatus::IntervalNotSearched
    } else {
        SearchStatus::Verified
    }
}

/// `2^p - 1`.
///
/// # Panics
/// If `p < 2`.
pub fn mersenne_number(p: u64) -> BigUint {
    assert!(p >= 2, "Mersenne exponent must be at least 2, got {p}");
    (BigUint::one() << p) - 1u32
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Mod4Census {
    pub one_mod_4: usize,
    pub three_mod_4: usize,
    pub other: usize,
}

pub fn mod4_census(catalog: &MersenneCatalog) -> Mod4Census {
    let mut census = Mod4Census {
        one_mod_4: 0,
        three_mod_4: 0,
        other: 0,
    };
    for p in catalog.exponents() {
        match p % 4 {
            1 => census.one_mod_4 += 1,
            3 => census.three_mod_4 += 1,
            _ => census.other += 1,
        }
    }
    census
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "terms")]
pub enum SequenceKind {
    /// `2^p - 1` over catalog exponents.
    Mersenne,
    /// `2^p` over catalog exponents.
    Dyadic,
    /// `2^{F_k}` over the distinct Fibonacci numbers 1, 2, 3, 5, 8, ...
    FibonacciPower,
    /// `2^{k!}` for k = 1, 2, 3, ...
    FactorialPower,
    /// Explicit terms, given in decimal.
    Custom(Vec<String>),
}

impl SequenceKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Mersenne => "mersenne",
            Self::Dyadic => "dyadic",
            Self::FibonacciPower => "fibonacci-power",
            Self::FactorialPower => "factorial-power",
            Self::Custom(_) => "custom",
        }
    }
}

impl fmt::Display for SequenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceSpec {
    pub kind: SequenceKind,
    pub count: usize,
}

impl SequenceSpec {
    pub fn new(kind: SequenceKind, count: usize) -> Self {
        Self { kind, count }
    }

    /// Exponents `e_k` such that term k is `2^{e_k}` (or `2^{e_k} - 1`).
    /// Custom sequences have no exponent form and return `None`.
    pub fn exponents(&self, catalog: &MersenneCatalog) -> Result<Option<Vec<u64>>, CatalogError> {
        if self.count == 0 {
            return Err(CatalogError::ZeroCount);
        }
        Ok(match &self.kind {
            SequenceKind::Mersenne | SequenceKind::Dyadic => Some(catalog.prefix(self.count)?),
            SequenceKind::FibonacciPower => {
                let (mut a, mut b) = (1u64, 2u64);
                let mut out = Vec::with_capacity(self.count);
                for _ in 0..self.count {
                    out.push(a);
                    let next = a.checked_add(b).ok_or(CatalogError::CountExceedsCatalog {
                        requested: self.count,
                        available: out.len(),
                    })?;
                    (a, b) = (b, next);
                }
                Some(out)
            }
            SequenceKind::FactorialPower => {
                let mut out = Vec::with_capacity(self.count);
                let mut fact = 1u64;
                for k in 1..=self.count as u64 {
                    fact = fact.checked_mul(k).ok_or(CatalogError::CountExceedsCatalog {
                        requested: self.count,
                        available: out.len(),
                    })?;
                    out.push(fact);
                }
                Some(out)
            }
            SequenceKind::Custom(_) => None,
        })
    }

    /// Generates the terms, all strictly increasing and at least 2.
    pub fn terms(&self, catalog: &MersenneCatalog) -> Result<Vec<BigUint>, CatalogError> {
        if let SequenceKind::Custom(raw) = &self.kind {
            if self.count == 0 {
                return Err(CatalogError::ZeroCount);
            }
            if self.count > raw.len() {
                return Err(CatalogError::CountExceedsCatalog {
                    requested: self.count,
                    available: raw.len(),
                });
            }
            let two = BigUint::from(2u32);
            let mut out: Vec<BigUint> = Vec::with_capacity(self.count);
            for (index, text) in raw.iter().take(self.count).enumerate() {
                let t: BigUint = text
                    .trim()
                    .parse()
                    .map_err(|_| CatalogError::InvalidCustomTerm { index })?;
                if t < two || out.last().is_some_and(|prev| &t <= prev) {
                    return Err(CatalogError::InvalidCustomTerm { index });
                }
                out.push(t);
            }
            return Ok(out);
        }
        let exponents = self
            .exponents(catalog)?
            .expect("non-custom kinds have exponents");
        Ok(match self.kind {
            SequenceKind::Mersenne => exponents.into_iter().map(mersenne_number).collect(),
            _ => exponents
                .into_iter()
                .map(|e| BigUint::one() << e)
                .collect(),
        })
    }
}

/// `log₂ log₂ M_n ≈ n·e^{-γ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WagstaffModel {
    pub gamma: f64,
}

impl Default for WagstaffModel {
    fn default() -> Self {
        Self { gamma: EULER_GAMMA }
    }
}

impl WagstaffModel {
    pub fn with_gamma(gamma: f64) -> Self {
        Self { gamma }
    }

    pub fn e_neg_gamma(&self) -> f64 {
        (-self.gamma).exp()
    }

    /// Predicted `log₂ log₂ M_n`.
    pub fn log2_log2(&self, n: f64) -> f64 {
        n * self.e_neg_gamma()
    }

    /// The model expressed on the fit's natural-log axis:
    /// `n·e^{-γ}·ln 2 - ln ln 2`.
    pub fn model_line(&self) -> (f64, f64) {
        let ln2 = std::f64::consts::LN_2;
        (self.e_neg_gamma() * ln2, -ln2.ln())
    }

    /// `2^{e^{-γ}} - 1`, the predicted growth exponent of successive
    /// quotients.
    pub fn epsilon(&self) -> f64 {
        self.e_neg_gamma().exp2() - 1.0
    }

    /// `c = 1 / (2^{e^{-γ}} - 1)`.
    pub fn c(&self) -> f64 {
        1.0 / self.epsilon()
    }
}

/// Which ordinate the growth fit uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitOrdinate {
    /// `ln log₂ 2^p = ln p`; reproduces the published coefficients.
    #[default]
    LnLog2,
    /// `ln ln (2^p - 1)`, evaluated exactly.
    LnLnMersenne,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WagstaffFit {
    pub slope: f64,
    pub intercept: f64,
    pub residuals: Vec<f64>,
    pub model_slope: f64,
    pub model_intercept: f64,
}

/// Least-squares line through `(n, y_n)` with `n` 1-based.
pub fn wagstaff_fit(
    catalog: &MersenneCatalog,
    ordinate: FitOrdinate,
    model: &WagstaffModel,
) -> Result<WagstaffFit, CatalogError> {
    let xs: Vec<f64> = (1..=catalog.len()).map(|n| n as f64).collect();
    let ys: Vec<f64> = catalog
        .exponents()
        .map(|p| match ordinate {
            FitOrdinate::LnLog2 => (p as f64).ln(),
            FitOrdinate::LnLnMersenne => ln_mersenne(p).ln(),
        })
        .collect();
    let LinearFit {
        slope,
        intercept,
        residuals,
    } = least_squares(&xs, &ys)?;
    let (model_slope, model_intercept) = model.model_line();
    Ok(WagstaffFit {
        slope,
        intercept,
        residuals,
        model_slope,
        model_intercept,
    })
}

/// `ln(2^p - 1)` without materialising the integer.
pub fn ln_mersenne(p: u64) -> f64 {
    let ln2 = std::f64::consts::LN_2;
    p as f64 * ln2 + (-(-(p as f64)).exp2()).ln_1p()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedded_catalog_facts() {
        let cat = MersenneCatalog::embedded();
        assert_eq!(cat.len(), 47);
        assert_eq!(cat.exponents().take(3).collect::<Vec<_>>(), vec![2, 3, 5]);
        assert_eq!(cat.max_exponent(), 43_112_609);
        let unsearched = cat
            .entries()
            .iter()
            .filter(|e| e.status == SearchStatus::IntervalNotSearched)
            .count();
        assert_eq!(unsearched, 7);
    }

    #[test]
    fn parse_prefix_and_errors() {
        let cat = MersenneCatalog::parse("2,3,5").unwrap();
        assert_eq!(cat.len(), 3);
        let cat = MersenneCatalog::parse("# header\n2\n\n3 # inline\n5\n").unwrap();
        assert_eq!(cat.len(), 3);

        match MersenneCatalog::parse("5,3") {
            Err(CatalogError::NonIncreasing {
                line: 1,
                value: 3,
                previous: 5,
            }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            MersenneCatalog::parse("2\n3\n3"),
            Err(CatalogError::Duplicate { line: 3, value: 3 })
        ));
        assert!(matches!(
            MersenneCatalog::parse("2\nseven"),
            Err(CatalogError::InvalidToken { line: 2, .. })
        ));
        assert!(matches!(
            MersenneCatalog::parse("1"),
            Err(CatalogError::TooSmall { .. })
        ));
        assert!(matches!(
            MersenneCatalog::parse("# nothing"),
            Err(CatalogError::Empty)
        ));
    }

    #[test]
    fn mersenne_numbers() {
        assert_eq!(mersenne_number(2), BigUint::from(3u32));
        assert_eq!(mersenne_number(5), BigUint::from(31u32));
        assert_eq!(mersenne_number(13), BigUint::from(8191u32));
        let m = mersenne_number(521);
        assert_eq!(m.bits(), 521);
        assert_eq!(m.count_ones(), 521);
    }

    #[test]
    fn census() {
        let c = mod4_census(&MersenneCatalog::embedded());
        assert_eq!((c.one_mod_4, c.three_mod_4, c.other), (27, 19, 1));
        let c = mod4_census(&MersenneCatalog::from_exponents(&[2]).unwrap());
        assert_eq!((c.one_mod_4, c.three_mod_4, c.other), (0, 0, 1));
        let c = mod4_census(&MersenneCatalog::from_exponents(&[3, 5, 13]).unwrap());
        assert_eq!((c.one_mod_4, c.three_mod_4, c.other), (2, 1, 0));
    }

    #[test]
    fn growth_fit_matches_published_line() {
        let fit = wagstaff_fit(
            &MersenneCatalog::embedded(),
            FitOrdinate::LnLog2,
            &WagstaffModel::default(),
        )
        .unwrap();
        assert!((fit.slope - 0.3854).abs() < 5e-4, "{}", fit.slope);
        assert!((fit.intercept - 0.6691).abs() < 5e-3, "{}", fit.intercept);
        assert!((fit.model_slope - 0.3892).abs() < 5e-4);
        assert!((fit.model_intercept - 0.3665).abs() < 5e-4);
        assert_eq!(fit.residuals.len(), 47);
    }

    #[test]
    fn two_point_fit_interpolates() {
        let cat = MersenneCatalog::from_exponents(&[2, 3]).unwrap();
        let fit = wagstaff_fit(&cat, FitOrdinate::LnLnMersenne, &WagstaffModel::default()).unwrap();
        let y1 = 3f64.ln().ln();
        let y2 = 7f64.ln().ln();
        assert!((fit.slope - (y2 - y1)).abs() < 1e-12);
        assert!((fit.intercept - (2.0 * y1 - y2)).abs() < 1e-12);
        assert!(fit.residuals.iter().all(|r| r.abs() < 1e-12));
    }

    #[test]
    fn ln_ln_mersenne_increases() {
        let ys: Vec<f64> = MersenneCatalog::embedded()
            .exponents()
            .map(|p| ln_mersenne(p).ln())
            .collect();
        assert!(ys.windows(2).all(|w| w[0] < w[1]));
        assert!((ln_mersenne(2) - 3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn model_constants() {
        let exact = WagstaffModel::default();
        assert!((exact.c() - 2.101_893_945_335_2).abs() < 1e-12);
        let quoted = WagstaffModel::with_gamma(QUOTED_GAMMA);
        assert!((quoted.c() - 2.101_893_933).abs() < 1e-9);
        assert!((exact.epsilon() - 0.475_761_397).abs() < 1e-9);
        assert!((exact.epsilon() * exact.c() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sequences() {
        let cat = MersenneCatalog::embedded();
        let m = SequenceSpec::new(SequenceKind::Mersenne, 3).terms(&cat).unwrap();
        assert_eq!(m, vec![3u32.into(), 7u32.into(), 31u32.into()]);
        let d = SequenceSpec::new(SequenceKind::Dyadic, 2).terms(&cat).unwrap();
        assert_eq!(d, vec![4u32.into(), 8u32.into()]);
        let f = SequenceSpec::new(SequenceKind::FibonacciPower, 5).exponents(&cat).unwrap();
        assert_eq!(f, Some(vec![1, 2, 3, 5, 8]));
        let f = SequenceSpec::new(SequenceKind::FactorialPower, 4).exponents(&cat).unwrap();
        assert_eq!(f, Some(vec![1, 2, 6, 24]));
        assert!(matches!(
            SequenceSpec::new(SequenceKind::Mersenne, 48).terms(&cat),
            Err(CatalogError::CountExceedsCatalog { .. })
        ));
        let custom = SequenceKind::Custom(vec!["5".into(), "3".into()]);
        assert!(SequenceSpec::new(custom, 2).terms(&cat).is_err());
        for kind in [
            SequenceKind::Mersenne,
            SequenceKind::Dyadic,
            SequenceKind::FibonacciPower,
            SequenceKind::FactorialPower,
        ] {
            let t = SequenceSpec::new(kind, 7).terms(&cat).unwrap();
            assert!(t[0] >= BigUint::from(2u32));
            assert!(t.windows(2).all(|w| w[0] < w[1]));
        }
    }
}
