//! Running Khinchin means, Lévy roots, sign changes, records and
//! Gauss–Kuzmin histograms over partial-quotient streams.

use std::f64::consts::{LN_2, PI};
use std::fmt::Write as _;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contfrac::{CfExpansion, Convergent, ConvergentState};
use crate::exact::ln_biguint;
use crate::fit::{power_law, FitError, PowerLaw};

/// Published value of Khinchin's constant, used only as a cross-check of
/// [`khinchin_constant`].
pub const KHINCHIN_PUBLISHED: f64 = 2.685_452_001_065_306_4;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("target error {0:e} is outside (1e-12, 1e-3)")]
    TargetOutOfRange(f64),
    #[error("tail bound did not reach {target:e} within {terms} terms")]
    Unreachable { target: f64, terms: u64 },
    #[error("series is empty")]
    Empty,
    #[error("stride must be at least 1")]
    ZeroStride,
    #[error(transparent)]
    Fit(#[from] FitError),
}

/// Khinchin's constant with a certified error bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KhinchinEstimate {
    pub value: f64,
    pub error_bound: f64,
    /// Number of factors summed directly.
    pub terms: u64,
}

fn khinchin_term(m: f64) -> f64 {
    m.log2() * (1.0 / (m * (m + 2.0))).ln_1p()
}

/// `∫_a^∞ ln x / (x+1)^2 dx`.
fn tail_integral(a: f64) -> f64 {
    a.ln() / (a + 1.0) + (1.0 / a).ln_1p()
}

/// `ln K = Σ_{m≥2} log₂ m · ln(1 + 1/(m(m+2)))`.
///
/// The first `M` terms are summed directly. With `g(x) = ln x/(x+1)^2` the
/// tail `Σ_{m>M}` lies in `[(G(M+1) - (3 ln M + 1)/(18 M^3))/ln 2,
/// (1 + 1/(M(M+2))) G(M)/ln 2]`, where `G(a) = ∫_a^∞ g`. The upper end uses
/// `ln(1+t) ≤ t` and `g` decreasing; the lower end uses `ln(1+t) ≥ t - t²/2`
/// and the midpoint rule on the convex tail of `g`. `M` is doubled until the
/// bracket (plus a summation roundoff allowance) meets the target.
pub fn khinchin_constant(target_error: f64) -> Result<KhinchinEstimate, StatsError> {
    if !(target_error > 1e-12 && target_error < 1e-3) {
        return Err(StatsError::TargetOutOfRange(target_error));
    }
    const MAX_TERMS: u64 = 1 << 26;
    const ROUNDOFF: f64 = 1e-14;
    let mut sum = KahanSum::default();
    let mut m: u64 = 1;
    let mut limit: u64 = 1024;
    loop {
        while m < limit {
            m += 1;
            sum.add(khinchin_term(m as f64));
        }
        let mf = m as f64;
        let upper = (1.0 + 1.0 / (mf * (mf + 2.0))) * tail_integral(mf) / LN_2;
        let lower = (tail_integral(mf + 1.0) - (3.0 * mf.ln() + 1.0) / (18.0 * mf.powi(3))) / LN_2;
        let value = (sum.value() + 0.5 * (upper + lower)).exp();
        let error_bound = value * (0.5 * (upper - lower) + ROUNDOFF);
        if error_bound <= target_error {
            return Ok(KhinchinEstimate {
                value,
                error_bound,
                terms: m,
            });
        }
        if limit >= MAX_TERMS {
            return Err(StatsError::Unreachable {
                target: target_error,
                terms: m,
            });
        }
        limit *= 2;
    }
}

/// `∏_{m=1}^{M} (1 + 1/(m(m+2)))^{log₂ m}`; increases to K.
pub fn khinchin_partial_product(m_max: u64) -> f64 {
    let mut s = KahanSum::default();
    for m in 2..=m_max {
        s.add(khinchin_term(m as f64));
    }
    s.value().exp()
}

/// `e^{π²/(12 ln 2)}`.
pub fn levy_constant() -> f64 {
    (PI * PI / (12.0 * LN_2)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RefConst {
    pub value: f64,
    /// Significant digits the value is trusted to.
    pub digits: u32,
}

/// The reference limits the running statistics are compared with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReferenceConstants {
    pub khinchin: RefConst,
    pub levy: RefConst,
    pub gamma: RefConst,
}

impl ReferenceConstants {
    pub fn compute() -> Self {
        let k = khinchin_constant(1e-11).expect("1e-11 is in range");
        Self {
            khinchin: RefConst {
                value: k.value,
                digits: (-(k.error_bound / k.value).log10()).floor() as u32,
            },
            levy: RefConst {
                value: levy_constant(),
                digits: 15,
            },
            gamma: RefConst {
                value: crate::catalog::EULER_GAMMA,
                digits: 16,
            },
        }
    }
}

/// Compensated summation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatPoint {
    pub n: u64,
    pub value: f64,
    /// Cumulative sign changes of `value - reference` up to `n`.
    pub sign_changes: Option<u64>,
}

/// `n → value` with enough metadata to name and reproduce the file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatSeries {
    pub statistic: String,
    pub source: String,
    pub precision: Option<u64>,
    pub reference: Option<f64>,
    pub points: Vec<StatPoint>,
}

impl StatSeries {
    pub fn new(statistic: impl Into<String>, source: impl Into<String>) -> Self {
        Self {
            statistic: statistic.into(),
            source: source.into(),
            precision: None,
            reference: None,
            points: Vec::new(),
        }
    }

    pub fn push(&mut self, n: u64, value: f64) {
        self.points.push(StatPoint {
            n,
            value,
            sign_changes: None,
        });
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.value)
    }

    pub fn last(&self) -> Option<&StatPoint> {
        self.points.last()
    }

    /// Attaches a reference value and fills in cumulative sign changes.
    pub fn with_reference(mut self, reference: f64) -> Self {
        let counts = sign_changes(&self, reference);
        for (p, c) in self.points.iter_mut().zip(counts) {
            p.sign_changes = Some(c);
        }
        self.reference = Some(reference);
        self
    }

    /// `<source>_<statistic>.csv`
    pub fn file_stem(&self) -> String {
        format!("{}_{}", self.source, self.statistic)
    }

    /// Header `n,value` or `n,value,reference,delta,sign_changes`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        match self.reference {
            None => {
                out.push_str("n,value\n");
                for p in &self.points {
                    let _ = writeln!(out, "{},{}", p.n, fmt_real(p.value));
                }
            }
            Some(r) => {
                out.push_str("n,value,reference,delta,sign_changes\n");
                for p in &self.points {
                    let sc = p.sign_changes.map(|c| c.to_string()).unwrap_or_default();
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{}",
                        p.n,
                        fmt_real(p.value),
                        fmt_real(r),
                        fmt_real(p.value - r),
                        sc
                    );
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("series serializes")
    }
}

/// Shortest round-trip decimal; scientific form outside `[1e-5, 1e16)`.
pub fn fmt_real(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Cumulative count of strict sign changes of `value - reference`. Exact
/// hits neither count nor reset the last seen sign.
pub fn sign_changes(series: &StatSeries, reference: f64) -> Vec<u64> {
    let mut tracker = Tracker::new(reference);
    series
        .points
        .iter()
        .map(|p| {
            tracker.observe(p.value);
            tracker.sign_changes
        })
        .collect()
}

/// Indices `n` at which `|value - reference|` is strictly below every
/// earlier value.
pub fn record_indices(series: &StatSeries, reference: f64) -> Vec<u64> {
    let mut tracker = Tracker::new(reference);
    series
        .points
        .iter()
        .filter(|p| tracker.observe(p.value).record)
        .map(|p| p.n)
        .collect()
}

/// Streaming sign-change and record detector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tracker {
    reference: f64,
    last_sign: i8,
    sign_changes: u64,
    best: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Observation {
    pub sign_change: bool,
    pub record: bool,
}

impl Tracker {
    pub fn new(reference: f64) -> Self {
        Self {
            reference,
            last_sign: 0,
            sign_changes: 0,
            best: None,
        }
    }

    pub fn observe(&mut self, value: f64) -> Observation {
        let delta = value - self.reference;
        let sign = if delta > 0.0 {
            1
        } else if delta < 0.0 {
            -1
        } else {
            0
        };
        let mut sign_change = false;
        if sign != 0 {
            if self.last_sign != 0 && sign != self.last_sign {
                self.sign_changes += 1;
                sign_change = true;
            }
            self.last_sign = sign;
        }
        let dist = delta.abs();
        let record = self.best.is_none_or(|b| dist < b);
        if record {
            self.best = Some(dist);
        }
        Observation {
            sign_change,
            record,
        }
    }

    pub fn sign_changes(&self) -> u64 {
        self.sign_changes
    }
}

/// `K(n) = exp((1/n) Σ_{k≤n} ln a_k)` for `n = 1..len`, every `stride`-th
/// point plus `n = 1` and the final `n`.
pub fn running_khinchin(cf: &CfExpansion, stride: u64) -> Result<StatSeries, StatsError> {
    if stride == 0 {
        return Err(StatsError::ZeroStride);
    }
    let mut series = StatSeries::new("khinchin", "cf");
    let mut sum = KahanSum::default();
    let len = cf.len() as u64;
    for (i, a) in cf.quotients().iter().enumerate() {
        let n = i as u64 + 1;
        sum.add(ln_biguint(a));
        if n == 1 || n.is_multiple_of(stride) || n == len {
            series.push(n, (sum.value() / n as f64).exp());
        }
    }
    Ok(series)
}

/// `L(n) = exp(ln Q_n / n)` for every convergent with `n ≥ 1`, thinned by
/// `stride` as in [`running_khinchin`].
pub fn running_levy<I>(convergents: I, stride: u64) -> Result<StatSeries, StatsError>
where
    I: IntoIterator<Item = Convergent>,
{
    if stride == 0 {
        return Err(StatsError::ZeroStride);
    }
    let mut series = StatSeries::new("levy", "cf");
    let mut pending = None;
    for k in convergents {
        if k.n == 0 {
            continue;
        }
        let n = k.n as u64;
        let point = (n, (ln_biguint(&k.q) / n as f64).exp());
        if n == 1 || n.is_multiple_of(stride) {
            series.push(point.0, point.1);
            pending = None;
        } else {
            pending = Some(point);
        }
    }
    if let Some((n, v)) = pending {
        series.push(n, v);
    }
    Ok(series)
}

/// Least-squares fit of `|value - reference| ≈ C n^e` over `n ∈ [from, to]`,
/// skipping exact hits.
pub fn power_law_window(
    series: &StatSeries,
    reference: f64,
    from: u64,
    to: u64,
) -> Result<PowerLaw, StatsError> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = series
        .points
        .iter()
        .filter(|p| p.n >= from && p.n <= to)
        .map(|p| (p.n as f64, (p.value - reference).abs()))
        .filter(|(_, y)| *y > 0.0)
        .unzip();
    Ok(power_law(&xs, &ys)?)
}

/// `log₂(1 + 1/(m(m+2)))`, the limiting frequency of quotient `m`.
pub fn gauss_kuzmin(m: u64) -> f64 {
    let m = m as f64;
    (1.0 / (m * (m + 2.0))).ln_1p() / LN_2
}

/// Limiting frequency of quotients above `m`: `log₂((m+2)/(m+1))`.
pub fn gauss_kuzmin_above(m: u64) -> f64 {
    (1.0 / (m as f64 + 1.0)).ln_1p() / LN_2
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KuzminHistogram {
    /// `counts[m-1]` is the number of quotients equal to `m`.
    counts: Vec<u64>,
    overflow: u64,
    total: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KuzminRow {
    /// `None` for the overflow bucket.
    pub m: Option<u64>,
    pub count: u64,
    pub frequency: f64,
    pub theoretical: f64,
}

impl KuzminHistogram {
    pub fn new(m_max: u64) -> Self {
        assert!(m_max >= 1, "m_max must be positive");
        Self {
            counts: vec![0; m_max as usize],
            overflow: 0,
            total: 0,
        }
    }

    pub fn m_max(&self) -> u64 {
        self.counts.len() as u64
    }

    pub fn add(&mut self, a: &BigUint) {
        self.total += 1;
        match u64::try_from(a) {
            Ok(m) if m >= 1 && m <= self.m_max() => self.counts[m as usize - 1] += 1,
            _ => self.overflow += 1,
        }
    }

    pub fn count(&self, m: u64) -> u64 {
        self.counts[m as usize - 1]
    }

    pub fn overflow(&self) -> u64 {
        self.overflow
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn rows(&self) -> Vec<KuzminRow> {
        let total = self.total.max(1) as f64;
        let mut rows: Vec<KuzminRow> = (1..=self.m_max())
            .map(|m| KuzminRow {
                m: Some(m),
                count: self.count(m),
                frequency: self.count(m) as f64 / total,
                theoretical: gauss_kuzmin(m),
            })
            .collect();
        rows.push(KuzminRow {
            m: None,
            count: self.overflow,
            frequency: self.overflow as f64 / total,
            theoretical: gauss_kuzmin_above(self.m_max()),
        });
        rows
    }

    /// Header `m,count,frequency,theoretical`; the overflow row has `m = >M`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,count,frequency,theoretical\n");
        for r in self.rows() {
            let m = r.m.map_or_else(|| format!(">{}", self.m_max()), |m| m.to_string());
            let _ = writeln!(
                out,
                "{m},{},{},{}",
                r.count,
                fmt_real(r.frequency),
                fmt_real(r.theoretical)
            );
        }
        out
    }
}

pub fn gauss_kuzmin_histogram(cf: &CfExpansion, m_max: u64) -> KuzminHistogram {
    let mut h = KuzminHistogram::new(m_max);
    for a in cf.quotients() {
        h.add(a);
    }
    h
}

/// Thinned series that keeps every `stride`-th point, `n = 1`, every sign
/// change and record, and the final point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SeriesBuilder {
    tracker: Tracker,
    points: Vec<StatPoint>,
    pending: Option<StatPoint>,
}

impl SeriesBuilder {
    fn new(reference: f64) -> Self {
        Self {
            tracker: Tracker::new(reference),
            points: Vec::new(),
            pending: None,
        }
    }

    fn observe(&mut self, n: u64, value: f64, stride: u64) {
        let obs = self.tracker.observe(value);
        let point = StatPoint {
            n,
            value,
            sign_changes: Some(self.tracker.sign_changes),
        };
        if n == 1 || n.is_multiple_of(stride) || obs.sign_change || obs.record {
            self.points.push(point);
            self.pending = None;
        } else {
            self.pending = Some(point);
        }
    }

    fn series(&self, statistic: &str, source: &str, precision: Option<u64>) -> StatSeries {
        let mut points = self.points.clone();
        points.extend(self.pending);
        StatSeries {
            statistic: statistic.into(),
            source: source.into(),
            precision,
            reference: Some(self.tracker.reference),
            points,
        }
    }
}

/// Incremental K(n), L(n) and histogram over a quotient stream. The state
/// is serializable, so a run can be checkpointed after any quotient and
/// resumed with identical output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatAccumulator {
    stride: u64,
    log_sum: KahanSum,
    convergent: ConvergentState,
    khinchin: SeriesBuilder,
    levy: SeriesBuilder,
    histogram: KuzminHistogram,
}

impl StatAccumulator {
    pub fn new(a0: &num_bigint::BigInt, stride: u64, m_max: u64, refs: &ReferenceConstants) -> Result<Self, StatsError> {
        if stride == 0 {
            return Err(StatsError::ZeroStride);
        }
        Ok(Self {
            stride,
            log_sum: KahanSum::default(),
            convergent: ConvergentState::new(a0),
            khinchin: SeriesBuilder::new(refs.khinchin.value),
            levy: SeriesBuilder::new(refs.levy.value),
            histogram: KuzminHistogram::new(m_max),
        })
    }

    pub fn n(&self) -> u64 {
        self.convergent.n() as u64
    }

    pub fn push(&mut self, a: &BigUint) {
        self.convergent.push(a);
        let n = self.n();
        self.log_sum.add(ln_biguint(a));
        self.khinchin
            .observe(n, (self.log_sum.value() / n as f64).exp(), self.stride);
        self.levy
            .observe(n, (ln_biguint(self.convergent.q()) / n as f64).exp(), self.stride);
        self.histogram.add(a);
    }

    pub fn khinchin(&self, source: &str, precision: Option<u64>) -> StatSeries {
        self.khinchin.series("khinchin", source, precision)
    }

    pub fn levy(&self, source: &str, precision: Option<u64>) -> StatSeries {
        self.levy.series("levy", source, precision)
    }

    pub fn histogram(&self) -> &KuzminHistogram {
        &self.histogram
    }

    pub fn convergent(&self) -> &ConvergentState {
        &self.convergent
    }
}
