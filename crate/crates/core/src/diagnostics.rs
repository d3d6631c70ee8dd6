//! Growth statistics of convergent denominators that are used as numerical
//! evidence (never proof) of irrationality or transcendence.
//!
//! Everything is evaluated from `ln Q_n`, which comes either from exact
//! convergents or from the log-domain recurrence in [`LogDenominators`].

use std::f64::consts::{LN_10, LN_2};
use std::fmt::Write as _;

use num_bigint::BigUint;
use serde::Serialize;
use thiserror::Error;

use crate::catalog::{ln_mersenne, WagstaffModel, EULER_GAMMA};
use crate::contfrac::Convergent;
use crate::exact::{ln_biguint, log10_biguint, BigRational, DecimalApprox};
use crate::stats::{fmt_real, StatSeries};

#[derive(Debug, Error, PartialEq)]
pub enum DiagnosticsError {
    #[error("statistic needs n >= {min}, got {n}")]
    IndexTooSmall { n: usize, min: usize },
    #[error("Q_{n} < 3, so ln ln Q_n is not positive")]
    DenominatorTooSmall { n: usize },
    #[error("need convergent {needed}, only {available} available")]
    NotEnoughConvergents { needed: usize, available: usize },
    #[error("value equals convergent {n} exactly")]
    ExactHit { n: usize },
    #[error("precision audit failed at n = {n}: {required} digits required, {available} available")]
    PrecisionAudit {
        n: usize,
        required: u64,
        available: u64,
    },
    #[error("B must be positive")]
    NonPositiveB,
}

/// `ln Q_n` for `n = 0..=N` with an absolute error bound per entry.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogDenominators {
    ln_q: Vec<f64>,
    abs_error: Vec<f64>,
}

impl LogDenominators {
    /// From exact convergents; the error is that of [`ln_biguint`].
    pub fn from_convergents<'a, I>(series: I) -> Self
    where
        I: IntoIterator<Item = &'a Convergent>,
    {
        let ln_q: Vec<f64> = series.into_iter().map(|k| ln_biguint(&k.q)).collect();
        let abs_error = ln_q.iter().map(|v| v.abs() * 4.0 * f64::EPSILON).collect();
        Self { ln_q, abs_error }
    }

    /// Runs `Q_{n+1} = a_{n+1} Q_n + Q_{n-1}` on logarithms:
    /// `ln Q_{n+1} = ln a_{n+1} + ln Q_n + ln(1 + ρ_n / a_{n+1})` with
    /// `ρ_n = Q_{n-1}/Q_n ∈ [0, 1]` updated as `ρ_{n+1} = 1/(a_{n+1} + ρ_n)`.
    /// Only `ln a_k` is needed, so quotients with millions of digits cost
    /// nothing.
    pub fn from_quotient_logs(ln_a: &[f64]) -> Self {
        let mut ln_q = Vec::with_capacity(ln_a.len() + 1);
        let mut abs_error = Vec::with_capacity(ln_a.len() + 1);
        ln_q.push(0.0);
        abs_error.push(0.0);
        let mut rho = 0.0f64;
        let mut err = 0.0f64;
        let mut acc = 0.0f64;
        let mut comp = 0.0f64;
        for &la in ln_a {
            let inv_a = (-la).exp();
            let step = la + (rho * inv_a).ln_1p();
            // Kahan update of the running sum.
            let y = step - comp;
            let t = acc + y;
            comp = (t - acc) - y;
            acc = t;
            // Each step adds a few roundings of the step and of the sum;
            // ρ is a contraction so its error does not accumulate.
            err += (la.abs() + t.abs()) * 4.0 * f64::EPSILON + 4.0 * f64::EPSILON;
            rho = 1.0 / (la.exp() + rho);
            ln_q.push(t);
            abs_error.push(err);
        }
        Self { ln_q, abs_error }
    }

    /// Quotients `a_k = 2^{p_k} - 1`.
    pub fn from_mersenne_exponents(exponents: &[u64]) -> Self {
        let ln_a: Vec<f64> = exponents.iter().map(|&p| ln_mersenne(p)).collect();
        Self::from_quotient_logs(&ln_a)
    }

    /// Largest index `N`.
    pub fn last_index(&self) -> usize {
        self.ln_q.len() - 1
    }

    pub fn ln_q(&self, n: usize) -> f64 {
        self.ln_q[n]
    }

    pub fn log10_q(&self, n: usize) -> f64 {
        self.ln_q[n] / LN_10
    }

    pub fn log2_q(&self, n: usize) -> f64 {
        self.ln_q[n] / LN_2
    }

    pub fn abs_error(&self, n: usize) -> f64 {
        self.abs_error[n]
    }
}

fn ln_ln_q(logs: &LogDenominators, n: usize) -> Result<f64, DiagnosticsError> {
    // Q_n ≥ 3 exactly when ln Q_n ≥ ln 3; use a margin below ln 3 for
    // log-domain rounding.
    let lq = logs.ln_q(n);
    if lq < 3f64.ln() - 1e-9 {
        return Err(DiagnosticsError::DenominatorTooSmall { n });
    }
    Ok(lq.ln())
}

/// `√(ln n) · ln ln Q_n / n`.
pub fn davenport_roth(logs: &LogDenominators, n: usize) -> Result<f64, DiagnosticsError> {
    if n < 3 {
        return Err(DiagnosticsError::IndexTooSmall { n, min: 3 });
    }
    let nf = n as f64;
    Ok(nf.ln().sqrt() * ln_ln_q(logs, n)? / nf)
}

/// `ln ln Q_n / (n^{2/3} (ln n)^{2/3} ln ln n)`.
pub fn adamczewski_bugeaud(logs: &LogDenominators, n: usize) -> Result<f64, DiagnosticsError> {
    if n < 3 {
        return Err(DiagnosticsError::IndexTooSmall { n, min: 3 });
    }
    let nf = n as f64;
    let ln_n = nf.ln();
    Ok(ln_ln_q(logs, n)? / ((nf * ln_n).powf(2.0 / 3.0) * ln_n.ln()))
}

fn stat_series(
    name: &str,
    logs: &LogDenominators,
    f: fn(&LogDenominators, usize) -> Result<f64, DiagnosticsError>,
) -> Result<StatSeries, DiagnosticsError> {
    let mut s = StatSeries::new(name, "cf");
    for n in 3..=logs.last_index() {
        s.push(n as u64, f(logs, n)?);
    }
    Ok(s)
}

pub fn davenport_roth_stat(logs: &LogDenominators) -> Result<StatSeries, DiagnosticsError> {
    stat_series("davenport_roth", logs, davenport_roth)
}

pub fn adamczewski_bugeaud_stat(logs: &LogDenominators) -> Result<StatSeries, DiagnosticsError> {
    stat_series("adamczewski_bugeaud", logs, adamczewski_bugeaud)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthCheck {
    pub n: usize,
    /// `ln Q_n / n`
    pub rate: f64,
    /// `Q_n < e^{Bn}`
    pub holds: bool,
}

/// Compares `Q_n` with `e^{Bn}` for `n ≥ 1`.
pub fn khinchin_b_check(logs: &LogDenominators, b: f64) -> Result<Vec<GrowthCheck>, DiagnosticsError> {
    if b.is_nan() || b <= 0.0 {
        return Err(DiagnosticsError::NonPositiveB);
    }
    Ok((1..=logs.last_index())
        .map(|n| {
            let rate = logs.ln_q(n) / n as f64;
            GrowthCheck {
                n,
                rate,
                holds: rate < b,
            }
        })
        .collect())
}

/// `Q_n > 2^{c · 2^{(n+1) e^{-γ}}}`, the lower bound implied by the
/// Wagstaff growth of Mersenne exponents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WagstaffBound {
    pub c: f64,
    pub e_neg_gamma: f64,
}

impl WagstaffBound {
    /// `c` as published (2.101893933) with the full-precision γ in the
    /// exponent; this pairing reproduces the published n = 47 endpoint.
    pub fn published() -> Self {
        Self {
            c: 2.101_893_933,
            e_neg_gamma: (-EULER_GAMMA).exp(),
        }
    }

    /// `c` and the exponent both derived from the model's γ.
    pub fn from_model(model: &WagstaffModel) -> Self {
        Self {
            c: model.c(),
            e_neg_gamma: model.e_neg_gamma(),
        }
    }

    pub fn log2(&self, n: usize) -> f64 {
        self.c * ((n as f64 + 1.0) * self.e_neg_gamma).exp2()
    }

    pub fn log10(&self, n: usize) -> f64 {
        self.log2(n) * LN_2 / LN_10
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundCheck {
    pub n: usize,
    pub log10_q: f64,
    pub log10_bound: f64,
    pub holds: bool,
}

/// Log-domain comparison for `n ≥ 1`. The verdict is only trusted where
/// the margin exceeds the accumulated error of `ln Q_n`.
pub fn wagstaff_lower_bound_check(logs: &LogDenominators, bound: &WagstaffBound) -> Vec<BoundCheck> {
    (1..=logs.last_index())
        .map(|n| {
            let log10_q = logs.log10_q(n);
            let log10_bound = bound.log10(n);
            BoundCheck {
                n,
                log10_q,
                log10_bound,
                holds: logs.log2_q(n) > bound.log2(n),
            }
        })
        .collect()
}

/// `q > 2^b` decided from the bit length where possible and from the
/// leading bits otherwise.
pub fn exceeds_power_of_two(q: &BigUint, b: f64) -> bool {
    let bits = q.bits() as f64;
    if bits - 1.0 > b {
        return true;
    }
    if bits <= b {
        return false;
    }
    ln_biguint(q) / LN_2 > b
}

/// Same comparison on exact convergents.
pub fn wagstaff_lower_bound_check_exact(series: &[Convergent], bound: &WagstaffBound) -> Vec<BoundCheck> {
    series
        .iter()
        .filter(|k| k.n >= 1)
        .map(|k| BoundCheck {
            n: k.n,
            log10_q: log10_biguint(&k.q),
            log10_bound: bound.log10(k.n),
            holds: exceeds_power_of_two(&k.q, bound.log2(k.n)),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SondowPoint {
    pub n: usize,
    /// `ln a_{n+1} / ln Q_n`
    pub ratio: f64,
    pub running_max: f64,
}

/// Ratios `ln a_{n+1} / ln Q_n` for every `n ≥ 1` with `Q_n > 1` and
/// `a_{n+1}` available. `ln_a[k]` holds `ln a_{k+1}`.
pub fn sondow_epsilon(ln_a: &[f64], logs: &LogDenominators) -> Vec<SondowPoint> {
    let mut out = Vec::new();
    let mut max = f64::NEG_INFINITY;
    let last = logs.last_index().min(ln_a.len().saturating_sub(1));
    for (n, &la) in ln_a.iter().enumerate().take(last + 1).skip(1) {
        let lq = logs.ln_q(n);
        if lq <= 0.0 {
            continue;
        }
        let ratio = la / lq;
        max = max.max(ratio);
        out.push(SondowPoint {
            n,
            ratio,
            running_max: max,
        });
    }
    out
}

/// A rational known to lie within `10^{-precision_digits}` of the target.
#[derive(Debug, Clone, PartialEq)]
pub struct Approximant {
    pub value: BigRational,
    pub precision_digits: u64,
}

impl Approximant {
    pub fn from_decimal(d: &DecimalApprox) -> Self {
        Self {
            value: d.to_rational(),
            precision_digits: d.precision(),
        }
    }

    /// The convergent `P/Q` of the target's own expansion, accurate to
    /// `1/Q^2`.
    pub fn from_convergent(k: &Convergent) -> Self {
        let digits = (2.0 * log10_biguint(&k.q)).floor().max(0.0) as u64;
        Self {
            value: BigRational::new(k.p.clone(), k.q.clone()),
            precision_digits: digits,
        }
    }
}

/// Guard digits on top of the size of the error being measured.
pub const DELTA_GUARD_DIGITS: u64 = 6;

/// Decimal digits of the target needed to evaluate `δ(r; n)`: the error is
/// at least `1/(Q_n(Q_n + Q_{n+1}))`.
pub fn delta_required_digits(q_n: &BigUint, q_next: &BigUint) -> u64 {
    let lower = q_n * (q_n + q_next);
    log10_biguint(&lower).ceil() as u64 + DELTA_GUARD_DIGITS
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaPoint {
    pub n: usize,
    pub delta: f64,
    /// `ln(Q_n Q_{n+1}) / ln Q_n`
    pub lower: f64,
    /// `ln(Q_n (Q_n + Q_{n+1})) / ln Q_n`
    pub upper: f64,
    /// `2 + ln a_{n+1} / ln Q_n`
    pub prediction: f64,
    pub required_digits: u64,
    /// `1/(Q_n(Q_n+Q_{n+1})) < |r - P_n/Q_n| < 1/(Q_n Q_{n+1})`, decided in
    /// exact arithmetic. `δ` is monotone in the error, so this is the δ
    /// sandwich; the float bounds above are too close together to compare
    /// once `a_{n+1}` is large.
    pub bracketed: bool,
}

/// `δ(r; n) = -ln|r - P_n/Q_n| / ln Q_n`, after checking that the
/// approximant carries enough digits for index `n`.
pub fn tsr_delta(
    r: &Approximant,
    series: &[Convergent],
    n: usize,
) -> Result<DeltaPoint, DiagnosticsError> {
    if n < 1 {
        return Err(DiagnosticsError::IndexTooSmall { n, min: 1 });
    }
    if n + 1 >= series.len() {
        return Err(DiagnosticsError::NotEnoughConvergents {
            needed: n + 2,
            available: series.len(),
        });
    }
    let (k, next) = (&series[n], &series[n + 1]);
    let required = delta_required_digits(&k.q, &next.q);
    if r.precision_digits < required {
        return Err(DiagnosticsError::PrecisionAudit {
            n,
            required,
            available: r.precision_digits,
        });
    }
    let approx = BigRational::new(k.p.clone(), k.q.clone());
    let diff = &r.value - &approx;
    if diff.is_zero() {
        return Err(DiagnosticsError::ExactHit { n });
    }
    let err = diff.abs();
    let q_sum = &k.q + &next.q;
    let lower_err = BigRational::new(1.into(), &k.q * &q_sum);
    let upper_err = BigRational::new(1.into(), &k.q * &next.q);
    let bracketed = lower_err < err && err < upper_err;
    let ln_q = ln_biguint(&k.q);
    let ln_next = ln_biguint(&next.q);
    let ln_sum = ln_biguint(&q_sum);
    // a_{n+1} = (Q_{n+1} - Q_{n-1}) / Q_n
    let a_next = (&next.q - &series[n - 1].q) / &k.q;
    Ok(DeltaPoint {
        n,
        delta: -diff.ln_abs() / ln_q,
        lower: (ln_q + ln_next) / ln_q,
        upper: (ln_q + ln_sum) / ln_q,
        prediction: 2.0 + ln_biguint(&a_next) / ln_q,
        required_digits: required,
        bracketed,
    })
}

/// Runs the audit for every `n` in `1..=n_max` up front, failing on the
/// first index the approximant cannot support, then evaluates δ.
pub fn tsr_delta_range(
    r: &Approximant,
    series: &[Convergent],
    n_max: usize,
) -> Result<Vec<DeltaPoint>, DiagnosticsError> {
    for n in 1..=n_max {
        if n + 1 >= series.len() {
            return Err(DiagnosticsError::NotEnoughConvergents {
                needed: n + 2,
                available: series.len(),
            });
        }
        let required = delta_required_digits(&series[n].q, &series[n + 1].q);
        if r.precision_digits < required {
            return Err(DiagnosticsError::PrecisionAudit {
                n,
                required,
                available: r.precision_digits,
            });
        }
    }
    (1..=n_max).map(|n| tsr_delta(r, series, n)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagnosticOptions {
    pub khinchin_b: f64,
    pub bound: WagstaffBound,
    pub model: WagstaffModel,
}

impl Default for DiagnosticOptions {
    fn default() -> Self {
        Self {
            khinchin_b: 1.0,
            bound: WagstaffBound::published(),
            model: WagstaffModel::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticRow {
    pub n: usize,
    pub log10_q: f64,
    pub davenport_roth: Option<f64>,
    pub adamczewski_bugeaud: Option<f64>,
    pub growth_rate: f64,
    pub below_khinchin_b: bool,
    pub log10_wagstaff_bound: f64,
    pub above_wagstaff_bound: bool,
    pub sondow_ratio: Option<f64>,
    pub delta: Option<DeltaPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticSummary {
    pub n_first: usize,
    pub n_last: usize,
    pub max_davenport_roth: Option<f64>,
    pub max_adamczewski_bugeaud: Option<f64>,
    pub max_sondow_ratio: Option<f64>,
    pub delta_mean: Option<f64>,
    pub delta_n_range: Option<(usize, usize)>,
    pub delta_count: usize,
    pub wagstaff_violations: Vec<usize>,
    pub gamma: f64,
    pub c: f64,
    pub epsilon: f64,
    pub bound_c: f64,
    pub disclaimer: &'static str,
}

pub const DISCLAIMER: &str = "running maxima over a finite range can exhibit growth but cannot establish a limit; none of these values proves irrationality or transcendence";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticReport {
    pub rows: Vec<DiagnosticRow>,
    pub summary: DiagnosticSummary,
}

impl DiagnosticReport {
    /// `ln_a[k] = ln a_{k+1}`; `deltas` may cover any sub-range of `n`.
    pub fn build(
        ln_a: &[f64],
        logs: &LogDenominators,
        deltas: &[DeltaPoint],
        opts: &DiagnosticOptions,
    ) -> Result<Self, DiagnosticsError> {
        let sondow = sondow_epsilon(ln_a, logs);
        let growth = khinchin_b_check(logs, opts.khinchin_b)?;
        let bounds = wagstaff_lower_bound_check(logs, &opts.bound);
        let mut rows = Vec::new();
        for n in 1..=logs.last_index() {
            let g = growth[n - 1];
            let b = bounds[n - 1];
            rows.push(DiagnosticRow {
                n,
                log10_q: logs.log10_q(n),
                davenport_roth: (n >= 3).then(|| davenport_roth(logs, n)).transpose()?,
                adamczewski_bugeaud: (n >= 3).then(|| adamczewski_bugeaud(logs, n)).transpose()?,
                growth_rate: g.rate,
                below_khinchin_b: g.holds,
                log10_wagstaff_bound: b.log10_bound,
                above_wagstaff_bound: b.holds,
                sondow_ratio: sondow.iter().find(|s| s.n == n).map(|s| s.ratio),
                delta: deltas.iter().find(|d| d.n == n).copied(),
            });
        }
        let max = |it: &mut dyn Iterator<Item = f64>| it.fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))));
        let delta_mean = (!deltas.is_empty())
            .then(|| deltas.iter().map(|d| d.delta).sum::<f64>() / deltas.len() as f64);
        let summary = DiagnosticSummary {
            n_first: 1,
            n_last: logs.last_index(),
            max_davenport_roth: max(&mut rows.iter().filter_map(|r| r.davenport_roth)),
            max_adamczewski_bugeaud: max(&mut rows.iter().filter_map(|r| r.adamczewski_bugeaud)),
            max_sondow_ratio: sondow.last().map(|s| s.running_max),
            delta_mean,
            delta_n_range: deltas.first().zip(deltas.last()).map(|(a, b)| (a.n, b.n)),
            delta_count: deltas.len(),
            wagstaff_violations: rows
                .iter()
                .filter(|r| !r.above_wagstaff_bound)
                .map(|r| r.n)
                .collect(),
            gamma: opts.model.gamma,
            c: opts.model.c(),
            epsilon: opts.model.epsilon(),
            bound_c: opts.bound.c,
            disclaimer: DISCLAIMER,
        };
        Ok(Self { rows, summary })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(fmt_real).unwrap_or_default();
        let mut out = String::from(
            "n,log10_q,davenport_roth,adamczewski_bugeaud,growth_rate,below_khinchin_b,\
             log10_wagstaff_bound,above_wagstaff_bound,sondow_ratio,delta,delta_lower,delta_upper,delta_prediction\n",
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.n,
                fmt_real(r.log10_q),
                opt(r.davenport_roth),
                opt(r.adamczewski_bugeaud),
                fmt_real(r.growth_rate),
                r.below_khinchin_b,
                fmt_real(r.log10_wagstaff_bound),
                r.above_wagstaff_bound,
                opt(r.sondow_ratio),
                opt(r.delta.map(|d| d.delta)),
                opt(r.delta.map(|d| d.lower)),
                opt(r.delta.map(|d| d.upper)),
                opt(r.delta.map(|d| d.prediction)),
            );
        }
        out
    }

    /// Multi-line human summary.
    pub fn summary_text(&self) -> String {
        let s = &self.summary;
        let opt = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.6}"));
        let mut out = String::new();
        let _ = writeln!(out, "n range: {}..={}", s.n_first, s.n_last);
        let _ = writeln!(out, "max davenport-roth: {}", opt(s.max_davenport_roth));
        let _ = writeln!(out, "max adamczewski-bugeaud: {}", opt(s.max_adamczewski_bugeaud));
        let _ = writeln!(out, "max sondow ratio: {}", opt(s.max_sondow_ratio));
        match s.delta_n_range {
            Some((a, b)) => {
                let _ = writeln!(
                    out,
                    "mean delta over n={a}..={b} ({} values): {}",
                    s.delta_count,
                    opt(s.delta_mean)
                );
            }
            None => {
                let _ = writeln!(out, "mean delta: n/a");
            }
        }
        let _ = writeln!(out, "wagstaff bound violations at n: {:?}", s.wagstaff_violations);
        let _ = writeln!(
            out,
            "gamma = {:.16}, c = {:.10}, 2^(e^-gamma) - 1 = {:.10}, bound c = {}",
            s.gamma, s.c, s.epsilon, s.bound_c
        );
        let _ = writeln!(out, "note: {}", s.disclaimer);
        out
    }
}

/// `ln a_k` for exact quotients.
pub fn quotient_logs(quotients: &[BigUint]) -> Vec<f64> {
    quotients.iter().map(ln_biguint).collect()
}

/// `P_n / Q_n` as an exact rational.
pub fn convergent_value(k: &Convergent) -> BigRational {
    BigRational::new(k.p.clone(), k.q.clone())
}
