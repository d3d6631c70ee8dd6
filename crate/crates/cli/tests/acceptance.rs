//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p cflab-cli --test acceptance -- --nocapture` to
//! see the report. Criteria listed in `KNOWN_UNATTAINABLE` are evaluated
//! and reported like the rest but do not fail the test.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use cflab_core::catalog::QUOTED_GAMMA;
use cflab_core::diagnostics::tsr_delta_range;
use cflab_core::{
    cf_from_quotient_sequence, convergents, expand_rational, from_cf, khinchin_constant,
    levy_constant, mod4_census, wagstaff_fit, Approximant, BigInt, BigRational, BigUint,
    CfExpansion, FitOrdinate, LogDenominators, MersenneCatalog, SequenceKind, SequenceSpec,
    WagstaffBound, WagstaffModel,
};
use num_bigint::RandBigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `Q_3 = 685` lies below the bound `2^{c·2^{4ε}}` at `n = 3`.
const KNOWN_UNATTAINABLE: &[u32] = &[8];

const KHINCHIN: f64 = 2.685_452_001_065_306;
const LEVY: f64 = 3.275_822_918_721_811;

type Check<'a> = Box<dyn Fn() -> (bool, String) + 'a>;

struct Outcome {
    id: u32,
    title: &'static str,
    pass: bool,
    detail: String,
    elapsed: Duration,
}

fn cflab(out: &Path, args: &[&str]) -> (i32, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_cflab"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove("CFLAB_CATALOG")
        .output()
        .expect("cflab runs");
    let mut text = String::from_utf8_lossy(&o.stdout).into_owned();
    text.push_str(&String::from_utf8_lossy(&o.stderr));
    (o.status.code().unwrap_or(-1), text)
}

fn read(path: impl AsRef<Path>) -> String {
    std::fs::read_to_string(path.as_ref())
        .unwrap_or_else(|e| panic!("{}: {e}", path.as_ref().display()))
}

fn within(x: f64, lo: f64, hi: f64) -> bool {
    lo <= x && x <= hi
}

/// `ln` of a positive integer from its decimal string.
fn ln_decimal(s: &str) -> f64 {
    let lead = &s[..s.len().min(17)];
    lead.parse::<f64>().unwrap().ln() + (s.len() - lead.len()) as f64 * std::f64::consts::LN_10
}

fn random_rational(rng: &mut ChaCha8Rng, digits: u64) -> BigRational {
    let bits = (digits as f64 * std::f64::consts::LOG2_10).ceil() as u64;
    let num = rng.gen_biguint(bits);
    let den = rng.gen_biguint(bits) + 1u32;
    BigRational::new(BigInt::from(num), den)
}

fn c1_sum_digits(dir: &Path) -> (bool, String) {
    let t = Instant::now();
    let (code, _) = cflab(dir, &["sum", "mersenne", "12", "--precision", "52"]);
    let secs = t.elapsed().as_secs_f64();
    let got = read(dir.join("mersenne12_decimal.txt")).trim().to_string();
    let want = "0.5164541789407885653304873429715228588159685534154197";
    (
        code == 0 && got == want && secs < 1.0,
        format!("got {got}, {secs:.3} s (limit 1 s)"),
    )
}

fn c2_cf_prefix(dir: &Path) -> (bool, String) {
    let t = Instant::now();
    let (code, _) = cflab(dir, &["cf", "mersenne", "18", "--mode", "exact", "--no-stats"]);
    let secs = t.elapsed().as_secs_f64();
    let text = read(dir.join("mersenne18_cf.txt"));
    let head: Vec<&str> = text.lines().skip(1).take(3).collect();
    (
        code == 0 && head == ["1", "1", "14"] && secs < 5.0,
        format!("first quotients {head:?}, {secs:.3} s (limit 5 s)"),
    )
}

fn c3_um_digits(dir: &Path) -> (bool, String) {
    let t = Instant::now();
    let (code, _) = cflab(dir, &["um", "--terms", "13", "--digits", "47"]);
    let secs = t.elapsed().as_secs_f64();
    let got = read(dir.join("um13_decimal.txt")).trim().to_string();
    let want = "0.31824815840584486942596202748140694243806236564";
    (
        code == 0 && got == want && secs < 10.0,
        format!("got {got}, {secs:.3} s (limit 10 s)"),
    )
}

/// Mantissa digits without the point, cut to `sig`, plus the exponent.
fn sig_figs(sci: &str, sig: usize) -> (String, i64) {
    let (m, e) = sci.split_once('e').expect("scientific notation");
    let digits: String = m.chars().filter(char::is_ascii_digit).take(sig).collect();
    (digits, e.parse().unwrap())
}

fn c4_table(dir: &Path) -> (bool, String) {
    // Rows printed in the published table within k = 3..20.
    const ROWS: &[(usize, &str)] = &[
        (3, "2.131173743e-6"),
        (4, "1.320662319e-10"),
        (5, "1.968416969e-18"),
        (6, "1.145786956e-28"),
        (7, "4.168364565e-40"),
        (8, "9.038699842e-59"),
        (9, "1.699990496e-95"),
        (17, "9.32543401e-4439"),
        (18, "1.38891910e-6375"),
        (19, "3.81534516e-8936"),
        (20, "4.67942175e-11599"),
    ];
    let t = Instant::now();
    let (code, _) = cflab(dir, &["um", "--terms", "20", "--digits", "1000"]);
    let secs = t.elapsed().as_secs_f64();
    let table = read(dir.join("um20_table.csv"));
    let mut bad = Vec::new();
    for &(k, want) in ROWS {
        let got = table
            .lines()
            .find_map(|l| l.strip_prefix(&format!("{k},")))
            .unwrap_or("missing");
        if got == "missing" || sig_figs(got, 9) != sig_figs(want, 9) {
            bad.push(format!("k={k}: {got} vs {want}"));
        }
    }
    (
        code == 0 && bad.is_empty() && secs < 60.0,
        format!(
            "{} of {} rows match to 9 significant figures{}, {secs:.3} s",
            ROWS.len() - bad.len(),
            ROWS.len(),
            if bad.is_empty() { String::new() } else { format!(" ({})", bad.join("; ")) }
        ),
    )
}

fn c5_constants() -> (bool, String) {
    let l = levy_constant();
    let k = khinchin_constant(1e-6).expect("valid target");
    let ok_l = (l - 3.27582291872).abs() <= 1e-11;
    let ok_k = (k.value - 2.685452).abs() <= 1e-6 && k.error_bound <= 1e-6;
    (
        ok_l && ok_k,
        format!(
            "levy {l:.13}; khinchin {:.9} +- {:.2e} ({} direct terms)",
            k.value, k.error_bound, k.terms
        ),
    )
}

fn c6_catalog() -> (bool, String) {
    let cat = MersenneCatalog::embedded();
    let c = mod4_census(&cat);
    let ok = cat.len() == 47 && cat.max_exponent() == 43_112_609 && (c.one_mod_4, c.three_mod_4, c.other) == (27, 19, 1);
    (
        ok,
        format!(
            "{} entries, max {}, census ({}, {}, {})",
            cat.len(),
            cat.max_exponent(),
            c.one_mod_4,
            c.three_mod_4,
            c.other
        ),
    )
}

fn c7_wagstaff() -> (bool, String) {
    let fit = wagstaff_fit(&MersenneCatalog::embedded(), FitOrdinate::LnLog2, &WagstaffModel::default())
        .expect("fit");
    let c = WagstaffModel::with_gamma(QUOTED_GAMMA).c();
    let ok = (fit.slope - 0.3854).abs() <= 0.0005
        && (fit.intercept - 0.6691).abs() <= 0.005
        && (c - 2.101893933).abs() <= 1e-8;
    (
        ok,
        format!("slope {:.5}, intercept {:.5}, c {c:.10}", fit.slope, fit.intercept),
    )
}

fn c8_fig9() -> (bool, String) {
    let t = Instant::now();
    let exps: Vec<u64> = MersenneCatalog::embedded().exponents().collect();
    let logs = LogDenominators::from_mersenne_exponents(&exps);
    let q47 = logs.log10_q(47);
    let bound = WagstaffBound::published();
    let b47 = bound.log10(47);
    let below: Vec<usize> = (3..=47).filter(|&n| logs.log2_q(n) <= bound.log2(n)).collect();
    let secs = t.elapsed().as_secs_f64();
    let ok = within(q47, 86_789_810.0, 86_789_810.9)
        && within(b47, 82_034_318.0, 82_034_318.2)
        && below.is_empty()
        && secs < 60.0;
    (
        ok,
        format!(
            "log10 Q47 = {q47:.3}, log10 bound = {b47:.3}, Q_n below bound for n in {below:?} \
             (log2 Q3 = {:.3} vs {:.3}), {secs:.3} s",
            logs.log2_q(3),
            bound.log2(3)
        ),
    )
}

/// (a) round trip, (b) error sandwich, (c) Gauss-Kuzmin, (d) K(n), L(n),
/// (e) delta sandwich on u_M.
fn c9_substitutes() -> (bool, String) {
    let mut parts = Vec::new();
    let mut all = true;

    // (a)
    let mut rng = ChaCha8Rng::seed_from_u64(9001);
    let mut failures = 0;
    for _ in 0..1000 {
        let digits = 10f64.powf(rng.gen_range(0.0..4.0)).round() as u64;
        let r = random_rational(&mut rng, digits.max(1));
        if from_cf(&expand_rational(&r)) != r {
            failures += 1;
        }
    }
    all &= failures == 0;
    parts.push(format!("(a) round trip failures {failures}/1000"));

    // (b) D = |p Q_n - P_n q|; the error is D/(q Q_n).
    let mut rng = ChaCha8Rng::seed_from_u64(9002);
    let (mut checked, mut violations) = (0u64, 0u64);
    for _ in 0..200 {
        let digits = rng.gen_range(1..400);
        let r = random_rational(&mut rng, digits);
        let cf = expand_rational(&r);
        let series: Vec<_> = convergents(&cf).collect();
        let last = series.len() - 1;
        let p = r.numer();
        let q = BigInt::from(r.denom().clone());
        for n in 0..last {
            let (k, next) = (&series[n], &series[n + 1]);
            let d = (p * BigInt::from(k.q.clone()) - &k.p * &q).magnitude().clone();
            let lower_ok = &d * (&k.q + &next.q) > *r.denom();
            let upper = &d * &next.q;
            // At n = last - 1 the upper bound is attained exactly.
            let upper_ok = if n + 1 == last { &upper == r.denom() } else { &upper < r.denom() };
            checked += 1;
            if !(lower_ok && upper_ok) {
                violations += 1;
            }
        }
    }
    all &= violations == 0;
    parts.push(format!("(b) sandwich violations {violations}/{checked}"));

    // (c) and (d) on 20 random 10^4-digit rationals.
    let (mut gk_pass, mut kl_pass) = (0, 0);
    let mut worst_k = 0f64;
    let mut worst_l = 0f64;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(10_000 + seed);
        let r = random_rational(&mut rng, 10_000);
        let cf = expand_rational(&r);
        let n = cf.len() as f64;
        let mut counts = [0u64; 21];
        let mut ln_sum = 0.0;
        for a in cf.quotients() {
            let s = a.to_string();
            if let Ok(v) = s.parse::<usize>() {
                if v <= 20 {
                    counts[v] += 1;
                }
            }
            ln_sum += ln_decimal(&s);
        }
        let gk_ok = (1..=20).all(|m| {
            let mf = m as f64;
            let p = (1.0 + 1.0 / (mf * (mf + 2.0))).log2();
            let sigma = (p * (1.0 - p) / n).sqrt();
            (counts[m] as f64 / n - p).abs() <= 3.0 * sigma
        });
        gk_pass += gk_ok as u32;
        let k = (ln_sum / n).exp();
        let l = (ln_decimal(&cf_denominator(&cf).to_string()) / n).exp();
        worst_k = worst_k.max((k - KHINCHIN).abs());
        worst_l = worst_l.max((l - LEVY).abs());
        kl_pass += ((k - KHINCHIN).abs() <= 0.05 && (l - LEVY).abs() <= 0.1) as u32;
    }
    all &= gk_pass >= 19 && kl_pass >= 19;
    parts.push(format!("(c) gauss-kuzmin seeds passing {gk_pass}/20"));
    parts.push(format!(
        "(d) K/L seeds passing {kl_pass}/20 (worst |K(n)-K| {worst_k:.4}, |L(n)-L| {worst_l:.4})"
    ));

    // (e)
    let terms = SequenceSpec::new(SequenceKind::Mersenne, 25)
        .terms(&MersenneCatalog::embedded())
        .unwrap();
    let (cf, value) = cf_from_quotient_sequence(&terms, 30_000).expect("certified digits");
    let series: Vec<_> = convergents(&cf.prefix(21, 0)).collect();
    match tsr_delta_range(&Approximant::from_decimal(&value), &series, 20) {
        Ok(points) => {
            let bracketed = points.iter().filter(|p| p.bracketed).count();
            let mean = points.iter().map(|p| p.delta).sum::<f64>() / points.len() as f64;
            all &= bracketed == points.len();
            parts.push(format!(
                "(e) delta bracketed for {bracketed}/{} n, mean {mean:.4}",
                points.len()
            ));
        }
        Err(e) => {
            all = false;
            parts.push(format!("(e) {e}"));
        }
    }
    (all, parts.join("; "))
}

/// `Q_N` of a finite expansion: the reduced denominator.
fn cf_denominator(cf: &CfExpansion) -> BigUint {
    from_cf(cf).denom().clone()
}

fn c10_performance(dir: &Path) -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(100_000);
    let r = random_rational(&mut rng, 100_000);
    let t = Instant::now();
    let cf = expand_rational(&r);
    let secs = t.elapsed().as_secs_f64();
    let round_trip = from_cf(&cf) == r;

    // Interrupted and resumed versus uninterrupted, on a 10^4-digit input.
    let small = random_rational(&mut rng, 10_000);
    let input = dir.join("rand_rational.txt");
    std::fs::write(&input, format!("{small}\n")).unwrap();
    let input = input.to_str().unwrap();
    let (a, b) = (dir.join("interrupted"), dir.join("oneshot"));
    let common = ["cf", "--input", input, "--mode", "exact", "--stride", "100", "--checkpoint-interval", "1000"];
    let mut args = common.to_vec();
    args.extend(["--stop-after", "5000"]);
    let (c1, _) = cflab(&a, &args);
    let (c2, _) = cflab(&a, &["resume", a.join("rand_cf.ckpt").to_str().unwrap()]);
    let (c3, _) = cflab(&b, &common);
    let mut compared = 0;
    let mut differing = Vec::new();
    for entry in std::fs::read_dir(&b).unwrap() {
        let name = entry.unwrap().file_name().to_string_lossy().into_owned();
        if name.ends_with(".manifest.json") || name.ends_with(".ckpt") {
            continue;
        }
        compared += 1;
        if std::fs::read(a.join(&name)).ok() != std::fs::read(b.join(&name)).ok() {
            differing.push(name);
        }
    }
    let ok = secs < 120.0 && round_trip && (c1, c2, c3) == (0, 0, 0) && compared >= 5 && differing.is_empty();
    (
        ok,
        format!(
            "{} quotients of a 10^5-digit rational in {secs:.2} s (limit 120 s), round trip {round_trip}; \
             resume: {compared} files compared, differing {differing:?}",
            cf.len()
        ),
    )
}

fn c11_dyadic(dir: &Path) -> (bool, String) {
    let t = Instant::now();
    let (c1, _) = cflab(dir, &["cf", "dyadic", "27", "--precision", "10000", "--stride", "100"]);
    let (c2, _) = cflab(dir, &["cf", "dyadic", "32", "--mode", "exact", "--stride", "1000"]);
    let secs = t.elapsed().as_secs_f64();
    let longest = |name: &str| {
        read(dir.join(name))
            .lines()
            .skip(1)
            .map(str::len)
            .max()
            .unwrap_or(0)
    };
    let rows = |name: &str| {
        std::fs::read_to_string(dir.join(name))
            .map(|s| s.lines().count().saturating_sub(1))
            .unwrap_or(0)
    };
    let last_value = |name: &str| {
        std::fs::read_to_string(dir.join(name))
            .ok()
            .and_then(|s| s.lines().last().map(|l| l.split(',').nth(1).unwrap_or("").to_string()))
            .unwrap_or_default()
    };
    let series_ok = ["dyadic27", "dyadic32"].iter().all(|n| {
        rows(&format!("{n}_khinchin.csv")) >= 2 && rows(&format!("{n}_levy.csv")) >= 2
    });
    let big = longest("dyadic32_cf.txt");
    let ok = c1 == 0 && c2 == 0 && series_ok && big > 1000;
    (
        ok,
        format!(
            "10^4-digit certified run: longest quotient {} digits, K2 {} L2 {}; 32-term exact run: \
             longest quotient {big} digits, K2 {} L2 {}; {secs:.2} s",
            longest("dyadic27_cf.txt"),
            last_value("dyadic27_khinchin.csv"),
            last_value("dyadic27_levy.csv"),
            last_value("dyadic32_khinchin.csv"),
            last_value("dyadic32_levy.csv"),
        ),
    )
}

#[test]
fn acceptance() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = |n: u32| {
        let d = tmp.path().join(format!("c{n}"));
        std::fs::create_dir_all(&d).unwrap();
        d
    };
    let criteria: Vec<(u32, &'static str, Check<'_>)> = vec![
        (1, "reciprocal-sum digits", Box::new(move || c1_sum_digits(&dir(1)))),
        (2, "continued-fraction prefix 1, 1, 14", Box::new(move || c2_cf_prefix(&dir(2)))),
        (3, "u_M digits", Box::new(move || c3_um_digits(&dir(3)))),
        (4, "1/Q_k^2 table rows", Box::new(move || c4_table(&dir(4)))),
        (5, "Levy and Khinchin constants", Box::new(c5_constants)),
        (6, "catalog facts", Box::new(c6_catalog)),
        (7, "growth fit and c", Box::new(c7_wagstaff)),
        (8, "Q_47 and the growth bound", Box::new(c8_fig9)),
        (9, "desk-scale substitutes", Box::new(c9_substitutes)),
        (10, "performance and resume", Box::new(move || c10_performance(&dir(10)))),
        (11, "dyadic contrast pipeline", Box::new(move || c11_dyadic(&dir(11)))),
    ];
    let mut outcomes = Vec::new();
    for (id, title, f) in criteria {
        let t = Instant::now();
        let (pass, detail) = f();
        outcomes.push(Outcome {
            id,
            title,
            pass,
            detail,
            elapsed: t.elapsed(),
        });
    }
    for o in &outcomes {
        println!(
            "{} {:>2} {}: {} [{:.2} s]{}",
            if o.pass { "PASS" } else { "FAIL" },
            o.id,
            o.title,
            o.detail,
            o.elapsed.as_secs_f64(),
            if !o.pass && KNOWN_UNATTAINABLE.contains(&o.id) { " (known unattainable)" } else { "" }
        );
    }
    let unexpected: Vec<u32> = outcomes
        .iter()
        .filter(|o| !o.pass && !KNOWN_UNATTAINABLE.contains(&o.id))
        .map(|o| o.id)
        .collect();
    assert!(unexpected.is_empty(), "failing criteria: {unexpected:?}");
}
