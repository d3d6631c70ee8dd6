use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use anyhow::{Context as _, Result};
use cflab_core::catalog::ln_mersenne;
use cflab_core::diagnostics::{quotient_logs, tsr_delta_range};
use cflab_core::{
    convergents, Approximant, BigInt, BigUint, CfExpansion, Convergent, DecimalApprox,
    DiagnosticOptions, DiagnosticReport, LogDenominators, SequenceKind, SequenceSpec, Tail,
    WagstaffBound, WagstaffModel,
};
use clap::{Args, ValueEnum};

use crate::error::CliError;
use crate::manifest::Recorder;
use crate::{Context, SequenceArgs};

/// Above this many bits in Q_N the exact convergents are skipped.
const EXACT_BITS_LIMIT: u64 = 1 << 24;

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BoundArg {
    /// c = 2.101893933 with the full-precision Euler constant in the exponent.
    Published,
    /// c and exponent both from the full-precision Euler constant.
    Model,
}

#[derive(Debug, Args)]
pub struct DiagnosticsArgs {
    #[command(flatten)]
    pub sequence: SequenceArgs,
    /// Stored expansion to analyse instead of a sequence.
    #[arg(long)]
    pub cf: Option<PathBuf>,
    /// Work with ln Q_n only; chosen automatically for very large Q_n.
    #[arg(long)]
    pub log_domain: bool,
    /// Evaluate delta for n = 1..=N.
    #[arg(long)]
    pub delta_terms: Option<usize>,
    /// Decimal approximation of the target used for delta.
    #[arg(long)]
    pub value: Option<PathBuf>,
    /// Print the full summary.
    #[arg(long)]
    pub summary: bool,
    /// Threshold B for ln ln Q_n / n.
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    #[arg(long, value_enum, default_value = "published")]
    pub bound: BoundArg,
    /// Output prefix.
    #[arg(long)]
    pub name: Option<String>,
}

/// Quotients `a_1..a_N`, exact where affordable, and their logarithms.
struct Quotients {
    a0: BigInt,
    exact: Option<Vec<BigUint>>,
    ln_a: Vec<f64>,
    exponents: Option<Vec<u64>>,
}

fn load_quotients(ctx: &Context, args: &DiagnosticsArgs) -> Result<(Quotients, String)> {
    if let Some(p) = &args.cf {
        let f = File::open(p).with_context(|| format!("opening {}", p.display()))?;
        let cf = CfExpansion::read_text(BufReader::new(f))
            .with_context(|| format!("reading {}", p.display()))?;
        let stem = p
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "cf".into());
        let name = stem.strip_suffix("_cf").map(str::to_string).unwrap_or(stem);
        let ln_a = quotient_logs(cf.quotients());
        let (a0, qs, _) = cf.into_parts();
        return Ok((
            Quotients {
                a0,
                exact: Some(qs),
                ln_a,
                exponents: None,
            },
            name,
        ));
    }
    let c = &ctx.config;
    let spec = SequenceSpec::new(c.sequence.clone(), c.terms);
    let exponents = spec
        .exponents(&ctx.catalog)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let (ln_a, exact) = match (&c.sequence, &exponents) {
        (SequenceKind::Mersenne, Some(e)) => (e.iter().map(|&p| ln_mersenne(p)).collect(), None),
        (_, Some(e)) => (
            e.iter().map(|&p| p as f64 * std::f64::consts::LN_2).collect(),
            None,
        ),
        (_, None) => {
            let t = super::sequence_terms(ctx)?;
            (quotient_logs(&t), Some(t))
        }
    };
    Ok((
        Quotients {
            a0: BigInt::from(0),
            exact,
            ln_a,
            exponents,
        },
        c.constant_name(),
    ))
}

pub fn run(ctx: &Context, args: &DiagnosticsArgs) -> Result<()> {
    let c = &ctx.config;
    let (q, default_name) = load_quotients(ctx, args)?;
    let name = args.name.clone().unwrap_or(default_name);
    let n_total = q.ln_a.len();
    let bits: f64 = q.ln_a.iter().sum::<f64>() / std::f64::consts::LN_2;
    let log_domain = args.log_domain || bits > EXACT_BITS_LIMIT as f64;
    if log_domain && !args.log_domain {
        println!("Q_{n_total} has about {bits:.3e} bits; using the log-domain recurrence");
    }

    let delta_terms = match args.delta_terms {
        Some(m) => Some(m),
        None if !log_domain && n_total >= 3 => Some(n_total - 2),
        None => None,
    };
    // Exact quotients are needed for the convergents behind delta and for
    // the exact-mode logarithms.
    let needed = if log_domain {
        delta_terms.map_or(0, |m| (m + 2).min(n_total))
    } else {
        n_total
    };
    let needed_exact: Vec<BigUint> = match &q.exact {
        Some(t) => t[..needed].to_vec(),
        None if needed == 0 => Vec::new(),
        None => SequenceSpec::new(c.sequence.clone(), needed)
            .terms(&ctx.catalog)
            .map_err(|e| CliError::Config(e.to_string()))?,
    };
    let series: Vec<Convergent> = if needed_exact.is_empty() {
        Vec::new()
    } else {
        let cf = CfExpansion::new(q.a0.clone(), needed_exact, Tail::Truncated { precision: 0 })?;
        convergents(&cf).collect()
    };
    let logs = if log_domain {
        match (&c.sequence, &q.exponents, args.cf.is_none()) {
            (SequenceKind::Mersenne, Some(e), true) => LogDenominators::from_mersenne_exponents(e),
            _ => LogDenominators::from_quotient_logs(&q.ln_a),
        }
    } else {
        LogDenominators::from_convergents(&series)
    };

    let deltas = match delta_terms {
        None | Some(0) => Vec::new(),
        Some(m) => {
            let approx = match &args.value {
                Some(p) => {
                    let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                    let d = DecimalApprox::parse(&text)
                        .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
                    Approximant::from_decimal(&d)
                }
                None => {
                    let last = series.last().ok_or_else(|| {
                        CliError::Config("delta needs at least one quotient".into())
                    })?;
                    Approximant::from_convergent(last)
                }
            };
            tsr_delta_range(&approx, &series, m)?
        }
    };

    let opts = DiagnosticOptions {
        khinchin_b: args.b,
        bound: match args.bound {
            BoundArg::Published => WagstaffBound::published(),
            BoundArg::Model => WagstaffBound::from_model(&WagstaffModel::default()),
        },
        model: WagstaffModel::default(),
    };
    let report = DiagnosticReport::build(&q.ln_a, &logs, &deltas, &opts)?;
    let mut rec = Recorder::new(&c.out)?;
    rec.write(&format!("{name}_diagnostics.json"), report.to_json())?;
    rec.write(&format!("{name}_diagnostics.csv"), report.to_csv())?;

    let s = &report.summary;
    println!(
        "{name}: n = {}..={} ({})",
        s.n_first,
        s.n_last,
        if log_domain { "log domain" } else { "exact" }
    );
    if args.summary {
        print!("{}", report.summary_text());
    } else {
        match (s.delta_n_range, s.delta_mean) {
            (Some((a, b)), Some(mean)) => {
                println!("mean delta over n={a}..={b} ({} values): {mean:.6}", s.delta_count)
            }
            _ => println!("mean delta: n/a"),
        }
        println!("wagstaff bound violations at n: {:?}", s.wagstaff_violations);
    }
    rec.finish(&format!("{name}_diagnostics"), "diagnostics", c, ctx.catalog.checksum())?;
    Ok(())
}
