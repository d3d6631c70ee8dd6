use std::fmt::Write as _;
use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use anyhow::{Context as _, Result};
use cflab_core::exact::digit_census;
use cflab_core::stats::{fmt_real, power_law_window, record_indices, sign_changes};
use cflab_core::{CfExpansion, DecimalApprox, ReferenceConstants, StatAccumulator, StatSeries};
use clap::Args;

use crate::config::Statistic;
use crate::error::CliError;
use crate::manifest::Recorder;
use crate::Context;

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Expansion in cflab text form (`<name>_cf.txt`).
    pub cf_file: PathBuf,
    /// Decimal expansion for the digit census.
    #[arg(long)]
    pub digits_from: Option<PathBuf>,
    /// Output prefix; defaults to the file stem without `_cf`.
    #[arg(long)]
    pub name: Option<String>,
    /// Fit |K(n) - K| ~ C n^e over `FROM,TO`.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    pub fit_window: Option<Vec<u64>>,
}

pub fn run(ctx: &Context, args: &StatsArgs) -> Result<()> {
    let c = &ctx.config;
    let file = File::open(&args.cf_file)
        .with_context(|| format!("opening {}", args.cf_file.display()))?;
    let cf = CfExpansion::read_text(BufReader::new(file))
        .with_context(|| format!("reading {}", args.cf_file.display()))?;
    let name = args.name.clone().unwrap_or_else(|| {
        let stem = args
            .cf_file
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "cf".into());
        stem.strip_suffix("_cf").map(str::to_string).unwrap_or(stem)
    });
    let refs = ReferenceConstants::compute();
    let mut acc = StatAccumulator::new(cf.a0(), c.stride, c.m_max, &refs)?;
    for a in cf.quotients() {
        acc.push(a);
    }
    let digits = match &args.digits_from {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Some(DecimalApprox::parse(&text).with_context(|| format!("parsing {}", p.display()))?)
        }
        None => None,
    };
    let mut rec = Recorder::new(&c.out)?;
    let precision = match cf.tail() {
        cflab_core::Tail::Exact => None,
        cflab_core::Tail::Truncated { precision } => Some(precision),
    };
    println!("{name}: {} quotients", cf.len());
    write_outputs(&mut rec, &name, &acc, precision, &c.statistics, digits.as_ref())?;
    if let Some(w) = &args.fit_window {
        let series = acc.khinchin(&name, precision);
        let fit = power_law_window(&series, refs.khinchin.value, w[0], w[1])?;
        let json = serde_json::json!({
            "statistic": "khinchin",
            "from": w[0],
            "to": w[1],
            "prefactor": fit.prefactor,
            "exponent": fit.exponent,
        });
        rec.write(&format!("{name}_khinchin_fit.json"), serde_json::to_string_pretty(&json)?)?;
        println!(
            "|K(n) - K| ~ {} n^{} over n in [{}, {}]",
            fmt_real(fit.prefactor),
            fmt_real(fit.exponent),
            w[0],
            w[1]
        );
    }
    rec.finish(&format!("{name}_stats"), "stats", c, ctx.catalog.checksum())?;
    Ok(())
}

fn events_csv(series: &[&StatSeries], records: bool) -> String {
    let mut out = String::from(if records { "statistic,n,value,distance\n" } else { "statistic,n,sign_changes\n" });
    for s in series {
        let reference = s.reference.expect("running series carry a reference");
        if records {
            let idx = record_indices(s, reference);
            for p in s.points.iter().filter(|p| idx.contains(&p.n)) {
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    s.statistic,
                    p.n,
                    fmt_real(p.value),
                    fmt_real((p.value - reference).abs())
                );
            }
        } else {
            let counts = sign_changes(s, reference);
            let mut last = 0;
            for (p, &k) in s.points.iter().zip(&counts) {
                if k > last {
                    let _ = writeln!(out, "{},{},{}", s.statistic, p.n, k);
                    last = k;
                }
            }
        }
    }
    out
}

/// Writes the files for each requested statistic and prints one line each.
pub fn write_outputs(
    rec: &mut Recorder,
    name: &str,
    acc: &StatAccumulator,
    precision: Option<u64>,
    which: &[Statistic],
    digits: Option<&DecimalApprox>,
) -> Result<()> {
    let khinchin = acc.khinchin(name, precision);
    let levy = acc.levy(name, precision);
    for stat in which {
        match stat {
            Statistic::Khinchin | Statistic::Levy => {
                let s = if *stat == Statistic::Khinchin { &khinchin } else { &levy };
                rec.write(&format!("{}.csv", s.file_stem()), s.to_csv())?;
                rec.write(&format!("{}.json", s.file_stem()), s.to_json())?;
                if let Some(p) = s.last() {
                    println!(
                        "{}({}) = {} (reference {}, {} sign changes)",
                        s.statistic,
                        p.n,
                        fmt_real(p.value),
                        fmt_real(s.reference.unwrap_or(f64::NAN)),
                        p.sign_changes.unwrap_or(0)
                    );
                }
            }
            Statistic::Signs => {
                rec.write(&format!("{name}_signs.csv"), events_csv(&[&khinchin, &levy], false))?;
            }
            Statistic::Records => {
                rec.write(&format!("{name}_records.csv"), events_csv(&[&khinchin, &levy], true))?;
            }
            Statistic::Kuzmin => {
                let h = acc.histogram();
                rec.write(&format!("{name}_kuzmin.csv"), h.to_csv())?;
                println!(
                    "gauss-kuzmin: {} quotients, {} above {}",
                    h.total(),
                    h.overflow(),
                    h.m_max()
                );
            }
            Statistic::Digits => {
                let Some(d) = digits else {
                    return Err(CliError::Config(
                        "the digits statistic needs a decimal expansion (--digits-from)".into(),
                    )
                    .into());
                };
                let census = digit_census(d)?;
                let freq = census.frequencies();
                let mut out = String::from("digit,count,frequency\n");
                for (k, (&count, f)) in census.counts.iter().zip(freq).enumerate() {
                    let _ = writeln!(out, "{k},{count},{}", fmt_real(f));
                }
                rec.write(&format!("{name}_digits.csv"), &out)?;
                println!("digit census over {} digits:", census.total());
                print!("{out}");
            }
        }
    }
    Ok(())
}
