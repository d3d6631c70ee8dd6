use std::fs::OpenOptions;
use std::io::{BufWriter, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context as _, Result};
use cflab_core::{
    checkpoint, to_decimal, BigRational, BigUint, DecimalApprox, ExpansionMode, ExpansionStream,
    ReferenceConstants, StatAccumulator, Tail,
};
use clap::Args;
use serde::{Deserialize, Serialize};

use super::{preview, sequence_sum};
use crate::config::{RunConfig, Statistic};
use crate::error::CliError;
use crate::manifest::Recorder;
use crate::{Context, SequenceArgs};

#[derive(Debug, Args)]
pub struct CfArgs {
    #[command(flatten)]
    pub sequence: SequenceArgs,
    /// File holding `p/q`, an integer, or a decimal. A decimal is used with
    /// all of its digits.
    #[arg(long, conflicts_with_all = ["numerator", "denominator"])]
    pub input: Option<PathBuf>,
    /// Numerator file, as written by `cflab sum`.
    #[arg(long, requires = "denominator")]
    pub numerator: Option<PathBuf>,
    #[arg(long, requires = "numerator")]
    pub denominator: Option<PathBuf>,
    /// Output prefix.
    #[arg(long)]
    pub name: Option<String>,
    /// Skip the running statistics.
    #[arg(long)]
    pub no_stats: bool,
    /// Stop (with a checkpoint) after this many quotients.
    #[arg(long, hide = true)]
    pub stop_after: Option<u64>,
}

/// Everything needed to continue a `cf` run.
#[derive(Debug, Serialize, Deserialize)]
struct CfCheckpoint {
    name: String,
    config: RunConfig,
    catalog_checksum: String,
    stream: ExpansionStream,
    count: u64,
    /// Length of the quotient file covering the first `count` quotients.
    cf_bytes: u64,
    /// 1-based index and value of the first largest quotient.
    largest: Option<(u64, BigUint)>,
    stats: Option<StatAccumulator>,
    decimal: Option<DecimalApprox>,
    complete: bool,
}

enum Source {
    Rational(BigRational),
    Decimal(DecimalApprox),
}

fn read_trimmed(p: &Path) -> Result<String> {
    Ok(std::fs::read_to_string(p)
        .with_context(|| format!("reading {}", p.display()))?
        .trim()
        .to_string())
}

fn parse_source(text: &str, origin: &Path) -> Result<Source> {
    if text.contains('/') {
        let r = text
            .parse::<BigRational>()
            .map_err(|e| CliError::Config(format!("{}: {e}", origin.display())))?;
        Ok(Source::Rational(r))
    } else {
        let d = DecimalApprox::parse(text)
            .map_err(|e| CliError::Config(format!("{}: {e}", origin.display())))?;
        Ok(Source::Decimal(d))
    }
}

fn file_name_stem(p: &Path) -> String {
    let stem = p
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "input".into());
    for suffix in ["_decimal", "_numerator", "_rational"] {
        if let Some(s) = stem.strip_suffix(suffix) {
            return s.to_string();
        }
    }
    stem
}

pub fn run(ctx: &Context, args: &CfArgs) -> Result<()> {
    let c = &ctx.config;
    let (source, default_name) = if let Some(p) = &args.input {
        (parse_source(&read_trimmed(p)?, p)?, file_name_stem(p))
    } else if let (Some(n), Some(d)) = (&args.numerator, &args.denominator) {
        let text = format!("{}/{}", read_trimmed(n)?, read_trimmed(d)?);
        (parse_source(&text, n)?, file_name_stem(n))
    } else {
        (Source::Rational(sequence_sum(ctx)?), c.constant_name())
    };
    let name = args.name.clone().unwrap_or(default_name);
    let mut rec = Recorder::new(&c.out)?;

    let mut decimal = None;
    let stream = match (&source, c.mode) {
        (Source::Rational(r), ExpansionMode::Exact) => ExpansionStream::exact(r),
        (Source::Rational(r), mode) => {
            let d = to_decimal(r, c.precision);
            rec.write(&format!("{name}_decimal.txt"), format!("{d}\n"))?;
            let s = ExpansionStream::from_decimal(&d, mode)?;
            decimal = Some(d);
            s
        }
        (Source::Decimal(d), mode) => {
            let s = ExpansionStream::from_decimal(d, mode)?;
            decimal = Some(d.clone());
            s
        }
    };
    let stats = if args.no_stats || c.statistics.is_empty() {
        None
    } else {
        let refs = ReferenceConstants::compute();
        Some(StatAccumulator::new(stream.a0(), c.stride, c.m_max, &refs)?)
    };
    if !c.statistics.contains(&Statistic::Digits) {
        decimal = None;
    }
    let mut ck = CfCheckpoint {
        name,
        config: c.clone(),
        catalog_checksum: ctx.catalog.checksum(),
        stream,
        count: 0,
        cf_bytes: 0,
        largest: None,
        stats,
        decimal,
        complete: false,
    };
    if drive(&mut ck, &c.out, args.stop_after)? {
        finish(&ck, &c.out, rec)?;
    }
    Ok(())
}

pub fn resume(path: &Path) -> Result<()> {
    let mut ck: CfCheckpoint = checkpoint::read(path)
        .map_err(|e| CliError::Checkpoint(format!("{}: {e}", path.display())))?;
    if ck.complete {
        println!(
            "run `{}` is already complete ({} quotients); nothing to do",
            ck.name, ck.count
        );
        return Ok(());
    }
    let out = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."))
        .to_path_buf();
    println!("resuming `{}` after {} quotients", ck.name, ck.count);
    let rec = Recorder::new(&out)?;
    if drive(&mut ck, &out, None)? {
        finish(&ck, &out, rec)?;
    }
    Ok(())
}

fn checkpoint_path(out: &Path, name: &str) -> PathBuf {
    out.join(format!("{name}_cf.ckpt"))
}

fn cf_path(out: &Path, name: &str) -> PathBuf {
    out.join(format!("{name}_cf.txt"))
}

/// Streams quotients to the text file, checkpointing every
/// `checkpoint_interval` quotients. Returns `true` once the expansion ends.
fn drive(ck: &mut CfCheckpoint, out: &Path, stop_after: Option<u64>) -> Result<bool> {
    let path = cf_path(out, &ck.name);
    let ckpt = checkpoint_path(out, &ck.name);
    let mut file = if ck.count == 0 && ck.cf_bytes == 0 {
        let mut f = std::fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        let header = format!("a0={} tail={}\n", ck.stream.a0(), ck.stream.tail());
        f.write_all(header.as_bytes())?;
        ck.cf_bytes = header.len() as u64;
        f
    } else {
        let mut f = OpenOptions::new()
            .write(true)
            .open(&path)
            .map_err(|e| CliError::Checkpoint(format!("cannot open {}: {e}", path.display())))?;
        let len = f.metadata()?.len();
        if len < ck.cf_bytes {
            return Err(CliError::Checkpoint(format!(
                "{} has {len} bytes but the checkpoint covers {}",
                path.display(),
                ck.cf_bytes
            ))
            .into());
        }
        f.set_len(ck.cf_bytes)?;
        f.seek(SeekFrom::End(0))?;
        f
    };
    let interval = ck.config.checkpoint_interval;
    let started = Instant::now();
    let mut w = BufWriter::new(&mut file);
    let mut line = String::new();
    let mut since = 0u64;
    while let Some(q) = ck.stream.next() {
        line.clear();
        line.push_str(&q.to_string());
        line.push('\n');
        w.write_all(line.as_bytes())?;
        ck.cf_bytes += line.len() as u64;
        ck.count += 1;
        if let Some(acc) = &mut ck.stats {
            acc.push(&q);
        }
        if ck.largest.as_ref().is_none_or(|(_, m)| &q > m) {
            ck.largest = Some((ck.count, q));
        }
        since += 1;
        let stop = stop_after.is_some_and(|s| ck.count >= s);
        if since >= interval || stop {
            w.flush()?;
            checkpoint::write(&ckpt, &*ck)?;
            since = 0;
        }
        if stop {
            println!(
                "stopped after {} quotients; continue with `cflab resume {}`",
                ck.count,
                ckpt.display()
            );
            return Ok(false);
        }
    }
    w.flush()?;
    drop(w);
    file.sync_all()?;
    ck.complete = true;
    checkpoint::write(&ckpt, &*ck)?;
    eprintln!(
        "{} quotients written in {:.2} s",
        ck.count,
        started.elapsed().as_secs_f64()
    );
    Ok(true)
}

fn finish(ck: &CfCheckpoint, out: &Path, mut rec: Recorder) -> Result<()> {
    rec.track(cf_path(out, &ck.name));
    let decimal = out.join(format!("{}_decimal.txt", ck.name));
    if decimal.exists() {
        rec.track(decimal);
    }
    println!("{}: a0 = {}, tail {}", ck.name, ck.stream.a0(), ck.stream.tail());
    println!("quotients: {}", ck.count);
    if let Some((k, a)) = &ck.largest {
        let s = a.to_string();
        println!("largest quotient: a_{k} = {}", preview(&s, 60));
    }
    if let Some(acc) = &ck.stats {
        let precision = match ck.stream.tail() {
            Tail::Exact => None,
            Tail::Truncated { precision } => Some(precision),
        };
        let which: Vec<Statistic> = ck
            .config
            .statistics
            .iter()
            .copied()
            .filter(|s| *s != Statistic::Digits || ck.decimal.is_some())
            .collect();
        super::stats::write_outputs(&mut rec, &ck.name, acc, precision, &which, ck.decimal.as_ref())?;
    }
    rec.finish(
        &format!("{}_cf", ck.name),
        "cf",
        &ck.config,
        ck.catalog_checksum.clone(),
    )?;
    Ok(())
}
