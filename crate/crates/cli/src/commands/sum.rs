use anyhow::Result;
use cflab_core::to_decimal;

use super::{preview, sequence_sum};
use crate::manifest::Recorder;
use crate::Context;

pub fn run(ctx: &Context) -> Result<()> {
    let c = &ctx.config;
    let name = c.constant_name();
    let r = sequence_sum(ctx)?;
    let decimal = to_decimal(&r, c.precision);
    let mut rec = Recorder::new(&c.out)?;
    let num = r.numer().to_string();
    let den = r.denom().to_string();
    rec.write(&format!("{name}_numerator.txt"), format!("{num}\n"))?;
    rec.write(&format!("{name}_denominator.txt"), format!("{den}\n"))?;
    let text = decimal.to_string();
    rec.write(&format!("{name}_decimal.txt"), format!("{text}\n"))?;
    println!("{name}: sum of 1/t_k over {} {} terms", c.terms, c.sequence);
    println!("numerator:   {}", preview(&num, 60));
    println!("denominator: {}", preview(&den, 60));
    let (int, frac) = decimal.parts();
    let shown = &frac[..frac.len().min(60)];
    println!("decimal ({} digits): {int}.{shown}", c.precision);
    rec.finish(&format!("{name}_sum"), "sum", c, ctx.catalog.checksum())?;
    Ok(())
}
