use std::fmt::Write as _;

use anyhow::Result;
use cflab_core::{cf_from_quotient_sequence, inverse_square_sci, ConvergentState, SequenceKind};

use super::sequence_terms;
use crate::manifest::Recorder;
use crate::Context;

/// `u_M = [0; M_1, M_2, ...]` for the Mersenne sequence, `u_<kind>` otherwise.
fn u_name(kind: &SequenceKind, terms: usize) -> String {
    match kind {
        SequenceKind::Mersenne => format!("um{terms}"),
        k => format!("u-{}{terms}", k.name()),
    }
}

pub fn run(ctx: &Context) -> Result<()> {
    let c = &ctx.config;
    let terms = sequence_terms(ctx)?;
    let (cf, decimal) = cf_from_quotient_sequence(&terms, c.precision)?;
    let name = u_name(&c.sequence, c.terms);
    let mut rec = Recorder::new(&c.out)?;
    rec.write(&format!("{name}_decimal.txt"), format!("{decimal}\n"))?;
    rec.write(&format!("{name}_cf.txt"), cf.to_text())?;

    let mut table = String::from("k,inverse_q_squared\n");
    let mut state = ConvergentState::new(cf.a0());
    for (i, t) in terms.iter().enumerate() {
        state.push(t);
        let _ = writeln!(table, "{},{}", i + 1, inverse_square_sci(state.q()));
    }
    rec.write(&format!("{name}_table.csv"), &table)?;

    println!("{name} = [0; first {} {} terms] to {} digits:", c.terms, c.sequence, c.precision);
    println!("{decimal}");
    println!();
    print!("{table}");
    rec.finish(&format!("{name}_um"), "um", c, ctx.catalog.checksum())?;
    Ok(())
}
