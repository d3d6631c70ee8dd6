pub mod cf;
pub mod diagnostics;
pub mod stats;
pub mod sum;
pub mod um;

use anyhow::Result;
use cflab_core::exact::reciprocal_sum_of_terms;
use cflab_core::{BigRational, BigUint, SequenceSpec};

use crate::error::CliError;
use crate::Context;

/// Terms of the configured sequence.
pub fn sequence_terms(ctx: &Context) -> Result<Vec<BigUint>> {
    let spec = SequenceSpec::new(ctx.config.sequence.clone(), ctx.config.terms);
    Ok(spec
        .terms(&ctx.catalog)
        .map_err(|e| CliError::Config(e.to_string()))?)
}

/// Reciprocal sum of the configured sequence.
pub fn sequence_sum(ctx: &Context) -> Result<BigRational> {
    Ok(reciprocal_sum_of_terms(&sequence_terms(ctx)?))
}

/// At most `max` characters of `s`, with an ellipsis when shortened.
pub fn preview(s: &str, max: usize) -> String {
    if s.len() <= max {
        s.to_string()
    } else {
        format!("{}... ({} digits)", &s[..max], s.len())
    }
}
