//! Exact constants from integer sequences, continued-fraction expansion and
//! the statistics used to probe irrationality of the results.
//!
//! The usual pipeline is [`reciprocal_sum`] → [`expand_rational`] (or one
//! of the interval-certified variants) → [`convergents`] → the running
//! statistics in [`stats`] and the growth diagnostics in [`diagnostics`].

pub mod catalog;
pub mod checkpoint;
pub mod contfrac;
pub mod diagnostics;
pub mod euclid;
pub mod exact;
pub mod fit;
pub mod stats;

pub use catalog::{
    mersenne_number, mod4_census, wagstaff_fit, CatalogError, FitOrdinate, MersenneCatalog,
    Mod4Census, SequenceKind, SequenceSpec, WagstaffFit, WagstaffModel,
};
pub use checkpoint::CheckpointError;
pub use contfrac::{
    cf_from_quotient_sequence, convergents, error_bounds, expand_certified, expand_decimal,
    expand_paper_mode, expand_rational, from_cf, CfExpansion, ContFracError, Convergent,
    ConvergentSeries, ConvergentState, ErrorSandwich, ExpansionMode, ExpansionStream, Tail,
};
pub use diagnostics::{
    Approximant, DiagnosticOptions, DiagnosticReport, DiagnosticsError, LogDenominators,
    WagstaffBound,
};
pub use euclid::{EuclidState, QuotientStream};
pub use exact::{
    digit_census, inverse_square_sci, ln_biguint, reciprocal_sum, sci_truncated, to_decimal,
    BigRational, DecimalApprox, DigitCensus, ExactError,
};
pub use stats::{
    khinchin_constant, levy_constant, KuzminHistogram, ReferenceConstants, StatAccumulator,
    StatSeries, StatsError,
};

pub use num_bigint::{BigInt, BigUint};
