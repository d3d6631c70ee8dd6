//! Quotient-at-a-time expansion with serializable state, for long runs that
//! must survive interruption.

use num_bigint::{BigInt, BigUint};
use serde::{Deserialize, Serialize};

use super::{split_rational, ContFracError, ConvergentState, ExpansionMode, Tail};
use crate::euclid::QuotientStream;
use crate::exact::{pow10, BigRational, DecimalApprox};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum Engine {
    Exact(Option<QuotientStream>),
    Certified(Option<(QuotientStream, QuotientStream)>),
    Paper {
        stream: Option<QuotientStream>,
        state: ConvergentState,
        limit: BigUint,
    },
}

/// Yields the same quotients as [`super::expand_rational`],
/// [`super::expand_certified`] or [`super::expand_paper_mode`], one at a
/// time. Serializing the stream between two calls to `next` and resuming
/// from the copy continues the sequence exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpansionStream {
    a0: BigInt,
    tail: Tail,
    engine: Engine,
    done: bool,
}

impl ExpansionStream {
    pub fn exact(r: &BigRational) -> Self {
        let (a0, stream) = split_rational(r);
        Self {
            a0,
            tail: Tail::Exact,
            engine: Engine::Exact(stream),
            done: false,
        }
    }

    pub fn certified(low: &BigRational, high: &BigRational) -> Result<Self, ContFracError> {
        if low > high {
            return Err(ContFracError::InvalidInterval);
        }
        if low == high {
            return Ok(Self::exact(low));
        }
        let (a0_lo, lo) = split_rational(low);
        let (a0_hi, hi) = split_rational(high);
        if a0_lo != a0_hi {
            return Err(ContFracError::EmptyPrefix);
        }
        let width = high - low;
        let digits = (-width.ln_abs() / std::f64::consts::LN_10).floor().max(0.0) as u64;
        Ok(Self {
            a0: a0_lo,
            tail: Tail::Truncated { precision: digits },
            engine: Engine::Certified(lo.zip(hi)),
            done: false,
        })
    }

    pub fn paper(value: &BigRational, digits: u64) -> Self {
        let (a0, stream) = split_rational(value);
        let state = ConvergentState::new(&a0);
        Self {
            a0,
            tail: Tail::Truncated { precision: digits },
            engine: Engine::Paper {
                stream,
                state,
                limit: (pow10(digits) - 1u32).sqrt(),
            },
            done: false,
        }
    }

    pub fn from_decimal(approx: &DecimalApprox, mode: ExpansionMode) -> Result<Self, ContFracError> {
        let truncated = Tail::Truncated {
            precision: approx.precision(),
        };
        match mode {
            ExpansionMode::Exact => Ok(Self::exact(&approx.to_rational())),
            ExpansionMode::Certified => {
                let (lo, hi) = approx.enclosure();
                let mut s = Self::certified(&lo, &hi)?;
                s.tail = truncated;
                Ok(s)
            }
            ExpansionMode::Paper => Ok(Self::paper(&approx.to_rational(), approx.precision())),
        }
    }

    pub fn a0(&self) -> &BigInt {
        &self.a0
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    pub fn is_finished(&self) -> bool {
        self.done
    }
}

impl Iterator for ExpansionStream {
    type Item = BigUint;

    fn next(&mut self) -> Option<BigUint> {
        if self.done {
            return None;
        }
        let q = match &mut self.engine {
            Engine::Exact(s) => s.as_mut().and_then(Iterator::next),
            Engine::Certified(pair) => pair.as_mut().and_then(|(lo, hi)| match (lo.next(), hi.next()) {
                (Some(x), Some(y)) if x == y => Some(x),
                _ => None,
            }),
            Engine::Paper {
                stream,
                state,
                limit,
            } => stream.as_mut().and_then(Iterator::next).and_then(|q| {
                state.push(&q);
                (state.q() <= limit).then_some(q)
            }),
        };
        if q.is_none() {
            self.done = true;
            // Drop the remainders; a finished stream serializes small.
            match &mut self.engine {
                Engine::Exact(s) => *s = None,
                Engine::Certified(pair) => *pair = None,
                Engine::Paper { stream, .. } => *stream = None,
            }
        }
        q
    }
}
