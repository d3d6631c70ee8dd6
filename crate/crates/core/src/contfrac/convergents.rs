use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::CfExpansion;

/// `P_n / Q_n = [a0; a1, ..., an]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Convergent {
    pub n: usize,
    pub p: BigInt,
    pub q: BigUint,
}

/// The two most recent convergents. Advancing by one quotient applies
/// `P_{n+1} = a_{n+1} P_n + P_{n-1}` and the same for `Q`, starting from
/// `P_0 = a0, Q_0 = 1, P_{-1} = 1, Q_{-1} = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvergentState {
    n: usize,
    p: BigInt,
    q: BigUint,
    p_prev: BigInt,
    q_prev: BigUint,
}

impl ConvergentState {
    pub fn new(a0: &BigInt) -> Self {
        Self {
            n: 0,
            p: a0.clone(),
            q: BigUint::one(),
            p_prev: BigInt::one(),
            q_prev: BigUint::zero(),
        }
    }

    pub fn push(&mut self, a: &BigUint) {
        let p_next = BigInt::from(a.clone()) * &self.p + &self.p_prev;
        let q_next = a * &self.q + &self.q_prev;
        self.p_prev = std::mem::replace(&mut self.p, p_next);
        self.q_prev = std::mem::replace(&mut self.q, q_next);
        self.n += 1;
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> &BigInt {
        &self.p
    }

    pub fn q(&self) -> &BigUint {
        &self.q
    }

    /// `(P_{n-1}, Q_{n-1})`; for `n = 0` this is `(1, 0)`.
    pub fn previous(&self) -> (&BigInt, &BigUint) {
        (&self.p_prev, &self.q_prev)
    }

    pub fn current(&self) -> Convergent {
        Convergent {
            n: self.n,
            p: self.p.clone(),
            q: self.q.clone(),
        }
    }
}

/// Lazily yields `(P_n, Q_n)` for `n = 0..=len`.
#[derive(Debug, Clone)]
pub struct ConvergentSeries<'a> {
    quotients: &'a [BigUint],
    state: ConvergentState,
    started: bool,
}

impl<'a> ConvergentSeries<'a> {
    pub fn new(cf: &'a CfExpansion) -> Self {
        Self {
            quotients: cf.quotients(),
            state: ConvergentState::new(cf.a0()),
            started: false,
        }
    }

    pub fn state(&self) -> &ConvergentState {
        &self.state
    }
}

impl Iterator for ConvergentSeries<'_> {
    type Item = Convergent;

    fn next(&mut self) -> Option<Convergent> {
        if !self.started {
            self.started = true;
            return Some(self.state.current());
        }
        let a = self.quotients.get(self.state.n)?;
        self.state.push(a);
        Some(self.state.current())
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.quotients.len() - self.state.n + usize::from(!self.started);
        (left, Some(left))
    }
}

pub fn convergents(cf: &CfExpansion) -> ConvergentSeries<'_> {
    ConvergentSeries::new(cf)
}
