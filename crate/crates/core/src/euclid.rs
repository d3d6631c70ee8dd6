//! Euclidean quotient extraction with Lehmer acceleration.
//!
//! [`QuotientStream`] walks the Euclidean remainder sequence of `(a, b)` and
//! yields the partial quotients of `a / b`. While both operands are large,
//! quotients are predicted from the leading 64 bits (Knuth, TAOCP vol. 2,
//! Algorithm 4.5.2L) and the full operands are updated once per batch with a
//! 2x2 cofactor matrix. A single-precision prediction is accepted only when
//! both bracketing quotients agree, so every emitted quotient equals the one
//! plain long division would produce.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Resumable state of a Euclidean run: the current remainder pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EuclidState {
    pub a: BigUint,
    pub b: BigUint,
}

/// Serializable mid-run, including quotients already predicted but not yet
/// yielded, so a checkpointed stream resumes exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuotientStream {
    a: BigUint,
    b: BigUint,
    pending: Vec<BigUint>,
    cursor: usize,
}

impl QuotientStream {
    /// Quotients of `a / b`. The first one is `a div b` and may be zero.
    pub fn new(a: BigUint, b: BigUint) -> Self {
        Self {
            a,
            b,
            pending: Vec::new(),
            cursor: 0,
        }
    }

    pub fn from_state(state: EuclidState) -> Self {
        Self::new(state.a, state.b)
    }

    /// Remainder pair after the last batch. Quotients already pulled into
    /// the iterator buffer but not yet yielded are not represented; serialize
    /// the stream itself to capture them.
    pub fn state(&self) -> EuclidState {
        EuclidState {
            a: self.a.clone(),
            b: self.b.clone(),
        }
    }

    pub fn is_finished(&self) -> bool {
        self.b.is_zero()
    }

    /// Once finished, `a` holds the gcd.
    pub fn remainder_pair(&self) -> (&BigUint, &BigUint) {
        (&self.a, &self.b)
    }

    /// Appends at least one quotient to `out` and returns `true`, or
    /// returns `false` when the remainder sequence has ended.
    pub fn next_batch(&mut self, out: &mut Vec<BigUint>) -> bool {
        if self.b.is_zero() {
            return false;
        }
        if self.a < self.b {
            out.push(BigUint::zero());
            std::mem::swap(&mut self.a, &mut self.b);
            return true;
        }
        let a_bits = self.a.bits();
        if a_bits <= 128 {
            let mut x = self.a.to_u128().expect("fits in 128 bits");
            let mut y = self.b.to_u128().expect("b < a fits too");
            while y != 0 {
                out.push(BigUint::from(x / y));
                (x, y) = (y, x % y);
            }
            self.a = BigUint::from(x);
            self.b = BigUint::zero();
            return true;
        }
        let shift = a_bits - 64;
        let a_hat = top_word(&self.a, shift);
        let b_hat = top_word(&self.b, shift);
        let start = out.len();
        let cof = lehmer_inner(a_hat, b_hat, out);
        if cof.b == 0 {
            // Prediction failed at the first quotient: one long division.
            debug_assert_eq!(out.len(), start);
            let (q, r) = self.a.div_rem(&self.b);
            out.push(q);
            self.a = std::mem::replace(&mut self.b, r);
        } else {
            let new_a = combine(&self.a, &self.b, cof.a, cof.b);
            let new_b = combine(&self.a, &self.b, cof.c, cof.d);
            self.a = new_a;
            self.b = new_b;
        }
        true
    }

    /// Runs to completion and returns the gcd.
    pub fn finish(mut self) -> BigUint {
        let mut scratch = Vec::new();
        while self.next_batch(&mut scratch) {
            scratch.clear();
        }
        self.a
    }
}

impl Iterator for QuotientStream {
    type Item = BigUint;

    fn next(&mut self) -> Option<BigUint> {
        if self.cursor == self.pending.len() {
            self.pending.clear();
            self.cursor = 0;
            let mut buf = std::mem::take(&mut self.pending);
            let more = self.next_batch(&mut buf);
            self.pending = buf;
            if !more {
                return None;
            }
        }
        let q = std::mem::take(&mut self.pending[self.cursor]);
        self.cursor += 1;
        Some(q)
    }
}

struct Cofactors {
    a: i128,
    b: i128,
    c: i128,
    d: i128,
}

/// Single-precision phase. Returns the accumulated cofactor matrix; `b == 0`
/// means no quotient could be certified.
fn lehmer_inner(a_hat: u64, b_hat: u64, out: &mut Vec<BigUint>) -> Cofactors {
    let (mut ah, mut bh) = (i128::from(a_hat), i128::from(b_hat));
    let (mut ca, mut cb, mut cc, mut cd) = (1i128, 0i128, 0i128, 1i128);
    loop {
        let den1 = bh + cc;
        let den2 = bh + cd;
        if den1 <= 0 || den2 <= 0 {
            break;
        }
        let q = (ah + ca) / den1;
        if q != (ah + cb) / den2 {
            break;
        }
        out.push(BigUint::from(q as u128));
        (ca, cc) = (cc, ca - q * cc);
        (cb, cd) = (cd, cb - q * cd);
        (ah, bh) = (bh, ah - q * bh);
    }
    Cofactors {
        a: ca,
        b: cb,
        c: cc,
        d: cd,
    }
}

/// `x·a + y·b`, where `x` and `y` have opposite signs (or one is zero) and
/// the result is known to be non-negative.
fn combine(a: &BigUint, b: &BigUint, x: i128, y: i128) -> BigUint {
    if x >= 0 && y <= 0 {
        a * (x as u128) - b * ((-y) as u128)
    } else {
        debug_assert!(x <= 0 && y >= 0);
        b * (y as u128) - a * ((-x) as u128)
    }
}

/// `(x >> shift)` truncated to 64 bits, reading at most two limbs.
pub(crate) fn top_word(x: &BigUint, shift: u64) -> u64 {
    if x.bits() <= shift {
        return 0;
    }
    let mut digits = x.iter_u64_digits();
    let limb = (shift / 64) as usize;
    let off = shift % 64;
    let lo = digits.nth(limb).unwrap_or(0);
    if off == 0 {
        return lo;
    }
    let hi = digits.next().unwrap_or(0);
    (lo >> off) | (hi << (64 - off))
}

/// Greatest common divisor via the Lehmer engine.
pub fn gcd(x: &BigUint, y: &BigUint) -> BigUint {
    if x.is_zero() {
        return y.clone();
    }
    if y.is_zero() {
        return x.clone();
    }
    let (a, b) = if x >= y { (x, y) } else { (y, x) };
    QuotientStream::new(a.clone(), b.clone()).finish()
}
