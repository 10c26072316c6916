//! Positional encoding of automaton states across several cells.

use serde::{Deserialize, Serialize};

use crate::device::StateId;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncodingMode {
    /// One base-6 digit per cell, digit `v` stored as `S(v+1)`.
    #[default]
    Base6,
    /// One bit per cell, 0 as `S1` and 1 as `S6`.
    Binary,
}

impl EncodingMode {
    pub fn base(self) -> usize {
        match self {
            EncodingMode::Base6 => 6,
            EncodingMode::Binary => 2,
        }
    }

    pub fn digit_state(self, digit: u8) -> StateId {
        match self {
            EncodingMode::Base6 => StateId::RESTING[digit as usize],
            EncodingMode::Binary if digit == 0 => StateId::S1,
            EncodingMode::Binary => StateId::S6,
        }
    }

    /// Inverse of [`digit_state`](Self::digit_state) for a sensed state. In
    /// binary mode anything at or below S3 reads as 0.
    pub fn state_digit(self, state: StateId) -> u8 {
        match self {
            EncodingMode::Base6 => state.level().saturating_sub(1),
            EncodingMode::Binary => u8::from(state > StateId::S3),
        }
    }
}

/// Smallest `d >= 1` with `base^d >= states`.
pub fn digits_needed(states: usize, base: usize) -> usize {
    let mut d = 1;
    let mut span = base;
    while span < states {
        span = span.saturating_mul(base);
        d += 1;
    }
    d
}

fn encode_in_base(k: usize, states: usize, base: usize) -> Result<Vec<u8>> {
    if k >= states {
        return Err(Error::StateOutOfRange {
            index: k,
            count: states,
        });
    }
    let d = digits_needed(states, base);
    let mut digits = vec![0u8; d];
    let mut rest = k;
    for slot in digits.iter_mut().rev() {
        *slot = (rest % base) as u8;
        rest /= base;
    }
    Ok(digits)
}

fn decode_in_base(digits: &[u8], base: usize) -> usize {
    digits.iter().fold(0, |acc, &v| acc * base + v as usize)
}

/// Base-6 digits of `k`, most significant first.
pub fn encode_state(k: usize, states: usize) -> Result<Vec<u8>> {
    encode_in_base(k, states, 6)
}

pub fn decode_state(digits: &[u8]) -> usize {
    decode_in_base(digits, 6)
}

/// Cells holding one automaton, most significant digit first.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiCellEncoding {
    pub mode: EncodingMode,
    pub states: usize,
    pub cells: Vec<(usize, usize)>,
}

impl MultiCellEncoding {
    pub fn digit_count(&self) -> usize {
        self.cells.len()
    }

    pub fn encode(&self, k: usize) -> Result<Vec<u8>> {
        encode_in_base(k, self.states, self.mode.base())
    }

    pub fn decode(&self, digits: &[u8]) -> Result<usize> {
        let k = decode_in_base(digits, self.mode.base());
        if k >= self.states {
            return Err(Error::StateOutOfRange {
                index: k,
                count: self.states,
            });
        }
        Ok(k)
    }
}
