//! Rate/capacity parameters and state words.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Default cap on the total state width n = r + c. Tables are stored
/// densely (2^n entries), so the cap keeps everything desk-scale.
pub const DEFAULT_STATE_BITS_CAP: u32 = 24;

/// A rate/capacity split of an n-bit sponge state, r + c = n.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Params {
    r: u32,
    c: u32,
}

impl Params {
    pub fn new(r: u32, c: u32) -> Result<Self> {
        Self::with_cap(r, c, DEFAULT_STATE_BITS_CAP)
    }

    pub fn with_cap(r: u32, c: u32, cap: u32) -> Result<Self> {
        if r == 0 || c == 0 {
            return Err(Error::Parameter(format!(
                "rate and capacity must be positive, got r={r} c={c}"
            )));
        }
        if r + c > cap {
            return Err(Error::CapExceeded(format!(
                "n = r + c = {} exceeds cap {cap}",
                r + c
            )));
        }
        Ok(Params { r, c })
    }

    #[inline]
    pub fn r(&self) -> u32 {
        self.r
    }

    #[inline]
    pub fn c(&self) -> u32 {
        self.c
    }

    #[inline]
    pub fn n(&self) -> u32 {
        self.r + self.c
    }

    #[inline]
    pub fn state_space(&self) -> usize {
        1usize << self.n()
    }

    #[inline]
    pub fn rate_space(&self) -> usize {
        1usize << self.r
    }

    #[inline]
    pub fn capacity_space(&self) -> usize {
        1usize << self.c
    }

    #[inline]
    pub fn rate_mask(&self) -> u32 {
        (1u32 << self.r) - 1
    }

    /// Split a raw state into (rate, capacity). The rate occupies the low
    /// r bits, the capacity the high c bits.
    #[inline]
    pub fn split(&self, state: u32) -> (u32, u32) {
        (state & self.rate_mask(), state >> self.r)
    }

    /// Inverse of [`Params::split`].
    #[inline]
    pub fn join(&self, rate: u32, capacity: u32) -> u32 {
        debug_assert!(rate < (1 << self.r) && capacity < (1 << self.c));
        rate | (capacity << self.r)
    }

    pub fn word(&self, bits: u32) -> Result<Word> {
        if bits as u64 >= (1u64 << self.n()) {
            return Err(Error::Parameter(format!(
                "word value {bits} does not fit in {} bits",
                self.n()
            )));
        }
        Ok(Word { bits, params: *self })
    }
}

/// An n-bit state word tagged with its rate/capacity split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Word {
    bits: u32,
    params: Params,
}

impl Word {
    #[inline]
    pub fn bits(&self) -> u32 {
        self.bits
    }

    #[inline]
    pub fn params(&self) -> Params {
        self.params
    }

    #[inline]
    pub fn rate(&self) -> u32 {
        self.params.split(self.bits).0
    }

    #[inline]
    pub fn capacity(&self) -> u32 {
        self.params.split(self.bits).1
    }

    #[inline]
    pub fn with_rate(&self, rate: u32) -> Word {
        Word {
            bits: self.params.join(rate, self.capacity()),
            params: self.params,
        }
    }

    #[inline]
    pub fn with_capacity(&self, capacity: u32) -> Word {
        Word {
            bits: self.params.join(self.rate(), capacity),
            params: self.params,
        }
    }
}
