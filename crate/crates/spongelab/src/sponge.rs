//! The sponge XOF, its padding, the rate-replacing Msponge variant, and
//! the tail-fixing bijection relating the two.
//!
//! Messages live at block granularity (sequences of r-bit values); the
//! only raw-bit entry point is [`pad`]. The fixing maps take the block
//! function as an abstract oracle so they work against the real sponge, a
//! lazy table, or an ideal functionality interchangeably.

use serde::{Deserialize, Serialize};

use crate::params::Params;
use crate::perm::PermTable;
use crate::{Error, Result};

/// A sequence of r-bit message blocks (possibly empty).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Message {
    pub blocks: Vec<u32>,
}

impl Message {
    pub fn new(blocks: Vec<u32>) -> Self {
        Message { blocks }
    }

    pub fn empty() -> Self {
        Message { blocks: vec![] }
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn check_widths(&self, params: Params) -> Result<()> {
        match self.blocks.iter().find(|&&b| b as u64 >= 1u64 << params.r()) {
            Some(b) => Err(Error::WidthMismatch(format!(
                "block {b} does not fit in {} rate bits",
                params.r()
            ))),
            None => Ok(()),
        }
    }
}

impl Message {
    /// Wire form with the block width declared.
    pub fn to_json(&self, r: u32) -> serde_json::Value {
        serde_json::json!({ "r": r, "blocks": self.blocks })
    }

    /// Parse the wire form, validating block widths against the
    /// declared r.
    pub fn from_json(v: &serde_json::Value) -> Result<(Self, u32)> {
        let r = v["r"]
            .as_u64()
            .ok_or_else(|| Error::Parameter("message wire form missing r".into()))?
            as u32;
        let blocks: Vec<u32> = v["blocks"]
            .as_array()
            .ok_or_else(|| Error::Parameter("message wire form missing blocks".into()))?
            .iter()
            .map(|b| {
                b.as_u64()
                    .filter(|&x| x < 1u64 << r)
                    .map(|x| x as u32)
                    .ok_or_else(|| Error::WidthMismatch(format!("block {b} vs r={r}")))
            })
            .collect::<Result<_>>()?;
        Ok((Message { blocks }, r))
    }
}

impl From<Vec<u32>> for Message {
    fn from(blocks: Vec<u32>) -> Self {
        Message { blocks }
    }
}

/// A bit string, index 0 first. Blocks are packed first-bit-most-
/// significant, so the string 1011 becomes the block value 0b1011.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BitStr {
    pub bits: Vec<bool>,
}

impl BitStr {
    pub fn new() -> Self {
        BitStr { bits: vec![] }
    }

    pub fn from_bools(bits: Vec<bool>) -> Self {
        BitStr { bits }
    }

    /// Parse a string of '0'/'1' characters.
    pub fn parse(s: &str) -> Result<Self> {
        let mut bits = Vec::with_capacity(s.len());
        for ch in s.chars() {
            match ch {
                '0' => bits.push(false),
                '1' => bits.push(true),
                _ => return Err(Error::Parameter(format!("bad bit character {ch:?}"))),
            }
        }
        Ok(BitStr { bits })
    }

    /// Hex digits expand MSB-first, four bits each.
    pub fn from_hex(s: &str) -> Result<Self> {
        let mut bits = Vec::with_capacity(s.len() * 4);
        for ch in s.chars() {
            let v = ch
                .to_digit(16)
                .ok_or_else(|| Error::Parameter(format!("bad hex digit {ch:?}")))?;
            for i in (0..4).rev() {
                bits.push((v >> i) & 1 == 1);
            }
        }
        Ok(BitStr { bits })
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn push(&mut self, b: bool) {
        self.bits.push(b);
    }

    /// Pack into r-bit blocks; the length must be a multiple of r.
    pub fn to_blocks(&self, r: u32) -> Result<Message> {
        if self.len() % r as usize != 0 {
            return Err(Error::WidthMismatch(format!(
                "bit length {} is not a multiple of r={r}",
                self.len()
            )));
        }
        let blocks = self
            .bits
            .chunks(r as usize)
            .map(|chunk| chunk.iter().fold(0u32, |acc, &b| (acc << 1) | b as u32))
            .collect();
        Ok(Message { blocks })
    }

    /// Append the low `r` bits of `block`, MSB first.
    pub fn push_block(&mut self, block: u32, r: u32) {
        for i in (0..r).rev() {
            self.bits.push((block >> i) & 1 == 1);
        }
    }
}

impl std::fmt::Display for BitStr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for &b in &self.bits {
            write!(f, "{}", b as u8)?;
        }
        Ok(())
    }
}

/// Valid sponge inputs are non-empty block sequences with a nonzero final
/// block.
pub fn is_valid_input(m: &Message) -> bool {
    match m.blocks.last() {
        Some(&last) => last != 0,
        None => false,
    }
}

/// Injective pad: append a 1 bit, then zeros up to the next multiple of r.
/// The output is always a valid input, one block longer than the raw bits
/// strictly require.
pub fn pad(raw: &BitStr, r: u32) -> Message {
    let mut bits = raw.clone();
    bits.push(true);
    while bits.len() % r as usize != 0 {
        bits.push(false);
    }
    bits.to_blocks(r).expect("padded to a block multiple")
}

fn absorb_and_squeeze(
    phi: &PermTable,
    params: Params,
    m: &Message,
    squeeze_blocks: usize,
    replace_rate: bool,
) -> Result<Vec<u32>> {
    if phi.n() != params.n() {
        return Err(Error::WidthMismatch(format!(
            "permutation width {} != n {}",
            phi.n(),
            params.n()
        )));
    }
    m.check_widths(params)?;
    let mut state = 0u32;
    for &block in &m.blocks {
        let (rate, cap) = params.split(state);
        let new_rate = if replace_rate { block } else { rate ^ block };
        state = phi.forward(params.join(new_rate, cap));
    }
    let mut out = Vec::with_capacity(squeeze_blocks);
    for i in 0..squeeze_blocks {
        if i > 0 {
            state = phi.forward(state);
        }
        out.push(params.split(state).0);
    }
    Ok(out)
}

/// Standard sponge evaluation: XOR each block into the rate, permute,
/// then alternately emit the rate and permute while squeezing.
///
/// `validate` enforces the valid-input discipline; internal callers that
/// operate on raw block paths disable it.
pub fn sponge(
    phi: &PermTable,
    params: Params,
    m: &Message,
    squeeze_blocks: usize,
    validate: bool,
) -> Result<Vec<u32>> {
    if validate && !is_valid_input(m) {
        return Err(Error::InvalidInput(
            "sponge input must be non-empty with nonzero final block".into(),
        ));
    }
    absorb_and_squeeze(phi, params, m, squeeze_blocks, false)
}

/// Msponge: identical to [`sponge`] except each absorbed block replaces
/// the rate instead of being XORed into it.
pub fn msponge(
    phi: &PermTable,
    params: Params,
    m: &Message,
    squeeze_blocks: usize,
    validate: bool,
) -> Result<Vec<u32>> {
    if validate && !is_valid_input(m) {
        return Err(Error::InvalidInput(
            "msponge input must be non-empty with nonzero final block".into(),
        ));
    }
    absorb_and_squeeze(phi, params, m, squeeze_blocks, true)
}

/// A block-function oracle: total map from block sequences to one r-bit
/// block. Oracles may be stateful (e.g. lazily sampled tables).
pub trait BlockOracle {
    fn query(&mut self, blocks: &[u32]) -> u32;
}

impl<F: FnMut(&[u32]) -> u32> BlockOracle for F {
    fn query(&mut self, blocks: &[u32]) -> u32 {
        self(blocks)
    }
}

/// The tail-fixing bijection. fix(eps) = eps, fix(x1) = x1, and
/// fix(t || xm) = fix(t) || xm ^ f(fix(t)).
pub fn fix(f: &mut dyn BlockOracle, m: &Message) -> Message {
    let mut fixed: Vec<u32> = Vec::with_capacity(m.len());
    for (i, &block) in m.blocks.iter().enumerate() {
        if i == 0 {
            fixed.push(block);
        } else {
            let adj = f.query(&fixed);
            fixed.push(block ^ adj);
        }
    }
    Message { blocks: fixed }
}

/// Inverse fixing: fix_inv(t || xm) = fix_inv(t) || xm ^ f(t), where f is
/// evaluated on the original (unfixed) prefix.
pub fn fix_inv(f: &mut dyn BlockOracle, m: &Message) -> Message {
    let mut out: Vec<u32> = Vec::with_capacity(m.len());
    for (i, &block) in m.blocks.iter().enumerate() {
        if i == 0 {
            out.push(block);
        } else {
            let adj = f.query(&m.blocks[..i]);
            out.push(block ^ adj);
        }
    }
    Message { blocks: out }
}

/// Evaluate f(m) given only oracle access to g = f . fix, using exactly
/// one g query per block (one query total for the empty message). Returns
/// the value and the number of g queries made.
pub fn sponge_via_msponge(g: &mut dyn BlockOracle, m: &Message) -> (u32, usize) {
    let mut queries = 0usize;
    let mut translated: Vec<u32> = Vec::with_capacity(m.len());
    for (i, &block) in m.blocks.iter().enumerate() {
        if i == 0 {
            translated.push(block);
        } else {
            // f on the length-i prefix of m equals g on the translated
            // prefix computed so far.
            let fi = g.query(&translated);
            queries += 1;
            translated.push(block ^ fi);
        }
    }
    let value = g.query(&translated);
    queries += 1;
    (value, queries)
}

/// Extend a one-block-output function to arbitrary output length:
/// f(PAD(x)) || f(PAD(x) || 0^r) || ... truncated to `out_bits`.
pub fn xof_extend(
    f: &mut dyn BlockOracle,
    raw: &BitStr,
    out_bits: usize,
    r: u32,
) -> BitStr {
    let mut input = pad(raw, r).blocks;
    let mut out = BitStr::new();
    while out.len() < out_bits {
        let block = f.query(&input);
        out.push_block(block, r);
        input.push(0);
    }
    out.bits.truncate(out_bits);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::{compose_phi, FuncTable};
    use crate::rng::Rng64;
    use std::collections::HashMap;

    fn params22() -> Params {
        Params::new(2, 2).unwrap()
    }

    fn random_phi(params: Params, rng: &mut Rng64) -> PermTable {
        let h = FuncTable::sample(params.c(), params.r(), rng);
        let k = FuncTable::sample(params.r(), params.c(), rng);
        let kp = FuncTable::sample(params.r(), params.c(), rng);
        let pi = PermTable::sample_uniform(params.n(), rng);
        compose_phi(params, &h, &k, &kp, &pi).unwrap()
    }

    /// Stateful lazy table over block sequences, used as a random oracle.
    struct LazyF {
        map: HashMap<Vec<u32>, u32>,
        rng: Rng64,
        r: u32,
    }

    impl LazyF {
        fn new(seed: u64, r: u32) -> Self {
            LazyF {
                map: HashMap::new(),
                rng: Rng64::new(seed),
                r,
            }
        }
    }

    impl BlockOracle for LazyF {
        fn query(&mut self, blocks: &[u32]) -> u32 {
            let r = self.r;
            let rng = &mut self.rng;
            *self
                .map
                .entry(blocks.to_vec())
                .or_insert_with(|| rng.bits(r))
        }
    }

    fn all_messages(r: u32, max_len: usize) -> Vec<Message> {
        let mut out = vec![Message::empty()];
        let mut layer: Vec<Vec<u32>> = vec![vec![]];
        for _ in 0..max_len {
            let mut next = vec![];
            for m in &layer {
                for b in 0..1u32 << r {
                    let mut m2 = m.clone();
                    m2.push(b);
                    out.push(Message::new(m2.clone()));
                    next.push(m2);
                }
            }
            layer = next;
        }
        out
    }

    #[test]
    fn message_wire_form_roundtrip() {
        let m = Message::new(vec![1, 2, 3]);
        let wire = m.to_json(2);
        assert_eq!(wire["r"], 2);
        let (back, r) = Message::from_json(&wire).unwrap();
        assert_eq!(back, m);
        assert_eq!(r, 2);
        // Width violations are rejected.
        assert!(Message::from_json(&serde_json::json!({"r": 2, "blocks": [4]})).is_err());
        assert!(Message::from_json(&serde_json::json!({"blocks": [1]})).is_err());
    }

    #[test]
    fn valid_input_rules() {
        assert!(is_valid_input(&Message::new(vec![0b01])));
        assert!(!is_valid_input(&Message::empty()));
        assert!(!is_valid_input(&Message::new(vec![0b01, 0b00])));
    }

    #[test]
    fn pad_examples() {
        // r=4, empty -> [1000]
        assert_eq!(pad(&BitStr::new(), 4).blocks, vec![0b1000]);
        // r=4, 101 -> [1011]
        assert_eq!(pad(&BitStr::parse("101").unwrap(), 4).blocks, vec![0b1011]);
        // r=2, 1 -> [11]
        assert_eq!(pad(&BitStr::parse("1").unwrap(), 2).blocks, vec![0b11]);
        // Exact multiple gets a whole extra block.
        assert_eq!(pad(&BitStr::parse("10").unwrap(), 2).blocks, vec![0b10, 0b10]);
    }

    #[test]
    fn pad_is_injective_and_valid() {
        let r = 3;
        let mut seen = HashMap::new();
        // All bit strings of length <= 7.
        for len in 0..=7usize {
            for v in 0..1u32 << len {
                let bits: Vec<bool> = (0..len).map(|i| (v >> (len - 1 - i)) & 1 == 1).collect();
                let m = pad(&BitStr::from_bools(bits.clone()), r);
                assert!(is_valid_input(&m));
                assert_eq!(m.len() * r as usize, (len / r as usize + 1) * r as usize);
                assert!(seen.insert(m.blocks.clone(), bits).is_none(), "pad collision");
            }
        }
    }

    #[test]
    fn sponge_identity_permutation_echoes_block() {
        let p = params22();
        let id = PermTable::identity(4);
        for b in 1..4u32 {
            let out = sponge(&id, p, &Message::new(vec![b]), 1, true).unwrap();
            assert_eq!(out, vec![b]);
            let out = msponge(&id, p, &Message::new(vec![b]), 1, true).unwrap();
            assert_eq!(out, vec![b]);
        }
    }

    #[test]
    fn sponge_two_block_formula() {
        // Output = rate of phi((x2 || 0^c) ^ phi(x1 || 0^c)).
        let p = params22();
        let mut rng = Rng64::new(31);
        for _ in 0..20 {
            let phi = random_phi(p, &mut rng);
            for x1 in 0..4u32 {
                for x2 in 0..4u32 {
                    let inner = phi.forward(p.join(x1, 0));
                    let expect = p.split(phi.forward(p.join(x2, 0) ^ inner)).0;
                    let got =
                        sponge(&phi, p, &Message::new(vec![x1, x2]), 1, false).unwrap()[0];
                    assert_eq!(got, expect);
                }
            }
        }
    }

    #[test]
    fn msponge_two_block_formula() {
        // Output = rate of phi(x2 || capacity(phi(x1 || 0^c))).
        let p = params22();
        let mut rng = Rng64::new(32);
        let phi = random_phi(p, &mut rng);
        for x1 in 0..4u32 {
            for x2 in 0..4u32 {
                let inner_cap = p.split(phi.forward(p.join(x1, 0))).1;
                let expect = p.split(phi.forward(p.join(x2, inner_cap))).0;
                let got = msponge(&phi, p, &Message::new(vec![x1, x2]), 1, false).unwrap()[0];
                assert_eq!(got, expect);
            }
        }
    }

    #[test]
    fn sponge_matches_straight_line_oracle() {
        // Independent step-by-step reimplementation on 2-block messages.
        let p = params22();
        let mut rng = Rng64::new(33);
        for _ in 0..30 {
            let phi = random_phi(p, &mut rng);
            for x1 in 0..4u32 {
                for x2 in 0..4u32 {
                    let mut state = 0u32;
                    state ^= x1; // rate is the low bits
                    state = phi.forward(state);
                    state ^= x2;
                    state = phi.forward(state);
                    let expect = state & p.rate_mask();
                    let got =
                        sponge(&phi, p, &Message::new(vec![x1, x2]), 1, false).unwrap()[0];
                    assert_eq!(got, expect);
                }
            }
        }
    }

    #[test]
    fn sponge_and_msponge_agree_on_single_blocks() {
        // Exhaustive over n <= 8 random permutations and all 1-block
        // messages: no prior rate content, so XOR and replace coincide.
        let mut rng = Rng64::new(34);
        for (r, c) in [(2, 2), (3, 3), (4, 4), (2, 5)] {
            let p = Params::new(r, c).unwrap();
            let phi = PermTable::sample_uniform(p.n(), &mut rng);
            for b in 0..1u32 << r {
                let m = Message::new(vec![b]);
                assert_eq!(
                    sponge(&phi, p, &m, 2, false).unwrap(),
                    msponge(&phi, p, &m, 2, false).unwrap()
                );
            }
        }
    }

    #[test]
    fn invalid_inputs_rejected_when_validating() {
        let p = params22();
        let id = PermTable::identity(4);
        assert!(sponge(&id, p, &Message::empty(), 1, true).is_err());
        assert!(sponge(&id, p, &Message::new(vec![1, 0]), 1, true).is_err());
        assert!(sponge(&id, p, &Message::new(vec![1, 0]), 1, false).is_ok());
    }

    #[test]
    fn fix_base_cases() {
        let mut f = LazyF::new(1, 2);
        assert_eq!(fix(&mut f, &Message::empty()), Message::empty());
        assert_eq!(fix(&mut f, &Message::new(vec![3])), Message::new(vec![3]));
        assert_eq!(fix_inv(&mut f, &Message::empty()), Message::empty());
        assert_eq!(fix_inv(&mut f, &Message::new(vec![2])), Message::new(vec![2]));
    }

    #[test]
    fn fix_and_fix_inv_are_mutually_inverse() {
        // Exhaustive at r=2 over all messages of <= 3 blocks, against a
        // shared lazy random oracle.
        let mut f = LazyF::new(7, 2);
        for m in all_messages(2, 3) {
            let fixed = fix(&mut f, &m);
            let round = fix_inv(&mut f, &fixed);
            assert_eq!(round, m, "fix_inv . fix != id on {m:?}");
            let unfixed = fix_inv(&mut f, &m);
            let round = fix(&mut f, &unfixed);
            assert_eq!(round, m, "fix . fix_inv != id on {m:?}");
        }
    }

    #[test]
    fn fix_is_bijective_per_length() {
        use std::collections::HashSet;
        let mut f = LazyF::new(8, 2);
        for len in 0..=3usize {
            let mut images = HashSet::new();
            for m in all_messages(2, 3).into_iter().filter(|m| m.len() == len) {
                let img = fix(&mut f, &m);
                assert_eq!(img.len(), len);
                assert!(images.insert(img.blocks), "fix not injective at length {len}");
            }
            assert_eq!(images.len(), 4usize.pow(len as u32));
        }
    }

    #[test]
    fn msponge_equals_sponge_of_fix() {
        // The rate-replacing variant is the sponge precomposed with fix
        // (fix taken against the 1-squeeze sponge itself).
        let p = params22();
        let mut rng = Rng64::new(35);
        for _ in 0..25 {
            let phi = random_phi(p, &mut rng);
            let mut sp_oracle =
                |blocks: &[u32]| sponge(&phi, p, &Message::new(blocks.to_vec()), 1, false).unwrap()[0];
            for m in all_messages(2, 3) {
                let fixed = fix(&mut sp_oracle, &m);
                let via_fix = sponge(&phi, p, &fixed, 1, false).unwrap()[0];
                let direct = msponge(&phi, p, &m, 1, false).unwrap()[0];
                assert_eq!(via_fix, direct, "m = {m:?}");
            }
        }
    }

    #[test]
    fn sponge_via_msponge_recovers_sponge() {
        let p = params22();
        let mut rng = Rng64::new(36);
        for _ in 0..100 {
            let phi = random_phi(p, &mut rng);
            let mut g =
                |blocks: &[u32]| msponge(&phi, p, &Message::new(blocks.to_vec()), 1, false).unwrap()[0];
            for m in all_messages(2, 3) {
                let (got, queries) = sponge_via_msponge(&mut g, &m);
                let expect = sponge(&phi, p, &m, 1, false).unwrap()[0];
                assert_eq!(got, expect, "m = {m:?}");
                assert_eq!(queries, m.len().max(1), "query count = block count");
            }
        }
    }

    #[test]
    fn one_block_via_msponge_is_one_query() {
        let mut calls = 0usize;
        let mut g = |blocks: &[u32]| {
            calls += 1;
            blocks.iter().sum::<u32>() & 0b11
        };
        let (v, q) = sponge_via_msponge(&mut g, &Message::new(vec![0b10]));
        assert_eq!(v, 0b10);
        assert_eq!(q, 1);
        assert_eq!(calls, 1);
    }

    #[test]
    fn xof_extend_formula() {
        let r = 2;
        let mut f = LazyF::new(9, r);
        let raw = BitStr::parse("1").unwrap();
        assert_eq!(xof_extend(&mut f, &raw, 0, r).len(), 0);

        let padded = pad(&raw, r);
        let first = f.query(&padded.blocks);
        let out = xof_extend(&mut f, &raw, r as usize, r);
        assert_eq!(out.to_blocks(r).unwrap().blocks, vec![first]);

        let mut extended = padded.blocks.clone();
        extended.push(0);
        let second = f.query(&extended);
        let out = xof_extend(&mut f, &raw, 2 * r as usize, r);
        assert_eq!(out.to_blocks(r).unwrap().blocks, vec![first, second]);

        // Truncation to a non-block boundary.
        let out = xof_extend(&mut f, &raw, 3, r);
        assert_eq!(out.len(), 3);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn pad_output_is_valid_and_injective_on_prefix_pairs(
                bits_a in proptest::collection::vec(any::<bool>(), 0..24),
                bits_b in proptest::collection::vec(any::<bool>(), 0..24),
                r in 1u32..6,
            ) {
                let a = pad(&BitStr::from_bools(bits_a.clone()), r);
                let b = pad(&BitStr::from_bools(bits_b.clone()), r);
                prop_assert!(is_valid_input(&a));
                prop_assert_eq!(a.len() * r as usize, (bits_a.len() / r as usize + 1) * r as usize);
                if bits_a != bits_b {
                    prop_assert_ne!(a, b);
                }
            }

            #[test]
            fn fix_round_trips_for_arbitrary_messages(
                seed in any::<u64>(),
                blocks in proptest::collection::vec(0u32..8, 0..5),
            ) {
                let mut f = LazyF::new(seed, 3);
                let m = Message::new(blocks);
                let fixed = fix(&mut f, &m);
                prop_assert_eq!(fix_inv(&mut f, &fixed), m.clone());
                let unfixed = fix_inv(&mut f, &m);
                prop_assert_eq!(fix(&mut f, &unfixed), m);
            }
        }
    }

    #[test]
    fn multi_squeeze_matches_xof_extension_convention() {
        // Squeezing s blocks equals extending the 1-squeeze sponge with
        // trailing zero blocks.
        let p = params22();
        let mut rng = Rng64::new(37);
        for _ in 0..20 {
            let phi = random_phi(p, &mut rng);
            for m in all_messages(2, 2) {
                if m.is_empty() {
                    continue;
                }
                let multi = sponge(&phi, p, &m, 2, false).unwrap();
                let mut ext = m.blocks.clone();
                let s1 = sponge(&phi, p, &Message::new(ext.clone()), 1, false).unwrap()[0];
                ext.push(0);
                let s2 = sponge(&phi, p, &Message::new(ext), 1, false).unwrap()[0];
                assert_eq!(multi, vec![s1, s2]);
            }
        }
    }
}
