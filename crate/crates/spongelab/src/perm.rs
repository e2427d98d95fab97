//! Explicit permutations, structured Feistel layers, and their
//! composition into the sponge permutation.
//!
//! The sponge permutation is built as omega_h . tau_k' . pi . sigma_k,
//! where sigma/tau XOR a function of the rate into the capacity, omega
//! XORs a function of the capacity into the rate, and pi is an arbitrary
//! explicit permutation of the full state. Each layer is an involution.

use serde::{Deserialize, Serialize};

use crate::params::{Params, Word};
use crate::rng::Rng64;
use crate::{Error, Result};

/// Which of the three structured layers to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerKind {
    /// sigma(x || y) = x || y ^ f(x), applied before the inner permutation.
    Sigma,
    /// tau(x || y) = x || y ^ f(x), applied after the inner permutation.
    Tau,
    /// omega(x || y) = x ^ f(y) || y, the final layer.
    Omega,
}

/// A total function table with fixed input/output widths.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FuncTable {
    in_bits: u32,
    out_bits: u32,
    outputs: Vec<u32>,
}

impl FuncTable {
    pub fn new(in_bits: u32, out_bits: u32, outputs: Vec<u32>) -> Result<Self> {
        if in_bits == 0 || in_bits > 24 || out_bits == 0 || out_bits > 24 {
            return Err(Error::Parameter(format!(
                "function widths out of range: {in_bits} -> {out_bits}"
            )));
        }
        if outputs.len() != 1 << in_bits {
            return Err(Error::WidthMismatch(format!(
                "expected {} outputs, got {}",
                1 << in_bits,
                outputs.len()
            )));
        }
        if let Some(&v) = outputs.iter().find(|&&v| v as u64 >= 1u64 << out_bits) {
            return Err(Error::WidthMismatch(format!(
                "output {v} does not fit in {out_bits} bits"
            )));
        }
        Ok(FuncTable {
            in_bits,
            out_bits,
            outputs,
        })
    }

    /// The all-zero function (the identity layer once wrapped in a Feistel
    /// step).
    pub fn zero(in_bits: u32, out_bits: u32) -> Self {
        FuncTable {
            in_bits,
            out_bits,
            outputs: vec![0; 1 << in_bits],
        }
    }

    /// Uniformly random total function.
    pub fn sample(in_bits: u32, out_bits: u32, rng: &mut Rng64) -> Self {
        let outputs = (0..1usize << in_bits).map(|_| rng.bits(out_bits)).collect();
        FuncTable {
            in_bits,
            out_bits,
            outputs,
        }
    }

    #[inline]
    pub fn get(&self, x: u32) -> u32 {
        self.outputs[x as usize]
    }

    pub fn set(&mut self, x: u32, y: u32) {
        assert!((y as u64) < (1u64 << self.out_bits));
        self.outputs[x as usize] = y;
    }

    #[inline]
    pub fn in_bits(&self) -> u32 {
        self.in_bits
    }

    #[inline]
    pub fn out_bits(&self) -> u32 {
        self.out_bits
    }

    pub fn outputs(&self) -> &[u32] {
        &self.outputs
    }
}

/// An explicit bijection on n-bit words, stored as dense forward and
/// inverse tables so inverse queries are O(1) and exhaustive checks are
/// cheap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermTable {
    n: u32,
    forward: Vec<u32>,
    inverse: Vec<u32>,
}

/// Serialized form: just the width and the forward table.
#[derive(Serialize, Deserialize)]
struct PermTableWire {
    n: u32,
    forward: Vec<u32>,
}

impl PermTable {
    /// Build from a forward table, validating bijectivity.
    pub fn from_forward(n: u32, forward: Vec<u32>) -> Result<Self> {
        if n == 0 || n > 24 {
            return Err(Error::Parameter(format!("permutation width {n} out of range")));
        }
        let size = 1usize << n;
        if forward.len() != size {
            return Err(Error::WidthMismatch(format!(
                "expected {size} entries, got {}",
                forward.len()
            )));
        }
        let mut inverse = vec![u32::MAX; size];
        for (i, &v) in forward.iter().enumerate() {
            if v as usize >= size || inverse[v as usize] != u32::MAX {
                return Err(Error::Parameter(format!(
                    "forward table is not a bijection at index {i}"
                )));
            }
            inverse[v as usize] = i as u32;
        }
        Ok(PermTable { n, forward, inverse })
    }

    pub fn identity(n: u32) -> Self {
        let forward: Vec<u32> = (0..1u32 << n).collect();
        let inverse = forward.clone();
        PermTable { n, forward, inverse }
    }

    /// Fisher-Yates sample of a uniform permutation.
    pub fn sample_uniform(n: u32, rng: &mut Rng64) -> Self {
        let mut forward: Vec<u32> = (0..1u32 << n).collect();
        rng.shuffle(&mut forward);
        let mut inverse = vec![0u32; forward.len()];
        for (i, &v) in forward.iter().enumerate() {
            inverse[v as usize] = i as u32;
        }
        PermTable { n, forward, inverse }
    }

    #[inline]
    pub fn forward(&self, x: u32) -> u32 {
        self.forward[x as usize]
    }

    #[inline]
    pub fn inverse(&self, y: u32) -> u32 {
        self.inverse[y as usize]
    }

    #[inline]
    pub fn n(&self) -> u32 {
        self.n
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.forward.len()
    }

    pub fn forward_table(&self) -> &[u32] {
        &self.forward
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(PermTableWire {
            n: self.n,
            forward: self.forward.clone(),
        })
        .expect("permutation serializes")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let wire: PermTableWire = serde_json::from_value(v.clone())
            .map_err(|e| Error::Parameter(format!("bad permutation file: {e}")))?;
        Self::from_forward(wire.n, wire.forward)
    }
}

/// Apply one structured layer to a word.
///
/// sigma and tau expect f: rate -> capacity widths; omega expects
/// f: capacity -> rate.
pub fn feistel_layer(kind: LayerKind, f: &FuncTable, w: Word) -> Result<Word> {
    let p = w.params();
    match kind {
        LayerKind::Sigma | LayerKind::Tau => {
            if f.in_bits() != p.r() || f.out_bits() != p.c() {
                return Err(Error::WidthMismatch(format!(
                    "sigma/tau layer needs {} -> {} bits, table is {} -> {}",
                    p.r(),
                    p.c(),
                    f.in_bits(),
                    f.out_bits()
                )));
            }
            Ok(w.with_capacity(w.capacity() ^ f.get(w.rate())))
        }
        LayerKind::Omega => {
            if f.in_bits() != p.c() || f.out_bits() != p.r() {
                return Err(Error::WidthMismatch(format!(
                    "omega layer needs {} -> {} bits, table is {} -> {}",
                    p.c(),
                    p.r(),
                    f.in_bits(),
                    f.out_bits()
                )));
            }
            Ok(w.with_rate(w.rate() ^ f.get(w.capacity())))
        }
    }
}

/// Raw-state variant of the full composition, used on hot paths.
#[inline]
pub(crate) fn phi_eval_raw(
    params: Params,
    h: &FuncTable,
    k: &FuncTable,
    kp: &FuncTable,
    pi: &PermTable,
    state: u32,
) -> u32 {
    let (x, y) = params.split(state);
    let u = pi.forward(params.join(x, y ^ k.get(x)));
    let (xi, zi) = params.split(u);
    let z = zi ^ kp.get(xi);
    params.join(xi ^ h.get(z), z)
}

/// Compose the three layers and the inner permutation into an explicit
/// table for the full sponge permutation.
pub fn compose_phi(
    params: Params,
    h: &FuncTable,
    k: &FuncTable,
    kp: &FuncTable,
    pi: &PermTable,
) -> Result<PermTable> {
    if pi.n() != params.n() {
        return Err(Error::WidthMismatch(format!(
            "inner permutation is on {} bits, params need {}",
            pi.n(),
            params.n()
        )));
    }
    for (f, name) in [(k, "k"), (kp, "k'")] {
        if f.in_bits() != params.r() || f.out_bits() != params.c() {
            return Err(Error::WidthMismatch(format!(
                "{name} must map rate to capacity bits"
            )));
        }
    }
    if h.in_bits() != params.c() || h.out_bits() != params.r() {
        return Err(Error::WidthMismatch(
            "h must map capacity to rate bits".into(),
        ));
    }
    let forward: Vec<u32> = (0..params.state_space() as u32)
        .map(|s| phi_eval_raw(params, h, k, kp, pi, s))
        .collect();
    PermTable::from_forward(params.n(), forward)
}

/// Number of capacity suffixes z such that pi(x1 || z) has rate prefix x2.
pub fn prefix_count(params: Params, pi: &PermTable, x1: u32, x2: u32) -> usize {
    (0..params.capacity_space() as u32)
        .filter(|&z| params.split(pi.forward(params.join(x1, z))).0 == x2)
        .count()
}

/// Maximum of [`prefix_count`] over all prefix pairs.
pub fn max_prefix_count(params: Params, pi: &PermTable) -> usize {
    let mut max = 0;
    let mut counts = vec![0usize; params.rate_space()];
    for x1 in 0..params.rate_space() as u32 {
        counts.fill(0);
        for z in 0..params.capacity_space() as u32 {
            let x2 = params.split(pi.forward(params.join(x1, z))).0;
            counts[x2 as usize] += 1;
        }
        max = max.max(*counts.iter().max().unwrap());
    }
    max
}

/// Default threshold for [`is_good_perm`]: 7 * max(1, 2^(c-r)) + 3n.
pub fn good_perm_threshold(params: Params) -> usize {
    let m = if params.c() > params.r() {
        1usize << (params.c() - params.r())
    } else {
        1
    };
    7 * m + 3 * params.n() as usize
}

/// A permutation is good when no rate-prefix pair is over-represented:
/// the max prefix count stays at or below the threshold.
pub fn is_good_perm(params: Params, pi: &PermTable, threshold: usize) -> bool {
    assert!(threshold >= 1);
    max_prefix_count(params, pi) <= threshold
}
