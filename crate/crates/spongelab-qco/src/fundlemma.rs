//! The fundamental lemma, checked by exact simulation: an adversary's
//! claimed input-output pairs hold against the standard (purified,
//! measured-at-the-end) oracle with probability p, and appear in the
//! measured compressed database with probability p'; then
//! sqrt(p) <= sqrt(p') + sqrt(l / N).
//!
//! Claims are read from the final X and Y registers (l = 1), optionally
//! filtered through a relation on (x, y).

use num_complex::Complex64;

use spongelab::Rng64;

use crate::db::{AmpVector, Dims};
use crate::matrix::{haar_unitary, CMat};
use crate::ops::{apply_co, apply_unitary_axy};

type C64 = Complex64;

/// A circuit alternating adversary unitaries on X x Y with oracle
/// queries: U_t ... U_1 cO U_0.
pub fn random_xy_circuit(dims: Dims, queries: usize, rng: &mut Rng64) -> Vec<CMat> {
    (0..=queries)
        .map(|_| haar_unitary(dims.m() * dims.n(), rng))
        .collect()
}

/// Final state of the circuit against the compressed oracle.
pub fn run_compressed(dims: Dims, unitaries: &[CMat]) -> AmpVector {
    let mut state = AmpVector::initial(dims);
    for (i, u) in unitaries.iter().enumerate() {
        if i > 0 {
            state = apply_co(&state);
        }
        state = apply_unitary_axy(&state, u);
    }
    state
}

/// Final state of the circuit against the purified oracle over total
/// functions, as a flat vector indexed by (x * N + y) * N^M + f.
pub fn run_purified_total(dims: Dims, unitaries: &[CMat]) -> Vec<C64> {
    let total = dims.total_fn_dim();
    let block = dims.m() * dims.n();
    let mut state = vec![C64::new(0.0, 0.0); block * total];
    let amp = 1.0 / (total as f64).sqrt();
    for f in 0..total {
        state[f] = C64::new(amp, 0.0); // x = 0, y = 0
    }
    for (i, u) in unitaries.iter().enumerate() {
        if i > 0 {
            // Purified query: y += f(x) mod N.
            let mut next = vec![C64::new(0.0, 0.0); state.len()];
            for (idx, &z) in state.iter().enumerate() {
                if z.norm_sqr() == 0.0 {
                    continue;
                }
                let f = idx % total;
                let xy = idx / total;
                let (x, y) = (xy / dims.n(), xy % dims.n());
                let y2 = (y + dims.total_digit(f, x)) % dims.n();
                next[(x * dims.n() + y2) * total + f] = z;
            }
            state = next;
        }
        // Unitary on X x Y.
        let mut next = vec![C64::new(0.0, 0.0); state.len()];
        let mut col = vec![C64::new(0.0, 0.0); block];
        for f in 0..total {
            for (b, c) in col.iter_mut().enumerate() {
                *c = state[b * total + f];
            }
            let new = u.apply(&col);
            for (b, val) in new.iter().enumerate() {
                next[b * total + f] = *val;
            }
        }
        state = next;
    }
    state
}

#[derive(Debug, Clone)]
pub struct FundLemmaOutcome {
    /// Probability the claim holds against the standard oracle.
    pub p: f64,
    /// Probability the claim is recorded in the compressed database.
    pub p_prime: f64,
    /// sqrt(p') + sqrt(l/N) - sqrt(p); the lemma asserts this is >= 0.
    pub slack: f64,
    pub pass: bool,
}

/// Evaluate both experiment variants for a circuit whose claim is the
/// final (x, y) register pair, restricted by `relation`.
pub fn fundamental_lemma_check(
    dims: Dims,
    unitaries: &[CMat],
    relation: impl Fn(usize, usize) -> bool,
) -> FundLemmaOutcome {
    let l = 1usize;

    let total = dims.total_fn_dim();
    let purified = run_purified_total(dims, unitaries);
    let mut p = 0.0f64;
    for (idx, z) in purified.iter().enumerate() {
        let f = idx % total;
        let xy = idx / total;
        let (x, y) = (xy / dims.n(), xy % dims.n());
        if relation(x, y) && dims.total_digit(f, x) == y {
            p += z.norm_sqr();
        }
    }

    let compressed = run_compressed(dims, unitaries);
    let mut p_prime = 0.0f64;
    for (idx, z) in compressed.data.iter().enumerate() {
        let (x, y, d) = dims.split_xyf(idx % dims.joint_dim());
        if relation(x, y) && dims.digit(d, x) == y {
            p_prime += z.norm_sqr();
        }
    }

    let slack = p_prime.sqrt() + (l as f64 / dims.n() as f64).sqrt() - p.sqrt();
    FundLemmaOutcome {
        p,
        p_prime,
        slack,
        pass: slack >= -1e-9,
    }
}
