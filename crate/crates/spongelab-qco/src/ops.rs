//! The compression, purified-query and compressed-query operators, as
//! structured applications on amplitude vectors plus dense builders for
//! small dimensions.
//!
//! The query "XOR" is addition mod N on [N], which coincides with XOR
//! at N=2 and keeps every identity used here intact for general N.

use num_complex::Complex64;

use crate::db::{AmpVector, Dims};
use crate::matrix::CMat;

type C64 = Complex64;

/// The single-register compression matrix on [N] u {bot}: swaps the
/// uniform superposition over [N] with |bot> and fixes the orthogonal
/// complement.
pub fn c_small(dims: Dims) -> CMat {
    let n = dims.n();
    let inv_n = 1.0 / n as f64;
    let inv_sqrt = (1.0 / n as f64).sqrt();
    CMat::from_fn(n + 1, n + 1, |u, v| {
        let val = match (u == n, v == n) {
            (true, true) => 0.0,
            (true, false) | (false, true) => inv_sqrt,
            (false, false) => (if u == v { 1.0 } else { 0.0 }) - inv_n,
        };
        C64::new(val, 0.0)
    })
}

/// Apply the single-register compression on function register `x`
/// (unconditionally on the X value).
pub fn apply_c_register(state: &AmpVector, x: usize) -> AmpVector {
    let dims = state.dims;
    let c = c_small(dims);
    transform_register(state, x, |_, _| true, &c)
}

/// Apply the full compression C = tensor of all per-register
/// compressions.
pub fn apply_c_full(state: &AmpVector) -> AmpVector {
    let mut out = state.clone();
    for x in 0..state.dims.m() {
        out = apply_c_register(&out, x);
    }
    out
}

/// Local compression L: compress function register x conditioned on the
/// X register holding x.
pub fn apply_l(state: &AmpVector) -> AmpVector {
    let dims = state.dims;
    let c = c_small(dims);
    let mut out = state.clone();
    for x in 0..dims.m() {
        out = transform_register(&out, x, |x_reg, _| x_reg == x, &c);
    }
    out
}

/// Purified query: |x, y, f> -> |x, y + f(x) mod N, f>, identity when
/// f(x) is undefined.
pub fn apply_p(state: &AmpVector) -> AmpVector {
    let dims = state.dims;
    let n = dims.n();
    let mut out = state.clone();
    for z in out.data.iter_mut() {
        *z = C64::new(0.0, 0.0);
    }
    for (idx, &amp) in state.data.iter().enumerate() {
        if amp.norm_sqr() == 0.0 {
            continue;
        }
        let a = idx / dims.joint_dim();
        let (x, y, d) = dims.split_xyf(idx % dims.joint_dim());
        let v = dims.digit(d, x);
        let y2 = if v == dims.bot() { y } else { (y + v) % n };
        let target = out.index(a, x, y2, d);
        out.data[target] = amp;
    }
    out
}

/// Compressed query cO = L P L.
pub fn apply_co(state: &AmpVector) -> AmpVector {
    apply_l(&apply_p(&apply_l(state)))
}

/// Apply a unitary on workspace tensor X tensor Y (identity on F).
pub fn apply_unitary_axy(state: &AmpVector, u: &CMat) -> AmpVector {
    let dims = state.dims;
    let block = dims.m() * dims.n();
    let outer = state.anc * block;
    assert_eq!(u.rows(), outer, "unitary must act on workspace x X x Y");
    let db = dims.db_dim();
    let mut out = state.clone();
    let mut col = vec![C64::new(0.0, 0.0); outer];
    for d in 0..db {
        for (slot, c) in col.iter_mut().enumerate() {
            *c = state.data[slot * db + d];
        }
        let new = u.apply(&col);
        for (slot, val) in new.iter().enumerate() {
            out.data[slot * db + d] = *val;
        }
    }
    out
}

fn transform_register(
    state: &AmpVector,
    x: usize,
    gate: impl Fn(usize, usize) -> bool,
    c: &CMat,
) -> AmpVector {
    let dims = state.dims;
    let radix = dims.n() + 1;
    let base = radix.pow(x as u32);
    let mut out = state.clone();
    let mut scratch = vec![C64::new(0.0, 0.0); radix];
    let db = dims.db_dim();
    for a in 0..state.anc {
        for x_reg in 0..dims.m() {
            for y in 0..dims.n() {
                if !gate(x_reg, y) {
                    continue;
                }
                // Iterate over all fibers of register x inside F.
                for rest in 0..db / radix {
                    let low = rest % base;
                    let high = rest / base;
                    let d0 = high * base * radix + low;
                    for v in 0..radix {
                        scratch[v] = state.data[state.index(a, x_reg, y, d0 + v * base)];
                    }
                    let new = c.apply(&scratch);
                    for v in 0..radix {
                        let target = state.index(a, x_reg, y, d0 + v * base);
                        out.data[target] = new[v];
                    }
                }
            }
        }
    }
    out
}

/// Zero out amplitudes whose database has an undefined value at `x`.
pub fn project_x_in_db(state: &AmpVector, x: usize) -> AmpVector {
    let dims = state.dims;
    let mut out = state.clone();
    for (idx, z) in out.data.iter_mut().enumerate() {
        let (_, _, d) = dims.split_xyf(idx % dims.joint_dim());
        if dims.digit(d, x) == dims.bot() {
            *z = C64::new(0.0, 0.0);
        }
    }
    out
}

/// A state is valid when decompressing any register always reveals a
/// defined output: for every x, (x-in-db projector) C^x |psi> = C^x |psi>.
pub fn validity_defect(state: &AmpVector) -> f64 {
    let mut worst = 0.0f64;
    for x in 0..state.dims.m() {
        let decompressed = apply_c_register(state, x);
        let projected = project_x_in_db(&decompressed, x);
        worst = worst.max(decompressed.max_abs_diff(&projected));
    }
    worst
}

/// Apply the validity projector: product over x of C^x (x-in-db) C^x.
pub fn apply_validity_projector(state: &AmpVector) -> AmpVector {
    let mut out = state.clone();
    for x in 0..state.dims.m() {
        out = apply_c_register(&project_x_in_db(&apply_c_register(&out, x), x), x);
    }
    out
}

/// Largest number of defined entries over the support of the state.
pub fn support_max_entries(state: &AmpVector, tol: f64) -> usize {
    let dims = state.dims;
    let mut max = 0;
    for (idx, z) in state.data.iter().enumerate() {
        if z.norm() > tol {
            let (_, _, d) = dims.split_xyf(idx % dims.joint_dim());
            max = max.max(dims.entry_count(d));
        }
    }
    max
}

/// One step of an adversary circuit: a compressed oracle call or an
/// arbitrary unitary on workspace x X x Y.
pub enum CircuitOp {
    Query,
    Unitary(CMat),
}

/// Apply a circuit-op sequence to a state.
pub fn apply_circuit(ops: &[CircuitOp], init: &AmpVector) -> AmpVector {
    let mut state = init.clone();
    for op in ops {
        state = match op {
            CircuitOp::Query => apply_co(&state),
            CircuitOp::Unitary(u) => apply_unitary_axy(&state, u),
        };
    }
    state
}

// -------------------------------------------------------------------
// Dense builders (small dimensions only): realized by applying the
// structured operators to every basis vector, so the dense and applied
// forms agree by construction.
// -------------------------------------------------------------------

fn dense_from(dims: Dims, f: impl Fn(&AmpVector) -> AmpVector) -> CMat {
    let dim = dims.joint_dim();
    CMat::from_apply(dim, |basis| {
        let mut st = AmpVector::initial(dims);
        st.data.copy_from_slice(basis);
        f(&st).data
    })
}

pub fn dense_c_full(dims: Dims) -> CMat {
    dense_from(dims, apply_c_full)
}

pub fn dense_c_register(dims: Dims, x: usize) -> CMat {
    dense_from(dims, |s| apply_c_register(s, x))
}

pub fn dense_p(dims: Dims) -> CMat {
    dense_from(dims, |s| apply_p(s))
}

pub fn dense_l(dims: Dims) -> CMat {
    dense_from(dims, apply_l)
}

pub fn dense_co(dims: Dims) -> CMat {
    dense_from(dims, apply_co)
}

/// Diagonal projector onto a database predicate, lifted to the joint
/// space.
pub fn dense_db_projector(dims: Dims, member: impl Fn(usize) -> bool) -> CMat {
    let dim = dims.joint_dim();
    let mut m = CMat::zeros(dim, dim);
    for idx in 0..dim {
        let (_, _, d) = dims.split_xyf(idx);
        if member(d) {
            m[(idx, idx)] = C64::new(1.0, 0.0);
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use spongelab::Rng64;

    fn dims(m: usize, n: usize) -> Dims {
        Dims::new(m, n).unwrap()
    }

    fn random_state(dims: Dims, rng: &mut Rng64) -> AmpVector {
        let mut st = AmpVector::initial(dims);
        for z in st.data.iter_mut() {
            *z = C64::new(rng.next_gaussian(), rng.next_gaussian());
        }
        let norm = st.norm();
        for z in st.data.iter_mut() {
            *z /= norm;
        }
        st
    }

    #[test]
    fn c_small_swaps_uniform_and_bot() {
        let d = dims(2, 4);
        let c = c_small(d);
        // C |bot> = |mu>.
        let mut bot = vec![C64::new(0.0, 0.0); 5];
        bot[4] = C64::new(1.0, 0.0);
        let mu = c.apply(&bot);
        for v in 0..4 {
            assert!((mu[v].re - 0.5).abs() < 1e-12);
        }
        assert!(mu[4].norm() < 1e-12);
        // C^2 = I.
        assert!(c.mul(&c).max_abs_diff(&CMat::identity(5)) < 1e-12);
    }

    #[test]
    fn compression_maps_uniform_functions_to_empty_db() {
        // C applied to the uniform superposition over total functions
        // yields the all-bot database.
        let d = dims(2, 3);
        let mut st = AmpVector::initial(d);
        st.data.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        let amp = 1.0 / (d.total_fn_dim() as f64).sqrt();
        for f in 0..d.total_fn_dim() {
            // Embed the total function as a bot-free database.
            let mut db = 0;
            for x in 0..d.m() {
                db = d.with_digit(db, x, d.total_digit(f, x));
            }
            *st.at(0, 0, 0, db) = C64::new(amp, 0.0);
        }
        let compressed = apply_c_full(&st);
        let expect = AmpVector::initial(d);
        for (idx, z) in compressed.data.iter().enumerate() {
            assert!((z - expect.data[idx]).norm() < 1e-12);
        }
    }

    #[test]
    fn c_fixes_orthogonal_complement() {
        // Vectors orthogonal to both mu and bot are unchanged.
        let d = dims(1, 4);
        let c = c_small(d);
        let mut v = vec![C64::new(0.0, 0.0); 5];
        v[0] = C64::new(1.0, 0.0);
        v[1] = C64::new(-1.0, 0.0);
        let out = c.apply(&v);
        for i in 0..5 {
            assert!((out[i] - v[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn purified_query_shifts_by_defined_value() {
        let d = dims(2, 3);
        let mut st = AmpVector::initial(d);
        st.data.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        // Database with f(0)=2, f(1)=bot; query x=0, y=2 -> y=1 (mod 3).
        let mut db = d.empty_db();
        db = d.with_digit(db, 0, 2);
        *st.at(0, 0, 2, db) = C64::new(1.0, 0.0);
        let out = apply_p(&st);
        assert!((out.data[out.index(0, 0, 1, db)].re - 1.0).abs() < 1e-12);
        // Querying the undefined input is the identity.
        let mut st2 = AmpVector::initial(d);
        st2.data.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        *st2.at(0, 1, 2, db) = C64::new(1.0, 0.0);
        let out2 = apply_p(&st2);
        assert!((out2.data[out2.index(0, 1, 2, db)].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn p_commutes_with_other_register_compressions() {
        // On basis inputs with X = x, compressing register x' != x
        // commutes with the query.
        let d = dims(3, 2);
        let mut rng = Rng64::new(3);
        let st = random_state(d, &mut rng);
        // Restrict X to a basis value by zeroing other X components.
        let mut st_x = st.clone();
        for (idx, z) in st_x.data.iter_mut().enumerate() {
            let (x, _, _) = d.split_xyf(idx % d.joint_dim());
            if x != 1 {
                *z = C64::new(0.0, 0.0);
            }
        }
        for x_other in [0usize, 2] {
            let a = apply_p(&apply_c_register(&st_x, x_other));
            let b = apply_c_register(&apply_p(&st_x), x_other);
            assert!(a.max_abs_diff(&b) < 1e-12);
        }
    }

    #[test]
    fn dense_identities_small_dims() {
        for (m, n) in [(2, 2), (2, 3), (3, 2)] {
            let d = dims(m, n);
            let c = dense_c_full(d);
            let l = dense_l(d);
            let p = dense_p(d);
            let co = dense_co(d);
            let id = CMat::identity(d.joint_dim());
            assert!(c.mul(&c).max_abs_diff(&id) < 1e-10, "C^2 != I at {m},{n}");
            assert!(l.mul(&l).max_abs_diff(&id) < 1e-10, "L^2 != I at {m},{n}");
            assert!(p.unitarity_defect() < 1e-10);
            assert!(co.unitarity_defect() < 1e-10);
            // C P C(dagger) = L P L; C is self-adjoint so Cdagger = C.
            let cpc = c.mul(&p).mul(&c.dagger());
            let lpl = l.mul(&p).mul(&l);
            assert!(cpc.max_abs_diff(&lpl) < 1e-10, "only-one-comp at {m},{n}");
        }
    }

    #[test]
    fn support_grows_one_entry_per_query() {
        let d = dims(2, 2);
        let mut rng = Rng64::new(5);
        let mut st = AmpVector::initial(d);
        for t in 1..=3usize {
            let u = crate::matrix::haar_unitary(d.m() * d.n(), &mut rng);
            st = apply_unitary_axy(&st, &u);
            st = apply_co(&st);
            let support = support_max_entries(&st, 1e-12);
            assert!(support <= t.min(d.m()), "support {support} after {t} queries");
            assert!(validity_defect(&st) < 1e-10);
        }
    }

    #[test]
    fn empty_circuit_leaves_state_unchanged() {
        let d = dims(2, 3);
        let mut rng = Rng64::new(8);
        let st = random_state(d, &mut rng);
        let out = apply_circuit(&[], &st);
        assert!(out.max_abs_diff(&st) == 0.0);
    }

    #[test]
    fn circuit_sequence_matches_manual_application() {
        let d = dims(2, 2);
        let mut rng = Rng64::new(9);
        let u1 = crate::matrix::haar_unitary(4, &mut rng);
        let u2 = crate::matrix::haar_unitary(4, &mut rng);
        let init = AmpVector::initial(d);
        let seq = apply_circuit(
            &[
                CircuitOp::Unitary(u1.clone()),
                CircuitOp::Query,
                CircuitOp::Unitary(u2.clone()),
                CircuitOp::Query,
            ],
            &init,
        );
        let manual = apply_co(&apply_unitary_axy(
            &apply_co(&apply_unitary_axy(&init, &u1)),
            &u2,
        ));
        assert!(seq.max_abs_diff(&manual) < 1e-14);
    }

    #[test]
    fn block_structure_of_l() {
        // L is block diagonal over X: matrix elements between different
        // X basis values vanish.
        let d = dims(2, 2);
        let l = dense_l(d);
        for row in 0..d.joint_dim() {
            for col in 0..d.joint_dim() {
                let (x1, _, _) = d.split_xyf(row);
                let (x2, _, _) = d.split_xyf(col);
                if x1 != x2 {
                    assert!(l[(row, col)].norm() < 1e-14);
                }
            }
        }
    }
}
