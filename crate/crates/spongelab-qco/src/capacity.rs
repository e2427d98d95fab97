//! Transition capacities: the operator norm of (target projector) *
//! compress * query * decompress * (source projector), and the classical
//! local-property bound on it.
//!
//! Two independent routes compute the same number. The dense route
//! assembles the full joint operator and runs one SVD; it is the
//! reference at small dimensions. The block route uses two exact
//! norm-preserving decompositions: the operator is block-diagonal over
//! the X basis, and after a Fourier change of basis on Y it is further
//! block-diagonal over the Fourier index and over the function registers
//! other than the queried one. What remains is an (N+1)-dimensional SVD
//! per block, which scales to every dimension under the cap.

use num_complex::Complex64;

use crate::db::Dims;
use crate::matrix::{haar_unitary, CMat};
use crate::ops::{apply_c_full, apply_p, dense_c_full, dense_db_projector, dense_p};
use crate::predicates::{PredicateLocalFamily, PredicateSet};
use crate::{Error, Result};

use spongelab::Rng64;

type C64 = Complex64;

/// Reference dense-route capacity; only for joint dimensions small
/// enough to assemble (guarded).
pub fn transition_capacity_dense(
    dims: Dims,
    not_p: &PredicateSet,
    q: &PredicateSet,
) -> Result<f64> {
    let dim = dims.joint_dim();
    if dim > 4096 {
        return Err(Error::CapExceeded(format!(
            "dense capacity route wants joint dim {dim} <= 4096; use the block route"
        )));
    }
    let c = dense_c_full(dims);
    let p = dense_p(dims);
    let pi_q = dense_db_projector(dims, |d| q.contains(d));
    let pi_np = dense_db_projector(dims, |d| not_p.contains(d));
    let op = pi_q.mul(&c).mul(&p).mul(&c.dagger()).mul(&pi_np);
    Ok(op.operator_norm())
}

/// Block-route capacity: exact at every supported dimension.
pub fn transition_capacity(dims: Dims, not_p: &PredicateSet, q: &PredicateSet) -> f64 {
    let n = dims.n();
    let radix = n + 1;
    let c = crate::ops::c_small(dims);
    let mut worst = 0.0f64;
    for x in 0..dims.m() {
        let base = radix.pow(x as u32);
        let fibers = dims.db_dim() / radix;
        for y_hat in 0..n {
            // S = C * diag(phase) * C on the queried register, where the
            // phase of a defined value v is exp(2 pi i * y_hat * v / N)
            // and bot carries phase 1.
            let phase = CMat::from_fn(radix, radix, |u, v| {
                if u != v {
                    C64::new(0.0, 0.0)
                } else if v == n {
                    C64::new(1.0, 0.0)
                } else {
                    C64::from_polar(
                        1.0,
                        std::f64::consts::TAU * (y_hat * v) as f64 / n as f64,
                    )
                }
            });
            let s = c.mul(&phase).mul(&c);
            for rest in 0..fibers {
                let low = rest % base;
                let high = rest / base;
                let d0 = high * base * radix + low;
                // Rows masked by Q, columns by not-P.
                let mut any_row = false;
                let mut any_col = false;
                let mut block = CMat::zeros(radix, radix);
                for u in 0..radix {
                    let du = d0 + u * base;
                    let row_on = q.contains(du);
                    any_row |= row_on;
                    if !row_on {
                        continue;
                    }
                    for v in 0..radix {
                        let dv = d0 + v * base;
                        if not_p.contains(dv) {
                            any_col = true;
                            block[(u, v)] = s[(u, v)];
                        }
                    }
                }
                if any_row && any_col {
                    worst = worst.max(block.operator_norm());
                }
            }
        }
    }
    worst
}

/// Sum of single-step capacities over a predicate chain; an upper-bound
/// certificate for the multi-query capacity. For two-step chains this
/// also reports the largest directly computed two-step norm over sampled
/// intermediate unitaries (a lower estimate of the supremum).
pub struct MultiStepBound {
    pub per_step: Vec<f64>,
    pub sum: f64,
    pub direct_two_step: Option<f64>,
}

pub fn multi_step_capacity_bound(
    dims: Dims,
    chain: &[PredicateSet],
    unitary_samples: usize,
    seed: u64,
) -> Result<MultiStepBound> {
    if chain.len() < 2 {
        return Err(Error::Contract(
            "a capacity chain needs at least a source and a target".into(),
        ));
    }
    let per_step: Vec<f64> = chain
        .windows(2)
        .map(|w| transition_capacity(dims, &w[0].complement(), &w[1]))
        .collect();
    let sum = per_step.iter().sum();

    let direct_two_step = if chain.len() == 3 && dims.joint_dim() <= 512 {
        let c = dense_c_full(dims);
        let p = dense_p(dims);
        let pi_q = dense_db_projector(dims, |d| chain[2].contains(d));
        let pi_np = dense_db_projector(dims, |d| !chain[0].contains(d));
        let mut rng = Rng64::new(seed);
        let mut best = 0.0f64;
        for _ in 0..unitary_samples {
            let u_xy = haar_unitary(dims.m() * dims.n(), &mut rng);
            let u = lift_xy_unitary(dims, &u_xy);
            let op = pi_q
                .mul(&c)
                .mul(&p)
                .mul(&u)
                .mul(&p)
                .mul(&c.dagger())
                .mul(&pi_np);
            best = best.max(op.operator_norm());
        }
        Some(best)
    } else {
        None
    };

    Ok(MultiStepBound {
        per_step,
        sum,
        direct_two_step,
    })
}

fn lift_xy_unitary(dims: Dims, u: &CMat) -> CMat {
    let db = dims.db_dim();
    let block = dims.m() * dims.n();
    let dim = dims.joint_dim();
    let mut out = CMat::zeros(dim, dim);
    for bi in 0..block {
        for bj in 0..block {
            let v = u[(bi, bj)];
            if v.norm_sqr() == 0.0 {
                continue;
            }
            for d in 0..db {
                out[(bi * db + d, bj * db + d)] = v;
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct ClassicalBoundCheck {
    pub capacity: f64,
    pub distance: usize,
    pub bound: f64,
    pub pass: bool,
}

/// Check the local-property bound: for a family interpolating the
/// transition not-P -> Q (meaning Q subset L subset P), the capacity is
/// at most 4 sqrt(distance / N).
pub fn verify_classical_bound(
    dims: Dims,
    family: &PredicateLocalFamily,
    not_p: &PredicateSet,
    q: &PredicateSet,
) -> Result<ClassicalBoundCheck> {
    // Interpolation, verified by enumeration.
    for d in 0..dims.db_dim() {
        if q.contains(d) && !family.union_contains(d) {
            return Err(Error::Contract(format!(
                "target predicate not contained in the property family at db {d}"
            )));
        }
        if family.union_contains(d) && not_p.contains(d) {
            return Err(Error::Contract(format!(
                "property family leaks into the source predicate at db {d}"
            )));
        }
    }
    if !family.is_monotone() {
        return Err(Error::Contract(
            "local property family is not monotone".into(),
        ));
    }
    let capacity = transition_capacity(dims, not_p, q);
    let distance = family.distance();
    let bound = 4.0 * (distance as f64 / dims.n() as f64).sqrt();
    Ok(ClassicalBoundCheck {
        capacity,
        distance,
        bound,
        pass: capacity <= bound + 1e-9,
    })
}

/// Norm of the difference between applying an operator along the two
/// routes, used by tests; kept here so the two routes stay honest.
pub fn co_vs_cpc_defect(dims: Dims) -> f64 {
    // cO = L P L must equal C P C on every basis vector.
    let mut worst = 0.0f64;
    let joint = dims.joint_dim();
    let mut basis = crate::db::AmpVector::initial(dims);
    for j in 0..joint {
        for z in basis.data.iter_mut() {
            *z = C64::new(0.0, 0.0);
        }
        basis.data[j] = C64::new(1.0, 0.0);
        let via_co = crate::ops::apply_co(&basis);
        let via_cpc = apply_c_full(&apply_p(&apply_c_full(&basis)));
        worst = worst.max(via_co.max_abs_diff(&via_cpc));
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dims(m: usize, n: usize) -> Dims {
        Dims::new(m, n).unwrap()
    }

    #[test]
    fn empty_target_has_zero_capacity() {
        let d = dims(2, 2);
        let cap = transition_capacity(d, &PredicateSet::all(d), &PredicateSet::none(d));
        assert!(cap.abs() < 1e-12);
    }

    #[test]
    fn full_predicates_have_unit_capacity() {
        let d = dims(2, 2);
        let all = PredicateSet::all(d);
        let cap = transition_capacity(d, &all, &all);
        assert!((cap - 1.0).abs() < 1e-10, "capacity {cap}");
        let dense = transition_capacity_dense(d, &all, &all).unwrap();
        assert!((dense - 1.0).abs() < 1e-10);
    }

    #[test]
    fn block_route_matches_dense_route() {
        // Collision target from its complement, plus random predicates.
        for (m, n) in [(2usize, 2usize), (2, 3), (3, 2)] {
            let d = dims(m, n);
            let coll = PredicateSet::collision(d);
            let not_coll = coll.complement();
            let a = transition_capacity(d, &not_coll, &coll);
            let b = transition_capacity_dense(d, &not_coll, &coll).unwrap();
            assert!((a - b).abs() < 1e-10, "({m},{n}): block {a} vs dense {b}");

            let mut rng = Rng64::new(m as u64 * 31 + n as u64);
            for _ in 0..5 {
                let p1 = PredicateSet::from_fn(d, |_| rng.coin());
                let p2 = PredicateSet::from_fn(d, |_| rng.coin());
                let a = transition_capacity(d, &p1, &p2);
                let b = transition_capacity_dense(d, &p1, &p2).unwrap();
                assert!((a - b).abs() < 1e-10, "random predicates at ({m},{n})");
            }
        }
    }

    #[test]
    fn capacity_is_at_most_one() {
        let d = dims(2, 3);
        let mut rng = Rng64::new(9);
        for _ in 0..10 {
            let p1 = PredicateSet::from_fn(d, |_| rng.coin());
            let p2 = PredicateSet::from_fn(d, |_| rng.coin());
            let cap = transition_capacity(d, &p1, &p2);
            assert!(cap <= 1.0 + 1e-10);
        }
    }

    #[test]
    fn capacity_union_algebra() {
        // Monotone in the target, subadditive over target unions, and
        // antitone in the source.
        let d = dims(2, 2);
        let mut rng = Rng64::new(17);
        for trial in 0..20 {
            let q = PredicateSet::from_fn(d, |_| rng.coin());
            let p = PredicateSet::from_fn(d, |_| rng.coin());
            let p2 = PredicateSet::from_fn(d, |_| rng.coin());
            let c_p = transition_capacity(d, &q, &p);
            let c_p2 = transition_capacity(d, &q, &p2);
            let c_union = transition_capacity(d, &q, &p.union(&p2));
            assert!(c_p <= c_union + 1e-9, "trial {trial}");
            assert!(c_union <= c_p + c_p2 + 1e-9, "trial {trial}");
            let c_inter = transition_capacity(d, &p.intersect(&p2), &q);
            let c_from_p = transition_capacity(d, &p, &q);
            assert!(c_inter <= c_from_p + 1e-9, "trial {trial}");
        }
    }

    #[test]
    fn multi_step_bound_dominates_direct_norm() {
        // Two queries from collision-free into collision: the summed
        // single-step capacities must dominate the directly computed
        // two-step norm for every sampled intermediate unitary.
        let d = dims(2, 2);
        let coll = PredicateSet::collision(d);
        let chain = vec![coll.clone(), coll.clone(), coll.clone()];
        let out = multi_step_capacity_bound(d, &chain, 50, 23).unwrap();
        let direct = out.direct_two_step.unwrap();
        assert!(
            out.sum + 1e-9 >= direct,
            "sum {} vs direct {direct}",
            out.sum
        );
        assert!(direct > 0.0);
        assert!(out.per_step.len() == 2 && out.per_step[0] == out.per_step[1]);
    }

    #[test]
    fn single_step_chain_equals_single_capacity() {
        let d = dims(2, 2);
        let coll = PredicateSet::collision(d);
        let chain = vec![PredicateSet::none(d), coll.clone()];
        let out = multi_step_capacity_bound(d, &chain, 0, 1).unwrap();
        let single = transition_capacity(d, &PredicateSet::all(d), &coll);
        assert!((out.sum - single).abs() < 1e-12);
    }

    #[test]
    fn classical_bound_trivial_family() {
        let d = dims(2, 2);
        let fam = PredicateLocalFamily::new(PredicateSet::all(d), d.m());
        let check =
            verify_classical_bound(d, &fam, &PredicateSet::none(d), &PredicateSet::all(d))
                .unwrap();
        assert!(check.pass);
        assert_eq!(check.distance, 0);
        // Capacity from an empty source is 0 <= 4 sqrt(0).
        assert!(check.capacity.abs() < 1e-12);
    }

    #[test]
    fn interpolation_violations_are_contract_errors() {
        let d = dims(2, 2);
        let coll = PredicateSet::collision(d);
        let fam = PredicateLocalFamily::new(coll.clone(), 0);
        // Q = all is not inside the collision family union.
        assert!(verify_classical_bound(
            d,
            &fam,
            &PredicateSet::none(d),
            &PredicateSet::all(d)
        )
        .is_err());
    }
}
