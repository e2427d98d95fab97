//! Monte Carlo experiments: collision/preimage/bad-database frequencies
//! under a chaining adversary, the capacity birthday attack, double-sided
//! zero search, and permutation prefix tail bounds.
//!
//! Every estimate carries its event count, trial count, seed and a Wilson
//! 95% interval. Trials parallelize over derived RNG streams and reduce
//! integer counts only, so results are bit-reproducible regardless of
//! thread count.

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{tailed_set, TailClosure};
use crate::lazy::{OracleId, WorldState};
use crate::params::Params;
use crate::perm::{max_prefix_count, prefix_count, PermTable};
use crate::rng::Rng64;
use crate::sim::sample_good_perm;
use crate::stats::{mean_ci, wilson_ci};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExpConfig {
    pub r: u32,
    pub c: u32,
    pub q: usize,
    pub trials: u64,
    pub seed: u64,
    /// Re-check the tail/intermediate-pair counting bounds on every
    /// database state visited (slow; meant for small parameters).
    pub check_invariants: bool,
}

impl ExpConfig {
    pub fn new(params: Params, q: usize, trials: u64, seed: u64) -> Self {
        ExpConfig {
            r: params.r(),
            c: params.c(),
            q,
            trials,
            seed,
            check_invariants: false,
        }
    }

    pub fn params(&self) -> Params {
        Params::new(self.r, self.c).expect("config params validated at construction")
    }
}

/// A frequency estimate with its Wilson 95% interval.
#[derive(Debug, Clone, Serialize)]
pub struct Estimate {
    pub events: u64,
    pub trials: u64,
    pub estimate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// Counting-bound violations observed while checking invariants
    /// (always 0 unless `check_invariants` was set and something broke).
    pub violations: u64,
}

fn make_estimate(events: u64, trials: u64, violations: u64) -> Estimate {
    let (ci_lo, ci_hi) = wilson_ci(events, trials, 1.96);
    Estimate {
        events,
        trials,
        estimate: events as f64 / trials as f64,
        ci_lo,
        ci_hi,
        violations,
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct TrialOutcome {
    collision: bool,
    preimage: bool,
    bad: bool,
    violations: u64,
}

/// Draw an input for `oracle` that is not yet in its database, falling
/// back to an arbitrary uniform draw when the domain is saturated.
fn fresh_input(w: &WorldState, oracle: OracleId, rng: &mut Rng64) -> u32 {
    let (db, width) = match oracle {
        OracleId::H => (&w.d_h, w.params.c()),
        OracleId::K => (&w.d_k, w.params.r()),
        OracleId::Kp => (&w.d_kp, w.params.r()),
    };
    for _ in 0..16 {
        let v = rng.bits(width);
        if !db.contains(v) {
            return v;
        }
    }
    rng.bits(width)
}

// The tailed-count and intermediate-pair bounds are properties of good
// databases; bad states (which the experiments deliberately produce at
// tiny capacities) can exceed both.
fn check_counting_bounds(params: Params, w: &WorldState) -> u64 {
    let closure = TailClosure::build(params, &w.d_k, &w.d_kp, w.pi);
    if !closure.is_good() {
        return 0;
    }
    let t = w.d_k.len().max(w.d_kp.len());
    let mut violations = 0;
    if closure.tailed_count() > t + 1 {
        violations += 1;
    }
    if closure.ip_count() > t * (t + 1) {
        violations += 1;
    }
    violations
}

/// One q-query run of the chaining adversary. Each query is either a
/// uniform probe (random oracle, fresh input) or, with probability 1/2,
/// one of three chain moves: extend a uniformly chosen tailed state with
/// a fresh k block, complete a pending intermediate prefix via k', or
/// query h on a tailed state. Chain moves fall back to uniform probes
/// when their preconditions are empty.
fn chaining_trial(
    params: Params,
    pi: &PermTable,
    q: usize,
    seed: u64,
    trial: u64,
    target: u32,
    check_invariants: bool,
) -> TrialOutcome {
    let mut w = WorldState::new(params, pi, Rng64::stream(seed, 2 * trial));
    let mut adv = Rng64::stream(seed ^ 0xc4a1_0000_c4a1_0001, 2 * trial + 1);
    let mut pending: Vec<u32> = Vec::new();
    let mut violations = 0u64;

    for _ in 0..q {
        let mut done = false;
        if adv.coin() {
            match adv.below(3) {
                0 => {
                    // Extend: k query on a fresh block, remembering the
                    // intermediate prefix it creates from a tailed state.
                    let tailed = tailed_set(params, &w.d_k, &w.d_kp, pi);
                    let z = tailed[adv.below(tailed.len() as u64) as usize];
                    if w.d_k.len() < params.rate_space() {
                        let x = fresh_input(&w, OracleId::K, &mut adv);
                        if !w.d_k.contains(x) {
                            let yk = w.query(OracleId::K, x);
                            let (x_i, _) = params.split(pi.forward(params.join(x, z ^ yk)));
                            pending.push(x_i);
                            done = true;
                        }
                    }
                }
                1 => {
                    // Complete: k' query on a pending intermediate prefix.
                    while let Some(idx) =
                        (!pending.is_empty()).then(|| adv.below(pending.len() as u64) as usize)
                    {
                        let x_i = pending.swap_remove(idx);
                        if !w.d_kp.contains(x_i) {
                            w.query(OracleId::Kp, x_i);
                            done = true;
                            break;
                        }
                    }
                }
                _ => {
                    // Output: h query on a tailed state without an h entry.
                    let tailed = tailed_set(params, &w.d_k, &w.d_kp, pi);
                    let candidates: Vec<u32> = tailed
                        .into_iter()
                        .filter(|&z| !w.d_h.contains(z))
                        .collect();
                    if !candidates.is_empty() {
                        let z = candidates[adv.below(candidates.len() as u64) as usize];
                        w.query(OracleId::H, z);
                        done = true;
                    }
                }
            }
        }
        if !done {
            let oracle = [OracleId::H, OracleId::K, OracleId::Kp][adv.below(3) as usize];
            let x = fresh_input(&w, oracle, &mut adv);
            w.query(oracle, x);
        }
        if check_invariants {
            violations += check_counting_bounds(params, &w);
        }
    }

    // End-of-run event extraction. Collisions, preimages and badness are
    // all monotone under database growth, so one final check suffices.
    let closure = TailClosure::build(params, &w.d_k, &w.d_kp, pi);
    let bad = !closure.is_good();
    let cap = closure.len_cap();
    let mut paths: Vec<(u32, u32, Vec<u32>)> = Vec::new();
    for (z, v) in w.d_h.iter() {
        for tail in closure.enumerate_tails(z, cap, 64) {
            paths.push((tail.head_or_zero() ^ v, z, tail.blocks));
        }
    }
    paths.sort();
    let collision = paths
        .windows(2)
        .any(|pair| pair[0].0 == pair[1].0 && (pair[0].1, &pair[0].2) != (pair[1].1, &pair[1].2));
    let preimage = paths.iter().any(|&(y, _, _)| y == target);

    TrialOutcome {
        collision,
        preimage,
        bad,
        violations,
    }
}

fn run_chaining(
    cfg: &ExpConfig,
    extract: impl Fn(&TrialOutcome) -> bool + Sync,
) -> Result<Estimate> {
    let params = Params::new(cfg.r, cfg.c)?;
    let pi = sample_good_perm(params, cfg.seed);
    let (events, violations) = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = Rng64::stream(cfg.seed ^ 0x7a26_e7, t);
            let target = rng.bits(params.r());
            let out = chaining_trial(
                params,
                &pi,
                cfg.q,
                cfg.seed,
                t,
                target,
                cfg.check_invariants,
            );
            (extract(&out) as u64, out.violations)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(make_estimate(events, cfg.trials, violations))
}

/// Frequency of the database containing two recorded paths with the same
/// output after q chaining-adversary queries.
pub fn collision_in_db_experiment(cfg: &ExpConfig) -> Result<Estimate> {
    if cfg.q == 0 {
        return Ok(make_estimate(0, cfg.trials.max(1), 0));
    }
    run_chaining(cfg, |o| o.collision)
}

/// Frequency of the database containing a path reaching a per-trial
/// uniform target output.
pub fn preimage_in_db_experiment(cfg: &ExpConfig) -> Result<Estimate> {
    if cfg.q == 0 {
        return Ok(make_estimate(0, cfg.trials.max(1), 0));
    }
    run_chaining(cfg, |o| o.preimage)
}

/// Frequency of the k/k' databases going bad at any point within q
/// queries (equivalently, being bad at the end; badness is monotone).
pub fn bad_database_experiment(cfg: &ExpConfig) -> Result<Estimate> {
    if cfg.q == 0 {
        return Ok(make_estimate(0, cfg.trials.max(1), 0));
    }
    run_chaining(cfg, |o| o.bad)
}

/// Capacity birthday attack: absorb q distinct random one-block inputs
/// through the composed permutation and report whether two of them reach
/// the same capacity value. q counts permutation evaluations.
pub fn birthday_collision_attack(cfg: &ExpConfig) -> Result<Estimate> {
    let params = Params::new(cfg.r, cfg.c)?;
    if cfg.q == 0 {
        return Ok(make_estimate(0, cfg.trials.max(1), 0));
    }
    if cfg.q > params.rate_space() {
        return Err(Error::Parameter(format!(
            "birthday attack wants {} distinct blocks but the rate space has {}",
            cfg.q,
            params.rate_space()
        )));
    }
    let pi = sample_good_perm(params, cfg.seed);
    let events = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut w = WorldState::new(params, &pi, Rng64::stream(cfg.seed, 2 * t));
            let mut adv = Rng64::stream(cfg.seed ^ 0xb12d_da1, 2 * t + 1);
            let mut blocks: Vec<u32> = (0..params.rate_space() as u32).collect();
            adv.shuffle(&mut blocks);
            let mut seen = vec![false; params.capacity_space()];
            let mut hit = false;
            for &x in blocks.iter().take(cfg.q) {
                let cap = params.split(w.eval_phi(params.join(x, 0))).1;
                if seen[cap as usize] {
                    hit = true;
                    break;
                }
                seen[cap as usize] = true;
            }
            hit as u64
        })
        .sum();
    Ok(make_estimate(events, cfg.trials, 0))
}

#[derive(Debug, Clone, Serialize)]
pub struct ZeroSearchReport {
    pub success: Estimate,
    /// Mean number of zero pairs found per trial, with a 95% interval;
    /// expectation is q * 2^-r for random probing.
    pub mean_pairs: f64,
    pub mean_pairs_ci: f64,
}

/// Classical random probing for zero pairs phi(x || 0^r) = y || 0^r.
/// Requires r = c. Probes min(q, 2^r) distinct inputs per trial against
/// a fresh lazily sampled permutation.
pub fn zero_search_experiment(cfg: &ExpConfig) -> Result<ZeroSearchReport> {
    let params = Params::new(cfg.r, cfg.c)?;
    if params.r() != params.c() {
        return Err(Error::Parameter(
            "zero search is defined for r = c".into(),
        ));
    }
    let pi = sample_good_perm(params, cfg.seed);
    let probes = cfg.q.min(params.rate_space());
    let (hits, sum, sum_sq) = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut w = WorldState::new(params, &pi, Rng64::stream(cfg.seed, 2 * t));
            let mut adv = Rng64::stream(cfg.seed ^ 0x0000_02e2_0000_02e2, 2 * t + 1);
            let mut xs: Vec<u32> = (0..params.rate_space() as u32).collect();
            adv.shuffle(&mut xs);
            let count = xs
                .iter()
                .take(probes)
                .filter(|&&x| params.split(w.eval_phi(params.join(x, 0))).1 == 0)
                .count() as u64;
            ((count > 0) as u64, count, count * count)
        })
        .reduce(|| (0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    let (mean_pairs, mean_pairs_ci) = mean_ci(sum as f64, sum_sq as f64, cfg.trials);
    Ok(ZeroSearchReport {
        success: make_estimate(hits, cfg.trials, 0),
        mean_pairs,
        mean_pairs_ci,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TailBoundReport {
    pub n: u32,
    pub r: u32,
    pub c: u32,
    pub samples: u64,
    pub seed: u64,
    /// Real-valued expected bin-to-bucket count m = 2^(c-r).
    pub expected_m: f64,
    /// Violation threshold 7m + 3n.
    pub threshold: f64,
    pub violations: u64,
    pub violation_frequency: f64,
    /// Sample mean of the (first bin, first bucket) intersection size.
    pub mean_intersection: f64,
    pub mean_intersection_ci: f64,
    /// Whether the injected identity permutation trips the threshold.
    pub identity_flagged: bool,
}

/// Sample random permutations and count how often the maximal
/// bin-to-bucket transfer meets or exceeds 7m + 3n, where bins fix the
/// rate prefix of the input and buckets the rate prefix of the output.
pub fn perm_tail_bound_experiment(
    n: u32,
    r: u32,
    c: u32,
    samples: u64,
    seed: u64,
) -> Result<TailBoundReport> {
    if r + c != n || r == 0 || c == 0 {
        return Err(Error::Parameter(format!(
            "bins/buckets must partition the state: r={r} + c={c} != n={n}"
        )));
    }
    let params = Params::new(r, c)?;
    let expected_m = 2f64.powi(c as i32 - r as i32);
    let threshold = 7.0 * expected_m + 3.0 * n as f64;
    let (violations, sum, sum_sq) = (0..samples)
        .into_par_iter()
        .map(|s| {
            let mut rng = Rng64::stream(seed, s);
            let pi = PermTable::sample_uniform(n, &mut rng);
            let max = max_prefix_count(params, &pi) as f64;
            let inter = prefix_count(params, &pi, 0, 0) as u64;
            ((max >= threshold) as u64, inter, inter * inter)
        })
        .reduce(|| (0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    let (mean_intersection, mean_intersection_ci) = mean_ci(sum as f64, sum_sq as f64, samples);
    let identity_flagged = max_prefix_count(params, &PermTable::identity(n)) as f64 >= threshold;
    Ok(TailBoundReport {
        n,
        r,
        c,
        samples,
        seed,
        expected_m,
        threshold,
        violations,
        violation_frequency: violations as f64 / samples as f64,
        mean_intersection,
        mean_intersection_ci,
        identity_flagged,
    })
}

/// Which chaining-adversary event a scaling grid measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ScalingEvent {
    Collision,
    Preimage,
    BadDatabase,
}

#[derive(Debug, Clone, Serialize)]
pub struct GridPoint {
    pub r: u32,
    pub c: u32,
    pub q: usize,
    pub estimate: Estimate,
    /// Reference envelope q^4 * n * 2^-min(r,c).
    pub bound: f64,
    /// estimate / bound.
    pub implied_beta: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingReport {
    pub event: ScalingEvent,
    pub trials_per_point: u64,
    pub seed: u64,
    pub points: Vec<GridPoint>,
    /// Single fitted envelope constant: the max implied beta over the
    /// grid, so estimate <= beta * bound holds everywhere by
    /// construction.
    pub beta: f64,
    /// Least-squares single-constant fit in log space: the geometric
    /// mean of the implied betas over points with at least 10 events.
    pub beta_least_squares: f64,
    /// Envelope constant refit on each capacity row of the grid.
    pub per_capacity_beta: Vec<(u32, f64)>,
    /// Least-squares exponent of estimate / (n 2^-c) against q over
    /// points with at least 10 events.
    pub fitted_q_exponent: Option<f64>,
}

pub fn reference_bound(q: usize, r: u32, c: u32) -> f64 {
    let n = (r + c) as f64;
    (q as f64).powi(4) * n * 2f64.powi(-(r.min(c) as i32))
}

/// Run one chaining-adversary event over a (r=c, q) grid and fit the
/// envelope constant.
pub fn run_scaling_grid(
    event: ScalingEvent,
    rc_values: &[u32],
    q_values: &[usize],
    trials: u64,
    seed: u64,
    check_invariants: bool,
) -> Result<ScalingReport> {
    let mut points = Vec::new();
    for (i, &rc) in rc_values.iter().enumerate() {
        for (j, &q) in q_values.iter().enumerate() {
            let mut cfg = ExpConfig::new(Params::new(rc, rc)?, q, trials, seed ^ ((i as u64) << 8 | j as u64));
            cfg.check_invariants = check_invariants;
            let estimate = match event {
                ScalingEvent::Collision => collision_in_db_experiment(&cfg)?,
                ScalingEvent::Preimage => preimage_in_db_experiment(&cfg)?,
                ScalingEvent::BadDatabase => bad_database_experiment(&cfg)?,
            };
            let bound = reference_bound(q, rc, rc);
            let implied_beta = estimate.estimate / bound;
            points.push(GridPoint {
                r: rc,
                c: rc,
                q,
                estimate,
                bound,
                implied_beta,
            });
        }
    }
    let beta = points
        .iter()
        .map(|p| p.implied_beta)
        .fold(0.0f64, f64::max);
    let populated: Vec<&GridPoint> = points
        .iter()
        .filter(|p| p.estimate.events >= 10)
        .collect();
    let beta_least_squares = if populated.is_empty() {
        0.0
    } else {
        (populated
            .iter()
            .map(|p| p.implied_beta.ln())
            .sum::<f64>()
            / populated.len() as f64)
            .exp()
    };
    let per_capacity_beta: Vec<(u32, f64)> = rc_values
        .iter()
        .map(|&rc| {
            let row = points
                .iter()
                .filter(|p| p.c == rc)
                .map(|p| p.implied_beta)
                .fold(0.0f64, f64::max);
            (rc, row)
        })
        .collect();
    let fitted_q_exponent = crate::stats::fit_loglog(
        &populated
            .iter()
            .map(|p| {
                let n = (p.r + p.c) as f64;
                let scale = n * 2f64.powi(-(p.r.min(p.c) as i32));
                (p.q as f64, p.estimate.estimate / scale)
            })
            .collect::<Vec<_>>(),
    )
    .map(|(_, b)| b);
    Ok(ScalingReport {
        event,
        trials_per_point: trials,
        seed,
        points,
        beta,
        beta_least_squares,
        per_capacity_beta,
        fitted_q_exponent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(r: u32, c: u32, q: usize, trials: u64, seed: u64) -> ExpConfig {
        ExpConfig::new(Params::new(r, c).unwrap(), q, trials, seed)
    }

    #[test]
    fn zero_queries_mean_zero_probability() {
        for est in [
            collision_in_db_experiment(&cfg(4, 4, 0, 10, 1)).unwrap(),
            preimage_in_db_experiment(&cfg(4, 4, 0, 10, 1)).unwrap(),
            bad_database_experiment(&cfg(4, 4, 0, 10, 1)).unwrap(),
            birthday_collision_attack(&cfg(4, 4, 0, 10, 1)).unwrap(),
        ] {
            assert_eq!(est.events, 0);
        }
    }

    #[test]
    fn chaining_estimates_are_deterministic() {
        let a = collision_in_db_experiment(&cfg(3, 3, 8, 500, 7)).unwrap();
        let b = collision_in_db_experiment(&cfg(3, 3, 8, 500, 7)).unwrap();
        assert_eq!(a.events, b.events);
    }

    #[test]
    fn collision_monotone_in_q() {
        let lo = collision_in_db_experiment(&cfg(3, 3, 4, 4000, 21)).unwrap();
        let hi = collision_in_db_experiment(&cfg(3, 3, 12, 4000, 21)).unwrap();
        assert!(
            hi.estimate + (hi.ci_hi - hi.ci_lo) >= lo.estimate,
            "more queries cannot reduce collision frequency: {} -> {}",
            lo.estimate,
            hi.estimate
        );
    }

    #[test]
    fn preimage_no_harder_than_collision_at_small_params() {
        let coll = collision_in_db_experiment(&cfg(4, 4, 8, 20_000, 3)).unwrap();
        let pre = preimage_in_db_experiment(&cfg(4, 4, 8, 20_000, 3)).unwrap();
        assert!(
            pre.estimate <= coll.estimate + (pre.ci_hi - pre.ci_lo),
            "preimage {} should not exceed collision {}",
            pre.estimate,
            coll.estimate
        );
    }

    #[test]
    fn counting_invariants_hold_at_small_params() {
        for rc in [2u32, 3] {
            let mut c = cfg(rc, rc, 8, 300, 5);
            c.check_invariants = true;
            let est = bad_database_experiment(&c).unwrap();
            assert_eq!(est.violations, 0);
        }
    }

    #[test]
    fn birthday_matches_pair_expectation() {
        // r=c=8, q=32: success within a factor 4 of q^2 / 2^(c+1).
        let est = birthday_collision_attack(&cfg(8, 8, 32, 20_000, 9)).unwrap();
        let reference = 32.0f64 * 32.0 / 2f64.powi(9);
        assert!(
            est.estimate >= reference / 4.0 && est.estimate <= (reference * 4.0).min(1.0),
            "birthday estimate {} vs reference {}",
            est.estimate,
            reference
        );
    }

    #[test]
    fn birthday_monotone_in_q() {
        let lo = birthday_collision_attack(&cfg(6, 6, 4, 20_000, 13)).unwrap();
        let hi = birthday_collision_attack(&cfg(6, 6, 16, 20_000, 13)).unwrap();
        assert!(hi.estimate > lo.estimate);
    }

    #[test]
    fn zero_search_requires_square_params() {
        assert!(matches!(
            zero_search_experiment(&cfg(3, 4, 4, 10, 1)),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn zero_search_exhaustive_pair_count() {
        // Probing the whole rate space: expected zero-pair count is 1.
        let rep = zero_search_experiment(&cfg(4, 4, 16, 30_000, 17)).unwrap();
        assert!(
            (rep.mean_pairs - 1.0).abs() < 3.0 * rep.mean_pairs_ci.max(0.02),
            "mean pairs {} +- {}",
            rep.mean_pairs,
            rep.mean_pairs_ci
        );
        // Success frequency matches 1 - P(no pair); for a fresh uniform
        // permutation this is about 0.63 at these sizes.
        assert!(rep.success.estimate > 0.5 && rep.success.estimate < 0.75);
    }

    #[test]
    fn tail_bound_experiment_small() {
        let rep = perm_tail_bound_experiment(12, 6, 6, 200, 23).unwrap();
        assert_eq!(rep.violations, 0);
        assert!(rep.identity_flagged);
        assert!((rep.mean_intersection - 1.0).abs() < 0.2);
        assert!(perm_tail_bound_experiment(12, 5, 6, 10, 1).is_err());
    }

    #[test]
    fn scaling_grid_shapes() {
        let rep = run_scaling_grid(
            ScalingEvent::BadDatabase,
            &[3, 4],
            &[4, 8],
            2000,
            31,
            false,
        )
        .unwrap();
        assert_eq!(rep.points.len(), 4);
        assert!(rep.beta > 0.0);
        for p in &rep.points {
            assert!(p.estimate.estimate <= rep.beta * p.bound + 1e-12);
        }
    }
}
