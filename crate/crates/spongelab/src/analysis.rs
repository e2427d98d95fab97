//! Database combinatorics: tails, intermediate pairs, good/bad
//! predicates, and reachable outputs.
//!
//! A capacity value z has a tail when the recorded k/k' entries, together
//! with the inner permutation, witness an absorption path from the
//! all-zero state to z. Tails never depend on the h database: h acts on
//! the rate wire, which the next absorbed block overwrites.
//!
//! Tail enumeration on *good* databases needs paths no longer than
//! |D_k'|: every absorption step consumes a distinct k' prefix, and a
//! repeat would create a second tail. Bad databases can cycle, so all
//! enumeration is capped at |D_k| * |D_k'| + 1 blocks and "the tails of
//! z" always means the tails within that cap.

use std::collections::hash_map::Entry;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::lazy::LazyDb;
use crate::params::Params;
use crate::perm::PermTable;
use crate::{Error, Result};

/// One witnessed absorption path: the block sequence, and the rate value
/// entering the final h application (absent for the empty tail).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Tail {
    pub blocks: Vec<u32>,
    pub head: Option<u32>,
}

impl Tail {
    pub fn empty() -> Self {
        Tail {
            blocks: vec![],
            head: None,
        }
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Head with the empty-tail convention head(eps) = 0^r, which makes
    /// output formulas total.
    pub fn head_or_zero(&self) -> u32 {
        self.head.unwrap_or(0)
    }
}

/// A tail together with the capacity value it reaches.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PathRecord {
    pub tail: Tail,
    pub capacity: u32,
}

#[derive(Debug, Clone, Copy)]
struct Edge {
    from: u32,
    block: u32,
    head: u32,
}

#[derive(Debug, Clone, Default)]
struct Node {
    in_edges: Vec<Edge>,
}

/// Forward reachability closure of the tail relation for a fixed
/// (D_k, D_k', pi). Holds, for every capacity value with at least one
/// tail, the set of single-step derivations that reach it, plus the full
/// intermediate-pair set.
#[derive(Debug, Clone)]
pub struct TailClosure {
    /// Tailed capacity values in discovery order (deterministic).
    order: Vec<u32>,
    index: HashMap<u32, usize>,
    nodes: Vec<Node>,
    /// (x_i, z_i) -> originating (x_p, z_p). Unique per key since pi is
    /// injective on (x_p, z_p || ...).
    ip: BTreeMap<(u32, u32), (u32, u32)>,
    multi_tail: bool,
    ip_prefix_unique: bool,
    len_cap: usize,
}

impl TailClosure {
    pub fn build(params: Params, d_k: &LazyDb, d_kp: &LazyDb, pi: &PermTable) -> Self {
        let mut order = vec![0u32];
        let mut index = HashMap::new();
        index.insert(0u32, 0usize);
        let mut nodes = vec![Node::default()];
        let mut ip = BTreeMap::new();

        let k_entries: Vec<(u32, u32)> = d_k.iter().collect();
        let mut cursor = 0;
        while cursor < order.len() {
            let z_prev = order[cursor];
            cursor += 1;
            for &(x_p, y) in &k_entries {
                let u = pi.forward(params.join(x_p, z_prev ^ y));
                let (x_i, z_i) = params.split(u);
                let prior = ip.insert((x_i, z_i), (x_p, z_prev));
                debug_assert!(prior.is_none(), "pi injectivity violated");
                if let Some(y_kp) = d_kp.get(x_i) {
                    let z = z_i ^ y_kp;
                    let edge = Edge {
                        from: z_prev,
                        block: x_p,
                        head: x_i,
                    };
                    match index.entry(z) {
                        Entry::Occupied(slot) => nodes[*slot.get()].in_edges.push(edge),
                        Entry::Vacant(slot) => {
                            slot.insert(nodes.len());
                            nodes.push(Node {
                                in_edges: vec![edge],
                            });
                            order.push(z);
                        }
                    }
                }
            }
        }

        // Distinct derivation edges always yield distinct tails (a tail
        // determines its endpoint, so parent tail sets are disjoint), so
        // multiplicity reduces to in-degrees plus any edge into the root.
        let multi_tail =
            !nodes[0].in_edges.is_empty() || nodes.iter().any(|n| n.in_edges.len() > 1);

        let mut ip_prefix_unique = true;
        let mut last_x: Option<u32> = None;
        for &(x_i, _) in ip.keys() {
            if last_x == Some(x_i) {
                ip_prefix_unique = false;
                break;
            }
            last_x = Some(x_i);
        }

        let len_cap = d_k.len() * d_kp.len() + 1;
        TailClosure {
            order,
            index,
            nodes,
            ip,
            multi_tail,
            ip_prefix_unique,
            len_cap,
        }
    }

    #[inline]
    pub fn is_tailed(&self, z: u32) -> bool {
        self.index.contains_key(&z)
    }

    /// Tailed capacity values in deterministic discovery order.
    pub fn tailed_zs(&self) -> &[u32] {
        &self.order
    }

    pub fn tailed_count(&self) -> usize {
        self.order.len()
    }

    pub fn ip_pairs(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.ip.keys().copied()
    }

    pub fn ip_count(&self) -> usize {
        self.ip.len()
    }

    /// Every capacity value has at most one tail (within the length cap).
    pub fn tails_unique(&self) -> bool {
        !self.multi_tail
    }

    /// Intermediate pairs have pairwise distinct rate prefixes.
    pub fn ip_prefix_unique(&self) -> bool {
        self.ip_prefix_unique
    }

    pub fn is_good(&self) -> bool {
        !self.multi_tail && self.ip_prefix_unique
    }

    pub fn len_cap(&self) -> usize {
        self.len_cap
    }

    /// All tails of z up to `max_len` blocks, lexicographically sorted.
    /// `max_count` is a safety valve against pathological bad databases.
    pub fn enumerate_tails(&self, z: u32, max_len: usize, max_count: usize) -> Vec<Tail> {
        let mut out = Vec::new();
        let Some(&start) = self.index.get(&z) else {
            return out;
        };
        // Depth-first backward walk; `suffix` holds blocks from the final
        // step down to the current position (i.e. the tail reversed).
        let mut suffix: Vec<u32> = Vec::new();
        self.walk(start, None, &mut suffix, max_len, max_count, &mut out);
        out.sort();
        out
    }

    fn walk(
        &self,
        node: usize,
        final_head: Option<u32>,
        suffix: &mut Vec<u32>,
        max_len: usize,
        max_count: usize,
        out: &mut Vec<Tail>,
    ) {
        if out.len() >= max_count {
            return;
        }
        let z = self.order[node];
        if z == 0 {
            let mut blocks = suffix.clone();
            blocks.reverse();
            out.push(Tail {
                blocks,
                head: final_head,
            });
            // Do not return: in a bad database the root can also be
            // re-entered, yielding longer tails of the same value.
        }
        if suffix.len() >= max_len {
            return;
        }
        for edge in &self.nodes[node].in_edges {
            let head = final_head.or(Some(edge.head));
            suffix.push(edge.block);
            let from = self.index[&edge.from];
            self.walk(from, head, suffix, max_len, max_count, out);
            suffix.pop();
        }
    }

    /// Lexicographically first tail of z, or None when z has no tail.
    pub fn first_tail(&self, z: u32) -> Option<Tail> {
        let &node = self.index.get(&z)?;
        if !self.multi_tail {
            // Unique tails: walk the single in-edge chain back to the root.
            let mut blocks = Vec::new();
            let mut head = None;
            let mut current = node;
            let mut steps = 0usize;
            while self.order[current] != 0 {
                let edge = self.nodes[current].in_edges[0];
                if head.is_none() {
                    head = Some(edge.head);
                }
                blocks.push(edge.block);
                current = self.index[&edge.from];
                steps += 1;
                debug_assert!(steps <= self.nodes.len(), "cycle in unique-tail closure");
            }
            blocks.reverse();
            return Some(Tail { blocks, head });
        }
        self.enumerate_tails(z, self.len_cap, DEFAULT_TAIL_ENUM_CAP)
            .into_iter()
            .next()
    }
}

const DEFAULT_TAIL_ENUM_CAP: usize = 4096;

/// Lean variant of the closure that only reports which capacity values
/// are tailed; used on experiment hot paths.
pub fn tailed_set(params: Params, d_k: &LazyDb, d_kp: &LazyDb, pi: &PermTable) -> Vec<u32> {
    let mut order = vec![0u32];
    let mut seen = HashMap::new();
    seen.insert(0u32, ());
    let k_entries: Vec<(u32, u32)> = d_k.iter().collect();
    let mut cursor = 0;
    while cursor < order.len() {
        let z_prev = order[cursor];
        cursor += 1;
        for &(x_p, y) in &k_entries {
            let (x_i, z_i) = params.split(pi.forward(params.join(x_p, z_prev ^ y)));
            if let Some(y_kp) = d_kp.get(x_i) {
                let z = z_i ^ y_kp;
                if let Entry::Vacant(slot) = seen.entry(z) {
                    slot.insert(());
                    order.push(z);
                }
            }
        }
    }
    order
}

/// The full (possibly multi-element) tail set of z, capped as described
/// in the module docs.
pub fn compute_tails(
    params: Params,
    d_k: &LazyDb,
    d_kp: &LazyDb,
    pi: &PermTable,
    z: u32,
) -> Vec<Tail> {
    let closure = TailClosure::build(params, d_k, d_kp, pi);
    let cap = closure.len_cap();
    closure.enumerate_tails(z, cap, DEFAULT_TAIL_ENUM_CAP)
}

/// All intermediate pairs (x, z) = split(pi(x_p || z_p ^ k(x_p))) derived
/// from a tailed z_p and a k entry x_p.
pub fn intermediate_pairs(
    params: Params,
    d_k: &LazyDb,
    d_kp: &LazyDb,
    pi: &PermTable,
) -> BTreeSet<(u32, u32)> {
    TailClosure::build(params, d_k, d_kp, pi)
        .ip_pairs()
        .collect()
}

/// Good database pair: every capacity value has at most one tail and the
/// intermediate pairs have distinct rate prefixes.
pub fn is_good(params: Params, d_k: &LazyDb, d_kp: &LazyDb, pi: &PermTable) -> bool {
    TailClosure::build(params, d_k, d_kp, pi).is_good()
}

fn require_good_and_fresh(
    closure: &TailClosure,
    db: &LazyDb,
    x: u32,
    what: &str,
) -> Result<()> {
    if !closure.is_good() {
        return Err(Error::Contract(format!(
            "{what} requires good databases"
        )));
    }
    if db.contains(x) {
        return Err(Error::Contract(format!(
            "{what} requires an unassigned input, {x} is already defined"
        )));
    }
    Ok(())
}

/// Images y whose assignment k(x) = y would cause a bad attach: a fresh
/// intermediate pair colliding with an existing pair's prefix, or
/// attaching directly to a k' entry. Brute force over all 2^c candidates.
pub fn bad_attach_set(
    params: Params,
    d_k: &LazyDb,
    d_kp: &LazyDb,
    pi: &PermTable,
    x: u32,
) -> Result<BTreeSet<u32>> {
    let closure = TailClosure::build(params, d_k, d_kp, pi);
    require_good_and_fresh(&closure, d_k, x, "bad_attach_set")?;
    let existing_prefixes: BTreeSet<u32> = closure.ip_pairs().map(|(xi, _)| xi).collect();
    let mut bad = BTreeSet::new();
    for y in 0..params.capacity_space() as u32 {
        let hit = closure.tailed_zs().iter().any(|&z| {
            let (x_i, _) = params.split(pi.forward(params.join(x, z ^ y)));
            existing_prefixes.contains(&x_i) || d_kp.contains(x_i)
        });
        if hit {
            bad.insert(y);
        }
    }
    Ok(bad)
}

/// Images y' whose assignment k'(x') = y' would cause a bad completion.
/// Empty whenever x' is not an intermediate-pair prefix.
pub fn bad_completion_set(
    params: Params,
    d_k: &LazyDb,
    d_kp: &LazyDb,
    pi: &PermTable,
    x_prime: u32,
) -> Result<BTreeSet<u32>> {
    let closure = TailClosure::build(params, d_k, d_kp, pi);
    require_good_and_fresh(&closure, d_kp, x_prime, "bad_completion_set")?;
    // In a good database x' appears in at most one intermediate pair.
    let z_i = match closure.ip_pairs().find(|&(xi, _)| xi == x_prime) {
        Some((_, z_i)) => z_i,
        None => return Ok(BTreeSet::new()),
    };
    let existing_prefixes: BTreeSet<u32> = closure.ip_pairs().map(|(xi, _)| xi).collect();
    let k_entries: Vec<(u32, u32)> = d_k.iter().collect();
    let mut bad = BTreeSet::new();
    for y_prime in 0..params.capacity_space() as u32 {
        let z_new = z_i ^ y_prime;
        // Condition (3): the newly tailed value already has a tail.
        if closure.is_tailed(z_new) {
            bad.insert(y_prime);
            continue;
        }
        // Conditions (1) and (2) over the completed pairs of (x', y').
        let hit = k_entries.iter().any(|&(x, y)| {
            let (x_1, _) = params.split(pi.forward(params.join(x, z_new ^ y)));
            existing_prefixes.contains(&x_1) || d_kp.contains(x_1)
        });
        if hit {
            bad.insert(y_prime);
        }
    }
    Ok(bad)
}

/// Which database an assignment targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DbRole {
    K,
    Kp,
}

/// Images y for which assigning [x -> y] in the chosen database changes
/// the lexicographically first tail of z, relative to leaving x
/// undefined.
pub fn tail_change_set(
    params: Params,
    d_k: &LazyDb,
    d_kp: &LazyDb,
    pi: &PermTable,
    role: DbRole,
    x: u32,
    z: u32,
) -> Result<BTreeSet<u32>> {
    let closure = TailClosure::build(params, d_k, d_kp, pi);
    let target = match role {
        DbRole::K => d_k,
        DbRole::Kp => d_kp,
    };
    require_good_and_fresh(&closure, target, x, "tail_change_set")?;
    let baseline = closure.first_tail(z).map(|t| t.blocks);
    let mut changed = BTreeSet::new();
    for y in 0..params.capacity_space() as u32 {
        let (mut k2, mut kp2) = (d_k.clone(), d_kp.clone());
        match role {
            DbRole::K => k2.insert(x, y),
            DbRole::Kp => kp2.insert(x, y),
        }
        let with = TailClosure::build(params, &k2, &kp2, pi)
            .first_tail(z)
            .map(|t| t.blocks);
        if with != baseline {
            changed.insert(y);
        }
    }
    Ok(changed)
}

/// All reachable outputs with witnessing paths: for each h entry (z, v)
/// and each tail of z, the output head ^ v.
pub fn reachable_outputs(
    params: Params,
    d_h: &LazyDb,
    d_k: &LazyDb,
    d_kp: &LazyDb,
    pi: &PermTable,
) -> Vec<(u32, PathRecord)> {
    let closure = TailClosure::build(params, d_k, d_kp, pi);
    let cap = closure.len_cap();
    let mut out = Vec::new();
    for (z, v) in d_h.iter() {
        for tail in closure.enumerate_tails(z, cap, DEFAULT_TAIL_ENUM_CAP) {
            let y = tail.head_or_zero() ^ v;
            out.push((y, PathRecord { tail, capacity: z }));
        }
    }
    out.sort();
    out
}

/// JSON witness for a bad database, used as a regression fixture format.
pub fn bad_db_witness_json(
    params: Params,
    d_k: &LazyDb,
    d_kp: &LazyDb,
    pi: &PermTable,
) -> serde_json::Value {
    let closure = TailClosure::build(params, d_k, d_kp, pi);
    let cap = closure.len_cap();
    let tails: BTreeMap<String, Vec<Vec<u32>>> = closure
        .tailed_zs()
        .iter()
        .map(|&z| {
            (
                z.to_string(),
                closure
                    .enumerate_tails(z, cap, 64)
                    .into_iter()
                    .map(|t| t.blocks)
                    .collect(),
            )
        })
        .collect();
    serde_json::json!({
        "r": params.r(),
        "c": params.c(),
        "d_k": d_k,
        "d_kp": d_kp,
        "tails_unique": closure.tails_unique(),
        "ip_prefix_unique": closure.ip_prefix_unique(),
        "tails": tails,
        "ip": closure.ip_pairs().collect::<Vec<_>>(),
    })
}
