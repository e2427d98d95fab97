//! Database predicates, local properties, and their distances.

use crate::db::Dims;

/// A predicate over compressed databases, stored as a membership mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateSet {
    dims: Dims,
    mask: Vec<bool>,
}

impl PredicateSet {
    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize) -> bool) -> Self {
        PredicateSet {
            dims,
            mask: (0..dims.db_dim()).map(&mut f).collect(),
        }
    }

    pub fn none(dims: Dims) -> Self {
        Self::from_fn(dims, |_| false)
    }

    pub fn all(dims: Dims) -> Self {
        Self::from_fn(dims, |_| true)
    }

    /// Databases containing two distinct inputs with equal defined
    /// outputs.
    pub fn collision(dims: Dims) -> Self {
        Self::from_fn(dims, |d| {
            for x1 in 0..dims.m() {
                let v1 = dims.digit(d, x1);
                if v1 == dims.bot() {
                    continue;
                }
                for x2 in (x1 + 1)..dims.m() {
                    if dims.digit(d, x2) == v1 {
                        return true;
                    }
                }
            }
            false
        })
    }

    /// Databases containing some input mapped to `target`.
    pub fn preimage(dims: Dims, target: usize) -> Self {
        Self::from_fn(dims, |d| {
            (0..dims.m()).any(|x| dims.digit(d, x) == target)
        })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    #[inline]
    pub fn contains(&self, d: usize) -> bool {
        self.mask[d]
    }

    pub fn complement(&self) -> Self {
        PredicateSet {
            dims: self.dims,
            mask: self.mask.iter().map(|&b| !b).collect(),
        }
    }

    pub fn union(&self, other: &Self) -> Self {
        PredicateSet {
            dims: self.dims,
            mask: self
                .mask
                .iter()
                .zip(&other.mask)
                .map(|(&a, &b)| a | b)
                .collect(),
        }
    }

    pub fn intersect(&self, other: &Self) -> Self {
        PredicateSet {
            dims: self.dims,
            mask: self
                .mask
                .iter()
                .zip(&other.mask)
                .map(|(&a, &b)| a & b)
                .collect(),
        }
    }

    /// Restriction to databases with at most `t` defined entries.
    pub fn restrict_max_entries(&self, t: usize) -> Self {
        let dims = self.dims;
        PredicateSet {
            dims,
            mask: self
                .mask
                .iter()
                .enumerate()
                .map(|(d, &b)| b && dims.entry_count(d) <= t)
                .collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&b| b)
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.mask
            .iter()
            .zip(&other.mask)
            .all(|(&a, &b)| !a || b)
    }
}

/// A single local property: a truth function over the output symbol at
/// one special input, relative to a base database fixed off that input.
#[derive(Debug, Clone)]
pub struct LocalProperty {
    pub dims: Dims,
    pub x: usize,
    /// Base database; its own value at x is irrelevant (overridden).
    pub base_db: usize,
    /// Truth per output symbol, indexed 0..N with N meaning bot.
    pub truth: Vec<bool>,
}

impl LocalProperty {
    /// The fiber of a predicate at (x, D).
    pub fn from_predicate(pred: &PredicateSet, x: usize, base_db: usize) -> Self {
        let dims = pred.dims();
        let truth = (0..=dims.n())
            .map(|v| pred.contains(dims.with_digit(base_db, x, v)))
            .collect();
        LocalProperty {
            dims,
            x,
            base_db,
            truth,
        }
    }

    /// Number of defined output symbols whose truth differs from bot's.
    pub fn distance(&self) -> usize {
        let at_bot = self.truth[self.dims.bot()];
        (0..self.dims.n())
            .filter(|&v| self.truth[v] != at_bot)
            .count()
    }

    /// Monotone in the bot -> defined direction.
    pub fn is_monotone(&self) -> bool {
        !self.truth[self.dims.bot()] || self.truth.iter().all(|&b| b)
    }
}

/// The family of local properties obtained by restricting a base
/// predicate to single-input fibers over databases with at most `t`
/// entries: member (x, D) holds on D' (agreeing with D off x) iff the
/// base predicate holds on D'.
#[derive(Debug, Clone)]
pub struct PredicateLocalFamily {
    pub dims: Dims,
    pub base: PredicateSet,
    pub t: usize,
}

impl PredicateLocalFamily {
    pub fn new(base: PredicateSet, t: usize) -> Self {
        PredicateLocalFamily {
            dims: base.dims(),
            base,
            t,
        }
    }

    /// Iterate over (special input, base database with bot at the input).
    fn members(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let dims = self.dims;
        (0..dims.m()).flat_map(move |x| {
            (0..dims.db_dim()).filter_map(move |d| {
                (dims.digit(d, x) == dims.bot() && dims.entry_count(d) <= self.t)
                    .then_some((x, d))
            })
        })
    }

    /// Enumerate the family as explicit [`LocalProperty`] values.
    pub fn properties(&self) -> impl Iterator<Item = LocalProperty> + '_ {
        self.members()
            .map(move |(x, d)| LocalProperty::from_predicate(&self.base, x, d))
    }

    /// Max over the family of the number of defined outputs at the
    /// special input that flip the truth value relative to bot.
    pub fn distance(&self) -> usize {
        self.properties().map(|lp| lp.distance()).max().unwrap_or(0)
    }

    /// Monotonicity in the bot -> defined direction: a member true at bot
    /// must stay true under every defined assignment.
    pub fn is_monotone(&self) -> bool {
        self.properties().all(|lp| lp.is_monotone())
    }

    /// Membership of a database in the union of the family's fibers: the
    /// base predicate restricted to at most t+1 entries.
    pub fn union_contains(&self, d: usize) -> bool {
        self.base.contains(d) && self.dims.entry_count(d) <= self.t + 1
    }
}
