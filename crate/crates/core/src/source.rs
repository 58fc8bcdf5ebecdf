//! Source models and their entropy oracles.
//!
//! A multi-terminal source assigns to every subset `X` of users the joint
//! entropy `H(Z_X)` of their observations. Two models are supported:
//!
//! * [`BitPoolSource`]: every symbol label names an independent uniform bit
//!   and each user observes a finite set of labels, so `H(Z_X)` is the number
//!   of distinct labels observed by `X`. This model is always a polymatroid.
//! * [`ExplicitEntropyTable`]: `H` given directly as a table over all
//!   subsets. The table is taken at face value; [`validate_polymatroid`]
//!   checks normalization, monotonicity and submodularity on demand.
//!
//! All downstream algorithms assume the oracle is a polymatroid rank
//! function; feeding them an invalid table is undefined behavior in the
//! mathematical sense (results are meaningless, not unsafe).

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::ground::{GroundSet, Subset, UserId};
use crate::rational::Rational;

/// Bit-pool source: each user observes a subset of a pool of independent
/// uniform bits, identified by string labels.
#[derive(Clone, Debug)]
pub struct BitPoolSource {
    ground: GroundSet,
    /// Distinct labels in first-seen order; only the count matters for
    /// entropy, the names are kept for introspection.
    labels: Vec<String>,
    /// Per ground position, a bitmask over `labels` (chunked into u64 words).
    observed: Vec<Vec<u64>>,
}

impl BitPoolSource {
    /// Creates a bit-pool source from per-user observation lists.
    ///
    /// Users absent from `observations` observe nothing. Duplicate labels
    /// within one user collapse; an unknown user id is an error.
    pub fn new(ground: GroundSet, observations: &BTreeMap<UserId, Vec<String>>) -> Result<Self> {
        for user in observations.keys() {
            ground.position(*user)?;
        }
        let mut labels: Vec<String> = Vec::new();
        let mut index: BTreeMap<String, usize> = BTreeMap::new();
        let mut per_user: Vec<Vec<usize>> = vec![Vec::new(); ground.len()];
        for (&user, observed) in observations {
            let position = ground.position(user)?;
            for label in observed {
                let id = match index.get(label) {
                    Some(&id) => id,
                    None => {
                        let id = labels.len();
                        labels.push(label.clone());
                        index.insert(label.clone(), id);
                        id
                    }
                };
                per_user[position].push(id);
            }
        }
        let words = labels.len().div_ceil(64).max(1);
        let mut observed = vec![vec![0u64; words]; ground.len()];
        for (position, ids) in per_user.iter().enumerate() {
            for &id in ids {
                observed[position][id / 64] |= 1 << (id % 64);
            }
        }
        Ok(BitPoolSource {
            ground,
            labels,
            observed,
        })
    }

    /// Ground set of the source.
    pub fn ground(&self) -> &GroundSet {
        &self.ground
    }

    /// Number of distinct labels in the pool.
    pub fn pool_size(&self) -> usize {
        self.labels.len()
    }

    /// Labels observed by `user`.
    pub fn labels_of(&self, user: UserId) -> Result<Vec<String>> {
        let position = self.ground.position(user)?;
        Ok(self
            .labels
            .iter()
            .enumerate()
            .filter(|(id, _)| self.observed[position][id / 64] & (1 << (id % 64)) != 0)
            .map(|(_, label)| label.clone())
            .collect())
    }

    /// Number of distinct labels observed by the members of `x`.
    fn union_count(&self, x: Subset) -> u64 {
        let words = self.observed.first().map_or(1, Vec::len);
        let mut union = vec![0u64; words];
        for position in x.positions() {
            for (w, word) in self.observed[position].iter().enumerate() {
                union[w] |= word;
            }
        }
        union.iter().map(|w| w.count_ones() as u64).sum()
    }
}

/// Joint entropy given explicitly for every subset of the ground set.
#[derive(Clone, Debug)]
pub struct ExplicitEntropyTable {
    ground: GroundSet,
    /// Value for each subset, indexed by mask; length `2^|V|`.
    values: Vec<Rational>,
}

impl ExplicitEntropyTable {
    /// Creates a table from a dense value vector indexed by subset mask.
    pub fn new(ground: GroundSet, values: Vec<Rational>) -> Result<Self> {
        let expected = 1usize << ground.len();
        if values.len() != expected {
            return Err(Error::Instance(format!(
                "entropy table must list all {expected} subsets, got {}",
                values.len()
            )));
        }
        Ok(ExplicitEntropyTable { ground, values })
    }

    /// Creates a table from `(subset, value)` entries.
    ///
    /// Every nonempty subset must appear exactly once; the empty set may be
    /// omitted and then defaults to zero.
    pub fn from_entries(ground: GroundSet, entries: &[(Vec<UserId>, Rational)]) -> Result<Self> {
        let size = 1usize << ground.len();
        let mut values: Vec<Option<Rational>> = vec![None; size];
        for (users, value) in entries {
            let subset = ground.subset_of(users)?;
            let slot = &mut values[subset.mask() as usize];
            if slot.is_some() {
                return Err(Error::Instance(format!(
                    "duplicate entropy entry for subset {:?}",
                    ground.users_in(subset)
                )));
            }
            *slot = Some(value.clone());
        }
        if values[0].is_none() {
            values[0] = Some(Rational::zero());
        }
        let mut dense = Vec::with_capacity(size);
        for (mask, slot) in values.into_iter().enumerate() {
            match slot {
                Some(value) => dense.push(value),
                None => {
                    return Err(Error::Instance(format!(
                        "entropy entry missing for subset {:?}",
                        ground.users_in(Subset::from_mask(mask as u32))
                    )))
                }
            }
        }
        ExplicitEntropyTable::new(ground, dense)
    }

    /// Ground set of the table.
    pub fn ground(&self) -> &GroundSet {
        &self.ground
    }

    /// Raw value stored for `x`.
    pub fn value(&self, x: Subset) -> &Rational {
        &self.values[x.mask() as usize]
    }
}

/// A violation found by [`validate_polymatroid`].
///
/// Monotonicity and submodularity are checked in their single-element local
/// forms, which are equivalent to the global conditions; each reported item
/// is itself a genuine counterexample to the global condition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PolymatroidViolation {
    /// `H(∅)` is not zero.
    Normalization { value: Rational },
    /// `H(X) > H(X ∪ {i})` for the reported subset and extension.
    Monotonicity { smaller: Subset, larger: Subset },
    /// `H(X) + H(Y) < H(X ∪ Y) + H(X ∩ Y)` for the reported pair.
    Submodularity { x: Subset, y: Subset },
}

/// Outcome of [`validate_polymatroid`].
#[derive(Clone, Debug, Default)]
pub struct PolymatroidReport {
    pub violations: Vec<PolymatroidViolation>,
}

impl PolymatroidReport {
    /// True when no violation was found.
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that a table is a polymatroid rank function: `H(∅) = 0`,
/// monotone nondecreasing, and submodular. Every local violation is
/// reported.
pub fn validate_polymatroid(table: &ExplicitEntropyTable) -> PolymatroidReport {
    let ground = table.ground();
    let n = ground.len();
    let mut report = PolymatroidReport::default();
    let empty = table.value(Subset::EMPTY);
    if !empty.is_zero() {
        report.violations.push(PolymatroidViolation::Normalization {
            value: empty.clone(),
        });
    }
    for x in ground.subsets() {
        for i in 0..n {
            if x.contains(i) {
                continue;
            }
            let xi = x.with(i);
            if table.value(x) > table.value(xi) {
                report.violations.push(PolymatroidViolation::Monotonicity {
                    smaller: x,
                    larger: xi,
                });
            }
            // Local exchange form: H(X∪{i}) + H(X∪{j}) ≥ H(X∪{i,j}) + H(X).
            for j in (i + 1)..n {
                if x.contains(j) {
                    continue;
                }
                let xj = x.with(j);
                let xij = xi.with(j);
                if table.value(xi) + table.value(xj) < table.value(xij) + table.value(x) {
                    report
                        .violations
                        .push(PolymatroidViolation::Submodularity { x: xi, y: xj });
                }
            }
        }
    }
    report
}

/// Entropy oracle over a ground set, backed by one of the source models.
///
/// Cloning is cheap; the underlying model is shared.
#[derive(Clone, Debug)]
pub enum EntropyOracle {
    BitPool(Arc<BitPoolSource>),
    Table(Arc<ExplicitEntropyTable>),
}

impl EntropyOracle {
    /// Wraps a bit-pool source.
    pub fn from_bit_pool(source: BitPoolSource) -> Self {
        EntropyOracle::BitPool(Arc::new(source))
    }

    /// Wraps an explicit table.
    pub fn from_table(table: ExplicitEntropyTable) -> Self {
        EntropyOracle::Table(Arc::new(table))
    }

    /// Ground set the oracle is defined over.
    pub fn ground(&self) -> &GroundSet {
        match self {
            EntropyOracle::BitPool(source) => source.ground(),
            EntropyOracle::Table(table) => table.ground(),
        }
    }

    /// Joint entropy `H(Z_X)`.
    pub fn entropy(&self, x: Subset) -> Result<Rational> {
        self.ground().check_subset(x)?;
        Ok(self.entropy_in(x))
    }

    /// Conditional entropy `H(Z_X | Z_Y) = H(Z_{X∪Y}) − H(Z_Y)`.
    pub fn conditional_entropy(&self, x: Subset, y: Subset) -> Result<Rational> {
        self.ground().check_subset(x)?;
        self.ground().check_subset(y)?;
        Ok(self.entropy_in(x.union(y)) - self.entropy_in(y))
    }

    /// Entropy without the membership check; `x` must lie in the ground set.
    pub(crate) fn entropy_in(&self, x: Subset) -> Rational {
        match self {
            EntropyOracle::BitPool(source) => Rational::from_integer(source.union_count(x).into()),
            EntropyOracle::Table(table) => table.value(x).clone(),
        }
    }

    /// Restriction of the source to the users in `block`.
    ///
    /// The restricted oracle reports the same entropies on subsets of
    /// `block`, over a ground set that keeps the original user ids.
    pub fn restrict(&self, block: Subset) -> Result<EntropyOracle> {
        let ground = self.ground();
        ground.check_subset(block)?;
        if block.is_empty() {
            return Err(Error::EmptySubset);
        }
        let users = ground.users_in(block);
        let sub_ground = GroundSet::new(users.clone())?;
        match self {
            EntropyOracle::BitPool(source) => {
                let mut observations = BTreeMap::new();
                for &user in &users {
                    observations.insert(user, source.labels_of(user)?);
                }
                Ok(EntropyOracle::from_bit_pool(BitPoolSource::new(
                    sub_ground,
                    &observations,
                )?))
            }
            EntropyOracle::Table(table) => {
                let size = 1usize << sub_ground.len();
                let mut values = Vec::with_capacity(size);
                for mask in 0..size {
                    let sub = Subset::from_mask(mask as u32);
                    let parent = ground.subset_of(&sub_ground.users_in(sub))?;
                    values.push(table.value(parent).clone());
                }
                Ok(EntropyOracle::from_table(ExplicitEntropyTable::new(
                    sub_ground, values,
                )?))
            }
        }
    }
}
