//! Set functions, duals, partitions, and submodularity checks.
//!
//! [`SetFunction`] wraps an arbitrary exact-valued function on subsets of a
//! ground set behind a memo table, since every algorithm downstream
//! (minimization, truncation, decomposition) re-queries the same subsets
//! heavily. Evaluation is pure: the cache only ever stores the value the
//! closure would return.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::ground::{GroundSet, Subset};
use crate::rational::Rational;
use crate::source::EntropyOracle;

type Eval = dyn Fn(Subset) -> Rational + Send + Sync;

/// A rational-valued function on the subsets of a ground set, memoized.
///
/// Clones share the same memo table, so restrictions and wrappers reuse
/// values already computed elsewhere. Lookups take a read lock; the first
/// evaluation of a subset takes the write lock briefly, which keeps
/// concurrent evaluation safe.
#[derive(Clone)]
pub struct SetFunction {
    ground: GroundSet,
    eval: Arc<Eval>,
    cache: Arc<RwLock<HashMap<u32, Rational>>>,
}

impl SetFunction {
    /// Wraps an evaluation closure over `ground`.
    pub fn new(
        ground: GroundSet,
        eval: impl Fn(Subset) -> Rational + Send + Sync + 'static,
    ) -> Self {
        SetFunction {
            ground,
            eval: Arc::new(eval),
            cache: Arc::new(RwLock::new(HashMap::new())),
        }
    }

    /// Builds a set function from a dense value table indexed by mask.
    pub fn from_values(ground: GroundSet, values: Vec<Rational>) -> Result<Self> {
        if values.len() != 1 << ground.len() {
            return Err(Error::Internal(format!(
                "value table of length {} for a ground set of {} users",
                values.len(),
                ground.len()
            )));
        }
        Ok(SetFunction::new(ground, move |x| {
            values[x.mask() as usize].clone()
        }))
    }

    /// Builds the modular function `X ↦ Σ_{i∈X} c_i`.
    pub fn modular(ground: GroundSet, coefficients: Vec<Rational>) -> Result<Self> {
        if coefficients.len() != ground.len() {
            return Err(Error::Internal(format!(
                "{} coefficients for a ground set of {} users",
                coefficients.len(),
                ground.len()
            )));
        }
        Ok(SetFunction::new(ground, move |x| {
            x.positions().map(|p| coefficients[p].clone()).sum()
        }))
    }

    /// Ground set the function is defined over.
    pub fn ground(&self) -> &GroundSet {
        &self.ground
    }

    /// Evaluates the function at `x`.
    ///
    /// Panics if `x` lies outside the ground set; callers construct subsets
    /// through the ground set, so a violation is a programming error.
    pub fn value(&self, x: Subset) -> Rational {
        assert!(
            self.ground.contains_subset(x),
            "subset outside the ground set"
        );
        if let Some(hit) = self.cache.read().unwrap().get(&x.mask()) {
            return hit.clone();
        }
        let computed = (self.eval)(x);
        self.cache
            .write()
            .unwrap()
            .entry(x.mask())
            .or_insert_with(|| computed.clone());
        computed
    }

    /// Restriction to the subsets of `block`, over a ground set that keeps
    /// the original user ids of `block`.
    pub fn restrict_to(&self, block: Subset) -> Result<SetFunction> {
        self.ground.check_subset(block)?;
        if block.is_empty() {
            return Err(Error::EmptySubset);
        }
        let sub_ground = GroundSet::new(self.ground.users_in(block))?;
        // Position p of the sub-ground corresponds to the p-th member of
        // `block` in the parent ground.
        let parent_positions: Vec<usize> = block.positions().collect();
        let parent = self.clone();
        Ok(SetFunction::new(sub_ground, move |x| {
            let embedded = Subset::from_positions(
                &x.positions()
                    .map(|p| parent_positions[p])
                    .collect::<Vec<_>>(),
            );
            parent.value(embedded)
        }))
    }
}

impl std::fmt::Debug for SetFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SetFunction")
            .field("ground", &self.ground)
            .finish_non_exhaustive()
    }
}

/// The sum-rate function of an omniscience instance with total budget `alpha`:
///
/// * `f(∅) = 0`,
/// * `f(V) = alpha`,
/// * `f(X) = H(Z_X | Z_{V∖X})` for every other `X`.
///
/// `f(X)` is the amount of information the users in `X` hold that the rest
/// of the users are missing; `alpha` caps the total transmission budget.
pub fn co_function(oracle: &EntropyOracle, alpha: Rational) -> Result<SetFunction> {
    if alpha < Rational::zero() {
        return Err(Error::NegativeAlpha(Box::new(alpha)));
    }
    let ground = oracle.ground().clone();
    let full = ground.full();
    let total = oracle.entropy_in(full);
    let oracle = oracle.clone();
    Ok(SetFunction::new(ground.clone(), move |x| {
        if x.is_empty() {
            Rational::zero()
        } else if x == full {
            alpha.clone()
        } else {
            // H(Z_X | Z_{V∖X}) = H(Z_V) − H(Z_{V∖X}).
            total.clone() - oracle.entropy_in(ground.complement(x))
        }
    }))
}

/// The dual set function `f^#(X) = f(V) − f(V∖X)`.
///
/// The dual is an involution: `dual(dual(f)) = f` pointwise.
pub fn dual(f: &SetFunction) -> SetFunction {
    let ground = f.ground().clone();
    let full = ground.full();
    let at_full = f.value(full);
    let f = f.clone();
    SetFunction::new(ground, move |x| {
        at_full.clone() - f.value(full.difference(x))
    })
}

/// A partition of a subset into disjoint nonempty blocks.
///
/// Blocks are kept in canonical order: sorted by their smallest member
/// position. Two partitions are equal exactly when they have the same
/// blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<Subset>,
}

impl Partition {
    /// Builds a partition from blocks, which must be nonempty and pairwise
    /// disjoint.
    pub fn from_blocks(mut blocks: Vec<Subset>) -> Result<Self> {
        let mut seen = Subset::EMPTY;
        for block in &blocks {
            if block.is_empty() {
                return Err(Error::EmptySubset);
            }
            if !seen.is_disjoint(*block) {
                return Err(Error::Internal("overlapping partition blocks".into()));
            }
            seen = seen.union(*block);
        }
        blocks.sort_by_key(|block| block.mask().trailing_zeros());
        Ok(Partition { blocks })
    }

    /// The blocks in canonical order.
    pub fn blocks(&self) -> &[Subset] {
        &self.blocks
    }

    /// Number of blocks.
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    /// True when the partition has no blocks.
    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Union of all blocks.
    pub fn support(&self) -> Subset {
        self.blocks
            .iter()
            .fold(Subset::EMPTY, |acc, block| acc.union(*block))
    }

    /// The block containing `position`, if any.
    pub fn block_of(&self, position: usize) -> Option<Subset> {
        self.blocks.iter().copied().find(|b| b.contains(position))
    }
}

/// Iterator over the partitions of a fixed subset.
///
/// Partitions are generated from restricted growth strings in lexicographic
/// order: the single-block partition comes first, the all-singletons
/// partition last. The stream is deterministic, which downstream code relies
/// on for reproducible tie handling.
pub struct PartitionIter {
    /// Members of the subset being partitioned, ascending.
    elements: Vec<usize>,
    /// Current restricted growth string; `rgs[i]` is the block label of
    /// `elements[i]`, constrained by `rgs[i] ≤ max(rgs[..i]) + 1`.
    rgs: Vec<usize>,
    /// Prefix maxima of `rgs`.
    max: Vec<usize>,
    min_blocks: usize,
    done: bool,
}

impl PartitionIter {
    fn current(&self) -> Partition {
        let label_count = self.max.last().copied().unwrap_or(0) + 1;
        let mut blocks = vec![Subset::EMPTY; label_count];
        for (i, &label) in self.rgs.iter().enumerate() {
            blocks[label] = blocks[label].with(self.elements[i]);
        }
        // Labels appear in order of first occurrence, so blocks are already
        // sorted by smallest member.
        Partition { blocks }
    }

    fn advance(&mut self) {
        // Lexicographic successor of the restricted growth string.
        let n = self.rgs.len();
        let mut i = n;
        loop {
            if i <= 1 {
                self.done = true;
                return;
            }
            i -= 1;
            if self.rgs[i] <= self.max[i - 1] {
                break;
            }
        }
        self.rgs[i] += 1;
        self.max[i] = self.max[i - 1].max(self.rgs[i]);
        for j in (i + 1)..n {
            self.rgs[j] = 0;
            self.max[j] = self.max[j - 1];
        }
    }
}

impl Iterator for PartitionIter {
    type Item = Partition;

    fn next(&mut self) -> Option<Partition> {
        while !self.done {
            let block_count = self.max.last().copied().unwrap_or(0) + 1;
            if block_count >= self.min_blocks {
                let partition = self.current();
                self.advance();
                return Some(partition);
            }
            self.advance();
        }
        None
    }
}

/// Streams every partition of `x` with at least `min_blocks` blocks.
///
/// `x` must be nonempty. A `min_blocks` of 0 behaves like 1; a value above
/// `|x|` yields an empty stream.
pub fn enumerate_partitions(x: Subset, min_blocks: usize) -> Result<PartitionIter> {
    if x.is_empty() {
        return Err(Error::EmptySubset);
    }
    let elements: Vec<usize> = x.positions().collect();
    let n = elements.len();
    Ok(PartitionIter {
        elements,
        rgs: vec![0; n],
        max: vec![0; n],
        min_blocks,
        done: false,
    })
}

/// Outcome of a submodularity check.
#[derive(Clone, Debug)]
pub struct SubmodularityCheck {
    pub holds: bool,
    /// A violating pair `(X, Y)` with `f(X) + f(Y) < f(X∪Y) + f(X∩Y)`.
    pub witness: Option<(Subset, Subset)>,
}

/// Checks whether `f` is submodular on its whole ground set.
///
/// Uses the local exchange characterization: `f` is submodular iff
/// `f(X∪{i}) + f(X∪{j}) ≥ f(X∪{i,j}) + f(X)` for all `X` and distinct
/// `i, j ∉ X`. A local violation is returned as the pair
/// `(X∪{i}, X∪{j})`, which violates the global inequality directly.
pub fn is_submodular(f: &SetFunction) -> SubmodularityCheck {
    let ground = f.ground();
    let n = ground.len();
    for x in ground.subsets() {
        for i in 0..n {
            if x.contains(i) {
                continue;
            }
            for j in (i + 1)..n {
                if x.contains(j) {
                    continue;
                }
                let xi = x.with(i);
                let xj = x.with(j);
                if f.value(xi) + f.value(xj) < f.value(xi.with(j)) + f.value(x) {
                    return SubmodularityCheck {
                        holds: false,
                        witness: Some((xi, xj)),
                    };
                }
            }
        }
    }
    SubmodularityCheck {
        holds: true,
        witness: None,
    }
}
