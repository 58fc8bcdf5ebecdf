//! Fair rate allocation over submodular base polyhedra.
//!
//! Once a budget `alpha` is fixed, the achievable rate vectors form the
//! polyhedron `P = {r : r(X) ≤ f̂(X) for all X}` of the truncated dual
//! function `f̂`, and the vectors that spend exactly the budget form its
//! base `B = {r ∈ P : r(V) = f̂(V)}`. This module ranks bases by fairness
//! and computes the fairest one exactly:
//!
//! * the weighted *lexicographic order*: sort the ratios `r_i / w_i`
//!   ascending and compare; a larger sequence means the worst-off users are
//!   better off. The unique lex-optimal base also minimizes
//!   `Σ r_i² / w_i`, so with uniform weights it maximizes the Jain index.
//! * [`lex_optimal_base`] finds it by recursive decomposition: each step
//!   minimizes `f̂(X) − λ·w(X)` for a threshold `λ` read off the current
//!   interval and splits at the maximal minimizer, producing the chain of
//!   level sets and at most `2|V| − 1` minimization calls.
//! * [`verify_exchange_optimality`] checks the certificate that
//!   characterizes the optimum: no user can rob a ratio-poorer user it
//!   depends on.
//! * [`shapley`] computes the Shapley value of `f̂` for comparison; it
//!   spreads costs by average marginal contribution, which is generally
//!   *not* the fairest point in the lexicographic sense.
//!
//! At the minimum achievable budget the base polyhedron splits across the
//! blocks of the fundamental partition; [`lex_optimal_min_sum_rate`]
//! exploits that to solve per block (optionally in parallel) and merge.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::ground::{GroundSet, Subset, UserId};
use crate::omniscience::{self, OmniscienceSolution};
use crate::rational::Rational;
use crate::setfn::SetFunction;
use crate::sfm;
use crate::source::EntropyOracle;

/// An exact rate vector over a ground set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RateVector {
    ground: GroundSet,
    rates: Vec<Rational>,
}

impl RateVector {
    /// Wraps per-position rates; one value per user, in ground order.
    pub fn new(ground: GroundSet, rates: Vec<Rational>) -> Result<Self> {
        if rates.len() != ground.len() {
            return Err(Error::GroundMismatch);
        }
        Ok(RateVector { ground, rates })
    }

    /// Builds a vector from a user-to-rate map covering every user exactly.
    pub fn from_map(ground: GroundSet, map: &BTreeMap<UserId, Rational>) -> Result<Self> {
        if map.len() != ground.len() {
            return Err(Error::GroundMismatch);
        }
        let mut rates = Vec::with_capacity(ground.len());
        for &user in ground.users() {
            match map.get(&user) {
                Some(rate) => rates.push(rate.clone()),
                None => return Err(Error::UnknownUser(user)),
            }
        }
        Ok(RateVector { ground, rates })
    }

    /// Ground set of the vector.
    pub fn ground(&self) -> &GroundSet {
        &self.ground
    }

    /// Rates in ground order.
    pub fn rates(&self) -> &[Rational] {
        &self.rates
    }

    /// Rate of one user.
    pub fn rate_of(&self, user: UserId) -> Result<&Rational> {
        Ok(&self.rates[self.ground.position(user)?])
    }

    /// `r(X) = Σ_{i ∈ X} r_i`.
    pub fn sum_over(&self, x: Subset) -> Rational {
        x.positions().map(|p| self.rates[p].clone()).sum()
    }

    /// Total rate `r(V)`.
    pub fn total(&self) -> Rational {
        self.rates.iter().cloned().sum()
    }

    /// True when every entry is zero.
    pub fn is_zero(&self) -> bool {
        self.rates.iter().all(Rational::is_zero)
    }

    /// Restriction to the users in `block`.
    pub fn restrict(&self, block: Subset) -> Result<RateVector> {
        self.ground.check_subset(block)?;
        if block.is_empty() {
            return Err(Error::EmptySubset);
        }
        let ground = GroundSet::new(self.ground.users_in(block))?;
        let rates = block.positions().map(|p| self.rates[p].clone()).collect();
        RateVector::new(ground, rates)
    }

    /// Direct merge of two vectors over disjoint user sets: the combined
    /// vector indexes the union and keeps every rate unchanged.
    pub fn merge(&self, other: &RateVector) -> Result<RateVector> {
        let mut map: BTreeMap<UserId, Rational> = BTreeMap::new();
        for (&user, rate) in self.ground.users().iter().zip(&self.rates) {
            map.insert(user, rate.clone());
        }
        for (&user, rate) in other.ground.users().iter().zip(&other.rates) {
            if map.insert(user, rate.clone()).is_some() {
                return Err(Error::DuplicateUser(user));
            }
        }
        let ground = GroundSet::new(map.keys().copied().collect())?;
        RateVector::from_map(ground, &map)
    }
}

/// Strictly positive weights expressing how much rate each user can bear.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightVector {
    ground: GroundSet,
    weights: Vec<Rational>,
}

impl WeightVector {
    /// Wraps per-position weights, which must all be positive.
    pub fn new(ground: GroundSet, weights: Vec<Rational>) -> Result<Self> {
        if weights.len() != ground.len() {
            return Err(Error::GroundMismatch);
        }
        for (position, weight) in weights.iter().enumerate() {
            if *weight <= Rational::zero() {
                return Err(Error::NonPositiveWeight(ground.user_at(position)));
            }
        }
        Ok(WeightVector { ground, weights })
    }

    /// All-ones weights.
    pub fn uniform(ground: GroundSet) -> Self {
        let weights = vec![Rational::one(); ground.len()];
        WeightVector { ground, weights }
    }

    /// Builds a weight vector from a user-to-weight map covering every user.
    pub fn from_map(ground: GroundSet, map: &BTreeMap<UserId, Rational>) -> Result<Self> {
        if map.len() != ground.len() {
            return Err(Error::GroundMismatch);
        }
        let mut weights = Vec::with_capacity(ground.len());
        for &user in ground.users() {
            match map.get(&user) {
                Some(weight) => weights.push(weight.clone()),
                None => return Err(Error::UnknownUser(user)),
            }
        }
        WeightVector::new(ground, weights)
    }

    /// Ground set of the weights.
    pub fn ground(&self) -> &GroundSet {
        &self.ground
    }

    /// Weights in ground order.
    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    /// Weight of one user.
    pub fn weight_of(&self, user: UserId) -> Result<&Rational> {
        Ok(&self.weights[self.ground.position(user)?])
    }

    /// `w(X) = Σ_{i ∈ X} w_i`.
    pub fn sum_over(&self, x: Subset) -> Rational {
        x.positions().map(|p| self.weights[p].clone()).sum()
    }

    /// Restriction to the users in `block`.
    pub fn restrict(&self, block: Subset) -> Result<WeightVector> {
        self.ground.check_subset(block)?;
        if block.is_empty() {
            return Err(Error::EmptySubset);
        }
        let ground = GroundSet::new(self.ground.users_in(block))?;
        let weights = block.positions().map(|p| self.weights[p].clone()).collect();
        WeightVector::new(ground, weights)
    }
}

/// The chain of level sets produced by the decomposition, with the rate
/// threshold of each level.
///
/// Level `n` says: every user in `sets[n] ∖ sets[n−1]` is assigned the rate
/// `λ_n · w_i`. Sets are strictly nested and end at the full ground set;
/// thresholds are strictly increasing and nonnegative (a zero first
/// threshold happens exactly when some users are assigned rate zero).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chain {
    ground: GroundSet,
    levels: Vec<(Subset, Rational)>,
}

impl Chain {
    /// Validates and wraps chain levels.
    pub fn new(ground: GroundSet, levels: Vec<(Subset, Rational)>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::Internal("chain has no levels".into()));
        }
        let mut previous = Subset::EMPTY;
        for (set, _) in &levels {
            ground.check_subset(*set)?;
            if !previous.is_proper_subset_of(*set) {
                return Err(Error::Internal("chain sets are not strictly nested".into()));
            }
            previous = *set;
        }
        if previous != ground.full() {
            return Err(Error::Internal(
                "chain does not end at the ground set".into(),
            ));
        }
        if levels[0].1 < Rational::zero() {
            return Err(Error::Internal("negative chain threshold".into()));
        }
        for pair in levels.windows(2) {
            if pair[0].1 >= pair[1].1 {
                return Err(Error::Internal(
                    "chain thresholds are not strictly increasing".into(),
                ));
            }
        }
        Ok(Chain { ground, levels })
    }

    /// Ground set of the chain.
    pub fn ground(&self) -> &GroundSet {
        &self.ground
    }

    /// The `(set, threshold)` levels, innermost first.
    pub fn levels(&self) -> &[(Subset, Rational)] {
        &self.levels
    }

    /// Assembles the rate vector the chain encodes: `r_i = λ_n · w_i` for
    /// `i` joining at level `n`.
    pub fn rates(&self, w: &WeightVector) -> Result<RateVector> {
        if w.ground() != &self.ground {
            return Err(Error::GroundMismatch);
        }
        let mut rates = vec![Rational::zero(); self.ground.len()];
        let mut previous = Subset::EMPTY;
        for (set, lambda) in &self.levels {
            for position in set.difference(previous).positions() {
                rates[position] = lambda * &w.weights()[position];
            }
            previous = *set;
        }
        RateVector::new(self.ground.clone(), rates)
    }
}

/// Outcome of a polyhedron membership test.
#[derive(Clone, Debug)]
pub struct PolyhedronCheck {
    pub inside: bool,
    /// First subset (ascending mask order) with `r(X) > f̂(X)`, when outside.
    pub violating: Option<Subset>,
}

fn check_same_ground(a: &GroundSet, b: &GroundSet) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::GroundMismatch)
    }
}

/// Tests `r(X) ≤ f̂(X)` for every subset `X`.
pub fn in_polyhedron(r: &RateVector, f_hat: &SetFunction) -> Result<PolyhedronCheck> {
    check_same_ground(r.ground(), f_hat.ground())?;
    for x in f_hat.ground().subsets() {
        if r.sum_over(x) > f_hat.value(x) {
            return Ok(PolyhedronCheck {
                inside: false,
                violating: Some(x),
            });
        }
    }
    Ok(PolyhedronCheck {
        inside: true,
        violating: None,
    })
}

/// Tests membership in the base: inside the polyhedron and spending the
/// budget exactly, `r(V) = f̂(V)`.
pub fn is_base(r: &RateVector, f_hat: &SetFunction) -> Result<bool> {
    let check = in_polyhedron(r, f_hat)?;
    Ok(check.inside && r.total() == f_hat.value(f_hat.ground().full()))
}

/// All subsets where `r` meets `f̂` with equality, ascending mask order.
///
/// Requires `r` to be in the polyhedron. The empty set is always tight.
pub fn tight_sets(r: &RateVector, f_hat: &SetFunction) -> Result<Vec<Subset>> {
    let check = in_polyhedron(r, f_hat)?;
    if !check.inside {
        return Err(Error::NotInPolyhedron);
    }
    Ok(f_hat
        .ground()
        .subsets()
        .filter(|&x| r.sum_over(x) == f_hat.value(x))
        .collect())
}

/// The smallest tight set containing `user`: the set of users whose rates
/// would have to drop for `user`'s rate to grow while staying feasible.
///
/// Requires `r` to be a base. For a submodular `f̂` the tight sets are
/// closed under intersection, so the smallest one exists; if the
/// intersection of all tight sets containing `user` is not itself tight,
/// `f̂` was not submodular and an internal error is reported.
pub fn dep(r: &RateVector, user: UserId, f_hat: &SetFunction) -> Result<Subset> {
    if !is_base(r, f_hat)? {
        return Err(Error::NotABase);
    }
    let position = f_hat.ground().position(user)?;
    let mut intersection = f_hat.ground().full();
    for x in f_hat.ground().subsets() {
        if x.contains(position) && r.sum_over(x) == f_hat.value(x) {
            intersection = intersection.intersection(x);
        }
    }
    // The full set is tight for a base, so at least one set was seen.
    if r.sum_over(intersection) != f_hat.value(intersection) {
        return Err(Error::Internal(
            "tight sets are not closed under intersection".into(),
        ));
    }
    Ok(intersection)
}

/// Jain's fairness index `(Σ r_i)² / (|V| · Σ r_i²)`; 1 means perfectly
/// even, `1/|V|` means maximally lopsided.
pub fn jain_index(r: &RateVector) -> Result<Rational> {
    if r.is_zero() {
        return Err(Error::ZeroRates);
    }
    let sum: Rational = r.total();
    let squares: Rational = r.rates().iter().map(|rate| rate * rate).sum();
    let n = Rational::from_integer(BigInt::from(r.ground().len() as u64));
    Ok(&sum * &sum / (n * squares))
}

/// The ratios `r_i / w_i` sorted ascending; the object the lexicographic
/// order compares.
pub fn sorted_ratio_vector(r: &RateVector, w: &WeightVector) -> Result<Vec<Rational>> {
    check_same_ground(r.ground(), w.ground())?;
    let mut ratios: Vec<Rational> = r
        .rates()
        .iter()
        .zip(w.weights())
        .map(|(rate, weight)| rate / weight)
        .collect();
    ratios.sort();
    Ok(ratios)
}

/// Relation between two rate vectors under the weighted lexicographic order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LexOrdering {
    /// `a` is strictly better at the first differing sorted ratio.
    Dominates,
    /// `b` is strictly better at the first differing sorted ratio.
    DominatedBy,
    /// Identical allocations.
    Equal,
    /// Different allocations with identical sorted ratio profiles; neither
    /// dominates the other.
    EqualProfiles,
}

/// Compares `a` against `b` in the weighted lexicographic order: sorted
/// ratio sequences are compared entrywise from the smallest, and the first
/// strict difference decides.
pub fn lex_dominates(a: &RateVector, b: &RateVector, w: &WeightVector) -> Result<LexOrdering> {
    check_same_ground(a.ground(), b.ground())?;
    let ta = sorted_ratio_vector(a, w)?;
    let tb = sorted_ratio_vector(b, w)?;
    for (x, y) in ta.iter().zip(&tb) {
        if x > y {
            return Ok(LexOrdering::Dominates);
        }
        if x < y {
            return Ok(LexOrdering::DominatedBy);
        }
    }
    if a == b {
        Ok(LexOrdering::Equal)
    } else {
        Ok(LexOrdering::EqualProfiles)
    }
}

/// One vertex of the base polyhedron: rates are the marginal values of `f̂`
/// along the given visiting order, which must be a permutation of the
/// ground set.
pub fn greedy_vertex(f_hat: &SetFunction, order: &[UserId]) -> Result<RateVector> {
    let ground = f_hat.ground();
    let mut seen = Subset::EMPTY;
    let mut rates = vec![Rational::zero(); ground.len()];
    for &user in order {
        let position = ground.position(user)?;
        if seen.contains(position) {
            return Err(Error::NotAPermutation);
        }
        let next = seen.with(position);
        rates[position] = f_hat.value(next) - f_hat.value(seen);
        seen = next;
    }
    if seen != ground.full() {
        return Err(Error::NotAPermutation);
    }
    RateVector::new(ground.clone(), rates)
}

/// Recursive decomposition step over the interval `(lower, upper)`.
///
/// The minimization runs over *all* subsets of the ground set; nesting of
/// the maximal minimizer between `lower` and `upper` is a consequence of
/// submodularity and is asserted, not imposed.
fn decompose(
    f_hat: &SetFunction,
    w: &WeightVector,
    lower: Subset,
    upper: Subset,
    sets: &mut Vec<Subset>,
    calls: &mut usize,
) -> Result<()> {
    *calls += 1;
    let gap = upper.difference(lower);
    debug_assert!(!gap.is_empty());
    let lambda = (f_hat.value(upper) - f_hat.value(lower)) / w.sum_over(gap);
    let shifted = {
        let f_hat = f_hat.clone();
        let w = w.clone();
        let lambda = lambda.clone();
        SetFunction::new(f_hat.ground().clone(), move |x| {
            f_hat.value(x) - &lambda * w.sum_over(x)
        })
    };
    let split = sfm::minimize(&shifted)?.maximal_minimizer;
    if !lower.is_subset_of(split) || !split.is_subset_of(upper) || split == lower {
        return Err(Error::NonNestedMinimizer);
    }
    if split == upper {
        sets.push(upper);
        return Ok(());
    }
    decompose(f_hat, w, lower, split, sets, calls)?;
    decompose(f_hat, w, split, upper, sets, calls)
}

/// The lexicographically optimal base of `f̂` under weights `w`, together
/// with its chain of level sets.
///
/// This is the unique base minimizing `Σ r_i² / w_i`; with uniform weights
/// it is the base with the highest Jain index.
pub fn lex_optimal_base(f_hat: &SetFunction, w: &WeightVector) -> Result<(RateVector, Chain)> {
    check_same_ground(f_hat.ground(), w.ground())?;
    let ground = f_hat.ground().clone();
    let mut sets = Vec::new();
    let mut calls = 0usize;
    decompose(
        f_hat,
        w,
        Subset::EMPTY,
        ground.full(),
        &mut sets,
        &mut calls,
    )?;
    if calls > 2 * ground.len() - 1 {
        return Err(Error::Internal(format!(
            "decomposition used {calls} calls on {} users",
            ground.len()
        )));
    }
    // Nested sets sort by mask; leaves arrive in order, but dedupe anyway.
    sets.sort_by_key(|set| set.mask());
    sets.dedup();
    let mut levels = Vec::with_capacity(sets.len());
    let mut previous = Subset::EMPTY;
    for set in sets {
        let lambda =
            (f_hat.value(set) - f_hat.value(previous)) / w.sum_over(set.difference(previous));
        levels.push((set, lambda));
        previous = set;
    }
    let chain = Chain::new(ground, levels)?;
    let rates = chain.rates(w)?;
    Ok((rates, chain))
}

/// Certificate outcome for [`verify_exchange_optimality`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub pass: bool,
    /// First `(i, j)` with `j` in `dep(r, i)` and `r_i/w_i < r_j/w_j`.
    pub witness: Option<(UserId, UserId)>,
}

/// Verifies the exchange-optimality certificate: a base is lex-optimal iff
/// every user's ratio is at least the ratio of every user it depends on.
pub fn verify_exchange_optimality(
    r: &RateVector,
    w: &WeightVector,
    f_hat: &SetFunction,
) -> Result<Certificate> {
    check_same_ground(r.ground(), w.ground())?;
    check_same_ground(r.ground(), f_hat.ground())?;
    let ground = r.ground().clone();
    for &i in ground.users() {
        let dependence = dep(r, i, f_hat)?;
        let ratio_i = r.rate_of(i)? / w.weight_of(i)?;
        for j in ground.users_in(dependence) {
            if j == i {
                continue;
            }
            let ratio_j = r.rate_of(j)? / w.weight_of(j)?;
            if ratio_i < ratio_j {
                return Ok(Certificate {
                    pass: false,
                    witness: Some((i, j)),
                });
            }
        }
    }
    Ok(Certificate {
        pass: true,
        witness: None,
    })
}

/// Fair allocation of the minimum sum-rate: the lex-optimal base computed
/// block by block over the fundamental partition and merged.
#[derive(Clone, Debug)]
pub struct MinSumRateAllocation {
    /// Minimum sum-rate, fundamental partition, and block quotas.
    pub solution: OmniscienceSolution,
    /// The merged lex-optimal rate vector over the full ground set.
    pub rates: RateVector,
    /// Per-block chains, aligned with the partition blocks.
    pub block_chains: Vec<Chain>,
}

/// Computes the lex-optimal rate allocation at the minimum sum-rate.
///
/// The truncated dual at the minimum budget separates across the blocks of
/// the fundamental partition, so each block is solved independently (in
/// parallel when `parallel` is set) and the per-block optima merge into the
/// global optimum. The merged vector equals the one the monolithic
/// decomposition over the full ground set would produce.
pub fn lex_optimal_min_sum_rate(
    oracle: &EntropyOracle,
    w: &WeightVector,
    parallel: bool,
) -> Result<MinSumRateAllocation> {
    check_same_ground(oracle.ground(), w.ground())?;
    let solution = omniscience::solve(oracle)?;
    let truncated = omniscience::truncated_dual(oracle, solution.min_sum_rate.clone())?;
    let blocks = solution.fundamental_partition.blocks();

    let solve_block = |&block: &Subset| -> Result<(RateVector, Chain)> {
        let restricted = truncated.restrict_to(block)?;
        let weights = w.restrict(block)?;
        lex_optimal_base(&restricted, &weights)
    };

    let results: Vec<Result<(RateVector, Chain)>> = if parallel {
        std::thread::scope(|scope| {
            let handles: Vec<_> = blocks
                .iter()
                .map(|block| scope.spawn(move || solve_block(block)))
                .collect();
            handles
                .into_iter()
                .map(|handle| handle.join().expect("block solver panicked"))
                .collect()
        })
    } else {
        blocks.iter().map(solve_block).collect()
    };

    let mut merged: Option<RateVector> = None;
    let mut block_chains = Vec::with_capacity(results.len());
    for result in results {
        let (rates, chain) = result?;
        merged = Some(match merged {
            Some(current) => current.merge(&rates)?,
            None => rates,
        });
        block_chains.push(chain);
    }
    let rates = merged.expect("the fundamental partition has at least two blocks");
    Ok(MinSumRateAllocation {
        solution,
        rates,
        block_chains,
    })
}

/// Maximizes the total rate inside the polyhedron under the per-user caps
/// `r_i ≤ lambda · w_i`.
///
/// Returns the optimizer `r* ∧ λ·w` (the lex-optimal base clipped at the
/// caps) and the optimal value, which equals
/// `min over X of f̂(X) + λ·w(V∖X)`; the two are computed independently
/// and cross-checked. `lambda` must be nonnegative.
pub fn max_rate_under_cap(
    f_hat: &SetFunction,
    w: &WeightVector,
    lambda: &Rational,
) -> Result<(RateVector, Rational)> {
    check_same_ground(f_hat.ground(), w.ground())?;
    debug_assert!(*lambda >= Rational::zero());
    let (optimal, _) = lex_optimal_base(f_hat, w)?;
    let ground = f_hat.ground().clone();
    let capped: Vec<Rational> = optimal
        .rates()
        .iter()
        .zip(w.weights())
        .map(|(rate, weight)| {
            let cap = lambda * weight;
            if *rate <= cap {
                rate.clone()
            } else {
                cap
            }
        })
        .collect();
    let capped = RateVector::new(ground.clone(), capped)?;

    let full = ground.full();
    let best = ground
        .subsets()
        .map(|x| f_hat.value(x) + lambda * w.sum_over(full.difference(x)))
        .min()
        .expect("a ground set has at least one subset");
    if capped.total() != best {
        return Err(Error::Internal(format!(
            "capped optimum {} disagrees with the dual bound {}",
            capped.total(),
            best
        )));
    }
    Ok((capped, best))
}

/// The Shapley value of `f̂`: each user gets its marginal contribution
/// averaged over all arrival orders, computed by direct subset summation.
///
/// Exact factorial weighting caps the ground size at 12 users.
pub fn shapley(f_hat: &SetFunction) -> Result<RateVector> {
    const CAP: usize = 12;
    let ground = f_hat.ground().clone();
    let n = ground.len();
    if n > CAP {
        return Err(Error::ShapleyCapacity(n, CAP));
    }
    let mut factorial = vec![BigInt::one(); n + 1];
    for k in 1..=n {
        factorial[k] = &factorial[k - 1] * BigInt::from(k as u64);
    }
    let mut rates = vec![Rational::zero(); n];
    for (position, rate) in rates.iter_mut().enumerate() {
        let mut total = Rational::zero();
        for x in ground.subsets() {
            if x.contains(position) {
                continue;
            }
            let k = x.len();
            // |X|! (n−|X|−1)! / n! orders place exactly X before the user.
            let weight = Rational::new(&factorial[k] * &factorial[n - k - 1], factorial[n].clone());
            total += weight * (f_hat.value(x.with(position)) - f_hat.value(x));
        }
        *rate = total;
    }
    RateVector::new(ground, rates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};
    use crate::setfn::{co_function, dual};
    use crate::source::BitPoolSource;
    use std::collections::BTreeMap;

    fn pool(users: &[UserId], obs: &[(UserId, &[&str])]) -> EntropyOracle {
        let ground = GroundSet::new(users.to_vec()).unwrap();
        let map: BTreeMap<UserId, Vec<String>> = obs
            .iter()
            .map(|(u, labels)| (*u, labels.iter().map(|s| s.to_string()).collect()))
            .collect();
        EntropyOracle::from_bit_pool(BitPoolSource::new(ground, &map).unwrap())
    }

    fn three_user_pool() -> EntropyOracle {
        pool(
            &[1, 2, 3],
            &[
                (1, &["a", "b", "c", "d", "e"]),
                (2, &["a", "b", "f"]),
                (3, &["c", "d", "f"]),
            ],
        )
    }

    /// Truncated dual of the three-user pool at budget 4.
    fn f_hat_at_4() -> SetFunction {
        let oracle = three_user_pool();
        omniscience::truncated_dual(&oracle, int(4)).unwrap()
    }

    fn rates(ground: &GroundSet, values: &[Rational]) -> RateVector {
        RateVector::new(ground.clone(), values.to_vec()).unwrap()
    }

    #[test]
    fn membership_and_witnesses() {
        let f_hat = f_hat_at_4();
        let g = f_hat.ground().clone();
        let inside = rates(&g, &[rat(5, 2), rat(1, 2), int(1)]);
        let check = in_polyhedron(&inside, &f_hat).unwrap();
        assert!(check.inside);
        assert!(is_base(&inside, &f_hat).unwrap());

        // Below the budget: in the polyhedron but not a base.
        let slack = rates(&g, &[int(1), int(0), int(0)]);
        assert!(in_polyhedron(&slack, &f_hat).unwrap().inside);
        assert!(!is_base(&slack, &f_hat).unwrap());

        // Overshooting the total: the full set is the first violation.
        let over = rates(&g, &[int(3), int(1), int(1)]);
        let check = in_polyhedron(&over, &f_hat).unwrap();
        assert!(!check.inside);
        assert_eq!(check.violating, Some(g.full()));
    }

    #[test]
    fn tight_sets_of_the_uniform_optimum() {
        let f_hat = f_hat_at_4();
        let g = f_hat.ground().clone();
        let r = rates(&g, &[int(2), int(1), int(1)]);
        let tight = tight_sets(&r, &f_hat).unwrap();
        let expected: Vec<Subset> = vec![
            Subset::EMPTY,
            g.subset_of(&[2]).unwrap(),
            g.subset_of(&[3]).unwrap(),
            g.subset_of(&[2, 3]).unwrap(),
            g.full(),
        ];
        assert_eq!(tight, expected);

        let outside = rates(&g, &[int(4), int(1), int(1)]);
        assert!(matches!(
            tight_sets(&outside, &f_hat),
            Err(Error::NotInPolyhedron)
        ));
    }

    #[test]
    fn dependence_sets_match_the_tight_set_lattice() {
        let f_hat = f_hat_at_4();
        let g = f_hat.ground().clone();
        // Uniform-weight optimum: {2} itself is tight, so user 2 depends
        // on nobody else; users 1 and 3 are pinned only by the full set
        // and the pair {2,3} respectively.
        let r = rates(&g, &[int(2), int(1), int(1)]);
        assert_eq!(dep(&r, 1, &f_hat).unwrap(), g.full());
        assert_eq!(dep(&r, 2, &f_hat).unwrap(), g.subset_of(&[2]).unwrap());
        assert_eq!(dep(&r, 3, &f_hat).unwrap(), g.subset_of(&[3]).unwrap());

        // Weighted optimum for w = (4, 2, 1).
        let r = rates(&g, &[rat(12, 5), int(1), rat(3, 5)]);
        assert_eq!(dep(&r, 1, &f_hat).unwrap(), g.full());
        assert_eq!(dep(&r, 2, &f_hat).unwrap(), g.subset_of(&[2]).unwrap());
        assert_eq!(dep(&r, 3, &f_hat).unwrap(), g.full());

        // A non-base is rejected.
        let slack = rates(&g, &[int(1), int(0), int(0)]);
        assert!(matches!(dep(&slack, 1, &f_hat), Err(Error::NotABase)));
    }

    #[test]
    fn jain_index_values() {
        let g = GroundSet::new(vec![1, 2, 3]).unwrap();
        assert_eq!(
            jain_index(&rates(&g, &[int(2), int(1), int(1)])).unwrap(),
            rat(8, 9)
        );
        assert_eq!(
            jain_index(&rates(&g, &[int(1), int(1), int(1)])).unwrap(),
            int(1)
        );
        assert_eq!(
            jain_index(&rates(&g, &[rat(8, 3), rat(2, 3), rat(2, 3)])).unwrap(),
            rat(2, 3)
        );
        assert!(matches!(
            jain_index(&rates(&g, &[int(0), int(0), int(0)])),
            Err(Error::ZeroRates)
        ));
    }

    #[test]
    fn ratio_profiles_and_lexicographic_order() {
        let g = GroundSet::new(vec![1, 2, 3]).unwrap();
        let w = WeightVector::new(g.clone(), vec![int(4), int(2), int(1)]).unwrap();
        let r = rates(&g, &[rat(12, 5), int(1), rat(3, 5)]);
        assert_eq!(
            sorted_ratio_vector(&r, &w).unwrap(),
            vec![rat(1, 2), rat(3, 5), rat(3, 5)]
        );

        // (0.5, 0.6, 0.6) beats (0.5, 0.55, 0.8) at the second entry.
        let other = rates(&g, &[rat(11, 5), int(1), rat(4, 5)]);
        assert_eq!(
            sorted_ratio_vector(&other, &w).unwrap(),
            vec![rat(1, 2), rat(11, 20), rat(4, 5)]
        );
        assert_eq!(
            lex_dominates(&r, &other, &w).unwrap(),
            LexOrdering::Dominates
        );
        assert_eq!(
            lex_dominates(&other, &r, &w).unwrap(),
            LexOrdering::DominatedBy
        );
        assert_eq!(lex_dominates(&r, &r, &w).unwrap(), LexOrdering::Equal);

        // Same profile, different vectors, under uniform weights.
        let uniform = WeightVector::uniform(g.clone());
        let a = rates(&g, &[int(1), int(2), int(3)]);
        let b = rates(&g, &[int(3), int(1), int(2)]);
        assert_eq!(
            lex_dominates(&a, &b, &uniform).unwrap(),
            LexOrdering::EqualProfiles
        );

        let uniform_optimum = rates(&g, &[int(2), int(1), int(1)]);
        let skewed = rates(&g, &[int(3), int(0), int(1)]);
        assert_eq!(
            lex_dominates(&uniform_optimum, &skewed, &uniform).unwrap(),
            LexOrdering::Dominates
        );
    }

    #[test]
    fn decomposition_uniform_weights() {
        let f_hat = f_hat_at_4();
        let g = f_hat.ground().clone();
        let w = WeightVector::uniform(g.clone());
        let (r, chain) = lex_optimal_base(&f_hat, &w).unwrap();
        assert_eq!(r, rates(&g, &[int(2), int(1), int(1)]));
        assert_eq!(
            chain.levels(),
            &[(g.subset_of(&[2, 3]).unwrap(), int(1)), (g.full(), int(2)),]
        );
    }

    #[test]
    fn decomposition_weighted() {
        let f_hat = f_hat_at_4();
        let g = f_hat.ground().clone();
        let w = WeightVector::new(g.clone(), vec![int(4), int(2), int(1)]).unwrap();
        let (r, chain) = lex_optimal_base(&f_hat, &w).unwrap();
        assert_eq!(r, rates(&g, &[rat(12, 5), int(1), rat(3, 5)]));
        assert_eq!(
            chain.levels(),
            &[
                (g.subset_of(&[2]).unwrap(), rat(1, 2)),
                (g.full(), rat(3, 5)),
            ]
        );
    }

    #[test]
    fn decomposition_first_step_threshold_and_split() {
        // First interval (∅, V) with w = (4,2,1): threshold 4/7, and the
        // shifted function is minimized at {2} alone with value −1/7.
        let f_hat = f_hat_at_4();
        let g = f_hat.ground().clone();
        let w = WeightVector::new(g.clone(), vec![int(4), int(2), int(1)]).unwrap();
        let lambda = f_hat.value(g.full()) / w.sum_over(g.full());
        assert_eq!(lambda, rat(4, 7));
        let shifted = {
            let f_hat = f_hat.clone();
            let w = w.clone();
            SetFunction::new(g.clone(), move |x| {
                f_hat.value(x) - rat(4, 7) * w.sum_over(x)
            })
        };
        let result = sfm::minimize(&shifted).unwrap();
        assert_eq!(result.min_value, rat(-1, 7));
        assert_eq!(result.maximal_minimizer, g.subset_of(&[2]).unwrap());
    }

    #[test]
    fn scaling_weights_rescales_thresholds_only() {
        let f_hat = f_hat_at_4();
        let g = f_hat.ground().clone();
        let w = WeightVector::new(g.clone(), vec![int(4), int(2), int(1)]).unwrap();
        let scaled = WeightVector::new(g.clone(), vec![int(12), int(6), int(3)]).unwrap();
        let (r, chain) = lex_optimal_base(&f_hat, &w).unwrap();
        let (r_scaled, chain_scaled) = lex_optimal_base(&f_hat, &scaled).unwrap();
        assert_eq!(r, r_scaled);
        for ((set, lambda), (set_scaled, lambda_scaled)) in
            chain.levels().iter().zip(chain_scaled.levels())
        {
            assert_eq!(set, set_scaled);
            assert_eq!(lambda.clone(), lambda_scaled * int(3));
        }
    }

    #[test]
    fn chain_sets_are_tight_for_the_optimum() {
        let f_hat = f_hat_at_4();
        let w = WeightVector::new(f_hat.ground().clone(), vec![int(4), int(2), int(1)]).unwrap();
        let (r, chain) = lex_optimal_base(&f_hat, &w).unwrap();
        for (set, _) in chain.levels() {
            assert_eq!(r.sum_over(*set), f_hat.value(*set));
        }
        assert_eq!(chain.rates(&w).unwrap(), r);
    }

    #[test]
    fn membership_agrees_with_the_untruncated_dual() {
        // The polyhedron of the truncation and of the plain dual coincide,
        // so membership verdicts must match on every candidate vector.
        let oracle = three_user_pool();
        let g = oracle.ground().clone();
        let f_sharp = dual(&co_function(&oracle, int(4)).unwrap());
        let f_hat = f_hat_at_4();
        let candidates = [
            rates(&g, &[int(2), int(1), int(1)]),
            rates(&g, &[int(3), int(0), int(1)]),
            rates(&g, &[int(3), int(1), int(1)]),
            rates(&g, &[int(0), int(0), int(0)]),
            rates(&g, &[rat(5, 2), rat(1, 2), int(1)]),
            rates(&g, &[int(0), int(2), int(2)]),
            rates(&g, &[int(1), rat(3, 2), rat(3, 2)]),
        ];
        for r in &candidates {
            assert_eq!(
                in_polyhedron(r, &f_hat).unwrap().inside,
                in_polyhedron(r, &f_sharp).unwrap().inside,
                "membership differs on {:?}",
                r.rates()
            );
        }
    }

    #[test]
    fn single_user_decomposition() {
        let g = GroundSet::new(vec![7]).unwrap();
        let f_hat = SetFunction::from_values(g.clone(), vec![int(0), rat(3, 2)]).unwrap();
        let w = WeightVector::new(g.clone(), vec![int(3)]).unwrap();
        let (r, chain) = lex_optimal_base(&f_hat, &w).unwrap();
        assert_eq!(r, rates(&g, &[rat(3, 2)]));
        assert_eq!(chain.levels(), &[(g.full(), rat(1, 2))]);
    }

    #[test]
    fn zero_rate_users_sit_at_a_zero_threshold() {
        // One user observes nothing and transmits nothing.
        let oracle = pool(&[1, 2, 3], &[(1, &["a"]), (2, &["b"]), (3, &[])]);
        let allocation = lex_optimal_min_sum_rate(
            &oracle,
            &WeightVector::uniform(oracle.ground().clone()),
            false,
        )
        .unwrap();
        assert_eq!(allocation.solution.min_sum_rate, int(2));
        assert_eq!(
            allocation.rates,
            rates(oracle.ground(), &[int(1), int(1), int(0)])
        );
    }

    #[test]
    fn certificate_accepts_optima_and_pins_violations() {
        let f_hat = f_hat_at_4();
        let g = f_hat.ground().clone();
        let uniform = WeightVector::uniform(g.clone());
        let optimum = rates(&g, &[int(2), int(1), int(1)]);
        let cert = verify_exchange_optimality(&optimum, &uniform, &f_hat).unwrap();
        assert!(cert.pass);
        assert_eq!(cert.witness, None);

        // (3, 0, 1) is a base but user 2 depends on everyone while holding
        // the worst ratio.
        let skewed = rates(&g, &[int(3), int(0), int(1)]);
        assert!(is_base(&skewed, &f_hat).unwrap());
        let cert = verify_exchange_optimality(&skewed, &uniform, &f_hat).unwrap();
        assert!(!cert.pass);
        assert_eq!(cert.witness, Some((2, 1)));

        let w = WeightVector::new(g.clone(), vec![int(4), int(2), int(1)]).unwrap();
        let weighted = rates(&g, &[rat(12, 5), int(1), rat(3, 5)]);
        assert!(
            verify_exchange_optimality(&weighted, &w, &f_hat)
                .unwrap()
                .pass
        );
    }

    #[test]
    fn greedy_vertices_are_bases() {
        let f_hat = f_hat_at_4();
        let g = f_hat.ground().clone();
        let vertex = greedy_vertex(&f_hat, &[2, 3, 1]).unwrap();
        assert!(is_base(&vertex, &f_hat).unwrap());
        // Marginals along 2, 3, 1: 1, then 2−1, then 4−2.
        assert_eq!(vertex, rates(&g, &[int(2), int(1), int(1)]));
        assert!(matches!(
            greedy_vertex(&f_hat, &[1, 2]),
            Err(Error::NotAPermutation)
        ));
        assert!(matches!(
            greedy_vertex(&f_hat, &[1, 2, 2]),
            Err(Error::NotAPermutation)
        ));
    }

    #[test]
    fn merge_concatenates_disjoint_allocations() {
        let left = rates(
            &GroundSet::new(vec![1, 4, 5]).unwrap(),
            &[int(2), int(3), int(4)],
        );
        let right = rates(&GroundSet::new(vec![2, 3]).unwrap(), &[int(4), int(1)]);
        let merged = left.merge(&right).unwrap();
        assert_eq!(merged.ground().users(), &[1, 2, 3, 4, 5]);
        assert_eq!(merged.rates(), &[int(2), int(4), int(1), int(3), int(4)]);
        assert!(left.merge(&left).is_err());
    }

    #[test]
    fn block_decomposition_merges_to_the_monolithic_answer() {
        let oracle = three_user_pool();
        let g = oracle.ground().clone();
        let w = WeightVector::uniform(g.clone());
        for parallel in [false, true] {
            let allocation = lex_optimal_min_sum_rate(&oracle, &w, parallel).unwrap();
            assert_eq!(allocation.solution.min_sum_rate, rat(7, 2));
            assert_eq!(
                allocation.rates,
                rates(&g, &[rat(5, 2), rat(1, 2), rat(1, 2)])
            );
            let f_hat = omniscience::truncated_dual(&oracle, rat(7, 2)).unwrap();
            let (monolithic, _) = lex_optimal_base(&f_hat, &w).unwrap();
            assert_eq!(allocation.rates, monolithic);
        }
    }

    #[test]
    fn capped_maximum_matches_the_dual_bound() {
        let f_hat = f_hat_at_4();
        let g = f_hat.ground().clone();
        let uniform = WeightVector::uniform(g.clone());
        let (vector, value) = max_rate_under_cap(&f_hat, &uniform, &int(1)).unwrap();
        assert_eq!(value, int(3));
        assert_eq!(vector, rates(&g, &[int(1), int(1), int(1)]));
        let (vector, value) = max_rate_under_cap(&f_hat, &uniform, &int(2)).unwrap();
        assert_eq!(value, int(4));
        assert_eq!(vector, rates(&g, &[int(2), int(1), int(1)]));
        let (_, value) = max_rate_under_cap(&f_hat, &uniform, &int(0)).unwrap();
        assert_eq!(value, int(0));

        // Between thresholds for w = (4,2,1).
        let w = WeightVector::new(g.clone(), vec![int(4), int(2), int(1)]).unwrap();
        let (vector, value) = max_rate_under_cap(&f_hat, &w, &rat(4, 7)).unwrap();
        assert_eq!(value, rat(27, 7));
        assert_eq!(vector, rates(&g, &[rat(16, 7), int(1), rat(4, 7)]));
    }

    #[test]
    fn shapley_spreads_marginals() {
        let f_hat = f_hat_at_4();
        let g = f_hat.ground().clone();
        let value = shapley(&f_hat).unwrap();
        assert_eq!(value, rates(&g, &[rat(8, 3), rat(2, 3), rat(2, 3)]));
        // Efficiency: the Shapley value is a base of a submodular function.
        assert!(is_base(&value, &f_hat).unwrap());
    }

    #[test]
    fn shapley_of_modular_and_symmetric_functions() {
        let g = GroundSet::new(vec![1, 2, 3]).unwrap();
        // Modular: marginals are constant, so each user gets its own term.
        let costs = vec![rat(1, 2), int(2), rat(7, 3)];
        let modular = SetFunction::modular(g.clone(), costs.clone()).unwrap();
        assert_eq!(shapley(&modular).unwrap(), rates(&g, &costs));
        // Symmetric: the value splits evenly.
        let symmetric = SetFunction::new(g.clone(), |x| match x.len() {
            0 => int(0),
            1 => int(3),
            2 => int(5),
            _ => int(6),
        });
        assert_eq!(
            shapley(&symmetric).unwrap(),
            rates(&g, &[int(2), int(2), int(2)])
        );
    }

    #[test]
    fn shapley_capacity_is_enforced() {
        let g = GroundSet::new((1..=13).collect()).unwrap();
        let f = SetFunction::new(g, |x| int(x.len() as i64));
        assert!(matches!(shapley(&f), Err(Error::ShapleyCapacity(13, 12))));
    }

    #[test]
    fn vector_constructors_validate() {
        let g = GroundSet::new(vec![1, 2]).unwrap();
        assert!(RateVector::new(g.clone(), vec![int(1)]).is_err());
        assert!(WeightVector::new(g.clone(), vec![int(1), int(0)]).is_err());
        let mut map = BTreeMap::new();
        map.insert(1, int(1));
        map.insert(3, int(1));
        assert!(RateVector::from_map(g.clone(), &map).is_err());
        assert!(WeightVector::from_map(g, &map).is_err());
    }
}
