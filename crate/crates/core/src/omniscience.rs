//! Minimum sum-rate and the fundamental partition.
//!
//! For a source over users `V`, omniscience is reached when every user
//! recovers the whole joint observation from the broadcasts. The smallest
//! total broadcast rate is
//!
//! ```text
//! R(V) = max over partitions P of V, |P| ≥ 2, of
//!        Σ_{C ∈ P} H(Z_{V∖C} | Z_C) / (|P| − 1)
//! ```
//!
//! and a finest maximizing partition is the *fundamental partition*: its
//! blocks are the user groups that should cooperate as single units. The
//! maximizer with the most blocks is selected deterministically; if two
//! distinct partitions tie at the maximum value *and* the largest block
//! count, the instance is reported as ambiguous rather than resolved by an
//! arbitrary preference.

use crate::dilworth;
use crate::error::{Error, Result};
use crate::ground::Subset;
use crate::rational::Rational;
use crate::setfn::{co_function, dual, enumerate_partitions, Partition, SetFunction};
use crate::source::EntropyOracle;

/// Minimum sum-rate together with the fundamental partition and the exact
/// amount each block must contribute.
#[derive(Clone, Debug)]
pub struct OmniscienceSolution {
    /// The minimum total broadcast rate for omniscience.
    pub min_sum_rate: Rational,
    /// The finest partition attaining the maximum in the rate bound.
    pub fundamental_partition: Partition,
    /// Contribution of each block, aligned with
    /// `fundamental_partition.blocks()`; sums to `min_sum_rate`.
    pub block_quotas: Vec<Rational>,
}

impl OmniscienceSolution {
    /// Quota of the given block.
    pub fn quota_for(&self, block: Subset) -> Option<&Rational> {
        self.fundamental_partition
            .blocks()
            .iter()
            .position(|&b| b == block)
            .map(|i| &self.block_quotas[i])
    }
}

/// Evaluates the rate bound for one partition: the total information missing
/// across blocks, amortized over `|P| − 1` rounds.
fn partition_rate(oracle: &EntropyOracle, partition: &Partition) -> Rational {
    let ground = oracle.ground();
    let total = oracle.entropy_in(ground.full());
    let missing: Rational = partition
        .blocks()
        .iter()
        // H(Z_{V∖C} | Z_C) = H(Z_V) − H(Z_C).
        .map(|&block| total.clone() - oracle.entropy_in(block))
        .sum();
    missing / Rational::from_integer(((partition.len() - 1) as i64).into())
}

fn best_partition(oracle: &EntropyOracle) -> Result<(Rational, Partition)> {
    let ground = oracle.ground();
    if ground.len() < 2 {
        return Err(Error::TooFewUsers(ground.len()));
    }
    let mut best_value: Option<Rational> = None;
    let mut best: Vec<Partition> = Vec::new();
    for partition in enumerate_partitions(ground.full(), 2)? {
        let value = partition_rate(oracle, &partition);
        match best_value.as_ref() {
            Some(current) if value < *current => {}
            Some(current) if value == *current => match partition.len().cmp(&best[0].len()) {
                std::cmp::Ordering::Greater => best = vec![partition],
                std::cmp::Ordering::Equal => best.push(partition),
                std::cmp::Ordering::Less => {}
            },
            _ => {
                best_value = Some(value);
                best = vec![partition];
            }
        }
    }
    let value = best_value.expect("a ground of two or more users has a proper partition");
    if best.len() > 1 {
        return Err(Error::AmbiguousFundamentalPartition);
    }
    Ok((value, best.remove(0)))
}

/// The minimum sum-rate for omniscience.
pub fn min_sum_rate(oracle: &EntropyOracle) -> Result<Rational> {
    best_partition(oracle).map(|(value, _)| value)
}

/// The finest partition attaining the minimum sum-rate.
pub fn fundamental_partition(oracle: &EntropyOracle) -> Result<Partition> {
    best_partition(oracle).map(|(_, partition)| partition)
}

/// True when a total budget of `alpha` suffices for omniscience.
pub fn is_achievable(oracle: &EntropyOracle, alpha: &Rational) -> Result<bool> {
    Ok(*alpha >= min_sum_rate(oracle)?)
}

/// Solves the instance: minimum sum-rate, fundamental partition, and the
/// per-block quotas read off the truncated dual at the minimum budget.
pub fn solve(oracle: &EntropyOracle) -> Result<OmniscienceSolution> {
    let (rate, partition) = best_partition(oracle)?;
    let truncated = truncated_dual(oracle, rate.clone())?;
    let block_quotas: Vec<Rational> = partition
        .blocks()
        .iter()
        .map(|&block| truncated.value(block))
        .collect();
    let total: Rational = block_quotas.iter().cloned().sum();
    if total != rate {
        return Err(Error::Internal(format!(
            "block quotas sum to {total}, expected the minimum sum-rate {rate}"
        )));
    }
    Ok(OmniscienceSolution {
        min_sum_rate: rate,
        fundamental_partition: partition,
        block_quotas,
    })
}

/// The truncated dual sum-rate function at budget `alpha`, the object every
/// rate allocation in [`crate::fairness`] is built on.
pub fn truncated_dual(oracle: &EntropyOracle, alpha: Rational) -> Result<SetFunction> {
    Ok(dilworth::truncated_function(&dual(&co_function(
        oracle, alpha,
    )?)))
}

/// Restriction of the truncated dual at the minimum budget to one block of
/// the fundamental partition, over the block's own ground set.
///
/// The restriction stays submodular and its value on the whole block is the
/// block quota, which is at least the block's own minimum sum-rate whenever
/// the block has two or more users.
pub fn block_function(oracle: &EntropyOracle, block: Subset) -> Result<SetFunction> {
    let solution = solve(oracle)?;
    if !solution.fundamental_partition.blocks().contains(&block) {
        return Err(Error::BlockNotInPartition);
    }
    let truncated = truncated_dual(oracle, solution.min_sum_rate.clone())?;
    let restricted = truncated.restrict_to(block)?;
    #[cfg(debug_assertions)]
    if block.len() >= 2 {
        let inner = min_sum_rate(&oracle.restrict(block)?)?;
        let quota = restricted.value(restricted.ground().full());
        if quota < inner {
            return Err(Error::Internal(format!(
                "block quota {quota} is below the block's own minimum sum-rate {inner}"
            )));
        }
    }
    Ok(restricted)
}
