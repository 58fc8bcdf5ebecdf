//! Dilworth truncation of intersecting-submodular set functions.
//!
//! The truncation of `f` assigns to a nonempty `X` the cheapest way to cover
//! `X` by disjoint blocks:
//!
//! ```text
//! f̂(X) = min over partitions P of X of Σ_{C ∈ P} f(C),    f̂(∅) = 0.
//! ```
//!
//! For the dual sum-rate functions built in this crate, `f̂` is fully
//! submodular whenever the budget is achievable, which is what lets the
//! decomposition algorithm in [`crate::fairness`] run on it.
//!
//! [`truncate`] is the reference evaluation by straight partition
//! enumeration. [`truncate_via_sfm`] computes the same value with one
//! submodular minimization per element, the shape a polynomial-time
//! implementation takes; in debug builds it cross-checks itself against the
//! reference.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::ground::Subset;
use crate::rational::Rational;
use crate::setfn::{enumerate_partitions, SetFunction};
use crate::sfm;

/// Reference Dilworth truncation value at a nonempty `x`: minimizes the
/// block sum of `f` over every partition of `x`.
pub fn truncate(f: &SetFunction, x: Subset) -> Result<Rational> {
    f.ground().check_subset(x)?;
    if x.is_empty() {
        return Err(Error::EmptySubset);
    }
    let mut best: Option<Rational> = None;
    for partition in enumerate_partitions(x, 1)? {
        let total: Rational = partition.blocks().iter().map(|&block| f.value(block)).sum();
        if best.as_ref().is_none_or(|b| total < *b) {
            best = Some(total);
        }
    }
    Ok(best.expect("a nonempty subset has at least one partition"))
}

/// The truncation of `f` as a set function, with `f̂(∅) = 0`.
///
/// Values are computed on demand by [`truncate`] and memoized.
pub fn truncated_function(f: &SetFunction) -> SetFunction {
    let f = f.clone();
    SetFunction::new(f.ground().clone(), move |x| {
        if x.is_empty() {
            Rational::zero()
        } else {
            truncate(&f, x).expect("subset checked by the wrapper")
        }
    })
}

/// Dilworth truncation at `x` via incremental submodular minimization.
///
/// Members of `x` are absorbed one at a time while a partition of the
/// processed prefix is kept optimal. To absorb `u`, choose which existing
/// blocks merge with it by minimizing, over families `F` of current blocks,
///
/// ```text
/// β(F) = f(∪F ∪ {u}) − Σ_{B ∈ F} f(B)
/// ```
///
/// `β` lives on the lattice of block families, so each step is one
/// submodular minimization over at most `|x|` atoms and the whole
/// evaluation uses `O(|x|)` of them. Correctness requires `f` to be
/// intersecting submodular; debug builds verify the result against
/// [`truncate`].
pub fn truncate_via_sfm(f: &SetFunction, x: Subset) -> Result<Rational> {
    f.ground().check_subset(x)?;
    if x.is_empty() {
        return Err(Error::EmptySubset);
    }

    let mut blocks: Vec<Subset> = Vec::new();
    let mut value = Rational::zero();
    for u in x.positions() {
        if blocks.is_empty() {
            blocks.push(Subset::from_positions(&[u]));
            value = f.value(blocks[0]);
            continue;
        }
        // Synthetic ground: one atom per current block. Atom subsets map to
        // block families; user ids are block indices offset by one only to
        // satisfy the ground-set constructor.
        let atoms = crate::ground::GroundSet::new((1..=blocks.len() as u32).collect())?;
        let current: Vec<Subset> = blocks.clone();
        let inner = f.clone();
        let merge_cost = SetFunction::new(atoms, move |family: Subset| {
            let mut merged = Subset::from_positions(&[u]);
            let mut kept = Rational::zero();
            for index in family.positions() {
                merged = merged.union(current[index]);
                kept += inner.value(current[index]);
            }
            inner.value(merged) - kept
        });
        let best = sfm::minimize(&merge_cost)?;
        let mut merged = Subset::from_positions(&[u]);
        let mut survivors = Vec::with_capacity(blocks.len());
        for (index, block) in blocks.iter().enumerate() {
            if best.maximal_minimizer.contains(index) {
                merged = merged.union(*block);
            } else {
                survivors.push(*block);
            }
        }
        survivors.push(merged);
        survivors.sort_by_key(|block| block.mask().trailing_zeros());
        blocks = survivors;
        value += best.min_value;
    }

    #[cfg(debug_assertions)]
    {
        let reference = truncate(f, x)?;
        if reference != value {
            return Err(Error::Internal(format!(
                "incremental truncation {value} disagrees with partition enumeration {reference}"
            )));
        }
    }

    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ground::{GroundSet, UserId};
    use crate::rational::{int, rat};
    use crate::setfn::{co_function, dual, is_submodular};
    use crate::source::{BitPoolSource, EntropyOracle};
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

    fn four_user_pool() -> EntropyOracle {
        pool(
            &[1, 2, 3, 4],
            &[
                (1, &["c", "d", "f", "g", "h"]),
                (2, &["a", "d", "g", "h"]),
                (3, &["c", "d", "e", "f", "g", "h"]),
                (4, &["a", "b", "f"]),
            ],
        )
    }

    #[test]
    fn truncation_differs_from_dual_only_where_splitting_pays() {
        let oracle = three_user_pool();
        let g = oracle.ground().clone();
        let fd = dual(&co_function(&oracle, int(4)).unwrap());
        // Splitting {2,3} into singletons costs 1 + 1 < 3.
        assert_eq!(
            truncate(&fd, g.subset_of(&[2, 3]).unwrap()).unwrap(),
            int(2)
        );
        let unchanged: Vec<(Vec<UserId>, i64)> = vec![
            (vec![1], 3),
            (vec![2], 1),
            (vec![3], 1),
            (vec![1, 2], 4),
            (vec![1, 3], 4),
            (vec![1, 2, 3], 4),
        ];
        for (users, value) in unchanged {
            let x = g.subset_of(&users).unwrap();
            assert_eq!(truncate(&fd, x).unwrap(), int(value));
            assert_eq!(fd.value(x), int(value));
        }
    }

    #[test]
    fn truncated_function_wraps_the_empty_set() {
        let oracle = three_user_pool();
        let fd = dual(&co_function(&oracle, int(4)).unwrap());
        let truncated = truncated_function(&fd);
        assert_eq!(truncated.value(Subset::EMPTY), int(0));
        assert_eq!(
            truncated.value(oracle.ground().subset_of(&[2, 3]).unwrap()),
            int(2)
        );
        assert!(matches!(
            truncate(&fd, Subset::EMPTY),
            Err(Error::EmptySubset)
        ));
    }

    #[test]
    fn truncation_never_exceeds_the_function() {
        let oracle = four_user_pool();
        let fd = dual(&co_function(&oracle, int(6)).unwrap());
        let truncated = truncated_function(&fd);
        for x in oracle.ground().subsets().skip(1) {
            assert!(truncated.value(x) <= fd.value(x));
        }
    }

    #[test]
    fn achievable_budget_yields_a_submodular_truncation() {
        let oracle = three_user_pool();
        let fd = dual(&co_function(&oracle, int(4)).unwrap());
        assert!(is_submodular(&truncated_function(&fd)).holds);
        let fd6 = dual(&co_function(&four_user_pool(), int(6)).unwrap());
        assert!(is_submodular(&truncated_function(&fd6)).holds);
    }

    #[test]
    fn incremental_matches_reference_on_the_running_examples() {
        let oracle = three_user_pool();
        let fd = dual(&co_function(&oracle, int(4)).unwrap());
        for x in oracle.ground().subsets().skip(1) {
            assert_eq!(truncate_via_sfm(&fd, x).unwrap(), truncate(&fd, x).unwrap());
        }
        let big = four_user_pool();
        let fd6 = dual(&co_function(&big, int(6)).unwrap());
        assert_eq!(truncate_via_sfm(&fd6, big.ground().full()).unwrap(), int(6));
        for x in big.ground().subsets().skip(1) {
            assert_eq!(
                truncate_via_sfm(&fd6, x).unwrap(),
                truncate(&fd6, x).unwrap()
            );
        }
    }

    #[test]
    fn incremental_matches_reference_on_random_pools() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(23);
        let labels = ["a", "b", "c", "d", "e", "f", "g", "h"];
        for _ in 0..30 {
            let n = rng.gen_range(2..=5);
            let users: Vec<UserId> = (1..=n).collect();
            let obs: Vec<(UserId, Vec<String>)> = users
                .iter()
                .map(|&u| {
                    let set: Vec<String> = labels
                        .iter()
                        .filter(|_| rng.gen_bool(0.5))
                        .map(|s| s.to_string())
                        .collect();
                    (u, set)
                })
                .collect();
            let map: BTreeMap<UserId, Vec<String>> = obs.into_iter().collect();
            let ground = GroundSet::new(users).unwrap();
            let oracle =
                EntropyOracle::from_bit_pool(BitPoolSource::new(ground.clone(), &map).unwrap());
            let total = oracle.entropy(ground.full()).unwrap();
            // The dual of a sum-rate function is intersecting submodular for
            // every nonnegative budget, which is all the scheme needs.
            let alpha = total * rat(rng.gen_range(1..=5), 4);
            let fd = dual(&co_function(&oracle, alpha).unwrap());
            for x in ground.subsets().skip(1) {
                assert_eq!(truncate_via_sfm(&fd, x).unwrap(), truncate(&fd, x).unwrap());
            }
        }
    }
}
