//! Shared fixtures for integration tests: the two reference bit pools,
//! a seeded random-instance generator, and a base-polyhedron sampler.

use std::collections::BTreeMap;

use num_traits::Zero;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

use fo_core::fairness::RateVector;
use fo_core::omniscience;
use fo_core::setfn::SetFunction;
use fo_core::source::{BitPoolSource, EntropyOracle};
use fo_core::{GroundSet, Rational, UserId};

pub fn pool(users: &[UserId], obs: &[(UserId, &[&str])]) -> EntropyOracle {
    let ground = GroundSet::new(users.to_vec()).unwrap();
    let map: BTreeMap<UserId, Vec<String>> = obs
        .iter()
        .map(|(u, labels)| (*u, labels.iter().map(|s| s.to_string()).collect()))
        .collect();
    EntropyOracle::from_bit_pool(BitPoolSource::new(ground, &map).unwrap())
}

/// Three users sharing six independent bits; minimum sum-rate 7/2.
pub fn three_user_pool() -> EntropyOracle {
    pool(
        &[1, 2, 3],
        &[
            (1, &["a", "b", "c", "d", "e"]),
            (2, &["a", "b", "f"]),
            (3, &["c", "d", "f"]),
        ],
    )
}

/// Four users sharing eight independent bits; minimum sum-rate 6 with
/// fundamental partition {{1,2,3},{4}}.
pub fn four_user_pool() -> EntropyOracle {
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

/// Draws a random bit pool with 2 to 6 users over at most 10 symbols,
/// redrawing the rare sources that need no communication at all (there the
/// only allocation is all-zero and fairness comparisons are vacuous).
pub fn random_pool(rng: &mut StdRng) -> EntropyOracle {
    for _ in 0..100 {
        let n: u32 = rng.gen_range(2..=6);
        let users: Vec<UserId> = (1..=n).collect();
        let symbols: usize = rng.gen_range(1..=10);
        let mut obs: BTreeMap<UserId, Vec<String>> = BTreeMap::new();
        for &user in &users {
            let labels: Vec<String> = (0..symbols)
                .filter(|_| rng.gen_bool(0.5))
                .map(|s| format!("s{s}"))
                .collect();
            obs.insert(user, labels);
        }
        let ground = GroundSet::new(users).unwrap();
        let oracle = EntropyOracle::from_bit_pool(BitPoolSource::new(ground, &obs).unwrap());
        let rate = omniscience::min_sum_rate(&oracle).expect("random bit pools always solve");
        if !rate.is_zero() {
            return oracle;
        }
    }
    panic!("could not draw an instance that requires communication");
}

/// Samples bases of the polyhedron: vertices from greedy runs over random
/// user orders, mixed by random rational convex combinations.
pub fn sample_bases(f_hat: &SetFunction, rng: &mut StdRng, count: usize) -> Vec<RateVector> {
    let ground = f_hat.ground().clone();
    let users: Vec<UserId> = ground.users().to_vec();
    let mut bases = Vec::with_capacity(count);
    while bases.len() < count {
        let mixture: usize = rng.gen_range(1..=3);
        let mut vertices = Vec::with_capacity(mixture);
        for _ in 0..mixture {
            let mut order = users.clone();
            order.shuffle(rng);
            vertices.push(fo_core::fairness::greedy_vertex(f_hat, &order).unwrap());
        }
        let coefficients: Vec<Rational> = (0..mixture)
            .map(|_| Rational::from_integer(rng.gen_range(1..=5).into()))
            .collect();
        let total: Rational = coefficients.iter().cloned().sum();
        let mut rates = vec![Rational::zero(); ground.len()];
        for (vertex, coefficient) in vertices.iter().zip(&coefficients) {
            for (slot, rate) in rates.iter_mut().zip(vertex.rates()) {
                *slot += coefficient * rate;
            }
        }
        for slot in &mut rates {
            *slot /= &total;
        }
        bases.push(RateVector::new(ground.clone(), rates).unwrap());
    }
    bases
}
