//! Exact solver for communication for omniscience: a group of users, each
//! observing part of a correlated multi-source, exchanges broadcast
//! messages until everyone can reconstruct the whole source.
//!
//! The crate answers three questions about such a system, all in exact
//! rational arithmetic:
//!
//! * **How much communication is unavoidable?** [`omniscience::solve`]
//!   computes the minimum sum-rate by maximizing over partitions of the
//!   user set, along with the fundamental partition that attains it and
//!   the rate quota of each of its blocks.
//! * **How should the load be split?** [`fairness::lex_optimal_base`]
//!   finds the lexicographically optimal (fairest) rate vector of a given
//!   total budget by recursive decomposition over the base polyhedron of
//!   the truncated dual function, and
//!   [`fairness::lex_optimal_min_sum_rate`] does the same at the minimum
//!   budget by solving each block of the fundamental partition
//!   independently and merging. [`fairness::shapley`] gives the classical
//!   cooperative-game alternative for comparison.
//! * **Is a proposed vector any good?** Membership, tight-set, dependence
//!   and exchange-optimality checks certify rate vectors produced
//!   elsewhere.
//!
//! Sources are described either as bit pools (each user holds a set of
//! labeled independent uniform bits) or as explicit entropy tables; see
//! [`instance`] for the JSON file format. Everything enumerates subsets
//! of the ground set, so instances are capped at [`MAX_USERS`] users and
//! the intended scale is ten-or-so users, where exact answers come back
//! in well under a second.

pub mod dilworth;
pub mod error;
pub mod fairness;
pub mod ground;
pub mod instance;
pub mod omniscience;
pub mod rational;
pub mod setfn;
pub mod sfm;
pub mod source;

pub use error::{Error, Result};
pub use ground::{GroundSet, Subset, UserId, MAX_USERS};
pub use rational::{format_rational, parse_rational, Rational};
