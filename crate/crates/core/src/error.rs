//! Crate-wide error type.

use thiserror::Error;

use crate::rational::Rational;
use crate::MAX_USERS;

/// Errors reported by the library.
///
/// Domain violations (bad subsets, mismatched ground sets, out-of-range
/// parameters) are distinguished from internal consistency failures, which
/// indicate a broken invariant rather than bad input.
#[derive(Debug, Error)]
pub enum Error {
    #[error("ground set must contain between 1 and {MAX_USERS} users, got {0}")]
    GroundSize(usize),

    #[error("duplicate user id {0} in ground set")]
    DuplicateUser(u32),

    #[error("user {0} is not a member of the ground set")]
    UnknownUser(u32),

    #[error("subset contains positions outside the ground set")]
    SubsetOutOfRange,

    #[error("ground sets do not match")]
    GroundMismatch,

    #[error("expected a permutation of the ground set")]
    NotAPermutation,

    #[error("operation requires a nonempty subset")]
    EmptySubset,

    #[error("at least 2 users are required, got {0}")]
    TooFewUsers(usize),

    #[error("total sum-rate must be nonnegative, got {0}")]
    NegativeAlpha(Box<Rational>),

    #[error("weight for user {0} must be strictly positive")]
    NonPositiveWeight(u32),

    #[error("rate vector must not be identically zero")]
    ZeroRates,

    #[error("rate vector is not in the polyhedron")]
    NotInPolyhedron,

    #[error("rate vector is not a base of the polyhedron")]
    NotABase,

    #[error("unknown minimization solver '{0}'")]
    UnknownSolver(String),

    #[error("minimizer family is not closed under union; function is not submodular")]
    NonLatticeMinimizers,

    #[error("decomposition step produced a minimizer outside the current interval")]
    NonNestedMinimizer,

    #[error(
        "fundamental partition is ambiguous: distinct maximizers share the largest block count"
    )]
    AmbiguousFundamentalPartition,

    #[error("block is not a member of the fundamental partition")]
    BlockNotInPartition,

    #[error("exact Shapley summation is capped at {1} users, got {0}")]
    ShapleyCapacity(usize, usize),

    #[error("sum-rate {alpha} is infeasible: minimum sum-rate is {min_sum_rate}")]
    InfeasibleSumRate {
        alpha: Box<Rational>,
        min_sum_rate: Box<Rational>,
    },

    #[error("invalid rational literal '{0}'")]
    InvalidRational(String),

    #[error("instance error: {0}")]
    Instance(String),

    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T, E = Error> = std::result::Result<T, E>;
