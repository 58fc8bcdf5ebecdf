//! Submodular function minimization with maximal minimizers.
//!
//! The decomposition algorithm in [`crate::fairness`] needs, at every step,
//! the *maximal* minimizer of a submodular function. For a submodular
//! function the minimizers are closed under union and intersection, so the
//! maximal minimizer is the union of all minimizers and is itself a
//! minimizer. The reference engine checks that property instead of assuming
//! it, which turns accidental non-submodular inputs into a clean error
//! instead of a silently wrong answer.
//!
//! The engine interface is deliberately small so a polynomial-time solver
//! can be swapped in later; the reference implementation scans all `2^|V|`
//! subsets, which is exact and fast for the instance sizes this crate
//! targets.

use crate::error::{Error, Result};
use crate::ground::Subset;
use crate::rational::Rational;
use crate::setfn::SetFunction;

/// Result of minimizing a set function over all subsets of its ground set.
#[derive(Clone, Debug)]
pub struct SfmResult {
    /// The minimum value.
    pub min_value: Rational,
    /// Union of all minimizers; verified to be a minimizer itself.
    pub maximal_minimizer: Subset,
    /// Every minimizer in ascending mask order. Only the reference solver
    /// reports this; engines that do not enumerate leave it `None`.
    pub all_minimizers: Option<Vec<Subset>>,
}

/// A minimization engine returning the minimum value and the maximal
/// minimizer.
pub trait SfmSolver: Send + Sync {
    /// Stable name used to select the solver.
    fn name(&self) -> &'static str;

    /// Minimizes `g` over all subsets of its ground set.
    fn minimize(&self, g: &SetFunction) -> Result<SfmResult>;
}

/// Reference solver: exhaustive scan over all subsets.
pub struct BruteForceSolver;

impl SfmSolver for BruteForceSolver {
    fn name(&self) -> &'static str {
        "brute-force"
    }

    fn minimize(&self, g: &SetFunction) -> Result<SfmResult> {
        let ground = g.ground();
        let mut min_value = g.value(Subset::EMPTY);
        let mut minimizers = vec![Subset::EMPTY];
        for x in ground.subsets().skip(1) {
            let value = g.value(x);
            if value < min_value {
                min_value = value;
                minimizers.clear();
                minimizers.push(x);
            } else if value == min_value {
                minimizers.push(x);
            }
        }
        let union = minimizers
            .iter()
            .fold(Subset::EMPTY, |acc, x| acc.union(*x));
        // For a submodular g the union of minimizers is a minimizer; if it
        // is not, the minimizer family is not a lattice and g was not
        // submodular.
        if g.value(union) != min_value {
            return Err(Error::NonLatticeMinimizers);
        }
        Ok(SfmResult {
            min_value,
            maximal_minimizer: union,
            all_minimizers: Some(minimizers),
        })
    }
}

/// The registered solvers.
static SOLVERS: &[&dyn SfmSolver] = &[&BruteForceSolver];

/// Looks up a solver by name.
pub fn solver_by_name(name: &str) -> Result<&'static dyn SfmSolver> {
    SOLVERS
        .iter()
        .copied()
        .find(|solver| solver.name() == name)
        .ok_or_else(|| Error::UnknownSolver(name.to_string()))
}

/// Minimizes `g` with the reference solver.
pub fn minimize(g: &SetFunction) -> Result<SfmResult> {
    BruteForceSolver.minimize(g)
}

/// Minimizes `g` with the named solver.
pub fn minimize_with_solver(g: &SetFunction, solver: &str) -> Result<SfmResult> {
    solver_by_name(solver)?.minimize(g)
}
