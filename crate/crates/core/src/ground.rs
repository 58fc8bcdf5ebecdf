//! Ground sets of users and bitmask subsets.
//!
//! A [`GroundSet`] is the ordered list of user ids an instance is defined
//! over. Subsets are represented as bitmasks over positions in that list,
//! which keeps subset algebra cheap and makes exhaustive enumeration over all
//! `2^|V|` subsets a simple counter loop. The size cap of [`MAX_USERS`] keeps
//! every mask inside a `u32`.

use crate::error::{Error, Result};

/// Identifier of a user (terminal) in an instance.
pub type UserId = u32;

/// Hard cap on ground set size; masks must fit in a `u32`.
pub const MAX_USERS: usize = 20;

/// Ordered set of distinct user ids.
///
/// Users are kept sorted ascending, so position `p` refers to the `p`-th
/// smallest id. Sub-problems (for example a block of a partition) get their
/// own `GroundSet` that preserves the original ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundSet {
    users: Vec<UserId>,
}

impl GroundSet {
    /// Creates a ground set from a list of distinct user ids.
    pub fn new(mut users: Vec<UserId>) -> Result<Self> {
        if users.is_empty() || users.len() > MAX_USERS {
            return Err(Error::GroundSize(users.len()));
        }
        users.sort_unstable();
        for pair in users.windows(2) {
            if pair[0] == pair[1] {
                return Err(Error::DuplicateUser(pair[0]));
            }
        }
        Ok(GroundSet { users })
    }

    /// Number of users.
    pub fn len(&self) -> usize {
        self.users.len()
    }

    /// True when the ground set has no users; never holds for a constructed value.
    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }

    /// User ids in ascending order.
    pub fn users(&self) -> &[UserId] {
        &self.users
    }

    /// The subset containing every user.
    pub fn full(&self) -> Subset {
        Subset::full(self.len())
    }

    /// Position of `user` in this ground set.
    pub fn position(&self, user: UserId) -> Result<usize> {
        self.users
            .binary_search(&user)
            .map_err(|_| Error::UnknownUser(user))
    }

    /// User id stored at `position`.
    pub fn user_at(&self, position: usize) -> UserId {
        self.users[position]
    }

    /// Builds the subset holding exactly the given users.
    pub fn subset_of(&self, users: &[UserId]) -> Result<Subset> {
        let mut mask = 0u32;
        for &user in users {
            mask |= 1 << self.position(user)?;
        }
        Ok(Subset(mask))
    }

    /// Builds the singleton subset `{user}`.
    pub fn singleton(&self, user: UserId) -> Result<Subset> {
        Ok(Subset(1 << self.position(user)?))
    }

    /// User ids of `subset` in ascending order.
    pub fn users_in(&self, subset: Subset) -> Vec<UserId> {
        subset.positions().map(|p| self.users[p]).collect()
    }

    /// True when `subset` only uses positions of this ground set.
    pub fn contains_subset(&self, subset: Subset) -> bool {
        subset.is_subset_of(self.full())
    }

    /// Checks membership, reporting a domain error otherwise.
    pub fn check_subset(&self, subset: Subset) -> Result<()> {
        if self.contains_subset(subset) {
            Ok(())
        } else {
            Err(Error::SubsetOutOfRange)
        }
    }

    /// All subsets in ascending mask order, from the empty set to the full set.
    pub fn subsets(&self) -> impl Iterator<Item = Subset> {
        (0..=self.full().mask()).map(Subset)
    }

    /// Complement of `subset` within this ground set.
    pub fn complement(&self, subset: Subset) -> Subset {
        self.full().difference(subset)
    }
}

/// Subset of a ground set, encoded as a bitmask over positions.
#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subset(u32);

impl Subset {
    /// The empty subset.
    pub const EMPTY: Subset = Subset(0);

    /// Subset holding the first `n` positions.
    pub fn full(n: usize) -> Subset {
        debug_assert!(n <= MAX_USERS);
        Subset(if n == 0 { 0 } else { (1u32 << n) - 1 })
    }

    /// Wraps a raw mask.
    pub fn from_mask(mask: u32) -> Subset {
        Subset(mask)
    }

    /// Subset holding the given positions.
    pub fn from_positions(positions: &[usize]) -> Subset {
        let mut mask = 0;
        for &p in positions {
            debug_assert!(p < MAX_USERS);
            mask |= 1 << p;
        }
        Subset(mask)
    }

    /// Raw mask value.
    pub fn mask(self) -> u32 {
        self.0
    }

    /// Number of members.
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// True when no position is set.
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// True when `position` is a member.
    pub fn contains(self, position: usize) -> bool {
        self.0 & (1 << position) != 0
    }

    /// Set union.
    pub fn union(self, other: Subset) -> Subset {
        Subset(self.0 | other.0)
    }

    /// Set intersection.
    pub fn intersection(self, other: Subset) -> Subset {
        Subset(self.0 & other.0)
    }

    /// Members of `self` not in `other`.
    pub fn difference(self, other: Subset) -> Subset {
        Subset(self.0 & !other.0)
    }

    /// Subset with `position` added.
    pub fn with(self, position: usize) -> Subset {
        Subset(self.0 | (1 << position))
    }

    /// True when every member of `self` is a member of `other`.
    pub fn is_subset_of(self, other: Subset) -> bool {
        self.0 & !other.0 == 0
    }

    /// True when `self` is a subset of `other` and not equal to it.
    pub fn is_proper_subset_of(self, other: Subset) -> bool {
        self.is_subset_of(other) && self != other
    }

    /// True when the two subsets share no member.
    pub fn is_disjoint(self, other: Subset) -> bool {
        self.0 & other.0 == 0
    }

    /// Member positions in ascending order.
    pub fn positions(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let p = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(p)
            }
        })
    }
}

impl std::fmt::Debug for Subset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{")?;
        for (i, p) in self.positions().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "}}")
    }
}
