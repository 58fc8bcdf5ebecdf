//! Instance files: JSON descriptions of a multi-source system.
//!
//! Two models are supported, selected by the `"model"` field:
//!
//! ```json
//! {
//!   "model": "bit-pool",
//!   "users": [1, 2, 3],
//!   "observations": {
//!     "1": ["a", "b", "c", "d", "e"],
//!     "2": ["a", "b", "f"],
//!     "3": ["c", "d", "f"]
//!   }
//! }
//! ```
//!
//! Each label names an independent uniform bit; a user missing from
//! `observations` observes nothing. The alternative gives entropies
//! directly:
//!
//! ```json
//! {
//!   "model": "entropy-table",
//!   "users": [1, 2],
//!   "entries": [
//!     {"subset": [1], "value": 1},
//!     {"subset": [2], "value": "3/2"},
//!     {"subset": [1, 2], "value": "3/2"}
//!   ]
//! }
//! ```
//!
//! Every nonempty subset needs exactly one entry (the empty set defaults to
//! 0). Values are exact rationals, written as integers or `"p/q"` strings;
//! floating-point numbers are rejected rather than approximated. A table
//! must be a polymatroid rank function (normalized, monotone, submodular);
//! violations are reported at load time, since the solvers are only
//! meaningful on entropic inputs.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer};

use crate::error::{Error, Result};
use crate::ground::{GroundSet, Subset, UserId};
use crate::rational::{format_rational, parse_rational, Rational};
use crate::source::{
    validate_polymatroid, BitPoolSource, EntropyOracle, ExplicitEntropyTable, PolymatroidViolation,
};

#[derive(Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
enum InstanceSpec {
    BitPool {
        users: Vec<UserId>,
        #[serde(default)]
        observations: BTreeMap<String, Vec<String>>,
    },
    EntropyTable {
        users: Vec<UserId>,
        entries: Vec<TableEntry>,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TableEntry {
    subset: Vec<UserId>,
    #[serde(deserialize_with = "deserialize_rational")]
    value: Rational,
}

/// Deserializes an exact rational from a JSON integer or a `"p/q"` string.
fn deserialize_rational<'de, D>(deserializer: D) -> std::result::Result<Rational, D::Error>
where
    D: Deserializer<'de>,
{
    struct RationalVisitor;

    impl serde::de::Visitor<'_> for RationalVisitor {
        type Value = Rational;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            write!(f, "an integer or a rational string like \"7/2\"")
        }

        fn visit_i64<E: serde::de::Error>(self, v: i64) -> std::result::Result<Rational, E> {
            Ok(Rational::from_integer(v.into()))
        }

        fn visit_u64<E: serde::de::Error>(self, v: u64) -> std::result::Result<Rational, E> {
            Ok(Rational::from_integer(v.into()))
        }

        fn visit_f64<E: serde::de::Error>(self, _: f64) -> std::result::Result<Rational, E> {
            Err(E::custom(
                "floating-point values are not accepted; write the exact rational as a string",
            ))
        }

        fn visit_str<E: serde::de::Error>(self, s: &str) -> std::result::Result<Rational, E> {
            parse_rational(s).map_err(E::custom)
        }
    }

    deserializer.deserialize_any(RationalVisitor)
}

/// Parses an instance document into an entropy oracle.
///
/// Syntax errors carry the line and column reported by the JSON parser;
/// semantic errors (unknown users, missing table entries, polymatroid
/// violations) name the offending user or subset.
pub fn parse_instance(json: &str) -> Result<EntropyOracle> {
    let spec: InstanceSpec = serde_json::from_str(json)
        .map_err(|e| Error::Instance(format!("invalid instance: {e}")))?;
    match spec {
        InstanceSpec::BitPool {
            users,
            observations,
        } => {
            let ground = GroundSet::new(users)?;
            let mut by_user: BTreeMap<UserId, Vec<String>> = BTreeMap::new();
            for (key, labels) in observations {
                let user: UserId = key.parse().map_err(|_| {
                    Error::Instance(format!("observation key {key:?} is not a user id"))
                })?;
                if by_user.insert(user, labels).is_some() {
                    return Err(Error::Instance(format!(
                        "user {user} has more than one observation list"
                    )));
                }
            }
            let source = BitPoolSource::new(ground, &by_user)?;
            Ok(EntropyOracle::from_bit_pool(source))
        }
        InstanceSpec::EntropyTable { users, entries } => {
            let ground = GroundSet::new(users)?;
            let entries: Vec<(Vec<UserId>, Rational)> = entries
                .into_iter()
                .map(|entry| (entry.subset, entry.value))
                .collect();
            let table = ExplicitEntropyTable::from_entries(ground, &entries)?;
            let report = validate_polymatroid(&table);
            if let Some(first) = report.violations.first() {
                return Err(Error::Instance(format!(
                    "entropy table is not a valid polymatroid: {} ({} violation{} in total)",
                    describe_violation(table.ground(), first),
                    report.violations.len(),
                    if report.violations.len() == 1 {
                        ""
                    } else {
                        "s"
                    },
                )));
            }
            Ok(EntropyOracle::from_table(table))
        }
    }
}

/// Parses a JSON object mapping user ids to exact rationals, e.g.
/// `{"1": "5/2", "2": 1}`. Used for rate vectors supplied in files.
pub fn parse_user_rational_map(json: &str) -> Result<BTreeMap<UserId, Rational>> {
    #[derive(Deserialize)]
    struct Value(#[serde(deserialize_with = "deserialize_rational")] Rational);

    let raw: BTreeMap<String, Value> = serde_json::from_str(json)
        .map_err(|e| Error::Instance(format!("invalid rate map: {e}")))?;
    let mut map = BTreeMap::new();
    for (key, Value(value)) in raw {
        let user: UserId = key
            .parse()
            .map_err(|_| Error::Instance(format!("key {key:?} is not a user id")))?;
        if map.insert(user, value).is_some() {
            return Err(Error::Instance(format!(
                "user {user} appears more than once"
            )));
        }
    }
    Ok(map)
}

fn user_set(ground: &GroundSet, subset: Subset) -> String {
    let users: Vec<String> = ground
        .users_in(subset)
        .iter()
        .map(|u| u.to_string())
        .collect();
    format!("{{{}}}", users.join(", "))
}

fn describe_violation(ground: &GroundSet, violation: &PolymatroidViolation) -> String {
    match violation {
        PolymatroidViolation::Normalization { value } => format!(
            "the empty set has entropy {} instead of 0",
            format_rational(value)
        ),
        PolymatroidViolation::Monotonicity { smaller, larger } => format!(
            "entropy decreases from {} to {}",
            user_set(ground, *smaller),
            user_set(ground, *larger)
        ),
        PolymatroidViolation::Submodularity { x, y } => format!(
            "submodularity fails on {} and {}",
            user_set(ground, *x),
            user_set(ground, *y)
        ),
    }
}
