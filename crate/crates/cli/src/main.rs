//! `fo`: exact rate calculator for omniscience problems.
//!
//! Reads a JSON instance describing what each user observes, then answers
//! rate questions about the broadcast exchange that lets every user
//! reconstruct the full source: the minimum total rate, the fairest split
//! of any feasible budget, the Shapley value for comparison, and
//! certification of externally supplied rate vectors. All arithmetic is
//! exact; every number in the output is a rational in lowest terms.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use fo_core::fairness::{self, Certificate, Chain, RateVector, WeightVector};
use fo_core::omniscience::{self, OmniscienceSolution};
use fo_core::source::EntropyOracle;
use fo_core::{
    format_rational, parse_rational, Error, GroundSet, Rational, Result, Subset, UserId,
};

#[derive(Parser)]
#[command(
    name = "fo",
    version,
    about = "Exact omniscience rates: minimum sum-rate, fair allocation, Shapley value",
    after_help = "Without a command, runs the full pipeline and emits one JSON document."
)]
struct Cli {
    /// Path to the JSON instance file.
    #[arg(long, global = true, value_name = "PATH")]
    instance: Option<PathBuf>,

    /// Sum-rate budget as an exact rational ("4", "7/2"). Must be at least
    /// the minimum sum-rate; defaults to the minimum.
    #[arg(long, global = true, value_name = "P/Q")]
    alpha: Option<String>,

    /// Per-user weights like "1=4,2=2,3=1" (default: uniform).
    #[arg(long, global = true, value_name = "LIST")]
    weights: Option<String>,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Solve partition blocks sequentially instead of in parallel.
    #[arg(long, global = true)]
    no_parallel: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Minimum sum-rate, fundamental partition, and block quotas.
    MinSumRate,
    /// Fairest rate allocation: per-block at the minimum sum-rate, or a
    /// single run over the whole ground set when --alpha is given.
    FairRates,
    /// Shapley value of the budgeted rate polyhedron.
    Shapley,
    /// Certify a supplied rate vector: membership, tight sets, dependence
    /// sets, and the exchange-optimality verdict.
    Check {
        /// Inline rates like "1=5/2,2=1/2,3=1/2".
        #[arg(long, value_name = "LIST", conflicts_with = "rates_file")]
        rates: Option<String>,
        /// JSON file mapping user ids to rates, e.g. {"1": "5/2", "2": 1}.
        #[arg(long, value_name = "PATH")]
        rates_file: Option<PathBuf>,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Usage problems are input errors; --help and --version are not.
            let code = if err.use_stderr() { 3 } else { 0 };
            let _ = err.print();
            process::exit(code);
        }
    };
    match run(&cli) {
        Ok(output) => println!("{output}"),
        Err(err) => {
            eprintln!("error: {err}");
            process::exit(exit_code(&err));
        }
    }
}

/// 0 success, 2 infeasible budget, 3 bad input, 4 capacity or ambiguity.
fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InfeasibleSumRate { .. } => 2,
        Error::Instance(_)
        | Error::InvalidRational(_)
        | Error::UnknownUser(_)
        | Error::DuplicateUser(_)
        | Error::GroundMismatch
        | Error::NegativeAlpha(_)
        | Error::NonPositiveWeight(_)
        | Error::SubsetOutOfRange
        | Error::EmptySubset
        | Error::NotAPermutation
        | Error::ZeroRates
        | Error::NotInPolyhedron
        | Error::NotABase => 3,
        Error::GroundSize(_)
        | Error::TooFewUsers(_)
        | Error::ShapleyCapacity(..)
        | Error::AmbiguousFundamentalPartition => 4,
        _ => 1,
    }
}

fn run(cli: &Cli) -> Result<String> {
    let path = cli
        .instance
        .as_ref()
        .ok_or_else(|| Error::Instance("missing required --instance <PATH>".into()))?;
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Instance(format!("cannot read {}: {e}", path.display())))?;
    let oracle = fo_core::instance::parse_instance(&text)?;
    let ground = oracle.ground().clone();
    let weights = match &cli.weights {
        Some(list) => WeightVector::from_map(ground.clone(), &parse_pair_list(list)?)?,
        None => WeightVector::uniform(ground.clone()),
    };
    let alpha = match &cli.alpha {
        Some(text) => Some(parse_rational(text)?),
        None => None,
    };
    match &cli.command {
        None => pipeline(cli, &oracle, &weights, alpha),
        Some(Command::MinSumRate) => cmd_min_sum_rate(cli, &oracle),
        Some(Command::FairRates) => cmd_fair_rates(cli, &oracle, &weights, alpha),
        Some(Command::Shapley) => cmd_shapley(cli, &oracle, alpha),
        Some(Command::Check { rates, rates_file }) => {
            let map = match (rates, rates_file) {
                (Some(list), None) => parse_pair_list(list)?,
                (None, Some(path)) => {
                    let text = fs::read_to_string(path).map_err(|e| {
                        Error::Instance(format!("cannot read {}: {e}", path.display()))
                    })?;
                    fo_core::instance::parse_user_rational_map(&text)?
                }
                (None, None) => {
                    return Err(Error::Instance(
                        "check requires --rates or --rates-file".into(),
                    ))
                }
                (Some(_), Some(_)) => unreachable!("clap rejects conflicting flags"),
            };
            let r = RateVector::from_map(ground.clone(), &map)?;
            cmd_check(cli, &oracle, &weights, alpha, &r)
        }
    }
}

/// Checks a requested budget against the minimum and returns the budget to
/// run at, plus whether it was explicit.
fn resolve_budget(
    solution: &OmniscienceSolution,
    alpha: Option<Rational>,
) -> Result<(Rational, bool)> {
    match alpha {
        Some(alpha) => {
            if alpha < solution.min_sum_rate {
                return Err(Error::InfeasibleSumRate {
                    alpha: Box::new(alpha),
                    min_sum_rate: Box::new(solution.min_sum_rate.clone()),
                });
            }
            Ok((alpha, true))
        }
        None => Ok((solution.min_sum_rate.clone(), false)),
    }
}

fn cmd_min_sum_rate(cli: &Cli, oracle: &EntropyOracle) -> Result<String> {
    let solution = omniscience::solve(oracle)?;
    if cli.format == Format::Json {
        let mut doc = Map::new();
        push_solution(&mut doc, oracle.ground(), &solution);
        return Ok(pretty(doc));
    }
    let mut out = String::new();
    text_solution(&mut out, oracle.ground(), &solution);
    Ok(out.trim_end().to_string())
}

fn cmd_fair_rates(
    cli: &Cli,
    oracle: &EntropyOracle,
    weights: &WeightVector,
    alpha: Option<Rational>,
) -> Result<String> {
    let solution = omniscience::solve(oracle)?;
    let (budget, explicit) = resolve_budget(&solution, alpha)?;
    let f_hat = omniscience::truncated_dual(oracle, budget.clone())?;

    // An explicit budget runs the decomposition over the whole ground set;
    // the minimum budget splits across the fundamental partition.
    let (rates, chains): (RateVector, Vec<Chain>) = if explicit {
        let (rates, chain) = fairness::lex_optimal_base(&f_hat, weights)?;
        (rates, vec![chain])
    } else {
        let allocation = fairness::lex_optimal_min_sum_rate(oracle, weights, !cli.no_parallel)?;
        (allocation.rates, allocation.block_chains)
    };
    let certificate = fairness::verify_exchange_optimality(&rates, weights, &f_hat)?;

    if cli.format == Format::Json {
        let mut doc = Map::new();
        doc.insert(
            "min_sum_rate".into(),
            rational_value(&solution.min_sum_rate),
        );
        if explicit {
            doc.insert("alpha".into(), rational_value(&budget));
        } else {
            doc.insert(
                "fundamental_partition".into(),
                partition_value(oracle.ground(), &solution),
            );
        }
        doc.insert("rates".into(), rate_map_value(&rates));
        if explicit {
            doc.insert("chain".into(), chain_value(&chains[0]));
        } else {
            doc.insert("chains".into(), block_chains_value(&chains));
        }
        doc.insert("jain".into(), jain_value(&rates)?);
        doc.insert("lemma1".into(), certificate_value(&certificate));
        return Ok(pretty(doc));
    }

    let mut out = String::new();
    out.push_str(&format!(
        "minimum sum-rate: {}\n",
        format_rational(&solution.min_sum_rate)
    ));
    if explicit {
        out.push_str(&format!("budget: {}\n", format_rational(&budget)));
    } else {
        out.push_str(&format!(
            "fundamental partition: {}\n",
            partition_text(oracle.ground(), &solution)
        ));
    }
    out.push_str(&format!("rates: {}\n", rates_text(&rates)));
    for chain in &chains {
        out.push_str(&format!(
            "chain[{}]: {}\n",
            set_text(chain.ground(), chain.ground().full()),
            chain_text(chain)
        ));
    }
    out.push_str(&format!("jain: {}\n", jain_text(&rates)?));
    out.push_str(&format!(
        "certificate: {}\n",
        certificate_text(&certificate)
    ));
    Ok(out.trim_end().to_string())
}

fn cmd_shapley(cli: &Cli, oracle: &EntropyOracle, alpha: Option<Rational>) -> Result<String> {
    let solution = omniscience::solve(oracle)?;
    let (budget, explicit) = resolve_budget(&solution, alpha)?;
    let f_hat = omniscience::truncated_dual(oracle, budget.clone())?;
    let shapley = fairness::shapley(&f_hat)?;
    // The comparison point is the fairest base of the same budget: the
    // uniform-weight optimum, whose Jain index no base exceeds.
    let uniform = WeightVector::uniform(oracle.ground().clone());
    let (lex_optimal, _) = fairness::lex_optimal_base(&f_hat, &uniform)?;

    if cli.format == Format::Json {
        let mut doc = Map::new();
        doc.insert(
            "min_sum_rate".into(),
            rational_value(&solution.min_sum_rate),
        );
        if explicit {
            doc.insert("alpha".into(), rational_value(&budget));
        }
        doc.insert("shapley".into(), rate_map_value(&shapley));
        doc.insert("jain_shapley".into(), jain_value(&shapley)?);
        doc.insert("jain_lex_optimal".into(), jain_value(&lex_optimal)?);
        return Ok(pretty(doc));
    }

    let mut out = String::new();
    out.push_str(&format!("shapley: {}\n", rates_text(&shapley)));
    out.push_str(&format!("jain(shapley): {}\n", jain_text(&shapley)?));
    out.push_str(&format!(
        "jain(lex-optimal): {}\n",
        jain_text(&lex_optimal)?
    ));
    Ok(out.trim_end().to_string())
}

fn cmd_check(
    cli: &Cli,
    oracle: &EntropyOracle,
    weights: &WeightVector,
    alpha: Option<Rational>,
    r: &RateVector,
) -> Result<String> {
    let solution = omniscience::solve(oracle)?;
    let (budget, _) = resolve_budget(&solution, alpha)?;
    let f_hat = omniscience::truncated_dual(oracle, budget.clone())?;
    let ground = oracle.ground();

    let membership = fairness::in_polyhedron(r, &f_hat)?;
    let base = fairness::is_base(r, &f_hat)?;
    let tight = if membership.inside {
        Some(fairness::tight_sets(r, &f_hat)?)
    } else {
        None
    };
    let (dep, certificate) = if base {
        let mut dep = Vec::new();
        for &user in ground.users() {
            dep.push((user, fairness::dep(r, user, &f_hat)?));
        }
        let certificate = fairness::verify_exchange_optimality(r, weights, &f_hat)?;
        (Some(dep), Some(certificate))
    } else {
        (None, None)
    };

    if cli.format == Format::Json {
        let mut doc = Map::new();
        doc.insert("alpha".into(), rational_value(&budget));
        doc.insert("rates".into(), rate_map_value(r));
        doc.insert("in_polyhedron".into(), json!(membership.inside));
        doc.insert(
            "violating_set".into(),
            match membership.violating {
                Some(set) => subset_value(ground, set),
                None => Value::Null,
            },
        );
        doc.insert("is_base".into(), json!(base));
        doc.insert(
            "tight_sets".into(),
            match &tight {
                Some(sets) => {
                    Value::Array(sets.iter().map(|&set| subset_value(ground, set)).collect())
                }
                None => Value::Null,
            },
        );
        doc.insert(
            "dep".into(),
            match &dep {
                Some(entries) => {
                    let mut map = Map::new();
                    for (user, set) in entries {
                        map.insert(user.to_string(), subset_value(ground, *set));
                    }
                    Value::Object(map)
                }
                None => Value::Null,
            },
        );
        doc.insert(
            "lemma1".into(),
            match &certificate {
                Some(cert) => certificate_value(cert),
                None => Value::Null,
            },
        );
        return Ok(pretty(doc));
    }

    let mut out = String::new();
    out.push_str(&format!("budget: {}\n", format_rational(&budget)));
    out.push_str(&format!(
        "in polyhedron: {}\n",
        if membership.inside { "yes" } else { "no" }
    ));
    if let Some(set) = membership.violating {
        out.push_str(&format!("violating set: {}\n", set_text(ground, set)));
    }
    out.push_str(&format!("is base: {}\n", if base { "yes" } else { "no" }));
    if let Some(sets) = &tight {
        let rendered: Vec<String> = sets.iter().map(|&s| set_text(ground, s)).collect();
        out.push_str(&format!("tight sets: {}\n", rendered.join(" ")));
    }
    if let Some(entries) = &dep {
        let rendered: Vec<String> = entries
            .iter()
            .map(|(user, set)| format!("{user} -> {}", set_text(ground, *set)))
            .collect();
        out.push_str(&format!("dep: {}\n", rendered.join("; ")));
    }
    if let Some(cert) = &certificate {
        out.push_str(&format!("certificate: {}\n", certificate_text(cert)));
    }
    Ok(out.trim_end().to_string())
}

fn pipeline(
    cli: &Cli,
    oracle: &EntropyOracle,
    weights: &WeightVector,
    alpha: Option<Rational>,
) -> Result<String> {
    let solution = omniscience::solve(oracle)?;
    let (budget, explicit) = resolve_budget(&solution, alpha)?;
    let f_hat = omniscience::truncated_dual(oracle, budget.clone())?;
    let (rates, chains): (RateVector, Vec<Chain>) = if explicit {
        let (rates, chain) = fairness::lex_optimal_base(&f_hat, weights)?;
        (rates, vec![chain])
    } else {
        let allocation = fairness::lex_optimal_min_sum_rate(oracle, weights, !cli.no_parallel)?;
        (allocation.rates, allocation.block_chains)
    };
    let certificate = fairness::verify_exchange_optimality(&rates, weights, &f_hat)?;
    let shapley = if oracle.ground().len() <= 12 {
        Some(fairness::shapley(&f_hat)?)
    } else {
        None
    };

    if cli.format == Format::Json {
        let mut doc = Map::new();
        push_solution(&mut doc, oracle.ground(), &solution);
        if explicit {
            doc.insert("alpha".into(), rational_value(&budget));
        }
        doc.insert("rates".into(), rate_map_value(&rates));
        if explicit {
            doc.insert("chain".into(), chain_value(&chains[0]));
        } else {
            doc.insert("chains".into(), block_chains_value(&chains));
        }
        doc.insert("jain".into(), jain_value(&rates)?);
        doc.insert("lemma1".into(), certificate_value(&certificate));
        if let Some(shapley) = &shapley {
            doc.insert("shapley".into(), rate_map_value(shapley));
            doc.insert("jain_shapley".into(), jain_value(shapley)?);
        }
        return Ok(pretty(doc));
    }

    let mut out = String::new();
    text_solution(&mut out, oracle.ground(), &solution);
    if explicit {
        out.push_str(&format!("budget: {}\n", format_rational(&budget)));
    }
    out.push_str(&format!("rates: {}\n", rates_text(&rates)));
    for chain in &chains {
        out.push_str(&format!(
            "chain[{}]: {}\n",
            set_text(chain.ground(), chain.ground().full()),
            chain_text(chain)
        ));
    }
    out.push_str(&format!("jain: {}\n", jain_text(&rates)?));
    out.push_str(&format!(
        "certificate: {}\n",
        certificate_text(&certificate)
    ));
    if let Some(shapley) = &shapley {
        out.push_str(&format!("shapley: {}\n", rates_text(shapley)));
        out.push_str(&format!("jain(shapley): {}\n", jain_text(shapley)?));
    }
    Ok(out.trim_end().to_string())
}

fn parse_pair_list(list: &str) -> Result<BTreeMap<UserId, Rational>> {
    let mut map = BTreeMap::new();
    for entry in list.split(',') {
        let entry = entry.trim();
        if entry.is_empty() {
            continue;
        }
        let (user, value) = entry
            .split_once('=')
            .ok_or_else(|| Error::Instance(format!("expected user=value, got '{entry}'")))?;
        let user: UserId = user
            .trim()
            .parse()
            .map_err(|_| Error::Instance(format!("'{}' is not a user id", user.trim())))?;
        let value = parse_rational(value.trim())?;
        if map.insert(user, value).is_some() {
            return Err(Error::Instance(format!("user {user} listed twice")));
        }
    }
    if map.is_empty() {
        return Err(Error::Instance("empty user=value list".into()));
    }
    Ok(map)
}

fn pretty(doc: Map<String, Value>) -> String {
    serde_json::to_string_pretty(&Value::Object(doc)).expect("serializing output")
}

fn rational_value(x: &Rational) -> Value {
    Value::String(format_rational(x))
}

fn subset_value(ground: &GroundSet, set: Subset) -> Value {
    json!(ground.users_in(set))
}

fn partition_value(ground: &GroundSet, solution: &OmniscienceSolution) -> Value {
    Value::Array(
        solution
            .fundamental_partition
            .blocks()
            .iter()
            .map(|&block| subset_value(ground, block))
            .collect(),
    )
}

fn rate_map_value(r: &RateVector) -> Value {
    let mut map = Map::new();
    for (&user, rate) in r.ground().users().iter().zip(r.rates()) {
        map.insert(user.to_string(), rational_value(rate));
    }
    Value::Object(map)
}

fn chain_value(chain: &Chain) -> Value {
    Value::Array(
        chain
            .levels()
            .iter()
            .map(|(set, lambda)| {
                let mut level = Map::new();
                level.insert("set".into(), subset_value(chain.ground(), *set));
                level.insert("lambda".into(), rational_value(lambda));
                Value::Object(level)
            })
            .collect(),
    )
}

fn block_chains_value(chains: &[Chain]) -> Value {
    Value::Array(
        chains
            .iter()
            .map(|chain| {
                let mut entry = Map::new();
                entry.insert("block".into(), json!(chain.ground().users()));
                entry.insert("chain".into(), chain_value(chain));
                Value::Object(entry)
            })
            .collect(),
    )
}

fn certificate_value(cert: &Certificate) -> Value {
    let mut map = Map::new();
    map.insert("pass".into(), json!(cert.pass));
    if let Some((i, j)) = cert.witness {
        map.insert("witness".into(), json!([i, j]));
    }
    Value::Object(map)
}

/// Jain index as JSON; the all-zero vector (legal only for sources with
/// nothing to exchange) has no index and reports null.
fn jain_value(r: &RateVector) -> Result<Value> {
    if r.is_zero() {
        return Ok(Value::Null);
    }
    Ok(rational_value(&fairness::jain_index(r)?))
}

fn jain_text(r: &RateVector) -> Result<String> {
    if r.is_zero() {
        return Ok("undefined (all rates zero)".into());
    }
    Ok(format_rational(&fairness::jain_index(r)?))
}

fn push_solution(doc: &mut Map<String, Value>, ground: &GroundSet, solution: &OmniscienceSolution) {
    doc.insert(
        "min_sum_rate".into(),
        rational_value(&solution.min_sum_rate),
    );
    doc.insert(
        "fundamental_partition".into(),
        partition_value(ground, solution),
    );
    doc.insert(
        "block_quotas".into(),
        Value::Array(solution.block_quotas.iter().map(rational_value).collect()),
    );
}

fn text_solution(out: &mut String, ground: &GroundSet, solution: &OmniscienceSolution) {
    out.push_str(&format!(
        "minimum sum-rate: {}\n",
        format_rational(&solution.min_sum_rate)
    ));
    out.push_str(&format!(
        "fundamental partition: {}\n",
        partition_text(ground, solution)
    ));
    let quotas: Vec<String> = solution
        .fundamental_partition
        .blocks()
        .iter()
        .zip(&solution.block_quotas)
        .map(|(&block, quota)| format!("{}={}", set_text(ground, block), format_rational(quota)))
        .collect();
    out.push_str(&format!("block quotas: {}\n", quotas.join(" ")));
}

fn partition_text(ground: &GroundSet, solution: &OmniscienceSolution) -> String {
    let blocks: Vec<String> = solution
        .fundamental_partition
        .blocks()
        .iter()
        .map(|&block| set_text(ground, block))
        .collect();
    blocks.join(" ")
}

fn set_text(ground: &GroundSet, set: Subset) -> String {
    let users: Vec<String> = ground.users_in(set).iter().map(|u| u.to_string()).collect();
    format!("{{{}}}", users.join(","))
}

fn rates_text(r: &RateVector) -> String {
    let entries: Vec<String> = r
        .ground()
        .users()
        .iter()
        .zip(r.rates())
        .map(|(user, rate)| format!("{user}={}", format_rational(rate)))
        .collect();
    entries.join(" ")
}

fn chain_text(chain: &Chain) -> String {
    let levels: Vec<String> = chain
        .levels()
        .iter()
        .map(|(set, lambda)| {
            format!(
                "{} @ {}",
                set_text(chain.ground(), *set),
                format_rational(lambda)
            )
        })
        .collect();
    levels.join(" -> ")
}

fn certificate_text(cert: &Certificate) -> String {
    match cert.witness {
        None => "pass".into(),
        Some((i, j)) => format!("fail (user {i} is worse off than user {j} it depends on)"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_lists_parse_exactly() {
        let map = parse_pair_list("1=4, 2=2 ,3=1/2").unwrap();
        assert_eq!(map[&1], parse_rational("4").unwrap());
        assert_eq!(map[&3], parse_rational("1/2").unwrap());
        assert!(parse_pair_list("1=4,1=5").is_err());
        assert!(parse_pair_list("x=4").is_err());
        assert!(parse_pair_list("1:4").is_err());
        assert!(parse_pair_list("").is_err());
    }

    #[test]
    fn exit_codes_partition_the_error_space() {
        let one = || Box::new(parse_rational("1").unwrap());
        assert_eq!(
            exit_code(&Error::InfeasibleSumRate {
                alpha: one(),
                min_sum_rate: one(),
            }),
            2
        );
        assert_eq!(exit_code(&Error::Instance("bad".into())), 3);
        assert_eq!(exit_code(&Error::TooFewUsers(1)), 4);
        assert_eq!(exit_code(&Error::ShapleyCapacity(13, 12)), 4);
        assert_eq!(exit_code(&Error::Internal("broken".into())), 1);
    }
}
