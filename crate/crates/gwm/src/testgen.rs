//! Seeded validation-data generators.
//!
//! Three generators reproduce the validation protocol:
//!
//! * [`generate_strings`] expands a pattern by drawing starred repetition
//!   counts uniformly from a bound — pure syntax-based generation, so every
//!   output is in the pattern's language by construction.
//! * [`planted_partition_scenario`] splits the hierarchy's nodes into 2..=4
//!   groups with distinct constant outcomes; synthesis must recover exactly
//!   one TrOC per group.
//! * [`planted_regex_scenario`] gives one target node a shifted outcome;
//!   synthesis must return the target as a surviving TrOC.
//!
//! Scenario membership is built by rejection sampling: a generated string
//! counts for a node only when classification sends it back to that node
//! (the generator is its deepest container). Nodes for which no such string
//! exists within the bound — the root usually, whose strings always fit
//! some child — simply stay unpopulated and merge away during synthesis.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::alphabet::Alphabet;
use crate::dataset::{Dataset, EncodedItemset, OutcomeRecord};
use crate::error::{GwmError, Result};
use crate::hierarchy::{enumerate_hierarchy, Hierarchy};
use crate::pattern::PatternExpr;

/// Parameters for syntax-based string generation.
#[derive(Debug, Clone)]
pub struct GenSpec {
    pub expr: PatternExpr,
    pub count: usize,
    /// Repetition bound per starred atom (0..=bound) and for the outer
    /// group (1..=bound).
    pub bound: usize,
    pub seed: u64,
}

/// How a planted scenario distributes outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlantedStrategy {
    Halves,
    Thirds,
    Quarters,
    SingleTarget,
}

impl PlantedStrategy {
    pub fn parts(self) -> usize {
        match self {
            PlantedStrategy::Halves => 2,
            PlantedStrategy::Thirds => 3,
            PlantedStrategy::Quarters => 4,
            PlantedStrategy::SingleTarget => 2,
        }
    }

    pub fn from_parts(parts: usize) -> Result<Self> {
        match parts {
            2 => Ok(PlantedStrategy::Halves),
            3 => Ok(PlantedStrategy::Thirds),
            4 => Ok(PlantedStrategy::Quarters),
            other => Err(GwmError::TestGen(format!("parts must be 2, 3 or 4, got {other}"))),
        }
    }
}

/// Machine-checkable expectation carried by a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Expectation {
    TrocCount { count: usize },
    TargetPattern { pattern: String },
}

/// A generated dataset plus what synthesis is expected to find in it.
#[derive(Debug, Clone)]
pub struct PlantedScenario {
    pub alphabet: Alphabet,
    pub strategy: PlantedStrategy,
    pub seed: u64,
    pub dataset: Dataset,
    pub expected: Expectation,
}

impl PlantedScenario {
    /// Sidecar JSON describing the expectation.
    pub fn expectations_json(&self) -> serde_json::Value {
        serde_json::json!({
            "alphabet": self.alphabet.to_string(),
            "strategy": self.strategy,
            "seed": self.seed,
            "expected": self.expected,
        })
    }
}

/// Expands `spec.count` strings from the pattern. Deterministic in the seed;
/// every string is in the pattern's language and non-empty.
pub fn generate_strings(spec: &GenSpec, alphabet: &Alphabet) -> Result<Vec<String>> {
    if spec.count == 0 {
        return Err(GwmError::TestGen("count must be at least 1".into()));
    }
    if spec.bound == 0 {
        return Err(GwmError::TestGen("repetition bound must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = Vec::with_capacity(spec.count);
    for _ in 0..spec.count {
        out.push(sample_string(&spec.expr, spec.bound, alphabet, &mut rng)?);
    }
    Ok(out)
}

fn sample_string(
    expr: &PatternExpr,
    bound: usize,
    alphabet: &Alphabet,
    rng: &mut ChaCha8Rng,
) -> Result<String> {
    // A fully starred body can draw the empty string; retry, since itemsets
    // must be non-empty and the language always has non-empty members.
    for _ in 0..1000 {
        let reps = if expr.outer_star { rng.gen_range(1..=bound) } else { 1 };
        let mut s = String::new();
        for _ in 0..reps {
            for atom in &expr.atoms {
                let n = if atom.starred { rng.gen_range(0..=bound) } else { 1 };
                for _ in 0..n {
                    s.push(alphabet.symbol(atom.symbol as usize));
                }
            }
        }
        if !s.is_empty() {
            return Ok(s);
        }
    }
    Err(GwmError::TestGen(format!(
        "pattern `{}` produced no non-empty string within the bound",
        expr.render(alphabet)
    )))
}

/// Strings from `node` that classify back into `node`, by rejection
/// sampling. Returns fewer than `count` strings (possibly none) when the
/// node's bounded language is dominated by more specific nodes.
pub fn generate_classified(
    hierarchy: &Hierarchy,
    node: usize,
    count: usize,
    bound: usize,
    seed: u64,
) -> Result<Vec<String>> {
    let expr = &hierarchy.nodes[node].expr;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0usize;
    let max_attempts = count * 60;
    let probe_window = 60;
    while out.len() < count && attempts < max_attempts {
        attempts += 1;
        let s = sample_string(expr, bound, &hierarchy.alphabet, &mut rng)?;
        if hierarchy.classify(&s)? == node {
            out.push(s);
        } else if out.is_empty() && attempts >= probe_window {
            break; // nothing lands here; treat the node as non-generable
        }
    }
    Ok(out)
}

/// Default strings per node in planted scenarios.
pub const STRINGS_PER_NODE: usize = 100;
/// Default repetition bound in planted scenarios.
pub const PLANT_BOUND: usize = 5;

/// Per-node member strings for a whole hierarchy, seeded per node.
fn generate_members(hierarchy: &Hierarchy, seed: u64) -> Result<Vec<Vec<String>>> {
    let mut members = Vec::with_capacity(hierarchy.len());
    for id in 0..hierarchy.len() {
        let node_seed = seed ^ (0x9e37_79b9_7f4a_7c15u64.wrapping_mul(id as u64 + 1));
        members.push(generate_classified(hierarchy, id, STRINGS_PER_NODE, PLANT_BOUND, node_seed)?);
    }
    Ok(members)
}

/// Group labels per node: group 0 spreads from the root, each apex starts a
/// fresh group, and every other node inherits the group of its first parent.
/// The inheritance makes each group a connected cone that drains into its
/// apex during synthesis.
fn assign_groups(hierarchy: &Hierarchy, apexes: &[usize]) -> Vec<usize> {
    let mut group = vec![0usize; hierarchy.len()];
    for id in 0..hierarchy.len() {
        if id == hierarchy.root() {
            group[id] = 0;
            continue;
        }
        if let Some(pos) = apexes.iter().position(|&a| a == id) {
            group[id] = pos + 1;
            continue;
        }
        let first_parent = hierarchy.nodes[id].parents[0];
        group[id] = group[first_parent];
    }
    group
}

fn scenario_dataset(
    members: &[Vec<String>],
    outcome_of_node: impl Fn(usize) -> f64,
) -> Result<Dataset> {
    let mut items = Vec::new();
    let mut outcomes = Vec::new();
    for (node, strings) in members.iter().enumerate() {
        let value = outcome_of_node(node);
        for (k, s) in strings.iter().enumerate() {
            let id = format!("n{node}s{k}");
            items.push(EncodedItemset::new(&id, s.clone())?);
            outcomes.push(OutcomeRecord { id, value });
        }
    }
    Dataset::new(items, outcomes)
}

fn distinct_outcomes(parts: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let base: f64 = rng.gen_range(0.0..1.0);
    (0..parts).map(|i| base + 10.0 * (i as f64 + 1.0)).collect()
}

/// Builds a partition scenario over a freshly enumerated hierarchy.
pub fn planted_partition_scenario(
    alphabet: &Alphabet,
    parts: usize,
    seed: u64,
) -> Result<PlantedScenario> {
    let hierarchy = enumerate_hierarchy(alphabet)?;
    planted_partition_with(&hierarchy, parts, seed)
}

/// Builds a partition scenario over an existing hierarchy.
pub fn planted_partition_with(
    hierarchy: &Hierarchy,
    parts: usize,
    seed: u64,
) -> Result<PlantedScenario> {
    let strategy = PlantedStrategy::from_parts(parts)?;
    if parts > hierarchy.len() {
        return Err(GwmError::TestGen(format!(
            "{parts} groups over {} nodes is not possible",
            hierarchy.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let members = generate_members(hierarchy, seed)?;

    // Apexes must be fully populated: a short-membered apex could fail to
    // reject against its parents and merge away.
    let full: Vec<usize> = (0..hierarchy.len())
        .filter(|&i| i != hierarchy.root() && members[i].len() == STRINGS_PER_NODE)
        .collect();
    if full.len() < parts - 1 {
        return Err(GwmError::TestGen("not enough populated nodes to seed the groups".into()));
    }

    // Seeded apex choice, re-drawn until every group holds at least one
    // populated node (group 0 can end up starved when the root itself is
    // not generable).
    let populated: Vec<bool> = members.iter().map(|m| m.len() >= 2).collect();
    let mut apexes: Vec<usize> = Vec::new();
    let mut groups: Vec<usize> = Vec::new();
    let mut ok = false;
    for _ in 0..50 {
        let mut pool = full.clone();
        apexes = (0..parts - 1)
            .map(|_| {
                let idx = rng.gen_range(0..pool.len());
                pool.swap_remove(idx)
            })
            .collect();
        apexes.sort_unstable();
        groups = assign_groups(hierarchy, &apexes);
        let mut group_populated = vec![false; parts];
        for id in 0..hierarchy.len() {
            if populated[id] {
                group_populated[groups[id]] = true;
            }
        }
        if group_populated.iter().all(|&g| g) {
            ok = true;
            break;
        }
    }
    if !ok {
        return Err(GwmError::TestGen("could not seed groups with populated nodes".into()));
    }

    let values = distinct_outcomes(parts, &mut rng);
    let dataset = scenario_dataset(&members, |node| values[groups[node]])?;
    Ok(PlantedScenario {
        alphabet: hierarchy.alphabet.clone(),
        strategy,
        seed,
        dataset,
        expected: Expectation::TrocCount { count: parts },
    })
}

/// Nodes that can serve as a recovery target: fully populated, not the
/// root, and no populated node depends on the target as its only parent
/// once empty nodes are pruned away.
pub fn safe_targets(hierarchy: &Hierarchy, members: &[Vec<String>]) -> Vec<usize> {
    let populated: Vec<bool> = members.iter().map(|m| m.len() >= 2).collect();

    // Parent sets after pruning unpopulated nodes, deepest first, each
    // merging into its first parent (mirroring the synthesis pre-pass).
    let mut parents: Vec<Vec<usize>> = hierarchy.nodes.iter().map(|n| n.parents.clone()).collect();
    let mut children: Vec<Vec<usize>> =
        hierarchy.nodes.iter().map(|n| n.children.clone()).collect();
    let mut order: Vec<usize> = (0..hierarchy.len()).collect();
    order.sort_by(|&a, &b| {
        hierarchy.nodes[b].depth.cmp(&hierarchy.nodes[a].depth).then(a.cmp(&b))
    });
    for &id in &order {
        if id == hierarchy.root() || populated[id] {
            continue;
        }
        let target = parents[id][0];
        let kids = std::mem::take(&mut children[id]);
        for ch in kids {
            parents[ch].retain(|&p| p != id);
            if ch != target && !parents[ch].contains(&target) {
                parents[ch].push(target);
                parents[ch].sort_unstable();
                children[target].push(ch);
            }
        }
        for p in parents[id].clone() {
            children[p].retain(|&c| c != id);
        }
        parents[id].clear();
    }

    (0..hierarchy.len())
        .filter(|&t| t != hierarchy.root() && members[t].len() == STRINGS_PER_NODE)
        .filter(|&t| {
            (0..hierarchy.len()).all(|u| {
                u == t || u == hierarchy.root() || !populated[u] || parents[u].as_slice() != [t]
            })
        })
        .collect()
}

/// Builds a single-target recovery scenario over a fresh hierarchy.
pub fn planted_regex_scenario(alphabet: &Alphabet, seed: u64) -> Result<PlantedScenario> {
    let hierarchy = enumerate_hierarchy(alphabet)?;
    planted_regex_with(&hierarchy, seed)
}

/// Builds a single-target recovery scenario over an existing hierarchy; the
/// target is drawn (seeded) from the safe candidates.
pub fn planted_regex_with(hierarchy: &Hierarchy, seed: u64) -> Result<PlantedScenario> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let members = generate_members(hierarchy, seed)?;
    let candidates = safe_targets(hierarchy, &members);
    if candidates.is_empty() {
        return Err(GwmError::TestGen("no safe target node is generable".into()));
    }
    let target = candidates[rng.gen_range(0..candidates.len())];
    let values = distinct_outcomes(2, &mut rng);
    let dataset = scenario_dataset(&members, |node| {
        if node == target {
            values[1]
        } else {
            values[0]
        }
    })?;
    Ok(PlantedScenario {
        alphabet: hierarchy.alphabet.clone(),
        strategy: PlantedStrategy::SingleTarget,
        seed,
        dataset,
        expected: Expectation::TargetPattern { pattern: hierarchy.nodes[target].text.clone() },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab() -> Alphabet {
        Alphabet::parse("AB").unwrap()
    }

    #[test]
    fn generated_strings_match_their_pattern() {
        let alphabet = ab();
        let hierarchy = enumerate_hierarchy(&alphabet).unwrap();
        for node in &hierarchy.nodes {
            let spec = GenSpec { expr: node.expr.clone(), count: 30, bound: 3, seed: 7 };
            for s in generate_strings(&spec, &alphabet).unwrap() {
                assert!(!s.is_empty());
                assert!(hierarchy.matches(node.id, &s).unwrap(), "{} does not match {s}", node.text);
            }
        }
    }

    #[test]
    fn generation_is_seed_deterministic() {
        let alphabet = ab();
        let expr = PatternExpr::parse("(A*B)*", &alphabet).unwrap();
        let spec = GenSpec { expr, count: 50, bound: 4, seed: 99 };
        let a = generate_strings(&spec, &alphabet).unwrap();
        let b = generate_strings(&spec, &alphabet).unwrap();
        assert_eq!(a, b);
        let other = generate_strings(&GenSpec { seed: 100, ..spec }, &alphabet).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn star_free_pattern_is_a_singleton() {
        let alphabet = ab();
        let expr = PatternExpr::parse("AB", &alphabet).unwrap();
        let spec = GenSpec { expr, count: 10, bound: 5, seed: 1 };
        let strings = generate_strings(&spec, &alphabet).unwrap();
        assert!(strings.iter().all(|s| s == "AB"));
    }

    #[test]
    fn classified_generation_round_trips() {
        let alphabet = ab();
        let hierarchy = enumerate_hierarchy(&alphabet).unwrap();
        let mut generable = 0;
        for id in 0..hierarchy.len() {
            let strings = generate_classified(&hierarchy, id, 25, 4, 11).unwrap();
            if !strings.is_empty() {
                generable += 1;
            }
            for s in strings {
                assert_eq!(hierarchy.classify(&s).unwrap(), id);
            }
        }
        // Most of the 19 nodes admit strings of their own; the root never
        // does (every string it generates fits one of its children).
        assert!(generable >= 15, "only {generable} generable nodes");
        assert!(generate_classified(&hierarchy, hierarchy.root(), 5, 4, 3).unwrap().is_empty());
    }

    #[test]
    fn partition_scenario_shape() {
        let alphabet = ab();
        let scenario = planted_partition_scenario(&alphabet, 2, 42).unwrap();
        assert_eq!(scenario.expected, Expectation::TrocCount { count: 2 });
        assert!(!scenario.dataset.is_empty());
        // Exactly two distinct outcome values.
        let mut values: Vec<f64> =
            (0..scenario.dataset.len()).map(|i| scenario.dataset.outcome_at(i)).collect();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        values.dedup();
        assert_eq!(values.len(), 2);
    }

    #[test]
    fn degenerate_group_counts_are_rejected() {
        assert!(planted_partition_scenario(&ab(), 1, 5).is_err());
        assert!(planted_partition_scenario(&ab(), 5, 5).is_err());
    }

    #[test]
    fn regex_scenario_names_a_real_node() {
        let alphabet = ab();
        let hierarchy = enumerate_hierarchy(&alphabet).unwrap();
        let scenario = planted_regex_with(&hierarchy, 7).unwrap();
        match &scenario.expected {
            Expectation::TargetPattern { pattern } => {
                assert!(hierarchy.find_by_text(pattern).is_some());
                assert_ne!(pattern, &hierarchy.nodes[hierarchy.root()].text);
            }
            other => panic!("unexpected expectation {other:?}"),
        }
    }
}
