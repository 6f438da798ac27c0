//! Level-wise Apriori frequent-itemset mining over symbol multisets.
//!
//! This is the methodological counterpoint to the synthesis pipeline: item
//! order is ignored (transactions are multisets), there is no outcome, and
//! interestingness is plain support. A transaction contains a candidate when
//! it holds at least as many copies of every symbol — so `AAB` contains
//! `{A, A}` once, and support counts containing transactions, not
//! occurrences.

use serde::{Deserialize, Serialize};

use crate::error::{GwmError, Result};

/// A transaction: symbols of one encoded sequence with order dropped and
/// repetitions kept.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transaction {
    /// Sorted symbols.
    items: Vec<char>,
}

impl Transaction {
    pub fn new(symbols: impl IntoIterator<Item = char>) -> Result<Self> {
        let mut items: Vec<char> = symbols.into_iter().collect();
        if items.is_empty() {
            return Err(GwmError::Apriori("transactions must be non-empty".into()));
        }
        items.sort_unstable();
        Ok(Self { items })
    }

    pub fn from_sequence(sequence: &str) -> Result<Self> {
        Self::new(sequence.chars())
    }

    pub fn items(&self) -> &[char] {
        &self.items
    }

    /// Multiset containment: every symbol of `candidate` (a sorted multiset)
    /// occurs at least as often here.
    fn contains(&self, candidate: &[char]) -> bool {
        let mut i = 0;
        for &c in candidate {
            loop {
                match self.items.get(i) {
                    Some(&t) if t < c => i += 1,
                    Some(&t) if t == c => {
                        i += 1;
                        break;
                    }
                    _ => return false,
                }
            }
        }
        true
    }
}

/// A frequent symbol multiset and its support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequentItemset {
    /// Sorted symbols.
    pub items: Vec<char>,
    /// Fraction of transactions containing the multiset.
    pub support: f64,
}

impl FrequentItemset {
    pub fn label(&self) -> String {
        let inner: Vec<String> = self.items.iter().map(|c| c.to_string()).collect();
        format!("{{{}}}", inner.join(", "))
    }
}

/// Mines all sub-multisets of size `1..=max_len` whose support reaches
/// `min_support`, generated level-wise with the downward-closure prune.
pub fn apriori_frequent_itemsets(
    transactions: &[Transaction],
    min_support: f64,
    max_len: usize,
) -> Result<Vec<FrequentItemset>> {
    if transactions.is_empty() {
        return Err(GwmError::Apriori("no transactions".into()));
    }
    if !(min_support > 0.0 && min_support <= 1.0) {
        return Err(GwmError::Apriori(format!(
            "min_support must lie in (0, 1], got {min_support}"
        )));
    }
    if max_len == 0 {
        return Err(GwmError::Apriori("max_len must be at least 1".into()));
    }
    let n = transactions.len() as f64;
    let frequent_enough = |count: usize| count as f64 / n >= min_support - 1e-12;

    // Level 1.
    let mut symbols: Vec<char> = transactions.iter().flat_map(|t| t.items.iter().copied()).collect();
    symbols.sort_unstable();
    symbols.dedup();
    let mut level: Vec<Vec<char>> = Vec::new();
    let mut out: Vec<FrequentItemset> = Vec::new();
    for s in symbols {
        let candidate = vec![s];
        let count = transactions.iter().filter(|t| t.contains(&candidate)).count();
        if frequent_enough(count) {
            out.push(FrequentItemset { items: candidate.clone(), support: count as f64 / n });
            level.push(candidate);
        }
    }

    let mut k = 1;
    while !level.is_empty() && k < max_len {
        // Join step: two frequent k-multisets sharing their first k-1
        // symbols produce a (k+1)-candidate; joining an itemset with itself
        // is what yields repeated symbols such as {A, A}.
        let mut candidates: Vec<Vec<char>> = Vec::new();
        for i in 0..level.len() {
            for j in i..level.len() {
                if level[i][..k - 1] == level[j][..k - 1] {
                    let mut candidate = level[i].clone();
                    candidate.push(level[j][k - 1]);
                    candidates.push(candidate);
                }
            }
        }
        // Prune step: every k-sub-multiset must itself be frequent.
        candidates.retain(|c| {
            (0..c.len()).all(|drop| {
                let mut sub = c.clone();
                sub.remove(drop);
                level.binary_search(&sub).is_ok()
            })
        });

        let mut next_level = Vec::new();
        for candidate in candidates {
            let count = transactions.iter().filter(|t| t.contains(&candidate)).count();
            if frequent_enough(count) {
                out.push(FrequentItemset { items: candidate.clone(), support: count as f64 / n });
                next_level.push(candidate);
            }
        }
        level = next_level;
        k += 1;
    }

    out.sort_by(|a, b| a.items.len().cmp(&b.items.len()).then(a.items.cmp(&b.items)));
    Ok(out)
}

/// CSV export: `itemset,support`.
pub fn itemsets_to_csv(itemsets: &[FrequentItemset]) -> String {
    let mut out = String::from("itemset,support\n");
    for f in itemsets {
        let inner: String = f.items.iter().collect();
        out.push_str(&format!("{},{}\n", inner, f.support));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn txns(seqs: &[&str]) -> Vec<Transaction> {
        seqs.iter().map(|s| Transaction::from_sequence(s).unwrap()).collect()
    }

    #[test]
    fn worked_example() {
        let t = txns(&["AA", "AAB", "AB", "BB"]);
        let result = apriori_frequent_itemsets(&t, 0.5, 2).unwrap();
        let as_pairs: Vec<(String, f64)> =
            result.iter().map(|f| (f.items.iter().collect::<String>(), f.support)).collect();
        assert_eq!(
            as_pairs,
            vec![
                ("A".to_string(), 0.75),
                ("B".to_string(), 0.75),
                ("AA".to_string(), 0.5),
                ("AB".to_string(), 0.5),
            ]
        );
    }

    #[test]
    fn multiset_containment_counts_once() {
        let t = Transaction::from_sequence("AAB").unwrap();
        assert!(t.contains(&['A', 'A']));
        assert!(t.contains(&['A', 'B']));
        assert!(!t.contains(&['B', 'B']));
        assert!(!Transaction::from_sequence("AB").unwrap().contains(&['A', 'A']));
    }

    #[test]
    fn full_support_over_heterogeneous_transactions_is_empty() {
        let t = txns(&["AA", "BB", "CC"]);
        assert!(apriori_frequent_itemsets(&t, 1.0, 2).unwrap().is_empty());
    }

    #[test]
    fn ownership_style_corpus_yields_pair_and_triple_patterns() {
        // Long ownership strings make every small multiset of A and B
        // frequent, the shape of the reference contrast table.
        let t = txns(&["AABBB", "AAABB", "ABABA", "BBBAA", "AABAB", "BBBBB", "AAAAA"]);
        let result = apriori_frequent_itemsets(&t, 0.7, 3).unwrap();
        let labels: Vec<String> =
            result.iter().map(|f| f.items.iter().collect::<String>()).collect();
        assert!(labels.contains(&"AA".to_string()));
        assert!(labels.contains(&"AB".to_string()));
        assert!(labels.contains(&"AAB".to_string()));
        assert!(labels.contains(&"ABB".to_string()));
    }

    #[test]
    fn downward_closure_holds() {
        let t = txns(&["AAB", "ABB", "ABC", "AC", "BC", "AABC"]);
        let result = apriori_frequent_itemsets(&t, 0.3, 3).unwrap();
        let level: Vec<&Vec<char>> = result.iter().map(|f| &f.items).collect();
        for f in &result {
            for drop in 0..f.items.len() {
                if f.items.len() == 1 {
                    continue;
                }
                let mut sub = f.items.clone();
                sub.remove(drop);
                assert!(level.contains(&&sub), "missing sub-multiset {sub:?} of {:?}", f.items);
            }
        }
    }

    #[test]
    fn rejects_invalid_input() {
        assert!(apriori_frequent_itemsets(&[], 0.5, 2).is_err());
        let t = txns(&["AB"]);
        assert!(apriori_frequent_itemsets(&t, 0.0, 2).is_err());
        assert!(apriori_frequent_itemsets(&t, 1.5, 2).is_err());
        assert!(apriori_frequent_itemsets(&t, 0.5, 0).is_err());
        assert!(Transaction::from_sequence("").is_err());
    }

    #[test]
    fn brute_force_agreement_small() {
        // Enumerate all sub-multisets of every transaction up to length 3
        // and count containment directly.
        let t = txns(&["AAB", "AB", "BB", "ABC", "CA"]);
        let min_support = 0.4;
        let result = apriori_frequent_itemsets(&t, min_support, 3).unwrap();

        let mut all: std::collections::BTreeSet<Vec<char>> = std::collections::BTreeSet::new();
        for txn in &t {
            let items = txn.items();
            for mask in 1u32..(1 << items.len()) {
                let sub: Vec<char> = (0..items.len())
                    .filter(|&i| mask >> i & 1 == 1)
                    .map(|i| items[i])
                    .collect();
                if sub.len() <= 3 {
                    all.insert(sub);
                }
            }
        }
        let expected: Vec<(Vec<char>, f64)> = all
            .into_iter()
            .filter_map(|sub| {
                let count = t.iter().filter(|txn| txn.contains(&sub)).count();
                let support = count as f64 / t.len() as f64;
                (support >= min_support - 1e-12).then_some((sub, support))
            })
            .collect();
        let mut got: Vec<(Vec<char>, f64)> =
            result.into_iter().map(|f| (f.items, f.support)).collect();
        got.sort();
        let mut want = expected;
        want.sort();
        assert_eq!(got, want);
    }
}
