//! Pattern hierarchies.
//!
//! [`enumerate_hierarchy`] builds every restricted pattern over an alphabet
//! (each non-empty ordered selection of distinct symbols, atoms optionally
//! starred, the whole optionally outer-starred), collapses
//! language-equivalent patterns into one node with a canonical
//! representative, and wires nodes with the transitive reduction of strict
//! language inclusion. The result is a DAG whose single root denotes Σ* and
//! whose depth grows with specificity.
//!
//! Classification assigns a string to the deepest node whose language
//! contains it; ties go to the first node in canonical order.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::alphabet::Alphabet;
use crate::automaton::{Dfa, LanguageRelation};
use crate::dataset::Dataset;
use crate::error::{GwmError, Result};
use crate::pattern::PatternExpr;

/// One node of a [`Hierarchy`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HierarchyNode {
    pub id: usize,
    pub expr: PatternExpr,
    /// Canonical rendering of `expr`.
    pub text: String,
    /// Length of the longest path from the root.
    pub depth: usize,
    pub parents: Vec<usize>,
    pub children: Vec<usize>,
}

/// An inclusion-ordered lattice of restricted patterns over one alphabet.
#[derive(Debug, Clone)]
pub struct Hierarchy {
    pub alphabet: Alphabet,
    pub nodes: Vec<HierarchyNode>,
    dfas: Vec<Dfa>,
    /// Per node: symbols that occur in at least one accepted string.
    usable: Vec<u32>,
    /// Per node: maximum depth among the node and all its descendants.
    subtree_depth: Vec<usize>,
    /// Per node: children ordered deepest-subtree-first for classification.
    explore: Vec<Vec<usize>>,
}

/// Assignment of every dataset item to its most specific matching node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    /// `node_of_item[i]` is the node id for `dataset.items[i]`.
    pub node_of_item: Vec<usize>,
    /// Item indices per node id.
    pub members: Vec<Vec<usize>>,
}

/// Enumerates the full hierarchy over `alphabet`.
pub fn enumerate_hierarchy(alphabet: &Alphabet) -> Result<Hierarchy> {
    if alphabet.is_empty() || alphabet.oversized() {
        return Err(GwmError::Hierarchy(format!(
            "hierarchy enumeration supports alphabets of 1..=5 symbols, got {}",
            alphabet.len()
        )));
    }
    let k = alphabet.len();

    // Group every raw expression by the canonical form of its minimal DFA.
    let mut classes: HashMap<Dfa, Vec<PatternExpr>> = HashMap::new();
    for selection in ordered_selections(k) {
        let len = selection.len();
        for star_bits in 0u32..(1 << len) {
            let atoms: Vec<crate::pattern::Atom> = selection
                .iter()
                .enumerate()
                .map(|(i, &symbol)| crate::pattern::Atom {
                    symbol,
                    starred: star_bits & (1 << i) != 0,
                })
                .collect();
            for outer_star in [false, true] {
                let expr = PatternExpr::new(atoms.clone(), outer_star)?;
                debug_assert!(expr.star_count() <= k + 1);
                let dfa = Dfa::from_expr(&expr, k);
                classes.entry(dfa).or_default().push(expr);
            }
        }
    }

    // One node per language class; representative = fewest stars, then
    // shortest text, then first in alphabet-rank order.
    let mut reps: Vec<(PatternExpr, String, Dfa)> = classes
        .into_iter()
        .map(|(dfa, exprs)| {
            let rep = exprs
                .into_iter()
                .map(|e| {
                    let text = e.render(alphabet);
                    (e, text)
                })
                .min_by(|(a, ta), (b, tb)| {
                    a.star_count()
                        .cmp(&b.star_count())
                        .then(ta.len().cmp(&tb.len()))
                        .then(alphabet.compare_text(ta, tb))
                })
                .expect("class is non-empty");
            (rep.0, rep.1, dfa)
        })
        .collect();
    reps.sort_by(|a, b| alphabet.compare_text(&a.1, &b.1));

    let exprs: Vec<PatternExpr> = reps.iter().map(|r| r.0.clone()).collect();
    let dfas: Vec<Dfa> = reps.iter().map(|r| r.2.clone()).collect();
    build_from_languages(alphabet.clone(), exprs, dfas)
}

/// Builds a hierarchy from an explicit set of patterns, computing the
/// inclusion edges. Patterns must be pairwise language-distinct.
pub fn hierarchy_from_exprs(alphabet: &Alphabet, exprs: Vec<PatternExpr>) -> Result<Hierarchy> {
    let dfas: Vec<Dfa> = exprs.iter().map(|e| Dfa::from_expr(e, alphabet.len())).collect();
    for i in 0..dfas.len() {
        for j in (i + 1)..dfas.len() {
            if dfas[i] == dfas[j] {
                return Err(GwmError::Hierarchy(format!(
                    "patterns `{}` and `{}` denote the same language",
                    exprs[i].render(alphabet),
                    exprs[j].render(alphabet)
                )));
            }
        }
    }
    build_from_languages(alphabet.clone(), exprs, dfas)
}

fn ordered_selections(k: usize) -> Vec<Vec<u8>> {
    // All permutations of all non-empty subsets of 0..k.
    let mut out = Vec::new();
    let mut current: Vec<u8> = Vec::new();
    let mut used = vec![false; k];
    fn recurse(k: usize, current: &mut Vec<u8>, used: &mut [bool], out: &mut Vec<Vec<u8>>) {
        if !current.is_empty() {
            out.push(current.clone());
        }
        if current.len() == k {
            return;
        }
        for s in 0..k {
            if !used[s] {
                used[s] = true;
                current.push(s as u8);
                recurse(k, current, used, out);
                current.pop();
                used[s] = false;
            }
        }
    }
    recurse(k, &mut current, &mut used, &mut out);
    out
}

/// Fixed-width bitset rows over node indices.
struct BitMatrix {
    words: usize,
    rows: Vec<u64>,
}

impl BitMatrix {
    fn new(n: usize) -> Self {
        let words = n.div_ceil(64);
        Self { words, rows: vec![0; n * words] }
    }
    fn set(&mut self, row: usize, col: usize) {
        self.rows[row * self.words + col / 64] |= 1 << (col % 64);
    }
    fn get(&self, row: usize, col: usize) -> bool {
        self.rows[row * self.words + col / 64] & (1 << (col % 64)) != 0
    }
    fn row(&self, row: usize) -> &[u64] {
        &self.rows[row * self.words..(row + 1) * self.words]
    }
    fn count_row(&self, row: usize) -> usize {
        self.row(row).iter().map(|w| w.count_ones() as usize).sum()
    }
}

fn rows_intersect(a: &BitMatrix, ra: usize, b: &BitMatrix, rb: usize) -> bool {
    a.row(ra).iter().zip(b.row(rb)).any(|(x, y)| x & y != 0)
}

fn build_from_languages(alphabet: Alphabet, exprs: Vec<PatternExpr>, dfas: Vec<Dfa>) -> Result<Hierarchy> {
    let n = exprs.len();
    if n == 0 {
        return Err(GwmError::Hierarchy("hierarchy must contain at least one pattern".into()));
    }

    // Cheap necessary conditions for L(j) ⊆ L(i), to skip product walks.
    let nullable: Vec<bool> = dfas.iter().map(|d| d.accepts_empty()).collect();
    let min_len: Vec<usize> = dfas.iter().map(|d| d.min_accepted_len().unwrap_or(usize::MAX)).collect();
    let symbols: Vec<u32> = dfas.iter().map(|d| d.usable_symbols()).collect();

    // sub.get(i, j) ⟺ L(j) ⊊ L(i); anc is the transpose.
    let mut sub = BitMatrix::new(n);
    let mut anc = BitMatrix::new(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let i_maybe_super = !nullable[j] | nullable[i];
            let i_maybe_super =
                i_maybe_super && symbols[j] & !symbols[i] == 0 && min_len[i] <= min_len[j];
            let j_maybe_super = !nullable[i] | nullable[j];
            let j_maybe_super =
                j_maybe_super && symbols[i] & !symbols[j] == 0 && min_len[j] <= min_len[i];
            if !i_maybe_super && !j_maybe_super {
                continue;
            }
            match dfas[i].compare(&dfas[j]) {
                LanguageRelation::StrictSuperset => {
                    sub.set(i, j);
                    anc.set(j, i);
                }
                LanguageRelation::StrictSubset => {
                    sub.set(j, i);
                    anc.set(i, j);
                }
                LanguageRelation::Incomparable => {}
                LanguageRelation::Equal => {
                    return Err(GwmError::Hierarchy(format!(
                        "patterns `{}` and `{}` denote the same language",
                        exprs[i].render(&alphabet),
                        exprs[j].render(&alphabet)
                    )));
                }
            }
        }
    }

    // Single root: the node with no ancestors.
    let roots: Vec<usize> = (0..n).filter(|&i| anc.count_row(i) == 0).collect();
    if roots.len() != 1 {
        return Err(GwmError::Hierarchy(format!(
            "hierarchy must have exactly one root, found {}",
            roots.len()
        )));
    }

    // Hasse parents: minimal strict supersets. p is a parent of q iff
    // q ⊊ p and no r satisfies q ⊊ r ⊊ p, i.e. anc(q) ∩ sub(p) is empty.
    let mut parents: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    for q in 0..n {
        for p in 0..n {
            if anc.get(q, p) && !rows_intersect(&anc, q, &sub, p) {
                parents[q].push(p);
                children[p].push(q);
            }
        }
    }

    // Depth = longest root path; process in order of ancestor count, which
    // strictly increases along inclusion chains.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| anc.count_row(i));
    let mut depth = vec![0usize; n];
    for &i in &order {
        depth[i] = parents[i].iter().map(|&p| depth[p] + 1).max().unwrap_or(0);
    }

    // Canonical ids: by depth, then text in alphabet rank order.
    let mut ids: Vec<usize> = (0..n).collect();
    let texts: Vec<String> = exprs.iter().map(|e| e.render(&alphabet)).collect();
    ids.sort_by(|&a, &b| depth[a].cmp(&depth[b]).then(alphabet.compare_text(&texts[a], &texts[b])));
    let mut new_id = vec![0usize; n];
    for (fresh, &old) in ids.iter().enumerate() {
        new_id[old] = fresh;
    }

    let mut nodes: Vec<HierarchyNode> = Vec::with_capacity(n);
    let mut out_dfas: Vec<Dfa> = Vec::with_capacity(n);
    for (fresh, &old) in ids.iter().enumerate() {
        let mut p: Vec<usize> = parents[old].iter().map(|&x| new_id[x]).collect();
        let mut c: Vec<usize> = children[old].iter().map(|&x| new_id[x]).collect();
        p.sort_unstable();
        c.sort_unstable();
        nodes.push(HierarchyNode {
            id: fresh,
            expr: exprs[old].clone(),
            text: texts[old].clone(),
            depth: depth[old],
            parents: p,
            children: c,
        });
        out_dfas.push(dfas[old].clone());
    }

    let usable: Vec<u32> = out_dfas.iter().map(|d| d.usable_symbols()).collect();
    // Deepest nodes first: subtree depth then explore order, children before
    // parents thanks to the reverse id sweep (parents have smaller ids only
    // by depth, so sweep by descending depth explicitly).
    let mut by_depth_desc: Vec<usize> = (0..n).collect();
    by_depth_desc.sort_by(|&a, &b| nodes[b].depth.cmp(&nodes[a].depth));
    let mut subtree_depth: Vec<usize> = nodes.iter().map(|nd| nd.depth).collect();
    for &id in &by_depth_desc {
        for &c in &nodes[id].children {
            subtree_depth[id] = subtree_depth[id].max(subtree_depth[c]);
        }
    }
    let explore: Vec<Vec<usize>> = nodes
        .iter()
        .map(|nd| {
            let mut order = nd.children.clone();
            order.sort_by(|&a, &b| subtree_depth[b].cmp(&subtree_depth[a]).then(a.cmp(&b)));
            order
        })
        .collect();

    Ok(Hierarchy { alphabet, nodes, dfas: out_dfas, usable, subtree_depth, explore })
}

impl Hierarchy {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// The unique depth-0 node.
    pub fn root(&self) -> usize {
        0
    }

    pub fn node(&self, id: usize) -> &HierarchyNode {
        &self.nodes[id]
    }

    pub fn dfa(&self, id: usize) -> &Dfa {
        &self.dfas[id]
    }

    /// Looks a pattern up by language, not by text.
    pub fn find_by_language(&self, expr: &PatternExpr) -> Option<usize> {
        let dfa = Dfa::from_expr(expr, self.alphabet.len());
        self.dfas.iter().position(|d| *d == dfa)
    }

    pub fn find_by_text(&self, text: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.text == text)
    }

    /// True iff `s` is in the language of node `id`.
    pub fn matches(&self, id: usize, s: &str) -> Result<bool> {
        let symbols = self.alphabet.index_string(s)?;
        Ok(self.dfas[id].matches(&symbols))
    }

    /// `true` iff `L(child) ⊆ L(parent)`.
    pub fn language_includes(&self, parent: usize, child: usize) -> bool {
        self.dfas[parent].includes(&self.dfas[child])
    }

    /// Most specific matching node for `s`.
    ///
    /// The walk starts at the root and only descends into matching children;
    /// inclusion ordering guarantees every matching node is reached that
    /// way. Branches are skipped when no descendant can beat the best match
    /// found so far (subtree depth bound) or when the string uses symbols
    /// the branch's languages never produce.
    pub fn classify(&self, s: &str) -> Result<usize> {
        if s.is_empty() {
            return Err(GwmError::Hierarchy("cannot classify an empty string".into()));
        }
        let symbols = self.alphabet.index_string(s)?;
        if !self.dfas[self.root()].matches(&symbols) {
            return Err(GwmError::Hierarchy(format!("no hierarchy node matches `{s}`")));
        }
        let mut mask = 0u32;
        for &sym in &symbols {
            mask |= 1 << sym;
        }
        let mut best = self.root();
        let mut visited = vec![false; self.nodes.len()];
        let mut stack = vec![self.root()];
        visited[self.root()] = true;
        while let Some(n) = stack.pop() {
            for &c in &self.explore[n] {
                if visited[c] {
                    continue;
                }
                if self.subtree_depth[c] < self.nodes[best].depth || mask & !self.usable[c] != 0 {
                    continue;
                }
                visited[c] = true;
                if self.dfas[c].matches(&symbols) {
                    let node = &self.nodes[c];
                    let cur = &self.nodes[best];
                    if node.depth > cur.depth || (node.depth == cur.depth && c < best) {
                        best = c;
                    }
                    stack.push(c);
                }
            }
        }
        Ok(best)
    }

    /// Classifies every item of a dataset.
    pub fn classify_all(&self, dataset: &Dataset) -> Result<Classification> {
        let mut node_of_item = Vec::with_capacity(dataset.items.len());
        let mut members = vec![Vec::new(); self.nodes.len()];
        for (idx, item) in dataset.items.iter().enumerate() {
            let node = self.classify(&item.sequence)?;
            node_of_item.push(node);
            members[node].push(idx);
        }
        Ok(Classification { node_of_item, members })
    }

    /// JSON export with stable field order.
    pub fn to_json(&self) -> serde_json::Value {
        let nodes: Vec<serde_json::Value> = self
            .nodes
            .iter()
            .map(|n| {
                serde_json::json!({
                    "id": n.id,
                    "expr": n.text,
                    "depth": n.depth,
                })
            })
            .collect();
        let mut edges = Vec::new();
        for n in &self.nodes {
            for &c in &n.children {
                edges.push(serde_json::json!({"parent": n.id, "child": c}));
            }
        }
        serde_json::json!({
            "alphabet": self.alphabet.to_string(),
            "nodes": nodes,
            "edges": edges,
        })
    }

    /// Loads a hierarchy from the JSON produced by [`Hierarchy::to_json`].
    /// Edges are recomputed from the pattern languages, which also validates
    /// that the listed patterns form a single-rooted lattice.
    pub fn from_json(value: &serde_json::Value) -> Result<Hierarchy> {
        let alphabet = Alphabet::parse(
            value
                .get("alphabet")
                .and_then(|v| v.as_str())
                .ok_or_else(|| GwmError::Hierarchy("missing `alphabet` field".into()))?,
        )?;
        let nodes = value
            .get("nodes")
            .and_then(|v| v.as_array())
            .ok_or_else(|| GwmError::Hierarchy("missing `nodes` array".into()))?;
        let mut exprs = Vec::new();
        for n in nodes {
            let text = n
                .get("expr")
                .and_then(|v| v.as_str())
                .ok_or_else(|| GwmError::Hierarchy("node without `expr`".into()))?;
            exprs.push(PatternExpr::parse(text, &alphabet)?);
        }
        hierarchy_from_exprs(&alphabet, exprs)
    }

    /// Loads a hierarchy from CSV with columns `id,expr,parent_ids`
    /// (parent ids `;`-separated, informational only — edges are recomputed).
    pub fn from_csv(alphabet: &Alphabet, data: &str) -> Result<Hierarchy> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(data.as_bytes());
        let mut exprs = Vec::new();
        for record in reader.records() {
            let record = record?;
            let text = record
                .get(1)
                .ok_or_else(|| GwmError::Hierarchy("csv row missing `expr` column".into()))?;
            exprs.push(PatternExpr::parse(text, alphabet)?);
        }
        hierarchy_from_exprs(alphabet, exprs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_symbol_alphabet_has_two_nodes() {
        let h = enumerate_hierarchy(&Alphabet::parse("A").unwrap()).unwrap();
        let texts: Vec<&str> = h.nodes.iter().map(|n| n.text.as_str()).collect();
        assert_eq!(texts, vec!["A*", "A"]);
        assert_eq!(h.nodes[0].depth, 0);
        assert_eq!(h.nodes[1].depth, 1);
    }

    #[test]
    fn two_symbol_alphabet_has_nineteen_nodes() {
        let h = enumerate_hierarchy(&Alphabet::parse("AB").unwrap()).unwrap();
        assert_eq!(h.len(), 19);
        let mut texts: Vec<&str> = h.nodes.iter().map(|n| n.text.as_str()).collect();
        texts.sort_unstable();
        let mut expected = vec![
            "A", "B", "AB", "BA", "A*", "B*", "A*B", "AB*", "B*A", "BA*", "A*B*", "B*A*", "(AB)*",
            "(BA)*", "(A*B)*", "(AB*)*", "(B*A)*", "(BA*)*", "(A*B*)*",
        ];
        expected.sort_unstable();
        assert_eq!(texts, expected);
        assert_eq!(h.nodes[h.root()].text, "(A*B*)*");
    }

    #[test]
    fn edges_are_a_transitive_reduction() {
        let h = enumerate_hierarchy(&Alphabet::parse("AB").unwrap()).unwrap();
        for n in &h.nodes {
            for &c in &n.children {
                assert!(h.language_includes(n.id, c));
                assert!(!h.language_includes(c, n.id));
                // No third node q with child ⊂ q ⊂ parent.
                for q in &h.nodes {
                    if q.id == n.id || q.id == c {
                        continue;
                    }
                    let between = h.language_includes(n.id, q.id)
                        && !h.language_includes(q.id, n.id)
                        && h.language_includes(q.id, c)
                        && !h.language_includes(c, q.id);
                    assert!(!between, "{} sits between {} and {}", q.text, n.text, h.nodes[c].text);
                }
            }
        }
    }

    #[test]
    fn depth_is_longest_root_path() {
        let h = enumerate_hierarchy(&Alphabet::parse("AB").unwrap()).unwrap();
        for n in &h.nodes {
            if n.id == h.root() {
                assert!(n.parents.is_empty());
                continue;
            }
            let expect = n.parents.iter().map(|&p| h.nodes[p].depth + 1).max().unwrap();
            assert_eq!(n.depth, expect, "depth of {}", n.text);
        }
        // Anchors from the lattice over {A,B}.
        assert_eq!(h.nodes[h.find_by_text("A*B").unwrap()].depth, 2);
        assert_eq!(h.nodes[h.find_by_text("A").unwrap()].depth, 3);
    }

    #[test]
    fn classification_picks_the_most_specific_node() {
        let h = enumerate_hierarchy(&Alphabet::parse("AB").unwrap()).unwrap();
        let cases = [
            ("AAAAB", "A*B"),
            ("A", "A"),
            ("AABBB", "A*B*"),
            ("ABAB", "(AB)*"),
            ("BBB", "B*"),
        ];
        for (s, expected) in cases {
            let id = h.classify(s).unwrap();
            assert_eq!(h.nodes[id].text, expected, "classify({s})");
        }
    }

    #[test]
    fn classification_brute_force_agreement() {
        // The pruned walk must agree with a scan over all nodes.
        let h = enumerate_hierarchy(&Alphabet::parse("AB").unwrap()).unwrap();
        let mut strings = Vec::new();
        for len in 1..=7usize {
            for bits in 0..(1usize << len) {
                let s: String =
                    (0..len).map(|i| if bits >> i & 1 == 0 { 'A' } else { 'B' }).collect();
                strings.push(s);
            }
        }
        for s in &strings {
            let fast = h.classify(s).unwrap();
            let brute = h
                .nodes
                .iter()
                .filter(|n| h.matches(n.id, s).unwrap())
                .max_by(|a, b| a.depth.cmp(&b.depth).then(b.id.cmp(&a.id)))
                .unwrap()
                .id;
            assert_eq!(fast, brute, "classify({s})");
        }
    }

    #[test]
    fn classification_rejects_foreign_and_empty() {
        let h = enumerate_hierarchy(&Alphabet::parse("AB").unwrap()).unwrap();
        assert!(h.classify("AXB").is_err());
        assert!(h.classify("").is_err());
    }

    #[test]
    fn three_symbol_anchors() {
        let alphabet = Alphabet::parse("SML").unwrap();
        let h = enumerate_hierarchy(&alphabet).unwrap();
        // Every pattern quoted for this alphabet must be present as a language.
        for text in [
            "S*", "L*", "M*", "L*M*", "L*S*", "(M*S*)*", "(S*M*L*)*", "ML", "(ML)*", "M*L",
            "(M*L)*", "M*L*", "(M*L*)*", "(MS*L*)*", "(M*S)*", "S*L*", "(SL)*",
        ] {
            let expr = PatternExpr::parse(text, &alphabet).unwrap();
            assert!(h.find_by_language(&expr).is_some(), "missing {text}");
        }
        assert_eq!(h.nodes[h.root()].text, "(S*M*L*)*");
        assert_eq!(h.nodes[h.classify("MLLL").unwrap()].text, "ML*");
        assert_eq!(h.nodes[h.classify("MMMMMMM").unwrap()].text, "M*");
    }

    #[test]
    fn json_round_trip_preserves_structure() {
        let h = enumerate_hierarchy(&Alphabet::parse("AB").unwrap()).unwrap();
        let json = h.to_json();
        let back = Hierarchy::from_json(&json).unwrap();
        assert_eq!(back.len(), h.len());
        for (a, b) in h.nodes.iter().zip(back.nodes.iter()) {
            assert_eq!(a.text, b.text);
            assert_eq!(a.depth, b.depth);
            assert_eq!(a.parents, b.parents);
        }
    }

    #[test]
    fn custom_hierarchy_from_exprs() {
        let alphabet = Alphabet::parse("ML").unwrap();
        let exprs: Vec<PatternExpr> = ["ML", "(ML)*", "M*L", "(M*L)*", "M*L*", "(M*L*)*"]
            .iter()
            .map(|t| PatternExpr::parse(t, &alphabet).unwrap())
            .collect();
        let h = hierarchy_from_exprs(&alphabet, exprs).unwrap();
        assert_eq!(h.len(), 6);
        assert_eq!(h.nodes[h.root()].text, "(M*L*)*");
        let by_text = |t: &str| h.find_by_text(t).unwrap();
        let parent_texts = |t: &str| -> Vec<String> {
            h.nodes[by_text(t)].parents.iter().map(|&p| h.nodes[p].text.clone()).collect()
        };
        assert_eq!(parent_texts("ML"), vec!["M*L".to_string(), "(ML)*".to_string()]);
        assert_eq!(parent_texts("M*L"), vec!["M*L*".to_string(), "(M*L)*".to_string()]);
        assert_eq!(parent_texts("(ML)*"), vec!["(M*L)*".to_string()]);
        assert_eq!(h.nodes[by_text("ML")].depth, 3);
    }

    #[test]
    fn duplicate_language_is_rejected() {
        let alphabet = Alphabet::parse("AB").unwrap();
        let exprs = vec![
            PatternExpr::parse("(A*B*)*", &alphabet).unwrap(),
            PatternExpr::parse("(B*A*)*", &alphabet).unwrap(),
        ];
        assert!(hierarchy_from_exprs(&alphabet, exprs).is_err());
    }
}
