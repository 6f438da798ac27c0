//! Finite automata for the restricted pattern language.
//!
//! Every [`PatternExpr`] compiles to a minimal complete DFA. Matching runs in
//! O(|s|) with no backtracking, language equivalence is decided by comparing
//! canonical minimal DFAs, and inclusion by a product-state walk. The
//! automata are tiny (at most |Σ|+1 NFA states), so all of this is cheap
//! enough to run over every pair of nodes in a hierarchy.

use std::collections::{HashMap, VecDeque};

use crate::pattern::PatternExpr;

/// A complete DFA over symbol indices `0..alphabet_size`.
///
/// State 0 is the start state. Transitions are dense:
/// `transitions[state * alphabet_size + symbol]`. A dead state is included
/// whenever needed, so every state has a transition on every symbol.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Dfa {
    pub alphabet_size: usize,
    pub accepting: Vec<bool>,
    pub transitions: Vec<u32>,
}

impl Dfa {
    pub fn state_count(&self) -> usize {
        self.accepting.len()
    }

    #[inline]
    fn step(&self, state: u32, symbol: u8) -> u32 {
        self.transitions[state as usize * self.alphabet_size + symbol as usize]
    }

    /// Runs the DFA over a string of symbol indices.
    pub fn matches(&self, symbols: &[u8]) -> bool {
        let mut state = 0u32;
        for &s in symbols {
            state = self.step(state, s);
        }
        self.accepting[state as usize]
    }

    pub fn accepts_empty(&self) -> bool {
        self.accepting[0]
    }

    /// Compiles a pattern using a Glushkov-style position automaton followed
    /// by subset construction and minimization.
    ///
    /// Position NFA: state 0 is "nothing consumed"; state i (1-based) is
    /// "just consumed atom i". From a position, the next consumable atoms are
    /// atom i itself (if starred) and each following atom up to and including
    /// the first unstarred one. A position accepts when every remaining atom
    /// is starred. The outer star copies the initial transitions onto every
    /// accepting position and makes the start accepting.
    pub fn from_expr(expr: &PatternExpr, alphabet_size: usize) -> Self {
        let m = expr.atoms.len();
        // nfa[state] = list of (symbol, to)
        let mut nfa: Vec<Vec<(u8, usize)>> = vec![Vec::new(); m + 1];
        let reachable_from = |i: usize| -> Vec<(u8, usize)> {
            let mut out = Vec::new();
            for (j, atom) in expr.atoms.iter().enumerate().skip(i) {
                out.push((atom.symbol, j + 1));
                if !atom.starred {
                    break;
                }
            }
            out
        };
        for i in 0..=m {
            if i > 0 && expr.atoms[i - 1].starred {
                nfa[i].push((expr.atoms[i - 1].symbol, i));
            }
            nfa[i].extend(reachable_from(i));
        }
        let mut accepting_pos: Vec<bool> = (0..=m)
            .map(|i| expr.atoms[i..].iter().all(|a| a.starred))
            .collect();
        if expr.outer_star {
            let initial = nfa[0].clone();
            for i in 0..=m {
                if accepting_pos[i] {
                    for &(sym, to) in &initial {
                        if !nfa[i].contains(&(sym, to)) {
                            nfa[i].push((sym, to));
                        }
                    }
                }
            }
            accepting_pos[0] = true;
        }

        Self::determinize(&nfa, &accepting_pos, alphabet_size).minimized()
    }

    fn determinize(nfa: &[Vec<(u8, usize)>], accepting_pos: &[bool], alphabet_size: usize) -> Self {
        let start: u64 = 1; // bitmask over NFA states (at most 6 of them)
        let mut ids: HashMap<u64, u32> = HashMap::new();
        let mut subsets: Vec<u64> = Vec::new();
        let mut transitions: Vec<u32> = Vec::new();
        let mut accepting: Vec<bool> = Vec::new();
        let mut queue = VecDeque::new();

        let intern = |mask: u64,
                          ids: &mut HashMap<u64, u32>,
                          subsets: &mut Vec<u64>,
                          transitions: &mut Vec<u32>,
                          accepting: &mut Vec<bool>,
                          queue: &mut VecDeque<u64>|
         -> u32 {
            *ids.entry(mask).or_insert_with(|| {
                let id = subsets.len() as u32;
                subsets.push(mask);
                transitions.extend(std::iter::repeat(0).take(alphabet_size));
                let acc = (0..nfa.len()).any(|i| mask & (1 << i) != 0 && accepting_pos[i]);
                accepting.push(acc);
                queue.push_back(mask);
                id
            })
        };

        intern(start, &mut ids, &mut subsets, &mut transitions, &mut accepting, &mut queue);
        while let Some(mask) = queue.pop_front() {
            let from = ids[&mask];
            for sym in 0..alphabet_size as u8 {
                let mut next = 0u64;
                for i in 0..nfa.len() {
                    if mask & (1 << i) != 0 {
                        for &(s, to) in &nfa[i] {
                            if s == sym {
                                next |= 1 << to;
                            }
                        }
                    }
                }
                let to_id = intern(next, &mut ids, &mut subsets, &mut transitions, &mut accepting, &mut queue);
                transitions[from as usize * alphabet_size + sym as usize] = to_id;
            }
        }

        Dfa { alphabet_size, accepting, transitions }
    }

    /// Moore partition refinement followed by canonical BFS renumbering.
    /// Two patterns denote the same language iff their minimized DFAs are
    /// structurally equal.
    pub fn minimized(&self) -> Self {
        let n = self.state_count();
        // Initial partition: accepting vs not.
        let mut class: Vec<u32> = self.accepting.iter().map(|&a| u32::from(a)).collect();
        let mut class_count = 2;
        loop {
            let mut signature_ids: HashMap<(u32, Vec<u32>), u32> = HashMap::new();
            let mut next_class = vec![0u32; n];
            for s in 0..n {
                let sig: Vec<u32> = (0..self.alphabet_size)
                    .map(|sym| class[self.transitions[s * self.alphabet_size + sym] as usize])
                    .collect();
                let key = (class[s], sig);
                let next_id = signature_ids.len() as u32;
                next_class[s] = *signature_ids.entry(key).or_insert(next_id);
            }
            let new_count = signature_ids.len();
            class = next_class;
            if new_count == class_count {
                break;
            }
            class_count = new_count;
        }

        // Build the quotient automaton.
        let mut q_transitions = vec![0u32; class_count * self.alphabet_size];
        let mut q_accepting = vec![false; class_count];
        for s in 0..n {
            let c = class[s] as usize;
            q_accepting[c] = self.accepting[s];
            for sym in 0..self.alphabet_size {
                q_transitions[c * self.alphabet_size + sym] =
                    class[self.transitions[s * self.alphabet_size + sym] as usize];
            }
        }
        let quotient = Dfa {
            alphabet_size: self.alphabet_size,
            accepting: q_accepting,
            transitions: q_transitions,
        };
        quotient.bfs_renumbered(class[0])
    }

    fn bfs_renumbered(&self, start: u32) -> Self {
        let n = self.state_count();
        let mut order = vec![u32::MAX; n];
        let mut seen = 0u32;
        let mut queue = VecDeque::new();
        order[start as usize] = 0;
        seen += 1;
        queue.push_back(start);
        while let Some(s) = queue.pop_front() {
            for sym in 0..self.alphabet_size {
                let t = self.transitions[s as usize * self.alphabet_size + sym];
                if order[t as usize] == u32::MAX {
                    order[t as usize] = seen;
                    seen += 1;
                    queue.push_back(t);
                }
            }
        }
        // Unreachable states are dropped.
        let m = seen as usize;
        let mut accepting = vec![false; m];
        let mut transitions = vec![0u32; m * self.alphabet_size];
        for s in 0..n {
            let new_s = order[s];
            if new_s == u32::MAX {
                continue;
            }
            accepting[new_s as usize] = self.accepting[s];
            for sym in 0..self.alphabet_size {
                transitions[new_s as usize * self.alphabet_size + sym] =
                    order[self.transitions[s * self.alphabet_size + sym] as usize];
            }
        }
        Dfa { alphabet_size: self.alphabet_size, accepting, transitions }
    }

    /// Relation between two languages, decided in one product walk.
    ///
    /// Minimized pattern DFAs stay tiny, so the walk runs on fixed stack
    /// buffers; this is the hot path of hierarchy construction (it runs for
    /// every node pair).
    pub fn compare(&self, other: &Dfa) -> LanguageRelation {
        debug_assert_eq!(self.alphabet_size, other.alphabet_size);
        let nb = other.state_count();
        let total = self.state_count() * nb;
        if total > 4096 {
            return self.compare_general(other);
        }
        let mut seen = [0u64; 64];
        let mut stack = [(0u16, 0u16); 4096];
        let mut sp = 1usize;
        seen[0] = 1;
        let mut left_only = false; // some string in L(self) \ L(other)
        let mut right_only = false;
        while sp > 0 {
            sp -= 1;
            let (a, b) = stack[sp];
            match (self.accepting[a as usize], other.accepting[b as usize]) {
                (true, false) => left_only = true,
                (false, true) => right_only = true,
                _ => {}
            }
            if left_only && right_only {
                return LanguageRelation::Incomparable;
            }
            for sym in 0..self.alphabet_size as u8 {
                let na = self.step(a as u32, sym);
                let nbx = other.step(b as u32, sym);
                let idx = na as usize * nb + nbx as usize;
                if seen[idx >> 6] & (1 << (idx & 63)) == 0 {
                    seen[idx >> 6] |= 1 << (idx & 63);
                    stack[sp] = (na as u16, nbx as u16);
                    sp += 1;
                }
            }
        }
        match (left_only, right_only) {
            (false, false) => LanguageRelation::Equal,
            (true, false) => LanguageRelation::StrictSuperset,
            (false, true) => LanguageRelation::StrictSubset,
            (true, true) => LanguageRelation::Incomparable,
        }
    }

    fn compare_general(&self, other: &Dfa) -> LanguageRelation {
        let mut left_only = false;
        let mut right_only = false;
        let cols = other.state_count() as u64;
        let mut seen: HashMap<u64, ()> = HashMap::new();
        let mut queue = VecDeque::new();
        queue.push_back((0u32, 0u32));
        seen.insert(0, ());
        while let Some((a, b)) = queue.pop_front() {
            match (self.accepting[a as usize], other.accepting[b as usize]) {
                (true, false) => left_only = true,
                (false, true) => right_only = true,
                _ => {}
            }
            if left_only && right_only {
                return LanguageRelation::Incomparable;
            }
            for sym in 0..self.alphabet_size as u8 {
                let na = self.step(a, sym);
                let nb = other.step(b, sym);
                let key = na as u64 * cols + nb as u64;
                if seen.insert(key, ()).is_none() {
                    queue.push_back((na, nb));
                }
            }
        }
        match (left_only, right_only) {
            (false, false) => LanguageRelation::Equal,
            (true, false) => LanguageRelation::StrictSuperset,
            (false, true) => LanguageRelation::StrictSubset,
            (true, true) => LanguageRelation::Incomparable,
        }
    }

    /// `true` iff `L(self) ⊇ L(other)`.
    pub fn includes(&self, other: &Dfa) -> bool {
        matches!(self.compare(other), LanguageRelation::Equal | LanguageRelation::StrictSuperset)
    }

    /// Length of a shortest accepted string, if the language is non-empty.
    pub fn min_accepted_len(&self) -> Option<usize> {
        let mut dist = vec![usize::MAX; self.state_count()];
        let mut queue = VecDeque::new();
        dist[0] = 0;
        queue.push_back(0u32);
        while let Some(s) = queue.pop_front() {
            if self.accepting[s as usize] {
                return Some(dist[s as usize]);
            }
            for sym in 0..self.alphabet_size as u8 {
                let t = self.step(s, sym);
                if dist[t as usize] == usize::MAX {
                    dist[t as usize] = dist[s as usize] + 1;
                    queue.push_back(t);
                }
            }
        }
        None
    }

    /// Bitmask of symbols that occur in at least one accepted string.
    pub fn usable_symbols(&self) -> u32 {
        // A transition is usable when its source is reachable from the start
        // and its target can reach an accepting state.
        let n = self.state_count();
        let mut can_accept = vec![false; n];
        loop {
            let mut changed = false;
            for s in 0..n {
                if can_accept[s] {
                    continue;
                }
                if self.accepting[s]
                    || (0..self.alphabet_size)
                        .any(|sym| can_accept[self.transitions[s * self.alphabet_size + sym] as usize])
                {
                    can_accept[s] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let mut mask = 0u32;
        // All states are reachable after BFS renumbering.
        for s in 0..n {
            for sym in 0..self.alphabet_size {
                let t = self.transitions[s * self.alphabet_size + sym] as usize;
                if can_accept[t] {
                    mask |= 1 << sym;
                }
            }
        }
        mask
    }
}

/// Outcome of comparing two languages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LanguageRelation {
    Equal,
    /// `L(self) ⊋ L(other)`
    StrictSuperset,
    /// `L(self) ⊊ L(other)`
    StrictSubset,
    Incomparable,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::Alphabet;

    fn dfa(text: &str, alphabet: &Alphabet) -> Dfa {
        let expr = PatternExpr::parse(text, alphabet).unwrap();
        Dfa::from_expr(&expr, alphabet.len())
    }

    fn accepts(d: &Dfa, alphabet: &Alphabet, s: &str) -> bool {
        d.matches(&alphabet.index_string(s).unwrap())
    }

    #[test]
    fn matches_basic_languages() {
        let alphabet = Alphabet::parse("AB").unwrap();
        let a_star_b = dfa("A*B", &alphabet);
        assert!(accepts(&a_star_b, &alphabet, "AAAAB"));
        assert!(accepts(&a_star_b, &alphabet, "B"));
        assert!(!accepts(&a_star_b, &alphabet, "ABB"));
        assert!(!accepts(&a_star_b, &alphabet, "BA"));
        assert!(!accepts(&a_star_b, &alphabet, ""));

        let ab_star = dfa("AB*", &alphabet);
        assert!(accepts(&ab_star, &alphabet, "A"));
        assert!(accepts(&ab_star, &alphabet, "ABBB"));
        assert!(!accepts(&ab_star, &alphabet, "B"));
    }

    #[test]
    fn empty_string_membership_follows_nullability() {
        let alphabet = Alphabet::parse("AB").unwrap();
        assert!(dfa("(AB)*", &alphabet).accepts_empty());
        assert!(dfa("A*B*", &alphabet).accepts_empty());
        assert!(!dfa("A*B", &alphabet).accepts_empty());
    }

    #[test]
    fn outer_star_repeats_the_body() {
        let alphabet = Alphabet::parse("AB").unwrap();
        let d = dfa("(A*B)*", &alphabet);
        for s in ["", "B", "AB", "BAB", "AABAB"] {
            assert!(accepts(&d, &alphabet, s), "{s}");
        }
        for s in ["A", "BA", "ABA"] {
            assert!(!accepts(&d, &alphabet, s), "{s}");
        }
    }

    #[test]
    fn star_variants_of_one_symbol_collapse() {
        let alphabet = Alphabet::parse("A").unwrap();
        let a_star = dfa("A*", &alphabet);
        let grouped = dfa("(A)*", &alphabet);
        let double = dfa("(A*)*", &alphabet);
        assert_eq!(a_star, grouped);
        assert_eq!(a_star, double);
        assert_ne!(a_star, dfa("A", &alphabet));
    }

    #[test]
    fn universal_language_is_order_independent() {
        let alphabet = Alphabet::parse("AB").unwrap();
        assert_eq!(dfa("(A*B*)*", &alphabet), dfa("(B*A*)*", &alphabet));
        assert_eq!(dfa("(A*B*)*", &alphabet).compare(&dfa("(B*A*)*", &alphabet)), LanguageRelation::Equal);
    }

    #[test]
    fn inclusion_matches_bounded_enumeration() {
        let alphabet = Alphabet::parse("AB").unwrap();
        let exprs = [
            "A", "B", "AB", "BA", "A*", "B*", "A*B", "AB*", "B*A", "BA*", "A*B*", "B*A*", "(AB)*",
            "(BA)*", "(A*B)*", "(AB*)*", "(B*A)*", "(BA*)*", "(A*B*)*",
        ];
        let dfas: Vec<Dfa> = exprs.iter().map(|t| dfa(t, &alphabet)).collect();

        // Enumerate all strings over {A,B} of length <= 6 as the oracle.
        let mut strings: Vec<Vec<u8>> = vec![vec![]];
        for len in 1..=6usize {
            let count = 2usize.pow(len as u32);
            for bits in 0..count {
                strings.push((0..len).map(|i| ((bits >> i) & 1) as u8).collect());
            }
        }

        for (i, di) in dfas.iter().enumerate() {
            for (j, dj) in dfas.iter().enumerate() {
                let claimed = di.includes(dj);
                let observed = strings.iter().all(|s| !dj.matches(s) || di.matches(s));
                // Bounded enumeration can only refute inclusion, not prove it.
                if !observed {
                    assert!(!claimed, "{} should not include {}", exprs[i], exprs[j]);
                }
                if claimed {
                    assert!(observed, "{} claims to include {}", exprs[i], exprs[j]);
                }
            }
        }

        // Two anchor cases: (A*B*)* ⊇ A*B and AB* ⊉ A*B.
        assert!(dfas[18].includes(&dfas[6]));
        assert!(!dfas[7].includes(&dfas[6]));
    }

    #[test]
    fn min_len_and_usable_symbols() {
        let alphabet = Alphabet::parse("AB").unwrap();
        assert_eq!(dfa("A*B", &alphabet).min_accepted_len(), Some(1));
        assert_eq!(dfa("AB", &alphabet).min_accepted_len(), Some(2));
        assert_eq!(dfa("(AB)*", &alphabet).min_accepted_len(), Some(0));
        assert_eq!(dfa("A*", &alphabet).usable_symbols(), 0b01);
        assert_eq!(dfa("(A*B)*", &alphabet).usable_symbols(), 0b11);
    }
}
