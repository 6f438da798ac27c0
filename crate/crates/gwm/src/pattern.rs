//! Restricted regular expressions.
//!
//! The pattern language is deliberately small: a pattern is an ordered
//! selection of distinct alphabet symbols, each optionally Kleene-starred,
//! with the whole body optionally wrapped in one starred group. Examples over
//! `{A, B}`: `A`, `AB`, `A*B`, `(AB)*`, `(A*B*)*`. Nested or partial
//! grouping (`(AB)*C*`) is outside the language.

use serde::{Deserialize, Serialize};

use crate::alphabet::Alphabet;
use crate::error::{GwmError, Result};

/// One symbol occurrence in a pattern, possibly starred.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Atom {
    /// Index into the alphabet.
    pub symbol: u8,
    pub starred: bool,
}

/// A restricted regular expression over some [`Alphabet`].
///
/// Invariants: 1..=|alphabet| atoms, no repeated symbol, and the total star
/// count (atom stars plus the outer star) is at most |alphabet| + 1 — which
/// the shape of the grammar already guarantees.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PatternExpr {
    pub atoms: Vec<Atom>,
    pub outer_star: bool,
}

impl PatternExpr {
    pub fn new(atoms: Vec<Atom>, outer_star: bool) -> Result<Self> {
        if atoms.is_empty() {
            return Err(GwmError::Pattern {
                expr: String::new(),
                message: "pattern must contain at least one symbol".into(),
            });
        }
        for (i, a) in atoms.iter().enumerate() {
            if atoms[..i].iter().any(|b| b.symbol == a.symbol) {
                return Err(GwmError::Pattern {
                    expr: String::new(),
                    message: "symbols may not repeat within a pattern".into(),
                });
            }
        }
        Ok(Self { atoms, outer_star })
    }

    /// Total number of Kleene stars, outer star included.
    pub fn star_count(&self) -> usize {
        self.atoms.iter().filter(|a| a.starred).count() + usize::from(self.outer_star)
    }

    /// True when the empty string is in the language.
    pub fn nullable(&self) -> bool {
        self.outer_star || self.atoms.iter().all(|a| a.starred)
    }

    /// Canonical text: atoms in order, `*` after starred atoms, the whole
    /// wrapped in `(...)*` iff the outer star is set.
    pub fn render(&self, alphabet: &Alphabet) -> String {
        let mut body = String::new();
        for a in &self.atoms {
            body.push(alphabet.symbol(a.symbol as usize));
            if a.starred {
                body.push('*');
            }
        }
        if self.outer_star {
            format!("({body})*")
        } else {
            body
        }
    }

    /// Parses canonical text such as `A*B` or `(M*L*)*` back into a pattern.
    pub fn parse(text: &str, alphabet: &Alphabet) -> Result<Self> {
        let err = |message: &str| GwmError::Pattern {
            expr: text.to_string(),
            message: message.to_string(),
        };
        let trimmed = text.trim();
        let (body, outer_star) = if let Some(inner) = trimmed.strip_prefix('(') {
            let inner = inner
                .strip_suffix(")*")
                .ok_or_else(|| err("group must close with `)*`"))?;
            if inner.contains('(') || inner.contains(')') {
                return Err(err("nested groups are not supported"));
            }
            (inner, true)
        } else {
            if trimmed.contains(')') {
                return Err(err("unbalanced `)`"));
            }
            (trimmed, false)
        };
        let mut atoms = Vec::new();
        let mut chars = body.chars().peekable();
        while let Some(c) = chars.next() {
            if c == '*' {
                return Err(err("`*` must follow a symbol"));
            }
            let symbol = alphabet.index_of(c)? as u8;
            let starred = chars.peek() == Some(&'*');
            if starred {
                chars.next();
            }
            atoms.push(Atom { symbol, starred });
        }
        Self::new(atoms, outer_star).map_err(|_| err("invalid atom sequence"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab() -> Alphabet {
        Alphabet::parse("AB").unwrap()
    }

    #[test]
    fn render_parse_round_trip() {
        let alphabet = ab();
        for text in ["A", "A*", "AB", "A*B", "AB*", "(AB)*", "(A*B*)*", "B*A"] {
            let e = PatternExpr::parse(text, &alphabet).unwrap();
            assert_eq!(e.render(&alphabet), text);
        }
    }

    #[test]
    fn rejects_malformed_text() {
        let alphabet = ab();
        assert!(PatternExpr::parse("", &alphabet).is_err());
        assert!(PatternExpr::parse("AX", &alphabet).is_err());
        assert!(PatternExpr::parse("(AB", &alphabet).is_err());
        assert!(PatternExpr::parse("*A", &alphabet).is_err());
        assert!(PatternExpr::parse("(A)(B)", &alphabet).is_err());
    }

    #[test]
    fn rejects_repeated_symbols() {
        let alphabet = ab();
        assert!(PatternExpr::parse("ABA", &alphabet).is_err());
    }

    #[test]
    fn nullability() {
        let alphabet = ab();
        assert!(PatternExpr::parse("(AB)*", &alphabet).unwrap().nullable());
        assert!(PatternExpr::parse("A*B*", &alphabet).unwrap().nullable());
        assert!(!PatternExpr::parse("A*B", &alphabet).unwrap().nullable());
    }

    #[test]
    fn star_count_stays_within_bound() {
        let alphabet = ab();
        let e = PatternExpr::parse("(A*B*)*", &alphabet).unwrap();
        assert_eq!(e.star_count(), 3);
        assert!(e.star_count() <= alphabet.len() + 1);
    }
}
