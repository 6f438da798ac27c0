//! Encoding alphabets.
//!
//! An [`Alphabet`] is a small ordered set of single-character symbols. The
//! declaration order is significant: it drives every canonical ordering
//! downstream (canonical pattern text, node ordering, classification
//! tie-breaks), so two runs over the same declared alphabet are always
//! byte-identical.

use serde::{Deserialize, Serialize};

use crate::error::{GwmError, Result};

/// Symbol sets beyond this size are accepted with a warning flag; the
/// hierarchy enumerator itself refuses them (the node count explodes).
pub const RECOMMENDED_MAX_SYMBOLS: usize = 5;

/// An ordered set of distinct single-character symbols.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabet {
    symbols: Vec<char>,
}

impl Alphabet {
    /// Builds an alphabet from the given symbols, preserving order.
    ///
    /// Fails on duplicates or an empty list. Sizes above
    /// [`RECOMMENDED_MAX_SYMBOLS`] are allowed (the design is extensible) but
    /// flagged by [`Alphabet::oversized`].
    pub fn new(symbols: impl IntoIterator<Item = char>) -> Result<Self> {
        let symbols: Vec<char> = symbols.into_iter().collect();
        if symbols.is_empty() {
            return Err(GwmError::Alphabet("alphabet must not be empty".into()));
        }
        for (i, s) in symbols.iter().enumerate() {
            if symbols[..i].contains(s) {
                return Err(GwmError::Alphabet(format!("duplicate symbol '{s}'")));
            }
        }
        Ok(Self { symbols })
    }

    /// Parses an alphabet from a compact string such as `"SML"`.
    pub fn parse(s: &str) -> Result<Self> {
        Self::new(s.chars())
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// True when the alphabet exceeds the size the toolchain is tuned for.
    pub fn oversized(&self) -> bool {
        self.symbols.len() > RECOMMENDED_MAX_SYMBOLS
    }

    pub fn symbols(&self) -> &[char] {
        &self.symbols
    }

    pub fn symbol(&self, index: usize) -> char {
        self.symbols[index]
    }

    /// Index of `c` in declaration order, or an error for foreign symbols.
    pub fn index_of(&self, c: char) -> Result<usize> {
        self.symbols
            .iter()
            .position(|&s| s == c)
            .ok_or(GwmError::ForeignSymbol { symbol: c })
    }

    pub fn contains(&self, c: char) -> bool {
        self.symbols.contains(&c)
    }

    /// Maps a string over this alphabet to symbol indices.
    pub fn index_string(&self, s: &str) -> Result<Vec<u8>> {
        s.chars().map(|c| self.index_of(c).map(|i| i as u8)).collect()
    }

    /// Compares two rendered pattern texts using the declared symbol order
    /// rather than char codes. Structural characters `(`, `)`, `*` rank
    /// above all symbols, so ungrouped patterns precede grouped ones; this
    /// is the order that makes `A*B*` the canonical pick over `(A*B)*` when
    /// a string matches both at equal depth.
    pub fn compare_text(&self, a: &str, b: &str) -> std::cmp::Ordering {
        let rank = |c: char| -> i32 {
            match c {
                '(' => 1000,
                ')' => 1001,
                '*' => 1002,
                _ => self.symbols.iter().position(|&s| s == c).map(|i| i as i32).unwrap_or(i32::MAX),
            }
        };
        let mut ia = a.chars().map(rank);
        let mut ib = b.chars().map(rank);
        loop {
            match (ia.next(), ib.next()) {
                (None, None) => return std::cmp::Ordering::Equal,
                (None, Some(_)) => return std::cmp::Ordering::Less,
                (Some(_), None) => return std::cmp::Ordering::Greater,
                (Some(x), Some(y)) => match x.cmp(&y) {
                    std::cmp::Ordering::Equal => continue,
                    ord => return ord,
                },
            }
        }
    }
}

impl std::fmt::Display for Alphabet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for s in &self.symbols {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}
