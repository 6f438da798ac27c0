//! Encoding raw sequences into symbol strings.
//!
//! Three encodings cover the usual inputs: categorical labels through an
//! [`EncodingMap`], numeric measurements through a [`BinSpec`], and pairs of
//! already-encoded sequences through a [`ProductMap`]. All of them are
//! length-preserving and positionwise: output symbol `i` depends only on
//! input element `i` and the fixed map.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dataset::EncodedItemset;
use crate::error::{GwmError, Result};

/// Which bin a value lying exactly on a threshold belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryRule {
    /// Thresholds open half-open bins `[lo, hi)`: a value equal to a
    /// threshold falls into the bin above it.
    #[default]
    UpperBin,
    /// Bins close as `(lo, hi]`: a value equal to a threshold falls into the
    /// bin below it.
    LowerBin,
}

/// Discretization of a numeric measure into labelled bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinSpec {
    /// Strictly ascending cut points, in units of the raw measure.
    pub thresholds: Vec<f64>,
    /// One label per bin; exactly `thresholds.len() + 1` of them.
    pub labels: Vec<char>,
    #[serde(default)]
    pub boundary_rule: BoundaryRule,
}

impl BinSpec {
    pub fn new(thresholds: Vec<f64>, labels: Vec<char>, boundary_rule: BoundaryRule) -> Result<Self> {
        if labels.len() != thresholds.len() + 1 {
            return Err(GwmError::BinSpec(format!(
                "{} thresholds require {} labels, got {}",
                thresholds.len(),
                thresholds.len() + 1,
                labels.len()
            )));
        }
        if thresholds.iter().any(|t| !t.is_finite()) {
            return Err(GwmError::BinSpec("thresholds must be finite".into()));
        }
        if thresholds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(GwmError::BinSpec("thresholds must be strictly ascending".into()));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(GwmError::BinSpec(format!("duplicate bin label '{l}'")));
            }
        }
        Ok(Self { thresholds, labels, boundary_rule })
    }

    /// The label of the unique bin containing `value`.
    pub fn label_for(&self, value: f64) -> Result<char> {
        if !value.is_finite() {
            return Err(GwmError::BinSpec(format!("cannot bin non-finite value {value}")));
        }
        let bin = match self.boundary_rule {
            BoundaryRule::UpperBin => self.thresholds.iter().take_while(|&&t| value >= t).count(),
            BoundaryRule::LowerBin => self.thresholds.iter().take_while(|&&t| value > t).count(),
        };
        Ok(self.labels[bin])
    }
}

/// Raw label → symbol mapping for categorical items.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct EncodingMap {
    pub map: BTreeMap<String, char>,
}

impl EncodingMap {
    pub fn new(pairs: impl IntoIterator<Item = (String, char)>) -> Self {
        Self { map: pairs.into_iter().collect() }
    }
}

/// Symbol-pair → product-symbol mapping for multi-variable encoding.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ProductMap {
    pub map: BTreeMap<(char, char), char>,
}

impl ProductMap {
    pub fn new(pairs: impl IntoIterator<Item = ((char, char), char)>) -> Self {
        Self { map: pairs.into_iter().collect() }
    }

    /// Distinct output symbols, in first-use order of the sorted map.
    pub fn output_symbols(&self) -> Vec<char> {
        let mut out = Vec::new();
        for &s in self.map.values() {
            if !out.contains(&s) {
                out.push(s);
            }
        }
        out
    }
}

/// Encodes categorical labels positionwise through `map`.
pub fn encode_categorical(id: &str, raw: &[&str], map: &EncodingMap) -> Result<EncodedItemset> {
    let mut sequence = String::with_capacity(raw.len());
    for (i, label) in raw.iter().enumerate() {
        match map.map.get(*label) {
            Some(&symbol) => sequence.push(symbol),
            None => {
                return Err(GwmError::Encoding {
                    position: i + 1,
                    message: format!("label `{label}` has no encoding"),
                })
            }
        }
    }
    EncodedItemset::new(id, sequence)
}

/// Encodes numeric measurements positionwise through `bins`.
pub fn encode_numeric(id: &str, raw: &[f64], bins: &BinSpec) -> Result<EncodedItemset> {
    let mut sequence = String::with_capacity(raw.len());
    for (i, &value) in raw.iter().enumerate() {
        let label = bins.label_for(value).map_err(|e| GwmError::Encoding {
            position: i + 1,
            message: e.to_string(),
        })?;
        sequence.push(label);
    }
    EncodedItemset::new(id, sequence)
}

/// Combines two equally long encoded sequences into one product sequence.
pub fn encode_product(
    seq_a: &EncodedItemset,
    seq_b: &EncodedItemset,
    product: &ProductMap,
) -> Result<EncodedItemset> {
    let a: Vec<char> = seq_a.sequence.chars().collect();
    let b: Vec<char> = seq_b.sequence.chars().collect();
    if a.len() != b.len() {
        return Err(GwmError::Encoding {
            position: a.len().min(b.len()) + 1,
            message: format!("length mismatch: {} vs {}", a.len(), b.len()),
        });
    }
    let mut sequence = String::with_capacity(a.len());
    for (i, (&x, &y)) in a.iter().zip(b.iter()).enumerate() {
        match product.map.get(&(x, y)) {
            Some(&symbol) => sequence.push(symbol),
            None => {
                return Err(GwmError::Encoding {
                    position: i + 1,
                    message: format!("pair ({x}, {y}) has no product symbol"),
                })
            }
        }
    }
    EncodedItemset::new(&seq_a.id, sequence)
}

/// Linearly interpolated quantile of already sorted values (the common
/// "type 7" convention: h = (n-1)p).
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

/// Builds a [`BinSpec`] whose thresholds are the requested quantiles of
/// `values`. Quantile fractions must be ascending and in (0, 1). Repeated
/// data can make quantiles coincide; coinciding thresholds are collapsed and
/// the corresponding labels dropped, keeping the spec valid.
pub fn build_quantile_bins(
    values: &[f64],
    fractions: &[f64],
    labels: &[char],
    boundary_rule: BoundaryRule,
) -> Result<BinSpec> {
    if values.is_empty() {
        return Err(GwmError::BinSpec("cannot take quantiles of no values".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(GwmError::BinSpec("values must be finite".into()));
    }
    if fractions.is_empty()
        || fractions.iter().any(|&f| !(0.0..1.0).contains(&f) || f == 0.0)
        || fractions.windows(2).any(|w| w[0] >= w[1])
    {
        return Err(GwmError::BinSpec("quantile fractions must be ascending within (0, 1)".into()));
    }
    if labels.len() != fractions.len() + 1 {
        return Err(GwmError::BinSpec(format!(
            "{} fractions require {} labels, got {}",
            fractions.len(),
            fractions.len() + 1,
            labels.len()
        )));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut thresholds = Vec::new();
    let mut kept_labels = vec![labels[0]];
    for (i, &f) in fractions.iter().enumerate() {
        let t = quantile_sorted(&sorted, f);
        if thresholds.last().map_or(true, |&prev| t > prev) {
            thresholds.push(t);
            kept_labels.push(labels[i + 1]);
        } else {
            // Degenerate quantile: the bin between two equal cut points is
            // empty, so its label is dropped.
            *kept_labels.last_mut().unwrap() = labels[i + 1];
        }
    }
    BinSpec::new(thresholds, kept_labels, boundary_rule)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::Alphabet;

    #[test]
    fn categorical_example() {
        let map = EncodingMap::new([
            ("Alice".to_string(), 'D'),
            ("Bob".to_string(), 'R'),
            ("Carol".to_string(), 'R'),
        ]);
        let out = encode_categorical("p1", &["Alice", "Carol", "Bob"], &map).unwrap();
        assert_eq!(out.sequence, "DRR");

        let single = encode_categorical("p2", &["Alice"], &EncodingMap::new([("Alice".into(), 'A')]))
            .unwrap();
        assert_eq!(single.sequence, "A");
    }

    #[test]
    fn categorical_unknown_label_reports_position() {
        let map = EncodingMap::new([("Alice".to_string(), 'A')]);
        let err = encode_categorical("p", &["Alice", "X"], &map).unwrap_err();
        match err {
            GwmError::Encoding { position, .. } => assert_eq!(position, 2),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn release_cycle_bins() {
        // Bins S=[0,7), M=[7,23), L=[23,...).
        let bins = BinSpec::new(vec![7.0, 23.0], vec!['S', 'M', 'L'], BoundaryRule::UpperBin).unwrap();
        let out = encode_numeric("app", &[21.0, 122.0, 81.0, 61.0], &bins).unwrap();
        assert_eq!(out.sequence, "MLLL");
        // Threshold values go to the upper bin under the default rule.
        assert_eq!(bins.label_for(7.0).unwrap(), 'M');
        assert_eq!(bins.label_for(23.0).unwrap(), 'L');
        let lower = BinSpec::new(vec![7.0, 23.0], vec!['S', 'M', 'L'], BoundaryRule::LowerBin).unwrap();
        assert_eq!(lower.label_for(7.0).unwrap(), 'S');
    }

    #[test]
    fn idle_interval_bins() {
        let bins = BinSpec::new(vec![133.49], vec!['D', 'C'], BoundaryRule::UpperBin).unwrap();
        let out = encode_numeric("f", &[150.0, 10.0], &bins).unwrap();
        assert_eq!(out.sequence, "CD");
        let one = BinSpec::new(vec![], vec!['X'], BoundaryRule::UpperBin).unwrap();
        assert_eq!(encode_numeric("g", &[5.0], &one).unwrap().sequence, "X");
    }

    #[test]
    fn numeric_rejects_non_finite() {
        let bins = BinSpec::new(vec![1.0], vec!['A', 'B'], BoundaryRule::UpperBin).unwrap();
        assert!(encode_numeric("f", &[f64::NAN], &bins).is_err());
        assert!(encode_numeric("f", &[f64::INFINITY], &bins).is_err());
    }

    #[test]
    fn product_example() {
        let product = ProductMap::new([
            (('L', 'A'), 'U'),
            (('M', 'A'), 'V'),
            (('H', 'A'), 'W'),
            (('L', 'B'), 'X'),
            (('M', 'B'), 'Y'),
            (('H', 'B'), 'Z'),
        ]);
        let a = EncodedItemset::new("s", "LHH".into()).unwrap();
        let b = EncodedItemset::new("s", "AAB".into()).unwrap();
        let out = encode_product(&a, &b, &product).unwrap();
        assert_eq!(out.sequence, "UWZ");
        assert_eq!(product.output_symbols().len(), 6);

        let short = EncodedItemset::new("s", "A".into()).unwrap();
        let ab = EncodedItemset::new("s", "AB".into()).unwrap();
        assert!(encode_product(&ab, &short, &product).is_err());
    }

    #[test]
    fn product_identity_single_symbol() {
        let product = ProductMap::new([(('A', 'A'), 'A')]);
        let a = EncodedItemset::new("s", "A".into()).unwrap();
        let out = encode_product(&a, &a, &product).unwrap();
        assert_eq!(out.sequence, "A");
    }

    #[test]
    fn quantile_bins_match_hand_interpolation() {
        // Type-7 quantiles of 1..=8: h = 7p.
        let values: Vec<f64> = (1..=8).map(f64::from).collect();
        let bins =
            build_quantile_bins(&values, &[0.25, 0.5, 0.75], &['a', 'b', 'c', 'd'], BoundaryRule::UpperBin)
                .unwrap();
        // Independent hand computation: Q1 = 2.75, Q2 = 4.5, Q3 = 6.25.
        assert_eq!(bins.thresholds, vec![2.75, 4.5, 6.25]);
    }

    #[test]
    fn quantile_bins_collapse_on_constant_input() {
        let values = vec![5.0; 10];
        let bins = build_quantile_bins(&values, &[0.5], &['a', 'b'], BoundaryRule::UpperBin).unwrap();
        assert_eq!(bins.thresholds, vec![5.0]);
        // The boundary rule decides where the constant lands.
        assert_eq!(bins.label_for(5.0).unwrap(), 'b');
        let lower = build_quantile_bins(&values, &[0.5], &['a', 'b'], BoundaryRule::LowerBin).unwrap();
        assert_eq!(lower.label_for(5.0).unwrap(), 'a');
    }

    #[test]
    fn quantile_bins_reject_bad_input() {
        assert!(build_quantile_bins(&[], &[0.5], &['a', 'b'], BoundaryRule::UpperBin).is_err());
        assert!(build_quantile_bins(&[1.0], &[0.5, 0.25], &['a', 'b', 'c'], BoundaryRule::UpperBin).is_err());
        assert!(build_quantile_bins(&[1.0], &[0.5], &['a', 'a'], BoundaryRule::UpperBin).is_err());
    }

    #[test]
    fn bins_partition_the_line() {
        let bins = BinSpec::new(vec![0.0, 10.0], vec!['x', 'y', 'z'], BoundaryRule::UpperBin).unwrap();
        for v in [-1e9, -1.0, 0.0, 5.0, 10.0, 1e9] {
            let label = bins.label_for(v).unwrap();
            assert!(bins.labels.contains(&label));
        }
    }

    #[test]
    fn alphabet_hint_for_bins() {
        let bins = BinSpec::new(vec![7.0, 23.0], vec!['S', 'M', 'L'], BoundaryRule::UpperBin).unwrap();
        let alphabet = Alphabet::new(bins.labels.iter().copied()).unwrap();
        assert_eq!(alphabet.to_string(), "SML");
    }
}
