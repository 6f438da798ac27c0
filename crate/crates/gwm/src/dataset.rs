//! Datasets: encoded itemsets paired with one numeric outcome each.
//!
//! The on-disk form is CSV with a header `id,sequence,outcome`. The
//! `sequence` column holds either a bare symbol string (`MLLL`) or, when a
//! bin specification is configured, a `;`-separated numeric list
//! (`21;122;81;61`) that is encoded on ingest.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::alphabet::Alphabet;
use crate::encoding::{encode_numeric, BinSpec};
use crate::error::{GwmError, Result};

/// One subject's encoded event sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodedItemset {
    pub id: String,
    pub sequence: String,
}

impl EncodedItemset {
    pub fn new(id: &str, sequence: String) -> Result<Self> {
        if sequence.is_empty() {
            return Err(GwmError::Dataset {
                line: None,
                message: format!("itemset `{id}` has an empty sequence"),
            });
        }
        Ok(Self { id: id.to_string(), sequence })
    }
}

/// One subject's outcome value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRecord {
    pub id: String,
    pub value: f64,
}

/// Itemsets plus their outcomes, ids unique, one outcome per itemset.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub items: Vec<EncodedItemset>,
    outcomes: BTreeMap<String, f64>,
}

/// How the `sequence` column should be interpreted on ingest.
#[derive(Debug, Clone)]
pub enum IngestSchema {
    /// Sequences are already symbol strings over the given alphabet.
    Symbolic(Alphabet),
    /// Sequences are `;`-separated numbers, encoded through the bins.
    Numeric(BinSpec),
}

impl Dataset {
    pub fn new(items: Vec<EncodedItemset>, outcomes: Vec<OutcomeRecord>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for o in outcomes {
            if !o.value.is_finite() {
                return Err(GwmError::Dataset {
                    line: None,
                    message: format!("outcome for `{}` is not finite", o.id),
                });
            }
            if map.insert(o.id.clone(), o.value).is_some() {
                return Err(GwmError::Dataset {
                    line: None,
                    message: format!("duplicate outcome for `{}`", o.id),
                });
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        for item in &items {
            if !seen.insert(item.id.clone()) {
                return Err(GwmError::Dataset {
                    line: None,
                    message: format!("duplicate itemset id `{}`", item.id),
                });
            }
            if !map.contains_key(&item.id) {
                return Err(GwmError::Dataset {
                    line: None,
                    message: format!("itemset `{}` has no outcome", item.id),
                });
            }
        }
        Ok(Self { items, outcomes: map })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn outcome(&self, id: &str) -> Option<f64> {
        self.outcomes.get(id).copied()
    }

    /// Outcome of the item at `index`, in item order.
    pub fn outcome_at(&self, index: usize) -> f64 {
        self.outcomes[&self.items[index].id]
    }

    /// Parses a dataset from CSV text. Row numbers in errors count the
    /// header as line 1.
    pub fn from_csv_str(data: &str, schema: &IngestSchema) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(data.as_bytes());
        {
            let headers = reader.headers()?;
            let expected = ["id", "sequence", "outcome"];
            let got: Vec<&str> = headers.iter().collect();
            if got != expected {
                return Err(GwmError::Dataset {
                    line: Some(1),
                    message: format!("expected header `id,sequence,outcome`, got `{}`", got.join(",")),
                });
            }
        }
        let mut items = Vec::new();
        let mut outcomes = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let line = i + 2;
            let record = record?;
            let field = |idx: usize, name: &str| -> Result<String> {
                record
                    .get(idx)
                    .map(str::trim)
                    .map(str::to_string)
                    .ok_or_else(|| GwmError::Dataset {
                        line: Some(line),
                        message: format!("missing `{name}` column"),
                    })
            };
            let id = field(0, "id")?;
            if id.is_empty() {
                return Err(GwmError::Dataset { line: Some(line), message: "empty id".into() });
            }
            let raw_sequence = field(1, "sequence")?;
            let outcome_text = field(2, "outcome")?;
            let value: f64 = outcome_text.parse().map_err(|_| GwmError::Dataset {
                line: Some(line),
                message: format!("outcome `{outcome_text}` is not a number"),
            })?;
            if !value.is_finite() {
                return Err(GwmError::Dataset {
                    line: Some(line),
                    message: format!("outcome `{outcome_text}` is not finite"),
                });
            }

            let item = match schema {
                IngestSchema::Symbolic(alphabet) => {
                    for c in raw_sequence.chars() {
                        if !alphabet.contains(c) {
                            return Err(GwmError::Dataset {
                                line: Some(line),
                                message: format!("symbol '{c}' not in alphabet {alphabet}"),
                            });
                        }
                    }
                    EncodedItemset::new(&id, raw_sequence.clone())
                }
                IngestSchema::Numeric(bins) => {
                    let values: Vec<f64> = raw_sequence
                        .split(';')
                        .filter(|p| !p.trim().is_empty())
                        .map(|p| {
                            p.trim().parse::<f64>().map_err(|_| GwmError::Dataset {
                                line: Some(line),
                                message: format!("sequence element `{p}` is not a number"),
                            })
                        })
                        .collect::<Result<_>>()?;
                    encode_numeric(&id, &values, bins)
                }
            }
            .map_err(|e| GwmError::Dataset { line: Some(line), message: e.to_string() })?;

            items.push(item);
            outcomes.push(OutcomeRecord { id, value });
        }
        Dataset::new(items, outcomes)
    }

    pub fn from_csv_path(path: &Path, schema: &IngestSchema) -> Result<Self> {
        let data = std::fs::read_to_string(path)?;
        Self::from_csv_str(&data, schema)
    }

    /// Serializes back to the canonical CSV form.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("id,sequence,outcome\n");
        for item in &self.items {
            let outcome = self.outcomes[&item.id];
            out.push_str(&format!("{},{},{}\n", item.id, item.sequence, outcome));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::BoundaryRule;

    fn symbolic() -> IngestSchema {
        IngestSchema::Symbolic(Alphabet::parse("ML").unwrap())
    }

    #[test]
    fn ingest_well_formed() {
        let csv = "id,sequence,outcome\napp1,MLLL,4.5\napp2,MM,3.0\napp3,L,1\n";
        let d = Dataset::from_csv_str(csv, &symbolic()).unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(d.items[0].sequence, "MLLL");
        assert_eq!(d.outcome("app2"), Some(3.0));
        // Row order is preserved.
        let ids: Vec<&str> = d.items.iter().map(|i| i.id.as_str()).collect();
        assert_eq!(ids, vec!["app1", "app2", "app3"]);
    }

    #[test]
    fn ingest_rejects_empty_sequence_with_line() {
        let csv = "id,sequence,outcome\napp1,,4.5\n";
        match Dataset::from_csv_str(csv, &symbolic()).unwrap_err() {
            GwmError::Dataset { line, .. } => assert_eq!(line, Some(2)),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn ingest_rejects_duplicate_ids_and_foreign_symbols() {
        let csv = "id,sequence,outcome\na,ML,1\na,LL,2\n";
        assert!(Dataset::from_csv_str(csv, &symbolic()).is_err());
        let csv = "id,sequence,outcome\na,MX,1\n";
        assert!(Dataset::from_csv_str(csv, &symbolic()).is_err());
    }

    #[test]
    fn ingest_encodes_numeric_sequences() {
        let bins = BinSpec::new(vec![7.0, 23.0], vec!['S', 'M', 'L'], BoundaryRule::UpperBin).unwrap();
        let csv = "id,sequence,outcome\napp,21;122;81;61,4.1\n";
        let d = Dataset::from_csv_str(csv, &IngestSchema::Numeric(bins)).unwrap();
        assert_eq!(d.items[0].sequence, "MLLL");
    }

    #[test]
    fn ingest_rejects_bad_outcome() {
        let csv = "id,sequence,outcome\na,ML,abc\n";
        assert!(Dataset::from_csv_str(csv, &symbolic()).is_err());
        let csv = "id,sequence,outcome\na,ML,inf\n";
        assert!(Dataset::from_csv_str(csv, &symbolic()).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let csv = "id,sequence,outcome\napp1,MLLL,4.5\napp2,MM,3\n";
        let d = Dataset::from_csv_str(csv, &symbolic()).unwrap();
        let again = Dataset::from_csv_str(&d.to_csv(), &symbolic()).unwrap();
        assert_eq!(d, again);
    }
}
