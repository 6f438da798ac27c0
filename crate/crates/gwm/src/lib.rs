//! Gandhi-Washington Method (GWM) toolkit.
//!
//! GWM mines treatment-outcome constructs (TrOCs) from sequential
//! software-engineering data in three phases:
//!
//! 1. **Encoding** — raw per-subject sequences (categorical labels or
//!    numeric measurements) become strings over a small alphabet.
//! 2. **Abstraction** — encoded strings are classified into a lattice of
//!    restricted regular expressions ordered by language inclusion.
//! 3. **Synthesis** — statistically indistinct lattice nodes merge upward
//!    until every surviving node differs from its surviving neighbours with
//!    respect to a numeric outcome. The survivors are the TrOCs.
//!
//! The crate also ships the supporting cast: repository-mining adapters that
//! turn commit logs and release records into encoded sequences, a seeded
//! test generator that reproduces the validation protocol (round-trip
//! classification, planted partitions, planted patterns), a minimal Apriori
//! baseline for methodological contrast, and a CLI (`gwm`) that wires the
//! phases into a pipeline.

pub mod alphabet;
pub mod apriori;
pub mod automaton;
pub mod dataset;
pub mod encoding;
pub mod error;
pub mod hierarchy;
pub mod mining;
pub mod pipeline;
pub mod report;
pub mod stats;
pub mod synthesis;
pub mod testgen;

mod pattern;

pub use alphabet::Alphabet;
pub use dataset::{Dataset, EncodedItemset, IngestSchema, OutcomeRecord};
pub use encoding::{BinSpec, BoundaryRule, EncodingMap, ProductMap};
pub use error::{GwmError, Result};
pub use hierarchy::{enumerate_hierarchy, hierarchy_from_exprs, Classification, Hierarchy, HierarchyNode};
pub use pattern::{Atom, PatternExpr};
pub use stats::{ContingencyTable, EffectSize, Sample, TestMethod, TestResult};
pub use synthesis::{
    synthesize, verify_output_contract, Correction, SynthesisConfig, TestOracle, Troc, TrocSet,
};
