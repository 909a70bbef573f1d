//! Field-normalized citation impact, Scientific Strength rankings, and the
//! sensitivity of those rankings to the scaling factor used to standardize
//! citations.
//!
//! The pipeline runs in four steps:
//!
//! 1. [`baseline`]: per-(year, subject category) citation statistics.
//! 2. [`impact`]: each publication's value under five scenarios (raw
//!    citations, percentile rank, and citations scaled by the group mean,
//!    the cited-only median or the cited-only mean).
//! 3. [`ranking`]: per-researcher sums ranked within each SDS, with
//!    percentile ranks and quartile classes.
//! 4. [`sensitivity`]: Spearman correlations with the benchmark scenario
//!    (cited-only mean) and quartile/top/bottom shift percentages per UDA.
//!
//! [`pipeline::analyze`] wires these together for batch runs; [`synth`]
//! produces seeded synthetic corpora.

pub mod baseline;
pub mod error;
pub mod impact;
pub mod model;
pub mod pipeline;
pub mod ranking;
pub mod report;
pub mod sensitivity;
pub mod synth;
pub mod tables;

pub use baseline::{compute_baselines, BaselineStats, BaselineTable};
pub use error::{Error, Result};
pub use impact::{aii, impact_of, percentile, ImpactValue, ScalingFactor, Scenario};
pub use model::{filter_sds, load_corpus, Corpus, Publication, Researcher, Taxonomy, Threshold, YearWindow};
pub use ranking::{rank_all, rank_sds, scientific_strength, Quartile, RankingEntry, RankingTable};
pub use report::SensitivityReport;
pub use sensitivity::{extreme_shift, quartile_shift, spearman, uda_descriptives, Extreme};
pub use synth::{generate, SynthConfig};
