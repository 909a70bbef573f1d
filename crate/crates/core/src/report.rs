//! The structured (JSON) sensitivity report and its run metadata.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::impact::Scenario;
use crate::model::{Taxonomy, YearWindow};
use crate::sensitivity::Sensitivity;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub generator: String,
    /// SHA-256 of the resolved run configuration.
    pub config_digest: String,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub rng_algorithm: Option<String>,
    pub census_date: Option<String>,
    pub benchmark: Scenario,
    pub scenarios: Vec<Scenario>,
    pub sds_threshold: f64,
    pub window: YearWindow,
    pub n_publications: usize,
    pub n_researchers: usize,
    pub excluded_sds: Vec<String>,
    pub taxonomy: Taxonomy,
    /// Counting and tie-handling rules the numbers were produced under.
    pub conventions: BTreeMap<String, String>,
}

pub fn conventions() -> BTreeMap<String, String> {
    [
        (
            "counting",
            "full: every listed researcher receives the whole publication value",
        ),
        (
            "percentile",
            "100*(n-r)/(n-1), ties take the best rank of their block, n=1 gives 100",
        ),
        (
            "quartiles",
            "Q1 >= 75, Q2 >= 50, Q3 >= 25, else Q4 (on percentile rank)",
        ),
        (
            "nil_ss",
            "researchers with nil SS are not ranked and are excluded from shift denominators",
        ),
        (
            "spearman",
            "Pearson correlation of mid-ranks of SS over researchers ranked under both lists",
        ),
        ("st_dev", "sample standard deviation (n-1)"),
        ("median", "mean of the two middle values for even counts"),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub metadata: RunMetadata,
    #[serde(flatten)]
    pub sensitivity: Sensitivity,
}

impl SensitivityReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| Error::Report {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Scenarios in report order.
    pub fn scenarios(&self) -> &[Scenario] {
        &self.metadata.scenarios
    }

    /// "SCENARIO total-quartile-shift%" summary lines.
    pub fn summary_lines(&self) -> Vec<String> {
        self.sensitivity
            .shifts
            .iter()
            .filter(|s| s.uda == crate::sensitivity::TOTAL)
            .map(|s| {
                let pct = |p: Option<f64>| p.map_or_else(|| "n/a".to_string(), |v| format!("{v:.1}%"));
                format!(
                    "{:<5} quartile shift {:>6}  top lost {:>6}  bottom lost {:>6}  (n = {})",
                    s.scenario.tag(),
                    pct(s.pct_quartile_change),
                    pct(s.pct_top_lost),
                    pct(s.pct_bottom_lost),
                    s.quartile_change.population
                )
            })
            .collect()
    }
}
