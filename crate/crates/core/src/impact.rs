//! Per-publication impact under each standardization scenario.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baseline::{BaselineStats, BaselineTable};
use crate::error::{Error, Result};
use crate::model::Publication;

/// How a publication's citations are turned into an impact value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Scenario {
    /// Raw citation count.
    Cit,
    /// Citation percentile rank within the (year, category) group.
    Perc,
    /// Citations over the group mean.
    A,
    /// Citations over the cited-only group median.
    M0,
    /// Citations over the cited-only group mean.
    A0,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [Scenario::Cit, Scenario::Perc, Scenario::A, Scenario::M0, Scenario::A0];
    pub const BENCHMARK: Scenario = Scenario::A0;

    pub fn tag(self) -> &'static str {
        match self {
            Scenario::Cit => "CIT",
            Scenario::Perc => "PERC",
            Scenario::A => "A",
            Scenario::M0 => "M0",
            Scenario::A0 => "A0",
        }
    }

    pub fn scaling_factor(self) -> Option<ScalingFactor> {
        match self {
            Scenario::A => Some(ScalingFactor::A),
            Scenario::M0 => Some(ScalingFactor::M0),
            Scenario::A0 => Some(ScalingFactor::A0),
            Scenario::Cit | Scenario::Perc => None,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.tag().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown scenario `{s}` (expected CIT, PERC, A, M0 or A0)")))
    }
}

/// Group statistic a citation count is divided by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScalingFactor {
    A,
    M0,
    A0,
}

impl ScalingFactor {
    pub fn of(self, stats: &BaselineStats) -> Option<f64> {
        match self {
            ScalingFactor::A => Some(stats.a),
            ScalingFactor::M0 => stats.m0,
            ScalingFactor::A0 => stats.a0,
        }
    }
}

impl From<ScalingFactor> for Scenario {
    fn from(f: ScalingFactor) -> Self {
        match f {
            ScalingFactor::A => Scenario::A,
            ScalingFactor::M0 => Scenario::M0,
            ScalingFactor::A0 => Scenario::A0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpactValue {
    pub value: f64,
    pub scenario: Scenario,
}

fn inconsistent(p: &Publication, stats: &BaselineStats, reason: &str) -> Error {
    Error::InconsistentBaseline {
        pub_id: p.pub_id.clone(),
        year: stats.year,
        category: stats.category.clone(),
        reason: reason.into(),
    }
}

fn mean_over_categories(
    p: &Publication,
    table: &BaselineTable,
    mut per_category: impl FnMut(&BaselineStats) -> Result<f64>,
) -> Result<f64> {
    let mut sum = 0.0;
    for c in &p.categories {
        sum += per_category(table.lookup(p.year, c)?)?;
    }
    Ok(sum / p.categories.len() as f64)
}

/// Article impact index: citations over the scaling factor of each of the
/// publication's groups, averaged across its categories.
pub fn aii(p: &Publication, table: &BaselineTable, factor: ScalingFactor) -> Result<ImpactValue> {
    let scenario = factor.into();
    if p.citations == 0 {
        return Ok(ImpactValue { value: 0.0, scenario });
    }
    let c = p.citations as f64;
    let value = mean_over_categories(p, table, |stats| match factor.of(stats) {
        Some(s) if s > 0.0 => Ok(c / s),
        _ => Err(inconsistent(
            p,
            stats,
            "cited publication in a group without cited members",
        )),
    })?;
    Ok(ImpactValue { value, scenario })
}

/// Percentile of a rank among `n`: `100 (n - r) / (n - 1)`, or 100 when `n = 1`.
pub fn percentile_of_rank(rank: usize, n: usize) -> f64 {
    debug_assert!(rank >= 1 && rank <= n);
    if n <= 1 {
        100.0
    } else {
        100.0 * (n - rank) as f64 / (n - 1) as f64
    }
}

/// Citation percentile within each (year, category) group, ties taking the
/// best rank of their block, averaged across categories.
pub fn percentile(p: &Publication, table: &BaselineTable) -> Result<ImpactValue> {
    let value = mean_over_categories(p, table, |stats| {
        let rank = stats
            .best_rank(p.citations)
            .ok_or_else(|| inconsistent(p, stats, "citation count not present in group distribution"))?;
        Ok(percentile_of_rank(rank, stats.n_total))
    })?;
    Ok(ImpactValue {
        value,
        scenario: Scenario::Perc,
    })
}

pub fn impact_of(p: &Publication, table: &BaselineTable, scenario: Scenario) -> Result<ImpactValue> {
    match scenario {
        Scenario::Cit => Ok(ImpactValue {
            value: p.citations as f64,
            scenario,
        }),
        Scenario::Perc => percentile(p, table),
        Scenario::A => aii(p, table, ScalingFactor::A),
        Scenario::M0 => aii(p, table, ScalingFactor::M0),
        Scenario::A0 => aii(p, table, ScalingFactor::A0),
    }
}

/// Writes `pub_id,scenario,value` for every publication and scenario.
pub fn write_impacts<W: std::io::Write>(
    publications: &[Publication],
    table: &BaselineTable,
    scenarios: &[Scenario],
    out: W,
    delimiter: u8,
) -> Result<()> {
    let mut w = csv::WriterBuilder::new().delimiter(delimiter).from_writer(out);
    let csv_err = Error::export("impact export");
    w.write_record(["pub_id", "scenario", "value"]).map_err(&csv_err)?;
    for p in publications {
        for &s in scenarios {
            let v = impact_of(p, table, s)?;
            w.write_record([p.pub_id.as_str(), s.tag(), &format!("{:.6}", v.value)])
                .map_err(&csv_err)?;
        }
    }
    w.flush().map_err(|e| csv_err(e.into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn publication(citations: u64, categories: &[&str]) -> Publication {
        Publication {
            pub_id: "p".into(),
            year: 2004,
            citations,
            categories: categories.iter().map(|s| s.to_string()).collect(),
            author_ids: vec!["r".into()],
        }
    }

    fn fixed(category: &str, a: f64, m0: f64, a0: f64) -> BaselineStats {
        BaselineStats {
            year: 2004,
            category: category.into(),
            n_total: 2,
            n_cited: 1,
            a,
            a0: Some(a0),
            m0: Some(m0),
            sorted_citations: vec![],
        }
    }

    fn close(x: f64, y: f64, tol: f64) -> bool {
        (x - y).abs() <= tol
    }

    #[test]
    fn highly_cited_examples() {
        let mut t = BaselineTable::new();
        t.insert(fixed("UI", 15.021, 8.0, 18.911));
        t.insert(fixed("PY", 61.30, 16.0, 70.33));
        let ui = aii(&publication(3445, &["UI"]), &t, ScalingFactor::A).unwrap();
        assert!(close(ui.value, 229.35, 0.01), "{}", ui.value);
        let py = publication(1259, &["PY"]);
        assert!(close(aii(&py, &t, ScalingFactor::A).unwrap().value, 20.54, 0.02));
        assert!(close(aii(&py, &t, ScalingFactor::M0).unwrap().value, 78.69, 0.02));
        assert!(close(aii(&py, &t, ScalingFactor::A0).unwrap().value, 17.90, 0.02));
        assert!(close(impact_of(&py, &t, Scenario::A0).unwrap().value, 17.90, 0.02));
    }

    #[test]
    fn uncited_publications_have_zero_impact() {
        // no baseline at all: zero citations never consult the table
        let t = BaselineTable::new();
        for f in [ScalingFactor::A, ScalingFactor::M0, ScalingFactor::A0] {
            assert_eq!(aii(&publication(0, &["XX"]), &t, f).unwrap().value, 0.0);
        }
    }

    #[test]
    fn multi_category_average() {
        let mut t = BaselineTable::new();
        t.insert(fixed("DB", 2.0, 1.0, 2.0));
        t.insert(fixed("KM", 3.0, 1.0, 3.0));
        let v = aii(&publication(6, &["DB", "KM"]), &t, ScalingFactor::A).unwrap().value;
        assert_eq!(v, (6.0 / 2.0 + 6.0 / 3.0) / 2.0);
        assert_eq!(v, 2.5);
    }

    #[test]
    fn cited_publication_in_uncited_group_is_inconsistent() {
        let mut t = BaselineTable::new();
        t.insert(BaselineStats::from_citations(2004, "PY", vec![0, 0]));
        let err = aii(&publication(3, &["PY"]), &t, ScalingFactor::A0).unwrap_err();
        assert!(matches!(err, Error::InconsistentBaseline { .. }));
        let err = percentile(&publication(3, &["PY"]), &t).unwrap_err();
        assert!(matches!(err, Error::InconsistentBaseline { .. }));
        assert!(matches!(
            aii(&publication(3, &["KM"]), &t, ScalingFactor::A).unwrap_err(),
            Error::MissingGroup { .. }
        ));
    }

    #[test]
    fn percentile_with_ties() {
        let mut t = BaselineTable::new();
        t.insert(BaselineStats::from_citations(2004, "PY", vec![5, 5, 3]));
        // hand enumeration: 5 -> rank 1 of 3, 3 -> rank 3 of 3
        assert_eq!(percentile(&publication(5, &["PY"]), &t).unwrap().value, 100.0);
        assert_eq!(percentile(&publication(3, &["PY"]), &t).unwrap().value, 0.0);
    }

    #[test]
    fn percentile_singleton_and_large_group() {
        let mut t = BaselineTable::new();
        t.insert(BaselineStats::from_citations(2004, "UI", vec![0]));
        assert_eq!(percentile(&publication(0, &["UI"]), &t).unwrap().value, 100.0);

        let expected = [100.00, 99.61, 99.22, 98.83, 98.44, 98.05];
        for (i, e) in expected.iter().enumerate() {
            assert!(close(percentile_of_rank(i + 1, 257), *e, 0.005));
        }
    }

    #[test]
    fn cit_is_identity() {
        let t = BaselineTable::new();
        assert_eq!(
            impact_of(&publication(7, &["X"]), &t, Scenario::Cit).unwrap().value,
            7.0
        );
    }

    #[test]
    fn scenario_tags_round_trip() {
        for s in Scenario::ALL {
            assert_eq!(s.tag().parse::<Scenario>().unwrap(), s);
        }
        assert!("B".parse::<Scenario>().is_err());
        assert_eq!(serde_json::to_string(&Scenario::M0).unwrap(), "\"M0\"");
    }

    fn group_values(counts: &[u64], scenario: Scenario) -> Vec<f64> {
        let mut t = BaselineTable::new();
        t.insert(BaselineStats::from_citations(2004, "C", counts.to_vec()));
        counts
            .iter()
            .map(|&c| impact_of(&publication(c, &["C"]), &t, scenario).unwrap().value)
            .collect()
    }

    proptest! {
        #[test]
        fn monotone_in_citations(counts in prop::collection::vec(0u64..200, 2..30)) {
            for s in Scenario::ALL {
                let v = group_values(&counts, s);
                for i in 0..counts.len() {
                    for j in 0..counts.len() {
                        if counts[i] < counts[j] {
                            prop_assert!(v[i] < v[j], "{s}: {} vs {}", v[i], v[j]);
                        } else if counts[i] == counts[j] {
                            prop_assert_eq!(v[i], v[j]);
                        }
                    }
                }
            }
        }

        #[test]
        fn integer_scale_invariance(counts in prop::collection::vec(0u64..200, 1..30), k in 1u64..20) {
            let scaled: Vec<u64> = counts.iter().map(|c| c * k).collect();
            for s in [Scenario::Perc, Scenario::A, Scenario::M0, Scenario::A0] {
                let (v, w) = (group_values(&counts, s), group_values(&scaled, s));
                for (x, y) in v.iter().zip(&w) {
                    prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0), "{s}: {x} vs {y}");
                }
            }
        }

        #[test]
        fn percentile_invariant_under_increasing_transform(counts in prop::collection::vec(0u64..100, 1..30)) {
            // c -> c^2 + 3c is strictly increasing on integers
            let moved: Vec<u64> = counts.iter().map(|c| c * c + 3 * c).collect();
            prop_assert_eq!(group_values(&counts, Scenario::Perc), group_values(&moved, Scenario::Perc));
        }

        #[test]
        fn identical_categories_match_single(counts in prop::collection::vec(1u64..100, 1..10), pick in any::<prop::sample::Index>()) {
            let mut t = BaselineTable::new();
            t.insert(BaselineStats::from_citations(2004, "C1", counts.clone()));
            t.insert(BaselineStats::from_citations(2004, "C2", counts.clone()));
            let c = counts[pick.index(counts.len())];
            for s in Scenario::ALL {
                let one = impact_of(&publication(c, &["C1"]), &t, s).unwrap().value;
                let two = impact_of(&publication(c, &["C1", "C2"]), &t, s).unwrap().value;
                prop_assert_eq!(one, two);
            }
        }
    }
}
