//! Scientific Strength aggregation and per-SDS percentile rankings.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baseline::BaselineTable;
use crate::error::{Error, Result};
use crate::impact::{impact_of, percentile_of_rank, Scenario};
use crate::model::{Corpus, Researcher};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScientificStrength {
    pub researcher_id: String,
    pub scenario: Scenario,
    pub ss: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Quartile {
    Q1,
    Q2,
    Q3,
    Q4,
}

impl Quartile {
    /// Boundaries at 75/50/25, each boundary belonging to the better class.
    pub fn from_percentile(p: f64) -> Quartile {
        if p >= 75.0 {
            Quartile::Q1
        } else if p >= 50.0 {
            Quartile::Q2
        } else if p >= 25.0 {
            Quartile::Q3
        } else {
            Quartile::Q4
        }
    }
}

impl fmt::Display for Quartile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingEntry {
    pub researcher_id: String,
    pub ss: f64,
    pub percentile_rank: f64,
    pub quartile: Quartile,
}

/// Rankings keyed by (SDS, scenario), each list ordered by descending SS.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RankingTable {
    lists: BTreeMap<String, BTreeMap<Scenario, Vec<RankingEntry>>>,
}

impl RankingTable {
    pub fn get(&self, sds: &str, scenario: Scenario) -> Option<&[RankingEntry]> {
        self.lists.get(sds)?.get(&scenario).map(Vec::as_slice)
    }

    pub fn insert(&mut self, sds: impl Into<String>, scenario: Scenario, entries: Vec<RankingEntry>) {
        self.lists.entry(sds.into()).or_default().insert(scenario, entries);
    }

    /// All lists, ordered by SDS code then scenario.
    pub fn iter(&self) -> impl Iterator<Item = (&str, Scenario, &[RankingEntry])> {
        self.lists
            .iter()
            .flat_map(|(sds, m)| m.iter().map(move |(s, e)| (sds.as_str(), *s, e.as_slice())))
    }

    pub fn sds_codes(&self) -> impl Iterator<Item = &str> {
        self.lists.keys().map(String::as_str)
    }

    /// Number of (SDS, scenario) lists.
    pub fn len(&self) -> usize {
        self.lists.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Sum of the researcher's per-publication impacts, every co-author
/// receiving the full value.
pub fn scientific_strength(
    researcher: &Researcher,
    corpus: &Corpus,
    table: &BaselineTable,
    scenario: Scenario,
) -> Result<ScientificStrength> {
    let mut ss = 0.0;
    for p in corpus.publications_of(&researcher.researcher_id) {
        ss += impact_of(p, table, scenario)?.value;
    }
    Ok(ScientificStrength {
        researcher_id: researcher.researcher_id.clone(),
        scenario,
        ss,
    })
}

/// Ranks scores: drops nil SS, orders by descending SS (researcher id breaks
/// ties), and assigns best-rank percentiles and quartiles.
pub fn rank_scores(scores: impl IntoIterator<Item = (String, f64)>) -> Vec<RankingEntry> {
    let mut scored: Vec<(String, f64)> = scores.into_iter().filter(|(_, ss)| *ss > 0.0).collect();
    scored.sort_by(|(ia, a), (ib, b)| b.partial_cmp(a).unwrap_or(Ordering::Equal).then_with(|| ia.cmp(ib)));
    let n = scored.len();
    let mut out = Vec::with_capacity(n);
    let mut block_rank = 1;
    for (pos, (id, ss)) in scored.into_iter().enumerate() {
        if pos > 0 && out.last().map(|e: &RankingEntry| e.ss) != Some(ss) {
            block_rank = pos + 1;
        }
        let percentile_rank = percentile_of_rank(block_rank, n);
        out.push(RankingEntry {
            researcher_id: id,
            ss,
            percentile_rank,
            quartile: Quartile::from_percentile(percentile_rank),
        });
    }
    out
}

pub fn rank_sds(corpus: &Corpus, table: &BaselineTable, sds: &str, scenario: Scenario) -> Result<Vec<RankingEntry>> {
    let scores = corpus
        .researchers()
        .iter()
        .filter(|r| r.sds == sds)
        .map(|r| scientific_strength(r, corpus, table, scenario).map(|s| (s.researcher_id, s.ss)))
        .collect::<Result<Vec<_>>>()?;
    Ok(rank_scores(scores))
}

/// Every SDS of the corpus ranked under every requested scenario.
///
/// Per-publication impacts are computed once per scenario and shared by all
/// of a publication's authors.
pub fn rank_all(corpus: &Corpus, table: &BaselineTable, scenarios: &[Scenario]) -> Result<RankingTable> {
    let by_sds = corpus.researchers_by_sds();
    let mut out = RankingTable::default();
    for &scenario in scenarios {
        let impacts: Vec<f64> = corpus
            .publications()
            .par_iter()
            .map(|p| impact_of(p, table, scenario).map(|v| v.value))
            .collect::<Result<_>>()
            .map_err(|e| {
                // attribute the failure to the SDS of the first author
                let sds = first_failing_sds(corpus, table, scenario).unwrap_or_default();
                Error::Ranking {
                    sds,
                    scenario: scenario.to_string(),
                    source: Box::new(e),
                }
            })?;
        let lists: Vec<(&str, Vec<RankingEntry>)> = by_sds
            .par_iter()
            .map(|(&sds, members)| {
                let scores = members.iter().map(|&i| {
                    let ss: f64 = corpus.publication_indices_of(i).iter().map(|&p| impacts[p]).sum();
                    (corpus.researchers()[i].researcher_id.clone(), ss)
                });
                (sds, rank_scores(scores))
            })
            .collect();
        for (sds, entries) in lists {
            out.insert(sds, scenario, entries);
        }
    }
    Ok(out)
}

fn first_failing_sds(corpus: &Corpus, table: &BaselineTable, scenario: Scenario) -> Option<String> {
    let p = corpus
        .publications()
        .iter()
        .find(|p| impact_of(p, table, scenario).is_err())?;
    corpus.researcher(&p.author_ids[0]).map(|r| r.sds.clone())
}

/// Writes `sds,scenario,researcher_id,ss,percentile_rank,quartile`.
pub fn write_rankings<W: Write>(table: &RankingTable, out: W, delimiter: u8) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().delimiter(delimiter).from_writer(out);
    w.write_record(["sds", "scenario", "researcher_id", "ss", "percentile_rank", "quartile"])?;
    for (sds, scenario, entries) in table.iter() {
        for e in entries {
            w.write_record([
                sds,
                scenario.tag(),
                &e.researcher_id,
                &format!("{:.6}", e.ss),
                &format!("{:.2}", e.percentile_rank),
                &e.quartile.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
