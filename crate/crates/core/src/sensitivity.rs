//! How far each scenario's rankings drift from the benchmark ranking.
//!
//! Comparisons are made per SDS over researchers ranked under both the
//! scenario and the benchmark (nil-SS researchers are never ranked). Shift
//! percentages are aggregated per UDA and over all UDAs.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::impact::Scenario;
use crate::model::Taxonomy;
use crate::ranking::{Quartile, RankingEntry, RankingTable};

/// Label of the all-UDA row in shift reports.
pub const TOTAL: &str = "Total";

/// Average (mid) ranks, 1-based, in input order.
pub fn mid_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap_or(Ordering::Equal));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1 ..= end
        let mid = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = mid;
        }
        start = end;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("zero variance in ranks".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Tie-corrected Spearman coefficient of paired scores: Pearson correlation
/// of the mid-rank vectors.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::UndefinedCorrelation(format!(
            "unpaired inputs ({} vs {})",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::UndefinedCorrelation(format!("{} paired observations", xs.len())));
    }
    pearson(&mid_ranks(xs), &mid_ranks(ys))
}

/// Pairs two rankings by researcher id and correlates their SS values.
/// Returns the number of common researchers alongside the coefficient.
pub fn spearman_by_id(xs: &[RankingEntry], ys: &[RankingEntry]) -> (usize, Result<f64>) {
    let ys_by_id: HashMap<&str, f64> = ys.iter().map(|e| (e.researcher_id.as_str(), e.ss)).collect();
    let (a, b): (Vec<f64>, Vec<f64>) = xs
        .iter()
        .filter_map(|e| ys_by_id.get(e.researcher_id.as_str()).map(|&y| (e.ss, y)))
        .unzip();
    (a.len(), spearman(&a, &b))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdsCorrelation {
    pub sds: String,
    pub uda: String,
    pub scenario: Scenario,
    /// Researchers ranked under both the scenario and the benchmark.
    pub n: usize,
    /// `None` when undefined (fewer than two common researchers, or no
    /// variation in either ranking).
    pub rho: Option<f64>,
}

pub fn sds_correlations(
    rankings: &RankingTable,
    taxonomy: &Taxonomy,
    scenarios: &[Scenario],
    benchmark: Scenario,
) -> Vec<SdsCorrelation> {
    let mut out = Vec::new();
    for sds in rankings.sds_codes() {
        let Some(bench) = rankings.get(sds, benchmark) else {
            continue;
        };
        for &scenario in scenarios {
            let Some(list) = rankings.get(sds, scenario) else {
                continue;
            };
            let (n, rho) = if scenario == benchmark {
                // a ranking compared with itself
                (bench.len(), (!bench.is_empty()).then_some(1.0))
            } else {
                let (n, rho) = spearman_by_id(list, bench);
                (n, rho.ok())
            };
            out.push(SdsCorrelation {
                sds: sds.to_string(),
                uda: taxonomy.get(sds).cloned().unwrap_or_default(),
                scenario,
                n,
                rho,
            });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UdaStats {
    pub uda: String,
    pub scenario: Scenario,
    /// SDSs with a defined coefficient.
    pub n_sds: usize,
    pub mean: f64,
    /// Sample standard deviation; 0 for a single SDS.
    pub sd: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

/// Mean, sample standard deviation, median, minimum and maximum.
pub fn describe(values: &[f64]) -> Option<(f64, f64, f64, f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len();
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let mean = values.iter().sum::<f64>() / n as f64;
    let sd = if n > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    };
    Some((mean, sd, median, sorted[0], sorted[n - 1]))
}

/// Descriptive statistics of the per-SDS coefficients of each UDA, per
/// scenario. UDAs without any defined coefficient are omitted.
pub fn uda_descriptives(correlations: &[SdsCorrelation], taxonomy: &Taxonomy) -> Vec<UdaStats> {
    let mut groups: BTreeMap<(&str, Scenario), Vec<f64>> = BTreeMap::new();
    for c in correlations {
        let (Some(rho), Some(uda)) = (c.rho, taxonomy.get(&c.sds)) else {
            continue;
        };
        groups.entry((uda.as_str(), c.scenario)).or_default().push(rho);
    }
    groups
        .into_iter()
        .filter_map(|((uda, scenario), rhos)| {
            let (mean, sd, median, min, max) = describe(&rhos)?;
            Some(UdaStats {
                uda: uda.to_string(),
                scenario,
                n_sds: rhos.len(),
                mean,
                sd,
                median,
                min,
                max,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ShiftStat {
    /// Researchers in the comparison population.
    pub population: usize,
    /// Researchers whose class differs from the benchmark.
    pub shifted: usize,
}

impl ShiftStat {
    /// Percentage shifted; `None` flags an empty population.
    pub fn pct(&self) -> Option<f64> {
        (self.population > 0).then(|| 100.0 * self.shifted as f64 / self.population as f64)
    }

    fn add(&mut self, other: ShiftStat) {
        self.population += other.population;
        self.shifted += other.shifted;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extreme {
    /// Benchmark Q1 researchers who are not Q1 under the scenario.
    Top,
    /// Benchmark Q4 researchers who are not Q4 under the scenario.
    Bottom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftRow {
    /// UDA code, or [`TOTAL`].
    pub uda: String,
    pub scenario: Scenario,
    pub stat: ShiftStat,
}

fn shift_in_sds(
    list: &[RankingEntry],
    bench: &[RankingEntry],
    include: impl Fn(Quartile) -> bool,
    shifted: impl Fn(Quartile, Quartile) -> bool,
) -> ShiftStat {
    let by_id: HashMap<&str, Quartile> = list.iter().map(|e| (e.researcher_id.as_str(), e.quartile)).collect();
    let mut stat = ShiftStat::default();
    for b in bench.iter().filter(|b| include(b.quartile)) {
        if let Some(&q) = by_id.get(b.researcher_id.as_str()) {
            stat.population += 1;
            if shifted(q, b.quartile) {
                stat.shifted += 1;
            }
        }
    }
    stat
}

/// Per-UDA rows (every UDA of the taxonomy) followed by the total row.
fn shift_rows(
    rankings: &RankingTable,
    scenario: Scenario,
    benchmark: Scenario,
    taxonomy: &Taxonomy,
    per_sds: impl Fn(&[RankingEntry], &[RankingEntry]) -> ShiftStat,
) -> Vec<ShiftRow> {
    let mut by_uda: BTreeMap<&str, ShiftStat> = taxonomy.values().map(|u| (u.as_str(), ShiftStat::default())).collect();
    for (sds, uda) in taxonomy {
        if let (Some(list), Some(bench)) = (rankings.get(sds, scenario), rankings.get(sds, benchmark)) {
            by_uda.entry(uda).or_default().add(per_sds(list, bench));
        }
    }
    let mut total = ShiftStat::default();
    let mut rows: Vec<ShiftRow> = by_uda
        .into_iter()
        .map(|(uda, stat)| {
            total.add(stat);
            ShiftRow {
                uda: uda.to_string(),
                scenario,
                stat,
            }
        })
        .collect();
    rows.push(ShiftRow {
        uda: TOTAL.into(),
        scenario,
        stat: total,
    });
    rows
}

/// Share of researchers ranked under both lists whose quartile differs.
pub fn quartile_shift(
    rankings: &RankingTable,
    scenario: Scenario,
    benchmark: Scenario,
    taxonomy: &Taxonomy,
) -> Vec<ShiftRow> {
    shift_rows(rankings, scenario, benchmark, taxonomy, |list, bench| {
        shift_in_sds(list, bench, |_| true, |q, b| q != b)
    })
}

/// Share of benchmark top (Q1) or bottom (Q4) researchers who leave that
/// class under the scenario.
pub fn extreme_shift(
    rankings: &RankingTable,
    scenario: Scenario,
    benchmark: Scenario,
    taxonomy: &Taxonomy,
    which: Extreme,
) -> Vec<ShiftRow> {
    let class = match which {
        Extreme::Top => Quartile::Q1,
        Extreme::Bottom => Quartile::Q4,
    };
    shift_rows(rankings, scenario, benchmark, taxonomy, |list, bench| {
        shift_in_sds(list, bench, |b| b == class, |q, _| q != class)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftReport {
    /// UDA code, or [`TOTAL`].
    pub uda: String,
    pub scenario: Scenario,
    pub quartile_change: ShiftStat,
    pub pct_quartile_change: Option<f64>,
    pub top_lost: ShiftStat,
    pub pct_top_lost: Option<f64>,
    pub bottom_lost: ShiftStat,
    pub pct_bottom_lost: Option<f64>,
}

pub fn shift_reports(
    rankings: &RankingTable,
    scenarios: &[Scenario],
    benchmark: Scenario,
    taxonomy: &Taxonomy,
) -> Vec<ShiftReport> {
    let mut out = Vec::new();
    for &scenario in scenarios {
        let quartile = quartile_shift(rankings, scenario, benchmark, taxonomy);
        let top = extreme_shift(rankings, scenario, benchmark, taxonomy, Extreme::Top);
        let bottom = extreme_shift(rankings, scenario, benchmark, taxonomy, Extreme::Bottom);
        for ((q, t), b) in quartile.into_iter().zip(top).zip(bottom) {
            debug_assert!(q.uda == t.uda && q.uda == b.uda);
            out.push(ShiftReport {
                uda: q.uda,
                scenario,
                pct_quartile_change: q.stat.pct(),
                quartile_change: q.stat,
                pct_top_lost: t.stat.pct(),
                top_lost: t.stat,
                pct_bottom_lost: b.stat.pct(),
                bottom_lost: b.stat,
            });
        }
    }
    out
}

/// Correlations, descriptive statistics and shift reports for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sensitivity {
    pub correlations: Vec<SdsCorrelation>,
    pub uda_stats: Vec<UdaStats>,
    pub shifts: Vec<ShiftReport>,
}

pub fn analyze_sensitivity(
    rankings: &RankingTable,
    taxonomy: &Taxonomy,
    scenarios: &[Scenario],
    benchmark: Scenario,
) -> Sensitivity {
    let correlations = sds_correlations(rankings, taxonomy, scenarios, benchmark);
    let uda_stats = uda_descriptives(&correlations, taxonomy);
    let shifts = shift_reports(rankings, scenarios, benchmark, taxonomy);
    Sensitivity {
        correlations,
        uda_stats,
        shifts,
    }
}
