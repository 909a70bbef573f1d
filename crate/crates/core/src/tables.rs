//! Printable tables derived from a [`SensitivityReport`].
//!
//! Rounding happens only here: correlations to 3 decimals, shift
//! percentages to 1 decimal. Undefined values render as `-` (correlations)
//! or `n/a` (shift rows with an empty population).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::impact::Scenario;
use crate::report::SensitivityReport;
use crate::sensitivity::{ShiftReport, TOTAL};

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// File stem the table is written under.
    pub name: &'static str,
    pub title: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn to_delimited(&self, delimiter: u8) -> Result<String> {
        let mut w = csv::WriterBuilder::new().delimiter(delimiter).from_writer(Vec::new());
        let err = Error::export(self.name);
        w.write_record(&self.header).map_err(&err)?;
        for r in &self.rows {
            w.write_record(r).map_err(&err)?;
        }
        let bytes = w.into_inner().map_err(|e| err(e.into_error().into()))?;
        Ok(String::from_utf8(bytes).expect("table cells are UTF-8"))
    }

    /// Fixed-width text: first column left-aligned, the rest right-aligned.
    pub fn to_aligned(&self) -> String {
        let cols = self.header.len();
        let mut widths = vec![0; cols];
        for row in std::iter::once(&self.header).chain(&self.rows) {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let mut out = format!("{}\n", self.title);
        for row in std::iter::once(&self.header).chain(&self.rows) {
            let mut line = String::new();
            for (i, (cell, w)) in row.iter().zip(&widths).enumerate() {
                if i == 0 {
                    let _ = write!(line, "{cell:<w$}");
                } else {
                    let _ = write!(line, "  {cell:>w$}");
                }
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
        out
    }
}

pub fn fmt_rho(rho: Option<f64>) -> String {
    rho.map_or_else(|| "-".to_string(), |r| format!("{r:+.3}"))
}

pub fn fmt_pct(pct: Option<f64>) -> String {
    pct.map_or_else(|| "n/a".to_string(), |p| format!("{p:.1}"))
}

/// UDA, benchmark population and per-scenario rho of one SDS.
type SdsRow<'a> = (&'a str, usize, BTreeMap<Scenario, Option<f64>>);

fn correlation_table(report: &SensitivityReport) -> Table {
    let scenarios = report.scenarios();
    let mut by_sds: BTreeMap<&str, SdsRow> = BTreeMap::new();
    for c in &report.sensitivity.correlations {
        let e = by_sds.entry(&c.sds).or_insert((&c.uda, 0, BTreeMap::new()));
        if c.scenario == report.metadata.benchmark {
            e.1 = c.n;
        }
        e.2.insert(c.scenario, c.rho);
    }
    let mut header = vec!["SDS".to_string(), "UDA".into(), "n".into()];
    header.extend(scenarios.iter().map(|s| format!("SS_{}", s.tag())));
    let rows = by_sds
        .into_iter()
        .map(|(sds, (uda, n, rhos))| {
            let mut row = vec![sds.to_string(), uda.to_string(), n.to_string()];
            row.extend(scenarios.iter().map(|s| fmt_rho(rhos.get(s).copied().flatten())));
            row
        })
        .collect();
    Table {
        name: "sds_correlations",
        title: format!(
            "Spearman correlations between each scenario and the benchmark (SS_{}), per SDS",
            report.metadata.benchmark.tag()
        ),
        header,
        rows,
    }
}

fn descriptives_table(report: &SensitivityReport) -> Table {
    let header = [
        "UDA", "Scenario", "SDSs", "Mean", "St.dev.", "Median", "Minimum", "Maximum",
    ]
    .map(String::from)
    .to_vec();
    let mut stats: Vec<_> = report.sensitivity.uda_stats.iter().collect();
    stats.sort_by(|a, b| (a.scenario, &a.uda).cmp(&(b.scenario, &b.uda)));
    let rows = stats
        .into_iter()
        .map(|u| {
            vec![
                u.uda.clone(),
                format!("SS_{}", u.scenario.tag()),
                u.n_sds.to_string(),
                format!("{:.3}", u.mean),
                format!("{:.3}", u.sd),
                format!("{:.3}", u.median),
                format!("{:.3}", u.min),
                format!("{:.3}", u.max),
            ]
        })
        .collect();
    Table {
        name: "uda_descriptives",
        title: format!(
            "Descriptive statistics of per-SDS correlations with the benchmark (SS_{}), by UDA",
            report.metadata.benchmark.tag()
        ),
        header,
        rows,
    }
}

fn shift_table(
    report: &SensitivityReport,
    name: &'static str,
    title: &str,
    pick: impl Fn(&ShiftReport) -> Option<f64>,
) -> Table {
    let scenarios = report.scenarios();
    let mut by_uda: BTreeMap<&str, BTreeMap<Scenario, Option<f64>>> = BTreeMap::new();
    for s in &report.sensitivity.shifts {
        by_uda.entry(&s.uda).or_default().insert(s.scenario, pick(s));
    }
    let total = by_uda.remove(TOTAL);
    let mut header = vec!["UDA".to_string()];
    header.extend(scenarios.iter().map(|s| format!("SS_{}", s.tag())));
    let row = |label: &str, values: &BTreeMap<Scenario, Option<f64>>| {
        let mut r = vec![label.to_string()];
        r.extend(scenarios.iter().map(|s| fmt_pct(values.get(s).copied().flatten())));
        r
    };
    let mut rows: Vec<Vec<String>> = by_uda.iter().map(|(uda, v)| row(uda, v)).collect();
    if let Some(t) = total {
        rows.push(row(TOTAL, &t));
    }
    Table {
        name,
        title: title.to_string(),
        header,
        rows,
    }
}

/// The five report tables: per-SDS correlations, per-UDA descriptives, and
/// the quartile, top and bottom shift tables.
pub fn render_tables(report: &SensitivityReport) -> Vec<Table> {
    vec![
        correlation_table(report),
        descriptives_table(report),
        shift_table(
            report,
            "quartile_shift",
            "Percentage of researchers per UDA that change quartile rank with respect to the benchmark",
            |s| s.pct_quartile_change,
        ),
        shift_table(
            report,
            "top_shift",
            "Percentage of benchmark top-quartile researchers per UDA who do not result as top",
            |s| s.pct_top_lost,
        ),
        shift_table(
            report,
            "bottom_shift",
            "Percentage of benchmark bottom-quartile researchers per UDA who do not result as bottom",
            |s| s.pct_bottom_lost,
        ),
    ]
}

pub fn render_text(tables: &[Table]) -> String {
    tables.iter().map(Table::to_aligned).collect::<Vec<_>>().join("\n")
}

/// Writes each table as a delimited file plus `tables.txt` with all of them
/// aligned. Returns the written paths.
pub fn write_tables(report: &SensitivityReport, dir: &Path, delimiter: u8, extension: &str) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let tables = render_tables(report);
    let mut written = Vec::new();
    for t in &tables {
        let path = dir.join(format!("{}.{extension}", t.name));
        fs::write(&path, t.to_delimited(delimiter)?).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    let path = dir.join("tables.txt");
    fs::write(&path, render_text(&tables)).map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting() {
        assert_eq!(fmt_rho(Some(0.98016)), "+0.980");
        assert_eq!(fmt_rho(Some(-1.0)), "-1.000");
        assert_eq!(fmt_rho(None), "-");
        assert_eq!(fmt_pct(Some(18.649)), "18.6");
        assert_eq!(fmt_pct(None), "n/a");
    }

    #[test]
    fn aligned_layout() {
        let t = Table {
            name: "t",
            title: "T".into(),
            header: vec!["UDA".into(), "SS_CIT".into()],
            rows: vec![
                vec!["Physics".into(), "1.5".into()],
                vec!["Total".into(), "12.0".into()],
            ],
        };
        assert_eq!(t.to_aligned(), "T\nUDA      SS_CIT\nPhysics     1.5\nTotal      12.0\n");
        assert_eq!(t.to_delimited(b',').unwrap(), "UDA,SS_CIT\nPhysics,1.5\nTotal,12.0\n");
    }
}
