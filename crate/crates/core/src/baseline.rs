//! Per-(year, subject category) citation statistics used as scaling factors.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Corpus;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineStats {
    pub year: i32,
    pub category: String,
    pub n_total: usize,
    pub n_cited: usize,
    /// Mean citations over all publications of the group.
    pub a: f64,
    /// Mean citations over cited publications; `None` when nothing is cited.
    pub a0: Option<f64>,
    /// Median citations over cited publications; `None` when nothing is cited.
    pub m0: Option<f64>,
    /// All citation counts of the group, descending.
    pub sorted_citations: Vec<u64>,
}

impl BaselineStats {
    /// Computes the statistics of one group from its citation counts.
    pub fn from_citations(year: i32, category: impl Into<String>, mut citations: Vec<u64>) -> Self {
        citations.sort_unstable_by(|a, b| b.cmp(a));
        let n_total = citations.len();
        let n_cited = citations.iter().take_while(|&&c| c > 0).count();
        // Counts stay far below 2^53, so the sum is exact in f64.
        let sum: u64 = citations.iter().sum();
        let a = if n_total == 0 { 0.0 } else { sum as f64 / n_total as f64 };
        let (a0, m0) = if n_cited == 0 {
            (None, None)
        } else {
            let cited = &citations[..n_cited];
            let mid = n_cited / 2;
            let median = if n_cited % 2 == 1 {
                cited[mid] as f64
            } else {
                (cited[mid - 1] as f64 + cited[mid] as f64) / 2.0
            };
            (Some(sum as f64 / n_cited as f64), Some(median))
        };
        BaselineStats {
            year,
            category: category.into(),
            n_total,
            n_cited,
            a,
            a0,
            m0,
            sorted_citations: citations,
        }
    }

    /// 1-based rank of a citation count within the group, ties sharing the
    /// best rank of their block. `None` if no member has that count.
    pub fn best_rank(&self, citations: u64) -> Option<usize> {
        let above = self.sorted_citations.partition_point(|&c| c > citations);
        (self.sorted_citations.get(above) == Some(&citations)).then_some(above + 1)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BaselineTable {
    groups: BTreeMap<i32, BTreeMap<String, BaselineStats>>,
}

impl BaselineTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, stats: BaselineStats) {
        self.groups
            .entry(stats.year)
            .or_default()
            .insert(stats.category.clone(), stats);
    }

    pub fn lookup(&self, year: i32, category: &str) -> Result<&BaselineStats> {
        self.groups
            .get(&year)
            .and_then(|g| g.get(category))
            .ok_or_else(|| Error::MissingGroup {
                year,
                category: category.into(),
            })
    }

    /// Groups ordered by year, then category.
    pub fn iter(&self) -> impl Iterator<Item = &BaselineStats> {
        self.groups.values().flat_map(|g| g.values())
    }

    pub fn len(&self) -> usize {
        self.groups.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Builds one [`BaselineStats`] per (year, category) pair of the corpus. A
/// publication listed under k categories counts once in each of them.
pub fn compute_baselines(corpus: &Corpus) -> BaselineTable {
    let mut grouped: HashMap<(i32, &str), Vec<u64>> = HashMap::new();
    for p in corpus.publications() {
        for c in &p.categories {
            grouped.entry((p.year, c.as_str())).or_default().push(p.citations);
        }
    }
    let stats: Vec<BaselineStats> = grouped
        .into_par_iter()
        .map(|((year, category), citations)| BaselineStats::from_citations(year, category, citations))
        .collect();
    let mut table = BaselineTable::new();
    for s in stats {
        table.insert(s);
    }
    table
}

fn fixed6(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

/// Writes `year,category,n_total,n_cited,a,a0,m0`.
pub fn write_baselines<W: Write>(table: &BaselineTable, out: W, delimiter: u8) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().delimiter(delimiter).from_writer(out);
    w.write_record(["year", "category", "n_total", "n_cited", "a", "a0", "m0"])?;
    for s in table.iter() {
        w.write_record([
            s.year.to_string(),
            s.category.clone(),
            s.n_total.to_string(),
            s.n_cited.to_string(),
            fixed6(Some(s.a)),
            fixed6(s.a0),
            fixed6(s.m0),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Publication, Researcher, YearWindow};
    use proptest::prelude::*;

    fn stats(c: &[u64]) -> BaselineStats {
        BaselineStats::from_citations(2004, "PY", c.to_vec())
    }

    /// Direct sort-and-average, independent of `from_citations`.
    fn oracle(c: &[u64]) -> (f64, Option<f64>, Option<f64>) {
        let mut cited: Vec<u64> = c.iter().copied().filter(|&x| x > 0).collect();
        cited.sort();
        let a = c.iter().sum::<u64>() as f64 / c.len() as f64;
        if cited.is_empty() {
            return (a, None, None);
        }
        let n = cited.len();
        let a0 = cited.iter().sum::<u64>() as f64 / n as f64;
        let m0 = if n % 2 == 1 {
            cited[n / 2] as f64
        } else {
            (cited[n / 2 - 1] + cited[n / 2]) as f64 / 2.0
        };
        (a, Some(a0), Some(m0))
    }

    #[test]
    fn hand_counted_group() {
        let s = stats(&[0, 2, 4]);
        assert_eq!((s.n_total, s.n_cited), (3, 2));
        assert_eq!((s.a, s.a0, s.m0), (2.0, Some(3.0), Some(3.0)));
        assert_eq!(s.sorted_citations, vec![4, 2, 0]);
    }

    #[test]
    fn even_cited_median() {
        let s = stats(&[1, 2, 3, 10]);
        assert_eq!(oracle(&[1, 2, 3, 10]), (4.0, Some(4.0), Some(2.5)));
        assert_eq!((s.a, s.a0, s.m0), (4.0, Some(4.0), Some(2.5)));
    }

    #[test]
    fn all_uncited_group() {
        let s = stats(&[0, 0]);
        assert_eq!((s.a, s.a0, s.m0, s.n_cited), (0.0, None, None, 0));
    }

    #[test]
    fn best_rank_ties() {
        let s = stats(&[5, 3, 5]);
        assert_eq!(s.best_rank(5), Some(1));
        assert_eq!(s.best_rank(3), Some(3));
        assert_eq!(s.best_rank(4), None);
    }

    #[test]
    fn table_lookup() {
        let researchers = vec![Researcher {
            researcher_id: "r".into(),
            sds: "S".into(),
            uda: "U".into(),
        }];
        let pubs = vec![
            Publication {
                pub_id: "p1".into(),
                year: 2004,
                citations: 6,
                categories: vec!["DB".into(), "KM".into()],
                author_ids: vec!["r".into()],
            },
            Publication {
                pub_id: "p2".into(),
                year: 2005,
                citations: 0,
                categories: vec!["DB".into()],
                author_ids: vec!["r".into()],
            },
        ];
        let c = Corpus::new(pubs, researchers, YearWindow::new(2004, 2005).unwrap(), None).unwrap();
        let t = compute_baselines(&c);
        assert_eq!(t.len(), 3);
        assert_eq!(t.lookup(2004, "KM").unwrap().a, 6.0);
        assert_eq!(t.lookup(2005, "DB").unwrap().a0, None);
        assert!(matches!(
            t.lookup(2006, "DB"),
            Err(Error::MissingGroup { year: 2006, .. })
        ));
        let keys: Vec<_> = t.iter().map(|s| (s.year, s.category.as_str())).collect();
        assert_eq!(keys, vec![(2004, "DB"), (2004, "KM"), (2005, "DB")]);
    }

    #[test]
    fn export_format() {
        let mut t = BaselineTable::new();
        t.insert(stats(&[0, 2, 4]));
        t.insert(BaselineStats::from_citations(2004, "UI", vec![0]));
        let mut buf = Vec::new();
        write_baselines(&t, &mut buf, b',').unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "year,category,n_total,n_cited,a,a0,m0\n\
             2004,PY,3,2,2.000000,3.000000,3.000000\n\
             2004,UI,1,0,0.000000,,\n"
        );
    }

    proptest! {
        #[test]
        fn matches_oracle(c in prop::collection::vec(0u64..40, 1..=12)) {
            let s = stats(&c);
            let (a, a0, m0) = oracle(&c);
            prop_assert_eq!(s.a, a);
            prop_assert_eq!(s.a0, a0);
            prop_assert_eq!(s.m0, m0);
        }

        #[test]
        fn singleton_identity(c in 1u64..100_000) {
            let s = stats(&[c]);
            let v = c as f64;
            prop_assert_eq!((s.a, s.a0, s.m0), (v, Some(v), Some(v)));
        }

        #[test]
        fn mean_identity_and_median_bracket(c in prop::collection::vec(0u64..1000, 1..60)) {
            let s = stats(&c);
            prop_assert!(s.n_cited <= s.n_total);
            if let (Some(a0), Some(m0)) = (s.a0, s.m0) {
                let via_a0 = s.n_cited as f64 / s.n_total as f64 * a0;
                prop_assert!((s.a - via_a0).abs() <= 4.0 * f64::EPSILON * s.a.max(1.0));
                prop_assert!(s.a <= a0 + 4.0 * f64::EPSILON * a0);
                prop_assert!(a0 >= 1.0 && m0 >= 1.0);
                let cited = c.iter().filter(|&&x| x > 0);
                prop_assert!(*cited.clone().min().unwrap() as f64 <= m0);
                prop_assert!(m0 <= *cited.max().unwrap() as f64);
            }
        }

        #[test]
        fn integer_scale_equivariance(c in prop::collection::vec(0u64..1000, 1..40), k in 1u64..50) {
            let s = stats(&c);
            let scaled = stats(&c.iter().map(|x| x * k).collect::<Vec<_>>());
            let kf = k as f64;
            let close = |x: f64, y: f64| (x - y).abs() <= 2.0 * f64::EPSILON * y.abs().max(1.0);
            prop_assert_eq!((scaled.n_total, scaled.n_cited), (s.n_total, s.n_cited));
            prop_assert!(close(scaled.a, kf * s.a));
            prop_assert_eq!(scaled.a0.is_some(), s.a0.is_some());
            if let (Some(x), Some(y)) = (scaled.a0, s.a0) { prop_assert!(close(x, kf * y)); }
            // medians of integers are exact halves, so scaling is exact
            prop_assert_eq!(scaled.m0, s.m0.map(|m| kf * m));
        }
    }
}
