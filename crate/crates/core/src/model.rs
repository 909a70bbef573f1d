//! Corpus domain types, CSV ingest and the SDS coverage filter.
//!
//! A [`Corpus`] is immutable once built. Publications are counted in full:
//! every researcher listed in `author_ids` is credited with the whole
//! publication, and co-authors outside the corpus are simply not listed.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use csv::{ReaderBuilder, StringRecord, WriterBuilder};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Separator for multi-valued cells (`categories`, `author_ids`).
pub const INNER_SEPARATOR: char = ';';

pub const PUBLICATION_COLUMNS: [&str; 5] = ["pub_id", "year", "citations", "categories", "author_ids"];
pub const RESEARCHER_COLUMNS: [&str; 3] = ["researcher_id", "sds", "uda"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Publication {
    pub pub_id: String,
    pub year: i32,
    pub citations: u64,
    /// Subject categories in input order, without duplicates.
    pub categories: Vec<String>,
    pub author_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Researcher {
    pub researcher_id: String,
    pub sds: String,
    pub uda: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct YearWindow {
    pub start: i32,
    pub end: i32,
}

impl YearWindow {
    pub fn new(start: i32, end: i32) -> Result<Self> {
        if start > end {
            return Err(Error::InvalidWindow { start, end });
        }
        Ok(YearWindow { start, end })
    }

    pub fn contains(&self, year: i32) -> bool {
        (self.start..=self.end).contains(&year)
    }
}

/// SDS → UDA mapping.
pub type Taxonomy = BTreeMap<String, String>;

#[derive(Debug, Clone)]
pub struct Corpus {
    publications: Vec<Publication>,
    researchers: Vec<Researcher>,
    window: YearWindow,
    census_date: Option<String>,
    researcher_index: HashMap<String, usize>,
    /// Publication indices per researcher (parallel to `researchers`).
    authored: Vec<Vec<usize>>,
}

impl PartialEq for Corpus {
    fn eq(&self, other: &Self) -> bool {
        self.publications == other.publications
            && self.researchers == other.researchers
            && self.window == other.window
            && self.census_date == other.census_date
    }
}

impl Corpus {
    /// Builds a corpus from in-memory parts, checking every corpus invariant.
    pub fn new(
        publications: Vec<Publication>,
        researchers: Vec<Researcher>,
        window: YearWindow,
        census_date: Option<String>,
    ) -> Result<Self> {
        const SOURCE: &str = "<corpus>";
        let mut sds_uda: HashMap<&str, &str> = HashMap::new();
        let mut seen = HashSet::new();
        for (i, r) in researchers.iter().enumerate() {
            let line = i as u64 + 1;
            for (column, value) in [("researcher_id", &r.researcher_id), ("sds", &r.sds), ("uda", &r.uda)] {
                if value.trim().is_empty() {
                    return Err(malformed(SOURCE, line, column, "empty value"));
                }
            }
            if !seen.insert(r.researcher_id.as_str()) {
                return Err(Error::ConflictingDuplicate {
                    file: SOURCE.into(),
                    line,
                    column: "researcher_id".into(),
                    id: r.researcher_id.clone(),
                });
            }
            check_taxonomy(&mut sds_uda, r, SOURCE, line)?;
        }

        let mut pub_ids = HashSet::new();
        for (i, p) in publications.iter().enumerate() {
            let line = i as u64 + 1;
            if p.categories.is_empty() {
                return Err(malformed(SOURCE, line, "categories", "no subject category"));
            }
            if p.author_ids.is_empty() {
                return Err(malformed(SOURCE, line, "author_ids", "no author"));
            }
            for (column, values) in [("categories", &p.categories), ("author_ids", &p.author_ids)] {
                let distinct: HashSet<&String> = values.iter().collect();
                if distinct.len() != values.len() {
                    return Err(malformed(SOURCE, line, column, "repeated value"));
                }
            }
            if !pub_ids.insert(p.pub_id.as_str()) {
                return Err(Error::ConflictingDuplicate {
                    file: SOURCE.into(),
                    line,
                    column: "pub_id".into(),
                    id: p.pub_id.clone(),
                });
            }
            if !window.contains(p.year) {
                return Err(Error::YearOutsideWindow {
                    file: SOURCE.into(),
                    line,
                    year: p.year,
                    start: window.start,
                    end: window.end,
                });
            }
            if let Some(a) = p.author_ids.iter().find(|a| !seen.contains(a.as_str())) {
                return Err(Error::DanglingAuthor {
                    file: SOURCE.into(),
                    line,
                    pub_id: p.pub_id.clone(),
                    author_id: a.clone(),
                });
            }
        }
        Ok(Self::from_parts(publications, researchers, window, census_date))
    }

    /// Assembles a corpus whose invariants the caller has already established.
    fn from_parts(
        publications: Vec<Publication>,
        researchers: Vec<Researcher>,
        window: YearWindow,
        census_date: Option<String>,
    ) -> Self {
        let researcher_index: HashMap<String, usize> = researchers
            .iter()
            .enumerate()
            .map(|(i, r)| (r.researcher_id.clone(), i))
            .collect();
        let mut authored = vec![Vec::new(); researchers.len()];
        for (p_idx, p) in publications.iter().enumerate() {
            for a in &p.author_ids {
                authored[researcher_index[a]].push(p_idx);
            }
        }
        Corpus {
            publications,
            researchers,
            window,
            census_date,
            researcher_index,
            authored,
        }
    }

    pub fn publications(&self) -> &[Publication] {
        &self.publications
    }

    pub fn researchers(&self) -> &[Researcher] {
        &self.researchers
    }

    pub fn window(&self) -> YearWindow {
        self.window
    }

    pub fn census_date(&self) -> Option<&str> {
        self.census_date.as_deref()
    }

    pub fn is_empty(&self) -> bool {
        self.publications.is_empty()
    }

    pub fn researcher(&self, id: &str) -> Option<&Researcher> {
        self.researcher_index.get(id).map(|&i| &self.researchers[i])
    }

    /// Publications credited to a researcher, in corpus order.
    pub fn publications_of<'a>(&'a self, id: &str) -> impl Iterator<Item = &'a Publication> + 'a {
        let indices: &[usize] = match self.researcher_index.get(id) {
            Some(&i) => &self.authored[i],
            None => &[],
        };
        indices.iter().map(move |&i| &self.publications[i])
    }

    pub(crate) fn publication_indices_of(&self, researcher_pos: usize) -> &[usize] {
        &self.authored[researcher_pos]
    }

    pub fn taxonomy(&self) -> Taxonomy {
        self.researchers
            .iter()
            .map(|r| (r.sds.clone(), r.uda.clone()))
            .collect()
    }

    /// Researcher positions grouped by SDS, SDS codes ascending.
    pub(crate) fn researchers_by_sds(&self) -> BTreeMap<&str, Vec<usize>> {
        let mut out: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, r) in self.researchers.iter().enumerate() {
            out.entry(r.sds.as_str()).or_default().push(i);
        }
        out
    }

    pub fn sds_codes(&self) -> Vec<&str> {
        let set: BTreeSet<&str> = self.researchers.iter().map(|r| r.sds.as_str()).collect();
        set.into_iter().collect()
    }
}

fn check_taxonomy<'a>(sds_uda: &mut HashMap<&'a str, &'a str>, r: &'a Researcher, file: &str, line: u64) -> Result<()> {
    match sds_uda.get(r.sds.as_str()) {
        Some(&uda) if uda != r.uda => Err(Error::InconsistentTaxonomy {
            file: file.into(),
            line,
            sds: r.sds.clone(),
            existing: uda.into(),
            found: r.uda.clone(),
        }),
        Some(_) => Ok(()),
        None => {
            sds_uda.insert(&r.sds, &r.uda);
            Ok(())
        }
    }
}

fn malformed(file: &str, line: u64, column: &str, message: impl Into<String>) -> Error {
    Error::Malformed {
        file: file.into(),
        line,
        column: column.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub delimiter: u8,
    /// Observation window; inferred from the publication years when absent.
    pub window: Option<YearWindow>,
    pub census_date: Option<String>,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            delimiter: b',',
            window: None,
            census_date: None,
        }
    }
}

struct Table<R: Read> {
    name: String,
    reader: csv::Reader<R>,
    columns: Vec<usize>,
}

impl<R: Read> Table<R> {
    fn open(source: R, name: &str, delimiter: u8, required: &[&str]) -> Result<Self> {
        let mut reader = ReaderBuilder::new()
            .delimiter(delimiter)
            .has_headers(true)
            .from_reader(source);
        let headers = reader
            .headers()
            .map_err(|source| Error::Csv {
                file: name.into(),
                line: 1,
                source,
            })?
            .clone();
        let columns = required
            .iter()
            .map(|col| {
                headers
                    .iter()
                    .position(|h| h.trim() == *col)
                    .ok_or_else(|| malformed(name, 1, col, "missing header column"))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Table {
            name: name.into(),
            reader,
            columns,
        })
    }

    fn records(&mut self) -> impl Iterator<Item = Result<(u64, StringRecord)>> + '_ {
        let name = self.name.clone();
        self.reader.records().map(move |rec| {
            let rec = rec.map_err(|source| Error::Csv {
                file: name.clone(),
                line: source.position().map_or(0, |p| p.line()),
                source,
            })?;
            let line = rec.position().map_or(0, |p| p.line());
            Ok((line, rec))
        })
    }
}

fn cell<'r>(rec: &'r StringRecord, idx: usize, column: &str, file: &str, line: u64) -> Result<&'r str> {
    let v = rec.get(idx).map(str::trim).unwrap_or("");
    if v.is_empty() {
        return Err(malformed(file, line, column, "empty value"));
    }
    Ok(v)
}

fn multi(value: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for item in value.split(INNER_SEPARATOR).map(str::trim).filter(|s| !s.is_empty()) {
        if !out.iter().any(|o| o == item) {
            out.push(item.to_string());
        }
    }
    out
}

/// Parses and validates a publications/researchers pair.
///
/// Rows with a repeated id are dropped when identical to the first
/// occurrence and rejected otherwise.
pub fn load_corpus<P: Read, R: Read>(
    publications: P,
    publications_name: &str,
    researchers: R,
    researchers_name: &str,
    options: &LoadOptions,
) -> Result<Corpus> {
    let researchers = read_researchers(researchers, researchers_name, options.delimiter)?;
    let known: HashSet<&str> = researchers.iter().map(|r| r.researcher_id.as_str()).collect();

    let mut table = Table::open(publications, publications_name, options.delimiter, &PUBLICATION_COLUMNS)?;
    let [c_id, c_year, c_cit, c_cat, c_auth] = [0, 1, 2, 3, 4].map(|i| table.columns[i]);
    let mut seen: HashMap<String, StringRecord> = HashMap::new();
    let mut rows: Vec<(u64, Publication)> = Vec::new();
    for rec in table.records() {
        let (line, rec) = rec?;
        let file = publications_name;
        let pub_id = cell(&rec, c_id, "pub_id", file, line)?;
        if let Some(first) = seen.get(pub_id) {
            if first == &rec {
                continue;
            }
            return Err(Error::ConflictingDuplicate {
                file: file.into(),
                line,
                column: "pub_id".into(),
                id: pub_id.into(),
            });
        }
        let year_raw = cell(&rec, c_year, "year", file, line)?;
        let year: i32 = year_raw
            .parse()
            .map_err(|_| malformed(file, line, "year", format!("expected integer year, found `{year_raw}`")))?;
        let cit_raw = cell(&rec, c_cit, "citations", file, line)?;
        let citations: u64 = cit_raw.parse().map_err(|_| {
            malformed(
                file,
                line,
                "citations",
                format!("expected non-negative integer, found `{cit_raw}`"),
            )
        })?;
        let categories = multi(cell(&rec, c_cat, "categories", file, line)?);
        if categories.is_empty() {
            return Err(malformed(file, line, "categories", "no subject category"));
        }
        let author_ids = multi(cell(&rec, c_auth, "author_ids", file, line)?);
        if author_ids.is_empty() {
            return Err(malformed(file, line, "author_ids", "no author"));
        }
        if let Some(a) = author_ids.iter().find(|a| !known.contains(a.as_str())) {
            return Err(Error::DanglingAuthor {
                file: file.into(),
                line,
                pub_id: pub_id.into(),
                author_id: a.clone(),
            });
        }
        if let Some(w) = options.window {
            if !w.contains(year) {
                return Err(Error::YearOutsideWindow {
                    file: file.into(),
                    line,
                    year,
                    start: w.start,
                    end: w.end,
                });
            }
        }
        seen.insert(pub_id.to_string(), rec.clone());
        rows.push((
            line,
            Publication {
                pub_id: pub_id.to_string(),
                year,
                citations,
                categories,
                author_ids,
            },
        ));
    }

    let window = match options.window {
        Some(w) => w,
        None => {
            let years = rows.iter().map(|(_, p)| p.year);
            match (years.clone().min(), years.max()) {
                (Some(start), Some(end)) => YearWindow { start, end },
                _ => YearWindow { start: 0, end: 0 },
            }
        }
    };
    let publications = rows.into_iter().map(|(_, p)| p).collect();
    Ok(Corpus::from_parts(
        publications,
        researchers,
        window,
        options.census_date.clone(),
    ))
}

fn read_researchers<R: Read>(source: R, name: &str, delimiter: u8) -> Result<Vec<Researcher>> {
    let mut table = Table::open(source, name, delimiter, &RESEARCHER_COLUMNS)?;
    let [c_id, c_sds, c_uda] = [0, 1, 2].map(|i| table.columns[i]);
    let mut seen: HashMap<String, StringRecord> = HashMap::new();
    let mut out = Vec::new();
    let mut sds_uda: HashMap<String, String> = HashMap::new();
    for rec in table.records() {
        let (line, rec) = rec?;
        let id = cell(&rec, c_id, "researcher_id", name, line)?;
        if let Some(first) = seen.get(id) {
            if first == &rec {
                continue;
            }
            return Err(Error::ConflictingDuplicate {
                file: name.into(),
                line,
                column: "researcher_id".into(),
                id: id.into(),
            });
        }
        let sds = cell(&rec, c_sds, "sds", name, line)?;
        let uda = cell(&rec, c_uda, "uda", name, line)?;
        match sds_uda.get(sds) {
            Some(existing) if existing != uda => {
                return Err(Error::InconsistentTaxonomy {
                    file: name.into(),
                    line,
                    sds: sds.into(),
                    existing: existing.clone(),
                    found: uda.into(),
                })
            }
            Some(_) => {}
            None => {
                sds_uda.insert(sds.into(), uda.into());
            }
        }
        seen.insert(id.to_string(), rec.clone());
        out.push(Researcher {
            researcher_id: id.into(),
            sds: sds.into(),
            uda: uda.into(),
        });
    }
    if out.is_empty() {
        return Err(Error::EmptyResearchers { file: name.into() });
    }
    Ok(out)
}

pub fn load_corpus_files(publications: &Path, researchers: &Path, options: &LoadOptions) -> Result<Corpus> {
    let pubs = File::open(publications).map_err(|e| Error::io(publications, e))?;
    let res = File::open(researchers).map_err(|e| Error::io(researchers, e))?;
    load_corpus(
        std::io::BufReader::new(pubs),
        &publications.display().to_string(),
        std::io::BufReader::new(res),
        &researchers.display().to_string(),
        options,
    )
}

/// Writes the corpus in the two-file delimited layout read by [`load_corpus`].
pub fn write_corpus<P: Write, R: Write>(
    corpus: &Corpus,
    publications: P,
    researchers: R,
    delimiter: u8,
) -> std::io::Result<()> {
    let sep = INNER_SEPARATOR.to_string();
    let mut w = WriterBuilder::new().delimiter(delimiter).from_writer(publications);
    w.write_record(PUBLICATION_COLUMNS)?;
    for p in &corpus.publications {
        w.write_record([
            p.pub_id.as_str(),
            &p.year.to_string(),
            &p.citations.to_string(),
            &p.categories.join(&sep),
            &p.author_ids.join(&sep),
        ])?;
    }
    w.flush()?;

    let mut w = WriterBuilder::new().delimiter(delimiter).from_writer(researchers);
    w.write_record(RESEARCHER_COLUMNS)?;
    for r in &corpus.researchers {
        w.write_record([&r.researcher_id, &r.sds, &r.uda])?;
    }
    w.flush()
}

/// Minimum share of publishing researchers an SDS needs to be analyzed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold(f64);

impl Threshold {
    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 && value <= 1.0 {
            Ok(Threshold(value))
        } else {
            Err(Error::InvalidConfig(format!("SDS threshold {value} not in (0, 1]")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for Threshold {
    fn default() -> Self {
        Threshold(0.5)
    }
}

#[derive(Debug, Clone)]
pub struct Filtered {
    pub corpus: Corpus,
    /// Excluded SDS codes, ascending.
    pub excluded: Vec<String>,
}

/// Keeps only the SDSs in which at least `threshold` of researchers hold a
/// publication. Publications left without any retained author are dropped;
/// surviving publications lose their removed co-authors.
pub fn filter_sds(corpus: &Corpus, threshold: Threshold) -> Filtered {
    let mut excluded = Vec::new();
    let mut keep_sds: HashSet<&str> = HashSet::new();
    for (sds, members) in corpus.researchers_by_sds() {
        let publishing = members.iter().filter(|&&i| !corpus.authored[i].is_empty()).count();
        // publishing / total >= threshold, without dividing
        if publishing as f64 >= threshold.value() * members.len() as f64 {
            keep_sds.insert(sds);
        } else {
            excluded.push(sds.to_string());
        }
    }

    let researchers: Vec<Researcher> = corpus
        .researchers
        .iter()
        .filter(|r| keep_sds.contains(r.sds.as_str()))
        .cloned()
        .collect();
    let retained: HashSet<&str> = researchers.iter().map(|r| r.researcher_id.as_str()).collect();
    let publications: Vec<Publication> = corpus
        .publications
        .iter()
        .filter_map(|p| {
            let authors: Vec<String> = p
                .author_ids
                .iter()
                .filter(|a| retained.contains(a.as_str()))
                .cloned()
                .collect();
            (!authors.is_empty()).then(|| Publication {
                author_ids: authors,
                ..p.clone()
            })
        })
        .collect();

    Filtered {
        corpus: Corpus::from_parts(publications, researchers, corpus.window, corpus.census_date.clone()),
        excluded,
    }
}
