//! End-to-end runs: ingest, baselines, rankings, sensitivity, outputs.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::baseline::{compute_baselines, write_baselines, BaselineTable};
use crate::error::{Error, Result};
use crate::impact::{write_impacts, Scenario};
use crate::model::{filter_sds, load_corpus_files, Corpus, Filtered, LoadOptions, Threshold, YearWindow};
use crate::ranking::{rank_all, write_rankings, RankingTable};
use crate::report::{conventions, RunMetadata, SensitivityReport};
use crate::sensitivity::{analyze_sensitivity, Sensitivity};
use crate::synth::{generate, SynthConfig, RNG_ALGORITHM};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusSource {
    Files {
        publications: PathBuf,
        researchers: PathBuf,
    },
    Synthetic(SynthConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Tsv,
}

impl OutputFormat {
    pub fn delimiter(self) -> u8 {
        match self {
            OutputFormat::Csv => b',',
            OutputFormat::Tsv => b'\t',
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Tsv => "tsv",
        }
    }
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "tsv" => Ok(OutputFormat::Tsv),
            other => Err(Error::InvalidConfig(format!(
                "unknown format `{other}` (expected csv or tsv)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub input: CorpusSource,
    /// Delimiter of the input files.
    pub input_delimiter: char,
    pub window: Option<YearWindow>,
    pub census_date: Option<String>,
    pub benchmark: Scenario,
    pub scenarios: Vec<Scenario>,
    pub sds_threshold: f64,
    /// Output location; not part of the configuration digest.
    #[serde(skip)]
    pub out_dir: PathBuf,
    pub format: OutputFormat,
    pub write_impacts: bool,
}

impl RunConfig {
    pub fn new(input: CorpusSource, out_dir: impl Into<PathBuf>) -> Self {
        RunConfig {
            input,
            input_delimiter: ',',
            window: None,
            census_date: None,
            benchmark: Scenario::BENCHMARK,
            scenarios: Scenario::ALL.to_vec(),
            sds_threshold: 0.5,
            out_dir: out_dir.into(),
            format: OutputFormat::Csv,
            write_impacts: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        Threshold::new(self.sds_threshold)?;
        if self.scenarios.is_empty() {
            return Err(Error::InvalidConfig("empty scenario set".into()));
        }
        if !self.scenarios.contains(&self.benchmark) {
            return Err(Error::InvalidConfig(format!(
                "benchmark {} is not in the scenario set",
                self.benchmark
            )));
        }
        if !self.input_delimiter.is_ascii() {
            return Err(Error::InvalidConfig(
                "input delimiter must be a single ASCII character".into(),
            ));
        }
        match &self.input {
            CorpusSource::Files {
                publications,
                researchers,
            } => {
                for p in [publications, researchers] {
                    if !p.is_file() {
                        return Err(Error::io(
                            p.clone(),
                            std::io::Error::new(std::io::ErrorKind::NotFound, "input file not found"),
                        ));
                    }
                }
                Ok(())
            }
            CorpusSource::Synthetic(s) => s.validate(),
        }
    }

    /// Scenarios deduplicated, in canonical order.
    pub fn scenario_set(&self) -> Vec<Scenario> {
        Scenario::ALL
            .into_iter()
            .filter(|s| self.scenarios.contains(s))
            .collect()
    }

    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(json))
    }
}

/// Everything computed by one run, before anything is written.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub filtered: Filtered,
    pub baselines: BaselineTable,
    pub rankings: RankingTable,
    pub sensitivity: Sensitivity,
}

/// Filter, standardize, rank and compare, all in memory.
pub fn run_analysis(
    corpus: &Corpus,
    scenarios: &[Scenario],
    benchmark: Scenario,
    threshold: Threshold,
) -> Result<Analysis> {
    let filtered = filter_sds(corpus, threshold);
    let baselines = compute_baselines(&filtered.corpus);
    let rankings = rank_all(&filtered.corpus, &baselines, scenarios)?;
    let taxonomy = filtered.corpus.taxonomy();
    let sensitivity = analyze_sensitivity(&rankings, &taxonomy, scenarios, benchmark);
    Ok(Analysis {
        filtered,
        baselines,
        rankings,
        sensitivity,
    })
}

pub fn load_input(config: &RunConfig) -> Result<Corpus> {
    match &config.input {
        CorpusSource::Files {
            publications,
            researchers,
        } => {
            let options = LoadOptions {
                delimiter: config.input_delimiter as u8,
                window: config.window,
                census_date: config.census_date.clone(),
            };
            load_corpus_files(publications, researchers, &options)
        }
        CorpusSource::Synthetic(s) => {
            let mut s = s.clone();
            if config.census_date.is_some() {
                s.census_date = config.census_date.clone();
            }
            generate(&s)
        }
    }
}

#[derive(Debug, Clone)]
pub struct AnalyzeOutcome {
    pub report: SensitivityReport,
    pub files: Vec<PathBuf>,
}

pub fn build_report(config: &RunConfig, analysis: &Analysis) -> SensitivityReport {
    let corpus = &analysis.filtered.corpus;
    let (seed, rng_algorithm) = match &config.input {
        CorpusSource::Synthetic(s) => (Some(s.seed), Some(RNG_ALGORITHM.to_string())),
        CorpusSource::Files { .. } => (None, None),
    };
    SensitivityReport {
        metadata: RunMetadata {
            generator: format!("citescale {}", env!("CARGO_PKG_VERSION")),
            config_digest: config.digest(),
            config: serde_json::to_value(config).expect("config serializes"),
            seed,
            rng_algorithm,
            census_date: corpus.census_date().map(str::to_string),
            benchmark: config.benchmark,
            scenarios: config.scenario_set(),
            sds_threshold: config.sds_threshold,
            window: corpus.window(),
            n_publications: corpus.publications().len(),
            n_researchers: corpus.researchers().len(),
            excluded_sds: analysis.filtered.excluded.clone(),
            taxonomy: corpus.taxonomy(),
            conventions: conventions(),
        },
        sensitivity: analysis.sensitivity.clone(),
    }
}

/// Full batch run. Writes the baseline export, the ranking export and the
/// JSON report (plus the impact dump when requested) into `out_dir`. Nothing
/// is left behind on failure.
pub fn analyze(config: &RunConfig) -> Result<AnalyzeOutcome> {
    config.validate()?;
    let corpus = load_input(config)?;
    let scenarios = config.scenario_set();
    let threshold = Threshold::new(config.sds_threshold)?;
    let analysis = run_analysis(&corpus, &scenarios, config.benchmark, threshold)?;
    let report = build_report(config, &analysis);

    let delimiter = config.format.delimiter();
    let ext = config.format.extension();
    let mut outputs: Vec<(String, Vec<u8>)> = Vec::new();

    let mut buf = Vec::new();
    write_baselines(&analysis.baselines, &mut buf, delimiter).map_err(Error::export("baselines"))?;
    outputs.push((format!("baselines.{ext}"), buf));

    let mut buf = Vec::new();
    write_rankings(&analysis.rankings, &mut buf, delimiter).map_err(Error::export("rankings"))?;
    outputs.push((format!("rankings.{ext}"), buf));

    if config.write_impacts {
        let mut buf = Vec::new();
        write_impacts(
            analysis.filtered.corpus.publications(),
            &analysis.baselines,
            &scenarios,
            &mut buf,
            delimiter,
        )?;
        outputs.push((format!("impacts.{ext}"), buf));
    }
    outputs.push(("report.json".into(), report.to_json().into_bytes()));

    let files = write_all(&config.out_dir, &outputs)?;
    Ok(AnalyzeOutcome { report, files })
}

/// Writes every output to a temporary name first and renames only once all
/// writes succeeded; on failure every file this call created is removed.
pub fn write_all(dir: &Path, outputs: &[(String, Vec<u8>)]) -> Result<Vec<PathBuf>> {
    let created_dir = !dir.exists();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut temps = Vec::new();
    let mut finals = Vec::new();
    let result = (|| {
        for (name, bytes) in outputs {
            let tmp = dir.join(format!(".{name}.partial"));
            fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
            temps.push((tmp, dir.join(name)));
        }
        for (tmp, path) in &temps {
            fs::rename(tmp, path).map_err(|e| Error::io(path, e))?;
            finals.push(path.clone());
        }
        Ok(())
    })();
    if let Err(e) = result {
        for (tmp, _) in &temps {
            let _ = fs::remove_file(tmp);
        }
        for path in &finals {
            let _ = fs::remove_file(path);
        }
        if created_dir {
            let _ = fs::remove_dir(dir);
        }
        return Err(e);
    }
    Ok(finals)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        let mut c = RunConfig::new(CorpusSource::Synthetic(SynthConfig::default()), "out");
        assert!(c.validate().is_ok());
        c.scenarios = vec![Scenario::Cit];
        assert!(c.validate().is_err());
        c.scenarios = vec![Scenario::A0];
        c.sds_threshold = 0.0;
        assert!(c.validate().is_err());
        let missing = RunConfig::new(
            CorpusSource::Files {
                publications: "/nonexistent/pubs.csv".into(),
                researchers: "/nonexistent/res.csv".into(),
            },
            "out",
        );
        let err = missing.validate().unwrap_err();
        assert!(err.to_string().contains("/nonexistent/pubs.csv"));
    }

    #[test]
    fn digest_ignores_output_location() {
        let a = RunConfig::new(CorpusSource::Synthetic(SynthConfig::default()), "a");
        let b = RunConfig::new(CorpusSource::Synthetic(SynthConfig::default()), "b");
        assert_eq!(a.digest(), b.digest());
        assert_eq!(a.digest().len(), 64);
        let c = RunConfig {
            sds_threshold: 0.6,
            ..a.clone()
        };
        assert_ne!(a.digest(), c.digest());
    }

    #[test]
    fn scenario_set_is_canonical() {
        let mut c = RunConfig::new(CorpusSource::Synthetic(SynthConfig::default()), "o");
        c.scenarios = vec![Scenario::A0, Scenario::Cit, Scenario::A0];
        assert_eq!(c.scenario_set(), vec![Scenario::Cit, Scenario::A0]);
    }
}
