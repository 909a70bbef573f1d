use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, Context, Result};
use citescale::pipeline::OutputFormat;
use citescale::synth::SynthConfig;
use citescale::Scenario;
use serde::de::DeserializeOwned;
use serde::Deserialize;

/// Contents of an `analyze --config` file. Every key is optional; relative
/// paths are resolved against the file's directory.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeFile {
    pub pubs: Option<PathBuf>,
    pub researchers: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub benchmark: Option<Scenario>,
    pub scenarios: Option<Vec<Scenario>>,
    pub sds_threshold: Option<f64>,
    pub seed: Option<u64>,
    pub format: Option<OutputFormat>,
    pub delimiter: Option<char>,
    pub window: Option<[i32; 2]>,
    pub census_date: Option<String>,
    pub impacts: Option<bool>,
    /// Generator settings for synthetic runs.
    pub synth: Option<SynthConfig>,
}

impl AnalyzeFile {
    pub fn read(path: &Path) -> Result<Self> {
        read_toml(path)
    }
}

pub fn read_toml<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// `START-END` or a single value meaning `START-START`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range<T> {
    pub start: T,
    pub end: T,
}

impl<T> FromStr for Range<T>
where
    T: FromStr + Copy,
    T::Err: Display,
{
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let parse = |v: &str| v.trim().parse::<T>().map_err(|e| anyhow!("`{v}`: {e}"));
        // a leading '-' would be a sign, so split after the first character
        match s.get(1..).and_then(|rest| rest.find(['-', ':'])).map(|i| i + 1) {
            Some(i) => Ok(Range {
                start: parse(&s[..i])?,
                end: parse(&s[i + 1..])?,
            }),
            None => {
                let v = parse(s)?;
                Ok(Range { start: v, end: v })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(
            "2004-2008".parse::<Range<i32>>().unwrap(),
            Range { start: 2004, end: 2008 }
        );
        assert_eq!("2006".parse::<Range<i32>>().unwrap(), Range { start: 2006, end: 2006 });
        assert_eq!("2.5:3.5".parse::<Range<f64>>().unwrap(), Range { start: 2.5, end: 3.5 });
        assert!("a-b".parse::<Range<i32>>().is_err());
    }

    #[test]
    fn analyze_file_keys() {
        let f: AnalyzeFile = toml::from_str(
            "benchmark = \"M0\"\nscenarios = [\"CIT\", \"M0\"]\nformat = \"tsv\"\n[synth]\nseed = 9\nn_sds = 2\n",
        )
        .unwrap();
        assert_eq!(f.benchmark, Some(Scenario::M0));
        assert_eq!(f.format, Some(OutputFormat::Tsv));
        assert_eq!(f.synth.unwrap().n_sds, 2);
        assert!(toml::from_str::<AnalyzeFile>("bogus = 1").is_err());
    }
}
