use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{file}:{line}: column `{column}`: {message}")]
    Malformed {
        file: String,
        line: u64,
        column: String,
        message: String,
    },

    #[error("{file}:{line}: {source}")]
    Csv {
        file: String,
        line: u64,
        #[source]
        source: csv::Error,
    },

    #[error("{file}:{line}: column `author_ids`: publication `{pub_id}` references unknown researcher `{author_id}`")]
    DanglingAuthor {
        file: String,
        line: u64,
        pub_id: String,
        author_id: String,
    },

    #[error("{file}:{line}: column `year`: year {year} outside observation window {start}-{end}")]
    YearOutsideWindow {
        file: String,
        line: u64,
        year: i32,
        start: i32,
        end: i32,
    },

    #[error("{file}:{line}: column `{column}`: duplicate id `{id}` with conflicting fields")]
    ConflictingDuplicate {
        file: String,
        line: u64,
        column: String,
        id: String,
    },

    #[error("{file}:{line}: column `uda`: SDS `{sds}` already mapped to UDA `{existing}`, found `{found}`")]
    InconsistentTaxonomy {
        file: String,
        line: u64,
        sds: String,
        existing: String,
        found: String,
    },

    #[error("{file}: no researchers")]
    EmptyResearchers { file: String },

    #[error("invalid observation window {start}-{end}")]
    InvalidWindow { start: i32, end: i32 },

    #[error("no baseline group for year {year}, category `{category}`")]
    MissingGroup { year: i32, category: String },

    #[error("publication `{pub_id}` is inconsistent with baseline group ({year}, `{category}`): {reason}")]
    InconsistentBaseline {
        pub_id: String,
        year: i32,
        category: String,
        reason: String,
    },

    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("SDS `{sds}`, scenario {scenario}: {source}")]
    Ranking {
        sds: String,
        scenario: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("writing {what}: {source}")]
    Export {
        what: String,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: malformed report: {source}")]
    Report {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    /// Stable kebab-case identifier, used for machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Malformed { .. } => "malformed-row",
            Error::Csv { .. } => "malformed-row",
            Error::DanglingAuthor { .. } => "dangling-author",
            Error::YearOutsideWindow { .. } => "year-outside-window",
            Error::ConflictingDuplicate { .. } => "conflicting-duplicate",
            Error::InconsistentTaxonomy { .. } => "inconsistent-taxonomy",
            Error::EmptyResearchers { .. } => "empty-researchers",
            Error::InvalidWindow { .. } => "invalid-window",
            Error::MissingGroup { .. } => "missing-group",
            Error::InconsistentBaseline { .. } => "inconsistent-baseline",
            Error::UndefinedCorrelation(_) => "undefined-correlation",
            Error::InvalidConfig(_) => "invalid-config",
            Error::Ranking { source, .. } => source.kind(),
            Error::Io { .. } | Error::Export { .. } => "io",
            Error::Report { .. } => "malformed-report",
        }
    }

    pub(crate) fn export(what: &str) -> impl Fn(csv::Error) -> Error + '_ {
        move |source| Error::Export {
            what: what.into(),
            source,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
