use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use citescale::model::{write_corpus, YearWindow};
use citescale::pipeline::{analyze, CorpusSource, OutputFormat, RunConfig};
use citescale::report::SensitivityReport;
use citescale::synth::{generate, SynthConfig, RNG_ALGORITHM};
use citescale::tables::{render_tables, render_text, write_tables};
use citescale::Scenario;
use clap::{Args, Parser, Subcommand};

mod config;

use config::{AnalyzeFile, Range};

#[derive(Parser, Debug)]
#[command(
    name = "citescale",
    version,
    about = "Field-normalized citation impact, researcher rankings and their sensitivity to the scaling factor"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Rank researchers under each scenario and compare against the benchmark.
    Analyze(AnalyzeArgs),
    /// Generate a synthetic publications/researchers corpus.
    Synth(SynthArgs),
    /// Render the report tables from a report.json.
    Tables(TablesArgs),
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    /// Publications file (pub_id, year, citations, categories, author_ids).
    #[arg(long, value_name = "FILE")]
    pubs: Option<PathBuf>,

    /// Researchers file (researcher_id, sds, uda).
    #[arg(long, value_name = "FILE")]
    researchers: Option<PathBuf>,

    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Benchmark scenario [default: A0].
    #[arg(long, value_name = "SCENARIO")]
    benchmark: Option<Scenario>,

    /// Comma-separated scenario set [default: CIT,PERC,A,M0,A0].
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    scenarios: Option<Vec<Scenario>>,

    /// Minimum share of publishing researchers for an SDS to be kept [default: 0.5].
    #[arg(long, value_name = "FRACTION")]
    sds_threshold: Option<f64>,

    /// Analyze a synthetic corpus generated with this seed (when no input files are given).
    #[arg(long)]
    seed: Option<u64>,

    /// Output table format [default: csv].
    #[arg(long, value_name = "csv|tsv")]
    format: Option<OutputFormat>,

    /// Field delimiter of the input files [default: ,].
    #[arg(long)]
    delimiter: Option<char>,

    /// Observation window, e.g. 2004-2008 [default: inferred from the data].
    #[arg(long, value_name = "START-END")]
    window: Option<Range<i32>>,

    /// Census date recorded in the report metadata.
    #[arg(long, value_name = "DATE")]
    census_date: Option<String>,

    /// Also write per-publication impact values.
    #[arg(long)]
    impacts: bool,

    /// TOML configuration file; flags take precedence.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,

    #[arg(long)]
    seed: Option<u64>,

    /// Number of SDSs.
    #[arg(long)]
    n_sds: Option<usize>,

    /// Number of UDAs.
    #[arg(long)]
    n_uda: Option<usize>,

    /// Researchers per SDS, e.g. 60-160.
    #[arg(long, value_name = "MIN-MAX")]
    researchers_per_sds: Option<Range<usize>>,

    /// Mean publications per active researcher.
    #[arg(long)]
    pubs_per_researcher: Option<f64>,

    /// Mean share of uncited publications.
    #[arg(long)]
    uncited_fraction: Option<f64>,

    /// Range of the per-category tail exponent, e.g. 2.5-3.5.
    #[arg(long, value_name = "MIN-MAX")]
    tail_exponent: Option<Range<f64>>,

    /// Publication years, e.g. 2004-2008.
    #[arg(long, value_name = "START-END")]
    years: Option<Range<i32>>,

    #[arg(long, value_name = "DATE")]
    census_date: Option<String>,

    /// Output file format [default: csv].
    #[arg(long, value_name = "csv|tsv")]
    format: Option<OutputFormat>,

    /// TOML file with generator settings; flags take precedence.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TablesArgs {
    /// Report written by `analyze`.
    #[arg(long, value_name = "FILE")]
    report: PathBuf,

    /// Output directory [default: the report's directory].
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,

    #[arg(long, value_name = "csv|tsv", default_value = "csv")]
    format: OutputFormat,
}

fn resolve_analyze(args: AnalyzeArgs) -> Result<RunConfig> {
    let (file, base) = match &args.config {
        Some(path) => (
            AnalyzeFile::read(path)?,
            path.parent().map(Path::to_path_buf).unwrap_or_default(),
        ),
        None => (AnalyzeFile::default(), PathBuf::new()),
    };
    let from_file = |p: Option<PathBuf>| p.map(|p| base.join(p));

    let pubs = args.pubs.or_else(|| from_file(file.pubs));
    let researchers = args.researchers.or_else(|| from_file(file.researchers));
    let seed = args.seed.or(file.seed);
    let input = match (pubs, researchers) {
        (Some(publications), Some(researchers)) => {
            if seed.is_some() {
                bail!("--seed only applies to synthetic input; drop it or the input files");
            }
            CorpusSource::Files {
                publications,
                researchers,
            }
        }
        (None, None) => {
            let mut synth = file.synth.unwrap_or_default();
            if let Some(seed) = seed {
                synth.seed = seed;
            }
            CorpusSource::Synthetic(synth)
        }
        (Some(_), None) => bail!("--researchers is required together with --pubs"),
        (None, Some(_)) => bail!("--pubs is required together with --researchers"),
    };
    let out = args
        .out
        .or_else(|| from_file(file.out))
        .context("an output directory is required (--out)")?;

    let mut config = RunConfig::new(input, out);
    if let Some(b) = args.benchmark.or(file.benchmark) {
        config.benchmark = b;
    }
    if let Some(s) = args.scenarios.or(file.scenarios) {
        config.scenarios = s;
    }
    if let Some(t) = args.sds_threshold.or(file.sds_threshold) {
        config.sds_threshold = t;
    }
    if let Some(f) = args.format.or(file.format) {
        config.format = f;
    }
    if let Some(d) = args.delimiter.or(file.delimiter) {
        config.input_delimiter = d;
    }
    if let Some(w) = args.window.map(|r| [r.start, r.end]).or(file.window) {
        config.window = Some(YearWindow::new(w[0], w[1])?);
    }
    config.census_date = args.census_date.or(file.census_date);
    config.write_impacts = args.impacts || file.impacts.unwrap_or(false);
    Ok(config)
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<()> {
    let config = resolve_analyze(args)?;
    let outcome = analyze(&config)?;
    let meta = &outcome.report.metadata;
    println!(
        "{} publications, {} researchers in {} ranked SDSs ({} excluded), window {}-{}",
        meta.n_publications,
        meta.n_researchers,
        meta.taxonomy.len(),
        meta.excluded_sds.len(),
        meta.window.start,
        meta.window.end
    );
    if let Some(seed) = meta.seed {
        println!("synthetic corpus, seed {seed}");
    }
    println!("config digest {}", meta.config_digest);
    println!("shifts against the {} benchmark:", meta.benchmark);
    for line in outcome.report.summary_lines() {
        println!("  {line}");
    }
    for f in &outcome.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Result<()> {
    let mut synth = match &args.config {
        Some(path) => config::read_toml::<SynthConfig>(path)?,
        None => SynthConfig::default(),
    };
    if let Some(v) = args.seed {
        synth.seed = v;
    }
    if let Some(v) = args.n_sds {
        synth.n_sds = v;
    }
    if let Some(v) = args.n_uda {
        synth.n_uda = v;
    }
    if let Some(r) = args.researchers_per_sds {
        synth.researchers_per_sds = [r.start, r.end];
    }
    if let Some(v) = args.pubs_per_researcher {
        synth.pubs_per_researcher = v;
    }
    if let Some(v) = args.uncited_fraction {
        synth.uncited_fraction = v;
    }
    if let Some(r) = args.tail_exponent {
        synth.tail_exponent = [r.start, r.end];
    }
    if let Some(r) = args.years {
        synth.years = [r.start, r.end];
    }
    if args.census_date.is_some() {
        synth.census_date = args.census_date;
    }

    let corpus = generate(&synth)?;
    let format = args.format.unwrap_or_default();
    let (mut pubs, mut res) = (Vec::new(), Vec::new());
    write_corpus(&corpus, &mut pubs, &mut res, format.delimiter())?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let ext = format.extension();
    let outputs = [
        (format!("publications.{ext}"), pubs),
        (format!("researchers.{ext}"), res),
    ];
    let files = citescale::pipeline::write_all(&args.out, &outputs)?;
    println!("seed {} ({RNG_ALGORITHM})", synth.seed);
    println!(
        "{} publications, {} researchers, {} SDSs",
        corpus.publications().len(),
        corpus.researchers().len(),
        synth.n_sds
    );
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn cmd_tables(args: TablesArgs) -> Result<()> {
    let report = SensitivityReport::read(&args.report)?;
    let out = match args.out {
        Some(dir) => dir,
        None => args.report.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    let files = write_tables(&report, &out, args.format.delimiter(), args.format.extension())?;
    print!("{}", render_text(&render_tables(&report)));
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn error_kind(e: &anyhow::Error) -> &'static str {
    match e.downcast_ref::<citescale::Error>() {
        Some(err) => err.kind(),
        None if e.downcast_ref::<std::io::Error>().is_some() => "io",
        None => "invalid-config",
    }
}

/// The error chain on one line, skipping causes already quoted by their parent.
fn one_line(e: &anyhow::Error) -> String {
    let mut message = String::new();
    for cause in e.chain() {
        let text = cause.to_string();
        if !message.contains(&text) {
            if !message.is_empty() {
                message.push_str(": ");
            }
            message.push_str(&text);
        }
    }
    message.replace('\n', " ")
}

fn fail(kind: &str, message: &str) -> ExitCode {
    let line = serde_json::json!({ "error": kind, "message": message });
    eprintln!("{line}");
    ExitCode::FAILURE
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or_default();
            return fail("usage", first.trim_start_matches("error: "));
        }
    };
    let result = match cli.command {
        Command::Analyze(a) => cmd_analyze(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Tables(a) => cmd_tables(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(error_kind(&e), &one_line(&e)),
    }
}
