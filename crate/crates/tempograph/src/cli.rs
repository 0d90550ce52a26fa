//! Command-line surface: corpus generation, graph building, evaluation,
//! and the experiment sweep. Exit codes: 0 success, 1 usage error, 2 data
//! error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::evalkit::{
    eval_graph, generate_pairs, load_clusters, load_pairs, render_pairs, run_experiment,
    write_pairs, write_results, EvalSubset, ExperimentGrid, ResultRow,
};
use crate::graph::{build_graph, read_graph, write_graph, BuildOptions};
use crate::relmodel::{corpus_stats, load_corpus, write_corpus, Corpus, LoadOptions, TypePair};
use crate::simmeasures::{parse_measures, DenominatorMode, ScoreOptions};
use crate::synthcorpus::{generate, write_matches, LeagueConfig};
use crate::timealg::{TimeSource, WindowDays, WindowMode};

#[derive(Parser, Debug)]
#[command(
    name = "tempograph",
    version,
    about = "Typed entailment graphs from time-stamped relation corpora"
)]
pub struct Cli {
    /// Worker threads; 0 or unset means all cores. TEMPOGRAPH_THREADS is honored too.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a synthetic league corpus with ground-truth pairs
    GenCorpus(GenCorpusArgs),
    /// Build an entailment graph from a relation corpus
    Build(BuildArgs),
    /// Evaluate a graph against a labeled pair file
    Eval(EvalArgs),
    /// Build and evaluate over a grid of time sources and windows
    Sweep(SweepArgs),
    /// Expand paraphrase clusters into labeled entailment pairs
    GenDataset(GenDatasetArgs),
    /// Print corpus statistics
    Stats(StatsArgs),
}

#[derive(Args, Debug, Clone)]
pub struct FilterFlags {
    /// Interval source: timex, docdate, or both (timex with doc-date back-off)
    #[arg(long = "time-source", default_value = "both", value_name = "SRC")]
    pub time_source: String,
    /// Temporal window in days
    #[arg(long, default_value_t = 4, value_name = "DAYS")]
    pub window: u32,
    /// Extend both intervals before the overlap test, or only one: both | single
    #[arg(long = "window-mode", default_value = "both", value_name = "MODE")]
    pub window_mode: String,
}

#[derive(Args, Debug, Clone)]
pub struct ScoreFlags {
    /// Comma-separated measure ids, or `all`
    #[arg(long, default_value = "all", value_name = "LIST")]
    pub measures: String,
    /// Drop predicates with fewer instances than this
    #[arg(long = "min-count", default_value_t = 0, value_name = "K")]
    pub min_count: usize,
    /// Totals in temporal denominators: unfiltered | filtered
    #[arg(long = "temporal-denominator", default_value = "unfiltered", value_name = "MODE")]
    pub temporal_denominator: String,
    /// Restrict to one type pair, written `type1#type2`
    #[arg(long = "type-pair", value_name = "PAIR")]
    pub type_pair: Option<String>,
}

#[derive(Args, Debug)]
pub struct GenCorpusArgs {
    /// League config in TOML; built-in defaults when omitted
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Override the config's RNG seed
    #[arg(long, value_name = "S")]
    pub seed: Option<u64>,
    /// Directory for corpus.jsonl, pairs.tsv, and matches.tsv
    #[arg(long = "out-dir", default_value = ".", value_name = "DIR")]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug)]
pub struct BuildArgs {
    /// Relation corpus in JSON lines
    #[arg(long, value_name = "FILE")]
    pub corpus: PathBuf,
    /// Output graph file; a .gz suffix enables compression
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    #[command(flatten)]
    pub filter: FilterFlags,
    #[command(flatten)]
    pub score: ScoreFlags,
    /// Treat malformed corpus lines as fatal
    #[arg(long)]
    pub strict: bool,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Graph file written by `build`
    #[arg(long, value_name = "FILE")]
    pub graph: PathBuf,
    /// Labeled pair file
    #[arg(long, value_name = "FILE")]
    pub pairs: PathBuf,
    /// Results CSV; stdout when omitted
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Comma-separated measure ids, or `all` (every measure in the graph)
    #[arg(long, default_value = "all", value_name = "LIST")]
    pub measures: String,
    /// Comma-separated subsets: base, directional, all
    #[arg(long, default_value = "base,directional,all", value_name = "LIST")]
    pub subsets: String,
    /// Stop integrating the PR curve at this recall
    #[arg(long = "recall-cap", default_value_t = 0.75, value_name = "R")]
    pub recall_cap: f64,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Relation corpus in JSON lines
    #[arg(long, value_name = "FILE")]
    pub corpus: PathBuf,
    /// Labeled pair file
    #[arg(long, value_name = "FILE")]
    pub pairs: PathBuf,
    /// Results CSV; stdout when omitted
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Comma-separated windows in days
    #[arg(long, default_value = "0,1,2,3,4,5,6,7,30,3650", value_name = "LIST")]
    pub windows: String,
    /// Comma-separated time sources
    #[arg(long, default_value = "timex,docdate,both", value_name = "LIST")]
    pub sources: String,
    /// Comma-separated subsets: base, directional, all
    #[arg(long, default_value = "base,directional,all", value_name = "LIST")]
    pub subsets: String,
    /// Stop integrating the PR curve at this recall
    #[arg(long = "recall-cap", default_value_t = 0.75, value_name = "R")]
    pub recall_cap: f64,
    /// Extend both intervals before the overlap test, or only one: both | single
    #[arg(long = "window-mode", default_value = "both", value_name = "MODE")]
    pub window_mode: String,
    #[command(flatten)]
    pub score: ScoreFlags,
    /// Treat malformed corpus lines as fatal
    #[arg(long)]
    pub strict: bool,
}

#[derive(Args, Debug)]
pub struct GenDatasetArgs {
    /// Paraphrase cluster file: class \t predicate \t specificity
    #[arg(long, value_name = "FILE")]
    pub clusters: PathBuf,
    /// Pair file to write; stdout when omitted
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct StatsArgs {
    /// Relation corpus in JSON lines
    #[arg(long, value_name = "FILE")]
    pub corpus: PathBuf,
    /// Treat malformed corpus lines as fatal
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug)]
enum RunError {
    Usage(String),
    Data(Error),
}

/// Flag-interpretation failures are usage errors.
fn usage<T>(r: Result<T>) -> std::result::Result<T, RunError> {
    r.map_err(|e| RunError::Usage(e.to_string()))
}

/// Failures once real work has started are data errors.
fn data<T>(r: Result<T>) -> std::result::Result<T, RunError> {
    r.map_err(RunError::Data)
}

/// Parses argv and runs one command, returning the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    if let Err(msg) = init_threads(cli.threads) {
        eprintln!("error: {msg}");
        return 1;
    }
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(RunError::Usage(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(RunError::Data(e)) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn init_threads(flag: Option<usize>) -> std::result::Result<(), String> {
    let n = match flag {
        Some(n) => n,
        None => match std::env::var("TEMPOGRAPH_THREADS") {
            Ok(v) => v
                .parse::<usize>()
                .map_err(|_| format!("TEMPOGRAPH_THREADS must be an integer, got {v:?}"))?,
            Err(_) => 0,
        },
    };
    if n > 0 {
        // Fails only if a pool already exists, e.g. when embedded in tests.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn dispatch(cmd: Command) -> std::result::Result<(), RunError> {
    match cmd {
        Command::GenCorpus(a) => gen_corpus(a),
        Command::Build(a) => build(a),
        Command::Eval(a) => eval(a),
        Command::Sweep(a) => sweep(a),
        Command::GenDataset(a) => gen_dataset(a),
        Command::Stats(a) => stats(a),
    }
}

fn parse_list<T>(
    text: &str,
    what: &str,
    parse: impl Fn(&str) -> Result<T>,
) -> std::result::Result<Vec<T>, RunError> {
    let mut out = Vec::new();
    for token in text.split(',') {
        let token = token.trim();
        if token.is_empty() {
            continue;
        }
        out.push(usage(parse(token))?);
    }
    if out.is_empty() {
        return Err(RunError::Usage(format!("empty {what} list")));
    }
    Ok(out)
}

fn parse_subsets(text: &str) -> std::result::Result<Vec<EvalSubset>, RunError> {
    let mut subsets = parse_list(text, "subset", EvalSubset::parse)?;
    subsets.dedup();
    Ok(subsets)
}

fn check_recall_cap(cap: f64) -> std::result::Result<(), RunError> {
    if cap > 0.0 && cap <= 1.0 {
        Ok(())
    } else {
        Err(RunError::Usage(format!(
            "recall cap must be in (0, 1], got {cap}"
        )))
    }
}

fn build_options(f: &FilterFlags, s: &ScoreFlags) -> std::result::Result<BuildOptions, RunError> {
    let source = usage(TimeSource::parse(&f.time_source))?;
    let window_mode = usage(WindowMode::parse(&f.window_mode))?;
    let measures = usage(parse_measures(&s.measures))?;
    let denominator = usage(DenominatorMode::parse(&s.temporal_denominator))?;
    let type_pair = match &s.type_pair {
        Some(tp) => Some(usage(TypePair::parse(tp))?),
        None => None,
    };
    Ok(BuildOptions {
        source,
        window: WindowDays(f.window),
        window_mode,
        measures,
        score_opts: ScoreOptions { denominator },
        type_pair,
        min_count: s.min_count,
    })
}

fn load(path: &Path, strict: bool) -> std::result::Result<Corpus, RunError> {
    let opts = LoadOptions {
        type_filter: None,
        strict,
    };
    let (corpus, warnings) = data(load_corpus(path, &opts))?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    Ok(corpus)
}

fn write_rows(rows: &[ResultRow], out: Option<&Path>) -> std::result::Result<(), RunError> {
    match out {
        Some(path) => {
            let file = data(File::create(path).map_err(|e| Error::io(path, e)))?;
            let mut w = BufWriter::new(file);
            data(write_results(rows, &mut w).map_err(|e| Error::io(path, e)))?;
            data(w.flush().map_err(|e| Error::io(path, e)))?;
            eprintln!("wrote {} rows to {}", rows.len(), path.display());
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            data(write_results(rows, &mut w).map_err(|e| Error::io("<stdout>", e)))?;
        }
    }
    Ok(())
}

fn gen_corpus(a: GenCorpusArgs) -> std::result::Result<(), RunError> {
    let mut cfg = match &a.config {
        Some(path) => data(LeagueConfig::load(path))?,
        None => LeagueConfig::default(),
    };
    if let Some(seed) = a.seed {
        cfg.rng_seed = seed;
    }
    let (corpus, truth) = data(generate(&cfg))?;
    data(std::fs::create_dir_all(&a.out_dir).map_err(|e| Error::io(&a.out_dir, e)))?;
    let corpus_path = a.out_dir.join("corpus.jsonl");
    data(write_corpus(&corpus_path, corpus.instances()))?;
    let pairs_path = a.out_dir.join("pairs.tsv");
    data(write_pairs(&pairs_path, &truth.pairs))?;
    let matches_path = a.out_dir.join("matches.tsv");
    data(write_matches(&matches_path, &truth.matches))?;
    println!("wrote {} instances to {}", corpus.len(), corpus_path.display());
    println!("wrote {} pairs to {}", truth.pairs.len(), pairs_path.display());
    println!(
        "wrote {} matches to {}",
        truth.matches.len(),
        matches_path.display()
    );
    Ok(())
}

fn build(a: BuildArgs) -> std::result::Result<(), RunError> {
    let opts = build_options(&a.filter, &a.score)?;
    let corpus = load(&a.corpus, a.strict)?;
    let g = data(build_graph(&corpus, &opts))?;
    data(write_graph(&g, &a.out))?;
    println!(
        "graph: {} nodes, {} edges, {} measures -> {}",
        g.nodes.len(),
        g.edges.len(),
        g.measure_ids.len(),
        a.out.display()
    );
    Ok(())
}

fn eval(a: EvalArgs) -> std::result::Result<(), RunError> {
    check_recall_cap(a.recall_cap)?;
    let subsets = parse_subsets(&a.subsets)?;
    if a.measures != "all" {
        usage(parse_measures(&a.measures))?;
    }
    let g = data(read_graph(&a.graph))?;
    let measures: Vec<String> = if a.measures == "all" {
        g.measure_ids.clone()
    } else {
        a.measures
            .split(',')
            .map(|m| m.trim().to_string())
            .filter(|m| !m.is_empty())
            .collect()
    };
    let pairs = data(load_pairs(&a.pairs))?;
    let rows = data(eval_graph(&g, &pairs, &measures, &subsets, a.recall_cap))?;
    write_rows(&rows, a.out.as_deref())
}

fn sweep(a: SweepArgs) -> std::result::Result<(), RunError> {
    check_recall_cap(a.recall_cap)?;
    let sources = parse_list(&a.sources, "source", TimeSource::parse)?;
    let windows = parse_list(&a.windows, "window", |t| {
        t.parse::<u32>()
            .map(WindowDays)
            .map_err(|_| Error::InvalidConfig(format!("bad window {t:?}")))
    })?;
    let subsets = parse_subsets(&a.subsets)?;
    let filter = FilterFlags {
        time_source: "both".to_string(),
        window: 0,
        window_mode: a.window_mode.clone(),
    };
    let template = build_options(&filter, &a.score)?;
    let grid = ExperimentGrid {
        sources,
        windows,
        subsets,
        recall_cap: a.recall_cap,
    };
    let corpus = load(&a.corpus, a.strict)?;
    let pairs = data(load_pairs(&a.pairs))?;
    let rows = data(run_experiment(&corpus, &pairs, &grid, &template))?;
    write_rows(&rows, a.out.as_deref())
}

fn gen_dataset(a: GenDatasetArgs) -> std::result::Result<(), RunError> {
    let clusters = data(load_clusters(&a.clusters))?;
    let pairs = generate_pairs(&clusters);
    match &a.out {
        Some(path) => {
            data(write_pairs(path, &pairs))?;
            println!("wrote {} pairs to {}", pairs.len(), path.display());
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            data(render_pairs(&pairs, &mut w).map_err(|e| Error::io("<stdout>", e)))?;
        }
    }
    Ok(())
}

fn stats(a: StatsArgs) -> std::result::Result<(), RunError> {
    let corpus = load(&a.corpus, a.strict)?;
    println!("{}", corpus_stats(&corpus));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_build_flags() {
        let cli = Cli::try_parse_from([
            "tempograph",
            "build",
            "--corpus",
            "c.jsonl",
            "--out",
            "g.tsv",
            "--time-source",
            "docdate",
            "--window",
            "2",
            "--measures",
            "binc_count,t_binc_count",
            "--min-count",
            "3",
        ])
        .unwrap();
        match cli.command {
            Command::Build(a) => {
                let opts = build_options(&a.filter, &a.score).map_err(|_| ()).unwrap();
                assert_eq!(opts.source, TimeSource::DocDateOnly);
                assert_eq!(opts.window, WindowDays(2));
                assert_eq!(opts.measures.len(), 2);
                assert_eq!(opts.min_count, 3);
            }
            _ => panic!("wrong subcommand"),
        }
    }

    #[test]
    fn defaults_mirror_best_configuration() {
        let cli = Cli::try_parse_from([
            "tempograph",
            "build",
            "--corpus",
            "c.jsonl",
            "--out",
            "g.tsv",
        ])
        .unwrap();
        match cli.command {
            Command::Build(a) => {
                let opts = build_options(&a.filter, &a.score).map_err(|_| ()).unwrap();
                assert_eq!(opts.source, TimeSource::TimexAndDocDate);
                assert_eq!(opts.window, WindowDays(4));
                assert_eq!(opts.measures.len(), 29);
            }
            _ => panic!("wrong subcommand"),
        }
    }

    #[test]
    fn bad_flag_values_are_usage_errors() {
        let filter = FilterFlags {
            time_source: "sundial".to_string(),
            window: 0,
            window_mode: "both".to_string(),
        };
        let score = ScoreFlags {
            measures: "all".to_string(),
            min_count: 0,
            temporal_denominator: "unfiltered".to_string(),
            type_pair: None,
        };
        assert!(matches!(
            build_options(&filter, &score),
            Err(RunError::Usage(_))
        ));
        assert!(check_recall_cap(0.0).is_err());
        assert!(check_recall_cap(1.5).is_err());
        assert!(check_recall_cap(0.75).is_ok());
        assert!(parse_subsets("base,bogus").is_err());
        assert_eq!(parse_subsets("base,all").unwrap().len(), 2);
    }

    #[test]
    fn unknown_flags_exit_one() {
        assert_eq!(run(["tempograph", "--no-such-flag"]), 1);
        assert_eq!(run(["tempograph", "frobnicate"]), 1);
    }

    #[test]
    fn missing_corpus_is_a_data_error() {
        assert_eq!(
            run([
                "tempograph",
                "stats",
                "--corpus",
                "/nonexistent/corpus.jsonl"
            ]),
            2
        );
    }
}
