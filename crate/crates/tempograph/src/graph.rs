//! Assembly and serialization of typed entailment graphs.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use flate2::read::GzDecoder;
use flate2::write::GzEncoder;

use crate::counts::build_vectors;
use crate::error::{Error, Result};
use crate::relmodel::{Corpus, PredicateId, TypePair};
use crate::simmeasures::{score_all, MeasureSpec, ScoreOptions};
use crate::tfilter::{temporal_filter, FilterOptions};
use crate::timealg::{TimeSource, WindowDays, WindowMode};

const MAGIC: &str = "# tempograph graph";

/// One typed entailment graph: predicates of a single type pair as nodes,
/// directed edges carrying one score per measure.
#[derive(Clone, Debug, PartialEq)]
pub struct EntailmentGraph {
    pub type_pair: TypePair,
    pub source: TimeSource,
    pub window: WindowDays,
    pub measure_ids: Vec<String>,
    /// Predicate names; the type pair is shared by all nodes.
    pub nodes: BTreeSet<String>,
    /// Ordered predicate pairs to per-measure scores, aligned with
    /// `measure_ids`. Pairs with empty shared support are absent.
    pub edges: BTreeMap<(String, String), Vec<f64>>,
}

impl EntailmentGraph {
    pub fn predicate(&self, name: &str) -> PredicateId {
        PredicateId::new(name, self.type_pair.clone())
    }

    pub fn measure_index(&self, id: &str) -> Result<usize> {
        self.measure_ids
            .iter()
            .position(|m| m == id)
            .ok_or_else(|| Error::UnknownMeasure(id.to_string()))
    }

    /// Score of the ordered pair under one measure; absent edges score zero.
    pub fn score(&self, premise: &str, hypothesis: &str, measure_idx: usize) -> f64 {
        self.edges
            .get(&(premise.to_string(), hypothesis.to_string()))
            .map_or(0.0, |row| row[measure_idx])
    }
}

#[derive(Clone, Debug)]
pub struct BuildOptions {
    pub source: TimeSource,
    pub window: WindowDays,
    pub window_mode: WindowMode,
    pub measures: Vec<&'static MeasureSpec>,
    pub score_opts: ScoreOptions,
    /// Restrict to this type pair; without it the corpus must be homogeneous.
    pub type_pair: Option<TypePair>,
    pub min_count: usize,
}

impl BuildOptions {
    pub fn new(
        source: TimeSource,
        window: WindowDays,
        measures: Vec<&'static MeasureSpec>,
    ) -> BuildOptions {
        BuildOptions {
            source,
            window,
            window_mode: WindowMode::default(),
            measures,
            score_opts: ScoreOptions::default(),
            type_pair: None,
            min_count: 0,
        }
    }
}

/// Runs the full pipeline: counts, temporal filtering, scoring.
pub fn build_graph(corpus: &Corpus, opts: &BuildOptions) -> Result<EntailmentGraph> {
    let type_pairs = corpus.type_pairs();
    let type_pair = match &opts.type_pair {
        Some(tp) => tp.clone(),
        None => match type_pairs.len() {
            0 => return Err(Error::EmptyCorpus),
            1 => type_pairs.first().unwrap().clone(),
            _ => {
                let names: Vec<String> = type_pairs.iter().map(TypePair::to_string).collect();
                return Err(Error::InvalidConfig(format!(
                    "corpus mixes type pairs ({}); pass an explicit type pair",
                    names.join(", ")
                )));
            }
        },
    };

    let restricted = Corpus::new(
        corpus
            .instances()
            .iter()
            .filter(|inst| inst.predicate.type_pair == type_pair)
            .cloned()
            .collect(),
    );
    let restricted = restricted.filter_min_count(opts.min_count);
    let vectors = build_vectors(&restricted)?;
    let evidence = temporal_filter(
        &restricted,
        &FilterOptions {
            source: opts.source,
            window: opts.window,
            mode: opts.window_mode,
        },
    );
    let matrix = score_all(&vectors, &evidence, &opts.measures, opts.score_opts);

    Ok(EntailmentGraph {
        type_pair,
        source: opts.source,
        window: opts.window,
        measure_ids: matrix.measure_ids,
        nodes: restricted.index().keys().map(|p| p.name.clone()).collect(),
        edges: matrix
            .scores
            .into_iter()
            .map(|((p, q), row)| ((p.name, q.name), row))
            .collect(),
    })
}

/// Renders the canonical text form: sorted node records, then sorted edge
/// records with scores at 17 significant digits.
fn render_graph(g: &EntailmentGraph) -> String {
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    out.push_str(&format!("# type_pair: {}\n", g.type_pair));
    out.push_str(&format!("# source: {}\n", g.source));
    out.push_str(&format!("# window: {}\n", g.window));
    out.push_str(&format!("# measures: {}\n", g.measure_ids.join(",")));
    for node in &g.nodes {
        out.push_str(&format!("node\t{node}\n"));
    }
    for ((p, q), scores) in &g.edges {
        out.push_str(&format!("edge\t{p}\t{q}"));
        for s in scores {
            out.push_str(&format!("\t{s:.16e}"));
        }
        out.push('\n');
    }
    out
}

/// Writes the graph; a `.gz` path produces the gzip-compressed variant.
pub fn write_graph(g: &EntailmentGraph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = render_graph(g);
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    if path.extension().is_some_and(|ext| ext == "gz") {
        let mut enc = GzEncoder::new(BufWriter::new(file), flate2::Compression::default());
        enc.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))?;
        enc.finish().map_err(|e| Error::io(path, e))?;
    } else {
        let mut out = BufWriter::new(file);
        out.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))?;
        out.flush().map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

/// Reads a graph file, transparently decompressing gzip input.
pub fn read_graph(path: impl AsRef<Path>) -> Result<EntailmentGraph> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = if bytes.starts_with(&[0x1f, 0x8b]) {
        let mut s = String::new();
        GzDecoder::new(bytes.as_slice())
            .read_to_string(&mut s)
            .map_err(|e| Error::io(path, e))?;
        s
    } else {
        String::from_utf8(bytes)
            .map_err(|e| Error::malformed(path.display().to_string(), 0, e.to_string()))?
    };
    parse_graph(&text, &path.display().to_string())
}

fn parse_graph(text: &str, path: &str) -> Result<EntailmentGraph> {
    let bad = |line: usize, msg: String| Error::malformed(path, line, msg);
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));

    match lines.next() {
        Some((_, first)) if first == MAGIC => {}
        Some((n, first)) => return Err(bad(n, format!("expected `{MAGIC}`, got `{first}`"))),
        None => return Err(bad(0, "empty file".to_string())),
    }

    let mut headers: BTreeMap<String, String> = BTreeMap::new();
    let mut nodes = BTreeSet::new();
    let mut edges = BTreeMap::new();
    for (n, line) in lines {
        if let Some(rest) = line.strip_prefix("# ") {
            let (key, value) = rest
                .split_once(": ")
                .ok_or_else(|| bad(n, format!("bad header line `{line}`")))?;
            headers.insert(key.to_string(), value.to_string());
            continue;
        }
        let mut fields = line.split('\t');
        match fields.next() {
            Some("node") => {
                let name = fields
                    .next()
                    .filter(|s| !s.is_empty())
                    .ok_or_else(|| bad(n, "node record without a name".to_string()))?;
                nodes.insert(name.to_string());
            }
            Some("edge") => {
                let p = fields
                    .next()
                    .ok_or_else(|| bad(n, "edge record without endpoints".to_string()))?;
                let q = fields
                    .next()
                    .ok_or_else(|| bad(n, "edge record without a target".to_string()))?;
                for endpoint in [p, q] {
                    if !nodes.contains(endpoint) {
                        return Err(bad(n, format!("edge endpoint `{endpoint}` is not a node")));
                    }
                }
                let mut scores = Vec::new();
                for field in fields {
                    scores.push(
                        field
                            .parse::<f64>()
                            .map_err(|e| bad(n, format!("bad score `{field}`: {e}")))?,
                    );
                }
                edges.insert((p.to_string(), q.to_string()), scores);
            }
            _ => return Err(bad(n, format!("unrecognized record `{line}`"))),
        }
    }

    let header = |key: &str| {
        headers
            .get(key)
            .cloned()
            .ok_or_else(|| bad(0, format!("missing header `{key}`")))
    };
    let type_pair = TypePair::parse(&header("type_pair")?)?;
    let source = match header("source")?.as_str() {
        "timexOnly" => TimeSource::TimexOnly,
        "docDateOnly" => TimeSource::DocDateOnly,
        "timexAndDocDate" => TimeSource::TimexAndDocDate,
        other => return Err(bad(0, format!("unknown source `{other}`"))),
    };
    let window = WindowDays(
        header("window")?
            .parse::<u32>()
            .map_err(|e| bad(0, format!("bad window: {e}")))?,
    );
    let measure_ids: Vec<String> = header("measures")?
        .split(',')
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect();
    for (key, row) in &edges {
        if row.len() != measure_ids.len() {
            return Err(bad(
                0,
                format!(
                    "edge {} -> {} has {} scores for {} measures",
                    key.0,
                    key.1,
                    row.len(),
                    measure_ids.len()
                ),
            ));
        }
    }

    Ok(EntailmentGraph {
        type_pair,
        source,
        window,
        measure_ids,
        nodes,
        edges,
    })
}
