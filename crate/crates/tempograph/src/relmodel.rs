//! Domain types for typed relations and ingestion of the relation record format.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered pair of fine-grained argument type labels, e.g. `organization#organization`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TypePair {
    pub type1: String,
    pub type2: String,
}

impl TypePair {
    pub fn new(type1: impl Into<String>, type2: impl Into<String>) -> TypePair {
        TypePair {
            type1: type1.into(),
            type2: type2.into(),
        }
    }

    /// Parses the `type1#type2` form used on the command line and in graph headers.
    pub fn parse(s: &str) -> Result<TypePair> {
        match s.split_once('#') {
            Some((a, b)) if !a.is_empty() && !b.is_empty() => Ok(TypePair::new(a, b)),
            _ => Err(Error::Invalid(format!(
                "type pair must have the form type1#type2, got `{s}`"
            ))),
        }
    }
}

impl fmt::Display for TypePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.type1, self.type2)
    }
}

/// A typed predicate: lemmatised predicate string plus its argument type pair.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PredicateId {
    pub name: String,
    pub type_pair: TypePair,
}

impl PredicateId {
    pub fn new(name: impl Into<String>, type_pair: TypePair) -> PredicateId {
        PredicateId {
            name: name.into(),
            type_pair,
        }
    }
}

impl fmt::Display for PredicateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

/// Ordered pair of argument entities; (A,B) and (B,A) are distinct features.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EntityPairId {
    pub arg1: String,
    pub arg2: String,
}

impl EntityPairId {
    pub fn new(arg1: impl Into<String>, arg2: impl Into<String>) -> EntityPairId {
        EntityPairId {
            arg1: arg1.into(),
            arg2: arg2.into(),
        }
    }
}

impl fmt::Display for EntityPairId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}|{}", self.arg1, self.arg2)
    }
}

/// Closed day-granularity interval; a one-day event has `start == end`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimeInterval {
    start: i64,
    end: i64,
}

impl TimeInterval {
    pub fn new(start: i64, end: i64) -> Result<TimeInterval> {
        if start > end {
            return Err(Error::Invalid(format!(
                "interval start {start} is after end {end}"
            )));
        }
        Ok(TimeInterval { start, end })
    }

    /// One-day interval covering a single day index.
    pub fn day(d: i64) -> TimeInterval {
        TimeInterval { start: d, end: d }
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    pub fn end(&self) -> i64 {
        self.end
    }
}

/// One extracted event: typed predicate, entity pair, and its time stamps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationInstance {
    pub predicate: PredicateId,
    pub entity_pair: EntityPairId,
    pub timex_intervals: Vec<TimeInterval>,
    pub doc_date: Option<i64>,
    pub doc_id: Option<String>,
}

/// Immutable relation corpus with a predicate -> entity pair -> instances index.
#[derive(Clone, Debug)]
pub struct Corpus {
    instances: Vec<RelationInstance>,
    index: BTreeMap<PredicateId, BTreeMap<EntityPairId, Vec<usize>>>,
}

impl Corpus {
    pub fn new(instances: Vec<RelationInstance>) -> Corpus {
        let mut index: BTreeMap<PredicateId, BTreeMap<EntityPairId, Vec<usize>>> = BTreeMap::new();
        for (i, inst) in instances.iter().enumerate() {
            index
                .entry(inst.predicate.clone())
                .or_default()
                .entry(inst.entity_pair.clone())
                .or_default()
                .push(i);
        }
        Corpus { instances, index }
    }

    pub fn instances(&self) -> &[RelationInstance] {
        &self.instances
    }

    pub fn index(&self) -> &BTreeMap<PredicateId, BTreeMap<EntityPairId, Vec<usize>>> {
        &self.index
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// Raw count c(p, ep): number of instances for the predicate at the feature.
    pub fn count(&self, p: &PredicateId, ep: &EntityPairId) -> usize {
        self.index
            .get(p)
            .and_then(|by_ep| by_ep.get(ep))
            .map_or(0, Vec::len)
    }

    /// Raw count c(p) = sum over entity pairs of c(p, ep).
    pub fn predicate_count(&self, p: &PredicateId) -> usize {
        self.index
            .get(p)
            .map_or(0, |by_ep| by_ep.values().map(Vec::len).sum())
    }

    pub fn type_pairs(&self) -> BTreeSet<TypePair> {
        self.instances
            .iter()
            .map(|inst| inst.predicate.type_pair.clone())
            .collect()
    }

    /// Drops predicates whose total count is below `min_count`.
    pub fn filter_min_count(&self, min_count: usize) -> Corpus {
        if min_count <= 1 {
            return self.clone();
        }
        let keep: BTreeSet<&PredicateId> = self
            .index
            .iter()
            .filter(|(_, by_ep)| by_ep.values().map(Vec::len).sum::<usize>() >= min_count)
            .map(|(p, _)| p)
            .collect();
        Corpus::new(
            self.instances
                .iter()
                .filter(|inst| keep.contains(&inst.predicate))
                .cloned()
                .collect(),
        )
    }
}

fn epoch() -> NaiveDate {
    NaiveDate::from_ymd_opt(1970, 1, 1).unwrap()
}

/// Converts an ISO-8601 date string to a day index relative to 1970-01-01.
pub fn parse_day(s: &str) -> Result<i64> {
    let date = NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .map_err(|e| Error::Invalid(format!("bad date `{s}`: {e}")))?;
    Ok(date.signed_duration_since(epoch()).num_days())
}

/// Formats a day index as an ISO-8601 date string.
pub fn format_day(d: i64) -> String {
    (epoch() + chrono::Duration::days(d))
        .format("%Y-%m-%d")
        .to_string()
}

#[derive(Serialize, Deserialize)]
struct RawTimex {
    start: String,
    end: String,
}

#[derive(Serialize, Deserialize)]
struct RawRecord {
    pred: String,
    type1: String,
    type2: String,
    arg1: String,
    arg2: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    timexes: Vec<RawTimex>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    doc_date: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    doc_id: Option<String>,
}

fn parse_record(line: &str) -> Result<RelationInstance> {
    let raw: RawRecord =
        serde_json::from_str(line).map_err(|e| Error::Invalid(format!("bad record: {e}")))?;
    for (field, value) in [
        ("pred", &raw.pred),
        ("type1", &raw.type1),
        ("type2", &raw.type2),
        ("arg1", &raw.arg1),
        ("arg2", &raw.arg2),
    ] {
        if value.is_empty() {
            return Err(Error::Invalid(format!("empty field `{field}`")));
        }
    }
    let mut timex_intervals = Vec::with_capacity(raw.timexes.len());
    for t in &raw.timexes {
        timex_intervals.push(TimeInterval::new(parse_day(&t.start)?, parse_day(&t.end)?)?);
    }
    let doc_date = raw.doc_date.as_deref().map(parse_day).transpose()?;
    Ok(RelationInstance {
        predicate: PredicateId::new(raw.pred, TypePair::new(raw.type1, raw.type2)),
        entity_pair: EntityPairId::new(raw.arg1, raw.arg2),
        timex_intervals,
        doc_date,
        doc_id: raw.doc_id,
    })
}

fn record_to_json(inst: &RelationInstance) -> String {
    let raw = RawRecord {
        pred: inst.predicate.name.clone(),
        type1: inst.predicate.type_pair.type1.clone(),
        type2: inst.predicate.type_pair.type2.clone(),
        arg1: inst.entity_pair.arg1.clone(),
        arg2: inst.entity_pair.arg2.clone(),
        timexes: inst
            .timex_intervals
            .iter()
            .map(|iv| RawTimex {
                start: format_day(iv.start()),
                end: format_day(iv.end()),
            })
            .collect(),
        doc_date: inst.doc_date.map(format_day),
        doc_id: inst.doc_id.clone(),
    };
    serde_json::to_string(&raw).expect("record serialization cannot fail")
}

#[derive(Clone, Debug, Default)]
pub struct LoadOptions {
    /// Keep only records with this argument type pair.
    pub type_filter: Option<TypePair>,
    /// Treat malformed lines as fatal instead of skipping them with a warning.
    pub strict: bool,
}

/// Loads a relation corpus from a file of line-delimited JSON records.
///
/// Returns the corpus together with one warning per skipped malformed line.
pub fn load_corpus(path: impl AsRef<Path>, opts: &LoadOptions) -> Result<(Corpus, Vec<String>)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let display = path.display().to_string();
    let mut instances = Vec::new();
    let mut warnings = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        match parse_record(&line) {
            Ok(inst) => {
                if opts
                    .type_filter
                    .as_ref()
                    .is_some_and(|tp| *tp != inst.predicate.type_pair)
                {
                    continue;
                }
                instances.push(inst);
            }
            Err(e) => {
                if opts.strict {
                    return Err(Error::malformed(display, lineno, e.to_string()));
                }
                warnings.push(format!("{display}:{lineno}: skipped: {e}"));
            }
        }
    }
    Ok((Corpus::new(instances), warnings))
}

/// Writes relation instances in the record format, one JSON object per line.
pub fn write_corpus(path: impl AsRef<Path>, instances: &[RelationInstance]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for inst in instances {
        writeln!(out, "{}", record_to_json(inst)).map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Summary statistics over a corpus.
#[derive(Clone, Debug, PartialEq)]
pub struct CorpusStats {
    pub num_instances: usize,
    pub num_predicates: usize,
    pub num_entity_pairs: usize,
    pub num_type_pairs: usize,
    pub timex_coverage: f64,
    pub doc_date_coverage: f64,
    pub day_range: Option<(i64, i64)>,
}

pub fn corpus_stats(c: &Corpus) -> CorpusStats {
    let n = c.len();
    let entity_pairs: BTreeSet<&EntityPairId> =
        c.instances().iter().map(|i| &i.entity_pair).collect();
    let with_timex = c
        .instances()
        .iter()
        .filter(|i| !i.timex_intervals.is_empty())
        .count();
    let with_doc_date = c.instances().iter().filter(|i| i.doc_date.is_some()).count();
    let mut day_range: Option<(i64, i64)> = None;
    for inst in c.instances() {
        let days = inst
            .timex_intervals
            .iter()
            .flat_map(|iv| [iv.start(), iv.end()])
            .chain(inst.doc_date);
        for d in days {
            day_range = Some(match day_range {
                None => (d, d),
                Some((lo, hi)) => (lo.min(d), hi.max(d)),
            });
        }
    }
    let ratio = |k: usize| if n == 0 { 0.0 } else { k as f64 / n as f64 };
    CorpusStats {
        num_instances: n,
        num_predicates: c.index().len(),
        num_entity_pairs: entity_pairs.len(),
        num_type_pairs: c.type_pairs().len(),
        timex_coverage: ratio(with_timex),
        doc_date_coverage: ratio(with_doc_date),
        day_range,
    }
}

impl fmt::Display for CorpusStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "instances:         {}", self.num_instances)?;
        writeln!(f, "predicates:        {}", self.num_predicates)?;
        writeln!(f, "entity pairs:      {}", self.num_entity_pairs)?;
        writeln!(f, "type pairs:        {}", self.num_type_pairs)?;
        writeln!(f, "timex coverage:    {:.4}", self.timex_coverage)?;
        writeln!(f, "doc date coverage: {:.4}", self.doc_date_coverage)?;
        match self.day_range {
            Some((lo, hi)) => write!(f, "date range:        {} .. {}", format_day(lo), format_day(hi)),
            None => write!(f, "date range:        (none)"),
        }
    }
}
