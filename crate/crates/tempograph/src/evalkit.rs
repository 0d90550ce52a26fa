//! Evaluation protocol: paraphrase-cluster datasets, labeled entailment
//! pairs, precision-recall curves, and AUC under a recall cap.

use std::collections::BTreeSet;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{build_graph, BuildOptions, EntailmentGraph};
use crate::relmodel::Corpus;
use crate::timealg::{TimeSource, WindowDays};

/// Predicate class in the sports domain; win, lose, and tie are outcomes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum PredClass {
    Win,
    Lose,
    Tie,
    Play,
}

impl PredClass {
    pub const ALL: [PredClass; 4] = [
        PredClass::Win,
        PredClass::Lose,
        PredClass::Tie,
        PredClass::Play,
    ];
    pub const OUTCOMES: [PredClass; 3] = [PredClass::Win, PredClass::Lose, PredClass::Tie];

    pub fn parse(s: &str) -> Result<PredClass> {
        match s {
            "win" => Ok(PredClass::Win),
            "lose" => Ok(PredClass::Lose),
            "tie" => Ok(PredClass::Tie),
            "play" => Ok(PredClass::Play),
            _ => Err(Error::Invalid(format!("unknown predicate class `{s}`"))),
        }
    }

    pub fn is_outcome(self) -> bool {
        self != PredClass::Play
    }
}

impl fmt::Display for PredClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PredClass::Win => "win",
            PredClass::Lose => "lose",
            PredClass::Tie => "tie",
            PredClass::Play => "play",
        };
        write!(f, "{s}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Specificity {
    Specific,
    NonSpecific,
}

impl Specificity {
    pub fn parse(s: &str) -> Result<Specificity> {
        match s {
            "specific" => Ok(Specificity::Specific),
            "non-specific" => Ok(Specificity::NonSpecific),
            _ => Err(Error::Invalid(format!("unknown specificity `{s}`"))),
        }
    }
}

/// Paraphrase clusters per predicate class, with specificity flags.
#[derive(Clone, Debug, Default)]
pub struct ParaphraseClusters {
    win: Vec<(String, Specificity)>,
    lose: Vec<(String, Specificity)>,
    tie: Vec<(String, Specificity)>,
    play: Vec<(String, Specificity)>,
}

impl ParaphraseClusters {
    pub fn new(
        mut entries: Vec<(PredClass, String, Specificity)>,
    ) -> Result<ParaphraseClusters> {
        let mut seen = BTreeSet::new();
        let mut pc = ParaphraseClusters::default();
        for (class, name, spec) in entries.drain(..) {
            if name.is_empty() {
                return Err(Error::Invalid("empty predicate name".to_string()));
            }
            if !seen.insert(name.clone()) {
                return Err(Error::Invalid(format!(
                    "predicate `{name}` appears in more than one cluster entry"
                )));
            }
            pc.cluster_mut(class).push((name, spec));
        }
        for class in PredClass::ALL {
            if pc.cluster(class).is_empty() {
                return Err(Error::Invalid(format!("cluster `{class}` is empty")));
            }
        }
        Ok(pc)
    }

    pub fn cluster(&self, class: PredClass) -> &[(String, Specificity)] {
        match class {
            PredClass::Win => &self.win,
            PredClass::Lose => &self.lose,
            PredClass::Tie => &self.tie,
            PredClass::Play => &self.play,
        }
    }

    fn cluster_mut(&mut self, class: PredClass) -> &mut Vec<(String, Specificity)> {
        match class {
            PredClass::Win => &mut self.win,
            PredClass::Lose => &mut self.lose,
            PredClass::Tie => &mut self.tie,
            PredClass::Play => &mut self.play,
        }
    }

    pub fn predicates(&self, class: PredClass) -> impl Iterator<Item = &str> {
        self.cluster(class).iter().map(|(name, _)| name.as_str())
    }
}

/// Loads a cluster file with lines `class \t predicate \t specificity`.
/// Lines starting with `#` are comments.
pub fn load_clusters(path: impl AsRef<Path>) -> Result<ParaphraseClusters> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let display = path.display().to_string();
    let mut entries = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [class, name, spec] = fields[..] else {
            return Err(Error::malformed(
                &display,
                lineno,
                format!("expected 3 tab-separated fields, got {}", fields.len()),
            ));
        };
        let parsed = PredClass::parse(class)
            .and_then(|c| Ok((c, name.to_string(), Specificity::parse(spec)?)));
        match parsed {
            Ok(entry) => entries.push(entry),
            Err(e) => return Err(Error::malformed(&display, lineno, e.to_string())),
        }
    }
    ParaphraseClusters::new(entries)
        .map_err(|e| Error::malformed(&display, 0, e.to_string()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Label {
    Entails,
    NotEntails,
}

impl Label {
    pub fn parse(s: &str) -> Result<Label> {
        match s {
            "entails" => Ok(Label::Entails),
            "not-entails" => Ok(Label::NotEntails),
            _ => Err(Error::Invalid(format!("unknown label `{s}`"))),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Label::Entails => "entails",
            Label::NotEntails => "not-entails",
        };
        write!(f, "{s}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Category {
    Entailment1,
    Outcome0,
    Directional0,
    Paraphrase1,
}

impl Category {
    pub fn parse(s: &str) -> Result<Category> {
        match s {
            "entailment1" => Ok(Category::Entailment1),
            "outcome0" => Ok(Category::Outcome0),
            "directional0" => Ok(Category::Directional0),
            "paraphrase1" => Ok(Category::Paraphrase1),
            _ => Err(Error::Invalid(format!("unknown category `{s}`"))),
        }
    }

    /// The label this category implies under the labeling pattern.
    pub fn label(self) -> Label {
        match self {
            Category::Entailment1 | Category::Paraphrase1 => Label::Entails,
            Category::Outcome0 | Category::Directional0 => Label::NotEntails,
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Category::Entailment1 => "entailment1",
            Category::Outcome0 => "outcome0",
            Category::Directional0 => "directional0",
            Category::Paraphrase1 => "paraphrase1",
        };
        write!(f, "{s}")
    }
}

/// One labeled ordered pair of predicate strings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EntailmentPair {
    pub premise: String,
    pub hypothesis: String,
    pub label: Label,
    pub category: Category,
}

/// Dataset subsets: Base tests temporality, Directional tests direction,
/// All adds paraphrases.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum EvalSubset {
    Base,
    Directional,
    All,
}

impl EvalSubset {
    pub const ALL: [EvalSubset; 3] = [EvalSubset::Base, EvalSubset::Directional, EvalSubset::All];

    pub fn parse(s: &str) -> Result<EvalSubset> {
        match s {
            "base" => Ok(EvalSubset::Base),
            "directional" => Ok(EvalSubset::Directional),
            "all" => Ok(EvalSubset::All),
            _ => Err(Error::Invalid(format!("unknown subset `{s}`"))),
        }
    }

    pub fn includes(self, category: Category) -> bool {
        match self {
            EvalSubset::Base => {
                matches!(category, Category::Entailment1 | Category::Outcome0)
            }
            EvalSubset::Directional => {
                matches!(category, Category::Entailment1 | Category::Directional0)
            }
            EvalSubset::All => true,
        }
    }
}

impl fmt::Display for EvalSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            EvalSubset::Base => "base",
            EvalSubset::Directional => "directional",
            EvalSubset::All => "all",
        };
        write!(f, "{s}")
    }
}

pub fn subset_pairs(pairs: &[EntailmentPair], subset: EvalSubset) -> Vec<&EntailmentPair> {
    pairs
        .iter()
        .filter(|p| subset.includes(p.category))
        .collect()
}

/// Expands clusters into labeled pairs under the labeling pattern:
/// outcome -> play is entailment, outcome -> different outcome and
/// play -> outcome are non-entailment, and within-class pairs are
/// paraphrases, generated only between non-specific predicates.
pub fn generate_pairs(pc: &ParaphraseClusters) -> Vec<EntailmentPair> {
    let mut pairs = Vec::new();
    let mut push = |premise: &str, hypothesis: &str, category: Category| {
        pairs.push(EntailmentPair {
            premise: premise.to_string(),
            hypothesis: hypothesis.to_string(),
            label: category.label(),
            category,
        });
    };
    for outcome in PredClass::OUTCOMES {
        for p in pc.predicates(outcome) {
            for h in pc.predicates(PredClass::Play) {
                push(p, h, Category::Entailment1);
            }
        }
    }
    for o1 in PredClass::OUTCOMES {
        for o2 in PredClass::OUTCOMES {
            if o1 == o2 {
                continue;
            }
            for p in pc.predicates(o1) {
                for h in pc.predicates(o2) {
                    push(p, h, Category::Outcome0);
                }
            }
        }
    }
    for p in pc.predicates(PredClass::Play) {
        for outcome in PredClass::OUTCOMES {
            for h in pc.predicates(outcome) {
                push(p, h, Category::Directional0);
            }
        }
    }
    for class in PredClass::ALL {
        let non_specific: Vec<&str> = pc
            .cluster(class)
            .iter()
            .filter(|(_, s)| *s == Specificity::NonSpecific)
            .map(|(name, _)| name.as_str())
            .collect();
        for p in &non_specific {
            for h in &non_specific {
                if p != h {
                    push(p, h, Category::Paraphrase1);
                }
            }
        }
    }
    pairs
}

/// Loads a dataset of `premise \t hypothesis \t label \t category` rows,
/// validating label/category consistency.
pub fn load_pairs(path: impl AsRef<Path>) -> Result<Vec<EntailmentPair>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let display = path.display().to_string();
    let mut pairs = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [premise, hypothesis, label, category] = fields[..] else {
            return Err(Error::malformed(
                &display,
                lineno,
                format!("expected 4 tab-separated fields, got {}", fields.len()),
            ));
        };
        let bad = |msg: String| Error::malformed(&display, lineno, msg);
        if premise.is_empty() || hypothesis.is_empty() {
            return Err(bad("empty predicate".to_string()));
        }
        if premise == hypothesis {
            return Err(bad(format!("self-pair `{premise}`")));
        }
        let label = Label::parse(label).map_err(|e| bad(e.to_string()))?;
        let category = Category::parse(category).map_err(|e| bad(e.to_string()))?;
        if category.label() != label {
            return Err(bad(format!(
                "label `{label}` is inconsistent with category `{category}`"
            )));
        }
        pairs.push(EntailmentPair {
            premise: premise.to_string(),
            hypothesis: hypothesis.to_string(),
            label,
            category,
        });
    }
    Ok(pairs)
}

pub fn render_pairs(pairs: &[EntailmentPair], out: &mut impl Write) -> std::io::Result<()> {
    for p in pairs {
        writeln!(
            out,
            "{}\t{}\t{}\t{}",
            p.premise, p.hypothesis, p.label, p.category
        )?;
    }
    Ok(())
}

pub fn write_pairs(path: impl AsRef<Path>, pairs: &[EntailmentPair]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    render_pairs(pairs, &mut out).map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

/// Precision-recall curve at descending score thresholds, with AUC
/// truncated at a recall cap.
#[derive(Clone, Debug, PartialEq)]
pub struct PRCurve {
    /// (recall, precision) at each distinct threshold, up to the first
    /// point at or past the cap.
    pub points: Vec<(f64, f64)>,
    pub recall_cap: f64,
    pub auc_capped: f64,
}

/// Computes the PR curve of `pairs` under `score`. All tied pairs enter at
/// one threshold. The area integrates precision over recall by trapezoids,
/// starting flat from recall zero at the first point's precision and
/// linearly interpolating the final partial segment at the cap.
pub fn pr_curve(
    pairs: &[&EntailmentPair],
    score: impl Fn(&EntailmentPair) -> f64,
    recall_cap: f64,
) -> Result<PRCurve> {
    if !(recall_cap > 0.0 && recall_cap <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "recall cap must be in (0, 1], got {recall_cap}"
        )));
    }
    let positives = pairs.iter().filter(|p| p.label == Label::Entails).count();
    if positives == 0 {
        return Err(Error::NoPositivePairs);
    }

    let mut scored: Vec<(f64, bool)> = pairs
        .iter()
        .map(|p| (score(p), p.label == Label::Entails))
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut points = Vec::new();
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut i = 0;
    while i < scored.len() {
        let threshold = scored[i].0;
        while i < scored.len() && scored[i].0 == threshold {
            if scored[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let recall = tp as f64 / positives as f64;
        let precision = tp as f64 / (tp + fp) as f64;
        points.push((recall, precision));
        if recall >= recall_cap {
            break;
        }
    }

    let mut auc = 0.0;
    let (first_r, first_p) = points[0];
    auc += first_r.min(recall_cap) * first_p;
    for w in points.windows(2) {
        let (r0, p0) = w[0];
        let (r1, p1) = w[1];
        if r0 >= recall_cap {
            break;
        }
        if r1 <= recall_cap {
            auc += (r1 - r0) * (p0 + p1) / 2.0;
        } else {
            let p_cap = p0 + (p1 - p0) * (recall_cap - r0) / (r1 - r0);
            auc += (recall_cap - r0) * (p0 + p_cap) / 2.0;
            break;
        }
    }

    Ok(PRCurve {
        points,
        recall_cap,
        auc_capped: auc,
    })
}

/// One grid cell result.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub source: TimeSource,
    pub window: WindowDays,
    pub measure: String,
    pub subset: EvalSubset,
    pub auc: f64,
    pub recall_cap: f64,
}

pub const RESULTS_HEADER: &str = "source,window,measure,subset,auc,recall_cap";

pub fn write_results(rows: &[ResultRow], out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "{RESULTS_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{:.6},{}",
            r.source, r.window, r.measure, r.subset, r.auc, r.recall_cap
        )?;
    }
    Ok(())
}

fn sort_rows(rows: &mut [ResultRow]) {
    rows.sort_by(|a, b| {
        (a.source.to_string(), a.window.0, &a.measure, a.subset).cmp(&(
            b.source.to_string(),
            b.window.0,
            &b.measure,
            b.subset,
        ))
    });
}

/// Evaluates one prebuilt graph over the requested measures and subsets.
pub fn eval_graph(
    g: &EntailmentGraph,
    pairs: &[EntailmentPair],
    measures: &[String],
    subsets: &[EvalSubset],
    recall_cap: f64,
) -> Result<Vec<ResultRow>> {
    let mut rows = Vec::new();
    for measure in measures {
        let idx = g.measure_index(measure)?;
        for &subset in subsets {
            let selected = subset_pairs(pairs, subset);
            let curve = pr_curve(
                &selected,
                |p| g.score(&p.premise, &p.hypothesis, idx),
                recall_cap,
            )?;
            rows.push(ResultRow {
                source: g.source,
                window: g.window,
                measure: measure.clone(),
                subset,
                auc: curve.auc_capped,
                recall_cap,
            });
        }
    }
    sort_rows(&mut rows);
    Ok(rows)
}

/// Experiment grid over time sources and windows, evaluated per measure and
/// subset.
#[derive(Clone, Debug)]
pub struct ExperimentGrid {
    pub sources: Vec<TimeSource>,
    pub windows: Vec<WindowDays>,
    pub subsets: Vec<EvalSubset>,
    pub recall_cap: f64,
}

/// Builds one graph per (source, window) cell and evaluates every measure
/// in `template.measures` on every subset. Rows are sorted by grid key, so
/// output does not depend on scheduling.
pub fn run_experiment(
    corpus: &Corpus,
    pairs: &[EntailmentPair],
    grid: &ExperimentGrid,
    template: &BuildOptions,
) -> Result<Vec<ResultRow>> {
    let cells: Vec<(TimeSource, WindowDays)> = grid
        .sources
        .iter()
        .flat_map(|&s| grid.windows.iter().map(move |&w| (s, w)))
        .collect();
    let measures: Vec<String> = template.measures.iter().map(|m| m.id.to_string()).collect();
    let results: Result<Vec<Vec<ResultRow>>> = cells
        .par_iter()
        .map(|&(source, window)| {
            let opts = BuildOptions {
                source,
                window,
                ..template.clone()
            };
            let g = build_graph(corpus, &opts)?;
            eval_graph(&g, pairs, &measures, &grid.subsets, grid.recall_cap)
        })
        .collect();
    let mut rows: Vec<ResultRow> = results?.into_iter().flatten().collect();
    sort_rows(&mut rows);
    Ok(rows)
}
