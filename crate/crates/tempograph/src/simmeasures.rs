//! Similarity measure registry: non-temporal baselines (Lin, Weeds, BInc,
//! cosine) and their temporal adaptations over filtered counts.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::counts::{cosine, FeatureVector, VectorSet};
use crate::error::{Error, Result};
use crate::relmodel::PredicateId;
use crate::tfilter::{EdgeEvidence, EvidenceSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Lin,
    WeedsPrecision,
    WeedsRecall,
    WeedsSimilarity,
    /// Weeds precision over probability-normalized weights. Normalization
    /// cancels against the denominator, so it coincides with WeedsPrecision;
    /// kept as a separate registry entry and marked experimental.
    WeedsProbPrecision,
    BInc,
    Cosine,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Weighting {
    Count,
    Pmi,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TemporalMode {
    None,
    /// Use the temporally filtered counts as weights.
    FilteredCount,
    /// Scale PMI weights by the ratio of filtered to raw counts.
    RatioPmi,
    /// Keep PMI weights where the filtered count is positive, else zero.
    BinaryPmi,
    /// BInc from count-based Weeds precision and Ratio-PMI Lin similarity.
    HybridRatio,
    /// BInc from count-based Weeds precision and Binary-PMI Lin similarity.
    HybridBinary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MeasureSpec {
    pub id: &'static str,
    pub family: Family,
    pub weighting: Weighting,
    pub temporal: TemporalMode,
}

const fn m(id: &'static str, family: Family, weighting: Weighting, temporal: TemporalMode) -> MeasureSpec {
    MeasureSpec {
        id,
        family,
        weighting,
        temporal,
    }
}

use Family::*;
use TemporalMode::{BinaryPmi, FilteredCount, HybridBinary, HybridRatio, RatioPmi};
use Weighting::{Count, Pmi};

/// All known measures. The default set (`all`) is the registry minus
/// `weeds_pprec_count`, which is identical to `weeds_prec_count`.
pub static REGISTRY: [MeasureSpec; 30] = [
    m("cosine", Cosine, Pmi, TemporalMode::None),
    m("lin_count", Lin, Count, TemporalMode::None),
    m("lin_pmi", Lin, Pmi, TemporalMode::None),
    m("weeds_prec_count", WeedsPrecision, Count, TemporalMode::None),
    m("weeds_prec_pmi", WeedsPrecision, Pmi, TemporalMode::None),
    m("weeds_rec_count", WeedsRecall, Count, TemporalMode::None),
    m("weeds_rec_pmi", WeedsRecall, Pmi, TemporalMode::None),
    m("weeds_sim_count", WeedsSimilarity, Count, TemporalMode::None),
    m("weeds_sim_pmi", WeedsSimilarity, Pmi, TemporalMode::None),
    m("binc_count", BInc, Count, TemporalMode::None),
    m("binc_pmi", BInc, Pmi, TemporalMode::None),
    m("t_lin_count", Lin, Count, FilteredCount),
    m("t_weeds_prec_count", WeedsPrecision, Count, FilteredCount),
    m("t_weeds_rec_count", WeedsRecall, Count, FilteredCount),
    m("t_weeds_sim_count", WeedsSimilarity, Count, FilteredCount),
    m("t_binc_count", BInc, Count, FilteredCount),
    m("t_lin_ratio_pmi", Lin, Pmi, RatioPmi),
    m("t_weeds_prec_ratio_pmi", WeedsPrecision, Pmi, RatioPmi),
    m("t_weeds_rec_ratio_pmi", WeedsRecall, Pmi, RatioPmi),
    m("t_weeds_sim_ratio_pmi", WeedsSimilarity, Pmi, RatioPmi),
    m("t_binc_ratio_pmi", BInc, Pmi, RatioPmi),
    m("t_lin_binary_pmi", Lin, Pmi, BinaryPmi),
    m("t_weeds_prec_binary_pmi", WeedsPrecision, Pmi, BinaryPmi),
    m("t_weeds_rec_binary_pmi", WeedsRecall, Pmi, BinaryPmi),
    m("t_weeds_sim_binary_pmi", WeedsSimilarity, Pmi, BinaryPmi),
    m("t_binc_binary_pmi", BInc, Pmi, BinaryPmi),
    m("t_binc_hybrid_ratio", BInc, Pmi, HybridRatio),
    m("t_binc_hybrid_binary", BInc, Pmi, HybridBinary),
    m("weeds_pprec_count", WeedsProbPrecision, Count, TemporalMode::None),
    m("t_weeds_pprec_count", WeedsProbPrecision, Count, FilteredCount),
];

pub fn lookup(id: &str) -> Result<&'static MeasureSpec> {
    REGISTRY
        .iter()
        .find(|spec| spec.id == id)
        .ok_or_else(|| Error::UnknownMeasure(id.to_string()))
}

/// The default 29-measure evaluation set.
pub fn default_measures() -> Vec<&'static MeasureSpec> {
    REGISTRY
        .iter()
        .filter(|spec| spec.id != "weeds_pprec_count")
        .collect()
}

/// Parses a comma-separated measure list; `all` selects the default set.
pub fn parse_measures(s: &str) -> Result<Vec<&'static MeasureSpec>> {
    if s == "all" {
        return Ok(default_measures());
    }
    let mut out = Vec::new();
    for id in s.split(',') {
        let id = id.trim();
        if id.is_empty() {
            continue;
        }
        let spec = lookup(id)?;
        if !out.contains(&spec) {
            out.push(spec);
        }
    }
    if out.is_empty() {
        return Err(Error::Invalid("empty measure list".to_string()));
    }
    Ok(out)
}

/// Whether temporal denominators use unfiltered totals (default) or the
/// filtered sums themselves.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DenominatorMode {
    #[default]
    Unfiltered,
    Filtered,
}

impl DenominatorMode {
    pub fn parse(s: &str) -> Result<DenominatorMode> {
        match s {
            "unfiltered" => Ok(DenominatorMode::Unfiltered),
            "filtered" => Ok(DenominatorMode::Filtered),
            _ => Err(Error::Invalid(format!(
                "unknown denominator mode `{s}` (expected unfiltered or filtered)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ScoreOptions {
    pub denominator: DenominatorMode,
}

/// Weighting scheme of one side of a directed comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Scheme {
    Count,
    Pmi,
    TCount,
    TRatio,
    TBinary,
}

impl Scheme {
    fn of(spec: &MeasureSpec) -> Scheme {
        match spec.temporal {
            TemporalMode::None => match spec.weighting {
                Weighting::Count => Scheme::Count,
                Weighting::Pmi => Scheme::Pmi,
            },
            FilteredCount => Scheme::TCount,
            RatioPmi => Scheme::TRatio,
            BinaryPmi => Scheme::TBinary,
            HybridRatio | HybridBinary => {
                unreachable!("hybrid modes are scored from their components")
            }
        }
    }
}

/// Per-direction weight sums: numerators over the shared support for every
/// scheme, plus unfiltered totals over the full support.
#[derive(Clone, Copy, Debug, Default)]
struct DirectedSums {
    shared_count: f64,
    shared_pmi: f64,
    shared_tcount: f64,
    shared_tratio: f64,
    shared_tbinary: f64,
    total_count: f64,
    total_pmi: f64,
}

impl DirectedSums {
    fn numerator(&self, s: Scheme) -> f64 {
        match s {
            Scheme::Count => self.shared_count,
            Scheme::Pmi => self.shared_pmi,
            Scheme::TCount => self.shared_tcount,
            Scheme::TRatio => self.shared_tratio,
            Scheme::TBinary => self.shared_tbinary,
        }
    }

    fn denominator(&self, s: Scheme, mode: DenominatorMode) -> f64 {
        match (s, mode) {
            (Scheme::Count, _) => self.total_count,
            (Scheme::Pmi, _) => self.total_pmi,
            (Scheme::TCount, DenominatorMode::Unfiltered) => self.total_count,
            (Scheme::TRatio | Scheme::TBinary, DenominatorMode::Unfiltered) => self.total_pmi,
            (s, DenominatorMode::Filtered) => self.numerator(s),
        }
    }
}

/// Precomputed directed sums for one ordered predicate pair.
pub struct EdgeContext<'a> {
    p: &'a FeatureVector,
    q: &'a FeatureVector,
    fwd: DirectedSums,
    rev: DirectedSums,
    opts: ScoreOptions,
}

impl<'a> EdgeContext<'a> {
    pub fn new(
        p: &'a FeatureVector,
        q: &'a FeatureVector,
        ev_pq: Option<&EdgeEvidence>,
        ev_qp: Option<&EdgeEvidence>,
        opts: ScoreOptions,
    ) -> EdgeContext<'a> {
        let mut fwd = DirectedSums {
            total_count: p.total_count() as f64,
            total_pmi: p.total_pmi(),
            ..Default::default()
        };
        let mut rev = DirectedSums {
            total_count: q.total_count() as f64,
            total_pmi: q.total_pmi(),
            ..Default::default()
        };
        let filtered = |ev: Option<&EdgeEvidence>, ep| -> f64 {
            ev.and_then(|e| e.per_feature.get(ep)).copied().unwrap_or(0) as f64
        };
        for (ep, wp) in &p.entries {
            let Some(wq) = q.entries.get(ep) else {
                continue;
            };
            let f_pq = filtered(ev_pq, ep);
            let f_qp = filtered(ev_qp, ep);
            for (sums, w, f) in [(&mut fwd, wp, f_pq), (&mut rev, wq, f_qp)] {
                let c = w.raw_count as f64;
                sums.shared_count += c;
                sums.shared_pmi += w.pmi;
                sums.shared_tcount += f;
                sums.shared_tratio += w.pmi * f / c;
                sums.shared_tbinary += if f > 0.0 { w.pmi } else { 0.0 };
            }
        }
        EdgeContext {
            p,
            q,
            fwd,
            rev,
            opts,
        }
    }

    fn ratio(num: f64, den: f64) -> f64 {
        if den == 0.0 {
            0.0
        } else {
            num / den
        }
    }

    fn precision(&self, s: Scheme) -> f64 {
        Self::ratio(
            self.fwd.numerator(s),
            self.fwd.denominator(s, self.opts.denominator),
        )
    }

    fn recall(&self, s: Scheme) -> f64 {
        Self::ratio(
            self.rev.numerator(s),
            self.rev.denominator(s, self.opts.denominator),
        )
    }

    fn lin(&self, s: Scheme) -> f64 {
        Self::ratio(
            self.fwd.numerator(s) + self.rev.numerator(s),
            self.fwd.denominator(s, self.opts.denominator)
                + self.rev.denominator(s, self.opts.denominator),
        )
    }

    fn weeds_sim(&self, s: Scheme) -> f64 {
        let p = self.precision(s);
        let r = self.recall(s);
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }

    fn binc(&self, spec: &MeasureSpec) -> f64 {
        let (lin, prec) = match spec.temporal {
            HybridRatio => (self.lin(Scheme::TRatio), self.precision(Scheme::TCount)),
            HybridBinary => (self.lin(Scheme::TBinary), self.precision(Scheme::TCount)),
            _ => {
                let s = Scheme::of(spec);
                (self.lin(s), self.precision(s))
            }
        };
        (lin * prec).sqrt()
    }

    pub fn score(&self, spec: &MeasureSpec) -> f64 {
        match spec.family {
            Cosine => cosine(self.p, self.q),
            Lin => self.lin(Scheme::of(spec)),
            WeedsPrecision | WeedsProbPrecision => self.precision(Scheme::of(spec)),
            WeedsRecall => self.recall(Scheme::of(spec)),
            WeedsSimilarity => self.weeds_sim(Scheme::of(spec)),
            BInc => self.binc(spec),
        }
    }
}

/// Sparse matrix of similarity scores per measure over ordered predicate
/// pairs; pairs with empty shared support are absent (implicit zero).
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreMatrix {
    pub measure_ids: Vec<String>,
    pub scores: BTreeMap<(PredicateId, PredicateId), Vec<f64>>,
}

impl ScoreMatrix {
    pub fn measure_index(&self, id: &str) -> Result<usize> {
        self.measure_ids
            .iter()
            .position(|m| m == id)
            .ok_or_else(|| Error::UnknownMeasure(id.to_string()))
    }

    /// Score for an ordered pair under one measure; absent pairs score zero.
    pub fn get(&self, p: &PredicateId, q: &PredicateId, measure_idx: usize) -> f64 {
        self.scores
            .get(&(p.clone(), q.clone()))
            .map_or(0.0, |row| row[measure_idx])
    }
}

/// Scores every ordered predicate pair with non-empty shared support.
pub fn score_all(
    vectors: &VectorSet,
    evidence: &EvidenceSet,
    measures: &[&MeasureSpec],
    opts: ScoreOptions,
) -> ScoreMatrix {
    let rows: Vec<((PredicateId, PredicateId), Vec<f64>)> = evidence
        .edges
        .par_iter()
        .map(|((p, q), ev_pq)| {
            let ctx = EdgeContext::new(
                &vectors.vectors[p],
                &vectors.vectors[q],
                Some(ev_pq),
                evidence.edge(q, p),
                opts,
            );
            let row = measures.iter().map(|spec| ctx.score(spec)).collect();
            ((p.clone(), q.clone()), row)
        })
        .collect();
    ScoreMatrix {
        measure_ids: measures.iter().map(|spec| spec.id.to_string()).collect(),
        scores: rows.into_iter().collect(),
    }
}
