//! Brute-force reference implementations written straight from the formula
//! definitions. They share no internals with the library: counts, PMI,
//! interval overlap, filtered counts, and every similarity measure are
//! recomputed from the raw instance list, with overlap decided by explicit
//! day-set intersection.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use tempograph::relmodel::{
    Corpus, EntityPairId, PredicateId, RelationInstance, TimeInterval, TypePair,
};
use tempograph::timealg::TimeSource;

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Count,
    Pmi,
    TCount,
    TRatio,
    TBinary,
}

pub struct Naive<'a> {
    corpus: &'a Corpus,
    source: TimeSource,
    window: u32,
    c_pe: BTreeMap<(PredicateId, EntityPairId), u64>,
    c_p: BTreeMap<PredicateId, u64>,
    c_e: BTreeMap<EntityPairId, u64>,
    total: u64,
    filtered_cache: RefCell<BTreeMap<(PredicateId, PredicateId, EntityPairId), u64>>,
}

impl<'a> Naive<'a> {
    pub fn new(corpus: &'a Corpus, source: TimeSource, window: u32) -> Naive<'a> {
        let mut c_pe = BTreeMap::new();
        let mut c_p = BTreeMap::new();
        let mut c_e = BTreeMap::new();
        let mut total = 0u64;
        for inst in corpus.instances() {
            *c_pe
                .entry((inst.predicate.clone(), inst.entity_pair.clone()))
                .or_insert(0) += 1;
            *c_p.entry(inst.predicate.clone()).or_insert(0) += 1;
            *c_e.entry(inst.entity_pair.clone()).or_insert(0) += 1;
            total += 1;
        }
        Naive {
            corpus,
            source,
            window,
            c_pe,
            c_p,
            c_e,
            total,
            filtered_cache: RefCell::new(BTreeMap::new()),
        }
    }

    pub fn predicates(&self) -> Vec<PredicateId> {
        self.c_p.keys().cloned().collect()
    }

    fn count(&self, p: &PredicateId, ep: &EntityPairId) -> u64 {
        self.c_pe.get(&(p.clone(), ep.clone())).copied().unwrap_or(0)
    }

    pub fn pmi(&self, p: &PredicateId, ep: &EntityPairId) -> f64 {
        let cpe = self.count(p, ep);
        if cpe == 0 {
            return 0.0;
        }
        let ratio = (cpe as f64 * self.total as f64) / (self.c_p[p] as f64 * self.c_e[ep] as f64);
        ratio.ln().max(0.0)
    }

    fn support(&self, p: &PredicateId) -> Vec<EntityPairId> {
        self.c_pe
            .keys()
            .filter(|(pp, _)| pp == p)
            .map(|(_, ep)| ep.clone())
            .collect()
    }

    pub fn shared(&self, p: &PredicateId, q: &PredicateId) -> Vec<EntityPairId> {
        let qs: BTreeSet<EntityPairId> = self.support(q).into_iter().collect();
        self.support(p)
            .into_iter()
            .filter(|ep| qs.contains(ep))
            .collect()
    }

    /// All days covered by the instance's resolved intervals, each extended
    /// by the window on both sides.
    fn day_set(&self, inst: &RelationInstance) -> BTreeSet<i64> {
        let timex: Vec<(i64, i64)> = inst
            .timex_intervals
            .iter()
            .map(|iv| (iv.start(), iv.end()))
            .collect();
        let doc: Vec<(i64, i64)> = inst.doc_date.map(|d| (d, d)).into_iter().collect();
        let intervals = match self.source {
            TimeSource::TimexOnly => timex,
            TimeSource::DocDateOnly => doc,
            TimeSource::TimexAndDocDate => {
                if timex.is_empty() {
                    doc
                } else {
                    timex
                }
            }
        };
        let mut days = BTreeSet::new();
        let w = i64::from(self.window);
        for (s, e) in intervals {
            for d in s - w..=e + w {
                days.insert(d);
            }
        }
        days
    }

    /// Number of p-instances at ep whose extended days meet the extended
    /// days of any q-instance at ep.
    pub fn filtered(&self, p: &PredicateId, q: &PredicateId, ep: &EntityPairId) -> u64 {
        let key = (p.clone(), q.clone(), ep.clone());
        if let Some(n) = self.filtered_cache.borrow().get(&key) {
            return *n;
        }
        let n = self.filtered_uncached(p, q, ep);
        self.filtered_cache.borrow_mut().insert(key, n);
        n
    }

    fn filtered_uncached(&self, p: &PredicateId, q: &PredicateId, ep: &EntityPairId) -> u64 {
        let at = |pred: &PredicateId| -> Vec<&RelationInstance> {
            self.corpus
                .instances()
                .iter()
                .filter(|i| i.predicate == *pred && i.entity_pair == *ep)
                .collect()
        };
        let q_days: Vec<BTreeSet<i64>> = at(q).iter().map(|i| self.day_set(i)).collect();
        at(p)
            .iter()
            .filter(|i| {
                let pd = self.day_set(i);
                q_days.iter().any(|qd| !pd.is_disjoint(qd))
            })
            .count() as u64
    }

    /// Numerator weight of feature ep on the p side of direction p -> q.
    fn num_weight(&self, scheme: Scheme, p: &PredicateId, q: &PredicateId, ep: &EntityPairId) -> f64 {
        match scheme {
            Scheme::Count => self.count(p, ep) as f64,
            Scheme::Pmi => self.pmi(p, ep),
            Scheme::TCount => self.filtered(p, q, ep) as f64,
            Scheme::TRatio => {
                self.pmi(p, ep) * self.filtered(p, q, ep) as f64 / self.count(p, ep) as f64
            }
            Scheme::TBinary => {
                if self.filtered(p, q, ep) > 0 {
                    self.pmi(p, ep)
                } else {
                    0.0
                }
            }
        }
    }

    /// Unfiltered total of p under the weighting scheme matching `scheme`.
    fn unfiltered_total(&self, scheme: Scheme, p: &PredicateId) -> f64 {
        match scheme {
            Scheme::Count | Scheme::TCount => self.c_p[p] as f64,
            Scheme::Pmi | Scheme::TRatio | Scheme::TBinary => self
                .support(p)
                .iter()
                .map(|ep| self.pmi(p, ep))
                .sum(),
        }
    }

    pub fn precision(&self, scheme: Scheme, p: &PredicateId, q: &PredicateId) -> f64 {
        let den = self.unfiltered_total(scheme, p);
        if den == 0.0 {
            return 0.0;
        }
        let num: f64 = self
            .shared(p, q)
            .iter()
            .map(|ep| self.num_weight(scheme, p, q, ep))
            .sum();
        num / den
    }

    pub fn lin(&self, scheme: Scheme, p: &PredicateId, q: &PredicateId) -> f64 {
        let den = self.unfiltered_total(scheme, p) + self.unfiltered_total(scheme, q);
        if den == 0.0 {
            return 0.0;
        }
        let num: f64 = self
            .shared(p, q)
            .iter()
            .map(|ep| self.num_weight(scheme, p, q, ep) + self.num_weight(scheme, q, p, ep))
            .sum();
        num / den
    }

    fn weeds_sim(&self, scheme: Scheme, p: &PredicateId, q: &PredicateId) -> f64 {
        let pr = self.precision(scheme, p, q);
        let re = self.precision(scheme, q, p);
        if pr + re == 0.0 {
            0.0
        } else {
            2.0 * pr * re / (pr + re)
        }
    }

    fn binc(&self, scheme: Scheme, p: &PredicateId, q: &PredicateId) -> f64 {
        (self.lin(scheme, p, q) * self.precision(scheme, p, q)).sqrt()
    }

    fn hybrid_binc(&self, lin_scheme: Scheme, p: &PredicateId, q: &PredicateId) -> f64 {
        (self.lin(lin_scheme, p, q) * self.precision(Scheme::TCount, p, q)).sqrt()
    }

    /// Probabilistic precision: weights explicitly normalized to
    /// probabilities (by the unfiltered mass) before the precision sum.
    fn prob_precision(&self, scheme: Scheme, p: &PredicateId, q: &PredicateId) -> f64 {
        let z = self.unfiltered_total(Scheme::Count, p);
        if z == 0.0 {
            return 0.0;
        }
        let num: f64 = self
            .shared(p, q)
            .iter()
            .map(|ep| self.num_weight(scheme, p, q, ep) / z)
            .sum();
        let den: f64 = self
            .support(p)
            .iter()
            .map(|ep| self.count(p, ep) as f64 / z)
            .sum();
        if den == 0.0 {
            0.0
        } else {
            num / den
        }
    }

    fn cosine(&self, p: &PredicateId, q: &PredicateId) -> f64 {
        let norm = |pred: &PredicateId| -> f64 {
            self.support(pred)
                .iter()
                .map(|ep| self.pmi(pred, ep).powi(2))
                .sum::<f64>()
                .sqrt()
        };
        let (np, nq) = (norm(p), norm(q));
        if np == 0.0 || nq == 0.0 {
            return 0.0;
        }
        let dot: f64 = self
            .shared(p, q)
            .iter()
            .map(|ep| self.pmi(p, ep) * self.pmi(q, ep))
            .sum();
        dot / (np * nq)
    }

    /// Reference value of a registry measure for the ordered pair (p, q).
    pub fn score(&self, id: &str, p: &PredicateId, q: &PredicateId) -> f64 {
        use Scheme::*;
        match id {
            "cosine" => self.cosine(p, q),
            "lin_count" => self.lin(Count, p, q),
            "lin_pmi" => self.lin(Pmi, p, q),
            "weeds_prec_count" => self.precision(Count, p, q),
            "weeds_prec_pmi" => self.precision(Pmi, p, q),
            "weeds_rec_count" => self.precision(Count, q, p),
            "weeds_rec_pmi" => self.precision(Pmi, q, p),
            "weeds_sim_count" => self.weeds_sim(Count, p, q),
            "weeds_sim_pmi" => self.weeds_sim(Pmi, p, q),
            "binc_count" => self.binc(Count, p, q),
            "binc_pmi" => self.binc(Pmi, p, q),
            "t_lin_count" => self.lin(TCount, p, q),
            "t_weeds_prec_count" => self.precision(TCount, p, q),
            "t_weeds_rec_count" => self.precision(TCount, q, p),
            "t_weeds_sim_count" => self.weeds_sim(TCount, p, q),
            "t_binc_count" => self.binc(TCount, p, q),
            "t_lin_ratio_pmi" => self.lin(TRatio, p, q),
            "t_weeds_prec_ratio_pmi" => self.precision(TRatio, p, q),
            "t_weeds_rec_ratio_pmi" => self.precision(TRatio, q, p),
            "t_weeds_sim_ratio_pmi" => self.weeds_sim(TRatio, p, q),
            "t_binc_ratio_pmi" => self.binc(TRatio, p, q),
            "t_lin_binary_pmi" => self.lin(TBinary, p, q),
            "t_weeds_prec_binary_pmi" => self.precision(TBinary, p, q),
            "t_weeds_rec_binary_pmi" => self.precision(TBinary, q, p),
            "t_weeds_sim_binary_pmi" => self.weeds_sim(TBinary, p, q),
            "t_binc_binary_pmi" => self.binc(TBinary, p, q),
            "t_binc_hybrid_ratio" => self.hybrid_binc(TRatio, p, q),
            "t_binc_hybrid_binary" => self.hybrid_binc(TBinary, p, q),
            "weeds_pprec_count" => self.prob_precision(Count, p, q),
            "t_weeds_pprec_count" => self.prob_precision(TCount, p, q),
            other => panic!("oracle knows no measure `{other}`"),
        }
    }
}

/// A randomized micro-corpus: up to `max_preds` predicates and `max_eps`
/// entity pairs, with up to `max_per_cell` instances per (predicate, pair)
/// cell, day stamps in [0, 60], and a mix of timexed, doc-dated, and bare
/// instances.
pub fn random_micro_corpus(
    rng: &mut ChaCha8Rng,
    max_preds: usize,
    max_eps: usize,
    max_per_cell: usize,
) -> Corpus {
    let tp = TypePair::new("organization", "organization");
    let n_preds = rng.gen_range(1..=max_preds);
    let n_eps = rng.gen_range(1..=max_eps);
    let mut instances = Vec::new();
    for pi in 0..n_preds {
        for ei in 0..n_eps {
            if rng.gen_bool(0.35) {
                continue;
            }
            for _ in 0..rng.gen_range(1..=max_per_cell) {
                let n_timex = rng.gen_range(0..=2);
                let timexes = (0..n_timex)
                    .map(|_| {
                        let start = rng.gen_range(0..=60);
                        let len = rng.gen_range(0..=3);
                        TimeInterval::new(start, start + len).unwrap()
                    })
                    .collect();
                let doc_date = if rng.gen_bool(0.8) {
                    Some(rng.gen_range(0..=60))
                } else {
                    None
                };
                instances.push(RelationInstance {
                    predicate: PredicateId::new(format!("p{pi}"), tp.clone()),
                    entity_pair: EntityPairId::new(format!("a{ei}"), format!("b{ei}")),
                    timex_intervals: timexes,
                    doc_date,
                    doc_id: None,
                });
            }
        }
    }
    if instances.is_empty() {
        instances.push(RelationInstance {
            predicate: PredicateId::new("p0", tp),
            entity_pair: EntityPairId::new("a0", "b0"),
            timex_intervals: vec![],
            doc_date: Some(rng.gen_range(0..=60)),
            doc_id: None,
        });
    }
    Corpus::new(instances)
}
