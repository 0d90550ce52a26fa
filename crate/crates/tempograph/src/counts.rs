//! Sparse predicate-by-entity-pair count vectors and PMI feature weights.

use std::collections::BTreeMap;
use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::relmodel::{Corpus, EntityPairId, PredicateId};

/// Raw co-occurrence count and PMI weight of one feature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FeatureWeight {
    pub raw_count: u64,
    pub pmi: f64,
}

/// Sparse feature vector of one predicate; entries exist only for counts >= 1.
#[derive(Clone, Debug)]
pub struct FeatureVector {
    pub predicate: PredicateId,
    pub entries: BTreeMap<EntityPairId, FeatureWeight>,
}

impl FeatureVector {
    pub fn total_count(&self) -> u64 {
        self.entries.values().map(|w| w.raw_count).sum()
    }

    pub fn total_pmi(&self) -> f64 {
        self.entries.values().map(|w| w.pmi).sum()
    }
}

/// Marginal totals c(p), c(ep), and the grand total T.
#[derive(Clone, Debug)]
pub struct CountTables {
    pub predicate_totals: BTreeMap<PredicateId, u64>,
    pub entity_pair_totals: BTreeMap<EntityPairId, u64>,
    pub grand_total: u64,
}

#[derive(Clone, Copy, Debug)]
pub struct BuildOptions {
    /// Clamp negative PMI values to zero. The similarity measures require
    /// non-negative weights; disable only for debugging.
    pub clamp_pmi: bool,
}

impl Default for BuildOptions {
    fn default() -> BuildOptions {
        BuildOptions { clamp_pmi: true }
    }
}

/// Feature vectors for every predicate plus the marginal tables.
#[derive(Clone, Debug)]
pub struct VectorSet {
    pub vectors: BTreeMap<PredicateId, FeatureVector>,
    pub tables: CountTables,
}

impl VectorSet {
    pub fn get(&self, p: &PredicateId) -> Option<&FeatureVector> {
        self.vectors.get(p)
    }
}

pub fn build_vectors(c: &Corpus) -> Result<VectorSet> {
    build_vectors_with(c, &BuildOptions::default())
}

/// Builds feature vectors with pmi(p, ep) = ln(c(p,ep) * T / (c(p) * c(ep))),
/// clamped to zero unless disabled.
pub fn build_vectors_with(c: &Corpus, opts: &BuildOptions) -> Result<VectorSet> {
    if c.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut predicate_totals: BTreeMap<PredicateId, u64> = BTreeMap::new();
    let mut entity_pair_totals: BTreeMap<EntityPairId, u64> = BTreeMap::new();
    let mut grand_total = 0u64;
    for (p, by_ep) in c.index() {
        for (ep, insts) in by_ep {
            let n = insts.len() as u64;
            *predicate_totals.entry(p.clone()).or_default() += n;
            *entity_pair_totals.entry(ep.clone()).or_default() += n;
            grand_total += n;
        }
    }

    let mut vectors = BTreeMap::new();
    for (p, by_ep) in c.index() {
        let c_p = predicate_totals[p] as f64;
        let mut entries = BTreeMap::new();
        for (ep, insts) in by_ep {
            let c_p_ep = insts.len() as u64;
            let c_ep = entity_pair_totals[ep] as f64;
            let mut pmi = (c_p_ep as f64 * grand_total as f64 / (c_p * c_ep)).ln();
            if opts.clamp_pmi {
                pmi = pmi.max(0.0);
            }
            entries.insert(
                ep.clone(),
                FeatureWeight {
                    raw_count: c_p_ep,
                    pmi,
                },
            );
        }
        vectors.insert(
            p.clone(),
            FeatureVector {
                predicate: p.clone(),
                entries,
            },
        );
    }

    Ok(VectorSet {
        vectors,
        tables: CountTables {
            predicate_totals,
            entity_pair_totals,
            grand_total,
        },
    })
}

/// Cosine similarity over the PMI-weighted vectors; zero if either norm is zero.
pub fn cosine(p: &FeatureVector, q: &FeatureVector) -> f64 {
    let mut dot = 0.0;
    for (ep, wp) in &p.entries {
        if let Some(wq) = q.entries.get(ep) {
            dot += wp.pmi * wq.pmi;
        }
    }
    let norm = |v: &FeatureVector| {
        v.entries
            .values()
            .map(|w| w.pmi * w.pmi)
            .sum::<f64>()
            .sqrt()
    };
    let denom = norm(p) * norm(q);
    if denom == 0.0 {
        0.0
    } else {
        dot / denom
    }
}

/// Dumps every (predicate, entity pair, raw count, pmi) as sorted TSV lines.
pub fn dump_vectors(vs: &VectorSet, out: &mut impl Write) -> io::Result<()> {
    for (p, v) in &vs.vectors {
        for (ep, w) in &v.entries {
            writeln!(out, "{p}\t{ep}\t{}\t{}", w.raw_count, w.pmi)?;
        }
    }
    Ok(())
}
