//! Construction and evaluation of typed entailment graphs from time-stamped
//! binary relations.
//!
//! The pipeline: a relation corpus ([`relmodel`]) is turned into sparse
//! predicate-by-entity-pair feature vectors with PMI weights ([`counts`]),
//! co-occurrence evidence is filtered by time-interval overlap ([`timealg`],
//! [`tfilter`]), directional similarity measures are computed over the
//! filtered and unfiltered evidence ([`simmeasures`]), and the resulting
//! scored graph ([`graph`]) is evaluated against a labelled entailment-pair
//! dataset with capped precision-recall AUC ([`evalkit`]). [`synthcorpus`]
//! generates seeded sports-league corpora with known ground truth for
//! benchmarking.

pub mod cli;
pub mod counts;
pub mod error;
pub mod evalkit;
pub mod graph;
pub mod relmodel;
pub mod simmeasures;
pub mod synthcorpus;
pub mod tfilter;
pub mod timealg;

pub use error::{Error, Result};
