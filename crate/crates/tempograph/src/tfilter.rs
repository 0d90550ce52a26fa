//! Temporally filtered, directional co-occurrence counts per ordered
//! predicate pair and shared entity-pair feature.

use std::collections::BTreeMap;
use std::io::{self, Write};

use rayon::prelude::*;

use crate::relmodel::{Corpus, EntityPairId, PredicateId, TimeInterval};
use crate::timealg::{overlaps_in, resolve_intervals, TimeSource, WindowDays, WindowMode};

/// Per-feature filtered counts for one ordered predicate pair (p, q):
/// the number of p-events at each shared feature that temporally overlap
/// some q-event at the same feature. Shared features that never overlap
/// are stored with an explicit zero.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EdgeEvidence {
    pub per_feature: BTreeMap<EntityPairId, u64>,
}

impl EdgeEvidence {
    pub fn total_filtered(&self) -> u64 {
        self.per_feature.values().sum()
    }
}

/// All directional edges, keyed by ordered predicate pair.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EvidenceSet {
    pub edges: BTreeMap<(PredicateId, PredicateId), EdgeEvidence>,
}

impl EvidenceSet {
    pub fn edge(&self, p: &PredicateId, q: &PredicateId) -> Option<&EdgeEvidence> {
        self.edges.get(&(p.clone(), q.clone()))
    }

    pub fn filtered(&self, p: &PredicateId, q: &PredicateId, ep: &EntityPairId) -> u64 {
        self.edge(p, q)
            .and_then(|e| e.per_feature.get(ep))
            .copied()
            .unwrap_or(0)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct FilterOptions {
    pub source: TimeSource,
    pub window: WindowDays,
    pub mode: WindowMode,
}

impl FilterOptions {
    pub fn new(source: TimeSource, window: WindowDays) -> FilterOptions {
        FilterOptions {
            source,
            window,
            mode: WindowMode::default(),
        }
    }
}

/// Marks each left-hand instance that has any interval overlapping any
/// right-hand interval and returns the number of marked instances.
fn count_marked(
    left: &[Vec<TimeInterval>],
    right_flat: &[TimeInterval],
    w: WindowDays,
    mode: WindowMode,
) -> u64 {
    left.iter()
        .filter(|ivs| {
            ivs.iter()
                .any(|a| right_flat.iter().any(|b| overlaps_in(*a, *b, w, mode)))
        })
        .count() as u64
}

/// Computes temporally filtered counts for every unordered predicate pair
/// co-occurring at some entity pair, in both directions.
///
/// Entity pairs are processed independently and in parallel; per-edge maps
/// from different entity pairs are disjoint, so the merged result does not
/// depend on scheduling.
pub fn temporal_filter(c: &Corpus, opts: &FilterOptions) -> EvidenceSet {
    let mut by_ep: BTreeMap<&EntityPairId, BTreeMap<&PredicateId, Vec<usize>>> = BTreeMap::new();
    for (p, eps) in c.index() {
        for (ep, insts) in eps {
            by_ep.entry(ep).or_default().insert(p, insts.clone());
        }
    }

    let tasks: Vec<_> = by_ep.into_iter().filter(|(_, preds)| preds.len() > 1).collect();
    let partials: Vec<BTreeMap<(PredicateId, PredicateId), EdgeEvidence>> = tasks
        .par_iter()
        .map(|(ep, preds)| {
            // Per predicate: intervals per instance, plus all of them flattened.
            type Resolved<'a> = (&'a PredicateId, Vec<Vec<TimeInterval>>, Vec<TimeInterval>);
            let resolved: Vec<Resolved> = preds
                .iter()
                .map(|(p, insts)| {
                    let per_inst: Vec<Vec<TimeInterval>> = insts
                        .iter()
                        .map(|&i| resolve_intervals(&c.instances()[i], opts.source))
                        .collect();
                    let flat = per_inst.iter().flatten().copied().collect();
                    (*p, per_inst, flat)
                })
                .collect();

            let mut edges: BTreeMap<(PredicateId, PredicateId), EdgeEvidence> = BTreeMap::new();
            for i in 0..resolved.len() {
                for j in i + 1..resolved.len() {
                    let (p, p_insts, p_flat) = &resolved[i];
                    let (q, q_insts, q_flat) = &resolved[j];
                    let pq = count_marked(p_insts, q_flat, opts.window, opts.mode);
                    let qp = count_marked(q_insts, p_flat, opts.window, opts.mode);
                    edges
                        .entry(((*p).clone(), (*q).clone()))
                        .or_default()
                        .per_feature
                        .insert((*ep).clone(), pq);
                    edges
                        .entry(((*q).clone(), (*p).clone()))
                        .or_default()
                        .per_feature
                        .insert((*ep).clone(), qp);
                }
            }
            edges
        })
        .collect();

    let mut merged = EvidenceSet::default();
    for partial in partials {
        for (key, evidence) in partial {
            let edge = merged.edges.entry(key).or_default();
            for (ep, n) in evidence.per_feature {
                *edge.per_feature.entry(ep).or_default() += n;
            }
        }
    }
    merged
}

/// Dumps every (p, q, entity pair, filtered count) as sorted TSV lines.
pub fn dump_evidence(ev: &EvidenceSet, out: &mut impl Write) -> io::Result<()> {
    for ((p, q), edge) in &ev.edges {
        for (ep, n) in &edge.per_feature {
            writeln!(out, "{p}\t{q}\t{ep}\t{n}")?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relmodel::{parse_day, RelationInstance, TypePair};
    use proptest::prelude::*;

    fn pred(name: &str) -> PredicateId {
        PredicateId::new(name, TypePair::new("organization", "organization"))
    }

    fn inst(
        p: &str,
        ep: (&str, &str),
        timexes: Vec<TimeInterval>,
        doc_date: Option<i64>,
    ) -> RelationInstance {
        RelationInstance {
            predicate: pred(p),
            entity_pair: EntityPairId::new(ep.0, ep.1),
            timex_intervals: timexes,
            doc_date,
            doc_id: None,
        }
    }

    /// Two Arsenal/Man United matches: a win reported on 2018-03-10 and a
    /// loss reported on 2019-01-25, each article also stating play.
    fn worked_example() -> Corpus {
        let ep = ("arsenal", "man_united");
        let d1 = parse_day("2018-03-10").unwrap();
        let d2 = parse_day("2019-01-25").unwrap();
        Corpus::new(vec![
            inst("win", ep, vec![], Some(d1)),
            inst("play", ep, vec![], Some(d1)),
            inst("lose", ep, vec![], Some(d2)),
            inst("play", ep, vec![], Some(d2)),
        ])
    }

    #[test]
    fn worked_example_filtered_counts() {
        let corpus = worked_example();
        let opts = FilterOptions::new(TimeSource::DocDateOnly, WindowDays(0));
        let ev = temporal_filter(&corpus, &opts);
        let ep = EntityPairId::new("arsenal", "man_united");
        assert_eq!(ev.filtered(&pred("win"), &pred("play"), &ep), 1);
        assert_eq!(ev.filtered(&pred("lose"), &pred("play"), &ep), 1);
        assert_eq!(ev.filtered(&pred("win"), &pred("lose"), &ep), 0);
        assert_eq!(ev.filtered(&pred("lose"), &pred("win"), &ep), 0);
        assert_eq!(ev.filtered(&pred("play"), &pred("win"), &ep), 1);
        assert_eq!(ev.filtered(&pred("play"), &pred("lose"), &ep), 1);
        let edge = ev.edge(&pred("win"), &pred("lose")).unwrap();
        assert_eq!(edge.per_feature.get(&ep), Some(&0));
    }

    #[test]
    fn single_predicate_produces_no_edges() {
        let corpus = Corpus::new(vec![
            inst("win", ("a", "b"), vec![], Some(0)),
            inst("win", ("a", "b"), vec![], Some(5)),
        ]);
        let ev = temporal_filter(
            &corpus,
            &FilterOptions::new(TimeSource::DocDateOnly, WindowDays(10)),
        );
        assert!(ev.edges.is_empty());
    }

    #[test]
    fn multi_interval_instance_counts_once() {
        let corpus = Corpus::new(vec![
            inst(
                "p",
                ("a", "b"),
                vec![TimeInterval::day(0), TimeInterval::day(10)],
                None,
            ),
            inst("q", ("a", "b"), vec![TimeInterval::day(0)], None),
            inst("q", ("a", "b"), vec![TimeInterval::day(10)], None),
        ]);
        let ev = temporal_filter(
            &corpus,
            &FilterOptions::new(TimeSource::TimexOnly, WindowDays(0)),
        );
        let ep = EntityPairId::new("a", "b");
        assert_eq!(ev.filtered(&pred("p"), &pred("q"), &ep), 1);
        assert_eq!(ev.filtered(&pred("q"), &pred("p"), &ep), 2);
    }

    #[test]
    fn untimed_instances_never_overlap() {
        let corpus = Corpus::new(vec![
            inst("p", ("a", "b"), vec![], None),
            inst("q", ("a", "b"), vec![TimeInterval::day(3)], None),
        ]);
        let ev = temporal_filter(
            &corpus,
            &FilterOptions::new(TimeSource::TimexAndDocDate, WindowDays(3650)),
        );
        let ep = EntityPairId::new("a", "b");
        assert_eq!(ev.filtered(&pred("p"), &pred("q"), &ep), 0);
        assert_eq!(ev.filtered(&pred("q"), &pred("p"), &ep), 0);
    }

    /// Enumerates every (p-instance, q-instance) pair and tests overlap
    /// directly, without the per-entity-pair grouping of the main path.
    fn brute_force(c: &Corpus, opts: &FilterOptions) -> EvidenceSet {
        let mut ev = EvidenceSet::default();
        for a in c.instances() {
            for b in c.instances() {
                if a.predicate == b.predicate || a.entity_pair != b.entity_pair {
                    continue;
                }
                ev.edges
                    .entry((a.predicate.clone(), b.predicate.clone()))
                    .or_default()
                    .per_feature
                    .entry(a.entity_pair.clone())
                    .or_insert(0);
            }
        }
        for a in c.instances() {
            let a_ivs = resolve_intervals(a, opts.source);
            let mut partners: BTreeMap<(PredicateId, EntityPairId), bool> = BTreeMap::new();
            for b in c.instances() {
                if a.predicate == b.predicate || a.entity_pair != b.entity_pair {
                    continue;
                }
                let b_ivs = resolve_intervals(b, opts.source);
                let hit = a_ivs.iter().any(|x| {
                    b_ivs
                        .iter()
                        .any(|y| overlaps_in(*x, *y, opts.window, opts.mode))
                });
                let entry = partners
                    .entry((b.predicate.clone(), a.entity_pair.clone()))
                    .or_insert(false);
                *entry = *entry || hit;
            }
            for ((q, ep), hit) in partners {
                if hit {
                    *ev.edges
                        .get_mut(&(a.predicate.clone(), q))
                        .unwrap()
                        .per_feature
                        .get_mut(&ep)
                        .unwrap() += 1;
                }
            }
        }
        ev
    }

    fn random_micro_corpus() -> impl Strategy<Value = Corpus> {
        let instance = (
            0usize..5,
            0usize..4,
            proptest::collection::vec((0i64..=60, 0i64..=5), 0..3),
            proptest::option::of(0i64..=60),
        );
        proptest::collection::vec(instance, 1..=18).prop_map(|specs| {
            Corpus::new(
                specs
                    .into_iter()
                    .map(|(p, e, timexes, doc)| {
                        inst(
                            &format!("p{p}"),
                            (&format!("e{e}"), "x"),
                            timexes
                                .into_iter()
                                .map(|(s, len)| TimeInterval::new(s, s + len).unwrap())
                                .collect(),
                            doc,
                        )
                    })
                    .collect(),
            )
        })
    }

    proptest! {
        #[test]
        fn matches_brute_force_oracle(
            corpus in random_micro_corpus(),
            w in prop_oneof![Just(0u32), Just(2), Just(7)],
            src in prop_oneof![
                Just(TimeSource::TimexOnly),
                Just(TimeSource::DocDateOnly),
                Just(TimeSource::TimexAndDocDate),
            ],
        ) {
            let opts = FilterOptions::new(src, WindowDays(w));
            prop_assert_eq!(temporal_filter(&corpus, &opts), brute_force(&corpus, &opts));
        }

        #[test]
        fn filtered_counts_are_dominated_and_monotone(
            corpus in random_micro_corpus(),
            w in 0u32..=7,
            extra in 0u32..=7,
        ) {
            let small = temporal_filter(
                &corpus,
                &FilterOptions::new(TimeSource::TimexAndDocDate, WindowDays(w)),
            );
            let large = temporal_filter(
                &corpus,
                &FilterOptions::new(TimeSource::TimexAndDocDate, WindowDays(w + extra)),
            );
            for ((p, q), edge) in &small.edges {
                for (ep, n) in &edge.per_feature {
                    prop_assert!(*n <= corpus.count(p, ep) as u64);
                    prop_assert!(*n <= large.filtered(p, q, ep));
                    let reverse = small.filtered(q, p, ep);
                    prop_assert_eq!(*n > 0, reverse > 0);
                }
            }
        }
    }

    #[test]
    fn output_is_identical_across_thread_counts() {
        let corpus = worked_example();
        let opts = FilterOptions::new(TimeSource::DocDateOnly, WindowDays(2));
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| temporal_filter(&corpus, &opts))
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn dump_is_sorted() {
        let corpus = worked_example();
        let ev = temporal_filter(
            &corpus,
            &FilterOptions::new(TimeSource::DocDateOnly, WindowDays(0)),
        );
        let mut buf = Vec::new();
        dump_evidence(&ev, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        let mut sorted = lines.clone();
        sorted.sort();
        assert_eq!(lines, sorted);
        assert!(lines.contains(&"win\tplay\tarsenal|man_united\t1"));
        assert!(lines.contains(&"win\tlose\tarsenal|man_united\t0"));
    }
}
