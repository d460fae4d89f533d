//! Cross-module consistency checks: declared answer lengths and access
//! counts against instrumented execution, and the privacy verdict against
//! the leakage metrics, over every built-in scheme.

use std::sync::atomic::{AtomicUsize, Ordering};

use wpir::metrics::build_statistics;
use wpir::partition::{BasicPartition, PartitionScheme1};
use wpir::scheme::{check_perfect_privacy, verify_retrievability};
use wpir::{
    time_share, Database, Scheme, Scheme1, Scheme2, StrategyDistribution, SymbolStore,
};

/// Forwards to a database while counting symbol reads.
struct CountingStore<'a> {
    inner: &'a Database,
    reads: AtomicUsize,
}

impl<'a> CountingStore<'a> {
    fn new(inner: &'a Database) -> Self {
        Self { inner, reads: AtomicUsize::new(0) }
    }

    fn take(&self) -> usize {
        self.reads.swap(0, Ordering::Relaxed)
    }
}

impl SymbolStore for CountingStore<'_> {
    fn file_count(&self) -> usize {
        self.inner.file_count()
    }

    fn symbols_per_file(&self) -> usize {
        self.inner.symbols_per_file()
    }

    fn modulus(&self) -> u8 {
        self.inner.modulus()
    }

    fn symbol(&self, file: usize, index: usize) -> u8 {
        self.reads.fetch_add(1, Ordering::Relaxed);
        self.inner.symbol(file, index)
    }
}

fn built_in_schemes() -> Vec<Box<dyn Scheme>> {
    vec![
        Box::new(Scheme1::new(3, 2, 2).unwrap()),
        Box::new(Scheme1::new(2, 3, 3).unwrap()),
        Box::new(Scheme2::new(3, 2, 2).unwrap()),
        Box::new(Scheme2::new(2, 3, 3).unwrap()),
        Box::new(BasicPartition::new(Box::new(Scheme1::new(2, 2, 2).unwrap()), 2).unwrap()),
        Box::new(BasicPartition::new(Box::new(Scheme2::new(2, 2, 2).unwrap()), 3).unwrap()),
        Box::new(PartitionScheme1::new(6, 3, 2, 2).unwrap()),
        Box::new(time_share(Box::new(Scheme2::new(2, 2, 2).unwrap()))),
    ]
}

#[test]
fn declared_lengths_and_access_counts_match_execution() {
    for scheme in built_in_schemes() {
        let params = *scheme.params();
        for seed in 0..3 {
            let db = Database::random(&params, seed);
            let counter = CountingStore::new(&db);
            for server in 0..params.n_servers {
                for query in scheme.query_alphabet(server).unwrap() {
                    let answer = scheme.answer(&query, &counter);
                    assert_eq!(
                        answer.len(),
                        scheme.answer_length(&query),
                        "{}: answer length mismatch",
                        scheme.id()
                    );
                    assert_eq!(
                        counter.take(),
                        scheme.access_count(&query),
                        "{}: access count mismatch",
                        scheme.id()
                    );
                }
            }
        }
    }
}

#[test]
fn privacy_verdict_agrees_with_zero_leakage() {
    // the privacy checker and the leakage metrics are independent
    // implementations; all-private must coincide with both leakages at zero
    let cases: Vec<(Box<dyn Scheme>, StrategyDistribution)> = vec![
        (
            Box::new(Scheme1::new(3, 2, 2).unwrap()),
            StrategyDistribution::bernoulli(0.5),
        ),
        (
            Box::new(Scheme1::new(3, 2, 2).unwrap()),
            StrategyDistribution::bernoulli(0.2),
        ),
        (
            Box::new(Scheme1::new(2, 3, 3).unwrap()),
            StrategyDistribution::UniformIid,
        ),
        (
            Box::new(Scheme2::new(3, 2, 2).unwrap()),
            StrategyDistribution::UniformIid,
        ),
        (
            Box::new(Scheme2::new(3, 2, 2).unwrap()),
            StrategyDistribution::sphere(1),
        ),
        (
            Box::new(PartitionScheme1::new(4, 2, 2, 2).unwrap()),
            StrategyDistribution::bernoulli(0.5),
        ),
    ];
    for (scheme, dist) in cases {
        let verdicts = check_perfect_privacy(scheme.as_ref(), &dist).unwrap();
        let stats = build_statistics(scheme.as_ref(), &dist).unwrap();
        let all_private = verdicts.iter().all(|&v| v);
        let zero_leakage = stats.leakage_mi() == 0.0 && stats.leakage_wil() == 0.0;
        assert_eq!(
            all_private,
            zero_leakage,
            "{}: privacy {verdicts:?} vs leakage ({}, {})",
            scheme.id(),
            stats.leakage_mi(),
            stats.leakage_wil()
        );
    }
}

#[test]
fn privacy_examples() {
    // uniform strategy entries make the sum-query scheme fully private
    let scheme = Scheme1::new(3, 2, 2).unwrap();
    let verdicts =
        check_perfect_privacy(&scheme, &StrategyDistribution::bernoulli(0.5)).unwrap();
    assert_eq!(verdicts, vec![true, true]);

    // a deterministic strategy exposes the second server completely
    let scheme = Scheme1::new(2, 2, 2).unwrap();
    let verdicts =
        check_perfect_privacy(&scheme, &StrategyDistribution::bernoulli(0.0)).unwrap();
    assert_eq!(verdicts, vec![true, false]);

    // the mask server of the inner-product scheme never learns anything
    for p in [0.0, 0.2, 0.5] {
        let scheme = Scheme2::new(3, 2, 2).unwrap();
        let verdicts =
            check_perfect_privacy(&scheme, &StrategyDistribution::bernoulli(p)).unwrap();
        assert!(verdicts[0]);
    }
}

#[test]
fn retrievability_examples() {
    let scheme = Scheme1::new(2, 2, 2).unwrap();
    let report =
        verify_retrievability(&scheme, &StrategyDistribution::bernoulli(0.3), 10, 1).unwrap();
    assert_eq!(report.failures, 0);
    assert_eq!(report.checked, 10 * 2 * 2);

    let scheme = Scheme2::new(3, 2, 2).unwrap();
    let report =
        verify_retrievability(&scheme, &StrategyDistribution::bernoulli(0.5), 10, 1).unwrap();
    assert_eq!(report.failures, 0);

    // a single file decodes under any strategy
    let scheme = Scheme1::new(1, 2, 2).unwrap();
    let report =
        verify_retrievability(&scheme, &StrategyDistribution::UniformIid, 10, 1).unwrap();
    assert_eq!(report.failures, 0);
}

#[test]
fn decode_is_deterministic() {
    let scheme = Scheme1::new(3, 2, 2).unwrap();
    let params = *scheme.params();
    let db = Database::random(&params, 21);
    let strategy = vec![1, 0];
    let queries: Vec<_> = (0..2)
        .map(|l| scheme.encode(1, &strategy, l).unwrap())
        .collect();
    let answers: Vec<_> = queries.iter().map(|q| scheme.answer(q, &db)).collect();
    let first = scheme.decode(1, &strategy, &queries, &answers).unwrap();
    for _ in 0..5 {
        assert_eq!(scheme.decode(1, &strategy, &queries, &answers).unwrap(), first);
    }
}
