//! The masked inner-product scheme ("scheme 2").
//!
//! The strategy is a random mask S over GF(q)^(beta*M). Server l receives
//! Q_l = S + v_l, where v_1 = 0 and v_l for l >= 2 is a unit vector pinned
//! to the requested file, and replies with the inner product of its query
//! with the flattened database. Answer lengths are constant, so the rate is
//! 1 - 1/n no matter how much the mask leaks; the first server sees the bare
//! mask and learns nothing.

use crate::error::Error;
use crate::field::{add_mod, mul_mod, sub_mod, FieldElement};
use crate::metrics::PerformanceTuple;
use crate::prob::{binary_entropy, binomial, snap_nonneg, xlog2x};
use crate::scheme::{Answer, Query, Scheme, SchemeParams, SymbolStore};

#[derive(Debug, Clone)]
pub struct Scheme2 {
    params: SchemeParams,
}

impl Scheme2 {
    /// An (M, n) instance over GF(q) with file size beta = n - 1.
    pub fn new(m_count: usize, n_servers: usize, q: u8) -> Result<Self, Error> {
        Ok(Self {
            params: SchemeParams::standard(m_count, n_servers, q)?,
        })
    }

    /// The deterministic query offset for server `server` when `file` is
    /// requested: zero at the first server, otherwise a unit vector at
    /// coordinate file*beta + server - 1.
    pub fn design_vector(&self, file: usize, server: usize) -> Vec<u8> {
        let mut v = vec![0u8; self.params.beta * self.params.m_count];
        if server > 0 {
            v[file * self.params.beta + server - 1] = 1;
        }
        v
    }
}

impl Scheme for Scheme2 {
    fn id(&self) -> String {
        "scheme2".into()
    }

    fn params(&self) -> &SchemeParams {
        &self.params
    }

    fn strategy_len(&self) -> usize {
        self.params.beta * self.params.m_count
    }

    fn strategy_alphabet(&self) -> u8 {
        self.params.q
    }

    fn encode(&self, file: usize, strategy: &[u8], server: usize) -> Result<Query, Error> {
        if file >= self.params.m_count {
            return Err(Error::OutOfRange {
                name: "file",
                value: file,
                reason: "file index exceeds the catalog",
            });
        }
        if server >= self.params.n_servers {
            return Err(Error::OutOfRange {
                name: "server",
                value: server,
                reason: "server index exceeds the replica count",
            });
        }
        if strategy.len() != self.strategy_len() {
            return Err(Error::DimensionMismatch {
                name: "strategy length",
                expected: self.strategy_len(),
                found: strategy.len(),
            });
        }
        let q = self.params.q;
        let mut payload = strategy.to_vec();
        if server > 0 {
            let pin = file * self.params.beta + server - 1;
            payload[pin] = add_mod(payload[pin], 1, q);
        }
        Ok(Query { server, payload })
    }

    fn answer(&self, query: &Query, store: &dyn SymbolStore) -> Answer {
        let q = store.modulus();
        let beta = store.symbols_per_file();
        let mut acc = 0u8;
        for (idx, &coeff) in query.payload.iter().enumerate() {
            if coeff != 0 {
                let symbol = store.symbol(idx / beta, idx % beta);
                acc = add_mod(acc, mul_mod(coeff, symbol, q), q);
            }
        }
        Answer::single(acc, q)
    }

    fn answer_length(&self, _query: &Query) -> usize {
        1
    }

    fn access_count(&self, query: &Query) -> usize {
        query.payload.iter().filter(|&&c| c != 0).count()
    }

    fn decode(
        &self,
        _file: usize,
        _strategy: &[u8],
        _queries: &[Query],
        answers: &[Answer],
    ) -> Result<Vec<FieldElement>, Error> {
        let n = self.params.n_servers;
        if answers.len() != n {
            return Err(Error::InconsistentDecode("expected one answer per server"));
        }
        let mask = symbol_of(&answers[0])?;
        let q = self.params.q;
        (1..n)
            .map(|l| {
                Ok(FieldElement::from_parts(
                    sub_mod(symbol_of(&answers[l])?, mask, q),
                    q,
                ))
            })
            .collect()
    }
}

fn symbol_of(answer: &Answer) -> Result<u8, Error> {
    answer
        .symbols
        .first()
        .map(|s| s.value())
        .ok_or(Error::InconsistentDecode("missing answer symbol"))
}

/// Probability that the revealing server receives a fixed query of the given
/// Hamming weight, under i.i.d. Bernoulli(p) mask bits with two servers over
/// the binary field.
pub(crate) fn masked_class_probability(m_count: usize, weight: usize, p: f64) -> f64 {
    let mut total = 0.0;
    if weight < m_count {
        total += (m_count - weight) as f64
            * (1.0 - p).powi((m_count - weight - 1) as i32)
            * p.powi((weight + 1) as i32);
    }
    if weight > 0 {
        total += weight as f64
            * (1.0 - p).powi((m_count - weight + 1) as i32)
            * p.powi((weight - 1) as i32);
    }
    total / m_count as f64
}

/// Probability of a fixed mask value of the given weight.
fn mask_point_probability(m_count: usize, weight: usize, p: f64) -> f64 {
    (1.0 - p).powi((m_count - weight) as i32) * p.powi(weight as i32)
}

fn posterior_entropy(m_count: usize, weight: usize, p: f64) -> f64 {
    let class = masked_class_probability(m_count, weight, p);
    let norm = m_count as f64 * class;
    let mut h = 0.0;
    if weight < m_count {
        let low =
            (1.0 - p).powi((m_count - weight - 1) as i32) * p.powi((weight + 1) as i32) / norm;
        h -= (m_count - weight) as f64 * xlog2x(low);
    }
    if weight > 0 {
        let high =
            (1.0 - p).powi((m_count - weight + 1) as i32) * p.powi((weight - 1) as i32) / norm;
        h -= weight as f64 * xlog2x(high);
    }
    h
}

/// Closed-form performance with two servers over the binary field and
/// i.i.d. Bernoulli(p) mask bits, p on the monotone branch [0, 1/2].
pub fn bernoulli_tuple(m_count: usize, p: f64) -> Result<PerformanceTuple, Error> {
    if m_count == 0 {
        return Err(Error::OutOfRange {
            name: "m_count",
            value: 0,
            reason: "at least one file is required",
        });
    }
    if !(0.0..=0.5).contains(&p) {
        return Err(Error::ParameterRange { name: "p", value: p, lo: 0.0, hi: 0.5 });
    }
    let m = m_count;
    let mask_entropy = m as f64 * binary_entropy(p)?;
    let mut revealing_entropy = 0.0;
    let mut access = 0.0;
    let mut min_posterior = f64::INFINITY;
    for w in 0..=m {
        let class = masked_class_probability(m, w, p);
        revealing_entropy -= binomial(m, w) * xlog2x(class);
        access += w as f64 * binomial(m, w) * (class + mask_point_probability(m, w, p));
        if class > 0.0 {
            min_posterior = min_posterior.min(posterior_entropy(m, w, p));
        }
    }
    let upload = revealing_entropy + mask_entropy;
    Ok(PerformanceTuple {
        rate: 0.5,
        upload,
        access,
        leakage_mi: snap_nonneg(upload / 2.0 - mask_entropy),
        leakage_wil: snap_nonneg((m as f64).log2() - min_posterior),
        download: 2.0,
    })
}

/// Entropy of the revealing server's query when the mask is uniform over
/// weight-w binary vectors.
fn sphere_masked_entropy(m_count: usize, weight: usize) -> f64 {
    let m = m_count as f64;
    let w = weight as f64;
    binomial(m_count, weight).log2() + m.log2()
        - (m - w) / m * (w + 1.0).log2()
        - w / m * (m - w + 1.0).log2()
}

/// Closed-form performance with two servers and a mask uniform over binary
/// vectors of Hamming weight w.
pub fn sphere_tuple(m_count: usize, weight: usize) -> Result<PerformanceTuple, Error> {
    if m_count == 0 {
        return Err(Error::OutOfRange {
            name: "m_count",
            value: 0,
            reason: "at least one file is required",
        });
    }
    if weight > m_count {
        return Err(Error::OutOfRange {
            name: "weight",
            value: weight,
            reason: "sphere weight exceeds the file count",
        });
    }
    let m = m_count as f64;
    let w = weight as f64;
    let mask_entropy = binomial(m_count, weight).log2();
    let masked_entropy = sphere_masked_entropy(m_count, weight);
    let posterior = (w + 1.0).log2().min((m - w + 1.0).log2());
    Ok(PerformanceTuple {
        rate: 0.5,
        upload: mask_entropy + masked_entropy,
        access: 1.0 + 2.0 * w * (1.0 - 1.0 / m),
        leakage_mi: snap_nonneg((masked_entropy - mask_entropy) / 2.0),
        leakage_wil: snap_nonneg(m.log2() - posterior),
        download: 2.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::evaluate;
    use crate::scheme::{Database, StrategyDistribution};
    use proptest::prelude::*;

    const TOL: f64 = 1e-12;

    #[test]
    fn design_vector_examples() {
        let s = Scheme2::new(3, 2, 2).unwrap();
        assert_eq!(s.design_vector(1, 0), vec![0, 0, 0]);
        assert_eq!(s.design_vector(1, 1), vec![0, 1, 0]);

        let s = Scheme2::new(2, 3, 2).unwrap();
        assert_eq!(s.design_vector(1, 2), vec![0, 0, 0, 1]);
    }

    #[test]
    fn encode_examples() {
        let s = Scheme2::new(3, 2, 2).unwrap();
        assert_eq!(s.encode(2, &[0, 0, 0], 0).unwrap().payload, vec![0, 0, 0]);
        assert_eq!(s.encode(0, &[0, 0, 0], 1).unwrap().payload, vec![1, 0, 0]);
        assert_eq!(s.encode(2, &[1, 1, 0], 1).unwrap().payload, vec![1, 1, 1]);
        assert!(s.encode(0, &[0, 0], 1).is_err());
    }

    #[test]
    fn answer_is_always_one_symbol() {
        let s = Scheme2::new(3, 2, 2).unwrap();
        let db = Database::new(vec![vec![1], vec![0], vec![1]], 2).unwrap();
        let zero = Query { server: 0, payload: vec![0, 0, 0] };
        let a = s.answer(&zero, &db);
        assert_eq!(a.len(), 1);
        assert_eq!(a.symbols[0].value(), 0);
        assert_eq!(s.answer_length(&zero), 1);

        // a unit query reads exactly its stored symbol
        let unit = Query { server: 1, payload: vec![0, 0, 1] };
        assert_eq!(s.answer(&unit, &db).symbols[0].value(), 1);
        assert_eq!(s.access_count(&unit), 1);
        assert_eq!(s.access_count(&Query { server: 0, payload: vec![1, 1, 0] }), 2);
    }

    #[test]
    fn inner_product_respects_field() {
        // over GF(3), coefficient 2 doubles the symbol
        let s = Scheme2::new(2, 2, 3).unwrap();
        let db = Database::new(vec![vec![2], vec![1]], 3).unwrap();
        let q = Query { server: 0, payload: vec![2, 1] };
        assert_eq!(s.answer(&q, &db).symbols[0].value(), (2 * 2 + 1) % 3);
    }

    fn roundtrip(s: &Scheme2, db: &Database, file: usize, strategy: &[u8]) -> Vec<u8> {
        let queries: Vec<Query> = (0..s.params().n_servers)
            .map(|l| s.encode(file, strategy, l).unwrap())
            .collect();
        let answers: Vec<Answer> = queries.iter().map(|q| s.answer(q, db)).collect();
        s.decode(file, strategy, &queries, &answers)
            .unwrap()
            .iter()
            .map(|e| e.value())
            .collect()
    }

    #[test]
    fn decode_cancels_the_mask() {
        let s = Scheme2::new(3, 2, 2).unwrap();
        let params = *s.params();
        let space = s.strategy_space(&StrategyDistribution::UniformIid).unwrap();
        for seed in 0..6 {
            let db = Database::random(&params, seed);
            for file in 0..3 {
                for (strategy, _) in &space {
                    assert_eq!(roundtrip(&s, &db, file, strategy), db.file(file));
                }
            }
        }
    }

    #[test]
    fn decode_exhaustive_over_gf3_three_servers() {
        let s = Scheme2::new(2, 3, 3).unwrap();
        let params = *s.params();
        let space = s.strategy_space(&StrategyDistribution::UniformIid).unwrap();
        assert_eq!(space.len(), 81);
        for seed in 0..4 {
            let db = Database::random(&params, seed);
            for file in 0..2 {
                for (strategy, _) in &space {
                    assert_eq!(roundtrip(&s, &db, file, strategy), db.file(file));
                }
            }
        }
    }

    #[test]
    fn zero_strategy_reads_directly() {
        let s = Scheme2::new(4, 3, 2).unwrap();
        let db = Database::random(s.params(), 3);
        for file in 0..4 {
            assert_eq!(roundtrip(&s, &db, file, &[0; 8]), db.file(file));
        }
    }

    #[test]
    fn bernoulli_tuple_endpoints() {
        for m in 2..=6 {
            let t = bernoulli_tuple(m, 0.5).unwrap();
            assert!((t.rate - 0.5).abs() < TOL);
            assert!((t.upload - 2.0 * m as f64).abs() < TOL);
            assert!((t.access - m as f64).abs() < TOL);
            assert_eq!(t.leakage_mi, 0.0);
            assert_eq!(t.leakage_wil, 0.0);

            // a deterministic mask pins the revealing query to the unit
            // vector of the requested file
            let t = bernoulli_tuple(m, 0.0).unwrap();
            assert!((t.leakage_wil - (m as f64).log2()).abs() < TOL);
        }
        assert!(bernoulli_tuple(3, 0.7).is_err());
    }

    #[test]
    fn bernoulli_tuple_matches_enumeration() {
        let t = bernoulli_tuple(4, 0.3).unwrap();
        let s = Scheme2::new(4, 2, 2).unwrap();
        let e = evaluate(&s, &StrategyDistribution::bernoulli(0.3)).unwrap();
        for (a, b) in [
            (t.rate, e.rate),
            (t.upload, e.upload),
            (t.access, e.access),
            (t.leakage_mi, e.leakage_mi),
            (t.leakage_wil, e.leakage_wil),
        ] {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn sphere_tuple_examples() {
        let m = 4;
        let t = sphere_tuple(m, 0).unwrap();
        assert!((t.upload - (m as f64).log2()).abs() < TOL);
        assert!((t.leakage_mi - (m as f64).log2() / 2.0).abs() < TOL);
        assert!((t.leakage_wil - (m as f64).log2()).abs() < TOL);
        assert!((t.access - 1.0).abs() < TOL);

        assert!((sphere_tuple(4, 2).unwrap().access - 4.0).abs() < TOL);
        assert!(sphere_tuple(4, 5).is_err());
    }

    #[test]
    fn sphere_worst_case_leakage_is_symmetric() {
        for m in 2..=8 {
            for w in 0..=m {
                let a = sphere_tuple(m, w).unwrap().leakage_wil;
                let b = sphere_tuple(m, m - w).unwrap().leakage_wil;
                assert!((a - b).abs() < TOL);
            }
        }
    }

    proptest! {
        #[test]
        fn retrievability_over_random_masks(
            m in 1usize..5,
            n in 2usize..4,
            q_pick in 0usize..2,
            seed in 0u64..128,
        ) {
            let q = [2u8, 3][q_pick];
            let s = Scheme2::new(m, n, q).unwrap();
            let params = *s.params();
            let db = Database::random(&params, seed);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
            use rand::SeedableRng;
            for file in 0..m {
                let strategy = crate::scheme::sample_strategy(
                    s.strategy_len(),
                    s.strategy_alphabet(),
                    &StrategyDistribution::UniformIid,
                    &mut rng,
                ).unwrap();
                prop_assert_eq!(roundtrip(&s, &db, file, &strategy), db.file(file));
            }
        }
    }
}
