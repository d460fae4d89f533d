//! The retrieval-scheme contract shared by every construction in the crate.
//!
//! A scheme on n replicated servers storing M files draws a private random
//! strategy, encodes one query per server, and reconstructs the requested
//! file from the answers. Perfect retrievability — decode returns file m for
//! every strategy and every database — is an invariant, not a probabilistic
//! goal; [`verify_retrievability`] checks it by exhaustion.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::field::{self, FieldElement};

/// Conditional query distributions are considered equal within this bound
/// when testing per-server privacy.
pub const PRIVACY_TOLERANCE: f64 = 1e-9;

/// Hard cap on enumerated strategy outcomes.
pub const MAX_STRATEGY_OUTCOMES: u128 = 1 << 26;

/// Shape of a scheme instance: M files of beta symbols over GF(q), stored on
/// n replicated servers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SchemeParams {
    pub m_count: usize,
    pub n_servers: usize,
    pub beta: usize,
    pub q: u8,
}

impl SchemeParams {
    pub fn new(m_count: usize, n_servers: usize, beta: usize, q: u8) -> Result<Self, Error> {
        if m_count == 0 {
            return Err(Error::OutOfRange {
                name: "m_count",
                value: 0,
                reason: "at least one file is required",
            });
        }
        if n_servers < 2 {
            return Err(Error::OutOfRange {
                name: "n_servers",
                value: n_servers,
                reason: "at least two servers are required",
            });
        }
        if beta == 0 {
            return Err(Error::OutOfRange {
                name: "beta",
                value: 0,
                reason: "files must hold at least one symbol",
            });
        }
        if !field::is_prime(q) {
            return Err(Error::NotPrime(q));
        }
        Ok(Self { m_count, n_servers, beta, q })
    }

    /// Parameters with the file size beta = n - 1 used by the built-in
    /// schemes.
    pub fn standard(m_count: usize, n_servers: usize, q: u8) -> Result<Self, Error> {
        Self::new(m_count, n_servers, n_servers.saturating_sub(1).max(1), q)
    }
}

/// Read-only access to stored symbols. Kept as a trait so tests can count
/// accesses and the partition wrapper can expose one block of a database as
/// a database of its own.
pub trait SymbolStore {
    fn file_count(&self) -> usize;
    fn symbols_per_file(&self) -> usize;
    fn modulus(&self) -> u8;
    /// Symbol `index` (0-based) of file `file` (0-based).
    fn symbol(&self, file: usize, index: usize) -> u8;
}

/// A replicated database: M files, each a column of beta symbols over GF(q).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Database {
    files: Vec<Vec<u8>>,
    q: u8,
}

impl Database {
    pub fn new(files: Vec<Vec<u8>>, q: u8) -> Result<Self, Error> {
        if !field::is_prime(q) {
            return Err(Error::NotPrime(q));
        }
        if files.is_empty() {
            return Err(Error::OutOfRange {
                name: "files",
                value: 0,
                reason: "a database holds at least one file",
            });
        }
        let beta = files[0].len();
        for file in &files {
            if file.len() != beta {
                return Err(Error::DimensionMismatch {
                    name: "file length",
                    expected: beta,
                    found: file.len(),
                });
            }
            for &v in file {
                if v >= q {
                    return Err(Error::ValueOutOfField { value: v, modulus: q });
                }
            }
        }
        Ok(Self { files, q })
    }

    /// Database with symbols drawn uniformly from GF(q) by a seeded,
    /// portable generator, so runs are reproducible across platforms.
    pub fn random(params: &SchemeParams, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let files = (0..params.m_count)
            .map(|_| (0..params.beta).map(|_| rng.gen_range(0..params.q)).collect())
            .collect();
        Self { files, q: params.q }
    }

    pub fn zero(params: &SchemeParams) -> Self {
        Self {
            files: vec![vec![0; params.beta]; params.m_count],
            q: params.q,
        }
    }

    /// Every symbol set to the same value.
    pub fn constant(params: &SchemeParams, value: u8) -> Result<Self, Error> {
        if value >= params.q {
            return Err(Error::ValueOutOfField { value, modulus: params.q });
        }
        Ok(Self {
            files: vec![vec![value; params.beta]; params.m_count],
            q: params.q,
        })
    }

    /// All-zero database with a single 1 at (file, index).
    pub fn unit(params: &SchemeParams, file: usize, index: usize) -> Result<Self, Error> {
        if file >= params.m_count || index >= params.beta {
            return Err(Error::OutOfRange {
                name: "unit position",
                value: file,
                reason: "outside the database dimensions",
            });
        }
        let mut db = Self::zero(params);
        db.files[file][index] = 1;
        Ok(db)
    }

    pub fn file(&self, m: usize) -> &[u8] {
        &self.files[m]
    }

    /// True when `symbols` equals file m.
    pub fn matches_file(&self, m: usize, symbols: &[FieldElement]) -> bool {
        symbols.len() == self.files[m].len()
            && symbols
                .iter()
                .zip(&self.files[m])
                .all(|(elem, &v)| elem.value() == v && elem.modulus() == self.q)
    }
}

impl SymbolStore for Database {
    fn file_count(&self) -> usize {
        self.files.len()
    }

    fn symbols_per_file(&self) -> usize {
        self.files[0].len()
    }

    fn modulus(&self) -> u8 {
        self.q
    }

    fn symbol(&self, file: usize, index: usize) -> u8 {
        self.files[file][index]
    }
}

/// A per-server query: the destination index plus the scheme-defined
/// payload. Payloads at different servers are accounted separately even when
/// their bytes coincide.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Query {
    pub server: usize,
    pub payload: Vec<u8>,
}

impl Query {
    /// Canonical aggregation key for distribution bookkeeping (the server
    /// index is tracked separately).
    pub fn key(&self) -> &[u8] {
        &self.payload
    }
}

/// A server's reply: zero or more field symbols, as declared by the scheme's
/// answer-length function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Answer {
    pub symbols: Vec<FieldElement>,
}

impl Answer {
    pub fn empty() -> Self {
        Self { symbols: Vec::new() }
    }

    pub fn single(value: u8, modulus: u8) -> Self {
        Self { symbols: vec![FieldElement::from_parts(value, modulus)] }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// One outcome of a scheme's randomness space, as a coordinate vector over
/// the scheme's strategy alphabet.
pub type Strategy = Vec<u8>;

/// Named families of strategy distributions.
#[derive(Debug, Clone, PartialEq)]
pub enum StrategyDistribution {
    /// Independent coordinates over {0, 1} with P(1) = p.
    Bernoulli { p: f64 },
    /// Independent coordinates uniform over the scheme's full coordinate
    /// alphabet.
    UniformIid,
    /// Uniform over binary strategy vectors of the given Hamming weight.
    Sphere { weight: usize },
    /// An explicit probability table.
    Explicit { table: Vec<(Strategy, f64)> },
}

impl StrategyDistribution {
    pub fn bernoulli(p: f64) -> Self {
        Self::Bernoulli { p }
    }

    pub fn sphere(weight: usize) -> Self {
        Self::Sphere { weight }
    }
}

fn checked_pow(base: usize, exp: usize) -> Result<u128, Error> {
    let mut out: u128 = 1;
    for _ in 0..exp {
        out = out.checked_mul(base as u128).ok_or(Error::StateBudgetExceeded {
            states: u128::MAX,
            budget: MAX_STRATEGY_OUTCOMES as u64,
        })?;
        if out > MAX_STRATEGY_OUTCOMES {
            return Err(Error::StateBudgetExceeded {
                states: out,
                budget: MAX_STRATEGY_OUTCOMES as u64,
            });
        }
    }
    Ok(out)
}

fn binomial_u128(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut out: u128 = 1;
    for i in 0..k {
        out = out * (n - i) as u128 / (i + 1) as u128;
    }
    out
}

/// Lists every positive-probability strategy of the given length and
/// coordinate alphabet under `dist`, with its exact probability.
pub fn enumerate_strategies(
    len: usize,
    alphabet: u8,
    dist: &StrategyDistribution,
) -> Result<Vec<(Strategy, f64)>, Error> {
    match dist {
        StrategyDistribution::Bernoulli { p } => {
            let p = *p;
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidProbability(p));
            }
            checked_pow(2, len)?;
            let mut out = Vec::new();
            for idx in 0u64..(1 << len) {
                let strategy: Strategy =
                    (0..len).map(|j| ((idx >> j) & 1) as u8).collect();
                let weight = strategy.iter().filter(|&&b| b == 1).count();
                let prob = p.powi(weight as i32) * (1.0 - p).powi((len - weight) as i32);
                if prob > 0.0 {
                    out.push((strategy, prob));
                }
            }
            Ok(out)
        }
        StrategyDistribution::UniformIid => {
            let total = checked_pow(alphabet as usize, len)?;
            let prob = 1.0 / total as f64;
            let mut out = Vec::with_capacity(total as usize);
            for idx in 0..total {
                let mut rest = idx;
                let strategy: Strategy = (0..len)
                    .map(|_| {
                        let digit = (rest % alphabet as u128) as u8;
                        rest /= alphabet as u128;
                        digit
                    })
                    .collect();
                out.push((strategy, prob));
            }
            Ok(out)
        }
        StrategyDistribution::Sphere { weight } => {
            if *weight > len {
                return Err(Error::OutOfRange {
                    name: "weight",
                    value: *weight,
                    reason: "sphere weight exceeds the strategy length",
                });
            }
            let count = binomial_u128(len, *weight);
            if count > MAX_STRATEGY_OUTCOMES {
                return Err(Error::StateBudgetExceeded {
                    states: count,
                    budget: MAX_STRATEGY_OUTCOMES as u64,
                });
            }
            let prob = 1.0 / count as f64;
            let mut out = Vec::with_capacity(count as usize);
            let mut positions: Vec<usize> = (0..*weight).collect();
            loop {
                let mut strategy = vec![0u8; len];
                for &pos in &positions {
                    strategy[pos] = 1;
                }
                out.push((strategy, prob));
                // next combination in lexicographic order
                let mut i = *weight;
                loop {
                    if i == 0 {
                        return Ok(out);
                    }
                    i -= 1;
                    if positions[i] < len - (*weight - i) {
                        positions[i] += 1;
                        for j in i + 1..*weight {
                            positions[j] = positions[j - 1] + 1;
                        }
                        break;
                    }
                }
            }
        }
        StrategyDistribution::Explicit { table } => {
            let mut total = 0.0;
            let mut seen = BTreeSet::new();
            for (strategy, prob) in table {
                if strategy.len() != len {
                    return Err(Error::DimensionMismatch {
                        name: "strategy length",
                        expected: len,
                        found: strategy.len(),
                    });
                }
                if strategy.iter().any(|&v| v >= alphabet) {
                    return Err(Error::ValueOutOfField {
                        value: *strategy.iter().max().unwrap(),
                        modulus: alphabet,
                    });
                }
                if !(0.0..=1.0).contains(prob) {
                    return Err(Error::InvalidProbability(*prob));
                }
                if !seen.insert(strategy.clone()) {
                    return Err(Error::DuplicateOutcome);
                }
                total += prob;
            }
            if (total - 1.0).abs() > crate::prob::MASS_TOLERANCE {
                return Err(Error::InvalidMass(total));
            }
            Ok(table
                .iter()
                .filter(|(_, p)| *p > 0.0)
                .cloned()
                .collect())
        }
    }
}

/// Uniform draw from [0, bound) through a dynamically typed generator.
pub(crate) fn uniform_index<R: Rng>(mut rng: R, bound: usize) -> usize {
    rng.gen_range(0..bound)
}

/// Draws one strategy from `dist` for Monte Carlo use.
pub fn sample_strategy<R: Rng>(
    len: usize,
    alphabet: u8,
    dist: &StrategyDistribution,
    mut rng: R,
) -> Result<Strategy, Error> {
    match dist {
        StrategyDistribution::Bernoulli { p } => {
            if !(0.0..=1.0).contains(p) {
                return Err(Error::InvalidProbability(*p));
            }
            Ok((0..len).map(|_| u8::from(rng.gen_bool(*p))).collect())
        }
        StrategyDistribution::UniformIid => {
            Ok((0..len).map(|_| rng.gen_range(0..alphabet)).collect())
        }
        StrategyDistribution::Sphere { weight } => {
            if *weight > len {
                return Err(Error::OutOfRange {
                    name: "weight",
                    value: *weight,
                    reason: "sphere weight exceeds the strategy length",
                });
            }
            let mut strategy = vec![0u8; len];
            for pos in rand::seq::index::sample(&mut rng, len, *weight) {
                strategy[pos] = 1;
            }
            Ok(strategy)
        }
        StrategyDistribution::Explicit { table } => {
            let roll: f64 = rng.gen();
            let mut acc = 0.0;
            for (strategy, prob) in table {
                acc += prob;
                if roll < acc {
                    return Ok(strategy.clone());
                }
            }
            table
                .last()
                .map(|(s, _)| s.clone())
                .ok_or(Error::InvalidMass(0.0))
        }
    }
}

/// The behavioral contract every retrieval scheme implements.
///
/// `encode`, `answer`, and `decode` are pure; scheme values are immutable
/// after construction, so instances can be shared freely across threads.
pub trait Scheme: Send + Sync {
    /// Short identifier used in reports.
    fn id(&self) -> String;

    fn params(&self) -> &SchemeParams;

    /// Number of coordinates in a strategy vector.
    fn strategy_len(&self) -> usize;

    /// Coordinates range over [0, alphabet).
    fn strategy_alphabet(&self) -> u8;

    /// Query for server `server` when file `file` is requested under
    /// strategy `strategy`.
    fn encode(&self, file: usize, strategy: &[u8], server: usize) -> Result<Query, Error>;

    /// The server-side response to a query.
    fn answer(&self, query: &Query, store: &dyn SymbolStore) -> Answer;

    /// Declared answer length (symbols) of the reply to `query`.
    fn answer_length(&self, query: &Query) -> usize;

    /// Declared number of stored symbols touched while answering `query`.
    fn access_count(&self, query: &Query) -> usize;

    /// Reconstructs the beta symbols of file `file` from all n queries and
    /// answers produced under `strategy`.
    fn decode(
        &self,
        file: usize,
        strategy: &[u8],
        queries: &[Query],
        answers: &[Answer],
    ) -> Result<Vec<FieldElement>, Error>;

    /// The positive-probability strategies under `dist`, with probabilities.
    fn strategy_space(
        &self,
        dist: &StrategyDistribution,
    ) -> Result<Vec<(Strategy, f64)>, Error> {
        enumerate_strategies(self.strategy_len(), self.strategy_alphabet(), dist)
    }

    /// Draws one strategy from `dist`, for Monte Carlo simulation.
    fn draw_strategy(
        &self,
        dist: &StrategyDistribution,
        rng: &mut dyn rand::RngCore,
    ) -> Result<Strategy, Error> {
        sample_strategy(self.strategy_len(), self.strategy_alphabet(), dist, &mut *rng)
    }

    /// Every query server `server` can receive, over the whole randomness
    /// space and all file indices.
    fn query_alphabet(&self, server: usize) -> Result<Vec<Query>, Error> {
        let space = self.strategy_space(&StrategyDistribution::UniformIid)?;
        let mut payloads = BTreeSet::new();
        for m in 0..self.params().m_count {
            for (strategy, _) in &space {
                payloads.insert(self.encode(m, strategy, server)?.payload);
            }
        }
        Ok(payloads
            .into_iter()
            .map(|payload| Query { server, payload })
            .collect())
    }
}

/// Outcome of an exhaustive retrievability sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetrievabilityReport {
    pub checked: u64,
    pub failures: u64,
}

/// Runs decode over every (file, strategy) pair with positive probability
/// against `db_samples` seeded random databases and counts mismatches.
pub fn verify_retrievability(
    scheme: &dyn Scheme,
    dist: &StrategyDistribution,
    db_samples: usize,
    rng_seed: u64,
) -> Result<RetrievabilityReport, Error> {
    let params = *scheme.params();
    let space = scheme.strategy_space(dist)?;
    let mut checked = 0;
    let mut failures = 0;
    for sample in 0..db_samples {
        let db = Database::random(&params, rng_seed.wrapping_add(sample as u64));
        for m in 0..params.m_count {
            for (strategy, _) in &space {
                let queries: Vec<Query> = (0..params.n_servers)
                    .map(|l| scheme.encode(m, strategy, l))
                    .collect::<Result<_, _>>()?;
                let answers: Vec<Answer> =
                    queries.iter().map(|q| scheme.answer(q, &db)).collect();
                let decoded = scheme.decode(m, strategy, &queries, &answers)?;
                checked += 1;
                if !db.matches_file(m, &decoded) {
                    failures += 1;
                }
            }
        }
    }
    Ok(RetrievabilityReport { checked, failures })
}

/// Per-server privacy test: server l is marked private iff its conditional
/// query distribution is the same for every requested file (within
/// [`PRIVACY_TOLERANCE`]).
pub fn check_perfect_privacy(
    scheme: &dyn Scheme,
    dist: &StrategyDistribution,
) -> Result<Vec<bool>, Error> {
    let params = *scheme.params();
    let space = scheme.strategy_space(dist)?;
    let mut verdicts = Vec::with_capacity(params.n_servers);
    for server in 0..params.n_servers {
        let mut conditionals: BTreeMap<Vec<u8>, Vec<f64>> = BTreeMap::new();
        for m in 0..params.m_count {
            for (strategy, prob) in &space {
                let query = scheme.encode(m, strategy, server)?;
                conditionals
                    .entry(query.payload)
                    .or_insert_with(|| vec![0.0; params.m_count])[m] += prob;
            }
        }
        let private = conditionals.values().all(|per_m| {
            let max = per_m.iter().cloned().fold(f64::MIN, f64::max);
            let min = per_m.iter().cloned().fold(f64::MAX, f64::min);
            max - min <= PRIVACY_TOLERANCE
        });
        verdicts.push(private);
    }
    Ok(verdicts)
}
