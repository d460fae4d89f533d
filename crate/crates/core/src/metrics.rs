//! The exact evaluation engine.
//!
//! For any scheme and strategy distribution with a finite strategy space,
//! [`build_statistics`] materializes the per-server conditional query
//! distributions P(Q_l | M = m) by summing strategy probabilities into
//! canonical payload buckets. Every cost and leakage figure is then an exact
//! expectation over those distributions — no sampling, no approximation
//! beyond f64 arithmetic.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::Error;
use crate::field::FieldElement;
use crate::prob::{entropy_of, snap_nonneg, JointPmf};
use crate::scheme::{
    Answer, Query, Scheme, SchemeParams, Strategy, StrategyDistribution, SymbolStore,
};

/// Default cap on enumerated (strategy, file, server) states.
pub const DEFAULT_STATE_BUDGET: u64 = 1 << 26;

/// The rate/upload/access/leakage figures of one scheme configuration.
/// Leakage is carried under both metrics: the per-server average mutual
/// information and the worst-case posterior drop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerformanceTuple {
    pub rate: f64,
    pub upload: f64,
    pub access: f64,
    pub leakage_mi: f64,
    pub leakage_wil: f64,
    pub download: f64,
}

impl PerformanceTuple {
    /// Absolute field-by-field distance, for cross-checking two evaluation
    /// routes.
    pub fn max_abs_difference(&self, other: &Self) -> f64 {
        [
            (self.rate - other.rate).abs(),
            (self.upload - other.upload).abs(),
            (self.access - other.access).abs(),
            (self.leakage_mi - other.leakage_mi).abs(),
            (self.leakage_wil - other.leakage_wil).abs(),
            (self.download - other.download).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// One realizable query at one server, with its conditional probabilities.
#[derive(Debug, Clone)]
pub struct QueryEntry {
    pub payload: Vec<u8>,
    /// P(Q = payload | M = m) for each file index m.
    pub conditional: Vec<f64>,
    pub answer_len: usize,
    pub access: usize,
}

impl QueryEntry {
    /// P(Q = payload) under the uniform file prior.
    pub fn marginal(&self) -> f64 {
        self.conditional.iter().sum::<f64>() / self.conditional.len() as f64
    }
}

/// All realizable queries of a single server, in canonical payload order.
#[derive(Debug, Clone)]
pub struct ServerStatistics {
    pub entries: Vec<QueryEntry>,
}

impl ServerStatistics {
    pub fn marginal_pmf(&self) -> Vec<f64> {
        self.entries.iter().map(QueryEntry::marginal).collect()
    }

    pub fn entropy(&self) -> f64 {
        entropy_of(self.marginal_pmf())
    }

    pub fn expected_answer_length(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.marginal() * e.answer_len as f64)
            .sum()
    }

    pub fn expected_access(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.marginal() * e.access as f64)
            .sum()
    }

    fn m_count(&self) -> usize {
        self.entries.first().map_or(0, |e| e.conditional.len())
    }

    /// I(M; Q) in bits: marginal entropy minus the average conditional
    /// entropy under the uniform file prior.
    pub fn mutual_information(&self) -> f64 {
        let m = self.m_count();
        let conditional_part: f64 = (0..m)
            .map(|file| entropy_of(self.entries.iter().map(|e| e.conditional[file])))
            .sum::<f64>()
            / m as f64;
        snap_nonneg(self.entropy() - conditional_part)
    }

    /// Worst-case leakage in bits: H(M) minus the smallest posterior file
    /// entropy over queries with positive probability.
    pub fn worst_case_leakage(&self) -> f64 {
        let m = self.m_count();
        let min_posterior = self
            .entries
            .iter()
            .filter(|e| e.marginal() > 0.0)
            .map(|e| {
                let marginal = e.marginal();
                entropy_of(
                    e.conditional
                        .iter()
                        .map(|&c| c / m as f64 / marginal),
                )
            })
            .fold(f64::INFINITY, f64::min);
        snap_nonneg((m as f64).log2() - min_posterior)
    }

    /// The joint distribution of (file index, query) at this server.
    pub fn joint(&self) -> Result<JointPmf, Error> {
        let m = self.m_count();
        let rows = (0..m)
            .map(|file| self.entries.iter().map(|e| e.conditional[file]).collect())
            .collect();
        JointPmf::from_conditionals(rows)
    }
}

/// Exact per-server query statistics for one (scheme, distribution) pair.
#[derive(Debug, Clone)]
pub struct QueryStatistics {
    pub m_count: usize,
    pub n_servers: usize,
    pub beta: usize,
    pub servers: Vec<ServerStatistics>,
}

impl QueryStatistics {
    /// Expected downloaded symbols per retrieval, summed over servers.
    pub fn download_cost(&self) -> f64 {
        self.servers
            .iter()
            .map(ServerStatistics::expected_answer_length)
            .sum()
    }

    /// Retrieval rate: file size over expected download.
    pub fn rate(&self) -> f64 {
        self.beta as f64 / self.download_cost()
    }

    /// Upload cost: the sum over servers of query entropies, in bits.
    pub fn upload_cost(&self) -> f64 {
        self.servers.iter().map(ServerStatistics::entropy).sum()
    }

    /// Expected stored symbols touched per retrieval, summed over servers.
    pub fn access_complexity(&self) -> f64 {
        self.servers
            .iter()
            .map(ServerStatistics::expected_access)
            .sum()
    }

    pub fn per_server_mi(&self) -> Vec<f64> {
        self.servers
            .iter()
            .map(ServerStatistics::mutual_information)
            .collect()
    }

    /// Average per-server mutual information, in bits.
    pub fn leakage_mi(&self) -> f64 {
        self.per_server_mi().iter().sum::<f64>() / self.n_servers as f64
    }

    pub fn per_server_wil(&self) -> Vec<f64> {
        self.servers
            .iter()
            .map(ServerStatistics::worst_case_leakage)
            .collect()
    }

    /// Worst-case information leakage: the maximum over servers.
    pub fn leakage_wil(&self) -> f64 {
        self.per_server_wil().into_iter().fold(0.0, f64::max)
    }

    pub fn tuple(&self) -> PerformanceTuple {
        PerformanceTuple {
            rate: self.rate(),
            upload: self.upload_cost(),
            access: self.access_complexity(),
            leakage_mi: self.leakage_mi(),
            leakage_wil: self.leakage_wil(),
            download: self.download_cost(),
        }
    }
}

/// Builds exact query statistics, rejecting requests whose
/// |strategies| x files x servers state count exceeds `budget`.
pub fn build_statistics_with_budget(
    scheme: &dyn Scheme,
    dist: &StrategyDistribution,
    budget: u64,
) -> Result<QueryStatistics, Error> {
    let params = *scheme.params();
    let space = scheme.strategy_space(dist)?;
    let states =
        space.len() as u128 * params.m_count as u128 * params.n_servers as u128;
    if states > budget as u128 {
        return Err(Error::StateBudgetExceeded { states, budget });
    }

    let mut servers = Vec::with_capacity(params.n_servers);
    for server in 0..params.n_servers {
        let mut buckets: BTreeMap<Vec<u8>, QueryEntry> = BTreeMap::new();
        for file in 0..params.m_count {
            for (strategy, prob) in &space {
                let query = scheme.encode(file, strategy, server)?;
                let entry = buckets.entry(query.payload.clone()).or_insert_with(|| {
                    QueryEntry {
                        answer_len: scheme.answer_length(&query),
                        access: scheme.access_count(&query),
                        payload: query.payload,
                        conditional: vec![0.0; params.m_count],
                    }
                });
                entry.conditional[file] += prob;
            }
        }
        servers.push(ServerStatistics {
            entries: buckets.into_values().collect(),
        });
    }
    Ok(QueryStatistics {
        m_count: params.m_count,
        n_servers: params.n_servers,
        beta: params.beta,
        servers,
    })
}

pub fn build_statistics(
    scheme: &dyn Scheme,
    dist: &StrategyDistribution,
) -> Result<QueryStatistics, Error> {
    build_statistics_with_budget(scheme, dist, DEFAULT_STATE_BUDGET)
}

/// Exact performance tuple of a scheme under a strategy distribution.
pub fn evaluate(
    scheme: &dyn Scheme,
    dist: &StrategyDistribution,
) -> Result<PerformanceTuple, Error> {
    Ok(build_statistics(scheme, dist)?.tuple())
}

/// A scheme symmetrized by a uniform cyclic server shift.
///
/// The strategy gains one trailing coordinate r, uniform over [0, n); server
/// l then receives the base query of server (l + r) mod n, tagged with r so
/// distinct rotations stay distinguishable, and decoding routes answers back
/// through the inverse shift. Rate, access, and retrievability are those of
/// the base scheme, while every server's mutual-information leakage becomes
/// the base scheme's per-server average.
pub struct TimeShared {
    base: Box<dyn Scheme>,
    params: SchemeParams,
}

/// Wraps `base` in the uniform cyclic-shift construction.
pub fn time_share(base: Box<dyn Scheme>) -> TimeShared {
    let params = *base.params();
    TimeShared { base, params }
}

impl TimeShared {
    fn split<'a>(&self, strategy: &'a [u8]) -> Result<(&'a [u8], usize), Error> {
        let (&shift, base) = strategy.split_last().ok_or(Error::DimensionMismatch {
            name: "strategy length",
            expected: self.base.strategy_len() + 1,
            found: 0,
        })?;
        if (shift as usize) >= self.params.n_servers {
            return Err(Error::OutOfRange {
                name: "shift",
                value: shift as usize,
                reason: "cyclic shift exceeds the server count",
            });
        }
        Ok((base, shift as usize))
    }

    fn split_query(&self, query: &Query) -> (Query, usize) {
        let mut payload = query.payload.clone();
        let shift = payload.pop().expect("time-shared payload carries a shift tag") as usize;
        let base_server = (query.server + shift) % self.params.n_servers;
        (Query { server: base_server, payload }, shift)
    }
}

impl Scheme for TimeShared {
    fn id(&self) -> String {
        format!("timeshare({})", self.base.id())
    }

    fn params(&self) -> &SchemeParams {
        &self.params
    }

    fn strategy_len(&self) -> usize {
        self.base.strategy_len() + 1
    }

    fn strategy_alphabet(&self) -> u8 {
        self.base.strategy_alphabet()
    }

    fn encode(&self, file: usize, strategy: &[u8], server: usize) -> Result<Query, Error> {
        let (base_strategy, shift) = self.split(strategy)?;
        let source = (server + shift) % self.params.n_servers;
        let base_query = self.base.encode(file, base_strategy, source)?;
        let mut payload = base_query.payload;
        payload.push(shift as u8);
        Ok(Query { server, payload })
    }

    fn answer(&self, query: &Query, store: &dyn SymbolStore) -> Answer {
        let (base_query, _) = self.split_query(query);
        self.base.answer(&base_query, store)
    }

    fn answer_length(&self, query: &Query) -> usize {
        let (base_query, _) = self.split_query(query);
        self.base.answer_length(&base_query)
    }

    fn access_count(&self, query: &Query) -> usize {
        let (base_query, _) = self.split_query(query);
        self.base.access_count(&base_query)
    }

    fn decode(
        &self,
        file: usize,
        strategy: &[u8],
        queries: &[Query],
        answers: &[Answer],
    ) -> Result<Vec<FieldElement>, Error> {
        let n = self.params.n_servers;
        if queries.len() != n || answers.len() != n {
            return Err(Error::InconsistentDecode("expected one query and answer per server"));
        }
        let (base_strategy, shift) = self.split(strategy)?;
        let mut base_queries = Vec::with_capacity(n);
        let mut base_answers = Vec::with_capacity(n);
        for source in 0..n {
            // the wrapper server that received base server `source`'s query
            let holder = (source + n - shift) % n;
            let (base_query, tag) = self.split_query(&queries[holder]);
            if tag != shift || base_query.server != source {
                return Err(Error::InconsistentDecode("shift tag does not match the strategy"));
            }
            base_queries.push(base_query);
            base_answers.push(answers[holder].clone());
        }
        self.base.decode(file, base_strategy, &base_queries, &base_answers)
    }

    fn strategy_space(
        &self,
        dist: &StrategyDistribution,
    ) -> Result<Vec<(Strategy, f64)>, Error> {
        let n = self.params.n_servers;
        let base_space = self.base.strategy_space(dist)?;
        let mut out = Vec::with_capacity(base_space.len() * n);
        for (strategy, prob) in base_space {
            for shift in 0..n {
                let mut extended = strategy.clone();
                extended.push(shift as u8);
                out.push((extended, prob / n as f64));
            }
        }
        Ok(out)
    }

    fn draw_strategy(
        &self,
        dist: &StrategyDistribution,
        rng: &mut dyn rand::RngCore,
    ) -> Result<Strategy, Error> {
        let mut strategy = self.base.draw_strategy(dist, &mut *rng)?;
        strategy.push(crate::scheme::uniform_index(&mut *rng, self.params.n_servers) as u8);
        Ok(strategy)
    }
}
