//! The sum-query scheme ("scheme 1").
//!
//! The user draws a shared random vector s of length M-1 and, to fetch file
//! m from server l, inserts one function-determined coordinate at position m
//! so that the coordinates of every query sum to the server index mod n.
//! Each server returns the single symbol sum selected by its query, except
//! that the all-zero query is answered with nothing. Subtracting the
//! interference answer (the server whose file coordinate is zero) from the
//! others recovers the file. Leakage, rate, upload, and access are steered
//! entirely by the distribution of s.

use crate::error::Error;
use crate::field::{add_mod, sub_mod, FieldElement};
use crate::metrics::PerformanceTuple;
use crate::prob::{binary_entropy, binomial, snap_nonneg, xlog2x};
use crate::scheme::{
    Answer, Query, Scheme, SchemeParams, StrategyDistribution, SymbolStore,
};

#[derive(Debug, Clone)]
pub struct Scheme1 {
    params: SchemeParams,
}

impl Scheme1 {
    /// An (M, n) instance over GF(q), with the scheme's fixed file size
    /// beta = n - 1.
    pub fn new(m_count: usize, n_servers: usize, q: u8) -> Result<Self, Error> {
        Ok(Self {
            params: SchemeParams::standard(m_count, n_servers, q)?,
        })
    }

    /// Rate (n-1) / (1 - P(zero query at the first server) + n - 1), valid
    /// for every server count and strategy distribution.
    pub fn general_rate(&self, dist: &StrategyDistribution) -> Result<f64, Error> {
        let space = self.strategy_space(dist)?;
        let zero_prob: f64 = space
            .iter()
            .filter(|(s, _)| s.iter().all(|&c| c == 0))
            .map(|(_, p)| *p)
            .sum();
        let n = self.params.n_servers as f64;
        Ok((n - 1.0) / (1.0 - zero_prob + n - 1.0))
    }
}

impl Scheme for Scheme1 {
    fn id(&self) -> String {
        "scheme1".into()
    }

    fn params(&self) -> &SchemeParams {
        &self.params
    }

    fn strategy_len(&self) -> usize {
        self.params.m_count - 1
    }

    fn strategy_alphabet(&self) -> u8 {
        self.params.n_servers as u8
    }

    fn encode(&self, file: usize, strategy: &[u8], server: usize) -> Result<Query, Error> {
        let n = self.params.n_servers;
        check_indices(&self.params, file, server)?;
        if strategy.len() != self.strategy_len() {
            return Err(Error::DimensionMismatch {
                name: "strategy length",
                expected: self.strategy_len(),
                found: strategy.len(),
            });
        }
        let sum: usize = strategy.iter().map(|&c| c as usize).sum();
        let own = (server + n - sum % n) % n;
        let mut payload = Vec::with_capacity(self.params.m_count);
        payload.extend_from_slice(&strategy[..file]);
        payload.push(own as u8);
        payload.extend_from_slice(&strategy[file..]);
        Ok(Query { server, payload })
    }

    fn answer(&self, query: &Query, store: &dyn SymbolStore) -> Answer {
        sum_answer(&query.payload, store)
    }

    fn answer_length(&self, query: &Query) -> usize {
        usize::from(query.payload.iter().any(|&c| c != 0))
    }

    fn access_count(&self, query: &Query) -> usize {
        query.payload.iter().filter(|&&c| c != 0).count()
    }

    fn decode(
        &self,
        file: usize,
        _strategy: &[u8],
        queries: &[Query],
        answers: &[Answer],
    ) -> Result<Vec<FieldElement>, Error> {
        decode_by_interference(&self.params, file, queries, answers)
    }
}

fn check_indices(params: &SchemeParams, file: usize, server: usize) -> Result<(), Error> {
    if file >= params.m_count {
        return Err(Error::OutOfRange {
            name: "file",
            value: file,
            reason: "file index exceeds the catalog",
        });
    }
    if server >= params.n_servers {
        return Err(Error::OutOfRange {
            name: "server",
            value: server,
            reason: "server index exceeds the replica count",
        });
    }
    Ok(())
}

/// Answer for a sum-type query: nothing for the all-zero query, otherwise
/// the single symbol sum over the coordinates, where coordinate value k > 0
/// selects symbol k of that file and 0 selects nothing.
pub(crate) fn sum_answer(payload: &[u8], store: &dyn SymbolStore) -> Answer {
    if payload.iter().all(|&c| c == 0) {
        return Answer::empty();
    }
    let q = store.modulus();
    let mut acc = 0u8;
    for (file, &coord) in payload.iter().enumerate() {
        if coord != 0 {
            acc = add_mod(acc, store.symbol(file, coord as usize - 1), q);
        }
    }
    Answer::single(acc, q)
}

/// Shared decoder for sum-type queries. The file coordinate takes each value
/// of [0, n) exactly once across the servers; the server holding 0 supplies
/// the interference sum, and subtracting it from the server holding value k
/// yields symbol k of the requested file.
pub(crate) fn decode_by_interference(
    params: &SchemeParams,
    file: usize,
    queries: &[Query],
    answers: &[Answer],
) -> Result<Vec<FieldElement>, Error> {
    let n = params.n_servers;
    if queries.len() != n || answers.len() != n {
        return Err(Error::InconsistentDecode("expected one query and answer per server"));
    }
    let mut holder: Vec<Option<usize>> = vec![None; n];
    for (server, query) in queries.iter().enumerate() {
        let coord = *query
            .payload
            .get(file)
            .ok_or(Error::InconsistentDecode("query payload too short"))? as usize;
        if coord >= n {
            return Err(Error::InconsistentDecode("file coordinate outside [0, n)"));
        }
        if holder[coord].replace(server).is_some() {
            return Err(Error::InconsistentDecode("duplicate file coordinate"));
        }
    }
    let interference_server =
        holder[0].ok_or(Error::InconsistentDecode("no interference server"))?;
    let interference = answers[interference_server]
        .symbols
        .first()
        .map_or(0, |sym| sym.value());
    let mut symbols = Vec::with_capacity(n - 1);
    for slot in holder.iter().skip(1) {
        let server = slot.ok_or(Error::InconsistentDecode("missing file coordinate"))?;
        let value = answers[server]
            .symbols
            .first()
            .ok_or(Error::InconsistentDecode("empty answer for a nonzero query"))?
            .value();
        symbols.push(FieldElement::from_parts(
            sub_mod(value, interference, params.q),
            params.q,
        ));
    }
    Ok(symbols)
}

/// Probability that a fixed query of the given Hamming weight is sent, under
/// i.i.d. Bernoulli(p) strategy entries with two servers.
pub(crate) fn query_class_probability(m_count: usize, weight: usize, p: f64) -> f64 {
    let mut total = 0.0;
    // zero-coefficient terms are dropped before any negative power of p can
    // arise (weight = 0 or weight = m edge)
    if weight < m_count {
        total += (m_count - weight) as f64
            * (1.0 - p).powi((m_count - weight - 1) as i32)
            * p.powi(weight as i32);
    }
    if weight > 0 {
        total += weight as f64
            * (1.0 - p).powi((m_count - weight) as i32)
            * p.powi((weight - 1) as i32);
    }
    total / m_count as f64
}

/// Entropy of the posterior file index given a query of the stated weight.
fn posterior_entropy(m_count: usize, weight: usize, p: f64) -> f64 {
    let class = query_class_probability(m_count, weight, p);
    let norm = m_count as f64 * class;
    let mut h = 0.0;
    if weight < m_count {
        let low = (1.0 - p).powi((m_count - weight - 1) as i32) * p.powi(weight as i32) / norm;
        h -= (m_count - weight) as f64 * xlog2x(low);
    }
    if weight > 0 {
        let high = (1.0 - p).powi((m_count - weight) as i32) * p.powi((weight - 1) as i32) / norm;
        h -= weight as f64 * xlog2x(high);
    }
    h
}

/// Closed-form performance of the two-server scheme with i.i.d. Bernoulli(p)
/// strategy entries, for p on the monotone branch [0, 1/2].
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
    let rate = 1.0 / (2.0 - (1.0 - p).powi((m - 1) as i32));
    let mut upload = 0.0;
    let mut access = 0.0;
    let mut min_posterior = f64::INFINITY;
    for w in 0..=m {
        let class = query_class_probability(m, w, p);
        upload -= binomial(m, w) * xlog2x(class);
        access += w as f64 * binomial(m, w) * class;
        // the worst-case minimum scans realizable query classes only
        if class > 0.0 {
            min_posterior = min_posterior.min(posterior_entropy(m, w, p));
        }
    }
    let leakage_mi = snap_nonneg(upload / 2.0 - (m - 1) as f64 * binary_entropy(p)?);
    let leakage_wil = snap_nonneg((m as f64).log2() - min_posterior);
    Ok(PerformanceTuple {
        rate,
        upload,
        access,
        leakage_mi,
        leakage_wil,
        download: 1.0 / rate,
    })
}
