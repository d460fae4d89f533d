//! Partition-based constructions.
//!
//! Splitting the catalog into eta equal blocks and running a subscheme
//! inside the requested block deliberately reveals the block index. The
//! basic wrapper appends the block label to every subscheme query, paying
//! n·log2(eta) extra upload and log2(eta) extra leakage under either metric.
//! The specialized sum-query variant instead zero-pads the subscheme query
//! to the full catalog length: the all-zero query then serves every block at
//! once, which trims both the upload and the mutual-information leakage
//! below the basic wrapper's.

use crate::error::Error;
use crate::field::FieldElement;
use crate::metrics::PerformanceTuple;
use crate::prob::pir_capacity;
use crate::scheme::{Answer, Query, Scheme, SchemeParams, SymbolStore};
use crate::scheme1::{decode_by_interference, sum_answer};

/// The generic wrapper: any (M/eta, n) subscheme retrieves inside the block,
/// and queries carry the block label as a trailing payload byte.
pub struct BasicPartition {
    params: SchemeParams,
    eta: usize,
    block_files: usize,
    sub: Box<dyn Scheme>,
}

impl BasicPartition {
    pub fn new(sub: Box<dyn Scheme>, eta: usize) -> Result<Self, Error> {
        if eta == 0 || eta > u8::MAX as usize {
            return Err(Error::OutOfRange {
                name: "eta",
                value: eta,
                reason: "partition count must fit one label byte and be positive",
            });
        }
        let sub_params = *sub.params();
        let params = SchemeParams {
            m_count: sub_params.m_count * eta,
            ..sub_params
        };
        Ok(Self {
            params,
            eta,
            block_files: sub_params.m_count,
            sub,
        })
    }

    pub fn eta(&self) -> usize {
        self.eta
    }

    /// Splits a wrapper query into the subscheme query and the block label.
    pub fn split(&self, query: &Query) -> Result<(Query, usize), Error> {
        let mut payload = query.payload.clone();
        let label = payload.pop().ok_or(Error::InconsistentDecode("missing block label"))? as usize;
        if label >= self.eta {
            return Err(Error::InconsistentDecode("block label out of range"));
        }
        Ok((Query { server: query.server, payload }, label))
    }
}

/// Exposes one block of a store as a database in its own right.
struct BlockStore<'a> {
    inner: &'a dyn SymbolStore,
    first_file: usize,
    files: usize,
}

impl SymbolStore for BlockStore<'_> {
    fn file_count(&self) -> usize {
        self.files
    }

    fn symbols_per_file(&self) -> usize {
        self.inner.symbols_per_file()
    }

    fn modulus(&self) -> u8 {
        self.inner.modulus()
    }

    fn symbol(&self, file: usize, index: usize) -> u8 {
        self.inner.symbol(self.first_file + file, index)
    }
}

impl Scheme for BasicPartition {
    fn id(&self) -> String {
        format!("basic-partition[{},eta={}]", self.sub.id(), self.eta)
    }

    fn params(&self) -> &SchemeParams {
        &self.params
    }

    fn strategy_len(&self) -> usize {
        self.sub.strategy_len()
    }

    fn strategy_alphabet(&self) -> u8 {
        self.sub.strategy_alphabet()
    }

    fn encode(&self, file: usize, strategy: &[u8], server: usize) -> Result<Query, Error> {
        if file >= self.params.m_count {
            return Err(Error::OutOfRange {
                name: "file",
                value: file,
                reason: "file index exceeds the catalog",
            });
        }
        let block = file / self.block_files;
        let local = file % self.block_files;
        let sub_query = self.sub.encode(local, strategy, server)?;
        let mut payload = sub_query.payload;
        payload.push(block as u8);
        Ok(Query { server, payload })
    }

    fn answer(&self, query: &Query, store: &dyn SymbolStore) -> Answer {
        let (sub_query, block) = self.split(query).expect("well-formed partition query");
        let view = BlockStore {
            inner: store,
            first_file: block * self.block_files,
            files: self.block_files,
        };
        self.sub.answer(&sub_query, &view)
    }

    fn answer_length(&self, query: &Query) -> usize {
        let (sub_query, _) = self.split(query).expect("well-formed partition query");
        self.sub.answer_length(&sub_query)
    }

    fn access_count(&self, query: &Query) -> usize {
        let (sub_query, _) = self.split(query).expect("well-formed partition query");
        self.sub.access_count(&sub_query)
    }

    fn decode(
        &self,
        file: usize,
        strategy: &[u8],
        queries: &[Query],
        answers: &[Answer],
    ) -> Result<Vec<FieldElement>, Error> {
        let block = file / self.block_files;
        let local = file % self.block_files;
        let sub_queries: Vec<Query> = queries
            .iter()
            .map(|query| {
                let (sub_query, label) = self.split(query)?;
                if label != block {
                    return Err(Error::InconsistentDecode("label does not match the requested file"));
                }
                Ok(sub_query)
            })
            .collect::<Result<_, _>>()?;
        self.sub.decode(local, strategy, &sub_queries, answers)
    }
}

/// The specialized partition construction over the sum-query scheme: the
/// subscheme query occupies the requested file's block and every other
/// coordinate is zero.
#[derive(Debug, Clone)]
pub struct PartitionScheme1 {
    params: SchemeParams,
    eta: usize,
    block_files: usize,
}

impl PartitionScheme1 {
    pub fn new(m_count: usize, eta: usize, n_servers: usize, q: u8) -> Result<Self, Error> {
        let params = SchemeParams::standard(m_count, n_servers, q)?;
        if eta == 0 || eta > m_count || !m_count.is_multiple_of(eta) {
            return Err(Error::PartitionMismatch { eta, m_count });
        }
        Ok(Self {
            params,
            eta,
            block_files: m_count / eta,
        })
    }

    pub fn eta(&self) -> usize {
        self.eta
    }
}

impl Scheme for PartitionScheme1 {
    fn id(&self) -> String {
        format!("scheme1-partition[eta={}]", self.eta)
    }

    fn params(&self) -> &SchemeParams {
        &self.params
    }

    fn strategy_len(&self) -> usize {
        self.block_files - 1
    }

    fn strategy_alphabet(&self) -> u8 {
        self.params.n_servers as u8
    }

    fn encode(&self, file: usize, strategy: &[u8], server: usize) -> Result<Query, Error> {
        let n = self.params.n_servers;
        if file >= self.params.m_count {
            return Err(Error::OutOfRange {
                name: "file",
                value: file,
                reason: "file index exceeds the catalog",
            });
        }
        if server >= n {
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
        let block = file / self.block_files;
        let local = file % self.block_files;
        let sum: usize = strategy.iter().map(|&c| c as usize).sum();
        let own = (server + n - sum % n) % n;
        let mut payload = vec![0u8; self.params.m_count];
        let base = block * self.block_files;
        payload[base..base + local].copy_from_slice(&strategy[..local]);
        payload[base + local] = own as u8;
        payload[base + local + 1..base + self.block_files].copy_from_slice(&strategy[local..]);
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

/// The achievable-tuple transform of the generic wrapper: upload grows by
/// n·log2(eta), both leakages by log2(eta); rate, access, and download are
/// the subscheme's.
pub fn transform_tuple(
    sub: &PerformanceTuple,
    m_count: usize,
    eta: usize,
    n_servers: usize,
) -> Result<PerformanceTuple, Error> {
    if eta == 0 || eta > m_count || !m_count.is_multiple_of(eta) {
        return Err(Error::PartitionMismatch { eta, m_count });
    }
    let label_bits = (eta as f64).log2();
    Ok(PerformanceTuple {
        rate: sub.rate,
        upload: sub.upload + n_servers as f64 * label_bits,
        access: sub.access,
        leakage_mi: sub.leakage_mi + label_bits,
        leakage_wil: sub.leakage_wil + label_bits,
        download: sub.download,
    })
}

/// Closed-form performance of the specialized two-server partition
/// construction with a uniform (perfectly private) subscheme in each block.
pub fn uniform_subscheme_tuple(m_count: usize, eta: usize) -> Result<PerformanceTuple, Error> {
    if eta == 0 || eta > m_count || !m_count.is_multiple_of(eta) {
        return Err(Error::PartitionMismatch { eta, m_count });
    }
    let block = (m_count / eta) as i32;
    let label_bits = (eta as f64).log2();
    let rate = pir_capacity(block as usize, 2)?;
    Ok(PerformanceTuple {
        rate,
        upload: 2.0 * ((block - 1) as f64 + label_bits) - label_bits / 2f64.powi(block - 1),
        access: block as f64,
        leakage_mi: label_bits - label_bits / 2f64.powi(block),
        leakage_wil: label_bits,
        download: 1.0 / rate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::evaluate;
    use crate::scheme::{verify_retrievability, StrategyDistribution};
    use crate::scheme1::{self, Scheme1};
    use crate::scheme2::Scheme2;

    const TOL: f64 = 1e-12;

    #[test]
    fn transform_examples() {
        let sub = scheme1::bernoulli_tuple(2, 0.5).unwrap();

        // a single partition changes nothing
        let same = transform_tuple(&sub, 2, 1, 2).unwrap();
        assert_eq!(same, sub);

        // wrapping a zero-leakage subscheme leaks exactly the label
        let wrapped = transform_tuple(&sub, 4, 2, 2).unwrap();
        assert!((wrapped.rate - 2.0 / 3.0).abs() < TOL);
        assert!((wrapped.upload - 4.0).abs() < TOL);
        assert!((wrapped.access - 2.0).abs() < TOL);
        assert!((wrapped.leakage_mi - 1.0).abs() < TOL);
        assert!((wrapped.leakage_wil - 1.0).abs() < TOL);

        assert!(transform_tuple(&sub, 4, 3, 2).is_err());
        assert!(transform_tuple(&sub, 4, 8, 2).is_err());
    }

    #[test]
    fn wrapped_enumeration_matches_transform() {
        let dist = StrategyDistribution::bernoulli(0.5);
        for eta in [2usize, 4] {
            let sub_tuple = evaluate(&Scheme1::new(2, 2, 2).unwrap(), &dist).unwrap();
            let expected = transform_tuple(&sub_tuple, 2 * eta, eta, 2).unwrap();
            let wrapped =
                BasicPartition::new(Box::new(Scheme1::new(2, 2, 2).unwrap()), eta).unwrap();
            let observed = evaluate(&wrapped, &dist).unwrap();
            assert!(expected.max_abs_difference(&observed) < 1e-12);
        }

        // same transform over the masked subscheme
        let dist = StrategyDistribution::UniformIid;
        let sub_tuple = evaluate(&Scheme2::new(3, 2, 2).unwrap(), &dist).unwrap();
        let expected = transform_tuple(&sub_tuple, 6, 2, 2).unwrap();
        let wrapped =
            BasicPartition::new(Box::new(Scheme2::new(3, 2, 2).unwrap()), 2).unwrap();
        let observed = evaluate(&wrapped, &dist).unwrap();
        assert!(expected.max_abs_difference(&observed) < 1e-12);
    }

    #[test]
    fn singleton_partitions_reveal_the_file() {
        // eta = M: the label alone identifies the requested file
        let wrapped =
            BasicPartition::new(Box::new(Scheme1::new(1, 2, 2).unwrap()), 4).unwrap();
        let stats =
            crate::metrics::build_statistics(&wrapped, &StrategyDistribution::UniformIid)
                .unwrap();
        assert!((stats.leakage_mi() - 2.0).abs() < TOL);
        assert!((stats.leakage_wil() - 2.0).abs() < TOL);
    }

    #[test]
    fn specialized_encode_examples() {
        let scheme = PartitionScheme1::new(4, 2, 2, 2).unwrap();
        // zero strategy at server 0 collapses to the all-zero query
        assert_eq!(scheme.encode(2, &[0], 0).unwrap().payload, vec![0, 0, 0, 0]);
        // block 0, strategy (1), server 1: local query (0, 1) zero-padded
        assert_eq!(scheme.encode(0, &[1], 1).unwrap().payload, vec![0, 1, 0, 0]);
        assert!(PartitionScheme1::new(4, 3, 2, 2).is_err());
        assert!(PartitionScheme1::new(4, 8, 2, 2).is_err());
    }

    #[test]
    fn specialized_alphabet_sizes() {
        // the all-zero query is shared across blocks at server 0, so its
        // alphabet is one smaller per block than the label-carrying wrapper
        for (m, eta) in [(4usize, 2usize), (6, 2), (6, 3), (8, 4)] {
            let scheme = PartitionScheme1::new(m, eta, 2, 2).unwrap();
            let block = m / eta;
            let per_block = 2usize.pow((block - 1) as u32);
            assert_eq!(
                scheme.query_alphabet(0).unwrap().len(),
                1 + eta * (per_block - 1)
            );
            assert_eq!(scheme.query_alphabet(1).unwrap().len(), eta * per_block);
        }
    }

    #[test]
    fn specialized_tuple_examples() {
        // one partition is the plain perfectly private scheme
        let t = uniform_subscheme_tuple(6, 1).unwrap();
        assert!((t.rate - pir_capacity(6, 2).unwrap()).abs() < TOL);
        assert!((t.upload - 10.0).abs() < TOL);
        assert!((t.access - 6.0).abs() < TOL);
        assert_eq!(t.leakage_mi, 0.0);
        assert_eq!(t.leakage_wil, 0.0);

        let t = uniform_subscheme_tuple(4, 2).unwrap();
        assert!((t.rate - 2.0 / 3.0).abs() < TOL);
        assert!((t.upload - 3.5).abs() < TOL);
        assert!((t.access - 2.0).abs() < TOL);
        assert!((t.leakage_mi - 0.75).abs() < TOL);
        assert!((t.leakage_wil - 1.0).abs() < TOL);

        assert!(uniform_subscheme_tuple(6, 4).is_err());
    }

    #[test]
    fn specialized_tuple_matches_enumeration() {
        for (m, eta) in [(4usize, 2usize), (6, 2), (6, 3), (8, 2)] {
            let closed = uniform_subscheme_tuple(m, eta).unwrap();
            let scheme = PartitionScheme1::new(m, eta, 2, 2).unwrap();
            let observed =
                evaluate(&scheme, &StrategyDistribution::bernoulli(0.5)).unwrap();
            assert!(
                closed.max_abs_difference(&observed) < 1e-9,
                "m={m} eta={eta}"
            );
        }
    }

    #[test]
    fn specialized_beats_basic_on_upload_and_mi() {
        for (m, eta) in [(4usize, 2usize), (8, 2), (8, 4), (6, 3)] {
            let specialized = uniform_subscheme_tuple(m, eta).unwrap();
            let sub = scheme1::bernoulli_tuple(m / eta, 0.5).unwrap();
            let basic = transform_tuple(&sub, m, eta, 2).unwrap();
            assert!(specialized.upload < basic.upload);
            assert!(specialized.leakage_mi < basic.leakage_mi);
            // while rate, access, and worst-case leakage coincide
            assert!((specialized.rate - basic.rate).abs() < TOL);
            assert!((specialized.access - basic.access).abs() < TOL);
            assert!((specialized.leakage_wil - basic.leakage_wil).abs() < TOL);
        }
    }

    #[test]
    fn wrapped_schemes_stay_retrievable() {
        let wrapped =
            BasicPartition::new(Box::new(Scheme1::new(2, 2, 3).unwrap()), 3).unwrap();
        let report = verify_retrievability(
            &wrapped,
            &StrategyDistribution::UniformIid,
            5,
            9,
        )
        .unwrap();
        assert_eq!(report.failures, 0);

        let specialized = PartitionScheme1::new(6, 3, 2, 2).unwrap();
        let report = verify_retrievability(
            &specialized,
            &StrategyDistribution::UniformIid,
            5,
            9,
        )
        .unwrap();
        assert_eq!(report.failures, 0);
    }
}
