//! Independent verification layer: end-to-end protocol simulation on
//! concrete databases, and cross-checks of every closed form against the
//! exact enumeration engine.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::error::Error;
use crate::metrics::{evaluate, PerformanceTuple};
use crate::partition::{self, BasicPartition, PartitionScheme1};
use crate::scheme::{Database, Query, Scheme, StrategyDistribution};
use crate::scheme1::{self, Scheme1};
use crate::scheme2::{self, Scheme2};

/// Closed forms must match the enumeration engine within this bound.
pub const CROSS_CHECK_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SimulationMode {
    /// Every (file, strategy) pair with positive probability, against
    /// `trials` seeded random databases plus fixed adversarial patterns.
    Exhaustive,
    /// `trials` rounds with file, strategy, and database all drawn at
    /// random.
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SimulationConfig {
    pub rng_seed: u64,
    /// Monte Carlo round count, or the number of random databases in
    /// exhaustive mode.
    pub trials: usize,
    pub mode: SimulationMode,
}

impl SimulationConfig {
    pub fn exhaustive(databases: usize, rng_seed: u64) -> Self {
        Self { rng_seed, trials: databases, mode: SimulationMode::Exhaustive }
    }

    pub fn monte_carlo(trials: usize, rng_seed: u64) -> Self {
        Self { rng_seed, trials, mode: SimulationMode::MonteCarlo }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SimulationReport {
    pub rounds: u64,
    pub failures: u64,
    pub success_rate: f64,
    /// Mean downloaded symbols per retrieval: probability-weighted in
    /// exhaustive mode, a sample mean in Monte Carlo mode.
    pub empirical_download: f64,
    /// Mean accessed symbols per retrieval, same weighting.
    pub empirical_access: f64,
}

fn run_round(
    scheme: &dyn Scheme,
    file: usize,
    strategy: &[u8],
    db: &Database,
) -> Result<(bool, usize, usize), Error> {
    let n = scheme.params().n_servers;
    let mut queries = Vec::with_capacity(n);
    let mut answers = Vec::with_capacity(n);
    let mut download = 0;
    let mut access = 0;
    for server in 0..n {
        let query = scheme.encode(file, strategy, server)?;
        let answer = scheme.answer(&query, db);
        download += answer.len();
        access += scheme.access_count(&query);
        queries.push(query);
        answers.push(answer);
    }
    let decoded = scheme.decode(file, strategy, &queries, &answers)?;
    Ok((db.matches_file(file, &decoded), download, access))
}

fn adversarial_databases(scheme: &dyn Scheme) -> Vec<Database> {
    let params = scheme.params();
    let mut dbs = vec![Database::zero(params)];
    dbs.push(Database::constant(params, 1).expect("1 is a field value for every prime"));
    dbs.push(Database::unit(params, 0, 0).expect("position (0,0) always exists"));
    dbs
}

/// Runs full encode -> answer -> decode rounds and reports the success rate
/// together with empirical download and access means. Decode mismatches are
/// recorded, not raised.
pub fn simulate_retrieval(
    scheme: &dyn Scheme,
    dist: &StrategyDistribution,
    config: &SimulationConfig,
) -> Result<SimulationReport, Error> {
    let params = *scheme.params();
    match config.mode {
        SimulationMode::Exhaustive => {
            let space = scheme.strategy_space(dist)?;
            let mut dbs = adversarial_databases(scheme);
            for sample in 0..config.trials {
                dbs.push(Database::random(&params, config.rng_seed.wrapping_add(sample as u64)));
            }
            let mut rounds = 0u64;
            let mut failures = 0u64;
            // download and access depend only on the queries, so their
            // probability-weighted means are database-independent; queries
            // are likewise reused across databases
            let mut download = 0.0;
            let mut access = 0.0;
            let mut answers = Vec::with_capacity(params.n_servers);
            for file in 0..params.m_count {
                for (strategy, prob) in &space {
                    let queries: Vec<Query> = (0..params.n_servers)
                        .map(|server| scheme.encode(file, strategy, server))
                        .collect::<Result<_, _>>()?;
                    let weight = prob / params.m_count as f64;
                    for query in &queries {
                        download += weight * scheme.answer_length(query) as f64;
                        access += weight * scheme.access_count(query) as f64;
                    }
                    for db in &dbs {
                        answers.clear();
                        answers.extend(queries.iter().map(|q| scheme.answer(q, db)));
                        let decoded = scheme.decode(file, strategy, &queries, &answers)?;
                        rounds += 1;
                        if !db.matches_file(file, &decoded) {
                            failures += 1;
                        }
                    }
                }
            }
            Ok(SimulationReport {
                rounds,
                failures,
                success_rate: 1.0 - failures as f64 / rounds as f64,
                empirical_download: download,
                empirical_access: access,
            })
        }
        SimulationMode::MonteCarlo => {
            if config.trials == 0 {
                return Err(Error::OutOfRange {
                    name: "trials",
                    value: 0,
                    reason: "Monte Carlo mode needs at least one trial",
                });
            }
            let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
            let mut failures = 0u64;
            let mut download = 0u64;
            let mut access = 0u64;
            for _ in 0..config.trials {
                let file = rng.gen_range(0..params.m_count);
                let strategy = scheme.draw_strategy(dist, &mut rng)?;
                let db = Database::random(&params, rng.gen());
                let (ok, d, a) = run_round(scheme, file, &strategy, &db)?;
                if !ok {
                    failures += 1;
                }
                download += d as u64;
                access += a as u64;
            }
            let rounds = config.trials as u64;
            Ok(SimulationReport {
                rounds,
                failures,
                success_rate: 1.0 - failures as f64 / rounds as f64,
                empirical_download: download as f64 / rounds as f64,
                empirical_access: access as f64 / rounds as f64,
            })
        }
    }
}

/// Exact mean and variance of the per-retrieval download and access counts,
/// for sizing Monte Carlo confidence bands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialMoments {
    pub download_mean: f64,
    pub download_var: f64,
    pub access_mean: f64,
    pub access_var: f64,
}

pub fn exact_trial_moments(
    scheme: &dyn Scheme,
    dist: &StrategyDistribution,
) -> Result<TrialMoments, Error> {
    let params = *scheme.params();
    let space = scheme.strategy_space(dist)?;
    let mut d1 = 0.0;
    let mut d2 = 0.0;
    let mut a1 = 0.0;
    let mut a2 = 0.0;
    for file in 0..params.m_count {
        for (strategy, prob) in &space {
            let weight = prob / params.m_count as f64;
            let mut download = 0.0;
            let mut access = 0.0;
            for server in 0..params.n_servers {
                let query = scheme.encode(file, strategy, server)?;
                download += scheme.answer_length(&query) as f64;
                access += scheme.access_count(&query) as f64;
            }
            d1 += weight * download;
            d2 += weight * download * download;
            a1 += weight * access;
            a2 += weight * access * access;
        }
    }
    Ok(TrialMoments {
        download_mean: d1,
        download_var: (d2 - d1 * d1).max(0.0),
        access_mean: a1,
        access_var: (a2 - a1 * a1).max(0.0),
    })
}

/// Which closed form to check against the enumeration engine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedFormCheck {
    Scheme1Bernoulli { m_count: usize, p: f64 },
    Scheme2Bernoulli { m_count: usize, p: f64 },
    Scheme2Sphere { m_count: usize, weight: usize },
    PartitionScheme1Uniform { m_count: usize, eta: usize },
    /// The generic wrapper transform over a perfectly private subscheme.
    PartitionTransform { m_count: usize, eta: usize, sub: SubschemeKind },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SubschemeKind {
    Scheme1Pir,
    Scheme2Uniform,
}

/// One compared metric, JSON-ready.
#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    pub scheme: String,
    pub params: serde_json::Value,
    pub metric: String,
    pub expected: f64,
    pub observed: f64,
    pub abs_error: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub rows: Vec<CheckRow>,
    pub max_abs_error: f64,
    pub pass: bool,
}

fn tuple_rows(
    scheme: String,
    params: serde_json::Value,
    expected: &PerformanceTuple,
    observed: &PerformanceTuple,
) -> Vec<CheckRow> {
    [
        ("rate", expected.rate, observed.rate),
        ("upload", expected.upload, observed.upload),
        ("access", expected.access, observed.access),
        ("leakage_mi", expected.leakage_mi, observed.leakage_mi),
        ("leakage_wil", expected.leakage_wil, observed.leakage_wil),
        ("download", expected.download, observed.download),
    ]
    .into_iter()
    .map(|(metric, exp, obs)| CheckRow {
        scheme: scheme.clone(),
        params: params.clone(),
        metric: metric.into(),
        expected: exp,
        observed: obs,
        abs_error: (exp - obs).abs(),
        pass: (exp - obs).abs() <= CROSS_CHECK_TOLERANCE,
    })
    .collect()
}

/// Evaluates one closed form and the enumeration engine on the same
/// configuration and reports the per-field absolute errors.
pub fn cross_check(check: &ClosedFormCheck) -> Result<CheckReport, Error> {
    let rows = match *check {
        ClosedFormCheck::Scheme1Bernoulli { m_count, p } => {
            let expected = scheme1::bernoulli_tuple(m_count, p)?;
            let scheme = Scheme1::new(m_count, 2, 2)?;
            let observed = evaluate(&scheme, &StrategyDistribution::bernoulli(p))?;
            tuple_rows(
                "scheme1".into(),
                json!({"m": m_count, "n": 2, "p": p}),
                &expected,
                &observed,
            )
        }
        ClosedFormCheck::Scheme2Bernoulli { m_count, p } => {
            let expected = scheme2::bernoulli_tuple(m_count, p)?;
            let scheme = Scheme2::new(m_count, 2, 2)?;
            let observed = evaluate(&scheme, &StrategyDistribution::bernoulli(p))?;
            tuple_rows(
                "scheme2-bernoulli".into(),
                json!({"m": m_count, "n": 2, "p": p}),
                &expected,
                &observed,
            )
        }
        ClosedFormCheck::Scheme2Sphere { m_count, weight } => {
            let expected = scheme2::sphere_tuple(m_count, weight)?;
            let scheme = Scheme2::new(m_count, 2, 2)?;
            let observed = evaluate(&scheme, &StrategyDistribution::sphere(weight))?;
            tuple_rows(
                "scheme2-sphere".into(),
                json!({"m": m_count, "n": 2, "w": weight}),
                &expected,
                &observed,
            )
        }
        ClosedFormCheck::PartitionScheme1Uniform { m_count, eta } => {
            let expected = partition::uniform_subscheme_tuple(m_count, eta)?;
            let scheme = PartitionScheme1::new(m_count, eta, 2, 2)?;
            let observed = evaluate(&scheme, &StrategyDistribution::bernoulli(0.5))?;
            tuple_rows(
                "scheme1-partition".into(),
                json!({"m": m_count, "n": 2, "eta": eta}),
                &expected,
                &observed,
            )
        }
        ClosedFormCheck::PartitionTransform { m_count, eta, sub } => {
            if eta == 0 || !m_count.is_multiple_of(eta) {
                return Err(Error::PartitionMismatch { eta, m_count });
            }
            let block = m_count / eta;
            let (sub_scheme, dist, label): (Box<dyn Scheme>, _, _) = match sub {
                SubschemeKind::Scheme1Pir => (
                    Box::new(Scheme1::new(block, 2, 2)?),
                    StrategyDistribution::bernoulli(0.5),
                    "scheme1",
                ),
                SubschemeKind::Scheme2Uniform => (
                    Box::new(Scheme2::new(block, 2, 2)?),
                    StrategyDistribution::UniformIid,
                    "scheme2",
                ),
            };
            let sub_tuple = evaluate(sub_scheme.as_ref(), &dist)?;
            let expected = partition::transform_tuple(&sub_tuple, m_count, eta, 2)?;
            let wrapped = BasicPartition::new(sub_scheme, eta)?;
            let observed = evaluate(&wrapped, &dist)?;
            tuple_rows(
                "basic-partition".into(),
                json!({"m": m_count, "n": 2, "eta": eta, "sub": label}),
                &expected,
                &observed,
            )
        }
    };
    let max_abs_error = rows.iter().map(|r| r.abs_error).fold(0.0, f64::max);
    let pass = rows.iter().all(|r| r.pass);
    Ok(CheckReport { rows, max_abs_error, pass })
}
