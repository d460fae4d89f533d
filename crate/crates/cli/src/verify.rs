//! Verification suites: every closed form against the enumeration engine,
//! exhaustive retrievability, perfect-privacy operating points, and the
//! time-sharing symmetrizer.

use anyhow::Result;
use clap::ValueEnum;
use serde::Serialize;
use serde_json::json;
use wpir::metrics::build_statistics;
use wpir::oracle::{
    cross_check, simulate_retrieval, CheckRow, ClosedFormCheck, SimulationConfig,
    SubschemeKind,
};
use wpir::partition::{BasicPartition, PartitionScheme1};
use wpir::scheme::{check_perfect_privacy, Scheme, StrategyDistribution};
use wpir::{time_share, Scheme1, Scheme2};

/// Closed forms must match enumeration this tightly.
const THEOREM_TOLERANCE: f64 = 1e-9;
/// Equalities that hold exactly up to float rounding.
const EXACT_TOLERANCE: f64 = 1e-12;
/// Bernoulli grid used for the closed-form suites.
const P_GRID: [f64; 5] = [0.0, 0.1, 0.25, 0.4, 0.5];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Theorems,
    Retrievability,
    Privacy,
    Timeshare,
    All,
}

impl Suite {
    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Theorems => "theorems",
            Suite::Retrievability => "retrievability",
            Suite::Privacy => "privacy",
            Suite::Timeshare => "timeshare",
            Suite::All => "all",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub suite: &'static str,
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub pass: bool,
    pub checks: Vec<CheckRow>,
}

impl VerifyReport {
    fn new(suite: Suite, checks: Vec<CheckRow>) -> Self {
        let passed = checks.iter().filter(|c| c.pass).count();
        Self {
            suite: suite.as_str(),
            total: checks.len(),
            passed,
            failed: checks.len() - passed,
            pass: passed == checks.len(),
            checks,
        }
    }
}

fn divisors(m: usize) -> Vec<usize> {
    (1..=m).filter(|eta| m.is_multiple_of(*eta)).collect()
}

/// Every closed form against the enumeration engine on the small-M grid.
pub fn theorems_suite(max_m: usize) -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    for m_count in 2..=max_m {
        for p in P_GRID {
            rows.extend(cross_check(&ClosedFormCheck::Scheme1Bernoulli { m_count, p })?.rows);
            rows.extend(cross_check(&ClosedFormCheck::Scheme2Bernoulli { m_count, p })?.rows);
        }
        for weight in 0..=m_count {
            rows.extend(cross_check(&ClosedFormCheck::Scheme2Sphere { m_count, weight })?.rows);
        }
        for eta in divisors(m_count) {
            rows.extend(
                cross_check(&ClosedFormCheck::PartitionScheme1Uniform { m_count, eta })?.rows,
            );
        }
    }
    for m_count in [4usize, 6, 8] {
        if m_count > max_m {
            continue;
        }
        let mut etas = vec![2, m_count / 2];
        etas.dedup();
        for eta in etas {
            for sub in [SubschemeKind::Scheme1Pir, SubschemeKind::Scheme2Uniform] {
                rows.extend(
                    cross_check(&ClosedFormCheck::PartitionTransform { m_count, eta, sub })?
                        .rows,
                );
            }
        }
    }
    Ok(rows)
}

fn retrieval_configs(max_m: usize) -> Result<Vec<Box<dyn Scheme>>> {
    let cap = max_m.min(6);
    let mut schemes: Vec<Box<dyn Scheme>> = Vec::new();
    for n in [2usize, 3] {
        for q in [2u8, 3] {
            for m in 1..=cap {
                schemes.push(Box::new(Scheme1::new(m, n, q)?));
                schemes.push(Box::new(Scheme2::new(m, n, q)?));
            }
            for m in 2..=cap {
                for eta in divisors(m).into_iter().filter(|&eta| eta > 1) {
                    let block = m / eta;
                    schemes.push(Box::new(BasicPartition::new(
                        Box::new(Scheme1::new(block, n, q)?),
                        eta,
                    )?));
                    schemes.push(Box::new(BasicPartition::new(
                        Box::new(Scheme2::new(block, n, q)?),
                        eta,
                    )?));
                    schemes.push(Box::new(PartitionScheme1::new(m, eta, n, q)?));
                }
            }
        }
    }
    for m in 2..=cap.min(3) {
        schemes.push(Box::new(time_share(Box::new(Scheme2::new(m, 2, 2)?))));
    }
    Ok(schemes)
}

/// Exhaustive protocol runs: every (file, strategy) pair against 20 seeded
/// databases plus the adversarial patterns, expecting zero decode failures.
pub fn retrievability_suite(seed: u64, max_m: usize) -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    for scheme in retrieval_configs(max_m)? {
        let report = simulate_retrieval(
            scheme.as_ref(),
            &StrategyDistribution::UniformIid,
            &SimulationConfig::exhaustive(20, seed),
        )?;
        let params = *scheme.params();
        rows.push(CheckRow {
            scheme: scheme.id(),
            params: json!({"m": params.m_count, "n": params.n_servers, "q": params.q}),
            metric: "success_rate".into(),
            expected: 1.0,
            observed: report.success_rate,
            abs_error: (1.0 - report.success_rate).abs(),
            pass: report.failures == 0,
        });
    }
    Ok(rows)
}

/// Perfect-privacy operating points: uniform strategies must make every
/// server's verdict true.
pub fn privacy_suite(max_m: usize) -> Result<Vec<CheckRow>> {
    let cap = max_m.min(6);
    let mut rows = Vec::new();
    let mut push = |scheme: &dyn Scheme, dist: &StrategyDistribution| -> Result<()> {
        let verdicts = check_perfect_privacy(scheme, dist)?;
        let private = verdicts.iter().filter(|&&v| v).count();
        let params = *scheme.params();
        rows.push(CheckRow {
            scheme: scheme.id(),
            params: json!({"m": params.m_count, "n": params.n_servers, "q": params.q}),
            metric: "private_servers".into(),
            expected: params.n_servers as f64,
            observed: private as f64,
            abs_error: (params.n_servers - private) as f64,
            pass: private == params.n_servers,
        });
        Ok(())
    };
    for n in [2usize, 3] {
        for q in [2u8, 3] {
            for m in 2..=cap {
                push(&Scheme1::new(m, n, q)?, &StrategyDistribution::UniformIid)?;
                push(&Scheme2::new(m, n, q)?, &StrategyDistribution::UniformIid)?;
            }
        }
    }
    // the Bernoulli(1/2) point coincides with the uniform one at two servers
    for m in 2..=cap {
        push(&Scheme1::new(m, 2, 2)?, &StrategyDistribution::bernoulli(0.5))?;
        push(&Scheme2::new(m, 2, 2)?, &StrategyDistribution::bernoulli(0.5))?;
    }
    Ok(rows)
}

/// The cyclic-shift symmetrizer: every server's mutual-information leakage
/// must equal the base scheme's per-server average, with rate and access
/// untouched.
pub fn timeshare_suite() -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    for m in [2usize, 3] {
        for p in [0.0, 0.2] {
            let dist = StrategyDistribution::bernoulli(p);
            let base = Scheme2::new(m, 2, 2)?;
            let base_stats = build_statistics(&base, &dist)?;
            let per_server = base_stats.per_server_mi();
            let average = per_server.iter().sum::<f64>() / per_server.len() as f64;

            let shared = time_share(Box::new(Scheme2::new(m, 2, 2)?));
            let stats = build_statistics(&shared, &dist)?;
            let params = json!({"m": m, "n": 2, "q": 2, "p": p});
            for (server, mi) in stats.per_server_mi().into_iter().enumerate() {
                rows.push(CheckRow {
                    scheme: shared.id(),
                    params: params.clone(),
                    metric: format!("mi_server_{server}"),
                    expected: average,
                    observed: mi,
                    abs_error: (average - mi).abs(),
                    pass: (average - mi).abs() <= EXACT_TOLERANCE,
                });
            }
            for (metric, expected, observed) in [
                ("rate", base_stats.rate(), stats.rate()),
                ("access", base_stats.access_complexity(), stats.access_complexity()),
            ] {
                rows.push(CheckRow {
                    scheme: shared.id(),
                    params: params.clone(),
                    metric: metric.into(),
                    expected,
                    observed,
                    abs_error: (expected - observed).abs(),
                    pass: (expected - observed).abs() <= EXACT_TOLERANCE,
                });
            }
        }
    }
    Ok(rows)
}

/// Runs one suite (or all of them) and aggregates the verdict.
pub fn run_verify(suite: Suite, seed: u64, max_m: usize) -> Result<VerifyReport> {
    let checks = match suite {
        Suite::Theorems => theorems_suite(max_m)?,
        Suite::Retrievability => retrievability_suite(seed, max_m)?,
        Suite::Privacy => privacy_suite(max_m)?,
        Suite::Timeshare => timeshare_suite()?,
        Suite::All => {
            let mut rows = theorems_suite(max_m)?;
            rows.extend(retrievability_suite(seed, max_m)?);
            rows.extend(privacy_suite(max_m)?);
            rows.extend(timeshare_suite()?);
            rows
        }
    };
    Ok(VerifyReport::new(suite, checks))
}

// Suites reuse the oracle's tolerance for closed forms; keep the constant
// in one place so the binary and the tests agree.
pub const fn theorem_tolerance() -> f64 {
    THEOREM_TOLERANCE
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theorem_suite_passes_on_a_small_grid() {
        let report = VerifyReport::new(Suite::Theorems, theorems_suite(4).unwrap());
        assert!(report.pass, "{} failures", report.failed);
        assert!(report.total > 0);
        for check in &report.checks {
            assert!(check.abs_error <= theorem_tolerance());
        }
    }

    #[test]
    fn privacy_suite_passes() {
        let report = VerifyReport::new(Suite::Privacy, privacy_suite(4).unwrap());
        assert!(report.pass, "{} failures", report.failed);
    }

    #[test]
    fn timeshare_suite_passes() {
        let report = VerifyReport::new(Suite::Timeshare, timeshare_suite().unwrap());
        assert!(report.pass, "{} failures", report.failed);
    }

    #[test]
    fn retrievability_suite_passes_on_small_catalogs() {
        let report =
            VerifyReport::new(Suite::Retrievability, retrievability_suite(5, 3).unwrap());
        assert!(report.pass, "{} failures", report.failed);
        assert!(report.total > 0);
    }
}
