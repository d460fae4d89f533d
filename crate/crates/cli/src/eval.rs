//! Single-configuration evaluation with per-field provenance.

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::json;
use wpir::metrics::evaluate;
use wpir::partition::{transform_tuple, uniform_subscheme_tuple, BasicPartition, PartitionScheme1};
use wpir::scheme::{Scheme, StrategyDistribution};
use wpir::{scheme1, scheme2, PerformanceTuple, Scheme1, Scheme2};

use crate::{normalize, NormalizedTuple, SchemeId, SubId};

#[derive(Debug, Clone, Copy)]
pub struct EvalSpec {
    pub scheme: SchemeId,
    pub m_count: usize,
    pub n_servers: usize,
    pub q: u8,
    pub p: Option<f64>,
    pub weight: Option<usize>,
    pub eta: Option<usize>,
    pub sub: Option<SubId>,
    pub normalized: bool,
}

/// Which evaluation route produced a number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    ClosedForm,
    Enumeration,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub scheme: &'static str,
    pub params: serde_json::Value,
    pub tuple: PerformanceTuple,
    /// Route per reported field; closed forms are used whenever their
    /// stated domain applies, the exact enumeration engine otherwise.
    pub source: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalized: Option<NormalizedTuple>,
}

fn source_map(source: Source) -> serde_json::Value {
    let label = match source {
        Source::ClosedForm => "closed-form",
        Source::Enumeration => "enumeration",
    };
    json!({
        "rate": label,
        "upload": label,
        "access": label,
        "leakage_mi": label,
        "leakage_wil": label,
        "download": label,
    })
}

fn require<T: Copy>(value: Option<T>, flag: &str) -> Result<T> {
    value.with_context(|| format!("this scheme requires {flag}"))
}

/// Computes the performance tuple for one configuration, preferring closed
/// forms where they apply.
pub fn evaluate_spec(spec: &EvalSpec) -> Result<(PerformanceTuple, Source)> {
    match spec.scheme {
        SchemeId::Scheme1 => {
            let p = require(spec.p, "--p")?;
            if spec.n_servers == 2 && p <= 0.5 {
                Ok((scheme1::bernoulli_tuple(spec.m_count, p)?, Source::ClosedForm))
            } else {
                let scheme = Scheme1::new(spec.m_count, spec.n_servers, spec.q)?;
                let tuple = evaluate(&scheme, &StrategyDistribution::bernoulli(p))?;
                Ok((tuple, Source::Enumeration))
            }
        }
        SchemeId::Scheme1Partition => {
            let eta = require(spec.eta, "--eta")?;
            if spec.n_servers == 2 {
                Ok((uniform_subscheme_tuple(spec.m_count, eta)?, Source::ClosedForm))
            } else {
                let scheme =
                    PartitionScheme1::new(spec.m_count, eta, spec.n_servers, spec.q)?;
                let tuple = evaluate(&scheme, &StrategyDistribution::UniformIid)?;
                Ok((tuple, Source::Enumeration))
            }
        }
        SchemeId::Scheme2Bernoulli => {
            let p = require(spec.p, "--p")?;
            if spec.n_servers == 2 && spec.q == 2 && p <= 0.5 {
                Ok((scheme2::bernoulli_tuple(spec.m_count, p)?, Source::ClosedForm))
            } else {
                let scheme = Scheme2::new(spec.m_count, spec.n_servers, spec.q)?;
                let tuple = evaluate(&scheme, &StrategyDistribution::bernoulli(p))?;
                Ok((tuple, Source::Enumeration))
            }
        }
        SchemeId::Scheme2Sphere => {
            let weight = require(spec.weight, "--w")?;
            if spec.n_servers == 2 && spec.q == 2 {
                Ok((scheme2::sphere_tuple(spec.m_count, weight)?, Source::ClosedForm))
            } else {
                let scheme = Scheme2::new(spec.m_count, spec.n_servers, spec.q)?;
                let tuple = evaluate(&scheme, &StrategyDistribution::sphere(weight))?;
                Ok((tuple, Source::Enumeration))
            }
        }
        SchemeId::BasicPartition => {
            let eta = require(spec.eta, "--eta")?;
            let sub = require(spec.sub, "--sub")?;
            if eta == 0 || !spec.m_count.is_multiple_of(eta) {
                bail!("eta = {eta} must divide the file count {}", spec.m_count);
            }
            let block = spec.m_count / eta;
            if spec.n_servers == 2 && spec.q == 2 {
                let sub_tuple = match sub {
                    SubId::Scheme1 => scheme1::bernoulli_tuple(block, 0.5)?,
                    SubId::Scheme2 => scheme2::bernoulli_tuple(block, 0.5)?,
                };
                let tuple = transform_tuple(&sub_tuple, spec.m_count, eta, 2)?;
                Ok((tuple, Source::ClosedForm))
            } else {
                let (sub_scheme, dist): (Box<dyn Scheme>, _) = match sub {
                    SubId::Scheme1 => (
                        Box::new(Scheme1::new(block, spec.n_servers, spec.q)?),
                        StrategyDistribution::UniformIid,
                    ),
                    SubId::Scheme2 => (
                        Box::new(Scheme2::new(block, spec.n_servers, spec.q)?),
                        StrategyDistribution::UniformIid,
                    ),
                };
                let wrapped = BasicPartition::new(sub_scheme, eta)?;
                Ok((evaluate(&wrapped, &dist)?, Source::Enumeration))
            }
        }
    }
}

pub fn run_eval(spec: &EvalSpec) -> Result<EvalReport> {
    let (tuple, source) = evaluate_spec(spec)?;
    let mut params = json!({
        "m": spec.m_count,
        "n": spec.n_servers,
        "q": spec.q,
    });
    let obj = params.as_object_mut().expect("params is an object");
    if let Some(p) = spec.p {
        obj.insert("p".into(), json!(p));
    }
    if let Some(w) = spec.weight {
        obj.insert("w".into(), json!(w));
    }
    if let Some(eta) = spec.eta {
        obj.insert("eta".into(), json!(eta));
    }
    if let Some(sub) = spec.sub {
        obj.insert(
            "sub".into(),
            json!(match sub {
                SubId::Scheme1 => "scheme1",
                SubId::Scheme2 => "scheme2",
            }),
        );
    }
    Ok(EvalReport {
        scheme: spec.scheme.as_str(),
        params,
        tuple,
        source: source_map(source),
        normalized: spec.normalized.then(|| normalize(&tuple, spec.m_count)),
    })
}
