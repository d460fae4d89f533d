//! Parameter sweeps producing the tradeoff-curve CSV files.

use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use wpir::PerformanceTuple;

use crate::eval::{evaluate_spec, EvalSpec};
use crate::{fmt_sig, normalize, LeakageMetric, NormalizedTuple, SchemeId, SubId};

/// Fixed, documented header; one row per grid point, raw then normalized.
pub const CSV_HEADER: &str = "scheme,M,n,eta,param,R,U,delta,rho_mi,rho_wil,\
                              R_norm,U_norm,delta_norm,rho_mi_norm,rho_wil_norm";

const SIGNIFICANT_DIGITS: usize = 12;

/// The swept parameter axis. Which one applies is fixed by the scheme:
/// p for the Bernoulli families, w for the sphere family, eta for the
/// partition families.
#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    P(Vec<f64>),
    Weight(Vec<usize>),
    Eta(Vec<usize>),
}

impl GridSpec {
    /// Parses "start:stop:step" into an inclusive float grid.
    pub fn parse_p(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            bail!("expected start:stop:step, got {text}");
        }
        let start: f64 = parts[0].parse().context("bad grid start")?;
        let stop: f64 = parts[1].parse().context("bad grid stop")?;
        let step: f64 = parts[2].parse().context("bad grid step")?;
        if step <= 0.0 || stop < start {
            bail!("grid must satisfy start <= stop and step > 0");
        }
        let mut values = Vec::new();
        let mut i = 0u32;
        loop {
            let value = start + f64::from(i) * step;
            if value > stop + 1e-12 {
                break;
            }
            values.push(value.min(stop));
            i += 1;
        }
        Ok(GridSpec::P(values))
    }

    /// Parses "start:stop:step" into an inclusive integer grid.
    pub fn parse_weights(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            bail!("expected start:stop:step, got {text}");
        }
        let start: usize = parts[0].parse().context("bad grid start")?;
        let stop: usize = parts[1].parse().context("bad grid stop")?;
        let step: usize = parts[2].parse().context("bad grid step")?;
        if step == 0 || stop < start {
            bail!("grid must satisfy start <= stop and step > 0");
        }
        Ok(GridSpec::Weight((start..=stop).step_by(step).collect()))
    }

    /// Parses a comma-separated eta list, or "divisors" for every divisor
    /// of the file count in ascending order.
    pub fn parse_etas(text: &str, m_count: usize) -> Result<Self> {
        if text == "divisors" {
            return Ok(GridSpec::Eta(
                (1..=m_count).filter(|eta| m_count.is_multiple_of(*eta)).collect(),
            ));
        }
        let values = text
            .split(',')
            .map(|part| part.trim().parse::<usize>().context("bad eta value"))
            .collect::<Result<Vec<_>>>()?;
        if values.is_empty() {
            bail!("eta grid is empty");
        }
        Ok(GridSpec::Eta(values))
    }

    fn is_empty(&self) -> bool {
        match self {
            GridSpec::P(v) => v.is_empty(),
            GridSpec::Weight(v) => v.is_empty(),
            GridSpec::Eta(v) => v.is_empty(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub scheme: SchemeId,
    pub m_count: usize,
    pub n_servers: usize,
    pub q: u8,
    pub sub: Option<SubId>,
    pub grid: GridSpec,
    /// Rows are sorted by this leakage metric, ascending.
    pub metric: LeakageMetric,
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub scheme: &'static str,
    pub m_count: usize,
    pub n_servers: usize,
    pub eta: Option<usize>,
    pub param: f64,
    pub tuple: PerformanceTuple,
    pub normalized: NormalizedTuple,
}

fn point_spec(spec: &SweepSpec, param: f64) -> EvalSpec {
    let mut eval = EvalSpec {
        scheme: spec.scheme,
        m_count: spec.m_count,
        n_servers: spec.n_servers,
        q: spec.q,
        p: None,
        weight: None,
        eta: None,
        sub: spec.sub,
        normalized: false,
    };
    match spec.scheme {
        SchemeId::Scheme1 | SchemeId::Scheme2Bernoulli => eval.p = Some(param),
        SchemeId::Scheme2Sphere => eval.weight = Some(param as usize),
        SchemeId::Scheme1Partition | SchemeId::BasicPartition => {
            eval.eta = Some(param as usize)
        }
    }
    eval
}

/// Evaluates every grid point and returns the rows sorted by the chosen
/// leakage metric (ascending, ties by parameter).
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    if spec.grid.is_empty() {
        bail!("the parameter grid is empty");
    }
    let grid_matches = matches!(
        (&spec.grid, spec.scheme),
        (GridSpec::P(_), SchemeId::Scheme1 | SchemeId::Scheme2Bernoulli)
            | (GridSpec::Weight(_), SchemeId::Scheme2Sphere)
            | (GridSpec::Eta(_), SchemeId::Scheme1Partition | SchemeId::BasicPartition)
    );
    if !grid_matches {
        bail!(
            "grid kind does not match {}: use --p-grid for the Bernoulli \
             families, --w-grid for the sphere family, --eta-grid for the \
             partition families",
            spec.scheme.as_str()
        );
    }
    let params: Vec<f64> = match &spec.grid {
        GridSpec::P(v) => v.clone(),
        GridSpec::Weight(v) => v.iter().map(|&w| w as f64).collect(),
        GridSpec::Eta(v) => v.iter().map(|&eta| eta as f64).collect(),
    };
    let mut rows = Vec::with_capacity(params.len());
    for param in params {
        let eval = point_spec(spec, param);
        let (tuple, _) = evaluate_spec(&eval)
            .with_context(|| format!("grid point {param} failed"))?;
        rows.push(SweepRow {
            scheme: spec.scheme.as_str(),
            m_count: spec.m_count,
            n_servers: spec.n_servers,
            eta: eval.eta,
            param,
            tuple,
            normalized: normalize(&tuple, spec.m_count),
        });
    }
    let key = |row: &SweepRow| match spec.metric {
        LeakageMetric::Mi => row.tuple.leakage_mi,
        LeakageMetric::Wil => row.tuple.leakage_wil,
    };
    rows.sort_by(|a, b| {
        key(a)
            .total_cmp(&key(b))
            .then(a.param.total_cmp(&b.param))
    });
    Ok(rows)
}

/// Renders rows as CSV: fixed header, 12 significant digits, '\n' endings.
pub fn csv_string(rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(rows.len() * 160 + CSV_HEADER.len() + 1);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        let eta = row.eta.map(|e| e.to_string()).unwrap_or_default();
        let t = &row.tuple;
        let n = &row.normalized;
        let fields = [
            row.scheme.to_string(),
            row.m_count.to_string(),
            row.n_servers.to_string(),
            eta,
            fmt_sig(row.param, SIGNIFICANT_DIGITS),
            fmt_sig(t.rate, SIGNIFICANT_DIGITS),
            fmt_sig(t.upload, SIGNIFICANT_DIGITS),
            fmt_sig(t.access, SIGNIFICANT_DIGITS),
            fmt_sig(t.leakage_mi, SIGNIFICANT_DIGITS),
            fmt_sig(t.leakage_wil, SIGNIFICANT_DIGITS),
            fmt_sig(n.rate, SIGNIFICANT_DIGITS),
            fmt_sig(n.upload, SIGNIFICANT_DIGITS),
            fmt_sig(n.access, SIGNIFICANT_DIGITS),
            fmt_sig(n.leakage_mi, SIGNIFICANT_DIGITS),
            fmt_sig(n.leakage_wil, SIGNIFICANT_DIGITS),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn write_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    let mut file = std::fs::File::create(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    file.write_all(csv_string(rows).as_bytes())
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        let GridSpec::P(values) = GridSpec::parse_p("0:0.5:0.1").unwrap() else {
            panic!("expected a p grid")
        };
        assert_eq!(values.len(), 6);
        assert!((values[5] - 0.5).abs() < 1e-12);

        let GridSpec::Weight(weights) = GridSpec::parse_weights("0:4:2").unwrap() else {
            panic!("expected a weight grid")
        };
        assert_eq!(weights, vec![0, 2, 4]);

        let GridSpec::Eta(etas) = GridSpec::parse_etas("divisors", 12).unwrap() else {
            panic!("expected an eta grid")
        };
        assert_eq!(etas, vec![1, 2, 3, 4, 6, 12]);

        assert!(GridSpec::parse_p("0:0.5").is_err());
        assert!(GridSpec::parse_p("0.5:0:0.1").is_err());
        assert!(GridSpec::parse_etas("", 4).is_err());
    }

    fn small_sweep() -> SweepSpec {
        SweepSpec {
            scheme: SchemeId::Scheme1,
            m_count: 2,
            n_servers: 2,
            q: 2,
            sub: None,
            grid: GridSpec::parse_p("0:0.5:0.25").unwrap(),
            metric: LeakageMetric::Wil,
        }
    }

    #[test]
    fn rows_are_sorted_by_leakage() {
        let rows = run_sweep(&small_sweep()).unwrap();
        assert_eq!(rows.len(), 3);
        // leakage falls with p, so the sorted order reverses the grid
        assert!((rows[0].param - 0.5).abs() < 1e-12);
        assert!((rows[2].param - 0.0).abs() < 1e-12);
        for pair in rows.windows(2) {
            assert!(pair[0].tuple.leakage_wil <= pair[1].tuple.leakage_wil);
        }
    }

    #[test]
    fn csv_output_is_stable() {
        let rows = run_sweep(&small_sweep()).unwrap();
        let a = csv_string(&rows);
        let b = csv_string(&run_sweep(&small_sweep()).unwrap());
        assert_eq!(a, b);
        assert!(a.starts_with("scheme,M,n,eta,param,"));
        assert_eq!(a.lines().count(), 4);
        let first = a.lines().nth(1).unwrap();
        assert!(first.starts_with("scheme1,2,2,,0.500000000000,0.666666666667,"));
    }

    #[test]
    fn mismatched_grid_is_rejected() {
        let mut spec = small_sweep();
        spec.grid = GridSpec::Weight(vec![0, 1]);
        assert!(run_sweep(&spec).is_err());
    }
}
