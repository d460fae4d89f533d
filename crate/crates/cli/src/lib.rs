//! Batch front end for the WPIR laboratory: single-point evaluation,
//! parameter sweeps to CSV, and the verification suites.

pub mod eval;
pub mod sweep;
pub mod verify;

use clap::ValueEnum;
use serde::Serialize;
use wpir::PerformanceTuple;

/// The configurations the front end knows how to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeId {
    /// Sum-query scheme, Bernoulli(p) strategy entries.
    Scheme1,
    /// Sum-query scheme inside equal partitions, uniform subscheme.
    Scheme1Partition,
    /// Masked inner-product scheme, Bernoulli(p) mask bits.
    Scheme2Bernoulli,
    /// Masked inner-product scheme, mask uniform on a Hamming sphere.
    Scheme2Sphere,
    /// Generic partition wrapper around a perfectly private subscheme.
    BasicPartition,
}

impl SchemeId {
    pub fn as_str(self) -> &'static str {
        match self {
            SchemeId::Scheme1 => "scheme1",
            SchemeId::Scheme1Partition => "scheme1-partition",
            SchemeId::Scheme2Bernoulli => "scheme2-bernoulli",
            SchemeId::Scheme2Sphere => "scheme2-sphere",
            SchemeId::BasicPartition => "basic-partition",
        }
    }
}

/// Subscheme choice for the generic partition wrapper, pinned at its
/// perfectly private operating point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SubId {
    Scheme1,
    Scheme2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LeakageMetric {
    Mi,
    Wil,
}

/// Tuple rescaled by the conventional units: leakage by log2(M), upload by
/// 2(M-1), access by M; the rate is already dimensionless.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct NormalizedTuple {
    pub rate: f64,
    pub upload: f64,
    pub access: f64,
    pub leakage_mi: f64,
    pub leakage_wil: f64,
}

pub fn normalize(tuple: &PerformanceTuple, m_count: usize) -> NormalizedTuple {
    let m = m_count as f64;
    let leakage_unit = m.log2();
    let upload_unit = 2.0 * (m - 1.0);
    let scale = |x: f64, unit: f64| if unit > 0.0 { x / unit } else { 0.0 };
    NormalizedTuple {
        rate: tuple.rate,
        upload: scale(tuple.upload, upload_unit),
        access: tuple.access / m,
        leakage_mi: scale(tuple.leakage_mi, leakage_unit),
        leakage_wil: scale(tuple.leakage_wil, leakage_unit),
    }
}

/// Formats with a fixed number of significant digits and a '.' separator,
/// so CSV output is byte-stable for fixed inputs.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (digits as i32 - 1 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(fmt_sig(0.0, 12), "0");
        assert_eq!(fmt_sig(0.5, 12), "0.500000000000");
        assert_eq!(fmt_sig(2.0 / 3.0, 12), "0.666666666667");
        assert_eq!(fmt_sig(2.0, 12), "2.00000000000");
        assert_eq!(fmt_sig(62.0, 12), "62.0000000000");
        assert_eq!(fmt_sig(-1.5, 3), "-1.50");
    }

    #[test]
    fn normalization_units() {
        let tuple = PerformanceTuple {
            rate: 0.5,
            upload: 62.0,
            access: 32.0,
            leakage_mi: 5.0,
            leakage_wil: 2.5,
            download: 2.0,
        };
        let norm = normalize(&tuple, 32);
        assert_eq!(norm.rate, 0.5);
        assert_eq!(norm.upload, 1.0);
        assert_eq!(norm.access, 1.0);
        assert_eq!(norm.leakage_mi, 1.0);
        assert_eq!(norm.leakage_wil, 0.5);

        // a single file has no leakage or upload unit
        let degenerate = normalize(&tuple, 1);
        assert_eq!(degenerate.leakage_mi, 0.0);
        assert_eq!(degenerate.upload, 0.0);
    }
}
