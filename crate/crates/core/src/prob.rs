//! Probability containers and the entropy/information primitives every
//! scheme and metric is built from.
//!
//! All quantities are 64-bit floats in bits (log base 2), with the usual
//! convention 0·log2(0) = 0. Comparisons elsewhere in the crate use absolute
//! tolerances; the enumerated spaces are small enough that rounding stays
//! orders of magnitude below them.

use std::collections::HashSet;
use std::hash::Hash;

use crate::error::Error;

/// Mass tolerance when validating that a distribution sums to one.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// x·log2(x) with the continuous extension at zero.
pub(crate) fn xlog2x(x: f64) -> f64 {
    if x > 0.0 {
        x * x.log2()
    } else {
        0.0
    }
}

/// Shannon entropy in bits of an iterator of probabilities.
pub(crate) fn entropy_of<I: IntoIterator<Item = f64>>(probs: I) -> f64 {
    -probs.into_iter().map(xlog2x).sum::<f64>()
}

/// Snap tiny negative rounding residue (within 1e-12 of zero) back to zero;
/// information quantities are nonnegative by definition.
pub(crate) fn snap_nonneg(x: f64) -> f64 {
    if x < 0.0 && x > -1e-12 {
        0.0
    } else {
        x
    }
}

/// Binomial coefficient as a float, exact well past the file counts in use.
pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut out = 1.0;
    for i in 0..k {
        out = out * (n - i) as f64 / (i + 1) as f64;
    }
    out
}

/// Binary entropy -p·log2(p) - (1-p)·log2(1-p).
pub fn binary_entropy(p: f64) -> Result<f64, Error> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(p));
    }
    Ok(-xlog2x(p) - xlog2x(1.0 - p))
}

/// A finite probability mass function over distinct outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf<T> {
    outcomes: Vec<(T, f64)>,
}

impl<T: Eq + Hash> Pmf<T> {
    /// Validates nonnegativity, unit mass, and distinct support entries.
    pub fn new(outcomes: Vec<(T, f64)>) -> Result<Self, Error> {
        let mut total = 0.0;
        for (_, p) in &outcomes {
            if !(0.0..=1.0 + MASS_TOLERANCE).contains(p) {
                return Err(Error::InvalidProbability(*p));
            }
            total += p;
        }
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidMass(total));
        }
        let mut seen = HashSet::with_capacity(outcomes.len());
        if !outcomes.iter().all(|(x, _)| seen.insert(x)) {
            return Err(Error::DuplicateOutcome);
        }
        Ok(Self { outcomes })
    }
}

impl<T> Pmf<T> {
    pub fn entropy(&self) -> f64 {
        entropy_of(self.outcomes.iter().map(|(_, p)| *p))
    }

    pub fn outcomes(&self) -> &[(T, f64)] {
        &self.outcomes
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn probability_of(&self, pred: impl Fn(&T) -> bool) -> f64 {
        self.outcomes
            .iter()
            .filter(|(x, _)| pred(x))
            .map(|(_, p)| *p)
            .sum()
    }
}

/// A joint distribution of a uniformly requested file index (rows) and a
/// finite query alphabet (columns). Row masses are 1/M by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf {
    rows: Vec<Vec<f64>>,
}

impl JointPmf {
    /// Builds the joint from per-row conditional distributions, weighting
    /// each row by 1/M.
    pub fn from_conditionals(conditionals: Vec<Vec<f64>>) -> Result<Self, Error> {
        if conditionals.is_empty() {
            return Err(Error::OutOfRange {
                name: "rows",
                value: 0,
                reason: "a joint distribution needs at least one row",
            });
        }
        let m = conditionals.len();
        let cols = conditionals[0].len();
        let mut rows = Vec::with_capacity(m);
        for cond in &conditionals {
            if cond.len() != cols {
                return Err(Error::DimensionMismatch {
                    name: "row",
                    expected: cols,
                    found: cond.len(),
                });
            }
            let mut total = 0.0;
            for &p in cond {
                if !(0.0..=1.0 + MASS_TOLERANCE).contains(&p) {
                    return Err(Error::InvalidProbability(p));
                }
                total += p;
            }
            if (total - 1.0).abs() > MASS_TOLERANCE {
                return Err(Error::InvalidMass(total));
            }
            rows.push(cond.iter().map(|&p| p / m as f64).collect());
        }
        Ok(Self { rows })
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn column_count(&self) -> usize {
        self.rows[0].len()
    }

    fn row_marginal(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.iter().sum()).collect()
    }

    fn column_marginal(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.column_count()];
        for row in &self.rows {
            for (slot, p) in out.iter_mut().zip(row) {
                *slot += p;
            }
        }
        out
    }

    /// Mutual information H(rows) + H(columns) - H(joint), in bits, snapped
    /// to zero when it lands within 1e-12 below it.
    pub fn mutual_information(&self) -> f64 {
        let h_rows = entropy_of(self.row_marginal());
        let h_cols = entropy_of(self.column_marginal());
        let h_joint = entropy_of(self.rows.iter().flatten().copied());
        let mi = h_rows + h_cols - h_joint;
        if mi < 0.0 && mi > -1e-12 {
            0.0
        } else {
            mi
        }
    }
}

/// Convenience wrapper mirroring [`JointPmf::mutual_information`].
pub fn mutual_information(joint: &JointPmf) -> f64 {
    joint.mutual_information()
}

/// Maximum rate of a perfectly private scheme on n replicated servers
/// storing M files: (1 + 1/n + ... + 1/n^(M-1))^-1.
pub fn pir_capacity(m_count: usize, n_servers: usize) -> Result<f64, Error> {
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
    let n = n_servers as f64;
    let sum: f64 = (0..m_count).map(|i| n.powi(-(i as i32))).sum();
    Ok(1.0 / sum)
}
