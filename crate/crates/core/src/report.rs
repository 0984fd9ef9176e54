//! Tabular results of the `ε → 0` sweeps.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepKind {
    /// Resolvent distance to the Walsh resolvent, data continuous at the center.
    Resolvent,
    /// Resolvent coefficients `D_i(ε)` for data that is not continuous at the center.
    ResolventCoefficients,
    Semigroup,
    Cosine,
    /// Cauchy gaps of the cosine families between consecutive `ε`.
    CosineDivergence,
}

impl SweepKind {
    pub fn name(&self) -> &'static str {
        match self {
            SweepKind::Resolvent => "resolvent",
            SweepKind::ResolventCoefficients => "resolvent-coefficients",
            SweepKind::Semigroup => "semigroup",
            SweepKind::Cosine => "cosine",
            SweepKind::CosineDivergence => "cosine-divergence",
        }
    }
}

/// One row per `ε`, in strictly decreasing `ε` order. The first column is
/// always `epsilon`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    kind: SweepKind,
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl ConvergenceReport {
    pub fn new<S: ToString>(kind: SweepKind, value_columns: &[S]) -> Self {
        let mut columns = Vec::with_capacity(value_columns.len() + 1);
        columns.push("epsilon".to_string());
        columns.extend(value_columns.iter().map(ToString::to_string));
        ConvergenceReport {
            kind,
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, eps: f64, values: &[f64]) -> Result<()> {
        if values.len() + 1 != self.columns.len() {
            return Err(Error::invalid(
                "row",
                format!("expected {} values, got {}", self.columns.len() - 1, values.len()),
            ));
        }
        if let Some(last) = self.rows.last() {
            if !(eps < last[0]) {
                return Err(Error::invalid("epsilon", "rows must have decreasing epsilon"));
            }
        }
        if !eps.is_finite() || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::guard(format!("non-finite entry in sweep row at epsilon = {eps}")));
        }
        let mut row = Vec::with_capacity(self.columns.len());
        row.push(eps);
        row.extend_from_slice(values);
        self.rows.push(row);
        Ok(())
    }

    pub fn kind(&self) -> SweepKind {
        self.kind
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn epsilons(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r[0]).collect()
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }
}

/// True if every entry is strictly below its predecessor.
pub fn strictly_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

pub(crate) fn check_epsilons(eps: &[f64]) -> Result<()> {
    if eps.is_empty() {
        return Err(Error::invalid("epsilons", "need at least one value"));
    }
    for (i, &e) in eps.iter().enumerate() {
        if !(e.is_finite() && e > 0.0) {
            return Err(Error::invalid(format!("epsilons[{i}]"), "must be finite and > 0"));
        }
    }
    if !strictly_decreasing(eps) {
        return Err(Error::invalid("epsilons", "must be strictly decreasing"));
    }
    Ok(())
}
