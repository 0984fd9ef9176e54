//! Parameter sets of the two generators and the limit map between them.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Transmission parameters `(a_i, b_i, c_i)` of the snapping-out generator.
///
/// `a` controls stickiness, `b` weights the flux and `c` is the membrane
/// permeability. All `c_i` must be strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct Parameters {
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
}

impl Parameters {
    pub fn new(a: Vec<f64>, b: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        let k = c.len();
        if k < 2 {
            return Err(Error::invalid("k", "a star needs at least two edges"));
        }
        if a.len() != k {
            return Err(Error::invalid("a", format!("expected {k} entries, got {}", a.len())));
        }
        if b.len() != k {
            return Err(Error::invalid("b", format!("expected {k} entries, got {}", b.len())));
        }
        for i in 0..k {
            if !(a[i].is_finite() && a[i] >= 0.0) {
                return Err(Error::invalid(format!("a[{i}]"), "must be finite and >= 0"));
            }
            if !(b[i].is_finite() && b[i] > 0.0) {
                return Err(Error::invalid(format!("b[{i}]"), "must be finite and > 0"));
            }
            if !(c[i].is_finite() && c[i] > 0.0) {
                return Err(Error::invalid(format!("c[{i}]"), "must be finite and > 0"));
            }
        }
        Ok(Parameters { a, b, c })
    }

    /// `a = 0`, `b = 1`: the pure snapping-out case driven by `c` alone.
    pub fn snapping(c: Vec<f64>) -> Result<Self> {
        let k = c.len();
        Self::new(alloc::vec![0.0; k], alloc::vec![1.0; k], c)
    }

    pub fn k(&self) -> usize {
        self.c.len()
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn is_non_sticky(&self) -> bool {
        self.a.iter().all(|&a| a == 0.0)
    }

    /// `a = 0` and `b = 1` on every edge.
    pub fn is_pure_snapping(&self) -> bool {
        self.is_non_sticky() && self.b.iter().all(|&b| b == 1.0)
    }
}

/// Parameters `(β, α_1, ..., α_k)` of Walsh's spider with a sticky center.
#[derive(Debug, Clone, PartialEq)]
pub struct WalshParameters {
    beta: f64,
    alpha: Vec<f64>,
}

impl WalshParameters {
    pub fn new(beta: f64, alpha: Vec<f64>) -> Result<Self> {
        let k = alpha.len();
        if k < 2 {
            return Err(Error::invalid("k", "a star needs at least two edges"));
        }
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(Error::invalid("beta", "must be finite and >= 0"));
        }
        for (i, &a) in alpha.iter().enumerate() {
            if !(a.is_finite() && a >= 0.0) {
                return Err(Error::invalid(format!("alpha[{i}]"), "must be finite and >= 0"));
            }
        }
        let total = beta + alpha.iter().sum::<f64>();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(
                "alpha",
                format!("beta + sum(alpha) = {total}, expected 1"),
            ));
        }
        Ok(WalshParameters { beta, alpha })
    }

    pub fn k(&self) -> usize {
        self.alpha.len()
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }
}

/// The limit of the snapping-out parameters as all `c_i` are scaled by `1/ε`:
/// `α_i = d b_i / c_i`, `β = d Σ a_j / c_j`, `d = 1 / Σ (a_j + b_j) / c_j`.
pub fn walsh_limit_params(p: &Parameters) -> WalshParameters {
    let k = p.k();
    let weights: Vec<f64> = (0..k).map(|i| (p.a[i] + p.b[i]) / p.c[i]).collect();
    let d = 1.0 / weights.iter().sum::<f64>();
    let mut alpha: Vec<f64> = (0..k).map(|i| d * p.b[i] / p.c[i]).collect();
    let beta_raw: f64 = (0..k).map(|i| d * p.a[i] / p.c[i]).sum();
    // Absorb rounding so the normalization holds to the last bit we can get.
    let total = beta_raw + alpha.iter().sum::<f64>();
    let beta = beta_raw / total;
    for a in &mut alpha {
        *a /= total;
    }
    WalshParameters { beta, alpha }
}

/// `p(ε)`: the same `a`, `b` with `c_i ↦ c_i / ε`.
pub fn scale_permeability(p: &Parameters, eps: f64) -> Result<Parameters> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::invalid("epsilon", "must be finite and > 0"));
    }
    Ok(Parameters {
        a: p.a.clone(),
        b: p.b.clone(),
        c: p.c.iter().map(|c| c / eps).collect(),
    })
}
