//! The jump chain at the center: `q_ii = -c_i`, `q_ij = c_i/(k-1)`.
//!
//! The chain is reversible with invariant law `α_i ∝ 1/c_i`, so
//! `S = D^{1/2} Q D^{-1/2}` (with `D = diag α`) is symmetric and
//! `e^{tQ} = P e^{tΛ} P^{-1}` with `P = D^{-1/2} V`, `P^{-1} = V^T D^{1/2}`
//! is available for every `t` from a single eigendecomposition.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::math::{exp, sqrt};

/// Eigenvalues of `-Q₀` closer than this to zero count as the stationary one.
pub const STATIONARY_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct ChainSpectrum {
    c: Vec<f64>,
    q: DMatrix<f64>,
    cmax: f64,
    alpha: Vec<f64>,
    omega: f64,
    m: f64,
    m0: f64,
    /// Eigenvalues of `Q` (all `<= 0`), ascending order of `-μ`.
    mu: Vec<f64>,
    p: DMatrix<f64>,
    p_inv: DMatrix<f64>,
}

/// Minimum slack (bound minus observed) of each mixing estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixingSlack {
    /// `|p⁰_ij(t) - α_j| <= e^{-ωt} √(c_i/c_j)` for the normalized chain.
    pub normalized: f64,
    /// `|p_ij(t) - α_j| <= e^{-c ω t} √(c_i/c_j)`.
    pub transition: f64,
    /// Entrywise bound on `p'_ij(t)`.
    pub derivative: f64,
    /// `‖e^{tQ} Q‖ <= c M₀ e^{-c ω t}` in the max-row-sum norm.
    pub operator: f64,
}

impl MixingSlack {
    pub fn min(&self) -> f64 {
        self.normalized
            .min(self.transition)
            .min(self.derivative)
            .min(self.operator)
    }
}

pub fn build_chain(c: &[f64]) -> Result<ChainSpectrum> {
    let k = c.len();
    if k < 2 {
        return Err(Error::invalid("k", "a star needs at least two edges"));
    }
    for (i, &ci) in c.iter().enumerate() {
        if !(ci.is_finite() && ci > 0.0) {
            return Err(Error::invalid(format!("c[{i}]"), "must be finite and > 0"));
        }
    }
    let km1 = (k - 1) as f64;
    let cmax = c.iter().copied().fold(0.0, f64::max);
    let q = DMatrix::from_fn(k, k, |i, j| if i == j { -c[i] } else { c[i] / km1 });

    let inv_total: f64 = c.iter().map(|x| 1.0 / x).sum();
    let alpha: Vec<f64> = c.iter().map(|x| 1.0 / x / inv_total).collect();

    let s = DMatrix::from_fn(k, k, |i, j| sqrt(alpha[i] / alpha[j]) * q[(i, j)]);
    let (mu, v) = deflated_eigen(&s, &alpha);

    let omega = mu[1..].iter().map(|&m| -m / cmax).fold(f64::INFINITY, f64::min);
    if !(omega > STATIONARY_TOL) {
        return Err(Error::guard(format!(
            "expected a simple stationary eigenvalue, spectral gap is {omega:e}"
        )));
    }

    let p = DMatrix::from_fn(k, k, |i, m| v[(i, m)] / sqrt(alpha[i]));
    let p_inv = DMatrix::from_fn(k, k, |m, j| v[(j, m)] * sqrt(alpha[j]));

    let inner: Vec<f64> = (0..k).map(|i| derivative_profile(c, i)).collect();
    let m0 = inner.iter().copied().fold(0.0, f64::max);
    let m = 1.0
        + 2.0
            * (0..k)
                .map(|i| c[i] / (cmax * omega) * inner[i])
                .fold(0.0, f64::max);

    Ok(ChainSpectrum {
        c: c.to_vec(),
        q,
        cmax,
        alpha,
        omega,
        m,
        m0,
        mu,
        p,
        p_inv,
    })
}

/// Eigen-decomposition of the symmetrized generator with the stationary
/// vector `√α` imposed exactly: a Householder reflection maps it to `e_0`,
/// and only the complementary block is diagonalized. Row sums of `e^{tQ}`
/// then stay at one to rounding, however spread out `c` is.
fn deflated_eigen(s: &DMatrix<f64>, alpha: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let k = alpha.len();
    let mut w = DVector::from_fn(k, |i, _| sqrt(alpha[i]));
    w[0] += w.norm();
    let h = DMatrix::identity(k, k) - (&w * w.transpose()) * (2.0 / w.norm_squared());
    let hsh = &h * s * &h;
    let block = hsh.view((1, 1), (k - 1, k - 1)).into_owned();
    let block = (&block + block.transpose()) * 0.5;
    let eig = SymmetricEigen::new(block);

    let mut order: Vec<usize> = (0..k - 1).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));
    let mut mu = Vec::with_capacity(k);
    mu.push(0.0);
    mu.extend(order.iter().map(|&m| eig.eigenvalues[m]));
    let mut basis = DMatrix::<f64>::zeros(k, k);
    basis[(0, 0)] = 1.0;
    for (col, &m) in order.iter().enumerate() {
        for r in 0..k - 1 {
            basis[(r + 1, col + 1)] = eig.eigenvectors[(r, m)];
        }
    }
    (mu, h * basis)
}

/// `√(c_i/c_j) + (1/(k-1)) Σ_{ℓ≠i} √(c_ℓ/c_j)` for one `(i, j)`.
fn derivative_weight(c: &[f64], i: usize, j: usize) -> f64 {
    let km1 = (c.len() - 1) as f64;
    let others: f64 = (0..c.len())
        .filter(|&l| l != i)
        .map(|l| sqrt(c[l] / c[j]))
        .sum();
    sqrt(c[i] / c[j]) + others / km1
}

/// `Σ_j derivative_weight(c, i, j)`.
fn derivative_profile(c: &[f64], i: usize) -> f64 {
    (0..c.len()).map(|j| derivative_weight(c, i, j)).sum()
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("t", "must be finite and >= 0"))
    }
}

impl ChainSpectrum {
    pub fn k(&self) -> usize {
        self.c.len()
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn cmax(&self) -> f64 {
        self.cmax
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Bound on the norm of the image extension and of the cosine family.
    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn m0(&self) -> f64 {
        self.m0
    }

    /// Eigenvalues of `Q`, starting with the stationary one.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.mu
    }

    /// Right eigenvectors of `Q` as columns.
    pub fn modes(&self) -> &DMatrix<f64> {
        &self.p
    }

    /// Inverse of [`modes`](Self::modes).
    pub fn modes_inverse(&self) -> &DMatrix<f64> {
        &self.p_inv
    }

    fn spectral(&self, t: f64, power: bool) -> DMatrix<f64> {
        let k = self.k();
        let mut scaled = self.p.clone();
        for m in 0..k {
            let mut w = exp(self.mu[m] * t);
            if power {
                w *= self.mu[m];
            }
            scaled.column_mut(m).scale_mut(w);
        }
        scaled * &self.p_inv
    }

    /// `e^{tQ}`.
    pub fn transition_matrix(&self, t: f64) -> Result<DMatrix<f64>> {
        check_time(t)?;
        if t == 0.0 {
            return Ok(DMatrix::identity(self.k(), self.k()));
        }
        Ok(self.spectral(t, false))
    }

    /// `Q e^{tQ}`.
    pub fn derivative_matrix(&self, t: f64) -> Result<DMatrix<f64>> {
        check_time(t)?;
        if t == 0.0 {
            return Ok(self.q.clone());
        }
        Ok(self.spectral(t, true))
    }

    /// `e^{tQ} u`.
    pub fn propagate(&self, t: f64, u: &[f64]) -> Result<Vec<f64>> {
        let e = self.transition_matrix(t)?;
        Ok((e * DVector::from_column_slice(u)).iter().copied().collect())
    }

    /// Entrywise bound on `|p'_ij(t)|`.
    pub fn derivative_bound(&self, i: usize, j: usize, t: f64) -> f64 {
        self.c[i] * exp(-self.cmax * self.omega * t) * derivative_weight(&self.c, i, j)
    }

    /// Bound on `∫_0^∞ |p'_ij(t)| dt`.
    pub fn derivative_integral_bound(&self, i: usize, j: usize) -> f64 {
        self.c[i] / (self.cmax * self.omega) * derivative_weight(&self.c, i, j)
    }

    /// Minimum slack of every mixing estimate over `times`. All of them must
    /// be non-negative up to rounding.
    pub fn check_mixing_bounds(&self, times: &[f64]) -> Result<MixingSlack> {
        let k = self.k();
        let mut slack = MixingSlack {
            normalized: f64::INFINITY,
            transition: f64::INFINITY,
            derivative: f64::INFINITY,
            operator: f64::INFINITY,
        };
        for &t in times {
            check_time(t)?;
            let decay = exp(-self.cmax * self.omega * t);
            let p = self.transition_matrix(t)?;
            // p⁰(t) = p(t / c).
            let p0 = self.transition_matrix(t / self.cmax)?;
            let dp = self.derivative_matrix(t)?;
            for i in 0..k {
                let mut row = 0.0;
                for j in 0..k {
                    let ratio = sqrt(self.c[i] / self.c[j]);
                    slack.normalized = slack
                        .normalized
                        .min(exp(-self.omega * t) * ratio - (p0[(i, j)] - self.alpha[j]).abs());
                    slack.transition = slack
                        .transition
                        .min(decay * ratio - (p[(i, j)] - self.alpha[j]).abs());
                    slack.derivative = slack
                        .derivative
                        .min(self.derivative_bound(i, j, t) - dp[(i, j)].abs());
                    row += dp[(i, j)].abs();
                }
                slack.operator = slack.operator.min(self.cmax * self.m0 * decay - row);
            }
        }
        Ok(slack)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn uniform_closed_forms() {
        for k in 2..=8 {
            let ch = build_chain(&vec![1.0; k]).unwrap();
            let kf = k as f64;
            assert_abs_diff_eq!(ch.omega(), kf / (kf - 1.0), epsilon = 1e-10);
            assert_abs_diff_eq!(ch.m(), 1.0 + 4.0 * (kf - 1.0), epsilon = 1e-9);
            for a in ch.alpha() {
                assert_abs_diff_eq!(*a, 1.0 / kf, epsilon = 1e-15);
            }
        }
        let ch = build_chain(&[1.0; 3]).unwrap();
        assert_abs_diff_eq!(ch.omega(), 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(ch.m(), 9.0, epsilon = 1e-12);
    }

    #[test]
    fn uniform_transition_closed_form() {
        let ch = build_chain(&[1.0; 3]).unwrap();
        for t in [0.0, 0.1, 0.7, 3.0] {
            let p = ch.transition_matrix(t).unwrap();
            let dp = ch.derivative_matrix(t).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    let delta = if i == j { 1.0 } else { 0.0 };
                    let want = 1.0 / 3.0 + (delta - 1.0 / 3.0) * exp(-1.5 * t);
                    assert_abs_diff_eq!(p[(i, j)], want, epsilon = 1e-10);
                    let dwant = -1.5 * (delta - 1.0 / 3.0) * exp(-1.5 * t);
                    assert_abs_diff_eq!(dp[(i, j)], dwant, epsilon = 1e-10);
                }
            }
        }
    }

    #[test]
    fn invariant_law_matches_limit_map() {
        let ch = build_chain(&[1.0, 2.0, 4.0]).unwrap();
        for (a, want) in ch.alpha().iter().zip([4.0 / 7.0, 2.0 / 7.0, 1.0 / 7.0]) {
            assert_abs_diff_eq!(*a, want, epsilon = 1e-15);
        }
    }

    #[test]
    fn m_is_scale_free() {
        let c = [1.0, 2.0, 4.0, 0.3];
        let base = build_chain(&c).unwrap();
        for r in [0.1, 10.0] {
            let scaled: Vec<f64> = c.iter().map(|x| x * r).collect();
            let ch = build_chain(&scaled).unwrap();
            assert_abs_diff_eq!(ch.m(), base.m(), epsilon = 1e-12 * base.m());
            assert_abs_diff_eq!(ch.omega(), base.omega(), epsilon = 1e-12);
        }
    }

    #[test]
    fn endpoints() {
        let ch = build_chain(&[1.0, 2.0, 4.0]).unwrap();
        assert_eq!(ch.transition_matrix(0.0).unwrap(), DMatrix::identity(3, 3));
        assert_eq!(ch.derivative_matrix(0.0).unwrap(), ch.q().clone());
        assert!(ch.transition_matrix(-1.0).is_err());
        assert!(build_chain(&[1.0, 0.0]).is_err());
        let slack = ch.check_mixing_bounds(&[0.0]).unwrap();
        assert!(slack.min() >= 0.0);
    }

    #[test]
    fn derivative_integral_bound_holds() {
        // Simpson in t on [0, 40/(cω)], fine enough for the exponential modes.
        let ch = build_chain(&[1.0, 2.0, 4.0]).unwrap();
        let t_end = 40.0 / (ch.cmax() * ch.omega());
        let n = 4000;
        let h = t_end / n as f64;
        let mut acc = DMatrix::<f64>::zeros(3, 3);
        for s in 0..=n {
            let w = if s == 0 || s == n {
                1.0
            } else if s % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc += ch.derivative_matrix(s as f64 * h).unwrap().abs() * (w * h / 3.0);
        }
        for i in 0..3 {
            for j in 0..3 {
                assert!(acc[(i, j)] <= ch.derivative_integral_bound(i, j) * (1.0 + 1e-6));
            }
        }
    }

    fn arb_c() -> impl Strategy<Value = Vec<f64>> {
        (2usize..9).prop_flat_map(|k| proptest::collection::vec(0.05f64..20.0, k))
    }

    proptest! {
        #[test]
        fn chain_invariants(c in arb_c(), s in 0.0f64..3.0, t in 0.0f64..3.0) {
            let ch = build_chain(&c).unwrap();
            let k = c.len();
            let q = ch.q();
            for i in 0..k {
                let row: f64 = q.row(i).iter().sum();
                prop_assert!(row.abs() <= 1e-12 * ch.cmax());
                let flux: f64 = (0..k).map(|j| ch.alpha()[j] * q[(j, i)]).sum();
                prop_assert!(flux.abs() <= 1e-12);
                for j in 0..k {
                    let db = ch.alpha()[i] * q[(i, j)] - ch.alpha()[j] * q[(j, i)];
                    prop_assert!(db.abs() <= 1e-12);
                }
            }
            prop_assert!(ch.omega() > 0.0);

            let ps = ch.transition_matrix(s).unwrap();
            let pt = ch.transition_matrix(t).unwrap();
            let pst = ch.transition_matrix(s + t).unwrap();
            prop_assert!((&ps * &pt - &pst).amax() <= 1e-10);
            for i in 0..k {
                prop_assert!((pt.row(i).sum() - 1.0).abs() <= 1e-10);
                prop_assert!(pt.row(i).min() >= -1e-12);
                let stat: f64 = (0..k).map(|j| ch.alpha()[j] * pt[(j, i)]).sum();
                prop_assert!((stat - ch.alpha()[i]).abs() <= 1e-10);
            }
            // p_ij(t) = p⁰_ij(c t) for the chain normalized by c.
            let unit: Vec<f64> = c.iter().map(|x| x / ch.cmax()).collect();
            let p0 = build_chain(&unit).unwrap().transition_matrix(ch.cmax() * t).unwrap();
            prop_assert!((p0 - &pt).amax() <= 1e-10);
        }

        #[test]
        fn mixing_bounds_hold(c in arb_c()) {
            let ch = build_chain(&c).unwrap();
            let times: Vec<f64> = (0..100).map(|n| 0.05 * n as f64 / ch.cmax() * 3.0).collect();
            prop_assert!(ch.check_mixing_bounds(&times).unwrap().min() >= -1e-10);
        }
    }
}
