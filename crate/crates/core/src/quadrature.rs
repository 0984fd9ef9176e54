//! Gauss rules from the Golub–Welsch eigenvalue method.

use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::math::sqrt;

/// Nodes and weights of an `n`-point Gauss rule, nodes ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

fn golub_welsch(diag: &[f64], off: &[f64], mu0: f64) -> GaussRule {
    let n = diag.len();
    let mut j = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        j[(i, i)] = diag[i];
        if i + 1 < n {
            j[(i, i + 1)] = off[i];
            j[(i + 1, i)] = off[i];
        }
    }
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|m| {
            let v0 = eig.eigenvectors[(0, m)];
            (eig.eigenvalues[m], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    GaussRule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

/// Gauss–Hermite rule for `∫ e^{-u^2} φ(u) du` over the real line.
pub fn gauss_hermite(n: usize) -> GaussRule {
    let off: Vec<f64> = (1..n).map(|m| sqrt(m as f64 / 2.0)).collect();
    let mut rule = golub_welsch(&alloc::vec![0.0; n], &off, sqrt(core::f64::consts::PI));
    symmetrize(&mut rule);
    rule
}

/// Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> GaussRule {
    let off: Vec<f64> = (1..n)
        .map(|m| {
            let m = m as f64;
            m / sqrt(4.0 * m * m - 1.0)
        })
        .collect();
    let mut rule = golub_welsch(&alloc::vec![0.0; n], &off, 2.0);
    symmetrize(&mut rule);
    rule
}

/// Enforce the exact mirror symmetry of rules with an even weight.
fn symmetrize(rule: &mut GaussRule) {
    let n = rule.nodes.len();
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
        let w = 0.5 * (rule.weights[i] + rule.weights[j]);
        rule.nodes[i] = -x;
        rule.nodes[j] = x;
        rule.weights[i] = w;
        rule.weights[j] = w;
    }
    if n % 2 == 1 {
        rule.nodes[n / 2] = 0.0;
    }
}
