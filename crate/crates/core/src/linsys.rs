//! The transmission system
//!
//! ```text
//! ε A_i D_i = ε B_i + (1/(k-1)) Σ_{j≠i} (C_j + D_j) - C_i - D_i,   i = 1..k
//! ```
//!
//! solved directly for `ε > 0`, and through the reduction that eliminates the
//! component with the largest `A_i` for every `ε ≥ 0`. Summing the rows shows
//! `Σ A_i D_i = Σ B_i`; the reduction imposes this identity explicitly, which
//! is what makes `ε = 0` solvable.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaSystem {
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
}

impl LemmaSystem {
    pub fn new(a: Vec<f64>, b: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        let k = a.len();
        if k < 2 {
            return Err(Error::invalid("k", "the system needs k >= 2"));
        }
        if b.len() != k || c.len() != k {
            return Err(Error::invalid("B/C", "A, B and C must have equal length"));
        }
        for (i, &x) in a.iter().enumerate() {
            if !(x.is_finite() && x > 0.0) {
                return Err(Error::invalid(format!("A[{i}]"), "must be finite and > 0"));
            }
        }
        if b.iter().chain(&c).any(|x| !x.is_finite()) {
            return Err(Error::invalid("B/C", "entries must be finite"));
        }
        Ok(LemmaSystem { a, b, c })
    }

    pub fn k(&self) -> usize {
        self.a.len()
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

    /// `D = Σ B_i`, the value of `Σ A_i D_i` for every solution.
    pub fn conserved_sum(&self) -> f64 {
        self.b.iter().sum()
    }

    /// Lowest index attaining `max A_i`.
    fn pivot(&self) -> usize {
        let mut best = 0;
        for (i, &x) in self.a.iter().enumerate() {
            if x > self.a[best] {
                best = i;
            }
        }
        best
    }

    /// `(1/(k-1)) Σ_{j≠i} C_j - C_i` for each row.
    fn c_forcing(&self) -> Vec<f64> {
        let k = self.k();
        let km1 = (k - 1) as f64;
        let total: f64 = self.c.iter().sum();
        self.c
            .iter()
            .map(|&ci| (total - ci) / km1 - ci)
            .collect()
    }

    /// Row residuals `ε A_i D_i - ε B_i - (1/(k-1)) Σ_{j≠i}(C_j+D_j) + C_i + D_i`.
    pub fn residual(&self, d: &[f64], eps: f64) -> Vec<f64> {
        let k = self.k();
        let km1 = (k - 1) as f64;
        let sum_cd: f64 = self.c.iter().zip(d).map(|(c, d)| c + d).sum();
        (0..k)
            .map(|i| {
                let others = (sum_cd - self.c[i] - d[i]) / km1;
                eps * self.a[i] * d[i] - eps * self.b[i] - others + self.c[i] + d[i]
            })
            .collect()
    }
}

fn lu_solve(m: DMatrix<f64>, rhs: DVector<f64>, context: &str) -> Result<Vec<f64>> {
    let x = m.lu().solve(&rhs).ok_or_else(|| Error::Singular {
        context: context.into(),
    })?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular {
            context: context.into(),
        });
    }
    Ok(x.iter().copied().collect())
}

/// Dense LU solve of the full `k × k` system. Requires `ε > 0`.
pub fn solve_direct(sys: &LemmaSystem, eps: f64) -> Result<Vec<f64>> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::invalid("epsilon", "the direct solver needs epsilon > 0"));
    }
    let k = sys.k();
    let off = -1.0 / (k - 1) as f64;
    let forcing = sys.c_forcing();
    let m = DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            eps * sys.a[i] + 1.0
        } else {
            off
        }
    });
    let rhs = DVector::from_fn(k, |i, _| eps * sys.b[i] + forcing[i]);
    lu_solve(m, rhs, "lemma system (direct)")
}

struct Reduced {
    pivot: usize,
    rest: Vec<usize>,
    m: Vec<f64>,
}

impl Reduced {
    fn new(sys: &LemmaSystem, eps: f64) -> Self {
        let pivot = sys.pivot();
        let rest: Vec<usize> = (0..sys.k()).filter(|&i| i != pivot).collect();
        let km1 = (sys.k() - 1) as f64;
        let ak = sys.a[pivot];
        let m = rest
            .iter()
            .map(|&i| 1.0 + eps * sys.a[i] + sys.a[i] / (km1 * ak))
            .collect();
        Reduced { pivot, rest, m }
    }
}

/// Solve through the reduced `(k-1)`-dimensional system `(I - O_ε) x = E(ε)`,
/// then recover the eliminated component from `Σ A_i D_i = Σ B_i`.
/// Valid for every `ε ≥ 0`; at `ε = 0` this is the limit of the solutions.
pub fn solve_reduced(sys: &LemmaSystem, eps: f64) -> Result<Vec<f64>> {
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(Error::invalid("epsilon", "must be finite and >= 0"));
    }
    let k = sys.k();
    let km1 = (k - 1) as f64;
    let red = Reduced::new(sys, eps);
    let ak = sys.a[red.pivot];
    let total = sys.conserved_sum();
    let forcing = sys.c_forcing();
    let n = k - 1;

    // Rows scaled by m_i: the unit diagonal makes O_ε visible as the
    // off-diagonal block.
    let mat = DMatrix::from_fn(n, n, |r, s| {
        if r == s {
            1.0
        } else {
            -(1.0 - sys.a[red.rest[s]] / ak) / (km1 * red.m[r])
        }
    });
    let rhs = DVector::from_fn(n, |r, _| {
        let i = red.rest[r];
        (eps * sys.b[i] + forcing[i] + total / (km1 * ak)) / red.m[r]
    });
    let x = lu_solve(mat, rhs, "lemma system (reduced)")?;

    let mut d = alloc::vec![0.0; k];
    let mut weighted = 0.0;
    for (r, &i) in red.rest.iter().enumerate() {
        d[i] = x[r];
        weighted += sys.a[i] * x[r];
    }
    d[red.pivot] = (total - weighted) / ak;
    Ok(d)
}

/// Max-norm of the reduction operator `O_ε`:
/// `max_i (1/((k-1) m_i(ε))) Σ_{j∈L, j≠i} (1 - A_j/A_max)`.
pub fn contraction_norm(sys: &LemmaSystem, eps: f64) -> f64 {
    let red = Reduced::new(sys, eps);
    let km1 = (sys.k() - 1) as f64;
    let ak = sys.a[red.pivot];
    let slack: f64 = red.rest.iter().map(|&j| 1.0 - sys.a[j] / ak).sum();
    red.rest
        .iter()
        .zip(&red.m)
        .map(|(&i, &mi)| (slack - (1.0 - sys.a[i] / ak)) / (km1 * mi))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn sys(a: &[f64], b: &[f64], c: &[f64]) -> LemmaSystem {
        LemmaSystem::new(a.to_vec(), b.to_vec(), c.to_vec()).unwrap()
    }

    #[test]
    fn symmetric_data() {
        let s = sys(&[2.0; 4], &[3.0; 4], &[-1.5; 4]);
        for eps in [1e-3, 0.5, 7.0] {
            for d in solve_direct(&s, eps).unwrap() {
                assert_abs_diff_eq!(d, 1.5, epsilon = 1e-13);
            }
            for d in solve_reduced(&s, eps).unwrap() {
                assert_abs_diff_eq!(d, 1.5, epsilon = 1e-13);
            }
        }
        for d in solve_reduced(&s, 0.0).unwrap() {
            assert_abs_diff_eq!(d, 1.5, epsilon = 1e-13);
        }
    }

    #[test]
    fn zero_data() {
        let s = sys(&[1.0, 2.0, 3.0], &[0.0; 3], &[0.0; 3]);
        assert_eq!(solve_direct(&s, 1.0).unwrap(), vec![0.0; 3]);
        assert!(solve_reduced(&s, 0.0).unwrap().iter().all(|&d| d == 0.0));
    }

    #[test]
    fn two_edge_hand_solution() {
        // D_1 + D_2 = 1 and (1 + ε) D_2 = D_1, so D_2 = 1/(ε + 2).
        let s = sys(&[1.0, 1.0], &[1.0, 0.0], &[0.0, 0.0]);
        let d = solve_direct(&s, 1.0).unwrap();
        assert_abs_diff_eq!(d[0], 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d[1], 1.0 / 3.0, epsilon = 1e-15);
        let d = solve_reduced(&s, 1.0).unwrap();
        assert_abs_diff_eq!(d[0], 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d[1], 1.0 / 3.0, epsilon = 1e-15);
        let d = solve_reduced(&s, 0.0).unwrap();
        assert_abs_diff_eq!(d[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(d[1], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn contraction_examples() {
        assert_eq!(contraction_norm(&sys(&[3.0; 5], &[1.0; 5], &[0.0; 5]), 0.0), 0.0);
        assert_eq!(contraction_norm(&sys(&[1.0, 9.0], &[1.0; 2], &[0.0; 2]), 0.0), 0.0);
        // A = (1, 2, 4): m = (1 + 1/8, 1 + 2/8); rows give 0.5/2.25 and 0.75/2.5.
        let norm = contraction_norm(&sys(&[1.0, 2.0, 4.0], &[0.0; 3], &[0.0; 3]), 0.0);
        assert_abs_diff_eq!(norm, 0.3, epsilon = 1e-15);
    }

    #[test]
    fn pivot_ties_take_lowest_index() {
        let s = sys(&[1.0, 4.0, 4.0], &[1.0, 2.0, 3.0], &[0.5, 0.0, -0.5]);
        assert_eq!(s.pivot(), 1);
        let d0 = solve_direct(&s, 0.3).unwrap();
        let d1 = solve_reduced(&s, 0.3).unwrap();
        for (x, y) in d0.iter().zip(&d1) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-13);
        }
    }

    #[test]
    fn direct_rejects_zero_epsilon() {
        let s = sys(&[1.0, 1.0], &[1.0, 0.0], &[0.0, 0.0]);
        assert!(solve_direct(&s, 0.0).is_err());
    }

    fn arb_system() -> impl Strategy<Value = LemmaSystem> {
        (2usize..9).prop_flat_map(|k| {
            (
                proptest::collection::vec(1e-3f64..=10.0, k),
                proptest::collection::vec(-10.0f64..=10.0, k),
                proptest::collection::vec(-10.0f64..=10.0, k),
            )
                .prop_map(|(a, b, c)| LemmaSystem::new(a, b, c).unwrap())
        })
    }

    fn max_abs_diff(x: &[f64], y: &[f64]) -> f64 {
        x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn solvers_agree_and_conserve(s in arb_system(), eps in 1e-6f64..=10.0) {
            let d = solve_direct(&s, eps).unwrap();
            let r = solve_reduced(&s, eps).unwrap();
            prop_assert!(max_abs_diff(&d, &r) <= 1e-8);
            let scale = 1.0 + s.b().iter().chain(s.c()).fold(0.0f64, |m, x| m.max(x.abs()));
            for res in s.residual(&d, eps) {
                prop_assert!(res.abs() <= 1e-10 * scale);
            }
            let conserved: f64 = s.a().iter().zip(&r).map(|(a, d)| a * d).sum();
            prop_assert!((conserved - s.conserved_sum()).abs() <= 1e-10 * scale);
        }

        #[test]
        fn reduction_contracts(s in arb_system(), eps in 0.0f64..=10.0) {
            let norm = contraction_norm(&s, eps);
            let km1 = (s.k() - 1) as f64;
            prop_assert!(norm < 1.0);
            prop_assert!(norm < (km1 - 1.0).max(0.0) / km1 + 1e-15 || s.k() == 2);
        }
    }

    proptest! {
        #[test]
        fn limit_is_approached_linearly(s in arb_system()) {
            let d0 = solve_reduced(&s, 0.0).unwrap();
            let mut pts = Vec::new();
            for m in 1..=20 {
                let eps = libm::ldexp(1.0, -m);
                let gap = max_abs_diff(&solve_reduced(&s, eps).unwrap(), &d0);
                if gap > 1e-13 {
                    pts.push((libm::log(eps), libm::log(gap)));
                }
            }
            if pts.len() >= 10 {
                let n = pts.len() as f64;
                let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
                let (mx, my) = (sx / n, sy / n);
                let num: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
                let den: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
                prop_assert!(num / den >= 0.9);
            }
        }
    }
}
