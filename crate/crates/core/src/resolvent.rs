//! Resolvents `f = (λ - A)^{-1} g` of the snapping-out and Walsh generators.
//!
//! On every edge the solution of `λ f - f'' = g` that stays bounded is
//!
//! ```text
//! f_i(x) = D_i e^{-s x} + (1/(2s)) ∫_0^∞ e^{-s|x-y|} g_i(y) dy,   s = √λ,
//! ```
//!
//! so `f_i(0) = C_i + D_i` with `C_i = (1/(2s)) ∫ e^{-s y} g_i(y) dy` and
//! `f_i'(0) = s (C_i - D_i)`. The boundary conditions at the center only
//! determine the `D_i`. The convolution is evaluated in this bounded form
//! (never as a difference of growing exponentials) and is integrated exactly
//! against the piecewise-linear `g`, with the constant tail beyond `L` in
//! closed form.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{GridFunction, GridSpec, StarFunction, CENTER_TOL};
use crate::linsys::{self, LemmaSystem};
use crate::math::{exp, first_moment_kernel, one_minus_exp_over, sqrt};
use crate::params::{scale_permeability, walsh_limit_params, Parameters, WalshParameters};
use crate::report::{check_epsilons, ConvergenceReport, SweepKind};

/// Largest admissible `√λ h`; beyond it the grid no longer resolves the
/// boundary layer `e^{-√λ x}`.
pub const MAX_KERNEL_STEP: f64 = 1.0;

/// Left and right exponential moments of one edge function at every node:
/// `left_j = ∫_0^{x_j} e^{-s(x_j-y)} g`, `right_j = ∫_{x_j}^∞ e^{-s(y-x_j)} g`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct KernelTable {
    s: f64,
    left: Vec<f64>,
    right: Vec<f64>,
}

/// `∫_0^δ e^{-sτ} (a + b τ) dτ`.
#[inline]
fn segment(s: f64, delta: f64, a: f64, b: f64) -> f64 {
    let x = s * delta;
    a * delta * one_minus_exp_over(x) + b * delta * delta * first_moment_kernel(x)
}

impl KernelTable {
    pub(crate) fn new(s: f64, g: &GridFunction) -> Self {
        let spec = g.spec();
        let n = spec.intervals();
        let h = spec.step();
        let v = g.values();
        let decay = exp(-s * h);
        let i0 = h * one_minus_exp_over(s * h);
        let i1 = h * h * first_moment_kernel(s * h);

        let mut left = vec![0.0; n + 1];
        for j in 0..n {
            let slope = (v[j + 1] - v[j]) / h;
            left[j + 1] = decay * left[j] + v[j + 1] * i0 - slope * i1;
        }
        let mut right = vec![0.0; n + 1];
        right[n] = g.tail() / s;
        for j in (0..n).rev() {
            let slope = (v[j + 1] - v[j]) / h;
            right[j] = decay * right[j + 1] + v[j] * i0 + slope * i1;
        }
        KernelTable { s, left, right }
    }

    /// `C = (1/(2s)) ∫ e^{-s y} g(y) dy`.
    pub(crate) fn c_coef(&self) -> f64 {
        self.right[0] / (2.0 * self.s)
    }

    /// `(1/(2s)) ∫ e^{-s|x-y|} g(y) dy` at node `j`.
    #[inline]
    pub(crate) fn at_node(&self, j: usize) -> f64 {
        (self.left[j] + self.right[j]) / (2.0 * self.s)
    }

    /// The same convolution at any `x >= 0`.
    pub(crate) fn at(&self, g: &GridFunction, x: f64) -> f64 {
        let s = self.s;
        let spec = g.spec();
        let n = spec.intervals();
        let big_l = spec.length();
        let tail = g.tail();
        let (left, right) = if x >= big_l {
            let d = x - big_l;
            (
                exp(-s * d) * self.left[n] + tail * d * one_minus_exp_over(s * d),
                tail / s,
            )
        } else {
            let h = spec.step();
            let (j, delta) = spec.locate(x);
            let v = g.values();
            let slope = (v[j + 1] - v[j]) / h;
            let gx = v[j] + slope * delta;
            let rest = h - delta;
            (
                exp(-s * delta) * self.left[j] + segment(s, delta, gx, -slope),
                exp(-s * rest) * self.right[j + 1] + segment(s, rest, gx, slope),
            )
        };
        (left + right) / (2.0 * s)
    }
}

/// Which generator a [`ResolventSolution`] belongs to.
#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    Snapping(Parameters),
    Walsh(WalshParameters),
    /// The `ε → 0` limit of the snapping-out resolvents for these parameters.
    SnappingLimit(Parameters),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolventSolution {
    lambda: f64,
    generator: Generator,
    c_coef: Vec<f64>,
    d_coef: Vec<f64>,
    g: StarFunction,
    tables: Vec<KernelTable>,
}

fn check_lambda(lambda: f64, spec: &GridSpec) -> Result<f64> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::invalid("lambda", "must be finite and > 0"));
    }
    let s = sqrt(lambda);
    if s * spec.step() > MAX_KERNEL_STEP {
        return Err(Error::guard(format!(
            "sqrt(lambda) * h = {} exceeds {MAX_KERNEL_STEP}; refine the grid or use a smaller lambda",
            s * spec.step()
        )));
    }
    Ok(s)
}

fn tables_for(s: f64, g: &StarFunction) -> Vec<KernelTable> {
    g.edges().iter().map(|e| KernelTable::new(s, e)).collect()
}

fn check_k(k: usize, g: &StarFunction) -> Result<()> {
    if k != g.k() {
        return Err(Error::invalid(
            "k",
            format!("parameters have k = {k} but the function has {} edges", g.k()),
        ));
    }
    Ok(())
}

/// The system for the `D_i` in the form solved by [`linsys`]: with `p(ε)`
/// the parameters with permeabilities `c/ε`, the `D_i` of `p(ε)` solve this
/// system at `ε`, and `ε = 1` gives `p` itself.
fn transmission_system(p: &Parameters, s: f64, g: &StarFunction, c_coef: &[f64]) -> Result<LemmaSystem> {
    let lambda = s * s;
    let k = p.k();
    let (a, b, c) = (p.a(), p.b(), p.c());
    let gamma_plus: Vec<f64> = (0..k).map(|i| (b[i] * s + lambda * a[i]) / c[i]).collect();
    let bb: Vec<f64> = (0..k)
        .map(|i| {
            let gamma_minus = (b[i] * s - lambda * a[i]) / c[i];
            gamma_minus * c_coef[i] + a[i] * g.edge(i).at_zero() / c[i]
        })
        .collect();
    LemmaSystem::new(gamma_plus, bb, c_coef.to_vec())
}

/// Resolvent of the snapping-out generator with parameters `p`.
pub fn snapping_out_resolvent(p: &Parameters, lambda: f64, g: &StarFunction) -> Result<ResolventSolution> {
    check_k(p.k(), g)?;
    let s = check_lambda(lambda, g.spec())?;
    let tables = tables_for(s, g);
    let c_coef: Vec<f64> = tables.iter().map(KernelTable::c_coef).collect();
    let sys = transmission_system(p, s, g, &c_coef)?;
    let d_coef = linsys::solve_direct(&sys, 1.0)?;
    Ok(ResolventSolution {
        lambda,
        generator: Generator::Snapping(p.clone()),
        c_coef,
        d_coef,
        g: g.clone(),
        tables,
    })
}

/// The `ε → 0` limit of `snapping_out_resolvent(p(ε), λ, g)`, defined for
/// every `g` (continuous at the center or not).
pub fn snapping_limit_resolvent(p: &Parameters, lambda: f64, g: &StarFunction) -> Result<ResolventSolution> {
    check_k(p.k(), g)?;
    let s = check_lambda(lambda, g.spec())?;
    let tables = tables_for(s, g);
    let c_coef: Vec<f64> = tables.iter().map(KernelTable::c_coef).collect();
    let sys = transmission_system(p, s, g, &c_coef)?;
    let d_coef = linsys::solve_reduced(&sys, 0.0)?;
    Ok(ResolventSolution {
        lambda,
        generator: Generator::SnappingLimit(p.clone()),
        c_coef,
        d_coef,
        g: g.clone(),
        tables,
    })
}

/// Resolvent of the Walsh generator; `g` must be continuous at the center.
pub fn walsh_resolvent(q: &WalshParameters, lambda: f64, g: &StarFunction) -> Result<ResolventSolution> {
    check_k(q.k(), g)?;
    g.require_continuous(CENTER_TOL)?;
    let s = check_lambda(lambda, g.spec())?;
    let tables = tables_for(s, g);
    let c_coef: Vec<f64> = tables.iter().map(KernelTable::c_coef).collect();
    let beta = q.beta();
    let g0 = g.edge(0).at_zero();
    let weighted: f64 = q.alpha().iter().zip(&c_coef).map(|(a, c)| a * c).sum();
    let f0 = (beta * g0 + 2.0 * s * weighted) / (lambda * beta + s * (1.0 - beta));
    let d_coef = c_coef.iter().map(|c| f0 - c).collect();
    Ok(ResolventSolution {
        lambda,
        generator: Generator::Walsh(q.clone()),
        c_coef,
        d_coef,
        g: g.clone(),
        tables,
    })
}

impl ResolventSolution {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    pub fn k(&self) -> usize {
        self.g.k()
    }

    pub fn c_coef(&self) -> &[f64] {
        &self.c_coef
    }

    pub fn d_coef(&self) -> &[f64] {
        &self.d_coef
    }

    pub fn source(&self) -> &StarFunction {
        &self.g
    }

    fn s(&self) -> f64 {
        sqrt(self.lambda)
    }

    pub fn eval(&self, i: usize, x: f64) -> Result<f64> {
        if i >= self.k() {
            return Err(Error::invalid("edge", format!("index {i} out of range")));
        }
        if !(x >= 0.0) {
            return Err(Error::Domain {
                what: format!("evaluation at x = {x} < 0"),
            });
        }
        Ok(self.value_at(i, x))
    }

    pub(crate) fn value_at(&self, i: usize, x: f64) -> f64 {
        let s = self.s();
        self.d_coef[i] * exp(-s * x) + self.tables[i].at(self.g.edge(i), x)
    }

    /// `f_i(0) = C_i + D_i`.
    pub fn center_values(&self) -> Vec<f64> {
        self.c_coef.iter().zip(&self.d_coef).map(|(c, d)| c + d).collect()
    }

    /// `f_i'(0) = √λ (C_i - D_i)`, exact for the computed solution.
    pub fn derivatives_at_zero(&self) -> Vec<f64> {
        let s = self.s();
        self.c_coef.iter().zip(&self.d_coef).map(|(c, d)| s * (c - d)).collect()
    }

    /// `f_i''(0) = λ f_i(0) - g_i(0)`, from the equation itself.
    pub fn second_derivatives_at_zero(&self) -> Vec<f64> {
        self.center_values()
            .iter()
            .zip(self.g.edges())
            .map(|(f0, g)| self.lambda * f0 - g.at_zero())
            .collect()
    }

    /// `f` sampled on the grid of `g`; the tail is `g(∞)/λ`.
    pub fn solution(&self) -> StarFunction {
        let spec = *self.g.spec();
        let s = self.s();
        let edges = (0..self.k())
            .map(|i| {
                let d = self.d_coef[i];
                let t = &self.tables[i];
                let values = (0..spec.len())
                    .map(|j| d * exp(-s * spec.node(j)) + t.at_node(j))
                    .collect();
                GridFunction::from_parts(spec, values, self.g.edge(i).tail() / self.lambda)
            })
            .collect();
        StarFunction::from_edges_unchecked(edges)
    }
}

/// Max over interior nodes of `|λ f - Δ_h f - g|` with the centered second
/// difference `Δ_h`.
pub fn interior_residual(sol: &ResolventSolution) -> f64 {
    let f = sol.solution();
    let h = f.spec().step();
    let mut worst: f64 = 0.0;
    for (fe, ge) in f.edges().iter().zip(sol.source().edges()) {
        let v = fe.values();
        let g = ge.values();
        for j in 1..v.len() - 1 {
            let lap = (v[j + 1] - 2.0 * v[j] + v[j - 1]) / (h * h);
            worst = worst.max((sol.lambda * v[j] - lap - g[j]).abs());
        }
    }
    worst
}

/// One-sided `O(h^2)` derivative at zero from grid samples.
pub fn one_sided_derivative(f: &GridFunction) -> f64 {
    let v = f.values();
    (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * f.spec().step())
}

/// Per-edge residual of `a_i f_i''(0) - b_i f_i'(0) = c_i (avg_{j≠i} f_j(0) - f_i(0))`
/// with `f'(0)` from one-sided differences of the sampled solution and
/// `f''(0) = λ f(0) - g(0)`.
pub fn transmission_residual(sol: &ResolventSolution, p: &Parameters) -> Vec<f64> {
    let f = sol.solution();
    let k = p.k();
    let km1 = (k - 1) as f64;
    let f0 = f.center_values();
    let total: f64 = f0.iter().sum();
    let fpp = sol.second_derivatives_at_zero();
    (0..k)
        .map(|i| {
            let fp = one_sided_derivative(f.edge(i));
            let avg = (total - f0[i]) / km1;
            p.a()[i] * fpp[i] - p.b()[i] * fp - p.c()[i] * (avg - f0[i])
        })
        .collect()
}

/// Residual of `β f''(0) = Σ α_i f_i'(0)` with one-sided derivatives.
pub fn walsh_flux_residual(sol: &ResolventSolution, q: &WalshParameters) -> f64 {
    let f = sol.solution();
    let flux: f64 = q
        .alpha()
        .iter()
        .zip(f.edges())
        .map(|(a, e)| a * one_sided_derivative(e))
        .sum();
    let fpp = sol.second_derivatives_at_zero()[0];
    q.beta() * fpp - flux
}

/// Column names of [`resolvent_convergence_sweep`] for `k` edges.
pub fn sweep_columns(k: usize, continuous: bool) -> Vec<alloc::string::String> {
    let mut cols: Vec<alloc::string::String> = Vec::new();
    cols.push("center_gap".into());
    if continuous {
        cols.push("sup_error".into());
    }
    cols.push("d_limit_gap".into());
    for i in 0..k {
        cols.push(format!("d_{}", i + 1));
    }
    cols
}

/// Resolvents of `p(ε)` for each `ε`.
///
/// Columns: `center_gap` of `f_ε`; `sup_error`, the sup-norm distance to the
/// Walsh resolvent with the limit parameters (only when `g` is continuous at
/// the center); `d_limit_gap = max_i |D_i(ε) - D_i^0|`; and the `D_i(ε)`.
pub fn resolvent_convergence_sweep(
    p: &Parameters,
    lambda: f64,
    g: &StarFunction,
    epsilons: &[f64],
) -> Result<ConvergenceReport> {
    check_epsilons(epsilons)?;
    let continuous = g.is_continuous_at_center(CENTER_TOL);
    let limit = snapping_limit_resolvent(p, lambda, g)?;
    let walsh = if continuous {
        let sol = walsh_resolvent(&walsh_limit_params(p), lambda, g)?;
        Some(sol.solution())
    } else {
        None
    };
    let kind = if continuous {
        SweepKind::Resolvent
    } else {
        SweepKind::ResolventCoefficients
    };
    let mut report = ConvergenceReport::new(kind, &sweep_columns(p.k(), continuous));
    for &eps in epsilons {
        let sol = snapping_out_resolvent(&scale_permeability(p, eps)?, lambda, g)?;
        let f = sol.solution();
        let mut row = vec![f.center_gap()];
        if let Some(w) = &walsh {
            row.push(f.distance(w)?);
        }
        let gap = sol
            .d_coef()
            .iter()
            .zip(limit.d_coef())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        row.push(gap);
        row.extend_from_slice(sol.d_coef());
        report.push(eps, &row)?;
    }
    Ok(report)
}
