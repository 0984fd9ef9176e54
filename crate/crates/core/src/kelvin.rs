//! Method of images for the snapping-out generator with `a = 0`, `b = 1`.
//!
//! A star function `f` is extended to the negative half-lines so that free
//! d'Alembert averaging on every edge respects the transmission condition
//! `f_i'(0) = c_i (f_i(0) - avg_{j≠i} f_j(0))`. With `g_i(t) = f̃_i(-t)` the
//! images solve `(g - f)' = Q (g - f) + 2 Q f`, `(g - f)(0) = 0`, i.e.
//! `g(t) = f(t) + 2 ∫_0^t e^{(t-s)Q} Q f(s) ds`. The integral is evaluated
//! mode by mode with an exponential integrator against a local quadratic
//! reconstruction of `f`, so there is no step-size restriction however large
//! the permeabilities are.
//!
//! The limit images as `c → ∞` are `g = 2Πf - f`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::grid::{center_projection, GridFunction, GridSpec, StarFunction, CENTER_TOL};
use crate::markov::{build_chain, ChainSpectrum};
use crate::math::{bend_weight, exp, expm1, ramp_weight};
use crate::report::{check_epsilons, ConvergenceReport, SweepKind};

/// Modal state of the image ODE at every node, for exact evaluation of the
/// images between nodes.
#[derive(Debug, Clone, PartialEq)]
struct ModalImage {
    mu: Vec<f64>,
    p: DMatrix<f64>,
    /// `P^{-1} (g - f)` at node `j`, stored at `j * k + m`.
    w_hat: Vec<f64>,
    /// `P^{-1} f` at node `j`.
    f_hat: Vec<f64>,
}

/// A star function together with its images on the negative half-lines.
///
/// `plus` and `minus` live on one grid covering `[0, L + window]`, where `L`
/// is the length of the original grid. Cosine operators are available for
/// `|t| <= window`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedStarFunction {
    base: GridSpec,
    window: f64,
    plus: StarFunction,
    minus: StarFunction,
    modal: Option<ModalImage>,
}

/// `(f(0), h f'(0), h^2 f''(0)/2)` of the quadratic through three samples
/// around step `j` of mode `m`: centered on node `j` where possible,
/// one-sided at the first node.
#[inline]
fn local_quadratic(f_hat: &[f64], k: usize, m: usize, j: usize) -> (f64, f64, f64) {
    quadratic_at(|n| f_hat[n * k + m], j)
}

#[inline]
fn quadratic_at(at: impl Fn(usize) -> f64, j: usize) -> (f64, f64, f64) {
    let y0 = at(j);
    if j == 0 {
        let (y1, y2) = (at(1), at(2));
        (y0, 0.5 * (-3.0 * y0 + 4.0 * y1 - y2), 0.5 * (y0 - 2.0 * y1 + y2))
    } else {
        let (ym, yp) = (at(j - 1), at(j + 1));
        (y0, 0.5 * (yp - ym), 0.5 * (yp - 2.0 * y0 + ym))
    }
}

/// One step of `w' = μ w + 2 μ q(τ)` over `[0, δ]` with `z = μ δ` and the
/// source `q(τ) = f0 + b (τ/δ) + c (τ/δ)^2`:
/// `w(δ) = e^z w(0) + 2 [f0 (e^z - 1) + b (φ_1(z) - 1) + 2 c (φ_2(z) - 1/2)]`.
struct StepWeights {
    decay: f64,
    jump: f64,
    ramp: f64,
    bend: f64,
}

impl StepWeights {
    fn new(z: f64) -> Self {
        StepWeights {
            decay: exp(z),
            jump: expm1(z),
            ramp: ramp_weight(z),
            bend: 2.0 * bend_weight(z),
        }
    }

    #[inline]
    fn forcing(&self, f0: f64, b: f64, c: f64) -> f64 {
        2.0 * (f0 * self.jump + b * self.ramp + c * self.bend)
    }
}

fn check_window(t_max: f64) -> Result<()> {
    if t_max.is_finite() && t_max > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid("T_max", "must be finite and > 0"))
    }
}

/// Images of `f` for the snapping-out generator whose center chain is `chain`.
pub fn extend(chain: &ChainSpectrum, f: &StarFunction, t_max: f64) -> Result<ExtendedStarFunction> {
    check_window(t_max)?;
    let k = f.k();
    if chain.k() != k {
        return Err(Error::invalid(
            "c",
            format!("chain has k = {} but the function has {k} edges", chain.k()),
        ));
    }
    let base = *f.spec();
    let ext = base.extended_by(t_max);
    let plus = StarFunction::from_edges_unchecked(
        f.edges().iter().map(|e| e.resample(ext)).collect::<Result<Vec<_>>>()?,
    );

    let h = ext.step();
    let mu = chain.eigenvalues().to_vec();
    let p = chain.modes().clone();
    let p_inv = chain.modes_inverse();
    let weights: Vec<StepWeights> = mu.iter().map(|&m| StepWeights::new(m * h)).collect();

    let nodes = ext.len();
    let mut f_hat = vec![0.0; nodes * k];
    for j in 0..nodes {
        for m in 0..k {
            let mut acc = 0.0;
            for i in 0..k {
                acc += p_inv[(m, i)] * plus.edge(i).values()[j];
            }
            f_hat[j * k + m] = acc;
        }
    }
    let mut w_hat = vec![0.0; nodes * k];
    for j in 0..nodes - 1 {
        for m in 0..k {
            let (f0, b, c) = local_quadratic(&f_hat, k, m, j);
            w_hat[(j + 1) * k + m] = weights[m].decay * w_hat[j * k + m] + weights[m].forcing(f0, b, c);
        }
    }

    let mut minus_vals = vec![vec![0.0; nodes]; k];
    for j in 0..nodes {
        for (i, mv) in minus_vals.iter_mut().enumerate() {
            let mut w = 0.0;
            for m in 0..k {
                w += p[(i, m)] * w_hat[j * k + m];
            }
            mv[j] = plus.edge(i).values()[j] + w;
        }
    }
    let tails = f.tails();
    let pi_tail: f64 = chain.alpha().iter().zip(&tails).map(|(a, m)| a * m).sum();
    let minus = StarFunction::from_edges_unchecked(
        minus_vals
            .into_iter()
            .zip(&tails)
            .map(|(v, &m)| GridFunction::from_parts(ext, v, 2.0 * pi_tail - m))
            .collect(),
    );
    Ok(ExtendedStarFunction {
        base,
        window: t_max,
        plus,
        minus,
        modal: Some(ModalImage { mu, p, w_hat, f_hat }),
    })
}

fn limit_images(alpha: &[f64], f: &StarFunction, t_max: f64) -> Result<ExtendedStarFunction> {
    check_window(t_max)?;
    let base = *f.spec();
    let ext = base.extended_by(t_max);
    let plus = StarFunction::from_edges_unchecked(
        f.edges().iter().map(|e| e.resample(ext)).collect::<Result<Vec<_>>>()?,
    );
    let pi = center_projection(alpha, &plus)?;
    let minus = pi.zip_with(&plus, |p, x| 2.0 * p - x)?;
    Ok(ExtendedStarFunction {
        base,
        window: t_max,
        plus,
        minus,
        modal: None,
    })
}

/// Images `g = 2Πf - f` of the limit (Walsh) cosine family; `f` must be
/// continuous at the center.
pub fn limit_extend(alpha: &[f64], f: &StarFunction, t_max: f64) -> Result<ExtendedStarFunction> {
    f.require_continuous(CENTER_TOL)?;
    limit_images(alpha, f, t_max)
}

/// The pointwise limit `2Πf - f` of the snapping-out images for any `f`,
/// continuous at the center or not.
pub fn pointwise_limit_extend(alpha: &[f64], f: &StarFunction, t_max: f64) -> Result<ExtendedStarFunction> {
    limit_images(alpha, f, t_max)
}

impl ExtendedStarFunction {
    pub fn k(&self) -> usize {
        self.plus.k()
    }

    /// Grid of the function that was extended.
    pub fn base(&self) -> &GridSpec {
        &self.base
    }

    pub fn window(&self) -> f64 {
        self.window
    }

    pub fn plus(&self) -> &StarFunction {
        &self.plus
    }

    pub fn minus(&self) -> &StarFunction {
        &self.minus
    }

    pub fn sup_norm(&self) -> f64 {
        self.plus.sup_norm().max(self.minus.sup_norm())
    }

    /// `f̃_i(-y)` for `y >= 0`, exact between nodes.
    pub fn image_at(&self, i: usize, y: f64) -> f64 {
        let minus = self.minus.edge(i);
        let spec = minus.spec();
        if y >= spec.length() {
            return minus.tail();
        }
        let (j, delta) = spec.locate(y);
        if delta == 0.0 {
            return minus.values()[j];
        }
        let Some(modal) = &self.modal else {
            let frac = delta / spec.step();
            let (f0, b, c) = quadratic_at(|n| minus.values()[n], j);
            return f0 + frac * (b + frac * c);
        };
        let k = self.k();
        let frac = delta / spec.step();
        let mut w = 0.0;
        for m in 0..k {
            let sw = StepWeights::new(modal.mu[m] * delta);
            let (f0, b, c) = local_quadratic(&modal.f_hat, k, m, j);
            let wm = sw.decay * modal.w_hat[j * k + m] + sw.forcing(f0, b * frac, c * frac * frac);
            w += modal.p[(i, m)] * wm;
        }
        self.plus_at(i, y) + w
    }

    /// `f_i(y)` between nodes from the local quadratic used by the image
    /// integrator, so that shifts by fractions of a step stay third order.
    pub fn plus_at(&self, i: usize, y: f64) -> f64 {
        let e = self.plus.edge(i);
        let spec = e.spec();
        if y >= spec.length() {
            return e.tail();
        }
        let (j, delta) = spec.locate(y);
        if delta == 0.0 {
            return e.values()[j];
        }
        let frac = delta / spec.step();
        let (f0, b, c) = quadratic_at(|n| e.values()[n], j);
        f0 + frac * (b + frac * c)
    }

    /// `f̃_i(y)` for any real `y`.
    pub fn full_line(&self, i: usize, y: f64) -> f64 {
        if y >= 0.0 {
            self.plus_at(i, y)
        } else {
            self.image_at(i, -y)
        }
    }

    /// `f̃_i` at node offset `idx` (negative indices read the images).
    #[inline]
    pub(crate) fn node(&self, i: usize, idx: isize) -> f64 {
        if idx >= 0 {
            self.plus.edge(i).sample(idx as usize)
        } else {
            self.minus.edge(i).sample(idx.unsigned_abs())
        }
    }

    pub(crate) fn check_time(&self, t: f64) -> Result<f64> {
        let t = t.abs();
        if !t.is_finite() {
            return Err(Error::invalid("t", "must be finite"));
        }
        if t > self.window * (1.0 + 1e-12) {
            return Err(Error::WindowExceeded {
                required: t,
                available: self.window,
            });
        }
        Ok(t)
    }

    /// `½ (f̃_i(x + t) + f̃_i(x - t))`.
    pub fn cosine_at(&self, i: usize, t: f64, x: f64) -> Result<f64> {
        let t = self.check_time(t)?;
        if !(x >= 0.0) {
            return Err(Error::Domain {
                what: format!("evaluation at x = {x} < 0"),
            });
        }
        Ok(0.5 * (self.full_line(i, x + t) + self.full_line(i, x - t)))
    }

    /// Shift `t` as a whole number of steps, when it is one.
    pub(crate) fn node_shift(&self, t: f64) -> Option<isize> {
        let r = t / self.base.step();
        let m = crate::math::round(r);
        if (r - m).abs() <= 1e-9 {
            Some(m as isize)
        } else {
            None
        }
    }
}

/// `R C_D(t) f̃`: the cosine operator applied on the original grid.
pub fn cartesian_cosine(ext: &ExtendedStarFunction, t: f64) -> Result<StarFunction> {
    let t = ext.check_time(t)?;
    let spec = ext.base;
    let k = ext.k();
    let edges = (0..k)
        .map(|i| {
            let values = match ext.node_shift(t) {
                Some(m) => (0..spec.len() as isize)
                    .map(|j| 0.5 * (ext.node(i, j + m) + ext.node(i, j - m)))
                    .collect(),
                None => (0..spec.len())
                    .map(|j| {
                        let x = spec.node(j);
                        0.5 * (ext.full_line(i, x + t) + ext.full_line(i, x - t))
                    })
                    .collect(),
            };
            GridFunction::from_parts(spec, values, ext.plus.edge(i).tail())
        })
        .collect();
    Ok(StarFunction::from_edges_unchecked(edges))
}

/// `Cos(t) f` for the snapping-out generator with center chain `chain`.
pub fn cosine_apply(chain: &ChainSpectrum, f: &StarFunction, t: f64, t_max: f64) -> Result<StarFunction> {
    cartesian_cosine(&extend(chain, f, t_max)?, t)
}

/// `Cos(t) f` for the limit (Walsh) cosine family.
pub fn walsh_cosine_apply(alpha: &[f64], f: &StarFunction, t: f64, t_max: f64) -> Result<StarFunction> {
    cartesian_cosine(&limit_extend(alpha, f, t_max)?, t)
}

/// Probe offsets `δ` for the boundary layer at `x = t - δ`: geometric from
/// `1e-9` up to one grid step.
pub fn layer_probes(h: f64) -> Vec<f64> {
    let n = 48;
    let lo = crate::math::ln(1e-9);
    let hi = crate::math::ln(h);
    (0..n)
        .map(|q| exp(lo + (hi - lo) * q as f64 / (n - 1) as f64))
        .collect()
}

/// `sup_x |Cos_a(t) f(x) - Cos_b(t) f(x)|` over grid nodes and the layer
/// probes `x = t - δ`.
pub fn cosine_distance(a: &ExtendedStarFunction, b: &ExtendedStarFunction, t: f64) -> Result<f64> {
    let mut worst = cartesian_cosine(a, t)?.distance(&cartesian_cosine(b, t)?)?;
    let t = t.abs();
    if t > 0.0 {
        for delta in layer_probes(a.base.step()) {
            let x = t - delta;
            if x < 0.0 {
                continue;
            }
            for i in 0..a.k() {
                worst = worst.max((a.cosine_at(i, t, x)? - b.cosine_at(i, t, x)?).abs());
            }
        }
    }
    Ok(worst)
}

fn scaled_chain(c: &[f64], eps: f64) -> Result<ChainSpectrum> {
    build_chain(&c.iter().map(|x| x / eps).collect::<Vec<_>>())
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::invalid("times", "need at least one value"));
    }
    for (i, t) in times.iter().enumerate() {
        if !t.is_finite() {
            return Err(Error::invalid(format!("times[{i}]"), "must be finite"));
        }
    }
    Ok(())
}

/// Distance between the snapping-out cosine family with permeabilities
/// `c/ε` and the Walsh cosine family, for `f` continuous at the center.
///
/// Column `sup_error` is the sup over `times` and over `x`.
pub fn cosine_convergence_sweep(
    c: &[f64],
    f: &StarFunction,
    times: &[f64],
    epsilons: &[f64],
    t_max: f64,
) -> Result<ConvergenceReport> {
    check_epsilons(epsilons)?;
    check_times(times)?;
    let alpha = build_chain(c)?.alpha().to_vec();
    let limit = limit_extend(&alpha, f, t_max)?;
    let mut report = ConvergenceReport::new(SweepKind::Cosine, &["sup_error"]);
    for &eps in epsilons {
        let ext = extend(&scaled_chain(c, eps)?, f, t_max)?;
        let mut worst: f64 = 0.0;
        for &t in times {
            worst = worst.max(cosine_distance(&ext, &limit, t)?);
        }
        report.push(eps, &[worst])?;
    }
    Ok(report)
}

/// Cauchy gaps `sup_x |Cos_{c/ε_n}(t) f - Cos_{c/ε_{n-1}}(t) f|` between
/// consecutive `ε`, for any `f`. One row per `ε_n`, `n >= 1`.
///
/// Columns: `cauchy_gap_min` and `cauchy_gap_max` over the nonzero `times`,
/// and `reference = sup_norm(f - Πf)`.
pub fn cosine_divergence_sweep(
    c: &[f64],
    f: &StarFunction,
    times: &[f64],
    epsilons: &[f64],
    t_max: f64,
) -> Result<ConvergenceReport> {
    check_epsilons(epsilons)?;
    check_times(times)?;
    if epsilons.len() < 2 {
        return Err(Error::invalid("epsilons", "need at least two values"));
    }
    let nonzero: Vec<f64> = times.iter().copied().filter(|t| *t != 0.0).collect();
    if nonzero.is_empty() {
        return Err(Error::invalid("times", "need a nonzero time"));
    }
    let alpha = build_chain(c)?.alpha().to_vec();
    let reference = f.distance(&center_projection(&alpha, f)?)?;
    let mut report = ConvergenceReport::new(
        SweepKind::CosineDivergence,
        &["cauchy_gap_min", "cauchy_gap_max", "reference"],
    );
    let mut prev = extend(&scaled_chain(c, epsilons[0])?, f, t_max)?;
    for &eps in &epsilons[1..] {
        let ext = extend(&scaled_chain(c, eps)?, f, t_max)?;
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for &t in &nonzero {
            let gap = cosine_distance(&ext, &prev, t)?;
            lo = lo.min(gap);
            hi = hi.max(gap);
        }
        report.push(eps, &[lo, hi, reference])?;
        prev = ext;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::TestFunction;
    use crate::params::Parameters;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn chain() -> ChainSpectrum {
        build_chain(&[1.0, 2.0, 4.0]).unwrap()
    }

    #[test]
    fn constants_are_fixed() {
        let spec = GridSpec::new(4.0, 1.0 / 64.0).unwrap();
        let f = StarFunction::constant(spec, 3, 1.7).unwrap();
        let ext = extend(&chain(), &f, 2.0).unwrap();
        for e in ext.minus().edges() {
            assert!(e.values().iter().all(|v| (v - 1.7).abs() < 1e-13));
        }
        for t in [0.0, 0.3, 1.0, 2.0] {
            let c = cartesian_cosine(&ext, t).unwrap();
            assert!(c.distance(&f).unwrap() < 1e-13);
        }
    }

    #[test]
    fn per_edge_constants_have_closed_form_images() {
        let spec = GridSpec::new(4.0, 1.0 / 64.0).unwrap();
        let u = [1.0, -0.5, 2.0];
        let ch = chain();
        let ext = extend(&ch, &StarFunction::per_edge_constant(spec, &u).unwrap(), 3.0).unwrap();
        for t in [0.0, 0.01, 0.1, 0.77, 2.5, 3.0, 3.013] {
            let e = ch.propagate(t, &u).unwrap();
            for i in 0..3 {
                assert_abs_diff_eq!(ext.image_at(i, t), 2.0 * e[i] - u[i], epsilon = 1e-8);
            }
        }
        // At the center the cosine family is the chain itself.
        let c = cartesian_cosine(&ext, 0.77).unwrap();
        let e = ch.propagate(0.77, &u).unwrap();
        for i in 0..3 {
            assert_abs_diff_eq!(c.edge(i).values()[0], e[i], epsilon = 1e-8);
        }
    }

    #[test]
    fn stiff_chain_matches_closed_form() {
        let spec = GridSpec::new(2.0, 1.0 / 512.0).unwrap();
        let u = [1.0, 0.0, 0.0];
        let ch = build_chain(&[1e4, 2e4, 4e4]).unwrap();
        let ext = extend(&ch, &StarFunction::per_edge_constant(spec, &u).unwrap(), 1.0).unwrap();
        for t in [1e-6, 3e-5, 1e-3, 0.5] {
            let e = ch.propagate(t, &u).unwrap();
            for i in 0..3 {
                assert_abs_diff_eq!(ext.image_at(i, t), 2.0 * e[i] - u[i], epsilon = 1e-8);
            }
        }
    }

    /// Direct quadrature of `g(t) = f(t) + 2 ∫_0^t e^{(t-s)Q} Q f(s) ds`.
    #[test]
    fn images_match_integral_form() {
        let spec = GridSpec::new(8.0, 1.0 / 256.0).unwrap();
        let ch = chain();
        let exact = |i: usize, x: f64| (1.0 + i as f64 * x) * exp(-x * x);
        let f = StarFunction::from_fn(spec, &[0.0; 3], exact).unwrap();
        let ext = extend(&ch, &f, 2.0).unwrap();
        let t = 1.25;
        let n = 4000;
        let hs = t / n as f64;
        let mut acc = [0.0; 3];
        for s in 0..=n {
            let w = if s == 0 || s == n { 1.0 } else if s % 2 == 1 { 4.0 } else { 2.0 };
            let sv = s as f64 * hs;
            let d = ch.derivative_matrix(t - sv).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    acc[i] += w * hs / 3.0 * d[(i, j)] * exact(j, sv);
                }
            }
        }
        for i in 0..3 {
            let want = exact(i, t) + 2.0 * acc[i];
            assert_abs_diff_eq!(ext.image_at(i, t), want, epsilon = 1e-7);
        }
    }

    #[test]
    fn compatibility_and_evenness() {
        let spec = GridSpec::new(6.0, 1.0 / 128.0).unwrap();
        let f = StarFunction::per_edge_constant(spec, &[1.0, 2.0, -1.0]).unwrap();
        let ext = extend(&chain(), &f, 2.0).unwrap();
        for i in 0..3 {
            assert_eq!(ext.minus().edge(i).values()[0], ext.plus().edge(i).values()[0]);
        }
        for t in [0.25, 0.3, 1.9] {
            assert_eq!(cartesian_cosine(&ext, t).unwrap(), cartesian_cosine(&ext, -t).unwrap());
        }
        assert!(matches!(
            cartesian_cosine(&ext, 2.5),
            Err(Error::WindowExceeded { .. })
        ));
    }

    #[test]
    fn limit_images() {
        let spec = GridSpec::new(6.0, 1.0 / 128.0).unwrap();
        let same = StarFunction::from_fn(spec, &[0.0; 3], |_, x| exp(-x)).unwrap();
        let ext = limit_extend(&[0.2, 0.3, 0.5], &same, 1.0).unwrap();
        for i in 0..3 {
            assert!(ext.minus().edge(i).values().iter().zip(ext.plus().edge(i).values()).all(|(a, b)| (a - b).abs() < 1e-15));
        }
        // Two edges with equal weights: crossing images.
        let f = StarFunction::from_fn(spec, &[0.0; 2], |i, x| (1.0 + i as f64 * x) * exp(-x)).unwrap();
        let ext = limit_extend(&[0.5, 0.5], &f, 1.0).unwrap();
        for j in 0..100 {
            assert_abs_diff_eq!(ext.minus().edge(0).values()[j], ext.plus().edge(1).values()[j], epsilon = 1e-15);
        }
        let bad = StarFunction::per_edge_constant(spec, &[1.0, 0.0]).unwrap();
        assert!(limit_extend(&[0.5, 0.5], &bad, 1.0).is_err());
        assert!(pointwise_limit_extend(&[0.5, 0.5], &bad, 1.0).is_ok());
    }

    #[test]
    fn walsh_family_on_two_edges_is_the_free_line() {
        // Unfold edge 0 onto the negative axis: F(y) = f_0(-y) for y < 0.
        let spec = GridSpec::new(12.0, 1.0 / 256.0).unwrap();
        let line = |y: f64| exp(-(y - 0.5) * (y - 0.5)) * (1.0 + 0.3 * y);
        let f = StarFunction::from_fn(spec, &[0.0; 2], |i, x| if i == 0 { line(-x) } else { line(x) }).unwrap();
        let line = |y: f64| if y < 0.0 { f.edge(0).eval(-y).unwrap() } else { f.edge(1).eval(y).unwrap() };
        let t = 1.5;
        let cos = walsh_cosine_apply(&[0.5, 0.5], &f, t, 2.0).unwrap();
        for x in [0.0, 0.3, 1.0, 2.0, 5.0] {
            assert_abs_diff_eq!(cos.eval(1, x).unwrap(), 0.5 * (line(x + t) + line(x - t)), epsilon = 1e-12);
            assert_abs_diff_eq!(cos.eval(0, x).unwrap(), 0.5 * (line(-x + t) + line(-x - t)), epsilon = 1e-12);
        }
        assert!(cos.center_gap() <= 1e-10);
    }

    #[test]
    fn domain_class_cosine_equation() {
        let spec = GridSpec::new(20.0, 1.0 / 512.0).unwrap();
        let p = Parameters::snapping(vec![1.0, 2.0, 4.0]).unwrap();
        let f = TestFunction::DomainClass { values: vec![1.0, -0.5, 0.25], width: 1.0 }
            .build(spec, &p)
            .unwrap();
        let ch = chain();
        let (s, t) = (0.25, 0.5);
        let cs = cosine_apply(&ch, &f, s, 2.0).unwrap();
        let lhs = cosine_apply(&ch, &cs, t, 2.0).unwrap().map(|v| 2.0 * v);
        let rhs = cosine_apply(&ch, &f, t + s, 2.0)
            .unwrap()
            .zip_with(&cosine_apply(&ch, &f, t - s, 2.0).unwrap(), |a, b| a + b)
            .unwrap();
        assert!(lhs.distance(&rhs).unwrap() <= 1e-6 * f.sup_norm());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn extension_norm_bound(
            vals in proptest::collection::vec(-3.0f64..3.0, 3),
            amps in proptest::collection::vec(-3.0f64..3.0, 3),
            c in proptest::collection::vec(0.1f64..10.0, 3),
        ) {
            let spec = GridSpec::new(8.0, 1.0 / 64.0).unwrap();
            let ch = build_chain(&c).unwrap();
            let f = StarFunction::from_fn(spec, &vals, |i, x| vals[i] + amps[i] * exp(-x) * libm::sin(3.0 * x)).unwrap();
            let ext = extend(&ch, &f, 4.0).unwrap();
            prop_assert!(ext.sup_norm() <= ch.m() * f.sup_norm() * (1.0 + 1e-6));
            for t in [0.5, 1.0, 3.5] {
                prop_assert!(cartesian_cosine(&ext, t).unwrap().sup_norm() <= ch.m() * f.sup_norm() * (1.0 + 1e-6));
            }
        }
    }
}
