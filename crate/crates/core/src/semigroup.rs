//! Semigroups generated by the snapping-out and Walsh generators.
//!
//! For `a = 0` the semigroup is the Gaussian average of the Kelvin cosine
//! family, `T(t) f = (1/√(4πt)) ∫ e^{-s²/4t} Cos(s) f ds`. With a sticky
//! center (`a ≠ 0`, or `β > 0`) there is no cosine family and the semigroup
//! is recovered from the resolvent by Gaver–Stehfest inversion.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{GridFunction, StarFunction, CENTER_TOL};
use crate::kelvin::{extend, limit_extend, pointwise_limit_extend, ExtendedStarFunction};
use crate::markov::build_chain;
use crate::math::{exp, ln, powi, sqrt};
use crate::params::{scale_permeability, walsh_limit_params, Parameters, WalshParameters};
use crate::quadrature::gauss_hermite;
use crate::report::{check_epsilons, ConvergenceReport, SweepKind};
use crate::resolvent::{snapping_out_resolvent, walsh_resolvent};

/// Gaussian weights below `e^{-u²}` at this `u` are dropped.
pub const GAUSS_CUTOFF: f64 = 6.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureSpec {
    /// Gauss–Hermite points for [`WeierstrassRule::GaussHermite`].
    pub nodes: usize,
    /// Gaver–Stehfest order.
    pub inversion_order: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            nodes: 64,
            inversion_order: 12,
        }
    }
}

impl QuadratureSpec {
    pub fn new(nodes: usize, inversion_order: usize) -> Result<Self> {
        if nodes < 16 {
            return Err(Error::invalid("quadrature.nodes", "must be >= 16"));
        }
        if inversion_order % 2 != 0 || !(8..=18).contains(&inversion_order) {
            return Err(Error::invalid(
                "quadrature.inversion_order",
                "must be even and in [8, 18]",
            ));
        }
        Ok(QuadratureSpec {
            nodes,
            inversion_order,
        })
    }
}

/// How the Gaussian average over `s` is discretized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeierstrassRule {
    /// Trapezoid rule on the grid shifts `s = m h`, weights normalized to
    /// sum to one. Every shift reads stored nodes only.
    #[default]
    Trapezoid,
    /// Gauss–Hermite in `u = s / (2√t)` with the given number of points.
    GaussHermite(usize),
}

impl WeierstrassRule {
    /// Largest `|u|` the rule evaluates.
    fn reach(&self) -> f64 {
        match self {
            WeierstrassRule::Trapezoid => GAUSS_CUTOFF,
            WeierstrassRule::GaussHermite(n) => gauss_hermite(*n).nodes.last().copied().unwrap_or(0.0),
        }
    }
}

/// Image window an extension needs for `weierstrass_apply(.., t, rule)`.
pub fn required_window(t: f64, rule: WeierstrassRule) -> f64 {
    2.0 * sqrt(t.max(0.0)) * rule.reach()
}

fn check_t(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid("t", "must be finite and >= 0"))
    }
}

/// `T(t) f` by the Weierstrass formula over the cosine family of `ext`.
pub fn weierstrass_apply(ext: &ExtendedStarFunction, t: f64, rule: WeierstrassRule) -> Result<StarFunction> {
    check_t(t)?;
    if t == 0.0 {
        return crate::kelvin::cartesian_cosine(ext, 0.0);
    }
    let need = required_window(t, rule);
    if need > ext.window() * (1.0 + 1e-12) {
        return Err(Error::WindowExceeded {
            required: need,
            available: ext.window(),
        });
    }
    match rule {
        WeierstrassRule::Trapezoid => trapezoid(ext, t),
        WeierstrassRule::GaussHermite(n) => {
            if n < 16 {
                return Err(Error::invalid("quadrature.nodes", "must be >= 16"));
            }
            hermite(ext, t, n)
        }
    }
}

fn trapezoid(ext: &ExtendedStarFunction, t: f64) -> Result<StarFunction> {
    let spec = *ext.base();
    let h = spec.step();
    let reach = (required_window(t, WeierstrassRule::Trapezoid) / h) as usize;
    let mut w: Vec<f64> = (0..=reach)
        .map(|m| {
            let s = m as f64 * h;
            exp(-s * s / (4.0 * t))
        })
        .collect();
    let total = w[0] + 2.0 * w[1..].iter().sum::<f64>();
    for x in &mut w {
        *x /= total;
    }
    let n = spec.len();
    let r = reach as isize;
    let edges = (0..ext.k())
        .map(|i| {
            // f̃ at node offsets -reach ..= n - 1 + reach.
            let line: Vec<f64> = (-r..n as isize + r).map(|idx| ext.node(i, idx)).collect();
            let values = (0..n)
                .map(|j| {
                    let c = j + reach;
                    let mut acc = w[0] * line[c];
                    for m in (1..=reach).rev() {
                        acc += w[m] * (line[c + m] + line[c - m]);
                    }
                    acc
                })
                .collect();
            GridFunction::from_parts(spec, values, ext.plus().edge(i).tail())
        })
        .collect();
    Ok(StarFunction::from_edges_unchecked(edges))
}

fn hermite(ext: &ExtendedStarFunction, t: f64, n: usize) -> Result<StarFunction> {
    let rule = gauss_hermite(n);
    let spec = *ext.base();
    let norm = 1.0 / sqrt(core::f64::consts::PI);
    let mut acc = vec![vec![0.0; spec.len()]; ext.k()];
    for (u, w) in rule.nodes.iter().zip(&rule.weights) {
        if *u < 0.0 {
            continue;
        }
        // Evenness: the negative node contributes the same cosine.
        let weight = if *u == 0.0 { *w } else { 2.0 * w } * norm;
        let s = 2.0 * sqrt(t) * u;
        for (i, row) in acc.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                let x = spec.node(j);
                *v += weight * 0.5 * (ext.full_line(i, x + s) + ext.full_line(i, x - s));
            }
        }
    }
    let edges = acc
        .into_iter()
        .enumerate()
        .map(|(i, v)| GridFunction::from_parts(spec, v, ext.plus().edge(i).tail()))
        .collect();
    Ok(StarFunction::from_edges_unchecked(edges))
}

fn require_non_sticky(p: &Parameters) -> Result<()> {
    if let Some(i) = p.a().iter().position(|&a| a != 0.0) {
        return Err(Error::invalid(
            format!("a[{i}]"),
            "the cosine-family route needs a = 0; use the sticky semigroup",
        ));
    }
    Ok(())
}

/// Permeabilities of the equivalent `b = 1` problem: `c_i / b_i`.
fn effective_c(p: &Parameters) -> Vec<f64> {
    p.c().iter().zip(p.b()).map(|(c, b)| c / b).collect()
}

/// `e^{tA} f` for snapping-out parameters with `a = 0`, building an image
/// window wide enough for `t`.
pub fn snapping_semigroup(p: &Parameters, t: f64, f: &StarFunction, rule: WeierstrassRule) -> Result<StarFunction> {
    require_non_sticky(p)?;
    check_t(t)?;
    if t == 0.0 {
        return Ok(f.clone());
    }
    let chain = build_chain(&effective_c(p))?;
    let ext = extend(&chain, f, required_window(t, rule))?;
    weierstrass_apply(&ext, t, rule)
}

/// The limit semigroup with `β = 0` and edge weights `alpha`. Off the
/// continuous functions it acts through the pointwise limit images `2Πf - f`
/// and is defined for `t > 0` only in the sense of that limit.
pub fn walsh_semigroup(alpha: &[f64], t: f64, f: &StarFunction, rule: WeierstrassRule) -> Result<StarFunction> {
    check_t(t)?;
    if t == 0.0 {
        return Ok(f.clone());
    }
    let window = required_window(t, rule);
    let ext = if f.is_continuous_at_center(CENTER_TOL) {
        limit_extend(alpha, f, window)?
    } else {
        pointwise_limit_extend(alpha, f, window)?
    };
    weierstrass_apply(&ext, t, rule)
}

/// Gaver–Stehfest weights `V_1 .. V_N`: `F(t) ≈ (ln 2 / t) Σ V_j F̂(j ln 2 / t)`.
pub fn stehfest_weights(order: usize) -> Result<Vec<f64>> {
    if order % 2 != 0 || !(2..=18).contains(&order) {
        return Err(Error::invalid(
            "quadrature.inversion_order",
            "must be even and in [8, 18]",
        ));
    }
    let half = order / 2;
    let fact = |n: usize| (1..=n).fold(1.0f64, |acc, m| acc * m as f64);
    Ok((1..=order)
        .map(|j| {
            let lo = j.div_ceil(2);
            let hi = j.min(half);
            let mut sum = 0.0;
            for k in lo..=hi {
                sum += powi(k as f64, half as i32) * fact(2 * k)
                    / (fact(half - k) * fact(k) * fact(k - 1) * fact(j - k) * fact(2 * k - j));
            }
            if (j + half) % 2 == 0 {
                sum
            } else {
                -sum
            }
        })
        .collect())
}

fn stehfest_combine(
    t: f64,
    q: &QuadratureSpec,
    f: &StarFunction,
    mut resolve: impl FnMut(f64) -> Result<StarFunction>,
) -> Result<StarFunction> {
    check_t(t)?;
    if t == 0.0 {
        return Ok(f.clone());
    }
    QuadratureSpec::new(q.nodes, q.inversion_order)?;
    let v = stehfest_weights(q.inversion_order)?;
    let step = ln(2.0) / t;
    let mut acc: Option<StarFunction> = None;
    for (j, vj) in v.iter().enumerate() {
        let lambda = (j + 1) as f64 * step;
        let r = resolve(lambda)?;
        let w = vj * step;
        acc = Some(match acc {
            None => r.map(move |x| w * x),
            Some(a) => a.zip_with(&r, |s, x| s + w * x)?,
        });
    }
    Ok(acc.expect("order >= 8"))
}

/// `e^{tA} f` for any snapping-out parameters by inversion of the resolvent.
/// Fails with a numerical guard when `t` is too small for the grid to
/// resolve the largest inversion point.
pub fn sticky_semigroup_apply(p: &Parameters, t: f64, f: &StarFunction, q: &QuadratureSpec) -> Result<StarFunction> {
    stehfest_combine(t, q, f, |lambda| Ok(snapping_out_resolvent(p, lambda, f)?.solution()))
}

/// The Walsh semigroup (any `β`) by inversion of the resolvent; `f` must be
/// continuous at the center.
pub fn walsh_sticky_semigroup_apply(
    q: &WalshParameters,
    t: f64,
    f: &StarFunction,
    quad: &QuadratureSpec,
) -> Result<StarFunction> {
    stehfest_combine(t, quad, f, |lambda| Ok(walsh_resolvent(q, lambda, f)?.solution()))
}

/// `sup_t sup_norm(T_ε(t) f - T_lim(t) f)` for the parameters with `c/ε`.
///
/// For `a = 0` both families come from the Weierstrass formula and `f` may
/// be discontinuous at the center, in which case `times` must be positive.
/// With a sticky center both come from resolvent inversion and `f` must be
/// continuous at the center.
pub fn semigroup_convergence_sweep(
    p: &Parameters,
    f: &StarFunction,
    times: &[f64],
    epsilons: &[f64],
    quad: &QuadratureSpec,
    rule: WeierstrassRule,
) -> Result<ConvergenceReport> {
    check_epsilons(epsilons)?;
    if times.is_empty() {
        return Err(Error::invalid("times", "need at least one value"));
    }
    for (i, &t) in times.iter().enumerate() {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::invalid(format!("times[{i}]"), "must be finite and >= 0"));
        }
    }
    let continuous = f.is_continuous_at_center(CENTER_TOL);
    let q = walsh_limit_params(p);
    let mut report = ConvergenceReport::new(SweepKind::Semigroup, &["sup_error"]);

    if p.is_non_sticky() {
        if !continuous {
            if let Some(i) = times.iter().position(|&t| t == 0.0) {
                return Err(Error::invalid(
                    format!("times[{i}]"),
                    "must be > 0 for a function that is not continuous at the center",
                ));
            }
        }
        let t_hi = times.iter().copied().fold(0.0, f64::max);
        let window = required_window(t_hi, rule).max(f.spec().step());
        let limit = if continuous {
            limit_extend(q.alpha(), f, window)?
        } else {
            pointwise_limit_extend(q.alpha(), f, window)?
        };
        let limits: Vec<StarFunction> = times
            .iter()
            .map(|&t| weierstrass_apply(&limit, t, rule))
            .collect::<Result<_>>()?;
        for &eps in epsilons {
            let pe = scale_permeability(p, eps)?;
            let ext = extend(&build_chain(&effective_c(&pe))?, f, window)?;
            let mut worst: f64 = 0.0;
            for (&t, lim) in times.iter().zip(&limits) {
                worst = worst.max(weierstrass_apply(&ext, t, rule)?.distance(lim)?);
            }
            report.push(eps, &[worst])?;
        }
    } else {
        if !continuous {
            return Err(Error::NotContinuousAtCenter {
                gap: f.center_gap(),
                tol: CENTER_TOL,
            });
        }
        let limits: Vec<StarFunction> = times
            .iter()
            .map(|&t| walsh_sticky_semigroup_apply(&q, t, f, quad))
            .collect::<Result<_>>()?;
        for &eps in epsilons {
            let pe = scale_permeability(p, eps)?;
            let mut worst: f64 = 0.0;
            for (&t, lim) in times.iter().zip(&limits) {
                worst = worst.max(sticky_semigroup_apply(&pe, t, f, quad)?.distance(lim)?);
            }
            report.push(eps, &[worst])?;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use approx::assert_abs_diff_eq;

    #[test]
    fn stehfest_weights_invert_reciprocals() {
        // F̂(λ) = 1/λ inverts to 1 for any t: Σ V_j / j = 1. The weights
        // alternate with magnitudes near 1e11 at order 18, so cancellation
        // caps the attainable accuracy there.
        for (n, tol) in [(8, 1e-12), (12, 1e-9), (16, 1e-7), (18, 1e-5)] {
            let v = stehfest_weights(n).unwrap();
            let s: f64 = v.iter().enumerate().map(|(j, x)| x / (j + 1) as f64).sum();
            assert_abs_diff_eq!(s, 1.0, epsilon = tol);
            // Σ V_j = 0: a constant transform has no regular inverse.
            assert!(v.iter().sum::<f64>().abs() < 1e-12 * v.iter().map(|x| x.abs()).sum::<f64>());
        }
        let v = stehfest_weights(12).unwrap();
        // F̂(λ) = 1/(λ+1) inverts to e^{-t}.
        let t = 0.7;
        let l2 = ln(2.0);
        let approx: f64 = v
            .iter()
            .enumerate()
            .map(|(j, x)| x / ((j + 1) as f64 * l2 / t + 1.0))
            .sum::<f64>()
            * l2
            / t;
        assert_abs_diff_eq!(approx, exp(-t), epsilon = 1e-5);
    }

    #[test]
    fn quadrature_spec_validation() {
        assert!(QuadratureSpec::new(64, 12).is_ok());
        assert!(QuadratureSpec::new(8, 12).is_err());
        assert!(QuadratureSpec::new(64, 13).is_err());
        assert!(QuadratureSpec::new(64, 20).is_err());
        assert_eq!(QuadratureSpec::default(), QuadratureSpec::new(64, 12).unwrap());
    }

    #[test]
    fn constants_are_fixed_by_every_route() {
        let spec = GridSpec::new(8.0, 1.0 / 64.0).unwrap();
        let one = StarFunction::constant(spec, 3, 1.0).unwrap();
        let p = Parameters::snapping(vec![1.0, 2.0, 4.0]).unwrap();
        for t in [0.01, 0.3, 1.0] {
            assert!(snapping_semigroup(&p, t, &one, WeierstrassRule::Trapezoid)
                .unwrap()
                .distance(&one)
                .unwrap()
                <= 1e-12);
            assert!(snapping_semigroup(&p, t, &one, WeierstrassRule::GaussHermite(64))
                .unwrap()
                .distance(&one)
                .unwrap()
                <= 1e-12);
            assert!(sticky_semigroup_apply(&p, t, &one, &QuadratureSpec::default())
                .unwrap()
                .distance(&one)
                .unwrap()
                <= 1e-6);
        }
    }

    #[test]
    fn window_is_checked() {
        let spec = GridSpec::new(8.0, 1.0 / 64.0).unwrap();
        let f = StarFunction::constant(spec, 3, 1.0).unwrap();
        let ext = extend(&build_chain(&[1.0, 2.0, 4.0]).unwrap(), &f, 1.0).unwrap();
        assert!(matches!(
            weierstrass_apply(&ext, 1.0, WeierstrassRule::Trapezoid),
            Err(Error::WindowExceeded { .. })
        ));
        assert!(weierstrass_apply(&ext, 0.005, WeierstrassRule::Trapezoid).is_ok());
    }

    #[test]
    fn sticky_rejects_unresolvable_times() {
        let spec = GridSpec::new(8.0, 1.0 / 16.0).unwrap();
        let f = StarFunction::constant(spec, 2, 1.0).unwrap();
        let p = Parameters::new(vec![1.0, 1.0], vec![1.0, 1.0], vec![1.0, 1.0]).unwrap();
        let err = sticky_semigroup_apply(&p, 1e-4, &f, &QuadratureSpec::default()).unwrap_err();
        assert!(err.is_numerical());
    }

    #[test]
    fn sticky_sweep_refuses_discontinuous_data() {
        let spec = GridSpec::new(8.0, 1.0 / 64.0).unwrap();
        let f = StarFunction::per_edge_constant(spec, &[1.0, 0.0]).unwrap();
        let p = Parameters::new(vec![1.0, 0.0], vec![1.0, 1.0], vec![1.0, 1.0]).unwrap();
        let err = semigroup_convergence_sweep(
            &p,
            &f,
            &[0.5],
            &[1.0, 0.1],
            &QuadratureSpec::default(),
            WeierstrassRule::Trapezoid,
        )
        .unwrap_err();
        assert!(matches!(err, Error::NotContinuousAtCenter { .. }));
    }
}
