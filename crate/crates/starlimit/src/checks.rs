//! Invariant checks shared by `selftest` and the acceptance suite.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use starlimit_core::families::TestFunction;
use starlimit_core::kelvin::{cartesian_cosine, extend};
use starlimit_core::linsys::{contraction_norm, solve_direct, solve_reduced};
use starlimit_core::markov::build_chain;
use starlimit_core::resolvent::{
    interior_residual, snapping_out_resolvent, transmission_residual, walsh_flux_residual, walsh_resolvent,
};
use starlimit_core::semigroup::{required_window, weierstrass_apply, WeierstrassRule};
use starlimit_core::{LemmaSystem, Parameters, StarFunction, WalshParameters, CENTER_TOL};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    AtMost,
    Below,
    AtLeast,
}

impl Relation {
    pub fn symbol(&self) -> &'static str {
        match self {
            Relation::AtMost => "<=",
            Relation::Below => "<",
            Relation::AtLeast => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub bound: f64,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            value,
            relation: Relation::AtMost,
            bound,
        }
    }

    pub fn below(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            value,
            relation: Relation::Below,
            bound,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            value,
            relation: Relation::AtLeast,
            bound,
        }
    }

    pub fn passed(&self) -> bool {
        match self.relation {
            Relation::AtMost => self.value <= self.bound,
            Relation::Below => self.value < self.bound,
            Relation::AtLeast => self.value >= self.bound,
        }
    }
}

fn max_abs_diff(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

/// Random transmission systems: `k ∈ [2, 8]`, `A_i` and `ε` uniform in
/// `(0, 10]`, `B_i, C_i` uniform in `[-10, 10]`.
pub fn random_system(rng: &mut ChaCha8Rng) -> (LemmaSystem, f64) {
    let k = rng.gen_range(2..=8);
    let mut positive = || 10.0 * (1.0 - rng.gen::<f64>());
    let a = (0..k).map(|_| positive()).collect();
    let eps = positive();
    let b = (0..k).map(|_| rng.gen_range(-10.0..=10.0)).collect();
    let c = (0..k).map(|_| rng.gen_range(-10.0..=10.0)).collect();
    (LemmaSystem::new(a, b, c).expect("valid system"), eps)
}

/// Direct vs reduced solves, conservation, contraction and the order of
/// the `ε → 0` limit over `systems` random systems.
pub fn lemma_checks(seed: u64, systems: usize) -> Result<Vec<Check>, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut agree, mut conserve, mut contraction) = (0.0f64, 0.0f64, 0.0f64);
    let mut slope = f64::INFINITY;
    for _ in 0..systems {
        let (sys, eps) = random_system(&mut rng);
        let d = solve_direct(&sys, eps)?;
        let r = solve_reduced(&sys, eps)?;
        agree = agree.max(max_abs_diff(&d, &r));
        let total: f64 = sys.a().iter().zip(&r).map(|(a, x)| a * x).sum();
        conserve = conserve.max((total - sys.conserved_sum()).abs());
        contraction = contraction.max(contraction_norm(&sys, eps)).max(contraction_norm(&sys, 0.0));
        slope = slope.min(limit_slope(&sys)?);
    }
    Ok(vec![
        Check::at_most("linsys.solver_agreement", agree, 1e-8),
        Check::at_most("linsys.conservation", conserve, 1e-10),
        Check::below("linsys.contraction_norm", contraction, 1.0),
        Check::at_least("linsys.limit_slope", slope, 0.9),
    ])
}

/// Log-log slope of `max|D(ε) - D(0)|` over `ε = 2^-1 .. 2^-20`, by least
/// squares. Points at rounding level are dropped; a system whose solution
/// does not move at all returns infinity.
pub fn limit_slope(sys: &LemmaSystem) -> Result<f64, CliError> {
    let d0 = solve_reduced(sys, 0.0)?;
    let floor = 1e-11 * (1.0 + d0.iter().fold(0.0f64, |m, x| m.max(x.abs())));
    let mut pts = Vec::new();
    for m in 1..=20 {
        let eps = 0.5f64.powi(m);
        let gap = max_abs_diff(&solve_reduced(sys, eps)?, &d0);
        if gap > floor {
            pts.push((eps.ln(), gap.ln()));
        }
    }
    if pts.len() < 3 {
        return Ok(f64::INFINITY);
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok(sxy / sxx)
}

/// Residual checks of the snapping-out resolvent and, for data continuous
/// at the center, the Walsh resolvent.
pub fn resolvent_checks(
    p: &Parameters,
    q: &WalshParameters,
    g: &StarFunction,
    lambdas: &[f64],
) -> Result<Vec<Check>, CliError> {
    let norm = g.sup_norm().max(f64::MIN_POSITIVE);
    let mut out = Vec::new();
    for &lambda in lambdas {
        let tag = |s: &str| format!("resolvent[{lambda}].{s}");
        let sol = snapping_out_resolvent(p, lambda, g)?;
        let f = sol.solution();
        out.push(Check::at_most(tag("interior_residual"), interior_residual(&sol) / norm, 5e-4));
        let tr = transmission_residual(&sol, p).iter().fold(0.0f64, |m, x| m.max(x.abs()));
        out.push(Check::at_most(tag("transmission_residual"), tr / norm, 5e-3));
        out.push(Check::at_most(tag("contraction"), lambda * f.sup_norm() - g.sup_norm(), 1e-9));
        let tail = max_abs_diff(&f.tails(), &g.tails().iter().map(|x| x / lambda).collect::<Vec<_>>());
        out.push(Check::at_most(tag("tail_law"), tail, 1e-9));
        if g.is_continuous_at_center(CENTER_TOL) {
            let w = walsh_resolvent(q, lambda, g)?;
            let wf = w.solution();
            out.push(Check::at_most(
                tag("walsh_flux_residual"),
                walsh_flux_residual(&w, q).abs() / norm,
                5e-3,
            ));
            out.push(Check::at_most(tag("walsh_center_gap"), wf.center_gap(), 1e-10));
            out.push(Check::at_most(tag("walsh_contraction"), lambda * wf.sup_norm() - g.sup_norm(), 1e-9));
        }
    }
    Ok(out)
}

/// Invariant measure, detailed balance, stochasticity and mixing bounds.
pub fn markov_checks(c: &[f64], times: &[f64]) -> Result<Vec<Check>, CliError> {
    let chain = build_chain(c)?;
    let q = chain.q();
    let alpha = chain.alpha();
    let k = chain.k();
    let mut stationary = 0.0f64;
    let mut balance = 0.0f64;
    for j in 0..k {
        let s: f64 = (0..k).map(|i| alpha[i] * q[(i, j)]).sum();
        stationary = stationary.max(s.abs());
        for i in 0..k {
            balance = balance.max((alpha[i] * q[(i, j)] - alpha[j] * q[(j, i)]).abs());
        }
    }
    let mut rows = 0.0f64;
    let mut negative = 0.0f64;
    for &t in times {
        let p = chain.transition_matrix(t)?;
        for i in 0..k {
            let s: f64 = (0..k).map(|j| p[(i, j)]).sum();
            rows = rows.max((s - 1.0).abs());
            for j in 0..k {
                negative = negative.max(-p[(i, j)]);
            }
        }
    }
    let slack = chain.check_mixing_bounds(times)?;
    Ok(vec![
        Check::at_most("markov.stationarity", stationary, 1e-12 * chain.cmax()),
        Check::at_most("markov.detailed_balance", balance, 1e-12 * chain.cmax()),
        Check::at_most("markov.row_sums", rows, 1e-12),
        Check::at_most("markov.negative_entries", negative, 1e-12),
        Check::at_least("markov.mixing_slack", slack.min(), -1e-10),
    ])
}

/// Domain-class data `(v_i + θ_i x) e^{-x²}` for `p`, with fixed values.
pub fn domain_class_fixture(p: &Parameters, spec: starlimit_core::GridSpec) -> Result<StarFunction, CliError> {
    let values: Vec<f64> = (0..p.k()).map(|i| [1.0, -0.5, 0.25, 0.75][i % 4] / (1 + i / 4) as f64).collect();
    Ok(TestFunction::DomainClass { values, width: 1.0 }.build(spec, p)?)
}

/// Compatibility, norm bound and the cosine functional equation for
/// permeabilities `c` (with `a = 0`, `b = 1`) over all pairs from `times`
/// that fit in the window.
pub fn kelvin_checks(c: &[f64], f: &StarFunction, times: &[f64], t_max: f64) -> Result<Vec<Check>, CliError> {
    let chain = build_chain(c)?;
    let ext = extend(&chain, f, t_max)?;
    let mut compat = 0.0f64;
    for i in 0..f.k() {
        compat = compat.max((ext.minus().edge(i).values()[0] - ext.plus().edge(i).values()[0]).abs());
    }
    let norm = f.sup_norm().max(f64::MIN_POSITIVE);
    let bound = chain.m() * norm;
    let mut ratio = ext.sup_norm() / bound;
    let mut equation = 0.0f64;
    for &s in times.iter().filter(|s| **s <= t_max) {
        let cs = cartesian_cosine(&ext, s)?;
        ratio = ratio.max(cs.sup_norm() / bound);
        let ext_s = extend(&chain, &cs, t_max)?;
        for &t in times.iter().filter(|t| **t + s <= t_max) {
            let lhs = cartesian_cosine(&ext_s, t)?.map(|v| 2.0 * v);
            let rhs = cartesian_cosine(&ext, t + s)?.zip_with(&cartesian_cosine(&ext, t - s)?, |a, b| a + b)?;
            equation = equation.max(lhs.distance(&rhs)? / norm);
        }
    }
    Ok(vec![
        Check::at_most("kelvin.compatibility", compat, 0.0),
        Check::at_most("kelvin.norm_bound_ratio", ratio, 1.0 + 1e-6),
        Check::at_most("kelvin.functional_equation", equation, 1e-6),
    ])
}

/// Conservativity, positivity, contraction and Chapman–Kolmogorov of the
/// Weierstrass semigroup for permeabilities `c` (`a = 0`, `b = 1`).
pub fn semigroup_checks(c: &[f64], f: &StarFunction, times: &[f64], rule: WeierstrassRule) -> Result<Vec<Check>, CliError> {
    let chain = build_chain(c)?;
    let positive_times: Vec<f64> = times.iter().copied().filter(|t| *t > 0.0).collect();
    let t_hi = positive_times.iter().copied().fold(0.0, f64::max);
    let window = required_window(2.0 * t_hi, rule).max(f.spec().step());
    let one = StarFunction::constant(*f.spec(), f.k(), 1.0)?;
    let square = f.map(|v| v * v);
    let ext_one = extend(&chain, &one, window)?;
    let ext_f = extend(&chain, f, window)?;
    let ext_sq = extend(&chain, &square, window)?;
    let norm = f.sup_norm().max(f64::MIN_POSITIVE);
    let (mut conserve, mut negative, mut growth, mut ck) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for &t in &positive_times {
        conserve = conserve.max(weierstrass_apply(&ext_one, t, rule)?.distance(&one)?);
        let tsq = weierstrass_apply(&ext_sq, t, rule)?;
        for e in tsq.edges() {
            negative = negative.max(e.values().iter().fold(0.0f64, |m, v| m.max(-v)));
        }
        let tf = weierstrass_apply(&ext_f, t, rule)?;
        growth = growth.max(tf.sup_norm() / norm - 1.0);
        let ext_tf = extend(&chain, &tf, window)?;
        for &s in &positive_times {
            let lhs = weierstrass_apply(&ext_tf, s, rule)?;
            let rhs = weierstrass_apply(&ext_f, s + t, rule)?;
            ck = ck.max(lhs.distance(&rhs)? / norm);
        }
    }
    Ok(vec![
        Check::at_most("semigroup.conservativity", conserve, 1e-8),
        Check::at_most("semigroup.negativity", negative, 1e-8),
        Check::at_most("semigroup.growth", growth, 1e-6),
        Check::at_most("semigroup.chapman_kolmogorov", ck, 1e-4),
    ])
}
