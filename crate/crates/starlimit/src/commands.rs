//! One function per subcommand; each returns the tables to write.

use std::time::Instant;

use starlimit_core::kelvin::{cartesian_cosine, cosine_convergence_sweep, cosine_divergence_sweep, extend};
use starlimit_core::markov::build_chain;
use starlimit_core::montecarlo::{McConfig, WalkProcess};
use starlimit_core::resolvent::{
    interior_residual, resolvent_convergence_sweep, snapping_out_resolvent, transmission_residual,
    walsh_flux_residual, walsh_resolvent, ResolventSolution,
};
use starlimit_core::semigroup::{
    semigroup_convergence_sweep, snapping_semigroup, sticky_semigroup_apply, walsh_semigroup,
};
use starlimit_core::{Parameters, StarFunction, CENTER_TOL};

use crate::checks::{self, Check};
use crate::config::{RunConfig, Setup};
use crate::error::CliError;
use crate::mc::{estimate_parallel, with_threads};
use crate::output::{Cell, Table};

pub const SUBCOMMANDS: [&str; 12] = [
    "resolvent",
    "walsh-resolvent",
    "markov",
    "cosine",
    "semigroup",
    "sticky-semigroup",
    "converge-resolvent",
    "converge-semigroup",
    "converge-cosine",
    "diverge-cosine",
    "mc",
    "selftest",
];

/// Rows of value tables: at most this many sample points per edge.
const VALUE_SAMPLES: usize = 200;

/// Tables produced by a run plus named phase timings. A failed selftest
/// still produces its tables; `failure` then carries the exit reason.
pub struct RunOutput {
    pub tables: Vec<Table>,
    pub timings: Vec<(String, f64)>,
    pub failure: Option<CliError>,
}

struct Timer {
    timings: Vec<(String, f64)>,
}

impl Timer {
    fn new() -> Self {
        Timer { timings: Vec::new() }
    }

    fn phase<T>(&mut self, name: &str, op: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = op();
        self.timings.push((name.to_string(), start.elapsed().as_secs_f64()));
        out
    }
}

pub fn dispatch(subcommand: &str, cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let setup = cfg.setup()?;
    let mut timer = Timer::new();
    let mut failure = None;
    let tables = match subcommand {
        "resolvent" => resolvent(cfg, &setup, &mut timer)?,
        "walsh-resolvent" => walsh_resolvent_cmd(cfg, &setup, &mut timer)?,
        "markov" => markov(cfg, &setup, &mut timer)?,
        "cosine" => cosine(cfg, &setup, &mut timer)?,
        "semigroup" => semigroup(cfg, &setup, &mut timer)?,
        "sticky-semigroup" => sticky_semigroup(cfg, &setup, &mut timer)?,
        "converge-resolvent" => converge_resolvent(cfg, &setup, &mut timer)?,
        "converge-semigroup" => converge_semigroup(cfg, &setup, &mut timer)?,
        "converge-cosine" => converge_cosine(cfg, &setup, &mut timer)?,
        "diverge-cosine" => diverge_cosine(cfg, &setup, &mut timer)?,
        "mc" => mc(cfg, &setup, &mut timer)?,
        "selftest" => {
            let checks = selftest(cfg, &setup, &mut timer)?;
            let failed: Vec<&str> = checks.iter().filter(|c| !c.passed()).map(|c| c.name.as_str()).collect();
            if !failed.is_empty() {
                failure = Some(CliError::Numerical(format!("selftest failed: {}", failed.join(", "))));
            }
            vec![checks_table(&checks)]
        }
        other => return Err(CliError::Validation(format!("unknown subcommand `{other}`"))),
    };
    Ok(RunOutput {
        tables,
        timings: timer.timings,
        failure,
    })
}

fn required<'a>(name: &str, v: &'a [f64]) -> Result<&'a [f64], CliError> {
    if v.is_empty() {
        Err(CliError::field(name, "needs at least one value for this subcommand"))
    } else {
        Ok(v)
    }
}

fn indexed(prefix: &str, k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("{prefix}_{i}")).collect()
}

fn header(fixed: &[&str], groups: &[(&str, usize)]) -> Vec<String> {
    let mut h: Vec<String> = fixed.iter().map(|s| s.to_string()).collect();
    for (prefix, k) in groups {
        h.extend(indexed(prefix, *k));
    }
    h
}

fn nums(v: &[f64]) -> impl Iterator<Item = Cell> + '_ {
    v.iter().map(|&x| Cell::Num(x))
}

/// Permeabilities of the equivalent `a = 0`, `b = 1` problem; the cosine
/// and Weierstrass routes need a non-sticky center.
fn effective_c(p: &Parameters) -> Result<Vec<f64>, CliError> {
    if let Some(i) = p.a().iter().position(|&a| a != 0.0) {
        return Err(CliError::field(
            &format!("a[{i}]"),
            "this subcommand needs a non-sticky center (a = 0); use sticky-semigroup",
        ));
    }
    Ok(p.c().iter().zip(p.b()).map(|(c, b)| c / b).collect())
}

fn require_continuous(f: &StarFunction) -> Result<(), CliError> {
    if f.is_continuous_at_center(CENTER_TOL) {
        Ok(())
    } else {
        Err(CliError::field("test_function", "must be continuous at the center for this subcommand"))
    }
}

/// Samples `f` at up to `VALUE_SAMPLES` grid nodes per edge, rows led by `lead`.
fn push_values(table: &mut Table, lead: f64, f: &StarFunction) {
    let spec = f.spec();
    let stride = (spec.len() / VALUE_SAMPLES).max(1);
    let mut j = 0;
    while j < spec.len() {
        let mut row = vec![Cell::Num(lead), Cell::Num(spec.node(j))];
        row.extend((0..f.k()).map(|i| Cell::Num(f.edge(i).values()[j])));
        table.push(row);
        j += stride;
    }
}

fn values_table(name: &str, lead: &str, k: usize) -> Table {
    Table::with_header(name, header(&[lead, "x"], &[("f", k)]))
}

fn tail_error(sol: &ResolventSolution, g: &StarFunction) -> f64 {
    let f = sol.solution();
    f.tails()
        .iter()
        .zip(g.tails())
        .map(|(a, b)| (a - b / sol.lambda()).abs())
        .fold(0.0, f64::max)
}

fn resolvent(cfg: &RunConfig, s: &Setup, timer: &mut Timer) -> Result<Vec<Table>, CliError> {
    let k = cfg.k;
    let lambdas = required("lambdas", &cfg.lambdas)?;
    let mut table = Table::with_header(
        "resolvent",
        header(
            &[
                "lambda",
                "g_sup_norm",
                "f_sup_norm",
                "interior_residual",
                "transmission_residual",
                "contraction_slack",
                "tail_error",
            ],
            &[("C", k), ("D", k)],
        ),
    );
    let mut values = values_table("resolvent_values", "lambda", k);
    let g_norm = s.f.sup_norm();
    for &lambda in lambdas {
        let sol = timer.phase(&format!("solve[{lambda}]"), || snapping_out_resolvent(&s.params, lambda, &s.f))?;
        let f = sol.solution();
        let tr = transmission_residual(&sol, &s.params).iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let mut row = vec![
            Cell::Num(lambda),
            Cell::Num(g_norm),
            Cell::Num(f.sup_norm()),
            Cell::Num(interior_residual(&sol)),
            Cell::Num(tr),
            Cell::Num(g_norm - lambda * f.sup_norm()),
            Cell::Num(tail_error(&sol, &s.f)),
        ];
        row.extend(nums(sol.c_coef()));
        row.extend(nums(sol.d_coef()));
        table.push(row);
        push_values(&mut values, lambda, &f);
    }
    Ok(vec![table, values])
}

fn walsh_resolvent_cmd(cfg: &RunConfig, s: &Setup, timer: &mut Timer) -> Result<Vec<Table>, CliError> {
    let k = cfg.k;
    let lambdas = required("lambdas", &cfg.lambdas)?;
    require_continuous(&s.f)?;
    let mut table = Table::with_header(
        "walsh_resolvent",
        header(
            &[
                "lambda",
                "g_sup_norm",
                "f_sup_norm",
                "interior_residual",
                "flux_residual",
                "center_gap",
                "contraction_slack",
                "tail_error",
                "f_center",
            ],
            &[],
        ),
    );
    let mut values = values_table("walsh_resolvent_values", "lambda", k);
    let g_norm = s.f.sup_norm();
    for &lambda in lambdas {
        let sol = timer.phase(&format!("solve[{lambda}]"), || walsh_resolvent(&s.walsh, lambda, &s.f))?;
        let f = sol.solution();
        table.push(vec![
            Cell::Num(lambda),
            Cell::Num(g_norm),
            Cell::Num(f.sup_norm()),
            Cell::Num(interior_residual(&sol)),
            Cell::Num(walsh_flux_residual(&sol, &s.walsh)),
            Cell::Num(f.center_gap()),
            Cell::Num(g_norm - lambda * f.sup_norm()),
            Cell::Num(tail_error(&sol, &s.f)),
            Cell::Num(sol.center_values()[0]),
        ]);
        push_values(&mut values, lambda, &f);
    }
    Ok(vec![table, values])
}

const DEFAULT_MARKOV_TIMES: [f64; 5] = [0.0, 0.1, 0.5, 1.0, 2.0];

fn markov(cfg: &RunConfig, s: &Setup, timer: &mut Timer) -> Result<Vec<Table>, CliError> {
    let k = cfg.k;
    let chain = timer.phase("spectrum", || build_chain(s.params.c()))?;
    let mut summary = Table::with_header("markov", header(&["k", "omega", "M", "M0"], &[("alpha", k)]));
    let mut row = vec![
        Cell::Int(k as i64),
        Cell::Num(chain.omega()),
        Cell::Num(chain.m()),
        Cell::Num(chain.m0()),
    ];
    row.extend(nums(chain.alpha()));
    summary.push(row);
    let times: &[f64] = if cfg.times.is_empty() {
        &DEFAULT_MARKOV_TIMES
    } else {
        &cfg.times
    };
    let mut slack = Table::new(
        "markov_slack",
        &["t", "normalized_slack", "transition_slack", "derivative_slack", "operator_slack", "min_slack"],
    );
    timer.phase("bounds", || -> Result<(), CliError> {
        for &t in times {
            let m = chain.check_mixing_bounds(&[t])?;
            slack.push(vec![
                Cell::Num(t),
                Cell::Num(m.normalized),
                Cell::Num(m.transition),
                Cell::Num(m.derivative),
                Cell::Num(m.operator),
                Cell::Num(m.min()),
            ]);
        }
        Ok(())
    })?;
    Ok(vec![summary, slack])
}

fn cosine(cfg: &RunConfig, s: &Setup, timer: &mut Timer) -> Result<Vec<Table>, CliError> {
    let k = cfg.k;
    let times = required("times", &cfg.times)?;
    let c = effective_c(&s.params)?;
    let chain = build_chain(&c)?;
    let norm = s.f.sup_norm().max(f64::MIN_POSITIVE);
    let ext = timer.phase("extend", || extend(&chain, &s.f, cfg.t_max))?;
    let mut table = Table::with_header(
        "cosine",
        header(&["t", "sup_norm", "norm_bound", "equation_residual"], &[("center", k)]),
    );
    let mut values = values_table("cosine_values", "t", k);
    for &t in times {
        let (ct, residual) = timer.phase(&format!("apply[{t}]"), || -> Result<_, CliError> {
            let ct = cartesian_cosine(&ext, t)?;
            // 2 Cos(t) Cos(s) f = Cos(t+s) f + Cos(t-s) f over the listed s.
            let ext_t = extend(&chain, &ct, cfg.t_max)?;
            let mut residual = 0.0f64;
            for &sv in times.iter().filter(|sv| **sv + t <= cfg.t_max) {
                let lhs = cartesian_cosine(&ext_t, sv)?.map(|v| 2.0 * v);
                let plus = cartesian_cosine(&ext, t + sv)?;
                let minus = cartesian_cosine(&ext, (t - sv).abs())?;
                residual = residual.max(lhs.distance(&plus.zip_with(&minus, |a, b| a + b)?)? / norm);
            }
            Ok((ct, residual))
        })?;
        let mut row = vec![
            Cell::Num(t),
            Cell::Num(ct.sup_norm()),
            Cell::Num(chain.m() * s.f.sup_norm()),
            Cell::Num(residual),
        ];
        row.extend(nums(&ct.center_values()));
        table.push(row);
        push_values(&mut values, t, &ct);
    }
    Ok(vec![table, values])
}

fn semigroup_rows(
    name: &str,
    k: usize,
    times: &[f64],
    s: &Setup,
    timer: &mut Timer,
    apply: impl Fn(f64, &StarFunction) -> starlimit_core::Result<StarFunction>,
) -> Result<Vec<Table>, CliError> {
    let one = StarFunction::constant(s.spec, k, 1.0)?;
    let mut table = Table::with_header(
        name,
        header(&["t", "sup_norm", "min_value", "conservation_error"], &[("center", k)]),
    );
    let mut values = values_table(&format!("{name}_values"), "t", k);
    for &t in times {
        let (tf, t1) = timer.phase(&format!("apply[{t}]"), || -> Result<_, CliError> {
            Ok((apply(t, &s.f)?, apply(t, &one)?))
        })?;
        let min = tf
            .edges()
            .iter()
            .flat_map(|e| e.values().iter().copied().chain([e.tail()]))
            .fold(f64::INFINITY, f64::min);
        let mut row = vec![
            Cell::Num(t),
            Cell::Num(tf.sup_norm()),
            Cell::Num(min),
            Cell::Num(t1.distance(&one)?),
        ];
        row.extend(nums(&tf.center_values()));
        table.push(row);
        push_values(&mut values, t, &tf);
    }
    Ok(vec![table, values])
}

fn semigroup(cfg: &RunConfig, s: &Setup, timer: &mut Timer) -> Result<Vec<Table>, CliError> {
    let times = required("times", &cfg.times)?;
    effective_c(&s.params)?;
    semigroup_rows("semigroup", cfg.k, times, s, timer, |t, f| {
        snapping_semigroup(&s.params, t, f, s.rule)
    })
}

fn sticky_semigroup(cfg: &RunConfig, s: &Setup, timer: &mut Timer) -> Result<Vec<Table>, CliError> {
    let times = required("times", &cfg.times)?;
    if let Some(i) = times.iter().position(|&t| t == 0.0) {
        return Err(CliError::field(&format!("times[{i}]"), "must be > 0 for resolvent inversion"));
    }
    semigroup_rows("sticky_semigroup", cfg.k, times, s, timer, |t, f| {
        sticky_semigroup_apply(&s.params, t, f, &s.quadrature)
    })
}

fn converge_resolvent(cfg: &RunConfig, s: &Setup, timer: &mut Timer) -> Result<Vec<Table>, CliError> {
    let lambdas = required("lambdas", &cfg.lambdas)?;
    let eps = required("epsilons", &cfg.epsilons)?;
    let mut table: Option<Table> = None;
    for &lambda in lambdas {
        let report = timer.phase(&format!("sweep[{lambda}]"), || {
            resolvent_convergence_sweep(&s.params, lambda, &s.f, eps)
        })?;
        let lead = [("lambda", Cell::Num(lambda))];
        match table.as_mut() {
            None => table = Some(Table::from_report("converge_resolvent", &lead, &report)),
            Some(t) => t.append_report(&lead, &report),
        }
    }
    Ok(vec![table.expect("at least one lambda")])
}

fn converge_semigroup(cfg: &RunConfig, s: &Setup, timer: &mut Timer) -> Result<Vec<Table>, CliError> {
    let times = required("times", &cfg.times)?;
    let eps = required("epsilons", &cfg.epsilons)?;
    let report = timer.phase("sweep", || {
        semigroup_convergence_sweep(&s.params, &s.f, times, eps, &s.quadrature, s.rule)
    })?;
    Ok(vec![Table::from_report("converge_semigroup", &[], &report)])
}

fn converge_cosine(cfg: &RunConfig, s: &Setup, timer: &mut Timer) -> Result<Vec<Table>, CliError> {
    let times = required("times", &cfg.times)?;
    let eps = required("epsilons", &cfg.epsilons)?;
    let c = effective_c(&s.params)?;
    require_continuous(&s.f)?;
    let report = timer.phase("sweep", || cosine_convergence_sweep(&c, &s.f, times, eps, cfg.t_max))?;
    Ok(vec![Table::from_report("converge_cosine", &[], &report)])
}

fn diverge_cosine(cfg: &RunConfig, s: &Setup, timer: &mut Timer) -> Result<Vec<Table>, CliError> {
    let times = required("times", &cfg.times)?;
    let eps = required("epsilons", &cfg.epsilons)?;
    let c = effective_c(&s.params)?;
    let report = timer.phase("sweep", || cosine_divergence_sweep(&c, &s.f, times, eps, cfg.t_max))?;
    Ok(vec![Table::from_report("diverge_cosine", &[], &report)])
}

fn mc_config(cfg: &RunConfig) -> McConfig {
    McConfig {
        h: cfg.mc.h,
        trajectories: cfg.mc.trajectories,
        master_seed: cfg.mc.master_seed,
    }
}

fn mc(cfg: &RunConfig, s: &Setup, timer: &mut Timer) -> Result<Vec<Table>, CliError> {
    let times = required("times", &cfg.times)?;
    if let Some(i) = times.iter().position(|&t| t == 0.0) {
        return Err(CliError::field(&format!("times[{i}]"), "must be > 0"));
    }
    let snapping = cfg.snapping_walk(&s.params)?;
    let start = cfg.mc_start()?;
    let x0 = cfg.mc.start_x;
    let mcfg = mc_config(cfg);
    let mut table = Table::new(
        "mc",
        &["process", "t", "time_reached", "steps", "mean", "stderr", "analytic", "difference"],
    );
    let mut processes = vec![("snapping", snapping)];
    // No walk is defined for a sticky Walsh center.
    if s.walsh.beta() == 0.0 {
        processes.push((
            "walsh",
            WalkProcess::Walsh {
                alpha: s.walsh.alpha().to_vec(),
            },
        ));
    }
    for (name, process) in &processes {
        for &t in times {
            let est = timer.phase(&format!("{name}[{t}]"), || estimate_parallel(process, &s.f, start, t, &mcfg))?;
            let exact = match process {
                WalkProcess::Snapping { .. } => snapping_semigroup(&s.params, est.time, &s.f, s.rule)?,
                WalkProcess::Walsh { alpha } => walsh_semigroup(alpha, est.time, &s.f, s.rule)?,
            };
            let analytic = exact.eval(start.0, x0)?;
            table.push(vec![
                Cell::from(*name),
                Cell::Num(t),
                Cell::Num(est.time),
                Cell::Int(est.steps as i64),
                Cell::Num(est.mean),
                Cell::Num(est.stderr),
                Cell::Num(analytic),
                Cell::Num(est.mean - analytic),
            ]);
        }
    }
    Ok(vec![table])
}

const DEFAULT_SELFTEST_LAMBDAS: [f64; 2] = [1.0, 4.0];
const DEFAULT_SELFTEST_TIMES: [f64; 3] = [0.25, 0.5, 1.0];
const SELFTEST_SYSTEMS: usize = 1000;
const SELFTEST_TRAJECTORIES: usize = 2000;

fn selftest(cfg: &RunConfig, s: &Setup, timer: &mut Timer) -> Result<Vec<Check>, CliError> {
    let lambdas: &[f64] = if cfg.lambdas.is_empty() {
        &DEFAULT_SELFTEST_LAMBDAS
    } else {
        &cfg.lambdas
    };
    let times: &[f64] = if cfg.times.is_empty() {
        &DEFAULT_SELFTEST_TIMES
    } else {
        &cfg.times
    };
    let mut out = Vec::new();
    out.extend(timer.phase("linsys", || checks::lemma_checks(cfg.mc.master_seed, SELFTEST_SYSTEMS))?);
    out.extend(timer.phase("resolvent", || checks::resolvent_checks(&s.params, &s.walsh, &s.f, lambdas))?);
    out.extend(timer.phase("markov", || checks::markov_checks(s.params.c(), times))?);
    if let Ok(c) = effective_c(&s.params) {
        let pure = Parameters::snapping(c.clone())?;
        let fixture = checks::domain_class_fixture(&pure, s.spec)?;
        out.extend(timer.phase("kelvin", || checks::kelvin_checks(&c, &fixture, times, cfg.t_max))?);
        out.extend(timer.phase("semigroup", || checks::semigroup_checks(&c, &s.f, times, s.rule))?);
        let walk = cfg.snapping_walk(&s.params)?;
        let start = cfg.mc_start()?;
        let mcfg = McConfig {
            trajectories: cfg.mc.trajectories.min(SELFTEST_TRAJECTORIES),
            ..mc_config(cfg)
        };
        let t = times.iter().copied().find(|t| *t > 0.0).unwrap_or(0.25);
        let (one, many) = timer.phase("mc", || -> Result<_, CliError> {
            let one = with_threads(1, || estimate_parallel(&walk, &s.f, start, t, &mcfg))?;
            let many = estimate_parallel(&walk, &s.f, start, t, &mcfg)?;
            Ok((one, many))
        })?;
        let same = one.mean.to_bits() == many.mean.to_bits() && one.stderr.to_bits() == many.stderr.to_bits();
        out.push(Check::at_most("mc.thread_mismatch", if same { 0.0 } else { 1.0 }, 0.0));
    }
    Ok(out)
}

pub fn checks_table(checks: &[Check]) -> Table {
    let mut t = Table::new("selftest", &["check", "value", "relation", "bound", "passed"]);
    for c in checks {
        t.push(vec![
            Cell::Text(c.name.clone()),
            Cell::Num(c.value),
            Cell::from(c.relation.symbol()),
            Cell::Num(c.bound),
            Cell::Int(c.passed() as i64),
        ]);
    }
    t
}
