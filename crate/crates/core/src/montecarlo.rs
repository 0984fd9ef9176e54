//! Random walks on the star graph with spatial step `h` and time step
//! `h²/2`, approximating the snapping-out motion (`a = 0`, `b = 1`) and the
//! Walsh spider (`β = 0`).
//!
//! Away from the center a walk moves `±1` node per step. At the origin of
//! edge `i` the snapping walk jumps to the origin of another edge, chosen
//! uniformly, with probability `c_i h` and otherwise steps to node 1; the
//! Walsh walk steps to node 1 of edge `j` with probability `α_j`.
//!
//! Trajectory `n` draws from stream `n` of a ChaCha8 generator keyed by the
//! master seed, so results do not depend on how trajectories are scheduled.

use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{check_probability_vector, StarFunction};
use crate::math::{ceil, pairwise_sum, sqrt};

/// Position of a walker: node `pos` (at `x = pos h`) of edge `edge`
/// (0-based).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkState {
    pub edge: usize,
    pub pos: u64,
    pub time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub h: f64,
    pub trajectories: usize,
    pub master_seed: u64,
}

/// Which process the walk approximates.
#[derive(Debug, Clone, PartialEq)]
pub enum WalkProcess {
    /// Snapping-out walk with permeabilities `c` (zeros allowed: a reflecting
    /// edge).
    Snapping { c: Vec<f64> },
    /// Walsh walk with edge weights `alpha` (zeros allowed).
    Walsh { alpha: Vec<f64> },
}

impl WalkProcess {
    pub fn k(&self) -> usize {
        match self {
            WalkProcess::Snapping { c } => c.len(),
            WalkProcess::Walsh { alpha } => alpha.len(),
        }
    }

    /// Check the process against a step `h`.
    pub fn validate(&self, h: f64) -> Result<()> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::invalid("mc.h", "must be finite and > 0"));
        }
        if self.k() < 2 {
            return Err(Error::invalid("k", "need at least two edges"));
        }
        match self {
            WalkProcess::Snapping { c } => {
                for (i, &ci) in c.iter().enumerate() {
                    if !(ci.is_finite() && ci >= 0.0) {
                        return Err(Error::invalid(format!("c[{i}]"), "must be finite and >= 0"));
                    }
                }
                let cmax = c.iter().copied().fold(0.0, f64::max);
                if cmax * h >= 0.5 {
                    return Err(Error::invalid(
                        "mc.h",
                        format!("c_max * h = {} must be < 0.5", cmax * h),
                    ));
                }
                Ok(())
            }
            WalkProcess::Walsh { alpha } => check_probability_vector("alpha", alpha),
        }
    }
}

impl McConfig {
    pub fn validate(&self, process: &WalkProcess) -> Result<()> {
        process.validate(self.h)?;
        if self.trajectories < 2 {
            return Err(Error::invalid("mc.trajectories", "need at least two"));
        }
        Ok(())
    }
}

/// Number of steps and the time `steps h²/2 >= t` they reach.
pub fn step_count(t: f64, h: f64) -> (u64, f64) {
    let dt = 0.5 * h * h;
    let n = ceil(t / dt - 1e-9).max(0.0) as u64;
    (n, n as f64 * dt)
}

/// Destination from the origin of edge `i` for a uniform draw `u ∈ [0, 1)`:
/// `u < c_i h` jumps, spreading the jump interval evenly over the other edges.
pub fn snapping_boundary_move(i: usize, jump: f64, k: usize, u: f64) -> (usize, u64) {
    if u < jump {
        let r = ((u / jump) * (k - 1) as f64) as usize;
        let r = r.min(k - 2);
        (if r < i { r } else { r + 1 }, 0)
    } else {
        (i, 1)
    }
}

/// Destination from the center for a uniform draw `u ∈ [0, 1)`.
pub fn walsh_boundary_move(alpha: &[f64], u: f64) -> (usize, u64) {
    let mut acc = 0.0;
    let mut last = 0;
    for (j, &a) in alpha.iter().enumerate() {
        if a > 0.0 {
            last = j;
            acc += a;
            if u < acc {
                return (j, 1);
            }
        }
    }
    // Rounding in the cumulative sum: fall back to the last admissible edge.
    (last, 1)
}

#[inline]
fn interior_step<R: RngCore>(state: WalkState, h: f64, rng: &mut R) -> WalkState {
    let up = rng.next_u32() & 1 == 1;
    WalkState {
        edge: state.edge,
        pos: if up { state.pos + 1 } else { state.pos - 1 },
        time: state.time + 0.5 * h * h,
    }
}

/// One step of the snapping-out walk.
pub fn step_snapping<R: RngCore>(state: WalkState, c: &[f64], h: f64, rng: &mut R) -> WalkState {
    if state.pos > 0 {
        return interior_step(state, h, rng);
    }
    let u: f64 = rng.gen();
    let (edge, pos) = snapping_boundary_move(state.edge, c[state.edge] * h, c.len(), u);
    WalkState {
        edge,
        pos,
        time: state.time + 0.5 * h * h,
    }
}

/// One step of the Walsh walk.
pub fn step_walsh<R: RngCore>(state: WalkState, alpha: &[f64], h: f64, rng: &mut R) -> WalkState {
    if state.pos > 0 {
        return interior_step(state, h, rng);
    }
    let u: f64 = rng.gen();
    let (edge, pos) = walsh_boundary_move(alpha, u);
    WalkState {
        edge,
        pos,
        time: state.time + 0.5 * h * h,
    }
}

/// Generator for trajectory `index`.
pub fn trajectory_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Number of up-moves among `m` fair steps: a Binomial(m, ½) draw from the
/// popcount of `m` random bits.
#[inline]
fn fair_ups<R: RngCore>(m: u64, rng: &mut R) -> u64 {
    let mut left = m;
    let mut ups = 0u64;
    while left >= 64 {
        ups += u64::from(rng.next_u64().count_ones());
        left -= 64;
    }
    if left > 0 {
        let mask = (1u64 << left) - 1;
        ups += u64::from((rng.next_u64() & mask).count_ones());
    }
    ups
}

/// Walk `steps` steps from `start`. Excursions away from the center advance
/// in blocks of `m <= pos` steps, which cannot reach the center before their
/// last step, so the result has the law of the step-by-step walk.
pub fn simulate<R: RngCore>(process: &WalkProcess, start: WalkState, steps: u64, h: f64, rng: &mut R) -> WalkState {
    let mut edge = start.edge;
    let mut pos = start.pos;
    let mut left = steps;
    while left > 0 {
        if pos == 0 {
            let u: f64 = rng.gen();
            let (e, p) = match process {
                WalkProcess::Snapping { c } => snapping_boundary_move(edge, c[edge] * h, c.len(), u),
                WalkProcess::Walsh { alpha } => walsh_boundary_move(alpha, u),
            };
            edge = e;
            pos = p;
            left -= 1;
        } else {
            let m = pos.min(left);
            let ups = fair_ups(m, rng);
            pos = pos + 2 * ups - m;
            left -= m;
        }
    }
    WalkState {
        edge,
        pos,
        time: start.time + steps as f64 * 0.5 * h * h,
    }
}

/// Sample mean and standard error of one observation per trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub trajectories: usize,
    pub steps: u64,
    /// Time actually reached, `steps h²/2 >= t`.
    pub time: f64,
}

/// `f` at the end of trajectory `index`.
pub fn trajectory_value(
    process: &WalkProcess,
    f: &StarFunction,
    start: WalkState,
    steps: u64,
    mc: &McConfig,
    index: u64,
) -> f64 {
    let mut rng = trajectory_rng(mc.master_seed, index);
    let end = simulate(process, start, steps, mc.h, &mut rng);
    f.edge(end.edge).value_at(end.pos as f64 * mc.h)
}

/// Mean and standard error with pairwise sums in index order. A constant
/// sample returns that constant and a zero error exactly.
pub fn summarize(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if lo == hi {
        return (lo, 0.0);
    }
    let mean = pairwise_sum(values) / n as f64;
    let dev: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = pairwise_sum(&dev) / (n - 1) as f64;
    (mean, sqrt(var / n as f64))
}

/// Check inputs shared by every estimator; returns the start state and step
/// count.
pub fn prepare(
    process: &WalkProcess,
    f: &StarFunction,
    x0: (usize, u64),
    t: f64,
    mc: &McConfig,
) -> Result<(WalkState, u64, f64)> {
    mc.validate(process)?;
    if process.k() != f.k() {
        return Err(Error::invalid(
            "test_function",
            format!("has {} edges, the process has {}", f.k(), process.k()),
        ));
    }
    if x0.0 >= process.k() {
        return Err(Error::invalid("x0.edge", format!("must be < {}", process.k())));
    }
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::invalid("t", "must be finite and > 0"));
    }
    if !f.is_tail_settled() {
        return Err(Error::invalid("test_function", "must be tail-settled"));
    }
    let (steps, time) = step_count(t, mc.h);
    Ok((
        WalkState {
            edge: x0.0,
            pos: x0.1,
            time: 0.0,
        },
        steps,
        time,
    ))
}

/// Monte Carlo estimate of `(e^{tA} f)(x0)` with `x0 = (edge, node)`.
pub fn estimate_observable(
    process: &WalkProcess,
    f: &StarFunction,
    x0: (usize, u64),
    t: f64,
    mc: &McConfig,
) -> Result<McEstimate> {
    let (start, steps, time) = prepare(process, f, x0, t, mc)?;
    let values: Vec<f64> = (0..mc.trajectories as u64)
        .map(|n| trajectory_value(process, f, start, steps, mc, n))
        .collect();
    let (mean, stderr) = summarize(&values);
    Ok(McEstimate {
        mean,
        stderr,
        trajectories: mc.trajectories,
        steps,
        time,
    })
}
