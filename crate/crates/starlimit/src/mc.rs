//! Trajectories in parallel with results independent of the thread count.

use rayon::prelude::*;
use starlimit_core::montecarlo::{prepare, summarize, trajectory_value, McConfig, McEstimate, WalkProcess};
use starlimit_core::{Result, StarFunction};

/// Same estimate as `montecarlo::estimate_observable`, with trajectories
/// spread over the current rayon pool. Each trajectory owns its random
/// stream and results are reduced in index order, so the output is
/// bit-identical for any number of threads.
pub fn estimate_parallel(
    process: &WalkProcess,
    f: &StarFunction,
    x0: (usize, u64),
    t: f64,
    mc: &McConfig,
) -> Result<McEstimate> {
    let (start, steps, time) = prepare(process, f, x0, t, mc)?;
    let values: Vec<f64> = (0..mc.trajectories as u64)
        .into_par_iter()
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

/// Run `op` on a pool with `threads` workers (`0`: rayon's default).
pub fn with_threads<T: Send>(threads: usize, op: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool")
        .install(op)
}
