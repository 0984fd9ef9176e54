//! Numerical core for diffusions on the star graph `K_{1,k}`.
//!
//! The crate evaluates the resolvents of the snapping-out generator (a
//! Brownian motion on `k` half-lines glued through a semipermeable membrane)
//! and of Walsh's sticky spider, builds the Kelvin image extensions that turn
//! the snapping-out generator into a cosine-family generator, derives
//! semigroups from both, and simulates the corresponding random walks.
//!
//! Functions on the compactified star are stored on a truncated uniform grid
//! with an explicit value at infinity (see [`grid`]). Everything here is
//! `no_std` with `alloc`; file formats, the CLI and thread pools live in the
//! `starlimit` companion crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod error;
pub mod families;
pub mod grid;
pub mod kelvin;
pub mod linsys;
pub mod markov;
pub mod montecarlo;
pub mod params;
pub mod quadrature;
pub mod report;
pub mod resolvent;
pub mod semigroup;

mod math;

pub use error::{Error, Result};
pub use grid::{center_projection, GridFunction, GridSpec, StarFunction, CENTER_TOL};
pub use kelvin::ExtendedStarFunction;
pub use linsys::LemmaSystem;
pub use markov::ChainSpectrum;
pub use params::{Parameters, WalshParameters};
pub use report::{ConvergenceReport, SweepKind};
pub use resolvent::ResolventSolution;

pub use nalgebra;
