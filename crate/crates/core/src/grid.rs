//! Functions on `[0, ∞]` and on the star `S_k`, sampled on a truncated
//! uniform grid with an explicit limit at infinity.
//!
//! A [`GridFunction`] is piecewise linear on `[0, L]` and equal to its `tail`
//! for every `x >= L`. A [`StarFunction`] is one grid function per edge, all
//! on the same [`GridSpec`].

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Default tolerance for continuity at the center, `max |f_i(0) - f_j(0)|`.
pub const CENTER_TOL: f64 = 1e-12;

/// Uniform grid `x_j = j h`, `j = 0..=n`, covering `[0, L]` with `L = n h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    length: f64,
    step: f64,
    intervals: usize,
}

impl GridSpec {
    pub const MIN_INTERVALS: usize = 8;

    pub fn new(length: f64, step: f64) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::invalid("grid.L", "must be finite and > 0"));
        }
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::invalid("grid.h", "must be finite and > 0"));
        }
        let ratio = length / step;
        let n = math::round(ratio);
        if (ratio - n).abs() > 1e-12 * ratio.max(1.0) {
            return Err(Error::invalid(
                "grid.h",
                format!("L/h = {ratio} is not an integer"),
            ));
        }
        let intervals = n as usize;
        if intervals < Self::MIN_INTERVALS {
            return Err(Error::invalid(
                "grid.h",
                format!("need at least {} intervals, got {intervals}", Self::MIN_INTERVALS),
            ));
        }
        Ok(GridSpec {
            length: intervals as f64 * step,
            step,
            intervals,
        })
    }

    pub(crate) fn from_intervals(step: f64, intervals: usize) -> Self {
        GridSpec {
            length: intervals as f64 * step,
            step,
            intervals,
        }
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn intervals(&self) -> usize {
        self.intervals
    }

    /// Number of samples, `n + 1`.
    pub fn len(&self) -> usize {
        self.intervals + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn node(&self, j: usize) -> f64 {
        j as f64 * self.step
    }

    /// Same step, with at least `extra` more length (rounded up to whole steps).
    pub fn extended_by(&self, extra: f64) -> GridSpec {
        let more = math::ceil(extra.max(0.0) / self.step - 1e-9) as usize;
        Self::from_intervals(self.step, self.intervals + more)
    }

    /// Interval index and offset for `x` in `[0, L)`.
    #[inline]
    pub(crate) fn locate(&self, x: f64) -> (usize, f64) {
        let j = (math::floor(x / self.step) as usize).min(self.intervals - 1);
        (j, x - self.node(j))
    }
}

/// An element of `C[0, ∞]` on a truncated grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    spec: GridSpec,
    values: Vec<f64>,
    tail: f64,
}

impl GridFunction {
    pub fn new(spec: GridSpec, values: Vec<f64>, tail: f64) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::invalid(
                "values",
                format!("expected {} samples, got {}", spec.len(), values.len()),
            ));
        }
        if !tail.is_finite() || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("values", "samples must be finite"));
        }
        Ok(GridFunction { spec, values, tail })
    }

    pub fn from_fn(spec: GridSpec, f: impl Fn(f64) -> f64, tail: f64) -> Self {
        let values = (0..spec.len()).map(|j| f(spec.node(j))).collect();
        GridFunction { spec, values, tail }
    }

    pub fn constant(spec: GridSpec, m: f64) -> Self {
        GridFunction {
            spec,
            values: alloc::vec![m; spec.len()],
            tail: m,
        }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn tail(&self) -> f64 {
        self.tail
    }

    pub fn at_zero(&self) -> f64 {
        self.values[0]
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::Domain {
                what: format!("evaluation at x = {x} < 0"),
            });
        }
        Ok(self.value_at(x))
    }

    /// Evaluation without the sign check; `x` must be `>= 0`.
    #[inline]
    pub(crate) fn value_at(&self, x: f64) -> f64 {
        if x >= self.spec.length {
            return self.tail;
        }
        let (j, off) = self.spec.locate(x);
        let v0 = self.values[j];
        v0 + (self.values[j + 1] - v0) * (off / self.spec.step)
    }

    /// Sample `j` of this function on a longer grid with the same step.
    #[inline]
    pub(crate) fn sample(&self, j: usize) -> f64 {
        if j < self.values.len() {
            self.values[j]
        } else {
            self.tail
        }
    }

    pub fn is_tail_settled(&self) -> bool {
        let last = self.values[self.spec.intervals];
        (last - self.tail).abs() <= 1e-9 * (1.0 + self.tail.abs())
    }

    pub fn sup_norm(&self) -> f64 {
        self.values
            .iter()
            .fold(self.tail.abs(), |acc, v| acc.max(v.abs()))
    }

    /// The same function on a longer grid with identical step.
    pub fn resample(&self, target: GridSpec) -> Result<GridFunction> {
        if target.step != self.spec.step || target.intervals < self.spec.intervals {
            return Err(Error::GridMismatch);
        }
        let values = (0..target.len()).map(|j| self.sample(j)).collect();
        Ok(GridFunction {
            spec: target,
            values,
            tail: self.tail,
        })
    }

    pub(crate) fn from_parts(spec: GridSpec, values: Vec<f64>, tail: f64) -> Self {
        debug_assert_eq!(values.len(), spec.len());
        GridFunction { spec, values, tail }
    }

    pub(crate) fn zip_with(&self, other: &GridFunction, op: impl Fn(f64, f64) -> f64) -> Self {
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| op(*a, *b))
            .collect();
        GridFunction {
            spec: self.spec,
            values,
            tail: op(self.tail, other.tail),
        }
    }
}

/// An element of `C(S_k)`: `k` edge functions on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct StarFunction {
    edges: Vec<GridFunction>,
}

impl StarFunction {
    pub fn new(edges: Vec<GridFunction>) -> Result<Self> {
        if edges.len() < 2 {
            return Err(Error::invalid("k", "a star needs at least two edges"));
        }
        let spec = edges[0].spec;
        if edges.iter().any(|e| e.spec != spec) {
            return Err(Error::GridMismatch);
        }
        Ok(StarFunction { edges })
    }

    /// `f(i, x)` sampled on every edge; `tails[i]` is the limit at infinity.
    pub fn from_fn(
        spec: GridSpec,
        tails: &[f64],
        f: impl Fn(usize, f64) -> f64,
    ) -> Result<Self> {
        let edges = tails
            .iter()
            .enumerate()
            .map(|(i, &tail)| GridFunction::from_fn(spec, |x| f(i, x), tail))
            .collect();
        Self::new(edges)
    }

    pub fn constant(spec: GridSpec, k: usize, m: f64) -> Result<Self> {
        Self::new((0..k).map(|_| GridFunction::constant(spec, m)).collect())
    }

    pub fn per_edge_constant(spec: GridSpec, values: &[f64]) -> Result<Self> {
        Self::new(
            values
                .iter()
                .map(|&m| GridFunction::constant(spec, m))
                .collect(),
        )
    }

    pub(crate) fn from_edges_unchecked(edges: Vec<GridFunction>) -> Self {
        StarFunction { edges }
    }

    pub fn k(&self) -> usize {
        self.edges.len()
    }

    pub fn spec(&self) -> &GridSpec {
        &self.edges[0].spec
    }

    pub fn edge(&self, i: usize) -> &GridFunction {
        &self.edges[i]
    }

    pub fn edges(&self) -> &[GridFunction] {
        &self.edges
    }

    pub fn eval(&self, i: usize, x: f64) -> Result<f64> {
        self.edges
            .get(i)
            .ok_or_else(|| Error::invalid("edge", format!("index {i} out of range")))?
            .eval(x)
    }

    pub fn center_values(&self) -> Vec<f64> {
        self.edges.iter().map(GridFunction::at_zero).collect()
    }

    pub fn tails(&self) -> Vec<f64> {
        self.edges.iter().map(GridFunction::tail).collect()
    }

    pub fn sup_norm(&self) -> f64 {
        self.edges
            .iter()
            .fold(0.0, |acc, e| acc.max(e.sup_norm()))
    }

    /// `max_{i,j} |f_i(0) - f_j(0)|`.
    pub fn center_gap(&self) -> f64 {
        let (lo, hi) = self
            .edges
            .iter()
            .map(GridFunction::at_zero)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            });
        hi - lo
    }

    pub fn is_continuous_at_center(&self, tol: f64) -> bool {
        self.center_gap() <= tol
    }

    pub(crate) fn require_continuous(&self, tol: f64) -> Result<()> {
        let gap = self.center_gap();
        if gap <= tol {
            Ok(())
        } else {
            Err(Error::NotContinuousAtCenter { gap, tol })
        }
    }

    pub fn is_tail_settled(&self) -> bool {
        self.edges.iter().all(GridFunction::is_tail_settled)
    }

    pub fn sub(&self, other: &StarFunction) -> Result<StarFunction> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn zip_with(
        &self,
        other: &StarFunction,
        op: impl Fn(f64, f64) -> f64 + Copy,
    ) -> Result<StarFunction> {
        if self.k() != other.k() || self.spec() != other.spec() {
            return Err(Error::GridMismatch);
        }
        Ok(StarFunction {
            edges: self
                .edges
                .iter()
                .zip(&other.edges)
                .map(|(a, b)| a.zip_with(b, op))
                .collect(),
        })
    }

    pub fn map(&self, op: impl Fn(f64) -> f64 + Copy) -> StarFunction {
        StarFunction {
            edges: self
                .edges
                .iter()
                .map(|e| GridFunction {
                    spec: e.spec,
                    values: e.values.iter().map(|&v| op(v)).collect(),
                    tail: op(e.tail),
                })
                .collect(),
        }
    }

    /// Sup-norm distance, `sup_norm(self - other)`.
    pub fn distance(&self, other: &StarFunction) -> Result<f64> {
        Ok(self.sub(other)?.sup_norm())
    }
}

pub(crate) fn check_probability_vector(field: &str, alpha: &[f64]) -> Result<()> {
    for (i, &a) in alpha.iter().enumerate() {
        if !(a >= 0.0 && a.is_finite()) {
            return Err(Error::invalid(format!("{field}[{i}]"), "must be >= 0"));
        }
    }
    let total: f64 = alpha.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::invalid(
            field,
            format!("entries sum to {total}, expected 1"),
        ));
    }
    Ok(())
}

/// The projection `Π f = (Σ_j α_j f_j, ..., Σ_j α_j f_j)` onto functions that
/// are continuous at the center.
pub fn center_projection(alpha: &[f64], f: &StarFunction) -> Result<StarFunction> {
    if alpha.len() != f.k() {
        return Err(Error::invalid(
            "alpha",
            format!("length {} does not match k = {}", alpha.len(), f.k()),
        ));
    }
    check_probability_vector("alpha", alpha)?;
    let spec = *f.spec();
    let mut values = alloc::vec![0.0; spec.len()];
    let mut tail = 0.0;
    for (a, e) in alpha.iter().zip(f.edges()) {
        for (acc, v) in values.iter_mut().zip(&e.values) {
            *acc += a * v;
        }
        tail += a * e.tail;
    }
    let mean = GridFunction::from_parts(spec, values, tail);
    Ok(StarFunction {
        edges: (0..f.k()).map(|_| mean.clone()).collect(),
    })
}
