//! Run configuration: JSON schema, defaults and validation.

use std::path::Path;

use serde::{Deserialize, Serialize};
use starlimit_core::families::TestFunction;
use starlimit_core::montecarlo::WalkProcess;
use starlimit_core::params::walsh_limit_params;
use starlimit_core::semigroup::{QuadratureSpec, WeierstrassRule};
use starlimit_core::{GridSpec, Parameters, StarFunction, WalshParameters};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub k: usize,
    /// Defaults to zeros.
    #[serde(default)]
    pub a: Vec<f64>,
    /// Defaults to ones.
    #[serde(default)]
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub grid: GridConfig,
    #[serde(default)]
    pub lambdas: Vec<f64>,
    #[serde(default)]
    pub times: Vec<f64>,
    #[serde(default)]
    pub epsilons: Vec<f64>,
    #[serde(rename = "T_max", default = "default_t_max")]
    pub t_max: f64,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub mc: McSection,
    /// Walsh parameters for `walsh-resolvent`; the limit of `(a, b, c)` when
    /// absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub walsh: Option<WalshConfig>,
    pub test_function: TestFunctionConfig,
}

fn default_t_max() -> f64 {
    4.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(rename = "L")]
    pub length: f64,
    pub h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleName {
    Trapezoid,
    GaussHermite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    #[serde(default = "default_order")]
    pub inversion_order: usize,
    #[serde(default = "default_rule")]
    pub rule: RuleName,
}

fn default_nodes() -> usize {
    64
}

fn default_order() -> usize {
    12
}

fn default_rule() -> RuleName {
    RuleName::Trapezoid
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            nodes: default_nodes(),
            inversion_order: default_order(),
            rule: default_rule(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSection {
    #[serde(default = "default_mc_h")]
    pub h: f64,
    #[serde(default = "default_trajectories")]
    pub trajectories: usize,
    #[serde(default)]
    pub master_seed: u64,
    /// Starting edge, 1-based.
    #[serde(default = "default_start_edge")]
    pub start_edge: usize,
    /// Starting distance from the center; must be a multiple of `h`.
    #[serde(default = "default_start_x")]
    pub start_x: f64,
}

fn default_mc_h() -> f64 {
    1.0 / 256.0
}

fn default_trajectories() -> usize {
    100_000
}

fn default_start_edge() -> usize {
    1
}

fn default_start_x() -> f64 {
    0.5
}

impl Default for McSection {
    fn default() -> Self {
        McSection {
            h: default_mc_h(),
            trajectories: default_trajectories(),
            master_seed: 0,
            start_edge: default_start_edge(),
            start_x: default_start_x(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalshConfig {
    pub beta: f64,
    pub alpha: Vec<f64>,
}

/// Named test-function families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TestFunctionConfig {
    Constant { value: f64 },
    PerEdgeConstant { values: Vec<f64> },
    ExpDecay { rate: f64 },
    Bump { base: f64, heights: Vec<f64>, width: f64 },
    DomainClass { values: Vec<f64>, width: f64 },
}

impl TestFunctionConfig {
    pub fn family(&self) -> TestFunction {
        match self.clone() {
            TestFunctionConfig::Constant { value } => TestFunction::Constant { value },
            TestFunctionConfig::PerEdgeConstant { values } => TestFunction::PerEdgeConstant { values },
            TestFunctionConfig::ExpDecay { rate } => TestFunction::ExpDecay { rate },
            TestFunctionConfig::Bump { base, heights, width } => TestFunction::Bump { base, heights, width },
            TestFunctionConfig::DomainClass { values, width } => TestFunction::DomainClass { values, width },
        }
    }
}

/// Validated objects built from a [`RunConfig`].
#[derive(Debug, Clone)]
pub struct Setup {
    pub params: Parameters,
    pub walsh: WalshParameters,
    pub spec: GridSpec,
    pub f: StarFunction,
    pub quadrature: QuadratureSpec,
    pub rule: WeierstrassRule,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("config `{}`: {e}", path.display())))?;
        RunConfig::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<RunConfig, CliError> {
        let mut cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))?;
        cfg.fill_defaults();
        Ok(cfg)
    }

    /// Expand the `a`, `b` defaults so the echoed config is explicit.
    fn fill_defaults(&mut self) {
        if self.a.is_empty() {
            self.a = vec![0.0; self.k];
        }
        if self.b.is_empty() {
            self.b = vec![1.0; self.k];
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn rule(&self) -> WeierstrassRule {
        match self.quadrature.rule {
            RuleName::Trapezoid => WeierstrassRule::Trapezoid,
            RuleName::GaussHermite => WeierstrassRule::GaussHermite(self.quadrature.nodes),
        }
    }

    /// Check everything that does not depend on the subcommand.
    pub fn setup(&self) -> Result<Setup, CliError> {
        if self.k < 2 {
            return Err(CliError::field("k", "must be >= 2"));
        }
        for (name, v) in [("a", &self.a), ("b", &self.b), ("c", &self.c)] {
            if v.len() != self.k {
                return Err(CliError::field(
                    name,
                    &format!("expected k = {} entries, got {}", self.k, v.len()),
                ));
            }
        }
        let params = Parameters::new(self.a.clone(), self.b.clone(), self.c.clone())?;
        let walsh = match &self.walsh {
            Some(w) => WalshParameters::new(w.beta, w.alpha.clone()).map_err(|e| prefix("walsh", e))?,
            None => walsh_limit_params(&params),
        };
        if walsh.k() != self.k {
            return Err(CliError::field("walsh.alpha", &format!("expected k = {} entries", self.k)));
        }
        let spec = GridSpec::new(self.grid.length, self.grid.h).map_err(|e| prefix("grid", e))?;
        let f = self.test_function.family().build(spec, &params)?;
        if !f.is_tail_settled() {
            return Err(CliError::field(
                "test_function",
                "is not tail-settled on the grid: |f(L) - f(inf)| > 1e-9 (1 + |f(inf)|); increase grid.L",
            ));
        }
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return Err(CliError::field("T_max", "must be finite and > 0"));
        }
        let quadrature = QuadratureSpec::new(self.quadrature.nodes, self.quadrature.inversion_order)?;
        check_list("lambdas", &self.lambdas, |x| x > 0.0, "must be finite and > 0")?;
        check_list("times", &self.times, |x| x >= 0.0, "must be finite and >= 0")?;
        check_list("epsilons", &self.epsilons, |x| x > 0.0, "must be finite and > 0")?;
        Ok(Setup {
            params,
            walsh,
            spec,
            f,
            quadrature,
            rule: self.rule(),
        })
    }

    /// Start state `(edge, node)` of the walks, 0-based edge.
    pub fn mc_start(&self) -> Result<(usize, u64), CliError> {
        let mc = &self.mc;
        if mc.start_edge == 0 || mc.start_edge > self.k {
            return Err(CliError::field("mc.start_edge", &format!("must be in 1..={}", self.k)));
        }
        let r = mc.start_x / mc.h;
        if !(mc.start_x >= 0.0) || (r - r.round()).abs() > 1e-9 {
            return Err(CliError::field("mc.start_x", "must be a non-negative multiple of mc.h"));
        }
        Ok((mc.start_edge - 1, r.round() as u64))
    }

    /// Snapping-out walk (requires `a = 0`; `b` is absorbed into `c/b`).
    pub fn snapping_walk(&self, p: &Parameters) -> Result<WalkProcess, CliError> {
        if let Some(i) = p.a().iter().position(|&a| a != 0.0) {
            return Err(CliError::field(
                &format!("a[{i}]"),
                "random walks are only available for a = 0",
            ));
        }
        Ok(WalkProcess::Snapping {
            c: p.c().iter().zip(p.b()).map(|(c, b)| c / b).collect(),
        })
    }
}

fn check_list(name: &str, v: &[f64], ok: impl Fn(f64) -> bool, reason: &str) -> Result<(), CliError> {
    for (i, &x) in v.iter().enumerate() {
        if !(x.is_finite() && ok(x)) {
            return Err(CliError::field(&format!("{name}[{i}]"), reason));
        }
    }
    Ok(())
}

fn prefix(section: &str, e: starlimit_core::Error) -> CliError {
    match e {
        starlimit_core::Error::Invalid { field, reason } => CliError::field(&format!("{section}.{field}"), &reason),
        other => other.into(),
    }
}
