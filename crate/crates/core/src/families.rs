//! Named test-function families used by the fixtures and the CLI.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{GridSpec, StarFunction};
use crate::math::exp;
use crate::params::Parameters;

#[derive(Debug, Clone, PartialEq)]
pub enum TestFunction {
    /// `f_i ≡ value`.
    Constant { value: f64 },
    /// `f_i ≡ values[i]`.
    PerEdgeConstant { values: Vec<f64> },
    /// `f_i(x) = e^{-rate x}` on every edge.
    ExpDecay { rate: f64 },
    /// `f_i(x) = (base + heights[i] (x/w)^2) e^{-(x/w)^2}`: continuous at the
    /// center, edge-dependent away from it.
    Bump {
        base: f64,
        heights: Vec<f64>,
        width: f64,
    },
    /// `f_i(x) = values[i] φ(x) + θ_i ψ(x)` with `φ = e^{-(x/w)^2}`,
    /// `ψ = x e^{-(x/w)^2}` and `θ_i` chosen so the transmission condition of
    /// the given parameters holds exactly at the center.
    DomainClass { values: Vec<f64>, width: f64 },
}

impl TestFunction {
    pub fn name(&self) -> &'static str {
        match self {
            TestFunction::Constant { .. } => "constant",
            TestFunction::PerEdgeConstant { .. } => "per-edge-constant",
            TestFunction::ExpDecay { .. } => "exp-decay",
            TestFunction::Bump { .. } => "bump",
            TestFunction::DomainClass { .. } => "domain-class",
        }
    }

    /// Sample the family on `spec` for a star with the parameters `p`.
    pub fn build(&self, spec: GridSpec, p: &Parameters) -> Result<StarFunction> {
        let k = p.k();
        let check_len = |field: &str, v: &[f64]| -> Result<()> {
            if v.len() != k {
                return Err(Error::invalid(
                    format!("test_function.{field}"),
                    format!("expected {k} entries, got {}", v.len()),
                ));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::invalid(format!("test_function.{field}"), "must be finite"));
            }
            Ok(())
        };
        let check_width = |w: f64| -> Result<()> {
            if w.is_finite() && w > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid("test_function.width", "must be finite and > 0"))
            }
        };
        match self {
            TestFunction::Constant { value } => {
                if !value.is_finite() {
                    return Err(Error::invalid("test_function.value", "must be finite"));
                }
                StarFunction::constant(spec, k, *value)
            }
            TestFunction::PerEdgeConstant { values } => {
                check_len("values", values)?;
                StarFunction::per_edge_constant(spec, values)
            }
            TestFunction::ExpDecay { rate } => {
                if !(rate.is_finite() && *rate > 0.0) {
                    return Err(Error::invalid("test_function.rate", "must be finite and > 0"));
                }
                let r = *rate;
                StarFunction::from_fn(spec, &alloc::vec![0.0; k], |_, x| exp(-r * x))
            }
            TestFunction::Bump {
                base,
                heights,
                width,
            } => {
                check_len("heights", heights)?;
                check_width(*width)?;
                let (b, w) = (*base, *width);
                StarFunction::from_fn(spec, &alloc::vec![0.0; k], |i, x| {
                    let u = x / w;
                    (b + heights[i] * u * u) * exp(-u * u)
                })
            }
            TestFunction::DomainClass { values, width } => {
                check_len("values", values)?;
                check_width(*width)?;
                let theta = domain_class_slopes(p, values, *width);
                let w = *width;
                StarFunction::from_fn(spec, &alloc::vec![0.0; k], |i, x| {
                    let u = x / w;
                    (values[i] + theta[i] * x) * exp(-u * u)
                })
            }
        }
    }
}

/// `θ_i = (a_i f_i''(0) - c_i (avg_{j≠i} v_j - v_i)) / b_i` with
/// `f_i''(0) = -2 v_i / w^2`.
pub fn domain_class_slopes(p: &Parameters, values: &[f64], width: f64) -> Vec<f64> {
    let k = p.k();
    let km1 = (k - 1) as f64;
    let total: f64 = values.iter().sum();
    (0..k)
        .map(|i| {
            let second = -2.0 * values[i] / (width * width);
            let avg_others = (total - values[i]) / km1;
            (p.a()[i] * second - p.c()[i] * (avg_others - values[i])) / p.b()[i]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use approx::assert_abs_diff_eq;

    #[test]
    fn domain_class_satisfies_transmission() {
        let p = Parameters::new(vec![0.5, 0.0, 1.0], vec![1.0, 2.0, 0.5], vec![1.0, 2.0, 4.0]).unwrap();
        let v = [1.0, -0.5, 0.25];
        let w = 1.5;
        let theta = domain_class_slopes(&p, &v, w);
        for i in 0..3 {
            let fpp = -2.0 * v[i] / (w * w);
            let avg = (v.iter().sum::<f64>() - v[i]) / 2.0;
            let lhs = p.a()[i] * fpp - p.b()[i] * theta[i];
            let rhs = p.c()[i] * (avg - v[i]);
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-14);
        }
    }

    #[test]
    fn equal_values_are_continuous_and_flat_for_pure_snapping() {
        let p = Parameters::snapping(vec![1.0, 2.0, 4.0]).unwrap();
        let theta = domain_class_slopes(&p, &[2.0; 3], 1.0);
        assert!(theta.iter().all(|&t| t == 0.0));
        let spec = GridSpec::new(20.0, 1.0 / 64.0).unwrap();
        let f = TestFunction::DomainClass {
            values: vec![2.0; 3],
            width: 1.0,
        }
        .build(spec, &p)
        .unwrap();
        assert_eq!(f.center_gap(), 0.0);
        assert!(f.is_tail_settled());
    }

    #[test]
    fn bump_is_continuous() {
        let p = Parameters::snapping(vec![1.0, 2.0, 4.0]).unwrap();
        let spec = GridSpec::new(20.0, 1.0 / 64.0).unwrap();
        let f = TestFunction::Bump {
            base: 1.0,
            heights: vec![1.0, -1.0, 0.5],
            width: 2.0,
        }
        .build(spec, &p)
        .unwrap();
        assert_eq!(f.center_gap(), 0.0);
        assert!(f.is_tail_settled());
        assert_abs_diff_eq!(f.eval(0, 2.0).unwrap(), 2.0 * exp(-1.0), epsilon = 1e-12);
    }

    #[test]
    fn length_mismatch_is_reported() {
        let p = Parameters::snapping(vec![1.0, 2.0, 4.0]).unwrap();
        let spec = GridSpec::new(2.0, 0.25).unwrap();
        let err = TestFunction::PerEdgeConstant { values: vec![1.0] }
            .build(spec, &p)
            .unwrap_err();
        assert!(matches!(err, Error::Invalid { ref field, .. } if field == "test_function.values"));
    }
}
