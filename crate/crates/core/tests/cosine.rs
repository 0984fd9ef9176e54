use starlimit_core::families::{domain_class_slopes, TestFunction};
use starlimit_core::kelvin::{cartesian_cosine, cosine_apply, extend, limit_extend};
use starlimit_core::markov::build_chain;
use starlimit_core::resolvent::one_sided_derivative;
use starlimit_core::{GridSpec, Parameters, StarFunction};

const C: [f64; 3] = [1.0, 2.0, 4.0];
const VALUES: [f64; 3] = [1.0, -0.5, 0.25];

fn fixture() -> (GridSpec, Parameters, StarFunction) {
    let spec = GridSpec::new(20.0, 1.0 / 512.0).unwrap();
    let p = Parameters::snapping(C.to_vec()).unwrap();
    let f = TestFunction::DomainClass {
        values: VALUES.to_vec(),
        width: 1.0,
    }
    .build(spec, &p)
    .unwrap();
    (spec, p, f)
}

/// `f''` of the domain-class family with width 1.
fn second_derivative(p: &Parameters, i: usize, x: f64) -> f64 {
    let theta = domain_class_slopes(p, &VALUES, 1.0)[i];
    let e = (-x * x).exp();
    let e1 = -2.0 * x * e;
    let e2 = (4.0 * x * x - 2.0) * e;
    2.0 * theta * e1 + (VALUES[i] + theta * x) * e2
}

#[test]
fn functional_equation_on_ten_by_ten_grid() {
    let (_, _, f) = fixture();
    let ch = build_chain(&C).unwrap();
    let t_max = 4.0;
    let grid: Vec<f64> = (1..=10).map(|i| 0.2 * i as f64 - 0.0123).collect();
    let mut worst: f64 = 0.0;
    for &s in &grid {
        let ext_s = extend(&ch, &cosine_apply(&ch, &f, s, t_max).unwrap(), t_max).unwrap();
        for &t in &grid {
            let lhs = cartesian_cosine(&ext_s, t).unwrap().map(|v| 2.0 * v);
            let sum = cosine_apply(&ch, &f, t + s, t_max).unwrap();
            let diff = cosine_apply(&ch, &f, t - s, t_max).unwrap();
            let rhs = sum.zip_with(&diff, |a, b| a + b).unwrap();
            worst = worst.max(lhs.distance(&rhs).unwrap());
        }
    }
    assert!(worst <= 1e-6 * f.sup_norm(), "worst residual {worst:e}");
}

/// `(2/t^2)(Cos(t) f - f)` at `t, t/2, t/4`, with the `t` and `t^2` terms
/// eliminated by Richardson extrapolation.
#[test]
fn generator_limit_is_second_derivative() {
    let (spec, p, f) = fixture();
    let ch = build_chain(&C).unwrap();
    let ext = extend(&ch, &f, 1.0).unwrap();
    let quotient = |t: f64, i: usize, x: f64| {
        let c = ext.cosine_at(i, t, x).unwrap();
        2.0 * (c - ext.plus_at(i, x)) / (t * t)
    };
    let mut worst: f64 = 0.0;
    let xs: Vec<f64> = [0.0]
        .into_iter()
        .chain((0..40).map(|q| 0.1 + 0.05 * q as f64))
        .collect();
    for i in 0..3 {
        for &x in &xs {
            let d = [0.1, 0.05, 0.025].map(|t| quotient(t, i, x));
            let r1 = [2.0 * d[1] - d[0], 2.0 * d[2] - d[1]];
            let r2 = (4.0 * r1[1] - r1[0]) / 3.0;
            worst = worst.max((r2 - second_derivative(&p, i, x)).abs());
        }
    }
    assert!(worst <= 1e-3, "worst generator error {worst:e}");
    assert!(spec.step() < 0.025);
}

#[test]
fn images_of_shifted_function_are_unique() {
    let (spec, _, f) = fixture();
    let ch = build_chain(&C).unwrap();
    let t_max = 4.0;
    let ext = extend(&ch, &f, t_max).unwrap();
    for s in [0.5, 1.25, 2.0] {
        let shifted = cartesian_cosine(&ext, s).unwrap();
        let again = extend(&ch, &shifted, t_max - s).unwrap();
        let h = spec.step();
        let n = ((t_max - s) / h).round() as usize;
        let mut worst: f64 = 0.0;
        for j in 0..=n {
            let y = j as f64 * h;
            for i in 0..3 {
                let direct = 0.5 * (ext.full_line(i, -y + s) + ext.full_line(i, -y - s));
                worst = worst.max((again.image_at(i, y) - direct).abs());
            }
        }
        assert!(worst <= 2e-6, "s = {s}: {worst:e}");
    }
}

#[test]
fn cosine_preserves_transmission_condition() {
    let (_, _, f) = fixture();
    let ch = build_chain(&C).unwrap();
    let ext = extend(&ch, &f, 4.0).unwrap();
    for t in [0.1, 0.5, 1.0, 2.7, 4.0] {
        let g = cartesian_cosine(&ext, t).unwrap();
        let g0 = g.center_values();
        let total: f64 = g0.iter().sum();
        for i in 0..3 {
            let avg = (total - g0[i]) / 2.0;
            let r = one_sided_derivative(g.edge(i)) - C[i] * (g0[i] - avg);
            assert!(r.abs() <= 5e-3, "t = {t}, edge {i}: {r:e}");
        }
    }
}

#[test]
fn norm_bound_is_uniform_in_epsilon() {
    let (_, _, f) = fixture();
    let m = build_chain(&C).unwrap().m();
    for eps in [1.0, 0.1, 0.01] {
        let ch = build_chain(&C.map(|c| c / eps)).unwrap();
        assert!((ch.m() - m).abs() <= 1e-12 * m);
        let ext = extend(&ch, &f, 4.0).unwrap();
        for t in [0.3, 1.0, 2.5, 4.0] {
            let norm = cartesian_cosine(&ext, t).unwrap().sup_norm();
            assert!(norm <= m * f.sup_norm() * (1.0 + 1e-6));
        }
    }
}

#[test]
fn images_approach_limit_images_away_from_zero() {
    let spec = GridSpec::new(10.0, 1.0 / 256.0).unwrap();
    let f = TestFunction::Bump {
        base: 1.0,
        heights: vec![1.0, -1.0, 0.5],
        width: 1.0,
    }
    .build(spec, &Parameters::snapping(C.to_vec()).unwrap())
    .unwrap();
    let alpha = build_chain(&C).unwrap().alpha().to_vec();
    let limit = limit_extend(&alpha, &f, 2.0).unwrap();
    let delta = 0.25;
    let mut prev = f64::INFINITY;
    for eps in [1.0, 0.1, 0.01, 0.001] {
        let ext = extend(&build_chain(&C.map(|c| c / eps)).unwrap(), &f, 2.0).unwrap();
        let mut worst: f64 = 0.0;
        for j in 0..=((2.0 - delta) * 256.0) as usize {
            let y = delta + j as f64 / 256.0;
            for i in 0..3 {
                worst = worst.max((ext.image_at(i, y) - limit.image_at(i, y)).abs());
            }
        }
        assert!(worst < prev, "eps = {eps}: {worst:e} !< {prev:e}");
        prev = worst;
    }
    assert!(prev < 1e-2);
}
