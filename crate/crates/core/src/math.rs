//! Thin wrappers over `libm` so numeric code reads like `std` code.

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub(crate) fn expm1(x: f64) -> f64 {
    libm::expm1(x)
}

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub(crate) fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

#[inline]
pub(crate) fn round(x: f64) -> f64 {
    libm::round(x)
}

#[inline]
pub(crate) fn powi(x: f64, n: i32) -> f64 {
    libm::pow(x, f64::from(n))
}

#[inline]
/// `(1 - e^{-x}) / x`, the mean of `e^{-s}` over `[0, x]`.
pub(crate) fn one_minus_exp_over(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        -expm1(-x) / x
    }
}

/// `(1 - e^{-x}(1 + x)) / x^2`; series below `x = 0.1` to avoid cancellation.
pub(crate) fn first_moment_kernel(x: f64) -> f64 {
    if x.abs() < 0.1 {
        // sum_{m>=2} (-1)^m (m-1)/m! x^{m-2}
        let mut term_fact = 2.0; // m!
        let mut power = 1.0;
        let mut acc = 0.0;
        for m in 2..14 {
            if m > 2 {
                term_fact *= m as f64;
                power *= -x;
            }
            acc += (m as f64 - 1.0) / term_fact * power;
        }
        acc
    } else {
        (1.0 - exp(-x) * (1.0 + x)) / (x * x)
    }
}

/// `expm1(x)/x - 1`, the slope weight of the exponential integrator.
pub(crate) fn ramp_weight(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else if x.abs() < 1e-3 {
        x / 2.0 + x * x / 6.0 + x * x * x / 24.0
    } else {
        expm1(x) / x - 1.0
    }
}

/// `(e^x - 1 - x)/x^2 - 1/2`, the curvature weight of the exponential integrator.
pub(crate) fn bend_weight(x: f64) -> f64 {
    if x.abs() < 1e-2 {
        // sum_{n>=3} x^{n-2}/n!
        let mut term = x / 6.0;
        let mut acc = term;
        for n in 4..10 {
            term *= x / n as f64;
            acc += term;
        }
        acc
    } else {
        (expm1(x) - x) / (x * x) - 0.5
    }
}

/// Pairwise summation in index order; the result depends only on the input
/// order, never on how the inputs were produced.
pub(crate) fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        xs.iter().sum()
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}
