//! Closed-form approximation factors.

/// Curvature below which `(1 − e^{−c})/c` is replaced by its limit 1.
pub const CURVATURE_EPS: f64 = 1e-12;

/// `(1 − e^{−c}) / c`.
pub fn curvature_factor(c: f64) -> f64 {
    if c < CURVATURE_EPS {
        1.0
    } else {
        -(-c).exp_m1() / c
    }
}

/// Multiplier of `f(R*)` guaranteed for `F(x̄(T))` with single-round
/// consensus: `(1/c)(1 − e^{−c})(1 − (2cκd + cκ/2 + 1)κ/T)`.
pub fn distributed_factor(c: f64, kappa: usize, diameter: usize, horizon: usize) -> f64 {
    let k = kappa as f64;
    curvature_factor(c)
        * (1.0 - (2.0 * c * k * diameter as f64 + c * k / 2.0 + 1.0) * k / horizon as f64)
}

/// The same multiplier once every round ends in full agreement, which drops
/// the diameter term.
pub fn agreement_factor(c: f64, kappa: usize, horizon: usize) -> f64 {
    let k = kappa as f64;
    curvature_factor(c) * (1.0 - (c * k / 2.0 + 1.0) * k / horizon as f64)
}

/// Classical guarantee of sequential greedy: `1/(1 + c)`.
pub fn sequential_factor(c: f64) -> f64 {
    1.0 / (1.0 + c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn limits_and_values() {
        assert_eq!(curvature_factor(0.0), 1.0);
        assert!((curvature_factor(1.0) - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        assert!((curvature_factor(1e-9) - 1.0).abs() < 1e-8);
        // c = 1, κ = 3, d = 1, T = 100: (1 − 1/e)(1 − (6 + 1.5 + 1)·3/100)
        let want = (1.0 - (-1.0f64).exp()) * (1.0 - 8.5 * 0.03);
        assert!((distributed_factor(1.0, 3, 1, 100) - want).abs() < 1e-14);
        let want = (1.0 - (-1.0f64).exp()) * (1.0 - 2.5 * 0.03);
        assert!((agreement_factor(1.0, 3, 100) - want).abs() < 1e-14);
        assert_eq!(distributed_factor(0.0, 3, 2, 100), 0.97);
        assert_eq!(sequential_factor(1.0), 0.5);
    }
}
