//! Closed-form flux and zero-delay autocorrelation of the two-photon line for
//! a resonant drive (n = 3, δ = 0, Γ ≪ |α|, Ω ≪ |α|).

use serde::{Deserialize, Serialize};

/// Upper end of ε = Ω/|α| where the closed forms are trusted.
pub const VALIDITY_EPSILON: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticParams {
    /// Ω/|α|.
    pub epsilon: f64,
    /// Γ/|α|.
    pub gamma_over_alpha: f64,
}

impl AnalyticParams {
    pub fn new(omega: f64, alpha: f64, gamma: f64) -> Self {
        Self {
            epsilon: omega / alpha.abs(),
            gamma_over_alpha: gamma / alpha.abs(),
        }
    }

    pub fn in_validity(&self) -> bool {
        self.epsilon <= VALIDITY_EPSILON
    }
}

/// A closed-form value with its validity flag.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub in_validity: bool,
}

/// P = Γ ε² [55ε⁴ − 450ε⁶ + 4(Γ/α)²] / [4(Γ/α)² + 9ε⁴], in photons per second.
pub fn analytic_flux(p: AnalyticParams, gamma: f64) -> Estimate {
    let e2 = p.epsilon * p.epsilon;
    let e4 = e2 * e2;
    let r2 = p.gamma_over_alpha * p.gamma_over_alpha;
    let value = gamma * e2 * (55.0 * e4 - 450.0 * e4 * e2 + 4.0 * r2) / (4.0 * r2 + 9.0 * e4);
    Estimate {
        value,
        in_validity: p.in_validity(),
    }
}

/// g2(0) = (4α²Γ² + 9Ω⁴)(4α²Γ² + 479Ω⁴) / (4α²Γ² + 55Ω⁴)².
pub fn analytic_g2zero(omega: f64, alpha: f64, gamma: f64) -> f64 {
    let a = 4.0 * alpha * alpha * gamma * gamma;
    let o4 = omega.powi(4);
    if a == 0.0 && o4 == 0.0 {
        return 1.0;
    }
    (a + 9.0 * o4) * (a + 479.0 * o4) / (a + 55.0 * o4).powi(2)
}

/// Argmax of [`analytic_g2zero`] over Ω by golden-section search.
pub fn g2max_point(alpha: f64, gamma: f64) -> (f64, f64) {
    let unit = (alpha.abs() * gamma).sqrt();
    let f = |x: f64| analytic_g2zero(x * unit, alpha, gamma);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (1e-3, 10.0);
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > 1e-12 {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    let x = 0.5 * (lo + hi);
    (x * unit, f(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{angular_to_mhz, mhz_to_angular};
    use proptest::prelude::*;

    fn alpha() -> f64 {
        mhz_to_angular(-233.0)
    }
    fn gamma() -> f64 {
        mhz_to_angular(2.5)
    }

    /// The derivative of g2(u), u = Ω⁴/(α²Γ²), has a numerator linear in u:
    /// (1952 + 8622u)(4 + 55u) − 110(16 + 1952u + 4311u²) = 6048 − 72872u.
    fn exact_argmax_u() -> f64 {
        6048.0 / 72872.0
    }

    #[test]
    fn zero_drive() {
        let p = AnalyticParams::new(0.0, alpha(), gamma());
        assert_eq!(analytic_flux(p, gamma()).value, 0.0);
        assert_eq!(analytic_g2zero(0.0, alpha(), gamma()), 1.0);
    }

    #[test]
    fn weak_drive_leading_order() {
        // 3ε² ≪ 2Γ/|α|: flux → Γ ε²
        let eps = 1e-3;
        let p = AnalyticParams {
            epsilon: eps,
            gamma_over_alpha: 2.5 / 233.0,
        };
        let flux = analytic_flux(p, gamma()).value;
        assert!((flux / (gamma() * eps * eps) - 1.0).abs() < 1e-4);
    }

    #[test]
    fn validity_flag() {
        let p = |e| AnalyticParams {
            epsilon: e,
            gamma_over_alpha: 0.01,
        };
        assert!(analytic_flux(p(0.2), 1.0).in_validity);
        assert!(!analytic_flux(p(0.25), 1.0).in_validity);
        // the −450ε⁶ term drives the printed flux negative; not clipped
        assert!(analytic_flux(p(0.4), 1.0).value < 0.0);
    }

    #[test]
    fn large_drive_limit() {
        let g = analytic_g2zero(1e12, alpha(), gamma());
        assert!((g - 9.0 * 479.0 / 55f64.powi(2)).abs() < 1e-9);
        assert!((g - 1.425).abs() < 1e-3);
    }

    #[test]
    fn maximum_matches_exact_root() {
        let (omega_star, g_star) = g2max_point(alpha(), gamma());
        let x_exact = exact_argmax_u().powf(0.25);
        let x = omega_star / (alpha().abs() * gamma()).sqrt();
        assert!((x - x_exact).abs() < 1e-6, "{x} vs {x_exact}");
        assert!((x - 0.5367).abs() < 1e-3);
        assert!((g_star - 2.831).abs() / 2.831 < 0.005);
        assert!((angular_to_mhz(omega_star) - 12.95).abs() < 0.01);
    }

    #[test]
    fn maximum_value_independent_of_scales() {
        let (_, g1) = g2max_point(alpha(), gamma());
        let (_, g2) = g2max_point(3.0 * alpha(), 0.1 * gamma());
        assert!((g1 - g2).abs() < 1e-9);
    }

    #[test]
    fn doubling_gamma_scales_argmax() {
        let (o1, _) = g2max_point(alpha(), gamma());
        let (o2, _) = g2max_point(alpha(), 2.0 * gamma());
        assert!((o2 / o1 - 2f64.sqrt()).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn superbunched_for_any_drive(eps in 1e-4f64..0.2) {
            let g = analytic_g2zero(eps * alpha().abs(), alpha(), gamma());
            prop_assert!(g > 1.0);
        }
    }
}
