//! Mittag-Leffler functions on the negative real axis, the heat kernel
//! `g(t,z) = exp(-z²/4t)/√(4πt)` of `∂_t = ∂²_x`, and the first-passage
//! quantities of Brownian motion at the origin built from it.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laplace::{invert, InverterConfig, Transform};
use crate::quad::Quad;

/// Largest series term magnitude tolerated before the series is abandoned
/// for the contour route; bounds cancellation error near `1e5 * eps`.
const MAX_SERIES_TERM: f64 = 1e5;

/// Evaluation policy for [`mittag_leffler`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MLSeriesBudget {
    pub max_terms: usize,
    pub abs_tol: f64,
    /// `|z|` above which the contour-integral route is used.
    pub switch_radius: f64,
}

impl Default for MLSeriesBudget {
    fn default() -> Self {
        MLSeriesBudget {
            max_terms: 400,
            abs_tol: 1e-10,
            switch_radius: 5.0,
        }
    }
}

impl MLSeriesBudget {
    pub fn validate(&self) -> Result<()> {
        if self.max_terms < 50 {
            return Err(Error::domain("max_terms must be at least 50"));
        }
        if !(self.abs_tol > 0.0) || !(self.switch_radius > 0.0) {
            return Err(Error::domain("abs_tol and switch_radius must be positive"));
        }
        Ok(())
    }
}

/// `E_α(z) = Σ z^k / Γ(αk + 1)` for `α ∈ (0, 1]`, `z ≤ 0`.
pub fn mittag_leffler(alpha: f64, z: f64, budget: &MLSeriesBudget) -> Result<f64> {
    mittag_leffler_two_param_with(alpha, 1.0, z, budget)
}

/// `E_{α,β}(z) = Σ z^k / Γ(αk + β)` with the default budget.
pub fn mittag_leffler_two_param(alpha: f64, beta: f64, z: f64) -> Result<f64> {
    mittag_leffler_two_param_with(alpha, beta, z, &MLSeriesBudget::default())
}

pub fn mittag_leffler_two_param_with(alpha: f64, beta: f64, z: f64, budget: &MLSeriesBudget) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::domain(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    if !(beta > 0.0) {
        return Err(Error::domain(format!("beta must be positive, got {beta}")));
    }
    if !(z <= 0.0) {
        return Err(Error::domain(format!("argument must be non-positive, got {z}")));
    }
    budget.validate()?;
    if z == 0.0 {
        return Ok(1.0 / libm::tgamma(beta));
    }
    if alpha == 1.0 && beta == 1.0 {
        return Ok(z.exp());
    }
    if -z <= budget.switch_radius {
        if let Some(v) = ml_series(alpha, beta, z, budget)? {
            return Ok(v);
        }
    }
    ml_contour(alpha, beta, z)
}

// Kahan-compensated power series. Returns Ok(None) when the largest term
// would cost more than MAX_SERIES_TERM * eps in cancellation.
fn ml_series(alpha: f64, beta: f64, z: f64, budget: &MLSeriesBudget) -> Result<Option<f64>> {
    let log_abs_z = (-z).ln();
    let log_limit = MAX_SERIES_TERM.ln();
    let mut sum = 0.0;
    let mut comp = 0.0;
    let mut prev_log = f64::NEG_INFINITY;
    let mut last = f64::INFINITY;
    for k in 0..budget.max_terms {
        let log_term = k as f64 * log_abs_z - libm::lgamma(alpha * k as f64 + beta);
        if log_term > log_limit {
            return Ok(None);
        }
        let mag = log_term.exp();
        let term = if k % 2 == 0 { mag } else { -mag };
        let y = term - comp;
        let tsum = sum + y;
        comp = (tsum - sum) - y;
        sum = tsum;
        last = mag;
        // Past the peak and below tolerance.
        if log_term < prev_log && mag < budget.abs_tol * 1e-3 {
            return Ok(Some(sum));
        }
        prev_log = log_term;
    }
    Err(Error::Convergence {
        terms: budget.max_terms,
        last_term: last,
    })
}

// t^{β-1} E_{α,β}(z t^α) has transform λ^{α-β}/(λ^α - z); read it off at t = 1.
fn ml_contour(alpha: f64, beta: f64, z: f64) -> Result<f64> {
    let f = Transform::new("mittag-leffler", move |s: Complex64| {
        s.powf(alpha - beta) / (s.powf(alpha) - z)
    });
    invert(&f, 1.0, &InverterConfig::default())
}

#[inline]
pub(crate) fn g(t: f64, z: f64) -> f64 {
    (-z * z / (4.0 * t)).exp() / (4.0 * PI * t).sqrt()
}

#[inline]
pub(crate) fn fp_density(t: f64, x: f64) -> f64 {
    x / t * g(t, x)
}

/// Heat kernel `g(t, z) = e^{-z²/4t} / √(4πt)`.
pub fn gauss_kernel(t: f64, z: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::domain(format!("gauss_kernel needs t > 0, got {t}")));
    }
    Ok(g(t, z))
}

/// Density in `t` of the hitting time of 0 from `x`: `(x/t) g(t, x)`.
pub fn first_passage_density(t: f64, x: f64) -> Result<f64> {
    if !(t > 0.0) || !(x > 0.0) {
        return Err(Error::domain(format!(
            "first_passage_density needs t > 0 and x > 0, got t={t}, x={x}"
        )));
    }
    Ok(fp_density(t, x))
}

/// How [`dirichlet_survival_with`] evaluates its integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Evaluation {
    #[default]
    ClosedForm,
    Quadrature,
}

/// `P_x(τ₀ > t) = erf(x / 2√t)`.
pub fn dirichlet_survival(t: f64, x: f64) -> Result<f64> {
    dirichlet_survival_with(t, x, Evaluation::ClosedForm)
}

pub fn dirichlet_survival_with(t: f64, x: f64, how: Evaluation) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::domain(format!("dirichlet_survival needs t > 0, got {t}")));
    }
    if !(x >= 0.0) {
        return Err(Error::domain(format!("dirichlet_survival needs x >= 0, got {x}")));
    }
    match how {
        Evaluation::ClosedForm => Ok(libm::erf(x / (2.0 * t.sqrt()))),
        Evaluation::Quadrature => {
            if x == 0.0 {
                return Ok(0.0);
            }
            let w = 2.0 * t.sqrt();
            let hi = x + 40.0 * w;
            let pts = [0.0, (x - 4.0 * w).max(0.0), x, x + 4.0 * w, hi];
            let mut pts: Vec<f64> = pts.to_vec();
            pts.dedup();
            Quad::new(1e-14, 1e-12)
                .integrate_points(|y| g(t, x - y) - g(t, x + y), &pts)
                .map(|e| e.value)
        }
    }
}

/// `erfcx(a) = e^{a²} erfc(a)`, stable for large positive `a`.
pub fn erfcx(a: f64) -> f64 {
    if a < 25.0 {
        (a * a).exp() * libm::erfc(a)
    } else {
        let inv2 = 1.0 / (a * a);
        (1.0 - 0.5 * inv2 + 0.75 * inv2 * inv2 - 1.875 * inv2 * inv2 * inv2) / (a * PI.sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ml(alpha: f64, z: f64) -> f64 {
        mittag_leffler(alpha, z, &MLSeriesBudget::default()).unwrap()
    }

    #[test]
    fn ml_at_zero_is_one() {
        assert_eq!(ml(0.7, 0.0), 1.0);
    }

    #[test]
    fn ml_reduces_to_exp() {
        assert!((ml(1.0, -1.0) - 0.367_879_441_171_442_3).abs() < 1e-12);
        let v = mittag_leffler_two_param(1.0, 1.0, -2.0).unwrap();
        assert!((v - 0.135_335_283_236_612_7).abs() < 1e-10);
    }

    #[test]
    fn ml_half_is_scaled_erfc() {
        // E_{1/2}(-1) = e erfc(1).
        let v = ml(0.5, -1.0);
        assert!((v - 0.427_583_576_155_807).abs() < 1e-10, "{v}");
        let v2 = mittag_leffler_two_param(0.5, 1.0, -1.0).unwrap();
        assert_eq!(v, v2);
    }

    #[test]
    fn ml_two_param_half_half() {
        // Series oracle (mpmath, 40 digits): E_{1/2,1/2}(-1) = 0.13660600739194928.
        let v = mittag_leffler_two_param(0.5, 0.5, -1.0).unwrap();
        assert!((v - 0.136_606_007_391_949_28).abs() < 1e-10, "{v}");
    }

    #[test]
    fn ml_domain_errors() {
        let b = MLSeriesBudget::default();
        assert!(mittag_leffler(0.0, -1.0, &b).is_err());
        assert!(mittag_leffler(1.2, -1.0, &b).is_err());
        assert!(mittag_leffler(0.5, 0.5, &b).is_err());
        let bad = MLSeriesBudget { max_terms: 10, ..b };
        assert!(mittag_leffler(0.5, -1.0, &bad).is_err());
    }

    #[test]
    fn ml_budget_exhaustion() {
        // 1/Γ(0.3k+1) needs ~55 terms to drop below tolerance.
        let b = MLSeriesBudget {
            max_terms: 50,
            ..MLSeriesBudget::default()
        };
        match mittag_leffler(0.3, -1.0, &b) {
            Err(Error::Convergence { .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn kernel_values() {
        assert!((gauss_kernel(1.0, 0.0).unwrap() - 0.282_094_791_773_878_1).abs() < 1e-15);
        assert!((gauss_kernel(0.25, 1.0).unwrap() - 0.207_553_748_710_297_35).abs() < 1e-15);
        assert_eq!(gauss_kernel(1.0, -2.0).unwrap(), gauss_kernel(1.0, 2.0).unwrap());
        assert!(gauss_kernel(0.0, 1.0).is_err());
    }

    #[test]
    fn first_passage_values() {
        assert!((first_passage_density(1.0, 1.0).unwrap() - 0.219_695_644_733_861_2).abs() < 1e-15);
        assert!(first_passage_density(1.0, 1e-300).unwrap() < 1e-299);
        assert!(first_passage_density(1.0, 0.0).is_err());
        assert!(first_passage_density(-1.0, 1.0).is_err());
    }

    #[test]
    fn dirichlet_values() {
        assert_eq!(dirichlet_survival(3.0, 0.0).unwrap(), 0.0);
        assert!((dirichlet_survival(1.0, 1.0).unwrap() - 0.520_499_877_813_046_5).abs() < 1e-14);
        let q = dirichlet_survival_with(1.0, 1.0, Evaluation::Quadrature).unwrap();
        assert!((q - 0.520_499_877_813_046_5).abs() < 1e-11, "{q}");
        assert!(dirichlet_survival(0.0, 1.0).is_err());
    }

    #[test]
    fn erfcx_continuity() {
        let a: f64 = 25.0;
        let direct = (a * a).exp() * libm::erfc(a);
        assert!((erfcx(a) - direct).abs() / direct < 1e-10);
        assert!((erfcx(0.0) - 1.0).abs() < 1e-15);
    }
}
