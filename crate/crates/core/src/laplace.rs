//! Forward Laplace transforms by quadrature and numerical inversion by the
//! fixed Talbot contour or the Gaver-Stehfest formula.
//!
//! Transforms are evaluated at complex abscissae on the Talbot contour, so a
//! [`TransformFn`] has to be written with complex `exp`/`powf`. Every transform
//! in this crate is built from rational functions of `λ^a`, `exp(-x λ^a)` and
//! `exp(-x √λ)`, which all continue analytically off the negative real axis
//! under the principal branch.

use std::f64::consts::{LN_2, PI};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::Quad;

/// A Laplace-domain function `λ ↦ F(λ)`.
pub trait TransformFn: Sync {
    fn eval(&self, s: Complex64) -> Complex64;

    fn label(&self) -> &str {
        "transform"
    }

    /// Range of real `λ` on which the transform is known to be finite.
    fn validity(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }

    fn eval_real(&self, lambda: f64) -> f64 {
        self.eval(Complex64::new(lambda, 0.0)).re
    }
}

/// A [`TransformFn`] backed by a closure.
pub struct Transform<F> {
    label: String,
    validity: (f64, f64),
    f: F,
}

impl<F> Transform<F>
where
    F: Fn(Complex64) -> Complex64 + Sync,
{
    pub fn new(label: impl Into<String>, f: F) -> Self {
        Transform {
            label: label.into(),
            validity: (0.0, f64::INFINITY),
            f,
        }
    }

    pub fn with_validity(mut self, lo: f64, hi: f64) -> Self {
        self.validity = (lo, hi);
        self
    }
}

impl<F> TransformFn for Transform<F>
where
    F: Fn(Complex64) -> Complex64 + Sync,
{
    fn eval(&self, s: Complex64) -> Complex64 {
        (self.f)(s)
    }

    fn label(&self) -> &str {
        &self.label
    }

    fn validity(&self) -> (f64, f64) {
        self.validity
    }
}

impl<F> fmt::Debug for Transform<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Transform").field("label", &self.label).finish()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Talbot,
    Stehfest,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "talbot" => Ok(Method::Talbot),
            "stehfest" => Ok(Method::Stehfest),
            other => Err(Error::Parse(format!("unknown inversion method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InverterConfig {
    pub method: Method,
    pub node_count: usize,
    pub stehfest_order: usize,
}

impl Default for InverterConfig {
    fn default() -> Self {
        InverterConfig {
            method: Method::Talbot,
            node_count: 32,
            stehfest_order: 12,
        }
    }
}

impl InverterConfig {
    pub fn talbot() -> Self {
        Self::default()
    }

    pub fn stehfest(order: usize) -> Self {
        InverterConfig {
            method: Method::Stehfest,
            stehfest_order: order,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.method {
            Method::Talbot if self.node_count < 16 => Err(Error::domain(format!(
                "talbot needs at least 16 nodes, got {}",
                self.node_count
            ))),
            Method::Stehfest if ![8, 10, 12, 14, 16].contains(&self.stehfest_order) => Err(Error::domain(format!(
                "stehfest order must be one of 8..=16 even, got {}",
                self.stehfest_order
            ))),
            _ => Ok(()),
        }
    }
}

/// Numerically inverts `f` at time `t`.
pub fn invert<T: TransformFn + ?Sized>(f: &T, t: f64, cfg: &InverterConfig) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("inversion time must be positive, got {t}")));
    }
    cfg.validate()?;
    match cfg.method {
        Method::Talbot => talbot(f, t, cfg.node_count),
        Method::Stehfest => stehfest(f, t, cfg.stehfest_order),
    }
}

/// Inverts with the default (Talbot, 32 nodes) configuration.
pub fn invert_talbot<T: TransformFn + ?Sized>(f: &T, t: f64) -> Result<f64> {
    invert(f, t, &InverterConfig::default())
}

/// Smallest `rt` of the log-space contour. Holding it fixed while nodes are
/// added keeps the rounding amplification `e^{rt}` near `1e4`.
const LOG_TALBOT_SCALE: f64 = 9.6;

/// Talbot inversion of `exp(log_f(s))` on a contour crossing the real axis at
/// `max(9.6/t, r_min)`. The exponent `st + log_f(s)` is formed before it is
/// exponentiated, so putting `r_min` at the saddle point of `st + log_f(s)`
/// keeps every node term of the size of the result: originals far below
/// `1e-16` retain their relative accuracy and `e^{rt}` cannot overflow.
pub fn invert_talbot_log<F>(log_f: F, t: f64, r_min: f64) -> Result<f64>
where
    F: Fn(Complex64) -> Complex64,
{
    invert_talbot_log_with(log_f, t, r_min, InverterConfig::default().node_count)
}

/// Node counts tried by [`invert_talbot_log_adaptive`].
const ADAPTIVE_NODES: [usize; 5] = [32, 48, 64, 96, 128];

/// [`invert_talbot_log`] with the node count raised until two consecutive
/// counts agree to `rel_tol`, or to within the rounding noise of the node
/// sum; the smaller of the agreeing pair is returned. Sharp originals, such
/// as near-delta densities, need more nodes.
pub fn invert_talbot_log_adaptive<F>(log_f: F, t: f64, r_min: f64, rel_tol: f64) -> Result<f64>
where
    F: Fn(Complex64) -> Complex64,
{
    let (mut prev, mut prev_noise) = talbot_log_sum(&log_f, t, r_min, ADAPTIVE_NODES[0])?;
    for &m in &ADAPTIVE_NODES[1..] {
        let (next, noise) = talbot_log_sum(&log_f, t, r_min, m)?;
        let tol = (rel_tol * next.abs().max(prev.abs())).max(100.0 * noise.max(prev_noise));
        if (next - prev).abs() <= tol {
            return Ok(prev);
        }
        prev = next;
        prev_noise = noise;
    }
    Err(Error::Convergence {
        terms: *ADAPTIVE_NODES.last().unwrap(),
        last_term: prev,
    })
}

/// [`invert_talbot_log`] with `m` contour nodes.
pub fn invert_talbot_log_with<F>(log_f: F, t: f64, r_min: f64, m: usize) -> Result<f64>
where
    F: Fn(Complex64) -> Complex64,
{
    talbot_log_sum(&log_f, t, r_min, m).map(|(v, _)| v)
}

// Value and rounding-noise scale `eps * Σ|term|`.
fn talbot_log_sum<F>(log_f: &F, t: f64, r_min: f64, m: usize) -> Result<(f64, f64)>
where
    F: Fn(Complex64) -> Complex64,
{
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("inversion time must be positive, got {t}")));
    }
    if m < 4 {
        return Err(Error::domain(format!("Talbot needs at least 4 nodes, got {m}")));
    }
    let mf = m as f64;
    let r = (LOG_TALBOT_SCALE / t).max(if r_min.is_finite() { r_min } else { 0.0 });
    let s0 = Complex64::new(r, 0.0);
    let e0 = s0 * t + log_f(s0);
    if !e0.re.is_finite() {
        return Err(inversion_failure(s0));
    }
    let first = 0.5 * e0.exp().re;
    let mut sum = first;
    let mut abs_sum = first.abs();
    for k in 1..m {
        let theta = k as f64 * PI / mf;
        let cot = theta.cos() / theta.sin();
        let s = Complex64::new(r * theta * cot, r * theta);
        let sigma = theta + (theta * cot - 1.0) * cot;
        let e = s * t + log_f(s);
        if e.re.is_nan() || e.im.is_nan() {
            return Err(inversion_failure(s));
        }
        if e.re < -745.0 {
            continue;
        }
        let term = (e.exp() * Complex64::new(1.0, sigma)).re;
        sum += term;
        abs_sum += term.abs();
    }
    let value = r / mf * sum;
    if !value.is_finite() {
        return Err(inversion_failure(s0));
    }
    Ok((value, f64::EPSILON * r / mf * abs_sum))
}

fn inversion_failure(s: Complex64) -> Error {
    Error::Inversion { lambda: format!("{s}") }
}

// Fixed Talbot contour s(θ) = rθ(cot θ + i), r = 2M/(5t). Terms are summed in
// ascending node order.
fn talbot<T: TransformFn + ?Sized>(f: &T, t: f64, m: usize) -> Result<f64> {
    let mf = m as f64;
    let r = 2.0 * mf / (5.0 * t);
    let s0 = Complex64::new(r, 0.0);
    let f0 = f.eval(s0);
    if !f0.re.is_finite() {
        return Err(inversion_failure(s0));
    }
    let mut sum = 0.5 * (r * t).exp() * f0.re;
    for k in 1..m {
        let theta = k as f64 * PI / mf;
        let cot = theta.cos() / theta.sin();
        let s = Complex64::new(r * theta * cot, r * theta);
        let sigma = theta + (theta * cot - 1.0) * cot;
        let fs = f.eval(s);
        if !(fs.re.is_finite() && fs.im.is_finite()) {
            return Err(inversion_failure(s));
        }
        let term = (s * t).exp() * fs * Complex64::new(1.0, sigma);
        sum += term.re;
    }
    let value = r / mf * sum;
    if !value.is_finite() {
        return Err(inversion_failure(s0));
    }
    Ok(value)
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Gaver-Stehfest weights `V_k`, `k = 1..=n`.
pub fn stehfest_weights(n: usize) -> Vec<f64> {
    let half = n / 2;
    (1..=n)
        .map(|k| {
            let lo = (k + 1) / 2;
            let hi = k.min(half);
            let sum: f64 = (lo..=hi)
                .map(|j| {
                    (j as f64).powi(half as i32) * factorial(2 * j)
                        / (factorial(half - j)
                            * factorial(j)
                            * factorial(j - 1)
                            * factorial(k - j)
                            * factorial(2 * j - k))
                })
                .sum();
            if (k + half) % 2 == 0 {
                sum
            } else {
                -sum
            }
        })
        .collect()
}

fn stehfest<T: TransformFn + ?Sized>(f: &T, t: f64, n: usize) -> Result<f64> {
    let a = LN_2 / t;
    let mut sum = 0.0;
    for (i, v) in stehfest_weights(n).into_iter().enumerate() {
        let lambda = a * (i + 1) as f64;
        let fl = f.eval_real(lambda);
        if !fl.is_finite() {
            return Err(inversion_failure(Complex64::new(lambda, 0.0)));
        }
        sum += v * fl;
    }
    Ok(a * sum)
}

/// Default truncation point for [`forward`].
pub fn default_t_cut(lambda: f64) -> f64 {
    (30.0 / lambda).max(50.0)
}

/// `∫₀^{t_cut} e^{-λt} f(t) dt` by adaptive quadrature (relative tolerance
/// 1e-8). Requires `λ·t_cut ≥ 30` so the neglected tail is below `e^{-30}`
/// times the scale of `f`.
pub fn forward<F: Fn(f64) -> f64>(f: F, lambda: f64, t_cut: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::domain(format!("forward transform needs λ > 0, got {lambda}")));
    }
    if lambda * t_cut < 30.0 {
        return Err(Error::domain(format!(
            "λ·t_cut = {} < 30 leaves a non-negligible tail",
            lambda * t_cut
        )));
    }
    let q = Quad::new(1e-13, 1e-8);
    let pts = [0.0, t_cut * 1e-3, t_cut * 1e-2, t_cut * 0.1, t_cut];
    q.integrate_points(|t| (-lambda * t).exp() * f(t), &pts)
        .map(|e| e.value)
}

/// Self-consistency meter: for each `t` in `t_grid` the probe abscissa is
/// `λ* = 1/t`, and the result is `max |forward(invert(F, ·), λ*) - F(λ*)|`.
pub fn roundtrip_error<T: TransformFn + ?Sized>(f: &T, t_grid: &[f64], cfg: &InverterConfig) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &t in t_grid {
        if !(t > 0.0) {
            return Err(Error::domain(format!("grid point must be positive, got {t}")));
        }
        let lambda = 1.0 / t;
        let back = forward(
            |s| {
                if s > 0.0 {
                    invert(f, s, cfg).unwrap_or(f64::NAN)
                } else {
                    0.0
                }
            },
            lambda,
            default_t_cut(lambda),
        )?;
        worst = worst.max((back - f.eval_real(lambda)).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn recip() -> impl TransformFn {
        Transform::new("1/λ", |s: Complex64| s.inv())
    }

    #[test]
    fn constant_pair() {
        for t in [0.1, 1.0, 7.0] {
            let v = invert_talbot(&recip(), t).unwrap();
            assert!((v - 1.0).abs() < 1e-10, "{v}");
        }
    }

    #[test]
    fn exponential_pair() {
        let f = Transform::new("1/(λ+1)", |s: Complex64| (s + 1.0).inv());
        let v = invert_talbot(&f, 1.0).unwrap();
        assert!((v - (-1.0f64).exp()).abs() < 1e-10);
        let v = invert(&f, 1.0, &InverterConfig::stehfest(14)).unwrap();
        assert!((v - (-1.0f64).exp()).abs() < 2e-6, "{v}");
    }

    #[test]
    fn stehfest_weights_sum_to_zero() {
        for n in [8, 10, 12, 14, 16] {
            let w = stehfest_weights(n);
            let s: f64 = w.iter().sum();
            assert!(
                s.abs() < 1e-6 * w.iter().map(|v| v.abs()).fold(0.0, f64::max),
                "n={n} sum={s}"
            );
        }
        // Known N = 8 weights.
        let w = stehfest_weights(8);
        let expected = [
            -1.0 / 3.0,
            145.0 / 3.0,
            -906.0,
            16394.0 / 3.0,
            -43130.0 / 3.0,
            18730.0,
            -35840.0 / 3.0,
            8960.0 / 3.0,
        ];
        for (a, b) in w.iter().zip(expected) {
            assert!((a - b).abs() < 1e-9 * b.abs(), "{a} vs {b}");
        }
    }

    #[test]
    fn config_validation() {
        assert!(InverterConfig {
            node_count: 8,
            ..InverterConfig::default()
        }
        .validate()
        .is_err());
        assert!(InverterConfig::stehfest(9).validate().is_err());
        assert!(InverterConfig::stehfest(18).validate().is_err());
        assert!(InverterConfig::stehfest(16).validate().is_ok());
    }

    #[test]
    fn non_finite_transform_is_reported() {
        let f = Transform::new("nan", |_s: Complex64| Complex64::new(f64::NAN, 0.0));
        match invert_talbot(&f, 1.0) {
            Err(Error::Inversion { .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn log_space_inversion_far_below_unit_scale() {
        // e^{-x√λ} ↦ (x/t) g(t, x): at t = 0.01, x = 2 the original is ~1e-43.
        let (t, x) = (0.01_f64, 2.0_f64);
        let exact = x / t * (-x * x / (4.0 * t)).exp() / (4.0 * PI * t).sqrt();
        // Saddle of st − x√s.
        let saddle = (x / (2.0 * t)).powi(2);
        let v = invert_talbot_log(|s: Complex64| -x * s.sqrt(), t, saddle).unwrap();
        assert!((v - exact).abs() < 1e-8 * exact, "{v} vs {exact}");
    }

    #[test]
    fn forward_constant() {
        let v = forward(|_| 1.0, 2.0, 30.0).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
        assert!(forward(|_| 1.0, 0.5, 10.0).is_err());
    }

    #[test]
    fn roundtrip_of_constant() {
        let e = roundtrip_error(&recip(), &[0.5, 1.0, 2.0], &InverterConfig::default()).unwrap();
        assert!(e < 1e-7, "{e}");
    }
}
