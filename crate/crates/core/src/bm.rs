//! Reflected Brownian motion with generator `∂²_x` on `[0, ∞)`, started at
//! `x ≥ 0`, and its local time `γ` at the origin.
//!
//! For `y, w > 0` the joint law has density
//! `P_x(X_t ∈ dy, γ_t ∈ dw) = (x+y+w)/t · g(t, x+y+w)`, plus the atom
//! `{γ_t = 0}` of mass `P_x(τ₀ > t)` carried by the killed kernel.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{monte_carlo, Exec, McEstimate};
use crate::quad::Quad;
use crate::randomtimes::RngStream;
use crate::specfun::{dirichlet_survival, g};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointSample {
    pub position: f64,
    pub local_time: f64,
    /// Whether the origin was reached by time `t`.
    pub hit: bool,
}

fn check_tx(t: f64, x: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("time must be positive, got {t}")));
    }
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("start must be finite and non-negative, got {x}")));
    }
    Ok(())
}

/// Absolutely continuous part of `P_x(X_t ∈ dy, γ_t ∈ dw)`.
pub fn joint_density(t: f64, x: f64, y: f64, w: f64) -> Result<f64> {
    check_tx(t, x)?;
    if !(y > 0.0) || !(w > 0.0) {
        return Err(Error::domain(format!("joint_density needs y, w > 0, got y={y}, w={w}")));
    }
    let z = x + y + w;
    Ok(z / t * g(t, z))
}

/// Exact draw of `(X_t, γ_t)` under `P_x`.
///
/// The free endpoint `x + √(2t) Z` is kept (no hit) with the reflection
/// probability `1 - e^{-xY/t}`. Otherwise `S = y + w` is drawn from its
/// marginal `∝ S (x+S) g(t, x+S)` and split uniformly, since the joint density
/// is constant on `{y + w = S}`.
pub fn sample_joint(t: f64, x: f64, rng: &mut RngStream) -> Result<JointSample> {
    check_tx(t, x)?;
    Ok(draw_joint(t, x, rng))
}

pub(crate) fn draw_joint(t: f64, x: f64, rng: &mut RngStream) -> JointSample {
    let free = x + (2.0 * t).sqrt() * rng.normal();
    if free > 0.0 && x > 0.0 && rng.uniform() < -(-x * free / t).exp_m1() {
        return JointSample {
            position: free,
            local_time: 0.0,
            hit: false,
        };
    }
    let s = draw_sum(t, x, rng);
    let w = s * rng.uniform();
    JointSample {
        position: s - w,
        local_time: w,
        hit: true,
    }
}

// With v = (x+S)²/4t the target is ∝ (√v - √v0) e^{-v} on v > v0 = x²/4t.
fn draw_sum(t: f64, x: f64, rng: &mut RngStream) -> f64 {
    let v0 = x * x / (4.0 * t);
    let r0 = v0.sqrt();
    loop {
        let e;
        let accept;
        if v0 < 1.0 {
            // Gamma(3/2) proposal; √(v0+E) - √v0 ≤ √E.
            let z = rng.normal();
            e = 0.5 * z * z + rng.exp1();
            accept = ((v0 + e).sqrt() - r0) / e.sqrt();
        } else {
            // Gamma(2) proposal; √(v0+E) - √v0 ≤ E / 2√v0.
            e = rng.exp1() + rng.exp1();
            accept = 2.0 * r0 / ((v0 + e).sqrt() + r0);
        }
        if e > 0.0 && rng.uniform() < accept {
            return (4.0 * t * (v0 + e)).sqrt() - x;
        }
    }
}

/// `E_x[e^{-ρ γ_t}] = P_x(τ₀ > t) + ∫₀^∞ e^{-ρw} 2g(t, x+w) dw` by quadrature,
/// the `y`-integral of the joint density being `2g(t, x+w)`.
pub fn elastic_weight_quadrature(t: f64, x: f64, rho: f64) -> Result<f64> {
    check_tx(t, x)?;
    if !(rho >= 0.0) {
        return Err(Error::domain(format!("rho must be non-negative, got {rho}")));
    }
    let atom = dirichlet_survival(t, x)?;
    if rho == 0.0 {
        return Ok(1.0);
    }
    if rho.is_infinite() {
        return Ok(atom);
    }
    let width = 2.0 * t.sqrt();
    let scale = width.min(1.0 / rho);
    let hi = 40.0 * width;
    let mut pts = vec![0.0];
    let mut p = scale * 1e-3;
    while p < hi {
        pts.push(p);
        p *= 4.0;
    }
    pts.push(hi);
    let tail = Quad::new(1e-14, 1e-12)
        .integrate_points(|w| (-rho * w).exp() * 2.0 * g(t, x + w), &pts)?
        .value;
    Ok((atom + tail).clamp(0.0, 1.0))
}

/// Monte Carlo estimate of `E_x[e^{-ρ γ_t}]` from `n` joint draws.
pub fn elastic_weight_survival(t: f64, x: f64, rho: f64, n: usize, seed: u64) -> Result<McEstimate> {
    elastic_weight_survival_with(t, x, rho, n, seed, Exec::default())
}

pub fn elastic_weight_survival_with(t: f64, x: f64, rho: f64, n: usize, seed: u64, exec: Exec) -> Result<McEstimate> {
    check_tx(t, x)?;
    if !(rho >= 0.0) {
        return Err(Error::domain(format!("rho must be non-negative, got {rho}")));
    }
    if n == 0 {
        return Err(Error::domain("need at least one draw"));
    }
    let acc = monte_carlo(n, seed, exec, |rng| {
        let s = draw_joint(t, x, rng);
        if !s.hit {
            1.0
        } else if rho.is_infinite() {
            0.0
        } else {
            (-rho * s.local_time).exp()
        }
    });
    Ok(acc.into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_depends_on_the_sum() {
        let a = joint_density(1.0, 0.3, 0.5, 0.2).unwrap();
        let b = joint_density(1.0, 0.5, 0.3, 0.2).unwrap();
        assert_eq!(a, b);
        assert!(joint_density(1.0, 0.3, 0.0, 0.2).is_err());
        assert!(joint_density(0.0, 0.3, 0.1, 0.2).is_err());
    }

    #[test]
    fn elastic_quadrature_edges() {
        assert_eq!(elastic_weight_quadrature(1.0, 0.5, 0.0).unwrap(), 1.0);
        let d = dirichlet_survival(1.0, 0.5).unwrap();
        assert_eq!(elastic_weight_quadrature(1.0, 0.5, f64::INFINITY).unwrap(), d);
        let v = elastic_weight_quadrature(1.0, 0.0, 1.0).unwrap();
        assert!((v - 0.427_583_576_155_807).abs() < 1e-10, "{v}");
    }

    #[test]
    fn samples_respect_the_atom_convention() {
        let mut r = RngStream::new(11, 0);
        for _ in 0..10_000 {
            let s = sample_joint(0.7, 0.4, &mut r).unwrap();
            assert!(s.position >= 0.0);
            if s.hit {
                assert!(s.local_time > 0.0);
            } else {
                assert_eq!(s.local_time, 0.0);
            }
        }
    }

    #[test]
    fn start_at_origin_always_hits() {
        let mut r = RngStream::new(5, 2);
        assert!((0..1000).all(|_| sample_joint(1.0, 0.0, &mut r).unwrap().hit));
    }
}
