//! Stable subordinators `H` (Laplace exponent `λ^α`), their inverses `L`, the
//! drifted subordinator `H̄_s = (σ/η) s + H_s` and its inverse `L̄`.
//!
//! Densities follow the convention `P(H_t ∈ dx) = h(t, x) dx` and
//! `P(L_t ∈ dx) = l(t, x) dx`; the two are tied by `α (x/t) l(t, x) = h(x, t)`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rand::distr::Open01;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::laplace::{invert_talbot, invert_talbot_log_adaptive, Transform};

/// Agreement demanded between successive Talbot node counts for the stable densities.
const DENSITY_REL_TOL: f64 = 1e-9;
use crate::quad::Quad;

/// Stability indices at or above this are treated as `α = 1`.
pub const ALPHA_ONE: f64 = 1.0 - 1e-9;

/// The problem quadruple `(α, η, σ, c)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub alpha: f64,
    pub eta: f64,
    pub sigma: f64,
    pub c: f64,
}

impl Params {
    pub fn new(alpha: f64, eta: f64, sigma: f64, c: f64) -> Result<Self> {
        let p = Params { alpha, eta, sigma, c };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::domain(format!("alpha must lie in (0, 1], got {}", self.alpha)));
        }
        for (name, v) in [("eta", self.eta), ("sigma", self.sigma), ("c", self.c)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::domain(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// `σ/η`, defined for `η > 0`.
    pub fn drift_ratio(&self) -> Option<f64> {
        (self.eta > 0.0).then(|| self.sigma / self.eta)
    }

    /// The boundary condition needs at least one of `η`, `σ`.
    pub fn require_boundary(&self) -> Result<()> {
        if self.eta == 0.0 && self.sigma == 0.0 {
            return Err(Error::domain("eta and sigma cannot both vanish"));
        }
        Ok(())
    }

    fn drift(&self) -> Result<f64> {
        self.drift_ratio()
            .ok_or_else(|| Error::domain("the inverse subordinator needs eta > 0"))
    }

    pub fn is_alpha_one(&self) -> bool {
        self.alpha >= ALPHA_ONE
    }
}

/// Deterministic random stream keyed by `(master_seed, stream_index)`.
#[derive(Debug, Clone)]
pub struct RngStream {
    master_seed: u64,
    stream_index: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(stream_index);
        RngStream {
            master_seed,
            stream_index,
            rng,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    /// Uniform on the open interval `(0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.sample(Open01)
    }

    pub fn exp1(&mut self) -> f64 {
        self.rng.sample(Exp1)
    }

    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::domain(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    Ok(())
}

fn check_alpha_open(alpha: f64) -> Result<()> {
    check_alpha(alpha)?;
    if alpha >= ALPHA_ONE {
        return Err(Error::domain(
            "the density does not exist at alpha = 1 (degenerate time)",
        ));
    }
    Ok(())
}

// Kanter: H_1 = sin(αu)/sin(u)^{1/α} · (sin((1-α)u)/E)^{(1-α)/α}, u ~ U(0, π).
fn kanter(alpha: f64, rng: &mut RngStream) -> f64 {
    let u = PI * rng.uniform();
    let e = rng.exp1();
    let log = (alpha * u).sin().ln() - u.sin().ln() / alpha
        + (1.0 - alpha) / alpha * (((1.0 - alpha) * u).sin().ln() - e.ln());
    log.exp()
}

/// Draw of `H_t`, `E[e^{-λ H_t}] = e^{-t λ^α}`.
pub fn sample_stable(alpha: f64, t: f64, rng: &mut RngStream) -> Result<f64> {
    check_alpha(alpha)?;
    if !(t > 0.0) {
        return Err(Error::domain(format!("time must be positive, got {t}")));
    }
    if alpha >= ALPHA_ONE {
        return Ok(t);
    }
    Ok(t.powf(1.0 / alpha) * kanter(alpha, rng))
}

/// Draw of `L_t = (t / H_1)^α`.
pub fn sample_inverse_stable(alpha: f64, t: f64, rng: &mut RngStream) -> Result<f64> {
    check_alpha(alpha)?;
    if !(t > 0.0) {
        return Err(Error::domain(format!("time must be positive, got {t}")));
    }
    if alpha >= ALPHA_ONE {
        return Ok(t);
    }
    Ok((t / kanter(alpha, rng)).powf(alpha))
}

/// `h(t, x)`: density of `H_t` at `x`, by inverting `ξ ↦ e^{-t ξ^α}` in `x`.
///
/// The contour passes through the saddle point of `ξx − tξ^α`, which keeps
/// the relative accuracy deep in the left tail and avoids the growth of
/// `e^{-tξ^α}` along the contour when `α > 1/2`.
pub fn stable_density(alpha: f64, t: f64, x: f64) -> Result<f64> {
    check_alpha_open(alpha)?;
    if !(t > 0.0) || !(x > 0.0) {
        return Err(Error::domain(format!(
            "stable_density needs t, x > 0, got t={t}, x={x}"
        )));
    }
    if x / t.powf(1.0 / alpha) < small_stable_argument(alpha) {
        return Ok(0.0);
    }
    let saddle = (alpha * t / x).powf(1.0 / (1.0 - alpha));
    let v = invert_talbot_log_adaptive(|s: Complex64| -t * s.powf(alpha), x, saddle, DENSITY_REL_TOL)?;
    Ok(v.max(0.0))
}

/// Below this `x` the unit-time stable density is under 1e-300.
fn small_stable_argument(alpha: f64) -> f64 {
    // h(1, x) ~ exp(-(1-α) α^{α/(1-α)} x^{-α/(1-α)}).
    let k = (1.0 - alpha) * alpha.powf(alpha / (1.0 - alpha));
    (690.0 / k).powf(-(1.0 - alpha) / alpha)
}

/// `h(t, x)` by the Zolotarev integral
/// `h(1,x) = α/(1-α) x^{-1/(1-α)} (1/π) ∫₀^π A(φ) exp(-x^{-α/(1-α)} A(φ)) dφ`,
/// a positive integrand that does not rely on Laplace inversion.
pub fn stable_density_integral(alpha: f64, t: f64, x: f64) -> Result<f64> {
    check_alpha_open(alpha)?;
    if !(t > 0.0) || !(x > 0.0) {
        return Err(Error::domain(format!(
            "stable density needs t, x > 0, got t={t}, x={x}"
        )));
    }
    let scale = t.powf(1.0 / alpha);
    let v = x / scale;
    let p = 1.0 / (1.0 - alpha);
    let z = v.powf(-alpha * p);
    let kernel = |phi: f64| -> f64 {
        if phi <= 0.0 || phi >= PI {
            return 0.0;
        }
        let a = (alpha * phi).sin();
        let log_a = p * (a.ln() - phi.sin().ln()) + ((1.0 - alpha) * phi).sin().ln() - a.ln();
        let big_a = log_a.exp();
        let e = -z * big_a;
        if e < -745.0 {
            0.0
        } else {
            big_a * e.exp()
        }
    };
    let integral = Quad::new(1e-300, 1e-11)
        .integrate_points(kernel, &[0.0, PI / 4.0, PI / 2.0, 3.0 * PI / 4.0, PI])?
        .value;
    Ok(alpha * p * v.powf(-p) * integral / PI / scale)
}

/// `l(t, x)`: density of `L_t` at `x`, by inverting `λ ↦ λ^{α-1} e^{-x λ^α}` at `t`
/// on a contour through the saddle point of `λt − xλ^α`.
pub fn inverse_stable_density(alpha: f64, t: f64, x: f64) -> Result<f64> {
    check_alpha_open(alpha)?;
    if !(t > 0.0) || !(x >= 0.0) {
        return Err(Error::domain(format!(
            "inverse_stable_density needs t > 0, x >= 0, got t={t}, x={x}"
        )));
    }
    if x / t.powf(alpha) > large_inverse_argument(alpha) {
        return Ok(0.0);
    }
    let saddle = (alpha * x / t).powf(1.0 / (1.0 - alpha));
    let v = invert_talbot_log_adaptive(
        |s: Complex64| (alpha - 1.0) * s.ln() - x * s.powf(alpha),
        t,
        saddle,
        DENSITY_REL_TOL,
    )?;
    Ok(v.max(0.0))
}

/// Beyond this `y` the unit-time inverse-stable density is under 1e-300.
fn large_inverse_argument(alpha: f64) -> f64 {
    // l(1, y) = y^{-1-1/α} h(1, y^{-1/α}) / α: the small-argument bound of h, mapped.
    small_stable_argument(alpha).powf(-alpha)
}

/// `l(t, x)` through the identity `l(t, x) = t h(x, t) / (α x)` and the
/// Zolotarev integral; no Laplace inversion involved.
pub fn inverse_stable_density_integral(alpha: f64, t: f64, x: f64) -> Result<f64> {
    check_alpha_open(alpha)?;
    if !(t > 0.0) || !(x >= 0.0) {
        return Err(Error::domain(format!(
            "inverse stable density needs t > 0, x >= 0, got t={t}, x={x}"
        )));
    }
    if x == 0.0 {
        return Ok(t.powf(-alpha) / libm::tgamma(1.0 - alpha));
    }
    Ok(t * stable_density_integral(alpha, x, t)? / (alpha * x))
}

/// Density of `L̄_t` at `w`, where `L̄` inverts `H̄_s = (σ/η) s + H_s`:
/// `l̄(t,w) = d α (w/τ) l(τ, w) + l(τ, w)` with `d = σ/η`, `τ = t - d w`.
/// Zero for `w ≥ t/d`.
pub fn lbar_density(p: &Params, t: f64, w: f64) -> Result<f64> {
    p.validate()?;
    let d = p.drift()?;
    check_alpha_open(p.alpha)?;
    if !(t > 0.0) || !(w >= 0.0) {
        return Err(Error::domain(format!(
            "lbar_density needs t > 0, w >= 0, got t={t}, w={w}"
        )));
    }
    let tau = t - d * w;
    if d > 0.0 && (w >= t / d || tau <= 0.0) {
        return Ok(0.0);
    }
    lbar_from_tau(p.alpha, d, tau, w)
}

/// `l̄` written in terms of `τ = t - d w` directly; keeps precision when `τ ≪ t`.
pub(crate) fn lbar_from_tau(alpha: f64, d: f64, tau: f64, w: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return Ok(0.0);
    }
    let l = inverse_stable_density(alpha, tau, w)?;
    Ok(d * alpha * (w / tau) * l + l)
}

/// Beyond `y_max(α) t^α` the density `l(t, ·)` is below 1e-300.
pub(crate) fn inverse_stable_cutoff(alpha: f64, t: f64) -> f64 {
    large_inverse_argument(alpha) * t.powf(alpha)
}

/// Upper end of the support of `L̄_t`: `t η/σ`, or `+∞` without drift.
pub fn lbar_support(p: &Params, t: f64) -> Result<f64> {
    let d = p.drift()?;
    Ok(if d > 0.0 { t / d } else { f64::INFINITY })
}

/// A density on a grid, normalised to `mass`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedDensity {
    pub abscissae: Vec<f64>,
    pub values: Vec<f64>,
    pub support_hi: f64,
    pub mass: f64,
    cdf: Vec<f64>,
}

impl TabulatedDensity {
    pub fn new(abscissae: Vec<f64>, values: Vec<f64>, support_hi: f64, mass: f64) -> Result<Self> {
        if abscissae.len() != values.len() || abscissae.len() < 2 {
            return Err(Error::domain("grid and values must have equal length >= 2"));
        }
        if abscissae.windows(2).any(|w| !(w[1] > w[0])) || abscissae[0] < 0.0 {
            return Err(Error::domain("abscissae must be non-negative and strictly increasing"));
        }
        if values.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::domain("density values must be non-negative"));
        }
        let mut cdf = Vec::with_capacity(values.len());
        cdf.push(0.0);
        for i in 1..values.len() {
            let step = 0.5 * (values[i] + values[i - 1]) * (abscissae[i] - abscissae[i - 1]);
            cdf.push(cdf[i - 1] + step);
        }
        Ok(TabulatedDensity {
            abscissae,
            values,
            support_hi,
            mass,
            cdf,
        })
    }

    pub fn trapezoid_mass(&self) -> f64 {
        *self.cdf.last().unwrap_or(&0.0)
    }

    /// `|trapezoid mass - declared mass|`.
    pub fn mass_defect(&self) -> f64 {
        (self.trapezoid_mass() - self.mass).abs()
    }

    /// Piecewise-linear interpolation; zero outside the grid and beyond `support_hi`.
    pub fn density(&self, w: f64) -> f64 {
        if w >= self.support_hi || w < self.abscissae[0] || w > *self.abscissae.last().unwrap() {
            return 0.0;
        }
        let i = self
            .abscissae
            .partition_point(|&a| a <= w)
            .clamp(1, self.abscissae.len() - 1);
        let (a0, a1) = (self.abscissae[i - 1], self.abscissae[i]);
        let f = (w - a0) / (a1 - a0);
        self.values[i - 1] * (1.0 - f) + self.values[i] * f
    }

    /// Cumulative mass up to `w`, renormalised by the trapezoid mass.
    pub fn cdf(&self, w: f64) -> f64 {
        let total = self.trapezoid_mass();
        if w <= self.abscissae[0] {
            return 0.0;
        }
        if w >= *self.abscissae.last().unwrap() {
            return 1.0;
        }
        let i = self
            .abscissae
            .partition_point(|&a| a <= w)
            .clamp(1, self.abscissae.len() - 1);
        let (a0, a1) = (self.abscissae[i - 1], self.abscissae[i]);
        let (f0, f1) = (self.values[i - 1], self.values[i]);
        let dx = w - a0;
        let slope = (f1 - f0) / (a1 - a0);
        (self.cdf[i - 1] + f0 * dx + 0.5 * slope * dx * dx) / total
    }

    /// Inverse CDF at `u ∈ (0, 1)`; exact for the piecewise-linear density.
    pub fn quantile(&self, u: f64) -> f64 {
        let total = self.trapezoid_mass();
        let target = u * total;
        let i = self.cdf.partition_point(|&c| c < target).clamp(1, self.cdf.len() - 1);
        let (a0, a1) = (self.abscissae[i - 1], self.abscissae[i]);
        let (f0, f1) = (self.values[i - 1], self.values[i]);
        let need = target - self.cdf[i - 1];
        let h = a1 - a0;
        let slope = (f1 - f0) / h;
        // Solve f0 dx + slope dx²/2 = need on [0, h].
        let dx = if slope.abs() * h < 1e-12 * f0.max(1e-300) {
            if f0 > 0.0 {
                need / f0
            } else {
                0.5 * h
            }
        } else {
            let disc = (f0 * f0 + 2.0 * slope * need).max(0.0);
            2.0 * need / (f0 + disc.sqrt()).max(1e-300)
        };
        let w = a0 + dx.clamp(0.0, h);
        if w >= self.support_hi {
            // Stay inside the half-open support.
            self.support_hi * (1.0 - f64::EPSILON)
        } else {
            w
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct TableKey {
    alpha: u64,
    drift: u64,
    t: u64,
    grid_n: usize,
}

impl TableKey {
    fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.alpha.to_le_bytes());
        h.update(self.drift.to_le_bytes());
        h.update(self.t.to_le_bytes());
        h.update((self.grid_n as u64).to_le_bytes());
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Tabulations of `l̄(t, ·)` keyed by `(α, σ/η, t, grid_n)`; optionally
/// mirrored as JSON files named by the key digest.
#[derive(Debug, Default)]
pub struct TableCache {
    dir: Option<PathBuf>,
    tables: Mutex<HashMap<TableKey, Arc<TabulatedDensity>>>,
}

impl TableCache {
    pub fn in_memory() -> Self {
        Self::default()
    }

    pub fn with_dir(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(TableCache {
            dir: Some(dir),
            tables: Mutex::new(HashMap::new()),
        })
    }

    pub fn len(&self) -> usize {
        self.tables.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn lbar_table(&self, p: &Params, t: f64, grid_n: usize) -> Result<Arc<TabulatedDensity>> {
        let d = p.drift()?;
        let key = TableKey {
            alpha: p.alpha.to_bits(),
            drift: d.to_bits(),
            t: t.to_bits(),
            grid_n,
        };
        if let Some(tab) = self.tables.lock().unwrap().get(&key) {
            return Ok(tab.clone());
        }
        let path = self.dir.as_ref().map(|d| d.join(format!("lbar-{}.json", key.digest())));
        if let Some(path) = &path {
            if let Ok(text) = std::fs::read_to_string(path) {
                if let Ok(tab) = serde_json::from_str::<TabulatedDensity>(&text) {
                    let tab = Arc::new(tab);
                    self.tables.lock().unwrap().insert(key, tab.clone());
                    return Ok(tab);
                }
            }
        }
        let tab = Arc::new(tabulate_lbar(p, t, grid_n)?);
        if let Some(path) = &path {
            let text = serde_json::to_string(tab.as_ref()).map_err(|e| Error::Io(e.to_string()))?;
            std::fs::write(path, text)?;
        }
        self.tables.lock().unwrap().insert(key, tab.clone());
        Ok(tab)
    }
}

fn global_cache() -> &'static TableCache {
    static CACHE: OnceLock<TableCache> = OnceLock::new();
    CACHE.get_or_init(TableCache::in_memory)
}

/// Tabulates `l̄(t, ·)` on `grid_n` points clustered at both ends of
/// `[0, support_hi]` (cosine spacing). Without drift the grid is cut where the
/// density has fallen below `1e-14` of its value at 0.
pub fn tabulate_lbar(p: &Params, t: f64, grid_n: usize) -> Result<TabulatedDensity> {
    if grid_n < 16 {
        return Err(Error::domain("grid_n must be at least 16"));
    }
    let support = lbar_support(p, t)?;
    let hi = if support.is_finite() {
        support
    } else {
        let at0 = lbar_density(p, t, 0.0)?;
        let mut hi = t.powf(p.alpha);
        while lbar_density(p, t, hi)? > 1e-14 * at0 {
            hi *= 1.5;
        }
        hi
    };
    let n = grid_n;
    let grid: Vec<f64> = (0..n)
        .map(|i| 0.5 * hi * (1.0 - (PI * i as f64 / (n - 1) as f64).cos()))
        .collect();
    let values = grid
        .iter()
        .map(|&w| lbar_density(p, t, w))
        .collect::<Result<Vec<_>>>()?;
    TabulatedDensity::new(grid, values, support, 1.0)
}

/// Draws `L̄_t` by inverse-CDF sampling from a cached tabulation of
/// [`lbar_density`]. At `α = 1`, `L̄_t = t/(1 + σ/η)`.
pub fn sample_lbar(p: &Params, t: f64, rng: &mut RngStream, grid_n: usize) -> Result<f64> {
    sample_lbar_cached(global_cache(), p, t, rng, grid_n)
}

pub fn sample_lbar_cached(cache: &TableCache, p: &Params, t: f64, rng: &mut RngStream, grid_n: usize) -> Result<f64> {
    p.validate()?;
    let d = p.drift()?;
    if !(t > 0.0) {
        return Err(Error::domain(format!("time must be positive, got {t}")));
    }
    if p.is_alpha_one() {
        return Ok(t / (1.0 + d));
    }
    let tab = cache.lbar_table(p, t, grid_n)?;
    if tab.mass_defect() > 1e-3 {
        return Err(Error::Tabulation {
            mass: tab.trapezoid_mass(),
        });
    }
    Ok(tab.quantile(rng.uniform()))
}

/// Default grid size for [`sample_lbar`].
pub const LBAR_GRID: usize = 2048;

/// `K(κ, s) = E[e^{-κ L̄_s}]`, by inverting
/// `λ ↦ (dλ + λ^α) / (λ (κ + dλ + λ^α))` at `s`, `d = σ/η`.
///
/// With `η = 0` the drift is infinite, `L̄ ≡ 0` and `K ≡ 1`. At `α = 1`,
/// `L̄_s = s/(1+d)` and `K = e^{-κ s/(1+d)}`.
pub fn k_alpha(p: &Params, kappa: f64, s: f64) -> Result<f64> {
    p.validate()?;
    if !(kappa >= 0.0) || !(s >= 0.0) {
        return Err(Error::domain(format!("k_alpha needs kappa, s >= 0, got {kappa}, {s}")));
    }
    if p.eta == 0.0 {
        p.require_boundary()?;
        return Ok(1.0);
    }
    let d = p.sigma / p.eta;
    if s == 0.0 || kappa == 0.0 {
        return Ok(1.0);
    }
    if p.is_alpha_one() {
        return Ok((-kappa * s / (1.0 + d)).exp());
    }
    let alpha = p.alpha;
    let f = Transform::new("k-alpha", move |l: Complex64| {
        let psi = l * d + l.powf(alpha);
        psi / (l * (psi + kappa))
    });
    Ok(invert_talbot(&f, s)?.clamp(0.0, 1.0))
}

/// Mittag-Leffler variate: `P(χ(α) > x) = E_α(-c x^α)`, drawn as `H_χ` with
/// `χ ~ Exp(c)` independent of `H`.
pub fn sample_mittag_leffler_rv(alpha: f64, c: f64, rng: &mut RngStream) -> Result<f64> {
    check_alpha(alpha)?;
    if !(c > 0.0) {
        return Err(Error::domain(format!("rate must be positive, got {c}")));
    }
    let chi = rng.exp1() / c;
    if alpha >= ALPHA_ONE {
        return Ok(chi);
    }
    sample_stable(alpha, chi, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::g;

    #[test]
    fn params_validation() {
        assert!(Params::new(0.5, 1.0, 0.0, 1.0).is_ok());
        assert!(Params::new(0.0, 1.0, 0.0, 1.0).is_err());
        assert!(Params::new(0.5, -1.0, 0.0, 1.0).is_err());
        assert!(Params::new(0.5, 1.0, -0.5, 1.0).is_err());
        assert_eq!(Params::new(0.5, 0.0, 1.0, 1.0).unwrap().drift_ratio(), None);
        assert!(Params::new(0.5, 0.0, 0.0, 1.0).unwrap().require_boundary().is_err());
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = {
            let mut r = RngStream::new(7, 0);
            (0..4).map(|_| r.next_u64()).collect()
        };
        let b: Vec<u64> = {
            let mut r = RngStream::new(7, 0);
            (0..4).map(|_| r.next_u64()).collect()
        };
        let c: Vec<u64> = {
            let mut r = RngStream::new(7, 1);
            (0..4).map(|_| r.next_u64()).collect()
        };
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn degenerate_stable_is_time() {
        let mut r = RngStream::new(1, 0);
        assert_eq!(sample_stable(1.0, 2.5, &mut r).unwrap(), 2.5);
        assert_eq!(sample_stable(1.0 - 1e-12, 2.5, &mut r).unwrap(), 2.5);
    }

    #[test]
    fn half_stable_density_closed_form() {
        // h(1, 1) at α = 1/2 equals (x/2√π) t^{-3/2}... in the Lévy form.
        let v = stable_density(0.5, 1.0, 1.0).unwrap();
        assert!((v - 0.219_695_644_733_861_2).abs() < 1e-10, "{v}");
        let z = stable_density_integral(0.5, 1.0, 1.0).unwrap();
        assert!((z - 0.219_695_644_733_861_2).abs() < 1e-10, "{z}");
    }

    #[test]
    fn half_inverse_density_is_twice_heat_kernel() {
        for (t, x) in [(1.0, 1.0), (0.5, 0.5), (2.0, 0.1), (0.25, 1.5)] {
            let l = inverse_stable_density(0.5, t, x).unwrap();
            let exact = 2.0 * g(t, x);
            assert!((l - exact).abs() < 1e-9, "t={t} x={x}: {l} vs {exact}");
            let z = inverse_stable_density_integral(0.5, t, x).unwrap();
            assert!((z - exact).abs() < 1e-9, "t={t} x={x}: {z} vs {exact}");
        }
    }

    #[test]
    fn inversion_and_integral_routes_agree() {
        for alpha in [0.3, 0.6, 0.7, 0.8, 0.9, 0.95] {
            for y in [0.0, 0.05, 0.3, 0.8, 1.5, 2.5, 4.0, 6.0] {
                let a = inverse_stable_density(alpha, 1.0, y).unwrap();
                let b = inverse_stable_density_integral(alpha, 1.0, y).unwrap();
                assert!((a - b).abs() <= 1e-7 * b + 1e-300, "alpha={alpha} y={y}: {a} vs {b}");
            }
            for v in [0.05, 0.2, 0.7, 1.5, 4.0, 30.0] {
                let a = stable_density(alpha, 1.0, v).unwrap();
                let b = stable_density_integral(alpha, 1.0, v).unwrap();
                assert!((a - b).abs() <= 1e-7 * b + 1e-300, "alpha={alpha} v={v}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn inverse_density_has_unit_mass() {
        for alpha in [0.35, 0.75, 0.95] {
            let m = Quad::new(1e-12, 1e-9)
                .integrate_to_inf(|y| inverse_stable_density(alpha, 1.0, y).unwrap(), 0.0, 1.0)
                .unwrap()
                .value;
            assert!((m - 1.0).abs() < 1e-7, "alpha={alpha}: {m}");
        }
    }

    #[test]
    fn lbar_reduces_without_drift() {
        let p = Params::new(0.7, 2.0, 0.0, 1.0).unwrap();
        for w in [0.0, 0.3, 1.0] {
            let a = lbar_density(&p, 1.3, w).unwrap();
            let b = inverse_stable_density(0.7, 1.3, w).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn lbar_with_drift_values() {
        let p = Params::new(0.5, 1.0, 1.0, 1.0).unwrap();
        let v = lbar_density(&p, 1.0, 0.5).unwrap();
        assert!((v - 1.056_195_980_292_898_4).abs() < 1e-9, "{v}");
        assert_eq!(lbar_density(&p, 1.0, 1.2).unwrap(), 0.0);
        assert_eq!(lbar_density(&p, 1.0, 1.0).unwrap(), 0.0);
        let p0 = Params::new(0.5, 0.0, 1.0, 1.0).unwrap();
        assert!(lbar_density(&p0, 1.0, 0.5).is_err());
    }

    #[test]
    fn lbar_alpha_one_branch() {
        let p = Params::new(1.0, 2.0, 1.0, 1.0).unwrap();
        let mut r = RngStream::new(3, 0);
        assert_eq!(sample_lbar(&p, 3.0, &mut r, LBAR_GRID).unwrap(), 3.0 / 1.5);
    }

    #[test]
    fn k_alpha_edges() {
        let p = Params::new(0.6, 1.0, 0.5, 1.0).unwrap();
        assert_eq!(k_alpha(&p, 2.0, 0.0).unwrap(), 1.0);
        assert_eq!(k_alpha(&p, 0.0, 3.0).unwrap(), 1.0);
        let p1 = Params::new(1.0, 1.0, 1.0, 1.0).unwrap();
        assert!((k_alpha(&p1, 1.0, 2.0).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn tabulated_density_rejects_bad_grids() {
        assert!(TabulatedDensity::new(vec![0.0, 0.0], vec![1.0, 1.0], 1.0, 1.0).is_err());
        assert!(TabulatedDensity::new(vec![0.0, 1.0], vec![1.0, -1.0], 1.0, 1.0).is_err());
        let t = TabulatedDensity::new(vec![0.0, 0.5, 1.0], vec![1.0, 1.0, 1.0], 1.0, 1.0).unwrap();
        assert!((t.trapezoid_mass() - 1.0).abs() < 1e-15);
        assert!((t.quantile(0.25) - 0.25).abs() < 1e-12);
        assert!((t.cdf(0.75) - 0.75).abs() < 1e-12);
        assert_eq!(t.density(1.5), 0.0);
    }

    #[test]
    fn table_cache_round_trips_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let p = Params::new(0.5, 1.0, 1.0, 1.0).unwrap();
        let c1 = TableCache::with_dir(dir.path()).unwrap();
        let a = c1.lbar_table(&p, 1.0, 64).unwrap();
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
        let c2 = TableCache::with_dir(dir.path()).unwrap();
        let b = c2.lbar_table(&p, 1.0, 64).unwrap();
        assert_eq!(*a, *b);
        assert_eq!(c2.len(), 1);
    }
}
