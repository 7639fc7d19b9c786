//! Survival probability `u(t, x) = P_x(ζ > t)` of the process behind the
//! heat equation on `[0, ∞)` with boundary condition
//! `η D^α_t u(t,0) = σ ∂_x u(t,0) − c u(t,0)`, initial datum 1.
//!
//! Three routes are provided:
//!
//! * quadrature: `u = erf(x/2√t) + ∫₀^∞ 2g(t, x+z) K(z) dz`, where
//!   `K(z) = E[e^{-(c/η) L̄_z}]` is itself an integral against [`lbar_density`];
//! * Laplace: inversion of the closed-form potential `ũ(λ, x)`;
//! * Monte Carlo: exact draws of `(X_t, γ_t)` weighted by `K(γ_t)`.
//!
//! Also here: the lifetime law, the telegraph-type solutions `w`, `v`, the
//! sticky resolvent and the limiting regimes in the extreme parameters.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bm::{draw_joint, elastic_weight_quadrature, elastic_weight_survival_with};
use crate::error::{Error, Result};
use crate::laplace::{invert, InverterConfig, Transform, TransformFn};
use crate::par::{monte_carlo, Exec, McEstimate};
use crate::quad::Quad;
use crate::randomtimes::{
    inverse_stable_cutoff, inverse_stable_density, k_alpha, lbar_density, lbar_from_tau, lbar_support,
    sample_mittag_leffler_rv, sample_stable, stable_density, Params, RngStream,
};
use crate::specfun::{dirichlet_survival, fp_density, g, mittag_leffler, MLSeriesBudget};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Quadrature,
    Laplace,
    #[serde(rename = "mc")]
    MonteCarlo,
}

impl Route {
    pub const ALL: [Route; 3] = [Route::Quadrature, Route::Laplace, Route::MonteCarlo];

    pub fn as_str(&self) -> &'static str {
        match self {
            Route::Quadrature => "quadrature",
            Route::Laplace => "laplace",
            Route::MonteCarlo => "mc",
        }
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Route {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quadrature" => Ok(Route::Quadrature),
            "laplace" => Ok(Route::Laplace),
            "mc" | "montecarlo" => Ok(Route::MonteCarlo),
            other => Err(Error::Parse(format!("unknown route '{other}'"))),
        }
    }
}

/// Minimum draws accepted by the Monte Carlo route.
pub const MIN_MC_DRAWS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveRequest {
    pub params: Params,
    pub t: f64,
    pub x: f64,
    pub route: Route,
    pub mc_draws: usize,
    pub seed: u64,
    /// Relative tolerance of the outer quadrature.
    pub quad_rel_tol: f64,
    pub inverter: InverterConfig,
    #[serde(skip, default)]
    pub exec: Exec,
}

impl SolveRequest {
    pub fn new(params: Params, t: f64, x: f64, route: Route) -> Self {
        SolveRequest {
            params,
            t,
            x,
            route,
            mc_draws: 100_000,
            seed: 42,
            quad_rel_tol: 1e-9,
            inverter: InverterConfig::default(),
            exec: Exec::default(),
        }
    }

    pub fn with_route(mut self, route: Route) -> Self {
        self.route = route;
        self
    }

    pub fn with_draws(mut self, n: usize) -> Self {
        self.mc_draws = n;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.params.require_boundary()?;
        if !(self.t > 0.0) || !self.t.is_finite() {
            return Err(Error::domain(format!("t must be positive, got {}", self.t)));
        }
        if !(self.x >= 0.0) || !self.x.is_finite() {
            return Err(Error::domain(format!("x must be non-negative, got {}", self.x)));
        }
        if self.route == Route::MonteCarlo && self.mc_draws < MIN_MC_DRAWS {
            return Err(Error::domain(format!(
                "the Monte Carlo route needs at least {MIN_MC_DRAWS} draws, got {}",
                self.mc_draws
            )));
        }
        if !(self.quad_rel_tol > 0.0) {
            return Err(Error::domain("quad_rel_tol must be positive"));
        }
        self.inverter.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurvivalResult {
    pub value: f64,
    /// Zero for the deterministic routes.
    pub std_error: f64,
    pub route: Route,
    /// `P_x(τ₀ > t)`.
    pub atom: f64,
    /// `u − atom`: the contribution of paths that reached the boundary.
    pub boundary: f64,
}

impl SurvivalResult {
    fn deterministic(route: Route, atom: f64, value: f64) -> Self {
        SurvivalResult {
            value,
            std_error: 0.0,
            route,
            atom,
            boundary: value - atom,
        }
    }
}

/// Dispatches on `req.route`. Requests with `η = 0` go to [`survival_robin`]
/// on the deterministic routes and to the elastic sampler on the Monte Carlo one.
pub fn solve(req: &SolveRequest) -> Result<SurvivalResult> {
    req.validate()?;
    let p = &req.params;
    if p.eta == 0.0 {
        let atom = dirichlet_survival(req.t, req.x)?;
        return match req.route {
            Route::MonteCarlo => {
                let est = elastic_weight_survival_with(req.t, req.x, p.c / p.sigma, req.mc_draws, req.seed, req.exec)?;
                Ok(SurvivalResult {
                    value: est.value,
                    std_error: est.std_error,
                    route: req.route,
                    atom,
                    boundary: est.value - atom,
                })
            }
            route => Ok(SurvivalResult::deterministic(
                route,
                atom,
                survival_robin(req.t, req.x, p.sigma, p.c)?,
            )),
        };
    }
    match req.route {
        Route::Quadrature => survival_quadrature(req),
        Route::Laplace => survival_laplace(req),
        Route::MonteCarlo => survival_mc(req),
    }
}

fn require_eta(p: &Params) -> Result<()> {
    if p.eta > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(
            "this route needs eta > 0; use survival_robin for eta = 0",
        ))
    }
}

// Runs a quadrature whose integrand may fail; the first failure wins.
fn try_integrate<F>(quad: &Quad, points: &[f64], f: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let out = quad.integrate_points(
        |v| match f(v) {
            Ok(y) => y,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        },
        points,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    out.map(|e| e.value)
}

/// `points` geometric from `hi * 10^{-decades}` up to `hi`, with 0 in front.
fn geometric_points(hi: f64, decades: i32) -> Vec<f64> {
    let mut pts = vec![0.0];
    pts.extend((0..=decades).rev().map(|k| hi * 10f64.powi(-k)));
    pts
}

/// `K(z) = E[e^{-(c/η) L̄_z}]` by quadrature against the density of `L̄_z`.
pub fn boundary_kernel(p: &Params, z: f64) -> Result<f64> {
    p.validate()?;
    require_eta(p)?;
    if !(z >= 0.0) {
        return Err(Error::domain(format!("z must be non-negative, got {z}")));
    }
    let kappa = p.c / p.eta;
    let d = p.sigma / p.eta;
    if z == 0.0 || kappa == 0.0 {
        return Ok(1.0);
    }
    if p.is_alpha_one() {
        return Ok((-kappa * z / (1.0 + d)).exp());
    }
    let quad = Quad::new(1e-13, 1e-10);
    let v = if d > 0.0 {
        // w = (z − τ)/d, τ ∈ (0, z]; mass piles up at small τ when d is large.
        let f = |tau: f64| -> Result<f64> {
            let w = (z - tau) / d;
            if w <= 0.0 {
                return Ok(0.0);
            }
            Ok((-kappa * w).exp() * lbar_from_tau(p.alpha, d, tau, w)? / d)
        };
        try_integrate(&quad, &geometric_points(z, 14), f)?
    } else {
        let hi = inverse_stable_cutoff(p.alpha, z);
        let scale = z.powf(p.alpha);
        let mut pts = vec![0.0];
        let mut q = scale / 8.0;
        while q < hi {
            pts.push(q);
            q *= 2.0;
        }
        pts.push(hi);
        try_integrate(&quad, &pts, |w| {
            Ok((-kappa * w).exp() * inverse_stable_density(p.alpha, z, w)?)
        })?
    };
    Ok(v.clamp(0.0, 1.0))
}

/// Upper end beyond which `g(t, x+z) < e^{-700} g(t, x)`.
fn kernel_reach(t: f64, x: f64) -> f64 {
    -x + (x * x + 2800.0 * t).sqrt()
}

/// The quadrature route.
pub fn survival_quadrature(req: &SolveRequest) -> Result<SurvivalResult> {
    req.validate()?;
    let p = &req.params;
    require_eta(p)?;
    let (t, x) = (req.t, req.x);
    let atom = dirichlet_survival(t, x)?;
    if p.c == 0.0 {
        return Ok(SurvivalResult::deterministic(Route::Quadrature, atom, 1.0));
    }
    let quad = Quad::new(1e-13, req.quad_rel_tol);
    let pts = geometric_points(kernel_reach(t, x), 8);
    let boundary = try_integrate(&quad, &pts, |z| {
        let k = 2.0 * g(t, x + z);
        if k == 0.0 {
            return Ok(0.0);
        }
        Ok(k * boundary_kernel(p, z)?)
    })?;
    let value = (atom + boundary).clamp(0.0, 1.0);
    Ok(SurvivalResult::deterministic(Route::Quadrature, atom, value))
}

/// `ũ(λ, x) = (1 − e^{-x√λ})/λ + e^{-x√λ} (σλ^{-1/2} + ηλ^{α/2−1}) / (c + σ√λ + ηλ^{α/2})`.
pub fn survival_transform(p: Params, x: f64) -> impl TransformFn {
    let Params { alpha, eta, sigma, c } = p;
    Transform::new("u", move |l: Complex64| {
        let r = l.sqrt();
        let e = (-x * r).exp();
        let la = l.powf(0.5 * alpha);
        let dirichlet = (1.0 - e) / l;
        let boundary = e * (sigma / r + eta * la / l) / (c + sigma * r + eta * la);
        dirichlet + boundary
    })
}

/// The Laplace route.
pub fn survival_laplace(req: &SolveRequest) -> Result<SurvivalResult> {
    req.validate()?;
    let atom = dirichlet_survival(req.t, req.x)?;
    let f = survival_transform(req.params, req.x);
    let value = invert(&f, req.t, &req.inverter)?;
    Ok(SurvivalResult::deterministic(Route::Laplace, atom, value))
}

/// `K` on a log-spaced grid in `γ`, linearly interpolated.
#[derive(Debug, Clone)]
pub struct KernelTable {
    log_lo: f64,
    step: f64,
    values: Vec<f64>,
}

/// Grid size of [`KernelTable`].
pub const KERNEL_TABLE_POINTS: usize = 1024;

impl KernelTable {
    /// Tabulates `γ ↦ k_alpha(p, c/η, γ)` on `[lo, hi]`.
    pub fn build(p: &Params, lo: f64, hi: f64) -> Result<Self> {
        require_eta(p)?;
        if !(lo > 0.0 && hi > lo) {
            return Err(Error::domain("kernel table needs 0 < lo < hi"));
        }
        let kappa = p.c / p.eta;
        let n = KERNEL_TABLE_POINTS;
        let (log_lo, log_hi) = (lo.ln(), hi.ln());
        let step = (log_hi - log_lo) / (n - 1) as f64;
        let values = (0..n)
            .map(|i| k_alpha(p, kappa, (log_lo + step * i as f64).exp()))
            .collect::<Result<Vec<_>>>()?;
        Ok(KernelTable { log_lo, step, values })
    }

    pub fn eval(&self, gamma: f64) -> f64 {
        if gamma <= 0.0 {
            return 1.0;
        }
        let lo = self.log_lo.exp();
        if gamma < lo {
            return 1.0 + (self.values[0] - 1.0) * gamma / lo;
        }
        let pos = (gamma.ln() - self.log_lo) / self.step;
        let last = self.values.len() - 1;
        if pos >= last as f64 {
            return self.values[last];
        }
        let i = pos.floor() as usize;
        let f = pos - i as f64;
        self.values[i] * (1.0 - f) + self.values[i + 1] * f
    }
}

/// The Monte Carlo route.
pub fn survival_mc(req: &SolveRequest) -> Result<SurvivalResult> {
    req.validate()?;
    let p = &req.params;
    require_eta(p)?;
    let (t, x) = (req.t, req.x);
    let atom = dirichlet_survival(t, x)?;
    let v0 = x * x / (4.0 * t);
    let hi = (4.0 * t * (v0 + 60.0)).sqrt();
    let table = KernelTable::build(p, 1e-7 * t.sqrt(), hi)?;
    let acc = monte_carlo(req.mc_draws, req.seed, req.exec, |rng| {
        let s = draw_joint(t, x, rng);
        if s.hit {
            table.eval(s.local_time)
        } else {
            1.0
        }
    });
    let est: McEstimate = acc.into();
    Ok(SurvivalResult {
        value: est.value,
        std_error: est.std_error,
        route: Route::MonteCarlo,
        atom,
        boundary: est.value - atom,
    })
}

/// `η = 0`: elastic Brownian motion with coefficient `c/σ`.
pub fn survival_robin(t: f64, x: f64, sigma: f64, c: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::domain(format!("survival_robin needs sigma > 0, got {sigma}")));
    }
    if !(c >= 0.0) {
        return Err(Error::domain(format!("c must be non-negative, got {c}")));
    }
    elastic_weight_quadrature(t, x, c / sigma)
}

/// `P(τ₀ + χ(α/2) > t)` by convolving the first-passage density with the
/// Mittag-Leffler survival `E_{α/2}(−c s^{α/2})`.
pub fn lifetime_convolution(alpha: f64, c: f64, x: f64, t: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::domain(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    if !(c >= 0.0) || !(x >= 0.0) || !(t > 0.0) {
        return Err(Error::domain("lifetime_convolution needs c, x >= 0 and t > 0"));
    }
    let budget = MLSeriesBudget::default();
    let beta = 0.5 * alpha;
    let ml = |s: f64| mittag_leffler(beta, -c * s.powf(beta), &budget);
    if c == 0.0 {
        return Ok(1.0);
    }
    if x == 0.0 {
        return ml(t);
    }
    let atom = dirichlet_survival(t, x)?;
    // s ∈ (0, t): substitute s = t − r so the cusp of E at r = 0 sits on the geometric grid.
    let pts = geometric_points(t, 10);
    let conv = try_integrate(&Quad::new(1e-13, 1e-10), &pts, |r| {
        let s = t - r;
        if s <= 0.0 {
            return Ok(0.0);
        }
        let f = fp_density(s, x);
        if f == 0.0 {
            return Ok(0.0);
        }
        Ok(f * ml(r)?)
    })?;
    Ok(atom + conv)
}

/// `max_t |P(τ₀ + χ(α/2) > t) − u(t, x)|` with `u` from the quadrature route at `σ = 0`, `η = 1`.
pub fn lifetime_decomposition_check(alpha: f64, c: f64, x: f64, t_grid: &[f64]) -> Result<f64> {
    let p = Params::new(alpha, 1.0, 0.0, c)?;
    let mut worst: f64 = 0.0;
    for &t in t_grid {
        let lhs = lifetime_convolution(alpha, c, x, t)?;
        let rhs = survival_quadrature(&SolveRequest::new(p, t, x, Route::Quadrature))?.value;
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

/// Draw of the lifetime `ζ` under `P_x`; `+∞` when `c = 0`.
///
/// `ζ` is the time at which the local time first reaches `Θ = H̄_{χ'}`,
/// `χ' ~ Exp(c/η)`: with `τ₀ = x²/(2Z₁²)` and the inverse local time
/// `T_a = a²/(2Z₂²)`, `ζ = τ₀ + T_Θ`. At `σ = 0` this is `τ₀ + χ(α/2)`;
/// at `η = 0` it is `Θ = σχ`, `χ ~ Exp(c)`.
pub fn lifetime_sample(p: &Params, x: f64, rng: &mut RngStream) -> Result<f64> {
    p.validate()?;
    p.require_boundary()?;
    if !(x >= 0.0) {
        return Err(Error::domain(format!("x must be non-negative, got {x}")));
    }
    if p.c == 0.0 {
        return Ok(f64::INFINITY);
    }
    let z1 = rng.normal();
    let tau0 = if x == 0.0 { 0.0 } else { x * x / (2.0 * z1 * z1) };
    if p.eta > 0.0 && p.sigma == 0.0 {
        return Ok(tau0 + sample_mittag_leffler_rv(0.5 * p.alpha, p.c, rng)?);
    }
    let theta = if p.eta == 0.0 {
        p.sigma * rng.exp1() / p.c
    } else {
        let chi = rng.exp1() * p.eta / p.c;
        p.sigma / p.eta * chi + sample_stable(p.alpha, chi, rng)?
    };
    let z2 = rng.normal();
    Ok(tau0 + theta * theta / (2.0 * z2 * z2))
}

/// `w(t, x) = ∫₀^x f(x−y) l̄(t, y) dy`.
pub fn telegraph_w<F: Fn(f64) -> f64>(p: &Params, t: f64, x: f64, f: F) -> Result<f64> {
    p.validate()?;
    require_eta(p)?;
    if !(t > 0.0) || !(x >= 0.0) {
        return Err(Error::domain("telegraph_w needs t > 0, x >= 0"));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let d = p.sigma / p.eta;
    if p.is_alpha_one() {
        let at = t / (1.0 + d);
        return Ok(if x > at { f(x - at) } else { 0.0 });
    }
    let support = lbar_support(p, t)?;
    let quad = Quad::new(1e-10, 1e-8);
    if support.is_finite() {
        // Integrate in τ = t − d y to resolve the spike at the support end.
        let tau_lo = (t - d * x).max(0.0);
        let pts: Vec<f64> = geometric_points(t, 14).into_iter().filter(|&v| v >= tau_lo).collect();
        let mut pts = pts;
        if pts.first().copied() != Some(tau_lo) {
            pts.insert(0, tau_lo);
        }
        try_integrate(&quad, &pts, |tau| {
            let y = (t - tau) / d;
            if y <= 0.0 || tau <= 0.0 {
                return Ok(0.0);
            }
            Ok(f(x - y) * lbar_from_tau(p.alpha, d, tau, y)? / d)
        })
    } else {
        let hi = x.min(inverse_stable_cutoff(p.alpha, t));
        let scale = t.powf(p.alpha);
        let mut pts = vec![0.0];
        let mut q = scale / 8.0;
        while q < hi {
            pts.push(q);
            q *= 2.0;
        }
        pts.push(hi);
        try_integrate(&quad, &pts, |y| Ok(f(x - y) * lbar_density(p, t, y)?))
    }
}

/// Density of `H̄_t = (σ/η) t + H_t`.
pub fn hbar_density(p: &Params, t: f64, y: f64) -> Result<f64> {
    p.validate()?;
    require_eta(p)?;
    let shift = p.sigma / p.eta * t;
    if y <= shift {
        return Ok(0.0);
    }
    stable_density(p.alpha, t, y - shift)
}

/// `v(t, x) = ∫₀^x f(x−y) h̄(t, y) dy` for `f` with `f(0) = 0`.
pub fn telegraph_v<F: Fn(f64) -> f64>(p: &Params, t: f64, x: f64, f: F) -> Result<f64> {
    p.validate()?;
    require_eta(p)?;
    if !(t > 0.0) || !(x >= 0.0) {
        return Err(Error::domain("telegraph_v needs t > 0, x >= 0"));
    }
    if f(0.0).abs() > 1e-12 {
        return Err(Error::domain("telegraph_v needs f(0) = 0"));
    }
    let shift = p.sigma / p.eta * t;
    if x <= shift {
        return Ok(0.0);
    }
    if p.is_alpha_one() {
        let at = shift + t;
        return Ok(if x > at { f(x - at) } else { 0.0 });
    }
    let span = x - shift;
    let scale = t.powf(1.0 / p.alpha);
    let mut pts = vec![0.0];
    let mut q = scale / 64.0;
    while q < span {
        pts.push(q);
        q *= 2.0;
    }
    pts.push(span);
    try_integrate(&Quad::new(1e-10, 1e-8), &pts, |u| {
        if u <= 0.0 {
            return Ok(0.0);
        }
        Ok(f(span - u) * stable_density(p.alpha, t, u)?)
    })
}

/// `R_λ 1(x)` for the elastic sticky process:
/// `e^{-x√λ}(σλ^{-1/2} + 1)/(cσ/η + λ + σ√λ) + (1 − e^{-x√λ})/λ`.
pub fn sticky_resolvent(lambda: f64, x: f64, p: &Params) -> Result<f64> {
    p.validate()?;
    if !(lambda > 0.0) || !(x >= 0.0) {
        return Err(Error::domain("sticky_resolvent needs lambda > 0, x >= 0"));
    }
    let r = lambda.sqrt();
    let e = (-x * r).exp();
    let killing = if p.c * p.sigma == 0.0 {
        0.0
    } else if p.eta == 0.0 {
        f64::INFINITY
    } else {
        p.c * p.sigma / p.eta
    };
    let boundary = if killing.is_infinite() {
        0.0
    } else {
        e * (p.sigma / r + 1.0) / (killing + lambda + p.sigma * r)
    };
    Ok(boundary + (1.0 - e) / lambda)
}

/// Limit values of `u(t, x)` in the five extreme regimes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regimes {
    /// `σ → ∞`: infinite lifetime.
    pub neumann: f64,
    /// `c → 0`.
    pub conservative: f64,
    /// `c → ∞`: killed at the boundary.
    pub dirichlet: f64,
    /// `c, σ → ∞` with `c/σ → ρ`: elastic Brownian motion.
    pub elastic: f64,
    /// `η → 0`: Robin condition with coefficient `c/σ`.
    pub robin: f64,
}

/// The limits, with `ρ = c/σ` read from `p` for the elastic and Robin entries.
pub fn asymptotic_regimes(p: &Params, t: f64, x: f64) -> Result<Regimes> {
    p.validate()?;
    let dirichlet = dirichlet_survival(t, x)?;
    let (elastic, robin) = if p.sigma > 0.0 {
        let e = elastic_weight_quadrature(t, x, p.c / p.sigma)?;
        (e, e)
    } else {
        (dirichlet, dirichlet)
    };
    Ok(Regimes {
        neumann: 1.0,
        conservative: 1.0,
        dirichlet,
        elastic,
        robin,
    })
}

/// One finite-parameter solve set against its limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeComparison {
    pub regime: String,
    pub params: Params,
    pub finite: f64,
    pub limit: f64,
}

impl RegimeComparison {
    pub fn discrepancy(&self) -> f64 {
        (self.finite - self.limit).abs()
    }
}

/// Solves the quadrature route with one coordinate of `base` pushed to
/// `extreme` (or `1/extreme`) and pairs each result with its limit.
pub fn regime_comparisons(base: &Params, t: f64, x: f64, extreme: f64) -> Result<Vec<RegimeComparison>> {
    base.validate()?;
    if !(extreme > 1.0) {
        return Err(Error::domain("extreme must exceed 1"));
    }
    let tiny = 1.0 / extreme;
    let cases = [
        (
            "neumann",
            Params {
                sigma: extreme,
                ..*base
            },
        ),
        ("conservative", Params { c: tiny, ..*base }),
        ("dirichlet", Params { c: extreme, ..*base }),
        (
            "elastic",
            Params {
                c: extreme,
                sigma: extreme,
                ..*base
            },
        ),
        ("robin", Params { eta: tiny, ..*base }),
    ];
    cases
        .into_iter()
        .map(|(name, p)| {
            let finite = survival_quadrature(&SolveRequest::new(p, t, x, Route::Quadrature))?.value;
            let lim = asymptotic_regimes(&p, t, x)?;
            let limit = match name {
                "neumann" => lim.neumann,
                "conservative" => lim.conservative,
                "dirichlet" => lim.dirichlet,
                "elastic" => lim.elastic,
                _ => survival_robin(t, x, p.sigma, p.c)?,
            };
            Ok(RegimeComparison {
                regime: name.to_string(),
                params: p,
                finite,
                limit,
            })
        })
        .collect()
}

/// Named transforms for the `laplace` command.
pub const CATALOG: [&str; 5] = ["l-density", "lbar-density", "u-zero", "life-special", "hbar-lt"];

/// A catalog transform together with the shift of its original:
/// the original at `s` is the inversion at `s − shift` (zero below the shift).
pub struct CatalogEntry {
    pub transform: Box<dyn TransformFn>,
    pub shift: f64,
}

impl CatalogEntry {
    pub fn invert_at(&self, s: f64, cfg: &InverterConfig) -> Result<f64> {
        let arg = s - self.shift;
        if arg <= 0.0 {
            return Ok(0.0);
        }
        invert(self.transform.as_ref(), arg, cfg)
    }
}

/// Looks up a catalog transform. `at` is the frozen second variable: the
/// space point for `l-density`, `lbar-density` and `life-special`, the time
/// for `hbar-lt`; `u-zero` ignores it.
pub fn catalog(name: &str, p: Params, at: f64) -> Result<CatalogEntry> {
    p.validate()?;
    let Params { alpha, eta, sigma, c } = p;
    let entry = |f: Box<dyn TransformFn>| CatalogEntry {
        transform: f,
        shift: 0.0,
    };
    match name {
        "l-density" => Ok(entry(Box::new(Transform::new(name, move |l: Complex64| {
            l.powf(alpha - 1.0) * (-at * l.powf(alpha)).exp()
        })))),
        "lbar-density" => {
            require_eta(&p)?;
            let d = sigma / eta;
            Ok(entry(Box::new(Transform::new(name, move |l: Complex64| {
                let psi = l * d + l.powf(alpha);
                psi / l * (-at * psi).exp()
            }))))
        }
        "u-zero" => Ok(entry(Box::new(survival_transform(p, 0.0)))),
        "life-special" => Ok(entry(Box::new(Transform::new(name, move |l: Complex64| {
            let la = l.powf(0.5 * alpha);
            (1.0 - c / (la + c) * (-at * l.sqrt()).exp()) / l
        })))),
        "hbar-lt" => {
            require_eta(&p)?;
            Ok(CatalogEntry {
                transform: Box::new(Transform::new(name, move |xi: Complex64| (-at * xi.powf(alpha)).exp())),
                shift: sigma / eta * at,
            })
        }
        other => Err(Error::Parse(format!(
            "unknown transform '{other}'; expected one of {}",
            CATALOG.join(", ")
        ))),
    }
}

/// `∫₀^∞∫₀^∞ e^{-λt − ξx} f(t, x) dt dx` at several probes, sharing one
/// tensor grid of `f` values: composite Gauss-Legendre on geometric panels
/// out to `horizon` in each variable.
pub fn double_forward<F>(f: F, probes: &[(f64, f64)], horizon: f64, exec: Exec) -> Result<Vec<f64>>
where
    F: Fn(f64, f64) -> Result<f64> + Sync + Send,
{
    let (nodes, weights) = panel_rule(horizon);
    let n = nodes.len();
    let values = crate::par::map(n, exec, |i| {
        nodes.iter().map(|&x| f(nodes[i], x)).collect::<Result<Vec<f64>>>()
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(probes
        .iter()
        .map(|&(lambda, xi)| {
            let mut total = 0.0;
            for i in 0..n {
                let et = weights[i] * (-lambda * nodes[i]).exp();
                let row: f64 = (0..n).map(|j| weights[j] * (-xi * nodes[j]).exp() * values[i][j]).sum();
                total += et * row;
            }
            total
        })
        .collect())
}

const GL_NODES: usize = 8;

pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        loop {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            let dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
                break;
            }
        }
        x[i] = z;
    }
    (x, w)
}

fn panel_rule(horizon: f64) -> (Vec<f64>, Vec<f64>) {
    let (gx, gw) = gauss_legendre(GL_NODES);
    let mut edges = vec![0.0, 1e-3, 1e-2, 0.05, 0.15, 0.35, 0.7];
    let mut e = 1.2;
    while e < horizon {
        edges.push(e);
        e *= 1.7;
    }
    edges.push(horizon);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        for k in 0..GL_NODES {
            nodes.push(mid + half * gx[k]);
            weights.push(half * gw[k]);
        }
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(alpha: f64, eta: f64, sigma: f64, c: f64) -> Params {
        Params::new(alpha, eta, sigma, c).unwrap()
    }

    #[test]
    fn route_names_round_trip() {
        for r in Route::ALL {
            assert_eq!(r.as_str().parse::<Route>().unwrap(), r);
        }
        assert!("euler".parse::<Route>().is_err());
    }

    #[test]
    fn request_validation() {
        let q = SolveRequest::new(p(0.5, 1.0, 0.0, 1.0), 1.0, 0.5, Route::MonteCarlo).with_draws(100);
        assert!(q.validate().is_err());
        let q = SolveRequest::new(p(0.5, 0.0, 0.0, 1.0), 1.0, 0.5, Route::Laplace);
        assert!(q.validate().is_err());
    }

    #[test]
    fn sticky_resolvent_values() {
        let v = sticky_resolvent(1.0, 0.0, &p(0.5, 1.0, 1.0, 1.0)).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-15);
        let v = sticky_resolvent(2.0, 0.0, &p(0.5, 1.0, 3.0, 0.0)).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
        let v = sticky_resolvent(2.0, 80.0, &p(0.5, 1.0, 3.0, 5.0)).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
    }

    #[test]
    fn kernel_table_interpolates() {
        let q = p(0.8, 1.0, 0.0, 1.0);
        let tab = KernelTable::build(&q, 1e-6, 20.0).unwrap();
        for s in [1e-5, 0.01, 0.3, 1.0, 4.0] {
            let exact = mittag_leffler(0.8, -(s as f64).powf(0.8), &MLSeriesBudget::default()).unwrap();
            assert!((tab.eval(s) - exact).abs() < 1e-4, "s={s}");
        }
        assert_eq!(tab.eval(0.0), 1.0);
    }

    #[test]
    fn catalog_knows_its_names() {
        let q = p(0.5, 1.0, 1.0, 1.0);
        for name in CATALOG {
            assert!(catalog(name, q, 0.5).is_ok(), "{name}");
        }
        assert!(catalog("nope", q, 0.5).is_err());
    }

    #[test]
    fn lifetime_without_killing_is_infinite() {
        let mut r = RngStream::new(1, 0);
        assert_eq!(
            lifetime_sample(&p(0.5, 1.0, 1.0, 0.0), 1.0, &mut r).unwrap(),
            f64::INFINITY
        );
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(GL_NODES);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(10)).sum();
        assert!((s - 2.0 / 11.0).abs() < 1e-14);
    }
}
