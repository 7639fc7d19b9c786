//! The check battery. Each public group returns its reports; the module
//! suites concatenate groups in a fixed order so output is reproducible.
//!
//! Monte Carlo checks derive their seeds from the master seed and the check
//! label, so adding or removing a check leaves the others untouched.

use num_complex::Complex64;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::{CheckClass, CheckReport, Suite};
use crate::bm::{draw_joint, elastic_weight_quadrature, elastic_weight_survival_with, joint_density};
use crate::error::{Error, Result};
use crate::fbvp::{
    double_forward, lifetime_decomposition_check, lifetime_sample, regime_comparisons, solve, sticky_resolvent,
    telegraph_v, telegraph_w, Route, SolveRequest,
};
use crate::laplace::{default_t_cut, forward, invert, roundtrip_error, InverterConfig, Transform, TransformFn};
use crate::par::{monte_carlo, sample, Exec, McEstimate, Welford};
use crate::quad::Quad;
use crate::randomtimes::{
    inverse_stable_density, k_alpha, lbar_density, lbar_support, sample_inverse_stable, sample_lbar, sample_stable,
    stable_density, tabulate_lbar, Params, LBAR_GRID,
};
use crate::specfun::{
    dirichlet_survival, dirichlet_survival_with, first_passage_density, g, gauss_kernel, mittag_leffler,
    mittag_leffler_two_param, Evaluation, MLSeriesBudget,
};

/// Seed for one check: FNV-1a of the label folded into the master seed.
pub fn sub_seed(seed: u64, label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ seed;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

struct Ctx {
    suite: Suite,
    seed: u64,
    out: Vec<CheckReport>,
}

impl Ctx {
    fn new(suite: Suite, seed: u64) -> Self {
        Ctx {
            suite,
            seed,
            out: Vec::new(),
        }
    }

    fn invariant(&mut self, name: &str, tol: f64, anchor: &str, outcome: Result<f64>) {
        self.out.push(CheckReport::new(
            self.suite,
            name,
            CheckClass::Invariant,
            tol,
            anchor,
            outcome,
        ));
    }

    fn oracle(&mut self, name: &str, tol: f64, anchor: &str, outcome: Result<f64>) {
        self.out.push(CheckReport::new(
            self.suite,
            name,
            CheckClass::OracleBootstrap,
            tol,
            anchor,
            outcome,
        ));
    }

    fn seed(&self, label: &str) -> u64 {
        sub_seed(self.seed, label)
    }
}

/// Maximum that propagates NaN.
fn worst(acc: f64, v: f64) -> f64 {
    if acc.is_nan() || v.is_nan() {
        f64::NAN
    } else {
        acc.max(v)
    }
}

fn z_score(est: &McEstimate, exact: f64) -> f64 {
    (est.value - exact).abs() / est.std_error.max(f64::MIN_POSITIVE)
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn geomspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a * (b / a).powf(i as f64 / (n - 1) as f64)).collect()
}

/// Two-sample Kolmogorov-Smirnov distance.
pub fn ks_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

// ---------------------------------------------------------------- specfun

pub fn specfun(seed: u64) -> Vec<CheckReport> {
    let mut c = Ctx::new(Suite::Specfun, seed);
    let b = MLSeriesBudget::default();
    let ml_anchor = "is the Mittag-Leffler function";

    c.invariant(
        "E_alpha(0) = 1",
        0.0,
        ml_anchor,
        (|| {
            let mut w: f64 = 0.0;
            for a in [0.1, 0.25, 0.4, 0.5, 0.6, 0.75, 0.9, 1.0] {
                w = worst(w, (mittag_leffler(a, 0.0, &b)? - 1.0).abs());
            }
            Ok(w)
        })(),
    );
    c.invariant(
        "E_alpha strictly decreasing on [-50, 0] with values in (0, 1] (violations)",
        0.0,
        ml_anchor,
        (|| {
            let mut violations = 0usize;
            for a in [0.1, 0.25, 0.4, 0.5, 0.6, 0.75, 0.9, 1.0] {
                let mut prev = f64::INFINITY;
                for k in 0..=100 {
                    let v = mittag_leffler(a, -0.5 * k as f64, &b)?;
                    if !(v > 0.0 && v <= 1.0) {
                        violations += 1;
                    }
                    if !(v < prev) && k > 0 {
                        violations += 1;
                    }
                    prev = v;
                }
            }
            Ok(violations as f64)
        })(),
    );
    c.invariant(
        "E_1(z) = e^z on [-20, 0]",
        b.abs_tol,
        ml_anchor,
        (|| {
            let mut w: f64 = 0.0;
            for k in 0..=40 {
                let z = -0.5 * k as f64;
                w = worst(w, (mittag_leffler(1.0, z, &b)? - z.exp()).abs());
            }
            Ok(w)
        })(),
    );
    c.invariant(
        "heat kernel has unit mass, t in {0.1, 1, 10}",
        1e-8,
        "g(t,z)= e^{−z²/4t}/√(4πt) is the Gaussian kernel",
        (|| {
            let mut w: f64 = 0.0;
            for t in [0.1, 1.0, 10.0] {
                let s = 2.0 * f64::sqrt(t);
                let pts = [-40.0 * s, -4.0 * s, 0.0, 4.0 * s, 40.0 * s];
                let m = Quad::new(1e-14, 1e-12).integrate_points(|z| g(t, z), &pts)?.value;
                w = worst(w, (m - 1.0).abs());
            }
            Ok(w)
        })(),
    );
    c.invariant(
        "first-passage time integral = 1 - dirichlet survival",
        1e-8,
        "(x/τ) g(τ,x)",
        (|| {
            let mut w: f64 = 0.0;
            for t in [0.25, 0.5, 1.0, 2.0] {
                for x in [0.25, 0.5, 1.0, 2.0] {
                    let m = Quad::new(1e-15, 1e-12)
                        .integrate(
                            |s| {
                                if s > 0.0 {
                                    first_passage_density(s, x).unwrap_or(f64::NAN)
                                } else {
                                    0.0
                                }
                            },
                            0.0,
                            t,
                        )?
                        .value;
                    w = worst(w, (m - (1.0 - dirichlet_survival(t, x)?)).abs());
                }
            }
            Ok(w)
        })(),
    );
    c.invariant(
        "forward transform of 2g(., w) = λ^{-1/2} e^{-w√λ}",
        1e-7,
        "∫₀^∞ e^{−λt} g(t,w) dt = λ^{1/2−1}e^{−w√λ}",
        (|| {
            let mut e: f64 = 0.0;
            for lambda in [0.5, 1.0, 2.0] {
                for w in [0.5, 1.0, 2.0] {
                    let v = forward(
                        |t| if t > 0.0 { 2.0 * g(t, w) } else { 0.0 },
                        lambda,
                        default_t_cut(lambda),
                    )?;
                    e = worst(e, (v - (-w * f64::sqrt(lambda)).exp() / f64::sqrt(lambda)).abs());
                }
            }
            Ok(e)
        })(),
    );
    c.invariant(
        "forward transform of the first-passage density = e^{-w√λ}",
        1e-7,
        "∫₀^∞ e^{−λt} (w/t)g(t,w) dt",
        (|| {
            let mut e: f64 = 0.0;
            for lambda in [0.5, 1.0, 2.0] {
                for w in [0.5, 1.0, 2.0] {
                    let v = forward(
                        |t| {
                            if t > 0.0 {
                                first_passage_density(t, w).unwrap_or(f64::NAN)
                            } else {
                                0.0
                            }
                        },
                        lambda,
                        default_t_cut(lambda),
                    )?;
                    e = worst(e, (v - (-w * f64::sqrt(lambda)).exp()).abs());
                }
            }
            Ok(e)
        })(),
    );

    c.oracle(
        "E_{1/2}(-1) = e erfc(1)",
        1e-8,
        ml_anchor,
        mittag_leffler(0.5, -1.0, &b).map(|v| (v - 0.427_583_576_155_807_0).abs()),
    );
    c.oracle(
        "E_{1/2,1/2}(-1)",
        1e-8,
        "x^{α−1} E_{α,α}(−λx^α)",
        mittag_leffler_two_param(0.5, 0.5, -1.0).map(|v| (v - 0.136_606_007_391_949_28).abs()),
    );
    c.oracle(
        "g(0.25, 1)",
        1e-8,
        "",
        gauss_kernel(0.25, 1.0).map(|v| (v - 0.207_553_748_710_297_35).abs()),
    );
    c.oracle(
        "first-passage density at (1, 1)",
        1e-8,
        "(x/τ) g(τ,x)",
        first_passage_density(1.0, 1.0).map(|v| (v - 0.219_695_644_733_861_2).abs()),
    );
    c.oracle(
        "dirichlet survival at (1, 1), quadrature of the kernel difference",
        1e-8,
        "Q^D_t f(x) = ∫₀^∞ (g(t,x−y) − g(t,x+y)) f(y) dy",
        dirichlet_survival_with(1.0, 1.0, Evaluation::Quadrature).map(|v| (v - 0.520_499_877_813_046_5).abs()),
    );
    c.oracle(
        "dirichlet survival at (1, 1), one minus the first-passage integral",
        1e-8,
        "",
        Quad::new(1e-15, 1e-12)
            .integrate(
                |s| {
                    if s > 0.0 {
                        first_passage_density(s, 1.0).unwrap_or(f64::NAN)
                    } else {
                        0.0
                    }
                },
                0.0,
                1.0,
            )
            .map(|e| (1.0 - e.value - 0.520_499_877_813_046_5).abs()),
    );
    c.out
}

// ---------------------------------------------------------------- laplace

/// Transforms of the inversion battery with their labels.
pub fn battery() -> Vec<Box<dyn TransformFn>> {
    let mut v: Vec<Box<dyn TransformFn>> = vec![
        Box::new(Transform::new("1/λ", |l: Complex64| 1.0 / l)),
        Box::new(Transform::new("1/(λ+1)", |l: Complex64| 1.0 / (l + 1.0))),
        Box::new(Transform::new("λ^{-1/2}e^{-√λ}", |l: Complex64| {
            (-l.sqrt()).exp() / l.sqrt()
        })),
    ];
    for a in [0.4, 0.5, 0.8] {
        for cc in [0.5, 1.0] {
            v.push(Box::new(Transform::new(
                format!("λ^{{α-1}}/(λ^α+c), α={a}, c={cc}"),
                move |l: Complex64| l.powf(a - 1.0) / (l.powf(a) + cc),
            )));
        }
    }
    v
}

/// Stehfest order used against Talbot on the battery: the most accurate
/// order available in double precision.
pub const BATTERY_STEHFEST_ORDER: usize = 16;

pub fn laplace(seed: u64) -> Vec<CheckReport> {
    let mut c = Ctx::new(Suite::Laplace, seed);
    let talbot = InverterConfig::talbot();

    c.invariant(
        "talbot vs stehfest (order 16) on the battery, t in [0.1, 5]",
        1e-5,
        "",
        (|| {
            let steh = InverterConfig::stehfest(BATTERY_STEHFEST_ORDER);
            let mut w: f64 = 0.0;
            for f in battery() {
                for t in geomspace(0.1, 5.0, 20) {
                    let a = invert(f.as_ref(), t, &talbot)?;
                    let b = invert(f.as_ref(), t, &steh)?;
                    w = worst(w, (a - b).abs());
                }
            }
            Ok(w)
        })(),
    );
    c.invariant(
        "inversion of λ^{-1/2}e^{-x√λ} = 2g(t, x) on a 5x5 grid",
        1e-6,
        "λ^{α−1} e^{−xλ^α}",
        (|| {
            let mut w: f64 = 0.0;
            for t in linspace(0.25, 2.0, 5) {
                for x in linspace(0.25, 2.0, 5) {
                    let f = Transform::new("l-half", move |l: Complex64| (-x * l.sqrt()).exp() / l.sqrt());
                    w = worst(w, (invert(&f, t, &talbot)? - 2.0 * g(t, x)).abs());
                }
            }
            Ok(w)
        })(),
    );

    let life = (|| -> Result<(f64, f64, f64)> {
        let ts = geomspace(1e-3, 10.0, 41);
        let (mut rise, mut start, mut range): (f64, f64, f64) = (0.0, 0.0, 0.0);
        for a in [0.4, 0.8] {
            for cc in [0.5, 1.0] {
                for x in [0.5, 1.0] {
                    let f = Transform::new("life-special", move |l: Complex64| {
                        let la = l.powf(0.5 * a);
                        (1.0 - cc / (cc + la) * (-x * l.sqrt()).exp()) / l
                    });
                    let vals = ts.iter().map(|&t| invert(&f, t, &talbot)).collect::<Result<Vec<_>>>()?;
                    start = worst(start, (vals[0] - 1.0).abs());
                    for (k, &v) in vals.iter().enumerate() {
                        range = worst(range, (v - 1.0).max(-v).max(0.0));
                        if k > 0 {
                            rise = worst(rise, (v - vals[k - 1]).max(0.0));
                        }
                    }
                }
            }
        }
        Ok((rise, start, range))
    })();
    let life_anchor = "1/λ − (1/λ)(c/(c+λ^{α/2})) e^{−x√λ}";
    let pick = |i: usize| life.clone().map(|r| [r.0, r.1, r.2][i]);
    c.invariant(
        "lifetime survival inversion is non-increasing in t (max rise)",
        1e-9,
        life_anchor,
        pick(0),
    );
    c.invariant("lifetime survival inversion starts at 1", 1e-6, life_anchor, pick(1));
    c.invariant("lifetime survival inversion lies in [0, 1]", 1e-9, life_anchor, pick(2));

    let grid = [0.25, 0.5, 1.0, 2.0, 4.0];
    c.invariant(
        "round trip of 1/λ",
        1e-7,
        "",
        roundtrip_error(&Transform::new("1/λ", |l: Complex64| 1.0 / l), &grid, &talbot),
    );
    c.invariant(
        "round trip of the survival potential at x = 0, (0.8, 1, 1, 1)",
        1e-4,
        "from which we obtain",
        Params::new(0.8, 1.0, 1.0, 1.0)
            .and_then(|p| roundtrip_error(&crate::fbvp::survival_transform(p, 0.0), &grid, &talbot)),
    );
    c.invariant(
        "round trip of λ^{-1/2}e^{-√λ}",
        1e-6,
        "λ^{α−1} e^{−xλ^α}",
        roundtrip_error(
            &Transform::new("l-half", |l: Complex64| (-l.sqrt()).exp() / l.sqrt()),
            &grid,
            &talbot,
        ),
    );

    c.oracle(
        "inversion of 1/(λ+1) at t = 1",
        1e-8,
        "",
        invert(&Transform::new("exp", |l: Complex64| 1.0 / (l + 1.0)), 1.0, &talbot)
            .map(|v| (v - (-1.0f64).exp()).abs()),
    );
    c.oracle(
        "inversion of λ^{-1/2}e^{-√λ} at t = 1 equals 2g(1, 1)",
        1e-8,
        "2g(t,x) can be regarded as the density of an inverse to 1/2-stable subordinator",
        invert(
            &Transform::new("l-half", |l: Complex64| (-l.sqrt()).exp() / l.sqrt()),
            1.0,
            &talbot,
        )
        .map(|v| (v - 0.439_391_289_467_722_4).abs()),
    );
    c.out
}

// ------------------------------------------------------------ randomtimes

/// Both sides of `α(x/t) l(t,x) = h(x,t)` on `[0.25, 2]²`: at `α = 1/2`
/// against the closed form of `h`, at `α = 0.7` with both sides inverted.
pub fn inverse_stable_identity(seed: u64) -> Vec<CheckReport> {
    let mut c = Ctx::new(Suite::Randomtimes, seed);
    let anchor = "α(x/t) l(t,x) = h(x,t)";
    let rel = |alpha: f64, closed: bool| -> Result<f64> {
        let mut w: f64 = 0.0;
        for t in linspace(0.25, 2.0, 5) {
            for x in linspace(0.25, 2.0, 5) {
                let lhs = alpha * x / t * inverse_stable_density(alpha, t, x)?;
                let rhs = if closed {
                    first_passage_density(t, x)?
                } else {
                    stable_density(alpha, x, t)?
                };
                w = worst(w, (lhs - rhs).abs() / rhs);
            }
        }
        Ok(w)
    };
    c.invariant(
        "inverse-stable identity at alpha = 1/2 (closed form h)",
        1e-6,
        anchor,
        rel(0.5, true),
    );
    c.invariant(
        "inverse-stable identity at alpha = 0.7 (both sides inverted)",
        1e-3,
        anchor,
        rel(0.7, false),
    );
    c.out
}

/// Support, tabulated mass and support-end value of `L̄_1` at `α = 1/2`, `σ/η = 1`.
pub fn lbar_support_checks(seed: u64) -> Vec<CheckReport> {
    let mut c = Ctx::new(Suite::Randomtimes, seed);
    let anchor = "denote by l̄ the function";
    let p = Params::new(0.5, 1.0, 1.0, 1.0);
    let n = 100_000;
    c.invariant(
        "sample_lbar draws outside [0, 1) at (0.5, 1), t = 1 (count)",
        0.0,
        anchor,
        p.clone().map(|p| {
            let draws = sample(n, c.seed("lbar-support"), Exec::default(), |rng| {
                sample_lbar(&p, 1.0, rng, LBAR_GRID).unwrap_or(f64::NAN)
            });
            draws.iter().filter(|&&w| !(0.0..1.0).contains(&w)).count() as f64
        }),
    );
    c.invariant(
        "tabulated lbar mass defect at (0.5, 1), t = 1",
        1e-4,
        anchor,
        p.clone()
            .and_then(|p| tabulate_lbar(&p, 1.0, LBAR_GRID))
            .map(|tab| tab.mass_defect()),
    );
    c.invariant(
        "lbar density at w = 1.2 (beyond the support)",
        0.0,
        anchor,
        p.and_then(|p| lbar_density(&p, 1.0, 1.2)).map(f64::abs),
    );
    c.out
}

pub fn randomtimes(seed: u64) -> Vec<CheckReport> {
    let mut c = Ctx::new(Suite::Randomtimes, seed);
    let exec = Exec::default();

    c.invariant(
        "empirical Laplace transform of H_1 (max z-score, 10^6 draws per alpha)",
        3.0,
        "let H be the stable subordinator",
        (|| {
            let mut z: f64 = 0.0;
            for a in [0.3, 0.5, 0.7, 0.9] {
                let draws = sample(1_000_000, c.seed(&format!("kanter-{a}")), exec, |rng| {
                    sample_stable(a, 1.0, rng).unwrap_or(f64::NAN)
                });
                for lambda in [0.5, 1.0, 2.0] {
                    let mut acc = Welford::new();
                    for h in &draws {
                        acc.push((-lambda * h).exp());
                    }
                    z = worst(z, z_score(&acc.into(), (-f64::powf(lambda, a)).exp()));
                }
            }
            Ok(z)
        })(),
    );
    c.out.extend(inverse_stable_identity(seed));
    c.invariant(
        "lbar density has unit mass, alpha in {0.5, 0.8}, sigma/eta in {0.5, 1, 2}",
        1e-4,
        "denote by l̄ the function",
        (|| {
            let mut w: f64 = 0.0;
            for a in [0.5, 0.8] {
                for d in [0.5, 1.0, 2.0] {
                    let p = Params::new(a, 1.0, d, 1.0)?;
                    for t in [0.5, 1.0, 2.0] {
                        let m = telegraph_w(&p, t, lbar_support(&p, t)?, |_| 1.0)?;
                        w = worst(w, (m - 1.0).abs());
                    }
                }
            }
            Ok(w)
        })(),
    );

    let k_grid = (|| -> Result<Vec<(Params, Vec<Vec<f64>>)>> {
        let mut out = Vec::new();
        for a in [0.5, 0.8] {
            for sigma in [0.0, 1.0] {
                let p = Params::new(a, 1.0, sigma, 1.0)?;
                let mut rows = Vec::new();
                for kappa in [0.5, 1.0, 2.0, 4.0] {
                    rows.push(
                        [0.1, 0.5, 1.0, 2.0, 5.0]
                            .iter()
                            .map(|&s| k_alpha(&p, kappa, s))
                            .collect::<Result<Vec<_>>>()?,
                    );
                }
                out.push((p, rows));
            }
        }
        Ok(out)
    })();
    let k_anchor = "K_α(κs) = E₀[e^{−κL̄_s}]";
    c.invariant(
        "k_alpha non-increasing in s and kappa (max rise)",
        1e-10,
        k_anchor,
        k_grid.clone().map(|grid| {
            let mut rise: f64 = 0.0;
            for (_, rows) in &grid {
                for (i, row) in rows.iter().enumerate() {
                    for j in 0..row.len() {
                        if j > 0 {
                            rise = worst(rise, (row[j] - row[j - 1]).max(0.0));
                        }
                        if i > 0 {
                            rise = worst(rise, (row[j] - rows[i - 1][j]).max(0.0));
                        }
                    }
                }
            }
            rise
        }),
    );
    c.invariant(
        "k_alpha in (0, 1] (violations)",
        0.0,
        k_anchor,
        k_grid.clone().map(|grid| {
            grid.iter()
                .flat_map(|(_, rows)| rows.iter().flatten())
                .filter(|&&v| !(v > 0.0 && v <= 1.0))
                .count() as f64
        }),
    );
    c.invariant(
        "k_alpha at sigma = 0 equals E_alpha(-kappa s^alpha)",
        1e-5,
        k_anchor,
        k_grid.and_then(|grid| {
            let mut w: f64 = 0.0;
            for (p, rows) in grid.iter().filter(|(p, _)| p.sigma == 0.0) {
                for (i, kappa) in [0.5f64, 1.0, 2.0, 4.0].iter().enumerate() {
                    for (j, s) in [0.1f64, 0.5, 1.0, 2.0, 5.0].iter().enumerate() {
                        let ml = mittag_leffler(p.alpha, -kappa * s.powf(p.alpha), &MLSeriesBudget::default())?;
                        w = worst(w, (rows[i][j] - ml).abs());
                    }
                }
            }
            Ok(w)
        }),
    );
    c.invariant(
        "lbar at sigma = 0 has the law of L (KS distance, 10^5 draws)",
        0.01,
        "the random times L̄ and L are identical in law",
        (|| {
            let p = Params::new(0.6, 1.0, 0.0, 1.0)?;
            let mut d: f64 = 0.0;
            for s in [0.5, 2.0] {
                let a = sample(100_000, c.seed(&format!("compose-lbar-{s}")), exec, |rng| {
                    sample_lbar(&p, s, rng, LBAR_GRID).unwrap_or(f64::NAN)
                });
                let b = sample(100_000, c.seed(&format!("compose-l-{s}")), exec, |rng| {
                    sample_inverse_stable(0.6, s, rng).unwrap_or(f64::NAN)
                });
                if a.iter().chain(&b).any(|v| v.is_nan()) {
                    return Err(Error::Domain("sampler failed".into()));
                }
                d = worst(d, ks_distance(&a, &b));
            }
            Ok(d)
        })(),
    );
    c.out.extend(lbar_support_checks(seed));

    c.oracle(
        "E[e^{-2 H_0.5}] at alpha = 1/2 (z-score, 10^6 draws)",
        3.0,
        "let H be the stable subordinator",
        Ok({
            let acc = monte_carlo(1_000_000, c.seed("stable-lt-half"), exec, |rng| {
                (-2.0 * sample_stable(0.5, 0.5, rng).unwrap_or(f64::NAN)).exp()
            });
            z_score(&acc.into(), 0.493_068_691_395_234_5)
        }),
    );
    c.oracle(
        "h(1, 1) at alpha = 1/2",
        1e-8,
        "",
        stable_density(0.5, 1.0, 1.0).map(|v| (v - 0.219_695_644_733_861_2).abs()),
    );
    c.oracle(
        "l(0.5, 0.5) at alpha = 1/2",
        1e-8,
        "λ^{α−1} e^{−xλ^α}",
        inverse_stable_density(0.5, 0.5, 0.5).map(|v| (v - 0.704_130_653_528_599).abs()),
    );
    c.oracle(
        "lbar(1, 0.5) at (0.5, 1, 1)",
        1e-7,
        "denote by l̄ the function",
        Params::new(0.5, 1.0, 1.0, 1.0)
            .and_then(|p| lbar_density(&p, 1.0, 0.5))
            .map(|v| (v - 1.056_195_980_292_898_6).abs()),
    );
    c.out
}

// --------------------------------------------------------------------- bm

/// Cell probabilities of the absolutely continuous part of the joint law
/// on a `n × n` grid of width `h`, by 8-point Gauss-Legendre per axis.
fn joint_cell_masses(t: f64, x: f64, n: usize, h: f64) -> Result<Vec<f64>> {
    let (gx, gw) = crate::fbvp::gauss_legendre(8);
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let (y0, w0) = (i as f64 * h, j as f64 * h);
            let mut m = 0.0;
            for a in 0..gx.len() {
                for b in 0..gx.len() {
                    let y = y0 + 0.5 * h * (1.0 + gx[a]);
                    let w = w0 + 0.5 * h * (1.0 + gx[b]);
                    m += gw[a] * gw[b] * joint_density(t, x, y, w)?;
                }
            }
            out.push(m * 0.25 * h * h);
        }
    }
    Ok(out)
}

/// Pearson chi-square p-value of `n` joint draws at `(t, x)` against the
/// exact law on a 20×20 grid of `[0, 4)²`, plus a no-hit and an overflow cell.
pub fn joint_chi_square(t: f64, x: f64, n: usize, seed: u64) -> Result<f64> {
    const BINS: usize = 20;
    let h = 4.0 / BINS as f64;
    let masses = joint_cell_masses(t, x, BINS, h)?;
    let atom = dirichlet_survival(t, x)?;
    let draws = sample(n, seed, Exec::default(), |rng| draw_joint(t, x, rng));
    let mut counts = vec![0.0; BINS * BINS];
    let (mut no_hit, mut overflow) = (0.0, 0.0);
    for s in &draws {
        if !s.hit {
            no_hit += 1.0;
            continue;
        }
        let (i, j) = ((s.position / h) as usize, (s.local_time / h) as usize);
        if i < BINS && j < BINS {
            counts[i * BINS + j] += 1.0;
        } else {
            overflow += 1.0;
        }
    }
    let nf = n as f64;
    let mut stat = 0.0;
    let mut cells = 0usize;
    let (mut pooled_obs, mut pooled_exp) = (overflow, nf * (1.0 - atom - masses.iter().sum::<f64>()).max(0.0));
    for (obs, m) in counts.iter().zip(&masses) {
        let e = nf * m;
        if e < 5.0 {
            pooled_obs += obs;
            pooled_exp += e;
        } else {
            stat += (obs - e).powi(2) / e;
            cells += 1;
        }
    }
    let e = nf * atom;
    stat += (no_hit - e).powi(2) / e;
    cells += 1;
    if pooled_exp >= 5.0 {
        stat += (pooled_obs - pooled_exp).powi(2) / pooled_exp;
        cells += 1;
    }
    let dist = ChiSquared::new((cells - 1) as f64).map_err(|e| Error::Domain(e.to_string()))?;
    Ok(dist.sf(stat))
}

pub fn bm(seed: u64) -> Vec<CheckReport> {
    let mut c = Ctx::new(Suite::Bm, seed);
    let exec = Exec::default();

    c.invariant(
        "two-step law of the elastic weight (z-score, 10^5 outer draws)",
        3.0,
        "E_x[E_{X_s}[f(X_t) g(γ_t)]]",
        (|| {
            let (t, s, x, rho) = (0.5, 0.5, 0.5, 1.0);
            let direct = elastic_weight_survival_with(t + s, x, rho, 100_000, c.seed("semigroup-direct"), exec)?;
            let nested: McEstimate = monte_carlo(100_000, c.seed("semigroup-nested"), exec, |rng| {
                let first = draw_joint(t, x, rng);
                let inner: f64 = (0..8)
                    .map(|_| (-rho * draw_joint(s, first.position, rng).local_time).exp())
                    .sum::<f64>()
                    / 8.0;
                (-rho * first.local_time).exp() * inner
            })
            .into();
            let se = direct.std_error.hypot(nested.std_error);
            Ok((direct.value - nested.value).abs() / se)
        })(),
    );
    c.invariant(
        "joint histogram vs joint density at (1, 0.5): 1 - p (chi-square, 20x20)",
        0.999,
        "",
        joint_chi_square(1.0, 0.5, 100_000, c.seed("joint-chi-square")).map(|p| 1.0 - p),
    );
    c.invariant(
        "convolution of the first-passage density with g",
        1e-7,
        "g(t, x+y)",
        (|| {
            let mut w: f64 = 0.0;
            for t in [0.5, 1.0, 2.0] {
                for x in [0.25, 1.0] {
                    for y in [0.0, 0.25, 1.0] {
                        let v = Quad::new(1e-15, 1e-12)
                            .integrate_points(
                                |tau| {
                                    if tau <= 0.0 || tau >= t {
                                        0.0
                                    } else {
                                        first_passage_density(t - tau, x).unwrap_or(f64::NAN) * g(tau, y)
                                    }
                                },
                                &[0.0, 0.5 * t, t],
                            )?
                            .value;
                        w = worst(w, (v - g(t, x + y)).abs());
                    }
                }
            }
            Ok(w)
        })(),
    );
    c.invariant(
        "convolution of first-passage densities",
        1e-7,
        "(x+y)/t · g(t, x+y)",
        (|| {
            let mut w: f64 = 0.0;
            for t in [0.5, 1.0, 2.0] {
                for x in [0.25, 1.0] {
                    for y in [0.25, 1.0] {
                        let v = Quad::new(1e-15, 1e-12)
                            .integrate_points(
                                |tau| {
                                    if tau <= 0.0 || tau >= t {
                                        0.0
                                    } else {
                                        first_passage_density(t - tau, x).unwrap_or(f64::NAN)
                                            * first_passage_density(tau, y).unwrap_or(f64::NAN)
                                    }
                                },
                                &[0.0, 0.5 * t, t],
                            )?
                            .value;
                        w = worst(w, (v - first_passage_density(t, x + y)?).abs());
                    }
                }
            }
            Ok(w)
        })(),
    );

    c.oracle(
        "P_1(no hit by t = 1) (z-score, 10^6 draws)",
        3.0,
        "",
        Ok({
            let acc = monte_carlo(1_000_000, c.seed("no-hit"), exec, |rng| {
                if draw_joint(1.0, 1.0, rng).hit {
                    0.0
                } else {
                    1.0
                }
            });
            z_score(&acc.into(), 0.520_499_877_813_046_5)
        }),
    );
    c.oracle(
        "elastic weight at (t, x, rho) = (1, 0, 1) equals e erfc(1)",
        1e-8,
        "behaves like an elastic Brownian motion",
        elastic_weight_quadrature(1.0, 0.0, 1.0).map(|v| (v - 0.427_583_576_155_807_0).abs()),
    );
    c.out
}

// ------------------------------------------------------------------- fbvp

const CLOSED_FORM_ANCHOR: &str = "P_0(ζ>t) = E_{α/2}(−ct^{α/2})";

fn solve_value(p: Params, t: f64, x: f64, route: Route, seed: u64) -> Result<(f64, f64)> {
    let r = solve(&SolveRequest::new(p, t, x, route).with_seed(seed))?;
    Ok((r.value, r.std_error))
}

/// `u(t, 0)` at `σ = 0` against `E_{α/2}(−ct^{α/2})` on all three routes.
pub fn closed_form_survival(seed: u64) -> Vec<CheckReport> {
    let mut c = Ctx::new(Suite::Fbvp, seed);
    let outcome = (|| -> Result<[f64; 4]> {
        let mut w = [0.0f64; 4];
        for a in [0.4, 0.8] {
            for cc in [0.5, 1.0] {
                let p = Params::new(a, 1.0, 0.0, cc)?;
                for t in [0.25, 0.5, 1.0, 2.0] {
                    let exact = mittag_leffler(0.5 * a, -cc * f64::powf(t, 0.5 * a), &MLSeriesBudget::default())?;
                    let (q, _) = solve_value(p, t, 0.0, Route::Quadrature, 0)?;
                    let (l, _) = solve_value(p, t, 0.0, Route::Laplace, 0)?;
                    let mc_seed = c.seed(&format!("closed-form-{a}-{cc}-{t}"));
                    let (m, se) = solve_value(p, t, 0.0, Route::MonteCarlo, mc_seed)?;
                    w[0] = worst(w[0], (q - exact).abs());
                    w[1] = worst(w[1], (l - exact).abs());
                    w[2] = worst(w[2], (m - exact).abs() / se);
                    w[3] = worst(w[3], se);
                }
            }
        }
        Ok(w)
    })();
    let pick = |i: usize| outcome.clone().map(|w| w[i]);
    c.invariant(
        "closed-form survival, quadrature route",
        1e-4,
        CLOSED_FORM_ANCHOR,
        pick(0),
    );
    c.invariant("closed-form survival, laplace route", 1e-4, CLOSED_FORM_ANCHOR, pick(1));
    c.invariant(
        "closed-form survival, mc route (max z-score, 10^5 draws)",
        3.0,
        CLOSED_FORM_ANCHOR,
        pick(2),
    );
    c.invariant(
        "closed-form survival, mc standard error",
        2e-3,
        CLOSED_FORM_ANCHOR,
        pick(3),
    );
    c.out
}

/// Parameter sets without a closed form used for route agreement.
pub const ROUTE_GRID: [(f64, f64, f64, f64); 2] = [(0.6, 1.0, 0.5, 1.0), (0.8, 1.0, 2.0, 0.5)];

pub fn three_route(seed: u64) -> Vec<CheckReport> {
    let mut c = Ctx::new(Suite::Fbvp, seed);
    let anchor = "has the probabilistic representation";
    for (a, eta, sigma, cc) in ROUTE_GRID {
        let outcome = (|| -> Result<(f64, f64)> {
            let p = Params::new(a, eta, sigma, cc)?;
            let (mut ql, mut z): (f64, f64) = (0.0, 0.0);
            for t in [0.5, 1.0, 2.0] {
                for x in [0.0, 0.5, 1.0] {
                    let (q, _) = solve_value(p, t, x, Route::Quadrature, 0)?;
                    let (l, _) = solve_value(p, t, x, Route::Laplace, 0)?;
                    let mc_seed = c.seed(&format!("three-route-{a}-{eta}-{sigma}-{cc}-{t}-{x}"));
                    let (m, se) = solve_value(p, t, x, Route::MonteCarlo, mc_seed)?;
                    ql = worst(ql, (q - l).abs());
                    z = worst(z, (m - q).abs() / se);
                }
            }
            Ok((ql, z))
        })();
        let tag = format!("(alpha, eta, sigma, c) = ({a}, {eta}, {sigma}, {cc})");
        c.invariant(
            &format!("|quadrature - laplace| at {tag}"),
            1e-3,
            anchor,
            outcome.clone().map(|o| o.0),
        );
        c.invariant(
            &format!("|mc - quadrature| / SE at {tag}"),
            3.0,
            anchor,
            outcome.map(|o| o.1),
        );
    }
    c.out
}

/// Bounds and monotonicity of `u` on 4-point grids around `(0.6, 1, 0.5, 1)`.
pub fn monotonicity(seed: u64) -> Vec<CheckReport> {
    let mut c = Ctx::new(Suite::Fbvp, seed);
    let anchor = "has the probabilistic representation";
    let base = Params::new(0.6, 1.0, 0.5, 1.0);
    let q = |p: Params, t: f64, x: f64| -> Result<(f64, f64)> {
        let r = solve(&SolveRequest::new(p, t, x, Route::Quadrature))?;
        Ok((r.value, r.atom))
    };
    let outcome = (|| -> Result<[f64; 4]> {
        let p = base.clone()?;
        let in_t = [0.25, 0.5, 1.0, 2.0]
            .iter()
            .map(|&t| q(p, t, 0.5))
            .collect::<Result<Vec<_>>>()?;
        let in_x = [0.0, 0.25, 0.5, 1.0]
            .iter()
            .map(|&x| q(p, 1.0, x))
            .collect::<Result<Vec<_>>>()?;
        let in_c = [0.25, 0.5, 1.0, 2.0]
            .iter()
            .map(|&cc| q(Params { c: cc, ..p }, 1.0, 0.5))
            .collect::<Result<Vec<_>>>()?;
        let bounds = in_t
            .iter()
            .chain(&in_x)
            .chain(&in_c)
            .fold(0.0f64, |m, &(v, atom)| worst(m, (atom - v).max(v - 1.0).max(0.0)));
        let rise = |v: &[(f64, f64)]| v.windows(2).fold(0.0f64, |m, w| worst(m, (w[1].0 - w[0].0).max(0.0)));
        let fall = |v: &[(f64, f64)]| v.windows(2).fold(0.0f64, |m, w| worst(m, (w[0].0 - w[1].0).max(0.0)));
        Ok([bounds, rise(&in_t), fall(&in_x), rise(&in_c)])
    })();
    let pick = |i: usize| outcome.clone().map(|w| w[i]);
    c.invariant("u within [atom, 1]", 1e-9, anchor, pick(0));
    c.invariant("u non-increasing in t (max rise)", 1e-9, anchor, pick(1));
    c.invariant("u non-decreasing in x (max fall)", 1e-9, anchor, pick(2));
    c.invariant("u non-increasing in c (max rise)", 1e-9, anchor, pick(3));
    c.out
}

/// At `α = 1` the deterministic routes reduce to elastic Brownian motion
/// with coefficient `c/(η+σ)`.
pub fn alpha_one_pin(seed: u64) -> Vec<CheckReport> {
    let mut c = Ctx::new(Suite::Fbvp, seed);
    c.invariant(
        "alpha = 1 routes vs elastic quadrature with c/(eta+sigma), (1, 1, 1)",
        1e-5,
        "L̄_t = t/(1+σ/η) almost surely",
        (|| {
            let p = Params::new(1.0, 1.0, 1.0, 1.0)?;
            let rho = p.c / (p.eta + p.sigma);
            let mut w: f64 = 0.0;
            for x in [0.0, 0.5, 1.0] {
                let exact = elastic_weight_quadrature(1.0, x, rho)?;
                for route in [Route::Quadrature, Route::Laplace] {
                    w = worst(w, (solve_value(p, 1.0, x, route, 0)?.0 - exact).abs());
                }
            }
            Ok(w)
        })(),
    );
    c.out
}

/// Parameters of the telegraph checks.
pub const TELEGRAPH_PARAMS: (f64, f64, f64) = (0.6, 1.0, 0.5);
/// Probe points `(λ, ξ)` of the double transforms.
pub fn telegraph_probes() -> Vec<(f64, f64)> {
    [0.5, 1.0, 2.0]
        .iter()
        .flat_map(|&l| [0.5, 1.0, 2.0].map(move |xi| (l, xi)))
        .collect()
}
/// Truncation of both forward integrals; `e^{-0.5·40}` is far below the tolerance.
pub const DOUBLE_FORWARD_HORIZON: f64 = 40.0;

/// `w` with `f = 1` (monotone, boundary value, support end, double
/// transform) and `v` with `f(y) = y e^{-y}` (double transform).
pub fn telegraph(seed: u64) -> Vec<CheckReport> {
    let mut c = Ctx::new(Suite::Fbvp, seed);
    let (alpha, eta, sigma) = TELEGRAPH_PARAMS;
    let w_anchor = "(σλ + λ^α + ξ)^{−1}(σλ+λ^α)/λ · f̃(ξ)";
    let v_anchor = "ṽ(λ,ξ) = (λ + σξ + ξ^α)^{−1} f̃(ξ)";
    let p = match Params::new(alpha, eta, sigma, 1.0) {
        Ok(p) => p,
        Err(e) => {
            c.invariant("telegraph parameters", 0.0, "", Err(e));
            return c.out;
        }
    };
    let shape = (|| -> Result<[f64; 3]> {
        let mut out = [0.0f64; 3];
        for t in [0.5, 1.0, 2.0] {
            out[1] = worst(out[1], telegraph_w(&p, t, 0.0, |_| 1.0)?.abs());
            let end = t * eta / sigma;
            let xs = linspace(0.0, end, 9);
            let vals = xs
                .iter()
                .map(|&x| telegraph_w(&p, t, x, |_| 1.0))
                .collect::<Result<Vec<_>>>()?;
            out[0] = vals.windows(2).fold(out[0], |m, w| worst(m, (w[0] - w[1]).max(0.0)));
            for x in [end, 1.5 * end, 3.0 * end] {
                out[2] = worst(out[2], (telegraph_w(&p, t, x, |_| 1.0)? - 1.0).abs());
            }
        }
        Ok(out)
    })();
    let pick = |i: usize| shape.clone().map(|w| w[i]);
    c.invariant(
        "w with f = 1 non-decreasing in x (max fall)",
        1e-9,
        "w(t,0)=0, t>0",
        pick(0),
    );
    c.invariant("w(t, 0) = 0", 0.0, "w(t,0)=0, t>0", pick(1));
    c.invariant(
        "w with f = 1 equals 1 for x >= t eta/sigma",
        1e-6,
        "w(t,0)=0, t>0",
        pick(2),
    );

    let probes = telegraph_probes();
    c.invariant(
        "double transform of w with f = 1",
        1e-4,
        w_anchor,
        double_forward(
            |t, x| telegraph_w(&p, t, x, |_| 1.0),
            &probes,
            DOUBLE_FORWARD_HORIZON,
            Exec::default(),
        )
        .map(|vals| {
            probes.iter().zip(&vals).fold(0.0f64, |m, (&(l, xi), &v)| {
                let psi = sigma / eta * l + l.powf(alpha);
                worst(m, (v - psi / l / (psi + xi) / xi).abs())
            })
        }),
    );
    c.invariant(
        "double transform of v with f(y) = y e^{-y}",
        1e-4,
        v_anchor,
        double_forward(
            |t, x| telegraph_v(&p, t, x, |y| y * (-y).exp()),
            &probes,
            DOUBLE_FORWARD_HORIZON,
            Exec::default(),
        )
        .map(|vals| {
            probes.iter().zip(&vals).fold(0.0f64, |m, (&(l, xi), &v)| {
                let exact = 1.0 / (l + sigma / eta * xi + xi.powf(alpha)) / (1.0 + xi).powi(2);
                worst(m, (v - exact).abs())
            })
        }),
    );
    c.out
}

pub fn decomposition(seed: u64) -> Vec<CheckReport> {
    let mut c = Ctx::new(Suite::Fbvp, seed);
    c.invariant(
        "lifetime decomposition at (0.8, 1, 1), t in {0.5, 1, 2}",
        1e-3,
        "follows a Mittag-Leffler distribution",
        lifetime_decomposition_check(0.8, 1.0, 1.0, &[0.5, 1.0, 2.0]),
    );
    c.out
}

pub fn regimes(seed: u64) -> Vec<CheckReport> {
    let mut c = Ctx::new(Suite::Fbvp, seed);
    let anchor = |name: &str| match name {
        "neumann" => "we formally get the Neumann condition",
        "elastic" => "behaves like an elastic Brownian motion",
        _ => "fact introduced by Feller (1958) as a conjecture",
    };
    match Params::new(0.6, 1.0, 1.0, 1.0).and_then(|base| regime_comparisons(&base, 1.0, 1.0, 1e4)) {
        Ok(list) => {
            for r in list {
                c.invariant(
                    &format!("{} limit at extreme 1e4", r.regime),
                    1e-2,
                    anchor(&r.regime),
                    Ok(r.discrepancy()),
                );
            }
        }
        Err(e) => c.invariant("regime comparisons", 1e-2, anchor(""), Err(e)),
    }
    c.out
}

pub fn fbvp(seed: u64) -> Vec<CheckReport> {
    let mut out = three_route(seed);
    out.extend(monotonicity(seed));
    out.extend(closed_form_survival(seed));
    out.extend(alpha_one_pin(seed));
    out.extend(telegraph(seed));
    out.extend(decomposition(seed));
    out.extend(regimes(seed));

    let mut c = Ctx::new(Suite::Fbvp, seed);
    c.invariant(
        "lifetime sampler vs quadrature survival (max z-score, 10^5 draws)",
        3.0,
        "Let ζ be the lifetime",
        (|| {
            let p = Params::new(0.6, 1.0, 0.5, 1.0)?;
            let x = 0.5;
            let ts = [0.5, 1.0, 2.0];
            let draws = sample(100_000, c.seed("lifetime"), Exec::default(), |rng| {
                lifetime_sample(&p, x, rng).unwrap_or(f64::NAN)
            });
            let mut z: f64 = 0.0;
            for t in ts {
                let mut acc = Welford::new();
                for &d in &draws {
                    acc.push(if d > t {
                        1.0
                    } else if d.is_nan() {
                        f64::NAN
                    } else {
                        0.0
                    });
                }
                z = worst(z, z_score(&acc.into(), solve_value(p, t, x, Route::Quadrature, 0)?.0));
            }
            Ok(z)
        })(),
    );
    let sticky = "elastic sticky Brownian motion";
    c.invariant(
        "sticky resolvent at c = 0, x = 0 equals 1/λ",
        1e-14,
        sticky,
        (|| {
            let mut w: f64 = 0.0;
            for lambda in [0.5, 1.0, 2.0] {
                let p = Params::new(0.6, 1.0, 1.0, 0.0)?;
                w = worst(w, (sticky_resolvent(lambda, 0.0, &p)? * lambda - 1.0).abs());
            }
            Ok(w)
        })(),
    );
    c.invariant(
        "sticky resolvent far from the boundary equals 1/λ",
        1e-12,
        sticky,
        (|| {
            let p = Params::new(0.6, 1.0, 1.0, 1.0)?;
            Ok((sticky_resolvent(1.0, 60.0, &p)? - 1.0).abs())
        })(),
    );
    c.oracle(
        "sticky resolvent at (λ, x, σ, η, c) = (1, 0, 1, 1, 1) equals 2/3",
        1e-14,
        sticky,
        Params::new(0.6, 1.0, 1.0, 1.0)
            .and_then(|p| sticky_resolvent(1.0, 0.0, &p))
            .map(|v| (v - 2.0 / 3.0).abs()),
    );
    c.oracle(
        "w with f = 1 at sigma = 0, alpha = 1/2, (t, x) = (1, 1) equals erf(1/2)",
        1e-8,
        "",
        Params::new(0.5, 1.0, 0.0, 1.0)
            .and_then(|p| telegraph_w(&p, 1.0, 1.0, |_| 1.0))
            .map(|v| (v - 0.520_499_877_813_046_5).abs()),
    );
    out.extend(c.out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_distance_of_identical_samples_is_zero() {
        let a = [0.3, 0.1, 0.2];
        assert_eq!(ks_distance(&a, &a), 0.0);
        assert_eq!(ks_distance(&[0.0, 1.0], &[2.0, 3.0]), 1.0);
    }

    #[test]
    fn sub_seeds_differ_by_label() {
        assert_ne!(sub_seed(42, "a"), sub_seed(42, "b"));
        assert_eq!(sub_seed(42, "a"), sub_seed(42, "a"));
        assert_ne!(sub_seed(1, "a"), sub_seed(2, "a"));
    }

    #[test]
    fn specfun_suite_passes_quickly() {
        let start = std::time::Instant::now();
        let r = specfun(42);
        assert!(r.iter().all(|c| c.pass), "{r:#?}");
        assert!(start.elapsed().as_secs_f64() < 10.0);
    }

    #[test]
    fn joint_cells_carry_the_hit_mass() {
        let m: f64 = joint_cell_masses(1.0, 0.5, 20, 0.2).unwrap().iter().sum();
        let hit = 1.0 - dirichlet_survival(1.0, 0.5).unwrap();
        assert!(m < hit && hit - m < 1e-2, "{m} vs {hit}");
    }
}
