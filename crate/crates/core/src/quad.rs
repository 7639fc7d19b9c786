//! Globally adaptive Gauss-Kronrod (10/21) quadrature.
//!
//! The interval with the largest error estimate is bisected until the summed
//! error meets `max(abs_tol, rel_tol * |I|)`. Semi-infinite ranges are mapped
//! onto `[0, 1)` with `x = a + scale * s / (1 - s)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_208_067_491,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];

// Gauss weights for the odd Kronrod nodes XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[10];
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let scale = half.abs();
    let value = res_k * half;
    res_abs *= scale;
    res_asc *= scale;
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Segment { a, b, value, error }
}

/// Adaptive integrator settings.
#[derive(Debug, Clone, Copy)]
pub struct Quad {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for Quad {
    fn default() -> Self {
        Quad {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_intervals: 2000,
        }
    }
}

impl Quad {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Quad {
            abs_tol,
            rel_tol,
            ..Quad::default()
        }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<Estimate> {
        self.integrate_points(f, &[a, b])
    }

    /// Integrates over `[points[0], points[last]]`, starting from the given
    /// breakpoints. Points must be sorted.
    pub fn integrate_points<F: Fn(f64) -> f64>(&self, f: F, points: &[f64]) -> Result<Estimate> {
        assert!(points.len() >= 2, "need at least two breakpoints");
        let mut heap = BinaryHeap::new();
        for w in points.windows(2) {
            if w[1] > w[0] {
                heap.push(gk21(&f, w[0], w[1]));
            }
        }
        self.refine(&f, heap)
    }

    /// Integrates over `[a, inf)` with the map `x = a + scale * s / (1 - s)`.
    /// `scale` should be the width over which `f` varies.
    pub fn integrate_to_inf<F: Fn(f64) -> f64>(&self, f: F, a: f64, scale: f64) -> Result<Estimate> {
        let g = |s: f64| {
            let one_minus = 1.0 - s;
            let x = a + scale * s / one_minus;
            let v = f(x);
            if v == 0.0 {
                0.0
            } else {
                v * scale / (one_minus * one_minus)
            }
        };
        self.integrate_points(g, &[0.0, 0.5, 0.9, 1.0])
    }

    fn refine<F: Fn(f64) -> f64>(&self, f: &F, mut heap: BinaryHeap<Segment>) -> Result<Estimate> {
        let total = |h: &BinaryHeap<Segment>| -> (f64, f64) {
            h.iter().fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error))
        };
        let (mut value, mut error) = total(&heap);
        let mut stuck = Vec::new();
        let mut count = heap.len();
        loop {
            if !value.is_finite() || !error.is_finite() {
                return Err(Error::Quadrature {
                    estimate: value,
                    error,
                    intervals: count,
                });
            }
            let tol = self.abs_tol.max(self.rel_tol * value.abs());
            if error <= tol {
                break;
            }
            if count >= self.max_intervals {
                return Err(Error::Quadrature {
                    estimate: value,
                    error,
                    intervals: count,
                });
            }
            let Some(worst) = heap.pop() else {
                break;
            };
            let mid = 0.5 * (worst.a + worst.b);
            if (worst.b - worst.a).abs() <= 1e-14 * mid.abs().max(f64::MIN_POSITIVE) * 8.0
                || mid <= worst.a
                || mid >= worst.b
            {
                // Cannot bisect further; park it.
                stuck.push(worst);
                if heap.is_empty() {
                    break;
                }
                continue;
            }
            let left = gk21(f, worst.a, mid);
            let right = gk21(f, mid, worst.b);
            value += left.value + right.value - worst.value;
            error += left.error + right.error - worst.error;
            heap.push(left);
            heap.push(right);
            count += 1;
            // Resum occasionally to keep the running totals honest.
            if count % 64 == 0 {
                let (v, e) = total(&heap);
                let (sv, se) = stuck.iter().fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
                value = v + sv;
                error = e + se;
            }
        }
        let (v, e) = total(&heap);
        let (sv, se) = stuck.iter().fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
        let value = v + sv;
        let error = e + se;
        if !value.is_finite() {
            return Err(Error::Quadrature {
                estimate: value,
                error,
                intervals: count,
            });
        }
        Ok(Estimate { value, error })
    }
}

/// Integrates with default tolerances and returns only the value.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> Result<f64> {
    Quad::default().integrate(f, a, b).map(|e| e.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let e = Quad::default()
            .integrate(|x| x.powi(7) - 3.0 * x * x, 0.0, 2.0)
            .unwrap();
        assert!((e.value - (32.0 - 8.0)).abs() < 1e-12);
    }

    #[test]
    fn sqrt_endpoint_singularity() {
        let v = integrate(|x| 1.0 / x.sqrt(), 0.0, 1.0).unwrap();
        assert!((v - 2.0).abs() < 1e-9);
    }

    #[test]
    fn semi_infinite_exponential() {
        let e = Quad::default()
            .integrate_to_inf(|x| (-2.0 * x).exp(), 0.0, 1.0)
            .unwrap();
        assert!((e.value - 0.5).abs() < 1e-11);
    }

    #[test]
    fn gaussian_mass() {
        let f = |x: f64| (-x * x).exp();
        let e = Quad::default().integrate_points(f, &[-30.0, 0.0, 30.0]).unwrap();
        assert!((e.value - std::f64::consts::PI.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn divergent_integrand_is_reported() {
        let q = Quad {
            max_intervals: 50,
            ..Quad::default()
        };
        assert!(q.integrate(|x| 1.0 / x, 0.0, 1.0).is_err());
    }
}
