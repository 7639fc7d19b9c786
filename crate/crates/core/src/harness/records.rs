use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::checks::sub_seed;
use super::csv_error;
use crate::error::{Error, Result};
use crate::fbvp::{solve, Route, SolveRequest};
use crate::laplace::{InverterConfig, Method};
use crate::par::Exec;
use crate::randomtimes::Params;

/// Talbot and Stehfest values further apart than this earn a warning.
pub const CROSS_CHECK_TOL: f64 = 1e-4;

/// One solved point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub alpha: f64,
    pub eta: f64,
    pub sigma: f64,
    pub c: f64,
    pub t: f64,
    pub x: f64,
    pub route: Route,
    pub value: f64,
    pub std_error: f64,
    pub wall_ms: f64,
    pub seed: u64,
    pub config_hash: String,
    /// Empty when there is nothing to report.
    pub warning: String,
}

fn default_routes() -> Vec<Route> {
    Route::ALL.to_vec()
}
fn default_draws() -> usize {
    100_000
}
fn default_seed() -> u64 {
    42
}
fn default_order() -> usize {
    16
}

/// A batch of solves over a `t × x × route` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub alpha: f64,
    pub eta: f64,
    pub sigma: f64,
    pub c: f64,
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    #[serde(default = "default_routes")]
    pub routes: Vec<Route>,
    #[serde(default = "default_draws")]
    pub mc_draws: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub method: Method,
    #[serde(default = "default_order")]
    pub stehfest_order: usize,
}

impl SolveConfig {
    pub fn params(&self) -> Result<Params> {
        Params::new(self.alpha, self.eta, self.sigma, self.c)
    }

    pub fn inverter(&self) -> InverterConfig {
        InverterConfig {
            method: self.method,
            stehfest_order: self.stehfest_order,
            ..InverterConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params()?.require_boundary()?;
        if self.t.is_empty() || self.x.is_empty() || self.routes.is_empty() {
            return Err(Error::domain("t, x and routes must be non-empty"));
        }
        self.inverter().validate()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Git blob hash (`sha256` flavour) of the canonical JSON of `value`:
/// compact, object keys sorted.
pub fn content_hash(value: &Value) -> String {
    let body = value.to_string();
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", body.len()).as_bytes());
    h.update(body.as_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub fn config_hash(cfg: &SolveConfig) -> Result<String> {
    let v = serde_json::to_value(cfg).map_err(|e| Error::Parse(e.to_string()))?;
    Ok(content_hash(&v))
}

fn other_method(cfg: &InverterConfig) -> InverterConfig {
    match cfg.method {
        Method::Talbot => InverterConfig {
            method: Method::Stehfest,
            ..*cfg
        },
        Method::Stehfest => InverterConfig {
            method: Method::Talbot,
            ..*cfg
        },
    }
}

/// Solves every grid point in `t`, then `x`, then route order. Monte Carlo
/// points draw from a seed derived from `cfg.seed` and the point.
pub fn run_solve(cfg: &SolveConfig, exec: Exec) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let p = cfg.params()?;
    let hash = config_hash(cfg)?;
    let inverter = cfg.inverter();
    let mut out = Vec::with_capacity(cfg.t.len() * cfg.x.len() * cfg.routes.len());
    for &t in &cfg.t {
        for &x in &cfg.x {
            for &route in &cfg.routes {
                let seed = sub_seed(cfg.seed, &format!("{t}/{x}"));
                let mut req = SolveRequest::new(p, t, x, route)
                    .with_draws(cfg.mc_draws)
                    .with_seed(seed)
                    .with_exec(exec);
                req.inverter = inverter;
                let start = Instant::now();
                let r = solve(&req)?;
                let wall_ms = start.elapsed().as_secs_f64() * 1e3;
                let mut warning = String::new();
                if route == Route::Laplace {
                    req.inverter = other_method(&inverter);
                    let alt = solve(&req)?.value;
                    let gap = (alt - r.value).abs();
                    if !(gap <= CROSS_CHECK_TOL) {
                        warning = format!("talbot and stehfest differ by {gap:.3e}");
                    }
                }
                out.push(RunRecord {
                    alpha: p.alpha,
                    eta: p.eta,
                    sigma: p.sigma,
                    c: p.c,
                    t,
                    x,
                    route,
                    value: r.value,
                    std_error: r.std_error,
                    wall_ms,
                    seed: if route == Route::MonteCarlo { seed } else { cfg.seed },
                    config_hash: hash.clone(),
                    warning,
                });
            }
        }
    }
    Ok(out)
}

/// Column order of [`write_csv`].
pub const RECORD_HEADER: [&str; 13] = [
    "alpha",
    "eta",
    "sigma",
    "c",
    "t",
    "x",
    "route",
    "value",
    "std_error",
    "wall_ms",
    "seed",
    "config_hash",
    "warning",
];

/// Writes the header even for an empty list.
pub fn write_csv<W: Write>(records: &[RunRecord], w: W) -> Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record(RECORD_HEADER).map_err(csv_error)?;
    for r in records {
        out.serialize(r).map_err(csv_error)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(r: R) -> Result<Vec<RunRecord>> {
    csv::Reader::from_reader(r)
        .deserialize()
        .map(|row| row.map_err(csv_error))
        .collect()
}

pub fn emit_csv(path: impl AsRef<Path>, records: &[RunRecord]) -> Result<()> {
    write_csv(records, File::create(path)?)
}

pub fn parse_csv(path: impl AsRef<Path>) -> Result<Vec<RunRecord>> {
    read_csv(File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> SolveConfig {
        SolveConfig::from_json(r#"{"alpha":0.6,"eta":1,"sigma":0.5,"c":1,"t":[1],"x":[0.5],"routes":["laplace"]}"#)
            .unwrap()
    }

    #[test]
    fn defaults_fill_in() {
        let c = cfg();
        assert_eq!(c.seed, 42);
        assert_eq!(c.mc_draws, 100_000);
        assert_eq!(c.method, Method::Talbot);
        assert!(SolveConfig::from_json(r#"{"alpha":0.6,"eta":1,"sigma":0.5,"t":[1],"x":[0]}"#).is_err());
    }

    #[test]
    fn hash_is_hex_sha256() {
        let h = config_hash(&cfg()).unwrap();
        assert_eq!(h.len(), 64);
        assert!(h.chars().all(|c| c.is_ascii_hexdigit()));
        assert_ne!(h, config_hash(&SolveConfig { seed: 7, ..cfg() }).unwrap());
    }

    #[test]
    fn laplace_record_carries_no_warning_when_methods_agree() {
        let recs = run_solve(&cfg(), Exec::Sequential).unwrap();
        assert_eq!(recs.len(), 1);
        assert!(recs[0].warning.is_empty(), "{}", recs[0].warning);
        assert!(recs[0].value > 0.0 && recs[0].value < 1.0);
    }
}
