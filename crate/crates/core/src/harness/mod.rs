//! Experiment orchestration: the invariant battery of every module as a
//! runnable suite, run records, CSV persistence and SVG survival plots.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub mod checks;
mod records;
mod svg;

pub use records::{
    config_hash, content_hash, emit_csv, parse_csv, read_csv, run_solve, write_csv, RunRecord, SolveConfig,
    CROSS_CHECK_TOL, RECORD_HEADER,
};
pub use svg::{emit_svg, render_svg, SvgAxes};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Specfun,
    Laplace,
    Randomtimes,
    Bm,
    Fbvp,
    All,
}

impl Suite {
    pub const MODULES: [Suite; 5] = [
        Suite::Specfun,
        Suite::Laplace,
        Suite::Randomtimes,
        Suite::Bm,
        Suite::Fbvp,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Suite::Specfun => "specfun",
            Suite::Laplace => "laplace",
            Suite::Randomtimes => "randomtimes",
            Suite::Bm => "bm",
            Suite::Fbvp => "fbvp",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "specfun" => Ok(Suite::Specfun),
            "laplace" => Ok(Suite::Laplace),
            "randomtimes" => Ok(Suite::Randomtimes),
            "bm" => Ok(Suite::Bm),
            "fbvp" => Ok(Suite::Fbvp),
            "all" => Ok(Suite::All),
            other => Err(Error::Parse(format!(
                "unknown suite '{other}'; expected specfun, laplace, randomtimes, bm, fbvp or all"
            ))),
        }
    }
}

/// Invariants are properties of the mathematics; oracle bootstraps compare
/// against numbers fixed beforehand by independent high-precision oracles,
/// so a failure there points at the reference value as much as at the code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckClass {
    Invariant,
    OracleBootstrap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub suite: Suite,
    pub name: String,
    pub class: CheckClass,
    pub measured: f64,
    pub tolerance: f64,
    /// `measured <= tolerance`; false for NaN.
    pub pass: bool,
    /// Quoted statement the check realizes; empty for pure plumbing checks.
    pub anchor: String,
    /// Error text when the measurement itself failed.
    pub detail: String,
}

impl CheckReport {
    pub fn new(
        suite: Suite,
        name: impl Into<String>,
        class: CheckClass,
        tolerance: f64,
        anchor: impl Into<String>,
        outcome: Result<f64>,
    ) -> Self {
        let (measured, detail) = match outcome {
            Ok(v) => (v, String::new()),
            Err(e) => (f64::INFINITY, e.to_string()),
        };
        CheckReport {
            suite,
            name: name.into(),
            class,
            measured,
            tolerance,
            pass: measured <= tolerance,
            anchor: anchor.into(),
            detail,
        }
    }
}

/// Runs every check of `suite` with master seed `seed`. Check failures are
/// reported in the returned list, never raised.
pub fn run_suite(suite: Suite, seed: u64) -> Vec<CheckReport> {
    match suite {
        Suite::Specfun => checks::specfun(seed),
        Suite::Laplace => checks::laplace(seed),
        Suite::Randomtimes => checks::randomtimes(seed),
        Suite::Bm => checks::bm(seed),
        Suite::Fbvp => checks::fbvp(seed),
        Suite::All => Suite::MODULES.iter().flat_map(|&s| run_suite(s, seed)).collect(),
    }
}

pub fn all_pass(reports: &[CheckReport]) -> bool {
    reports.iter().all(|r| r.pass)
}

/// Writes reports as CSV with a fixed header.
pub fn write_reports<W: Write>(reports: &[CheckReport], w: W) -> Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record([
        "suite",
        "name",
        "class",
        "measured",
        "tolerance",
        "pass",
        "anchor",
        "detail",
    ])
    .map_err(csv_error)?;
    for r in reports {
        out.serialize(r).map_err(csv_error)?;
    }
    out.flush()?;
    Ok(())
}

pub fn reports_to_string(reports: &[CheckReport]) -> Result<String> {
    let mut buf = Vec::new();
    write_reports(reports, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Parse(e.to_string()))
}

pub(crate) fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io.to_string()),
        other => Error::Parse(format!("{other:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_flag_follows_tolerance() {
        let ok = CheckReport::new(Suite::Bm, "a", CheckClass::Invariant, 1.0, "", Ok(1.0));
        assert!(ok.pass);
        let bad = CheckReport::new(Suite::Bm, "b", CheckClass::Invariant, 1.0, "", Ok(f64::NAN));
        assert!(!bad.pass);
        let err = CheckReport::new(
            Suite::Bm,
            "c",
            CheckClass::Invariant,
            1.0,
            "",
            Err(Error::Io("x".into())),
        );
        assert!(!err.pass);
        assert!(err.detail.contains("x"));
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::MODULES.iter().chain([Suite::All].iter()) {
            assert_eq!(s.as_str().parse::<Suite>().unwrap(), *s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn report_csv_has_fixed_header() {
        let r = CheckReport::new(Suite::Fbvp, "n", CheckClass::OracleBootstrap, 0.5, "q", Ok(0.25));
        let s = reports_to_string(&[r]).unwrap();
        let mut lines = s.lines();
        assert_eq!(
            lines.next().unwrap(),
            "suite,name,class,measured,tolerance,pass,anchor,detail"
        );
        assert_eq!(lines.next().unwrap(), "fbvp,n,oracle-bootstrap,0.25,0.5,true,q,");
    }
}
