//! Command execution shared by the CLI and tests: config in, artifacts out.

use thiserror::Error;

use crate::config::{Command, ConfigError, Format, RunConfig};
use crate::explorer::{heatmap, monte_carlo, sweep};
use crate::output::{
    heatmap_csv, histogram_csv, sweep_csv, to_json, verify_csv, CsvSummary, Document, Provenance,
    SweepTable,
};
use crate::pipeline::evaluate_point;
use crate::verify::{run_verify, VerifyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;
pub const EXIT_VERIFY: i32 = 5;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),

    #[error("domain error: {0}")]
    Domain(crate::Error),

    #[error("numerical failure: {0}")]
    Numerical(crate::Error),

    #[error("{0}")]
    Runtime(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => EXIT_USAGE,
            RunError::Domain(_) => EXIT_DOMAIN,
            RunError::Numerical(_) | RunError::Runtime(_) => EXIT_NUMERICAL,
        }
    }
}

impl From<crate::Error> for RunError {
    fn from(e: crate::Error) -> Self {
        if e.is_domain() {
            RunError::Domain(e)
        } else {
            RunError::Numerical(e)
        }
    }
}

/// What a run produces. `sidecar` accompanies CSV tables.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifacts {
    pub primary: String,
    pub sidecar: Option<String>,
    /// `Some(false)` when a verify run found failing checks.
    pub verify_passed: Option<bool>,
}

impl Artifacts {
    pub fn exit_code(&self) -> i32 {
        match self.verify_passed {
            Some(false) => EXIT_VERIFY,
            _ => EXIT_OK,
        }
    }
}

/// Sidecar path for a CSV output: `<out>.meta.json`.
pub fn sidecar_path(out: &std::path::Path) -> std::path::PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".meta.json");
    name.into()
}

fn csv_or_json<T: serde::Serialize>(
    cfg: &RunConfig,
    provenance: &Provenance,
    result: T,
    csv: impl FnOnce(&T) -> (String, CsvSummary),
) -> Artifacts {
    match cfg.format {
        Format::Json => Artifacts {
            primary: to_json(&Document {
                config: cfg.clone(),
                provenance: provenance.clone(),
                result,
            }),
            sidecar: None,
            verify_passed: None,
        },
        Format::Csv => {
            let (table, summary) = csv(&result);
            Artifacts {
                primary: table,
                sidecar: Some(to_json(&Document {
                    config: cfg.clone(),
                    provenance: provenance.clone(),
                    result: summary,
                })),
                verify_passed: None,
            }
        }
    }
}

/// Runs `cfg` on a pool of `workers` threads (0: one per core). Output is
/// independent of `workers`.
pub fn execute(cfg: &RunConfig, provenance: &Provenance, workers: usize) -> Result<Artifacts, RunError> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| RunError::Runtime(e.to_string()))?;
    pool.install(|| dispatch(cfg, provenance, workers))
}

fn dispatch(cfg: &RunConfig, provenance: &Provenance, workers: usize) -> Result<Artifacts, RunError> {
    match cfg.command {
        Command::Point => {
            let report = evaluate_point(&cfg.params()?, true)?;
            Ok(csv_or_json(cfg, provenance, report, |_| unreachable!("validated")))
        }
        Command::Sweep => {
            let spec = cfg.sweep_spec()?;
            let rows = sweep(&spec).map_err(RunError::Runtime)?;
            let table = SweepTable::new(spec.axis, &rows);
            Ok(csv_or_json(cfg, provenance, table, |t| {
                (sweep_csv(t), CsvSummary::sweep(t))
            }))
        }
        Command::Heatmap => {
            let map = heatmap(&cfg.heatmap_spec()?).map_err(RunError::Runtime)?;
            Ok(csv_or_json(cfg, provenance, map, |m| {
                (heatmap_csv(m), CsvSummary::heatmap(m))
            }))
        }
        Command::Montecarlo => {
            let result = monte_carlo(&cfg.mc_spec()?, workers).map_err(RunError::Runtime)?;
            Ok(csv_or_json(cfg, provenance, result, |r| {
                (histogram_csv(r), CsvSummary::montecarlo(r))
            }))
        }
        Command::Verify => {
            let report = run_verify(&VerifyOptions {
                samples: cfg.samples,
                seed: cfg.seed,
                oracle_tolerance: cfg.oracle_tolerance,
                perturb_a1: cfg.perturb_a1,
                min_driving: cfg.min_driving,
            });
            let passed = report.passed;
            let mut out = csv_or_json(cfg, provenance, report, |r| {
                (verify_csv(r), CsvSummary::verify(r))
            });
            out.verify_passed = Some(passed);
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prov() -> Provenance {
        Provenance::new(0, 0)
    }

    #[test]
    fn point_exit_codes() {
        let cfg = RunConfig::new(Command::Point);
        let out = execute(&cfg, &prov(), 1).unwrap();
        assert_eq!(out.exit_code(), EXIT_OK);
        assert!(out.primary.contains("\"steady_state\""));

        let mut cfg = RunConfig::new(Command::Point);
        cfg.params.epsilon = 0.0;
        assert_eq!(execute(&cfg, &prov(), 1).unwrap_err().exit_code(), EXIT_DOMAIN);

        let mut cfg = RunConfig::new(Command::Point);
        cfg.params.n_l = cfg.params.n_u;
        assert_eq!(execute(&cfg, &prov(), 1).unwrap_err().exit_code(), EXIT_DOMAIN);

        let mut cfg = RunConfig::new(Command::Point);
        cfg.params.gamma_u = -1.0;
        assert_eq!(execute(&cfg, &prov(), 1).unwrap_err().exit_code(), EXIT_USAGE);
    }

    #[test]
    fn verify_failure_exit_code() {
        let mut cfg = RunConfig::new(Command::Verify);
        cfg.samples = 20;
        cfg.oracle_tolerance = 0.0;
        let out = execute(&cfg, &prov(), 2).unwrap();
        assert_eq!(out.exit_code(), EXIT_VERIFY);
    }

    #[test]
    fn csv_gets_sidecar() {
        let mut cfg = RunConfig::new(Command::Sweep);
        cfg.format = Format::Csv;
        cfg.points = 5;
        let out = execute(&cfg, &prov(), 1).unwrap();
        assert!(out.primary.starts_with("epsilon,Q,Q_cl,B,"));
        let meta: serde_json::Value = serde_json::from_str(out.sidecar.as_ref().unwrap()).unwrap();
        assert_eq!(meta["result"]["kind"], "sweep");
        assert_eq!(meta["config"]["points"], 5);
        assert_eq!(
            sidecar_path(std::path::Path::new("a/b.csv")),
            std::path::PathBuf::from("a/b.csv.meta.json")
        );
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let mut cfg = RunConfig::new(Command::Montecarlo);
        cfg.samples = 3000;
        cfg.seed = 11;
        let a = execute(&cfg, &prov(), 1).unwrap();
        let b = execute(&cfg, &prov(), 4).unwrap();
        assert_eq!(a, b);
    }
}
