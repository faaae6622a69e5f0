use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use maser_tur::config::{parse_config, Command, ConfigError, RunConfig};
use maser_tur::output::Provenance;
use maser_tur::run::{execute, sidecar_path, Artifacts, RunError};
use maser_tur::verify::VerifyReport;

/// Thermodynamic uncertainty of the three-level maser heat engine.
#[derive(Parser, Debug)]
#[command(name = "maser", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Full report at one operating point (JSON).
    Point(PointArgs),
    /// One-parameter sweep.
    Sweep(SweepArgs),
    /// Grid over drive strength and detuning.
    Heatmap(HeatmapArgs),
    /// Histograms of Q and Q_cl over random parameter draws.
    Montecarlo(McArgs),
    /// Closed-form vs oracle checks and inequality suites.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// Flat `key = value` config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    gamma_u: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    gamma_l: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    n_u: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    n_l: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    epsilon: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<String>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<String>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Worker threads (0: one per core). Does not change results.
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Args, Debug)]
struct PointArgs {
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct AxisArgs {
    #[arg(long, allow_hyphen_values = true)]
    from: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    to: Option<String>,
    #[arg(long)]
    points: Option<String>,
    /// Log-spaced grid (`--log=false` for linear).
    #[arg(long, num_args = 0..=1, default_missing_value = "true", require_equals = true)]
    log: Option<String>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Parameter to sweep: gamma_u, gamma_l, n_u, n_l, epsilon, delta.
    #[arg(long)]
    axis: Option<String>,
    #[command(flatten)]
    range: AxisArgs,
}

#[derive(Args, Debug)]
struct HeatmapArgs {
    #[command(flatten)]
    common: Common,
    /// Drive-strength axis.
    #[command(flatten)]
    epsilon: AxisArgs,
    #[arg(long, allow_hyphen_values = true)]
    delta_from: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    delta_to: Option<String>,
    #[arg(long)]
    delta_points: Option<String>,
}

#[derive(Args, Debug)]
struct McArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    samples: Option<String>,
    #[arg(long)]
    bin_width: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    hist_from: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    hist_to: Option<String>,
    /// Samples with |n_l − n_u| below this are excluded.
    #[arg(long)]
    min_driving: Option<String>,
    /// Also evaluate the quantum bound B per sample.
    #[arg(long, num_args = 0..=1, default_missing_value = "true", require_equals = true)]
    with_bound: Option<String>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    samples: Option<String>,
    /// Relative tolerance of the finite-difference oracle checks.
    #[arg(long)]
    oracle_tolerance: Option<String>,
    /// Relative error injected into the closed-form a1 (mutation testing).
    #[arg(long, allow_hyphen_values = true)]
    perturb_a1: Option<String>,
    #[arg(long)]
    min_driving: Option<String>,
}

type Pairs = Vec<(&'static str, Option<String>)>;

fn common_pairs(c: &Common) -> Pairs {
    vec![
        ("gamma-u", c.gamma_u.clone()),
        ("gamma-l", c.gamma_l.clone()),
        ("n-u", c.n_u.clone()),
        ("n-l", c.n_l.clone()),
        ("epsilon", c.epsilon.clone()),
        ("delta", c.delta.clone()),
        ("out", c.out.clone()),
        ("format", c.format.clone()),
        ("seed", c.seed.clone()),
    ]
}

fn axis_pairs(a: &AxisArgs) -> Pairs {
    vec![
        ("from", a.from.clone()),
        ("to", a.to.clone()),
        ("points", a.points.clone()),
        ("log", a.log.clone()),
    ]
}

/// Subcommand, its shared options and its flag overrides.
fn flags(cmd: &Cmd) -> (Command, &Common, Pairs) {
    match cmd {
        Cmd::Point(a) => (Command::Point, &a.common, common_pairs(&a.common)),
        Cmd::Sweep(a) => {
            let mut p = common_pairs(&a.common);
            p.push(("axis", a.axis.clone()));
            p.extend(axis_pairs(&a.range));
            (Command::Sweep, &a.common, p)
        }
        Cmd::Heatmap(a) => {
            let mut p = common_pairs(&a.common);
            p.extend(axis_pairs(&a.epsilon));
            p.push(("delta-from", a.delta_from.clone()));
            p.push(("delta-to", a.delta_to.clone()));
            p.push(("delta-points", a.delta_points.clone()));
            (Command::Heatmap, &a.common, p)
        }
        Cmd::Montecarlo(a) => {
            let mut p = common_pairs(&a.common);
            p.push(("samples", a.samples.clone()));
            p.push(("bin-width", a.bin_width.clone()));
            p.push(("hist-from", a.hist_from.clone()));
            p.push(("hist-to", a.hist_to.clone()));
            p.push(("min-driving", a.min_driving.clone()));
            p.push(("with-bound", a.with_bound.clone()));
            (Command::Montecarlo, &a.common, p)
        }
        Cmd::Verify(a) => {
            let mut p = common_pairs(&a.common);
            p.push(("samples", a.samples.clone()));
            p.push(("oracle-tolerance", a.oracle_tolerance.clone()));
            p.push(("perturb-a1", a.perturb_a1.clone()));
            p.push(("min-driving", a.min_driving.clone()));
            (Command::Verify, &a.common, p)
        }
    }
}

fn build_config(cli: &Cli) -> Result<(RunConfig, usize), RunError> {
    let (command, common, pairs) = flags(&cli.command);
    let mut cfg = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                ConfigError::Invalid(format!("cannot read {}: {e}", path.display()))
            })?;
            parse_config(&text, command)?
        }
        None => RunConfig::new(command),
    };
    cfg.command = command;
    for (key, value) in pairs {
        if let Some(v) = value {
            cfg.set(key, &v)?;
        }
    }
    Ok((cfg, common.workers))
}

fn write(path: &std::path::Path, contents: &str) -> Result<(), RunError> {
    std::fs::write(path, contents)
        .map_err(|e| RunError::Runtime(format!("cannot write {}: {e}", path.display())))
}

fn emit(cfg: &RunConfig, artifacts: &Artifacts) -> Result<(), RunError> {
    match &cfg.out {
        Some(path) => {
            write(path, &artifacts.primary)?;
            if let Some(meta) = &artifacts.sidecar {
                write(&sidecar_path(path), meta)?;
            }
        }
        None => print!("{}", artifacts.primary),
    }
    Ok(())
}

fn summarize_verify(artifacts: &Artifacts) {
    // the sidecar (CSV) or the document (JSON) carries the report
    let doc = artifacts.sidecar.as_deref().unwrap_or(&artifacts.primary);
    let Ok(value) = serde_json::from_str::<serde_json::Value>(doc) else {
        return;
    };
    if let Ok(report) = serde_json::from_value::<VerifyReport>(value["result"].clone()) {
        for c in &report.checks {
            eprintln!(
                "{:<4} {:<26} worst {:>12.3e}  tol {:.1e}  failures {}/{}",
                if c.passed { "ok" } else { "FAIL" },
                c.check.as_str(),
                c.worst_residual,
                c.tolerance,
                c.failures,
                c.checked
            );
        }
    }
}

fn run(cli: &Cli) -> Result<i32, RunError> {
    let (cfg, workers) = build_config(cli)?;
    let provenance = Provenance::from_environment(cfg.seed);
    let artifacts = execute(&cfg, &provenance, workers)?;
    emit(&cfg, &artifacts)?;
    if artifacts.verify_passed.is_some() {
        summarize_verify(&artifacts);
        eprintln!(
            "verify: {}",
            if artifacts.verify_passed == Some(true) { "all checks passed" } else { "FAILED" }
        );
    }
    Ok(artifacts.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
