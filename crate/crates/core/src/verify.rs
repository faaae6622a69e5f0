//! Self-check suite: closed forms against independent numerical oracles,
//! plus the inequalities every valid point must satisfy.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::explorer::{McSpec, ORDERING_SLACK, POPULATION_SLACK, BOUND_SLACK, CLASSICAL_SLACK};
use crate::fcs::{
    charpoly_coeffs, charpoly_coeffs_numeric, cumulants_via_eigenvalue, mean_rate, variance_rate,
    CharPolyCoeffs, FdOptions,
};
use crate::generator::{build_quantum_generator, Model};
use crate::params::EngineParams;
use crate::qtur::quantum_bound;
use crate::steady::{coherence_ridge, steady_state_closed_form, steady_state_numeric};
use crate::tur::{q_pop, thermodynamic_uncertainty};
use crate::Result;

pub const STEADY_TOL: f64 = 1e-10;
pub const CHARPOLY_TOL: f64 = 1e-9;
pub const MEAN_EQUALITY_TOL: f64 = 1e-12;
pub const MEAN_COHERENCE_TOL: f64 = 1e-12;
pub const RIDGE_TOL: f64 = 1e-12;
pub const SCALE_TOL: f64 = 1e-10;
const RIDGE_DETUNINGS: usize = 11;
const SCALE_FACTORS: [f64; 2] = [0.5, 2.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub samples: u64,
    pub seed: u64,
    /// Relative tolerance for the finite-difference oracle checks.
    pub oracle_tolerance: f64,
    /// Relative error injected into the closed-form a₁ before it is
    /// checked; zero in normal use.
    pub perturb_a1: f64,
    pub min_driving: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            samples: 200,
            seed: 0,
            oracle_tolerance: 1e-6,
            perturb_a1: 0.0,
            min_driving: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    SteadyState,
    CharpolyQuantum,
    CharpolyClassical,
    OracleMeanQuantum,
    OracleVarianceQuantum,
    OracleMeanClassical,
    OracleVarianceClassical,
    MeanEquality,
    MeanCoherence,
    ClassicalTur,
    PopulationBound,
    PopulationOrdering,
    AdvantageSign,
    QuantumTur,
    BoundScaleInvariance,
    RidgeConstancy,
}

impl CheckKind {
    pub const ALL: [CheckKind; 16] = [
        CheckKind::SteadyState,
        CheckKind::CharpolyQuantum,
        CheckKind::CharpolyClassical,
        CheckKind::OracleMeanQuantum,
        CheckKind::OracleVarianceQuantum,
        CheckKind::OracleMeanClassical,
        CheckKind::OracleVarianceClassical,
        CheckKind::MeanEquality,
        CheckKind::MeanCoherence,
        CheckKind::ClassicalTur,
        CheckKind::PopulationBound,
        CheckKind::PopulationOrdering,
        CheckKind::AdvantageSign,
        CheckKind::QuantumTur,
        CheckKind::BoundScaleInvariance,
        CheckKind::RidgeConstancy,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            CheckKind::SteadyState => "steady_state",
            CheckKind::CharpolyQuantum => "charpoly_quantum",
            CheckKind::CharpolyClassical => "charpoly_classical",
            CheckKind::OracleMeanQuantum => "oracle_mean_quantum",
            CheckKind::OracleVarianceQuantum => "oracle_variance_quantum",
            CheckKind::OracleMeanClassical => "oracle_mean_classical",
            CheckKind::OracleVarianceClassical => "oracle_variance_classical",
            CheckKind::MeanEquality => "mean_equality",
            CheckKind::MeanCoherence => "mean_coherence",
            CheckKind::ClassicalTur => "classical_tur",
            CheckKind::PopulationBound => "population_bound",
            CheckKind::PopulationOrdering => "population_ordering",
            CheckKind::AdvantageSign => "advantage_sign",
            CheckKind::QuantumTur => "quantum_tur",
            CheckKind::BoundScaleInvariance => "bound_scale_invariance",
            CheckKind::RidgeConstancy => "ridge_constancy",
        }
    }

    fn index(self) -> usize {
        CheckKind::ALL.iter().position(|k| *k == self).unwrap()
    }
}

/// Outcome of one check over all samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub check: CheckKind,
    pub tolerance: f64,
    pub checked: u64,
    pub failures: u64,
    /// Largest residual seen. Equality checks report relative (or
    /// absolute, for O(1) quantities) errors; inequality checks report the
    /// signed violation, so a negative value is the tightest margin.
    pub worst_residual: f64,
    /// Sample index of the worst residual.
    pub worst_sample: Option<u64>,
    /// First error message raised while evaluating the check, if any.
    pub error: Option<String>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub samples: u64,
    pub evaluated: u64,
    pub excluded: u64,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

#[derive(Debug, Clone)]
struct Tally {
    checked: u64,
    failures: u64,
    worst: f64,
    worst_sample: Option<u64>,
    error: Option<(u64, String)>,
}

impl Tally {
    fn new() -> Self {
        Tally {
            checked: 0,
            failures: 0,
            worst: f64::NEG_INFINITY,
            worst_sample: None,
            error: None,
        }
    }

    fn record(&mut self, sample: u64, outcome: Result<(f64, bool)>) {
        self.checked += 1;
        match outcome {
            Ok((residual, ok)) => {
                self.failures += !ok as u64;
                // NaN residuals count as worst
                if !(residual <= self.worst) {
                    self.worst = residual;
                    self.worst_sample = Some(sample);
                }
            }
            Err(e) => {
                self.failures += 1;
                if self.error.is_none() {
                    self.error = Some((sample, e.to_string()));
                }
            }
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.checked += other.checked;
        self.failures += other.failures;
        let take_other = match (self.worst_sample, other.worst_sample) {
            (_, None) => false,
            (None, Some(_)) => true,
            (Some(a), Some(b)) => {
                other.worst > self.worst
                    || other.worst.is_nan() && !self.worst.is_nan()
                    || other.worst == self.worst && b < a
            }
        };
        if take_other {
            self.worst = other.worst;
            self.worst_sample = other.worst_sample;
        }
        self.error = match (self.error, other.error) {
            (Some(a), Some(b)) => Some(if a.0 <= b.0 { a } else { b }),
            (a, b) => a.or(b),
        };
        self
    }
}

fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn within(residual: f64, tol: f64) -> (f64, bool) {
    (residual, residual <= tol)
}

fn perturbed(coeffs: CharPolyCoeffs, rel: f64) -> CharPolyCoeffs {
    CharPolyCoeffs {
        a1: coeffs.a1 * (1.0 + rel),
        ..coeffs
    }
}

struct SampleChecks<'a> {
    opts: &'a VerifyOptions,
    params: EngineParams,
}

impl SampleChecks<'_> {
    fn steady_state(&self) -> Result<(f64, bool)> {
        let closed = steady_state_closed_form(&self.params)?.to_array();
        let numeric = steady_state_numeric(&build_quantum_generator(&self.params, 0.0, 0.0))?.to_array();
        let diff = closed
            .iter()
            .zip(numeric.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        Ok(within(diff, STEADY_TOL))
    }

    fn closed_coeffs(&self, model: Model) -> Result<CharPolyCoeffs> {
        Ok(perturbed(charpoly_coeffs(&self.params, model)?, self.opts.perturb_a1))
    }

    fn charpoly(&self, model: Model) -> Result<(f64, bool)> {
        let closed = self.closed_coeffs(model)?;
        let numeric = charpoly_coeffs_numeric(&self.params, model)?;
        Ok(within(closed.max_rel_diff(&numeric), CHARPOLY_TOL))
    }

    fn oracle(&self, model: Model) -> Result<((f64, bool), (f64, bool))> {
        let coeffs = self.closed_coeffs(model)?;
        let mean = mean_rate(&coeffs)?;
        let var = variance_rate(&coeffs, mean)?;
        let (fd_mean, fd_var) = cumulants_via_eigenvalue(&self.params, model, FdOptions::default())?;
        let tol = self.opts.oracle_tolerance;
        Ok((within(rel_diff(mean, fd_mean), tol), within(rel_diff(var, fd_var), tol)))
    }

    fn mean_equality(&self) -> Result<(f64, bool)> {
        let q = mean_rate(&charpoly_coeffs(&self.params, Model::Quantum)?)?;
        let c = mean_rate(&charpoly_coeffs(&self.params, Model::Classical)?)?;
        Ok(within(rel_diff(q, c), MEAN_EQUALITY_TOL))
    }

    fn mean_coherence(&self) -> Result<(f64, bool)> {
        let mean = mean_rate(&charpoly_coeffs(&self.params, Model::Quantum)?)?;
        let ss = steady_state_closed_form(&self.params)?;
        let from_coherence = 2.0 * self.params.epsilon() * ss.rho_ul_im;
        Ok(within(rel_diff(mean, from_coherence), MEAN_COHERENCE_TOL))
    }

    fn ridge(&self) -> Result<(f64, bool)> {
        let p = &self.params;
        let reference = coherence_ridge(p, 0.0)?.peak;
        let mut worst: f64 = 0.0;
        for k in 0..RIDGE_DETUNINGS {
            let delta = k as f64 / (RIDGE_DETUNINGS - 1) as f64;
            let ridge = coherence_ridge(p, delta)?;
            let at = EngineParams::new(
                p.gamma_u(),
                p.gamma_l(),
                p.n_u(),
                p.n_l(),
                ridge.epsilon_peak,
                delta,
            )?;
            let value = steady_state_closed_form(&at)?.coherence().norm();
            worst = worst.max((value - reference).abs());
        }
        Ok(within(worst, RIDGE_TOL))
    }

    fn scale_invariance(&self, bound: f64) -> Result<(f64, bool)> {
        let mut worst: f64 = 0.0;
        for s in SCALE_FACTORS {
            let b = quantum_bound(&self.params.rescaled(s)?)?.bound;
            worst = worst.max((b - bound).abs() / bound.abs().max(1.0));
        }
        Ok(within(worst, SCALE_TOL))
    }
}

/// Runs every check on `opts.samples` parameter points drawn from the
/// default Monte Carlo distributions.
pub fn run_verify(opts: &VerifyOptions) -> VerifyReport {
    let spec = McSpec {
        samples: opts.samples,
        seed: opts.seed,
        min_driving: opts.min_driving,
        ..McSpec::default()
    };
    let n = CheckKind::ALL.len();
    let empty = || (vec![Tally::new(); n], 0u64);
    let (tallies, excluded) = (0..opts.samples)
        .into_par_iter()
        .fold(empty, |(mut t, mut excluded), i| {
            let params = match spec.sample(i) {
                Ok(p) if p.driving().abs() >= opts.min_driving => p,
                _ => {
                    excluded += 1;
                    return (t, excluded);
                }
            };
            let c = SampleChecks { opts, params };
            let mut rec = |kind: CheckKind, outcome| t[kind.index()].record(i, outcome);
            rec(CheckKind::SteadyState, c.steady_state());
            rec(CheckKind::CharpolyQuantum, c.charpoly(Model::Quantum));
            rec(CheckKind::CharpolyClassical, c.charpoly(Model::Classical));
            for (model, mean_kind, var_kind) in [
                (Model::Quantum, CheckKind::OracleMeanQuantum, CheckKind::OracleVarianceQuantum),
                (Model::Classical, CheckKind::OracleMeanClassical, CheckKind::OracleVarianceClassical),
            ] {
                match c.oracle(model) {
                    Ok((m, v)) => {
                        rec(mean_kind, Ok(m));
                        rec(var_kind, Ok(v));
                    }
                    Err(e) => {
                        rec(mean_kind, Err(e.clone()));
                        rec(var_kind, Err(e));
                    }
                }
            }
            rec(CheckKind::MeanEquality, c.mean_equality());
            rec(CheckKind::MeanCoherence, c.mean_coherence());
            rec(CheckKind::RidgeConstancy, c.ridge());

            let reports = thermodynamic_uncertainty(&params, Model::Quantum).and_then(|q| {
                Ok((q, thermodynamic_uncertainty(&params, Model::Classical)?, q_pop(&params)?))
            });
            match reports {
                Ok((tur, classical, qp)) => {
                    let qc = tur.q_classical;
                    rec(CheckKind::ClassicalTur, Ok(within(2.0 - qc, CLASSICAL_SLACK)));
                    rec(CheckKind::PopulationBound, Ok(within(2.0 - qp, POPULATION_SLACK)));
                    rec(CheckKind::PopulationOrdering, Ok(within(qc - qp, ORDERING_SLACK)));
                    let g = params.decoherence_rate();
                    let d2 = params.delta() * params.delta();
                    if d2 != g * g && tur.mean_rate != 0.0 {
                        // Q − Q^cl through the transport parts; Q_pop is shared
                        let diff = tur.q_tr - classical.q_tr;
                        let agrees = (diff > 0.0) == (d2 > g * g) && diff != 0.0;
                        let residual = if agrees { 0.0 } else { diff.abs() };
                        rec(CheckKind::AdvantageSign, Ok((residual, agrees)));
                    }
                    match quantum_bound(&params) {
                        Ok(b) => {
                            rec(CheckKind::QuantumTur, Ok(within(b.bound - tur.q, BOUND_SLACK)));
                            rec(CheckKind::BoundScaleInvariance, c.scale_invariance(b.bound));
                        }
                        Err(e) => {
                            rec(CheckKind::QuantumTur, Err(e.clone()));
                            rec(CheckKind::BoundScaleInvariance, Err(e));
                        }
                    }
                }
                Err(e) => {
                    for kind in [
                        CheckKind::ClassicalTur,
                        CheckKind::PopulationBound,
                        CheckKind::PopulationOrdering,
                        CheckKind::AdvantageSign,
                        CheckKind::QuantumTur,
                        CheckKind::BoundScaleInvariance,
                    ] {
                        rec(kind, Err(e.clone()));
                    }
                }
            }
            (t, excluded)
        })
        .reduce(empty, |(a, ea), (b, eb)| {
            (a.into_iter().zip(b).map(|(x, y)| x.merge(y)).collect(), ea + eb)
        });

    let checks: Vec<CheckResult> = CheckKind::ALL
        .iter()
        .zip(tallies)
        .map(|(&kind, t)| {
            let tolerance = match kind {
                CheckKind::SteadyState => STEADY_TOL,
                CheckKind::CharpolyQuantum | CheckKind::CharpolyClassical => CHARPOLY_TOL,
                CheckKind::OracleMeanQuantum
                | CheckKind::OracleVarianceQuantum
                | CheckKind::OracleMeanClassical
                | CheckKind::OracleVarianceClassical => opts.oracle_tolerance,
                CheckKind::MeanEquality => MEAN_EQUALITY_TOL,
                CheckKind::MeanCoherence => MEAN_COHERENCE_TOL,
                CheckKind::ClassicalTur => CLASSICAL_SLACK,
                CheckKind::PopulationBound => POPULATION_SLACK,
                CheckKind::PopulationOrdering => ORDERING_SLACK,
                CheckKind::AdvantageSign => 0.0,
                CheckKind::QuantumTur => BOUND_SLACK,
                CheckKind::BoundScaleInvariance => SCALE_TOL,
                CheckKind::RidgeConstancy => RIDGE_TOL,
            };
            CheckResult {
                check: kind,
                tolerance,
                checked: t.checked,
                failures: t.failures,
                worst_residual: t.worst,
                worst_sample: t.worst_sample,
                error: t.error.map(|(_, e)| e),
                passed: t.failures == 0 && (t.checked > 0 || kind == CheckKind::AdvantageSign),
            }
        })
        .collect();
    VerifyReport {
        samples: opts.samples,
        evaluated: opts.samples - excluded,
        excluded,
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}
