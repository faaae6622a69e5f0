use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::AxisRange;
use crate::params::{EngineParams, Param};
use crate::pipeline::evaluate_point;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub base: EngineParams,
    pub axis: Param,
    pub range: AxisRange,
}

/// Quantities tabulated per sweep point, in CSV column order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepValues {
    pub q: f64,
    pub q_classical: f64,
    pub bound: f64,
    pub mean: f64,
    pub variance: f64,
    pub sigma: f64,
    pub rho_ul_re: f64,
    pub rho_ul_im: f64,
}

/// One grid point; singular points keep their x with the error in place of
/// the values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub x: f64,
    pub values: Result<SweepValues, String>,
}

pub fn sweep_point(params: &EngineParams) -> Result<SweepValues, String> {
    let r = evaluate_point(params, true).map_err(|e| e.to_string())?;
    let bound = r.bound.expect("bound requested");
    Ok(SweepValues {
        q: r.tur.q,
        q_classical: r.tur.q_classical,
        bound: bound.bound,
        mean: r.tur.mean_rate,
        variance: r.tur.variance_rate,
        sigma: r.tur.sigma,
        rho_ul_re: r.steady_state.rho_ul_re,
        rho_ul_im: r.steady_state.rho_ul_im,
    })
}

/// Evaluates the pipeline along one parameter axis. Never aborts: invalid
/// or singular points come back as gap rows.
pub fn sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>, String> {
    spec.range.validate()?;
    Ok(spec
        .range
        .values()
        .into_par_iter()
        .map(|x| {
            let values = spec
                .base
                .with(spec.axis, x)
                .map_err(|e| e.to_string())
                .and_then(|p| sweep_point(&p));
            SweepRow { x, values }
        })
        .collect())
}
