use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::AxisRange;
use crate::params::{EngineParams, Param};
use crate::steady::steady_state_closed_form;
use crate::tur::thermodynamic_uncertainty;
use crate::generator::Model;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapSpec {
    pub base: EngineParams,
    pub epsilon: AxisRange,
    pub delta: AxisRange,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatCell {
    pub epsilon: f64,
    pub delta: f64,
    pub q: Option<f64>,
    pub q_classical: Option<f64>,
    pub abs_rho_ul: Option<f64>,
    pub im_rho_ul: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Heatmap {
    pub epsilon_axis: Vec<f64>,
    pub delta_axis: Vec<f64>,
    /// Row-major: one row per detuning, ε varying fastest.
    pub cells: Vec<HeatCell>,
}

impl Heatmap {
    pub fn cell(&self, delta_index: usize, epsilon_index: usize) -> &HeatCell {
        &self.cells[delta_index * self.epsilon_axis.len() + epsilon_index]
    }
}

fn evaluate_cell(base: &EngineParams, epsilon: f64, delta: f64) -> HeatCell {
    let mut cell = HeatCell {
        epsilon,
        delta,
        q: None,
        q_classical: None,
        abs_rho_ul: None,
        im_rho_ul: None,
        error: None,
    };
    let params = match base
        .with(Param::Epsilon, epsilon)
        .and_then(|p| p.with(Param::Delta, delta))
    {
        Ok(p) => p,
        Err(e) => {
            cell.error = Some(e.to_string());
            return cell;
        }
    };
    match steady_state_closed_form(&params) {
        Ok(ss) => {
            cell.abs_rho_ul = Some(ss.coherence().norm());
            cell.im_rho_ul = Some(ss.rho_ul_im);
        }
        Err(e) => {
            cell.error = Some(e.to_string());
            return cell;
        }
    }
    match thermodynamic_uncertainty(&params, Model::Quantum) {
        Ok(r) => {
            cell.q = Some(r.q);
            cell.q_classical = Some(r.q_classical);
        }
        Err(e) => cell.error = Some(e.to_string()),
    }
    cell
}

pub fn heatmap(spec: &HeatmapSpec) -> Result<Heatmap, String> {
    spec.epsilon.validate().map_err(|e| format!("epsilon axis: {e}"))?;
    spec.delta.validate().map_err(|e| format!("delta axis: {e}"))?;
    let epsilon_axis = spec.epsilon.values();
    let delta_axis = spec.delta.values();
    let cells = delta_axis
        .par_iter()
        .flat_map_iter(|&d| epsilon_axis.iter().map(move |&e| (e, d)))
        .map(|(e, d)| evaluate_cell(&spec.base, e, d))
        .collect();
    Ok(Heatmap {
        epsilon_axis,
        delta_axis,
        cells,
    })
}
