//! Everything known about a single operating point.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fcs::{fano, Cumulants};
use crate::generator::Model;
use crate::params::EngineParams;
use crate::qtur::{quantum_bound, BoundComponents};
use crate::steady::{steady_state_closed_form, SteadyState};
use crate::tur::{thermodynamic_uncertainty, TurReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointReport {
    pub params: EngineParams,
    pub steady_state: SteadyState,
    pub cumulants: Cumulants,
    pub classical_cumulants: Cumulants,
    pub tur: TurReport,
    pub bound: Option<BoundComponents>,
}

/// Runs the full pipeline at one point. The quantum bound needs a
/// pseudoinverse and is only evaluated when `with_bound` is set.
pub fn evaluate_point(params: &EngineParams, with_bound: bool) -> Result<PointReport> {
    let steady_state = steady_state_closed_form(params)?;
    let cumulants = fano(params, Model::Quantum)?;
    let classical_cumulants = fano(params, Model::Classical)?;
    let tur = thermodynamic_uncertainty(params, Model::Quantum)?;
    let bound = if with_bound {
        Some(quantum_bound(params)?)
    } else {
        None
    };
    Ok(PointReport {
        params: *params,
        steady_state,
        cumulants,
        classical_cumulants,
        tur,
        bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Param;

    #[test]
    fn reference_point_report() {
        let r = evaluate_point(&EngineParams::reference(), true).unwrap();
        assert!(r.tur.q < 2.0 && r.tur.q_classical >= 2.0);
        assert_eq!(r.cumulants.mean, r.tur.mean_rate);
        assert!(r.bound.unwrap().bound <= r.tur.q);
        assert!(evaluate_point(&EngineParams::reference(), false).unwrap().bound.is_none());
    }

    #[test]
    fn singular_points_fail() {
        let p = EngineParams::reference();
        let e = evaluate_point(&p.with(Param::Epsilon, 0.0).unwrap(), true).unwrap_err();
        assert!(e.is_domain());
        assert!(e.to_string().contains("mean rate"));
        let e = evaluate_point(&p.with(Param::NU, 5.0).unwrap(), true).unwrap_err();
        assert!(e.is_domain());
    }
}
