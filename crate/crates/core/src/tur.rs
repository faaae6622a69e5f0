//! Entropy production and thermodynamic uncertainty.

use serde::{Deserialize, Serialize};

use crate::error::{finite, Error, Result};
use crate::fcs::{fano, mean_and_variance, require_driving, transport_coefficient};
use crate::generator::Model;
use crate::params::EngineParams;

/// Thermodynamic affinity per cycle, ln[n_l(n_u+1)/(n_u(n_l+1))], together
/// with its ratio to the driving n_l − n_u.
///
/// The ratio stays finite as n_l → n_u, which keeps Q_pop accurate close to
/// equilibrium.
struct Affinity {
    value: f64,
    per_driving: f64,
}

fn affinity(params: &EngineParams) -> Result<Affinity> {
    let (nu, nl) = (params.n_u(), params.n_l());
    if nu == 0.0 || nl == 0.0 {
        return Err(Error::Singular {
            quantity: "entropy production",
            reason: "empty bath (n = 0) has infinite inverse temperature",
        });
    }
    require_driving(params)?;
    // n_l(n_u+1)/(n_u(n_l+1)) = 1 + x
    let x = (nl - nu) / (nu * (nl + 1.0));
    let value = x.ln_1p();
    Ok(Affinity {
        value,
        per_driving: value / x / (nu * (nl + 1.0)),
    })
}

/// Affinity ln[n_l(n_u+1)/(n_u(n_l+1))] in units of k_B.
pub fn thermodynamic_affinity(params: &EngineParams) -> Result<f64> {
    affinity(params).map(|a| a.value)
}

/// σ = ln[n_l(n_u+1)/(n_u(n_l+1))]·⟨Ṅ⟩.
pub fn entropy_production(params: &EngineParams, mean: f64) -> Result<f64> {
    Ok(affinity(params)?.value * mean)
}

/// Population part of Q, shared by both models and never below 2.
pub fn q_pop(params: &EngineParams) -> Result<f64> {
    let aff = affinity(params)?;
    let (nu, nl) = (params.n_u(), params.n_l());
    Ok(aff.per_driving * (nl * (nu + 1.0) + nu * (nl + 1.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurReport {
    pub sigma: f64,
    pub q: f64,
    pub q_pop: f64,
    pub q_tr: f64,
    pub q_classical: f64,
    /// Q − Q^cl.
    pub advantage: f64,
    pub mean_rate: f64,
    pub variance_rate: f64,
}

/// Q − Q^cl = 2⟨Ṅ⟩·ln[n_l(n_u+1)/(n_u(n_l+1))]·(C^cl − C).
///
/// Evaluated in factored form so its sign is exactly sign(Δ² − Γ²).
pub fn quantum_advantage(params: &EngineParams) -> Result<f64> {
    let aff = affinity(params)?;
    let (mean, _) = mean_and_variance(params, Model::Quantum)?;
    let g = params.decoherence_rate();
    let gc = params.classical_rate()?;
    let (gu, gl) = (params.gamma_u(), params.gamma_l());
    let a = params.occupation_factor();
    let d2 = params.delta() * params.delta();
    let denom = gu * gl * a + 2.0 * gc * (3.0 * g + gu + gl);
    // C^cl − C
    let c_diff = (d2 - g * g) / (d2 + g * g) * gu * gl / g * a / denom;
    Ok(2.0 * mean * aff.value * c_diff)
}

pub fn thermodynamic_uncertainty(params: &EngineParams, model: Model) -> Result<TurReport> {
    let aff = affinity(params)?;
    let qp = q_pop(params)?;
    let cum = fano(params, model)?;
    let q_tr = -aff.value * 2.0 * cum.mean * transport_coefficient(params, model)?;
    let q = qp + q_tr;
    let (q_classical, advantage) = match model {
        Model::Quantum => {
            let c_cl = transport_coefficient(params, Model::Classical)?;
            (qp - aff.value * 2.0 * cum.mean * c_cl, quantum_advantage(params)?)
        }
        Model::Classical => (q, 0.0),
    };
    Ok(TurReport {
        sigma: finite("entropy production", aff.value * cum.mean)?,
        q: finite("Q", q)?,
        q_pop: qp,
        q_tr,
        q_classical: finite("Q_cl", q_classical)?,
        advantage: finite("Q - Q_cl", advantage)?,
        mean_rate: cum.mean,
        variance_rate: cum.variance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Param;

    #[test]
    fn entropy_sign_pairing() {
        let forward = EngineParams::reference();
        let reversed = EngineParams::new(2.0, 0.1, 5.0, 0.027, 0.15, 0.0).unwrap();
        for p in [forward, reversed] {
            let (mean, _) = mean_and_variance(&p, Model::Quantum).unwrap();
            let aff = thermodynamic_affinity(&p).unwrap();
            assert_eq!(mean.signum(), aff.signum());
            assert!(entropy_production(&p, mean).unwrap() > 0.0);
        }
    }

    #[test]
    fn entropy_vanishes_towards_equilibrium() {
        let mut last = f64::INFINITY;
        for k in 1..8 {
            let nl = 1.0 + 10f64.powi(-k);
            let p = EngineParams::new(1.0, 1.0, 1.0, nl, 0.5, 0.0).unwrap();
            let (mean, _) = mean_and_variance(&p, Model::Quantum).unwrap();
            let s = entropy_production(&p, mean).unwrap();
            assert!(s > 0.0 && s < last);
            last = s;
        }
        assert!(last < 1e-12);
    }

    #[test]
    fn entropy_domain_errors() {
        let empty = EngineParams::new(1.0, 1.0, 0.0, 2.0, 0.5, 0.0).unwrap();
        assert!(entropy_production(&empty, 0.1).is_err());
        let eq = EngineParams::new(1.0, 1.0, 2.0, 2.0, 0.5, 0.0).unwrap();
        assert!(entropy_production(&eq, 0.1).is_err());
    }

    #[test]
    fn q_pop_limits_and_symmetry() {
        let near = EngineParams::new(1.0, 1.0, 0.8, 0.8 * (1.0 + 1e-6), 0.5, 0.0).unwrap();
        assert!((q_pop(&near).unwrap() - 2.0).abs() < 1e-6);

        let p = EngineParams::reference();
        let swapped = EngineParams::new(2.0, 0.1, 5.0, 0.027, 0.15, 0.0).unwrap();
        let a = q_pop(&p).unwrap();
        assert!(a > 2.0);
        assert!((a - q_pop(&swapped).unwrap()).abs() < 1e-12 * a);
        // independent evaluation of the unsimplified expression
        let direct = (5.0_f64 * 1.027 / (0.027 * 6.0)).ln() * (5.0 * 1.027 + 0.027 * 6.0) / (5.0 - 0.027);
        assert!((a - direct).abs() < 1e-12 * a);
    }

    #[test]
    fn reference_point_violates_classical_tur() {
        let r = thermodynamic_uncertainty(&EngineParams::reference(), Model::Quantum).unwrap();
        assert!(r.q < 2.0);
        assert!(r.q_classical >= 2.0);
        assert!(r.advantage < 0.0);
        assert!((r.q - r.q_pop - r.q_tr).abs() < 1e-12);
        assert!((r.advantage - (r.q - r.q_classical)).abs() < 1e-12);
        // Q from raw pieces: σ·var/mean²
        let raw = r.sigma * r.variance_rate / (r.mean_rate * r.mean_rate);
        assert!((raw - r.q).abs() < 1e-10 * r.q);
    }

    #[test]
    fn advantage_sign_follows_detuning() {
        let p = EngineParams::reference();
        let g = p.decoherence_rate();
        let edge = quantum_advantage(&p.with(Param::Delta, g).unwrap()).unwrap();
        assert_eq!(edge, 0.0);
        assert!(quantum_advantage(&p.with(Param::Delta, 2.0 * g).unwrap()).unwrap() > 0.0);
        assert!(quantum_advantage(&p).unwrap() < 0.0);
    }

    #[test]
    fn classical_report_is_self_consistent() {
        let r = thermodynamic_uncertainty(&EngineParams::reference(), Model::Classical).unwrap();
        assert_eq!(r.q, r.q_classical);
        assert!(r.q_tr <= 0.0);
        assert!(r.q >= 2.0 && r.q <= r.q_pop);
    }
}
