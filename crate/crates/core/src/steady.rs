//! Steady states of the maser and its classical twin.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::{GeneratorMatrix, Model};
use crate::linalg::{null_vector, C64, RANK_CUTOFF};
use crate::params::EngineParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    pub rho_xx: f64,
    pub rho_uu: f64,
    pub rho_ll: f64,
    pub rho_ul_re: f64,
    pub rho_ul_im: f64,
}

impl SteadyState {
    pub fn coherence(&self) -> C64 {
        C64::new(self.rho_ul_re, self.rho_ul_im)
    }

    pub fn population_sum(&self) -> f64 {
        self.rho_xx + self.rho_uu + self.rho_ll
    }

    /// Vector in the real quantum basis (ρ_xx, ρ_uu, ρ_ll, Re ρ_ul, Im ρ_ul).
    pub fn to_array(&self) -> [f64; 5] {
        [self.rho_xx, self.rho_uu, self.rho_ll, self.rho_ul_re, self.rho_ul_im]
    }

    /// Checks normalization, population bounds and positivity of the lasing
    /// block, each with absolute slack `tol`.
    pub fn is_physical(&self, tol: f64) -> bool {
        let pops = [self.rho_xx, self.rho_uu, self.rho_ll];
        (self.population_sum() - 1.0).abs() <= tol
            && pops.iter().all(|&p| (-tol..=1.0 + tol).contains(&p))
            && self.coherence().norm_sqr() <= self.rho_uu * self.rho_ll + tol
    }
}

/// Closed-form steady state of the driven maser.
///
/// The populations are the rate-equation solution with the golden-rule rate
/// γ_c standing in for the drive; the coherence follows from the stationarity
/// of ρ_ul.
pub fn steady_state_closed_form(params: &EngineParams) -> Result<SteadyState> {
    let gamma = params.decoherence_rate();
    if gamma == 0.0 {
        return Err(Error::Degenerate(
            "both baths empty: the lasing levels have no unique steady state",
        ));
    }
    let gc = params.classical_rate()?;
    let (gu, gl) = (params.gamma_u(), params.gamma_l());
    let (nu, nl) = (params.n_u(), params.n_l());
    let (eps, delta) = (params.epsilon(), params.delta());

    let denom = (gl * (2.0 * nl + 1.0) + gc) * (gu * (2.0 * nu + 1.0) + gc)
        - (gl * (nl + 1.0) - gc) * (gu * (nu + 1.0) - gc);
    let shared = gc * (gl * (nl + 1.0) + gu * (nu + 1.0));
    let rho_ll = (gl * gu * nu * (nl + 1.0) + shared) / denom;
    let rho_uu = (gl * gu * nl * (nu + 1.0) + shared) / denom;
    let rho_xx = 1.0 - rho_uu - rho_ll;

    let a = params.occupation_factor();
    let b = coherence_factor(params);
    let detuned = delta * delta + gamma * gamma;
    let scale = eps * params.driving() / (detuned * a + eps * eps * b);
    Ok(SteadyState {
        rho_xx,
        rho_uu,
        rho_ll,
        rho_ul_re: -delta * scale,
        rho_ul_im: gamma * scale,
    })
}

/// B = 2Γ[(3n_l+2)/γ_u + (3n_u+2)/γ_l].
fn coherence_factor(params: &EngineParams) -> f64 {
    2.0 * params.decoherence_rate()
        * ((3.0 * params.n_l() + 2.0) / params.gamma_u()
            + (3.0 * params.n_u() + 2.0) / params.gamma_l())
}

/// Steady state as the normalized kernel vector of a zero-field generator.
pub fn steady_state_numeric(generator: &GeneratorMatrix) -> Result<SteadyState> {
    if !generator.at_zero_fields() {
        return Err(Error::Degenerate("steady state needs zero counting fields"));
    }
    let v = null_vector(&generator.entries, RANK_CUTOFF)?;
    let norm: C64 = v.iter().take(3).sum();
    if norm.norm() == 0.0 {
        return Err(Error::Rank { found: 0 });
    }
    let v = v / norm;
    let (re, im) = match generator.model {
        Model::Quantum => (v[3].re, v[4].re),
        Model::Classical => (0.0, 0.0),
    };
    Ok(SteadyState {
        rho_xx: v[0].re,
        rho_uu: v[1].re,
        rho_ll: v[2].re,
        rho_ul_re: re,
        rho_ul_im: im,
    })
}

/// Location and height of the ridge of maximal |ρ_ul| in the (ε, Δ) plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceRidge {
    /// Drive strength maximizing |ρ_ul| at the requested detuning.
    pub epsilon_peak: f64,
    /// Maximal |ρ_ul|, the same for every detuning.
    pub peak: f64,
}

/// Ridge of |ρ_ul| at detuning `delta`; ε of `params` is ignored.
pub fn coherence_ridge(params: &EngineParams, delta: f64) -> Result<CoherenceRidge> {
    let gamma = params.decoherence_rate();
    if gamma == 0.0 {
        return Err(Error::Degenerate("coherence ridge needs a nonzero linewidth"));
    }
    let a = params.occupation_factor();
    let b = coherence_factor(params);
    Ok(CoherenceRidge {
        epsilon_peak: ((delta * delta + gamma * gamma) * a / b).sqrt(),
        peak: params.driving().abs() / (2.0 * (a * b).sqrt()),
    })
}
