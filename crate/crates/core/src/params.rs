//! Physical parameter space of the three-level maser.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The six independent parameters of the engine in the frame rotating with
/// the drive.
///
/// Rates (`gamma_u`, `gamma_l`, `epsilon`, `delta`) share one arbitrary unit
/// of inverse time; bath occupations are dimensionless.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct EngineParams {
    gamma_u: f64,
    gamma_l: f64,
    n_u: f64,
    n_l: f64,
    epsilon: f64,
    delta: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    gamma_u: f64,
    gamma_l: f64,
    n_u: f64,
    n_l: f64,
    epsilon: f64,
    delta: f64,
}

impl TryFrom<RawParams> for EngineParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        EngineParams::new(raw.gamma_u, raw.gamma_l, raw.n_u, raw.n_l, raw.epsilon, raw.delta)
    }
}

impl From<EngineParams> for RawParams {
    fn from(p: EngineParams) -> Self {
        RawParams {
            gamma_u: p.gamma_u,
            gamma_l: p.gamma_l,
            n_u: p.n_u,
            n_l: p.n_l,
            epsilon: p.epsilon,
            delta: p.delta,
        }
    }
}

/// Decoherence rate and the golden-rule rate of the classical twin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedRates {
    /// Γ = (γ_u n_u + γ_l n_l)/2.
    pub decoherence: f64,
    /// γ_c = 2ε²Γ/(Δ²+Γ²).
    pub classical: f64,
}

fn check(name: &'static str, value: f64, ok: bool, reason: &'static str) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite",
        });
    }
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, value, reason })
    }
}

impl EngineParams {
    pub fn new(
        gamma_u: f64,
        gamma_l: f64,
        n_u: f64,
        n_l: f64,
        epsilon: f64,
        delta: f64,
    ) -> Result<Self> {
        check("gamma_u", gamma_u, gamma_u > 0.0, "must be > 0")?;
        check("gamma_l", gamma_l, gamma_l > 0.0, "must be > 0")?;
        check("n_u", n_u, n_u >= 0.0, "must be >= 0")?;
        check("n_l", n_l, n_l >= 0.0, "must be >= 0")?;
        check("epsilon", epsilon, epsilon >= 0.0, "must be >= 0")?;
        check("delta", delta, true, "")?;
        Ok(EngineParams {
            gamma_u,
            gamma_l,
            n_u,
            n_l,
            epsilon,
            delta,
        })
    }

    /// Operating point used throughout the figures of the reference study:
    /// γ_u = 2, γ_l = 0.1, n_u = 0.027, n_l = 5, ε = 0.15, Δ = 0.
    pub fn reference() -> Self {
        EngineParams {
            gamma_u: 2.0,
            gamma_l: 0.1,
            n_u: 0.027,
            n_l: 5.0,
            epsilon: 0.15,
            delta: 0.0,
        }
    }

    pub fn gamma_u(&self) -> f64 {
        self.gamma_u
    }

    pub fn gamma_l(&self) -> f64 {
        self.gamma_l
    }

    pub fn n_u(&self) -> f64 {
        self.n_u
    }

    pub fn n_l(&self) -> f64 {
        self.n_l
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn get(&self, param: Param) -> f64 {
        match param {
            Param::GammaU => self.gamma_u,
            Param::GammaL => self.gamma_l,
            Param::NU => self.n_u,
            Param::NL => self.n_l,
            Param::Epsilon => self.epsilon,
            Param::Delta => self.delta,
        }
    }

    /// Copy with one parameter replaced, re-validated.
    pub fn with(&self, param: Param, value: f64) -> Result<Self> {
        let mut p = *self;
        match param {
            Param::GammaU => p.gamma_u = value,
            Param::GammaL => p.gamma_l = value,
            Param::NU => p.n_u = value,
            Param::NL => p.n_l = value,
            Param::Epsilon => p.epsilon = value,
            Param::Delta => p.delta = value,
        }
        EngineParams::new(p.gamma_u, p.gamma_l, p.n_u, p.n_l, p.epsilon, p.delta)
    }

    /// Uniformly speeds up the dynamics: the rotating-frame Hamiltonian
    /// (ε, Δ) and both bath rates are multiplied by `factor`.
    pub fn rescaled(&self, factor: f64) -> Result<Self> {
        EngineParams::new(
            self.gamma_u * factor,
            self.gamma_l * factor,
            self.n_u,
            self.n_l,
            self.epsilon * factor,
            self.delta * factor,
        )
    }

    /// Γ = (γ_u n_u + γ_l n_l)/2, the linewidth of the lasing transition.
    pub fn decoherence_rate(&self) -> f64 {
        0.5 * (self.gamma_u * self.n_u + self.gamma_l * self.n_l)
    }

    /// A = 3 n_l n_u + n_l + n_u.
    pub(crate) fn occupation_factor(&self) -> f64 {
        3.0 * self.n_l * self.n_u + self.n_l + self.n_u
    }

    /// n_l − n_u, the thermodynamic driving.
    pub fn driving(&self) -> f64 {
        self.n_l - self.n_u
    }

    pub fn derived_rates(&self) -> Result<DerivedRates> {
        let gamma = self.decoherence_rate();
        let classical = if self.epsilon == 0.0 {
            0.0
        } else {
            let denom = self.delta * self.delta + gamma * gamma;
            if denom == 0.0 {
                return Err(Error::Degenerate(
                    "classical rate undefined: drive on with zero decoherence and zero detuning",
                ));
            }
            2.0 * self.epsilon * self.epsilon * gamma / denom
        };
        Ok(DerivedRates {
            decoherence: gamma,
            classical,
        })
    }

    /// Golden-rule rate γ_c that gives the classical twin the same mean
    /// output as the coherent drive.
    pub fn classical_rate(&self) -> Result<f64> {
        self.derived_rates().map(|r| r.classical)
    }
}

impl Default for EngineParams {
    fn default() -> Self {
        EngineParams::reference()
    }
}

/// Name of a single engine parameter, used for sweep axes and config keys.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Param {
    GammaU,
    GammaL,
    NU,
    NL,
    Epsilon,
    Delta,
}

impl Param {
    pub const ALL: [Param; 6] = [
        Param::GammaU,
        Param::GammaL,
        Param::NU,
        Param::NL,
        Param::Epsilon,
        Param::Delta,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Param::GammaU => "gamma_u",
            Param::GammaL => "gamma_l",
            Param::NU => "n_u",
            Param::NL => "n_l",
            Param::Epsilon => "epsilon",
            Param::Delta => "delta",
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Param {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        Param::ALL
            .iter()
            .copied()
            .find(|p| p.as_str() == norm)
            .ok_or_else(|| format!("unknown parameter `{s}`"))
    }
}
