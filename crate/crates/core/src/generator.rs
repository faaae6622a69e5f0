//! Liouvillian generators with counting fields.
//!
//! Quantum basis: (ρ_xx, ρ_uu, ρ_ll, Re ρ_ul, Im ρ_ul).
//! Classical basis: (ρ_xx, ρ_uu, ρ_ll).
//!
//! The coherence rows follow ρ̇_ul = (iΔ − Γ)ρ_ul + iε(ρ_uu − ρ_ll), the same
//! convention as the closed-form steady state and the complete-basis
//! K-matrices.
//!
//! The counting field χ_ℓ tags jumps exchanging a quantum with bath ℓ:
//! absorption from the bath (ℓ → x) carries e^{+iχ_ℓ}, emission into the
//! bath (x → ℓ) carries e^{−iχ_ℓ}.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::{c, CMatrix, C64};
use crate::params::EngineParams;

/// Which dynamics to use for the u ↔ l transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// Coherent drive of strength ε at detuning Δ.
    Quantum,
    /// Incoherent rate γ_c in both directions.
    Classical,
}

impl Model {
    pub fn dim(&self) -> usize {
        match self {
            Model::Quantum => 5,
            Model::Classical => 3,
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::Quantum => "quantum",
            Model::Classical => "classical",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMatrix {
    pub entries: CMatrix,
    /// (χ_u, χ_l)
    pub counting_fields: (f64, f64),
    pub model: Model,
}

impl GeneratorMatrix {
    pub fn at_zero_fields(&self) -> bool {
        self.counting_fields == (0.0, 0.0)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// The trace functional: ones on the populations, zeros on coherences.
    pub fn trace_covector(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| if i < 3 { 1.0 } else { 0.0 }).collect()
    }
}

fn phase(chi: f64) -> C64 {
    C64::from_polar(1.0, chi)
}

pub fn build_quantum_generator(params: &EngineParams, chi_u: f64, chi_l: f64) -> GeneratorMatrix {
    let (gu, gl) = (params.gamma_u(), params.gamma_l());
    let (nu, nl) = (params.n_u(), params.n_l());
    let eps = params.epsilon();
    let delta = params.delta();
    let gamma = params.decoherence_rate();
    let r = |x: f64| c(x, 0.0);
    let z = r(0.0);

    #[rustfmt::skip]
    let rows = [
        r(-gu * (nu + 1.0) - gl * (nl + 1.0)), phase(chi_u) * (gu * nu), phase(chi_l) * (gl * nl), z, z,
        phase(-chi_u) * (gu * (nu + 1.0)), r(-gu * nu), z, z, r(-2.0 * eps),
        phase(-chi_l) * (gl * (nl + 1.0)), z, r(-gl * nl), z, r(2.0 * eps),
        z, z, z, r(-gamma), r(-delta),
        z, r(eps), r(-eps), r(delta), r(-gamma),
    ];
    GeneratorMatrix {
        entries: CMatrix::from_row_slice(5, 5, &rows),
        counting_fields: (chi_u, chi_l),
        model: Model::Quantum,
    }
}

pub fn build_classical_generator(params: &EngineParams, chi_u: f64) -> Result<GeneratorMatrix> {
    let gc = params.classical_rate()?;
    let (gu, gl) = (params.gamma_u(), params.gamma_l());
    let (nu, nl) = (params.n_u(), params.n_l());
    let r = |x: f64| c(x, 0.0);

    #[rustfmt::skip]
    let rows = [
        r(-gl * (nl + 1.0) - gu * (nu + 1.0)), phase(chi_u) * (gu * nu), r(gl * nl),
        phase(-chi_u) * (gu * (nu + 1.0)), r(-gc - gu * nu), r(gc),
        r(gl * (nl + 1.0)), r(gc), r(-gc - gl * nl),
    ];
    Ok(GeneratorMatrix {
        entries: CMatrix::from_row_slice(3, 3, &rows),
        counting_fields: (chi_u, 0.0),
        model: Model::Classical,
    })
}

/// Generator of either model with counting field χ_u only.
pub fn build_generator(params: &EngineParams, model: Model, chi_u: f64) -> Result<GeneratorMatrix> {
    match model {
        Model::Quantum => Ok(build_quantum_generator(params, chi_u, 0.0)),
        Model::Classical => build_classical_generator(params, chi_u),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dominant_eigenvalue;

    fn column_sums(g: &GeneratorMatrix) -> Vec<C64> {
        let w = g.trace_covector();
        (0..g.dim())
            .map(|j| (0..g.dim()).map(|i| g.entries[(i, j)] * w[i]).sum())
            .collect()
    }

    #[test]
    fn trace_preserving_at_zero_fields() {
        let p = EngineParams::new(1.3, 0.4, 0.2, 2.5, 0.7, -0.3).unwrap();
        for g in [
            build_quantum_generator(&p, 0.0, 0.0),
            build_classical_generator(&p, 0.0).unwrap(),
        ] {
            for s in column_sums(&g) {
                assert!(s.norm() < 1e-15, "{s}");
            }
        }
    }

    #[test]
    fn counting_phases_on_jump_entries() {
        let p = EngineParams::new(1.3, 0.4, 0.2, 2.5, 0.7, -0.3).unwrap();
        let g = build_quantum_generator(&p, 0.4, -1.1);
        let e = &g.entries;
        assert!((e[(0, 1)] - C64::from_polar(1.3 * 0.2, 0.4)).norm() < 1e-15);
        assert!((e[(1, 0)] - C64::from_polar(1.3 * 1.2, -0.4)).norm() < 1e-15);
        assert!((e[(0, 2)] - C64::from_polar(0.4 * 2.5, -1.1)).norm() < 1e-15);
        assert!((e[(2, 0)] - C64::from_polar(0.4 * 3.5, 1.1)).norm() < 1e-15);
        let cl = build_classical_generator(&p, 0.4).unwrap();
        assert!((cl.entries[(0, 1)] - C64::from_polar(1.3 * 0.2, 0.4)).norm() < 1e-15);
        assert!((cl.entries[(1, 0)] - C64::from_polar(1.3 * 1.2, -0.4)).norm() < 1e-15);
    }

    #[test]
    fn classical_drive_entries() {
        let p = EngineParams::reference();
        let gc = p.classical_rate().unwrap();
        let g = build_classical_generator(&p, 0.0).unwrap();
        assert_eq!(g.entries[(1, 2)].re, gc);
        assert_eq!(g.entries[(2, 1)].re, gc);

        let off = p.with(crate::params::Param::Epsilon, 0.0).unwrap();
        let g = build_classical_generator(&off, 0.0).unwrap();
        assert_eq!(g.entries[(1, 2)], c(0.0, 0.0));
        assert_eq!(g.entries[(2, 1)], c(0.0, 0.0));
    }

    #[test]
    fn undriven_coherences_decouple() {
        let p = EngineParams::new(1.0, 2.0, 0.5, 1.5, 0.0, 0.8).unwrap();
        let g = build_quantum_generator(&p, 0.0, 0.0);
        for i in 0..3 {
            for j in 3..5 {
                assert_eq!(g.entries[(i, j)], c(0.0, 0.0));
                assert_eq!(g.entries[(j, i)], c(0.0, 0.0));
            }
        }
    }

    #[test]
    fn dominant_eigenvalue_is_zero() {
        let p = EngineParams::reference();
        let (z, gap) = dominant_eigenvalue(&build_quantum_generator(&p, 0.0, 0.0).entries).unwrap();
        assert!(z.norm() < 1e-13);
        assert!(gap > 1e-3);
    }
}
