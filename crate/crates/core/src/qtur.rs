//! Quantum TUR lower bound B = σ/(Υ + Ψ) for Lindblad dynamics.
//!
//! Works in the complete basis (ρ_xx, ρ_uu, ρ_ll, ρ_ul, ρ_lu): the split of
//! the Liouvillian into left and right actions K₁ and K₂ does not preserve
//! hermiticity, so the real basis used elsewhere cannot hold it.
//!
//! Jump operators and strengths:
//!
//! | α    | operator | strength        |
//! |------|----------|-----------------|
//! | (ux) | σ_ux     | γ_u (n_u + 1)   |
//! | (xu) | σ_xu     | γ_u n_u         |
//! | (lx) | σ_lx     | γ_l (n_l + 1)   |
//! | (xl) | σ_xl     | γ_l n_l         |

use serde::{Deserialize, Serialize};

use crate::error::{finite, Error, Result};
use crate::fcs::mean_and_variance;
use crate::generator::{GeneratorMatrix, Model};
use crate::linalg::{c, pseudo_inverse, CMatrix, CVector, C64, RANK_CUTOFF};
use crate::params::EngineParams;
use crate::steady::{steady_state_closed_form, SteadyState};
use crate::tur::entropy_production;

/// Imaginary residue of Ψ tolerated (and discarded) as round-off.
pub const PSI_IMAG_TOL: f64 = 1e-8;

/// State vector in the complete basis (ρ_xx, ρ_uu, ρ_ll, ρ_ul, ρ_lu).
#[derive(Debug, Clone, PartialEq)]
pub struct FullBasisState(pub CVector);

impl FullBasisState {
    pub fn from_steady(ss: &SteadyState) -> Self {
        let rho_ul = ss.coherence();
        FullBasisState(CVector::from_vec(vec![
            c(ss.rho_xx, 0.0),
            c(ss.rho_uu, 0.0),
            c(ss.rho_ll, 0.0),
            rho_ul,
            rho_ul.conj(),
        ]))
    }

    /// Back to the real basis; fails if the vector is not hermitian.
    pub fn to_steady(&self, tol: f64) -> Result<SteadyState> {
        let v = &self.0;
        let residue = v.iter().take(3).map(|z| z.im.abs()).fold(0.0, f64::max)
            .max((v[3] - v[4].conj()).norm());
        if residue > tol {
            return Err(Error::NonReal {
                quantity: "density matrix",
                residue,
            });
        }
        Ok(SteadyState {
            rho_xx: v[0].re,
            rho_uu: v[1].re,
            rho_ll: v[2].re,
            rho_ul_re: v[3].re,
            rho_ul_im: v[3].im,
        })
    }

    pub fn trace(&self) -> C64 {
        self.0.iter().take(3).sum()
    }
}

/// Change of basis T with v_complete = T v_real.
pub fn real_to_complete() -> CMatrix {
    let mut t = CMatrix::zeros(5, 5);
    for i in 0..3 {
        t[(i, i)] = c(1.0, 0.0);
    }
    t[(3, 3)] = c(1.0, 0.0);
    t[(3, 4)] = c(0.0, 1.0);
    t[(4, 3)] = c(1.0, 0.0);
    t[(4, 4)] = c(0.0, -1.0);
    t
}

/// Inverse of [`real_to_complete`].
pub fn complete_to_real() -> CMatrix {
    let mut t = CMatrix::zeros(5, 5);
    for i in 0..3 {
        t[(i, i)] = c(1.0, 0.0);
    }
    t[(3, 3)] = c(0.5, 0.0);
    t[(3, 4)] = c(0.5, 0.0);
    t[(4, 3)] = c(0.0, -0.5);
    t[(4, 4)] = c(0.0, 0.5);
    t
}

/// A real-basis generator expressed in the complete basis, T L T⁻¹.
pub fn to_complete_basis(generator: &GeneratorMatrix) -> CMatrix {
    real_to_complete() * &generator.entries * complete_to_real()
}

/// K₁ (left action: −iH̃ρ plus the left half of each jump) and K₂ (right
/// action) in the complete basis; K₁ + K₂ is the Liouvillian.
pub fn k_supermatrices(params: &EngineParams) -> (CMatrix, CMatrix) {
    let (gu, gl) = (params.gamma_u(), params.gamma_l());
    let (nu, nl) = (params.n_u(), params.n_l());
    let eps = params.epsilon();
    let delta = params.delta();
    let r = |x: f64| c(x, 0.0);
    let i = |x: f64| c(0.0, x);
    let z = r(0.0);
    let xx = r(-0.5 * gl * (nl + 1.0) - 0.5 * gu * (nu + 1.0));
    let up = r(0.5 * gu * nu);
    let lp = r(0.5 * gl * nl);
    let ud = r(0.5 * gu * (nu + 1.0));
    let ld = r(0.5 * gl * (nl + 1.0));
    let u_loss = -0.5 * gu * nu;
    let l_loss = -0.5 * gl * nl;

    #[rustfmt::skip]
    let k1 = [
        xx, up, lp, z, z,
        ud, c(u_loss, delta), z, z, i(-eps),
        ld, z, r(l_loss), i(-eps), z,
        z, z, i(-eps), c(u_loss, delta), z,
        z, i(-eps), z, z, r(l_loss),
    ];
    #[rustfmt::skip]
    let k2 = [
        xx, up, lp, z, z,
        ud, c(u_loss, -delta), z, i(eps), z,
        ld, z, r(l_loss), z, i(eps),
        z, i(eps), z, r(l_loss), z,
        z, z, i(eps), z, c(u_loss, -delta),
    ];
    (CMatrix::from_row_slice(5, 5, &k1), CMatrix::from_row_slice(5, 5, &k2))
}

/// Υ = Σ_ℓ γ_ℓ(1+n_ℓ)ρ_xx + γ_ℓ n_ℓ ρ_ℓℓ, the mean total jump rate.
pub fn dynamical_activity(params: &EngineParams, ss: &SteadyState) -> f64 {
    let (gu, gl) = (params.gamma_u(), params.gamma_l());
    let (nu, nl) = (params.n_u(), params.n_l());
    gu * (1.0 + nu) * ss.rho_xx + gu * nu * ss.rho_uu + gl * (1.0 + nl) * ss.rho_xx + gl * nl * ss.rho_ll
}

/// P = [ρ, ρ, ρ, 0, 0]: maps any vector to its trace times the steady state.
pub fn projector(ss: &FullBasisState) -> CMatrix {
    let n = ss.0.len();
    CMatrix::from_fn(n, n, |i, j| if j < 3 { ss.0[i] } else { c(0.0, 0.0) })
}

/// (I − P) L⁺ (I − P) with L⁺ the Moore–Penrose pseudoinverse.
pub fn projected_pseudoinverse(liouvillian: &CMatrix, ss: &FullBasisState) -> Result<CMatrix> {
    let n = liouvillian.nrows();
    let (pinv, rank) = pseudo_inverse(liouvillian, RANK_CUTOFF)?;
    if rank + 1 != n {
        return Err(Error::Rank { found: n - rank });
    }
    let q = CMatrix::identity(n, n) - projector(ss);
    Ok(&q * pinv * &q)
}

/// Ψ = −4 Tr[K₁ L_P⁺ K₂ ρ + K₂ L_P⁺ K₁ ρ] for arbitrary K-matrices and state.
pub fn coherent_contribution_from(k1: &CMatrix, k2: &CMatrix, ss: &FullBasisState) -> Result<f64> {
    let liouvillian = k1 + k2;
    let lp = projected_pseudoinverse(&liouvillian, ss)?;
    let rho = &ss.0;
    let v = k1 * (&lp * (k2 * rho)) + k2 * (&lp * (k1 * rho));
    let psi: C64 = v.iter().take(3).sum::<C64>() * -4.0;
    if psi.im.abs() > PSI_IMAG_TOL {
        return Err(Error::NonReal {
            quantity: "coherent contribution",
            residue: psi.im.abs(),
        });
    }
    Ok(psi.re)
}

pub fn coherent_contribution(params: &EngineParams, ss: &FullBasisState) -> Result<f64> {
    let (k1, k2) = k_supermatrices(params);
    coherent_contribution_from(&k1, &k2, ss)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundComponents {
    pub upsilon: f64,
    pub psi: f64,
    /// Slope of the scaling function h(θ) = 1 + θ.
    pub h_prime: f64,
    pub sigma: f64,
    pub bound: f64,
}

pub fn quantum_bound(params: &EngineParams) -> Result<BoundComponents> {
    let ss = steady_state_closed_form(params)?;
    let (mean, _) = mean_and_variance(params, Model::Quantum)?;
    let sigma = entropy_production(params, mean)?;
    let upsilon = dynamical_activity(params, &ss);
    let psi = coherent_contribution(params, &FullBasisState::from_steady(&ss))?;
    let total = upsilon + psi;
    if !(total > 0.0) {
        return Err(Error::Singular {
            quantity: "quantum TUR bound",
            reason: "activity plus coherent contribution is not positive",
        });
    }
    let h_prime = 1.0;
    Ok(BoundComponents {
        upsilon,
        psi,
        h_prime,
        sigma,
        bound: finite("quantum TUR bound", h_prime * h_prime * sigma / total)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::build_quantum_generator;
    use crate::linalg::max_abs;
    use crate::params::Param;
    use crate::tur::thermodynamic_uncertainty;

    fn full_ss(p: &EngineParams) -> FullBasisState {
        FullBasisState::from_steady(&steady_state_closed_form(p).unwrap())
    }

    #[test]
    fn k_entries_as_printed() {
        let p = EngineParams::new(1.3, 0.4, 0.2, 2.5, 0.7, -0.3).unwrap();
        let (k1, k2) = k_supermatrices(&p);
        assert_eq!(k1[(1, 1)], c(-0.3 * 1.0 * 0.0 - 0.5 * 1.3 * 0.2, -0.3));
        assert_eq!(k1[(1, 4)], c(0.0, -0.7));
        assert_eq!(k2[(1, 3)], c(0.0, 0.7));
        assert_eq!(k2[(4, 4)], c(-0.5 * 1.3 * 0.2, 0.3));
    }

    #[test]
    fn k_sum_is_the_liouvillian() {
        let p = EngineParams::new(1.3, 0.4, 0.2, 2.5, 0.7, -0.3).unwrap();
        let (k1, k2) = k_supermatrices(&p);
        let l = to_complete_basis(&build_quantum_generator(&p, 0.0, 0.0));
        assert!(max_abs(&(&k1 + &k2 - l)) < 1e-12);
        let rho = full_ss(&p);
        assert!(((&k1 + &k2) * &rho.0).norm() < 1e-10);
    }

    #[test]
    fn basis_change_round_trips() {
        let t = real_to_complete() * complete_to_real();
        assert!(max_abs(&(t - CMatrix::identity(5, 5))) < 1e-15);
        let ss = steady_state_closed_form(&EngineParams::reference()).unwrap();
        let full = FullBasisState::from_steady(&ss);
        let real = CVector::from_iterator(5, ss.to_array().iter().map(|&x| c(x, 0.0)));
        assert!((real_to_complete() * real - &full.0).norm() < 1e-15);
        assert_eq!(full.to_steady(1e-14).unwrap(), ss);
        assert!((full.trace() - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn non_hermitian_vector_rejected() {
        let mut v = FullBasisState::from_steady(&steady_state_closed_form(&EngineParams::reference()).unwrap());
        v.0[4] = v.0[3];
        assert!(v.to_steady(1e-12).is_err());
    }

    #[test]
    fn activity_limits() {
        let p = EngineParams::new(1.5, 0.5, 0.0, 0.0, 0.0, 0.0).unwrap();
        let ss = SteadyState {
            rho_xx: 0.2,
            rho_uu: 0.5,
            rho_ll: 0.3,
            rho_ul_re: 0.0,
            rho_ul_im: 0.0,
        };
        assert!((dynamical_activity(&p, &ss) - 2.0 * 0.2).abs() < 1e-15);
        let dark = SteadyState { rho_xx: 0.0, ..ss };
        assert_eq!(dynamical_activity(&p, &dark), 0.0);

        let p = EngineParams::reference();
        let ss = steady_state_closed_form(&p).unwrap();
        let (mean, _) = mean_and_variance(&p, Model::Quantum).unwrap();
        assert!(dynamical_activity(&p, &ss) >= mean.abs());
    }

    #[test]
    fn projector_and_pseudoinverse() {
        let p = EngineParams::reference();
        let (k1, k2) = k_supermatrices(&p);
        let l = &k1 + &k2;
        let rho = full_ss(&p);
        let q = CMatrix::identity(5, 5) - projector(&rho);
        assert!(max_abs(&(&q * &q - &q)) < 1e-12);

        let (pinv, rank) = pseudo_inverse(&l, RANK_CUTOFF).unwrap();
        assert_eq!(rank, 4);
        assert!(max_abs(&(&l * &pinv * &l - &l)) < 1e-10);
        assert!(max_abs(&(&pinv * &l * &pinv - &pinv)) < 1e-10);
        assert!(max_abs(&((&l * &pinv).adjoint() - &l * &pinv)) < 1e-10);
        assert!(max_abs(&((&pinv * &l).adjoint() - &pinv * &l)) < 1e-10);

        let lp = projected_pseudoinverse(&l, &rho).unwrap();
        assert!((&lp * &rho.0).norm() < 1e-10);
    }

    #[test]
    fn pseudoinverse_rank_error() {
        let rho = full_ss(&EngineParams::reference());
        assert!(matches!(
            projected_pseudoinverse(&CMatrix::identity(5, 5), &rho),
            Err(Error::Rank { found: 0 })
        ));
    }

    #[test]
    fn undriven_resonant_baseline() {
        // baseline from an independent dense evaluation (numpy pinv, SVD
        // null vector) of the same construction
        let p = EngineParams::new(2.0, 0.1, 0.027, 5.0, 0.0, 0.0).unwrap();
        // K₁ρ = K₂ρ = Lρ/2 = 0 when nothing breaks the left/right symmetry
        let psi = coherent_contribution(&p, &full_ss(&p)).unwrap();
        assert!(psi.abs() < 1e-15, "{psi}");
        let ss = steady_state_closed_form(&p).unwrap();
        let ups = dynamical_activity(&p, &ss);
        assert!((ups - 0.13191826215022082).abs() < 1e-12, "{ups}");

        let detuned = p.with(Param::Delta, 0.3).unwrap();
        let psi = coherent_contribution(&detuned, &full_ss(&detuned)).unwrap();
        assert!((psi - 0.07605788077051932).abs() < 1e-12, "{psi}");
    }

    #[test]
    fn psi_gauge_invariant() {
        let p = EngineParams::new(1.3, 0.4, 0.2, 2.5, 0.7, -0.3).unwrap();
        let (k1, k2) = k_supermatrices(&p);
        let rho = full_ss(&p);
        let base = coherent_contribution_from(&k1, &k2, &rho).unwrap();
        let phi = 0.83;
        let mut s = CMatrix::identity(5, 5);
        s[(3, 3)] = C64::from_polar(1.0, phi);
        s[(4, 4)] = C64::from_polar(1.0, -phi);
        let s_inv = s.adjoint();
        let rotated = coherent_contribution_from(
            &(&s * &k1 * &s_inv),
            &(&s * &k2 * &s_inv),
            &FullBasisState(&s * &rho.0),
        )
        .unwrap();
        assert!((base - rotated).abs() < 1e-12 * base.abs().max(1.0));
    }

    #[test]
    fn bound_at_reference() {
        let p = EngineParams::reference();
        let b = quantum_bound(&p).unwrap();
        let q = thermodynamic_uncertainty(&p, Model::Quantum).unwrap();
        assert!(b.upsilon > 0.0);
        assert!((b.bound - b.sigma / (b.upsilon + b.psi)).abs() < 1e-12);
        assert!(b.bound <= q.q);
        assert!(b.bound < 2.0);
        // same independent evaluation as the undriven baseline
        assert!((b.upsilon - 0.3046219702834737).abs() < 1e-12);
        assert!((b.psi - 0.3573091963340147).abs() < 1e-12);
        assert!((b.bound - 0.4138248402818479).abs() < 1e-12);
        assert!((b.sigma - q.sigma).abs() < 1e-15);
    }

    #[test]
    fn bound_scale_invariant() {
        let p = EngineParams::reference().with(Param::Delta, 0.2).unwrap();
        let b = quantum_bound(&p).unwrap().bound;
        for theta in [0.5, 2.0] {
            let s = quantum_bound(&p.rescaled(theta).unwrap()).unwrap().bound;
            assert!((b - s).abs() < 1e-10, "{b} vs {s}");
        }
    }
}
