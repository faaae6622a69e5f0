//! Full counting statistics of the photon current.
//!
//! Cumulant rates of the number of quanta emitted into bath u follow from
//! the eigenvalue ζ(χ_u) of the counting-field generator with the largest
//! real part: ⟨Ṅ⟩ = i∂ζ and var(Ṅ) = (i∂)²ζ at χ_u = 0. Two routes are
//! provided: implicit differentiation of the characteristic polynomial
//! Σ a_n(χ_u) ζ^n = 0 (closed forms), and finite differences of ζ itself.

use serde::{Deserialize, Serialize};

use crate::error::{finite, Error, Result};
use crate::generator::{build_generator, Model};
use crate::linalg::{dominant_eigenvalue, max_abs, shifted_det_coeffs, C64};
use crate::params::EngineParams;

/// Smallest |n_l − n_u| accepted by ratio quantities (Fano factor, Q).
pub const EQUILIBRIUM_GUARD: f64 = 1e-9;

/// Real-part gap below which the dominant eigenvalue is considered ambiguous.
pub const BRANCH_TIE: f64 = 1e-10;

/// Counting-field data of det(ζI − L(χ_u)) = Σ a_n(χ_u) ζ^n at χ_u = 0,
/// with primes meaning i∂_{χ_u}.
///
/// For the classical model the fields hold c₀′, c₀″, c₁, c₁′ (= 0) and c₂.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharPolyCoeffs {
    pub a0_p: f64,
    pub a0_pp: f64,
    pub a1: f64,
    pub a1_p: f64,
    pub a2: f64,
}

impl CharPolyCoeffs {
    fn as_array(&self) -> [f64; 5] {
        [self.a0_p, self.a0_pp, self.a1, self.a1_p, self.a2]
    }

    /// Largest relative deviation between matching coefficients, measured
    /// against the larger magnitude of each pair. Pairs that are both below
    /// 1e-12 of the largest coefficient count as equal (round-off zeros).
    pub fn max_rel_diff(&self, other: &CharPolyCoeffs) -> f64 {
        let (x, y) = (self.as_array(), other.as_array());
        let zero = 1e-12 * x.iter().chain(&y).fold(0.0_f64, |m, v| m.max(v.abs()));
        x.iter()
            .zip(y)
            .map(|(a, b)| {
                let scale = a.abs().max(b.abs());
                if scale <= zero {
                    0.0
                } else {
                    (a - b).abs() / scale
                }
            })
            .fold(0.0, f64::max)
    }
}

pub fn charpoly_coeffs_quantum(params: &EngineParams) -> CharPolyCoeffs {
    let (gu, gl) = (params.gamma_u(), params.gamma_l());
    let (nu, nl) = (params.n_u(), params.n_l());
    let eps2 = params.epsilon() * params.epsilon();
    let d2 = params.delta() * params.delta();
    let g = params.decoherence_rate();
    let a = params.occupation_factor();

    CharPolyCoeffs {
        a0_p: -2.0 * eps2 * gl * gu * (nl - nu) * g,
        a0_pp: -2.0 * eps2 * gu * gl * g * (2.0 * nl * nu + nl + nu),
        a1: gl * gu * (d2 + g * g) * a + 4.0 * eps2 * g * (3.0 * g + gl + gu),
        a1_p: -2.0 * eps2 * gu * gl * (nl - nu),
        a2: (d2 + g * g + 4.0 * eps2) * (4.0 * g + gl + gu) + 2.0 * g * gl * gu * a,
    }
}

pub fn charpoly_coeffs_classical(params: &EngineParams) -> Result<CharPolyCoeffs> {
    let gc = params.classical_rate()?;
    let (gu, gl) = (params.gamma_u(), params.gamma_l());
    let (nu, nl) = (params.n_u(), params.n_l());
    let g = params.decoherence_rate();

    Ok(CharPolyCoeffs {
        a0_p: -gc * gl * gu * (nl - nu),
        a0_pp: -gc * gl * gu * (2.0 * nl * nu + nl + nu),
        a1: 2.0 * gc * (3.0 * g + gl + gu) + gl * gu * params.occupation_factor(),
        a1_p: 0.0,
        a2: 2.0 * gc + 4.0 * g + gl + gu,
    })
}

pub fn charpoly_coeffs(params: &EngineParams, model: Model) -> Result<CharPolyCoeffs> {
    match model {
        Model::Quantum => Ok(charpoly_coeffs_quantum(params)),
        Model::Classical => charpoly_coeffs_classical(params),
    }
}

/// The characteristic polynomial det(ζI − L(χ_u)) split by its χ_u
/// dependence: Σ_n [b_n + e^{iχ}·p_n + e^{−iχ}·m_n] ζ^n.
///
/// χ_u enters through exactly two entries, L[r₊][c₊] ∝ e^{+iχ} and
/// L[r₋][c₋] ∝ e^{−iχ}, in different rows and columns. Expanding the
/// determinant along them, p(ζ) is the first entry times its cofactor (with
/// the second entry zeroed) and m(ζ) likewise. Computing p and m directly
/// keeps the small field-dependent parts from drowning in the large
/// constant part.
#[derive(Debug, Clone, PartialEq)]
pub struct CountingHarmonics {
    /// Coefficients at χ_u = 0, with the constant term pinned to zero
    /// (trace preservation makes L(0) singular).
    pub at_zero: Vec<C64>,
    pub plus: Vec<C64>,
    pub minus: Vec<C64>,
}

impl CountingHarmonics {
    pub fn from_generator(params: &EngineParams, model: Model) -> Result<Self> {
        let at_zero = build_generator(params, model, 0.0)?.entries;
        let turned = build_generator(params, model, std::f64::consts::FRAC_PI_2)?.entries;
        let n = at_zero.nrows();
        let mut plus = None;
        let mut minus = None;
        for r in 0..n {
            for col in 0..n {
                let (a, b) = (at_zero[(r, col)], turned[(r, col)]);
                if (a - b).norm() <= 1e-15 * a.norm() {
                    continue;
                }
                let ratio = b / a;
                if (ratio - C64::new(0.0, 1.0)).norm() < 1e-12 && plus.is_none() {
                    plus = Some((r, col));
                } else if (ratio - C64::new(0.0, -1.0)).norm() < 1e-12 && minus.is_none() {
                    minus = Some((r, col));
                } else {
                    return Err(Error::Unconverged(format!(
                        "unexpected counting-field entry at ({r}, {col})"
                    )));
                }
            }
        }
        let (Some(plus), Some(minus)) = (plus, minus) else {
            return Err(Error::Unconverged("counting field does not enter the generator".into()));
        };
        if plus.0 == minus.0 || plus.1 == minus.1 {
            return Err(Error::Unconverged("counting-field entries share a row or column".into()));
        }

        let shifted = -&at_zero;
        let full: Vec<usize> = (0..n).collect();
        let mut base = shifted_det_coeffs(&shifted, &full);
        base[0] = C64::new(0.0, 0.0);

        // Entry `(r, c)` times its cofactor in ζI − L, with `other` zeroed,
        // as a polynomial in ζ. The cofactor is the determinant of the
        // matrix whose row r is replaced by the unit covector e_c.
        let harmonic = |(r, c): (usize, usize), other: (usize, usize)| -> Vec<C64> {
            let mut m = shifted.clone();
            m[other] = C64::new(0.0, 0.0);
            for j in 0..n {
                m[(r, j)] = C64::new(if j == c { 1.0 } else { 0.0 }, 0.0);
            }
            let diag: Vec<usize> = (0..n).filter(|&k| k != r).collect();
            let entry = shifted[(r, c)];
            let mut v: Vec<C64> = shifted_det_coeffs(&m, &diag).into_iter().map(|x| x * entry).collect();
            v.resize(n + 1, C64::new(0.0, 0.0));
            v
        };
        Ok(CountingHarmonics {
            plus: harmonic(plus, minus),
            minus: harmonic(minus, plus),
            at_zero: base,
        })
    }

    /// Coefficients of det(ζI − L(χ)), written relative to χ = 0 so the
    /// field-dependent part keeps its own relative precision.
    pub fn coeffs_at(&self, chi: C64) -> Vec<C64> {
        let one = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        let ep = (i * chi).exp() - one;
        let em = (-i * chi).exp() - one;
        // e^{±iχ} − 1 without cancellation for small real χ
        let (ep, em) = if chi.im == 0.0 {
            let h = chi.re;
            let s = (h / 2.0).sin();
            (C64::new(-2.0 * s * s, h.sin()), C64::new(-2.0 * s * s, -h.sin()))
        } else {
            (ep, em)
        };
        (0..self.at_zero.len())
            .map(|k| self.at_zero[k] + self.plus[k] * ep + self.minus[k] * em)
            .collect()
    }
}

/// Counting-field coefficients extracted from the generator itself: with
/// primes meaning i∂_χ, a′ = m − p and a″ = p + m coefficientwise.
pub fn charpoly_coeffs_numeric(params: &EngineParams, model: Model) -> Result<CharPolyCoeffs> {
    let h = CountingHarmonics::from_generator(params, model)?;
    let prime = |k: usize| (h.minus[k] - h.plus[k]).re;
    let second = |k: usize| (h.minus[k] + h.plus[k]).re;
    Ok(CharPolyCoeffs {
        a0_p: prime(0),
        a0_pp: second(0),
        a1: h.at_zero[1].re,
        a1_p: prime(1),
        a2: h.at_zero[2].re,
    })
}

fn require_a1(coeffs: &CharPolyCoeffs) -> Result<()> {
    if coeffs.a1 == 0.0 {
        Err(Error::Singular {
            quantity: "a1",
            reason: "linear characteristic coefficient vanishes",
        })
    } else {
        Ok(())
    }
}

/// ⟨Ṅ⟩ = −a₀′/a₁.
pub fn mean_rate(coeffs: &CharPolyCoeffs) -> Result<f64> {
    require_a1(coeffs)?;
    Ok(-coeffs.a0_p / coeffs.a1)
}

/// var(Ṅ) = −[a₀″ + 2⟨Ṅ⟩(a₁′ + a₂⟨Ṅ⟩)]/a₁.
pub fn variance_rate(coeffs: &CharPolyCoeffs, mean: f64) -> Result<f64> {
    require_a1(coeffs)?;
    Ok(-(coeffs.a0_pp + 2.0 * mean * (coeffs.a1_p + coeffs.a2 * mean)) / coeffs.a1)
}

/// Options for the eigenvalue finite-difference oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdOptions {
    /// Base step in χ_u.
    pub step: f64,
    /// Allowed relative disagreement between the step-h and step-h/2
    /// estimates before the Richardson result is rejected.
    pub agreement: f64,
}

impl Default for FdOptions {
    fn default() -> Self {
        FdOptions {
            step: 1e-4,
            agreement: 1e-4,
        }
    }
}

/// Newton iterations allowed when polishing an eigenvalue.
const POLISH_ITERATIONS: usize = 50;

/// Dominant eigenvalue of L(χ): the Schur spectrum picks the branch and
/// checks it is isolated, then Newton on the characteristic polynomial
/// polishes it to precision relative to its own size (the Schur value is
/// only good to ~ε‖L‖ absolute, which swamps second differences).
fn zeta(
    params: &EngineParams,
    model: Model,
    harmonics: &CountingHarmonics,
    chi: f64,
) -> Result<C64> {
    let g = build_generator(params, model, chi)?;
    let (rough, gap) = dominant_eigenvalue(&g.entries)?;
    if gap < BRANCH_TIE {
        return Err(Error::BranchCrossing { chi, gap });
    }
    let coeffs = harmonics.coeffs_at(C64::new(chi, 0.0));
    let eval = |z: C64| {
        let mut p = C64::new(0.0, 0.0);
        let mut dp = C64::new(0.0, 0.0);
        for a in coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + a;
        }
        (p, dp)
    };
    let mut z = rough;
    for _ in 0..POLISH_ITERATIONS {
        let (p, dp) = eval(z);
        if dp == C64::new(0.0, 0.0) {
            break;
        }
        let step = p / dp;
        z -= step;
        if step.norm() <= 4.0 * f64::EPSILON * z.norm() || step.norm() == 0.0 {
            break;
        }
    }
    // the polished root must still be the branch Schur found
    let drift = (z - rough).norm();
    if drift > 1e-6 * max_abs(&g.entries).max(1.0) || drift > gap / 2.0 {
        return Err(Error::BranchCrossing { chi, gap });
    }
    Ok(z)
}

/// Mean and variance rates by central differences of the dominant
/// eigenvalue, refined by one Richardson step over (h, h/2).
pub fn cumulants_via_eigenvalue(
    params: &EngineParams,
    model: Model,
    opts: FdOptions,
) -> Result<(f64, f64)> {
    let harmonics = CountingHarmonics::from_generator(params, model)?;
    let z0 = zeta(params, model, &harmonics, 0.0)?;
    let estimate = |h: f64| -> Result<(C64, C64)> {
        let zp = zeta(params, model, &harmonics, h)?;
        let zm = zeta(params, model, &harmonics, -h)?;
        let i = C64::new(0.0, 1.0);
        let mean = i * (zp - zm) / (2.0 * h);
        let var = -(zp - z0 * 2.0 + zm) / (h * h);
        Ok((mean, var))
    };
    let (m1, v1) = estimate(opts.step)?;
    let (m2, v2) = estimate(opts.step / 2.0)?;
    let mean = m2 + (m2 - m1) / 3.0;
    let var = v2 + (v2 - v1) / 3.0;

    // floor for exact zeros (no drive, equilibrium)
    let floor = 64.0 * f64::EPSILON * (m2.norm() + v2.norm()) + f64::MIN_POSITIVE;
    let close = |a: C64, b: C64| (a - b).norm() <= opts.agreement * a.norm().max(b.norm()) + floor;
    if !close(m1, m2) || !close(v1, v2) {
        return Err(Error::Unconverged(format!(
            "mean {m1} vs {m2}, variance {v1} vs {v2}"
        )));
    }
    Ok((mean.re, var.re))
}

/// Mean, variance and the Fano factor with its population/transport split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cumulants {
    pub mean: f64,
    pub variance: f64,
    pub fano: f64,
    pub fano_pop: f64,
    pub fano_tr: f64,
}

/// Rejects parameters too close to equilibrium for ratio quantities.
pub(crate) fn require_driving(params: &EngineParams) -> Result<()> {
    if params.driving().abs() < EQUILIBRIUM_GUARD {
        Err(Error::Singular {
            quantity: "n_l - n_u",
            reason: "engine at thermal equilibrium; Fano factor and Q diverge",
        })
    } else {
        Ok(())
    }
}

/// F_pop = [n_l(n_u+1) + n_u(n_l+1)]/(n_l − n_u).
pub fn fano_population(params: &EngineParams) -> Result<f64> {
    require_driving(params)?;
    let (nu, nl) = (params.n_u(), params.n_l());
    Ok((nl * (nu + 1.0) + nu * (nl + 1.0)) / (nl - nu))
}

/// Transport coefficient C of F = F_pop − 2⟨Ṅ⟩C for either model.
pub fn transport_coefficient(params: &EngineParams, model: Model) -> Result<f64> {
    let gc = params.classical_rate()?;
    let (gu, gl) = (params.gamma_u(), params.gamma_l());
    let g = params.decoherence_rate();
    let a = params.occupation_factor();
    let denom = gu * gl * a + 2.0 * gc * (3.0 * g + gu + gl);
    let classical = (2.0 * gc + 4.0 * g + gl + gu) / denom;
    match model {
        Model::Classical => Ok(classical),
        Model::Quantum => {
            if g == 0.0 {
                return Err(Error::Degenerate("transport coefficient needs a nonzero linewidth"));
            }
            let d2 = params.delta() * params.delta();
            let g2 = g * g;
            Ok(classical + (g2 - d2) / (d2 + g2) * gu * gl / g * a / denom)
        }
    }
}

/// Mean rate and variance rate from the closed-form coefficients.
pub fn mean_and_variance(params: &EngineParams, model: Model) -> Result<(f64, f64)> {
    let coeffs = charpoly_coeffs(params, model)?;
    let mean = mean_rate(&coeffs)?;
    Ok((mean, variance_rate(&coeffs, mean)?))
}

pub fn fano(params: &EngineParams, model: Model) -> Result<Cumulants> {
    let fano_pop = fano_population(params)?;
    let (mean, variance) = mean_and_variance(params, model)?;
    if mean == 0.0 {
        return Err(Error::Singular {
            quantity: "mean rate",
            reason: "no net emission (drive off); Fano factor undefined",
        });
    }
    let fano_tr = -2.0 * mean * transport_coefficient(params, model)?;
    Ok(Cumulants {
        mean: finite("mean rate", mean)?,
        variance: finite("variance rate", variance)?,
        fano: finite("Fano factor", fano_pop + fano_tr)?,
        fano_pop,
        fano_tr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Param;
    use crate::steady::steady_state_closed_form;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs())
    }

    #[test]
    fn undriven_or_balanced_coefficients_vanish() {
        let p = EngineParams::new(1.0, 0.3, 0.4, 2.0, 0.0, 0.2).unwrap();
        let c = charpoly_coeffs_quantum(&p);
        assert_eq!((c.a0_p, c.a1_p), (0.0, 0.0));
        assert_eq!(charpoly_coeffs_classical(&p).unwrap().a0_p, 0.0);
        assert_eq!(mean_rate(&c).unwrap(), 0.0);

        let p = EngineParams::new(1.0, 0.3, 1.5, 1.5, 0.3, 0.2).unwrap();
        let c = charpoly_coeffs_quantum(&p);
        assert_eq!((c.a0_p, c.a1_p), (0.0, 0.0));
        assert_eq!(mean_rate(&c).unwrap(), 0.0);
        // equilibrium still fluctuates
        assert!(c.a0_pp < 0.0 && c.a1 > 0.0);
        assert!(variance_rate(&c, 0.0).unwrap() > 0.0);
    }

    #[test]
    fn classical_linear_derivative_is_zero() {
        for p in [EngineParams::reference(), EngineParams::new(3.0, 0.2, 4.0, 0.5, 0.9, 0.7).unwrap()] {
            assert_eq!(charpoly_coeffs_classical(&p).unwrap().a1_p, 0.0);
            let numeric = charpoly_coeffs_numeric(&p, Model::Classical).unwrap();
            assert!(numeric.a1_p.abs() < 1e-12);
        }
    }

    #[test]
    fn closed_forms_match_generator_at_reference() {
        let p = EngineParams::reference();
        for model in [Model::Quantum, Model::Classical] {
            let closed = charpoly_coeffs(&p, model).unwrap();
            let numeric = charpoly_coeffs_numeric(&p, model).unwrap();
            assert!(closed.max_rel_diff(&numeric) < 1e-9, "{model}: {closed:?} vs {numeric:?}");
        }
    }

    #[test]
    fn perturbed_coefficient_is_detected() {
        let p = EngineParams::reference();
        let mut closed = charpoly_coeffs_quantum(&p);
        closed.a1 *= 1.0 + 1e-3;
        let numeric = charpoly_coeffs_numeric(&p, Model::Quantum).unwrap();
        assert!(closed.max_rel_diff(&numeric) > 1e-4);
    }

    #[test]
    fn mean_matches_coherence_at_reference() {
        let p = EngineParams::reference();
        let mean = mean_rate(&charpoly_coeffs_quantum(&p)).unwrap();
        let ss = steady_state_closed_form(&p).unwrap();
        assert!((mean - 2.0 * p.epsilon() * ss.rho_ul_im).abs() < 1e-12);
        let classical = mean_rate(&charpoly_coeffs_classical(&p).unwrap()).unwrap();
        assert!(rel(mean, classical) < 1e-12);
    }

    #[test]
    fn eigenvalue_oracle_at_reference() {
        let p = EngineParams::reference();
        for model in [Model::Quantum, Model::Classical] {
            let (m_fd, v_fd) = cumulants_via_eigenvalue(&p, model, FdOptions::default()).unwrap();
            let (m, v) = mean_and_variance(&p, model).unwrap();
            assert!(rel(m, m_fd) < 1e-6, "{model} mean {m} vs {m_fd}");
            assert!(rel(v, v_fd) < 1e-6, "{model} variance {v} vs {v_fd}");
        }
    }

    #[test]
    fn eigenvalue_oracle_undriven() {
        let p = EngineParams::reference().with(Param::Epsilon, 0.0).unwrap();
        let (m, _) = cumulants_via_eigenvalue(&p, Model::Quantum, FdOptions::default()).unwrap();
        assert!(m.abs() < 1e-10);
    }

    #[test]
    fn quantum_variance_smaller_on_resonance() {
        let p = EngineParams::reference();
        let (_, vq) = mean_and_variance(&p, Model::Quantum).unwrap();
        let (_, vc) = mean_and_variance(&p, Model::Classical).unwrap();
        assert!(vq < vc);
    }

    #[test]
    fn fano_reconciles_with_variance() {
        let p = EngineParams::reference();
        for model in [Model::Quantum, Model::Classical] {
            let c = fano(&p, model).unwrap();
            assert!(rel(c.fano * c.mean, c.variance) < 1e-10);
            assert!((c.fano - c.fano_pop - c.fano_tr).abs() < 1e-12);
        }
    }

    #[test]
    fn transport_coefficient_ordering() {
        let p = EngineParams::reference();
        let g = p.decoherence_rate();
        let on_edge = p.with(Param::Delta, g).unwrap();
        let cq = transport_coefficient(&on_edge, Model::Quantum).unwrap();
        let cc = transport_coefficient(&on_edge, Model::Classical).unwrap();
        assert!((cq - cc).abs() <= 1e-15 * cc.abs());
        assert!(
            transport_coefficient(&p, Model::Quantum).unwrap()
                > transport_coefficient(&p, Model::Classical).unwrap()
        );
        let far = p.with(Param::Delta, 2.0 * g).unwrap();
        assert!(
            transport_coefficient(&far, Model::Quantum).unwrap()
                < transport_coefficient(&far, Model::Classical).unwrap()
        );
    }

    #[test]
    fn fano_guards() {
        let eq = EngineParams::new(1.0, 1.0, 2.0, 2.0, 0.3, 0.0).unwrap();
        assert!(matches!(fano(&eq, Model::Quantum), Err(Error::Singular { .. })));
        let off = EngineParams::reference().with(Param::Epsilon, 0.0).unwrap();
        assert!(matches!(fano(&off, Model::Quantum), Err(Error::Singular { quantity: "mean rate", .. })));
    }
}
