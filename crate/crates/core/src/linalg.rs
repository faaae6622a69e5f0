//! Small dense complex linear algebra used by the generators: characteristic
//! polynomials, spectra, null vectors and the Moore–Penrose pseudoinverse.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Relative singular-value cutoff separating the kernel from the range.
pub const RANK_CUTOFF: f64 = 1e-12;

pub fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

/// Coefficients `[c_0, c_1, ..., c_n]` of det(ζI − M) = Σ c_k ζ^k, with
/// `c_n = 1`.
pub fn char_poly(m: &CMatrix) -> Vec<C64> {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "characteristic polynomial needs a square matrix");
    let all: Vec<usize> = (0..n).collect();
    shifted_det_coeffs(&(-m), &all)
}

/// Coefficients `[c_0, ..., c_k]` of det(A + ζ Σ_{i∈diag} e_i e_iᵀ), where
/// `k = diag.len()`.
///
/// c_j is the sum, over j-subsets S of `diag`, of the minor of A with the
/// rows and columns in S removed; each minor is an LU determinant. The
/// cost is exponential in `diag.len()`, which is fine for the 3×3 and 5×5
/// generators and keeps every coefficient accurate to working precision
/// relative to its own terms (trace recursions lose digits to the largest
/// coefficient instead).
pub fn shifted_det_coeffs(a: &CMatrix, diag: &[usize]) -> Vec<C64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "determinant needs a square matrix");
    assert!(diag.len() < 16, "subset expansion is for small matrices");
    let mut coeffs = vec![C64::new(0.0, 0.0); diag.len() + 1];
    for mask in 0u32..(1 << diag.len()) {
        let removed: Vec<usize> = (0..diag.len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| diag[i])
            .collect();
        let keep: Vec<usize> = (0..n).filter(|i| !removed.contains(i)).collect();
        let minor = if keep.is_empty() {
            C64::new(1.0, 0.0)
        } else {
            CMatrix::from_fn(keep.len(), keep.len(), |r, c| a[(keep[r], keep[c])]).determinant()
        };
        coeffs[removed.len()] += minor;
    }
    coeffs
}

/// Iteration cap for Schur and SVD; nalgebra's defaults loop forever on
/// input they cannot reduce.
const MAX_SWEEPS: usize = 1000;

fn require_finite(m: &CMatrix, operation: &'static str) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::Decomposition {
            operation,
            reason: "matrix has non-finite entries (parameters overflow)",
        })
    }
}

/// All eigenvalues, from the diagonal of the complex Schur form.
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<C64>> {
    require_finite(m, "Schur decomposition")?;
    let (_, t) = m
        .clone()
        .try_schur(f64::EPSILON, MAX_SWEEPS)
        .ok_or(Error::Decomposition {
            operation: "Schur decomposition",
            reason: "did not converge",
        })?
        .unpack();
    Ok((0..t.nrows()).map(|i| t[(i, i)]).collect())
}

/// Eigenvalue with the largest real part, together with the gap to the
/// runner-up.
pub fn dominant_eigenvalue(m: &CMatrix) -> Result<(C64, f64)> {
    let mut ev = eigenvalues(m)?;
    ev.sort_by(|a, b| b.re.total_cmp(&a.re));
    let gap = if ev.len() > 1 { ev[0].re - ev[1].re } else { f64::INFINITY };
    Ok((ev[0], gap))
}

/// Singular values together with left/right singular vectors, sorted by
/// descending singular value.
struct SortedSvd {
    u: CMatrix,
    sigma: Vec<f64>,
    v_t: CMatrix,
}

fn svd(m: &CMatrix) -> Result<SortedSvd> {
    require_finite(m, "SVD")?;
    let svd = m
        .clone()
        .try_svd(true, true, f64::EPSILON, MAX_SWEEPS)
        .ok_or(Error::Decomposition {
            operation: "SVD",
            reason: "did not converge",
        })?;
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sigma = order.iter().map(|&i| svd.singular_values[i]).collect();
    let u = CMatrix::from_fn(u.nrows(), order.len(), |r, k| u[(r, order[k])]);
    let v_t = CMatrix::from_fn(order.len(), v_t.ncols(), |k, col| v_t[(order[k], col)]);
    Ok(SortedSvd { u, sigma, v_t })
}

fn numerical_rank(sigma: &[f64], rel_cutoff: f64) -> usize {
    let cutoff = sigma.first().copied().unwrap_or(0.0) * rel_cutoff;
    sigma.iter().filter(|&&s| s > cutoff).count()
}

/// Right singular vector of the smallest singular value. Fails unless the
/// kernel is exactly one-dimensional at the given relative cutoff.
pub fn null_vector(m: &CMatrix, rel_cutoff: f64) -> Result<CVector> {
    let n = m.ncols();
    let SortedSvd { sigma, v_t, .. } = svd(m)?;
    let rank = numerical_rank(&sigma, rel_cutoff);
    // a square matrix of full rank still gets a kernel of dimension zero
    let kernel = n - rank;
    if kernel != 1 {
        return Err(Error::Rank { found: kernel });
    }
    let row = v_t.row(n - 1);
    Ok(CVector::from_iterator(n, row.iter().map(|z| z.conj())))
}

/// Moore–Penrose pseudoinverse via the SVD, discarding singular values below
/// `rel_cutoff` times the largest. Returns the numerical rank alongside.
pub fn pseudo_inverse(m: &CMatrix, rel_cutoff: f64) -> Result<(CMatrix, usize)> {
    let SortedSvd { u, sigma, v_t } = svd(m)?;
    let rank = numerical_rank(&sigma, rel_cutoff);
    let mut pinv = CMatrix::zeros(m.ncols(), m.nrows());
    for k in 0..rank {
        let inv = 1.0 / sigma[k];
        for i in 0..m.ncols() {
            let vik = v_t[(k, i)].conj() * inv;
            for j in 0..m.nrows() {
                pinv[(i, j)] += vik * u[(j, k)].conj();
            }
        }
    }
    Ok((pinv, rank))
}

/// Largest absolute entry.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}
