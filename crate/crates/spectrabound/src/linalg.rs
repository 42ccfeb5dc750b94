//! Dense complex linear algebra helpers.
//!
//! Thin wrappers over nalgebra for the handful of kernels the rest of the
//! crate needs: Hermitian eigenvalues, operator norms, general eigenvalues,
//! Kronecker products and right division. Matrices are dense
//! `DMatrix<Complex64>`; everything here targets the small sizes (`n ≤` a few
//! hundred) used by the verification campaigns.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense square complex matrix used throughout the crate.
pub type CMatrix = DMatrix<Complex64>;

/// Largest eigenvalue of the Hermitian matrix `h`.
///
/// `h` must be Hermitian up to roundoff; the symmetric part is enforced
/// before factorisation so callers may pass `(M + M^H)/2` products directly.
pub fn hermitian_max_eigenvalue(h: &CMatrix) -> Result<f64> {
    let eigs = hermitian_eigenvalues(h)?;
    Ok(eigs.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
}

/// Smallest eigenvalue of the Hermitian matrix `h`.
pub fn hermitian_min_eigenvalue(h: &CMatrix) -> Result<f64> {
    let eigs = hermitian_eigenvalues(h)?;
    Ok(eigs.iter().cloned().fold(f64::INFINITY, f64::min))
}

/// All eigenvalues of a Hermitian matrix, unordered.
pub fn hermitian_eigenvalues(h: &CMatrix) -> Result<Vec<f64>> {
    let n = h.nrows();
    let sym = (h + h.adjoint()).scale(0.5);
    let eig = sym
        .try_symmetric_eigen(f64::EPSILON * 4.0, 2000)
        .ok_or(Error::EigenConvergence { n })?;
    Ok(eig.eigenvalues.iter().cloned().collect())
}

/// Largest eigenvalue together with a unit eigenvector.
pub fn hermitian_top_eigenpair(h: &CMatrix) -> Result<(f64, Vec<Complex64>)> {
    let n = h.nrows();
    let sym = (h + h.adjoint()).scale(0.5);
    let eig = sym
        .try_symmetric_eigen(f64::EPSILON * 4.0, 2000)
        .ok_or(Error::EigenConvergence { n })?;
    let (idx, _) =
        eig.eigenvalues
            .iter()
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |acc, (i, &v)| {
                    if v > acc.1 {
                        (i, v)
                    } else {
                        acc
                    }
                },
            );
    let v = eig.eigenvectors.column(idx).iter().cloned().collect();
    Ok((eig.eigenvalues[idx], v))
}

/// Operator (spectral) norm: the largest singular value.
pub fn operator_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

/// Condition number estimate `σ_max / σ_min` from a full SVD.
pub fn condition_number(m: &CMatrix) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Eigenvalues of a general complex matrix via its Schur form.
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<Complex64>> {
    let n = m.nrows();
    let schur = m
        .clone()
        .try_schur(f64::EPSILON * 16.0, 4000)
        .ok_or(Error::EigenConvergence { n })?;
    let (_, t) = schur.unpack();
    Ok((0..n).map(|i| t[(i, i)]).collect())
}

/// Spectral radius `max |λ|`.
pub fn spectral_radius(m: &CMatrix) -> Result<f64> {
    Ok(eigenvalues(m)?.iter().map(|l| l.norm()).fold(0.0, f64::max))
}

/// Kronecker product `a ⊗ b`.
pub fn kronecker(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let scaled = b.scale(1.0) * a[(i, j)];
            out.view_mut((i * br, j * bc), (br, bc)).copy_from(&scaled);
        }
    }
    out
}

/// Matrix exponential by scaling-and-squaring with a Taylor core.
///
/// The argument is halved until its 1-norm estimate is ≤ 1/4, the series
/// is summed to machine precision (the scaled norm makes it converge in
/// ~15 terms), and the result is squared back up.
pub fn matrix_exp(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    let norm = m.iter().map(|v| v.norm()).fold(0.0, f64::max) * n as f64;
    let squarings = if norm > 0.25 {
        (norm / 0.25).log2().ceil() as u32
    } else {
        0
    };
    let scaled = m.scale(0.5f64.powi(squarings as i32));
    let mut sum = CMatrix::identity(n, n);
    let mut term = CMatrix::identity(n, n);
    for k in 1..60 {
        term = (&term * &scaled).scale(1.0 / k as f64);
        sum += &term;
        if term.iter().map(|v| v.norm()).fold(0.0, f64::max) < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Right division `num * den^{-1}` by LU, with a condition gate.
///
/// Errors when `den` is singular or its SVD condition estimate exceeds
/// `cond_limit`; callers must not receive silently inaccurate quotients.
pub fn right_divide(num: &CMatrix, den: &CMatrix, cond_limit: f64) -> Result<CMatrix> {
    let cond = condition_number(den);
    if !cond.is_finite() || cond > cond_limit {
        return Err(Error::IllConditioned {
            cond,
            limit: cond_limit,
        });
    }
    // X den = num  ⇔  den^T X^T = num^T (plain transpose, no conjugation).
    let lu = den.transpose().lu();
    let solved = lu
        .solve(&num.transpose())
        .ok_or(Error::SingularSystem("right_divide"))?;
    Ok(solved.transpose())
}

/// Builds a matrix from rows of complex entries.
pub fn matrix_from_rows(rows: &[Vec<Complex64>]) -> Result<CMatrix> {
    let nr = rows.len();
    if nr == 0 {
        return Err(Error::DimensionMismatch("matrix with zero rows".into()));
    }
    let nc = rows[0].len();
    if rows.iter().any(|r| r.len() != nc) {
        return Err(Error::DimensionMismatch("ragged matrix rows".into()));
    }
    Ok(CMatrix::from_fn(nr, nc, |i, j| rows[i][j]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_complex::Complex64 as C;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn hermitian_eig_of_pauli_like_matrix() {
        // [[0, -i], [i, 0]] has eigenvalues ±1.
        let m = matrix_from_rows(&[
            vec![c(0.0, 0.0), c(0.0, -1.0)],
            vec![c(0.0, 1.0), c(0.0, 0.0)],
        ])
        .unwrap();
        let mut eigs = hermitian_eigenvalues(&m).unwrap();
        eigs.sort_by(f64::total_cmp);
        assert_relative_eq!(eigs[0], -1.0, max_relative = 1e-12);
        assert_relative_eq!(eigs[1], 1.0, max_relative = 1e-12);
    }

    #[test]
    fn operator_norm_of_jordan_block_is_golden_ratio() {
        let m = matrix_from_rows(&[
            vec![c(1.0, 0.0), c(1.0, 0.0)],
            vec![c(0.0, 0.0), c(1.0, 0.0)],
        ])
        .unwrap();
        assert_relative_eq!(
            operator_norm(&m),
            (1.0 + 5f64.sqrt()) / 2.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn eigenvalues_of_complex_triangular_matrix() {
        let m = matrix_from_rows(&[
            vec![c(1.0, 2.0), c(3.0, -1.0)],
            vec![c(0.0, 0.0), c(-2.0, 0.5)],
        ])
        .unwrap();
        let mut eigs = eigenvalues(&m).unwrap();
        eigs.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert_relative_eq!(eigs[0].re, -2.0, epsilon = 1e-10);
        assert_relative_eq!(eigs[0].im, 0.5, epsilon = 1e-10);
        assert_relative_eq!(eigs[1].re, 1.0, epsilon = 1e-10);
        assert_relative_eq!(eigs[1].im, 2.0, epsilon = 1e-10);
    }

    #[test]
    fn right_divide_matches_hand_computed_inverse() {
        // (A - I)(A + I)^{-1} for A = [[0,2],[0,0]] equals [[-1,4],[0,-1]].
        let a = matrix_from_rows(&[
            vec![c(0.0, 0.0), c(2.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0)],
        ])
        .unwrap();
        let id = CMatrix::identity(2, 2);
        let q = right_divide(&(&a - &id), &(&a + &id), 1e12).unwrap();
        let expect = matrix_from_rows(&[
            vec![c(-1.0, 0.0), c(4.0, 0.0)],
            vec![c(0.0, 0.0), c(-1.0, 0.0)],
        ])
        .unwrap();
        assert!(operator_norm(&(&q - &expect)) < 1e-12);
    }

    #[test]
    fn right_divide_rejects_ill_conditioned_denominator() {
        let a = matrix_from_rows(&[
            vec![c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(1e-15, 0.0)],
        ])
        .unwrap();
        let id = CMatrix::identity(2, 2);
        match right_divide(&id, &a, 1e12) {
            Err(Error::IllConditioned { .. }) => {}
            other => panic!("expected condition gate, got {other:?}"),
        }
    }

    #[test]
    fn kronecker_shapes_and_values() {
        let a = matrix_from_rows(&[vec![c(1.0, 0.0), c(2.0, 0.0)]]).unwrap(); // 1×2
        let b = CMatrix::identity(2, 2);
        let k = kronecker(&a, &b);
        assert_eq!(k.shape(), (2, 4));
        assert_eq!(k[(0, 0)], c(1.0, 0.0));
        assert_eq!(k[(1, 3)], c(2.0, 0.0));
        assert_eq!(k[(0, 1)], c(0.0, 0.0));
    }
}
