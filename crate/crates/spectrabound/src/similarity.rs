//! Explicit 2×2 similarity constructions: the conformal map of the ellipse
//! onto the unit disk (as a Chebyshev series), the similarity matrix S with
//! ‖S‖‖S⁻¹‖ < 2 that turns a(A) into a contraction, the Jordan-block disk
//! case, unitary dilation checks, and the degree-one matrix-polynomial bound.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::domain::ConvexDomain;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::operator;
use crate::rational::RationalFunction;

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn m2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[a, b, c, d])
}

/// |z + √(z²−1)| with the branch of modulus ≥ 1: the Bernstein parameter
/// locating z on the confocal ellipse family with foci ±1.
fn bernstein_parameter(z: Complex64) -> f64 {
    let w = (z * z - 1.0).sqrt();
    (z + w).norm().max((z - w).norm())
}

/// The conformal map a(z) of the open ellipse with foci ±1 and semi-axes
/// (ρ ± 1/ρ)/2 onto the unit disk, as the series
/// a(z) = (2z/ρ)·exp(−Σ_{n≥1} ((−1)^{n+1}/n)·2·T_{2n}(z)/(1+ρ^{4n})).
///
/// The truncation index comes from the a-priori tail bound
/// |T_{2n}(z)| ≤ ρ_z^{2n} with ρ_z the Bernstein parameter of z, so terms
/// decay geometrically with ratio ρ_z²/ρ⁴ ≤ 1/ρ²; at least 8 terms are
/// always summed.
pub fn conformal_a(z: Complex64, rho: f64, tol: f64) -> Result<Complex64> {
    if !(rho > 1.0) {
        return Err(Error::InvalidConfig(format!(
            "ellipse parameter must exceed 1, got {rho}"
        )));
    }
    let rho_z = bernstein_parameter(z);
    if rho_z > rho * (1.0 + 1e-10) {
        return Err(Error::NotInterior {
            point: (z.re, z.im),
            margin: 0.0,
        });
    }
    let ratio = (rho_z * rho_z / (rho * rho * rho * rho)).min(1.0 / (rho * rho));
    let mut s = c64(0.0, 0.0);
    // Chebyshev pair (T_{k-1}, T_k), advanced two steps per series term
    let mut t_prev = c64(1.0, 0.0);
    let mut t_curr = z;
    let mut n = 0usize;
    loop {
        n += 1;
        let t_next = 2.0 * z * t_curr - t_prev; // T_{2n}
        t_prev = t_curr;
        t_curr = t_next;
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        s += t_curr * (sign / n as f64 * 2.0 / (1.0 + rho.powi(4 * n as i32)));
        let t_follow = 2.0 * z * t_curr - t_prev; // T_{2n+1}
        t_prev = t_curr;
        t_curr = t_follow;
        let tail = 2.0 / (n + 1) as f64 * ratio.powi(n as i32 + 1) / (1.0 - ratio);
        if n >= 8 && tail < tol {
            break;
        }
        if n > 400_000 {
            return Err(Error::AccuracyNotMet {
                context: "conformal map series".into(),
                estimate: tail,
                tolerance: tol,
            });
        }
    }
    Ok(2.0 * z / rho * (-s).exp())
}

/// The same series applied to a square matrix through the matrix Chebyshev
/// recurrence and a matrix exponential.
pub fn conformal_a_matrix(a: &CMatrix, rho: f64, tol: f64) -> Result<CMatrix> {
    if !(rho > 1.0) {
        return Err(Error::InvalidConfig(format!(
            "ellipse parameter must exceed 1, got {rho}"
        )));
    }
    let n = a.nrows();
    let mut s = CMatrix::zeros(n, n);
    let mut t_prev = CMatrix::identity(n, n);
    let mut t_curr = a.clone();
    let two_a = a * c64(2.0, 0.0);
    let mut k = 0usize;
    loop {
        k += 1;
        let t_next = &two_a * &t_curr - &t_prev;
        t_prev = t_curr;
        t_curr = t_next;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        let coeff = sign / k as f64 * 2.0 / (1.0 + rho.powi(4 * k as i32));
        s += &t_curr * c64(coeff, 0.0);
        let term_norm = coeff.abs() * linalg::operator_norm(&t_curr);
        let t_follow = &two_a * &t_curr - &t_prev;
        t_prev = t_curr;
        t_curr = t_follow;
        if k >= 8 && term_norm < tol / 10.0 {
            break;
        }
        if k > 400_000 {
            return Err(Error::AccuracyNotMet {
                context: "conformal map matrix series".into(),
                estimate: term_norm,
                tolerance: tol,
            });
        }
    }
    Ok(a * c64(2.0 / rho, 0.0) * linalg::matrix_exp(&(-s)))
}

/// The similarity data for A = [[1,γ],[0,−1]]: S conjugates a(1)·A into the
/// norm-one matrix B, and X = ‖S‖·‖S⁻¹‖ stays strictly below 2.
pub struct EllipseSimilarity {
    pub gamma: f64,
    pub rho: f64,
    pub a1: f64,
    pub s: CMatrix,
    pub b: CMatrix,
    pub x: f64,
    /// |‖B‖ − 1|
    pub b_norm_defect: f64,
    /// |X² − ((1+ρ²a₁²)/(ρa₁))·X + 1|
    pub quadratic_residual: f64,
    /// ‖a(A) − a(1)·A‖ with a(A) summed as a matrix series
    pub matrix_map_residual: f64,
}

/// Builds the ellipse similarity for the canonical matrix [[1,γ],[0,−1]]
/// (numerical range: the ellipse with foci ±1 and minor axis γ) and checks
/// every invariant: ‖B‖ = 1, 1 < X < 2, the quadratic identity for X, and
/// a(A) = a(1)·A.
pub fn build_similarity(gamma: f64, tol: f64) -> Result<EllipseSimilarity> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "ellipse minor axis must be positive, got {gamma}"
        )));
    }
    let rho = (gamma + (gamma * gamma + 4.0).sqrt()) / 2.0;
    let a1c = conformal_a(c64(1.0, 0.0), rho, tol)?;
    // a(1) → 1⁻ as γ → 0 and roundoff can push the sum an ulp past 1
    let a1 = a1c.re.min(1.0);
    if a1c.im.abs() > 1e-12 || a1 <= 0.0 || a1c.re > 1.0 + 1e-10 {
        return Err(Error::AccuracyNotMet {
            context: "conformal map value at the focus".into(),
            estimate: (a1c.re - 1.0).max(a1c.im.abs()),
            tolerance: 1e-12,
        });
    }
    let s = m2(
        c64(1.0 + a1 * a1, 0.0),
        c64(a1 * a1 * rho - 1.0 / rho, 0.0),
        c64(0.0, 0.0),
        c64(a1 * (rho + 1.0 / rho), 0.0),
    );
    let b = m2(
        c64(a1, 0.0),
        c64(1.0 - a1 * a1, 0.0),
        c64(0.0, 0.0),
        c64(-a1, 0.0),
    );
    let b_norm_defect = (linalg::operator_norm(&b) - 1.0).abs();
    let x = linalg::condition_number(&s);
    let quadratic_residual = (x * x - (1.0 + rho * rho * a1 * a1) / (rho * a1) * x + 1.0).abs();
    let canonical = m2(
        c64(1.0, 0.0),
        c64(gamma, 0.0),
        c64(0.0, 0.0),
        c64(-1.0, 0.0),
    );
    let matrix_map_residual = linalg::operator_norm(
        &(conformal_a_matrix(&canonical, rho, tol)? - &canonical * c64(a1, 0.0)),
    );
    let sim = EllipseSimilarity {
        gamma,
        rho,
        a1,
        s,
        b,
        x,
        b_norm_defect,
        quadratic_residual,
        matrix_map_residual,
    };
    if sim.b_norm_defect > 1e-10 {
        return Err(Error::AccuracyNotMet {
            context: "contraction norm of B".into(),
            estimate: sim.b_norm_defect,
            tolerance: 1e-10,
        });
    }
    if !(1.0 < sim.x && sim.x < 2.0) {
        return Err(Error::EstimateViolated {
            index: 0,
            value: sim.x,
            bound: 2.0,
        });
    }
    if sim.quadratic_residual > 1e-9 {
        return Err(Error::AccuracyNotMet {
            context: "quadratic identity for the condition number".into(),
            estimate: sim.quadratic_residual,
            tolerance: 1e-9,
        });
    }
    let map_tol = (20.0 * tol).max(1e-9);
    if sim.matrix_map_residual > map_tol {
        return Err(Error::AccuracyNotMet {
            context: "matrix conformal map against a(1)·A".into(),
            estimate: sim.matrix_map_residual,
            tolerance: map_tol,
        });
    }
    Ok(sim)
}

/// Canonical reduction of a 2×2 matrix: a unitary conjugation plus an affine
/// map brings it to [[1,γ],[0,−1]] (distinct eigenvalues) or [[0,c],[0,0]]
/// (equal eigenvalues), with γ ≥ 0 and c ≥ 0 real.
pub enum CanonicalCase {
    DistinctEigenvalues { gamma: f64 },
    EqualEigenvalues { c: f64 },
}

pub struct TwoByTwoCanonicalForm {
    pub case: CanonicalCase,
    pub lambda: Complex64,
    pub beta: Complex64,
    pub unitary: CMatrix,
}

impl TwoByTwoCanonicalForm {
    pub fn canonicalize(a: &CMatrix) -> Result<Self> {
        if a.nrows() != 2 || a.ncols() != 2 {
            return Err(Error::DimensionMismatch(format!(
                "canonical form needs a 2×2 matrix, got {}×{}",
                a.nrows(),
                a.ncols()
            )));
        }
        let (p, q, r, s) = (a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]);
        let scale = a.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
        let disc = ((p - s) * (p - s) + 4.0 * q * r).sqrt();
        let l1 = (p + s + disc) / 2.0;
        // eigenvector of l1: the larger of the two null-space candidates
        let cand_a = (q, l1 - p);
        let cand_b = (l1 - s, r);
        let (v0, v1) = if cand_a.0.norm() + cand_a.1.norm() >= cand_b.0.norm() + cand_b.1.norm() {
            cand_a
        } else {
            cand_b
        };
        let vn = (v0.norm_sqr() + v1.norm_sqr()).sqrt();
        let (v0, v1) = if vn < 1e-14 * scale {
            (c64(1.0, 0.0), c64(0.0, 0.0)) // already diagonal at l1
        } else {
            (v0 / vn, v1 / vn)
        };
        let qmat = m2(v0, -v1.conj(), v1, v0.conj());
        let t = qmat.adjoint() * a * &qmat;
        let (t11, t12, t22) = (t[(0, 0)], t[(0, 1)], t[(1, 1)]);
        if (t11 - t22).norm() <= 1e-12 * scale {
            let beta = (t11 + t22) / 2.0;
            let lambda = if t12.norm() > 0.0 {
                t12 / t12.norm()
            } else {
                c64(1.0, 0.0)
            };
            Ok(TwoByTwoCanonicalForm {
                case: CanonicalCase::EqualEigenvalues { c: t12.norm() },
                lambda,
                beta,
                unitary: qmat,
            })
        } else {
            let lambda = (t11 - t22) / 2.0;
            let beta = (t11 + t22) / 2.0;
            let gamma = (t12 / lambda).norm();
            // absorb the off-diagonal phase into the unitary so γ is real
            let d = if t12.norm() > 0.0 {
                (lambda / lambda.norm()) * (t12.conj() / t12.norm())
            } else {
                c64(1.0, 0.0)
            };
            let unitary = &qmat * m2(d.conj(), c64(0.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0));
            Ok(TwoByTwoCanonicalForm {
                case: CanonicalCase::DistinctEigenvalues { gamma },
                lambda,
                beta,
                unitary,
            })
        }
    }

    pub fn canonical_matrix(&self) -> CMatrix {
        match self.case {
            CanonicalCase::DistinctEigenvalues { gamma } => m2(
                c64(1.0, 0.0),
                c64(gamma, 0.0),
                c64(0.0, 0.0),
                c64(-1.0, 0.0),
            ),
            CanonicalCase::EqualEigenvalues { c } => {
                m2(c64(0.0, 0.0), c64(c, 0.0), c64(0.0, 0.0), c64(0.0, 0.0))
            }
        }
    }

    pub fn reconstruct(&self) -> CMatrix {
        let inner = self.canonical_matrix() * self.lambda + CMatrix::identity(2, 2) * self.beta;
        &self.unitary * inner * self.unitary.adjoint()
    }
}

/// The diagonal similarity turning the Jordan-type block [[0,c],[0,0]]
/// (numerical range: disk of radius c/2) into a contraction:
/// S = diag(t, 1/t) with t² = min(1, 1/c), so ‖SAS⁻¹‖ = c·t² ≤ 1 and
/// κ(S) = max(1, c) ≤ 2.
pub fn disk_similarity_jordan(c: f64) -> Result<(CMatrix, f64)> {
    if !(c > 0.0 && c <= 2.0) {
        return Err(Error::InvalidConfig(format!(
            "Jordan parameter must lie in (0, 2], got {c}"
        )));
    }
    let t = c.recip().min(1.0).sqrt();
    let s = m2(c64(t, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(1.0 / t, 0.0));
    Ok((s, c.max(1.0)))
}

/// Boundary of the numerical range of a 2×2 matrix via the elliptical range
/// theorem: the ellipse with foci at the eigenvalues and minor axis
/// √(‖A‖_F² − |λ₁|² − |λ₂|²). Returns (center, rotation, semi-major,
/// semi-minor); the minor axis vanishes exactly for normal matrices.
fn elliptical_range(a: &CMatrix) -> (Complex64, f64, f64, f64) {
    let (p, q, r, s) = (a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]);
    let disc = ((p - s) * (p - s) + 4.0 * q * r).sqrt();
    let l1 = (p + s + disc) / 2.0;
    let l2 = (p + s - disc) / 2.0;
    let frob2 = a.iter().map(|v| v.norm_sqr()).sum::<f64>();
    let minor2 = (frob2 - l1.norm_sqr() - l2.norm_sqr()).max(0.0);
    let b_semi = minor2.sqrt() / 2.0;
    let focal = disc.norm() / 2.0;
    let a_semi = (focal * focal + b_semi * b_semi).sqrt();
    ((l1 + l2) / 2.0, disc.arg(), a_semi, b_semi)
}

/// ‖r(A)‖ / sup_{∂W(A)} |r| for a non-normal 2×2 matrix; the two-dimensional
/// bound guarantees this never exceeds 2. Normal matrices (degenerate
/// numerical range) are rejected.
pub fn verify_c2_bound(a: &CMatrix, r: &RationalFunction) -> Result<f64> {
    if a.nrows() != 2 || a.ncols() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "two-dimensional bound needs a 2×2 matrix, got {}×{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let (center, rot, a_semi, b_semi) = elliptical_range(a);
    let scale = a.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
    if b_semi < 1e-9 * scale {
        return Err(Error::InvalidConfig(
            "matrix is normal: its numerical range has empty interior".into(),
        ));
    }
    let axis = Complex64::from_polar(1.0, rot);
    let mut sup = 0.0f64;
    let mut argmax = 0usize;
    let m = 2048;
    for k in 0..m {
        let t = 2.0 * PI * k as f64 / m as f64;
        let z = center + axis * c64(a_semi * t.cos(), b_semi * t.sin());
        let v = r.eval(z).norm();
        if v > sup {
            sup = v;
            argmax = k;
        }
    }
    if sup == 0.0 {
        return Err(Error::InvalidRational(
            "boundary supremum of |r| vanishes".into(),
        ));
    }
    let ratio = linalg::operator_norm(&operator::apply_rational(r, a)?) / sup;
    if ratio > 2.0 + 1e-6 {
        return Err(Error::EstimateViolated {
            index: argmax,
            value: ratio,
            bound: 2.0 + 1e-6,
        });
    }
    Ok(ratio)
}

/// The closed convex hull of the ellipse with the given foci and minor axis
/// (full axis length, not the semi-axis).
pub fn ellipse_from_foci(mu1: Complex64, mu2: Complex64, minor_axis: f64) -> Result<ConvexDomain> {
    if !(minor_axis > 0.0) {
        return Err(Error::InvalidDomain(format!(
            "minor axis must be positive, got {minor_axis}"
        )));
    }
    let center = (mu1 + mu2) / 2.0;
    let focal = (mu2 - mu1).norm() / 2.0;
    let b = minor_axis / 2.0;
    let a = (focal * focal + b * b).sqrt();
    let rotation = if focal > 0.0 { (mu2 - mu1).arg() } else { 0.0 };
    ConvexDomain::ellipse(center, a, b, rotation)
}

/// Checks that a claimed 2×2 dilation is genuine: V is an isometry,
/// A = V*(E ⊗ I)V for E = [[μ₁,γ],[0,μ₂]], and W(A) lies in the closed
/// ellipse with foci μ₁, μ₂ and minor axis γ.
pub fn ellipse_dilation_verify(
    v: &CMatrix,
    mu1: Complex64,
    mu2: Complex64,
    gamma: f64,
    a: &CMatrix,
) -> Result<bool> {
    let n = a.nrows();
    if a.ncols() != n || v.nrows() != 2 * n || v.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "dilation check needs V of size {}×{} for a {}×{} matrix, got {}×{}",
            2 * n,
            n,
            n,
            n,
            v.nrows(),
            v.ncols()
        )));
    }
    let gram_defect = linalg::operator_norm(&(v.adjoint() * v - CMatrix::identity(n, n)));
    if gram_defect > 1e-10 {
        return Err(Error::InvalidConfig(format!(
            "V is not an isometry: ‖V*V − I‖ = {gram_defect:.3e}"
        )));
    }
    let e = m2(mu1, c64(gamma, 0.0), c64(0.0, 0.0), mu2);
    let big = linalg::kronecker(&e, &CMatrix::identity(n, n));
    let recon_defect = linalg::operator_norm(&(v.adjoint() * big * v - a));
    if recon_defect > 1e-8 {
        return Ok(false);
    }
    let ellipse = ellipse_from_foci(mu1, mu2, gamma)?;
    operator::wa_contained(a, &ellipse, -1e-8)
}

/// Residual of the rotation factorisation
/// [[0, 1+cosθ],[1−cosθ, 0]] = R(θ/2)·[[sinθ, 2cosθ],[0, −sinθ]]·R(−θ/2).
pub fn rotation_identity_residual(theta: f64) -> f64 {
    let rot = |phi: f64| {
        m2(
            c64(phi.cos(), 0.0),
            c64(-phi.sin(), 0.0),
            c64(phi.sin(), 0.0),
            c64(phi.cos(), 0.0),
        )
    };
    let lhs = m2(
        c64(0.0, 0.0),
        c64(1.0 + theta.cos(), 0.0),
        c64(1.0 - theta.cos(), 0.0),
        c64(0.0, 0.0),
    );
    let mid = m2(
        c64(theta.sin(), 0.0),
        c64(2.0 * theta.cos(), 0.0),
        c64(0.0, 0.0),
        c64(-theta.sin(), 0.0),
    );
    linalg::operator_norm(&(lhs - rot(theta / 2.0) * mid * rot(-theta / 2.0)))
}

/// ‖P₀⊗I + P₁⊗A‖ / max_{z∈∂E} ‖P₀ + z·P₁‖ for a degree-one polynomial with
/// matrix coefficients; bounded by 2 whenever W(A) lies in the ellipse E.
pub fn degree_one_bound_check(
    a: &CMatrix,
    p0: &CMatrix,
    p1: &CMatrix,
    ellipse: &ConvexDomain,
) -> Result<f64> {
    let m = p0.nrows();
    if p0.ncols() != m || p1.nrows() != m || p1.ncols() != m {
        return Err(Error::DimensionMismatch(
            "coefficients must be square matrices of equal size".into(),
        ));
    }
    if !operator::wa_contained(a, ellipse, 0.0)? {
        return Err(Error::RangeNotContained(
            "degree-one bound needs the numerical range inside the ellipse",
        ));
    }
    let n = a.nrows();
    let eye = CMatrix::identity(n, n);
    let numerator =
        linalg::operator_norm(&(linalg::kronecker(p0, &eye) + linalg::kronecker(p1, a)));
    let samples = ellipse.sample_boundary(720, ellipse.interior_point())?;
    let denominator = samples
        .iter()
        .map(|s| linalg::operator_norm(&(p0 + p1 * s.sigma)))
        .fold(0.0, f64::max);
    if denominator == 0.0 {
        return Err(Error::EmptyInput("zero polynomial"));
    }
    let ratio = numerator / denominator;
    if ratio > 2.0 + 1e-6 {
        return Err(Error::EstimateViolated {
            index: 0,
            value: ratio,
            bound: 2.0 + 1e-6,
        });
    }
    Ok(ratio)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    fn random_2x2(rng: &mut ChaCha8Rng) -> CMatrix {
        use rand_distr::StandardNormal;
        CMatrix::from_fn(2, 2, |_, _| {
            c64(rng.sample(StandardNormal), rng.sample(StandardNormal))
        })
    }

    #[test]
    fn conformal_map_basics() {
        let rho = 2.0;
        assert_eq!(
            conformal_a(c64(0.0, 0.0), rho, 1e-12).unwrap(),
            c64(0.0, 0.0)
        );
        let a1 = conformal_a(c64(1.0, 0.0), rho, 1e-13).unwrap();
        let am1 = conformal_a(c64(-1.0, 0.0), rho, 1e-13).unwrap();
        assert!((a1 + am1).norm() < 1e-14, "odd symmetry at the foci");
        assert_relative_eq!(a1.re, 0.89233695788075729, epsilon = 1e-12);

        // boundary points land on the unit circle
        let (sa, sb) = ((rho + 1.0 / rho) / 2.0, (rho - 1.0 / rho) / 2.0);
        for k in 0..100 {
            let t = TAU * k as f64 / 100.0;
            let z = c64(sa * t.cos(), sb * t.sin());
            let v = conformal_a(z, rho, 1e-12).unwrap();
            assert!((v.norm() - 1.0).abs() < 1e-8, "boundary point {k}");
        }

        // interior points stay strictly inside the disk
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..500 {
            let rad: f64 = rng.gen_range(1.0..rho * 0.9999);
            let t: f64 = rng.gen_range(0.0..TAU);
            let w = Complex64::from_polar(rad, t);
            let z = (w + 1.0 / w) / 2.0;
            assert!(conformal_a(z, rho, 1e-12).unwrap().norm() < 1.0);
        }

        assert!(conformal_a(c64(0.5, 0.0), 0.9, 1e-10).is_err());
        assert!(conformal_a(c64(3.0, 0.0), rho, 1e-10).is_err());
    }

    #[test]
    fn similarity_matches_the_reference_values() {
        let sim = build_similarity(1.5, 1e-12).unwrap();
        assert_relative_eq!(sim.rho, 2.0, epsilon = 1e-14);
        assert_relative_eq!(sim.a1, 0.89233695788075729, epsilon = 1e-11);
        assert_relative_eq!(sim.x, 1.7846739157615146, epsilon = 1e-9);
        assert!(sim.b_norm_defect < 1e-10);
        assert!(sim.quadratic_residual < 1e-9);
        assert!(sim.matrix_map_residual < 1e-9);

        let expected = [
            (0.1, 1.0512492197250393, 1.0512492197250393),
            (0.5, 1.2807764064044151, 1.2805369121577983),
            (3.0, 3.3027756377319946, 1.9670787512892450),
            (10.0, 10.099019513592785, 1.9996155509644133),
        ];
        for &(gamma, rho, x) in &expected {
            let sim = build_similarity(gamma, 1e-12).unwrap();
            assert_relative_eq!(sim.rho, rho, epsilon = 1e-13);
            assert_relative_eq!(sim.x, x, epsilon = 1e-9);
            assert!(1.0 < sim.x && sim.x < 2.0 - 1e-12, "gamma {gamma}");
        }
    }

    #[test]
    fn similarity_trivialises_as_the_ellipse_degenerates() {
        let xs: Vec<f64> = [1e-1, 1e-2, 1e-3]
            .iter()
            .map(|&g| build_similarity(g, 1e-12).unwrap().x)
            .collect();
        assert!(xs[0] > xs[1] && xs[1] > xs[2]);
        assert!(xs[2] - 1.0 < 0.01);
        assert!(build_similarity(0.0, 1e-12).is_err());
    }

    #[test]
    fn canonical_form_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for k in 0..500 {
            let a = random_2x2(&mut rng);
            let form = TwoByTwoCanonicalForm::canonicalize(&a).unwrap();
            let err = linalg::operator_norm(&(form.reconstruct() - &a));
            assert!(err < 1e-10, "trial {k}: residual {err}");
            match form.case {
                CanonicalCase::DistinctEigenvalues { gamma } => assert!(gamma >= 0.0),
                CanonicalCase::EqualEigenvalues { c } => assert!(c >= 0.0),
            }
        }

        // equal-eigenvalue route: a Jordan block off a unitary conjugation
        let a = m2(c64(2.0, 1.0), c64(0.0, 3.0), c64(0.0, 0.0), c64(2.0, 1.0));
        let form = TwoByTwoCanonicalForm::canonicalize(&a).unwrap();
        assert!(matches!(
            form.case,
            CanonicalCase::EqualEigenvalues { c } if (c - 3.0).abs() < 1e-12
        ));
        assert!(linalg::operator_norm(&(form.reconstruct() - &a)) < 1e-12);

        // scalar matrix
        let a = CMatrix::identity(2, 2) * c64(0.5, -0.5);
        let form = TwoByTwoCanonicalForm::canonicalize(&a).unwrap();
        assert!(linalg::operator_norm(&(form.reconstruct() - &a)) < 1e-14);
    }

    #[test]
    fn jordan_block_similarity_saturates_at_two() {
        for (c, kappa) in [(2.0, 2.0), (1.0, 1.0), (1.5, 1.5)] {
            let (s, k) = disk_similarity_jordan(c).unwrap();
            assert_relative_eq!(k, kappa, epsilon = 1e-14);
            let a = m2(c64(0.0, 0.0), c64(c, 0.0), c64(0.0, 0.0), c64(0.0, 0.0));
            let s_inv = s.clone().try_inverse().unwrap();
            let contracted = linalg::operator_norm(&(&s * a * s_inv));
            assert!(contracted <= 1.0 + 1e-14, "c={c}: norm {contracted}");
            if c >= 1.0 {
                assert_relative_eq!(contracted, 1.0f64.min(c), epsilon = 1e-12);
            }
            assert_relative_eq!(linalg::condition_number(&s), kappa, epsilon = 1e-12);
        }
        assert!(disk_similarity_jordan(0.0).is_err());
        assert!(disk_similarity_jordan(2.5).is_err());
    }

    #[test]
    fn two_dimensional_ratio_respects_the_bound() {
        let shift = m2(c64(0.0, 0.0), c64(2.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0));
        let ratio = verify_c2_bound(&shift, &RationalFunction::identity()).unwrap();
        assert_relative_eq!(ratio, 2.0, epsilon = 1e-9);

        let canon = m2(c64(1.0, 0.0), c64(1.5, 0.0), c64(0.0, 0.0), c64(-1.0, 0.0));
        let ratio = verify_c2_bound(&canon, &RationalFunction::constant(c64(1.0, 0.0))).unwrap();
        assert_relative_eq!(ratio, 1.0, epsilon = 1e-12);

        assert!(verify_c2_bound(
            &m2(c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(2.0, 0.0)),
            &RationalFunction::identity()
        )
        .is_err());
    }

    #[test]
    fn randomized_two_dimensional_sweep_stays_below_two() {
        let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
        let mut done = 0usize;
        while done < 500 {
            let a = random_2x2(&mut rng);
            let (center, _, a_semi, _) = elliptical_range(&a);
            let reach = center.norm() + a_semi;
            let degree = rng.gen_range(1..=3usize);
            let mut den = vec![c64(1.0, 0.0)];
            for _ in 0..degree {
                let radius = 2.0 * reach * (1.0 + rng.gen_range(0.1..1.0f64));
                let pole = Complex64::from_polar(radius, rng.gen_range(0.0..TAU));
                let mut next = vec![c64(0.0, 0.0); den.len() + 1];
                for (i, &d) in den.iter().enumerate() {
                    next[i] -= d * pole;
                    next[i + 1] += d;
                }
                den = next;
            }
            let num: Vec<Complex64> = (0..=degree)
                .map(|_| {
                    use rand_distr::StandardNormal;
                    c64(rng.sample(StandardNormal), rng.sample(StandardNormal))
                })
                .collect();
            let r = RationalFunction::new(num, den).unwrap();
            match verify_c2_bound(&a, &r) {
                Ok(ratio) => {
                    assert!(ratio <= 2.0 + 1e-6, "ratio {ratio}");
                    done += 1;
                }
                Err(Error::InvalidConfig(_)) => continue, // normal draw
                Err(e) => panic!("unexpected failure: {e}"),
            }
        }
    }

    #[test]
    fn dilation_check_accepts_the_scalar_sweep() {
        let (mu1, mu2, gamma) = (c64(1.0, 0.0), c64(-1.0, 0.0), 2.0);
        for k in 0..=50 {
            let t = PI * k as f64 / 50.0;
            let v = CMatrix::from_row_slice(2, 1, &[c64(t.cos(), 0.0), c64(t.sin(), 0.0)]);
            let a = v.adjoint()
                * linalg::kronecker(
                    &m2(mu1, c64(gamma, 0.0), c64(0.0, 0.0), mu2),
                    &CMatrix::identity(1, 1),
                )
                * &v;
            assert!(
                ellipse_dilation_verify(&v, mu1, mu2, gamma, &a).unwrap(),
                "angle {t}"
            );
        }

        // focus case: V = (I, 0)ᵀ gives A = μ₁·I
        let n = 2;
        let mut v = CMatrix::zeros(2 * n, n);
        for i in 0..n {
            v[(i, i)] = c64(1.0, 0.0);
        }
        let a = CMatrix::identity(n, n) * mu1;
        assert!(ellipse_dilation_verify(&v, mu1, mu2, gamma, &a).unwrap());

        // a wrong matrix is rejected without erroring
        let bad = CMatrix::identity(n, n) * c64(5.0, 0.0);
        assert!(!ellipse_dilation_verify(&v, mu1, mu2, gamma, &bad).unwrap());

        // non-isometry errors out
        let skewed = &v * c64(1.3, 0.0);
        assert!(ellipse_dilation_verify(&skewed, mu1, mu2, gamma, &a).is_err());
    }

    #[test]
    fn rotation_factorisation_is_exact() {
        for theta in [0.3, 0.7, 1.2] {
            assert!(rotation_identity_residual(theta) < 1e-12, "theta {theta}");
        }
    }

    #[test]
    fn degree_one_polynomials_stay_within_twice_the_sup() {
        let ellipse = ellipse_from_foci(c64(1.0, 0.0), c64(-1.0, 0.0), 1.5).unwrap();
        let a = m2(c64(1.0, 0.0), c64(1.5, 0.0), c64(0.0, 0.0), c64(-1.0, 0.0));

        // P(z) = z: the ratio is ‖A‖ over the semi-major axis 1.25
        let zero1 = CMatrix::zeros(1, 1);
        let one1 = CMatrix::identity(1, 1);
        let ratio = degree_one_bound_check(&a, &zero1, &one1, &ellipse).unwrap();
        assert_relative_eq!(ratio, 2.0 / 1.25, epsilon = 1e-9);

        // constant polynomial
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p0 = random_2x2(&mut rng);
        let zero2 = CMatrix::zeros(2, 2);
        let ratio = degree_one_bound_check(&a, &p0, &zero2, &ellipse).unwrap();
        assert_relative_eq!(ratio, 1.0, epsilon = 1e-12);

        // randomized sweep: dims ≤ 6, coefficient sizes ≤ 3
        use rand_distr::StandardNormal;
        for trial in 0..200 {
            let dim = rng.gen_range(1..=6usize);
            let m = rng.gen_range(1..=3usize);
            let a = operator::random_matrix_in_domain(&ellipse, dim, trial as u64, 1e-3).unwrap();
            let p0 = CMatrix::from_fn(m, m, |_, _| {
                c64(rng.sample(StandardNormal), rng.sample(StandardNormal))
            });
            let p1 = CMatrix::from_fn(m, m, |_, _| {
                c64(rng.sample(StandardNormal), rng.sample(StandardNormal))
            });
            let ratio = degree_one_bound_check(&a, &p0, &p1, &ellipse).unwrap();
            assert!(ratio <= 2.0 + 1e-6, "trial {trial}: ratio {ratio}");
        }
    }
}
