//! Nyström discretisation of the boundary double layer operator P and the
//! Carl Neumann problem (I + P)g = 2r, with empirical estimates of the
//! constants C_N (sup of ‖g‖) and D_N (sup of the oscillation of g/2).

use nalgebra::{DMatrix, DVector, Dyn};
use num_complex::Complex64;
use once_cell::sync::OnceCell;
use std::f64::consts::PI;
use std::io::Write;

use crate::domain::{BoundarySample, ConvexDomain};
use crate::error::{Error, Result};
use crate::optim;
use crate::rational::RationalFunction;

/// The double layer kernel (1/π)·∂arg(σ − z)/∂s = (1/π)·Im(T/(σ − z)) for
/// a boundary point σ with unit tangent T, evaluated at observation z.
fn layer_kernel(sigma: Complex64, tangent: Complex64, z: Complex64) -> f64 {
    (tangent / (sigma - z)).im / PI
}

pub struct NeumannSystem {
    domain: ConvexDomain,
    samples: Vec<BoundarySample>,
    p: DMatrix<f64>,
    factor: OnceCell<nalgebra::LU<f64, Dyn, Dyn>>,
}

impl NeumannSystem {
    /// Discretise P on `n` boundary nodes. Smooth boundaries use the
    /// Nyström rule with the curvature limit κ/(2π) on the diagonal;
    /// polygons use the exact angle subtended by each node cell, which is
    /// identically zero for cells on the same edge as the observation
    /// point and makes every row sum exactly 1.
    pub fn assemble(domain: &ConvexDomain, n: usize) -> Result<Self> {
        if !domain.is_bounded() {
            return Err(Error::UnboundedDomain(
                "Neumann assembly needs a bounded domain; sectors have closed-form bounds",
            ));
        }
        let samples = domain.sample_boundary(n, domain.interior_point())?;
        let n = samples.len();
        let mut p = DMatrix::<f64>::zeros(n, n);
        if let ConvexDomain::Polygon { .. } = domain {
            // exact product integration: entry = (1/π)·angle subtended by
            // cell j at node i; cells sit strictly inside their edges
            let cells: Vec<(Complex64, Complex64)> = samples
                .iter()
                .map(|s| {
                    let t = Complex64::from_polar(1.0, s.theta);
                    (
                        s.sigma - t * (s.weight / 2.0),
                        s.sigma + t * (s.weight / 2.0),
                    )
                })
                .collect();
            for i in 0..n {
                let z = samples[i].sigma;
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    let (a, b) = cells[j];
                    p[(i, j)] = ((b - z) / (a - z)).arg() / PI;
                }
            }
        } else {
            for i in 0..n {
                let z = samples[i].sigma;
                for j in 0..n {
                    p[(i, j)] = if i == j {
                        samples[i].curvature / (2.0 * PI) * samples[i].weight
                    } else {
                        let t = Complex64::from_polar(1.0, samples[j].theta);
                        layer_kernel(samples[j].sigma, t, z) * samples[j].weight
                    };
                }
            }
        }
        Ok(NeumannSystem {
            domain: domain.clone(),
            samples,
            p,
            factor: OnceCell::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[BoundarySample] {
        &self.samples
    }

    pub fn p_matrix(&self) -> &DMatrix<f64> {
        &self.p
    }

    /// max_i |Σ_j P_ij − 1|; the discrete trace of P·1 = 1.
    pub fn row_sum_defect(&self) -> f64 {
        (0..self.len())
            .map(|i| (self.p.row(i).sum() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// ‖P‖_∞ as max absolute row sum; ≤ 1 for convex domains because the
    /// kernel is nonnegative and P·1 = 1.
    pub fn p_inf_norm(&self) -> f64 {
        (0..self.len())
            .map(|i| self.p.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    fn factorization(&self) -> Result<&nalgebra::LU<f64, Dyn, Dyn>> {
        let lu = self.factor.get_or_init(|| {
            let n = self.len();
            (DMatrix::<f64>::identity(n, n) + &self.p).lu()
        });
        if lu.determinant().abs() < f64::MIN_POSITIVE {
            return Err(Error::SingularSystem("I + P factorisation"));
        }
        Ok(lu)
    }

    /// Crude ∞-norm condition estimate of I + P from a handful of solves.
    pub fn condition_estimate(&self) -> Result<f64> {
        let n = self.len();
        let lu = self.factorization()?;
        let norm = 1.0 + self.p_inf_norm();
        let mut inv_norm = 0.0f64;
        let mut state = 0x243f6a8885a308d3u64;
        for _ in 0..4 {
            let v = DVector::<f64>::from_fn(n, |_, _| {
                // xorshift64* sign pattern: cheap, deterministic
                state ^= state >> 12;
                state ^= state << 25;
                state ^= state >> 27;
                if state.wrapping_mul(0x2545f4914f6cdd1d) >> 63 == 0 {
                    1.0
                } else {
                    -1.0
                }
            });
            let x = lu.solve(&v).ok_or(Error::SingularSystem("I + P solve"))?;
            inv_norm = inv_norm.max(x.amax());
        }
        Ok(norm * inv_norm)
    }

    /// Solve (I + P)g = 2r for complex boundary data; the real system is
    /// applied to real and imaginary parts separately. The solve is
    /// rejected if the backward residual exceeds 1e−10.
    pub fn solve(&self, r_values: &[Complex64]) -> Result<Vec<Complex64>> {
        if r_values.len() != self.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} boundary values on a {}-node system",
                r_values.len(),
                self.len()
            )));
        }
        let lu = self.factorization()?;
        let re = DVector::from_iterator(self.len(), r_values.iter().map(|v| 2.0 * v.re));
        let im = DVector::from_iterator(self.len(), r_values.iter().map(|v| 2.0 * v.im));
        let g_re = lu.solve(&re).ok_or(Error::SingularSystem("I + P solve"))?;
        let g_im = lu.solve(&im).ok_or(Error::SingularSystem("I + P solve"))?;
        let scale = r_values.iter().map(|v| v.norm()).fold(1.0, f64::max);
        let res_re =
            ((DMatrix::<f64>::identity(self.len(), self.len()) + &self.p) * &g_re - &re).amax();
        let res_im =
            ((DMatrix::<f64>::identity(self.len(), self.len()) + &self.p) * &g_im - &im).amax();
        let residual = res_re.max(res_im) / (2.0 * scale);
        if residual > 1e-10 {
            return Err(Error::AccuracyNotMet {
                context: "Neumann solve residual".into(),
                estimate: residual,
                tolerance: 1e-10,
            });
        }
        Ok((0..self.len())
            .map(|i| Complex64::new(g_re[i], g_im[i]))
            .collect())
    }

    /// Interior reconstruction (1/2)Σ g_j μ(σ_j, z) w_j of the datum r(z).
    pub fn reconstruct(&self, g: &[Complex64], z: Complex64) -> Complex64 {
        self.samples
            .iter()
            .zip(g)
            .map(|(s, &gj)| {
                let t = Complex64::from_polar(1.0, s.theta);
                gj * (layer_kernel(s.sigma, t, z) * s.weight / 2.0)
            })
            .sum()
    }

    /// Nyström extension of a solved g to an arbitrary boundary point:
    /// g(z) = 2r(z) − Σ_j K(z, σ_j) g_j w_j from the continuous equation.
    /// Points that (nearly) coincide with a node take the nodal value —
    /// the kernel evaluation there is pure cancellation noise.
    fn extend(&self, g: &[Complex64], r_at: Complex64, z: Complex64) -> Complex64 {
        let snap = 1e-7 * self.domain.scale_length();
        let mut correction = Complex64::new(0.0, 0.0);
        for (s, &gj) in self.samples.iter().zip(g) {
            if (s.sigma - z).norm() < snap {
                return gj;
            }
            let t = Complex64::from_polar(1.0, s.theta);
            correction += gj * (layer_kernel(s.sigma, t, z) * s.weight);
        }
        2.0 * r_at - correction
    }

    /// Binary dump of the P matrix, row-major little-endian f64, for
    /// regression comparisons.
    pub fn write_p_binary<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        for i in 0..self.len() {
            for j in 0..self.len() {
                out.write_all(&self.p[(i, j)].to_le_bytes())?;
            }
        }
        Ok(())
    }
}

/// Empirical (lower) estimates of C_N and D_N from a family of rational
/// functions: each member is normalised to sup 1 on 8192 boundary points,
/// solved on an `n`-node system, Nyström-extended back to the fine grid,
/// and scored by ‖g‖_∞ and by the smallest circle enclosing the values of
/// g/2 (whose diameter is the oscillation entering D_N).
pub fn estimate_cn(
    domain: &ConvexDomain,
    family: &[RationalFunction],
    n: usize,
) -> Result<(f64, f64)> {
    if family.is_empty() {
        return Err(Error::EmptyInput("estimate_cn needs a nonempty family"));
    }
    let system = NeumannSystem::assemble(domain, n)?;
    let fine = domain.sample_boundary(8192, domain.interior_point())?;
    let mut c_n_est = 0.0f64;
    let mut d_n_est = 0.0f64;
    for member in family {
        // the scores only bound C_N/D_N from below when the member is
        // holomorphic on the closed domain
        for &pole in member.poles() {
            if domain.contains(pole, 0.0) {
                return Err(Error::PoleInsideDomain(pole.re, pole.im));
            }
        }
        let sup = member.sup_over(fine.iter().map(|s| s.sigma));
        if sup <= 0.0 {
            continue;
        }
        let scaled = member.scale(Complex64::new(1.0 / sup, 0.0));
        let data: Vec<Complex64> = system
            .samples()
            .iter()
            .map(|s| scaled.eval(s.sigma))
            .collect();
        let g = system.solve(&data)?;
        let mut values = Vec::with_capacity(fine.len());
        for s in &fine {
            values.push(system.extend(&g, scaled.eval(s.sigma), s.sigma));
        }
        let sup_g = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let half: Vec<Complex64> = values.iter().map(|v| v / 2.0).collect();
        let circle = optim::smallest_enclosing_circle(&half);
        c_n_est = c_n_est.max(sup_g);
        d_n_est = d_n_est.max(2.0 * circle.radius);
    }
    Ok((c_n_est, d_n_est))
}

/// ‖P·(σ^k samples)‖_∞ on the unit disk, doubling the resolution from 512
/// until the defect is below 1e−8. The monomials are the powers of the
/// lemniscate map z ↦ z, and P annihilates every positive power.
pub fn lemniscate_projection_check(k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidConfig("power k must be ≥ 1".into()));
    }
    let disk = ConvexDomain::disk(Complex64::new(0.0, 0.0), 1.0)?;
    let mut n = 512;
    loop {
        let system = NeumannSystem::assemble(&disk, n)?;
        let data_re = DVector::<f64>::from_iterator(
            system.len(),
            system.samples().iter().map(|s| s.sigma.powu(k as u32).re),
        );
        let data_im = DVector::<f64>::from_iterator(
            system.len(),
            system.samples().iter().map(|s| s.sigma.powu(k as u32).im),
        );
        let defect = (system.p_matrix() * data_re)
            .amax()
            .max((system.p_matrix() * data_im).amax());
        if defect < 1e-8 || n >= 4096 {
            return Ok(defect);
        }
        n *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unit_disk() -> ConvexDomain {
        ConvexDomain::disk(c(0.0, 0.0), 1.0).unwrap()
    }

    #[test]
    fn disk_projects_harmonic_data_to_the_center_value() {
        let system = NeumannSystem::assemble(&unit_disk(), 256).unwrap();
        // P applied to Re σ gives the value at the center, i.e. 0
        let data = DVector::<f64>::from_iterator(
            system.len(),
            system.samples().iter().map(|s| s.sigma.re),
        );
        assert!((system.p_matrix() * data).amax() < 1e-10);
        // P·1 = 1
        let ones = DVector::<f64>::from_element(system.len(), 1.0);
        assert!(((system.p_matrix() * ones).add_scalar(-1.0)).amax() < 1e-10);
    }

    #[test]
    fn square_rows_sum_to_one_exactly() {
        let square =
            ConvexDomain::polygon(vec![c(1.0, -1.0), c(1.0, 1.0), c(-1.0, 1.0), c(-1.0, -1.0)])
                .unwrap();
        let system = NeumannSystem::assemble(&square, 400).unwrap();
        assert_eq!(system.len(), 400);
        assert!(system.row_sum_defect() < 1e-8);
        assert!(system.p_inf_norm() <= 1.0 + 1e-8);
    }

    #[test]
    fn kernel_positivity_gives_unit_operator_norm() {
        let domains = [
            unit_disk(),
            ConvexDomain::ellipse(c(0.5, -0.2), 2.0, 1.0, 0.4).unwrap(),
            ConvexDomain::polygon(vec![
                c(2.0, 0.0),
                c(0.7, 1.9),
                c(-1.6, 1.2),
                c(-1.6, -1.2),
                c(0.7, -1.9),
            ])
            .unwrap(),
        ];
        for domain in &domains {
            let system = NeumannSystem::assemble(domain, 200).unwrap();
            assert!(
                system.p_inf_norm() <= 1.0 + 1e-8,
                "{} norm {}",
                domain.kind_name(),
                system.p_inf_norm()
            );
            assert!(system.row_sum_defect() < 1e-8, "{}", domain.kind_name());
            assert!(system.condition_estimate().unwrap() < 1e6);
        }
    }

    #[test]
    fn disk_solves_match_the_closed_form() {
        let system = NeumannSystem::assemble(&unit_disk(), 256).unwrap();
        // r ≡ 1 → g ≡ 1
        let ones = vec![c(1.0, 0.0); system.len()];
        let g = system.solve(&ones).unwrap();
        assert!(g.iter().all(|v| (v - c(1.0, 0.0)).norm() < 1e-10));

        // r(z) = z → g = 2σ, reconstruction hits r at interior points
        let data: Vec<Complex64> = system.samples().iter().map(|s| s.sigma).collect();
        let g = system.solve(&data).unwrap();
        for (s, gj) in system.samples().iter().zip(&g) {
            assert!((gj - 2.0 * s.sigma).norm() < 1e-8);
        }
        for z in [c(0.3, 0.1), c(-0.4, 0.2), c(0.0, 0.0)] {
            assert!((system.reconstruct(&g, z) - z).norm() < 1e-6);
        }

        // 20 random Möbius data sets against g = 2r − r(0)
        let mut rng = ChaCha8Rng::seed_from_u64(991);
        for _ in 0..20 {
            let rho: f64 = rng.gen_range(0.0..0.8);
            let phi: f64 = rng.gen_range(0.0..TAU);
            let pole = Complex64::from_polar(rho, phi);
            let r = RationalFunction::mobius(pole);
            let data: Vec<Complex64> = system.samples().iter().map(|s| r.eval(s.sigma)).collect();
            let g = system.solve(&data).unwrap();
            let center_value = r.eval(c(0.0, 0.0));
            for (d, gj) in data.iter().zip(&g) {
                assert!((gj - (2.0 * d - center_value)).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn ellipse_reconstruction_at_interior_probes() {
        let ellipse = ConvexDomain::ellipse(c(0.0, 0.0), 2.0, 1.0, 0.0).unwrap();
        let system = NeumannSystem::assemble(&ellipse, 512).unwrap();
        let r = RationalFunction::new(vec![c(1.0, 0.0)], vec![c(-5.0, 0.0), c(1.0, 0.0)]).unwrap();
        let data: Vec<Complex64> = system.samples().iter().map(|s| r.eval(s.sigma)).collect();
        let g = system.solve(&data).unwrap();
        for k in 0..10 {
            let t = TAU * k as f64 / 10.0;
            let z = c(1.2 * t.cos(), 0.55 * t.sin());
            assert!(
                (system.reconstruct(&g, z) - r.eval(z)).norm() < 1e-6,
                "probe {z}"
            );
        }
    }

    #[test]
    fn moebius_family_estimates_approach_the_disk_constants() {
        let family: Vec<RationalFunction> = [0.9, 0.99, 0.995]
            .iter()
            .map(|&rho| RationalFunction::mobius(c(rho, 0.0)))
            .collect();
        let (c_n, d_n) = estimate_cn(&unit_disk(), &family, 2048).unwrap();
        assert!((c_n - 2.995).abs() < 0.03, "c_n {c_n}");
        assert!((d_n - 2.0).abs() < 0.02, "d_n {d_n}");
        assert!(c_n <= 3.0 + 1e-6);

        let constant = vec![RationalFunction::constant(c(1.0, 0.0))];
        let (c_n, d_n) = estimate_cn(&unit_disk(), &constant, 256).unwrap();
        assert_relative_eq!(c_n, 1.0, epsilon = 1e-9);
        assert!(d_n < 1e-9);

        assert!(matches!(
            estimate_cn(&unit_disk(), &[], 256),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn powers_are_annihilated_on_the_disk() {
        for k in [1usize, 3, 8] {
            let defect = lemniscate_projection_check(k).unwrap();
            assert!(defect < 1e-8, "k={k} defect {defect}");
        }
    }

    #[test]
    fn binary_export_round_trips() {
        let system = NeumannSystem::assemble(&unit_disk(), 32).unwrap();
        let mut buf = Vec::new();
        system.write_p_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 32 * 32 * 8);
        let first = f64::from_le_bytes(buf[0..8].try_into().unwrap());
        assert_relative_eq!(first, system.p_matrix()[(0, 0)]);
    }

    #[test]
    fn unbounded_domains_are_rejected() {
        let sector = ConvexDomain::sector(c(0.0, 0.0), 0.0, PI / 4.0).unwrap();
        assert!(matches!(
            NeumannSystem::assemble(&sector, 128),
            Err(Error::UnboundedDomain(_))
        ));
    }
}
