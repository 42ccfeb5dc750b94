//! Dense complex operator kernel: numerical-range support, containment of
//! the numerical range in a convex domain, seeded random operators with
//! prescribed range location, the boundary kernel μ(σ, A) with its integral
//! identity, and the rational functional calculus r(A).

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::f64::consts::{PI, TAU};

use crate::domain::{BoundarySample, ConvexDomain};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::quad;
use crate::rational::RationalFunction;

/// h_A(t) = λ_max((e^{−it}A + e^{it}A*)/2), the support function of W(A).
pub fn support_at(a: &CMatrix, t: f64) -> Result<f64> {
    let rotated = a * Complex64::from_polar(1.0, -t);
    linalg::hermitian_max_eigenvalue(&hermitian_part(&rotated))
}

fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Support values of the numerical range at the requested angles.
pub fn numerical_range_support(a: &CMatrix, angles: &[f64]) -> Result<Vec<f64>> {
    angles.iter().map(|&t| support_at(a, t)).collect()
}

/// max_t h_A(t): a 720-angle scan locates the best direction, then a
/// golden-section pass sharpens it to machine precision.
pub fn numerical_radius(a: &CMatrix) -> Result<f64> {
    let mut w = f64::NEG_INFINITY;
    let mut best = 0usize;
    for k in 0..720 {
        let h = support_at(a, TAU * k as f64 / 720.0)?;
        if h > w {
            w = h;
            best = k;
        }
    }
    let step = TAU / 720.0;
    let center = step * best as f64;
    let refined = crate::optim::golden_max(
        |t| support_at(a, t).unwrap_or(f64::NEG_INFINITY),
        center - step,
        center + step,
    );
    Ok(w.max(refined))
}

/// Directions in which a support comparison is exact (sufficient and
/// necessary) for W(A) ⊂ Ω: polygon edge normals, sector edge normals, the
/// half-plane normal. Smooth bounded kinds need a dense grid instead.
fn exact_support_directions(domain: &ConvexDomain) -> Option<Vec<f64>> {
    match domain {
        ConvexDomain::Polygon { vertices } => {
            let n = vertices.len();
            Some(
                (0..n)
                    .map(|i| (vertices[(i + 1) % n] - vertices[i]).arg() - PI / 2.0)
                    .collect(),
            )
        }
        ConvexDomain::Sector {
            bisector,
            half_angle,
            ..
        } => Some(vec![
            bisector + half_angle + PI / 2.0,
            bisector - half_angle - PI / 2.0,
        ]),
        ConvexDomain::HalfPlane { inward_normal, .. } => Some(vec![inward_normal + PI]),
        _ => None,
    }
}

/// Whether W(A) lies in the margin-eroded domain. Exact for polygons,
/// sectors and half-planes; disks and ellipses use a 720-direction grid,
/// doubled once when the smallest slack falls below 10× the margin.
pub fn wa_contained(a: &CMatrix, domain: &ConvexDomain, margin: f64) -> Result<bool> {
    // equality tolerance so that W(A) touching ∂Ω passes at margin 0
    let eq_tol = |h: f64, w: f64| 1e-12 * (1.0 + h.abs() + w.abs());
    if let Some(directions) = exact_support_directions(domain) {
        for t in directions {
            let h_domain = domain.support_function(t)?;
            let h_a = support_at(a, t)?;
            if h_a > h_domain - margin + eq_tol(h_domain, h_a) {
                return Ok(false);
            }
        }
        return Ok(true);
    }
    let mut grid = 720usize;
    loop {
        let mut min_slack = f64::INFINITY;
        for k in 0..grid {
            let t = TAU * k as f64 / grid as f64;
            let h_domain = domain.support_function(t)?;
            let h_a = support_at(a, t)?;
            let slack = h_domain - margin - h_a;
            if slack + eq_tol(h_domain, h_a) < 0.0 {
                return Ok(false);
            }
            min_slack = min_slack.min(slack);
        }
        if min_slack >= 10.0 * margin || grid >= 2880 {
            return Ok(true);
        }
        grid *= 2;
    }
}

fn ginibre(dim: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    CMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    })
}

/// Largest ρ with disk(anchor, ρ) inside the margin-eroded domain,
/// estimated over a dense direction grid with a small safety factor.
fn anchored_disk_radius(domain: &ConvexDomain, anchor: Complex64, margin: f64) -> Result<f64> {
    let mut rho = f64::INFINITY;
    for k in 0..1440 {
        let t = TAU * k as f64 / 1440.0;
        let slack = domain.support_function(t)? - (Complex64::from_polar(1.0, -t) * anchor).re;
        rho = rho.min(slack);
    }
    let safe = 0.995 * rho - 1.05 * margin;
    if safe <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "margin {margin} leaves no room inside the domain"
        )));
    }
    Ok(safe)
}

/// Deterministic random operator with W(A) inside the margin-eroded domain,
/// anchored at the given interior point (bounded domains) or pushed along
/// the bisector (sectors). Centering the Ginibre sample by its mean
/// eigenvalue keeps the shrink factor reasonable.
pub fn random_matrix_anchored(
    domain: &ConvexDomain,
    dim: usize,
    seed: u64,
    margin: f64,
    anchor: Complex64,
) -> Result<CMatrix> {
    assert!(dim >= 1);
    assert!(
        margin > 0.0,
        "a positive margin keeps trials off the boundary"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = ginibre(dim, &mut rng);
    let mean = g.diagonal().iter().sum::<Complex64>() / dim as f64;
    let centered = &g - CMatrix::identity(dim, dim) * mean;
    let radius = numerical_radius(&centered)? / (PI / 720.0).cos(); // grid-gap correction

    match domain {
        ConvexDomain::Sector {
            vertex,
            bisector,
            half_angle,
        } => {
            let dir = Complex64::from_polar(1.0, *bisector);
            let mut shift = (radius * 1.002 + 1.05 * margin) / half_angle.sin();
            for _ in 0..64 {
                let a = &centered + CMatrix::identity(dim, dim) * (vertex + dir * shift);
                if wa_contained(&a, domain, margin)? {
                    return Ok(a);
                }
                shift *= 2.0;
            }
            Err(Error::AccuracyNotMet {
                context: "sector shift search".into(),
                estimate: shift,
                tolerance: margin,
            })
        }
        ConvexDomain::HalfPlane {
            point,
            inward_normal,
        } => {
            let dir = Complex64::from_polar(1.0, *inward_normal);
            let mut shift = radius * 1.002 + 1.05 * margin;
            for _ in 0..64 {
                let a = &centered + CMatrix::identity(dim, dim) * (point + dir * shift);
                if wa_contained(&a, domain, margin)? {
                    return Ok(a);
                }
                shift *= 2.0;
            }
            Err(Error::AccuracyNotMet {
                context: "half-plane shift search".into(),
                estimate: shift,
                tolerance: margin,
            })
        }
        _ => {
            let rho = anchored_disk_radius(domain, anchor, margin)?;
            let mut scale = if radius > 0.0 { rho / radius } else { 0.0 };
            for _ in 0..64 {
                let a =
                    &centered * Complex64::new(scale, 0.0) + CMatrix::identity(dim, dim) * anchor;
                if wa_contained(&a, domain, margin)? {
                    return Ok(a);
                }
                scale *= 0.98;
            }
            Err(Error::AccuracyNotMet {
                context: "anchored shrink search".into(),
                estimate: scale,
                tolerance: margin,
            })
        }
    }
}

/// As [`random_matrix_anchored`], anchoring bounded domains at the TV
/// center (recomputed here; batch callers cache it and call the anchored
/// variant directly).
pub fn random_matrix_in_domain(
    domain: &ConvexDomain,
    dim: usize,
    seed: u64,
    margin: f64,
) -> Result<CMatrix> {
    let anchor = if domain.is_bounded() {
        domain.optimal_tv_center()?.0
    } else {
        domain.interior_point()
    };
    random_matrix_anchored(domain, dim, seed, margin, anchor)
}

/// μ(σ, A) = (1/2π)(ν(σ−A)^{−1} + ν̄(σ̄−A*)^{−1}), Hermitian by
/// construction (the second term is the adjoint of the first).
pub fn mu_matrix(sample: &BoundarySample, a: &CMatrix) -> Result<CMatrix> {
    mu_at(sample.sigma, sample.nu, a)
}

pub(crate) fn mu_at(sigma: Complex64, nu: Complex64, a: &CMatrix) -> Result<CMatrix> {
    let dim = a.nrows();
    let shifted = CMatrix::identity(dim, dim) * sigma - a;
    let inv = shifted
        .lu()
        .try_inverse()
        .ok_or(Error::SingularSystem("σ lies in the spectrum of A"))?;
    let m = inv * nu;
    let sym = (&m + m.adjoint()) * Complex64::new(0.5 / PI, 0.0);
    Ok((&sym + sym.adjoint()) * Complex64::new(0.5, 0.0))
}

/// ‖∫_{∂Ω} μ(σ,A) ds − c·I‖ where c is 2 for bounded domains, 2 − 2α/π for
/// sectors (tail-corrected beyond the truncation radius) and 1 for
/// half-planes. Smooth boundaries use the n-point periodic trapezoid rule;
/// polygon edges and sector rays use adaptive panels.
pub fn mu_boundary_integral(
    a: &CMatrix,
    domain: &ConvexDomain,
    n: usize,
    truncation: Option<f64>,
) -> Result<f64> {
    if !wa_contained(a, domain, 0.0)? {
        return Err(Error::RangeNotContained(
            "μ integral needs W(A) inside the domain",
        ));
    }
    let dim = a.nrows();
    let eye = CMatrix::identity(dim, dim);
    match domain {
        d if d.is_smooth() => {
            let integrand = |t: f64| -> Result<CMatrix> {
                let v = d.param_velocity(t);
                let speed = v.norm();
                let nu = -Complex64::i() * v / speed;
                Ok(mu_at(d.param_point(t), nu, a)? * Complex64::new(speed, 0.0))
            };
            // periodic trapezoid at the requested resolution
            let mut acc = CMatrix::zeros(dim, dim);
            for k in 0..n {
                acc += integrand(TAU * k as f64 / n as f64)?;
            }
            acc *= Complex64::new(TAU / n as f64, 0.0);
            Ok(linalg::operator_norm(
                &(acc - eye * Complex64::new(2.0, 0.0)),
            ))
        }
        ConvexDomain::Polygon { .. } => {
            let edges = domain.edges().expect("polygon");
            let mut acc = CMatrix::zeros(dim, dim);
            for (start, end) in edges {
                let e = end - start;
                let len = e.norm();
                let dir = e / len;
                let nu = -Complex64::i() * dir;
                let f = |s: f64| {
                    mu_at(start + dir * s, nu, a).expect("resolvent regular on the boundary")
                };
                acc += quad::adaptive(&f, 0.0, len, 1e-10, "polygon μ edge")?;
            }
            Ok(linalg::operator_norm(
                &(acc - eye * Complex64::new(2.0, 0.0)),
            ))
        }
        ConvexDomain::Sector {
            vertex,
            bisector,
            half_angle,
        } => {
            let big_r = truncation.ok_or(Error::UnboundedDomain(
                "sector μ integral needs a truncation radius",
            ))?;
            let mut acc = CMatrix::zeros(dim, dim);
            for (edge_angle, nu_sign) in
                [(bisector + half_angle, 1.0), (bisector - half_angle, -1.0)]
            {
                let u = Complex64::from_polar(1.0, edge_angle);
                let nu = Complex64::i() * u * nu_sign;
                let f = |t: f64| {
                    mu_at(vertex + u * t, nu, a).expect("resolvent regular on the boundary")
                };
                acc += quad::adaptive(&f, 0.0, big_r, 1e-10, "sector μ ray")?;
                acc += ray_tail(a, *vertex, u, nu, big_r);
            }
            let c = 2.0 - 2.0 * half_angle / PI;
            Ok(linalg::operator_norm(&(acc - eye * Complex64::new(c, 0.0))))
        }
        ConvexDomain::HalfPlane {
            point,
            inward_normal,
        } => {
            let big_r = truncation.ok_or(Error::UnboundedDomain(
                "half-plane μ integral needs a truncation radius",
            ))?;
            let dir = Complex64::from_polar(1.0, inward_normal - PI / 2.0);
            let nu = -Complex64::from_polar(1.0, *inward_normal);
            let f =
                |s: f64| mu_at(point + dir * s, nu, a).expect("resolvent regular on the boundary");
            let mut acc: CMatrix = quad::adaptive(&f, -big_r, big_r, 1e-10, "half-plane μ line")?;
            acc += ray_tail(a, *point, dir, nu, big_r);
            acc += ray_tail(a, *point, -dir, nu, big_r);
            Ok(linalg::operator_norm(&(acc - eye)))
        }
        _ => unreachable!(),
    }
}

/// ∫_R^∞ μ(p + t·u, A) dt in closed form up to O((‖A‖/R)⁴): the two
/// logarithmic antiderivatives cancel at infinity because ν/u = ±i.
fn ray_tail(a: &CMatrix, p: Complex64, u: Complex64, nu: Complex64, big_r: f64) -> CMatrix {
    let dim = a.nrows();
    let eye = CMatrix::identity(dim, dim);
    let n_factor = nu / u; // ±i on sector/half-plane edges
    let b = (&eye * p - a) / u;
    let c = (&eye * p.conj() - a.adjoint()) / u.conj();
    let log_series = |x: &CMatrix| -> CMatrix {
        // log(I + X) ≈ X − X²/2 + X³/3 for ‖X‖ ~ ‖A‖/R ≪ 1
        let x2 = x * x;
        let x3 = &x2 * x;
        x - x2 * Complex64::new(0.5, 0.0) + x3 * Complex64::new(1.0 / 3.0, 0.0)
    };
    let scale = Complex64::new(1.0 / big_r, 0.0);
    let diff = log_series(&(&b * scale)) * n_factor + log_series(&(&c * scale)) * n_factor.conj();
    -diff * Complex64::new(0.5 / PI, 0.0)
}

fn matrix_horner(coeffs: &[Complex64], a: &CMatrix) -> CMatrix {
    let dim = a.nrows();
    let mut acc = CMatrix::zeros(dim, dim);
    for &c in coeffs.iter().rev() {
        acc = &acc * a + CMatrix::identity(dim, dim) * c;
    }
    acc
}

/// r(A) = p(A)·q(A)^{−1}. Poles strictly inside W(A) are rejected up
/// front; poles on the boundary are left to the conditioning gate of the
/// linear solve.
pub fn apply_rational(r: &RationalFunction, a: &CMatrix) -> Result<CMatrix> {
    for &pole in r.poles() {
        let mut strictly_inside = true;
        for k in 0..720 {
            let t = TAU * k as f64 / 720.0;
            let h = support_at(a, t)?;
            let reach = (Complex64::from_polar(1.0, -t) * pole).re;
            if reach >= h - 1e-12 * (1.0 + h.abs() + reach.abs()) {
                strictly_inside = false;
                break;
            }
        }
        if strictly_inside {
            return Err(Error::PoleInsideDomain(pole.re, pole.im));
        }
    }
    let p = matrix_horner(r.numerator(), a);
    let q = matrix_horner(r.denominator(), a);
    linalg::right_divide(&p, &q, 1e12)
}

/// Entrywise application of a matrix of rational functions: block (i, j)
/// of the result is r_ij(A).
pub fn apply_matrix_rational(entries: &[Vec<RationalFunction>], a: &CMatrix) -> Result<CMatrix> {
    if entries.is_empty() || entries[0].is_empty() {
        return Err(Error::EmptyInput(
            "matrix rational needs at least one entry",
        ));
    }
    let cols = entries[0].len();
    if entries.iter().any(|row| row.len() != cols) {
        return Err(Error::DimensionMismatch(
            "ragged matrix of rationals".into(),
        ));
    }
    let dim = a.nrows();
    let mut out = CMatrix::zeros(entries.len() * dim, cols * dim);
    for (i, row) in entries.iter().enumerate() {
        for (j, r) in row.iter().enumerate() {
            let block = apply_rational(r, a)?;
            out.view_mut((i * dim, j * dim), (dim, dim))
                .copy_from(&block);
        }
    }
    Ok(out)
}
