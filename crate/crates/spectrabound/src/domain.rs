//! Convex planar domains: disks, ellipses, convex polygons, sectors and
//! half-planes, with boundary sampling and the geometric functionals
//! (perimeter, diameter, curvature radius, flatness, total variation of
//! log-distance) that feed the spectral-constant bounds.
//!
//! All domains are open and immutable. Angles are radians; complex numbers
//! cross the wire as `[re, im]` pairs.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::optim::nelder_mead;
use crate::quad;

/// Serde adapters for the `[re, im]` wire format of complex scalars.
pub mod cpx {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Complex64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(Complex64::new(re, im))
    }

    /// Same pair format for vectors.
    pub mod vec {
        use super::*;

        pub fn serialize<S: Serializer>(
            v: &[Complex64],
            s: S,
        ) -> std::result::Result<S::Ok, S::Error> {
            v.iter()
                .map(|z| [z.re, z.im])
                .collect::<Vec<_>>()
                .serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> std::result::Result<Vec<Complex64>, D::Error> {
            let raw = Vec::<[f64; 2]>::deserialize(d)?;
            Ok(raw
                .into_iter()
                .map(|[re, im]| Complex64::new(re, im))
                .collect())
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConvexDomain {
    Disk {
        #[serde(with = "cpx")]
        center: Complex64,
        radius: f64,
    },
    /// Semi-axes satisfy `semi_major ≥ semi_minor > 0`; `rotation` turns the
    /// major axis away from the real direction.
    Ellipse {
        #[serde(with = "cpx")]
        center: Complex64,
        semi_major: f64,
        semi_minor: f64,
        #[serde(default)]
        rotation: f64,
    },
    /// Strictly convex, counterclockwise vertex list.
    Polygon {
        #[serde(with = "cpx::vec")]
        vertices: Vec<Complex64>,
    },
    /// Open sector of half-opening `half_angle` ∈ (0, π/2] about the
    /// `bisector` direction.
    Sector {
        #[serde(with = "cpx")]
        vertex: Complex64,
        #[serde(default)]
        bisector: f64,
        half_angle: f64,
    },
    /// Open half-plane; `inward_normal` points from the boundary line into
    /// the domain.
    HalfPlane {
        #[serde(with = "cpx")]
        point: Complex64,
        inward_normal: f64,
    },
}

/// One boundary node of a counterclockwise traversal.
#[derive(Clone, Debug)]
pub struct BoundarySample {
    /// Arclength from the traversal start.
    pub s: f64,
    /// Position σ on ∂Ω.
    pub sigma: Complex64,
    /// Tangent direction angle, unwrapped so it increases along the traversal.
    pub theta: f64,
    /// Unit outward normal ν = (1/i)·dσ/ds.
    pub nu: Complex64,
    /// arg(σ − ω) relative to the reference interior point, unwrapped.
    pub phi: f64,
    /// Quadrature weight (length units).
    pub weight: f64,
    /// Boundary curvature at σ (0 on straight pieces).
    pub curvature: f64,
}

/// Geometric functionals of a bounded domain.
#[derive(Clone, Debug, Serialize)]
pub struct DomainMetrics {
    pub perimeter: f64,
    pub diameter: f64,
    pub area: f64,
    /// Maximal radius of curvature; +∞ for polygons.
    pub max_curvature_radius: f64,
    /// Flatness: min over interior ω of (max |σ−ω|)/(min |σ−ω|).
    pub tau: f64,
    /// Minimal total variation of log|σ−ω| over interior ω.
    pub phi_tv: f64,
    /// The minimizing ω for `phi_tv`.
    #[serde(with = "cpx")]
    pub tv_center: Complex64,
}

fn wrap_pi(x: f64) -> f64 {
    // wrap into (−π, π]
    let mut y = x.rem_euclid(TAU);
    if y > PI {
        y -= TAU;
    }
    y
}

/// Continue an angle sequence without 2π jumps.
fn unwrap_next(prev: f64, raw: f64) -> f64 {
    prev + wrap_pi(raw - prev)
}

impl ConvexDomain {
    // ---- constructors -------------------------------------------------

    pub fn disk(center: Complex64, radius: f64) -> Result<Self> {
        let d = ConvexDomain::Disk { center, radius };
        d.validate()?;
        Ok(d)
    }

    pub fn ellipse(
        center: Complex64,
        semi_major: f64,
        semi_minor: f64,
        rotation: f64,
    ) -> Result<Self> {
        let d = ConvexDomain::Ellipse {
            center,
            semi_major,
            semi_minor,
            rotation,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn polygon(vertices: Vec<Complex64>) -> Result<Self> {
        let d = ConvexDomain::Polygon { vertices };
        d.validate()?;
        Ok(d)
    }

    pub fn sector(vertex: Complex64, bisector: f64, half_angle: f64) -> Result<Self> {
        let d = ConvexDomain::Sector {
            vertex,
            bisector,
            half_angle,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn half_plane(point: Complex64, inward_normal: f64) -> Result<Self> {
        let d = ConvexDomain::HalfPlane {
            point,
            inward_normal,
        };
        d.validate()?;
        Ok(d)
    }

    /// Checks the construction invariants; deserialized specs must pass
    /// through here before use.
    pub fn validate(&self) -> Result<()> {
        match self {
            ConvexDomain::Disk { radius, center } => {
                if !(radius.is_finite() && *radius > 0.0) || !center.is_finite() {
                    return Err(Error::InvalidDomain(format!(
                        "disk radius must be positive, got {radius}"
                    )));
                }
            }
            ConvexDomain::Ellipse {
                center,
                semi_major,
                semi_minor,
                rotation,
            } => {
                if !center.is_finite() || !rotation.is_finite() {
                    return Err(Error::InvalidDomain(
                        "ellipse parameters must be finite".into(),
                    ));
                }
                if !(*semi_minor > 0.0 && semi_major >= semi_minor && semi_major.is_finite()) {
                    return Err(Error::InvalidDomain(format!(
                        "ellipse needs semi_major ≥ semi_minor > 0, got ({semi_major}, {semi_minor})"
                    )));
                }
            }
            ConvexDomain::Polygon { vertices } => {
                if vertices.len() < 3 {
                    return Err(Error::InvalidDomain(format!(
                        "polygon needs at least 3 vertices, got {}",
                        vertices.len()
                    )));
                }
                let n = vertices.len();
                for i in 0..n {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    let c = vertices[(i + 2) % n];
                    let cross = ((b - a).conj() * (c - b)).im;
                    let scale = (b - a).norm() * (c - b).norm();
                    if !(cross > 1e-12 * scale) {
                        return Err(Error::InvalidDomain(format!(
                            "polygon must be strictly convex and counterclockwise (corner {i} fails)"
                        )));
                    }
                }
            }
            ConvexDomain::Sector {
                vertex,
                bisector,
                half_angle,
            } => {
                if !vertex.is_finite() || !bisector.is_finite() {
                    return Err(Error::InvalidDomain(
                        "sector parameters must be finite".into(),
                    ));
                }
                if !(*half_angle > 0.0 && *half_angle <= PI / 2.0) {
                    return Err(Error::InvalidDomain(format!(
                        "sector half-angle must lie in (0, π/2], got {half_angle}"
                    )));
                }
            }
            ConvexDomain::HalfPlane {
                point,
                inward_normal,
            } => {
                if !point.is_finite() || !inward_normal.is_finite() {
                    return Err(Error::InvalidDomain(
                        "half-plane parameters must be finite".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    // ---- basic queries -------------------------------------------------

    pub fn is_bounded(&self) -> bool {
        !matches!(
            self,
            ConvexDomain::Sector { .. } | ConvexDomain::HalfPlane { .. }
        )
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ConvexDomain::Disk { .. } => "disk",
            ConvexDomain::Ellipse { .. } => "ellipse",
            ConvexDomain::Polygon { .. } => "polygon",
            ConvexDomain::Sector { .. } => "sector",
            ConvexDomain::HalfPlane { .. } => "half_plane",
        }
    }

    /// Sector half-opening; π/2 for half-planes, `None` for bounded kinds.
    pub fn half_angle(&self) -> Option<f64> {
        match self {
            ConvexDomain::Sector { half_angle, .. } => Some(*half_angle),
            ConvexDomain::HalfPlane { .. } => Some(PI / 2.0),
            _ => None,
        }
    }

    /// A guaranteed interior point.
    pub fn interior_point(&self) -> Complex64 {
        match self {
            ConvexDomain::Disk { center, .. } | ConvexDomain::Ellipse { center, .. } => *center,
            ConvexDomain::Polygon { vertices } => polygon_centroid(vertices),
            ConvexDomain::Sector {
                vertex, bisector, ..
            } => vertex + Complex64::from_polar(1.0, *bisector),
            ConvexDomain::HalfPlane {
                point,
                inward_normal,
            } => point + Complex64::from_polar(1.0, *inward_normal),
        }
    }

    /// Characteristic length used for tolerances and optimizer scaling.
    pub fn scale_length(&self) -> f64 {
        match self {
            ConvexDomain::Disk { radius, .. } => 2.0 * radius,
            ConvexDomain::Ellipse { semi_major, .. } => 2.0 * semi_major,
            ConvexDomain::Polygon { vertices } => max_pairwise_distance(vertices),
            ConvexDomain::Sector { .. } | ConvexDomain::HalfPlane { .. } => 1.0,
        }
    }

    /// The image under z ↦ λ·e^{iφ}·z + β with λ > 0.
    pub fn similar_transform(&self, lambda: f64, phi: f64, beta: Complex64) -> ConvexDomain {
        assert!(lambda > 0.0, "similarity scale must be positive");
        let map = |z: Complex64| Complex64::from_polar(lambda, phi) * z + beta;
        match self {
            ConvexDomain::Disk { center, radius } => ConvexDomain::Disk {
                center: map(*center),
                radius: lambda * radius,
            },
            ConvexDomain::Ellipse {
                center,
                semi_major,
                semi_minor,
                rotation,
            } => ConvexDomain::Ellipse {
                center: map(*center),
                semi_major: lambda * semi_major,
                semi_minor: lambda * semi_minor,
                rotation: rotation + phi,
            },
            ConvexDomain::Polygon { vertices } => ConvexDomain::Polygon {
                vertices: vertices.iter().map(|&v| map(v)).collect(),
            },
            ConvexDomain::Sector {
                vertex,
                bisector,
                half_angle,
            } => ConvexDomain::Sector {
                vertex: map(*vertex),
                bisector: bisector + phi,
                half_angle: *half_angle,
            },
            ConvexDomain::HalfPlane {
                point,
                inward_normal,
            } => ConvexDomain::HalfPlane {
                point: map(*point),
                inward_normal: inward_normal + phi,
            },
        }
    }

    /// Copy shrunk by `factor` about the interior reference point.
    fn shrunk_copy(&self, factor: f64) -> ConvexDomain {
        let c0 = self.interior_point();
        self.similar_transform(factor, 0.0, c0 - Complex64::from_polar(factor, 0.0) * c0)
    }

    fn bounding_box(&self) -> (Complex64, Complex64) {
        match self {
            ConvexDomain::Disk { center, radius } => (
                center - Complex64::new(*radius, *radius),
                center + Complex64::new(*radius, *radius),
            ),
            ConvexDomain::Ellipse {
                center,
                semi_major,
                semi_minor,
                rotation,
            } => {
                let (a, b) = (*semi_major, *semi_minor);
                let hw = (a * a * rotation.cos().powi(2) + b * b * rotation.sin().powi(2)).sqrt();
                let hh = (a * a * rotation.sin().powi(2) + b * b * rotation.cos().powi(2)).sqrt();
                (
                    center - Complex64::new(hw, hh),
                    center + Complex64::new(hw, hh),
                )
            }
            ConvexDomain::Polygon { vertices } => {
                let mut lo = Complex64::new(f64::INFINITY, f64::INFINITY);
                let mut hi = Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
                for v in vertices {
                    lo = Complex64::new(lo.re.min(v.re), lo.im.min(v.im));
                    hi = Complex64::new(hi.re.max(v.re), hi.im.max(v.im));
                }
                (lo, hi)
            }
            _ => panic!("bounding_box is bounded-only"),
        }
    }

    pub(crate) fn is_smooth(&self) -> bool {
        matches!(
            self,
            ConvexDomain::Disk { .. } | ConvexDomain::Ellipse { .. }
        )
    }

    // ---- smooth parametrization (disk/ellipse, t ∈ [0, 2π)) -------------

    pub(crate) fn param_point(&self, t: f64) -> Complex64 {
        match self {
            ConvexDomain::Disk { center, radius } => center + Complex64::from_polar(*radius, t),
            ConvexDomain::Ellipse {
                center,
                semi_major,
                semi_minor,
                rotation,
            } => {
                let canon = Complex64::new(semi_major * t.cos(), semi_minor * t.sin());
                center + Complex64::from_polar(1.0, *rotation) * canon
            }
            _ => panic!("param_point is for smooth kinds"),
        }
    }

    pub(crate) fn param_velocity(&self, t: f64) -> Complex64 {
        match self {
            ConvexDomain::Disk { radius, .. } => Complex64::from_polar(*radius, t) * Complex64::i(),
            ConvexDomain::Ellipse {
                semi_major,
                semi_minor,
                rotation,
                ..
            } => {
                let canon = Complex64::new(-semi_major * t.sin(), semi_minor * t.cos());
                Complex64::from_polar(1.0, *rotation) * canon
            }
            _ => panic!("param_velocity is for smooth kinds"),
        }
    }

    pub(crate) fn param_curvature(&self, t: f64) -> f64 {
        match self {
            ConvexDomain::Disk { radius, .. } => 1.0 / radius,
            ConvexDomain::Ellipse {
                semi_major: a,
                semi_minor: b,
                ..
            } => {
                let d = (a * a * t.sin().powi(2) + b * b * t.cos().powi(2)).sqrt();
                a * b / (d * d * d)
            }
            _ => panic!("param_curvature is for smooth kinds"),
        }
    }

    /// Polygon edges as (start, end) pairs in traversal order.
    pub fn edges(&self) -> Option<Vec<(Complex64, Complex64)>> {
        match self {
            ConvexDomain::Polygon { vertices } => {
                let n = vertices.len();
                Some(
                    (0..n)
                        .map(|i| (vertices[i], vertices[(i + 1) % n]))
                        .collect(),
                )
            }
            _ => None,
        }
    }

    // ---- support, containment ------------------------------------------

    /// h(t) = sup{Re(e^{−it}·z) : z ∈ Ω}. For sectors and half-planes the
    /// direction must lie in the admissible normal cone.
    pub fn support_function(&self, t: f64) -> Result<f64> {
        let dir = Complex64::from_polar(1.0, -t);
        match self {
            ConvexDomain::Disk { center, radius } => Ok((dir * center).re + radius),
            ConvexDomain::Ellipse {
                center,
                semi_major,
                semi_minor,
                rotation,
            } => {
                let u = t - rotation;
                let width = (semi_major * semi_major * u.cos().powi(2)
                    + semi_minor * semi_minor * u.sin().powi(2))
                .sqrt();
                Ok((dir * center).re + width)
            }
            ConvexDomain::Polygon { vertices } => Ok(vertices
                .iter()
                .map(|v| (dir * v).re)
                .fold(f64::NEG_INFINITY, f64::max)),
            ConvexDomain::Sector {
                vertex,
                bisector,
                half_angle,
            } => {
                // finite exactly when e^{it} is separated from every ray direction
                // by at least π/2
                if wrap_pi(t - bisector - PI).abs() <= PI / 2.0 - half_angle + 1e-12 {
                    Ok((dir * vertex).re)
                } else {
                    Err(Error::DirectionNotAdmissible { angle: t })
                }
            }
            ConvexDomain::HalfPlane {
                point,
                inward_normal,
            } => {
                if wrap_pi(t - inward_normal - PI).abs() <= 1e-9 {
                    Ok((dir * point).re)
                } else {
                    Err(Error::DirectionNotAdmissible { angle: t })
                }
            }
        }
    }

    /// Containment in the margin-eroded closure: every supporting half-plane
    /// test passes with slack ≥ `margin`. Exact for all kinds except the
    /// ellipse with positive margin, which uses a dense support grid on top
    /// of the exact zero-margin test.
    pub fn contains(&self, z: Complex64, margin: f64) -> bool {
        debug_assert!(margin >= 0.0);
        match self {
            ConvexDomain::Disk { center, radius } => (z - center).norm() <= radius - margin,
            ConvexDomain::Ellipse {
                center,
                semi_major,
                semi_minor,
                rotation,
            } => {
                let w = (z - center) * Complex64::from_polar(1.0, -rotation);
                let inside = (w.re / semi_major).powi(2) + (w.im / semi_minor).powi(2) <= 1.0;
                if margin == 0.0 || !inside {
                    return inside;
                }
                (0..1440).all(|k| {
                    let t = TAU * k as f64 / 1440.0;
                    let h = self.support_function(t).expect("bounded");
                    (Complex64::from_polar(1.0, -t) * z).re <= h - margin
                })
            }
            ConvexDomain::Polygon { vertices } => {
                let n = vertices.len();
                (0..n).all(|i| {
                    let a = vertices[i];
                    let e = vertices[(i + 1) % n] - a;
                    // inward signed distance: interior is left of the edge direction
                    let d = ((z - a) * (e / e.norm()).conj()).im;
                    d >= margin
                })
            }
            ConvexDomain::Sector {
                vertex,
                bisector,
                half_angle,
            } => {
                let w = (z - vertex) * Complex64::from_polar(1.0, -bisector);
                let d_upper = -(w * Complex64::from_polar(1.0, -half_angle)).im;
                let d_lower = (w * Complex64::from_polar(1.0, *half_angle)).im;
                d_upper >= margin && d_lower >= margin
            }
            ConvexDomain::HalfPlane {
                point,
                inward_normal,
            } => ((z - point) * Complex64::from_polar(1.0, -inward_normal)).re >= margin,
        }
    }

    // ---- boundary sampling ----------------------------------------------

    /// Counterclockwise boundary samples with quadrature weights summing to
    /// the perimeter. Smooth kinds are sampled at equal arclength (so the
    /// weights form the spectrally accurate periodic trapezoid rule);
    /// polygon edges carry per-edge panels whose nodes sit strictly inside
    /// the edges.
    pub fn sample_boundary(&self, n: usize, omega: Complex64) -> Result<Vec<BoundarySample>> {
        if n < 16 {
            return Err(Error::InvalidConfig(format!(
                "need at least 16 boundary samples, got {n}"
            )));
        }
        if !self.is_bounded() {
            return Err(Error::UnboundedDomain(
                "boundary sampling of an unbounded domain needs a truncation radius",
            ));
        }
        if !self.contains(omega, 1e-12 * self.scale_length()) {
            return Err(Error::NotInterior {
                point: (omega.re, omega.im),
                margin: 0.0,
            });
        }
        match self {
            ConvexDomain::Disk { center, radius } => {
                let total = TAU * radius;
                let mut out = Vec::with_capacity(n);
                let (mut theta, mut phi) = (f64::NAN, f64::NAN);
                for k in 0..n {
                    let s = total * k as f64 / n as f64;
                    let t = s / radius;
                    let sigma = center + Complex64::from_polar(*radius, t);
                    let nu = Complex64::from_polar(1.0, t);
                    theta = if k == 0 {
                        t + PI / 2.0
                    } else {
                        unwrap_next(theta, t + PI / 2.0)
                    };
                    let raw_phi = (sigma - omega).arg();
                    phi = if k == 0 {
                        raw_phi
                    } else {
                        unwrap_next(phi, raw_phi)
                    };
                    out.push(BoundarySample {
                        s,
                        sigma,
                        theta,
                        nu,
                        phi,
                        weight: total / n as f64,
                        curvature: 1.0 / radius,
                    });
                }
                Ok(out)
            }
            ConvexDomain::Ellipse { .. } => {
                let table = ArcTable::build(self, 512);
                let total = table.total();
                let mut out = Vec::with_capacity(n);
                let (mut theta, mut phi) = (f64::NAN, f64::NAN);
                for k in 0..n {
                    let s = total * k as f64 / n as f64;
                    let t = table.invert(self, s);
                    let sigma = self.param_point(t);
                    let v = self.param_velocity(t);
                    let nu = -Complex64::i() * v / v.norm();
                    let raw_theta = v.arg();
                    theta = if k == 0 {
                        raw_theta
                    } else {
                        unwrap_next(theta, raw_theta)
                    };
                    let raw_phi = (sigma - omega).arg();
                    phi = if k == 0 {
                        raw_phi
                    } else {
                        unwrap_next(phi, raw_phi)
                    };
                    out.push(BoundarySample {
                        s,
                        sigma,
                        theta,
                        nu,
                        phi,
                        weight: total / n as f64,
                        curvature: self.param_curvature(t),
                    });
                }
                Ok(out)
            }
            ConvexDomain::Polygon { vertices } => {
                let counts = spread_panels(vertices, n)?;
                let mut out = Vec::with_capacity(n);
                let mut s_done = 0.0;
                let (mut theta, mut phi) = (f64::NAN, f64::NAN);
                let m = vertices.len();
                for i in 0..m {
                    let a = vertices[i];
                    let e = vertices[(i + 1) % m] - a;
                    let len = e.norm();
                    let dir = e / len;
                    let nu = -Complex64::i() * dir;
                    let raw_theta = dir.arg();
                    theta = if i == 0 {
                        raw_theta
                    } else {
                        unwrap_next(theta, raw_theta)
                    };
                    let cells = counts[i];
                    for c in 0..cells {
                        let frac = (c as f64 + 0.5) / cells as f64;
                        let sigma = a + e * frac;
                        let raw_phi = (sigma - omega).arg();
                        phi = if out.is_empty() {
                            raw_phi
                        } else {
                            unwrap_next(phi, raw_phi)
                        };
                        out.push(BoundarySample {
                            s: s_done + len * frac,
                            sigma,
                            theta,
                            nu,
                            phi,
                            weight: len / cells as f64,
                            curvature: 0.0,
                        });
                    }
                    s_done += len;
                }
                Ok(out)
            }
            _ => unreachable!("bounded check above"),
        }
    }

    /// Boundary samples of an unbounded domain truncated at distance
    /// `radius` from the vertex (sector) or foot point (half-plane). Ray
    /// nodes are geometrically graded toward the vertex. Bounded domains
    /// ignore the radius.
    pub fn sample_boundary_truncated(
        &self,
        n: usize,
        omega: Complex64,
        radius: f64,
    ) -> Result<Vec<BoundarySample>> {
        if self.is_bounded() {
            return self.sample_boundary(n, omega);
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "truncation radius must be positive, got {radius}"
            )));
        }
        if n < 16 {
            return Err(Error::InvalidConfig(format!(
                "need at least 16 boundary samples, got {n}"
            )));
        }
        match self {
            ConvexDomain::Sector {
                vertex,
                bisector,
                half_angle,
            } => {
                let k = n / 2;
                // log-graded radii down to radius·1e−9: cell boundaries are
                // geometric, nodes at geometric midpoints
                let q: f64 = 1e-9f64.powf(1.0 / k as f64);
                let mut bounds = Vec::with_capacity(k + 1);
                let mut r = radius;
                for _ in 0..=k {
                    bounds.push(r);
                    r *= q;
                }
                let upper_dir = Complex64::from_polar(1.0, bisector + half_angle);
                let lower_dir = Complex64::from_polar(1.0, bisector - half_angle);
                let mut out = Vec::with_capacity(2 * k);
                let mut phi = f64::NAN;
                // incoming along the upper edge: far → vertex
                for j in 0..k {
                    let node_r = (bounds[j] * bounds[j + 1]).sqrt();
                    let sigma = vertex + upper_dir * node_r;
                    let raw_phi = (sigma - omega).arg();
                    phi = if j == 0 {
                        raw_phi
                    } else {
                        unwrap_next(phi, raw_phi)
                    };
                    out.push(BoundarySample {
                        s: radius - node_r,
                        sigma,
                        theta: bisector + PI + half_angle,
                        nu: Complex64::i() * upper_dir,
                        phi,
                        weight: bounds[j] - bounds[j + 1],
                        curvature: 0.0,
                    });
                }
                // outgoing along the lower edge: vertex → far
                for j in (0..k).rev() {
                    let node_r = (bounds[j] * bounds[j + 1]).sqrt();
                    let sigma = vertex + lower_dir * node_r;
                    phi = unwrap_next(phi, (sigma - omega).arg());
                    out.push(BoundarySample {
                        s: radius + node_r,
                        sigma,
                        theta: bisector + TAU - half_angle,
                        nu: -Complex64::i() * lower_dir,
                        phi,
                        weight: bounds[j] - bounds[j + 1],
                        curvature: 0.0,
                    });
                }
                Ok(out)
            }
            ConvexDomain::HalfPlane {
                point,
                inward_normal,
            } => {
                let dir = Complex64::from_polar(1.0, inward_normal - PI / 2.0);
                let width = 2.0 * radius / n as f64;
                let mut out = Vec::with_capacity(n);
                let mut phi = f64::NAN;
                for j in 0..n {
                    let u = -radius + width * (j as f64 + 0.5);
                    let sigma = point + dir * u;
                    let raw_phi = (sigma - omega).arg();
                    phi = if j == 0 {
                        raw_phi
                    } else {
                        unwrap_next(phi, raw_phi)
                    };
                    out.push(BoundarySample {
                        s: u + radius,
                        sigma,
                        theta: inward_normal - PI / 2.0,
                        nu: -Complex64::from_polar(1.0, *inward_normal),
                        phi,
                        weight: width,
                        curvature: 0.0,
                    });
                }
                Ok(out)
            }
            _ => unreachable!(),
        }
    }

    // ---- metrics ---------------------------------------------------------

    pub fn metrics(&self) -> Result<DomainMetrics> {
        if !self.is_bounded() {
            return Err(Error::UnboundedDomain(
                "metrics are bounded-only; sectors and half-planes carry just the opening angle",
            ));
        }
        let (perimeter, diameter, area, max_r) = match self {
            ConvexDomain::Disk { radius, .. } => {
                (TAU * radius, 2.0 * radius, PI * radius * radius, *radius)
            }
            ConvexDomain::Ellipse {
                semi_major: a,
                semi_minor: b,
                ..
            } => {
                let speed = |t: f64| self.param_velocity(t).norm();
                let perimeter: f64 = quad::adaptive(&speed, 0.0, TAU, 1e-12, "ellipse perimeter")?;
                (perimeter, 2.0 * a, PI * a * b, a * a / b)
            }
            ConvexDomain::Polygon { vertices } => {
                let n = vertices.len();
                let perimeter: f64 = (0..n)
                    .map(|i| (vertices[(i + 1) % n] - vertices[i]).norm())
                    .sum();
                let area: f64 = 0.5
                    * (0..n)
                        .map(|i| {
                            let (p, q) = (vertices[i], vertices[(i + 1) % n]);
                            p.re * q.im - q.re * p.im
                        })
                        .sum::<f64>();
                (
                    perimeter,
                    max_pairwise_distance(vertices),
                    area,
                    f64::INFINITY,
                )
            }
            _ => unreachable!(),
        };
        let (tv_center, phi_tv) = self.optimal_tv_center()?;
        let tau = self.flatness_tau()?;
        Ok(DomainMetrics {
            perimeter,
            diameter,
            area,
            max_curvature_radius: max_r,
            tau,
            phi_tv,
            tv_center,
        })
    }

    // ---- total variation of log|σ−ω| --------------------------------------

    /// Total variation of log|σ − ω| over one counterclockwise traversal.
    ///
    /// Polygons use the exact per-edge closed form (distance is unimodal on
    /// each edge, with the minimum at the foot of the perpendicular). Smooth
    /// kinds locate the critical points of |σ(t) − ω| by a sign scan plus
    /// bisection and sum |Δ log ρ| over the monotone pieces; the scan
    /// resolution is doubled until the value stabilizes below 1e−8.
    pub fn tv_log(&self, omega: Complex64) -> Result<f64> {
        self.require_interior(omega)?;
        match self {
            ConvexDomain::Polygon { vertices } => Ok(polygon_tv(vertices, omega)),
            _ if self.is_smooth() => {
                let mut m = 1024;
                let mut prev = self.tv_scan(omega, m);
                loop {
                    m *= 2;
                    let cur = self.tv_scan(omega, m);
                    if (cur - prev).abs() < 1e-8 || m >= 1 << 16 {
                        return Ok(cur);
                    }
                    prev = cur;
                }
            }
            _ => Err(Error::UnboundedDomain(
                "total variation needs a bounded domain",
            )),
        }
    }

    fn require_interior(&self, omega: Complex64) -> Result<()> {
        if !self.is_bounded() {
            return Err(Error::UnboundedDomain("operation needs a bounded domain"));
        }
        if !self.contains(omega, 1e-12 * self.scale_length()) {
            return Err(Error::NotInterior {
                point: (omega.re, omega.im),
                margin: 1e-12 * self.scale_length(),
            });
        }
        Ok(())
    }

    /// Critical points of t ↦ |σ(t) − ω| on an m-point scan grid.
    fn radial_critical_points(&self, omega: Complex64, m: usize) -> Vec<f64> {
        let g = |t: f64| {
            let d = self.param_point(t) - omega;
            (d.conj() * self.param_velocity(t)).re
        };
        let step = TAU / m as f64;
        let mut values: Vec<f64> = (0..m).map(|j| g(step * j as f64)).collect();
        // close the loop with g(0), not g(2π): the two differ by roundoff
        // and a critical point astride the wrap would otherwise be missed
        values.push(values[0]);
        let mut roots = Vec::new();
        for j in 0..m {
            if values[j] == 0.0 {
                roots.push(step * j as f64);
            } else if values[j] * values[j + 1] < 0.0 {
                let (mut a, mut b) = (step * j as f64, step * (j + 1) as f64);
                let mut ga = values[j];
                for _ in 0..80 {
                    let mid = 0.5 * (a + b);
                    let gm = g(mid);
                    if gm == 0.0 {
                        a = mid;
                        b = mid;
                        break;
                    }
                    if gm.signum() == ga.signum() {
                        a = mid;
                        ga = gm;
                    } else {
                        b = mid;
                    }
                }
                roots.push(0.5 * (a + b));
            }
        }
        roots.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        roots
    }

    fn tv_scan(&self, omega: Complex64, m: usize) -> f64 {
        let roots = self.radial_critical_points(omega, m);
        if roots.len() < 2 {
            return 0.0;
        }
        let log_rho = |t: f64| (self.param_point(t) - omega).norm().ln();
        let mut tv = 0.0;
        for w in roots.windows(2) {
            tv += (log_rho(w[1]) - log_rho(w[0])).abs();
        }
        tv += (log_rho(roots[0] + TAU) - log_rho(*roots.last().unwrap())).abs();
        tv
    }

    /// (max |σ−ω|) / (min |σ−ω|) for a fixed interior ω.
    fn radial_ratio(&self, omega: Complex64) -> f64 {
        match self {
            ConvexDomain::Disk { center, radius } => {
                let d = (omega - center).norm();
                (radius + d) / (radius - d)
            }
            ConvexDomain::Polygon { vertices } => {
                let far = vertices
                    .iter()
                    .map(|v| (v - omega).norm())
                    .fold(0.0f64, f64::max);
                let n = vertices.len();
                let near = (0..n)
                    .map(|i| {
                        let a = vertices[i];
                        let e = vertices[(i + 1) % n] - a;
                        let t = ((omega - a).conj() * e).re / e.norm_sqr();
                        (a + e * t.clamp(0.0, 1.0) - omega).norm()
                    })
                    .fold(f64::INFINITY, f64::min);
                far / near
            }
            _ => {
                let roots = self.radial_critical_points(omega, 2048);
                if roots.len() < 2 {
                    return 1.0;
                }
                let mut far = 0.0f64;
                let mut near = f64::INFINITY;
                for &t in &roots {
                    let rho = (self.param_point(t) - omega).norm();
                    far = far.max(rho);
                    near = near.min(rho);
                }
                far / near
            }
        }
    }

    // ---- the two interior optimizers --------------------------------------

    /// Deterministic 21×21 seeds inside a 0.9-shrunk copy of the domain.
    fn grid_seeds(&self) -> Vec<Complex64> {
        let shrunk = self.shrunk_copy(0.9);
        let (lo, hi) = shrunk.bounding_box();
        let mut seeds = Vec::new();
        for i in 0..21 {
            for j in 0..21 {
                let z = Complex64::new(
                    lo.re + (hi.re - lo.re) * i as f64 / 20.0,
                    lo.im + (hi.im - lo.im) * j as f64 / 20.0,
                );
                if shrunk.contains(z, 0.0) {
                    seeds.push(z);
                }
            }
        }
        seeds
    }

    fn minimize_interior<F>(&self, objective: F) -> (Complex64, f64)
    where
        F: Fn(Complex64) -> f64,
    {
        let scale = self.scale_length();
        let guard = 1e-9 * scale;
        let penalized = |z: Complex64| {
            if self.contains(z, guard) {
                objective(z)
            } else {
                f64::INFINITY
            }
        };
        let mut seeds = self.grid_seeds();
        if seeds.is_empty() {
            seeds.push(self.interior_point());
        }
        let mut best: Option<(Complex64, f64)> = None;
        for z in seeds {
            let v = penalized(z);
            let better = match &best {
                None => true,
                Some((bz, bv)) => {
                    // lexicographic (value, Re, Im) tie-breaking for reproducibility
                    v < *bv || (v == *bv && (z.re < bz.re || (z.re == bz.re && z.im < bz.im)))
                }
            };
            if better {
                best = Some((z, v));
            }
        }
        let (seed, seed_val) = best.expect("at least one seed");
        let m = nelder_mead(penalized, seed, scale, 600);
        if m.value <= seed_val {
            (m.point, m.value)
        } else {
            (seed, seed_val)
        }
    }

    /// Minimizes the total variation of log|σ−ω| over interior ω.
    /// Returns the minimizer and the attained value.
    pub fn optimal_tv_center(&self) -> Result<(Complex64, f64)> {
        if !self.is_bounded() {
            return Err(Error::UnboundedDomain(
                "the TV center needs a bounded domain",
            ));
        }
        let quick = |omega: Complex64| match self {
            ConvexDomain::Polygon { vertices } => polygon_tv(vertices, omega),
            _ => self.tv_scan(omega, 2048),
        };
        let (omega, _) = self.minimize_interior(quick);
        let value = self.tv_log(omega)?;
        Ok((omega, value))
    }

    /// Flatness τ_Ω: min over interior ω of (max |σ−ω|)/(min |σ−ω|).
    pub fn flatness_tau(&self) -> Result<f64> {
        if !self.is_bounded() {
            return Err(Error::UnboundedDomain("flatness needs a bounded domain"));
        }
        let (_, value) = self.minimize_interior(|omega| self.radial_ratio(omega));
        Ok(value)
    }
}

// ---- free helpers ----------------------------------------------------------

fn polygon_centroid(vertices: &[Complex64]) -> Complex64 {
    let n = vertices.len();
    let mut area2 = 0.0;
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        let (p, q) = (vertices[i], vertices[(i + 1) % n]);
        let cross = p.re * q.im - q.re * p.im;
        area2 += cross;
        acc += (p + q) * cross;
    }
    acc / (3.0 * area2)
}

fn max_pairwise_distance(vertices: &[Complex64]) -> f64 {
    let mut best = 0.0f64;
    for (i, a) in vertices.iter().enumerate() {
        for b in &vertices[i + 1..] {
            best = best.max((a - b).norm());
        }
    }
    best
}

/// Exact total variation of log|σ−ω| around a convex polygon: on each edge
/// the distance decreases to the foot of the perpendicular (clamped to the
/// edge) and increases after it.
fn polygon_tv(vertices: &[Complex64], omega: Complex64) -> f64 {
    let n = vertices.len();
    let mut tv = 0.0;
    for i in 0..n {
        let a = vertices[i];
        let e = vertices[(i + 1) % n] - a;
        let t = (((omega - a).conj() * e).re / e.norm_sqr()).clamp(0.0, 1.0);
        let d0 = (a - omega).norm().ln();
        let d1 = (a + e - omega).norm().ln();
        let dm = (a + e * t - omega).norm().ln();
        tv += (d0 - dm).abs() + (d1 - dm).abs();
    }
    tv
}

/// Split n panels across polygon edges proportionally to length, at least
/// one per edge, largest-remainder rounding.
fn spread_panels(vertices: &[Complex64], n: usize) -> Result<Vec<usize>> {
    let m = vertices.len();
    if n < m {
        return Err(Error::InvalidConfig(format!(
            "{n} samples cannot cover {m} polygon edges"
        )));
    }
    let lengths: Vec<f64> = (0..m)
        .map(|i| (vertices[(i + 1) % m] - vertices[i]).norm())
        .collect();
    let total: f64 = lengths.iter().sum();
    let mut counts: Vec<usize> = Vec::with_capacity(m);
    let mut fractions: Vec<(usize, f64)> = Vec::with_capacity(m);
    let mut assigned = 0usize;
    for (i, len) in lengths.iter().enumerate() {
        let ideal = n as f64 * len / total;
        let base = (ideal.floor() as usize).max(1);
        counts.push(base);
        assigned += base;
        fractions.push((i, ideal - base as f64));
    }
    fractions.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    let mut idx = 0;
    while assigned < n {
        counts[fractions[idx % m].0] += 1;
        assigned += 1;
        idx += 1;
    }
    while assigned > n {
        // possible when short edges were bumped to 1; shave the longest counts
        let i = (0..m).max_by_key(|&i| counts[i]).unwrap();
        if counts[i] <= 1 {
            break;
        }
        counts[i] -= 1;
        assigned -= 1;
    }
    Ok(counts)
}

/// Cumulative-arclength table for smooth kinds: uniform parameter panels,
/// 64-point Gauss–Legendre per panel, Newton inversion inside a panel.
struct ArcTable {
    ts: Vec<f64>,
    ss: Vec<f64>,
}

impl ArcTable {
    fn build(domain: &ConvexDomain, panels: usize) -> ArcTable {
        let speed = |t: f64| domain.param_velocity(t).norm();
        let step = TAU / panels as f64;
        let mut ts = Vec::with_capacity(panels + 1);
        let mut ss = Vec::with_capacity(panels + 1);
        ts.push(0.0);
        ss.push(0.0);
        let mut acc = 0.0;
        for j in 0..panels {
            let (a, b) = (step * j as f64, step * (j + 1) as f64);
            acc += quad::gl64(&speed, a, b);
            ts.push(b);
            ss.push(acc);
        }
        ArcTable { ts, ss }
    }

    fn total(&self) -> f64 {
        *self.ss.last().unwrap()
    }

    /// Parameter t with arclength(t) = target.
    fn invert(&self, domain: &ConvexDomain, target: f64) -> f64 {
        let target = target.clamp(0.0, self.total());
        let j = match self
            .ss
            .binary_search_by(|v| v.partial_cmp(&target).unwrap())
        {
            Ok(j) => return self.ts[j.min(self.ts.len() - 1)],
            Err(j) => j.saturating_sub(1).min(self.ts.len() - 2),
        };
        let speed = |t: f64| domain.param_velocity(t).norm();
        let (t0, t1) = (self.ts[j], self.ts[j + 1]);
        let frac = (target - self.ss[j]) / (self.ss[j + 1] - self.ss[j]);
        let mut t = t0 + (t1 - t0) * frac;
        for _ in 0..6 {
            let s_here = self.ss[j] + quad::gl64(&speed, t0, t);
            let dt = (s_here - target) / speed(t);
            t -= dt;
            if dt.abs() < 1e-15 {
                break;
            }
        }
        t
    }
}
