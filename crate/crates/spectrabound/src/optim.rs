//! Derivative-free minimization over the plane and the smallest enclosing
//! circle of a finite point set.
//!
//! Both are deterministic: the Nelder–Mead vertex ordering breaks ties
//! lexicographically by (Re, Im), and the Welzl shuffle uses a fixed
//! xorshift stream, so repeated runs give bit-identical results.

use num_complex::Complex64;

#[derive(Clone, Copy, Debug)]
pub struct Minimum {
    pub point: Complex64,
    pub value: f64,
}

/// Golden-section maximisation of a continuous function on [a, b]. Safe for
/// merely piecewise-smooth objectives: the bracket only ever shrinks, so the
/// result is a certified lower estimate of the true maximum, exact when the
/// bracket isolates a single peak.
pub fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        }
        if b - a <= 1e-14 * (1.0 + a.abs() + b.abs()) {
            break;
        }
    }
    f1.max(f2)
}

/// Order used for simplex sorting: value first, then (Re, Im) of the point.
/// NaN values sort last so a stray invalid evaluation never becomes "best".
fn vertex_cmp(a: &(Complex64, f64), b: &(Complex64, f64)) -> std::cmp::Ordering {
    let ka = if a.1.is_nan() { f64::INFINITY } else { a.1 };
    let kb = if b.1.is_nan() { f64::INFINITY } else { b.1 };
    ka.partial_cmp(&kb)
        .unwrap()
        .then(a.0.re.partial_cmp(&b.0.re).unwrap())
        .then(a.0.im.partial_cmp(&b.0.im).unwrap())
}

/// Nelder–Mead on ℝ² ≅ ℂ with the standard reflection/expansion/contraction
/// coefficients. `scale` sets the initial simplex edge (scale/10) and the
/// stopping criterion: the simplex diameter must shrink below 1e−9·scale.
///
/// The objective may return +∞ (e.g. as an out-of-domain penalty); the
/// search then simply avoids that region.
pub fn nelder_mead<F>(f: F, seed: Complex64, scale: f64, max_iter: usize) -> Minimum
where
    F: Fn(Complex64) -> f64,
{
    assert!(scale > 0.0);
    let h = 0.1 * scale;
    let mut simplex: Vec<(Complex64, f64)> = [
        seed,
        seed + Complex64::new(h, 0.0),
        seed + Complex64::new(0.0, h),
    ]
    .iter()
    .map(|&p| (p, f(p)))
    .collect();

    for _ in 0..max_iter {
        simplex.sort_by(vertex_cmp);
        let diameter = (simplex[0].0 - simplex[1].0)
            .norm()
            .max((simplex[0].0 - simplex[2].0).norm())
            .max((simplex[1].0 - simplex[2].0).norm());
        if diameter < 1e-9 * scale {
            break;
        }
        let (best, mid, worst) = (simplex[0], simplex[1], simplex[2]);
        let centroid = (best.0 + mid.0) * 0.5;

        let reflected = centroid + (centroid - worst.0);
        let fr = f(reflected);
        if fr < best.1 {
            let expanded = centroid + (centroid - worst.0) * 2.0;
            let fe = f(expanded);
            simplex[2] = if fe < fr {
                (expanded, fe)
            } else {
                (reflected, fr)
            };
            continue;
        }
        if fr < mid.1 {
            simplex[2] = (reflected, fr);
            continue;
        }
        let contracted = if fr < worst.1 {
            centroid + (reflected - centroid) * 0.5
        } else {
            centroid + (worst.0 - centroid) * 0.5
        };
        let fc = f(contracted);
        if fc < worst.1.min(fr) {
            simplex[2] = (contracted, fc);
            continue;
        }
        // shrink toward the best vertex
        for vertex in &mut simplex[1..] {
            let p = best.0 + (vertex.0 - best.0) * 0.5;
            *vertex = (p, f(p));
        }
    }
    simplex.sort_by(vertex_cmp);
    Minimum {
        point: simplex[0].0,
        value: simplex[0].1,
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Circle {
    pub center: Complex64,
    pub radius: f64,
}

impl Circle {
    fn contains(&self, p: Complex64) -> bool {
        (p - self.center).norm() <= self.radius * (1.0 + 1e-12) + 1e-14
    }

    fn from_two(a: Complex64, b: Complex64) -> Circle {
        Circle {
            center: (a + b) * 0.5,
            radius: (a - b).norm() * 0.5,
        }
    }

    /// Circumcircle; falls back to the best diameter circle when the points
    /// are (nearly) collinear.
    fn from_three(a: Complex64, b: Complex64, c: Complex64) -> Circle {
        let (bx, by) = ((b - a).re, (b - a).im);
        let (cx, cy) = ((c - a).re, (c - a).im);
        let d = 2.0 * (bx * cy - by * cx);
        let span = (b - a).norm().max((c - a).norm()).max((b - c).norm());
        if d.abs() <= 1e-14 * span * span {
            let candidates = [
                Circle::from_two(a, b),
                Circle::from_two(a, c),
                Circle::from_two(b, c),
            ];
            return candidates
                .into_iter()
                .max_by(|p, q| p.radius.partial_cmp(&q.radius).unwrap())
                .unwrap();
        }
        let ux = (cy * (bx * bx + by * by) - by * (cx * cx + cy * cy)) / d;
        let uy = (bx * (cx * cx + cy * cy) - cx * (bx * bx + by * by)) / d;
        let center = a + Complex64::new(ux, uy);
        let radius = (center - a)
            .norm()
            .max((center - b).norm())
            .max((center - c).norm());
        Circle { center, radius }
    }
}

/// Smallest circle enclosing all points (Welzl's algorithm with a fixed
/// deterministic shuffle). Exact for finite sets up to roundoff;
/// expected linear time.
pub fn smallest_enclosing_circle(points: &[Complex64]) -> Circle {
    match points.len() {
        0 => {
            return Circle {
                center: Complex64::new(0.0, 0.0),
                radius: 0.0,
            }
        }
        1 => {
            return Circle {
                center: points[0],
                radius: 0.0,
            }
        }
        _ => {}
    }
    let mut pts = points.to_vec();
    // fixed-seed xorshift64* Fisher–Yates: determinism without an RNG dependency
    let mut state: u64 = 0x9e3779b97f4a7c15;
    let mut next = move || {
        state ^= state >> 12;
        state ^= state << 25;
        state ^= state >> 27;
        state = state.wrapping_mul(0x2545f4914f6cdd1d);
        state
    };
    for i in (1..pts.len()).rev() {
        let j = (next() % (i as u64 + 1)) as usize;
        pts.swap(i, j);
    }

    let mut circle = Circle::from_two(pts[0], pts[1]);
    for i in 2..pts.len() {
        if circle.contains(pts[i]) {
            continue;
        }
        circle = Circle::from_two(pts[0], pts[i]);
        for j in 1..i {
            if circle.contains(pts[j]) {
                continue;
            }
            circle = Circle::from_two(pts[j], pts[i]);
            for k in 0..j {
                if !circle.contains(pts[k]) {
                    circle = Circle::from_three(pts[k], pts[j], pts[i]);
                }
            }
        }
    }
    circle
}
