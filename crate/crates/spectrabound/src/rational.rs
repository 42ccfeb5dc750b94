//! Rational functions r = p/q with complex coefficients.
//!
//! Coefficients are stored in ascending degree order, which is also the wire
//! format (`{"num": [[re,im],…], "den": [[re,im],…]}`). Poles are the
//! denominator roots, found once by Durand–Kerner and cached.

use num_complex::Complex64;
use once_cell::sync::OnceCell;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RationalFunction {
    #[serde(with = "crate::domain::cpx::vec")]
    num: Vec<Complex64>,
    #[serde(with = "crate::domain::cpx::vec")]
    den: Vec<Complex64>,
    #[serde(skip)]
    poles: OnceCell<Vec<Complex64>>,
    /// sup of |r| over a sampled domain boundary, filled in when the
    /// function is bound to a domain (maximum principle: this is the sup
    /// over the closure).
    #[serde(skip)]
    sup_on_domain: OnceCell<f64>,
}

fn trim(mut coeffs: Vec<Complex64>) -> Vec<Complex64> {
    while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.norm() == 0.0) {
        coeffs.pop();
    }
    coeffs
}

fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

fn poly_add(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len().max(b.len())];
    for (i, &c) in a.iter().enumerate() {
        out[i] += c;
    }
    for (i, &c) in b.iter().enumerate() {
        out[i] += c;
    }
    out
}

fn poly_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, &ca) in a.iter().enumerate() {
        for (j, &cb) in b.iter().enumerate() {
            out[i + j] += ca * cb;
        }
    }
    out
}

/// Coefficients of p(a·z + b) from those of p.
fn poly_compose_affine(coeffs: &[Complex64], a: Complex64, b: Complex64) -> Vec<Complex64> {
    // Horner in the polynomial ring: result = (((c_n)·(az+b) + c_{n−1})·(az+b) + …)
    let mut out = vec![Complex64::new(0.0, 0.0)];
    for &c in coeffs.iter().rev() {
        out = poly_mul(&out, &[b, a]);
        out = poly_add(&out, &[c]);
    }
    trim(out)
}

/// All roots of a complex polynomial (ascending coefficients) by
/// Durand–Kerner. Deterministic start values; returns an empty list for
/// constants.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let coeffs = trim(coeffs.to_vec());
    let n = coeffs.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let lead = coeffs[n];
    let monic: Vec<Complex64> = coeffs.iter().map(|c| c / lead).collect();
    // Cauchy bound keeps every root inside |z| ≤ 1 + max|a_i|
    let bound = 1.0 + monic[..n].iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32 + 1) * bound).collect();
    for _ in 0..800 {
        let mut shift = 0.0f64;
        for k in 0..n {
            let zk = roots[k];
            let mut denom = Complex64::new(1.0, 0.0);
            for (j, &zj) in roots.iter().enumerate() {
                if j != k {
                    denom *= zk - zj;
                }
            }
            let delta = horner(&monic, zk) / denom;
            roots[k] = zk - delta;
            shift = shift.max(delta.norm());
        }
        if shift < 1e-14 * bound {
            break;
        }
    }
    roots
}

impl RationalFunction {
    pub fn new(num: Vec<Complex64>, den: Vec<Complex64>) -> Result<Self> {
        let num = trim(num);
        let den = trim(den);
        if num.iter().any(|c| !c.is_finite()) || den.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidRational("coefficients must be finite".into()));
        }
        if den.is_empty() || den.iter().all(|c| c.norm() == 0.0) {
            return Err(Error::InvalidRational(
                "denominator is identically zero".into(),
            ));
        }
        if num.is_empty() {
            return Err(Error::InvalidRational(
                "numerator has no coefficients".into(),
            ));
        }
        Ok(RationalFunction {
            num,
            den,
            poles: OnceCell::new(),
            sup_on_domain: OnceCell::new(),
        })
    }

    pub fn constant(c: Complex64) -> Self {
        RationalFunction::new(vec![c], vec![Complex64::new(1.0, 0.0)]).expect("valid")
    }

    /// r(z) = z.
    pub fn identity() -> Self {
        RationalFunction::new(
            vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            vec![Complex64::new(1.0, 0.0)],
        )
        .expect("valid")
    }

    /// r(z) = z^k.
    pub fn monomial(k: usize) -> Self {
        let mut num = vec![Complex64::new(0.0, 0.0); k + 1];
        num[k] = Complex64::new(1.0, 0.0);
        RationalFunction::new(num, vec![Complex64::new(1.0, 0.0)]).expect("valid")
    }

    /// The Möbius disk automorphism r(z) = (z − c)/(1 − c̄·z).
    pub fn mobius(c: Complex64) -> Self {
        RationalFunction::new(
            vec![-c, Complex64::new(1.0, 0.0)],
            vec![Complex64::new(1.0, 0.0), -c.conj()],
        )
        .expect("valid")
    }

    pub fn numerator(&self) -> &[Complex64] {
        &self.num
    }

    pub fn denominator(&self) -> &[Complex64] {
        &self.den
    }

    pub fn degree(&self) -> usize {
        (self.num.len() - 1).max(self.den.len() - 1)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        horner(&self.num, z) / horner(&self.den, z)
    }

    /// Denominator roots, computed once and cached.
    pub fn poles(&self) -> &[Complex64] {
        self.poles.get_or_init(|| polynomial_roots(&self.den))
    }

    /// Finite limit at ∞ (None when the numerator degree dominates).
    pub fn value_at_infinity(&self) -> Option<Complex64> {
        let (dn, dd) = (self.num.len() - 1, self.den.len() - 1);
        match dn.cmp(&dd) {
            std::cmp::Ordering::Less => Some(Complex64::new(0.0, 0.0)),
            std::cmp::Ordering::Equal => Some(self.num[dn] / self.den[dd]),
            std::cmp::Ordering::Greater => None,
        }
    }

    pub fn add(&self, other: &RationalFunction) -> RationalFunction {
        let num = poly_add(
            &poly_mul(&self.num, &other.den),
            &poly_mul(&other.num, &self.den),
        );
        RationalFunction::new(num, poly_mul(&self.den, &other.den)).expect("nonzero denominators")
    }

    pub fn mul(&self, other: &RationalFunction) -> RationalFunction {
        RationalFunction::new(
            poly_mul(&self.num, &other.num),
            poly_mul(&self.den, &other.den),
        )
        .expect("nonzero denominators")
    }

    /// c·r.
    pub fn scale(&self, c: Complex64) -> RationalFunction {
        RationalFunction::new(self.num.iter().map(|&v| v * c).collect(), self.den.clone())
            .expect("unchanged denominator")
    }

    /// r(a·z + b); used to move test functions across similar domains.
    pub fn precompose_affine(&self, a: Complex64, b: Complex64) -> RationalFunction {
        RationalFunction::new(
            poly_compose_affine(&self.num, a, b),
            poly_compose_affine(&self.den, a, b),
        )
        .expect("composition keeps the denominator nonzero")
    }

    /// max |r| over the given boundary points (no caching).
    pub fn sup_over<I: IntoIterator<Item = Complex64>>(&self, points: I) -> f64 {
        points
            .into_iter()
            .map(|z| self.eval(z).norm())
            .fold(0.0f64, f64::max)
    }

    /// Record the boundary sup after normalization; returns self for chaining.
    pub fn with_boundary_sup(self, sup: f64) -> Self {
        let _ = self.sup_on_domain.set(sup);
        self
    }

    pub fn boundary_sup(&self) -> Option<f64> {
        self.sup_on_domain.get().copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn mobius_evaluation_and_poles() {
        // (z − 1)/(z + 1)
        let r = RationalFunction::new(
            vec![c(-1.0, 0.0), c(1.0, 0.0)],
            vec![c(1.0, 0.0), c(1.0, 0.0)],
        )
        .unwrap();
        assert_relative_eq!(r.eval(c(0.0, 0.0)).re, -1.0, epsilon = 1e-15);
        assert!((r.eval(c(0.0, 1.0)).norm() - 1.0).abs() < 1e-15);
        let poles = r.poles();
        assert_eq!(poles.len(), 1);
        assert!((poles[0] - c(-1.0, 0.0)).norm() < 1e-12);
        assert_eq!(r.value_at_infinity(), Some(c(1.0, 0.0)));
    }

    #[test]
    fn durand_kerner_recovers_known_roots() {
        // (z−1)(z−2)(z−3) = −6 + 11z − 6z² + z³
        let mut roots = polynomial_roots(&[c(-6.0, 0.0), c(11.0, 0.0), c(-6.0, 0.0), c(1.0, 0.0)]);
        roots.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        for (root, expect) in roots.iter().zip([1.0, 2.0, 3.0]) {
            assert!((root - c(expect, 0.0)).norm() < 1e-10);
        }

        let roots = polynomial_roots(&[c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(roots.len(), 2);
        for root in roots {
            assert_relative_eq!(root.im.abs(), 1.0, epsilon = 1e-10);
            assert!(root.re.abs() < 1e-10);
        }
    }

    #[test]
    fn field_operations_match_pointwise_arithmetic() {
        let r1 = RationalFunction::mobius(c(0.3, 0.1));
        let r2 = RationalFunction::new(vec![c(1.0, 0.0)], vec![c(5.0, 0.0), c(-1.0, 0.0)]).unwrap();
        let z = c(0.2, -0.4);
        let sum = r1.add(&r2);
        let prod = r1.mul(&r2);
        assert!((sum.eval(z) - (r1.eval(z) + r2.eval(z))).norm() < 1e-13);
        assert!((prod.eval(z) - r1.eval(z) * r2.eval(z)).norm() < 1e-13);
    }

    #[test]
    fn affine_precomposition() {
        // r(z) = z² + 1, r(2z − 1) at z: (2z−1)² + 1
        let r = RationalFunction::new(
            vec![c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(1.0, 0.0)],
        )
        .unwrap();
        let shifted = r.precompose_affine(c(2.0, 0.0), c(-1.0, 0.0));
        for z in [c(0.0, 0.0), c(1.0, 1.0), c(-0.5, 2.0)] {
            let w = c(2.0, 0.0) * z - c(1.0, 0.0);
            assert!((shifted.eval(z) - (w * w + c(1.0, 0.0))).norm() < 1e-13);
        }
    }

    #[test]
    fn wire_format_round_trips() {
        let r = RationalFunction::new(
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(1.0, 0.0), c(0.0, -0.5)],
        )
        .unwrap();
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"num\":[[0.0,0.0],[1.0,0.0]]"));
        let back: RationalFunction = serde_json::from_str(&json).unwrap();
        let z = c(0.3, 0.7);
        assert!((back.eval(z) - r.eval(z)).norm() < 1e-15);
    }

    #[test]
    fn degenerate_denominators_are_rejected() {
        assert!(RationalFunction::new(vec![c(1.0, 0.0)], vec![c(0.0, 0.0)]).is_err());
        assert!(RationalFunction::new(vec![c(1.0, 0.0)], vec![]).is_err());
    }

    #[test]
    fn monomial_powers() {
        let r = RationalFunction::monomial(3);
        assert_eq!(r.degree(), 3);
        assert!((r.eval(c(2.0, 0.0)) - c(8.0, 0.0)).norm() < 1e-15);
        assert_eq!(r.value_at_infinity(), None);
    }
}
