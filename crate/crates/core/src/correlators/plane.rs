use std::f64::consts::PI;

use num_complex::Complex64;

use super::CorrelatorError;
use crate::equilibrium::{unit_node, LaurentMap};
use crate::quadrature::gauss_legendre_on;

/// Real function on the plane with a gradient.
pub trait PlaneFunction {
    fn value(&self, z: Complex64) -> f64;

    /// `(df/dx, df/dy)`; central differences unless overridden.
    fn gradient(&self, z: Complex64) -> (f64, f64) {
        let h = 1e-5 * (1.0 + z.norm());
        let dx = (self.value(z + h) - self.value(z - h)) / (2.0 * h);
        let ih = Complex64::new(0.0, h);
        let dy = (self.value(z + ih) - self.value(z - ih)) / (2.0 * h);
        (dx, dy)
    }
}

impl<F: Fn(Complex64) -> f64> PlaneFunction for F {
    fn value(&self, z: Complex64) -> f64 {
        self(z)
    }
}

/// `Re P(z)` for a polynomial `P(z) = sum_k a_k z^k`, differentiated exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicPolynomial {
    /// `a_0, a_1, ...`
    pub coeffs: Vec<Complex64>,
}

impl HarmonicPolynomial {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        Self { coeffs }
    }

    /// `Re z`.
    pub fn re_z() -> Self {
        Self::new(vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)])
    }

    /// `Im z = Re(-i z)`.
    pub fn im_z() -> Self {
        Self::new(vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, -1.0)])
    }

    fn eval(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for a in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + a;
        }
        (p, dp)
    }
}

impl PlaneFunction for HarmonicPolynomial {
    fn value(&self, z: Complex64) -> f64 {
        self.eval(z).0.re
    }

    // grad Re P = (Re P', -Im P')
    fn gradient(&self, z: Complex64) -> (f64, f64) {
        let d = self.eval(z).1;
        (d.re, -d.im)
    }
}

/// Nodes and weights for `\int_D f d^2z` over the droplet of `map`.
///
/// The droplet is swept by segments from its centroid `c` to the boundary:
/// `z = c + s (b(theta) - c)` with Gauss-Legendre in `s` and the trapezoid
/// rule in `theta`, which needs the droplet to be star-shaped about `c`.
pub fn droplet_quadrature(
    map: &LaurentMap,
    n_s: usize,
    n_theta: usize,
) -> Result<Vec<(Complex64, f64)>, CorrelatorError> {
    let c = centroid(map, n_theta);
    let (s_nodes, s_weights) = gauss_legendre_on(n_s, 0.0, 1.0);
    let h = 2.0 * PI / n_theta as f64;
    let mut out = Vec::with_capacity(n_s * n_theta);
    for j in 0..n_theta {
        let w = unit_node(j, n_theta);
        let b = map.eval(w);
        let db = Complex64::i() * w * map.deriv(w);
        let jac = ((b - c).conj() * db).im;
        if !(jac > 0.0) {
            return Err(CorrelatorError::NotStarShaped(c));
        }
        for (s, ws) in s_nodes.iter().zip(&s_weights) {
            out.push((c + (b - c) * *s, ws * s * jac * h));
        }
    }
    Ok(out)
}

/// `(1/A) \int_D z d^2z` from `\int_D z = (1/2i) \oint |z|^2 dz`.
fn centroid(map: &LaurentMap, m: usize) -> Complex64 {
    let h = 2.0 * PI / m as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..m {
        let w = unit_node(j, m);
        let z = map.eval(w);
        acc += z.norm_sqr() * Complex64::i() * w * map.deriv(w) * h;
    }
    acc / (2.0 * Complex64::i()) / map.area()
}
