use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::laurent::unit_node;
use super::{EquilibriumError, LaurentMap};

/// Harmonic continuation of boundary data into the droplet exterior,
/// bounded at infinity.
///
/// The data are pulled back to `|w| = 1`, expanded in Fourier modes
/// `c_k e^{ik theta}`, and each mode is continued as `c_k |w|^{-|k|} e^{ik arg w}`.
#[derive(Debug, Clone)]
pub struct HarmonicExtension {
    map: LaurentMap,
    /// Fourier coefficients indexed by FFT bin (`k` and `k - m` share a bin).
    modes: Vec<Complex64>,
    under_resolved: bool,
}

/// Fraction of the coefficient norm allowed above mode `m / 4`.
const TAIL_LIMIT: f64 = 1e-8;

/// Builds the continuation of `values` sampled at the `m = values.len()`
/// uniform nodes `w_j = exp(2 pi i j / m)`.
pub fn harmonic_continuation(map: &LaurentMap, values: &[f64]) -> HarmonicExtension {
    let m = values.len();
    assert!(m >= 4, "need at least four boundary samples");
    let mut buf: Vec<Complex64> = values.iter().map(|v| Complex64::new(*v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let modes: Vec<Complex64> = buf.iter().map(|c| c / m as f64).collect();
    let total: f64 = modes.iter().map(|c| c.norm_sqr()).sum();
    let tail: f64 = modes
        .iter()
        .enumerate()
        .filter(|(k, _)| signed_mode(*k, m).unsigned_abs() as usize > m / 4)
        .map(|(_, c)| c.norm_sqr())
        .sum();
    let under_resolved = total > 0.0 && (tail / total).sqrt() > TAIL_LIMIT;
    if under_resolved {
        log::warn!(
            "under-resolved boundary data: {:.3e} of the norm above mode {}",
            (tail / total).sqrt(),
            m / 4
        );
    }
    HarmonicExtension {
        map: map.clone(),
        modes,
        under_resolved,
    }
}

/// FFT bin to signed frequency in `(-m/2, m/2]`.
fn signed_mode(k: usize, m: usize) -> i64 {
    if k <= m / 2 {
        k as i64
    } else {
        k as i64 - m as i64
    }
}

impl HarmonicExtension {
    /// Convenience constructor sampling `f` at the boundary nodes.
    pub fn from_fn(map: &LaurentMap, m: usize, f: impl Fn(Complex64) -> f64) -> Self {
        let values: Vec<f64> = map.boundary(m).into_iter().map(f).collect();
        harmonic_continuation(map, &values)
    }

    pub fn nodes(&self) -> usize {
        self.modes.len()
    }

    pub fn under_resolved(&self) -> bool {
        self.under_resolved
    }

    pub fn map(&self) -> &LaurentMap {
        &self.map
    }

    /// Value at `w` in the closed exterior of the unit disk.
    pub fn eval_w(&self, w: Complex64) -> f64 {
        let m = self.modes.len();
        let (rho, phi) = w.to_polar();
        let mut acc = 0.0;
        for (k, c) in self.modes.iter().enumerate() {
            let s = signed_mode(k, m);
            // Nyquist bin of an even grid: take the real (cos) part only
            let c = if m % 2 == 0 && k == m / 2 { Complex64::new(c.re, 0.0) } else { *c };
            let phase = Complex64::from_polar(rho.powi(-(s.abs() as i32)), s as f64 * phi);
            acc += (c * phase).re;
        }
        acc
    }

    /// `f^H(z)` for `z` in the closed droplet exterior.
    pub fn eval(&self, z: Complex64) -> Result<f64, EquilibriumError> {
        Ok(self.eval_w(self.map.invert(z)?))
    }

    /// Outward (into the exterior) normal derivative of `f^H` at the nodes,
    /// `-sum |k| c_k e^{ik theta_j} / |z'(w_j)|`.
    pub fn normal_derivative(&self) -> Vec<f64> {
        let m = self.modes.len();
        let mut buf: Vec<Complex64> = self
            .modes
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let s = signed_mode(k, m);
                let c = if m % 2 == 0 && k == m / 2 { Complex64::new(c.re, 0.0) } else { *c };
                -c * s.abs() as f64
            })
            .collect();
        FftPlanner::new().plan_fft_inverse(m).process(&mut buf);
        buf.iter()
            .enumerate()
            .map(|(j, v)| v.re / self.map.deriv(unit_node(j, m)).norm())
            .collect()
    }

    /// `\oint f dn(g^H) |dz|` for boundary samples `f` at the same nodes.
    pub fn flux_against(&self, f: &[f64]) -> f64 {
        let m = self.modes.len();
        let dn = self.normal_derivative();
        let h = 2.0 * PI / m as f64;
        f.iter()
            .zip(&dn)
            .enumerate()
            .map(|(j, (fv, d))| fv * d * self.map.deriv(unit_node(j, m)).norm() * h)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn constant_data_extend_to_constant() {
        let map = LaurentMap::new(1.0, vec![c(0.1, 0.0), c(0.2, 0.1)]);
        let ext = harmonic_continuation(&map, &vec![2.5; 128]);
        for z in [c(3.0, 0.0), c(0.0, -2.0), c(10.0, 10.0)] {
            assert!((ext.eval(z).unwrap() - 2.5).abs() < 1e-13);
        }
        assert!(ext.normal_derivative().iter().all(|d| d.abs() < 1e-12));
    }

    #[test]
    fn circle_real_part() {
        let radius = 1.0;
        let map = LaurentMap::circle(radius, 0);
        let ext = HarmonicExtension::from_fn(&map, 64, |z| z.re);
        assert!((ext.eval(c(2.0, 0.0)).unwrap() - 0.5).abs() < 1e-14);
        let r2 = LaurentMap::circle(1.7, 0);
        let ext = HarmonicExtension::from_fn(&r2, 64, |z| z.re);
        let z = c(2.0, 1.5);
        assert!((ext.eval(z).unwrap() - 1.7 * 1.7 * z.re / z.norm_sqr()).abs() < 1e-13);
    }

    #[test]
    fn matches_poisson_kernel_quadrature() {
        // exterior Poisson kernel of a circle of radius R:
        // f^H(z) = (1 / 2 pi) \int f(R e^{i phi}) (|z|^2 - R^2) / |z - R e^{i phi}|^2 dphi
        let radius = 1.3;
        let map = LaurentMap::circle(radius, 0);
        let f = |z: Complex64| (z.re * z.im).sin() + 0.3 * z.re;
        let ext = HarmonicExtension::from_fn(&map, 128, f);
        let z = c(1.9, -0.7);
        let q = 4000;
        let oracle: f64 = (0..q)
            .map(|j| {
                let p = Complex64::from_polar(radius, 2.0 * PI * j as f64 / q as f64);
                f(p) * (z.norm_sqr() - radius * radius) / (z - p).norm_sqr()
            })
            .sum::<f64>()
            / q as f64;
        assert!((ext.eval(z).unwrap() - oracle).abs() < 1e-10);
    }

    #[test]
    fn maximum_principle() {
        let map = LaurentMap::new(1.0, vec![c(0.0, 0.0), c(0.15, 0.0), c(0.0, 0.05)]);
        let f = |z: Complex64| (2.0 * z.re).cos() * z.im;
        let ext = HarmonicExtension::from_fn(&map, 256, f);
        let bmax = map.boundary(256).into_iter().map(f).fold(f64::MIN, f64::max);
        for a in [1.01, 1.2, 2.0, 5.0] {
            for j in 0..37 {
                let w = Complex64::from_polar(a, j as f64 * 0.17);
                assert!(ext.eval_w(w) <= bmax + 1e-8);
            }
        }
    }

    #[test]
    fn normal_derivative_on_circle() {
        // x^H = R^2 x / |z|^2 has d/dr = -cos(theta) at r = R
        let map = LaurentMap::circle(2.0, 0);
        let ext = HarmonicExtension::from_fn(&map, 64, |z| z.re);
        for (j, d) in ext.normal_derivative().iter().enumerate() {
            let theta = 2.0 * PI * j as f64 / 64.0;
            assert!((d + theta.cos()).abs() < 1e-13);
        }
    }

    #[test]
    fn rough_data_are_flagged() {
        let map = LaurentMap::circle(1.0, 0);
        let values: Vec<f64> = (0..64).map(|j| if j % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert!(harmonic_continuation(&map, &values).under_resolved());
        assert!(!HarmonicExtension::from_fn(&map, 64, |z| z.re).under_resolved());
    }
}
