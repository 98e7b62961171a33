//! Quasiharmonic external potentials `W(z) = -|z|^2 + 2 Re V(z)` with
//! polynomial `V(z) = sum_k t_k z^k`.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PotentialError {
    #[error("{name} must be positive and finite, got {value}")]
    NotPositive { name: &'static str, value: f64 },
    #[error("potential needs at least one coefficient t_1")]
    NoCoefficients,
    #[error("coefficient t_{index} is not finite")]
    NonFiniteCoefficient { index: usize },
    #[error("potential is not negative on the cutoff circle: W({at}) = {value}")]
    NotConfined { at: Complex64, value: f64 },
    #[error("W has {count} critical points inside the cutoff disk (expected a single maximum): {points:?}")]
    ExtraCriticalPoints { count: usize, points: Vec<Complex64> },
}

/// Parameters of a quasiharmonic β-ensemble.
///
/// `coeffs[k - 1]` holds `t_k`, so `V(z) = sum_{k>=1} coeffs[k-1] z^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSpec {
    beta: f64,
    hbar: f64,
    t: f64,
    coeffs: Vec<Complex64>,
    cutoff_radius: f64,
}

fn positive(name: &'static str, value: f64) -> Result<f64, PotentialError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(PotentialError::NotPositive { name, value })
    }
}

impl PotentialSpec {
    /// Builds a spec with the default cutoff `4 sqrt(beta t (1 + 2 sum |t_k|))`.
    pub fn new(
        beta: f64,
        hbar: f64,
        t: f64,
        coeffs: Vec<Complex64>,
    ) -> Result<Self, PotentialError> {
        let beta = positive("beta", beta)?;
        let hbar = positive("hbar", hbar)?;
        let t = positive("t", t)?;
        if coeffs.is_empty() {
            return Err(PotentialError::NoCoefficients);
        }
        if let Some(i) = coeffs.iter().position(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(PotentialError::NonFiniteCoefficient { index: i + 1 });
        }
        let cutoff_radius = Self::default_cutoff(beta, t, &coeffs);
        Ok(Self {
            beta,
            hbar,
            t,
            coeffs,
            cutoff_radius,
        })
    }

    /// Spec for `n` particles at area parameter `t` (so `hbar = t / n`).
    pub fn with_particles(
        beta: f64,
        t: f64,
        n: usize,
        coeffs: Vec<Complex64>,
    ) -> Result<Self, PotentialError> {
        positive("n", n as f64)?;
        Self::new(beta, t / n as f64, t, coeffs)
    }

    pub fn default_cutoff(beta: f64, t: f64, coeffs: &[Complex64]) -> f64 {
        let sum: f64 = coeffs.iter().map(|c| c.norm()).sum();
        4.0 * (beta * t * (1.0 + 2.0 * sum)).sqrt()
    }

    pub fn with_cutoff(mut self, cutoff_radius: f64) -> Result<Self, PotentialError> {
        self.cutoff_radius = positive("cutoff_radius", cutoff_radius)?;
        Ok(self)
    }

    /// Same potential at a different area parameter; `hbar` is rescaled so the
    /// particle number `t / hbar` is kept.
    pub fn at_time(&self, t: f64) -> Result<Self, PotentialError> {
        let t = positive("t", t)?;
        let mut out = self.clone();
        out.hbar = self.hbar * t / self.t;
        out.t = t;
        Ok(out)
    }

    /// Same spec with different coefficients (cutoff kept).
    pub fn with_coeffs(&self, coeffs: Vec<Complex64>) -> Result<Self, PotentialError> {
        let cutoff = self.cutoff_radius;
        Self::new(self.beta, self.hbar, self.t, coeffs)?.with_cutoff(cutoff)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Degree of `V`.
    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    pub fn cutoff_radius(&self) -> f64 {
        self.cutoff_radius
    }

    /// Particle number implied by `t = N hbar` (rounded).
    pub fn particles(&self) -> usize {
        (self.t / self.hbar).round() as usize
    }

    /// `V(z)`.
    pub fn v(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = (acc + c) * z;
        }
        acc
    }

    /// `V'(z)`.
    pub fn v_prime(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            acc = acc * z + c * (k as f64 + 1.0);
        }
        acc
    }

    /// `V''(z)`.
    pub fn v_second(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, c) in self.coeffs.iter().enumerate().skip(1).rev() {
            let k = k as f64 + 1.0;
            acc = acc * z + c * (k * (k - 1.0));
        }
        acc
    }

    /// Holomorphic derivative `dW/dz = -conj(z) + V'(z)`.
    pub fn dw(&self, z: Complex64) -> Complex64 {
        -z.conj() + self.v_prime(z)
    }

    /// Checks the confinement assumptions on the cutoff disk: `W < 0` on the
    /// cutoff circle (sampled) and a single critical point of `W` inside.
    pub fn check_confinement(&self) -> Result<(), PotentialError> {
        let r0 = self.cutoff_radius;
        let samples = 1440;
        for j in 0..samples {
            let z = Complex64::from_polar(r0, 2.0 * PI * j as f64 / samples as f64);
            let w = eval_potential(self, z);
            if w >= 0.0 {
                return Err(PotentialError::NotConfined { at: z, value: w });
            }
        }
        let points = self.critical_points();
        if points.len() > 1 {
            return Err(PotentialError::ExtraCriticalPoints {
                count: points.len(),
                points,
            });
        }
        Ok(())
    }

    /// Zeros of `dW` inside the cutoff disk, located by a grid scan for local
    /// minima of `|dW|` followed by Newton polishing.
    pub fn critical_points(&self) -> Vec<Complex64> {
        let r0 = self.cutoff_radius;
        let n = 161usize;
        let h = 2.0 * r0 / (n - 1) as f64;
        let at = |i: usize, j: usize| Complex64::new(-r0 + i as f64 * h, -r0 + j as f64 * h);
        let mag: Vec<f64> = (0..n * n).map(|k| self.dw(at(k % n, k / n)).norm()).collect();
        let mut found: Vec<Complex64> = Vec::new();
        for j in 1..n - 1 {
            for i in 1..n - 1 {
                let m = mag[j * n + i];
                let is_min = (-1i64..=1).all(|dj| {
                    (-1i64..=1).all(|di| {
                        let k = (j as i64 + dj) as usize * n + (i as i64 + di) as usize;
                        mag[k] >= m
                    })
                });
                if !is_min {
                    continue;
                }
                if let Some(z) = self.polish_critical_point(at(i, j)) {
                    if z.norm() <= r0 && !found.iter().any(|p| (p - z).norm() < 1e-6) {
                        found.push(z);
                    }
                }
            }
        }
        found
    }

    fn polish_critical_point(&self, mut z: Complex64) -> Option<Complex64> {
        for _ in 0..50 {
            let f = self.dw(z);
            if f.norm() < 1e-13 * (1.0 + z.norm()) {
                return Some(z);
            }
            let v2 = self.v_second(z);
            let fx = v2 - 1.0;
            let fy = Complex64::i() * (v2 + 1.0);
            let det = fx.re * fy.im - fy.re * fx.im;
            if det.abs() < 1e-300 {
                return None;
            }
            let dx = (-f.re * fy.im + fy.re * f.im) / det;
            let dy = (-fx.re * f.im + f.re * fx.im) / det;
            z += Complex64::new(dx, dy);
            if !z.re.is_finite() || !z.im.is_finite() {
                return None;
            }
        }
        (self.dw(z).norm() < 1e-10).then_some(z)
    }
}

/// `W(z) = -|z|^2 + 2 Re V(z)`.
pub fn eval_potential(spec: &PotentialSpec, z: Complex64) -> f64 {
    -z.norm_sqr() + 2.0 * spec.v(z).re
}

/// Background charge density `sigma = -Laplacian(W) / 4 pi`; constant `1/pi`
/// for every quasiharmonic potential.
pub fn eval_sigma(_spec: &PotentialSpec, _z: Complex64) -> f64 {
    1.0 / PI
}
