use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::grid::Grid2D;
use crate::potential::PotentialSpec;

/// One-particle function `f` of a trace observable `sum_i f(z_i)`.
pub type TraceFn = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// Probe and `zeta` grid for the one-point Ward identity.
#[derive(Debug, Clone, PartialEq)]
pub struct WardSetup {
    pub probe: Complex64,
    pub grid: Grid2D,
}

/// What a run records, fixed before sampling starts.
#[derive(Clone, Default)]
pub struct Observables {
    /// Cell-count histogram support (must cover the cutoff disk for the
    /// counting identity to hold).
    pub density: Option<Grid2D>,
    pub traces: Vec<(String, TraceFn)>,
    /// Keep the full per-measurement series of every trace observable.
    pub keep_series: bool,
    pub loop_probes: Vec<Complex64>,
    /// Distance below which a probe counts as too close to a particle.
    pub loop_epsilon: f64,
    pub ward: Option<WardSetup>,
}

impl fmt::Debug for Observables {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.traces.iter().map(|(n, _)| n.as_str()).collect();
        f.debug_struct("Observables")
            .field("density", &self.density.as_ref().map(|g| (g.nx(), g.ny())))
            .field("traces", &names)
            .field("keep_series", &self.keep_series)
            .field("loop_probes", &self.loop_probes)
            .field("loop_epsilon", &self.loop_epsilon)
            .field("ward", &self.ward)
            .finish()
    }
}

impl Observables {
    pub fn with_density(mut self, grid: Grid2D) -> Self {
        self.density = Some(grid);
        self
    }

    pub fn with_trace(mut self, name: impl Into<String>, f: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static) -> Self {
        self.traces.push((name.into(), Arc::new(f)));
        self
    }

    /// Registers `phi(z) = -beta hbar sum_j log |z - z_j|^2` at `z` as a
    /// trace observable.
    pub fn with_phi(self, name: impl Into<String>, z: Complex64, spec: &PotentialSpec) -> Self {
        let scale = -spec.beta() * spec.hbar();
        self.with_trace(name, move |w| Complex64::new(scale * (z - w).norm_sqr().ln(), 0.0))
    }

    pub fn with_loop_probes(mut self, probes: Vec<Complex64>, epsilon: f64) -> Self {
        self.loop_probes = probes;
        self.loop_epsilon = epsilon;
        self
    }

    /// Default loop probes: `count` points on the circle of radius
    /// `2 sqrt(beta t)`.
    pub fn default_loop_probes(spec: &PotentialSpec, count: usize) -> Vec<Complex64> {
        let radius = 2.0 * (spec.beta() * spec.t()).sqrt();
        (0..count)
            .map(|k| Complex64::from_polar(radius, 2.0 * std::f64::consts::PI * k as f64 / count as f64))
            .collect()
    }

    pub fn with_ward(mut self, probe: Complex64, grid: Grid2D) -> Self {
        self.ward = Some(WardSetup { probe, grid });
        self
    }

    pub fn keep_series(mut self) -> Self {
        self.keep_series = true;
        self
    }

    pub(crate) fn trace_index(&self, name: &str) -> Option<usize> {
        self.traces.iter().position(|(n, _)| n == name)
    }
}

/// `L(z) = (1/hbar) sum dW(z_i) / (z - z_i) + (beta/2) (sum 1/(z - z_i))^2
/// + (1 - beta/2) sum 1/(z - z_i)^2` for one configuration.
pub fn loop_kernel(spec: &PotentialSpec, points: &[Complex64], z: Complex64) -> Complex64 {
    let mut s1 = Complex64::new(0.0, 0.0);
    let mut s2 = Complex64::new(0.0, 0.0);
    let mut sw = Complex64::new(0.0, 0.0);
    for zi in points {
        let inv = (z - zi).inv();
        s1 += inv;
        s2 += inv * inv;
        sw += spec.dw(*zi) * inv;
    }
    let beta = spec.beta();
    sw / spec.hbar() + 0.5 * beta * s1 * s1 + (1.0 - 0.5 * beta) * s2
}

/// Both sides of `sum_{i,j} 1/((z - z_i)(z - z_j))
/// = sum_{i != j} 2/((z - z_i)(z_i - z_j)) + sum_i 1/(z - z_i)^2`.
pub fn pair_identity_terms(points: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let s1: Complex64 = points.iter().map(|zi| (z - zi).inv()).sum();
    let mut rhs = Complex64::new(0.0, 0.0);
    for (i, zi) in points.iter().enumerate() {
        rhs += (z - zi).powi(-2);
        for (j, zj) in points.iter().enumerate() {
            if i != j {
                rhs += 2.0 / ((z - zi) * (zi - zj));
            }
        }
    }
    (s1 * s1, rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pair_identity_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [2, 5, 11] {
            let pts: Vec<Complex64> = (0..n)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let (lhs, rhs) = pair_identity_terms(&pts, Complex64::new(2.2, 0.7));
            assert!((lhs - rhs).norm() < 1e-12 * lhs.norm().max(1.0));
        }
    }

    #[test]
    fn one_particle_kernel() {
        // N = 1, W = -|z|^2: L = -conj(z1)/(hbar (z - z1)) + 1/(z - z1)^2
        let spec = PotentialSpec::new(1.5, 0.3, 0.3, vec![Complex64::new(0.0, 0.0)]).unwrap();
        let (z, z1) = (Complex64::new(2.0, 0.5), Complex64::new(0.1, -0.2));
        let want = -z1.conj() / (0.3 * (z - z1)) + (z - z1).powi(-2);
        assert!((loop_kernel(&spec, &[z1], z) - want).norm() < 1e-14);
    }

    #[test]
    fn phi_observable() {
        let spec = PotentialSpec::new(2.0, 0.1, 1.0, vec![Complex64::new(0.0, 0.0)]).unwrap();
        let obs = Observables::default().with_phi("phi", Complex64::new(0.0, 0.0), &spec);
        let f = &obs.traces[0].1;
        assert!((f(Complex64::new(2.0, 0.0)).re + 0.2 * 4f64.ln()).abs() < 1e-15);
        assert_eq!(obs.trace_index("phi"), Some(0));
        assert_eq!(obs.trace_index("nope"), None);
    }
}
