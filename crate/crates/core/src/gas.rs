//! Dyson-gas configurations and their Coulomb energy.

use num_complex::Complex64;
use thiserror::Error;

use crate::potential::{eval_potential, PotentialSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GasError {
    #[error("points {0} and {1} coincide: infinite energy")]
    InfiniteEnergy(usize, usize),
    #[error("point {index} at {at} lies outside the cutoff disk of radius {cutoff}")]
    OutsideCutoff {
        index: usize,
        at: Complex64,
        cutoff: f64,
    },
    #[error("empty configuration")]
    Empty,
}

/// `E = -sum_{i<j} log|z_i - z_j|^2 - (1 / (beta hbar)) sum_j W(z_j)`.
///
/// Terms are summed in a canonical (lexicographic) point order, so the result
/// is bit-for-bit independent of the order of `points`.
pub fn gas_energy(spec: &PotentialSpec, points: &[Complex64]) -> Result<f64, GasError> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        let (za, zb) = (points[a], points[b]);
        za.re.total_cmp(&zb.re).then(za.im.total_cmp(&zb.im))
    });
    let mut pair = 0.0;
    for (p, &i) in order.iter().enumerate() {
        for &j in &order[p + 1..] {
            let d2 = (points[i] - points[j]).norm_sqr();
            if d2 == 0.0 {
                return Err(GasError::InfiniteEnergy(i.min(j), i.max(j)));
            }
            pair -= d2.ln();
        }
    }
    let field: f64 = order.iter().map(|&i| eval_potential(spec, points[i])).sum();
    Ok(pair - field / (spec.beta() * spec.hbar()))
}

/// `sum_{k != skip} log(|from - z_k|^2 / |to - z_k|^2)`, or `+inf` when `to`
/// coincides with one of the other points.
///
/// Squared distances are multiplied in short blocks so that only one
/// logarithm per block is taken.
pub(crate) fn log_distance_ratio(points: &[Complex64], skip: usize, from: Complex64, to: Complex64) -> f64 {
    const BLOCK: usize = 8;
    let mut total = 0.0;
    let mut num = 1.0;
    let mut den = 1.0;
    let mut filled = 0;
    for (k, zk) in points.iter().enumerate() {
        if k == skip {
            continue;
        }
        let a = (from - zk).norm_sqr();
        let b = (to - zk).norm_sqr();
        if b == 0.0 {
            return f64::INFINITY;
        }
        num *= a;
        den *= b;
        filled += 1;
        if filled == BLOCK {
            total += flush(num, den);
            num = 1.0;
            den = 1.0;
            filled = 0;
        }
    }
    if filled > 0 {
        total += flush(num, den);
    }
    total
}

fn flush(num: f64, den: f64) -> f64 {
    let ratio = num / den;
    if ratio.is_normal() {
        ratio.ln()
    } else {
        num.ln() - den.ln()
    }
}

/// N eigenvalue positions with their cached energy.
#[derive(Debug, Clone, PartialEq)]
pub struct GasState {
    points: Vec<Complex64>,
    energy: f64,
}

impl GasState {
    /// Validates distinctness and the cutoff, and caches the energy.
    pub fn new(spec: &PotentialSpec, points: Vec<Complex64>) -> Result<Self, GasError> {
        if points.is_empty() {
            return Err(GasError::Empty);
        }
        let cutoff = spec.cutoff_radius();
        if let Some((index, at)) = points.iter().enumerate().find(|(_, z)| z.norm() > cutoff) {
            return Err(GasError::OutsideCutoff {
                index,
                at: *at,
                cutoff,
            });
        }
        let energy = gas_energy(spec, &points)?;
        Ok(Self { points, energy })
    }

    /// Deterministic start: points on a sunflower spiral filling the disk of
    /// area `pi beta t` around the origin.
    pub fn initial(spec: &PotentialSpec, n: usize) -> Result<Self, GasError> {
        let radius = (spec.beta() * spec.t()).sqrt().min(0.9 * spec.cutoff_radius());
        let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
        let points = (0..n)
            .map(|k| {
                let r = radius * ((k as f64 + 0.5) / n as f64).sqrt();
                Complex64::from_polar(r, golden * k as f64)
            })
            .collect();
        Self::new(spec, points)
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Energy change for moving point `j` to `to`; `+inf` on coincidence.
    pub fn move_energy_change(&self, spec: &PotentialSpec, j: usize, to: Complex64) -> f64 {
        let from = self.points[j];
        let pair = log_distance_ratio(&self.points, j, from, to);
        if pair.is_infinite() {
            return f64::INFINITY;
        }
        let field = eval_potential(spec, to) - eval_potential(spec, from);
        pair - field / (spec.beta() * spec.hbar())
    }

    /// Applies an accepted move; the cached energy is advanced by `delta`.
    pub(crate) fn apply_move(&mut self, j: usize, to: Complex64, delta: f64) {
        self.points[j] = to;
        self.energy += delta;
    }

    /// Recomputes the cached energy from scratch.
    pub fn refresh_energy(&mut self, spec: &PotentialSpec) -> Result<f64, GasError> {
        self.energy = gas_energy(spec, &self.points)?;
        Ok(self.energy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn gaussian(beta: f64, hbar: f64) -> PotentialSpec {
        PotentialSpec::new(beta, hbar, 1.0, vec![c(0.0, 0.0)]).unwrap()
    }

    fn random_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    }

    #[test]
    fn energy_examples() {
        let s = gaussian(1.0, 1.0);
        let e = gas_energy(&s, &[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!((e - 1.0).abs() < 1e-15);
        let s = gaussian(2.5, 0.3);
        assert_eq!(gas_energy(&s, &[c(0.0, 0.0)]).unwrap(), 0.0);
    }

    #[test]
    fn coincident_points_are_infinite() {
        let s = gaussian(1.0, 1.0);
        assert_eq!(
            gas_energy(&s, &[c(0.5, 0.0), c(0.1, 0.1), c(0.5, 0.0)]),
            Err(GasError::InfiniteEnergy(0, 2))
        );
        assert!(GasState::new(&s, vec![c(0.2, 0.0), c(0.2, 0.0)]).is_err());
    }

    #[test]
    fn state_rejects_points_outside_cutoff() {
        let s = gaussian(1.0, 1.0).with_cutoff(1.0).unwrap();
        assert!(matches!(
            GasState::new(&s, vec![c(0.0, 0.0), c(1.5, 0.0)]),
            Err(GasError::OutsideCutoff { index: 1, .. })
        ));
    }

    #[test]
    fn permutation_symmetry_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s = PotentialSpec::new(1.3, 0.05, 1.0, vec![c(0.1, 0.2), c(0.05, -0.02)]).unwrap();
        let pts = random_points(&mut rng, 12);
        let e0 = gas_energy(&s, &pts).unwrap();
        for _ in 0..10 {
            let mut p = pts.clone();
            p.shuffle(&mut rng);
            assert_eq!(gas_energy(&s, &p).unwrap(), e0);
        }
    }

    #[test]
    fn incremental_energy_matches_fresh_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = PotentialSpec::new(1.0, 0.02, 1.0, vec![c(0.0, 0.0), c(0.1, 0.0)]).unwrap();
        let pts = random_points(&mut rng, 40);
        let mut state = GasState::new(&s, pts).unwrap();
        for _ in 0..200 {
            let j = rng.random_range(0..state.len());
            let to = state.points()[j] + c(rng.random_range(-0.1..0.1), rng.random_range(-0.1..0.1));
            let d = state.move_energy_change(&s, j, to);
            state.apply_move(j, to, d);
        }
        let cached = state.energy();
        let fresh = gas_energy(&s, state.points()).unwrap();
        assert!((cached - fresh).abs() <= 1e-10 * fresh.abs());
    }

    #[test]
    fn move_onto_other_point_is_infinite() {
        let s = gaussian(1.0, 1.0);
        let state = GasState::new(&s, vec![c(0.0, 0.0), c(0.5, 0.5), c(-0.3, 0.2)]).unwrap();
        assert_eq!(state.move_energy_change(&s, 0, c(0.5, 0.5)), f64::INFINITY);
    }

    proptest! {
        #[test]
        fn rotation_and_conjugation_invariance(
            raw in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..10),
            theta in 0.0f64..std::f64::consts::TAU,
        ) {
            let s = gaussian(1.7, 0.2);
            let pts: Vec<Complex64> = raw.iter().map(|(x, y)| c(*x, *y)).collect();
            prop_assume!(gas_energy(&s, &pts).is_ok());
            let e = gas_energy(&s, &pts).unwrap();
            let rot = Complex64::from_polar(1.0, theta);
            let rotated: Vec<Complex64> = pts.iter().map(|z| z * rot).collect();
            let conj: Vec<Complex64> = pts.iter().map(|z| z.conj()).collect();
            prop_assert!((gas_energy(&s, &rotated).unwrap() - e).abs() <= 1e-12 * e.abs().max(1.0));
            prop_assert!((gas_energy(&s, &conj).unwrap() - e).abs() <= 1e-12);
        }

        #[test]
        fn scaling_law(
            raw in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..10),
            lambda in 0.2f64..3.0,
        ) {
            let (beta, hbar) = (1.4, 0.3);
            let s = gaussian(beta, hbar);
            let pts: Vec<Complex64> = raw.iter().map(|(x, y)| c(*x, *y)).collect();
            prop_assume!(gas_energy(&s, &pts).is_ok());
            let n = pts.len() as f64;
            let e = gas_energy(&s, &pts).unwrap();
            let scaled: Vec<Complex64> = pts.iter().map(|z| z * lambda).collect();
            let sum_sq: f64 = pts.iter().map(|z| z.norm_sqr()).sum();
            let expected = e - n * (n - 1.0) * lambda.ln()
                + (lambda * lambda - 1.0) * sum_sq / (beta * hbar);
            let got = gas_energy(&s, &scaled).unwrap();
            prop_assert!((got - expected).abs() <= 1e-11 * (1.0 + expected.abs()));
        }
    }
}
