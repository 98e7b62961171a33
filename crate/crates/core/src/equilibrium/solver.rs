use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::moments::moments_with_nodes;
use super::{EquilibriumError, LaurentMap};
use crate::potential::PotentialSpec;

/// Converged max-norm of the moment/area residual.
pub const SOLVER_TOLERANCE: f64 = 1e-10;

const FD_STEP: f64 = 1e-7;
const MAX_ITERATIONS: usize = 60;
const MAX_HALVINGS: usize = 30;

/// Equilibrium droplet for a potential spec.
#[derive(Debug, Clone, PartialEq)]
pub struct DropletSolution {
    pub map: LaurentMap,
    pub target: Vec<Complex64>,
    pub achieved: Vec<Complex64>,
    pub area: f64,
    pub residual: f64,
    pub beta: f64,
    pub t: f64,
}

/// Solves the inverse potential problem for `spec`: the Laurent map of order
/// `deg V - 1` whose area is `pi beta t` and whose harmonic moments are the
/// coefficients of `V`.
///
/// Newton starts from the disk `r = sqrt(beta t)`; if it fails, the
/// coefficients are switched on gradually and each stage is warm-started
/// from the previous one.
pub fn solve_droplet(spec: &PotentialSpec) -> Result<DropletSolution, EquilibriumError> {
    let start = LaurentMap::circle((spec.beta() * spec.t()).sqrt(), spec.degree() - 1);
    if let Ok(sol) = solve_droplet_from(spec, &start) {
        return Ok(sol);
    }
    let mut current = start;
    let mut s: f64 = 0.0;
    let mut ds: f64 = 0.25;
    while s < 1.0 {
        let next = (s + ds).min(1.0);
        let scaled: Vec<Complex64> = spec.coeffs().iter().map(|c| c * next).collect();
        let stage = spec
            .with_coeffs(scaled)
            .map_err(|e| EquilibriumError::NoDroplet(e.to_string()))?;
        match newton(&stage, &current) {
            Ok(map) => {
                current = map;
                s = next;
                ds = (ds * 1.5).min(0.25);
            }
            Err(e) => {
                ds *= 0.5;
                if ds < 1e-4 {
                    return Err(e);
                }
            }
        }
    }
    finish(spec, current)
}

/// Newton solve warm-started from `initial` (its order is adjusted to
/// `deg V - 1`).
pub fn solve_droplet_from(
    spec: &PotentialSpec,
    initial: &LaurentMap,
) -> Result<DropletSolution, EquilibriumError> {
    let m = spec.degree() - 1;
    let mut u: Vec<Complex64> = initial.coeffs().to_vec();
    u.resize(m + 1, Complex64::new(0.0, 0.0));
    let start = LaurentMap::new(initial.r(), u);
    let map = newton(spec, &start)?;
    finish(spec, map)
}

fn finish(spec: &PotentialSpec, map: LaurentMap) -> Result<DropletSolution, EquilibriumError> {
    map.check_univalent()
        .map_err(|e| EquilibriumError::NoDroplet(e.to_string()))?;
    if map.winding_number(Complex64::new(0.0, 0.0)) != 1 {
        return Err(EquilibriumError::NoDroplet(
            "origin is not inside the droplet".into(),
        ));
    }
    let diameter = map.diameter();
    if diameter >= spec.cutoff_radius() {
        return Err(EquilibriumError::CutoffTooSmall {
            diameter,
            cutoff: spec.cutoff_radius(),
        });
    }
    let n = spec.degree();
    let achieved = moments_with_nodes(&map, n, map.quadrature_nodes(n));
    let residual = residual_vector(spec, &map)
        .iter()
        .fold(0.0f64, |a, v| a.max(v.abs()));
    Ok(DropletSolution {
        area: map.area(),
        target: spec.coeffs().to_vec(),
        achieved,
        residual,
        beta: spec.beta(),
        t: spec.t(),
        map,
    })
}

/// `[area / pi - beta t, Re(t_k - target_k), Im(t_k - target_k), ...]`.
fn residual_vector(spec: &PotentialSpec, map: &LaurentMap) -> Vec<f64> {
    let n = spec.degree();
    let moments = moments_with_nodes(map, n, map.quadrature_nodes(n));
    let mut f = Vec::with_capacity(1 + 2 * n);
    f.push(map.area() / PI - spec.beta() * spec.t());
    for (got, want) in moments.iter().zip(spec.coeffs()) {
        let d = got - want;
        f.push(d.re);
        f.push(d.im);
    }
    f
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

fn newton(spec: &PotentialSpec, start: &LaurentMap) -> Result<LaurentMap, EquilibriumError> {
    let mut x = start.to_params();
    let dim = x.len();
    let mut map = start.clone();
    let mut f = residual_vector(spec, &map);
    let mut norm = max_abs(&f);
    for _ in 0..MAX_ITERATIONS {
        if norm < SOLVER_TOLERANCE {
            return Ok(map);
        }
        let mut jac = DMatrix::<f64>::zeros(dim, dim);
        for col in 0..dim {
            let mut xp = x.clone();
            xp[col] += FD_STEP;
            let mp = LaurentMap::from_params(&xp)
                .ok_or_else(|| EquilibriumError::NoDroplet("radius left (0, inf)".into()))?;
            let fp = residual_vector(spec, &mp);
            for row in 0..dim {
                jac[(row, col)] = (fp[row] - f[row]) / FD_STEP;
            }
        }
        let rhs = DVector::from_iterator(dim, f.iter().map(|v| -v));
        let step = jac
            .lu()
            .solve(&rhs)
            .ok_or_else(|| EquilibriumError::NoDroplet("singular Jacobian".into()))?;
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, d)| a + lambda * d).collect();
            if let Some(tm) = LaurentMap::from_params(&trial) {
                if tm.regular_exterior() {
                    let tf = residual_vector(spec, &tm);
                    let tn = max_abs(&tf);
                    if tn < norm {
                        x = trial;
                        map = tm;
                        f = tf;
                        norm = tn;
                        accepted = true;
                        break;
                    }
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Err(EquilibriumError::NoDroplet(format!(
                "Newton stalled at residual {norm:e}"
            )));
        }
    }
    if norm < SOLVER_TOLERANCE {
        Ok(map)
    } else {
        Err(EquilibriumError::NoDroplet(format!(
            "Newton did not converge in {MAX_ITERATIONS} iterations (residual {norm:e})"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn spec(beta: f64, t: f64, coeffs: Vec<Complex64>) -> PotentialSpec {
        PotentialSpec::new(beta, 0.01, t, coeffs).unwrap()
    }

    #[test]
    fn gaussian_gives_unit_circle() {
        let sol = solve_droplet(&spec(1.0, 1.0, vec![c(0.0, 0.0)])).unwrap();
        assert!((sol.map.r() - 1.0).abs() < 1e-12);
        assert!(sol.map.coeffs().iter().all(|u| u.norm() < 1e-12));
    }

    #[test]
    fn ginibre_girko_ellipse() {
        let sol = solve_droplet(&spec(1.0, 1.0, vec![c(0.0, 0.0), c(0.1, 0.0)])).unwrap();
        let r = sol.map.r();
        let u1 = sol.map.coeff(1);
        assert!(u1.im.abs() < 1e-12 && sol.map.coeff(0).norm() < 1e-12);
        assert!((r + u1.re - 1.5f64.sqrt()).abs() < 1e-9);
        assert!((r - u1.re - (2.0f64 / 3.0).sqrt()).abs() < 1e-9);
        assert!(sol.residual < SOLVER_TOLERANCE);
    }

    #[test]
    fn linear_term_shifts_the_disk() {
        let sol = solve_droplet(&spec(1.0, 1.0, vec![c(0.3, 0.0)])).unwrap();
        assert!((sol.map.r() - 1.0).abs() < 1e-10);
        assert!((sol.map.coeff(0) - c(0.3, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn ellipse_center_formula() {
        // z0 = (2 t1 conj(t2) + conj(t1)) / (1 - 4 |t2|^2)
        let (t1, t2) = (c(0.1, 0.05), c(0.08, -0.03));
        let sol = solve_droplet(&spec(1.0, 0.7, vec![t1, t2])).unwrap();
        let z0 = (2.0 * t1 * t2.conj() + t1.conj()) / (1.0 - 4.0 * t2.norm_sqr());
        assert!((sol.map.coeff(0) - z0).norm() < 1e-9);
    }

    #[test]
    fn cubic_potential_gives_hypotrochoid() {
        let t3 = 0.1;
        let sol = solve_droplet(&spec(1.0, 1.0, vec![c(0.0, 0.0), c(0.0, 0.0), c(t3, 0.0)])).unwrap();
        let map = &sol.map;
        assert!(map.coeff(0).norm() < 1e-10 && map.coeff(1).norm() < 1e-10);
        // round trip against the moment quadrature
        let (area, t) = super::super::moments_of_map(map, 3).unwrap();
        assert!((area - PI).abs() < 1e-9);
        assert!((t[2] - c(t3, 0.0)).norm() < 1e-10);
        // u_2 = 3 conj(t3) r^2 with r^2 - 18 t3^2 r^4 = t
        let r2 = (1.0 - (1.0f64 - 72.0 * t3 * t3).sqrt()) / (36.0 * t3 * t3);
        assert!((map.r() - r2.sqrt()).abs() < 1e-9);
        assert!((map.coeff(2) - c(3.0 * t3 * r2, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn beta_scales_the_area() {
        let sol = solve_droplet(&spec(2.0, 0.5, vec![c(0.0, 0.0), c(0.1, 0.0)])).unwrap();
        assert!((sol.area - PI).abs() < 1e-8 * PI);
    }

    #[test]
    fn past_critical_cubic_has_no_droplet() {
        // t_c = 1 / (72 t3^2) for the pure cubic
        let s = spec(1.0, 1.5, vec![c(0.0, 0.0), c(0.0, 0.0), c(0.1, 0.0)])
            .with_cutoff(50.0)
            .unwrap();
        assert!(matches!(solve_droplet(&s), Err(EquilibriumError::NoDroplet(_))));
    }

    #[test]
    fn cutoff_is_checked() {
        let s = spec(1.0, 1.0, vec![c(0.0, 0.0)]).with_cutoff(1.5).unwrap();
        assert!(matches!(
            solve_droplet(&s),
            Err(EquilibriumError::CutoffTooSmall { .. })
        ));
    }
}
