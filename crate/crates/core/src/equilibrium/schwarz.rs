use num_complex::Complex64;

use super::laurent::unit_node;
use super::LaurentMap;
use crate::potential::PotentialSpec;

/// `max_j |S(z_j) - conj(z_j)|` over boundary nodes, with
/// `S = V' + G_C` and the Cauchy transform of the droplet
/// `G_C(z) = (1 / 2 pi i) \oint conj(zeta) d zeta / (z - zeta)` taken as the
/// exterior boundary limit.
///
/// Subtracting `conj(z_j)` from the numerator leaves a smooth periodic
/// integrand (its value at the node itself is `-conj(tau) / tau` for the
/// tangent `tau`), and `\oint d zeta / (z - zeta)` vanishes from outside, so
/// the trapezoid rule converges spectrally.
pub fn schwarz_residual(map: &LaurentMap, spec: &PotentialSpec) -> f64 {
    let m = map.quadrature_nodes(spec.degree()).max(512);
    schwarz_residual_with_nodes(map, spec, m)
}

pub(crate) fn schwarz_residual_with_nodes(map: &LaurentMap, spec: &PotentialSpec, m: usize) -> f64 {
    let nodes: Vec<Complex64> = (0..m).map(|j| unit_node(j, m)).collect();
    let z: Vec<Complex64> = nodes.iter().map(|w| map.eval(*w)).collect();
    let tau: Vec<Complex64> = nodes.iter().map(|w| Complex64::i() * w * map.deriv(*w)).collect();
    let mut worst: f64 = 0.0;
    for j in 0..m {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..m {
            let g = if k == j {
                -tau[j].conj() / tau[j]
            } else {
                (z[k].conj() - z[j].conj()) / (z[j] - z[k])
            };
            // d zeta / (2 pi i) = tau dtheta / (2 pi i)
            acc += g * tau[k];
        }
        let cauchy = acc / (Complex64::i() * m as f64);
        let s = spec.v_prime(z[j]) + cauchy;
        worst = worst.max((s - z[j].conj()).norm());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::solve_droplet;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn disk_is_exact() {
        let spec = PotentialSpec::new(1.0, 0.01, 2.25, vec![c(0.0, 0.0)]).unwrap();
        assert!(schwarz_residual(&LaurentMap::circle(1.5, 0), &spec) < 1e-8);
    }

    #[test]
    fn solved_ellipse() {
        let spec = PotentialSpec::new(1.0, 0.01, 1.0, vec![c(0.0, 0.0), c(0.1, 0.0)]).unwrap();
        let sol = solve_droplet(&spec).unwrap();
        let coarse = schwarz_residual_with_nodes(&sol.map, &spec, 256);
        let fine = schwarz_residual_with_nodes(&sol.map, &spec, 1024);
        assert!(coarse < 1e-6 && fine < 1e-6, "{coarse:e} {fine:e}");
    }

    #[test]
    fn solved_cubic_and_shifted() {
        for coeffs in [
            vec![c(0.0, 0.0), c(0.0, 0.0), c(0.1, 0.0)],
            vec![c(0.2, -0.1), c(0.05, 0.03), c(0.02, -0.04), c(0.01, 0.02)],
        ] {
            let spec = PotentialSpec::new(1.0, 0.01, 1.0, coeffs).unwrap();
            let sol = solve_droplet(&spec).unwrap();
            assert!(schwarz_residual(&sol.map, &spec) < 1e-6);
        }
    }

    #[test]
    fn wrong_area_is_detected() {
        let spec = PotentialSpec::new(1.0, 0.01, 1.0, vec![c(0.0, 0.0), c(0.1, 0.0)]).unwrap();
        let sol = solve_droplet(&spec).unwrap();
        // a pure dilation keeps t_2, so only r is changed
        let perturbed = LaurentMap::new(sol.map.r() * 1.01, sol.map.coeffs().to_vec());
        assert!(schwarz_residual(&perturbed, &spec) > 1e-3);
    }
}
