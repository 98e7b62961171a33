use std::f64::consts::PI;

use num_complex::Complex64;

use super::CorrelatorError;
use crate::equilibrium::{unit_node, DropletSolution, LaurentMap};
use crate::quadrature::pairwise_sum;

/// Leading free energy
/// `F_0 = -(1/beta) \iint_D sigma(z) log |1/z - 1/zeta| sigma(zeta)` with
/// `sigma = 1/pi`.
///
/// With `log |1/z - 1/zeta| = log |z - zeta| - log |z| - log |zeta|` every
/// piece is reduced to boundary integrals: the logarithmic potential
/// `U(z) = \int_D log |z - zeta|` on the boundary is the flux of
/// `|zeta - z|^2 (log |zeta - z| - 1) / 4`, and `\int_D U` follows from
/// Green's second identity with `Delta U = 2 pi` and `Delta(|z|^2/4) = 1`.
pub fn free_energy_leading(sol: &DropletSolution, beta: f64) -> Result<f64, CorrelatorError> {
    free_energy_of_map(&sol.map, beta, (64 * (sol.map.order() + 1)).max(2048))
}

pub(crate) fn free_energy_of_map(map: &LaurentMap, beta: f64, m: usize) -> Result<f64, CorrelatorError> {
    let zero = Complex64::new(0.0, 0.0);
    let z: Vec<Complex64> = (0..m).map(|j| map.eval(unit_node(j, m))).collect();
    let clearance = z.iter().map(|p| p.norm()).fold(f64::INFINITY, f64::min);
    if map.winding_number(zero) != 1 || clearance < 1e-9 * map.r() {
        return Err(CorrelatorError::OriginNotInside);
    }
    // n |dz| = w z'(w) dtheta, dz = i w z'(w) dtheta
    let nds: Vec<Complex64> = (0..m)
        .map(|j| {
            let w = unit_node(j, m);
            w * map.deriv(w)
        })
        .collect();
    let tau: Vec<Complex64> = nds.iter().map(|v| Complex64::i() * v).collect();
    let h = 2.0 * PI / m as f64;
    let flux = |k: usize, v: Complex64| (v * nds[k].conj()).re;

    let area = pairwise_sum(&(0..m).map(|k| flux(k, z[k]) / 2.0).collect::<Vec<_>>()) * h;
    // \int_D log |z|: grad of |z|^2 (log |z| - 1) / 4 is z (2 log |z| - 1) / 4
    let log_mass = pairwise_sum(
        &(0..m)
            .map(|k| flux(k, z[k]) * (2.0 * z[k].norm().ln() - 1.0) / 4.0)
            .collect::<Vec<_>>(),
    ) * h;
    // \int_D |z|^2: grad of |z|^4 / 16 is |z|^2 z / 4
    let second = pairwise_sum(&(0..m).map(|k| flux(k, z[k] * z[k].norm_sqr()) / 4.0).collect::<Vec<_>>()) * h;

    let mut boundary_terms = Vec::with_capacity(m);
    for j in 0..m {
        // U(z_j) = \int_D log |z_j - zeta|; the diagonal term vanishes
        let mut u = Vec::with_capacity(m);
        let mut cauchy = Complex64::new(0.0, 0.0);
        for k in 0..m {
            if k == j {
                cauchy += -tau[j].conj() / tau[j] * tau[k];
                continue;
            }
            let d = z[k] - z[j];
            u.push(flux(k, d) * (2.0 * d.norm().ln() - 1.0) / 4.0);
            cauchy += (z[k].conj() - z[j].conj()) / (z[j] - z[k]) * tau[k];
        }
        let u = pairwise_sum(&u) * h;
        // C(z) = \int_D d^2 zeta / (z - zeta); grad U = conj(C), d_n U = Re(C n)
        let c = cauchy * h / (2.0 * Complex64::i());
        let dn_u = (c * nds[j]).re;
        boundary_terms.push(u * flux(j, z[j]) / 2.0 - z[j].norm_sqr() / 4.0 * dn_u);
    }
    let pair = PI / 2.0 * second + pairwise_sum(&boundary_terms) * h;
    Ok(-(pair - 2.0 * area * log_mass) / (beta * PI * PI))
}
