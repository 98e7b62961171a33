use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::GrowthError;
use crate::equilibrium::{unit_node, LaurentMap};

/// Normal velocity `(beta / 2) |w'(z)|` at `m` uniform nodes.
pub fn normal_velocity(map: &LaurentMap, beta: f64, m: usize) -> Vec<f64> {
    (0..m)
        .map(|j| 0.5 * beta / map.deriv(unit_node(j, m)).norm())
        .collect()
}

/// Time derivative of the map parameters `[r, Re u_0, Im u_0, ...]`.
///
/// The boundary moves with normal velocity `(beta / 2) |w'|`; the tangential
/// slip is whatever keeps the new boundary in the same Laurent class. On
/// `|w| = 1` this reads `Re(z_t conj(w z')) = beta / 2`, a real trigonometric
/// polynomial of degree `m + 1` in `theta` for a map of order `m`, with as
/// many coefficients as there are unknowns (`r_t` is real, which fixes the
/// rotation gauge). It is matched in the least-squares sense at `2m + 5`
/// nodes.
pub(crate) fn param_velocity(map: &LaurentMap, beta: f64) -> Option<Vec<f64>> {
    let order = map.order();
    let dim = 3 + 2 * order;
    let rows = 2 * order + 5;
    let mut a = DMatrix::<f64>::zeros(rows, dim);
    let b = DVector::from_element(rows, 0.5 * beta);
    for row in 0..rows {
        let w = Complex64::from_polar(1.0, 2.0 * PI * row as f64 / rows as f64);
        let p = (w * map.deriv(w)).conj();
        a[(row, 0)] = (w * p).re;
        let inv = w.inv();
        let mut pow = Complex64::new(1.0, 0.0);
        for k in 0..=order {
            a[(row, 1 + 2 * k)] = (pow * p).re;
            a[(row, 2 + 2 * k)] = (Complex64::i() * pow * p).re;
            pow *= inv;
        }
    }
    let sol = a.svd(true, true).solve(&b, 1e-14).ok()?;
    let v: Vec<f64> = sol.iter().copied().collect();
    v.iter().all(|x| x.is_finite()).then_some(v)
}

fn advance(map: &LaurentMap, vel: &[f64], h: f64) -> Option<LaurentMap> {
    let p: Vec<f64> = map
        .to_params()
        .iter()
        .zip(vel)
        .map(|(x, v)| x + h * v)
        .collect();
    LaurentMap::from_params(&p).filter(|m| m.regular_exterior())
}

/// One explicit-midpoint step of Laplacian growth at rate `beta`.
///
/// Fails with [`GrowthError::UnivalenceLost`] when the midpoint or the end
/// point has passed a cusp.
pub fn grow_step(map: &LaurentMap, beta: f64, dt: f64) -> Result<LaurentMap, GrowthError> {
    let lost = || GrowthError::UnivalenceLost { partial: None };
    let k1 = param_velocity(map, beta).ok_or_else(lost)?;
    let mid = advance(map, &k1, 0.5 * dt).ok_or_else(lost)?;
    let k2 = param_velocity(&mid, beta).ok_or_else(lost)?;
    advance(map, &k2, dt).ok_or_else(lost)
}
