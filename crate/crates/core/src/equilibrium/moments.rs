use num_complex::Complex64;

use super::laurent::unit_node;
use super::{EquilibriumError, LaurentMap};

/// Area and harmonic moments `t_1 .. t_{k_max}` of the droplet bounded by
/// `map`, with the default node count.
///
/// `t_k = (1 / (2 pi i k)) \oint conj(z) z^{-k} dz`, by the trapezoid rule on
/// the unit circle of the `w` plane; the area uses the exact coefficient
/// formula.
pub fn moments_of_map(
    map: &LaurentMap,
    k_max: usize,
) -> Result<(f64, Vec<Complex64>), EquilibriumError> {
    map.check_univalent()?;
    Ok((map.area(), moments_with_nodes(map, k_max, map.quadrature_nodes(k_max))))
}

/// Moments by an `m`-node trapezoid rule, without the univalence check.
pub fn moments_with_nodes(map: &LaurentMap, k_max: usize, m: usize) -> Vec<Complex64> {
    let mut acc = vec![Complex64::new(0.0, 0.0); k_max];
    for j in 0..m {
        let w = unit_node(j, m);
        let z = map.eval(w);
        let base = z.conj() * map.deriv(w) * w;
        let inv = z.inv();
        let mut pow = inv;
        for slot in acc.iter_mut() {
            *slot += base * pow;
            pow *= inv;
        }
    }
    acc.iter()
        .enumerate()
        .map(|(k, s)| s / ((k + 1) as f64 * m as f64))
        .collect()
}
