use num_complex::Complex64;

use super::{EquilibriumError, LaurentMap};

/// Dirichlet Green's function of the droplet exterior,
/// `G(z1, z2) = log |(w1 - w2) / (1 - w1 conj(w2))|`, with
/// `G(z1, inf) = -log |w1|` when `z2` is `None`.
pub fn green_function(
    map: &LaurentMap,
    z1: Complex64,
    z2: Option<Complex64>,
) -> Result<f64, EquilibriumError> {
    let w1 = map.invert(z1)?;
    match z2 {
        None => Ok(-w1.norm().ln()),
        Some(z2) => {
            let w2 = map.invert(z2)?;
            Ok(((w1 - w2) / (1.0 - w1 * w2.conj())).norm().ln())
        }
    }
}

/// External conformal radius (Robin constant)
/// `r = exp lim_{xi -> inf} (log |xi| + G(xi, inf))`, which is the leading
/// Laurent coefficient.
pub fn robin_radius(map: &LaurentMap) -> f64 {
    map.r()
}
