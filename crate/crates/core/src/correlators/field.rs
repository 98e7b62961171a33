use num_complex::Complex64;

use super::CorrelatorError;
use crate::equilibrium::{green_function, robin_radius, LaurentMap};

/// Which side of the boundary a point is on.
fn exterior_preimage(map: &LaurentMap, z: Complex64) -> Result<Option<Complex64>, CorrelatorError> {
    match map.invert(z) {
        Ok(w) if w.norm() <= 1.0 + 1e-9 => Err(CorrelatorError::OnBoundary(z)),
        Ok(w) => Ok(Some(w)),
        Err(_) => Ok(None),
    }
}

/// Leading connected `<phi(z) phi(z')>_c` of
/// `phi(z) = -beta hbar sum_j log |z - z_j|^2`.
///
/// Inside the droplet: `-2 beta hbar^2 log(|z - z'| / r)`; outside:
/// `2 beta hbar^2 (G(z, z') - G(z, inf) - G(z', inf) - log(|z - z'| / r))`,
/// with `r` the external conformal radius. Separations below `3 sqrt(hbar)`
/// are outside the regime of validity and only logged.
pub fn phi_phi_connected_cf(
    map: &LaurentMap,
    z: Complex64,
    zp: Complex64,
    hbar: f64,
    beta: f64,
) -> Result<f64, CorrelatorError> {
    let d = (z - zp).norm();
    if d == 0.0 {
        return Err(CorrelatorError::Coincident(z));
    }
    if d < 3.0 * hbar.sqrt() {
        log::warn!("|z - z'| = {d:.3e} is below 3 sqrt(hbar) = {:.3e}", 3.0 * hbar.sqrt());
    }
    let r = robin_radius(map);
    let scale = 2.0 * beta * hbar * hbar;
    match (exterior_preimage(map, z)?, exterior_preimage(map, zp)?) {
        (None, None) => Ok(-scale * (d / r).ln()),
        (Some(_), Some(_)) => {
            let g = green_function(map, z, Some(zp))?;
            let g1 = green_function(map, z, None)?;
            let g2 = green_function(map, zp, None)?;
            Ok(scale * (g - g1 - g2 - (d / r).ln()))
        }
        _ => Err(CorrelatorError::MixedRegime(z, zp)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn inside_disk_value() {
        let map = LaurentMap::circle(1.0, 0);
        let v = phi_phi_connected_cf(&map, c(-0.25, 0.0), c(0.25, 0.0), 0.01, 1.0).unwrap();
        assert!((v - 2e-4 * 2f64.ln()).abs() < 1e-15);
        assert!((v - 1.3863e-4).abs() < 1e-8);
        let at_r = phi_phi_connected_cf(&map, c(-0.5, 0.0), c(0.5, 0.0), 0.01, 1.0).unwrap();
        assert_eq!(at_r, 0.0);
    }

    #[test]
    fn inside_branch_is_covariant() {
        let map = LaurentMap::new(1.3, vec![c(0.0, 0.0), c(0.2, 0.1)]);
        let (z, zp) = (c(0.1, 0.2), c(-0.3, -0.1));
        let base = phi_phi_connected_cf(&map, z, zp, 0.01, 2.0).unwrap();
        for k in 0..6 {
            let rot = Complex64::from_polar(1.0, 0.9 * k as f64);
            let shift = c(0.05 * k as f64, -0.02);
            let v = phi_phi_connected_cf(&map, z * rot * 0.5 + shift, zp * rot * 0.5 + shift, 0.01, 2.0);
            let expected = -2.0 * 2.0 * 1e-4 * ((z - zp).norm() * 0.5 / 1.3).ln();
            assert!((v.unwrap() - expected).abs() < 1e-12);
        }
        assert!(base > 0.0);
    }

    #[test]
    fn far_outside_decays() {
        let map = LaurentMap::new(1.1, vec![c(0.0, 0.0), c(0.15, 0.0), c(0.0, 0.05)]);
        let v = phi_phi_connected_cf(&map, c(1e6, 0.0), c(0.0, 1e6), 0.01, 1.0).unwrap();
        assert!(v.abs() < 1e-8, "{v}");
        let near = phi_phi_connected_cf(&map, c(2.0, 0.0), c(0.0, 2.0), 0.01, 1.0).unwrap();
        assert!(near.is_finite() && near != 0.0);
    }

    #[test]
    fn regimes() {
        let map = LaurentMap::circle(1.0, 0);
        assert!(matches!(
            phi_phi_connected_cf(&map, c(0.5, 0.0), c(2.0, 0.0), 0.01, 1.0),
            Err(CorrelatorError::MixedRegime(..))
        ));
        assert!(matches!(
            phi_phi_connected_cf(&map, c(1.0, 0.0), c(-0.5, 0.0), 0.01, 1.0),
            Err(CorrelatorError::OnBoundary(_))
        ));
        assert!(matches!(
            phi_phi_connected_cf(&map, c(0.2, 0.0), c(0.2, 0.0), 0.01, 1.0),
            Err(CorrelatorError::Coincident(_))
        ));
    }
}
