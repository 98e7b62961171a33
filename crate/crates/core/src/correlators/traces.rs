use std::f64::consts::PI;

use super::plane::{droplet_quadrature, PlaneFunction};
use super::CorrelatorError;
use crate::equilibrium::{DropletSolution, HarmonicExtension, LaurentMap};
use crate::quadrature::pairwise_sum;

const RADIAL_NODES: usize = 32;

fn angular_nodes(map: &LaurentMap) -> usize {
    map.quadrature_nodes(0).max(512)
}

/// Leading `<sum f(z_i)> = (1 / (hbar beta)) \int_D sigma f d^2z` with
/// `sigma = 1/pi`.
pub fn one_trace(
    sol: &DropletSolution,
    hbar: f64,
    f: impl Fn(num_complex::Complex64) -> f64,
) -> Result<f64, CorrelatorError> {
    let q = droplet_quadrature(&sol.map, RADIAL_NODES, angular_nodes(&sol.map))?;
    let terms: Vec<f64> = q.iter().map(|(z, w)| w * f(*z)).collect();
    Ok(pairwise_sum(&terms) / (PI * hbar * sol.beta))
}

/// Leading connected `<sum f sum g>_c`:
/// `(1/4 pi beta) [\int_D grad f . grad g - \oint f d_n g^H |dz|]`, where
/// `g^H` is the bounded harmonic continuation of `g` into the exterior and
/// `n` points out of the droplet. Reads only the droplet, never the
/// potential.
pub fn two_trace_connected_cf(
    sol: &DropletSolution,
    f: &impl PlaneFunction,
    g: &impl PlaneFunction,
) -> Result<f64, CorrelatorError> {
    let map = &sol.map;
    let m = angular_nodes(map);
    let q = droplet_quadrature(map, RADIAL_NODES, m)?;
    let bulk: Vec<f64> = q
        .iter()
        .map(|(z, w)| {
            let (fx, fy) = f.gradient(*z);
            let (gx, gy) = g.gradient(*z);
            w * (fx * gx + fy * gy)
        })
        .collect();
    let boundary = map.boundary(m);
    let f_b: Vec<f64> = boundary.iter().map(|z| f.value(*z)).collect();
    let f_h = HarmonicExtension::from_fn(map, m, |z| f.value(z));
    let g_h = HarmonicExtension::from_fn(map, m, |z| g.value(z));
    if f_h.under_resolved() || g_h.under_resolved() {
        return Err(CorrelatorError::NonSmooth(format!(
            "boundary traces need more than {} Fourier modes",
            m / 4
        )));
    }
    let flux = g_h.flux_against(&f_b);
    Ok((pairwise_sum(&bulk) - flux) / (4.0 * PI * sol.beta))
}
