use num_complex::Complex64;

use super::harmonic::harmonic_continuation;
use super::laurent::unit_node;
use super::{EquilibriumError, LaurentMap};
use crate::potential::PotentialSpec;

/// Laplacian of a quasiharmonic `W`.
const LAPLACIAN_W: f64 = -4.0;

/// A change of the potential.
#[derive(Debug, Clone, PartialEq)]
pub enum DeltaW {
    /// Increments `delta t_1 ..` so that `delta W = 2 Re sum delta t_k z^k`.
    Coefficients(Vec<Complex64>),
    /// Boundary samples at the uniform nodes `w_j = exp(2 pi i j / m)`
    /// together with the outward normal derivative of `delta W` there.
    Sampled {
        values: Vec<f64>,
        exterior_normal_derivative: Option<Vec<f64>>,
    },
}

impl DeltaW {
    fn node_count(&self, map: &LaurentMap) -> usize {
        match self {
            DeltaW::Coefficients(dt) => map.quadrature_nodes(dt.len()),
            DeltaW::Sampled { values, .. } => values.len(),
        }
    }
}

/// Normal displacement of the boundary, at the uniform nodes, when `W`
/// changes by `delta`:
/// `delta n = dn(delta W^H - delta W) / Laplacian(W)`.
///
/// The node count is the sample count for [`DeltaW::Sampled`] and
/// [`LaurentMap::quadrature_nodes`] for coefficient increments.
pub fn deform_boundary(
    map: &LaurentMap,
    _spec: &PotentialSpec,
    delta: &DeltaW,
) -> Result<Vec<f64>, EquilibriumError> {
    let m = delta.node_count(map);
    let nodes: Vec<Complex64> = (0..m).map(|j| unit_node(j, m)).collect();
    let (values, dn_direct) = match delta {
        DeltaW::Coefficients(dt) => {
            let mut values = Vec::with_capacity(m);
            let mut dn = Vec::with_capacity(m);
            for w in &nodes {
                let z = map.eval(*w);
                let dz = map.deriv(*w);
                let normal = w * dz / dz.norm();
                let (p, dp) = poly_and_deriv(dt, z);
                values.push(2.0 * p.re);
                dn.push(2.0 * (dp * normal).re);
            }
            (values, dn)
        }
        DeltaW::Sampled {
            values,
            exterior_normal_derivative,
        } => {
            let dn = exterior_normal_derivative
                .as_ref()
                .ok_or(EquilibriumError::MissingNormalDerivative)?;
            if dn.len() != m {
                return Err(EquilibriumError::SampleCount {
                    got: dn.len(),
                    expected: m,
                });
            }
            (values.clone(), dn.clone())
        }
    };
    let ext = harmonic_continuation(map, &values);
    Ok(ext
        .normal_derivative()
        .iter()
        .zip(&dn_direct)
        .map(|(h, d)| (h - d) / LAPLACIAN_W)
        .collect())
}

/// `sum_{k>=1} c_k z^k` and its derivative.
fn poly_and_deriv(c: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for ck in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + ck;
    }
    // p = sum c_k z^{k-1} with k from 1, so multiply through by z
    (p * z, p + dp * z)
}

/// Signed distance from the nodes of `from` to the boundary of `to`, along
/// the outward normal of `from`.
pub fn normal_offset(from: &LaurentMap, to: &LaurentMap, m: usize) -> Vec<f64> {
    (0..m)
        .map(|j| {
            let w0 = unit_node(j, m);
            let z0 = from.eval(w0);
            let dz = from.deriv(w0);
            let n = w0 * dz / dz.norm();
            // find theta with Im((to(e^{i theta}) - z0) conj(n)) = 0
            let mut theta = w0.arg();
            for _ in 0..50 {
                let w = Complex64::from_polar(1.0, theta);
                let f = ((to.eval(w) - z0) * n.conj()).im;
                let df = (Complex64::i() * w * to.deriv(w) * n.conj()).im;
                let step = f / df;
                theta -= step;
                if step.abs() < 1e-15 {
                    break;
                }
            }
            ((to.eval(Complex64::from_polar(1.0, theta)) - z0) * n.conj()).re
        })
        .collect()
}
