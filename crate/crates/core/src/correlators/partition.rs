use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::CorrelatorError;
use crate::potential::{eval_potential, PotentialSpec};
use crate::quadrature::gauss_legendre_on;

/// `log Z_N` of the Gaussian ensemble (`beta = 1`) with `V = t1 z + t2 z^2`:
/// `log Z_N^0 - (N^2/2) log(1 - 4|t2|^2)
///  + (N / hbar) (t1^2 conj(t2) + conj(t1)^2 t2 + |t1|^2) / (1 - 4|t2|^2)`,
/// where `Z_N^0 = hbar^{(N^2 + N)/2} pi^N prod_{k=1}^N k!`.
pub fn ginibre_girko_log_z(n: usize, hbar: f64, t1: Complex64, t2: Complex64) -> Result<f64, CorrelatorError> {
    let q = 1.0 - 4.0 * t2.norm_sqr();
    if !(q > 0.0) {
        return Err(CorrelatorError::DivergentEnsemble(t2.norm()));
    }
    let nf = n as f64;
    let log_factorials: f64 = (1..=n).map(|k| (1..=k).map(|j| (j as f64).ln()).sum::<f64>()).sum();
    let log_z0 = 0.5 * (nf * nf + nf) * hbar.ln() + nf * PI.ln() + log_factorials;
    let linear = (t1 * t1 * t2.conj()).re * 2.0 + t1.norm_sqr();
    Ok(log_z0 - 0.5 * nf * nf * q.ln() + nf / hbar * linear / q)
}

pub fn ginibre_girko_z(n: usize, hbar: f64, t1: Complex64, t2: Complex64) -> Result<f64, CorrelatorError> {
    ginibre_girko_log_z(n, hbar, t1, t2).map(f64::exp)
}

const RELATIVE_TOLERANCE: f64 = 1e-8;
const MAX_LEVELS: usize = 12;

/// Direct quadrature of
/// `Z = \int |Delta_N|^{2 beta} prod_j e^{W(z_j) / hbar} d^2 z_j` over the
/// cutoff disk, `N <= 3`.
///
/// Each particle gets the same polar product rule (Gauss-Legendre in `r`,
/// trapezoid in `theta`) and the 2N-dimensional tensor sum is refined until
/// two successive levels agree to 1e-8 relative. The tensor sum is
/// contracted through matrix products; at `beta = 1` it collapses exactly to
/// `N! det M` with the discrete moment matrix `M_jk = sum_a w_a z_a^j
/// conj(z_a)^k` of the same rule.
pub fn brute_force_z(n: usize, spec: &PotentialSpec) -> Result<f64, CorrelatorError> {
    if n == 0 || n > 3 {
        return Err(CorrelatorError::TooManyParticles(n));
    }
    spec.check_confinement()?;
    let determinant = spec.beta() == 1.0;
    let max_points = match (determinant, n) {
        (true, _) | (_, 1) => 4_000_000,
        (false, 2) => 40_000,
        _ => 3_000,
    };
    let mut previous: Option<f64> = None;
    let (mut n_r, mut n_theta) = (24usize, 32usize);
    for _ in 0..MAX_LEVELS {
        if n_r * n_theta > max_points {
            break;
        }
        let z = tensor_sum(spec, n, n_r, n_theta, determinant);
        if let Some(p) = previous {
            if (z - p).abs() <= RELATIVE_TOLERANCE * z.abs() {
                return Ok(z);
            }
        }
        previous = Some(z);
        n_r = n_r * 3 / 2;
        n_theta = n_theta * 3 / 2;
    }
    let last = previous.unwrap_or(f64::NAN);
    Err(CorrelatorError::NonConvergent {
        last,
        previous: tensor_sum(spec, n, n_r * 2 / 3, n_theta * 2 / 3, determinant),
    })
}

/// Polar product rule on the cutoff disk with the one-body weight folded in.
/// Returns the nodes, the weights divided by `e^{shift}` and `shift`.
fn one_body_rule(spec: &PotentialSpec, n_r: usize, n_theta: usize) -> (Vec<Complex64>, Vec<f64>, f64) {
    let (r, wr) = gauss_legendre_on(n_r, 0.0, spec.cutoff_radius());
    let h = 2.0 * PI / n_theta as f64;
    let mut nodes = Vec::with_capacity(n_r * n_theta);
    let mut expo = Vec::with_capacity(n_r * n_theta);
    let mut base = Vec::with_capacity(n_r * n_theta);
    for (ri, wi) in r.iter().zip(&wr) {
        for j in 0..n_theta {
            // half-step offset keeps the rule off the real axis
            let z = Complex64::from_polar(*ri, h * (j as f64 + 0.5));
            nodes.push(z);
            expo.push(eval_potential(spec, z) / spec.hbar());
            base.push(ri * wi * h);
        }
    }
    let shift = expo.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights = base.iter().zip(&expo).map(|(b, e)| b * (e - shift).exp()).collect();
    (nodes, weights, shift)
}

pub(crate) fn tensor_sum(spec: &PotentialSpec, n: usize, n_r: usize, n_theta: usize, determinant: bool) -> f64 {
    let (z, w, shift) = one_body_rule(spec, n_r, n_theta);
    let scale = (n as f64 * shift).exp();
    if n == 1 {
        return w.iter().sum::<f64>() * scale;
    }
    if determinant {
        let mut m = DMatrix::<Complex64>::zeros(n, n);
        for (za, wa) in z.iter().zip(&w) {
            let pows: Vec<Complex64> = (0..n).map(|k| za.powi(k as i32)).collect();
            for j in 0..n {
                for k in 0..n {
                    m[(j, k)] += pows[j] * pows[k].conj() * *wa;
                }
            }
        }
        let factorial: f64 = (1..=n).map(|k| k as f64).product();
        return factorial * m.determinant().re * scale;
    }
    let p = z.len();
    let beta = spec.beta();
    let kernel = DMatrix::<f64>::from_fn(p, p, |a, b| (z[a] - z[b]).norm_sqr().powf(beta));
    let wv = nalgebra::DVector::from_vec(w);
    if n == 2 {
        return (wv.transpose() * &kernel * &wv)[(0, 0)] * scale;
    }
    // sum_{a,c} w_a w_c K_ac (K diag(w) K)_ac
    let mut kw = kernel.clone();
    for (b, wb) in wv.iter().enumerate() {
        kw.column_mut(b).scale_mut(*wb);
    }
    let kwk = &kw * &kernel;
    let mut total = 0.0;
    for a in 0..p {
        for c in 0..p {
            total += wv[a] * wv[c] * kernel[(a, c)] * kwk[(a, c)];
        }
    }
    total * scale
}
