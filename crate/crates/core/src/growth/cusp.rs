use std::f64::consts::PI;

use num_complex::Complex64;

use super::{GrowthError, GrowthStatus, GrowthTrajectory};
use crate::equilibrium::{unit_node, LaurentMap};

/// Relative threshold `min |z'| < CUSP_THRESHOLD * r` for a cusp.
pub const CUSP_THRESHOLD: f64 = 1e-6;

const GRID: usize = 4096;

/// Minimum of `|z'(w)|` on `|w| = 1` and where it is attained: a 4096-node
/// scan refined by golden-section search between the neighbours of the best
/// node.
pub fn detect_cusp(map: &LaurentMap) -> (f64, Complex64) {
    let dz = |theta: f64| map.deriv(Complex64::from_polar(1.0, theta)).norm();
    let (best, _) = (0..GRID)
        .map(|j| (j, map.deriv(unit_node(j, GRID)).norm()))
        .fold((0, f64::INFINITY), |acc, (j, v)| if v < acc.1 { (j, v) } else { acc });
    let h = 2.0 * PI / GRID as f64;
    let (mut a, mut b) = ((best as f64 - 1.0) * h, (best as f64 + 1.0) * h);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (dz(x1), dz(x2));
    while b - a > 1e-13 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = dz(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = dz(x2);
        }
    }
    let grid_min = map.deriv(unit_node(best, GRID)).norm();
    let theta = 0.5 * (a + b);
    let refined = dz(theta);
    if grid_min <= refined {
        (grid_min, unit_node(best, GRID))
    } else {
        (refined, Complex64::from_polar(1.0, theta))
    }
}

pub fn is_cusp(map: &LaurentMap) -> bool {
    detect_cusp(map).0 < CUSP_THRESHOLD * map.r()
}

/// Location of the singularity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint {
    pub t_c: f64,
    pub r_c: f64,
}

/// Power-law fit of `|r - r_c|` against `t_c - t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentFit {
    pub critical: CriticalPoint,
    /// Fitted exponent of `|r - r_c|` (expected `1/2`).
    pub slope: f64,
    pub stderr: f64,
    pub samples: usize,
}

/// Fit window in `(t_c - t) / t_c`.
pub const FIT_WINDOW: (f64, f64) = (1e-4, 1e-2);
pub const MIN_FIT_SAMPLES: usize = 20;

/// Least-squares slope of `log |r_c - r|` on `log(t_c - t)` over the
/// samples with `(t_c - t) / t_c` in [`FIT_WINDOW`].
pub fn fit_exponent(points: &[(f64, f64)], critical: CriticalPoint) -> Result<ExponentFit, GrowthError> {
    let CriticalPoint { t_c, r_c } = critical;
    let xy: Vec<(f64, f64)> = points
        .iter()
        .filter(|(t, r)| {
            let rel = (t_c - t) / t_c;
            rel >= FIT_WINDOW.0 && rel <= FIT_WINDOW.1 && (r_c - r).abs() > 0.0
        })
        .map(|(t, r)| ((t_c - t).ln(), (r_c - r).abs().ln()))
        .collect();
    if xy.len() < MIN_FIT_SAMPLES {
        return Err(GrowthError::UnderPopulatedWindow { samples: xy.len() });
    }
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xy.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let stderr = (rss / (n - 2.0) / sxx).sqrt();
    Ok(ExponentFit {
        critical,
        slope,
        stderr,
        samples: xy.len(),
    })
}

/// Critical exponent of a trajectory that ended in a cusp. `t_c` is the
/// lower end of the bracket, where `|z'|` has fallen below the cusp
/// threshold, and `r_c` the conformal radius there.
pub fn fit_critical_exponent(traj: &GrowthTrajectory) -> Result<ExponentFit, GrowthError> {
    let GrowthStatus::Cusp { t_lo, .. } = traj.status else {
        return Err(GrowthError::NoCusp);
    };
    let last = traj.samples.last().ok_or(GrowthError::NoCusp)?;
    let critical = CriticalPoint {
        t_c: t_lo,
        r_c: last.robin_radius,
    };
    let points: Vec<(f64, f64)> = traj.samples.iter().map(|s| (s.t, s.robin_radius)).collect();
    fit_exponent(&points, critical)
}
