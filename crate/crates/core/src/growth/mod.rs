//! Laplacian growth of the droplet in the area parameter `t`.
//!
//! Two integrators: the boundary law (normal velocity `(beta/2) |w'(z)|`)
//! stepped with the explicit midpoint rule, and re-solving the moment
//! equations at each time with a warm start.

mod cusp;
mod step;

use num_complex::Complex64;
use thiserror::Error;

pub use cusp::{
    detect_cusp, fit_critical_exponent, fit_exponent, is_cusp, CriticalPoint, ExponentFit,
    CUSP_THRESHOLD, FIT_WINDOW, MIN_FIT_SAMPLES,
};
pub use step::{grow_step, normal_velocity};

use crate::equilibrium::{
    moments_with_nodes, normal_offset, solve_droplet, solve_droplet_from, EquilibriumError,
    LaurentMap,
};
use crate::potential::{PotentialError, PotentialSpec};

#[derive(Debug, Error)]
pub enum GrowthError {
    #[error("univalence lost (the step passed a cusp)")]
    UnivalenceLost { partial: Option<Box<GrowthTrajectory>> },
    #[error("trajectory did not end in a cusp")]
    NoCusp,
    #[error("only {samples} samples in the fit window, refine dt near t_c")]
    UnderPopulatedWindow { samples: usize },
    #[error("invalid time range [{t0}, {t1}] with dt = {dt}")]
    InvalidRange { t0: f64, t1: f64, dt: f64 },
    #[error(transparent)]
    Equilibrium(#[from] EquilibriumError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrowthMethod {
    LawIntegration,
    MomentResolve,
}

impl GrowthMethod {
    pub fn tag(self) -> &'static str {
        match self {
            GrowthMethod::LawIntegration => "law-integration",
            GrowthMethod::MomentResolve => "moment-resolve",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GrowthStatus {
    Completed,
    /// The critical time lies in `[t_lo, t_hi]`.
    Cusp { t_lo: f64, t_hi: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthSample {
    pub t: f64,
    pub map: LaurentMap,
    pub area: f64,
    pub robin_radius: f64,
    pub min_boundary_dz: f64,
    /// Harmonic moments `t_1 .. t_{m+1}` of the boundary.
    pub moments: Vec<Complex64>,
}

impl GrowthSample {
    pub fn new(t: f64, map: LaurentMap) -> Self {
        let k = map.order() + 1;
        Self {
            t,
            area: map.area(),
            robin_radius: map.r(),
            min_boundary_dz: detect_cusp(&map).0,
            moments: moments_with_nodes(&map, k, map.quadrature_nodes(k)),
            map,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthTrajectory {
    pub method: GrowthMethod,
    pub beta: f64,
    pub samples: Vec<GrowthSample>,
    pub status: GrowthStatus,
}

impl GrowthTrajectory {
    pub fn last(&self) -> &GrowthSample {
        self.samples.last().expect("trajectories are never empty")
    }

    /// Sample at time `t` (exact match).
    pub fn at(&self, t: f64) -> Option<&GrowthSample> {
        self.samples.iter().find(|s| s.t == t)
    }

    /// Largest `|Area - pi beta t| / (pi beta t)` along the trajectory.
    pub fn max_area_error(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| {
                let want = std::f64::consts::PI * self.beta * s.t;
                (s.area - want).abs() / want
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveConfig {
    pub t0: f64,
    pub t1: f64,
    pub dt: f64,
    pub method: GrowthMethod,
}

/// Relative accuracy of the critical-time bracket.
const T_C_TOLERANCE: f64 = 1e-8;

/// Grows the droplet of `spec` from `t0` to `t1`. The coefficients and `beta`
/// of `spec` are kept; `t` is replaced.
///
/// Samples are recorded on the grid `t0 + k dt`. The law integrator halves
/// its internal step while `min |z'| < 0.1 r` (sub-steps are recorded too),
/// so it resolves the approach to a cusp geometrically. A cusp ends the
/// trajectory with [`GrowthStatus::Cusp`].
pub fn evolve(spec: &PotentialSpec, cfg: &EvolveConfig) -> Result<GrowthTrajectory, GrowthError> {
    let EvolveConfig { t0, t1, dt, method } = *cfg;
    if !(t0 > 0.0 && t1 > t0 && dt > 0.0 && dt.is_finite()) {
        return Err(GrowthError::InvalidRange { t0, t1, dt });
    }
    let start = solve_droplet(&spec.at_time(t0)?)?.map;
    let mut traj = GrowthTrajectory {
        method,
        beta: spec.beta(),
        samples: vec![GrowthSample::new(t0, start)],
        status: GrowthStatus::Completed,
    };
    match method {
        GrowthMethod::LawIntegration => integrate_law(&mut traj, cfg),
        GrowthMethod::MomentResolve => resolve_moments(&mut traj, spec, cfg)?,
    }
    Ok(traj)
}

fn grid_time(cfg: &EvolveConfig, k: usize) -> f64 {
    (cfg.t0 + k as f64 * cfg.dt).min(cfg.t1)
}

fn grid_steps(cfg: &EvolveConfig) -> usize {
    ((cfg.t1 - cfg.t0) / cfg.dt - 1e-9).ceil() as usize
}

/// Number of halvings of `dt` for the current boundary.
fn refinement(map: &LaurentMap, min_dz: f64) -> i32 {
    let ratio = 0.1 * map.r() / min_dz;
    if ratio <= 1.0 {
        0
    } else {
        (2.0 * ratio.log2()).ceil().min(60.0) as i32
    }
}

fn integrate_law(traj: &mut GrowthTrajectory, cfg: &EvolveConfig) {
    let beta = traj.beta;
    let steps = grid_steps(cfg);
    let mut map = traj.last().map.clone();
    let mut t = cfg.t0;
    let mut min_dz = traj.last().min_boundary_dz;
    for k in 1..=steps {
        let target = grid_time(cfg, k);
        while t < target {
            let remaining = target - t;
            let mut h = (cfg.dt * 0.5f64.powi(refinement(&map, min_dz))).min(remaining);
            // land on the grid instead of leaving a rounding-sized remainder
            if remaining - h < 1e-6 * h {
                h = remaining;
            }
            let next = loop {
                match grow_step(&map, beta, h) {
                    Ok(next) => break Some(next),
                    Err(_) if h > T_C_TOLERANCE * t => h *= 0.5,
                    Err(_) => break None,
                }
            };
            let Some(next) = next else {
                traj.status = GrowthStatus::Cusp { t_lo: t, t_hi: t + 2.0 * h };
                return;
            };
            t = if h == remaining { target } else { t + h };
            let sample = GrowthSample::new(t, next);
            map = sample.map.clone();
            min_dz = sample.min_boundary_dz;
            traj.samples.push(sample);
            if min_dz < CUSP_THRESHOLD * map.r() {
                traj.status = GrowthStatus::Cusp { t_lo: t, t_hi: t + failing_step(&map, beta, t) };
                return;
            }
        }
    }
}

/// Smallest step (by doubling from `t * 1e-8`) that the integrator cannot
/// take from a near-cusp boundary.
fn failing_step(map: &LaurentMap, beta: f64, t: f64) -> f64 {
    let mut h = T_C_TOLERANCE * t;
    while h < t {
        if grow_step(map, beta, h).is_err() {
            return h;
        }
        h *= 2.0;
    }
    h
}

fn resolve_moments(
    traj: &mut GrowthTrajectory,
    spec: &PotentialSpec,
    cfg: &EvolveConfig,
) -> Result<(), GrowthError> {
    let steps = grid_steps(cfg);
    for k in 1..=steps {
        let t = grid_time(cfg, k);
        let prev = traj.last().map.clone();
        match solve_droplet_from(&spec.at_time(t)?, &prev) {
            Ok(sol) if !is_cusp(&sol.map) => traj.samples.push(GrowthSample::new(t, sol.map)),
            _ => {
                let (t_lo, t_hi) = bracket_critical_time(spec, traj.last().t, t, prev)?;
                traj.status = GrowthStatus::Cusp { t_lo, t_hi };
                return Ok(());
            }
        }
    }
    Ok(())
}

/// Bisection on the existence of a smooth droplet.
fn bracket_critical_time(
    spec: &PotentialSpec,
    mut lo: f64,
    mut hi: f64,
    mut map: LaurentMap,
) -> Result<(f64, f64), GrowthError> {
    while hi - lo > T_C_TOLERANCE * lo {
        let mid = 0.5 * (lo + hi);
        match solve_droplet_from(&spec.at_time(mid)?, &map) {
            Ok(sol) if !is_cusp(&sol.map) => {
                lo = mid;
                map = sol.map;
            }
            _ => hi = mid,
        }
    }
    Ok((lo, hi))
}

/// Symmetric boundary distance between two nearby droplets, measured along
/// the normals of each at `m` nodes.
pub fn hausdorff_distance(a: &LaurentMap, b: &LaurentMap, m: usize) -> f64 {
    let ab = normal_offset(a, b, m).into_iter().fold(0.0f64, |x, d| x.max(d.abs()));
    let ba = normal_offset(b, a, m).into_iter().fold(0.0f64, |x, d| x.max(d.abs()));
    ab.max(ba)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn spec(coeffs: Vec<Complex64>) -> PotentialSpec {
        PotentialSpec::new(1.0, 0.01, 1.0, coeffs).unwrap()
    }

    fn cfg(t0: f64, t1: f64, dt: f64, method: GrowthMethod) -> EvolveConfig {
        EvolveConfig { t0, t1, dt, method }
    }

    #[test]
    fn gaussian_radius_both_methods() {
        for method in [GrowthMethod::LawIntegration, GrowthMethod::MomentResolve] {
            let traj = evolve(&spec(vec![c(0.0, 0.0)]), &cfg(0.25, 1.0, 1e-3, method)).unwrap();
            assert_eq!(traj.status, GrowthStatus::Completed);
            assert_eq!(traj.last().t, 1.0);
            assert!((traj.last().robin_radius - 1.0).abs() < 1e-6);
            assert!(traj.samples.windows(2).all(|w| w[1].t > w[0].t));
            // one sample per grid time, no rounding-sized extra steps
            assert_eq!(traj.samples.len(), 751);
        }
    }

    #[test]
    fn ellipse_half_axes_at_t1() {
        for method in [GrowthMethod::LawIntegration, GrowthMethod::MomentResolve] {
            let traj = evolve(&spec(vec![c(0.0, 0.0), c(0.1, 0.0)]), &cfg(0.25, 1.0, 1e-3, method)).unwrap();
            let m = &traj.last().map;
            let (r, u) = (m.r(), m.coeff(1).re);
            assert!((r + u - 1.5f64.sqrt()).abs() < 1e-5);
            assert!((r - u - (2.0f64 / 3.0).sqrt()).abs() < 1e-5);
            assert!(traj.max_area_error() < 1e-6);
            let drift = traj
                .samples
                .iter()
                .map(|s| (s.moments[1] - c(0.1, 0.0)).norm())
                .fold(0.0, f64::max);
            assert!(drift < 1e-5 * 0.75);
            assert!(matches!(fit_critical_exponent(&traj), Err(GrowthError::NoCusp)));
        }
    }

    #[test]
    fn cubic_trajectory_ends_in_cusp() {
        let s = spec(vec![c(0.0, 0.0), c(0.0, 0.0), c(0.1, 0.0)]);
        let t_c = 1.0 / (72.0 * 0.01);
        // the law integrator's own t_c carries its O(dt^2) error
        for (method, dt, tol) in [
            (GrowthMethod::LawIntegration, 1e-3, 1e-5),
            (GrowthMethod::MomentResolve, 1e-2, 1e-7),
        ] {
            let traj = evolve(&s, &cfg(0.25, 2.0, dt, method)).unwrap();
            let GrowthStatus::Cusp { t_lo, t_hi } = traj.status else {
                panic!("{method:?} did not find the cusp");
            };
            assert!(t_lo <= t_hi);
            assert!(t_hi - t_lo < 1e-7);
            assert!((t_lo - t_c).abs() < tol, "{method:?} t_c = {t_lo}");
        }
    }

    #[test]
    fn beta_is_a_time_rescaling() {
        let coeffs = vec![c(0.0, 0.0), c(0.08, 0.02)];
        let one = evolve(&spec(coeffs.clone()), &cfg(0.5, 1.0, 1e-3, GrowthMethod::LawIntegration)).unwrap();
        let two_spec = PotentialSpec::new(2.0, 0.01, 1.0, coeffs).unwrap();
        let two = evolve(&two_spec, &cfg(0.25, 0.5, 5e-4, GrowthMethod::LawIntegration)).unwrap();
        assert!(hausdorff_distance(&one.last().map, &two.last().map, 256) < 1e-8);
    }

    #[test]
    fn bad_range_is_rejected() {
        assert!(matches!(
            evolve(&spec(vec![c(0.0, 0.0)]), &cfg(1.0, 0.5, 1e-3, GrowthMethod::LawIntegration)),
            Err(GrowthError::InvalidRange { .. })
        ));
    }
}
