use num_complex::Complex64;

use super::stats::{ChainStats, ReplicaStats};
use super::{jackknife, ComplexEstimate, SamplerError};
use crate::grid::Grid2D;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Leave-one-replica-out jackknife of a statistic of merged accumulators.
fn replica_jackknife(stats: &ChainStats, f: impl Fn(&ReplicaStats) -> Complex64) -> ComplexEstimate {
    let full = f(&stats.merged());
    let loo: Vec<Complex64> = if stats.replicas.len() < 2 {
        Vec::new()
    } else {
        (0..stats.replicas.len()).map(|k| f(&stats.merged_without(Some(k)))).collect()
    };
    jackknife(full, &loo)
}

/// Same as [`replica_jackknife`] for a vector-valued statistic.
fn replica_jackknife_vec(
    stats: &ChainStats,
    f: impl Fn(&ReplicaStats) -> Vec<Complex64>,
) -> Vec<ComplexEstimate> {
    let full = f(&stats.merged());
    let loo: Vec<Vec<Complex64>> = if stats.replicas.len() < 2 {
        Vec::new()
    } else {
        (0..stats.replicas.len()).map(|k| f(&stats.merged_without(Some(k)))).collect()
    };
    full.iter()
        .enumerate()
        .map(|(c, v)| {
            let column: Vec<Complex64> = loo.iter().map(|l| l[c]).collect();
            jackknife(*v, &column)
        })
        .collect()
}

/// `rho = hbar * hits / (samples * cell area)` on the registered density
/// grid. Sums to `t` times the fraction of hits that landed on the grid.
/// A run without samples (or without a density grid) gives zeros.
pub fn density_estimate(stats: &ChainStats) -> Option<Grid2D> {
    let grid = stats.observables.density.as_ref()?;
    let merged = stats.merged();
    let mut out = grid.zeroed();
    if merged.samples > 0 {
        let scale = stats.spec.hbar() / (merged.samples as f64 * grid.cell_area());
        for (v, h) in out.values_mut().iter_mut().zip(&merged.histogram) {
            *v = scale * *h as f64;
        }
    }
    Some(out)
}

fn trace(stats: &ChainStats, name: &str) -> Result<usize, SamplerError> {
    stats
        .observables
        .trace_index(name)
        .ok_or_else(|| SamplerError::UnknownObservable(name.to_string()))
}

/// `<sum f(z_i)>` for the trace observable registered as `name`.
pub fn trace_mean(stats: &ChainStats, name: &str) -> Result<ComplexEstimate, SamplerError> {
    let a = trace(stats, name)?;
    Ok(replica_jackknife(stats, |r| r.trace_mean[a]))
}

/// `<sum f sum g> - <sum f><sum g>` for two registered trace observables.
pub fn connected_two_trace(stats: &ChainStats, f: &str, g: &str) -> Result<ComplexEstimate, SamplerError> {
    let (a, b) = (trace(stats, f)?, trace(stats, g)?);
    let k = stats.observables.traces.len();
    Ok(replica_jackknife(stats, |r| {
        if r.samples == 0 {
            ZERO
        } else {
            r.trace_comoment[a * k + b] / r.samples as f64
        }
    }))
}

/// Loop-equation residual `<L(z)>` at one probe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopEstimate {
    pub probe: Complex64,
    pub estimate: ComplexEstimate,
    /// Fraction of measurements with a particle within `loop_epsilon`.
    pub close_fraction: f64,
    /// More than 1% of measurements had a particle too close.
    pub unreliable: bool,
}

pub fn loop_residual(stats: &ChainStats) -> Vec<LoopEstimate> {
    let probes = &stats.observables.loop_probes;
    let est = replica_jackknife_vec(stats, |r| {
        let n = r.samples.max(1) as f64;
        r.loop_sum.iter().map(|s| s / n).collect()
    });
    let merged = stats.merged();
    probes
        .iter()
        .zip(est)
        .zip(&merged.loop_close)
        .map(|((probe, estimate), close)| {
            let close_fraction = *close as f64 / merged.samples.max(1) as f64;
            LoopEstimate {
                probe: *probe,
                estimate,
                close_fraction,
                unreliable: close_fraction > 0.01,
            }
        })
        .collect()
}

/// Cell-averaged residual of the one-point Ward identity
/// `<L(z) rho(zeta)> = d/dzeta [<rho(zeta)> / (z - zeta)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WardField {
    pub probe: Complex64,
    pub grid: Grid2D,
    /// Row-major per cell; `None` on the grid border where the central
    /// difference is unavailable.
    pub cells: Vec<Option<ComplexEstimate>>,
}

impl WardField {
    /// Fraction of interior cells whose residual is within `k` standard
    /// errors of zero.
    pub fn fraction_consistent(&self, k: f64) -> f64 {
        let inner: Vec<&ComplexEstimate> = self.cells.iter().flatten().collect();
        let ok = inner.iter().filter(|e| e.consistent_with(ZERO, k)).count();
        ok as f64 / inner.len().max(1) as f64
    }
}

/// Both sides are averaged over each cell: the left one is
/// `(hbar/A) <L(z) n_c>`, the right one the Wirtinger derivative (central
/// differences) of `(hbar/A) <sum_{z_i in c} 1/(z - z_i)>`, which is the cell
/// average of `<rho>/(z - zeta)`.
pub fn ward_residual_one_point(stats: &ChainStats) -> Option<WardField> {
    let setup = stats.observables.ward.as_ref()?;
    let grid = &setup.grid;
    let hbar = stats.spec.hbar();
    let (nx, ny) = (grid.nx(), grid.ny());
    let interior = |c: usize| {
        let (i, j) = (c % nx, c / nx);
        i > 0 && j > 0 && i + 1 < nx && j + 1 < ny
    };
    let residual = |r: &ReplicaStats| -> Vec<Complex64> {
        let mut out = vec![ZERO; grid.len()];
        if r.samples == 0 {
            return out;
        }
        let scale = hbar / (r.samples as f64 * grid.cell_area());
        for (c, o) in out.iter_mut().enumerate().filter(|(c, _)| interior(*c)) {
            let f = |k: usize| r.ward_inverse[k] * scale;
            let d_x = (f(c + 1) - f(c - 1)) / (2.0 * grid.dx());
            let d_y = (f(c + nx) - f(c - nx)) / (2.0 * grid.dy());
            let d_zeta = 0.5 * (d_x - Complex64::i() * d_y);
            *o = r.ward_l_count[c] * scale - d_zeta;
        }
        out
    };
    let est = replica_jackknife_vec(stats, residual);
    let cells = est
        .into_iter()
        .enumerate()
        .map(|(c, e)| interior(c).then_some(e))
        .collect();
    Some(WardField {
        probe: setup.probe,
        grid: grid.clone(),
        cells,
    })
}

/// Angular Fourier modes `(1/samples) sum_cells hits e^{-i m theta}` of the
/// density histogram, restricted to cell centres with `|zeta| < r_max`,
/// for `m = 1..=m_max`.
pub fn angular_modes(stats: &ChainStats, m_max: usize, r_max: f64) -> Option<Vec<ComplexEstimate>> {
    let grid = stats.observables.density.as_ref()?;
    let phases: Vec<(usize, f64)> = grid
        .cells()
        .filter(|(_, _, z, _)| z.norm() < r_max)
        .map(|(i, j, z, _)| (grid.index(i, j), z.arg()))
        .collect();
    Some(replica_jackknife_vec(stats, |r| {
        let n = r.samples.max(1) as f64;
        (1..=m_max)
            .map(|m| {
                phases
                    .iter()
                    .map(|(c, theta)| Complex64::from_polar(r.histogram[*c] as f64, -(m as f64) * theta))
                    .sum::<Complex64>()
                    / n
            })
            .collect()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loggas::{run_chains, Observables, SamplerConfig};
    use crate::potential::PotentialSpec;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn gaussian(n: usize, beta: f64) -> PotentialSpec {
        PotentialSpec::with_particles(beta, 1.0, n, vec![c(0.0, 0.0)]).unwrap()
    }

    fn cfg(spec: &PotentialSpec, seed: u64, measure: usize) -> SamplerConfig {
        SamplerConfig {
            burn_in_sweeps: 500,
            measure_sweeps: measure,
            thin: 2,
            ..SamplerConfig::for_spec(spec, seed)
        }
    }

    #[test]
    fn density_counting_identity_and_empty_run() {
        let spec = gaussian(10, 1.0);
        let obs = Observables::default().with_density(Grid2D::covering_disk(spec.cutoff_radius(), 64));
        let stats = run_chains(&spec, &cfg(&spec, 3, 200), &obs).unwrap();
        let rho = density_estimate(&stats).unwrap();
        assert!((rho.integral() - spec.t()).abs() < 1e-12);

        let empty = ChainStats::from_replicas(spec.clone(), obs.clone(), 10, Vec::new());
        assert!(density_estimate(&empty).unwrap().values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn loop_residual_vanishes() {
        for beta in [1.0, 2.0] {
            let spec = gaussian(4, beta);
            let obs = Observables::default().with_loop_probes(vec![c(3.0, 0.0), c(0.0, 2.5)], 1e-2);
            let stats = run_chains(&spec, &cfg(&spec, 11, 20_000), &obs).unwrap();
            for est in loop_residual(&stats) {
                assert!(!est.unreliable);
                assert!(
                    est.estimate.consistent_with(ZERO, 3.0),
                    "beta {beta}: {:?}",
                    est.estimate
                );
            }
        }
    }

    #[test]
    fn connected_trace_cases() {
        let spec = gaussian(4, 1.0);
        let obs = Observables::default()
            .with_trace("x", |z| c(z.re, 0.0))
            .with_trace("one", |_| c(1.0, 0.0))
            .with_trace("zero", |_| ZERO);
        let stats = run_chains(&spec, &cfg(&spec, 5, 4000), &obs).unwrap();
        let xx = connected_two_trace(&stats, "x", "x").unwrap();
        // Var(sum Re z) = t / 2 for the Gaussian ensemble at every N
        assert!(xx.re_consistent_with(0.5, 3.0), "{xx:?}");
        let cc = connected_two_trace(&stats, "one", "one").unwrap();
        assert!(cc.value.norm() < 1e-12);
        assert_eq!(connected_two_trace(&stats, "x", "zero").unwrap().value, ZERO);
        assert!(matches!(
            connected_two_trace(&stats, "x", "nope"),
            Err(SamplerError::UnknownObservable(_))
        ));
        let mean = trace_mean(&stats, "x").unwrap();
        assert!(mean.re_consistent_with(0.0, 4.0));
    }

    #[test]
    fn single_replica_is_flagged() {
        let spec = gaussian(3, 1.0);
        let obs = Observables::default().with_trace("x", |z| c(z.re, 0.0));
        let stats = run_chains(&spec, &SamplerConfig { replicas: 1, ..cfg(&spec, 5, 100) }, &obs).unwrap();
        let est = connected_two_trace(&stats, "x", "x").unwrap();
        assert!(est.flagged && est.error_re.is_nan());
    }

    #[test]
    fn ward_identity_cellwise() {
        let spec = gaussian(4, 1.0);
        let grid = Grid2D::new((-1.0, 1.0), (-1.0, 1.0), 10, 10);
        let obs = Observables::default().with_ward(c(3.0, 0.0), grid);
        let stats = run_chains(&spec, &cfg(&spec, 21, 20_000), &obs).unwrap();
        let field = ward_residual_one_point(&stats).unwrap();
        assert_eq!(field.cells.iter().flatten().count(), 64);
        let frac = field.fraction_consistent(3.0);
        assert!(frac >= 0.95, "fraction {frac}");
    }

    #[test]
    fn ward_field_conjugation_symmetry() {
        let spec = gaussian(3, 1.0);
        let grid = Grid2D::new((-1.0, 1.0), (-1.0, 1.0), 8, 8);
        let z = c(2.5, 0.7);
        let configs: Vec<Vec<Complex64>> = (0..12)
            .map(|k| {
                let a = 0.41 * k as f64;
                vec![c(0.8 * a.cos(), 0.6 * a.sin() + 0.013), c(-0.3 + 0.05 * a, 0.2), c(0.1, -0.69 + 0.1 * a)]
            })
            .collect();
        let run = |probe: Complex64, conj: bool| {
            let obs = Observables::default().with_ward(probe, grid.clone());
            let mut reps = vec![ReplicaStats::empty(&obs), ReplicaStats::empty(&obs)];
            for (k, cfg) in configs.iter().enumerate() {
                let pts: Vec<Complex64> = cfg.iter().map(|p| if conj { p.conj() } else { *p }).collect();
                reps[k % 2].record(&spec, &obs, &pts);
            }
            ward_residual_one_point(&ChainStats::from_replicas(spec.clone(), obs, 3, reps)).unwrap()
        };
        let (a, b) = (run(z, false), run(z.conj(), true));
        for j in 0..8 {
            for i in 0..8 {
                let (p, q) = (&a.cells[grid.index(i, j)], &b.cells[grid.index(i, 7 - j)]);
                match (p, q) {
                    (Some(p), Some(q)) => assert!((p.value - q.value.conj()).norm() < 1e-10, "{i} {j} {} {}", p.value, q.value),
                    (None, None) => {}
                    _ => panic!("border mismatch"),
                }
            }
        }
    }

    #[test]
    fn density_is_rotation_symmetric() {
        let spec = gaussian(20, 1.0);
        let obs = Observables::default().with_density(Grid2D::covering_disk(spec.cutoff_radius(), 128));
        let run = SamplerConfig { replicas: 16, ..cfg(&spec, 8, 1000) };
        let stats = run_chains(&spec, &run, &obs).unwrap();
        for (m, a) in angular_modes(&stats, 4, spec.cutoff_radius()).unwrap().iter().enumerate() {
            assert!(a.consistent_with(ZERO, 3.0), "mode {}: {a:?}", m + 1);
        }
    }
}
