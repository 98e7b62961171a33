use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::observables::Observables;
use super::stats::{ChainStats, ReplicaStats};
use super::{SamplerConfig, SamplerError};
use crate::gas::GasState;
use crate::potential::PotentialSpec;

/// `min(1, exp(-beta dE))`; zero for `dE = +inf`.
pub fn acceptance_probability(delta_e: f64, beta: f64) -> f64 {
    if delta_e <= 0.0 {
        1.0
    } else {
        (-beta * delta_e).exp()
    }
}

/// Metropolis decision for a uniform draw `u` in `[0, 1)`.
pub fn metropolis_accept(delta_e: f64, beta: f64, u: f64) -> bool {
    delta_e <= 0.0 || u < acceptance_probability(delta_e, beta)
}

/// Generator of replica `replica`: the ChaCha stream of that index under
/// `seed`.
pub fn replica_rng(seed: u64, replica: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica as u64);
    rng
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SweepCounts {
    pub proposed: u64,
    pub accepted: u64,
}

/// `N` single-particle proposals `z_j -> z_j + scale g` with `g` standard
/// complex Gaussian, in particle order. Each proposal consumes two normals
/// and one uniform whatever its fate. Moves outside the cutoff disk are
/// rejected.
pub fn mcmc_sweep(
    state: &mut GasState,
    spec: &PotentialSpec,
    scale: f64,
    rng: &mut ChaCha8Rng,
) -> SweepCounts {
    let beta = spec.beta();
    let cutoff = spec.cutoff_radius();
    let step = scale * std::f64::consts::FRAC_1_SQRT_2;
    let mut counts = SweepCounts::default();
    for j in 0..state.len() {
        let gx: f64 = rng.sample(StandardNormal);
        let gy: f64 = rng.sample(StandardNormal);
        let u: f64 = rng.random();
        counts.proposed += 1;
        let to = state.points()[j] + Complex64::new(gx, gy) * step;
        if to.norm() > cutoff {
            continue;
        }
        let delta = state.move_energy_change(spec, j, to);
        if metropolis_accept(delta, beta, u) {
            state.apply_move(j, to, delta);
            counts.accepted += 1;
        }
    }
    counts
}

const TUNE_EVERY: usize = 50;
const REFRESH_EVERY: usize = 100;

/// Runs replica `replica` of `cfg`: burn-in (with scale tuning when enabled)
/// followed by `measure_sweeps` sweeps, recording every `thin`-th.
pub fn run_replica(
    spec: &PotentialSpec,
    cfg: &SamplerConfig,
    obs: &Observables,
    replica: usize,
) -> Result<ReplicaStats, SamplerError> {
    cfg.validate(spec)?;
    let mut rng = replica_rng(cfg.seed, replica);
    let mut state = GasState::initial(spec, cfg.n)?;
    let mut scale = cfg.proposal_scale;
    let mut window = SweepCounts::default();
    for sweep in 0..cfg.burn_in_sweeps {
        let c = mcmc_sweep(&mut state, spec, scale, &mut rng);
        window.proposed += c.proposed;
        window.accepted += c.accepted;
        if cfg.auto_tune && (sweep + 1) % TUNE_EVERY == 0 {
            let rate = window.accepted as f64 / window.proposed as f64;
            if rate < 0.3 {
                scale *= 0.8;
            } else if rate > 0.5 {
                scale *= 1.25;
            }
            window = SweepCounts::default();
        }
    }
    check_energy(&mut state, spec, replica, cfg.burn_in_sweeps)?;
    let mut stats = ReplicaStats::empty(obs);
    stats.proposal_scale = scale;
    for sweep in 0..cfg.measure_sweeps {
        let c = mcmc_sweep(&mut state, spec, scale, &mut rng);
        stats.proposed += c.proposed;
        stats.accepted += c.accepted;
        if (sweep + 1) % REFRESH_EVERY == 0 {
            check_energy(&mut state, spec, replica, cfg.burn_in_sweeps + sweep + 1)?;
        }
        if (sweep + 1) % cfg.thin == 0 {
            stats.record(spec, obs, state.points());
        }
    }
    let rate = stats.acceptance();
    if !(0.05..=0.95).contains(&rate) {
        log::warn!("replica {replica}: acceptance {rate:.3} outside [0.05, 0.95]");
    }
    Ok(stats)
}

fn check_energy(
    state: &mut GasState,
    spec: &PotentialSpec,
    replica: usize,
    sweep: usize,
) -> Result<(), SamplerError> {
    let cached = state.energy();
    let fresh = state.refresh_energy(spec);
    match fresh {
        Ok(e) if e.is_finite() && cached.is_finite() => {
            if (e - cached).abs() > 1e-10 * e.abs().max(1.0) {
                log::debug!("replica {replica}: energy drift {:e} at sweep {sweep}", e - cached);
            }
            Ok(())
        }
        _ => Err(SamplerError::NonFiniteEnergy {
            replica,
            sweep,
            points: state.points().to_vec(),
        }),
    }
}

/// All replicas of `cfg` (in parallel), merged in index order.
pub fn run_chains(
    spec: &PotentialSpec,
    cfg: &SamplerConfig,
    obs: &Observables,
) -> Result<ChainStats, SamplerError> {
    cfg.validate(spec)?;
    let replicas = (0..cfg.replicas)
        .into_par_iter()
        .map(|k| run_replica(spec, cfg, obs, k))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ChainStats::from_replicas(spec.clone(), obs.clone(), cfg.n, replicas))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gas::gas_energy;
    use crate::grid::Grid2D;
    use crate::loggas::Observables;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn gaussian(n: usize, beta: f64) -> PotentialSpec {
        PotentialSpec::with_particles(beta, 1.0, n, vec![c(0.0, 0.0)]).unwrap()
    }

    fn small_cfg(spec: &PotentialSpec, seed: u64, replicas: usize) -> SamplerConfig {
        SamplerConfig {
            replicas,
            burn_in_sweeps: 100,
            measure_sweeps: 400,
            thin: 2,
            ..SamplerConfig::for_spec(spec, seed)
        }
    }

    #[test]
    fn downhill_moves_are_always_accepted() {
        for u in [0.0, 0.5, 0.999_999] {
            assert!(metropolis_accept(-1e-9, 1.0, u));
            assert!(metropolis_accept(0.0, 2.0, u));
        }
        assert!(!metropolis_accept(f64::INFINITY, 1.0, 0.0));
    }

    proptest! {
        #[test]
        fn detailed_balance(de in -20.0f64..20.0, beta in 0.1f64..4.0, u in 0.0f64..1.0) {
            let forward = acceptance_probability(de, beta);
            let backward = acceptance_probability(-de, beta);
            let ratio = forward / backward;
            prop_assert!((ratio - (-beta * de).exp()).abs() <= 1e-14 * ratio.max(1.0));
            prop_assert_eq!(metropolis_accept(de, beta, u), de <= 0.0 || u < forward);
        }
    }

    #[test]
    fn coincident_proposal_is_rejected() {
        let spec = gaussian(2, 1.0);
        let state = GasState::new(&spec, vec![c(0.0, 0.0), c(0.5, 0.0)]).unwrap();
        let de = state.move_energy_change(&spec, 0, c(0.5, 0.0));
        assert!(!metropolis_accept(de, 1.0, 0.0));
    }

    #[test]
    fn sweep_keeps_cached_energy() {
        let spec = gaussian(12, 1.0);
        let mut state = GasState::initial(&spec, 12).unwrap();
        let mut rng = replica_rng(9, 0);
        for _ in 0..200 {
            mcmc_sweep(&mut state, &spec, 0.2, &mut rng);
        }
        let fresh = gas_energy(&spec, state.points()).unwrap();
        assert!((state.energy() - fresh).abs() <= 1e-10 * fresh.abs());
        assert!(state.points().iter().all(|z| z.norm() <= spec.cutoff_radius()));
    }

    #[test]
    fn runs_are_deterministic() {
        let spec = gaussian(6, 1.0);
        let obs = Observables::default()
            .with_density(Grid2D::covering_disk(spec.cutoff_radius(), 16))
            .with_trace("x", |z| c(z.re, 0.0))
            .with_loop_probes(vec![c(2.0, 0.0)], 1e-3);
        let cfg = small_cfg(&spec, 42, 3);
        let a = run_chains(&spec, &cfg, &obs).unwrap();
        let b = run_chains(&spec, &cfg, &obs).unwrap();
        assert_eq!(a, b);
        let other = run_chains(&spec, &SamplerConfig { seed: 43, ..cfg }, &obs).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn replica_merge_matches_manual_merge() {
        let spec = gaussian(5, 2.0);
        let obs = Observables::default().with_trace("x", |z| c(z.re, 0.0)).with_trace("y", |z| c(z.im, 0.0));
        let cfg = small_cfg(&spec, 7, 2);
        let chains = run_chains(&spec, &cfg, &obs).unwrap();
        let single = |k| run_replica(&spec, &SamplerConfig { replicas: 1, ..cfg.clone() }, &obs, k).unwrap();
        let mut manual = single(0);
        manual.merge(&single(1));
        let merged = chains.merged();
        assert_eq!(merged.trace_mean, manual.trace_mean);
        assert_eq!(merged.trace_comoment, manual.trace_comoment);
        // replica 0 alone is the replicas = 1 run
        let one = run_chains(&spec, &SamplerConfig { replicas: 1, ..cfg }, &obs).unwrap();
        assert_eq!(one.replicas[0], chains.replicas[0]);
    }

    #[test]
    fn histogram_counts_every_particle() {
        let spec = gaussian(7, 1.0);
        let grid = Grid2D::covering_disk(spec.cutoff_radius(), 32);
        let obs = Observables::default().with_density(grid);
        let stats = run_chains(&spec, &small_cfg(&spec, 1, 2), &obs).unwrap();
        let merged = stats.merged();
        assert_eq!(merged.histogram.iter().sum::<u64>(), 7 * merged.samples);
        let rate = stats.acceptance();
        assert!((0.05..=0.95).contains(&rate), "acceptance {rate}");
    }

    /// Asymptotic Kolmogorov survival function `Q(lambda)`.
    fn kolmogorov_q(lambda: f64) -> f64 {
        let s: f64 = (1..200)
            .map(|k| {
                let k = k as f64;
                let sign = if k as u64 % 2 == 1 { 1.0 } else { -1.0 };
                sign * (-2.0 * k * k * lambda * lambda).exp()
            })
            .sum();
        (2.0 * s).clamp(0.0, 1.0)
    }

    #[test]
    fn one_particle_is_exponential() {
        // e^{-|z|^2 / hbar}: |z|^2 is exponential with mean hbar
        let spec = PotentialSpec::with_particles(1.0, 0.5, 1, vec![c(0.0, 0.0)]).unwrap();
        let hbar = spec.hbar();
        let obs = Observables::default().with_trace("r2", |z| c(z.norm_sqr(), 0.0)).keep_series();
        let cfg = SamplerConfig {
            replicas: 1,
            burn_in_sweeps: 1000,
            measure_sweeps: 100_000,
            thin: 10,
            ..SamplerConfig::for_spec(&spec, 2024)
        };
        let stats = run_chains(&spec, &cfg, &obs).unwrap();
        let mut xs: Vec<f64> = stats.replicas[0].series.iter().map(|v| v[0].re).collect();
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        // the cutoff truncates the law; normalize by its mass
        let mass = 1.0 - (-spec.cutoff_radius().powi(2) / hbar).exp();
        let d = xs
            .iter()
            .enumerate()
            .map(|(k, x)| {
                let cdf = (1.0 - (-x / hbar).exp()) / mass;
                (cdf - k as f64 / n).abs().max(((k + 1) as f64 / n - cdf).abs())
            })
            .fold(0.0, f64::max);
        let p = kolmogorov_q((n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d);
        assert!(p > 0.01, "KS D = {d}, p = {p}");
    }
}
