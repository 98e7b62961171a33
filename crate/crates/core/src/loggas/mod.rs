//! Metropolis sampling of the finite-N Dyson gas `e^{-beta E}` and
//! estimators built on it.
//!
//! Independent replicas run on separate ChaCha streams of one seed; each
//! produces a [`ReplicaStats`] and the replicas are merged in index order,
//! so results do not depend on scheduling. Error bars are replica
//! jackknife.

mod estimators;
mod observables;
mod sampler;
mod stats;

use num_complex::Complex64;
use thiserror::Error;

pub use estimators::{
    angular_modes, connected_two_trace, density_estimate, loop_residual, trace_mean,
    ward_residual_one_point, LoopEstimate, WardField,
};
pub use observables::{loop_kernel, pair_identity_terms, Observables, TraceFn, WardSetup};
pub use sampler::{
    acceptance_probability, mcmc_sweep, metropolis_accept, replica_rng, run_chains, run_replica,
    SweepCounts,
};
pub use stats::{ChainStats, ReplicaStats};

use crate::gas::GasError;
use crate::potential::PotentialSpec;

#[derive(Debug, Error)]
pub enum SamplerError {
    #[error("N hbar = {n_hbar} does not match t = {t}")]
    ParticleNumber { n_hbar: f64, t: f64 },
    #[error("invalid sampler setting: {0}")]
    InvalidConfig(String),
    #[error("non-finite energy in replica {replica} at sweep {sweep}; state: {points:?}")]
    NonFiniteEnergy {
        replica: usize,
        sweep: usize,
        points: Vec<Complex64>,
    },
    #[error("unknown observable {0:?}")]
    UnknownObservable(String),
    #[error(transparent)]
    Gas(#[from] GasError),
}

/// Sampler settings. `measure_sweeps` and `burn_in_sweeps` are per replica.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    pub n: usize,
    pub seed: u64,
    pub replicas: usize,
    pub burn_in_sweeps: usize,
    pub measure_sweeps: usize,
    pub proposal_scale: f64,
    pub thin: usize,
    /// Adjust `proposal_scale` during burn-in toward 30-50% acceptance.
    pub auto_tune: bool,
}

impl SamplerConfig {
    /// Defaults for `spec`: `N = t / hbar`, initial scale `sqrt(hbar) / 2`,
    /// thinning 10.
    pub fn for_spec(spec: &PotentialSpec, seed: u64) -> Self {
        Self {
            n: spec.particles(),
            seed,
            replicas: 8,
            burn_in_sweeps: 1000,
            measure_sweeps: 10_000,
            proposal_scale: 0.5 * spec.hbar().sqrt(),
            thin: 10,
            auto_tune: true,
        }
    }

    pub fn validate(&self, spec: &PotentialSpec) -> Result<(), SamplerError> {
        let n_hbar = self.n as f64 * spec.hbar();
        if (n_hbar - spec.t()).abs() > 1e-12 * spec.t() {
            return Err(SamplerError::ParticleNumber { n_hbar, t: spec.t() });
        }
        let bad = |what: &str| Err(SamplerError::InvalidConfig(what.into()));
        if self.n == 0 {
            return bad("N must be positive");
        }
        if self.replicas == 0 {
            return bad("replicas must be positive");
        }
        if self.measure_sweeps == 0 || self.burn_in_sweeps == 0 {
            return bad("sweep counts must be positive");
        }
        if self.thin == 0 {
            return bad("thin must be positive");
        }
        if !(self.proposal_scale > 0.0 && self.proposal_scale.is_finite()) {
            return bad("proposal_scale must be positive");
        }
        Ok(())
    }
}

/// Mean with replica-jackknife errors on the real and imaginary parts.
/// Errors are NaN (and `flagged` set) with fewer than two replicas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexEstimate {
    pub value: Complex64,
    pub error_re: f64,
    pub error_im: f64,
    pub flagged: bool,
}

impl ComplexEstimate {
    /// Combined standard error `hypot(error_re, error_im)`.
    pub fn sigma(&self) -> f64 {
        self.error_re.hypot(self.error_im)
    }

    /// `|value - target| <= k sigma`.
    pub fn consistent_with(&self, target: Complex64, k: f64) -> bool {
        (self.value - target).norm() <= k * self.sigma()
    }

    /// Real-part check `|Re value - target| <= k error_re`.
    pub fn re_consistent_with(&self, target: f64, k: f64) -> bool {
        (self.value.re - target).abs() <= k * self.error_re
    }
}

/// Jackknife over leave-one-out values `loo` around the full estimate.
pub(crate) fn jackknife(full: Complex64, loo: &[Complex64]) -> ComplexEstimate {
    let r = loo.len();
    if r < 2 {
        return ComplexEstimate {
            value: full,
            error_re: f64::NAN,
            error_im: f64::NAN,
            flagged: true,
        };
    }
    let mean = loo.iter().sum::<Complex64>() / r as f64;
    let k = (r - 1) as f64 / r as f64;
    let var_re: f64 = loo.iter().map(|v| (v.re - mean.re).powi(2)).sum::<f64>() * k;
    let var_im: f64 = loo.iter().map(|v| (v.im - mean.im).powi(2)).sum::<f64>() * k;
    ComplexEstimate {
        value: full,
        error_re: var_re.sqrt(),
        error_im: var_im.sqrt(),
        flagged: false,
    }
}
