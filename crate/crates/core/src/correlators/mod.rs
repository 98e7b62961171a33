//! Closed-form large-N observables of the droplet and exact finite-N
//! references for the Gaussian ensemble.

mod field;
mod free_energy;
mod partition;
mod plane;
mod traces;

use num_complex::Complex64;
use thiserror::Error;

pub use field::phi_phi_connected_cf;
pub use free_energy::free_energy_leading;
pub use partition::{brute_force_z, ginibre_girko_log_z, ginibre_girko_z};
pub use plane::{droplet_quadrature, HarmonicPolynomial, PlaneFunction};
pub use traces::{one_trace, two_trace_connected_cf};

use crate::equilibrium::EquilibriumError;
use crate::potential::PotentialError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CorrelatorError {
    #[error("the origin is not strictly inside the droplet")]
    OriginNotInside,
    #[error("droplet is not star-shaped about {0}")]
    NotStarShaped(Complex64),
    #[error("boundary data not smooth enough: {0}")]
    NonSmooth(String),
    #[error("points {0} and {1} straddle the droplet boundary; only inside or outside pairs are covered")]
    MixedRegime(Complex64, Complex64),
    #[error("point {0} lies on the droplet boundary")]
    OnBoundary(Complex64),
    #[error("coincident points {0}")]
    Coincident(Complex64),
    #[error("divergent Gaussian ensemble: |t2| = {0} >= 1/2")]
    DivergentEnsemble(f64),
    #[error("quadrature oracle supports N <= 3, got {0}")]
    TooManyParticles(usize),
    #[error("quadrature did not converge: last {last}, previous {previous}")]
    NonConvergent { last: f64, previous: f64 },
    #[error(transparent)]
    Equilibrium(#[from] EquilibriumError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
}

/// A closed-form value set against a sampler estimate (and optionally an
/// exact oracle). `pass` iff `|closed_form - estimate| <= k error`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableReport {
    pub name: String,
    pub closed_form: f64,
    pub estimate: f64,
    pub error: f64,
    pub oracle: Option<f64>,
    pub k: f64,
    pub pass: bool,
}

impl ObservableReport {
    pub fn new(name: impl Into<String>, closed_form: f64, estimate: f64, error: f64, k: f64) -> Self {
        let pass = (closed_form - estimate).abs() <= k * error;
        Self {
            name: name.into(),
            closed_form,
            estimate,
            error,
            oracle: None,
            k,
            pass,
        }
    }

    pub fn with_oracle(mut self, oracle: f64) -> Self {
        self.oracle = Some(oracle);
        self
    }

    /// `|closed_form - estimate|` in units of `error`.
    pub fn deviation(&self) -> f64 {
        (self.closed_form - self.estimate).abs() / self.error
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_pass_rule() {
        assert!(ObservableReport::new("a", 0.5, 0.52, 0.01, 3.0).pass);
        assert!(!ObservableReport::new("a", 0.5, 0.54, 0.01, 3.0).pass);
        // a NaN error never passes
        assert!(!ObservableReport::new("a", 0.5, 0.5, f64::NAN, 3.0).pass);
        let r = ObservableReport::new("b", 1.0, 1.0, 1.0, 3.0).with_oracle(1.0);
        assert_eq!(r.oracle, Some(1.0));
    }
}
