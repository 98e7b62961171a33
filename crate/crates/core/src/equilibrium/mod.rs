//! Large-N equilibrium droplets.
//!
//! For a quasiharmonic potential with polynomial `V` of degree `n` and a
//! connected droplet containing the origin, the exterior of the droplet is
//! the image of `|w| > 1` under a Laurent map with `n` inverse powers. The
//! droplet is fixed by its area `pi beta t` and the harmonic moments
//! `t_1 .. t_n` of its exterior, which equal the coefficients of `V`.

mod deform;
mod green;
mod harmonic;
mod laurent;
mod moments;
mod schwarz;
mod solver;

use num_complex::Complex64;
use thiserror::Error;

pub use deform::{deform_boundary, normal_offset, DeltaW};
pub use green::{green_function, robin_radius};
pub use harmonic::{harmonic_continuation, HarmonicExtension};
pub use laurent::{unit_node, LaurentMap};
pub use moments::{moments_of_map, moments_with_nodes};
pub use schwarz::schwarz_residual;
pub use solver::{solve_droplet, solve_droplet_from, DropletSolution, SOLVER_TOLERANCE};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EquilibriumError {
    #[error("nonphysical map: {0}")]
    NonPhysicalMap(String),
    #[error("no smooth connected droplet found: {0}")]
    NoDroplet(String),
    #[error("point {0} is not in exterior domain")]
    NotInExterior(Complex64),
    #[error("droplet diameter {diameter} reaches the cutoff radius {cutoff}")]
    CutoffTooSmall { diameter: f64, cutoff: f64 },
    #[error("cannot take exterior normal derivative of a sampled deltaW without its normal derivative")]
    MissingNormalDerivative,
    #[error("boundary data has {got} samples, expected {expected}")]
    SampleCount { got: usize, expected: usize },
}
