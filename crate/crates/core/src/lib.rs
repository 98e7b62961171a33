//! Numerical laboratory for two-dimensional eigenvalue ensembles.
//!
//! The crate connects three views of the same object:
//!
//! * the finite-N Dyson gas (a 2D Coulomb plasma in a quasiharmonic external
//!   potential), sampled by Metropolis Monte Carlo in [`loggas`];
//! * the large-N equilibrium droplet, reconstructed from its area and
//!   harmonic moments as an exterior Laurent map in [`equilibrium`];
//! * zero-surface-tension Laplacian growth of that droplet in the area
//!   parameter `t`, with cusp detection, in [`growth`].
//!
//! Closed-form large-N observables and exact finite-N references live in
//! [`correlators`].

pub mod correlators;
pub mod equilibrium;
pub mod gas;
pub mod grid;
pub mod growth;
pub mod loggas;
pub mod potential;
pub mod quadrature;

pub use num_complex::Complex64;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use gas::{gas_energy, GasError, GasState};
pub use grid::Grid2D;
pub use potential::{eval_potential, eval_sigma, PotentialError, PotentialSpec};
