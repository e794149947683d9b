//! Minimum-power SINR feasibility on toroidal lattices with random erasures.
//!
//! A network of transmitter-receiver links sits on a 1- or 2-dimensional
//! torus. Every link must meet a common SINR target; the componentwise
//! smallest power vector that does so solves a linear system whose matrix is
//! circulant in the fully populated case. When links are independently
//! erased with probability `e`, the surviving network loses translation
//! invariance, and the crate provides two complementary answers:
//!
//! * **exact numerics** ([`numeric`]): solve the restricted linear system of
//!   each sampled erasure pattern and aggregate over realizations;
//! * **spectral fixed point** ([`analytic`]): a self-consistent shift `beta`
//!   of the full-lattice spectrum reproduces the large-N mean and variance
//!   of the power distribution without sampling.
//!
//! [`experiments`] drives matched analytic/Monte-Carlo sweeps over grids of
//! the SINR target and erasure probability, and the `sinrgrid` binary
//! exposes them as a command-line tool writing plain CSV.

// Validations are written as negated comparisons (`!(x > 0.0)`) so that NaN
// arguments fail them too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod cli;
pub mod config;
pub mod erasure;
pub mod error;
pub mod experiments;
pub mod lattice;
pub mod numeric;
pub mod report;
pub mod spectrum;

pub use analytic::{
    beta_residual, critical_gamma, gamma_e, mean_field_power, solve_beta, solve_beta_eps,
    Branch, FixedPointSolution,
};
pub use erasure::{active_indices, sample_mask, ErasureMask};
pub use error::{Error, Result};
pub use experiments::{
    compare, derive_seed, run_analytic_sweep, run_monte_carlo, run_sample_critical,
    SweepConfig, SweepRecord,
};
pub use lattice::{
    gain, gain_profile, interference_sum, torus_distance, ChannelParams, GainProfile,
    LatticeSpec,
};
pub use numeric::{
    build_matrix, max_feasible_gamma_sample, solve_powers, solve_powers_regularized,
    PowerSolution,
};
pub use spectrum::{
    eigenvalues, max_feasible_gamma_no_erasure, pave_no_erasure, EigenSpectrum,
};
