//! Ericksen–Leslie nematic liquid-crystal toolkit.
//!
//! This crate implements the hydrodynamic theory of nematic liquid crystals
//! with the general Oseen–Frank elastic energy on a periodic box, together
//! with the relative-energy machinery that certifies weak–strong stability
//! between two discrete trajectories:
//!
//! * [`tensor`] — fixed-dimension (d = 3) tensor types and every contraction
//!   used by the elastic-energy calculus, including dense rank-4/rank-6
//!   tensors that serve as brute-force oracles.
//! * [`frank`] — the Oseen–Frank energy in its three equivalent forms, the
//!   elastic tensors Λ and Θ in closed (Kronecker-delta) form, and the
//!   partial derivatives `F_S`, `F_h`.
//! * [`leslie`] — Leslie viscous stress, Ericksen elastic stress, the
//!   co-rotational rate, coefficient admissibility, and the pointwise
//!   dissipation identity behind the energy equality.
//! * [`fields`] — periodic grid fields, spectral and central-difference
//!   derivative backends, Leray projection, discrete norms, and the
//!   variational derivative `q` of the elastic energy.
//! * [`solver`] — time integration of the coupled system (explicit RK2 and a
//!   semi-implicit scheme), producing trajectories with monitor series.
//! * [`measure`] — discrete generalized Young measures and defect measures,
//!   recession transforms, dual pairings, and measure-valued residuals.
//! * [`energy`] — total energy, energy-law monitoring, relative energy E,
//!   relative dissipation W, the Gronwall weight K, and the certification of
//!   the Gronwall-type stability bound.
//! * [`verify`] — the named property suite behind `nematic verify`.
//! * [`config`] / [`cli`] — plain-text scenario configs, presets, and the
//!   three CLI commands with their exit-code contract.
//!
//! The `examples/` directory contains one runnable example per major
//! capability; start with `cargo run --example verify_suite`.

pub mod cli;
pub mod config;
pub mod energy;
pub mod fields;
pub mod frank;
pub mod leslie;
pub mod measure;
pub mod solver;
pub mod tensor;
pub mod verify;

use thiserror::Error;

/// Unified error type for fallible operations across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration file or parameter set failed validation.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    /// A field violated an invariant required by the called operation
    /// (unit-norm director, divergence-free velocity, matching grids, ...).
    #[error("field invariant violated: {0}")]
    FieldInvariant(String),
    /// The time stepper detected NaN/Inf values or a CFL violation.
    #[error("numerical abort: {0}")]
    NumericalAbort(String),
    /// Certification of the Gronwall bound failed.
    #[error("certification failure: {0}")]
    CertificationFailure(String),
    /// An integrand could not be extended to the recession boundary.
    #[error("recession evaluation failed: {0}")]
    Recession(String),
    /// I/O error while reading or writing artifacts.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
