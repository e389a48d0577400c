//! Photon generation from vacuum in a frequency-modulated cavity that holds an
//! intracavity quantum detector.
//!
//! The cavity mode is parametrically driven (dynamical Casimir effect) and
//! coupled to an N-level ladder atom, a harmonic-oscillator detector or a
//! network of identical two-level atoms. The crate covers:
//!
//! - [`fock`]: truncated composite Hilbert spaces, sparse operators and
//!   field observables (photon number, Mandel Q, quadrature variances);
//! - [`model`]: lab-frame, RWA, strong-modulation and two-level rotated
//!   Hamiltonians plus the Dicke-network mapping;
//! - [`spectral`]: dressed-state eigensystems at zero modulation and the
//!   catalog of modulation resonances;
//! - [`evolve`]: fixed-step RK4 Schrödinger integration and observable series;
//! - [`monitor`]: continuous read-out of the detector (quantum jumps, no-count
//!   evolution, trajectory sampling, projective post-selection);
//! - [`oracle`]: closed-form results used to validate simulations.
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]

extern crate alloc;

pub mod error;
pub mod evolve;
pub mod fock;
pub mod linalg;
pub mod model;
pub mod monitor;
pub mod oracle;
pub mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64;
