//! Truncated Fock space of the cavity mode tensored with the detector levels.

mod observables;
mod operator;
mod space;

pub use observables::{
    detector_truncation_check, expectation, mandel_q, mandel_q_from_distribution,
    quadrature_variances, truncation_check, Moments, ObservableSample, ObservableSeries,
    PhotonSnapshot, TimeUnit, Q_FLOOR, SNAPSHOT_TAIL,
};
pub use operator::{
    annihilation, creation, excitation_parity, number, projector, sigma, LinearOperator,
    Symmetry, SYMMETRY_TOL,
};
pub use space::{HilbertSpace, StateVector};
