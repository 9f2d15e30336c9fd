//! Two-photon resonance fluorescence of a driven, damped anharmonic ladder:
//! Lindblad steady states, dressed-state line decomposition, correlation
//! functions, spectra, closed-form oracles and detection modelling.

pub mod analytic;
pub mod correlations;
pub mod detection;
pub mod dressed;
pub mod error;
pub mod ladder;
pub mod lindblad;
pub mod model;
pub mod units;

pub use correlations::{CorrelationKind, CorrelationTrace, Normalization, Spectrum, Window};
pub use detection::{FilterKernel, PowerCalibration};
pub use dressed::{DressedBasis, Line, LineDecomposition, LineOperator};
pub use error::{Error, Result};
pub use ladder::{ComplexMatrix, LadderParams};
pub use lindblad::{DensityMatrix, Superoperator};
pub use model::Emitter;
pub use num_complex::Complex64;
