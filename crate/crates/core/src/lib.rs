//! Quantum correlations of SPDC photon pairs measured with SLM-based
//! Laguerre–Gauss mode projectors.
//!
//! The pipeline runs in the SLM plane (the crystal is imaged onto it):
//!
//! 1. [`modes`]: Laguerre functions, radial quadrature, overlaps.
//! 2. [`source`]: pump field, thin-crystal pair weights, closed-form Schmidt numbers.
//! 3. [`detection`]: what an SLM + single-mode fiber actually projects onto.
//! 4. [`correlate`]: coincidence matrices, the diagonal weight `W`, Schmidt estimates.

pub mod correlate;
pub mod detection;
mod error;
pub mod exec;
pub mod modes;
pub mod source;

pub use correlate::{
    coincidence_amplitude, correlation_stats, diagonal_participation, schmidt_estimate, w_metric, CoincidenceMatrix,
    CorrelationStats, Estimator, FieldDiagnostics, GridConfig, MatrixRun, Model, SweepRow,
};
pub use detection::{DetectionConfig, ExpansionPolicy, OpticsConfig};
pub use error::{Error, Result};
pub use exec::Exec;
pub use modes::{ComplexRadialField, ModeIndex, QuadratureRule};
pub use source::{SchmidtSpectrum, SourceParams};
