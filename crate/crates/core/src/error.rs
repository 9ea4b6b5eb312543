use thiserror::Error;

/// Errors raised by the mode engine and the correlation pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error in {op}: {reason}")]
    Domain { op: &'static str, reason: String },

    /// Inputs are individually valid but do not fit together.
    #[error("structural error in {op}: {reason}")]
    Structural { op: &'static str, reason: String },

    /// The LG expansion of a detection field did not meet its tail tolerance
    /// before the cutoff cap was reached.
    #[error(
        "expansion of detection mode (l={ell}, p={p}) did not converge: \
         weighted tail {tail:.3e} > {tolerance:.1e} at cutoff p'={cutoff}"
    )]
    Convergence {
        ell: i32,
        p: u32,
        cutoff: usize,
        tail: f64,
        tolerance: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(op: &'static str, reason: impl Into<String>) -> Error {
    Error::Domain {
        op,
        reason: reason.into(),
    }
}

pub(crate) fn structural(op: &'static str, reason: impl Into<String>) -> Error {
    Error::Structural {
        op,
        reason: reason.into(),
    }
}
