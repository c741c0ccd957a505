use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid `{key}`: {reason}")]
    Validation { key: String, reason: String },

    /// QR iteration exceeded its sweep budget. `deflated` eigenvalues had
    /// converged before the failure.
    #[error("eigensolver did not converge after {iterations} sweeps ({deflated}/{dimension} eigenvalues deflated)")]
    NotConverged {
        iterations: usize,
        deflated: usize,
        dimension: usize,
    },

    #[error("on phase boundary: det vanishes at k = {k:.6}")]
    OnPhaseBoundary { k: f64 },

    #[error("grid too coarse: winding {winding:.4} on {points} k-points is not integral")]
    GridTooCoarse { winding: f64, points: usize },

    #[error("reference energy on spectrum (distance {distance:.3e})")]
    ReferenceOnSpectrum { distance: f64 },

    #[error("band trajectory does not close (gap {gap:.3e})")]
    OpenTrajectory { gap: f64 },

    #[error("degenerate denominator: tL^2 = tR^2")]
    DegenerateDenominator,

    #[error("singular network: condition number {condition:.3e}")]
    SingularNetwork { condition: f64 },
}

impl Error {
    pub(crate) fn validation(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            key: key.into(),
            reason: reason.into(),
        }
    }
}
