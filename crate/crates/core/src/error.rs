use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("TM({m},{n}) does not couple: mode indices must be positive and odd")]
    InvalidModeIndex { m: i64, n: i64 },

    #[error("mode with cutoff {cutoff} PHz is evanescent at {omega} PHz")]
    Evanescent { omega: f64, cutoff: f64 },

    /// Energy sits on (or within the guard margin of) a cutoff, where the
    /// density of states diverges.
    #[error("energy {omega} PHz is at the cutoff {cutoff} PHz")]
    Boundary { omega: f64, cutoff: f64 },

    #[error("energy {omega} PHz is below the lowest cutoff; no propagating mode")]
    CutoffRegion { omega: f64 },

    #[error("mode rank {rank} is not propagating at {omega} PHz")]
    ModeClosed { rank: usize, omega: f64 },

    #[error("no dark input state exists with a single open mode")]
    NoDarkState,

    #[error("input amplitudes are not normalized (sum |c|^2 = {0})")]
    NotNormalized(f64),

    #[error("resolvent f vanishes at {omega} PHz")]
    SingularResolvent { omega: f64 },

    #[error("closed form not applicable: {0}")]
    KindMismatch(String),

    #[error("quadrature oracle failed: {0}")]
    OracleFailure(String),
}

impl Error {
    /// True for errors raised by evaluating at or next to a mode cutoff, or in
    /// the cutoff region, as opposed to malformed parameters.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            Error::Evanescent { .. }
                | Error::Boundary { .. }
                | Error::CutoffRegion { .. }
                | Error::ModeClosed { .. }
                | Error::SingularResolvent { .. }
                | Error::NoDarkState
        )
    }
}
