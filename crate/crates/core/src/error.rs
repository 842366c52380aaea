use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("loop length cutoff must be even and at least 2, got {0}")]
    InvalidMaxLen(u32),
    #[error("intensity must be finite and non-negative, got {0}")]
    InvalidIntensity(f64),
    #[error("lattice domain must be non-empty with positive mesh")]
    InvalidDomain,
    #[error("sub-domain is not contained in the soup domain")]
    NotSubdomain,
    #[error("soups live on different domains or length cutoffs")]
    DomainMismatch,
    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("box counting needs at least 3 scales, each >= 2, got {0}")]
    TooFewScales(usize),
    #[error("cannot trace the boundary of an empty fill")]
    EmptyFill,
    #[error("contour trace did not close after {0} steps")]
    TraceDidNotClose(usize),
    #[error("loop is not strictly inside the unit square")]
    LoopOutsideUnitSquare,
    #[error("hull must be non-empty and lie in the closed upper half-plane")]
    InvalidHull,
}
