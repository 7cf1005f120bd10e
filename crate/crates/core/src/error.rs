use crate::Complex;

/// Failure modes shared by every numerical routine in the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("point {z} lies outside the validity disk of radius {radius}")]
    DomainExceeded { z: Complex, radius: f64 },
    #[error("non-finite value encountered while {0}")]
    NonFinite(&'static str),
    #[error("orbit escaped the validity disk after {step} steps")]
    OrbitEscaped { step: usize },
    #[error("Newton iteration did not converge within {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("derivative {derivative} too small near {z}: critical point nearby")]
    CriticalPointNearby { z: Complex, derivative: f64 },
    #[error("quadrature failed to reach tolerance {tolerance:e}")]
    QuadratureFailure { tolerance: f64 },
    #[error("root finder failed: {0}")]
    RootFinderFailure(String),
    #[error("fixed point {root} lies on the boundary circle of radius {radius}")]
    BoundaryRoot { root: Complex, radius: f64 },
    #[error("another fixed point lies within {distance:e} of the contour about {center}")]
    ContourConflict { center: Complex, distance: f64 },
    #[error("{value} lies on the branch cut of the principal logarithm")]
    BranchCut { value: Complex },
    #[error("multiplier equals 1, logarithmic parameter undefined")]
    UnitMultiplier,
    #[error("need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("expected {expected} fixed points, found {found}")]
    WrongFixedPointCount { expected: usize, found: usize },
    #[error("fixed point {location} has multiplier within 1e-10 of 1")]
    Degenerate { location: Complex },
    #[error("point {z} within {distance:e} of pole {pole}")]
    PoleProximity { z: Complex, pole: Complex, distance: f64 },
    #[error("Re f'(z) = {re_derivative} <= 0 at {z}")]
    PositivityViolated { z: Complex, re_derivative: f64 },
    #[error("path passes within {distance:e} of pole {pole}")]
    PathNearPole { pole: Complex, distance: f64 },
    #[error("input {z} is a fixed point")]
    FixedPointInput { z: Complex },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("residue {residue} is not purely imaginary")]
    ResidueNotImaginary { residue: Complex },
    #[error("no closed orbit found: {0}")]
    NoClosedOrbit(String),
    #[error("point {z} did not escape within {iterations} iterations")]
    NonEscaping { z: Complex, iterations: usize },
    #[error("ray tracing Newton step diverged at t = {t}")]
    NewtonDivergence { t: f64 },
    #[error("ray is empty")]
    EmptyRay,
    #[error("rays do not share a parameter grid")]
    GridMismatch,
    #[error("ray lands inside the gate disk at {landing}")]
    RayLandsInside { landing: Complex },
    #[error("ray does not cross the gate disk")]
    RayMissesDisk,
    #[error("family too short: {0}")]
    FamilyTooShort(String),
}

pub type Result<T> = std::result::Result<T, Error>;
