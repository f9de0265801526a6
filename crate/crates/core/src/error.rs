use num_complex::Complex64;
use thiserror::Error;

/// Everything that can go wrong in the numerical pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum BeamError {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("degenerate lambda at mu = {mu}: b*mu + mu^2 vanishes")]
    DegenerateLambda { mu: Complex64 },
    #[error("division by |mu| = {0:e} in the stiffness term")]
    DivisionNearZero(f64),
    #[error("contour passes within {min_abs:e} of a zero")]
    BoundaryTooClose { min_abs: f64 },
    #[error("argument accumulation did not settle with {samples} samples")]
    NonConvergentPhase { samples: usize },
    #[error("Newton did not converge from {seed} (best {best}, |G| = {residual:e})")]
    NoConvergence {
        seed: Complex64,
        best: Complex64,
        residual: f64,
    },
    #[error("Newton drifted from {seed} to {found}, outside its basin")]
    DriftedOutOfBasin { seed: Complex64, found: Complex64 },
    #[error("audit mismatch: {0}")]
    AuditMismatch(String),
    #[error("branches {0} and {1} collide at alpha = {2}")]
    BranchCollision(String, String, f64),
    #[error("first-order formula undefined near the double root (|b^2 - 4an^4pi^4| = {0:e})")]
    NearDoubleRoot(f64),
    #[error("denominator of the critical damping formula vanishes at xi = {0}")]
    DenominatorVanishes(f64),
    #[error("eigenfunction residual {0:e} too large")]
    ResidualTooLarge(f64),
    #[error("sin(lambda) or sinh(lambda) vanishes; use the undamped mode instead")]
    DegenerateTrig,
    #[error("grid too coarse: Richardson estimates differ by {0:e}")]
    GridTooCoarse(f64),
    #[error("mu = {0} is (numerically) an eigenvalue")]
    AtEigenvalue(Complex64),
    #[error("dense eigensolver failed: {0}")]
    EigensolverFailure(String),
    #[error("modal basis ill-conditioned (cond ~ {0:e})")]
    IllConditionedModes(f64),
    #[error("sampling too coarse: {0}")]
    SamplingTooCoarse(String),
    #[error("energy underflow in fit window")]
    EnergyUnderflow,
}

pub type Result<T> = std::result::Result<T, BeamError>;
