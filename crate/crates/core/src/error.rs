use thiserror::Error;

use crate::stencil::LatticeIndex;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("U_E is not positive definite (smallest eigenvalue {smallest:e})")]
    NotPositiveDefinite { smallest: f64 },
    #[error("degenerate pencil: trace {trace:e} below threshold")]
    DegeneratePencil { trace: f64 },
    #[error("zero bispinor")]
    ZeroVector,
    #[error("shift {0:?} is not a unit (g4d = 1) shift")]
    NotUnitShift([i32; 4]),
    #[error("shift {0:?} is not a sum of two unit shifts")]
    NotDecomposable([i32; 4]),
    #[error("lattice index {0:?} has odd coordinate sum")]
    OddLatticeIndex([i32; 4]),
    #[error("singular elimination block at lattice point {point:?} (pivot {pivot:e})")]
    SingularBlock { point: LatticeIndex, pivot: f64 },
    #[error("region radius must be at least 1, got {0}")]
    BadRadius(u32),
    #[error("no interior minimum in bracket [{lo:e}, {hi:e}]: R1 = {f_lo:e}, {f_mid:e}, {f_hi:e}")]
    NoInteriorMinimum { lo: f64, hi: f64, f_lo: f64, f_mid: f64, f_hi: f64 },
    #[error("need at least {need} points, got {got}")]
    TooFewPoints { need: usize, got: usize },
    #[error("R_av = {r_av:e} is below R0 = {r0:e}")]
    BelowFloor { r_av: f64, r0: f64 },
    #[error("doublet classification failed: {0}")]
    Classification(String),
    #[error("zero norm wave function")]
    ZeroNorm,
    #[error("invalid argument: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
