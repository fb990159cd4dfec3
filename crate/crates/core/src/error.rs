use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain of {requested} sites exceeds the site budget of {budget}; reduce L or d")]
    SiteBudget { requested: u128, budget: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),

    #[error("vector length {got} does not match operator dimension {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("radius {radius} exceeds the truncation radius {limit}")]
    RadiusTooLarge { radius: f64, limit: usize },

    #[error("adjacency graph is not a simple path")]
    NotAPath,

    #[error("non-finite potential value at site {site:?}")]
    NonFinitePotential { site: [i32; 3] },

    #[error("potential table has no entry for site {site:?}")]
    MissingTableEntry { site: [i32; 3] },

    #[error("energy {energy} lies outside the open band (-2, 2)")]
    EnergyOutsideBand { energy: f64 },

    #[error("resolvent solve did not converge: residual {residual:e} after {iterations} iterations")]
    NoConvergence { residual: f64, iterations: usize },

    #[error("{sites} sites exceed the dense diagonalization budget of {budget}")]
    DenseBudget { sites: usize, budget: usize },

    #[error("empty scaling window: smallest usable scale {guard:e} is above the window top {top:e}; use a larger L")]
    EmptyWindow { guard: f64, top: f64 },

    #[error("need at least {needed} grid points, got {got}")]
    InsufficientGrid { needed: usize, got: usize },

    #[error("time {t} violates the light-cone guard; a truncation radius of at least {required_radius} is needed")]
    ConeGuard { t: f64, required_radius: usize },

    #[error("step {step} too large: step * sqrt(x_max + |E|) = {product} > 0.05")]
    StepTooLarge { step: f64, product: f64 },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
}
