use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("crossings need equal positive exponents or a constant arc, got {0} and {1}")]
    UnsupportedExponentPair(f64, f64),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("invalid exponent p = {0}")]
    InvalidExponent(f64),

    #[error("degenerate interval [{0}, {0}]")]
    DegenerateInterval(f64),

    #[error("previous level vanishes at the stage center {0}")]
    ZeroAtCenter(f64),

    #[error("stage {k}: bump half-width {r:e} at {q} is below floating-point resolution")]
    ResolutionLoss { k: usize, q: f64, r: f64 },

    #[error("stage {k}: no admissible oscillation radius found at {q}")]
    NoRadius { k: usize, q: f64 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("curve family is empty")]
    EmptyFamily,

    #[error("f is not differentiable at {0}")]
    NotDifferentiable(f64),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("solver stopped with relative duality gap {:e} after {} iterations", .0.gap, .0.iterations)]
    NotConverged(Box<crate::modulus::ModulusResult>),

    #[error("schema: {0}")]
    Schema(String),
}
