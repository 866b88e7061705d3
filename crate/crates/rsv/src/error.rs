use thiserror::Error;

/// Crate-wide error type.
///
/// Variants are grouped by how the CLI maps them to exit codes: condition or
/// validation failures exit with 1, numerical failures with 2, configuration
/// problems with 3.
#[derive(Debug, Error)]
pub enum Error {
    // ---- grid / representation ----
    #[error("invalid grading: {0}")]
    InvalidGrading(String),
    #[error("evaluation point t = {t} outside grid span [{t_min}, {t_max}]")]
    OutOfRange { t: f64, t_min: f64, t_max: f64 },
    #[error("illegal inclusion {from:?} -> {to:?}: parameter order violates the inclusion propositions")]
    IllegalInclusion { from: (f64, f64), to: (f64, f64) },

    // ---- kernel conditions ----
    #[error("kernel is not regular singular: {0}")]
    NotRegularSingular(String),
    #[error("condition {condition} failed: {detail}")]
    ConditionFailed { condition: String, detail: String },
    #[error("perturbation kernel does not vanish on the diagonal (fitted slope {slope})")]
    NoVanishing { slope: f64 },
    #[error("root of p at {alpha} is degenerate: |p'| = {b_abs}")]
    DegenerateRoot { alpha: String, b_abs: f64 },

    // ---- quadrature / operators ----
    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),
    #[error("exponent {sigma} is too singular for integration (need sigma > -1)")]
    ExponentTooSingular { sigma: f64 },
    #[error("domain error: {0}")]
    DomainError(String),

    // ---- prototype ----
    #[error("functions are not proportional: relative deviation {deviation}")]
    NotProportional { deviation: f64 },
    #[error("leading-constant extrapolation does not converge: {0}")]
    NoLimit(String),

    // ---- solver ----
    #[error("iteration is not contracting: successive-difference ratio {ratio} for 3 consecutive steps")]
    NotContracting { ratio: f64 },
    #[error("maximum iteration count {max_iter} exceeded (last difference {last_diff})")]
    MaxIterExceeded { max_iter: usize, last_diff: f64 },
    #[error("lambda search exhausted after {doublings} doublings (best contraction {best})")]
    SearchExhausted { doublings: usize, best: f64 },
    #[error("series recursion denominator vanished at order {order}")]
    ResonanceError { order: usize },
    #[error("solutions mismatch beyond threshold: {0}")]
    MismatchDetected(String),

    // ---- level-1 ----
    #[error("polynomial root finding failed: {0}")]
    RootFindingFailure(String),
    #[error("no admissible ray: {0}")]
    NoAdmissibleRay(String),
    #[error("z = {z} violates the half-plane constraint Re(z e^(i theta)) > {bound}")]
    HalfPlaneViolation { z: String, bound: f64 },
    #[error("Laplace tail bound {tail} exceeds requested accuracy {requested}")]
    TailTooLarge { tail: f64, requested: f64 },

    // ---- configuration ----
    #[error("config error: {0}")]
    ConfigError(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// CLI exit code for this error: 1 condition/validation, 2 numerical, 3 config.
    pub fn exit_code(&self) -> i32 {
        use Error::*;
        match self {
            NotRegularSingular(_) | ConditionFailed { .. } | NoVanishing { .. }
            | DegenerateRoot { .. } | IllegalInclusion { .. } | NoAdmissibleRay(_)
            | HalfPlaneViolation { .. } => 1,
            QuadratureFailure(_) | ExponentTooSingular { .. } | DomainError(_)
            | NotProportional { .. } | NoLimit(_) | NotContracting { .. }
            | MaxIterExceeded { .. } | SearchExhausted { .. } | ResonanceError { .. }
            | MismatchDetected(_) | RootFindingFailure(_) | TailTooLarge { .. }
            | OutOfRange { .. } | InvalidGrading(_) => 2,
            ConfigError(_) | Io(_) | Json(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
