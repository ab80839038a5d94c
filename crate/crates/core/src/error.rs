use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown problem `{0}`")]
    UnknownProblem(String),
    #[error("unknown override key `{key}` for problem `{problem}`")]
    UnknownOverrideKey { problem: String, key: String },
    #[error("invalid value for `{key}`: {reason}")]
    InvalidOverrideValue { key: String, reason: String },
    #[error("unsupported modulus form: {0}")]
    UnsupportedModulusForm(String),

    #[error("constraint {index} is not finite at t={t}")]
    NonFiniteConstraint { index: usize, t: f64 },
    #[error("no feasible witness found within {budget} iterations")]
    ProjectionFailed { budget: usize },
    #[error("point is not feasible at t={t} (max constraint {max_h:e})")]
    InfeasibleInput { t: f64, max_h: f64 },
    #[error("excess of an empty set is undefined")]
    EmptySourceSet,

    #[error("linear program is unbounded")]
    LpUnbounded,
    #[error("simplex method exceeded {0} pivots")]
    LpCycling(usize),
    #[error("control sample set is empty at t={t}")]
    EmptyControlSet { t: f64 },
    #[error("no boundary point located at t={t}")]
    BoundarySamplingFailed { t: f64 },
    #[error("no admissible (eps, eta) pair: {0}")]
    NoFeasibleConstants(String),

    #[error("state became non-finite at step {step}")]
    NonFiniteState { step: usize },
    #[error("viability lost at t={t} (max constraint {max_h:e})")]
    ViabilityLost { t: f64, max_h: f64 },
    #[error("correction constants infeasible: {0}")]
    ConstantsInfeasible(String),
    #[error("correction failed: {0}")]
    CorrectionFailed(String),
    #[error("reference starts outside the constraint set (max constraint {max_h:e})")]
    InfeasibleStart { max_h: f64 },
    #[error("invalid constants: {0}")]
    InvalidConstants(String),

    #[error("discount {lambda} does not exceed the growth rate {a1}")]
    DiscountTooSmall { lambda: f64, a1: f64 },
    #[error("grid too coarse: feasible node x={x:?} at t={t} has no admissible velocity")]
    GridTooCoarse { t: f64, x: Vec<f64> },
    #[error("grid does not cover the constraint set: {0}")]
    GridCoverage(String),
    #[error("query ({t}, {x:?}) lies outside the grid")]
    OutOfGrid { t: f64, x: Vec<f64> },

    #[error("discount {lambda} is not above the threshold K={k}")]
    DiscountBelowThreshold { lambda: f64, k: f64 },
    #[error("trajectory leaves the field grid at t={t}")]
    TrajectoryOutOfGrid { t: f64 },
    #[error("fields are defined on different grids")]
    GridMismatch,
    #[error("probe {x:?} is infeasible at t={t}")]
    ProbeInfeasible { t: f64, x: Vec<f64> },

    #[error("usage: {0}")]
    Usage(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
