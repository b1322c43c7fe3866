use thiserror::Error;

/// Errors shared across the curve, basis, operator and wedge layers.
#[derive(Debug, Error)]
pub enum KnError {
    #[error("lattice is degenerate: period ratio {ratio} is real within tolerance")]
    DegenerateLattice { ratio: f64 },

    #[error("marked points coincide modulo the lattice")]
    CoincidentPoints,

    #[error("operation requires a genus-{required} curve, got genus {got}")]
    UnsupportedGenusOperation { required: u8, got: u8 },

    #[error("divisor degree mismatch: zeros {zeros} vs poles {poles}")]
    DegreeMismatch { zeros: i64, poles: i64 },

    #[error("Abel condition violated: divisor sum is {distance:.3e} away from the lattice")]
    AbelConditionViolated { distance: f64 },

    #[error("requested order {requested} exceeds cached expansion order {available}")]
    ExpansionOrderExceeded { requested: i64, available: i64 },

    #[error("no Riemann-Roch basis found for a special divisor: {0}")]
    SpecialDivisorUnresolved(String),

    #[error("basis normalization system is singular: {0}")]
    SpecialConfigurationFailure(String),

    #[error("window too small: {0}")]
    WindowTooSmall(String),

    #[error("non-generic bundle data: {0}")]
    NonGenericData(String),

    #[error("residual too large: {residual:.3e} exceeds tolerance {tol:.3e}")]
    ResidualTooLarge { residual: f64, tol: f64 },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("representation dimension {rep} does not match bundle rank {rank}")]
    RankMismatch { rep: usize, rank: usize },

    #[error("framing matrix is singular")]
    SingularFraming,

    #[error("sample point lies on the degeneration divisor")]
    SampleOnDivisor,

    #[error("index sequence is not eventually consecutive: {0}")]
    NotEventuallyConsecutive(String),

    #[error("gamma matrix is singular")]
    SingularGamma,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("index {index} is not a highest slot (component {component} of {rank})")]
    NotHighestSlot { index: i64, component: usize, rank: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("verification check failed: {0}")]
    CheckFailure(String),
}

pub type Result<T> = std::result::Result<T, KnError>;
