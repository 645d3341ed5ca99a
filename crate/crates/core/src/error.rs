use thiserror::Error;

/// Everything that can go wrong while building a graph or running an analysis.
///
/// Parse and validation problems each get their own variant so callers can
/// report exactly which rule an input file broke.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed graph JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("bad number {text:?}: {reason}")]
    BadNumber { text: String, reason: String },

    #[error("empty identifier in {role}")]
    EmptyId { role: &'static str },

    #[error("duplicate service id {0:?}")]
    DuplicateService(String),

    #[error("duplicate validator id {0:?}")]
    DuplicateValidator(String),

    #[error("dangling edge ({service:?}, {validator:?}): unknown {missing}")]
    DanglingEdge {
        service: String,
        validator: String,
        missing: &'static str,
    },

    #[error("duplicate edge ({service:?}, {validator:?})")]
    DuplicateEdge { service: String, validator: String },

    #[error("validator {id:?} has negative stake {value}")]
    NegativeStake { id: String, value: String },

    #[error("service {id:?} has negative profit {value}")]
    NegativeProfit { id: String, value: String },

    #[error("service {id:?} has alpha {value} outside (0, 1]")]
    InvalidAlpha { id: String, value: String },

    #[error("graph has {count} {side}; at most {max} are supported")]
    TooManyVertices {
        side: &'static str,
        count: usize,
        max: usize,
    },

    #[error("unknown service id {0:?}")]
    UnknownService(String),

    #[error("unknown validator id {0:?}")]
    UnknownValidator(String),

    #[error(
        "graph exceeds the enumeration cap: {services} services / {validators} validators \
         (cap {max_services}/{max_validators}); raise the cap to acknowledge the exponential cost"
    )]
    CapExceeded {
        services: usize,
        validators: usize,
        max_services: usize,
        max_validators: usize,
    },

    #[error("gamma must be nonnegative, got {0}")]
    NegativeGamma(String),

    #[error("psi must lie in [0, 1], got {0}")]
    PsiOutOfRange(String),

    #[error("attack is not a valid attack on this graph; stability is only defined for valid attacks")]
    NotAValidAttack,

    #[error("attacker set {y:?} is not contained in the exclusive validators of {x:?}")]
    HeaderAttackersNotExclusive { x: String, y: String },

    #[error("service {0:?} is not a member of the requested coalition")]
    ServiceOutsideCoalition(String),

    #[error("service {0:?} has zero neighborhood stake; its adjusted threshold is undefined")]
    ZeroNeighborhoodStake(String),

    #[error("coalition has no exclusive validators; its worst-case loss is undefined")]
    NoExclusiveValidators,

    #[error("exclusive validators of the coalition hold zero stake; loss fractions are undefined")]
    ZeroExclusiveStake,

    #[error("graph has zero total stake; loss fractions are undefined")]
    ZeroTotalStake,

    #[error("length bound requires every validator stake to be positive (validator {0:?} has zero)")]
    ZeroStakeValidator(String),

    #[error("length bound requires gamma > 0")]
    NonpositiveGamma,

    #[error("length bound requires psi > 0")]
    NonpositivePsi,

    #[error("reference depth must be at least 1")]
    DepthOutOfRange,

    #[error("length bound exceeds 10^6 steps; inputs are outside desk scale")]
    LengthBoundOverflow,

    #[error("construction parameter {name} out of range: {detail}")]
    ParamConstraint { name: &'static str, detail: String },

    #[error("{0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
