use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("chain {chain} out of range (space has {chain_count} chains)")]
    InvalidChain { chain: usize, chain_count: usize },

    #[error("functions are defined over different chain counts ({left} vs {right})")]
    MismatchedChains { left: usize, right: usize },

    #[error("invalid weights on chain {chain}: {reason}")]
    InvalidWeights { chain: usize, reason: String },

    #[error("argument must be positive")]
    ZeroArgument,

    #[error("cell index overflow: {0}")]
    IndexOverflow(String),

    #[error("empty checkpoint range t in [{t_min}, {t_max}]")]
    EmptyCheckpointRange { t_min: u32, t_max: u32 },

    #[error("checkpoint 3^{t} does not exceed n + 1 = {}", n + 1)]
    CheckpointTooSmall { t: u32, n: u64 },

    #[error("z0 must be nonzero")]
    ZeroZ0,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid base space: {0}")]
    InvalidBaseSpace(String),

    #[error("no z0 on the scan grid captures an infinite half-strip (densest direction {best_direction:.6} rad, best captured measure {best_measure})")]
    NoZ0Found { best_direction: f64, best_measure: f64 },

    #[error("complement too large: {0}")]
    ComplementTooLarge(String),

    #[error("cell measure {cell_measure} is not an integer multiple of the per-period captured measure {per_period}")]
    MisalignedCellMeasure { cell_measure: f64, per_period: f64 },

    #[error("function is not aligned with the partition: {0}")]
    MisalignedFunction(String),

    #[error("function is only exact below period {0}")]
    NotExact(u64),

    #[error("perturbation norm {norm} is not below margin/3 = {limit}")]
    NormTooLarge { norm: f64, limit: f64 },

    #[error("no clamp split achieves both part norms below {0}")]
    SplitNotFound(f64),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },
}
