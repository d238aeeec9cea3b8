//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Parameter validation failed; the message lists every violated inequality.
    #[error("invalid parameters for regime `{regime}`: {violations:?}")]
    InvalidParams {
        regime: String,
        violations: Vec<String>,
    },

    #[error("invalid mode grid: {0}")]
    Grid(String),

    /// Adaptive step size fell below the representable floor.
    #[error("step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },

    /// The step budget was exhausted; the problem is too stiff for the explicit scheme.
    #[error("integration exceeded {max_steps} steps at t = {t}; problem too stiff")]
    Stiff { t: f64, max_steps: u64 },

    #[error("mode failures during ensemble integration: {failed} of {total}; first: {first}")]
    Ensemble {
        failed: usize,
        total: usize,
        first: String,
    },

    #[error("operation requires k = 0 but mode has k = {k}")]
    RequiresZeroK { k: i64 },

    #[error("operation requires k != 0")]
    RequiresNonzeroK,

    #[error("unknown selector `{0}`")]
    UnknownSelector(String),

    #[error("series contains non-positive values inside the fit window")]
    NonPositiveValue,

    #[error("fit window holds {found} points; at least {needed} required")]
    TooFewPoints { found: usize, needed: usize },

    #[error("derivative order {0:?} outside {{0,1}}x{{0,1}}")]
    BadDerivativeOrder((u8, u8)),

    #[error("unknown preset `{name}`; available: {available:?}")]
    UnknownPreset {
        name: String,
        available: Vec<String>,
    },

    #[error("unknown claim `{name}`; available: {available:?}")]
    UnknownClaim {
        name: String,
        available: Vec<String>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("missing L1 norms for the 00-projection of the initial data")]
    MissingL1Data,

    #[error("audit failed: {0}")]
    Audit(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
