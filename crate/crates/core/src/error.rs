use thiserror::Error;

/// Errors raised anywhere in the lab.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Operands disagree on variable count, order or vector length.
    #[error("structural mismatch: {0}")]
    Structure(String),

    /// Evaluation outside the domain of an operation (zero divisor, nonzero
    /// constant term where zero is required, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A linear map that must be invertible is (numerically) singular.
    #[error("singular {what}: condition number {condition:.3e}")]
    Singular { what: String, condition: f64 },

    /// A trajectory left the chart domain or the complex tube around it.
    #[error("left the chart domain at {fraction:.4} of the path ({detail})")]
    DomainExit { fraction: f64, detail: String },

    /// A trajectory or coefficient vector exceeded the configured bound.
    #[error("blow-up at {fraction:.4} of the path: magnitude {magnitude:.3e}")]
    BlowUp { fraction: f64, magnitude: f64 },

    /// A jet vector field was evaluated outside its trust radius.
    #[error("left the trust radius {radius} (distance {distance:.4})")]
    TrustRadius { radius: f64, distance: f64 },

    /// A point is outside the patch overlap or sits on a pole.
    #[error("twistor coordinate error: {0}")]
    Twistor(String),

    /// The manifold has no metric but the operation needs one.
    #[error("manifold has no metric")]
    NoMetric,

    /// The connection is not flat.
    #[error("connection is not flat: curvature {curvature:.3e} exceeds {threshold:.1e}")]
    NotFlat { curvature: f64, threshold: f64 },

    /// A rank decision fell inside the ambiguous band of singular values.
    #[error("marginal rank: singular value {value:.3e} is within the ambiguous band")]
    MarginalRank { value: f64 },

    /// Bad user or file configuration.
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
