use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid deformation parameter: {0}")]
    InvalidQ(String),

    #[error("invalid parameters: {0}")]
    InvalidSpec(String),

    #[error("series has zero constant term and cannot be inverted")]
    ZeroConstantTerm,

    #[error("degree {requested} exceeds the series order budget {order}")]
    OrderExceeded { requested: usize, order: usize },

    #[error("{0} is not an odd prime")]
    InvalidPrime(u64),

    #[error("p-adic precision {0} is out of range for this prime")]
    InvalidPrecision(u32),

    #[error("inverse of a non-unit (valuation {valuation})")]
    NonUnitInverse { valuation: u32 },

    #[error("rational {0} is not p-integral")]
    NotPadicIntegral(String),

    #[error("p-adic q must satisfy v_p(q - 1) >= 1")]
    InvalidPadicQ,

    #[error("stabilization needs level {level}, beyond the work bound {bound}")]
    LevelTooSmall { level: u32, bound: u64 },

    #[error("lattice sum needs {required} terms, beyond the work bound {bound}")]
    WorkBoundExceeded { required: u64, bound: u64 },

    #[error("Riemann sums did not stabilize by level {level} (last difference valuation {valuation})")]
    NotStabilized { level: u32, valuation: u32 },

    #[error("character modulus {0} is even")]
    EvenModulus(u64),

    #[error("character modulus {0} is out of range")]
    ModulusOutOfRange(u64),

    #[error("character is not real-valued; p-adic mode needs values in {{-1, 0, 1}}")]
    NonRealCharacter,

    #[error("denominator magnitude {0:e} is below the guard threshold")]
    SmallDenominator(f64),

    #[error("no convergence: residual {residual:e} above tolerance {tolerance:e}")]
    NoConvergence { residual: f64, tolerance: f64 },

    #[error("series is not Abel summable: {0}")]
    NotSummable(String),

    #[error("|t| = {t} is outside the expansion radius {radius}")]
    RadiusExceeded { t: f64, radius: f64 },

    #[error("Re(s) = {re_s} is outside the convergence region Re(s) > {order}")]
    OutsideConvergenceRegion { re_s: f64, order: usize },

    #[error("quadrature budget of {0} panels exceeded")]
    QuadratureBudgetExceeded(usize),

    #[error("gamma function pole at s = {0}")]
    PoleOfGamma(f64),
}

impl Error {
    /// Stable identifier used in machine-readable output.
    pub fn name(&self) -> &'static str {
        match self {
            Error::InvalidQ(_) => "InvalidQ",
            Error::InvalidSpec(_) => "InvalidSpec",
            Error::ZeroConstantTerm => "ZeroConstantTerm",
            Error::OrderExceeded { .. } => "OrderExceeded",
            Error::InvalidPrime(_) => "InvalidPrime",
            Error::InvalidPrecision(_) => "InvalidPrecision",
            Error::NonUnitInverse { .. } => "NonUnitInverse",
            Error::NotPadicIntegral(_) => "NotPadicIntegral",
            Error::InvalidPadicQ => "InvalidPadicQ",
            Error::LevelTooSmall { .. } => "LevelTooSmall",
            Error::WorkBoundExceeded { .. } => "WorkBoundExceeded",
            Error::NotStabilized { .. } => "NotStabilized",
            Error::EvenModulus(_) => "EvenModulus",
            Error::ModulusOutOfRange(_) => "ModulusOutOfRange",
            Error::NonRealCharacter => "NonRealCharacter",
            Error::SmallDenominator(_) => "SmallDenominator",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::NotSummable(_) => "NotSummable",
            Error::RadiusExceeded { .. } => "RadiusExceeded",
            Error::OutsideConvergenceRegion { .. } => "OutsideConvergenceRegion",
            Error::QuadratureBudgetExceeded(_) => "QuadratureBudgetExceeded",
            Error::PoleOfGamma(_) => "PoleOfGamma",
        }
    }
}
