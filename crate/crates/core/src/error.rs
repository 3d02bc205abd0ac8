use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Serialize)]
pub enum Error {
    #[error("bandwidth {bandwidth} too small for scale {delta}: need at least {required}")]
    BandwidthTooSmall {
        bandwidth: usize,
        delta: f64,
        required: usize,
    },
    #[error("scale {0} outside (0, 1]")]
    InvalidScale(f64),
    #[error("Hölder exponent {0} outside (0, 1)")]
    InvalidGamma(f64),
    #[error("grid {grid} below 8 x bandwidth {bandwidth}")]
    GridTooSmall { grid: usize, bandwidth: usize },
    #[error("dimension {n} aliases bandwidth {bandwidth} (need n > 2 * bandwidth)")]
    AliasingError { n: usize, bandwidth: usize },
    #[error("pullback bandwidth {bandwidth} reaches n/2 at t = {t} (n = {n})")]
    AliasLimited { t: i64, n: usize, bandwidth: usize },
    #[error("exact pullback bandwidth {bandwidth} exceeds cap {cap}")]
    BandwidthOverflow { bandwidth: usize, cap: usize },
    #[error("truncation residual {residual:.3e} above 1e-4 at bandwidth {bandwidth}")]
    TruncationWarning { residual: f64, bandwidth: usize },
    #[error("need at least 3 points for a fit, got {0}")]
    FitDegenerate(usize),
    #[error("map matrix {0:?} is not hyperbolic with unit determinant")]
    NotHyperbolic([[i64; 2]; 2]),
    #[error("map matrix {0:?} fails the quantization parity condition")]
    ParityError([[i64; 2]; 2]),
    #[error("map matrix {0:?} has zero upper-right entry")]
    SingularError([[i64; 2]; 2]),
    #[error("matrix is not unitary: |U*U - I| = {0:.3e}")]
    NotUnitary(f64),
    #[error("eigensolver failed: {0}")]
    ConvergenceFailure(String),
    #[error("radius {r} below 2/N = {min}")]
    RadiusTooSmall { r: f64, min: f64 },
    #[error("window {0} contains no dimension")]
    EmptyWindow(usize),
    #[error("reduction did not terminate after {0} steps")]
    ReductionFailure(usize),
    #[error("scale {delta} exceeds the injectivity cap {cap}")]
    ScaleExceedsInjectivity { delta: f64, cap: f64 },
    #[error("no time point has correlation above 3 standard errors")]
    SignalBelowNoise,
    #[error("candidate spacing {spacing:.4} is coarser than r/6 = {limit:.4}")]
    GridTooCoarse { spacing: f64, limit: f64 },
    #[error("certificate {property} failed at witness {witness:?}")]
    CertificateFailure { property: &'static str, witness: [f64; 2] },
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
