use thiserror::Error;

/// Failure modes shared by every module. Numerical operations never return
/// NaN or infinity silently; they fail with one of these instead.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate modulus: k^2 = {0} lies in {{0, 1}} or is not finite")]
    DegenerateModulus(String),
    #[error("iteration failed to converge: {0}")]
    NonConvergence(String),
    #[error("argument within guard distance {guard} of a pole")]
    PoleProximity { guard: f64 },
    #[error("nome |q| = {0} is not inside the unit disc")]
    NomeOutOfDisc(f64),
    #[error("tau = {0} is not in the upper half-plane")]
    LowerHalfPlane(String),
    #[error("image tau = {0} is real; the input tau is invalid")]
    ParabolicImage(String),
    #[error("xi = {0} gives a logarithmic local solution")]
    LogarithmicCase(String),
    #[error("coefficient overflow at index {0}")]
    Overflow(usize),
    #[error("|sn| = {value} is outside the convergence radius {radius}")]
    OutsideConvergence { value: f64, radius: f64 },
    #[error("recursion weight M_{0} vanishes")]
    DegenerateRecursion(usize),
    #[error("continued fraction has a vanishing partial denominator at level {0}")]
    ZeroPivot(usize),
    #[error("root {root} moved by {shift:e} when the depth doubled")]
    DepthUnstable { root: String, shift: f64 },
    #[error("|k| = 1 puts the modulus on the unit circle")]
    ModulusOnUnitCircle,
    #[error("ratio diagnostic needs at least {need} coefficients, got {got}")]
    InsufficientData { need: usize, got: usize },
    #[error("calibration residual {0:e} exceeds 1e-9")]
    UntrustedCalibration(f64),
    #[error("Wronskian mean is numerically zero")]
    DegenerateWronskian,
    #[error("both L-variants pass; the disputed term vanishes on this test set")]
    Inconclusive,
    #[error("no termination relation holds for these parameters")]
    NoTermination,
    #[error("malformed table data: {0}")]
    TableData(String),
    #[error("{0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;
