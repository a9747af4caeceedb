use thiserror::Error;

/// Failures raised by the numerical contracts of this crate.
///
/// The message prefix names the module whose contract failed, so that the
/// CLI can surface it verbatim.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("manifold_geometry: point {point:?} lies outside the parameter domain")]
    Domain { point: Vec<f64> },
    #[error("manifold_geometry: measure density vanishes at {point:?}")]
    InvalidMeasure { point: Vec<f64> },
    #[error("manifold_geometry: P dX vanishes (|P| = {norm:e})")]
    ConditionViolated { norm: f64 },
    #[error("manifold_geometry: dimension mismatch, expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("maslov_index: Jacobian vanishes along the path near t = {t}; regularization needed")]
    RegularizationNeeded { t: f64 },
    #[error("{context}: no convergence ({detail})")]
    Nonconvergence { context: &'static str, detail: String },
    #[error("maslov_index: {which} endpoint of the path is focal")]
    InvalidEndpoint { which: &'static str },
    #[error("maslov_index: index limit {raw} is not within 0.1 of an integer")]
    IndexInconsistent { raw: f64 },
    #[error("maslov_index: eigenvalue argument {arg} outside [-pi/2, pi/2]")]
    NumericalBranch { arg: f64 },
    #[error("maslov_index: degenerate chart ({0})")]
    DegenerateChart(String),
    #[error("maslov_index: degenerate signature (eigenvalue {eigenvalue:e})")]
    DegenerateSignature { eigenvalue: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("canonical_operator: point outside the chart ({0})")]
    OutsideChart(String),
    #[error("canonical_operator: implicit system leaves W (condition number {condition:e})")]
    LeavingW { condition: f64 },
    #[error("canonical_operator: det M = {det:e} is degenerate")]
    DegenerateM { det: f64 },
    #[error("{context}: quadrature did not reach tolerance (achieved {achieved:e})")]
    Accuracy { context: &'static str, achieved: f64 },
    #[error("canonical_operator: preimage Jacobian {jacobian:e} too close to the caustic; use the singular-chart formula")]
    NearCaustic { jacobian: f64 },
    #[error("canonical_operator: canonical coordinates invalid ({0})")]
    CoordinateChart(String),
    #[error("canonical_operator: amplitude support not covered by the partition (deviation {deviation:e})")]
    Coverage { deviation: f64 },
    #[error("canonical_operator: path is not closed (gap {gap:e})")]
    NotACycle { gap: f64 },

    #[error("oscillatory: degenerate stationary point at {theta:?}")]
    Fold { theta: Vec<f64> },
    #[error("oscillatory: window truncation estimate {estimate:e} exceeds tolerance")]
    WindowTruncation { estimate: f64 },

    #[error("fourier_bridge: precondition violated ({0})")]
    Precondition(String),
    #[error("fourier_bridge: density factor {value:e} is not a valid nonzero measure ratio")]
    InconsistentMeasure { value: f64 },

    #[error("examples: caustic onset reached (value {value:e})")]
    CausticOnset { value: f64 },
    #[error("examples: profile must be positive (got {value})")]
    Profile { value: f64 },
    #[error("examples: oracle is singular at this point")]
    SingularOracle,
}

pub type Result<T> = std::result::Result<T, Error>;
