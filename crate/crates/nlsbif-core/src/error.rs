use thiserror::Error;

/// Error type shared by all solver modules.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("stencil order {0} not supported (expected 2 or 4)")]
    InvalidOrder(usize),
    #[error("operation requires a double-well potential, got {0}")]
    UnsupportedPotential(String),
    #[error("invalid potential: {0}")]
    InvalidPotential(String),
    #[error("invalid problem parameters: {0}")]
    InvalidParams(String),
    #[error("operator has no bound state below the continuum edge")]
    NoBoundState,
    #[error("eigensolver failed: {0}")]
    EigenFailure(String),
    #[error("non-finite value in input field")]
    NonFiniteInput,
    #[error("right-hand side not orthogonal to the deflation vector (|<rhs,k>| = {0:.3e})")]
    RhsNotOrthogonal(f64),
    #[error("linear solve failed: {0}")]
    SolveFailure(String),
    #[error("Newton did not converge within {max_iter} iterations (last residual {residual:.3e})")]
    MaxIterExceeded { max_iter: usize, residual: f64 },
    #[error("Newton iterates collapsed to the trivial zero solution")]
    DivergedToZero,
    #[error("Jacobian has an eigenvalue within {guard:.1e} of zero (found {lambda:.3e}); use continuation/branch-switch logic")]
    SingularJacobian { lambda: f64, guard: f64 },
    #[error("E on the wrong side of E0 for this nonlinearity sign (E-E0 = {0:.3e})")]
    WrongSideOfE0(f64),
    #[error("E + V(x0) = {0:.3e} is not positive; no soliton scale exists there")]
    NonpositiveShiftedE(f64),
    #[error("continuation step underflow at E = {e:.8}: dE fell below {de_min:.3e}")]
    StepUnderflow { e: f64, de_min: f64 },
    #[error("state collapsed to zero mid-branch at E = {0:.8}")]
    StateCollapsed(f64),
    #[error("spectral data missing for stability classification")]
    MissingSpectrum,
    #[error("eigenvalue bracket lost after re-solve near E = {0:.8}: the crossing is likely a grid artifact; rerun with a finer dx")]
    BracketLost(f64),
    #[error("lambda'(E*) = {0:.3e} is within the degeneracy tolerance; pitchfork coefficients are unreliable")]
    DegenerateLambdaPrime(f64),
    #[error("Q = 0; R is undefined")]
    ZeroQ,
    #[error("branch switch fell back to the symmetric state (asymmetry {0:.3e}); increase a0 or check the crossing")]
    FellBackToSymmetric(f64),
    #[error("x0 = {x0} is not a critical point of V (V'(x0) = {vprime:.3e})")]
    NotCriticalPoint { x0: f64, vprime: f64 },
    #[error("fit window [{0}, {1}] spans less than a decade of E")]
    WindowTooNarrow(f64, f64),
    #[error("state under-resolved: soliton width / dx = {0:.2} < 8")]
    UnderResolved(f64),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;
