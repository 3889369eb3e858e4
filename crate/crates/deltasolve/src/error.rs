use thiserror::Error;

/// Errors surfaced by the numerical engine.
#[derive(Debug, Clone, Error)]
pub enum EngineError {
    /// The coupling matrix Gamma is numerically singular at the requested
    /// spectral parameter (condition number above the configured cap). This
    /// is the regime excluded by the invertibility assumption of the decay
    /// estimate; for N=1 it corresponds to the zero-energy resonance alpha=0.
    #[error("Gamma matrix singular or ill-conditioned at mu = {mu}: cond = {cond:.3e}")]
    SingularGamma { mu: f64, cond: f64 },

    /// An evaluation point coincides with an interaction center (or the two
    /// kernel arguments coincide), where the kernel is singular.
    #[error("evaluation point within {threshold:.1e} of a kernel singularity ({what})")]
    CenterCoincidence { what: &'static str, threshold: f64 },

    /// The cutoff ladder did not stabilize: results at successive cutoffs M
    /// and 2M differ by more than the requested tolerance.
    #[error("spectral integral did not converge at t = {t}: M = {m}, residual {residual:.3e} > tol {tol:.3e}")]
    ConvergenceFailure { t: f64, m: f64, residual: f64, tol: f64 },

    /// Input outside a function's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Decay-rate fit on degenerate data (vanishing norms or too few samples).
    #[error("degenerate decay fit: {0}")]
    DegenerateFit(String),

    /// Invalid interaction or datum construction.
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, EngineError>;
