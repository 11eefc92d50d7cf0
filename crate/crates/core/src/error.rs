use thiserror::Error;

/// Errors surfaced by the modelling and optimization routines.
#[derive(Debug, Error)]
pub enum Error {
    /// A constructor or operation was handed an argument outside its domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The eavesdropper Gram matrix is too ill-conditioned to invert; the
    /// null-space branch of the optimality condition is reported, not solved.
    #[error("eavesdropper Gram matrix is singular or near-singular (condition estimate {condition:.3e})")]
    SingularGram { condition: f64 },

    /// The requested UE SNR exceeds what the box constraint allows.
    #[error("required UE SNR {required:.6e} unattainable; maximum over the weight box is {attainable:.6e}")]
    Infeasible { required: f64, attainable: f64 },

    /// The iterative fallback solver did not reach its tolerance.
    #[error("solver did not converge within {iterations} iterations (last objective decrease {last_decrease:.3e})")]
    NoConvergence { iterations: usize, last_decrease: f64 },
}
