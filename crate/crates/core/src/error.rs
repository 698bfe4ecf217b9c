use thiserror::Error;

/// Errors raised by observable evaluation and the checks built on it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The point lies outside (or within the guard distance of the edge of) the
    /// domain where the formula is defined.
    #[error("domain violation: {0}")]
    Domain(String),

    /// The point sits on the monopole/Coulomb singularity at the origin.
    #[error("singular point: {0}")]
    Singularity(String),

    /// A coordinate chart degenerates (axis points, vanishing Jacobian).
    #[error("coordinate degeneracy: {0}")]
    Degenerate(String),

    /// A caller-supplied value does not satisfy the operation's contract.
    #[error("contract violated: {0}")]
    Contract(String),

    /// A quantity that must be real picked up an imaginary part.
    #[error("imaginary residue {residue:e} in {what}")]
    ImaginaryResidue { what: String, residue: f64 },

    /// Nested differentiation deeper than the engine supports.
    #[error("derivative order exceeded while evaluating {0}")]
    DerivativeOrder(String),

    /// The parameter set is incompatible with the requested system or operation.
    #[error("invalid parameters: {0}")]
    Params(String),
}

pub type Result<T> = std::result::Result<T, Error>;
