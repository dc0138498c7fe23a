use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("element has valuation {0} < 0 and does not lie in the valuation ring")]
    NegativeValuation(i64),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("objects are defined over different primes: {0} vs {1}")]
    PrimeMismatch(u64, u64),
    #[error("lattice is not contained in the ambient lattice")]
    NotContained,
    #[error("basis matrix is singular")]
    SingularBasis,
    #[error("bilinear form is degenerate")]
    DegenerateForm,
    #[error("{0} matrix is not ε-symmetric")]
    NotEpsilonSymmetric(&'static str),
    #[error("lattice is not almost self-dual")]
    NotAlmostSelfDual,
    #[error("residual form {0} is degenerate over the residue field")]
    DegenerateResidual(&'static str),
    #[error("operation requires a symmetric form")]
    WrongEpsilon,
    #[error("quadratic operations need an odd residue characteristic")]
    EvenResidueChar,
    #[error("group action did not stabilize a lattice within {0} spinning rounds")]
    UnboundedAction(usize),
    #[error("lattice is not stable under generator {0}")]
    NotStable(usize),
    #[error("generator counts differ: {0} vs {1}")]
    GeneratorCountMismatch(usize, usize),
    #[error("form is not compatible with generator {0}")]
    IncompatibleForm(usize),
    #[error("form is not invariant under generator {0} (g^T B g != B)")]
    NotInvariant(usize),
    #[error("symmetric forms need p != 2")]
    WrongCharacteristic,
    #[error("generator {0} is not invertible")]
    SingularGenerator(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
