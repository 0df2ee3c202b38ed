use thiserror::Error;

use crate::partialfn::FinitePartialFn;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{x} is not a member of the well order")]
    NotAMember { x: u64 },

    #[error("partial functions disagree at key {key}")]
    IncompatibleEntries { key: u64 },

    /// Both base predicates are witnessed by verified approximations at
    /// `(x, n)`. The instance's premise is false, so the recursion has no
    /// conclusion there.
    #[error("premise violated at x={x}, n={n}")]
    PremiseViolation {
        x: u64,
        n: u64,
        phi_witness: FinitePartialFn,
        psi_witness: FinitePartialFn,
    },

    #[error("given function is not a verified {x}-approximation")]
    NotAnApproximation { x: u64, f: FinitePartialFn },

    #[error("step budget of {budget} exhausted")]
    BudgetExhausted { budget: u64 },
}
