//! Effective transfinite recursion: sets `Y ⊆ X × ℕ` defined over a
//! well-order `X` by a pair of Σ⁰₁ conditions, decided through finite
//! approximations.

pub mod cli;
pub mod error;
pub mod etr;
pub mod fgh;
pub mod pairing;
pub mod partialfn;
pub mod predicate;
pub mod verdict;
pub mod wellorder;

pub use error::{Error, Result};
pub use partialfn::FinitePartialFn;
pub use predicate::{BasePredicatePair, Side};
pub use verdict::{Fuel, Verdict};
pub use wellorder::WellOrder;
