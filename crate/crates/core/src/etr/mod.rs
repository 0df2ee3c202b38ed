//! Sets defined by effective transfinite recursion over a well-order.

mod direct;
mod engine;
mod instance;
mod trace;
mod validate;

pub use direct::{direct_membership, DirectEvaluator};
pub use engine::{ApproxFailure, Built, Certificate, Engine, Section};
pub use instance::{lift_key, lower_key, Instance};
pub use trace::{EventKind, TraceEvent, TraceSink};
pub use validate::{cross_validate, Disagreement, ValidationReport};
