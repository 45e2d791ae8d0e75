//! Dense-tensor substrate: the exact forward operations the network needs,
//! each paired with a hand-derived backward rule, plus a finite-difference
//! checker that validates every rule against central differences.

mod gradcheck;
mod ops;
mod scalar;
mod tensor;

pub use gradcheck::{finite_diff_check, FiniteDiffReport};
pub use ops::*;
pub use scalar::{Dtype, Scalar};
pub use tensor::{Parameter, Tensor};
