//! Sup-norm concentration bounds for high-dimensional mixingale and linear
//! processes with sub-Weibull tails, plus Monte-Carlo tooling to check them.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the `*F64`
//! aliases below cover the common case.

// `!(a > b)` is used on purpose so NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod autocov;
pub mod bounds;
pub mod error;
pub mod linalg;
pub mod linproc;
pub mod montecarlo;
pub mod orlicz;
pub mod processes;
pub mod scalar;

pub use bounds::{BoundId, BoundInputs, BoundReport, ConstantTrace, OrliczLog};
pub use error::{Error, Result};
pub use linproc::{BNDecomposition, LagPolynomial, PolynomialConstants};
pub use orlicz::SubWeibullSpec;
pub use processes::{Family, MixingaleProfile, ProcessSpec, SamplePath};
pub use scalar::Real;

pub type SubWeibullSpecF64 = SubWeibullSpec<f64>;
pub type SubWeibullSpecF32 = SubWeibullSpec<f32>;
pub type ProcessSpecF64 = ProcessSpec<f64>;
pub type SamplePathF64 = SamplePath<f64>;
pub type SamplePathF32 = SamplePath<f32>;
pub type MixingaleProfileF64 = MixingaleProfile<f64>;
pub type LagPolynomialF64 = LagPolynomial<f64>;
pub type LagPolynomialF32 = LagPolynomial<f32>;
pub type PolynomialConstantsF64 = PolynomialConstants<f64>;
pub type BoundInputsF64 = BoundInputs<f64>;
pub type BoundReportF64 = BoundReport<f64>;
