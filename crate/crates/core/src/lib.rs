//! Numerical laboratory for admissible kernels, their cosine transforms,
//! Laguerre-type expressions, associated positive-definite kernels and
//! moment inequalities of the Jacobi theta kernel.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` deliberately rejects NaN.

pub mod error;
pub mod numerics;
pub mod kernels;
pub mod theta;
pub mod transform;
pub mod laguerre;
pub mod assoc_pd;
pub mod moments;

pub use error::{Error, Result};
pub use numerics::{EstimatedValue, Precision, QuadratureConfig, Real, Truncation, ZeroReport};
pub use kernels::{AdmissibilityReport, KernelDescriptor, KernelFamily};
pub use transform::TransformSpec;
pub use laguerre::{LaguerreProfile, Route};
pub use assoc_pd::{AssocKernel, PDReport, Verdict};
pub use moments::{MomentTable, TuranMarginReport};
