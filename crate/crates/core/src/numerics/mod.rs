//! Precision-aware arithmetic, quadrature, differentiation and root bracketing.

pub mod diff;
pub mod estimate;
pub mod linalg;
pub mod poly;
pub mod quadrature;
pub mod real;
pub mod zeros;

pub use diff::{finite_difference, finite_difference_est};
pub use estimate::EstimatedValue;
pub use poly::ExpPoly;
pub use quadrature::{
    integrate, integrate_half_line, integrate_half_line_vec, integrate_vec, radius_from_log_envelope,
    QuadratureConfig, Truncation,
};
pub use real::{Precision, Real};
pub use zeros::{bracket_zeros, bracket_zeros_sampled, bracket_zeros_with_derivative, LocatedZero, ZeroOptions, ZeroReport};
