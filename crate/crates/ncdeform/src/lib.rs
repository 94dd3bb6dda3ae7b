//! Exact operator realizations, momentum-space flow and star products for
//! Lie-algebraic deformations of Minkowski space that interpolate between
//! kappa-Minkowski and Snyder space.
//!
//! The crate has two computational worlds that cross-check each other:
//!
//! * an exact engine over Gaussian rationals — the normal-ordered Weyl
//!   algebra, truncated derivative series, operator realizations of the
//!   noncommutative coordinates and every algebraic identity they satisfy,
//!   plus exact bivariate momentum series for the deformed addition law and
//!   the star product;
//! * a floating mirror — the closed-form momentum flow, its Runge-Kutta
//!   oracle, Newton inversion of the momentum map and the numeric coproduct
//!   checks.
//!
//! Start with the runnable examples (`cargo run --example axioms`) or the
//! `ncdeform` binary for config-driven verification reports.

pub mod error;
pub mod index;
pub mod params;
pub mod poly;
pub mod scalar;

pub mod dseries;
pub mod flow;
pub mod realization;
pub mod report;
pub mod weyl;

pub use error::{AlgebraError, ConfigError, EvalError, FlowError, SyntaxError};
pub use index::MultiIndex;
pub use params::{DeformationParams, FloatParams};
pub use poly::Polynomial;
pub use scalar::ExactScalar;
pub use weyl::WeylElement;
