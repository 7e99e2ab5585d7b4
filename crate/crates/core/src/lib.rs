//! Moment-SOS relaxations of a parametric polynomial optimization problem,
//! an extended-precision SDP solver, SOS certificate tooling and the
//! threshold ("staircase") computation built on top of them.

pub mod bipoly;
pub mod certificates;
pub mod error;
pub mod gram;
pub mod linalg;
pub mod poly;
pub mod relaxation;
pub mod scalar;
pub mod sdp;
pub mod staircase;

pub use bipoly::BiPoly;
pub use linalg::Matrix;
pub use poly::UniPoly;
pub use scalar::{BigScalar, QuadraticSurd, Rational, Scalar, DEFAULT_PREC};
