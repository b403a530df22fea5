//! Exact second-order subdifferential calculus for polyhedral and piecewise
//! linear-quadratic convex functions, and tilt-stability analysis of candidate
//! local minimizers built on top of it.
//!
//! Everything is computed in exact rational arithmetic; there is no floating
//! point anywhere in a verdict path. The geometric core is a double-description
//! converter for polyhedra, from which tangent/normal/critical cones, closed
//! faces and polarity are derived. Second-order subdifferentials of the
//! supported function classes are represented as finite face-pair systems, and
//! an independent brute-force oracle recomputes them from limiting normals to
//! the subgradient graph.
//!
//! ```
//! use so2::linalg::RatVector;
//! use so2::plq::PLQFunction;
//! use so2::poly::nonpos_orthant;
//! use so2::soc::soc_system;
//!
//! // the second-order subdifferential of the indicator of R₋ at (0, 0)
//! let theta = PLQFunction::indicator(nonpos_orthant(1).into_polyhedron()).unwrap();
//! let origin = RatVector::zeros(1);
//! let sys = soc_system(&theta, &origin, &origin).unwrap();
//!
//! // value map: u < 0 ↦ {0},  u = 0 ↦ R,  u > 0 ↦ R₊
//! let up = RatVector::from_i64(&[1]);
//! assert!(sys.membership(&up, &RatVector::from_i64(&[3])).unwrap());
//! assert!(!sys.membership(&up, &RatVector::from_i64(&[-3])).unwrap());
//! assert!(sys.membership(&RatVector::from_i64(&[0]), &RatVector::from_i64(&[-3])).unwrap());
//! ```

pub mod catalog;
pub mod chain;
pub mod cli;
mod error;
pub mod io;
pub mod linalg;
pub mod oracle;
pub mod plq;
pub mod poly;
pub mod qform;
pub mod rat;
pub mod soc;
pub mod tilt;

pub use error::Error;
pub use rat::Rat;

/// Result alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;
